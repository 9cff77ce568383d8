#pragma once

#include "mmrope/analysis.hpp"
#include "mmrope/dyadic.hpp"
#include "mmrope/freq.hpp"
#include "mmrope/io.hpp"
#include "mmrope/position.hpp"
#include "mmrope/rotary.hpp"
#include "mmrope/stream.hpp"
