// Shared test scaffolding: fixture paths, stream generators and the
// independent oracles the module tests check the implementation against.
// Oracles are deliberately written from scratch (plain doubles, manual
// cos/sin accumulation) so they share no code path with the library.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "mmrope/mmrope.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) {
  return std::string(MMROPE_FIXTURES_DIR) + "/" + name;
}

// ---- stream generators -------------------------------------------------

inline mmrope::TokenStream random_text_stream(std::mt19937_64& rng, int max_segments = 5,
                                              int max_len = 12) {
  std::uniform_int_distribution<int> nseg(1, max_segments);
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<int> role(0, 1);
  mmrope::TokenStream s;
  const int n = nseg(rng);
  for (int i = 0; i < n; ++i) {
    s.segments.push_back(mmrope::Segment::text(
        len(rng), role(rng) == 0 ? mmrope::Role::Prompt : mmrope::Role::Generated));
  }
  return s;
}

// Mixed stream bounded by a token budget.
inline mmrope::TokenStream random_stream(std::mt19937_64& rng, std::int64_t max_tokens) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> len(1, 16);
  std::uniform_int_distribution<int> extent(1, 8);
  std::uniform_int_distribution<int> frames(1, 4);
  std::uniform_int_distribution<int> role(0, 3);
  mmrope::TokenStream s;
  std::int64_t total = 0;
  while (total < max_tokens) {
    mmrope::Segment seg;
    switch (kind(rng)) {
      case 0:
        seg = mmrope::Segment::text(len(rng), role(rng) == 0 ? mmrope::Role::Generated
                                                             : mmrope::Role::Prompt);
        break;
      case 1: seg = mmrope::Segment::image(extent(rng), extent(rng)); break;
      default: seg = mmrope::Segment::video(frames(rng), extent(rng), extent(rng)); break;
    }
    if (total + seg.token_count() > max_tokens && !s.segments.empty()) break;
    s.segments.push_back(seg);
    total += seg.token_count();
  }
  return s;
}

// ---- independent oracles -----------------------------------------------

struct OracleTriple {
  double t, h, w;
};

// Brute-force re-implementation of the 3D update rule: a running counter,
// per-block coordinates, and a jump past the block max (or a token-count
// advance). Strides are multiples of 1/256 so doubles are exact here.
inline std::vector<OracleTriple> oracle_mrope(const mmrope::TokenStream& stream, bool spatial_reset,
                                              double delta, bool vanilla_interval) {
  std::vector<OracleTriple> out;
  double p = 0.0;
  for (const mmrope::Segment& seg : stream.segments) {
    if (seg.kind == mmrope::Modality::Text) {
      for (std::int64_t i = 0; i < seg.len; ++i) {
        out.push_back({p, p, p});
        p += 1.0;
      }
      continue;
    }
    const double p0 = p;
    double block_max = p0;
    const std::int64_t frames = seg.kind == mmrope::Modality::Video ? seg.t_frames : 1;
    for (std::int64_t f = 0; f < frames; ++f) {
      const double t = p0 + static_cast<double>(f) * delta;
      for (std::int64_t r = 0; r < seg.h; ++r) {
        for (std::int64_t c = 0; c < seg.w; ++c) {
          const double hh = spatial_reset ? static_cast<double>(r) : t + static_cast<double>(r);
          const double ww = spatial_reset ? static_cast<double>(c) : t + static_cast<double>(c);
          out.push_back({t, hh, ww});
          block_max = std::max(block_max, std::max(t, std::max(hh, ww)));
        }
      }
    }
    p = vanilla_interval ? p0 + static_cast<double>(frames * seg.h * seg.w) : block_max + 1.0;
  }
  return out;
}

// Direct trigonometric accumulation of |S_j| = |sum_{k<j} e^(i d theta_k)|,
// no std::complex involved.
inline std::vector<double> oracle_partial_sums(const std::vector<double>& thetas, double delta) {
  std::vector<double> out;
  double re = 0.0, im = 0.0;
  for (double th : thetas) {
    re += std::cos(delta * th);
    im += std::sin(delta * th);
    out.push_back(std::sqrt(re * re + im * im));
  }
  return out;
}

inline double oracle_decay_indicator(const std::vector<double>& thetas, double delta) {
  const std::vector<double> mags = oracle_partial_sums(thetas, delta);
  double sum = 0.0;
  for (double m : mags) sum += m;
  return sum / static_cast<double>(mags.size());
}

// Plain 1D RoPE rotation of v at scalar position m; the formulas mirror the
// textbook definition and must agree with the library bit for bit when the
// allocation does not alter the frequencies.
inline std::vector<double> oracle_vanilla_rotate(const std::vector<double>& v, double m, int d,
                                                 double base) {
  std::vector<double> out(v.size());
  for (int i = 0; i < d / 2; ++i) {
    const double theta = std::pow(base, -2.0 * static_cast<double>(i) / d);
    const double c = std::cos(m * theta);
    const double s = std::sin(m * theta);
    const double x = v[static_cast<std::size_t>(2 * i)];
    const double y = v[static_cast<std::size_t>(2 * i + 1)];
    out[static_cast<std::size_t>(2 * i)] = x * c - y * s;
    out[static_cast<std::size_t>(2 * i + 1)] = x * s + y * c;
  }
  return out;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(d));
  for (double& x : v) x = u(rng);
  return v;
}

// Random dyadic-valued triple with |components| <= bound.
inline mmrope::PosTriple random_triple(std::mt19937_64& rng, std::int64_t bound) {
  std::uniform_int_distribution<std::int64_t> raw(-bound * 256, bound * 256);
  return {mmrope::Dyadic::from_raw(raw(rng)), mmrope::Dyadic::from_raw(raw(rng)),
          mmrope::Dyadic::from_raw(raw(rng))};
}

// ---- criterion 5 statistic ----------------------------------------------
// Decay profiles are compared after normalizing each axis curve by its
// delta=0 value and smoothing with a centered moving average (half-window
// 16 of the 200-point geometric grid); the statistic is the mean pointwise
// relative divergence. Raw pointwise comparison measures phasor
// interference, not the profile.

inline std::vector<double> smooth_profile(const std::vector<double>& c, int half_window = 16) {
  std::vector<double> out(c.size());
  const int n = static_cast<int>(c.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_window);
    const int hi = std::min(n, i + half_window + 1);
    double sum = 0.0;
    for (int j = lo; j < hi; ++j) sum += c[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / (hi - lo);
  }
  return out;
}

inline double profile_divergence(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::abs(a[i] - b[i]) / std::max(a[i], b[i]);
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace testutil
