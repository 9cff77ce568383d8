#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrope/position.hpp"
#include "mmrope/stream.hpp"

namespace mmrope {

enum class Axis { T, H, W };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::T: return "T";
    case Axis::H: return "H";
    default: return "W";
  }
}

inline Axis parse_axis(const std::string& s) {
  if (s == "T" || s == "t") return Axis::T;
  if (s == "H" || s == "h") return Axis::H;
  if (s == "W" || s == "w") return Axis::W;
  throw std::invalid_argument("unknown axis '" + s + "' (expected T, H or W)");
}

// Geometric frequency table: theta_i = base^(-2i/d) for i in [0, d/2).
struct FreqTable {
  int d = 0;
  double base = 0.0;
  std::vector<double> theta;
};

inline FreqTable base_frequencies(int d, double base) {
  if (d < 2 || d % 2 != 0) throw std::invalid_argument("head dimension must be even and >= 2");
  if (!(base > 1.0)) throw std::invalid_argument("rotary base must be > 1");
  FreqTable t{d, base, {}};
  t.theta.resize(static_cast<std::size_t>(d / 2));
  for (int i = 0; i < d / 2; ++i) {
    t.theta[static_cast<std::size_t>(i)] = std::pow(base, -2.0 * static_cast<double>(i) / d);
  }
  return t;
}

enum class AllocScheme { Chunked, Interleaved, VideoRopeLike, IlRopeLike };

inline const char* scheme_name(AllocScheme s) {
  switch (s) {
    case AllocScheme::Chunked: return "chunked";
    case AllocScheme::Interleaved: return "interleaved";
    case AllocScheme::VideoRopeLike: return "videorope-like";
    default: return "ilrope-like";
  }
}

// Channel-pair counts per axis; must sum to d/2.
struct AxisRatio {
  int t = 0, h = 0, w = 0;
  int sum() const { return t + h + w; }
  int of(Axis a) const { return a == Axis::T ? t : a == Axis::H ? h : w; }
  std::string to_string() const {
    return std::to_string(t) + ":" + std::to_string(h) + ":" + std::to_string(w);
  }
};

struct FreqAllocation {
  AllocScheme scheme = AllocScheme::Interleaved;
  AxisRatio ratio;
  std::vector<Axis> axis_of;  // one tag per channel pair, index order
  // "scaling rotary base" ablation: per-axis bases (t, h, w) replacing the
  // shared table base for the pairs of that axis.
  std::optional<std::array<double, 3>> per_axis_base;
};

namespace detail {

inline void check_ratio(int d, const AxisRatio& r) {
  if (r.t < 0 || r.h < 0 || r.w < 0 || r.sum() != d / 2) {
    throw std::invalid_argument("allocation ratio " + r.to_string() + " must be non-negative and sum to d/2 = " +
                                std::to_string(d / 2));
  }
}

}  // namespace detail

inline FreqAllocation alloc_chunked(int d, const AxisRatio& ratio) {
  detail::check_ratio(d, ratio);
  FreqAllocation a{AllocScheme::Chunked, ratio, {}, {}};
  a.axis_of.insert(a.axis_of.end(), static_cast<std::size_t>(ratio.t), Axis::T);
  a.axis_of.insert(a.axis_of.end(), static_cast<std::size_t>(ratio.h), Axis::H);
  a.axis_of.insert(a.axis_of.end(), static_cast<std::size_t>(ratio.w), Axis::W);
  return a;
}

// Round-robin T,H,W; an exhausted axis is skipped so the surplus axis
// fills the remaining (lowest-frequency) pairs.
inline FreqAllocation alloc_interleaved(int d, const AxisRatio& ratio) {
  detail::check_ratio(d, ratio);
  FreqAllocation a{AllocScheme::Interleaved, ratio, {}, {}};
  int used[3] = {0, 0, 0};
  const Axis order[3] = {Axis::T, Axis::H, Axis::W};
  std::size_t k = 0;
  while (a.axis_of.size() < static_cast<std::size_t>(d / 2)) {
    Axis ax = order[k % 3];
    ++k;
    if (used[static_cast<int>(ax)] < ratio.of(ax)) {
      a.axis_of.push_back(ax);
      ++used[static_cast<int>(ax)];
    }
  }
  return a;
}

// Spatial chunks first, temporal axis on the lowest-frequency tail.
inline FreqAllocation alloc_videorope_like(int d, const AxisRatio& ratio) {
  detail::check_ratio(d, ratio);
  FreqAllocation a{AllocScheme::VideoRopeLike, ratio, {}, {}};
  a.axis_of.insert(a.axis_of.end(), static_cast<std::size_t>(ratio.h), Axis::H);
  a.axis_of.insert(a.axis_of.end(), static_cast<std::size_t>(ratio.w), Axis::W);
  a.axis_of.insert(a.axis_of.end(), static_cast<std::size_t>(ratio.t), Axis::T);
  return a;
}

// H/W interleave over the leading pairs, temporal tail.
inline FreqAllocation alloc_ilrope_like(int d, const AxisRatio& ratio) {
  detail::check_ratio(d, ratio);
  FreqAllocation a{AllocScheme::IlRopeLike, ratio, {}, {}};
  int used_h = 0, used_w = 0;
  std::size_t k = 0;
  while (a.axis_of.size() < static_cast<std::size_t>(ratio.h + ratio.w)) {
    Axis ax = (k % 2 == 0) ? Axis::H : Axis::W;
    ++k;
    int& used = ax == Axis::H ? used_h : used_w;
    if (used < ratio.of(ax)) {
      a.axis_of.push_back(ax);
      ++used;
    }
  }
  a.axis_of.insert(a.axis_of.end(), static_cast<std::size_t>(ratio.t), Axis::T);
  return a;
}

inline FreqAllocation make_allocation(AllocScheme scheme, int d, const AxisRatio& ratio) {
  switch (scheme) {
    case AllocScheme::Chunked: return alloc_chunked(d, ratio);
    case AllocScheme::Interleaved: return alloc_interleaved(d, ratio);
    case AllocScheme::VideoRopeLike: return alloc_videorope_like(d, ratio);
    default: return alloc_ilrope_like(d, ratio);
  }
}

// Multi-head scheme: each KV head carries exactly one axis over the full
// spectrum; query heads inherit the axis of their KV group.
struct HeadLayout {
  int n_q_heads = 0;
  int n_kv_heads = 0;
  std::vector<Axis> axis_of_kv_head;
  std::vector<Axis> axis_of_q_head;
};

inline HeadLayout alloc_multihead(int n_q_heads, int n_kv_heads, const AxisRatio& heads) {
  if (n_q_heads < 1 || n_kv_heads < 1 || n_q_heads % n_kv_heads != 0) {
    throw std::invalid_argument("query head count must be a positive multiple of KV head count");
  }
  if (heads.sum() != n_kv_heads) {
    throw std::invalid_argument("head ratio " + heads.to_string() + " must sum to the KV head count " +
                                std::to_string(n_kv_heads));
  }
  if (heads.t < 1 || heads.h < 1 || heads.w < 1) {
    throw std::invalid_argument("every axis needs at least one KV head, got " + heads.to_string());
  }
  HeadLayout l{n_q_heads, n_kv_heads, {}, {}};
  l.axis_of_kv_head.insert(l.axis_of_kv_head.end(), static_cast<std::size_t>(heads.t), Axis::T);
  l.axis_of_kv_head.insert(l.axis_of_kv_head.end(), static_cast<std::size_t>(heads.h), Axis::H);
  l.axis_of_kv_head.insert(l.axis_of_kv_head.end(), static_cast<std::size_t>(heads.w), Axis::W);
  const int group = n_q_heads / n_kv_heads;
  l.axis_of_q_head.reserve(static_cast<std::size_t>(n_q_heads));
  for (int q = 0; q < n_q_heads; ++q) {
    l.axis_of_q_head.push_back(l.axis_of_kv_head[static_cast<std::size_t>(q / group)]);
  }
  return l;
}

enum class ExtrapolationMethod { None, NtkAware, Yarn };

struct ExtrapolationSpec {
  ExtrapolationMethod method = ExtrapolationMethod::None;
  double scale = 1.0;
  // YaRN ramp bounds, in context-lengths-per-wavelength of the original
  // training context.
  double alpha = 1.0;
  double beta = 32.0;
  std::int64_t orig_ctx = 32768;
};

// NTK-aware rescale: rebuild with base' = base * scale^(d/(d-2)); theta_0
// stays 1 and the whole spectrum shifts down.
inline FreqTable apply_ntk(const FreqTable& table, double scale) {
  if (!(scale >= 1.0)) throw std::invalid_argument("extrapolation scale must be >= 1");
  return base_frequencies(table.d, table.base * std::pow(scale, static_cast<double>(table.d) /
                                                                    (table.d - 2.0)));
}

// YaRN partial interpolation: pairs whose wavelength fits many times into
// the original context keep theta, pairs whose wavelength exceeds it are
// divided by scale, with a linear ramp between.
inline FreqTable apply_yarn(const FreqTable& table, const ExtrapolationSpec& spec) {
  if (!(spec.scale >= 1.0)) throw std::invalid_argument("extrapolation scale must be >= 1");
  if (!(spec.alpha < spec.beta)) throw std::invalid_argument("yarn ramp requires alpha < beta");
  if (spec.orig_ctx < 1) throw std::invalid_argument("original context length must be >= 1");
  FreqTable out = table;
  for (double& th : out.theta) {
    const double per_wavelength = static_cast<double>(spec.orig_ctx) * th / (2.0 * std::numbers::pi);
    double m = (per_wavelength - spec.alpha) / (spec.beta - spec.alpha);
    m = m < 0.0 ? 0.0 : m > 1.0 ? 1.0 : m;
    th = th * (m + (1.0 - m) / spec.scale);
  }
  return out;
}

inline FreqTable apply_extrapolation(const FreqTable& table, const ExtrapolationSpec& spec) {
  switch (spec.method) {
    case ExtrapolationMethod::None: return table;
    case ExtrapolationMethod::NtkAware: return apply_ntk(table, spec.scale);
    default: return apply_yarn(table, spec);
  }
}

// Minimal rescale factor covering the position range a design realizes on
// a stream: max(1, (max coordinate + 1) / train_ctx).
inline double recommend_scale(const TokenStream& stream, const std::string& design,
                              std::int64_t train_ctx, const DesignOptions& opts = {}) {
  if (train_ctx < 1) throw std::invalid_argument("train_ctx must be >= 1");
  PositionLayout layout = assign_by_name(design, stream, opts);
  Dyadic max_pos(-1);
  for (const LayoutEntry& e : layout.entries) max_pos = max(max_pos, component_max(e.pos));
  const double cover = (max_pos.to_double() + 1.0) / static_cast<double>(train_ctx);
  return cover < 1.0 ? 1.0 : cover;
}

// Inline allocation config of the form
// "scheme=interleaved,ratio=24:20:20,d=128,base=1000000".
struct AllocConfig {
  AllocScheme scheme = AllocScheme::Interleaved;
  AxisRatio ratio{24, 20, 20};
  int d = 128;
  double base = 1000000.0;
};

inline AxisRatio parse_ratio(const std::string& text) {
  AxisRatio r;
  int* slot[3] = {&r.t, &r.h, &r.w};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    std::size_t next = i < 2 ? text.find(':', pos) : text.size();
    if (next == std::string::npos) throw std::invalid_argument("ratio must be a:b:c, got '" + text + "'");
    try {
      *slot[i] = std::stoi(text.substr(pos, next - pos));
    } catch (const std::exception&) {
      throw std::invalid_argument("ratio must be a:b:c, got '" + text + "'");
    }
    pos = next + 1;
  }
  return r;
}

inline AllocScheme parse_scheme(const std::string& s) {
  if (s == "chunked") return AllocScheme::Chunked;
  if (s == "interleaved") return AllocScheme::Interleaved;
  if (s == "videorope-like" || s == "videorope") return AllocScheme::VideoRopeLike;
  if (s == "ilrope-like" || s == "ilrope") return AllocScheme::IlRopeLike;
  throw std::invalid_argument("unknown scheme '" + s +
                              "' (valid: chunked, interleaved, videorope-like, ilrope-like)");
}

inline AllocConfig parse_alloc_config(const std::string& text) {
  AllocConfig cfg;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    // ratio values contain ':' but no ',', so a plain comma split is safe
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? text.size() : comma + 1;
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("allocation config items must be key=value");
    std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "scheme") cfg.scheme = parse_scheme(value);
    else if (key == "ratio") cfg.ratio = parse_ratio(value);
    else if (key == "d") cfg.d = std::stoi(value);
    else if (key == "base") cfg.base = std::stod(value);
    else throw std::invalid_argument("unknown allocation config key '" + key + "'");
  }
  return cfg;
}

}  // namespace mmrope
