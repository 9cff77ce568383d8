#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrope/dyadic.hpp"
#include "mmrope/stream.hpp"

namespace mmrope {

struct PosTriple {
  Dyadic t, h, w;
  friend bool operator==(const PosTriple&, const PosTriple&) = default;
};

inline Dyadic component_max(const PosTriple& p) { return max(p.t, max(p.h, p.w)); }
inline Dyadic component_min(const PosTriple& p) { return min(p.t, min(p.h, p.w)); }

struct LayoutEntry {
  PosTriple pos;
  Modality modality = Modality::Text;
  std::size_t segment = 0;
};

enum class IntervalMode { MaxJump, VanillaMatch };

struct DesignOptions {
  bool spatial_reset = false;
  Dyadic temporal_stride = Dyadic(1);
  // Dynamic per-frame temporal strides: entry g is the gap after frame g.
  // Empty means the constant temporal_stride applies. Must cover every
  // frame of the longest video block when set.
  std::vector<Dyadic> stride_schedule;
  IntervalMode interval_mode = IntervalMode::MaxJump;
  Dyadic visual_stride = Dyadic(1);  // v2pe token step for visual tokens
  double circle_radius = 10.0;       // circle design ring radius
};

struct PositionLayout {
  std::vector<LayoutEntry> entries;
  std::string design_name;
  DesignOptions params;
  // Set when coordinates were rounded from reals (circle design); exact
  // dyadic equality tests are then only meaningful up to 2^-9 per axis.
  bool approximate = false;
};

namespace detail {

inline void check_visual_stride(Dyadic s) {
  // permitted: 1, 1/2, 1/4, ..., 1/256
  std::int64_t r = s.raw();
  if (r <= 0 || r > Dyadic::kDenom || (r & (r - 1)) != 0) {
    throw std::invalid_argument("visual stride must be 1/2^k for k in [0,8], got " +
                                s.to_decimal());
  }
}

inline void check_schedule(const DesignOptions& opts, std::int64_t frames) {
  if (opts.stride_schedule.empty()) {
    if (opts.temporal_stride <= Dyadic(0)) {
      throw std::invalid_argument("temporal stride must be positive, got " +
                                  opts.temporal_stride.to_decimal());
    }
    return;
  }
  if (static_cast<std::int64_t>(opts.stride_schedule.size()) < frames) {
    throw std::invalid_argument("dynamic stride schedule has " +
                                std::to_string(opts.stride_schedule.size()) +
                                " entries but the block has " + std::to_string(frames) +
                                " frames");
  }
  for (const Dyadic& gap : opts.stride_schedule) {
    if (gap <= Dyadic(0)) {
      throw std::invalid_argument("stride schedule entries must be positive");
    }
  }
}

inline Dyadic frame_gap(const DesignOptions& opts, std::int64_t frame) {
  if (opts.stride_schedule.empty()) return opts.temporal_stride;
  return opts.stride_schedule[static_cast<std::size_t>(frame)];
}

// Shared walk for the MRoPE family: the caller supplies the per-token
// coordinates of a visual block and the post-block counter.
struct BlockShape {
  std::size_t segment;
  std::int64_t frames, h, w;
};

}  // namespace detail

inline PositionLayout assign_vanilla(const TokenStream& stream) {
  PositionLayout out;
  out.design_name = "vanilla";
  out.entries.reserve(static_cast<std::size_t>(token_count(stream)));
  std::int64_t i = 0;
  for (std::size_t s = 0; s < stream.segments.size(); ++s) {
    const Segment& seg = stream.segments[s];
    for (std::int64_t j = 0; j < seg.token_count(); ++j, ++i) {
      Dyadic m(i);
      out.entries.push_back({{m, m, m}, seg.kind, s});
    }
  }
  return out;
}

inline PositionLayout assign_v2pe(const TokenStream& stream, const DesignOptions& opts) {
  detail::check_visual_stride(opts.visual_stride);
  PositionLayout out;
  out.design_name = "v2pe";
  out.params = opts;
  out.entries.reserve(static_cast<std::size_t>(token_count(stream)));
  Dyadic m(0);
  for (std::size_t s = 0; s < stream.segments.size(); ++s) {
    const Segment& seg = stream.segments[s];
    Dyadic step = seg.kind == Modality::Text ? Dyadic(1) : opts.visual_stride;
    for (std::int64_t j = 0; j < seg.token_count(); ++j) {
      out.entries.push_back({{m, m, m}, seg.kind, s});
      m += step;
    }
  }
  return out;
}

// MRoPE position design (Qwen2-VL style 3D coordinates). Without
// spatial_reset a visual token at frame f, row r, col c in a block starting
// at counter p gets (p + f*delta, p + f*delta + r, p + f*delta + c): the
// spatial axes ride along the temporal diagonal, so cross-frame relative
// vectors entangle time into the spatial components. With spatial_reset the
// spatial axes restart at zero per block: (p + f*delta, r, c).
inline PositionLayout assign_mrope(const TokenStream& stream, const DesignOptions& opts) {
  PositionLayout out;
  out.design_name = opts.spatial_reset ? "mrope+reset" : "mrope";
  out.params = opts;
  out.entries.reserve(static_cast<std::size_t>(token_count(stream)));
  Dyadic p(0);
  for (std::size_t s = 0; s < stream.segments.size(); ++s) {
    const Segment& seg = stream.segments[s];
    if (seg.kind == Modality::Text) {
      for (std::int64_t j = 0; j < seg.len; ++j) {
        out.entries.push_back({{p, p, p}, Modality::Text, s});
        p += 1;
      }
      continue;
    }
    detail::check_schedule(opts, seg.frames());
    const Dyadic p0 = p;
    Dyadic block_max = p0;
    Dyadic off(0);
    for (std::int64_t f = 0; f < seg.frames(); ++f) {
      Dyadic t = p0 + off;
      for (std::int64_t r = 0; r < seg.h; ++r) {
        for (std::int64_t c = 0; c < seg.w; ++c) {
          PosTriple pos{t, opts.spatial_reset ? Dyadic(r) : t + Dyadic(r),
                        opts.spatial_reset ? Dyadic(c) : t + Dyadic(c)};
          block_max = max(block_max, component_max(pos));
          out.entries.push_back({pos, seg.kind, s});
        }
      }
      off += detail::frame_gap(opts, f);
    }
    p = opts.interval_mode == IntervalMode::MaxJump ? block_max + Dyadic(1)
                                                    : p0 + Dyadic(seg.token_count());
  }
  return out;
}

// VideoRoPE/HoPE-style diagonal layout: frames stack along the temporal
// diagonal and each frame is centered, so spatial coordinates run negative
// of / past the text counter. The counter resumes past the block's max
// temporal coordinate only, which is what lets large documents collide
// with later generated text.
inline PositionLayout assign_diagonal(const TokenStream& stream, const DesignOptions& opts) {
  PositionLayout out;
  out.design_name = "diagonal";
  out.params = opts;
  out.entries.reserve(static_cast<std::size_t>(token_count(stream)));
  Dyadic p(0);
  for (std::size_t s = 0; s < stream.segments.size(); ++s) {
    const Segment& seg = stream.segments[s];
    if (seg.kind == Modality::Text) {
      for (std::int64_t j = 0; j < seg.len; ++j) {
        out.entries.push_back({{p, p, p}, Modality::Text, s});
        p += 1;
      }
      continue;
    }
    detail::check_schedule(opts, seg.frames());
    const Dyadic p0 = p;
    const Dyadic hc(seg.h / 2), wc(seg.w / 2);
    Dyadic t_max = p0;
    Dyadic off(0);
    for (std::int64_t f = 0; f < seg.frames(); ++f) {
      Dyadic t = p0 + off;
      t_max = max(t_max, t);
      for (std::int64_t r = 0; r < seg.h; ++r) {
        for (std::int64_t c = 0; c < seg.w; ++c) {
          out.entries.push_back({{t, t + Dyadic(r) - hc, t + Dyadic(c) - wc}, seg.kind, s});
        }
      }
      off += detail::frame_gap(opts, f);
    }
    p = t_max + Dyadic(1);
  }
  return out;
}

// Circular layout: each visual block sits on one ring of the configured
// radius, in the plane through the current text position orthogonal to the
// text direction (1,1,1)/sqrt(3); all frames of a video share the ring.
inline PositionLayout assign_circle(const TokenStream& stream, const DesignOptions& opts) {
  if (!(opts.circle_radius > 0.0)) {
    throw std::invalid_argument("circle radius must be positive");
  }
  // orthonormal basis of the plane orthogonal to (1,1,1)
  static const double e1[3] = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0};
  static const double e2[3] = {1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0)};

  PositionLayout out;
  out.design_name = "circle";
  out.params = opts;
  out.entries.reserve(static_cast<std::size_t>(token_count(stream)));
  Dyadic p(0);
  for (std::size_t s = 0; s < stream.segments.size(); ++s) {
    const Segment& seg = stream.segments[s];
    if (seg.kind == Modality::Text) {
      for (std::int64_t j = 0; j < seg.len; ++j) {
        out.entries.push_back({{p, p, p}, Modality::Text, s});
        p += 1;
      }
      continue;
    }
    out.approximate = true;
    const double center = p.to_double();
    const std::int64_t n = seg.token_count();
    for (std::int64_t j = 0; j < n; ++j) {
      double ang = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      double x = opts.circle_radius * std::cos(ang);
      double y = opts.circle_radius * std::sin(ang);
      out.entries.push_back({{Dyadic::nearest(center + x * e1[0] + y * e2[0]),
                              Dyadic::nearest(center + x * e1[1] + y * e2[1]),
                              Dyadic::nearest(center + x * e1[2] + y * e2[2])},
                             seg.kind, s});
    }
    p += 1;
  }
  return out;
}

// IL-RoPE/Omni-RoPE-style ablation: spatial-reset everywhere, including
// text tokens, which therefore get (m, 0, 0) and lose vanilla compatibility.
inline PositionLayout assign_text_spatial_reset(const TokenStream& stream,
                                                const DesignOptions& opts) {
  DesignOptions reset = opts;
  reset.spatial_reset = true;
  PositionLayout out = assign_mrope(stream, reset);
  out.design_name = "text-spatial-reset";
  for (LayoutEntry& e : out.entries) {
    if (e.modality == Modality::Text) {
      e.pos.h = Dyadic(0);
      e.pos.w = Dyadic(0);
    }
  }
  return out;
}

inline PosTriple relative_triple(const PositionLayout& layout, std::size_t i, std::size_t j) {
  if (i >= layout.entries.size() || j >= layout.entries.size()) {
    throw std::out_of_range("token index out of range");
  }
  const PosTriple& a = layout.entries[i].pos;
  const PosTriple& b = layout.entries[j].pos;
  return {b.t - a.t, b.h - a.h, b.w - a.w};
}

inline const std::vector<std::string>& design_names() {
  static const std::vector<std::string> names = {
      "vanilla", "v2pe", "mrope", "mrope-i", "mhrope", "diagonal", "circle", "text-spatial-reset"};
  return names;
}

// Registry entry point used by the CLI and recommend_scale. "mrope-i" and
// "mhrope" share the spatial-reset MRoPE layout; they differ only in
// frequency allocation, which this module does not decide.
inline PositionLayout assign_by_name(const std::string& design, const TokenStream& stream,
                                     DesignOptions opts = {}) {
  PositionLayout out;
  if (design == "vanilla") {
    out = assign_vanilla(stream);
  } else if (design == "v2pe") {
    out = assign_v2pe(stream, opts);
  } else if (design == "mrope") {
    out = assign_mrope(stream, opts);
  } else if (design == "mrope-i" || design == "mhrope") {
    opts.spatial_reset = true;
    out = assign_mrope(stream, opts);
  } else if (design == "diagonal") {
    out = assign_diagonal(stream, opts);
  } else if (design == "circle") {
    out = assign_circle(stream, opts);
  } else if (design == "text-spatial-reset") {
    out = assign_text_spatial_reset(stream, opts);
  } else {
    std::string known;
    for (const std::string& n : design_names()) {
      if (!known.empty()) known += ", ";
      known += n;
    }
    throw std::invalid_argument("unknown design '" + design + "' (valid designs: " + known + ")");
  }
  out.design_name = design;
  return out;
}

inline std::string layout_to_csv(const PositionLayout& layout) {
  std::string csv = "token_index,segment_index,modality,t,h,w,design\n";
  for (std::size_t i = 0; i < layout.entries.size(); ++i) {
    const LayoutEntry& e = layout.entries[i];
    csv += std::to_string(i);
    csv += ',';
    csv += std::to_string(e.segment);
    csv += ',';
    csv += modality_name(e.modality);
    csv += ',';
    csv += e.pos.t.to_decimal();
    csv += ',';
    csv += e.pos.h.to_decimal();
    csv += ',';
    csv += e.pos.w.to_decimal();
    csv += ',';
    csv += layout.design_name;
    csv += '\n';
  }
  return csv;
}

}  // namespace mmrope
