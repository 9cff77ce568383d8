#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmrope/freq.hpp"
#include "mmrope/position.hpp"

namespace mmrope {

using HeadVector = std::vector<double>;

// Position triple in double precision. Layout coordinates are exact dyadics;
// rotation consumes them as reals, and tests may feed arbitrary reals
// directly.
struct RealTriple {
  double t = 0.0, h = 0.0, w = 0.0;
  RealTriple() = default;
  RealTriple(double t_, double h_, double w_) : t(t_), h(h_), w(w_) {}
  RealTriple(const PosTriple& p) : t(p.t.to_double()), h(p.h.to_double()), w(p.w.to_double()) {}
  double component(Axis a) const { return a == Axis::T ? t : a == Axis::H ? h : w; }
  friend RealTriple operator+(const RealTriple& a, const RealTriple& b) {
    return {a.t + b.t, a.h + b.h, a.w + b.w};
  }
  friend RealTriple operator-(const RealTriple& a, const RealTriple& b) {
    return {a.t - b.t, a.h - b.h, a.w - b.w};
  }
};

// Fully resolved rotation parameters: effective (post-extrapolation, post
// per-axis-base) frequency per channel pair, plus either a per-pair axis
// map (channel split) or a head layout (multi-head). Angles are computed
// as position * theta directly; safe while |p * theta| < 2^52.
struct RotarySpec {
  int d = 0;
  std::vector<double> theta;             // d/2 effective frequencies
  std::optional<std::vector<Axis>> pair_axis;
  std::optional<HeadLayout> heads;
};

inline RotarySpec make_rotary_spec(const FreqTable& table, const FreqAllocation& allocation,
                                   const ExtrapolationSpec& extrapolation = {}) {
  if (allocation.axis_of.size() != table.theta.size()) {
    throw std::invalid_argument("allocation covers " + std::to_string(allocation.axis_of.size()) +
                                " pairs but the table has " + std::to_string(table.theta.size()));
  }
  RotarySpec spec;
  spec.d = table.d;
  spec.pair_axis = allocation.axis_of;
  if (allocation.per_axis_base) {
    // Each axis gets its own geometric table; extrapolation applies per axis.
    std::vector<double> per_axis_theta[3];
    for (int a = 0; a < 3; ++a) {
      FreqTable t = base_frequencies(table.d, (*allocation.per_axis_base)[static_cast<std::size_t>(a)]);
      per_axis_theta[a] = apply_extrapolation(t, extrapolation).theta;
    }
    spec.theta.resize(table.theta.size());
    for (std::size_t i = 0; i < spec.theta.size(); ++i) {
      spec.theta[i] = per_axis_theta[static_cast<int>(allocation.axis_of[i])][i];
    }
  } else {
    spec.theta = apply_extrapolation(table, extrapolation).theta;
  }
  return spec;
}

inline RotarySpec make_rotary_spec(const FreqTable& table, const HeadLayout& heads,
                                   const ExtrapolationSpec& extrapolation = {}) {
  RotarySpec spec;
  spec.d = table.d;
  spec.theta = apply_extrapolation(table, extrapolation).theta;
  spec.heads = heads;
  return spec;
}

namespace detail {

inline void check_dim(const HeadVector& v, int d) {
  if (static_cast<int>(v.size()) != d) {
    throw std::invalid_argument("vector has " + std::to_string(v.size()) +
                                " components, spec expects " + std::to_string(d));
  }
}

inline HeadVector rotate_pairs(const HeadVector& v, const double* angle_per_pair, std::size_t pairs) {
  HeadVector out(v.size());
  for (std::size_t i = 0; i < pairs; ++i) {
    const double c = std::cos(angle_per_pair[i]);
    const double s = std::sin(angle_per_pair[i]);
    const double x = v[2 * i], y = v[2 * i + 1];
    out[2 * i] = x * c - y * s;
    out[2 * i + 1] = x * s + y * c;
  }
  return out;
}

}  // namespace detail

// Channel-split rotation: pair i turns by p.axis(i) * theta_i.
inline HeadVector rotate(const HeadVector& v, const RealTriple& p, const RotarySpec& spec) {
  detail::check_dim(v, spec.d);
  if (!spec.pair_axis) {
    throw std::invalid_argument("rotate requires a channel-split spec; use rotate_q_head for head layouts");
  }
  std::vector<double> angles(spec.theta.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    angles[i] = p.component((*spec.pair_axis)[i]) * spec.theta[i];
  }
  return detail::rotate_pairs(v, angles.data(), angles.size());
}

// Single-axis rotation over the full spectrum, as a multi-head head does it.
inline HeadVector rotate_single_axis(const HeadVector& v, double pos, const RotarySpec& spec) {
  detail::check_dim(v, spec.d);
  std::vector<double> angles(spec.theta.size());
  for (std::size_t i = 0; i < angles.size(); ++i) angles[i] = pos * spec.theta[i];
  return detail::rotate_pairs(v, angles.data(), angles.size());
}

inline HeadVector rotate_q_head(const HeadVector& v, const RealTriple& p, const RotarySpec& spec,
                                int q_head) {
  if (!spec.heads) throw std::invalid_argument("spec has no head layout");
  if (q_head < 0 || q_head >= spec.heads->n_q_heads) throw std::invalid_argument("query head out of range");
  Axis a = spec.heads->axis_of_q_head[static_cast<std::size_t>(q_head)];
  return rotate_single_axis(v, p.component(a), spec);
}

inline HeadVector rotate_kv_head(const HeadVector& v, const RealTriple& p, const RotarySpec& spec,
                                 int kv_head) {
  if (!spec.heads) throw std::invalid_argument("spec has no head layout");
  if (kv_head < 0 || kv_head >= spec.heads->n_kv_heads) throw std::invalid_argument("KV head out of range");
  Axis a = spec.heads->axis_of_kv_head[static_cast<std::size_t>(kv_head)];
  return rotate_single_axis(v, p.component(a), spec);
}

inline double dot(const HeadVector& a, const HeadVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double attention_score(const HeadVector& q, const HeadVector& k, const RealTriple& p_q,
                              const RealTriple& p_k, const RotarySpec& spec) {
  detail::check_dim(q, spec.d);
  detail::check_dim(k, spec.d);
  return dot(rotate(q, p_q, spec), rotate(k, p_k, spec));
}

// Same score in complex form with each pair read as one complex number:
// Re[sum_i (q_i * conj(k_i)) * e^(i * (m-n) * theta_i)] where m-n is the
// query-minus-key offset per axis. delta carries p_k - p_q, so the phase
// is -delta * theta.
inline double score_complex_form(const HeadVector& q, const HeadVector& k, const RealTriple& delta,
                                 const RotarySpec& spec) {
  detail::check_dim(q, spec.d);
  detail::check_dim(k, spec.d);
  if (!spec.pair_axis) {
    throw std::invalid_argument("score_complex_form requires a channel-split spec");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.theta.size(); ++i) {
    const std::complex<double> qc(q[2 * i], q[2 * i + 1]);
    const std::complex<double> kc(k[2 * i], k[2 * i + 1]);
    const double phase = -delta.component((*spec.pair_axis)[i]) * spec.theta[i];
    acc += (qc * std::conj(kc) * std::polar(1.0, phase)).real();
  }
  return acc;
}

// Per-query-head scores under a head layout; each head rotates by its
// single assigned axis, keys come from the head's KV group.
inline std::vector<double> multihead_scores(const std::vector<HeadVector>& q_heads,
                                            const std::vector<HeadVector>& k_heads,
                                            const RealTriple& p_q, const RealTriple& p_k,
                                            const RotarySpec& spec) {
  if (!spec.heads) throw std::invalid_argument("multihead_scores requires a head layout");
  const HeadLayout& hl = *spec.heads;
  if (static_cast<int>(q_heads.size()) != hl.n_q_heads ||
      static_cast<int>(k_heads.size()) != hl.n_kv_heads) {
    throw std::invalid_argument("head vector lists do not match the head layout");
  }
  const int group = hl.n_q_heads / hl.n_kv_heads;
  std::vector<double> scores;
  scores.reserve(q_heads.size());
  for (int h = 0; h < hl.n_q_heads; ++h) {
    const Axis a = hl.axis_of_q_head[static_cast<std::size_t>(h)];
    const HeadVector rq = rotate_single_axis(q_heads[static_cast<std::size_t>(h)], p_q.component(a), spec);
    const HeadVector rk =
        rotate_single_axis(k_heads[static_cast<std::size_t>(h / group)], p_k.component(a), spec);
    scores.push_back(dot(rq, rk));
  }
  return scores;
}

}  // namespace mmrope
