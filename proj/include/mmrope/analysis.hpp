#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmrope/dyadic.hpp"
#include "mmrope/io.hpp"
#include "mmrope/position.hpp"
#include "mmrope/rotary.hpp"
#include "mmrope/stream.hpp"

namespace mmrope {

// |S_j| for j = 1..n, where S_j = sum_{k<j} e^(i * delta * theta_k).
inline std::vector<double> partial_sums(std::span<const double> thetas, double delta) {
  if (thetas.empty()) throw std::invalid_argument("partial_sums needs at least one frequency");
  std::vector<double> mags;
  mags.reserve(thetas.size());
  std::complex<double> acc(0.0, 0.0);
  for (double th : thetas) {
    acc += std::polar(1.0, delta * th);
    mags.push_back(std::abs(acc));
  }
  return mags;
}

// Mean of the partial-sum magnitudes: the long-range decay indicator. At
// delta = 0 this is (n+1)/2 and it is bounded by n for all delta.
inline double decay_indicator(std::span<const double> thetas, double delta) {
  const std::vector<double> mags = partial_sums(thetas, delta);
  double sum = 0.0;
  for (double m : mags) sum += m;
  return sum / static_cast<double>(mags.size());
}

// The effective frequencies a positional axis sees: the axis's channel
// pairs in index order under a channel split, or the full table under a
// head layout (each head owns one axis at full spectral resolution).
inline std::vector<double> axis_thetas(const RotarySpec& spec, Axis axis) {
  if (spec.pair_axis) {
    std::vector<double> out;
    for (std::size_t i = 0; i < spec.theta.size(); ++i) {
      if ((*spec.pair_axis)[i] == axis) out.push_back(spec.theta[i]);
    }
    if (out.empty()) {
      throw std::invalid_argument(std::string("axis ") + axis_name(axis) +
                                  " has no channel pairs in this allocation");
    }
    return out;
  }
  if (spec.heads) {
    const auto& kv = spec.heads->axis_of_kv_head;
    if (std::find(kv.begin(), kv.end(), axis) == kv.end()) {
      throw std::invalid_argument(std::string("axis ") + axis_name(axis) +
                                  " has no head in this layout");
    }
    return spec.theta;
  }
  throw std::invalid_argument("spec carries neither an allocation nor a head layout");
}

struct DecayCurve {
  Axis axis = Axis::T;
  std::vector<double> deltas;
  std::vector<double> values;
};

inline DecayCurve decay_curve(const RotarySpec& spec, Axis axis, std::span<const double> delta_grid) {
  const std::vector<double> thetas = axis_thetas(spec, axis);
  DecayCurve curve;
  curve.axis = axis;
  curve.deltas.assign(delta_grid.begin(), delta_grid.end());
  curve.values.reserve(delta_grid.size());
  for (double delta : delta_grid) curve.values.push_back(decay_indicator(thetas, delta));
  return curve;
}

// Default grid: 0 plus 200 geometric points spanning [1, 1e4].
inline std::vector<double> default_delta_grid(double lo = 1.0, double hi = 1e4, int points = 200,
                                              bool include_zero = true) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) throw std::invalid_argument("bad delta grid");
  std::vector<double> grid;
  if (include_zero) grid.push_back(0.0);
  for (int k = 0; k < points; ++k) {
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
  }
  return grid;
}

inline std::string decay_to_csv(const std::vector<DecayCurve>& curves, const std::string& scheme,
                                const std::string& ratio, int d, double base) {
  std::string csv = "delta,axis,indicator,scheme,ratio,d,base\n";
  for (const DecayCurve& c : curves) {
    for (std::size_t i = 0; i < c.deltas.size(); ++i) {
      csv += format_double(c.deltas[i]);
      csv += ',';
      csv += axis_name(c.axis);
      csv += ',';
      csv += format_double(c.values[i]);
      csv += ',';
      csv += scheme;
      csv += ',';
      csv += ratio;
      csv += ',';
      csv += std::to_string(d);
      csv += ',';
      csv += format_double(base);
      csv += '\n';
    }
  }
  return csv;
}

// Positional-coherence audit. `overlaps` lists exact triple collisions
// across segments; `generated_overlap` additionally fires when a generated
// text token's scalar counter lands inside the coordinate range of an
// earlier visual block, the document failure mode that exact matching
// misses.
struct BlockInterval {
  std::size_t segment = 0;
  Dyadic interval;
};

struct CoherenceReport {
  std::vector<std::pair<std::int64_t, std::int64_t>> overlaps;
  bool generated_overlap = false;
  Dyadic max_position;
  std::vector<BlockInterval> intervals;
};

inline CoherenceReport check_coherence(const PositionLayout& layout, const TokenStream& stream) {
  if (static_cast<std::int64_t>(layout.entries.size()) != token_count(stream)) {
    throw std::invalid_argument("layout has " + std::to_string(layout.entries.size()) +
                                " entries for a stream of " + std::to_string(token_count(stream)) +
                                " tokens");
  }
  CoherenceReport report;

  struct TripleHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      std::size_t h = 0;
      for (std::int64_t v : k) {
        h ^= std::hash<std::int64_t>()(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
      return h;
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::int64_t>, TripleHash> groups;
  groups.reserve(layout.entries.size());

  report.max_position = Dyadic::from_raw(INT64_MIN);
  for (std::size_t i = 0; i < layout.entries.size(); ++i) {
    const LayoutEntry& e = layout.entries[i];
    report.max_position = max(report.max_position, component_max(e.pos));
    groups[{e.pos.t.raw(), e.pos.h.raw(), e.pos.w.raw()}].push_back(static_cast<std::int64_t>(i));
  }
  if (layout.entries.empty()) report.max_position = Dyadic(0);

  for (const auto& [key, idxs] : groups) {
    if (idxs.size() < 2) continue;
    for (std::size_t a = 0; a < idxs.size(); ++a) {
      for (std::size_t b = a + 1; b < idxs.size(); ++b) {
        const LayoutEntry& ea = layout.entries[static_cast<std::size_t>(idxs[a])];
        const LayoutEntry& eb = layout.entries[static_cast<std::size_t>(idxs[b])];
        if (ea.segment == eb.segment) continue;
        report.overlaps.emplace_back(idxs[a], idxs[b]);
        const bool gen_vs_visual =
            (ea.modality == Modality::Text && stream.segments[ea.segment].role == Role::Generated &&
             eb.modality != Modality::Text) ||
            (eb.modality == Modality::Text && stream.segments[eb.segment].role == Role::Generated &&
             ea.modality != Modality::Text);
        if (gen_vs_visual) report.generated_overlap = true;
      }
    }
  }
  std::sort(report.overlaps.begin(), report.overlaps.end());

  // Per visual block: coordinate range and surrounding text positions.
  struct BlockRange {
    std::size_t segment;
    Dyadic lo, hi;
    std::size_t first_token, last_token;
  };
  std::vector<BlockRange> blocks;
  for (std::size_t i = 0; i < layout.entries.size(); ++i) {
    const LayoutEntry& e = layout.entries[i];
    if (e.modality == Modality::Text) continue;
    if (blocks.empty() || blocks.back().segment != e.segment) {
      blocks.push_back({e.segment, component_min(e.pos), component_max(e.pos), i, i});
    } else {
      blocks.back().lo = min(blocks.back().lo, component_min(e.pos));
      blocks.back().hi = max(blocks.back().hi, component_max(e.pos));
      blocks.back().last_token = i;
    }
  }

  // Range test: generated text after a block vs. the block's span.
  for (std::size_t i = 0; i < layout.entries.size(); ++i) {
    const LayoutEntry& e = layout.entries[i];
    if (e.modality != Modality::Text || stream.segments[e.segment].role != Role::Generated) continue;
    const Dyadic m = e.pos.t;  // scalar counter of a text token
    for (const BlockRange& b : blocks) {
      if (b.last_token < i && b.lo <= m && m <= b.hi) {
        report.generated_overlap = true;
      }
    }
  }

  // Modality interval: gap the counter gains across a block beyond the
  // ordinary +1 text step, for blocks with text on both sides.
  for (const BlockRange& b : blocks) {
    const LayoutEntry* prev = nullptr;
    const LayoutEntry* next = nullptr;
    for (std::size_t i = b.first_token; i-- > 0;) {
      if (layout.entries[i].modality == Modality::Text) {
        prev = &layout.entries[i];
        break;
      }
    }
    for (std::size_t i = b.last_token + 1; i < layout.entries.size(); ++i) {
      if (layout.entries[i].modality == Modality::Text) {
        next = &layout.entries[i];
        break;
      }
    }
    if (prev && next) {
      report.intervals.push_back({b.segment, next->pos.t - prev->pos.t - Dyadic(1)});
    }
  }
  return report;
}

inline std::string coherence_to_json(const CoherenceReport& report) {
  nlohmann::ordered_json doc;
  doc["overlaps"] = nlohmann::ordered_json::array();
  for (const auto& [i, j] : report.overlaps) doc["overlaps"].push_back({i, j});
  doc["generated_overlap"] = report.generated_overlap;
  doc["max_position"] = report.max_position.to_double();
  doc["intervals"] = nlohmann::ordered_json::array();
  for (const BlockInterval& iv : report.intervals) {
    doc["intervals"].push_back({{"segment", iv.segment}, {"interval", iv.interval.to_double()}});
  }
  return doc.dump();
}

// Row-stochastic square attention matrix, row-major.
struct AttentionMatrix {
  std::int64_t n = 0;
  std::vector<double> a;
  double at(std::int64_t i, std::int64_t j) const {
    return a[static_cast<std::size_t>(i * n + j)];
  }
};

inline AttentionMatrix parse_matrix_csv(std::string_view text) {
  AttentionMatrix m;
  const auto lines = split_lines(text);
  m.n = static_cast<std::int64_t>(lines.size());
  m.a.reserve(static_cast<std::size_t>(m.n * m.n));
  for (std::string_view line : lines) {
    std::vector<double> row = parse_double_row(line);
    if (static_cast<std::int64_t>(row.size()) != m.n) {
      throw std::runtime_error("attention matrix is not square: row of " +
                               std::to_string(row.size()) + " in a " + std::to_string(m.n) +
                               "-line file");
    }
    m.a.insert(m.a.end(), row.begin(), row.end());
  }
  return m;
}

// Per-block spatial profile: mean incoming mass per (row, col) cell,
// averaged over frames and all query tokens.
struct BlockSinkProfile {
  std::size_t segment = 0;
  std::int64_t h = 0, w = 0;
  std::vector<double> cell_mass;  // row-major h*w
  std::pair<std::int64_t, std::int64_t> argmax_cell() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cell_mass.size(); ++i) {
      if (cell_mass[i] > cell_mass[best]) best = i;
    }
    return {static_cast<std::int64_t>(best) / w, static_cast<std::int64_t>(best) % w};
  }
};

struct AttentionMassReport {
  double visual_mass = 0.0;  // mean over query rows of mass on visual columns
  std::vector<BlockSinkProfile> blocks;
};

inline AttentionMassReport attention_mass(const AttentionMatrix& matrix,
                                          const PositionLayout& layout, const TokenStream& stream) {
  const std::int64_t n = static_cast<std::int64_t>(layout.entries.size());
  if (n != token_count(stream)) {
    throw std::invalid_argument("layout does not belong to the stream");
  }
  if (matrix.n != n) {
    throw std::invalid_argument("matrix size " + std::to_string(matrix.n) +
                                " does not match token count " + std::to_string(n));
  }
  for (std::int64_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::int64_t j = 0; j < n; ++j) sum += matrix.at(i, j);
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::invalid_argument("row " + std::to_string(i) + " sums to " + format_double(sum) +
                                  ", matrix is not row-stochastic");
    }
  }

  AttentionMassReport report;
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      if (layout.entries[static_cast<std::size_t>(j)].modality != Modality::Text) {
        total += matrix.at(i, j);
      }
    }
  }
  report.visual_mass = n == 0 ? 0.0 : total / static_cast<double>(n);

  std::int64_t tok = 0;
  for (std::size_t s = 0; s < stream.segments.size(); ++s) {
    const Segment& seg = stream.segments[s];
    if (seg.kind == Modality::Text) {
      tok += seg.len;
      continue;
    }
    BlockSinkProfile prof;
    prof.segment = s;
    prof.h = seg.h;
    prof.w = seg.w;
    prof.cell_mass.assign(static_cast<std::size_t>(seg.h * seg.w), 0.0);
    for (std::int64_t f = 0; f < seg.frames(); ++f) {
      for (std::int64_t r = 0; r < seg.h; ++r) {
        for (std::int64_t c = 0; c < seg.w; ++c) {
          const std::int64_t col = tok + (f * seg.h + r) * seg.w + c;
          double sum = 0.0;
          for (std::int64_t q = 0; q < n; ++q) sum += matrix.at(q, col);
          prof.cell_mass[static_cast<std::size_t>(r * seg.w + c)] +=
              sum / static_cast<double>(n * seg.frames());
        }
      }
    }
    tok += seg.token_count();
    report.blocks.push_back(std::move(prof));
  }
  return report;
}

inline std::string mass_to_json(const AttentionMassReport& report) {
  nlohmann::ordered_json doc;
  doc["visual_mass"] = report.visual_mass;
  doc["blocks"] = nlohmann::ordered_json::array();
  for (const BlockSinkProfile& b : report.blocks) {
    auto [r, c] = b.argmax_cell();
    doc["blocks"].push_back({{"segment", b.segment},
                             {"h", b.h},
                             {"w", b.w},
                             {"cells", b.cell_mass},
                             {"argmax", {r, c}}});
  }
  return doc.dump();
}

}  // namespace mmrope
