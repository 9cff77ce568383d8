// Command-line front end: emits layouts, coherence audits, frequency
// tables, decay curves, attention scores, attention-mass reports and
// extrapolation-scale recommendations as CSV/JSON for external plotting.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmrope/mmrope.hpp"

namespace {

constexpr int kExitAuditFail = 1;
constexpr int kExitError = 2;

struct DesignFlags {
  std::string design = "mrope-i";
  std::string stride;
  std::string schedule;
  std::string interval = "maxjump";
  double radius = 10.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--design", design, "position design (" + join_names() + ")")->capture_default_str();
    cmd->add_option("--stride", stride,
                    "temporal stride for mrope family / visual step for v2pe; accepts 1/2-style "
                    "rationals");
    cmd->add_option("--stride-schedule", schedule,
                    "comma-separated per-frame temporal strides (dynamic schedule)");
    cmd->add_option("--interval", interval, "modality interval rule: maxjump or vanilla")->capture_default_str();
    reset_opt_ = cmd->add_option("--spatial-reset", reset_value_,
                                 "reset spatial coordinates per visual block (mrope design)");
    cmd->add_option("--radius", radius, "ring radius for the circle design")->capture_default_str();
  }

  mmrope::DesignOptions options() const {
    mmrope::DesignOptions opts;
    if (reset_opt_ != nullptr && reset_opt_->count() > 0) opts.spatial_reset = reset_value_;
    if (!stride.empty()) {
      mmrope::Dyadic s = mmrope::Dyadic::parse(stride);
      opts.temporal_stride = s;
      opts.visual_stride = s;
    }
    if (!schedule.empty()) {
      std::size_t pos = 0;
      while (pos <= schedule.size()) {
        std::size_t comma = schedule.find(',', pos);
        std::string part = schedule.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        opts.stride_schedule.push_back(mmrope::Dyadic::parse(part));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
    if (interval == "maxjump") {
      opts.interval_mode = mmrope::IntervalMode::MaxJump;
    } else if (interval == "vanilla") {
      opts.interval_mode = mmrope::IntervalMode::VanillaMatch;
    } else {
      throw std::invalid_argument("unknown interval mode '" + interval +
                                  "' (expected maxjump or vanilla)");
    }
    opts.circle_radius = radius;
    return opts;
  }

  static std::string join_names() {
    std::string out;
    for (const std::string& n : mmrope::design_names()) {
      if (!out.empty()) out += ", ";
      out += n;
    }
    return out;
  }

 private:
  bool reset_value_ = false;
  CLI::Option* reset_opt_ = nullptr;
};

struct FreqFlags {
  int d = 128;
  double base = 1000000.0;
  std::string scheme = "interleaved";
  std::string ratio;
  std::string alloc;
  std::string extrapolation = "none";
  double scale = 1.0;
  double yarn_alpha = 1.0;
  double yarn_beta = 32.0;
  std::int64_t train_ctx = 32768;
  int q_heads = 28;
  int kv_heads = 4;
  std::string head_ratio = "2:1:1";

  void attach(CLI::App* cmd) {
    cmd->add_option("--d", d, "head dimension (even)")->capture_default_str();
    cmd->add_option("--base", base, "rotary base")->capture_default_str();
    cmd->add_option("--scheme", scheme,
                    "frequency allocation: chunked, interleaved, videorope-like, ilrope-like, "
                    "multihead")->capture_default_str();
    cmd->add_option("--ratio", ratio, "channel-pair ratio t:h:w (default 24:20:20 for d=128)");
    cmd->add_option("--alloc", alloc,
                    "inline allocation config, e.g. scheme=interleaved,ratio=24:20:20,d=128,"
                    "base=1000000 (individual flags override)");
    cmd->add_option("--extrapolation", extrapolation, "none, ntk or yarn")->capture_default_str();
    cmd->add_option("--scale", scale, "extrapolation scale (>= 1)")->capture_default_str();
    cmd->add_option("--yarn-alpha", yarn_alpha, "YaRN ramp lower bound")->capture_default_str();
    cmd->add_option("--yarn-beta", yarn_beta, "YaRN ramp upper bound")->capture_default_str();
    cmd->add_option("--train-ctx", train_ctx, "training context length")->capture_default_str();
    cmd->add_option("--q-heads", q_heads, "query head count (multihead scheme)")->capture_default_str();
    cmd->add_option("--kv-heads", kv_heads, "KV head count (multihead scheme)")->capture_default_str();
    cmd->add_option("--head-ratio", head_ratio, "KV-head ratio t:h:w (multihead scheme)")->capture_default_str();
    base_t_opt_ = cmd->add_option("--base-t", base_t_, "per-axis rotary base override, temporal");
    base_h_opt_ = cmd->add_option("--base-h", base_h_, "per-axis rotary base override, vertical");
    base_w_opt_ = cmd->add_option("--base-w", base_w_, "per-axis rotary base override, horizontal");
  }

  // Apply --alloc first, then any explicit flags on top.
  void resolve(const CLI::App* cmd) {
    if (!alloc.empty()) {
      mmrope::AllocConfig cfg = mmrope::parse_alloc_config(alloc);
      if (cmd->count("--scheme") == 0) scheme = mmrope::scheme_name(cfg.scheme);
      if (cmd->count("--ratio") == 0) ratio = cfg.ratio.to_string();
      if (cmd->count("--d") == 0) d = cfg.d;
      if (cmd->count("--base") == 0) base = cfg.base;
    }
  }

  mmrope::AxisRatio resolved_ratio() const {
    if (!ratio.empty()) return mmrope::parse_ratio(ratio);
    if (d == 128) return {24, 20, 20};
    const int half = d / 2;
    const int spatial = half / 3;
    return {half - 2 * spatial, spatial, spatial};
  }

  mmrope::ExtrapolationSpec extrapolation_spec() const {
    mmrope::ExtrapolationSpec spec;
    if (extrapolation == "none") spec.method = mmrope::ExtrapolationMethod::None;
    else if (extrapolation == "ntk") spec.method = mmrope::ExtrapolationMethod::NtkAware;
    else if (extrapolation == "yarn") spec.method = mmrope::ExtrapolationMethod::Yarn;
    else throw std::invalid_argument("unknown extrapolation '" + extrapolation +
                                     "' (expected none, ntk or yarn)");
    spec.scale = scale;
    spec.alpha = yarn_alpha;
    spec.beta = yarn_beta;
    spec.orig_ctx = train_ctx;
    return spec;
  }

  bool multihead() const { return scheme == "multihead"; }

  mmrope::RotarySpec rotary_spec() const {
    const mmrope::FreqTable table = mmrope::base_frequencies(d, base);
    if (multihead()) {
      return mmrope::make_rotary_spec(
          table, mmrope::alloc_multihead(q_heads, kv_heads, mmrope::parse_ratio(head_ratio)),
          extrapolation_spec());
    }
    mmrope::FreqAllocation allocation =
        mmrope::make_allocation(mmrope::parse_scheme(scheme), d, resolved_ratio());
    const bool t_set = base_t_opt_ && base_t_opt_->count() > 0;
    const bool h_set = base_h_opt_ && base_h_opt_->count() > 0;
    const bool w_set = base_w_opt_ && base_w_opt_->count() > 0;
    if (t_set || h_set || w_set) {
      allocation.per_axis_base = {t_set ? base_t_ : base, h_set ? base_h_ : base,
                                  w_set ? base_w_ : base};
    }
    return mmrope::make_rotary_spec(table, allocation, extrapolation_spec());
  }

  std::string ratio_label() const {
    return multihead() ? head_ratio : resolved_ratio().to_string();
  }

  friend int run_cli(int, char**);

 private:
  double base_t_ = 0, base_h_ = 0, base_w_ = 0;
  CLI::Option* base_t_opt_ = nullptr;
  CLI::Option* base_h_opt_ = nullptr;
  CLI::Option* base_w_opt_ = nullptr;
};

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
  } else {
    mmrope::write_text_file(out_path, content);
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"multimodal rotary position embedding toolkit"};
  app.require_subcommand(1);

  std::string stream_path, out_path;
  std::string vectors_path, pq = "0,0,0", pk = "0,0,0", axis_filter;
  std::vector<std::string> matrix_paths;
  double grid_lo = 1.0, grid_hi = 1e4;
  int grid_points = 200;

  DesignFlags layout_design, check_design, mass_design, rec_design;
  FreqFlags freqs_cfg, decay_cfg, score_cfg;

  auto add_stream = [&stream_path](CLI::App* cmd) {
    cmd->add_option("--stream", stream_path, "stream spec JSON file")->required();
  };
  auto add_out = [&out_path](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "output path (default: stdout)");
  };

  CLI::App* layout_cmd = app.add_subcommand("layout", "dump a position layout as CSV");
  add_stream(layout_cmd);
  layout_design.attach(layout_cmd);
  add_out(layout_cmd);

  CLI::App* check_cmd =
      app.add_subcommand("check", "positional-coherence audit (exit 1 on generated overlap)");
  add_stream(check_cmd);
  check_design.attach(check_cmd);
  add_out(check_cmd);

  CLI::App* freqs_cmd = app.add_subcommand("freqs", "dump the effective frequency table as CSV");
  freqs_cfg.attach(freqs_cmd);
  add_out(freqs_cmd);

  CLI::App* decay_cmd = app.add_subcommand("decay", "long-range decay curves per axis as CSV");
  decay_cfg.attach(decay_cmd);
  decay_cmd->add_option("--axis", axis_filter, "restrict to one axis (T, H or W)");
  decay_cmd->add_option("--grid-min", grid_lo, "smallest nonzero delta")->capture_default_str();
  decay_cmd->add_option("--grid-max", grid_hi, "largest delta")->capture_default_str();
  decay_cmd->add_option("--grid-points", grid_points, "geometric grid size")->capture_default_str();
  add_out(decay_cmd);

  CLI::App* score_cmd = app.add_subcommand("score", "attention score between two vectors");
  score_cfg.attach(score_cmd);
  score_cmd->add_option("--vectors", vectors_path, "CSV with q on line 1 and k on line 2")
      ->required();
  score_cmd->add_option("--pq", pq, "query position triple t,h,w (rationals allowed)")->capture_default_str();
  score_cmd->add_option("--pk", pk, "key position triple t,h,w (rationals allowed)")->capture_default_str();
  add_out(score_cmd);

  CLI::App* mass_cmd = app.add_subcommand("mass", "attention mass on visual tokens + sink profile");
  add_stream(mass_cmd);
  mass_design.attach(mass_cmd);
  mass_cmd->add_option("--matrix", matrix_paths, "row-stochastic attention matrix CSV (repeatable)")
      ->required();
  add_out(mass_cmd);

  CLI::App* rec_cmd = app.add_subcommand("recommend", "minimal extrapolation rescale for a stream");
  add_stream(rec_cmd);
  rec_design.attach(rec_cmd);
  std::int64_t rec_train_ctx = 32768;
  rec_cmd->add_option("--train-ctx", rec_train_ctx, "training context length")->capture_default_str();
  add_out(rec_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (app.got_subcommand(layout_cmd)) {
      const mmrope::TokenStream stream = mmrope::parse_stream(mmrope::read_text_file(stream_path));
      const mmrope::PositionLayout layout =
          mmrope::assign_by_name(layout_design.design, stream, layout_design.options());
      emit(out_path, mmrope::layout_to_csv(layout));
      return 0;
    }

    if (app.got_subcommand(check_cmd)) {
      const mmrope::TokenStream stream = mmrope::parse_stream(mmrope::read_text_file(stream_path));
      const mmrope::PositionLayout layout =
          mmrope::assign_by_name(check_design.design, stream, check_design.options());
      const mmrope::CoherenceReport report = mmrope::check_coherence(layout, stream);
      emit(out_path, mmrope::coherence_to_json(report) + "\n");
      return report.generated_overlap ? kExitAuditFail : 0;
    }

    if (app.got_subcommand(freqs_cmd)) {
      freqs_cfg.resolve(freqs_cmd);
      if (freqs_cfg.multihead()) {
        throw std::invalid_argument("freqs requires a channel-split scheme");
      }
      const mmrope::RotarySpec spec = freqs_cfg.rotary_spec();
      std::string csv = "pair_index,axis,theta\n";
      for (std::size_t i = 0; i < spec.theta.size(); ++i) {
        csv += std::to_string(i);
        csv += ',';
        csv += mmrope::axis_name((*spec.pair_axis)[i]);
        csv += ',';
        csv += mmrope::format_double(spec.theta[i]);
        csv += '\n';
      }
      emit(out_path, csv);
      return 0;
    }

    if (app.got_subcommand(decay_cmd)) {
      decay_cfg.resolve(decay_cmd);
      const mmrope::RotarySpec spec = decay_cfg.rotary_spec();
      std::vector<double> grid = mmrope::default_delta_grid(grid_lo, grid_hi, grid_points);
      std::vector<mmrope::Axis> axes;
      if (!axis_filter.empty()) {
        axes.push_back(mmrope::parse_axis(axis_filter));
      } else {
        axes = {mmrope::Axis::T, mmrope::Axis::H, mmrope::Axis::W};
      }
      std::vector<mmrope::DecayCurve> curves;
      for (mmrope::Axis a : axes) curves.push_back(mmrope::decay_curve(spec, a, grid));
      const std::string scheme_label =
          decay_cfg.multihead() ? "multihead" : decay_cfg.scheme;
      emit(out_path, mmrope::decay_to_csv(curves, scheme_label, decay_cfg.ratio_label(),
                                          decay_cfg.d, decay_cfg.base));
      return 0;
    }

    if (app.got_subcommand(score_cmd)) {
      score_cfg.resolve(score_cmd);
      if (score_cfg.multihead()) {
        throw std::invalid_argument("score requires a channel-split scheme");
      }
      const auto vectors = mmrope::parse_vectors_csv(mmrope::read_text_file(vectors_path));
      if (vectors.size() < 2) {
        throw std::invalid_argument("vector file must contain q and k on two lines");
      }
      auto parse_triple = [](const std::string& text) {
        std::size_t a = text.find(','), b = text.rfind(',');
        if (a == std::string::npos || b == a) {
          throw std::invalid_argument("position triple must be t,h,w: '" + text + "'");
        }
        return mmrope::RealTriple(mmrope::Dyadic::parse(text.substr(0, a)).to_double(),
                                  mmrope::Dyadic::parse(text.substr(a + 1, b - a - 1)).to_double(),
                                  mmrope::Dyadic::parse(text.substr(b + 1)).to_double());
      };
      const double score = mmrope::attention_score(vectors[0], vectors[1], parse_triple(pq),
                                                   parse_triple(pk), score_cfg.rotary_spec());
      nlohmann::ordered_json doc;
      doc["score"] = score;
      emit(out_path, doc.dump() + "\n");
      return 0;
    }

    if (app.got_subcommand(mass_cmd)) {
      const mmrope::TokenStream stream = mmrope::parse_stream(mmrope::read_text_file(stream_path));
      const mmrope::PositionLayout layout =
          mmrope::assign_by_name(mass_design.design, stream, mass_design.options());
      std::vector<mmrope::AttentionMassReport> reports;
      for (const std::string& path : matrix_paths) {
        reports.push_back(mmrope::attention_mass(
            mmrope::parse_matrix_csv(mmrope::read_text_file(path)), layout, stream));
      }
      // Uniform average across the supplied matrices.
      mmrope::AttentionMassReport avg = reports.front();
      for (std::size_t r = 1; r < reports.size(); ++r) {
        avg.visual_mass += reports[r].visual_mass;
        for (std::size_t b = 0; b < avg.blocks.size(); ++b) {
          for (std::size_t c = 0; c < avg.blocks[b].cell_mass.size(); ++c) {
            avg.blocks[b].cell_mass[c] += reports[r].blocks[b].cell_mass[c];
          }
        }
      }
      avg.visual_mass /= static_cast<double>(reports.size());
      for (auto& b : avg.blocks) {
        for (double& c : b.cell_mass) c /= static_cast<double>(reports.size());
      }
      nlohmann::ordered_json doc = nlohmann::ordered_json::parse(mmrope::mass_to_json(avg));
      doc["matrices"] = matrix_paths.size();
      nlohmann::ordered_json per = nlohmann::ordered_json::array();
      for (const auto& r : reports) per.push_back(r.visual_mass);
      doc["per_matrix_visual_mass"] = per;
      emit(out_path, doc.dump() + "\n");
      return 0;
    }

    if (app.got_subcommand(rec_cmd)) {
      const mmrope::TokenStream stream = mmrope::parse_stream(mmrope::read_text_file(stream_path));
      const double scale =
          mmrope::recommend_scale(stream, rec_design.design, rec_train_ctx, rec_design.options());
      mmrope::PositionLayout layout =
          mmrope::assign_by_name(rec_design.design, stream, rec_design.options());
      mmrope::Dyadic max_pos(-1);
      for (const auto& e : layout.entries) max_pos = mmrope::max(max_pos, mmrope::component_max(e.pos));
      nlohmann::ordered_json doc;
      doc["design"] = rec_design.design;
      doc["train_ctx"] = rec_train_ctx;
      doc["max_position"] = max_pos.to_double();
      doc["scale"] = scale;
      emit(out_path, doc.dump() + "\n");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
