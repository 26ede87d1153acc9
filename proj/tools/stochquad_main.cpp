// stochquad: reproducible experiment driver for stochastic Gauss-type
// quadrature on integration meshes and Deep Ritz training.
//
// Exit codes: 0 success, 2 usage/config error, 3 numeric divergence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochquad/drm.hpp"
#include "stochquad/io.hpp"
#include "stochquad/polynomial.hpp"
#include "stochquad/quadrature.hpp"
#include "stochquad/stats.hpp"
#include "stochquad/version.hpp"

using namespace stochquad;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    std::uint64_t seed, double wall_seconds, const json& metrics) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["seed"] = seed;
  m["version"] = kVersion;
  m["wall_time_seconds"] = wall_seconds;
  m["metrics"] = metrics;
  write_text_file(path.string(), m.dump(2) + "\n");
}

std::vector<RuleId> parse_rules(const std::string& csv) {
  std::vector<RuleId> rules;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string token = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!token.empty()) rules.push_back(rule_id_from_string(token));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (rules.empty()) throw CLI::ValidationError("--rules", "empty rule list");
  return rules;
}

// ---------------------------------------------------------------------------
// exactness

int cmd_exactness(const std::string& rule_name, int dim, std::uint64_t seed, const fs::path& out_dir) {
  const Timer timer;
  const RuleId id = rule_id_from_string(rule_name);
  if (id == RuleId::MC) throw CLI::ValidationError("--rule", "mc has no polynomial order to check");
  const RuleDescriptor rule = make_rule(id, dim);
  const Mesh mesh = rule_mesh(rule, rule.dim == 1 ? 5 : (rule.dim == 2 ? 3 : 1));
  RandomStream rng(seed);

  const int trials = 200;
  bool all_required_pass = true;
  double weight_sum_error = 0.0;
  json degrees = json::array();
  for (int degree = 0; degree <= rule.order + 1; ++degree) {
    const bool required = degree <= rule.order;
    double max_error = 0.0;  // max over polys of |err| / (1 + |exact|)
    for (int t = 0; t < trials; ++t) {
      const Polynomial poly = Polynomial::random(rule.dim, degree, rng);
      auto f = [&](const Vec& x) { return poly.eval(x); };
      {
        const double exact = poly.integral_master(rule.master);
        const QuadratureSample s = sample_master(rule, rng);
        double got = 0.0;
        for (std::size_t j = 0; j < s.nodes.size(); ++j) got += s.weights[j] * f(s.nodes[j]);
        max_error = std::max(max_error, std::abs(got - exact) / (1.0 + std::abs(exact)));
        double sum_abs = 0.0;
        for (double w : s.weights) sum_abs += std::abs(w);
        weight_sum_error = std::max(
            weight_sum_error, std::abs(s.weight_sum() - rule.master.volume) / std::max(1.0, sum_abs));
      }
      {
        const double exact = poly.integral_box(0.0, 1.0);
        const double got = integrate_global(rule, mesh, f, rng);
        max_error = std::max(max_error, std::abs(got - exact) / (1.0 + std::abs(exact)));
      }
    }
    const bool pass = max_error <= 1e-10;
    degrees.push_back(
        {{"degree", degree}, {"max_error", max_error}, {"required", required}, {"pass", pass}});
    if (required && !pass) all_required_pass = false;
  }
  if (weight_sum_error > 1e-12) all_required_pass = false;

  json report;
  report["rule"] = rule_name;
  report["d"] = rule.dim;
  report["order"] = rule.order;
  report["trials_per_degree"] = trials;
  report["degrees"] = degrees;
  report["weight_sum_max_error"] = weight_sum_error;
  report["pass"] = all_required_pass;

  fs::create_directories(out_dir);
  const fs::path report_path = out_dir / ("exactness_" + rule_name + ".json");
  write_text_file(report_path.string(), report.dump(2) + "\n");
  json config{{"rule", rule_name}, {"d", rule.dim}};
  write_manifest(out_dir / ("exactness_" + rule_name + "_manifest.json"), "exactness", config, seed,
                 timer.seconds(), json{{"pass", all_required_pass}});
  std::printf("exactness %s: %s (report %s)\n", rule_name.c_str(), all_required_pass ? "pass" : "FAIL",
              report_path.string().c_str());
  return all_required_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// variance-study

std::vector<long> default_grid(RuleId id, int dim) {
  if (dim == 1) return {6, 12, 24, 48, 96};
  if (dim == 2) {
    switch (id) {
      case RuleId::P1Tri:
        return {600, 1176, 2400, 4056, 7776};  // 6 n^2
      case RuleId::P2Tri:
        return {512, 1152, 2048, 3872, 8192};  // 8 n^2
      case RuleId::P3:
        return {605, 1125, 2205, 4205, 8000};  // 5 n^2
      case RuleId::P0:
        return {625, 1156, 2209, 4225, 8100};  // n^2
      case RuleId::P1:
        return {512, 1152, 2048, 4050, 8192};  // 2 n^2
      default:
        return {512, 1024, 2048, 4096, 8192};  // mc: free choice
    }
  }
  switch (id) {
    case RuleId::P2Tet:
      return {1755, 4160, 8125, 14040, 22295};  // 65 n^3
    case RuleId::P1Tet:
      return {2500, 4320, 10240, 20000, 34560};  // 20 n^3
    case RuleId::P0:
      return {1728, 4096, 8000, 15625, 21952};  // n^3
    case RuleId::P3:
      return {1875, 3240, 7680, 15000, 25920};  // 15 n^3
    case RuleId::P1:
      return {2000, 3456, 8192, 16000, 21296};  // 2 n^3
    default:
      return {2000, 4000, 8000, 16000, 22000};
  }
}

int cmd_variance_study(int dim, const std::vector<RuleId>& rules, const std::vector<long>& grid_override,
                       int repetitions, std::uint64_t seed, int threads, const fs::path& out_dir) {
  const Timer timer;
  const ProblemSpec spec = make_problem(dim);
  auto density = [&spec](const Vec& x) { return loss_density_at_exact(spec, x); };

  std::string csv = "rule,d,N,repetitions,variance,slope_ref,slope_fit\n";
  json slopes;
  int rule_index = 0;
  for (RuleId id : rules) {
    const std::vector<long> grid = grid_override.empty() ? default_grid(id, dim) : grid_override;
    const ScalingStudy study =
        variance_scaling_study(id, dim, grid, density, repetitions,
                               RandomStream(seed).substream(static_cast<std::uint64_t>(rule_index)).seed(),
                               threads);
    for (const auto& rec : study.records) {
      csv += std::string(rule_id_name(id)) + "," + std::to_string(dim) + "," +
             std::to_string(rec.n_points) + "," + std::to_string(rec.repetitions) + "," +
             format_double(rec.sample_variance) + "," + format_double(rec.reference_exponent) + "," +
             format_double(study.fitted_slope) + "\n";
    }
    for (long excluded : study.excluded_points)
      std::fprintf(stderr, "warning: %s N=%ld excluded (zero variance)\n", rule_id_name(id), excluded);
    slopes[rule_id_name(id)] = study.fitted_slope;
    ++rule_index;
  }

  fs::create_directories(out_dir);
  write_text_file((out_dir / "study.csv").string(), csv);
  json config;
  config["d"] = dim;
  json rule_names = json::array();
  for (RuleId id : rules) rule_names.push_back(rule_id_name(id));
  config["rules"] = rule_names;
  config["repetitions"] = repetitions;
  write_manifest(out_dir / "study_manifest.json", "variance-study", config, seed, timer.seconds(),
                 json{{"slopes", slopes}});
  std::printf("variance-study d=%d -> %s\n", dim, (out_dir / "study.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// train

std::string trace_csv(const TrainingTrace& trace) {
  std::string csv = "k,loss,gamma,h1_error_pct\n";
  for (const auto& rec : trace.records) {
    csv += std::to_string(rec.k) + "," + format_double(rec.loss) + "," + format_double(rec.gamma) + ",";
    if (rec.has_h1) csv += format_double(rec.h1_pct);
    csv += "\n";
  }
  return csv;
}

json train_config_json(const TrainConfig& c, const std::string& label) {
  json j;
  j["label"] = label;
  j["d"] = c.dim;
  j["rule"] = c.deterministic ? "midpoint" : rule_id_name(c.rule);
  j["mesh_n"] = c.mesh_n;
  j["mc_points"] = c.mc_points;
  j["k_max"] = c.k_max;
  j["seed"] = c.seed;
  j["eval_stride"] = c.eval_stride;
  j["deterministic"] = c.deterministic;
  j["det_points_per_axis"] = c.det_points_per_axis;
  j["gamma0"] = c.gamma0;
  j["gamma_f"] = c.gamma_f;
  j["epsilon"] = c.epsilon;
  j["p2_mode"] = c.p2_mode == P2SamplingMode::Database ? "database" : "rejection";
  return j;
}

int run_training(const TrainConfig& config, const std::string& label, const fs::path& out_dir) {
  const Timer timer;
  const TrainingTrace trace = train(config);
  fs::create_directories(out_dir);
  write_text_file((out_dir / (label + "_trace.csv")).string(), trace_csv(trace));
  save_parameters(trace.final_params, (out_dir / (label + "_params.json")).string());

  json metrics;
  metrics["final_h1_error_pct"] = trace.final_h1_pct;
  metrics["final_loss"] = trace.records.empty() ? 0.0 : trace.records.back().loss;
  metrics["iterations_run"] = trace.records.size();
  metrics["points_per_iteration"] = trace.points_per_iteration;
  metrics["diverged"] = trace.diverged;
  if (trace.diverged) metrics["abort_reason"] = trace.abort_reason;
  if (!config.deterministic && config.rule != RuleId::MC) {
    const RuleDescriptor rule = make_rule(config.rule, config.dim);
    metrics["mesh_summary"] = json::parse(mesh_summary_json(rule_mesh(rule, config.mesh_n)));
  }
  write_manifest(out_dir / (label + "_manifest.json"), "train", train_config_json(config, label),
                 config.seed, timer.seconds(), metrics);
  std::printf("train %-22s final loss %12.5g  H1 %8.4f%%  %s\n", label.c_str(),
              trace.records.empty() ? 0.0 : trace.records.back().loss, trace.final_h1_pct,
              trace.diverged ? "[diverged]" : "");
  return trace.diverged ? 3 : 0;
}

struct PresetRun {
  std::string label;
  TrainConfig config;
};

std::vector<PresetRun> expand_preset(const std::string& preset, std::uint64_t seed, bool full) {
  auto mc = [&](int d, long points, long k_max) {
    TrainConfig c;
    c.dim = d;
    c.rule = RuleId::MC;
    c.mc_points = points;
    c.k_max = k_max;
    c.seed = seed;
    c.eval_stride = 10;
    return c;
  };
  auto meshed = [&](int d, RuleId rule, int n, long k_max) {
    TrainConfig c;
    c.dim = d;
    c.rule = rule;
    c.mesh_n = n;
    c.k_max = k_max;
    c.seed = seed;
    c.eval_stride = 10;
    return c;
  };

  std::vector<PresetRun> runs;
  if (preset == "overfit-1d") {
    TrainConfig c;
    c.dim = 1;
    c.deterministic = true;
    c.det_points_per_axis = 20;
    c.k_max = 4000;
    c.seed = seed;
    runs.push_back({"overfit-1d", c});
  } else if (preset == "bias-1d") {
    const long k_max = full ? 50000 : 20000;
    runs.push_back({"bias-1d_p1", meshed(1, RuleId::P1, 32, k_max)});
    runs.push_back({"bias-1d_p1b", meshed(1, RuleId::P1B, 32, k_max)});
  } else if (preset == "1d-poor") {
    const long k_max = full ? 100000 : 20000;
    runs.push_back({"1d-poor_mc", mc(1, 6, k_max)});
    runs.push_back({"1d-poor_p0", meshed(1, RuleId::P0, 6, k_max)});
    runs.push_back({"1d-poor_p1", meshed(1, RuleId::P1, 3, k_max)});
    runs.push_back({"1d-poor_p3", meshed(1, RuleId::P3, 2, k_max)});
  } else if (preset == "1d-moderate") {
    const long k_max = full ? 25000 : 10000;
    runs.push_back({"1d-moderate_mc", mc(1, 32, k_max)});
    runs.push_back({"1d-moderate_p0", meshed(1, RuleId::P0, 32, k_max)});
    runs.push_back({"1d-moderate_p1", meshed(1, RuleId::P1, 16, k_max)});
    runs.push_back({"1d-moderate_p3", meshed(1, RuleId::P3, 11, k_max)});
  } else if (preset == "1d-good") {
    const long k_max = 10000;
    runs.push_back({"1d-good_mc", mc(1, 252, k_max)});
    runs.push_back({"1d-good_p0", meshed(1, RuleId::P0, 252, k_max)});
    runs.push_back({"1d-good_p1", meshed(1, RuleId::P1, 126, k_max)});
    runs.push_back({"1d-good_p3", meshed(1, RuleId::P3, 84, k_max)});
  } else if (preset == "2d-study") {
    const long k_max = full ? 20000 : 5000;
    runs.push_back({"2d-study_mc-poor", mc(2, 128, k_max)});
    runs.push_back({"2d-study_mc-fine", mc(2, 2312, k_max)});
    runs.push_back({"2d-study_p2tri-poor", meshed(2, RuleId::P2Tri, 4, k_max)});
    runs.push_back({"2d-study_p2tri-fine", meshed(2, RuleId::P2Tri, 17, k_max)});
  } else if (preset == "3d-study") {
    const long k_max = full ? 20000 : 2000;
    runs.push_back({"3d-study_mc-poor", mc(3, 1755, k_max)});
    runs.push_back({"3d-study_mc-mid", mc(3, 5320, k_max)});
    runs.push_back({"3d-study_mc-fine", mc(3, 31000, k_max)});
    runs.push_back({"3d-study_p2tet", meshed(3, RuleId::P2Tet, 3, k_max)});
    // One 3D H1 evaluation costs 64k network evaluations; sample it sparsely.
    for (auto& run : runs) run.config.eval_stride = 100;
  } else {
    throw CLI::ValidationError("--preset", "unknown preset: " + preset);
  }
  return runs;
}

// ---------------------------------------------------------------------------
// cov-metrics

int cmd_cov_metrics(const std::string& params_path, const std::string& rule_name, int mesh_n, int samples,
                    std::uint64_t seed, const fs::path& out_dir) {
  const Timer timer;
  if (!fs::exists(params_path)) {
    std::fprintf(stderr, "error: parameter file not found: %s\n", params_path.c_str());
    return 2;
  }
  const NetworkParameters params = load_parameters(params_path);
  const RuleId id = rule_id_from_string(rule_name);
  const RuleDescriptor rule = make_rule(id, params.dim());
  const Mesh mesh = rule_mesh(rule, mesh_n);
  const CovarianceMetrics metrics = gradient_covariance_metrics(params, rule, mesh, samples, seed);
  if (!metrics.converged) std::fprintf(stderr, "warning: power iteration hit the iteration cap\n");

  json out;
  out["S"] = metrics.samples;
  out["trace"] = metrics.trace;
  out["lambda_max"] = metrics.lambda_max;
  out["loss_variance"] = metrics.loss_variance;
  out["converged"] = metrics.converged;
  fs::create_directories(out_dir);
  write_text_file((out_dir / "covmetrics.json").string(), out.dump(2) + "\n");
  json config{{"params", params_path}, {"rule", rule_name}, {"mesh_n", mesh_n}, {"samples", samples}};
  write_manifest(out_dir / "covmetrics_manifest.json", "cov-metrics", config, seed, timer.seconds(), out);
  std::printf("cov-metrics %s: trace %.6g lambda_max %.6g loss_var %.6g\n", rule_name.c_str(),
              metrics.trace, metrics.lambda_max, metrics.loss_variance);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Gauss-type quadrature rules on integration meshes + Deep Ritz training"};
  app.set_config("--config", "", "TOML config file (long option names as keys)");
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 1;
  app.add_option("--seed", seed, "master seed (fully determines all randomness)")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker cap for repetition-parallel studies")
      ->capture_default_str();

  auto* ex = app.add_subcommand("exactness", "order-p polynomial exactness and weight-sum checks");
  std::string ex_rule;
  int ex_dim = 0;
  ex->add_option("--rule", ex_rule, "rule id (p0,p1,p3,p1b,p1tri,p2tri,p1tet,p2tet)")->required();
  ex->add_option("--d", ex_dim, "dimension (defaults to the rule's natural dimension)");

  auto* vs = app.add_subcommand("variance-study", "variance vs point count with fitted slopes");
  int vs_dim = 1;
  std::string vs_rules;
  std::vector<long> vs_grid;
  int vs_reps = 1000;
  vs->add_option("--d", vs_dim, "dimension")->required();
  vs->add_option("--rules", vs_rules, "comma-separated rule ids (default: dimension study set)");
  vs->add_option("--n-grid", vs_grid, "explicit point counts (must fit each rule's mesh family)")
      ->delimiter(',');
  vs->add_option("--reps", vs_reps, "repetitions per point count")->capture_default_str();

  auto* tr = app.add_subcommand("train", "Deep Ritz training runs");
  std::string tr_preset, tr_rule = "p1";
  int tr_dim = 1, tr_mesh_n = 32, tr_eval_stride = 10, tr_det_points = 20;
  long tr_kmax = 20000, tr_mc_points = 32;
  bool tr_deterministic = false, tr_full = false, tr_db_mode = false;
  double tr_gamma0 = 1e-2, tr_gammaf = 1e-4, tr_eps = 1e-2;
  tr->add_option("--preset", tr_preset,
                 "overfit-1d | bias-1d | 1d-poor | 1d-moderate | 1d-good | 2d-study | 3d-study");
  tr->add_option("--rule", tr_rule, "rule id for a single run")->capture_default_str();
  tr->add_option("--d", tr_dim, "dimension")->capture_default_str();
  tr->add_option("--mesh-n", tr_mesh_n, "cells per axis")->capture_default_str();
  tr->add_option("--mc-points", tr_mc_points, "points for rule=mc")->capture_default_str();
  tr->add_option("--kmax", tr_kmax, "iteration budget")->capture_default_str();
  tr->add_option("--eval-stride", tr_eval_stride, "H1 evaluation stride (0 = never)")
      ->capture_default_str();
  tr->add_flag("--deterministic", tr_deterministic, "fixed midpoint nodes (overfitting demo)");
  tr->add_option("--det-points", tr_det_points, "midpoint nodes per axis")->capture_default_str();
  tr->add_flag("--full", tr_full, "use the extended (publication-scale) iteration budgets in presets");
  tr->add_flag("--p2-database", tr_db_mode, "database sampling mode for p2tri/p2tet");
  tr->add_option("--gamma0", tr_gamma0, "initial learning rate")->capture_default_str();
  tr->add_option("--gammaf", tr_gammaf, "final learning rate")->capture_default_str();
  tr->add_option("--eps", tr_eps, "adam regularisation constant")->capture_default_str();

  auto* cm = app.add_subcommand("cov-metrics", "stochastic-gradient covariance trace / lambda_max");
  std::string cm_params, cm_rule = "p1";
  int cm_mesh_n = 16, cm_samples = 500;
  cm->add_option("--params", cm_params, "saved parameter JSON")->required();
  cm->add_option("--rule", cm_rule, "rule id")->capture_default_str();
  cm->add_option("--mesh-n", cm_mesh_n, "cells per axis")->capture_default_str();
  cm->add_option("--samples", cm_samples, "gradient draws S")->capture_default_str();

  try {
    app.parse(argc, argv);

    if (ex->parsed()) {
      int dim = ex_dim;
      if (dim == 0) {
        const RuleId id = rule_id_from_string(ex_rule);
        dim = (id == RuleId::P1Tri || id == RuleId::P2Tri)   ? 2
              : (id == RuleId::P1Tet || id == RuleId::P2Tet) ? 3
                                                             : 1;
      }
      return cmd_exactness(ex_rule, dim, seed, out_dir);
    }
    if (vs->parsed()) {
      if (!vs_grid.empty() && vs_grid.size() < 3)
        throw CLI::ValidationError("--n-grid", "need at least 3 point counts");
      std::vector<RuleId> rules;
      if (!vs_rules.empty()) {
        rules = parse_rules(vs_rules);
      } else if (vs_dim == 1) {
        rules = {RuleId::MC, RuleId::P0, RuleId::P1, RuleId::P3};
      } else if (vs_dim == 2) {
        rules = {RuleId::MC, RuleId::P1Tri, RuleId::P2Tri, RuleId::P3};
      } else {
        rules = {RuleId::MC, RuleId::P2Tet};
      }
      return cmd_variance_study(vs_dim, rules, vs_grid, vs_reps, seed, threads, out_dir);
    }
    if (tr->parsed()) {
      std::vector<PresetRun> runs;
      if (!tr_preset.empty()) {
        runs = expand_preset(tr_preset, seed, tr_full);
      } else {
        TrainConfig c;
        c.dim = tr_dim;
        c.rule = rule_id_from_string(tr_rule);
        c.mesh_n = tr_mesh_n;
        c.mc_points = tr_mc_points;
        c.k_max = tr_kmax;
        c.seed = seed;
        c.deterministic = tr_deterministic;
        c.det_points_per_axis = tr_det_points;
        const std::string label = tr_deterministic ? "midpoint" : tr_rule;
        runs.push_back({"train_" + label, c});
      }
      int exit_code = 0;
      const bool preset_mode = !tr_preset.empty();
      for (auto& run : runs) {
        // Explicit flags override preset defaults; otherwise presets keep theirs.
        if (!preset_mode || tr->count("--eval-stride") > 0) run.config.eval_stride = tr_eval_stride;
        run.config.gamma0 = tr_gamma0;
        run.config.gamma_f = tr_gammaf;
        run.config.epsilon = tr_eps;
        if (tr_db_mode) run.config.p2_mode = P2SamplingMode::Database;
        exit_code = std::max(exit_code, run_training(run.config, run.label, out_dir));
      }
      return exit_code;
    }
    if (cm->parsed()) return cmd_cov_metrics(cm_params, cm_rule, cm_mesh_n, cm_samples, seed, out_dir);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
