#pragma once

// Command implementations behind the `npn` tool. Each command returns a
// ResultDocument that can be rendered as CSV or JSON; tools/npn.cpp only
// parses flags and writes the rendered text.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npn/csv.hpp"
#include "npn/error.hpp"
#include "npn/estimators.hpp"
#include "npn/matrix.hpp"
#include "npn/rank_stats.hpp"
#include "npn/simulation.hpp"

namespace npn {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Command { Estimate, Simulate, Bandable };
enum class OutputFormat { Csv, Json };

struct RunConfig {
  Command command = Command::Estimate;
  std::string input;
  std::vector<EstimatorKind> estimators;
  std::optional<double> z;  // rho/tau floor; default 1e-3
  std::optional<int> k;     // kNN neighbors; default 2 (20 under outliers)
  TiePolicy ties = TiePolicy::LiteralIndicator;
  bool entropy = false;

  ExperimentId experiment = ExperimentId::E1_SampleSize;
  std::size_t trials = 200;
  std::size_t n = 100;
  std::size_t d = 25;
  std::vector<double> grid;
  MarginalTransform transform = MarginalTransform::Exp;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  double c = 0.0;
  std::size_t verify = 0;

  std::string out;
  OutputFormat format = OutputFormat::Csv;
};

struct ResultDocument {
  nlohmann::ordered_json json;
  std::string csv;
  std::vector<std::string> warnings;
  int exit_code = 0;

  [[nodiscard]] std::string render(OutputFormat format) const {
    return format == OutputFormat::Json ? json.dump(2) + "\n" : csv;
  }
};

/// 0 success, 1 usage error, 2 data error, 3 numeric failure.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UsageError:
      return 1;
    case ErrorKind::ParseError:
    case ErrorKind::NonFiniteValue:
    case ErrorKind::EmptyFile:
    case ErrorKind::DegenerateColumn:
    case ErrorKind::InsufficientSamples:
      return 2;
    default:
      return 3;
  }
}

inline nlohmann::ordered_json error_record(ErrorKind kind, const std::string& message) {
  return {{"kind", std::string(to_string(kind))}, {"message", message}};
}

namespace detail {

inline nlohmann::ordered_json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline std::string ties_name(TiePolicy p) { return p == TiePolicy::MidRank ? "midrank" : "literal"; }

inline nlohmann::ordered_json estimator_names(const std::vector<EstimatorKind>& kinds) {
  auto arr = nlohmann::ordered_json::array();
  for (auto k : kinds) arr.push_back(std::string(to_string(k)));
  return arr;
}

}  // namespace detail

inline std::vector<EstimatorKind> all_estimators() {
  return {EstimatorKind::GaussianPlugin, EstimatorKind::Gauss, EstimatorKind::Rho, EstimatorKind::Tau,
          EstimatorKind::Knn};
}

/// Runs each selected estimator on the loaded matrix. Per-estimator failures
/// become error records and a nonzero exit code; the other estimators still run.
inline ResultDocument cmd_estimate(const RunConfig& cfg) {
  const DataMatrix x = load_csv(cfg.input);
  const std::vector<EstimatorKind> kinds = cfg.estimators.empty() ? all_estimators() : cfg.estimators;
  const double z = cfg.z.value_or(1e-3);
  const int k = cfg.k.value_or(2);

  ResultDocument doc;
  doc.json["tool"] = "npn";
  doc.json["version"] = std::string(kToolVersion);
  doc.json["command"] = "estimate";
  doc.json["config"] = {{"input", cfg.input},  {"estimators", detail::estimator_names(kinds)},
                        {"z", z},              {"k", k},
                        {"ties", detail::ties_name(cfg.ties)}, {"entropy", cfg.entropy}};
  doc.json["n"] = x.n();
  doc.json["d"] = x.dim();
  doc.json["results"] = nlohmann::ordered_json::array();
  doc.csv = "estimator,value,lambda_min,clamped,error\n";

  auto fail = [&](ErrorKind kind) {
    if (doc.exit_code == 0) doc.exit_code = exit_code_for(kind);
  };

  for (EstimatorKind kind : kinds) {
    nlohmann::ordered_json row;
    row["estimator"] = std::string(to_string(kind));
    // Gauss is left unregularized, as in the benchmark protocol.
    const EstimatorConfig ecfg{kind, kind == EstimatorKind::Gauss ? 0.0 : z, k, cfg.ties};
    try {
      const MiEstimate est = estimate_mi(x, ecfg);
      row["value"] = detail::number_or_inf(est.value);
      row["lambda_min"] = est.lambda_min ? nlohmann::ordered_json(*est.lambda_min) : nlohmann::ordered_json(nullptr);
      row["clamped"] = est.clamped;
      if (est.mean_diagonal) row["mean_diagonal"] = *est.mean_diagonal;
      doc.csv += row["estimator"].get<std::string>() + "," + format_double(est.value) + "," +
                 (est.lambda_min ? format_double(*est.lambda_min) : std::string()) + "," +
                 std::to_string(est.clamped) + ",\n";
    } catch (const Error& e) {
      row["value"] = nullptr;
      row["error"] = error_record(e.kind(), e.what());
      doc.csv += row["estimator"].get<std::string>() + ",,,," + std::string(to_string(e.kind())) + "\n";
      fail(e.kind());
    }
    doc.json["results"].push_back(row);
  }

  if (cfg.entropy) {
    nlohmann::ordered_json ent;
    try {
      const EntropyEstimate h = entropy_npn_detailed(x, z, k, cfg.ties);
      ent["value"] = detail::number_or_inf(h.entropy);
      ent["marginal_sum"] = detail::number_or_inf(h.marginal_sum);
      ent["mi"] = h.mi;
      doc.csv += "entropy," + format_double(h.entropy) + ",,,\n";
    } catch (const Error& e) {
      ent["value"] = nullptr;
      ent["error"] = error_record(e.kind(), e.what());
      doc.csv += "entropy,,,," + std::string(to_string(e.kind())) + "\n";
      fail(e.kind());
    }
    doc.json["entropy"] = ent;
  }
  return doc;
}

/// Builds the experiment spec a simulate invocation describes.
inline ExperimentSpec experiment_spec_from(const RunConfig& cfg) {
  ExperimentSpec spec = default_experiment_spec(cfg.experiment);
  spec.trials = cfg.trials;
  spec.n = cfg.n;
  spec.dim = cfg.experiment == ExperimentId::E4_Sigma ? 2 : cfg.d;
  if (!cfg.grid.empty()) spec.sweep = cfg.grid;
  spec.seed = cfg.seed;
  spec.transform = cfg.transform;
  spec.threads = cfg.threads;
  if (!cfg.estimators.empty()) {
    std::vector<EstimatorConfig> chosen;
    for (EstimatorKind kind : cfg.estimators)
      for (const auto& e : spec.estimators)
        if (e.kind == kind) chosen.push_back(e);
    spec.estimators = chosen;
  }
  for (auto& e : spec.estimators) {
    if (cfg.k) e.k = *cfg.k;
    if (cfg.z && (e.kind == EstimatorKind::Rho || e.kind == EstimatorKind::Tau)) e.z = *cfg.z;
    e.tie_policy = cfg.ties;
  }
  return spec;
}

inline ResultDocument cmd_simulate(const RunConfig& cfg) {
  ExperimentSpec spec = experiment_spec_from(cfg);
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::UsageError, e.what());
  }
  const std::vector<MseSummary> rows = run_experiment(spec);
  const auto exp_id = static_cast<int>(spec.id);
  const std::string param(sweep_parameter(spec.id));

  ResultDocument doc;
  std::vector<EstimatorKind> kinds;
  for (const auto& e : spec.estimators) kinds.push_back(e.kind);
  auto est_cfg = nlohmann::ordered_json::array();
  for (const auto& e : spec.estimators)
    est_cfg.push_back({{"estimator", std::string(to_string(e.kind))}, {"z", e.z}, {"k", e.k}});
  doc.json["tool"] = "npn";
  doc.json["version"] = std::string(kToolVersion);
  doc.json["command"] = "simulate";
  doc.json["config"] = {{"experiment", exp_id},
                        {"trials", spec.trials},
                        {"n", spec.n},
                        {"d", spec.dim},
                        {"sweep_param", param},
                        {"grid", spec.sweep},
                        {"transform", std::string(to_string(spec.transform))},
                        {"ties", detail::ties_name(cfg.ties)},
                        {"seed", spec.seed},
                        {"estimators", est_cfg}};
  doc.json["rows"] = nlohmann::ordered_json::array();
  doc.csv = "experiment,sweep_param,sweep_value,estimator,mse,stderr,finite_fraction,trials\n";
  for (const auto& r : rows) {
    const std::string est(to_string(r.estimator));
    doc.json["rows"].push_back({{"experiment", exp_id},
                                {"sweep_param", param},
                                {"sweep_value", r.sweep_value},
                                {"estimator", est},
                                {"mse", r.mse ? nlohmann::ordered_json(*r.mse) : nlohmann::ordered_json(nullptr)},
                                {"stderr", r.std_error},
                                {"finite_fraction", r.finite_fraction},
                                {"trials", r.trials}});
    doc.csv += std::to_string(exp_id) + "," + param + "," + format_double(r.sweep_value) + "," + est + "," +
               (r.mse ? format_double(*r.mse) : std::string()) + "," + format_double(r.std_error) + "," +
               format_double(r.finite_fraction) + "," + std::to_string(r.trials) + "\n";
  }
  return doc;
}

/// Prints the Gershgorin bounds for c-bandable correlation matrices and, with
/// verify > 0, the extreme eigenvalues over that many random boundary draws.
inline ResultDocument cmd_bandable(const RunConfig& cfg) {
  const EigenBounds b = bandable_eigen_bounds(cfg.c, cfg.d);
  ResultDocument doc;
  const bool positive = cfg.c < 1.0 / 3.0;
  if (!positive) {
    doc.warnings.push_back("lower bound is not positive: the positivity guarantee needs c < 1/3");
  }
  doc.json["tool"] = "npn";
  doc.json["version"] = std::string(kToolVersion);
  doc.json["command"] = "bandable";
  doc.json["config"] = {{"c", cfg.c}, {"d", cfg.d}, {"verify", cfg.verify}, {"seed", cfg.seed}};
  doc.json["lower"] = b.lower;
  doc.json["upper"] = b.upper;
  doc.json["positive_lower_bound"] = positive;
  doc.csv = "c,d,lower,upper,positive_lower_bound,draws,min_eigenvalue,max_eigenvalue,within_bounds\n";
  std::string tail = ",0,,,";
  if (cfg.verify > 0) {
    double lo = kInfinity;
    double hi = -kInfinity;
    for (std::size_t t = 0; t < cfg.verify; ++t) {
      Rng rng(derive_seed(cfg.seed, t));
      const EigenDecomposition eig = sym_eigen(sample_bandable(cfg.d, cfg.c, rng).sym());
      lo = std::min(lo, eig.eigenvalues.back());
      hi = std::max(hi, eig.eigenvalues.front());
    }
    const bool within = lo >= b.lower - 1e-9 && hi <= b.upper + 1e-9;
    doc.json["verify"] = {{"draws", cfg.verify}, {"min_eigenvalue", lo}, {"max_eigenvalue", hi}, {"within_bounds", within}};
    tail = "," + std::to_string(cfg.verify) + "," + format_double(lo) + "," + format_double(hi) + "," +
           (within ? "true" : "false");
    if (!within) doc.exit_code = 3;
  }
  if (!positive) doc.json["warning"] = doc.warnings.front();
  doc.csv += format_double(cfg.c) + "," + std::to_string(cfg.d) + "," + format_double(b.lower) + "," +
             format_double(b.upper) + "," + (positive ? "true" : "false") + tail + "\n";
  return doc;
}

inline ResultDocument run_command(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Estimate: return cmd_estimate(cfg);
    case Command::Simulate: return cmd_simulate(cfg);
    case Command::Bandable: return cmd_bandable(cfg);
  }
  throw Error(ErrorKind::UsageError, "unknown command");
}

}  // namespace npn
