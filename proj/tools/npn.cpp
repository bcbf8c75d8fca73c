#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "npn/cli.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void report_error(npn::ErrorKind kind, const std::string& message) {
  nlohmann::ordered_json doc;
  doc["error"] = npn::error_record(kind, message);
  std::cerr << doc.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutual information and entropy estimation under the nonparanormal model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(npn::kToolVersion));

  npn::RunConfig cfg;
  std::string estimators;
  std::string ties = "literal";
  std::string format = "csv";
  std::string transform = "exp";
  std::string grid;
  int experiment = 1;
  double z = 1e-3;
  int k = 2;

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output path (default stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* estimate = app.add_subcommand("estimate", "Estimate mutual information of a CSV dataset");
  estimate->add_option("--input", cfg.input, "CSV file, rows = samples")->required();
  estimate->add_option("--estimators", estimators, "Comma list of gaussian,gauss,rho,tau,knn");
  auto* est_z = estimate->add_option("--z", z, "Eigenvalue floor for rho/tau");
  auto* est_k = estimate->add_option("--k", k, "kNN neighbor count");
  estimate->add_option("--ties", ties, "literal or midrank")->check(CLI::IsMember({"literal", "midrank"}));
  estimate->add_flag("--entropy", cfg.entropy, "Also estimate the joint entropy");
  add_output(estimate);

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo benchmark experiment");
  simulate->add_option("--experiment", experiment, "1 sample size, 2 marginals, 3 outliers, 4 sigma")
      ->required()
      ->check(CLI::Range(1, 4));
  simulate->add_option("--trials", cfg.trials, "Trials per sweep value");
  simulate->add_option("--n", cfg.n, "Sample size (experiments 2-4)");
  simulate->add_option("--d", cfg.d, "Dimension (experiments 1-3)");
  simulate->add_option("--grid,--n-grid,--alpha-grid,--beta-grid,--sigma-grid", grid, "Comma list of sweep values");
  simulate->add_option("--transform", transform, "Marginal transform for experiment 2")
      ->check(CLI::IsMember({"exp", "cubic", "tanh", "sigmoid", "normcdf", "identity"}));
  simulate->add_option("--estimators", estimators, "Comma list of gaussian,gauss,rho,tau,knn");
  auto* sim_z = simulate->add_option("--z", z, "Eigenvalue floor for rho/tau");
  auto* sim_k = simulate->add_option("--k", k, "kNN neighbor count");
  simulate->add_option("--ties", ties, "literal or midrank")->check(CLI::IsMember({"literal", "midrank"}));
  simulate->add_option("--seed", cfg.seed, "Base seed (default 0)");
  simulate->add_option("--threads", cfg.threads, "Worker threads; results do not depend on it");
  add_output(simulate);

  auto* bandable = app.add_subcommand("bandable", "Eigenvalue bounds for c-bandable correlation matrices");
  bandable->add_option("--c", cfg.c, "Decay constant in (0, 1)")->required();
  bandable->add_option("--d", cfg.d, "Dimension")->required();
  bandable->add_option("--verify", cfg.verify, "Number of random boundary matrices to check");
  bandable->add_option("--seed", cfg.seed, "Base seed (default 0)");
  add_output(bandable);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (estimate->parsed()) {
      cfg.command = npn::Command::Estimate;
      if (*est_z) cfg.z = z;
      if (*est_k) cfg.k = k;
    } else if (simulate->parsed()) {
      cfg.command = npn::Command::Simulate;
      cfg.experiment = static_cast<npn::ExperimentId>(experiment);
      cfg.transform = npn::parse_transform(transform);
      if (*sim_z) cfg.z = z;
      if (*sim_k) cfg.k = k;
      for (const auto& v : split_list(grid)) {
        try {
          cfg.grid.push_back(std::stod(v));
        } catch (const std::exception&) {
          throw npn::Error(npn::ErrorKind::UsageError, "bad grid value '" + v + "'");
        }
      }
    } else {
      cfg.command = npn::Command::Bandable;
    }
    for (const auto& name : split_list(estimators)) cfg.estimators.push_back(npn::parse_estimator_kind(name));
    cfg.ties = ties == "midrank" ? npn::TiePolicy::MidRank : npn::TiePolicy::LiteralIndicator;
    cfg.format = format == "json" ? npn::OutputFormat::Json : npn::OutputFormat::Csv;

    const npn::ResultDocument doc = npn::run_command(cfg);
    for (const auto& w : doc.warnings) std::cerr << "warning: " << w << "\n";
    const std::string text = doc.render(cfg.format);
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.out, std::ios::binary);
      if (!out) throw npn::Error(npn::ErrorKind::UsageError, "cannot write '" + cfg.out + "'");
      out << text;
    }
    return doc.exit_code;
  } catch (const npn::Error& e) {
    report_error(e.kind(), e.what());
    return npn::exit_code_for(e.kind());
  }
}
