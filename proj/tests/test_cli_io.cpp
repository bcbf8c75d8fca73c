#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "npn/cli.hpp"
#include "npn/csv.hpp"

using namespace npn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("npn_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::runtime_error("no npn::Error thrown");
}

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null",
            const std::string& stderr_path = "/dev/null") {
  const std::string cmd = std::string(NPN_CLI_PATH) + " " + args + " >" + stdout_path + " 2>" + stderr_path;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::string correlated_fixture() {
  static const std::string path = [] {
    Rng rng(20240601);
    const auto x = sample_gaussian(CorrelationMatrix::bivariate(0.6), 10000, rng);
    const std::string p = (scratch_dir() / "sigma06.csv").string();
    write_csv(p, x, {"x", "y"});
    return p;
  }();
  return path;
}

}  // namespace

TEST(LoadCsv, NumericFile) {
  const auto x = load_csv(write_file("plain.csv", "1,2\n3,4\n5,6\n"));
  EXPECT_EQ(x.n(), 3u);
  EXPECT_EQ(x.dim(), 2u);
  EXPECT_EQ(x(2, 1), 6.0);
}

TEST(LoadCsv, HeaderSkipped) {
  const auto x = load_csv(write_file("header.csv", "x,y\n1,2\n3,4\n"));
  EXPECT_EQ(x.n(), 2u);
  EXPECT_EQ(x(0, 0), 1.0);
}

TEST(LoadCsv, CrlfBlankLinesAndWhitespace) {
  const auto x = parse_csv("a, b\r\n 1.5 ,-2e-3\r\n\r\n3,4\n");
  EXPECT_EQ(x.n(), 2u);
  EXPECT_EQ(x(0, 1), -2e-3);
}

TEST(LoadCsv, Errors) {
  EXPECT_EQ(kind_of([] { load_csv(write_file("nan.csv", "1,2\n3,NaN\n")); }), ErrorKind::NonFiniteValue);
  EXPECT_EQ(kind_of([] { load_csv(write_file("inf.csv", "1,inf\n")); }), ErrorKind::NonFiniteValue);
  EXPECT_EQ(kind_of([] { load_csv(write_file("empty.csv", "")); }), ErrorKind::EmptyFile);
  EXPECT_EQ(kind_of([] { load_csv(write_file("headeronly.csv", "x,y\n")); }), ErrorKind::EmptyFile);
  EXPECT_EQ(kind_of([] { load_csv(write_file("ragged.csv", "1,2\n3\n")); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { load_csv((scratch_dir() / "missing.csv").string()); }), ErrorKind::ParseError);
  try {
    parse_csv("1,2\n3,abc\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("field 2"), std::string::npos) << msg;
  }
  try {
    parse_csv("1,2\n3,nan\n");
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  }
}

TEST(Csv, RoundTripIsBitIdentical) {
  Rng rng(9);
  Matrix m = sample_gaussian(CorrelationMatrix(SymMatrix::identity(4)), 200, rng).values();
  m(0, 0) = 1e-300;
  m(1, 1) = -0.1;
  m(2, 2) = 5e-324;
  m(3, 3) = 1.7976931348623157e308;
  const DataMatrix x(m);
  const std::string p = (scratch_dir() / "roundtrip.csv").string();
  write_csv(p, x, {"a", "b", "c", "d"});
  EXPECT_EQ(load_csv(p), x);
  write_csv(p, x);
  EXPECT_EQ(load_csv(p), x);
}

TEST(Csv, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(kInfinity), "inf");
  EXPECT_EQ(format_double(-kInfinity), "-inf");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(CmdEstimate, CorrelatedFixture) {
  RunConfig cfg;
  cfg.input = correlated_fixture();
  cfg.estimators = {EstimatorKind::Rho, EstimatorKind::Tau};
  const auto doc = cmd_estimate(cfg);
  EXPECT_EQ(doc.exit_code, 0);
  ASSERT_EQ(doc.json["results"].size(), 2u);
  for (const auto& r : doc.json["results"]) {
    ASSERT_TRUE(r["value"].is_number());
    EXPECT_NEAR(r["value"].get<double>(), 0.22314355131420976, 0.03);
  }
}

TEST(CmdEstimate, GoldenSchema) {
  RunConfig cfg;
  cfg.input = correlated_fixture();
  cfg.entropy = true;
  const auto doc = cmd_estimate(cfg);
  EXPECT_EQ(first_line(doc.csv), "estimator,value,lambda_min,clamped,error");
  std::vector<std::string> keys;
  for (const auto& [key, _] : doc.json.items()) keys.push_back(key);
  EXPECT_EQ(keys, (std::vector<std::string>{"tool", "version", "command", "config", "n", "d", "results", "entropy"}));
  std::vector<std::string> names;
  for (const auto& r : doc.json["results"]) names.push_back(r["estimator"]);
  EXPECT_EQ(names, (std::vector<std::string>{"gaussian", "gauss", "rho", "tau", "knn"}));
  for (const auto& r : doc.json["results"]) {
    EXPECT_TRUE(r.contains("value"));
    EXPECT_TRUE(r.contains("lambda_min"));
    EXPECT_TRUE(r.contains("clamped"));
  }
  std::vector<std::string> cfg_keys;
  for (const auto& [key, _] : doc.json["config"].items()) cfg_keys.push_back(key);
  EXPECT_EQ(cfg_keys, (std::vector<std::string>{"input", "estimators", "z", "k", "ties", "entropy"}));
  // Entropy of a sigma = 0.6 Gaussian pair.
  EXPECT_NEAR(doc.json["entropy"]["value"].get<double>(), 2.6147335150951357, 0.1);
}

TEST(CmdEstimate, InfiniteValuesSerializedAsInf) {
  std::string text = "x,y\n";
  for (int i = 0; i < 20; ++i) text += i < 5 ? "1,1\n" : std::to_string(i) + "," + std::to_string((i * 7) % 13) + "\n";
  RunConfig cfg;
  cfg.input = write_file("atoms.csv", text);
  cfg.estimators = {EstimatorKind::Knn};
  const auto doc = cmd_estimate(cfg);
  EXPECT_EQ(doc.json["results"][0]["value"], "inf");
  EXPECT_NE(doc.csv.find("knn,inf,"), std::string::npos);
}

TEST(CmdEstimate, SingularScatterIsAnErrorRecord) {
  RunConfig cfg;
  cfg.input = write_file("wide.csv", "1,2,3\n2,1,5\n4,4,1\n");
  cfg.estimators = {EstimatorKind::GaussianPlugin, EstimatorKind::Rho};
  const auto doc = cmd_estimate(cfg);
  EXPECT_NE(doc.exit_code, 0);
  EXPECT_EQ(doc.json["results"][0]["error"]["kind"], "SingularScatter");
  EXPECT_TRUE(doc.json["results"][1]["value"].is_number());
  EXPECT_NE(doc.csv.find("gaussian,,,,SingularScatter"), std::string::npos);
}

TEST(CmdEstimate, Deterministic) {
  RunConfig cfg;
  cfg.input = correlated_fixture();
  cfg.entropy = true;
  EXPECT_EQ(cmd_estimate(cfg).render(OutputFormat::Json), cmd_estimate(cfg).render(OutputFormat::Json));
  EXPECT_EQ(cmd_estimate(cfg).render(OutputFormat::Csv), cmd_estimate(cfg).render(OutputFormat::Csv));
}

TEST(CmdSimulate, GoldenSchemaAndCardinality) {
  RunConfig cfg;
  cfg.command = Command::Simulate;
  cfg.experiment = ExperimentId::E4_Sigma;
  cfg.trials = 5;
  const auto doc = cmd_simulate(cfg);
  EXPECT_EQ(first_line(doc.csv), "experiment,sweep_param,sweep_value,estimator,mse,stderr,finite_fraction,trials");
  EXPECT_EQ(doc.json["rows"].size(), 6u * 5u);
  const auto lines = std::count(doc.csv.begin(), doc.csv.end(), '\n');
  EXPECT_EQ(lines, 1 + 6 * 5);
  std::vector<std::string> keys;
  for (const auto& [key, _] : doc.json["rows"][0].items()) keys.push_back(key);
  EXPECT_EQ(keys, (std::vector<std::string>{"experiment", "sweep_param", "sweep_value", "estimator", "mse", "stderr",
                                            "finite_fraction", "trials"}));
  EXPECT_EQ(doc.json["config"]["d"], 2);
}

TEST(CmdSimulate, OutlierAtomsDefeatSmallK) {
  RunConfig cfg;
  cfg.command = Command::Simulate;
  cfg.experiment = ExperimentId::E3_Outliers;
  cfg.trials = 20;
  cfg.grid = {0.3};
  cfg.k = 2;
  cfg.estimators = {EstimatorKind::Knn};
  const auto doc = cmd_simulate(cfg);
  ASSERT_EQ(doc.json["rows"].size(), 1u);
  EXPECT_EQ(doc.json["rows"][0]["finite_fraction"], 0.0);
  EXPECT_TRUE(doc.json["rows"][0]["mse"].is_null());
  EXPECT_NE(doc.csv.find("3,beta,0.3,knn,,"), std::string::npos);
}

TEST(CmdSimulate, ValidationIsUsageError) {
  RunConfig cfg;
  cfg.command = Command::Simulate;
  cfg.experiment = ExperimentId::E2_Marginals;
  cfg.grid = {1.5};
  EXPECT_EQ(kind_of([&] { cmd_simulate(cfg); }), ErrorKind::UsageError);
}

TEST(CmdBandable, Bounds) {
  RunConfig cfg;
  cfg.command = Command::Bandable;
  cfg.c = 0.2;
  cfg.d = 10;
  cfg.verify = 100;
  const auto doc = cmd_bandable(cfg);
  EXPECT_DOUBLE_EQ(doc.json["lower"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(doc.json["upper"].get<double>(), 1.5);
  EXPECT_TRUE(doc.warnings.empty());
  EXPECT_TRUE(doc.json["verify"]["within_bounds"].get<bool>());
  EXPECT_GE(doc.json["verify"]["min_eigenvalue"].get<double>(), 0.5 - 1e-9);
  EXPECT_LE(doc.json["verify"]["max_eigenvalue"].get<double>(), 1.5 + 1e-9);
  EXPECT_EQ(doc.exit_code, 0);
  EXPECT_EQ(first_line(doc.csv),
            "c,d,lower,upper,positive_lower_bound,draws,min_eigenvalue,max_eigenvalue,within_bounds");

  cfg.c = 0.4;
  cfg.verify = 0;
  const auto warn = cmd_bandable(cfg);
  EXPECT_LT(warn.json["lower"].get<double>(), 0.0);
  ASSERT_EQ(warn.warnings.size(), 1u);
  EXPECT_NE(warn.warnings[0].find("c < 1/3"), std::string::npos);

  cfg.c = 1.5;
  EXPECT_EQ(kind_of([&] { cmd_bandable(cfg); }), ErrorKind::DomainError);
}

TEST(Binary, ExitCodes) {
  const std::string fixture = correlated_fixture();
  const std::string out = (scratch_dir() / "out.txt").string();
  const std::string err = (scratch_dir() / "err.txt").string();
  EXPECT_EQ(run_cli("estimate --input " + fixture + " --estimators rho,tau", out), 0);
  EXPECT_EQ(first_line(read_file(out)), "estimator,value,lambda_min,clamped,error");
  EXPECT_EQ(run_cli("estimate --estimators rho"), 1);
  EXPECT_EQ(run_cli("estimate --input " + fixture + " --estimators bogus"), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("estimate --input " + write_file("bad.csv", "1,2\nx,y\n"), out, err), 2);
  EXPECT_NE(read_file(err).find("ParseError"), std::string::npos);
  EXPECT_EQ(run_cli("estimate --input " + write_file("nan2.csv", "1,2\n3,nan\n")), 2);
  EXPECT_EQ(run_cli("estimate --input " + write_file("const.csv", "1,2\n1,3\n1,4\n") + " --estimators rho"), 2);
  EXPECT_EQ(run_cli("estimate --input " + write_file("wide2.csv", "1,2,3\n2,1,5\n4,4,1\n") + " --estimators gaussian"),
            3);
  EXPECT_EQ(run_cli("bandable --c 0.4 --d 5", out, err), 0);
  EXPECT_NE(read_file(err).find("warning"), std::string::npos);
  EXPECT_EQ(run_cli("bandable --c 1.2 --d 5"), 3);
  EXPECT_EQ(run_cli("simulate --experiment 5"), 1);
}

TEST(Binary, SimulateTwiceIsIdentical) {
  const std::string a = (scratch_dir() / "sim_a.csv").string();
  const std::string b = (scratch_dir() / "sim_b.csv").string();
  ASSERT_EQ(run_cli("simulate --experiment 1 --trials 10 --seed 7 --d 5 --grid 32,64 --out " + a), 0);
  ASSERT_EQ(run_cli("simulate --experiment 1 --trials 10 --seed 7 --d 5 --grid 32,64 --threads 3 --out " + b), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_FALSE(read_file(a).empty());
  const std::string j = (scratch_dir() / "sim.json").string();
  ASSERT_EQ(run_cli("simulate --experiment 4 --trials 3 --format json --out " + j), 0);
  const auto doc = nlohmann::json::parse(read_file(j));
  EXPECT_EQ(doc["rows"].size(), 30u);
}
