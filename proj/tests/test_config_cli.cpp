#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "glsim/cli.hpp"
#include "glsim/config.hpp"

using namespace glsim;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> issue_keys(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    std::vector<std::string> keys;
    for (const auto& i : e.issues()) keys.push_back(i.key);
    return keys;
  }
  return {};
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("glsim_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GLSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall = R"({
  "domain": {"N": 1, "r0": 0.0, "r1": 1.0, "M": 32},
  "params": {"lambda": 1.0, "alpha": 1.0, "kappa": 1.0, "beta": 1.0, "gamma": -0.5, "p": 3},
  "scheme": {"dt": 0.01, "T": 0.5},
  "output": {"sample_stride": 7}
})";

}  // namespace

TEST(ParseConfig, MinimalConfigGetsDefaults) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.dim, 1);
  EXPECT_EQ(c.r0, 0.0);
  EXPECT_EQ(c.r1, 1.0);
  EXPECT_EQ(c.cells, 128u);
  EXPECT_EQ(c.params.alpha, 1.0);
  EXPECT_EQ(c.params.p, 3.0);
  EXPECT_EQ(c.scheme.variant, BcVariant::dynamic);
  EXPECT_EQ(c.scheme.boundary_order, 2);
  EXPECT_EQ(c.scheme.nonlinear, NonlinearTreatment::ab2);
  EXPECT_TRUE(c.scheme.feedback.is_identity());
  EXPECT_EQ(c.initial.family, InitialFamily::bump);
  EXPECT_EQ(c.sample_stride, 10u);
  EXPECT_EQ(c.experiment.levels, 4);
}

TEST(ParseConfig, NamesOffendingKeys) {
  EXPECT_EQ(issue_keys(R"({"params": {"alpha": 0}})"), std::vector<std::string>{"params.alpha"});
  EXPECT_EQ(issue_keys(R"({"domain": {"N": 2, "r0": 0}})"), std::vector<std::string>{"domain.r0"});
}

TEST(ParseConfig, ReportsEveryViolation) {
  const auto keys = issue_keys(R"({
    "domain": {"N": 5, "M": 2, "extra": 1},
    "params": {"alpha": -1, "p": 1},
    "scheme": {"bc_variant": "robin", "dt": 0, "nonlinear_treatment": "rk4"},
    "feedback": {"family": "cubic"},
    "initial": {"family": "spline"},
    "output": {"sample_stride": 0},
    "experiment": {"levels": 2},
    "bogus": true
  })");
  for (const char* k : {"domain.extra", "domain.N", "domain.M", "params.alpha", "params.p", "scheme.bc_variant",
                        "scheme.dt", "scheme.nonlinear_treatment", "feedback.family", "initial.family",
                        "output.sample_stride", "experiment.levels", "bogus"}) {
    EXPECT_TRUE(contains(keys, k)) << k;
  }
}

TEST(ParseConfig, TypeErrorsAndMalformedJson) {
  EXPECT_TRUE(contains(issue_keys(R"({"domain": {"M": 12.5}})"), "domain.M"));
  EXPECT_TRUE(contains(issue_keys(R"({"params": {"beta": "one"}})"), "params.beta"));
  EXPECT_TRUE(contains(issue_keys(R"({"scheme": 3})"), "scheme"));
  try {
    parse_config("{\"domain\": ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse_error);
  }
  EXPECT_THROW(parse_config("[1, 2]"), Error);
}

TEST(ParseConfig, FeedbackFamilies) {
  const RunConfig sat = parse_config(R"({"feedback": {"family": "saturating", "m": 0.5, "M": 2}})");
  EXPECT_EQ(sat.scheme.feedback.family(), FeedbackFamily::saturating);
  EXPECT_EQ(sat.scheme.feedback.M(), 2.0);
  const RunConfig poly = parse_config(R"({"feedback": {"family": "custom", "m": 1, "M": 3, "coefficients": [1, 0.5]}})");
  EXPECT_DOUBLE_EQ(std::abs(feedback_eval(2.0, poly.scheme.feedback)), 4.0);
  EXPECT_TRUE(contains(issue_keys(R"({"feedback": {"family": "custom"}})"), "feedback.coefficients"));
  EXPECT_TRUE(contains(issue_keys(R"({"feedback": {"family": "saturating", "m": 2, "M": 1}})"), "feedback.M"));
  EXPECT_EQ(issue_keys(R"({"scheme": {"bc_variant": "wentzell"}, "feedback": {"family": "saturating", "m": 1, "M": 2}})"),
            std::vector<std::string>{"feedback.family"});
}

TEST(ParseConfig, InitialFromFile) {
  TempDir dir;
  write(dir / "u0.json", R"({"re": [0, 1, 2, 3, 4], "im": [0, 0, 1, 0, 0]})");
  const std::string cfg = R"({"domain": {"M": 4}, "initial": {"family": "file", "parameters": {"path": "u0.json"}}})";
  write(dir / "cfg.json", cfg);
  const RunConfig c = load_config(dir / "cfg.json");
  ASSERT_EQ(c.initial.values.size(), 5u);
  EXPECT_EQ(c.initial.values[2], cplx(2.0, 1.0));

  write(dir / "short.json", R"({"re": [0, 1]})");
  write(dir / "cfg2.json", R"({"domain": {"M": 4}, "initial": {"family": "file", "parameters": {"path": "short.json"}}})");
  EXPECT_THROW(load_config(dir / "cfg2.json"), Error);
  write(dir / "cfg3.json", R"({"initial": {"family": "file", "parameters": {"path": "missing.json"}}})");
  EXPECT_THROW(load_config(dir / "cfg3.json"), Error);
}

TEST(SampleConfigs, AllParseExceptTheInvalidOne) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(GLSIM_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    if (entry.path().stem() == "invalid") {
      EXPECT_THROW(load_config(entry.path()), Error);
    } else {
      EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    }
  }
  EXPECT_GE(count, 8);
}

TEST(Csv, FormatAndStride) {
  const RunConfig c = parse_config(kSmall);
  std::ostringstream out, err;
  TempDir dir;
  CommandOptions o;
  o.csv_path = (dir / "run.csv").string();
  ASSERT_EQ(cmd_simulate(c, o, out, err), 0) << err.str();
  const std::string csv = read(dir / "run.csv");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "t,V_norm,F,E,L2_interior,Lp1_interior,bd_L2,bd_Lp1,cum_ut_bd,cum_lap,cum_L2p,cum_flux");
  std::vector<double> times;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11);
    times.push_back(std::stod(line.substr(0, line.find(','))));
  }
  // 50 steps, stride 7: steps 0, 7, ..., 49 and the final step 50.
  ASSERT_EQ(times.size(), 9u);
  for (std::size_t k = 1; k < times.size(); ++k) EXPECT_GT(times[k], times[k - 1]);
  EXPECT_NEAR(times[1], 0.07, 1e-12);
  EXPECT_NEAR(times.back(), 0.5, 1e-12);

  const ojson summary = ojson::parse(out.str());
  EXPECT_EQ(summary["schema"], "glsim-report-v1");
  EXPECT_EQ(summary["steps"], 50);
  EXPECT_FALSE(summary.contains("runtime_seconds"));
  EXPECT_TRUE(summary["violations"].contains("decay_bound_relative_violation"));
}

TEST(Csv, FullPrecisionRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-310}) {
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(Simulate, ZeroDataGivesZeroCsv) {
  RunConfig c = parse_config(kSmall);
  c.initial.family = InitialFamily::zero;
  std::ostringstream out, err;
  TempDir dir;
  CommandOptions o;
  o.csv_path = (dir / "z.csv").string();
  ASSERT_EQ(cmd_simulate(c, o, out, err), 0);
  std::istringstream lines(read(dir / "z.csv"));
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    while (std::getline(cells, cell, ',')) EXPECT_EQ(cell, "0");
  }
}

TEST(Simulate, DecayConfigFitsRate) {
  const RunConfig c = load_config(fs::path(GLSIM_CONFIG_DIR) / "decay.json");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_simulate(c, {}, out, err), 0) << err.str();
  const ojson j = ojson::parse(out.str());
  EXPECT_GE(j["decay_fit"]["rate"].get<double>(), 0.45);
  EXPECT_LE(j["violations"]["decay_bound_relative_violation"].get<double>(), 0.05);
}

TEST(Simulate, ByteIdenticalOutput) {
  const RunConfig c = parse_config(kSmall);
  TempDir dir;
  std::string csv[2], json[2];
  for (int k = 0; k < 2; ++k) {
    CommandOptions o;
    o.csv_path = (dir / ("r" + std::to_string(k) + ".csv")).string();
    o.json_path = (dir / ("r" + std::to_string(k) + ".json")).string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_simulate(c, o, out, err), 0);
    EXPECT_TRUE(out.str().empty());
    csv[k] = read(o.csv_path);
    json[k] = read(o.json_path);
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(json[0], json[1]);
}

TEST(Simulate, NumericalFailureExitsTwo) {
  RunConfig c = parse_config(kSmall);
  c.params.kappa = 0.0;
  c.params.beta = 0.0;
  c.params.gamma = 80.0;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_simulate(c, {}, out, err), 2);
  EXPECT_NE(err.str().find("Blowup"), std::string::npos);
}

TEST(Simulate, IncompatibleDataWarns) {
  RunConfig c = parse_config(kSmall);
  c.initial.family = InitialFamily::mode;
  c.initial.mode = 1;
  c.cells = 8;
  c.initial.values.clear();
  // sin^3 on a coarse grid leaves a visible one-sided stencil residual.
  std::ostringstream out, err;
  EXPECT_EQ(cmd_simulate(c, {}, out, err), 0);
  EXPECT_NE(err.str().find("compatibility"), std::string::npos);
}

TEST(Check, OutputAndExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check(parse_config(kSmall), out, err), 0);
  EXPECT_NE(out.str().find("feedback: family=identity"), std::string::npos);
  EXPECT_NE(out.str().find("-> pass"), std::string::npos);
  EXPECT_NE(out.str().find("compatibility: residual=0\n"), std::string::npos);
  EXPECT_NE(out.str().find("-> holds"), std::string::npos);

  const RunConfig bad = parse_config(R"({"feedback": {"family": "custom", "m": 1, "M": 1, "coefficients": [1, -1]}})");
  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_check(bad, out2, err2), 1);
  EXPECT_NE(out2.str().find("FAIL"), std::string::npos);

  // Data with a slope at r1 give a nonzero residual; still exit 0.
  RunConfig sloped = parse_config(R"({"domain": {"M": 4}})");
  sloped.initial.family = InitialFamily::values;
  sloped.initial.values = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::ostringstream out3, err3;
  EXPECT_EQ(cmd_check(sloped, out3, err3), 0);
  EXPECT_NE(out3.str().find("warning"), std::string::npos);
}

TEST(Experiment, DispatchAndErrors) {
  EXPECT_THROW(run_experiment("unknown", parse_config("{}"), false), Error);
  std::ostringstream out, err;
  // Inviscid needs N = 2.
  EXPECT_EQ(cmd_experiment("inviscid", parse_config(kSmall), {}, out, err), 1);
  EXPECT_NE(err.str().find("domain.N"), std::string::npos);

  RunConfig m = parse_config(R"({"domain": {"M": 8}, "scheme": {"dt": 0.0625, "T": 0.5}, "experiment": {"levels": 3},
                                 "params": {"kappa": 1, "beta": 1}})");
  std::ostringstream out2, err2;
  CommandOptions verbose;
  verbose.verbose = true;
  EXPECT_EQ(cmd_experiment("manufactured", m, verbose, out2, err2), 0) << err2.str();
  const ojson rep = ojson::parse(out2.str());
  EXPECT_TRUE(rep["fits"].contains("observed_order"));
  EXPECT_EQ(rep["name"], "manufactured");
  EXPECT_NE(err2.str().find("PASS observed_order"), std::string::npos);
}

TEST(Binary, ExitCodes) {
  TempDir dir;
  write(dir / "bad.json", "{ not json");
  write(dir / "small.json", kSmall);
  write(dir / "grow.json", R"({"domain": {"M": 16}, "params": {"gamma": 80}, "scheme": {"dt": 0.01, "T": 1}})");
  EXPECT_EQ(run_cli("simulate " + (dir / "small.json").string() + " --csv " + (dir / "o.csv").string() +
                    " --json " + (dir / "o.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o.csv"));
  EXPECT_TRUE(fs::exists(dir / "o.json"));
  EXPECT_EQ(run_cli("simulate " + (dir / "bad.json").string()), 1);
  EXPECT_EQ(run_cli("simulate " + (dir / "missing.json").string()), 1);
  EXPECT_EQ(run_cli("experiment nonsense " + (dir / "small.json").string()), 1);
  EXPECT_EQ(run_cli("simulate"), 1);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("simulate " + (dir / "grow.json").string()), 2);
  EXPECT_EQ(run_cli("check " + (dir / "small.json").string()), 0);
  EXPECT_EQ(run_cli("--verbose simulate " + (dir / "small.json").string()), 0);
  EXPECT_EQ(run_cli("check " + std::string(GLSIM_CONFIG_DIR) + "/invalid.json"), 1);
}
