#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "glsim/experiments.hpp"

using namespace glsim;

namespace {

ModelParams cgl(double gamma = 0.0) {
  ModelParams m;
  m.kappa = 1.0;
  m.beta = 1.0;
  m.gamma = gamma;
  return m;
}

SchemeConfig scheme(double dt, double T) {
  SchemeConfig s;
  s.dt = dt;
  s.T = T;
  return s;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::parse_error;
}

const Check* find_check(const ExperimentReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST(RunCases, OrderedResultsAndCapturedErrors) {
  std::atomic<int> calls{0};
  auto out = run_cases<int>(37, [&](std::size_t i) {
    ++calls;
    if (i % 10 == 3) throw std::runtime_error("case " + std::to_string(i));
    return static_cast<int>(i * i);
  });
  EXPECT_EQ(calls.load(), 37);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i % 10 == 3) {
      EXPECT_TRUE(out[i].error);
      EXPECT_EQ(describe(out[i].error), "case " + std::to_string(i));
      EXPECT_THROW(out[i].get(), std::runtime_error);
    } else {
      EXPECT_EQ(out[i].get(), static_cast<int>(i * i));
    }
  }
}

TEST(Report, CheckComparisons) {
  EXPECT_TRUE(Check::make("a", 1.0, "<=", 1.0).pass);
  EXPECT_FALSE(Check::make("a", 1.0, "<", 1.0).pass);
  EXPECT_TRUE(Check::make("a", 2.0, ">", 1.0).pass);
  EXPECT_FALSE(Check::make("a", std::nan(""), ">=", 1.0).pass);
  EXPECT_FALSE(Check::make("a", 1.0, "==", 1.0).pass);
}

TEST(Report, JsonRoundTripAndSchema) {
  ExperimentReport r;
  r.name = "demo";
  r.parameters = {{"b", 1}, {"a", 2}};
  r.cases.push_back({{"x", 0.5}});
  r.fits["order"] = 1.9;
  r.add_check("order", 1.9, ">=", 1.8);
  r.add_check("nan", std::nan(""), "<=", 1.0);
  r.notes.push_back("note");
  const ojson j = r.to_json();
  EXPECT_EQ(j["schema"], "glsim-report-v1");
  EXPECT_EQ(j["checks"][1]["value"], nullptr);
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_FALSE(j.contains("wall_clock_seconds"));
  // Insertion order is preserved.
  EXPECT_EQ(j["parameters"].begin().key(), "b");
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"schema", "name", "parameters", "cases", "fits", "checks", "notes", "passed"}));

  const ExperimentReport back = ExperimentReport::from_json(j);
  EXPECT_EQ(back.name, "demo");
  ASSERT_EQ(back.checks.size(), 2u);
  EXPECT_EQ(back.checks[0], r.checks[0]);
  EXPECT_TRUE(std::isnan(back.checks[1].value));
  EXPECT_EQ(back.to_json().dump(), j.dump());

  ojson wrong = j;
  wrong["schema"] = "other";
  EXPECT_THROW(ExperimentReport::from_json(wrong), Error);
}

TEST(LinearSuite, PassesOnSmallGrid) {
  ModelParams m;
  const RadialGrid g = build_grid(1, 0.0, 1.0, 256);
  LinearSuiteOptions o;
  o.t_short = 1.0;
  o.t_long = 2.0;
  const ExperimentReport r = linear_suite(g, m, scheme(1e-3, 0.5), InitialSpec{}, o);
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  EXPECT_EQ(r.cases.size(), 3u);
  ASSERT_NE(find_check(r, "contraction.max_step_increase"), nullptr);
  EXPECT_LE(find_check(r, "contraction.max_step_increase")->value, 1e-10);
}

TEST(LinearSuite, RejectsNonlinearParams) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 16);
  EXPECT_EQ(kind_of([&] { linear_suite(g, cgl(), scheme(1e-2, 0.1), InitialSpec{}); }), ErrorKind::validation_error);
}

TEST(EnergyStudy, IncreaseShrinksUnderRefinement) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 32);
  const ExperimentReport r = energy_monotonicity_study(g, cgl(), scheme(1.0 / 128.0, 0.5), InitialSpec{}, {3});
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  EXPECT_EQ(r.cases.size(), 3u);
  EXPECT_EQ(kind_of([&] { energy_monotonicity_study(g, cgl(-0.5), scheme(0.01, 0.1), InitialSpec{}, {3}); }),
            ErrorKind::validation_error);
}

TEST(EnergyStudy, ZeroDataIsDegenerate) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 16);
  InitialSpec zero;
  zero.family = InitialFamily::zero;
  const ExperimentReport r = energy_monotonicity_study(g, cgl(), scheme(0.01, 0.1), zero, {3});
  EXPECT_TRUE(r.passed());
  EXPECT_FALSE(r.notes.empty());
}

TEST(Stabilization, DampedDecayAndPreconditions) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 64);
  const ExperimentReport r = stabilization_study(g, cgl(), scheme(0.01, 6.0), InitialSpec{}, {-0.5});
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  ASSERT_NE(find_check(r, "gamma[0].fitted_rate"), nullptr);
  EXPECT_GE(find_check(r, "gamma[0].fitted_rate")->value, 0.45);

  EXPECT_EQ(kind_of([&] { stabilization_study(g, cgl(), scheme(0.01, 1.0), InitialSpec{}, {0.5}); }),
            ErrorKind::validation_error);
  ModelParams no_beta = cgl();
  no_beta.beta = 0.0;
  EXPECT_EQ(kind_of([&] { stabilization_study(g, no_beta, scheme(0.01, 1.0), InitialSpec{}, {-0.5}); }),
            ErrorKind::validation_error);
  StabilizationOptions off_center;
  off_center.x0_offset = 3.0;
  EXPECT_EQ(kind_of([&] { stabilization_study(g, cgl(), scheme(0.01, 1.0), InitialSpec{}, {0.0}, off_center); }),
            ErrorKind::validation_error);
}

TEST(Stabilization, UndampedAnnulusDecays) {
  const RadialGrid g = build_grid(2, 0.5, 1.5, 48);
  const ExperimentReport r = stabilization_study(g, cgl(), scheme(0.01, 8.0), InitialSpec{}, {0.0});
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
}

TEST(Inviscid, Preconditions) {
  const RadialGrid line = build_grid(1, 0.0, 1.0, 16);
  const std::vector<double> eps{0.1, 0.01, 0.001};
  EXPECT_EQ(kind_of([&] { inviscid_study(line, cgl(), scheme(0.01, 0.1), InitialSpec{}, eps); }),
            ErrorKind::validation_error);
  const RadialGrid annulus = build_grid(2, 0.5, 1.5, 16);
  EXPECT_EQ(kind_of([&] { inviscid_study(annulus, cgl(), scheme(0.01, 0.1), InitialSpec{}, {0.1, 0.2, 0.01}); }),
            ErrorKind::validation_error);
  ModelParams p5 = cgl();
  p5.p = 5.0;
  EXPECT_EQ(kind_of([&] { inviscid_study(annulus, p5, scheme(0.01, 0.1), InitialSpec{}, eps); }),
            ErrorKind::validation_error);
}

TEST(Inviscid, DistanceShrinksWithEpsilon) {
  const RadialGrid g = build_grid(2, 0.5, 4.5, 256);
  InitialSpec init;
  init.family = InitialFamily::mode;
  const ExperimentReport r = inviscid_study(g, cgl(), scheme(2e-3, 0.25), init, {0.1, 0.01, 0.001});
  ASSERT_EQ(r.cases.size(), 4u);
  double prev = 1e300;
  for (std::size_t i = 1; i < r.cases.size(); ++i) {
    const double d = r.cases[i]["v_distance"].get<double>();
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_GT(r.fits["slope"].get<double>(), 0.7);
}

TEST(Equivalence, OrderAtLeastOne) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 32);
  for (const ModelParams& m : {ModelParams{}, cgl()}) {
    const ExperimentReport r = equivalence_study(g, m, scheme(1.0 / 64.0, 0.5), InitialSpec{}, {3, 1.0});
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  }
}

TEST(Manufactured, SecondOrderForBothVariants) {
  for (int dim : {1, 2, 3}) {
    const RadialGrid g = build_grid(dim, dim == 1 ? 0.0 : 0.5, 1.5, 16);
    for (BcVariant v : {BcVariant::dynamic, BcVariant::wentzell}) {
      SchemeConfig s = scheme(1.0 / 32.0, 0.5);
      s.variant = v;
      const ExperimentReport r = manufactured_solution_study(g, cgl(), s, {3, 1.8});
      EXPECT_TRUE(r.passed()) << "N=" << dim << ' ' << to_string(v) << ' ' << r.to_json().dump(2);
    }
  }
}

TEST(Manufactured, NonlinearFeedbackAndFirstOrderBoundary) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 16);
  SchemeConfig s = scheme(1.0 / 32.0, 0.5);
  s.feedback = FeedbackSpec::saturating(1.0, 2.0);
  EXPECT_TRUE(manufactured_solution_study(g, cgl(), s, {3, 1.8}).passed());
  SchemeConfig first = scheme(1.0 / 32.0, 0.5);
  first.boundary_order = 1;
  const ExperimentReport r = manufactured_solution_study(g, cgl(), first, {3, 0.9});
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
}

TEST(Reports, IdenticalAcrossRuns) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 16);
  const auto a = equivalence_study(g, cgl(), scheme(1.0 / 32.0, 0.25), InitialSpec{}, {3, 1.0}).to_json().dump();
  const auto b = equivalence_study(g, cgl(), scheme(1.0 / 32.0, 0.25), InitialSpec{}, {3, 1.0}).to_json().dump();
  EXPECT_EQ(a, b);
  EXPECT_FALSE(timed_study(false, [] { return ExperimentReport{}; }).wall_clock_seconds.has_value());
  EXPECT_TRUE(timed_study(true, [] { return ExperimentReport{}; }).wall_clock_seconds.has_value());
}

TEST(InitialData, FamiliesVanishAtTheDirichletNodeAndAreCompatible) {
  for (int dim : {1, 2, 3}) {
    const RadialGrid g = build_grid(dim, dim == 1 ? 0.0 : 0.5, 1.5, 64);
    for (InitialFamily f : {InitialFamily::bump, InitialFamily::mode}) {
      InitialSpec s;
      s.family = f;
      const ComplexField u = make_initial(g, s);
      EXPECT_EQ(u[0], cplx(0.0));
      EXPECT_GT(norm_v(u, g), 0.0);
      if (f == InitialFamily::bump) {
        EXPECT_LT(compatibility_residual(u, g, with_dim(cgl(), g)), 1e-12);
      }
    }
  }
  const RadialGrid g = build_grid(1, 0.0, 1.0, 8);
  InitialSpec file;
  file.family = InitialFamily::values;
  file.values.assign(5, 1.0);
  EXPECT_EQ(kind_of([&] { make_initial(g, file); }), ErrorKind::validation_error);
  file.values.assign(9, 1.0);
  EXPECT_EQ(make_initial(g, file)[0], cplx(0.0));

  InitialSpec noisy;
  noisy.noise = 0.5;
  noisy.seed = 42;
  EXPECT_EQ(make_initial(g, noisy), make_initial(g, noisy));
  noisy.seed = 43;
  const ComplexField other = make_initial(g, noisy);
  noisy.seed = 42;
  EXPECT_NE(make_initial(g, noisy), other);
}
