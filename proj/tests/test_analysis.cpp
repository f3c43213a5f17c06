#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "nls/analysis.hpp"
#include "nls/initial_data.hpp"
#include "nls/verify.hpp"

using namespace nls;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Trajectory every_step_run(const ComplexField& phi, double tau, double horizon) {
  SplitConfig c;
  c.scheme = Scheme::lie;
  c.tau = tau;
  c.horizon = horizon;
  c.linear_only = true;
  return evolve(phi, with_every_step(c));
}

ConvergenceReport planted(double order, std::vector<double> taus, double c = 3.0) {
  ConvergenceReport r;
  r.taus = taus;
  for (double t : taus) r.errors.push_back(c * std::pow(t, order));
  return r;
}

}  // namespace

TEST(Pairs, AdmissibleExamples) {
  EXPECT_TRUE(admissible_check(8, 4, 1));
  EXPECT_TRUE(admissible_check(inf, 2, 3));
  EXPECT_TRUE(admissible_check(2, 6, 3));
  EXPECT_TRUE(admissible_check(4, inf, 1));
  EXPECT_FALSE(admissible_check(2, inf, 2));
  EXPECT_FALSE(admissible_check(4, 4, 1));
  EXPECT_FALSE(admissible_check(1, 4, 1));
  EXPECT_FALSE(admissible_check(8, 4, 0));
}

TEST(Pairs, Q0R0AndQ1R1Examples) {
  const auto a = q0r0(1, 2.0);
  EXPECT_DOUBLE_EQ(a.q, 8.0);
  EXPECT_DOUBLE_EQ(a.r, 4.0);
  const auto b = q0r0(3, 1.0);
  EXPECT_DOUBLE_EQ(b.q, 4.0);
  EXPECT_DOUBLE_EQ(b.r, 3.0);
  const auto c = q1r1(1, 2.0);
  EXPECT_DOUBLE_EQ(c.q, 10.0);
  EXPECT_NEAR(c.r, 10.0 / 3.0, 1e-15);
  EXPECT_TRUE(admissible_check(a) && admissible_check(b) && admissible_check(c));
  EXPECT_THROW(q0r0(2, 2.0), std::invalid_argument);
  EXPECT_THROW(q1r1(1, 0.0), std::invalid_argument);
  EXPECT_THROW(q0r0(4, 0.5), std::invalid_argument);
}

TEST(Pairs, SampledPairsAreAdmissible) {
  // Independent check: 2/q + d/r against d/2 computed here.
  for (std::size_t i = 1; i <= 100; ++i) {
    const int d = 1 + static_cast<int>(i % 3);
    const double p = (4.0 / d) * (0.01 + 0.98 * detail::radical_inverse(i, 2));
    for (const auto& pr : {q0r0(d, p), q1r1(d, p)}) {
      EXPECT_NEAR(2.0 / pr.q + d / pr.r, d / 2.0, 1e-12);
      EXPECT_GE(pr.q, 2.0);
      EXPECT_GE(pr.r, 2.0);
      EXPECT_TRUE(admissible_check(pr));
    }
  }
}

TEST(Pairs, RadialRange) {
  // d = 3: 2/q + 5/r <= 5/2.
  EXPECT_TRUE(radial_range_check(2.0, 4.0, 3));
  EXPECT_TRUE(radial_range_check(4.0, 2.5, 3));
  EXPECT_FALSE(radial_range_check(2.0, 10.0 / 3.0, 3));  // excluded endpoint
  EXPECT_FALSE(radial_range_check(4.0, 2.0, 3));
  EXPECT_FALSE(radial_range_check(1.5, 4.0, 3));
  EXPECT_FALSE(radial_range_check(4.0, 4.0, 1));
  // Every admissible pair lies in the radial range for d >= 2 unless it is the endpoint.
  EXPECT_TRUE(radial_range_check(8.0, 2.0 * 3.0 / 2.0, 2));
}

TEST(Strichartz, ConstantField) {
  const auto g = make_grid(1, 32, 0.5);  // box of length 1
  ComplexField one(g, Space::physical);
  for (auto& z : one.values()) z = Complex(2.0, 0.0);
  const auto traj = every_step_run(one, 0.125, 1.0);
  EXPECT_NEAR(discrete_strichartz_norm(traj, 4.0, 3.0, {0.0, 1.0}), 2.0, 1e-13);
  EXPECT_NEAR(discrete_strichartz_norm(traj, 2.0, 2.0, {0.0, 0.5}), 2.0 * std::sqrt(0.5), 1e-13);
  EXPECT_NEAR(discrete_strichartz_norm(traj, inf, 2.0, {0.0, 1.0}), 2.0, 1e-13);
}

TEST(Strichartz, MaxAndSingleSnapshot) {
  const auto g = make_grid(1, 128, 8.0);
  const auto phi = gaussian(g, 1.0, 1.0);
  const auto traj = every_step_run(phi, 0.1, 1.0);
  double mx = 0.0;
  for (std::size_t k = 2; k < 6; ++k) mx = std::max(mx, norm(traj.snapshots[k].field, Lr{6.0}));
  EXPECT_DOUBLE_EQ(discrete_strichartz_norm(traj, inf, 6.0, {0.2, 0.6}), mx);
  EXPECT_NEAR(discrete_strichartz_norm(traj, 1.0, 2.0, {0.0, 0.1}), 0.1 * l2_norm(phi), 1e-15);
  // Half-open: [0.3, 0.3) is empty.
  EXPECT_EQ(discrete_strichartz_norm(traj, 2.0, 2.0, {0.3, 0.3}), 0.0);
  EXPECT_THROW(discrete_strichartz_norm(traj, 0.5, 2.0, {0.0, 1.0}), std::invalid_argument);
}

TEST(Strichartz, MissingSnapshotsThrow) {
  const auto g = make_grid(1, 64, 8.0);
  SplitConfig c;
  c.tau = 0.1;
  c.horizon = 1.0;
  const auto traj = evolve(gaussian(g, 1.0, 1.0), c);
  EXPECT_THROW(discrete_strichartz_norm(traj, 2.0, 2.0, {0.0, 1.0}), std::invalid_argument);
}

TEST(Errors, IdenticalTrajectoriesGiveZero) {
  const auto g = make_grid(1, 64, 8.0);
  const auto traj = every_step_run(gaussian(g, 1.0, 1.0), 0.1, 0.5);
  EXPECT_EQ(measure_error(traj, traj), 0.0);
  const auto other = every_step_run(gaussian(make_grid(1, 32, 8.0), 1.0, 1.0), 0.1, 0.5);
  EXPECT_THROW(measure_error(traj, other), std::invalid_argument);
}

TEST(Errors, MaxOverSharedTimes) {
  const auto g = make_grid(1, 64, 8.0);
  const auto a = every_step_run(gaussian(g, 1.0, 1.0), 0.1, 0.5);
  auto b = a;
  b.snapshots[3].field[10] += Complex(0.5, 0.0);
  EXPECT_NEAR(measure_error(a, b), 0.5 * std::sqrt(g.spacing()), 1e-15);
}

TEST(FitOrder, RecoversPlantedSlopes) {
  const std::vector<double> taus = {0.1, 0.05, 0.025, 0.0125, 0.00625};
  for (double q : {0.25, 0.5, 1.0, 2.0}) {
    const auto f = fit_order(planted(q, taus));
    EXPECT_NEAR(f.order, q, 0.01);
    EXPECT_FALSE(f.excluded_coarsest);
  }
}

TEST(FitOrder, DropsCoarsestWhenPreAsymptotic) {
  const std::vector<double> taus = {0.1, 0.05, 0.025, 0.0125};
  auto r = planted(1.0, taus);
  r.errors[0] *= 20.0;
  const auto f = fit_order(r);
  EXPECT_TRUE(f.excluded_coarsest);
  EXPECT_NEAR(f.order, 1.0, 1e-12);
  // With three points nothing is dropped.
  auto small = planted(1.0, {0.1, 0.05, 0.025});
  small.errors[0] *= 20.0;
  EXPECT_FALSE(fit_order(small).excluded_coarsest);
}

TEST(FitOrder, Rejects) {
  EXPECT_THROW(fit_order(planted(1.0, {0.1})), std::invalid_argument);
  EXPECT_THROW(fit_order(planted(1.0, {0.05, 0.1})), std::invalid_argument);
  auto z = planted(1.0, {0.1, 0.05});
  z.errors[1] = 0.0;
  EXPECT_THROW(fit_order(z), std::invalid_argument);
}

TEST(MassDrift, Cases) {
  const auto g = make_grid(1, 64, 8.0);
  auto traj = every_step_run(gaussian(g, 1.0, 1.0), 0.1, 0.3);
  EXPECT_LT(mass_drift(traj), 1e-14);
  traj.snapshots[2].field *= Complex(1.1, 0.0);
  EXPECT_NEAR(mass_drift(traj), 0.21, 1e-12);
  // Filtered runs only count increases above the running minimum.
  traj.config.scheme = Scheme::filtered_lie;
  traj.snapshots[2].field *= Complex(0.9 / 1.1, 0.0);
  traj.snapshots[3].field *= Complex(0.95, 0.0);
  EXPECT_NEAR(mass_drift(traj), 0.9025 - 0.81, 1e-12);
  traj.snapshots.clear();
  EXPECT_THROW(mass_drift(traj), std::invalid_argument);
}

TEST(Bound, HandValue) {
  const BoundInputs in{0.01, 0.04, 1.0, 1, 2.0, 1.0, 0.1};
  const double expect = std::exp(1.0) * (0.1 + std::pow(0.04, 0.25) + 0.5 * 2.0);
  EXPECT_NEAR(theorem2_bound(in, {}), expect, 1e-14);
}

TEST(Bound, Monotone) {
  const BoundInputs base{0.01, 0.04, 1.0, 2, 1.0, 1.2, 0.05};
  const double b0 = theorem2_bound(base, {});
  auto t = base;
  t.tau = 0.02;
  EXPECT_GT(theorem2_bound(t, {}), b0);
  t = base;
  t.horizon = 2.0;
  EXPECT_GT(theorem2_bound(t, {}), b0);
  t = base;
  t.phi_norm = 1.5;
  EXPECT_GT(theorem2_bound(t, {}), b0);
  EXPECT_GT(theorem2_bound(base, {2.0, 1.0}), b0);
}

TEST(Bound, Hypotheses) {
  BoundInputs in{0.05, 0.04, 1.0, 1, 2.0, 1.0, 0.0};
  EXPECT_THROW(theorem2_bound(in, {}), std::invalid_argument);
  in = {0.01, 1.0, 1.0, 1, 2.0, 1.0, 0.0};
  EXPECT_THROW(theorem2_bound(in, {}), std::invalid_argument);
  in = {0.01, 0.04, 1.0, 2, 2.0, 1.0, 0.0};
  EXPECT_THROW(theorem2_bound(in, {}), std::invalid_argument);
  in = {0.01, 0.04, -1.0, 1, 2.0, 1.0, 0.0};
  EXPECT_THROW(theorem2_bound(in, {}), std::invalid_argument);
}

TEST(Bound, FieldOverloadUsesFilterTail) {
  const auto g = make_grid(1, 256, 8.0);
  const auto phi = phi_alpha(g, 1.0, 1.0);
  const double tt = 0.01;
  const double tail = l2_distance(phi, apply_filter(phi, make_filter(g, tt)));
  EXPECT_GT(tail, 0.0);
  const BoundInputs in{0.005, tt, 1.0, 1, 1.0, l2_norm(phi), tail};
  EXPECT_DOUBLE_EQ(theorem2_bound(phi, 0.005, tt, 1.0, 1.0, {}), theorem2_bound(in, {}));
}

TEST(Mvt, ConstantsOnHandSamples) {
  // Small theta: (N - I)/tau v -> -i lambda |v|^p v, so c -> 1 against w = 0,
  // and the second-order remainder constant -> 1/2.
  const std::vector<MvtSample> cloud = {{1e-6, {1.0, 0.0}, {0.0, 0.0}}};
  const auto c = fit_mvt_constants(2.0, cloud);
  EXPECT_NEAR(c.lipschitz, 1.0, 1e-6);
  EXPECT_NEAR(c.taylor, 0.5, 1e-6);
  const auto same = fit_mvt_constants(1.0, {{0.5, {2.0, 1.0}, {2.0, 1.0}}});
  EXPECT_EQ(same.lipschitz, 0.0);
  EXPECT_THROW(fit_mvt_constants(0.0, cloud), std::invalid_argument);
  EXPECT_THROW(fit_mvt_constants(1.0, {{1.0, {1.0, 0.0}, {0.0, 0.0}}}), std::invalid_argument);
}

TEST(Mvt, TaylorConstantNeverExceedsHalf) {
  // |e^{-i theta} - 1 + i theta| <= theta^2 / 2 for real theta.
  for (double p : {0.5, 1.0, 2.0, 3.0}) EXPECT_LE(fit_mvt_constants(p, make_mvt_cloud(4000)).taylor, 0.5 + 1e-12);
}

TEST(Mvt, CloudIsNested) {
  const auto a = make_mvt_cloud(100);
  const auto b = make_mvt_cloud(200);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a[i].tau, b[i].tau);
    EXPECT_EQ(a[i].v, b[i].v);
    EXPECT_EQ(a[i].w, b[i].w);
  }
  for (const auto& s : b) {
    EXPECT_GT(s.tau, 0.0);
    EXPECT_LT(s.tau, 1.0);
    EXPECT_LE(std::abs(s.v), 10.0 + 1e-12);
    EXPECT_LE(std::abs(s.w), 10.0 + 1e-12);
  }
}

TEST(Mvt, VerifyPasses) {
  for (double p : {0.5, 1.0, 2.0, 3.0}) EXPECT_TRUE(verify_mvt(p, 5000).pass) << "p=" << p;
}

TEST(Verify, PairsSuitePasses) {
  for (const auto& r : verify_pairs(100)) EXPECT_TRUE(r.pass) << r.name;
}
