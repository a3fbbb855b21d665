#include "core/error.hpp"
#include "core/timestepper.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace wmspde;

namespace {

EvolveResult run_one(const Discretization& disc, const NoiseStream& stream, const SparseMatrix& lm,
                     const ScalarDriver& driver, StepMode mode, const Vector& initial = Vector(), double scale = 1.0,
                     const SparseMatrix* a = nullptr) {
  EvolveTarget t;
  t.disc = &disc;
  t.restriction = a;
  t.mode = mode;
  t.initial = initial;
  t.noise_scale = scale;
  return evolve_coupled(stream, lm, driver, std::span(&t, 1)).front();
}

double rel_m(const SparseMatrix& m, const Vector& a, const Vector& b) { return mass_norm(m, a - b) / mass_norm(m, b); }

}  // namespace

TEST(Scheme, AdmissibleGamma) {
  EXPECT_TRUE(gamma_admissible(0.0, 1));
  EXPECT_TRUE(gamma_admissible(1.0, 1));
  EXPECT_FALSE(gamma_admissible(0.0, 2));
  EXPECT_TRUE(gamma_admissible(0.01, 2));
  EXPECT_FALSE(gamma_admissible(1.01, 1));
  SchemeConfig c;
  c.dim = 2;
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c.gamma = 0.5;
  c.space_level = kMaxLevel2d + 1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Step, DenseOracleGammaZero) {
  OperatorCache cache;
  const auto disc = cache.discretization(1, 2, 4, 0.0, 0.5);
  const Index n = disc.ops().size();
  PathState s;
  s.alpha = Vector::LinSpaced(n, 1.0, 2.0);
  ProjectedIncrement g;
  g.values = Vector::LinSpaced(n, -0.3, 0.4);
  const auto next = step(s, disc, 1.0, g);
  const Eigen::MatrixXd m(disc.ops().mass()), t(disc.ops().stiffness());
  const Vector expected = (m + 0.25 * t).lu().solve(m * s.alpha + g.values);
  EXPECT_LT((next.alpha - expected).norm(), 1e-10);
  EXPECT_EQ(next.n, 1);
  EXPECT_DOUBLE_EQ(next.t, 0.25);
}

TEST(Step, DenseOracleFractional) {
  OperatorCache cache;
  const auto disc = cache.discretization(1, 2, 4, 0.5, 0.25);
  const Index n = disc.ops().size();
  PathState s;
  s.alpha = Vector::Zero(n);
  ProjectedIncrement g;
  g.values = Vector::LinSpaced(n, -0.3, 0.4);
  const double b = 1.7;
  const auto next = step(s, disc, b, g);
  const Eigen::MatrixXd m(disc.ops().mass()), t(disc.ops().stiffness()), k(disc.ops().a2_matrix());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  const Eigen::MatrixXd v = es.eigenvectors();
  const Vector q = v * es.eigenvalues().array().pow(-0.5).matrix().asDiagonal() * (v.transpose() * g.values);
  const Vector expected = (m + 0.25 * t).lu().solve(b * m * q);
  EXPECT_LT((next.alpha - expected).norm() / expected.norm(), 1e-6);
}

TEST(Evolve, ZeroNoiseKeepsZeroAndConstants) {
  OperatorCache cache;
  for (auto mode : {StepMode::per_step, StepMode::final_time}) {
    const auto disc = cache.discretization(1, 3, 8, 0.5, 0.5);
    const NoiseStream stream(1, 3, 8, disc.ops().size());
    const ScalarDriver driver(1, 50);
    const auto zero = run_one(disc, stream, disc.ops().mass_factor(), driver, mode, Vector(), 0.0);
    EXPECT_EQ(zero.final.alpha.cwiseAbs().maxCoeff(), 0.0);
    const Vector ones = Vector::Ones(disc.ops().size());
    const auto flat = run_one(disc, stream, disc.ops().mass_factor(), driver, mode, ones, 0.0);
    EXPECT_LT((flat.final.alpha - ones).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Evolve, SingleHomogeneousStep) {
  OperatorCache cache;
  const auto disc = cache.discretization(1, 3, 1, 0.5, 0.5);
  const NoiseStream stream(1, 3, 1, disc.ops().size());
  const ScalarDriver driver(1, 50);
  Vector init(disc.ops().size());
  for (Index i = 0; i < init.size(); ++i) init(i) = std::cos(M_PI * i / 8.0);
  const Eigen::MatrixXd m(disc.ops().mass()), t(disc.ops().stiffness());
  const Vector expected = (m + t).lu().solve(m * init);
  for (auto mode : {StepMode::per_step, StepMode::final_time}) {
    const auto r = run_one(disc, stream, disc.ops().mass_factor(), driver, mode, init, 0.0);
    EXPECT_LT((r.final.alpha - expected).norm(), 1e-10);
  }
}

TEST(Evolve, DeterministicAndLinearInNoise) {
  OperatorCache cache;
  const auto disc = cache.discretization(1, 4, 16, 0.75, 0.5);
  const NoiseStream stream(77, 4, 16, disc.ops().size());
  const ScalarDriver driver(77, 100);
  const auto a = run_one(disc, stream, disc.ops().mass_factor(), driver, StepMode::per_step);
  const auto b = run_one(disc, stream, disc.ops().mass_factor(), driver, StepMode::per_step);
  EXPECT_EQ(a.final.alpha, b.final.alpha);
  const auto c = run_one(disc, stream, disc.ops().mass_factor(), driver, StepMode::per_step, Vector(), 2.0);
  EXPECT_LT((c.final.alpha - 2.0 * a.final.alpha).norm(), 1e-12 * c.final.alpha.norm());
}

TEST(Evolve, FastPathEquivalence) {
  struct Case {
    int dim;
    double gamma;
    int level;
    int steps;
  };
  OperatorCache cache;
  for (const Case c : {Case{1, 0.5, 3, 8}, Case{2, 0.5, 3, 8}, Case{1, 1.0, 3, 8}, Case{1, 0.0, 3, 8}, Case{1, 0.25, 4, 16}}) {
    const auto disc = cache.discretization(c.dim, c.level, c.steps, c.gamma, 0.5);
    const auto& lm = disc.ops().mass_factor();
    const NoiseStream stream(3, c.level, c.steps, disc.ops().size());
    const ScalarDriver driver(3, 1000);
    const auto slow = evolve(disc, stream, lm, driver, nullptr);
    const auto fast = evolve_fast(disc, stream, lm, driver, nullptr);
    EXPECT_LE(rel_m(disc.ops().mass(), fast.final.alpha, slow.final.alpha), 1e-8) << c.dim << " " << c.gamma;
    Vector init = Vector::LinSpaced(disc.ops().size(), -1.0, 1.0);
    const auto slow0 = evolve(disc, stream, lm, driver, nullptr, init);
    const auto fast0 = evolve_fast(disc, stream, lm, driver, nullptr, init);
    EXPECT_LE(rel_m(disc.ops().mass(), fast0.final.alpha, slow0.final.alpha), 1e-8) << c.dim << " " << c.gamma;
  }
}

TEST(Evolve, CoarseTargetMatchesDirectConstruction) {
  // A coarse target in a coupled run equals a standalone run fed the
  // aggregated and restricted increments by hand.
  OperatorCache cache;
  const auto fine = cache.level(1, 5);
  const auto disc = cache.discretization(1, 3, 4, 0.5, 0.5);
  const auto a = restriction_matrix(disc.mesh(), fine->mesh);
  const NoiseStream stream(8, 5, 16, fine->mesh.vertex_count());
  const ScalarDriver driver(8, 100);
  const auto coupled = run_one(disc, stream, fine->ops.mass_factor(), driver, StepMode::per_step, Vector(), 1.0, &a);
  PathState s;
  s.alpha = Vector::Zero(disc.ops().size());
  for (int n = 0; n < 4; ++n) {
    const auto agg = aggregate_increment(stream, n, 4, fine->ops.mass_factor());
    s = step(s, disc, driver.b(n / 4.0), restrict_increment(a, agg, 3));
  }
  EXPECT_LT((coupled.final.alpha - s.alpha).norm(), 1e-12 * s.alpha.norm());
}

TEST(Evolve, SnapshotsOnDyadicTimes) {
  OperatorCache cache;
  const auto disc = cache.discretization(1, 3, 16, 0.5, 0.5);
  const NoiseStream stream(2, 3, 16, disc.ops().size());
  const ScalarDriver driver(2, 100);
  const auto slow = evolve(disc, stream, disc.ops().mass_factor(), driver, nullptr, Vector(), 3);
  const auto fast = evolve_fast(disc, stream, disc.ops().mass_factor(), driver, nullptr, Vector(), 3);
  ASSERT_EQ(slow.snapshots.size(), 9u);
  ASSERT_EQ(fast.snapshots.size(), 9u);
  EXPECT_EQ(slow.snapshots.front().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(slow.snapshots.back(), slow.final.alpha);
  for (std::size_t j = 1; j < 9; ++j)
    EXPECT_LE(rel_m(disc.ops().mass(), fast.snapshots[j], slow.snapshots[j]), 1e-8);
}

TEST(Evolve, MeanZeroOverSeeds) {
  OperatorCache cache;
  const auto disc = cache.discretization(1, 2, 8, 0.5, 0.5);
  const int paths = 2000;
  Vector sum = Vector::Zero(disc.ops().size()), sq = Vector::Zero(disc.ops().size());
  for (int p = 0; p < paths; ++p) {
    const NoiseStream stream(mix_seed(5, p), 2, 8, disc.ops().size());
    const ScalarDriver driver(mix_seed(5, p), 20);
    const auto r = evolve_fast(disc, stream, disc.ops().mass_factor(), driver, nullptr);
    sum += r.final.alpha;
    sq += r.final.alpha.cwiseProduct(r.final.alpha);
  }
  // b = exp(f^2) is heavy tailed, so use a generous 5 sigma band
  for (Index i = 0; i < sum.size(); ++i) {
    const double mean = sum(i) / paths, var = sq(i) / paths - mean * mean;
    EXPECT_LT(std::abs(mean), 5 * std::sqrt(var / paths)) << i;
  }
}

TEST(Evolve, StableForLargeSteps) {
  OperatorCache cache;
  const auto disc = cache.discretization(1, 8, 1, 0.75, 0.5);
  const NoiseStream stream(4, 8, 1, disc.ops().size());
  const ScalarDriver driver(4, 100);
  Vector init = Vector::LinSpaced(disc.ops().size(), 0.0, 1.0);
  const auto r = evolve(disc, stream, disc.ops().mass_factor(), driver, nullptr, init);
  EXPECT_TRUE(r.final.alpha.allFinite());
  // backward Euler is contractive in the M-norm for the homogeneous part
  const auto h = run_one(disc, stream, disc.ops().mass_factor(), driver, StepMode::per_step, init, 0.0);
  EXPECT_LE(mass_norm(disc.ops().mass(), h.final.alpha), mass_norm(disc.ops().mass(), init));
}

TEST(Evolve, ConfigEntryPoint) {
  OperatorCache cache;
  SchemeConfig c;
  c.dim = 1;
  c.gamma = 0.5;
  c.space_level = 3;
  c.time_steps = 8;
  const NoiseStream stream(6, 5, 32, build_mesh(1, 5).vertex_count());
  const ScalarDriver driver(6, 100);
  const auto r1 = evolve(c, stream, driver, cache);
  const auto r2 = evolve(c, stream, driver, cache);
  EXPECT_EQ(r1.final.alpha, r2.final.alpha);
  EXPECT_EQ(r1.final.alpha.size(), 9);
  c.time_steps = 3;
  EXPECT_THROW(evolve(c, stream, driver, cache), Error);
}
