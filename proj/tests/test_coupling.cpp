#include <doctest.h>

#include <random>

#include "ergolab/coupling.hpp"
#include "ergolab/models/delay.hpp"
#include "ergolab/models/finite.hpp"
#include "ergolab/models/heat.hpp"
#include "ergolab/models/navier_stokes.hpp"

using namespace ergolab;

namespace {

Eigen::VectorXd normals(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(gen);
  return v;
}

}  // namespace

TEST_CASE("synchronous heat coupling contracts mode by mode") {
  const HeatModel heat;
  std::mt19937_64 gen(1);
  const State a = normals(8, gen), b = normals(8, gen);
  const auto run = synchronous_coupling_run(heat, a, b, 30, 5);
  REQUIRE(run.d.size() == 31);
  for (int n = 0; n <= 30; ++n) {
    double d2 = 0.0, h2 = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double r = M_PI * M_PI * k * k;
      const double gap = std::exp(-r * 0.1 * n) * (a(k - 1) - b(k - 1));
      d2 += gap * gap;
      h2 += r * gap * gap;
    }
    CHECK(run.d[static_cast<std::size_t>(n)] == doctest::Approx(std::sqrt(d2)).epsilon(1e-10));
    CHECK(run.d_tilde[static_cast<std::size_t>(n)] == doctest::Approx(std::sqrt(h2)).epsilon(1e-10));
  }
}

TEST_CASE("coupled legs are ordinary runs") {
  const HeatModel heat;
  const DelayModel delay;
  const NavierStokesModel ns(NSParams{.k_max = 4});
  const std::vector<const StateSpaceModel*> models{&heat, &delay, &ns};
  for (const auto* m : models) {
    Stream init(2, 0, "init");
    const State a = m->sample_stationary(init), b = m->sample_stationary(init);
    const auto run = coupling_run(*m, a, b, 6, CouplingKind::synchronous, 3, 1, true);
    // Replaying the first leg by hand with the documented streams.
    const Stream base(3, 1, "coupling");
    State x = a;
    for (int n = 0; n < 6; ++n) {
      Stream s = base.fork(static_cast<std::uint64_t>(n));
      x = m->step(x, s);
      CHECK(x == run.first[static_cast<std::size_t>(n) + 1]);
    }
    const auto same = synchronous_coupling_run(*m, a, a, 6, 3);
    for (double d : same.d) CHECK(d == 0.0);
    const auto indep = coupling_run(*m, a, a, 3, CouplingKind::independent, 3);
    CHECK(indep.d.back() > 0.0);
  }
  CHECK_THROWS_AS(synchronous_coupling_run(heat, State::Zero(3), State::Zero(8), 2, 1), DimensionError);
}

TEST_CASE("monotone spin coupling keeps the order") {
  const SpinModel spin(SpinParams{.sites = 16, .beta = 0.7});
  std::mt19937_64 gen(4);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 20; ++trial) {
    State lo(16), hi(16);
    for (int i = 0; i < 16; ++i) {
      lo(i) = coin(gen);
      hi(i) = std::max(lo(i), double(coin(gen)));
    }
    const auto run = monotone_coupling_run(spin, lo, hi, 40, 6, static_cast<std::uint64_t>(trial));
    CHECK(run.order_violations == 0);
    CHECK(run.events > 0);
    for (std::size_t n = 1; n < run.disagreements.size(); ++n)
      CHECK(run.disagreements[n] <= 16);
    CHECK(run.disagreements[0] == static_cast<int>((lo.array() != hi.array()).count()));
  }
  CHECK_THROWS_AS(monotone_coupling_run(spin, State::Ones(16), State::Zero(16), 3, 1), InvalidArgument);

  // Once the copies meet they stay together.
  const auto extreme = monotone_coupling_run(spin, State::Zero(16), State::Ones(16), 60, 9);
  for (std::size_t n = 1; n < extreme.disagreements.size(); ++n)
    if (extreme.disagreements[n - 1] == 0) CHECK(extreme.disagreements[n] == 0);
  CHECK(extreme.disagreements.back() == 0);
}

TEST_CASE("wilson intervals") {
  const auto none = wilson_interval(0, 20), half = wilson_interval(10, 20), all = wilson_interval(20, 20);
  CHECK(none.lo == 0.0);
  CHECK(none.hi == doctest::Approx(0.1611).epsilon(1e-3));
  CHECK(half.lo == doctest::Approx(0.2993).epsilon(1e-3));
  CHECK(half.hi == doctest::Approx(0.7007).epsilon(1e-3));
  CHECK(all.lo == doctest::Approx(0.8389).epsilon(1e-3));
  CHECK(all.hi == 1.0);
  CHECK_THROWS_AS(wilson_interval(3, 2), InvalidArgument);
}

TEST_CASE("coupling probabilities") {
  const HeatModel heat;
  Stream init(5, 0, "init");
  std::vector<std::pair<State, State>> pairs;
  for (int i = 0; i < 3; ++i) pairs.emplace_back(heat.sample_stationary(init), heat.sample_stationary(init));
  const AlphaOptions opt{.horizon = 100, .replicas = 10};
  const auto good = alpha_estimate(heat, pairs, opt, 1);
  CHECK(good.alpha_min == 1.0);
  CHECK(good.per_pair.size() == 3);
  CHECK(good.per_pair[0].wilson.lo > 0.69);

  // An unobserved two-state chain that never moves: distinct copies never meet.
  const FiniteStateModel frozen(Eigen::MatrixXd::Identity(2, 2), std::nullopt, Categorical::uniform(2));
  const std::vector<std::pair<State, State>> apart{{State::Constant(1, 0), State::Constant(1, 1)}};
  const auto bad = alpha_estimate(frozen, apart, {.horizon = 20, .replicas = 10, .kind = CouplingKind::independent}, 1);
  CHECK(bad.alpha_min == 0.0);
  CHECK(bad.per_pair[0].wilson.hi < 0.31);

  const SpinModel spin(SpinParams{.sites = 12});
  const std::vector<std::pair<State, State>> extreme{{State::Zero(12), State::Ones(12)}};
  const auto s = alpha_estimate(spin, extreme, {.horizon = 80, .replicas = 10, .doubled_horizon_check = true}, 2);
  CHECK(s.alpha_min == 1.0);
  REQUIRE(s.alpha_min_doubled.has_value());
  CHECK(*s.alpha_min_doubled == 1.0);

  CHECK_THROWS_AS(alpha_estimate(heat, std::span<const std::pair<State, State>>{}, opt, 1), InvalidArgument);
}

TEST_CASE("gaussian hellinger gap") {
  const Eigen::MatrixXd cov = 0.5 * Eigen::MatrixXd::Identity(1, 1);
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 0.3), b = Eigen::VectorXd::Constant(1, -0.9);
  // 2 - 2 int sqrt(p q) by the trapezoid rule.
  const double sd = std::sqrt(0.5);
  double affinity = 0.0;
  const double step = 1e-3;
  for (double y = -10; y <= 10; y += step) {
    const double p = std::exp(-0.5 * std::pow((y - 0.3) / sd, 2)) / (sd * std::sqrt(2 * M_PI));
    const double q = std::exp(-0.5 * std::pow((y + 0.9) / sd, 2)) / (sd * std::sqrt(2 * M_PI));
    affinity += std::sqrt(p * q) * step;
  }
  CHECK(hellinger_gap_gaussian(a, b, cov) == doctest::Approx(2 - 2 * affinity).epsilon(1e-8));
  CHECK(hellinger_gap_gaussian(a, a, cov) == 0.0);
  CHECK(hellinger_gap_gaussian(a, b, cov) == hellinger_gap_gaussian(b, a, cov));
  CHECK(hellinger_gap_gaussian(a, Eigen::VectorXd::Constant(1, 1e6), cov) == doctest::Approx(2.0));
  CHECK_THROWS_AS(hellinger_gap_gaussian(a, b, -cov), InvalidArgument);
}

TEST_CASE("heat hellinger ratio stays below the analytic constant") {
  const HeatModel heat;
  std::mt19937_64 gen(7);
  std::vector<std::pair<State, State>> pairs;
  for (int i = 0; i < 500; ++i) {
    const double scale = std::pow(10.0, -3.0 + 3.0 * i / 500.0);
    pairs.emplace_back(normals(8, gen), Eigen::VectorXd(normals(8, gen) * scale));
    pairs.back().second += pairs.back().first;
  }
  const auto check = hellinger_lipschitz_check(heat, pairs, heat.strong_metric());
  CHECK(check.ratios.size() == 500);
  CHECK(check.C_hat <= heat.hellinger_constant());
  CHECK(check.C_hat > 0.0);

  const SpinModel spin;
  CHECK_THROWS_AS(hellinger_lipschitz_check(spin, pairs, spin.metric()), InvalidArgument);
}

TEST_CASE("spin disagreement decay") {
  const SpinModel spin(SpinParams{.sites = 16, .beta = 0.3});
  const auto fit = disagreement_decay_fit(spin, 30, 20, 11);
  CHECK(fit.gamma_hat > 0.0);
  CHECK(fit.ci.lo <= fit.gamma_hat);
  CHECK(fit.gamma_hat <= fit.ci.hi);
  CHECK(fit.fit_points >= 3);
  CHECK(fit.mean_disagreement[0] == 16.0);
}
