#include <doctest.h>

#include <random>

#include "ergolab/filter.hpp"
#include "ergolab/fixtures.hpp"
#include "ergolab/models/delay.hpp"
#include "ergolab/models/finite.hpp"
#include "ergolab/models/heat.hpp"
#include "ergolab/models/navier_stokes.hpp"
#include "ergolab/models/spin.hpp"

using namespace ergolab;

namespace {

Eigen::VectorXd normals(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(gen);
  return v;
}

State bits(int L, unsigned mask) {
  State x(L);
  for (int i = 0; i < L; ++i) x(i) = (mask >> i) & 1u;
  return x;
}

NSParams small_ns() {
  NSParams p;
  p.k_max = 4;
  return p;
}

}  // namespace

TEST_CASE("heat: deterministic decay and the semigroup property") {
  const HeatModel heat;
  std::mt19937_64 gen(1);
  const Eigen::VectorXd x = normals(8, gen);
  const State y = heat.step_with(x, Eigen::VectorXd::Zero(8));
  for (int k = 1; k <= 8; ++k) CHECK(y(k - 1) == doctest::Approx(x(k - 1) * std::exp(-M_PI * M_PI * k * k * 0.1)).epsilon(1e-14));

  // Two steps of delta equal one step of 2 delta with the combined (unit variance) noise.
  const Eigen::VectorXd xi1 = normals(8, gen), xi2 = normals(8, gen);
  const State two = heat.step_with(heat.step_with(x, xi1), xi2);
  Eigen::VectorXd eta(8), unit(8);
  for (int k = 1; k <= 8; ++k) {
    const double r = M_PI * M_PI * k * k, d = 0.1;
    const double s1 = std::sqrt((1 - std::exp(-2 * r * d)) / (2 * r)), s2 = std::sqrt((1 - std::exp(-4 * r * d)) / (2 * r));
    eta(k - 1) = s1 * (std::exp(-r * d) * xi1(k - 1) + xi2(k - 1)) / s2;
    unit(k - 1) = s1 * s1 * (std::exp(-2 * r * d) + 1) / (s2 * s2);
  }
  const State one = heat.step_with(x, eta, 0.2);
  CHECK((two - one).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((unit.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(heat.step_with(x, Eigen::VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("heat: transition and stationary variances") {
  HeatParams p;
  p.modes = 3;
  p.delta = 0.05;
  const HeatModel heat(p);
  const int reps = 20000;
  Stream s(2, 0, "heat");
  Eigen::VectorXd from_zero = Eigen::VectorXd::Zero(3), stat = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < reps; ++i) {
    from_zero += heat.step(State::Zero(3), s).array().square().matrix();
    stat += heat.step(heat.sample_stationary(s), s).array().square().matrix();
  }
  from_zero /= reps;
  stat /= reps;
  for (int k = 1; k <= 3; ++k) {
    const double r = M_PI * M_PI * k * k, sigma = 1.0 / k;
    const double v1 = sigma * sigma * (1 - std::exp(-2 * r * p.delta)) / (2 * r), v_inf = sigma * sigma / (2 * r);
    // The sample second moment of a normal has relative sd sqrt(2 / reps) ~ 1%.
    CHECK(std::abs(from_zero(k - 1) / v1 - 1) < 0.04);
    CHECK(std::abs(stat(k - 1) / v_inf - 1) < 0.04);
    CHECK(heat.stationary_variance()(k - 1) == doctest::Approx(v_inf).epsilon(1e-14));
  }
}

TEST_CASE("heat: observations") {
  const HeatModel heat;
  const auto& H = heat.observation_matrix();
  CHECK(H(1, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(H(1, 1)) < 1e-15);
  State e1 = State::Zero(8);
  e1(0) = 0.7;
  CHECK(heat.observation_mean(e1)(1) == doctest::Approx(0.7 * std::sqrt(2.0)));

  std::mt19937_64 gen(3);
  const State x = normals(8, gen);
  for (int i = 0; i < 3; ++i) {
    const double z = heat.params().obs_points[static_cast<std::size_t>(i)];
    double u = 0.0;
    for (int k = 1; k <= 8; ++k) u += x(k - 1) * std::sqrt(2.0) * std::sin(M_PI * k * z);
    CHECK(heat.observation_mean(x)(i) == doctest::Approx(u).epsilon(1e-13));
  }
  const Observation y = Eigen::Vector3d(0.1, -0.2, 0.3);
  const Eigen::VectorXd r = y - H * x;
  const double want = -r.squaredNorm() / 0.5 - 1.5 * std::log(2 * M_PI * 0.25);
  CHECK(heat.obs_log_density(x, y) == doctest::Approx(want).epsilon(1e-13));
  CHECK(heat.hellinger_constant() == doctest::Approx(1.0));
  CHECK_THROWS_AS(HeatModel(HeatParams{.obs_points = {1.5}}), InvalidArgument);
}

TEST_CASE("navier-stokes: fixed point and single-mode decay") {
  const NavierStokesModel ns(small_ns());
  const Eigen::VectorXd quiet = Eigen::VectorXd::Zero(ns.forcing_noise_dim());
  CHECK(ns.inner_step(State::Zero(ns.state_dim()), quiet).isZero(0.0));

  // A single Fourier mode is a steady solution of the Euler nonlinearity.
  for (const WaveVector k : {WaveVector{1, 0}, WaveVector{-1, 2}, WaveVector{2, 2}}) {
    std::vector<NavierStokesModel::Complex> c(ns.modes().size());
    c[*ns.mode_index(k)] = {0.3, -0.4};
    const State x = ns.from_coefficients(c);
    CHECK(ns.nonlinear_term(x).cwiseAbs().maxCoeff() < 1e-12);
    const State next = ns.inner_step(x, quiet);
    const double decay = std::exp(-0.5 * (k[0] * k[0] + k[1] * k[1]) * 0.01);
    CHECK((next - decay * x).cwiseAbs().maxCoeff() < 1e-12);
  }

  // Any field built from one shell |k|^2 = 5 is also steady.
  std::vector<NavierStokesModel::Complex> shell(ns.modes().size());
  for (const WaveVector k : {WaveVector{1, 2}, WaveVector{-1, 2}, WaveVector{2, 1}, WaveVector{-2, 1}})
    shell[*ns.mode_index(k)] = {0.1 * k[0], 0.2 * k[1]};
  CHECK(ns.nonlinear_term(ns.from_coefficients(shell)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("navier-stokes: the truncated nonlinearity conserves energy and enstrophy") {
  const NavierStokesModel ns;
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 5; ++trial) {
    const State x = 0.3 * normals(ns.state_dim(), gen);
    const State b = ns.nonlinear_term(x);
    double enstrophy = 0.0, energy = 0.0, scale = 0.0;
    for (std::size_t m = 0; m < ns.modes().size(); ++m) {
      const auto& k = ns.modes()[m];
      const double kk = k[0] * k[0] + k[1] * k[1];
      const double dot = x(2 * m) * b(2 * m) + x(2 * m + 1) * b(2 * m + 1);
      enstrophy += dot;
      energy += dot / kk;
      scale += std::abs(dot);
    }
    CHECK(scale > 0.0);
    CHECK(std::abs(enstrophy) < 1e-11 * scale);
    CHECK(std::abs(energy) < 1e-11 * scale);
  }
}

TEST_CASE("navier-stokes: velocity field") {
  const NavierStokesModel ns;
  std::mt19937_64 gen(6);
  const State x = normals(ns.state_dim(), gen);
  const auto u = ns.velocity_coefficients(x);
  const NavierStokesModel::Complex I(0.0, 1.0);
  for (std::size_t m = 0; m < ns.modes().size(); ++m) {
    const double k1 = ns.modes()[m][0], k2 = ns.modes()[m][1];
    CHECK(std::abs(k1 * u[m][0] + k2 * u[m][1]) < 1e-12);                              // divergence
    CHECK(std::abs(I * (k2 * u[m][0] - k1 * u[m][1]) - ns.coefficient(x, m)) < 1e-12);  // v = d2 u1 - d1 u2
  }
  const Eigen::MatrixXd w = ns.vorticity_grid(x);
  CHECK(w.rows() == ns.grid_size());
  CHECK(std::abs(w.mean()) < 1e-12);

  // Grid values against direct summation of the real series.
  const int N = ns.grid_size();
  for (int trial = 0; trial < 5; ++trial) {
    const int i = trial * 3 % N, j = trial * 5 % N;
    const double z1 = 2 * M_PI * i / N, z2 = 2 * M_PI * j / N;
    double direct = 0.0;
    for (std::size_t m = 0; m < ns.modes().size(); ++m)
      direct += 2.0 * std::real(ns.coefficient(x, m) * std::polar(1.0, ns.modes()[m][0] * z1 + ns.modes()[m][1] * z2));
    CHECK(w(i, j) == doctest::Approx(direct / (2 * M_PI)).epsilon(1e-10));
  }
  CHECK(ns.l2_norm_sq(x) == doctest::Approx(w.squaredNorm() * std::pow(2 * M_PI / N, 2)).epsilon(1e-10));
}

TEST_CASE("navier-stokes: stationary enstrophy balance") {
  // 2 nu E|v|_{H^1}^2 equals the injection rate; the IF-Euler scheme adds an O(h) bias.
  const NavierStokesModel ns(small_ns());
  Stream s(7, 0, "ns");
  State x = ns.sample_stationary(s);
  std::vector<double> series;
  for (int n = 0; n < 2000; ++n) {
    x = ns.step(x, s);
    series.push_back(2.0 * 0.5 * ns.h1_norm_sq(x));
  }
  const auto bm = batch_mean(series, 20);
  const double target = ns.energy_injection();
  MESSAGE("balance " << bm.mean << " +- " << bm.standard_error << " vs " << target);
  CHECK(std::abs(bm.mean - target) < 3.0 * bm.standard_error + 0.05 * target);
}

TEST_CASE("navier-stokes: guards and forcing sets") {
  const NavierStokesModel ns(small_ns());
  State wild = State::Constant(ns.state_dim(), 1e4);
  CHECK_THROWS_AS(ns.nonlinear_term(wild), NumericalError);
  CHECK(check_forcing_set(NSParams{}.forcing).empty());
  const auto even = check_forcing_set({{{2, 0}, 1.0}, {{-2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, -2}, 1.0}, {{2, 2}, 1.0}, {{-2, -2}, 1.0}});
  CHECK(even.find("integer") != std::string::npos);
  const auto lonely = check_forcing_set({{{1, 0}, 1.0}, {{0, 1}, 1.0}, {{0, -1}, 1.0}, {{1, 1}, 1.0}, {{-1, -1}, 1.0}});
  CHECK(lonely.find("symmetry") != std::string::npos);
  const auto same = check_forcing_set({{{1, 0}, 1.0}, {{-1, 0}, 1.0}, {{0, 1}, 1.0}, {{0, -1}, 1.0}});
  CHECK(same.find("same |k|") != std::string::npos);
  NSParams far;
  far.k_max = 2;
  far.forcing = {{{3, 0}, 1.0}, {{-3, 0}, 1.0}, {{1, 1}, 1.0}, {{-1, -1}, 1.0}, {{0, 1}, 1.0}, {{0, -1}, 1.0}};
  CHECK_THROWS_AS(NavierStokesModel{far}, InvalidArgument);
  NSParams odd = small_ns();
  odd.delta = 0.015;
  CHECK_THROWS_AS(NavierStokesModel{odd}, InvalidArgument);
}

TEST_CASE("spin: rates and the Gibbs law") {
  const SpinModel spin(SpinParams{.sites = 6, .beta = 0.4});
  const auto& checks = spin.rate_checks();
  CHECK(checks.bounded);
  CHECK(checks.attractive);
  CHECK(checks.coupling_compatible);
  CHECK(checks.max_detailed_balance_error < 1e-12);
  CHECK(spin.rate(1, 1, 1) == doctest::Approx(1.0 / (1.0 + std::exp(1.6))));
  CHECK(spin.rate(0, 1, 1) == doctest::Approx(0.5));

  // Brute-force partition function and detailed balance over all configurations.
  const int L = 6;
  double z = 0.0;
  for (unsigned mask = 0; mask < (1u << L); ++mask) {
    const State x = bits(L, mask);
    double e = 0.0;
    for (int i = 0; i < L; ++i) e += (2 * x(i) - 1) * (2 * x((i + 1) % L) - 1);
    z += std::exp(0.4 * e);
  }
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << L); ++mask) {
    const State x = bits(L, mask);
    double e = 0.0;
    for (int i = 0; i < L; ++i) e += (2 * x(i) - 1) * (2 * x((i + 1) % L) - 1);
    CHECK(spin.gibbs_probability(x) == doctest::Approx(std::exp(0.4 * e) / z).epsilon(1e-12));
    total += spin.gibbs_probability(x);
    for (int i = 0; i < L; ++i) {
      State y = x;
      y(i) = 1 - y(i);
      CHECK(spin.rate(x, i) * spin.gibbs_probability(x) == doctest::Approx(spin.rate(y, i) * spin.gibbs_probability(y)).epsilon(1e-12));
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spin: exact sampler and invariance of the dynamics") {
  const SpinModel spin(SpinParams{.sites = 4, .beta = 0.6});
  const int reps = 40000;
  Stream s(8, 0, "spin");
  Eigen::VectorXd direct = Eigen::VectorXd::Zero(16), stepped = Eigen::VectorXd::Zero(16);
  auto code = [](const State& x) { return static_cast<int>(x(0) + 2 * x(1) + 4 * x(2) + 8 * x(3)); };
  for (int i = 0; i < reps; ++i) {
    const State x = spin.sample_stationary(s);
    direct(code(x)) += 1.0;
    stepped(code(spin.step(x, s))) += 1.0;
  }
  for (unsigned mask = 0; mask < 16; ++mask) {
    const double p = spin.gibbs_probability(bits(4, mask));
    const double band = 4.5 * std::sqrt(p * (1 - p) / reps);
    CHECK(std::abs(direct(mask) / reps - p) < band);
    CHECK(std::abs(stepped(mask) / reps - p) < band);
  }
}

TEST_CASE("spin: infinite temperature flips") {
  const SpinModel spin(SpinParams{.sites = 10, .beta = 0.0, .delta = 0.5});
  Stream s(9, 0, "spin");
  const int reps = 5000;
  double flips = 0.0, flips_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    State x = State::Zero(10);
    int count = 0;
    for (const auto& e : spin.draw_events(s)) count += spin.apply(x, e);
    flips += count;
    flips_sq += double(count) * count;
  }
  // Flip events are a Poisson process of rate 1/2 per site.
  const double mean = flips / reps, var = flips_sq / reps - mean * mean, want = 10 * 0.5 / 2;
  CHECK(std::abs(mean - want) < 4.0 * std::sqrt(want / reps));
  CHECK(std::abs(var / want - 1.0) < 0.1);
}

TEST_CASE("spin: observations") {
  const SpinModel spin(SpinParams{.sites = 8});
  // |h(x) - h(x')| <= d(x, x') over every pair of configurations.
  double worst = -1.0;
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b) {
      const State x = bits(8, a), y = bits(8, b);
      worst = std::max(worst, std::abs(spin.intensity(x) - spin.intensity(y)) - spin.metric()(x, y));
    }
  CHECK(worst <= 1e-12);

  const State x = bits(8, 0b10010011u);
  const double mean = spin.params().delta * spin.intensity(x);
  Stream s(10, 0, "obs");
  const int reps = 20000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) sum += spin.observe(x, s)(0);
  CHECK(std::abs(sum / reps - mean) < 4.0 * std::sqrt(mean / reps));
  CHECK(spin.obs_log_density(x, Observation::Constant(1, 3)) ==
        doctest::Approx(3 * std::log(mean) - mean - std::log(6.0)).epsilon(1e-13));
  CHECK(std::isinf(spin.obs_log_density(x, Observation::Constant(1, 1.5))));
  CHECK(spin.alpha()(1) == doctest::Approx(0.5));
  CHECK(spin.alpha()(7) == doctest::Approx(0.5));
  CHECK(spin.alpha()(4) == doctest::Approx(1.0 / 16));
  CHECK_THROWS_AS(SpinModel(SpinParams{.sites = 2}), InvalidArgument);
}

TEST_CASE("delay: Euler scheme") {
  // With b = 0 and no noise the scheme is x (1 - a h)^n.
  const DelayModel linear(DelayParams{.b = 0.0});
  State w = State::Constant(linear.state_dim(), 1.5);
  const State next = linear.step_with(w, Eigen::VectorXd::Zero(linear.euler_steps()));
  const int r = linear.lag_steps(), n = linear.euler_steps();
  CHECK(next.size() == r + 1);
  for (int j = 0; j <= r; ++j) {
    const int steps_taken = j - (r - n);
    const double want = steps_taken <= 0 ? 1.5 : 1.5 * std::pow(1 - 2.0 * 0.01, steps_taken);
    CHECK(next(j) == doctest::Approx(want).epsilon(1e-12));
  }

  // Deterministic delay equation: first-order convergence in h.
  auto endpoint = [](double h) {
    const DelayModel m(DelayParams{.h = h});
    return m.step_with(State::Constant(m.state_dim(), 1.0), Eigen::VectorXd::Zero(m.euler_steps()))(m.state_dim() - 1);
  };
  const double ref = endpoint(0.0005);
  const double e1 = std::abs(endpoint(0.02) - ref), e2 = std::abs(endpoint(0.01) - ref);
  CHECK(e2 < 0.01);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));

  // Half-interval sampling: the new window starts with the newer half of the old one.
  const DelayModel half(DelayParams{.delta = 0.5});
  std::mt19937_64 gen(11);
  const State old = normals(half.state_dim(), gen);
  const State fresh = half.step_with(old, normals(half.euler_steps(), gen));
  CHECK(fresh.head(51) == old.tail(51));

  const DelayModel guarded(DelayParams{.guard = 1.0});
  CHECK_THROWS_AS(guarded.step_with(State::Constant(guarded.state_dim(), 5.0), Eigen::VectorXd::Zero(100)), NumericalError);
  CHECK_THROWS_AS(DelayModel(DelayParams{.delta = 0.015}), InvalidArgument);
  CHECK(linear.metric()(State::Zero(101), State::Constant(101, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("finite state model") {
  const auto fx = mixing3_hmm();
  const FiniteStateModel model(fx.hmm);
  Stream s(12, 0, "finite");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(3);
  const int reps = 30000;
  for (int i = 0; i < reps; ++i) counts(static_cast<Eigen::Index>(model.step(State::Constant(1, 1), s)(0))) += 1.0;
  for (int j = 0; j < 3; ++j) {
    const double p = fx.hmm.P0()(1, j);
    CHECK(std::abs(counts(j) / reps - p) < 4.0 * std::sqrt(p * (1 - p) / reps));
  }
  Eigen::MatrixXd atoms(1, 4);
  atoms << 0, 2, 2, 1;
  CHECK(model.histogram(AtomicMeasure(atoms, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4))).probs().isApprox(Eigen::Vector3d(0.1, 0.4, 0.5)));
  CHECK_THROWS_AS(model.step(State::Constant(1, 0.5), s), InvalidArgument);
  CHECK_THROWS_AS(FiniteStateModel(Eigen::MatrixXd::Identity(2, 2)), StationaryError);
}

TEST_CASE("observation log-densities are finite on emitted observations") {
  const HeatModel heat;
  const NavierStokesModel ns(small_ns());
  const SpinModel spin;
  const DelayModel delay;
  const FiniteStateModel finite(mixing3_hmm().hmm);
  const std::vector<const StateSpaceModel*> models{&heat, &ns, &spin, &delay, &finite};
  for (const auto* m : models) {
    Stream s(13, 0, m->name());
    for (int i = 0; i < 5; ++i) {
      const State x = m->sample_stationary(s);
      CHECK(x.size() == m->state_dim());
      CHECK(std::isfinite(m->obs_log_density(x, m->observe(x, s))));
    }
  }
}
