#include <doctest.h>

#include <random>

#include "ergolab/fixtures.hpp"
#include "ergolab/markov.hpp"
#include "oracles.hpp"

using namespace ergolab;

namespace {

FiniteChain flip(double p) {
  Eigen::Matrix2d P;
  P << 1 - p, p, p, 1 - p;
  return FiniteChain(P);
}

FiniteChain random_chain(int m, std::mt19937_64& gen) { return FiniteChain(oracle::random_stochastic(m, m, gen, 0.05)); }

}  // namespace

TEST_CASE("stationary laws") {
  CHECK(stationary(flip(0.25)).probs().isApprox(Eigen::Vector2d(0.5, 0.5), 1e-14));
  CHECK_THROWS_AS(stationary(FiniteChain(Eigen::MatrixXd::Identity(3, 3))), StationaryError);
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto chain = random_chain(4, gen);
    const Eigen::RowVectorXd pi = stationary(chain).probs().transpose();
    CHECK((pi * chain.P() - pi).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(oracle::l1(pi.transpose(), oracle::power_stationary(chain.P()).transpose()) < 1e-12);
  }
}

TEST_CASE("closed classes") {
  Eigen::Matrix3d P;
  P << 0.5, 0.5, 0, 0, 1, 0, 0, 0, 1;
  const auto classes = closed_classes(P);
  CHECK(classes.size() == 2);
}

TEST_CASE("projected path laws") {
  const auto id = FiniteChain(Eigen::MatrixXd::Identity(3, 3), Categorical::uniform(3));
  const auto law = projected_path_law(id, Categorical::point(3, 2), Projection::identity(3), 1, 3);
  CHECK(law.size() == 1);
  CHECK(law.at({2, 2, 2, 2}) == doctest::Approx(1.0));

  const auto f = projected_path_law(flip(0.25), Categorical::point(2, 1), Projection::identity(2), 0, 1);
  CHECK(f.at({1, 1}) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(f.at({1, 0}) == doctest::Approx(0.25).epsilon(1e-15));

  std::mt19937_64 gen(8);
  const auto chain = random_chain(4, gen);
  const Projection proj({0, 1, 1, 0}, 2);
  const auto marg = projected_path_law(chain, Categorical::uniform(4), proj, 3, 0);
  const Eigen::RowVectorXd mu = Eigen::RowVectorXd::Constant(4, 0.25) * oracle::power(chain.P(), 3);
  CHECK(marg.at({0}) == doctest::Approx(mu(0) + mu(3)).epsilon(1e-14));
  CHECK(marg.at({1}) == doctest::Approx(mu(1) + mu(2)).epsilon(1e-14));
}

TEST_CASE("local path TV examples") {
  for (int k = 0; k < 5; ++k) CHECK(local_path_tv(flip(0.5), 0, 1, Projection::identity(2), 1, k) < 1e-15);
  CHECK(local_path_tv(flip(0.25), 0, 1, Projection::identity(2), 2, 6) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(local_path_tv(flip(0.25), 0, 1, Projection::identity(2), 0, 2) == doctest::Approx(2.0));
}

TEST_CASE("identity projection: path TV equals marginal TV for every window") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 3;
    const auto chain = random_chain(m, gen);
    const auto proj = Projection::identity(m);
    for (int n = 0; n <= 4; ++n) {
      const Eigen::MatrixXd Pn = oracle::power(chain.P(), n);
      for (int k = 0; k <= 3; ++k) {
        const double marginal = (Pn.row(0) - Pn.row(m - 1)).cwiseAbs().sum();
        CHECK(std::abs(local_path_tv(chain, 0, m - 1, proj, n, k) - marginal) < 1e-12);
      }
    }
  }
}

TEST_CASE("local path TV grows with the window and shrinks with the offset") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto chain = random_chain(4, gen);
    const Projection proj({0, 0, 1, 1}, 2);
    for (int n = 0; n <= 3; ++n) {
      double prev = 0.0;
      for (int k = 0; k <= 4; ++k) {
        const double v = local_path_tv(chain, 0, 3, proj, n, k);
        CHECK(v >= prev - 1e-12);
        prev = v;
      }
      CHECK(local_path_tv(chain, 0, 3, proj, n + 1, 4) <= local_path_tv(chain, 0, 3, proj, n, 4) + 1e-12);
    }
  }
}

TEST_CASE("window convergence stops early once values settle") {
  const double v = local_path_tv_converged(flip(0.25), 0, 1, Projection::identity(2), 3, 10);
  CHECK(v == doctest::Approx(2.0 * std::pow(0.5, 3)).epsilon(1e-12));
}

TEST_CASE("beta mixing coefficient") {
  CHECK(beta_mixing_coeff(flip(0.25), 2) == doctest::Approx(0.25).epsilon(1e-14));
  const FiniteChain id(Eigen::MatrixXd::Identity(2, 2), Categorical::uniform(2));
  for (int n : {0, 1, 7}) CHECK(beta_mixing_coeff(id, n) == doctest::Approx(1.0));
  std::mt19937_64 gen(14);
  const auto chain = random_chain(3, gen);
  CHECK(beta_mixing_coeff(chain, 200) <= 1e-8);

  // Matrix-power oracle, monotonicity, and the bound by the injective max-pair path TV.
  const Eigen::RowVectorXd lam = oracle::power_stationary(chain.P());
  double prev = 2.0;
  for (int n = 0; n <= 8; ++n) {
    const Eigen::MatrixXd Pn = oracle::power(chain.P(), n);
    double want = 0.0, max_pair = 0.0;
    for (int x = 0; x < 3; ++x) {
      want += lam(x) * (Pn.row(x) - lam).cwiseAbs().sum();
      for (int y = 0; y < 3; ++y) max_pair = std::max(max_pair, (Pn.row(x) - Pn.row(y)).cwiseAbs().sum());
    }
    const double beta = beta_mixing_coeff(chain, n);
    CHECK(std::abs(beta - want) < 1e-12);
    CHECK(beta <= prev + 1e-12);
    CHECK(beta >= 0.0);
    CHECK(beta <= max_pair + 1e-12);
    prev = beta;
  }
}

TEST_CASE("zero-two probe on fixtures") {
  const auto periodic = periodic2();
  const auto neg = zero_two_probe(periodic.chain, Projection::identity(2), 8, 3, 0.5);
  CHECK_FALSE(neg.locally_irreducible);
  CHECK_FALSE(neg.witness_n.has_value());
  for (double v : neg.tv_trace) CHECK(v == doctest::Approx(2.0));

  const auto product = product_flip(3, 0.25);
  const auto pos = zero_two_probe(product.chain(), product.coordinate_projection({0}), 10, 3, 0.5);
  CHECK(pos.locally_irreducible);
  for (std::size_t n = 0; n < pos.tv_trace.size(); ++n)
    CHECK(std::abs(pos.tv_trace[n] - 2.0 * std::pow(0.5, static_cast<double>(n))) < 1e-10);
  REQUIRE(pos.witness_n.has_value());
  // First n with 2 (1/2)^n <= 1.5.
  CHECK(*pos.witness_n == 1);

  const auto half = zero_two_probe(flip(0.5), Projection::identity(2), 5, 2, 0.5);
  CHECK(half.locally_irreducible);
  CHECK(*half.witness_n == 1);
}

TEST_CASE("zero-two dichotomy: traces cross 2 - alpha or stay at 2") {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 8; ++trial) {
    const auto chain = random_chain(3, gen);
    const auto r = zero_two_probe(chain, Projection({0, 1, 1}, 2), 10, 3, 0.5);
    bool crosses = false, pinned = true;
    for (double v : r.tv_trace) crosses = crosses || v <= 1.5, pinned = pinned && std::abs(v - 2.0) < 1e-12;
    CHECK((crosses || pinned));
    CHECK(r.locally_irreducible == crosses);
  }
}

TEST_CASE("local mixing probe") {
  const auto product = product_flip(3, 0.25);
  const auto r = local_mixing_probe(product, {1}, 8, 3, 0.5);
  CHECK(r.local.locally_irreducible);
  CHECK(r.full_tv_trace.size() == 9);
  CHECK(r.dimension_contrast.size() == 3);
  for (std::size_t d = 1; d < r.dimension_contrast.size(); ++d)
    CHECK(r.dimension_contrast[d] >= r.dimension_contrast[d - 1] - 1e-12);

  const auto empty = local_mixing_probe(product, {}, 4, 2, 0.5);
  for (double v : empty.local.tv_trace) CHECK(v == 0.0);
  CHECK(empty.local.locally_irreducible);

  const auto all = local_mixing_probe(product, {0, 1, 2}, 5, 2, 0.5);
  const auto plain = zero_two_probe(product.chain(), Projection::identity(8), 5, 2, 0.5);
  for (std::size_t n = 0; n < plain.tv_trace.size(); ++n)
    CHECK(std::abs(all.local.tv_trace[n] - plain.tv_trace[n]) < 1e-12);
}

TEST_CASE("product chain indexing") {
  const auto product = product_flip(4, 0.3);
  CHECK(product.n_states() == 16);
  for (Eigen::Index s = 0; s < 16; ++s) CHECK(product.encode(product.decode(s)) == s);
  CHECK(product.decode(8) == std::vector<int>{1, 0, 0, 0});
  CHECK_THROWS_AS(product_flip(13, 0.3), CapExceeded);
  // Transition entries factor over the coordinates.
  const auto& P = product.chain().P();
  CHECK(P(0, 15) == doctest::Approx(std::pow(0.3, 4)));
  CHECK(P(5, 5) == doctest::Approx(std::pow(0.7, 4)));
}

TEST_CASE("chain fixtures") {
  const auto f = two_state_flip(0.25);
  CHECK(f.stationary->probs().isApprox(Eigen::Vector2d(0.5, 0.5)));
  REQUIRE(f.tv_decay_rate.has_value());
  // Eigen oracle: second eigenvalue of the flip matrix.
  Eigen::EigenSolver<Eigen::MatrixXd> es(f.chain.P());
  double second = 2.0;
  for (int i = 0; i < 2; ++i) second = std::min(second, es.eigenvalues()(i).real());
  CHECK(*f.tv_decay_rate == doctest::Approx(second));
  CHECK_FALSE(periodic2().locally_ergodic);
  CHECK(fixture_names().size() == 7);
  CHECK_THROWS_AS(make_fixture("nope"), InvalidArgument);
  CHECK(std::holds_alternative<HmmFixture>(make_fixture("mixing3_hmm")));
}
