#include "ergolab/fixtures.hpp"

namespace ergolab {

namespace {

Eigen::MatrixXd mixing3_P0() {
  Eigen::MatrixXd P0(3, 3);
  P0 << 0.5, 0.25, 0.25,
        0.25, 0.5, 0.25,
        0.25, 0.25, 0.5;
  return P0;
}

}  // namespace

ChainFixture two_state_flip(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("two_state_flip: p must lie in [0, 1]");
  Eigen::MatrixXd P(2, 2);
  P << 1.0 - p, p, p, 1.0 - p;
  ChainFixture f{"two_state_flip", FiniteChain(P), Categorical::uniform(2), std::abs(1.0 - 2.0 * p), true, {}};
  f.facts = {"stationary law (1/2, 1/2)", "|delta_0 P^n - delta_1 P^n| = 2 |1 - 2p|^n",
             "beta(n) = |1 - 2p|^n"};
  if (p == 0.0 || p == 1.0) f.locally_ergodic = false;
  return f;
}

ProductChain product_flip(int d, double p) {
  if (d < 1) throw InvalidArgument("product_flip: need at least one coordinate");
  return ProductChain(std::vector<FiniteChain>(static_cast<std::size_t>(d), two_state_flip(p).chain));
}

ChainFixture product_flip_fixture(int d, double p) {
  const ProductChain product = product_flip(d, p);
  const auto n = product.n_states();
  ChainFixture f{"product_flip", product.chain(), Categorical::uniform(n), std::abs(1.0 - 2.0 * p), true, {}};
  f.facts = {"each coordinate is an independent two_state_flip(p)",
             "single-coordinate path TV from opposite starts = 2 |1 - 2p|^n"};
  return f;
}

ChainFixture periodic2() {
  Eigen::MatrixXd P(2, 2);
  P << 0.0, 1.0, 1.0, 0.0;
  ChainFixture f{"periodic2", FiniteChain(P), Categorical::uniform(2), 1.0, false, {}};
  f.facts = {"deterministic two-cycle", "not locally ergodic: path TV from distinct starts is 2 for every n"};
  return f;
}

HmmFixture mixing3_hmm() {
  Eigen::MatrixXd phi(3, 2);
  phi << 0.7, 0.3,
         0.4, 0.6,
         0.2, 0.8;
  return {"mixing3_hmm", FiniteHMM::hidden_markov(mixing3_P0(), phi),
          {"P0 doubly stochastic, hidden stationary law uniform", "P0 eigenvalues 1, 1/4, 1/4",
           "g strictly positive"}};
}

HmmFixture revealing_hmm(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("revealing_hmm: eps must lie in (0, 1)");
  Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(3, 3, eps / 2.0);
  phi.diagonal().setConstant(1.0 - eps);
  return {"revealing_hmm", FiniteHMM::hidden_markov(mixing3_P0(), phi),
          {"observation equals the hidden state with probability 1 - eps"}};
}

HmmFixture flat_hmm() {
  return {"flat_hmm", FiniteHMM::hidden_markov(mixing3_P0(), Eigen::MatrixXd::Constant(3, 2, 0.5)),
          {"observations independent of the hidden state", "filter equals the prior evolution mu P0^n"}};
}

HmmFixture parity_degenerate_hmm() {
  Eigen::MatrixXd P0 = Eigen::MatrixXd::Zero(4, 4);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(4, 2);
  for (int now = 0; now < 2; ++now)
    for (int before = 0; before < 2; ++before) {
      const int z = 2 * now + before;
      for (int fresh = 0; fresh < 2; ++fresh) P0(z, 2 * fresh + now) = 0.5;
      phi(z, now ^ before) = 1.0;
    }
  return {"parity_degenerate_hmm", FiniteHMM::hidden_markov(P0, phi),
          {"g vanishes off the parity constraint (degenerate)",
           "given the observations, xi_0 determines every later xi_n",
           "conditional TV between starts differing in xi_0 stays 2"}};
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"two_state_flip", "product_flip", "periodic2", "mixing3_hmm",
                                              "revealing_hmm", "flat_hmm", "parity_degenerate_hmm"};
  return names;
}

Fixture make_fixture(const std::string& name) {
  if (name == "two_state_flip") return two_state_flip(0.25);
  if (name == "product_flip") return product_flip_fixture(3, 0.25);
  if (name == "periodic2") return periodic2();
  if (name == "mixing3_hmm") return mixing3_hmm();
  if (name == "revealing_hmm") return revealing_hmm(0.01);
  if (name == "flat_hmm") return flat_hmm();
  if (name == "parity_degenerate_hmm") return parity_degenerate_hmm();
  throw InvalidArgument("unknown fixture '" + name + "'");
}

}  // namespace ergolab
