#pragma once

// Named finite chains and HMMs with the analytic facts the tests rely on.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/hmm.hpp"
#include "ergolab/markov.hpp"

namespace ergolab {

struct ChainFixture {
  std::string name;
  FiniteChain chain;
  std::optional<Categorical> stationary;
  /// |delta_x P^n - delta_x' P^n| = 2 rate^n for distinct starts (two-state and product-coordinate chains).
  std::optional<double> tv_decay_rate;
  bool locally_ergodic = true;
  std::vector<std::string> facts;
};

struct HmmFixture {
  std::string name;
  FiniteHMM hmm;
  std::vector<std::string> facts;
};

using Fixture = std::variant<ChainFixture, HmmFixture>;

/// [[1 - p, p], [p, 1 - p]].
ChainFixture two_state_flip(double p);
/// d independent two_state_flip(p) coordinates.
ProductChain product_flip(int d, double p);
ChainFixture product_flip_fixture(int d, double p);
/// Deterministic two-cycle.
ChainFixture periodic2();

/// Three hidden states, two symbols, every entry of P0 and the emission positive.
HmmFixture mixing3_hmm();
/// Emission (1 - eps) on the diagonal, eps / 2 elsewhere, over the mixing3 dynamics.
HmmFixture revealing_hmm(double eps);
/// The mixing3 dynamics with an emission that does not depend on the state.
HmmFixture flat_hmm();
/// Hidden state (xi_n, xi_{n-1}) of fair bits, observation xi_n XOR xi_{n-1}.
/// Index 2 xi_n + xi_{n-1}. The emission has zeros, so g is not positive.
HmmFixture parity_degenerate_hmm();

/// Looks a fixture up by name with its default parameters. Throws InvalidArgument on unknown names.
Fixture make_fixture(const std::string& name);
/// Names accepted by make_fixture.
const std::vector<std::string>& fixture_names();

}  // namespace ergolab
