#pragma once

#include <Eigen/Dense>

namespace ergolab {

/// Optimal transport plan summary for a balanced, uncapacitated problem.
struct TransportSolution {
  double cost = 0.0;            ///< primal objective over real arcs
  double dual_objective = 0.0;  ///< sum(demand * pi_demand) - sum(supply * pi_supply)
  double max_dual_violation = 0.0;
  Eigen::VectorXd supply_potential;
  Eigen::VectorXd demand_potential;
  long pivots = 0;

  double duality_gap() const { return cost - dual_objective; }
};

/// Exact min-cost transport between `supply` (m) and `demand` (n) with dense
/// costs (m x n), by the primal network simplex on a strongly feasible
/// spanning tree with block-search pricing. Both vectors must be
/// nonnegative with (numerically) equal totals.
TransportSolution solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                  const Eigen::MatrixXd& cost);

}  // namespace ergolab
