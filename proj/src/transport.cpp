#include "ergolab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ergolab/error.hpp"

namespace ergolab {

namespace {

constexpr int kUp = 1;     // tree arc points from the node to its parent
constexpr int kDown = -1;  // tree arc points from the parent to the node
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPricingTol = 1e-12;

class NetworkSimplex {
 public:
  NetworkSimplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand, const Eigen::MatrixXd& cost)
      : m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        nodes_(m_ + n_),
        root_(nodes_),
        real_arcs_(static_cast<long>(m_) * n_),
        cost_(static_cast<std::size_t>(real_arcs_) + static_cast<std::size_t>(nodes_)),
        node_supply_(static_cast<std::size_t>(nodes_)) {
    double max_cost = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) {
        const double c = cost(i, j);
        cost_[static_cast<std::size_t>(i) * n_ + j] = c;
        max_cost = std::max(max_cost, std::abs(c));
      }
    for (int i = 0; i < m_; ++i) node_supply_[i] = supply(i);
    for (int j = 0; j < n_; ++j) node_supply_[m_ + j] = -demand(j);

    const std::size_t all = cost_.size();
    flow_.assign(all, 0.0);
    in_tree_.assign(all, false);
    art_source_.resize(nodes_);
    art_target_.resize(nodes_);
    tree_arcs_.assign(static_cast<std::size_t>(nodes_) + 1, {});

    const double art_cost = (max_cost + 1.0) * (nodes_ + 1);
    for (int u = 0; u < nodes_; ++u) {
      const long e = real_arcs_ + u;
      if (node_supply_[u] >= 0.0) {
        art_source_[u] = u;
        art_target_[u] = root_;
        cost_[e] = 0.0;
        flow_[e] = node_supply_[u];
      } else {
        art_source_[u] = root_;
        art_target_[u] = u;
        cost_[e] = art_cost;
        flow_[e] = -node_supply_[u];
      }
      in_tree_[e] = true;
      tree_arcs_[u].push_back(e);
      tree_arcs_[root_].push_back(e);
    }
    parent_.assign(static_cast<std::size_t>(nodes_) + 1, -1);
    pred_.assign(parent_.size(), -1);
    pred_dir_.assign(parent_.size(), 0);
    depth_.assign(parent_.size(), 0);
    pi_.assign(parent_.size(), 0.0);
    queue_.reserve(parent_.size());
    rebuild();
  }

  TransportSolution solve() {
    const long block = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(real_arcs_))));
    const long pivot_limit = 200 * (real_arcs_ + nodes_) + 1000;
    long next_arc = 0;
    long pivots = 0;
    for (;;) {
      const long in_arc = find_entering(next_arc, block);
      if (in_arc < 0) break;
      pivot(in_arc);
      if (++pivots > pivot_limit) throw SolverError("transport simplex exceeded its pivot limit");
    }

    TransportSolution out;
    out.pivots = pivots;
    double min_rc = 0.0;
    for (long e = 0; e < real_arcs_; ++e) {
      out.cost += flow_[e] * cost_[e];
      min_rc = std::min(min_rc, reduced_cost(e));
    }
    out.max_dual_violation = -min_rc;
    out.supply_potential.resize(m_);
    out.demand_potential.resize(n_);
    for (int i = 0; i < m_; ++i) {
      out.supply_potential(i) = pi_[i];
      out.dual_objective -= node_supply_[i] * pi_[i];
    }
    for (int j = 0; j < n_; ++j) {
      out.demand_potential(j) = pi_[m_ + j];
      out.dual_objective -= node_supply_[m_ + j] * pi_[m_ + j];
    }
    return out;
  }

 private:
  int source(long e) const { return e < real_arcs_ ? static_cast<int>(e / n_) : art_source_[e - real_arcs_]; }
  int target(long e) const {
    return e < real_arcs_ ? m_ + static_cast<int>(e % n_) : art_target_[e - real_arcs_];
  }
  double reduced_cost(long e) const { return cost_[e] + pi_[source(e)] - pi_[target(e)]; }

  long find_entering(long& next_arc, long block) const {
    long best_arc = -1;
    double best = -kPricingTol;
    long remaining = block;
    for (long k = 0; k < real_arcs_; ++k) {
      long e = next_arc + k;
      if (e >= real_arcs_) e -= real_arcs_;
      if (!in_tree_[e]) {
        const double rc = reduced_cost(e);
        if (rc < best) {
          best = rc;
          best_arc = e;
        }
      }
      if (--remaining == 0) {
        if (best_arc >= 0) {
          next_arc = e + 1 >= real_arcs_ ? 0 : e + 1;
          return best_arc;
        }
        remaining = block;
      }
    }
    return best_arc;
  }

  void pivot(long in_arc) {
    const int first = source(in_arc);
    const int second = target(in_arc);

    int a = first, b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b])
        a = parent_[a];
      else
        b = parent_[b];
    }
    const int join = a;

    double delta = kInf;
    int u_out = -1;
    for (int u = first; u != join; u = parent_[u]) {
      const double d = pred_dir_[u] == kUp ? flow_[pred_[u]] : kInf;
      if (d < delta) {
        delta = d;
        u_out = u;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      const double d = pred_dir_[u] == kDown ? flow_[pred_[u]] : kInf;
      if (d <= delta) {
        delta = d;
        u_out = u;
      }
    }
    if (u_out < 0 || !std::isfinite(delta)) throw SolverError("transport problem is unbounded");

    if (delta > 0.0) {
      flow_[in_arc] += delta;
      for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * delta;
      for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * delta;
    }

    const long out_arc = pred_[u_out];
    in_tree_[out_arc] = false;
    in_tree_[in_arc] = true;
    detach(source(out_arc), out_arc);
    detach(target(out_arc), out_arc);
    tree_arcs_[first].push_back(in_arc);
    tree_arcs_[second].push_back(in_arc);
    rebuild();
  }

  void detach(int node, long arc) {
    auto& arcs = tree_arcs_[node];
    const auto it = std::find(arcs.begin(), arcs.end(), arc);
    *it = arcs.back();
    arcs.pop_back();
  }

  void rebuild() {
    queue_.clear();
    queue_.push_back(root_);
    parent_[root_] = -1;
    pred_[root_] = -1;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const int u = queue_[head];
      for (const long e : tree_arcs_[u]) {
        if (e == pred_[u]) continue;
        const int s = source(e);
        const int child = s == u ? target(e) : s;
        parent_[child] = u;
        pred_[child] = e;
        depth_[child] = depth_[u] + 1;
        if (s == child) {
          pred_dir_[child] = kUp;
          pi_[child] = pi_[u] - cost_[e];
        } else {
          pred_dir_[child] = kDown;
          pi_[child] = pi_[u] + cost_[e];
        }
        queue_.push_back(child);
      }
    }
  }

  int m_, n_, nodes_, root_;
  long real_arcs_;
  std::vector<double> cost_;
  std::vector<double> node_supply_;
  std::vector<double> flow_;
  std::vector<bool> in_tree_;
  std::vector<int> art_source_, art_target_;
  std::vector<std::vector<long>> tree_arcs_;
  std::vector<int> parent_;
  std::vector<long> pred_;
  std::vector<int> pred_dir_;
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<int> queue_;
};

}  // namespace

TransportSolution solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                  const Eigen::MatrixXd& cost) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw DimensionError("transport cost matrix must be supply.size() x demand.size()");
  if (supply.size() == 0 || demand.size() == 0) throw DimensionError("transport problem needs nonempty sides");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any())
    throw InvalidArgument("transport masses must be nonnegative");
  return NetworkSimplex(supply, demand, cost).solve();
}

}  // namespace ergolab
