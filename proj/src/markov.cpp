#include "ergolab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

namespace ergolab {

namespace {

constexpr double kStationaryResidualTol = 1e-10;

void require_path_cap(int alphabet, int k) {
  if (std::pow(static_cast<double>(alphabet), k + 1) > kPathEnumerationCap)
    throw CapExceeded("projected path enumeration: alphabet^(k+1) = " +
                      std::to_string(std::pow(static_cast<double>(alphabet), k + 1)) + " exceeds the cap of " +
                      std::to_string(static_cast<long>(kPathEnumerationCap)));
}

Eigen::MatrixXd symbol_masks(const Projection& proj) {
  Eigen::MatrixXd masks = Eigen::MatrixXd::Zero(proj.alphabet_size(), proj.domain_size());
  for (Eigen::Index s = 0; s < proj.domain_size(); ++s) masks(proj(s), s) = 1.0;
  return masks;
}

// Depth-first walk over symbol strings of length k + 1, carrying the
// sub-probability row vector of the full state restricted to the prefix.
// `visit(prefix, masses)` is called at each complete string.
class PathWalker {
 public:
  PathWalker(const FiniteChain& chain, const Projection& proj, int k, int measures)
      : P_(chain.P()), masks_(symbol_masks(proj)), k_(k) {
    if (proj.domain_size() != chain.n_states()) throw DimensionError("projection domain differs from chain");
    require_path_cap(proj.alphabet_size(), k);
    for (int j = 0; j <= k + 1; ++j) buffers_.emplace_back(Eigen::MatrixXd::Zero(measures, chain.n_states()));
    prefix_.assign(static_cast<std::size_t>(k + 1), 0);
  }

  template <typename Visit>
  void run(const Eigen::MatrixXd& start, Visit&& visit) {
    buffers_[0] = start;
    descend(0, visit);
  }

 private:
  template <typename Visit>
  void descend(int depth, Visit& visit) {
    // buffers_[depth] holds the law of X at this position before masking.
    Eigen::MatrixXd& pre = buffers_[static_cast<std::size_t>(depth)];
    Eigen::MatrixXd& next = buffers_[static_cast<std::size_t>(depth) + 1];
    for (Eigen::Index s = 0; s < masks_.rows(); ++s) {
      next = pre.array().rowwise() * masks_.row(s).array();
      const Eigen::VectorXd mass = next.rowwise().sum();
      if ((mass.array() <= 0.0).all()) continue;
      prefix_[static_cast<std::size_t>(depth)] = static_cast<int>(s);
      if (depth == k_) {
        visit(prefix_, mass);
      } else {
        next = next * P_;
        descend(depth + 1, visit);
      }
    }
  }

  const Eigen::MatrixXd& P_;
  Eigen::MatrixXd masks_;
  int k_;
  std::vector<Eigen::MatrixXd> buffers_;
  std::vector<int> prefix_;
};

}  // namespace

FiniteChain::FiniteChain(Eigen::MatrixXd P, std::optional<Categorical> stationary)
    : P_(std::move(P)), stationary_(std::move(stationary)) {
  if (P_.rows() == 0 || P_.rows() != P_.cols()) throw DimensionError("FiniteChain: P must be square and nonempty");
  require_row_stochastic(P_, kProbabilityTol, "FiniteChain");
  if (stationary_) {
    if (stationary_->size() != P_.rows()) throw DimensionError("FiniteChain: stationary law has wrong size");
    const double residual = (stationary_->probs().transpose() * P_ - stationary_->probs().transpose()).lpNorm<1>();
    if (residual > kStationaryResidualTol)
      throw InvalidArgument("FiniteChain: supplied stationary law is not invariant (residual " +
                            std::to_string(residual) + ")");
  }
}

Eigen::RowVectorXd FiniteChain::evolve(const Eigen::RowVectorXd& mu, int n) const {
  Eigen::RowVectorXd out = mu;
  for (int i = 0; i < n; ++i) out = out * P_;
  return out;
}

Projection::Projection(std::vector<int> map, int alphabet_size) : map_(std::move(map)), alphabet_size_(alphabet_size) {
  if (alphabet_size_ < 1) throw InvalidArgument("Projection: alphabet_size must be >= 1");
  for (int s : map_)
    if (s < 0 || s >= alphabet_size_) throw InvalidArgument("Projection: symbol out of range");
}

Projection Projection::identity(Eigen::Index n) {
  std::vector<int> map(static_cast<std::size_t>(n));
  std::iota(map.begin(), map.end(), 0);
  return Projection(std::move(map), static_cast<int>(n));
}

bool Projection::injective() const {
  std::vector<int> sorted = map_;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

ProductChain::ProductChain(std::vector<FiniteChain> components, Eigen::Index state_cap)
    : components_(std::move(components)) {
  for (const auto& c : components_) {
    n_states_ *= c.n_states();
    if (n_states_ > state_cap)
      throw CapExceeded("ProductChain: product state count exceeds the cap of " + std::to_string(state_cap));
  }
}

std::vector<int> ProductChain::decode(Eigen::Index state) const {
  std::vector<int> coords(components_.size());
  for (std::size_t i = components_.size(); i-- > 0;) {
    const auto base = components_[i].n_states();
    coords[i] = static_cast<int>(state % base);
    state /= base;
  }
  return coords;
}

Eigen::Index ProductChain::encode(const std::vector<int>& coords) const {
  Eigen::Index state = 0;
  for (std::size_t i = 0; i < components_.size(); ++i) state = state * components_[i].n_states() + coords[i];
  return state;
}

const FiniteChain& ProductChain::chain() const {
  if (!materialized_) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& c : components_) {
      Eigen::MatrixXd next(P.rows() * c.n_states(), P.cols() * c.n_states());
      for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.cols(); ++j)
          next.block(i * c.n_states(), j * c.n_states(), c.n_states(), c.n_states()) = P(i, j) * c.P();
      P = std::move(next);
    }
    materialized_.emplace(std::move(P));
  }
  return *materialized_;
}

Projection ProductChain::coordinate_projection(const std::vector<int>& coords) const {
  int alphabet = 1;
  for (int c : coords) {
    if (c < 0 || static_cast<std::size_t>(c) >= components_.size())
      throw InvalidArgument("coordinate_projection: coordinate out of range");
    alphabet *= static_cast<int>(components_[static_cast<std::size_t>(c)].n_states());
  }
  std::vector<int> map(static_cast<std::size_t>(n_states_));
  for (Eigen::Index s = 0; s < n_states_; ++s) {
    const auto full = decode(s);
    int symbol = 0;
    for (int c : coords)
      symbol = symbol * static_cast<int>(components_[static_cast<std::size_t>(c)].n_states()) +
               full[static_cast<std::size_t>(c)];
    map[static_cast<std::size_t>(s)] = symbol;
  }
  return Projection(std::move(map), alphabet);
}

std::vector<std::vector<Eigen::Index>> closed_classes(const Eigen::MatrixXd& P) {
  // Tarjan's strongly connected components on the support graph.
  const Eigen::Index n = P.rows();
  std::vector<Eigen::Index> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
      comp(static_cast<std::size_t>(n), -1);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> components;
  Eigen::Index counter = 0;
  std::function<void(Eigen::Index)> connect = [&](Eigen::Index v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (Eigen::Index w = 0; w < n; ++w) {
      if (P(v, w) <= 0.0) continue;
      if (index[w] < 0) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<Eigen::Index> members;
      Eigen::Index w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = static_cast<Eigen::Index>(components.size());
        members.push_back(w);
      } while (w != v);
      std::sort(members.begin(), members.end());
      components.push_back(std::move(members));
    }
  };
  for (Eigen::Index v = 0; v < n; ++v)
    if (index[v] < 0) connect(v);

  std::vector<std::vector<Eigen::Index>> closed;
  for (std::size_t c = 0; c < components.size(); ++c) {
    bool leaks = false;
    for (Eigen::Index v : components[c])
      for (Eigen::Index w = 0; w < n && !leaks; ++w)
        leaks = P(v, w) > 0.0 && comp[w] != static_cast<Eigen::Index>(c);
    if (!leaks) closed.push_back(components[c]);
  }
  std::sort(closed.begin(), closed.end());
  return closed;
}

Categorical stationary(const FiniteChain& chain) {
  if (chain.stationary_hint()) return *chain.stationary_hint();
  const auto classes = closed_classes(chain.P());
  if (classes.size() != 1) {
    std::ostringstream msg;
    msg << "stationary: " << classes.size() << " closed classes, no unique invariant law:";
    for (const auto& c : classes) {
      msg << " {";
      for (std::size_t i = 0; i < c.size(); ++i) msg << (i ? "," : "") << c[i];
      msg << "}";
    }
    throw StationaryError(msg.str());
  }
  const auto& members = classes.front();
  const auto m = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = chain.P()(members[j], members[i]) - (i == j ? 1.0 : 0.0);
  A.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  const Eigen::VectorXd restricted = A.fullPivLu().solve(rhs);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(chain.n_states());
  for (Eigen::Index i = 0; i < m; ++i) lambda(members[i]) = std::max(0.0, restricted(i));
  lambda /= lambda.sum();
  const double residual = (lambda.transpose() * chain.P() - lambda.transpose()).lpNorm<1>();
  if (!(residual <= kStationaryResidualTol))
    throw StationaryError("stationary: linear solve did not converge (residual " + std::to_string(residual) + ")");
  return Categorical(std::move(lambda));
}

PathLaw projected_path_law(const FiniteChain& chain, const Categorical& init, const Projection& proj, int n, int k) {
  if (init.size() != chain.n_states()) throw DimensionError("projected_path_law: init has wrong size");
  PathLaw law;
  PathWalker walker(chain, proj, k, 1);
  const Eigen::MatrixXd start = chain.evolve(init.probs().transpose(), n);
  walker.run(start, [&](const std::vector<int>& path, const Eigen::VectorXd& mass) {
    if (mass(0) > 0.0) law[path] = mass(0);
  });
  return law;
}

double local_path_tv(const FiniteChain& chain, Eigen::Index x, Eigen::Index x2, const Projection& proj, int n,
                     int k) {
  if (x < 0 || x2 < 0 || x >= chain.n_states() || x2 >= chain.n_states())
    throw InvalidArgument("local_path_tv: state out of range");
  Eigen::MatrixXd start = Eigen::MatrixXd::Zero(2, chain.n_states());
  start(0, x) = 1.0;
  start(1, x2) = 1.0;
  for (int i = 0; i < n; ++i) start = start * chain.P();
  PathWalker walker(chain, proj, k, 2);
  double tv = 0.0;
  walker.run(start, [&](const std::vector<int>&, const Eigen::VectorXd& mass) { tv += std::abs(mass(0) - mass(1)); });
  return std::min(tv, kTvMax);
}

double local_path_tv_converged(const FiniteChain& chain, Eigen::Index x, Eigen::Index x2, const Projection& proj,
                               int n, int k_max, double tol) {
  double previous = local_path_tv(chain, x, x2, proj, n, 0);
  for (int k = 1; k <= k_max; ++k) {
    const double current = local_path_tv(chain, x, x2, proj, n, k);
    if (std::abs(current - previous) < tol) return current;
    previous = current;
  }
  return previous;
}

double beta_mixing_coeff(const FiniteChain& chain, int n) {
  const Categorical lambda = stationary(chain);
  Eigen::MatrixXd Pn = Eigen::MatrixXd::Identity(chain.n_states(), chain.n_states());
  for (int i = 0; i < n; ++i) Pn = Pn * chain.P();
  const Eigen::VectorXd row_tv = (Pn.rowwise() - lambda.probs().transpose()).cwiseAbs().rowwise().sum();
  return lambda.probs().dot(row_tv);
}

ZeroTwoReport zero_two_probe(const FiniteChain& chain, const Projection& proj, int n_max, int k_max, double alpha) {
  if (!(alpha > 0.0 && alpha <= kTvMax)) throw InvalidArgument("zero_two_probe: alpha must lie in (0, 2]");
  require_path_cap(proj.alphabet_size(), k_max);
  const Eigen::Index m = chain.n_states();
  ZeroTwoReport report;
  report.tv_trace.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  report.pair_witness.assign(static_cast<std::size_t>(m * m), 0);
  const double threshold = kTvMax - alpha;

  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index x2 = x + 1; x2 < m; ++x2) {
      int first = -1;
      for (int n = 0; n <= n_max; ++n) {
        const double tv = local_path_tv(chain, x, x2, proj, n, k_max);
        auto& slot = report.tv_trace[static_cast<std::size_t>(n)];
        slot = std::max(slot, tv);
        if (first < 0 && tv <= threshold) first = n;
      }
      report.pair_witness[static_cast<std::size_t>(x * m + x2)] = first;
      report.pair_witness[static_cast<std::size_t>(x2 * m + x)] = first;
    }

  report.locally_irreducible =
      std::none_of(report.pair_witness.begin(), report.pair_witness.end(), [](int w) { return w < 0; });
  if (report.locally_irreducible)
    report.witness_n = *std::max_element(report.pair_witness.begin(), report.pair_witness.end());
  return report;
}

LocalMixingReport local_mixing_probe(const ProductChain& product, const std::vector<int>& coords, int n_max,
                                     int k_max, double alpha) {
  LocalMixingReport report;
  const FiniteChain& full = product.chain();
  report.local = zero_two_probe(full, product.coordinate_projection(coords), n_max, k_max, alpha);

  const Eigen::Index m = full.n_states();
  Eigen::MatrixXd Pn = Eigen::MatrixXd::Identity(m, m);
  for (int n = 0; n <= n_max; ++n) {
    double worst = 0.0;
    for (Eigen::Index x = 0; x < m; ++x)
      for (Eigen::Index x2 = x + 1; x2 < m; ++x2) worst = std::max(worst, tv_distance(Pn.row(x), Pn.row(x2)));
    report.full_tv_trace.push_back(std::min(worst, kTvMax));
    Pn = Pn * full.P();
  }

  report.contrast_n = report.local.witness_n.value_or(n_max);
  const auto& comps = product.components();
  for (std::size_t d = 1; d <= comps.size(); ++d) {
    ProductChain prefix(std::vector<FiniteChain>(comps.begin(), comps.begin() + static_cast<long>(d)));
    std::vector<int> top(d);
    for (std::size_t i = 0; i < d; ++i) top[i] = static_cast<int>(comps[i].n_states()) - 1;
    Eigen::RowVectorXd start = Eigen::RowVectorXd::Zero(prefix.n_states());
    start(prefix.encode(top)) = 1.0;
    const Categorical lambda = stationary(prefix.chain());
    const Eigen::RowVectorXd law = prefix.chain().evolve(start, report.contrast_n);
    report.dimension_contrast.push_back(tv_distance(law, lambda.probs().transpose()));
  }
  return report;
}

}  // namespace ergolab
