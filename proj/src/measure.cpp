#include "ergolab/measure.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "ergolab/rng.hpp"
#include "ergolab/transport.hpp"

namespace ergolab {

namespace {

void require_probability(const Eigen::VectorXd& w, const char* what) {
  if (w.size() == 0) throw InvalidArgument(std::string(what) + ": empty support");
  if (!w.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
  if ((w.array() < 0.0).any()) throw InvalidArgument(std::string(what) + ": negative entry");
  if (std::abs(w.sum() - 1.0) > kProbabilityTol)
    throw InvalidArgument(std::string(what) + ": entries sum to " + std::to_string(w.sum()) + ", not 1");
}

constexpr double kDualityGapTol = 1e-9;

}  // namespace

Categorical::Categorical(Eigen::VectorXd probs) : probs_(std::move(probs)) {
  require_probability(probs_, "Categorical");
}

Categorical Categorical::normalized(Eigen::VectorXd weights) {
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw InvalidArgument("Categorical::normalized: weights must be finite and nonnegative");
  const double total = weights.sum();
  if (!(total > 0.0)) throw DegenerateModel("Categorical::normalized: zero total mass");
  return Categorical(weights / total);
}

Categorical Categorical::uniform(Eigen::Index n) {
  return Categorical(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

Categorical Categorical::point(Eigen::Index n, Eigen::Index at) {
  if (at < 0 || at >= n) throw InvalidArgument("Categorical::point: index out of range");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p(at) = 1.0;
  return Categorical(std::move(p));
}

AtomicMeasure::AtomicMeasure(Eigen::MatrixXd atoms, Eigen::VectorXd weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.cols() == 0) throw InvalidArgument("AtomicMeasure: no atoms");
  if (atoms_.cols() != weights_.size()) throw DimensionError("AtomicMeasure: one weight per atom required");
  require_probability(weights_, "AtomicMeasure");
}

AtomicMeasure AtomicMeasure::uniform(Eigen::MatrixXd atoms) {
  const auto n = atoms.cols();
  return AtomicMeasure(std::move(atoms), Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

AtomicMeasure AtomicMeasure::point(const Eigen::VectorXd& x) {
  return AtomicMeasure(Eigen::MatrixXd(x), Eigen::VectorXd::Ones(1));
}

MetricSpec MetricSpec::sobolev(double s, const Eigen::VectorXd& mode_weights) {
  return sobolev(s, mode_weights, Eigen::VectorXd::Ones(mode_weights.size()));
}

MetricSpec MetricSpec::sobolev(double s, const Eigen::VectorXd& mode_weights, const Eigen::VectorXd& scale) {
  if (mode_weights.size() != scale.size()) throw DimensionError("sobolev metric: scale/mode size mismatch");
  if ((mode_weights.array() <= 0.0).any() || (scale.array() <= 0.0).any())
    throw InvalidArgument("sobolev metric: weights must be strictly positive");
  Eigen::VectorXd w = scale.array() * mode_weights.array().pow(2.0 * s);
  return MetricSpec(Kind::weighted_sobolev, std::move(w));
}

MetricSpec MetricSpec::weighted_hamming(Eigen::VectorXd alpha) {
  if ((alpha.array() <= 0.0).any() || !alpha.allFinite())
    throw InvalidArgument("weighted hamming metric: weights must be finite and strictly positive");
  return MetricSpec(Kind::weighted_hamming, std::move(alpha));
}

MetricSpec MetricSpec::weighted_sup(Eigen::VectorXd weights) {
  if ((weights.array() <= 0.0).any() || !weights.allFinite())
    throw InvalidArgument("weighted sup metric: weights must be finite and strictly positive");
  return MetricSpec(Kind::weighted_sup, std::move(weights));
}

double tv_categorical(const Categorical& p, const Categorical& q) {
  if (p.size() != q.size()) throw DimensionError("tv_categorical: support sizes differ");
  return tv_distance(p.probs(), q.probs());
}

double tv_atomic(const AtomicMeasure& p, const AtomicMeasure& q) {
  if (p.dim() != q.dim()) throw DimensionError("tv_atomic: atoms differ in dimension");
  auto key = [](const auto& col) { return std::vector<double>(col.data(), col.data() + col.size()); };
  std::map<std::vector<double>, double> diff;
  for (Eigen::Index i = 0; i < p.size(); ++i) diff[key(p.atoms().col(i))] += p.weights()(i);
  for (Eigen::Index i = 0; i < q.size(); ++i) diff[key(q.atoms().col(i))] -= q.weights()(i);
  double tv = 0.0;
  for (const auto& [atom, d] : diff) tv += std::abs(d);
  return std::min(tv, kTvMax);
}

AtomicMeasure stratified_subsample(const AtomicMeasure& p, Eigen::Index m, double u) {
  if (m < 1) throw InvalidArgument("stratified_subsample: need at least one atom");
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(p.size()), 0);
  double cumulative = p.weights()(0);
  Eigen::Index i = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double target = (static_cast<double>(k) + u) / static_cast<double>(m);
    while (target >= cumulative && i + 1 < p.size()) cumulative += p.weights()(++i);
    ++counts[static_cast<std::size_t>(i)];
  }
  const auto kept = std::count_if(counts.begin(), counts.end(), [](Eigen::Index c) { return c > 0; });
  Eigen::MatrixXd atoms(p.dim(), kept);
  Eigen::VectorXd weights(kept);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const auto c = counts[static_cast<std::size_t>(j)];
    if (c == 0) continue;
    atoms.col(col) = p.atoms().col(j);
    weights(col++) = static_cast<double>(c) / static_cast<double>(m);
  }
  return AtomicMeasure(std::move(atoms), std::move(weights));
}

BlResult bl_atomic_detailed(const AtomicMeasure& p, const AtomicMeasure& q, const MetricSpec& metric,
                            const BlOptions& options) {
  if (p.dim() != q.dim()) throw DimensionError("bl_atomic: atoms differ in dimension");
  BlResult result;
  const AtomicMeasure* a = &p;
  const AtomicMeasure* b = &q;
  AtomicMeasure sub_p, sub_q;
  if (p.size() + q.size() > options.atom_cap) {
    if (!options.subsample)
      throw CapExceeded("bl_atomic: " + std::to_string(p.size() + q.size()) + " atoms exceed the LP cap of " +
                        std::to_string(options.atom_cap) + "; subsample the measures (BlOptions::subsample)");
    Stream stream(options.seed, 0, "bl-subsample");
    const double u = stream.uniform();
    const Eigen::Index half = std::max<Eigen::Index>(1, options.atom_cap / 2);
    sub_p = p.size() > half ? stratified_subsample(p, half, u) : p;
    sub_q = q.size() > half ? stratified_subsample(q, half, u) : q;
    a = &sub_p;
    b = &sub_q;
    result.subsampled = true;
  }

  Eigen::MatrixXd cost(a->size(), b->size());
  for (Eigen::Index j = 0; j < b->size(); ++j)
    for (Eigen::Index i = 0; i < a->size(); ++i)
      cost(i, j) = std::min(metric(a->atoms().col(i), b->atoms().col(j)), kTvMax);

  const TransportSolution sol = solve_transport(a->weights(), b->weights(), cost);
  result.duality_gap = std::abs(sol.duality_gap());
  if (result.duality_gap > kDualityGapTol || sol.max_dual_violation > kDualityGapTol)
    throw SolverError("bl_atomic: duality gap " + std::to_string(result.duality_gap) + " above tolerance");
  result.value = std::clamp(sol.cost, 0.0, kTvMax);
  result.atoms_used = a->size() + b->size();
  return result;
}

double gaussian_seq_tv_bound(std::span<const double> gaps) {
  const double ss = std::accumulate(gaps.begin(), gaps.end(), 0.0, [](double s, double g) { return s + g * g; });
  return std::min(kTvMax, std::sqrt(ss));
}

double product_tv_bound(std::span<const double> affinities) {
  double prod = 1.0;
  for (double h : affinities) {
    if (!(h >= 0.0 && h <= 1.0)) throw InvalidArgument("product_tv_bound: affinity outside [0, 1]");
    prod *= h;
  }
  return std::min(kTvMax, std::sqrt(8.0 * (1.0 - prod)));
}

void require_row_stochastic(const Eigen::MatrixXd& m, double tol, const char* what) {
  if (!m.allFinite() || (m.array() < 0.0).any())
    throw InvalidArgument(std::string(what) + ": entries must be finite and nonnegative");
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if (std::abs(m.row(r).sum() - 1.0) > tol)
      throw InvalidArgument(std::string(what) + ": row " + std::to_string(r) + " sums to " +
                            std::to_string(m.row(r).sum()));
}

double tv_joint_from_conditionals(const Categorical& marginal, const Eigen::MatrixXd& K, const Eigen::MatrixXd& K2) {
  if (K.rows() != marginal.size() || K2.rows() != marginal.size() || K.cols() != K2.cols())
    throw DimensionError("tv_joint_from_conditionals: kernel shapes do not match the marginal");
  require_row_stochastic(K, kProbabilityTol, "tv_joint_from_conditionals K");
  require_row_stochastic(K2, kProbabilityTol, "tv_joint_from_conditionals K2");
  return marginal.probs().dot((K - K2).cwiseAbs().rowwise().sum());
}

}  // namespace ergolab
