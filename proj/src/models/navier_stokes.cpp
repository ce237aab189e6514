#include "ergolab/models/navier_stokes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace ergolab {

namespace {

bool upper_half(const WaveVector& k) { return k[1] > 0 || (k[1] == 0 && k[0] > 0); }

int norm_sq(const WaveVector& k) { return k[0] * k[0] + k[1] * k[1]; }

}  // namespace

std::string check_forcing_set(const std::vector<ForcedMode>& forcing) {
  std::set<WaveVector> forced;
  for (const auto& f : forcing)
    if (f.sigma != 0.0) forced.insert(f.k);
  std::ostringstream problems;
  if (forced.empty()) return "forcing set is empty";
  if (forced.count({0, 0})) problems << "the zero mode cannot be forced; ";
  for (const auto& k : forced)
    if (!forced.count({-k[0], -k[1]})) {
      problems << "symmetry assumption Z = -Z fails: (" << k[0] << "," << k[1] << ") is forced but its negative is not; ";
      break;
    }
  std::set<int> norms;
  for (const auto& k : forced) norms.insert(norm_sq(k));
  if (norms.size() < 2) problems << "distinct-length assumption fails: all forced modes have the same |k|; ";
  int g = 0;
  for (auto a = forced.begin(); a != forced.end(); ++a)
    for (auto b = std::next(a); b != forced.end(); ++b) g = std::gcd(g, (*a)[0] * (*b)[1] - (*a)[1] * (*b)[0]);
  if (std::abs(g) != 1)
    problems << "integer-span assumption fails: integer linear combinations of the forced modes do not generate Z^2 "
             << "(gcd of 2x2 minors is " << std::abs(g) << "); ";
  std::string out = problems.str();
  if (!out.empty()) out.resize(out.size() - 2);
  return out;
}

NavierStokesModel::NavierStokesModel(NSParams params) : params_(std::move(params)) {
  if (params_.k_max < 2) throw InvalidArgument("navier_stokes: k_max must be >= 2");
  if (!(params_.viscosity > 0.0)) throw InvalidArgument("navier_stokes: viscosity must be positive");
  if (!(params_.inner_step > 0.0 && params_.delta >= params_.inner_step))
    throw InvalidArgument("navier_stokes: need 0 < inner_step <= delta");
  inner_steps_ = static_cast<int>(std::lround(params_.delta / params_.inner_step));
  if (std::abs(inner_steps_ * params_.inner_step - params_.delta) > 1e-9)
    throw InvalidArgument("navier_stokes: delta must be an integer multiple of inner_step");
  if (!(params_.obs_variance > 0.0)) throw InvalidArgument("navier_stokes: observation variance must be positive");
  if (const auto problem = check_forcing_set(params_.forcing); !problem.empty())
    throw InvalidArgument("navier_stokes forcing: " + problem);

  const int N = grid_size();
  cutoff_ = (N - 1) / 3;
  for (int k2 = 0; k2 <= cutoff_; ++k2)
    for (int k1 = -cutoff_; k1 <= cutoff_; ++k1)
      if (upper_half({k1, k2})) modes_.push_back({k1, k2});

  const double h = params_.inner_step;
  decay_.resize(static_cast<Eigen::Index>(modes_.size()));
  noise_scale_.resize(decay_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const double rate = params_.viscosity * norm_sq(modes_[m]);
    decay_(static_cast<Eigen::Index>(m)) = std::exp(-rate * h);
    noise_scale_(static_cast<Eigen::Index>(m)) = M_PI * std::sqrt((1.0 - std::exp(-2.0 * rate * h)) / (2.0 * rate));
  }

  for (const auto& f : params_.forcing) {
    if (f.sigma == 0.0) continue;
    const WaveVector upper = upper_half(f.k) ? f.k : WaveVector{-f.k[0], -f.k[1]};
    const auto idx = mode_index(upper);
    if (!idx)
      throw InvalidArgument("navier_stokes: forced mode (" + std::to_string(f.k[0]) + "," + std::to_string(f.k[1]) +
                            ") lies beyond the dealiased cutoff " + std::to_string(cutoff_));
    auto it = std::find_if(forced_pairs_.begin(), forced_pairs_.end(), [&](const ForcedPair& p) { return p.mode == *idx; });
    if (it == forced_pairs_.end()) {
      forced_pairs_.push_back({*idx, 0.0, 0.0});
      it = std::prev(forced_pairs_.end());
    }
    (upper_half(f.k) ? it->sigma_sin : it->sigma_cos) = f.sigma;
  }

  const int M = 2 * cutoff_ + 1;
  synth_.resize(N, M);
  for (int j = 0; j < N; ++j)
    for (int a = 0; a < M; ++a) synth_(j, a) = std::polar(1.0, (a - cutoff_) * 2.0 * M_PI * j / N);
}

std::optional<std::size_t> NavierStokesModel::mode_index(const WaveVector& k) const {
  const auto it = std::find(modes_.begin(), modes_.end(), k);
  if (it == modes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - modes_.begin());
}

Eigen::MatrixXcd NavierStokesModel::to_full(const State& x) const {
  if (x.size() != state_dim()) throw DimensionError("navier_stokes: state has wrong length");
  const int M = 2 * cutoff_ + 1;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(M, M);
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const auto& k = modes_[m];
    const Complex c = coefficient(x, m);
    full(k[0] + cutoff_, k[1] + cutoff_) = c;
    full(-k[0] + cutoff_, -k[1] + cutoff_) = std::conj(c);
  }
  return full;
}

State NavierStokesModel::from_full(const Eigen::MatrixXcd& full) const {
  State x(state_dim());
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const auto& k = modes_[m];
    // Average with the conjugate partner so the stored field is exactly real.
    const Complex c = 0.5 * (full(k[0] + cutoff_, k[1] + cutoff_) + std::conj(full(-k[0] + cutoff_, -k[1] + cutoff_)));
    x(2 * m) = c.real();
    x(2 * m + 1) = c.imag();
  }
  return x;
}

Eigen::MatrixXd NavierStokesModel::to_grid(const Eigen::MatrixXcd& full) const {
  return (synth_ * full * synth_.transpose()).real() / (2.0 * M_PI);
}

Eigen::MatrixXcd NavierStokesModel::from_grid(const Eigen::MatrixXd& grid) const {
  const double N = grid_size();
  return synth_.adjoint() * grid.cast<Complex>() * synth_.conjugate() * (2.0 * M_PI / (N * N));
}

State NavierStokesModel::from_coefficients(const std::vector<Complex>& c) const {
  if (c.size() != modes_.size()) throw DimensionError("navier_stokes: one coefficient per retained mode required");
  State x(state_dim());
  for (std::size_t m = 0; m < c.size(); ++m) {
    x(2 * m) = c[m].real();
    x(2 * m + 1) = c[m].imag();
  }
  return x;
}

Eigen::MatrixXd NavierStokesModel::vorticity_grid(const State& x) const { return to_grid(to_full(x)); }

State NavierStokesModel::nonlinear_term(const State& x) const {
  const Eigen::MatrixXcd c = to_full(x);
  const int M = 2 * cutoff_ + 1;
  Eigen::MatrixXcd u1(M, M), u2(M, M), d1(M, M), d2(M, M);
  const Complex I(0.0, 1.0);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      const double k1 = a - cutoff_, k2 = b - cutoff_;
      const double kk = k1 * k1 + k2 * k2;
      const Complex v = c(a, b);
      u1(a, b) = kk > 0 ? -I * k2 / kk * v : Complex{};
      u2(a, b) = kk > 0 ? I * k1 / kk * v : Complex{};
      d1(a, b) = I * k1 * v;
      d2(a, b) = I * k2 * v;
    }
  const Eigen::MatrixXd gu1 = to_grid(u1), gu2 = to_grid(u2);
  const double N = grid_size();
  const double courant = (gu1.cwiseAbs() + gu2.cwiseAbs()).maxCoeff() * params_.inner_step * N / (2.0 * M_PI);
  if (!(courant <= params_.cfl_limit))
    throw NumericalError("navier_stokes: CFL violation (Courant number " + std::to_string(courant) + ")");
  const Eigen::MatrixXd advection = gu1.cwiseProduct(to_grid(d1)) + gu2.cwiseProduct(to_grid(d2));
  return from_full(from_grid(-advection));
}

State NavierStokesModel::inner_step(const State& x, const Eigen::VectorXd& noise) const {
  if (noise.size() != forcing_noise_dim()) throw DimensionError("navier_stokes: wrong forcing noise length");
  State next = x + params_.inner_step * nonlinear_term(x);
  for (Eigen::Index m = 0; m < decay_.size(); ++m) next.segment<2>(2 * m) *= decay_(m);
  for (std::size_t p = 0; p < forced_pairs_.size(); ++p) {
    const auto& pair = forced_pairs_[p];
    const double scale = noise_scale_(static_cast<Eigen::Index>(pair.mode));
    next(2 * pair.mode) += scale * pair.sigma_cos * noise(2 * p);
    next(2 * pair.mode + 1) -= scale * pair.sigma_sin * noise(2 * p + 1);
  }
  return next;
}

State NavierStokesModel::step(const State& x, Stream& noise) const {
  State current = x;
  Eigen::VectorXd xi(forcing_noise_dim());
  for (int s = 0; s < inner_steps_; ++s) {
    for (auto& v : xi) v = noise.normal();
    current = inner_step(current, xi);
  }
  return current;
}

std::vector<std::array<NavierStokesModel::Complex, 2>> NavierStokesModel::velocity_coefficients(const State& x) const {
  std::vector<std::array<Complex, 2>> out(modes_.size());
  const Complex I(0.0, 1.0);
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const double k1 = modes_[m][0], k2 = modes_[m][1];
    const double kk = k1 * k1 + k2 * k2;
    const Complex c = coefficient(x, m);
    out[m] = {-I * k2 / kk * c, I * k1 / kk * c};
  }
  return out;
}

std::array<double, 2> NavierStokesModel::velocity(const State& x, const std::array<double, 2>& z) const {
  const auto coeffs = velocity_coefficients(x);
  Complex s1{}, s2{};
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const Complex phase = std::polar(1.0, modes_[m][0] * z[0] + modes_[m][1] * z[1]);
    s1 += coeffs[m][0] * phase;
    s2 += coeffs[m][1] * phase;
  }
  return {s1.real() / M_PI, s2.real() / M_PI};
}

Observation NavierStokesModel::observation_mean(const State& x) const {
  Observation y(2 * static_cast<Eigen::Index>(params_.obs_points.size()));
  for (std::size_t i = 0; i < params_.obs_points.size(); ++i) {
    const auto u = velocity(x, params_.obs_points[i]);
    y(2 * static_cast<Eigen::Index>(i)) = u[0];
    y(2 * static_cast<Eigen::Index>(i) + 1) = u[1];
  }
  return y;
}

Observation NavierStokesModel::observe(const State& x, Stream& noise) const {
  Observation y = observation_mean(x);
  const double sd = std::sqrt(params_.obs_variance);
  for (auto& v : y) v += sd * noise.normal();
  return y;
}

double NavierStokesModel::obs_log_density(const State& x, const Observation& y) const {
  const Eigen::VectorXd r = y - observation_mean(x);
  const double var = params_.obs_variance;
  return -0.5 * r.squaredNorm() / var - 0.5 * static_cast<double>(r.size()) * std::log(2.0 * M_PI * var);
}

namespace {

Eigen::VectorXd component_lengths(const std::vector<WaveVector>& modes) {
  Eigen::VectorXd w(2 * static_cast<Eigen::Index>(modes.size()));
  for (std::size_t m = 0; m < modes.size(); ++m)
    w(2 * static_cast<Eigen::Index>(m)) = w(2 * static_cast<Eigen::Index>(m) + 1) = std::sqrt(double(norm_sq(modes[m])));
  return w;
}

}  // namespace

MetricSpec NavierStokesModel::metric() const {
  const Eigen::VectorXd lengths = component_lengths(modes_);
  return MetricSpec::sobolev(0.0, lengths, Eigen::VectorXd::Constant(lengths.size(), 2.0));
}

MetricSpec NavierStokesModel::strong_metric() const {
  const Eigen::VectorXd lengths = component_lengths(modes_);
  return MetricSpec::sobolev(1.0, lengths, Eigen::VectorXd::Constant(lengths.size(), 2.0));
}

double NavierStokesModel::l2_norm_sq(const State& x) const { return 2.0 * x.squaredNorm(); }

double NavierStokesModel::h1_norm_sq(const State& x) const {
  double s = 0.0;
  for (std::size_t m = 0; m < modes_.size(); ++m) s += norm_sq(modes_[m]) * std::norm(coefficient(x, m));
  return 2.0 * s;
}

double NavierStokesModel::energy_injection() const {
  double s = 0.0;
  for (const auto& f : params_.forcing) s += f.sigma * f.sigma;
  return 2.0 * M_PI * M_PI * s;
}

State NavierStokesModel::sample_stationary(Stream& noise) const {
  State x = State::Zero(state_dim());
  for (int n = 0; n < params_.burn_in; ++n) x = step(x, noise);
  return x;
}

std::optional<Eigen::MatrixXd> NavierStokesModel::observation_covariance() const {
  const auto n = 2 * static_cast<Eigen::Index>(params_.obs_points.size());
  return Eigen::MatrixXd(params_.obs_variance * Eigen::MatrixXd::Identity(n, n));
}

}  // namespace ergolab
