#pragma once

// Stochastically forced 2D Navier-Stokes on the torus [0, 2 pi)^2 in
// vorticity form, truncated spectrally. The vorticity is v = d u1/d z2 - d u2/d z1,
// so u has coefficients -i k_perp / |k|^2 c_k with k_perp = (k2, -k1).
//
// Coefficients are taken in the basis e_k(z) = exp(i k.z) / (2 pi). The state
// stores c_k = <e_k, v> for the half-plane k2 > 0 or (k2 = 0, k1 > 0), as
// (Re, Im) pairs; c_{-k} = conj(c_k) and c_0 = 0 by construction. Modes are
// retained up to |k_i| <= floor(2 k_max / 3) so that products evaluated on
// the 2 k_max x 2 k_max grid are alias-free (2/3 rule).

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "ergolab/model.hpp"

namespace ergolab {

using WaveVector = std::array<int, 2>;

struct ForcedMode {
  WaveVector k;
  double sigma;
};

struct NSParams {
  int k_max = 8;
  double viscosity = 0.5;
  std::vector<ForcedMode> forcing{{{1, 0}, 1.0}, {{-1, 0}, 1.0}, {{0, 1}, 1.0},
                                  {{0, -1}, 1.0}, {{1, 1}, 1.0}, {{-1, -1}, 1.0}};
  double inner_step = 0.01;
  double delta = 0.5;
  std::vector<std::array<double, 2>> obs_points{{0.5, 1.0}, {2.0, 4.0}, {4.5, 2.5}};
  double obs_variance = 0.05;
  double cfl_limit = 1.0;
  int burn_in = 40;  ///< sampling steps from rest used by sample_stationary
};

/// Validates the forcing-set assumptions; returns an empty string when they hold.
std::string check_forcing_set(const std::vector<ForcedMode>& forcing);

class NavierStokesModel final : public StateSpaceModel {
 public:
  using Complex = std::complex<double>;

  explicit NavierStokesModel(NSParams params = {});

  std::string name() const override { return "navier_stokes"; }
  Eigen::Index state_dim() const override { return 2 * static_cast<Eigen::Index>(modes_.size()); }

  State step(const State& x, Stream& noise) const override;
  Observation observe(const State& x, Stream& noise) const override;
  double obs_log_density(const State& x, const Observation& y) const override;
  MetricSpec metric() const override;         // L^2
  MetricSpec strong_metric() const override;  // H^1
  State sample_stationary(Stream& noise) const override;
  std::optional<Eigen::MatrixXd> observation_covariance() const override;
  Observation observation_mean(const State& x) const override;

  /// One inner step of length h with explicit standard normal noise
  /// (two entries per forced conjugate pair, see forcing_noise_dim()).
  State inner_step(const State& x, const Eigen::VectorXd& noise) const;
  Eigen::Index forcing_noise_dim() const { return 2 * static_cast<Eigen::Index>(forced_pairs_.size()); }

  /// -(u . grad v) projected on the retained modes, as a state vector.
  State nonlinear_term(const State& x) const;
  /// Velocity at an arbitrary point.
  std::array<double, 2> velocity(const State& x, const std::array<double, 2>& z) const;
  /// Spectral coefficients of the velocity, (k, u_k) over the half-plane.
  std::vector<std::array<Complex, 2>> velocity_coefficients(const State& x) const;
  /// Vorticity on the collocation grid (grid_size x grid_size).
  Eigen::MatrixXd vorticity_grid(const State& x) const;

  State from_coefficients(const std::vector<Complex>& c) const;
  Complex coefficient(const State& x, std::size_t mode) const { return {x(2 * mode), x(2 * mode + 1)}; }
  std::optional<std::size_t> mode_index(const WaveVector& k) const;

  const std::vector<WaveVector>& modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  int grid_size() const { return 2 * params_.k_max; }
  const NSParams& params() const { return params_; }
  /// 2 pi^2 sum sigma_k^2: the stationary rate of energy injection in L^2.
  double energy_injection() const;
  double l2_norm_sq(const State& x) const;
  double h1_norm_sq(const State& x) const;

 private:
  struct ForcedPair {
    std::size_t mode;
    double sigma_sin;  ///< amplitude on sin(k.z), k in the upper half-plane
    double sigma_cos;  ///< amplitude on cos(k.z) (forcing of -k)
  };

  Eigen::MatrixXcd to_full(const State& x) const;
  State from_full(const Eigen::MatrixXcd& full) const;
  Eigen::MatrixXd to_grid(const Eigen::MatrixXcd& full) const;
  Eigen::MatrixXcd from_grid(const Eigen::MatrixXd& grid) const;

  NSParams params_;
  int cutoff_;
  int inner_steps_;
  std::vector<WaveVector> modes_;
  std::vector<ForcedPair> forced_pairs_;
  Eigen::VectorXd decay_;        // per mode, exp(-nu |k|^2 h)
  Eigen::VectorXd noise_scale_;  // per mode, pi sqrt((1 - exp(-2 nu |k|^2 h)) / (2 nu |k|^2))
  Eigen::MatrixXcd synth_;       // grid x (2 cutoff + 1), exp(i k z_j)
};

}  // namespace ergolab
