#pragma once

#include <vector>

#include "rmtldp/dyson.hpp"
#include "rmtldp/extended_real.hpp"
#include "rmtldp/measure.hpp"

namespace rmtldp {

/// Tabulated rate function on a grid starting at r_sigma.
struct RateTable {
  std::vector<double> x_grid;
  std::vector<double> g_values;
  std::vector<double> gbar_values;
  std::vector<double> i_values;
  int beta = 1;
  EdgeData edge;

  /// Monotone (linear) interpolation of i_values; +inf below the grid, throws above it.
  [[nodiscard]] ExtendedReal interpolate(double x) const;
};

/// I(x) = (beta/2) int_{r_sigma}^x (Gbar - G) du; +inf for x < r_sigma and, when
/// r(rho) <= 0, for x >= 0. Throws DegenerateModelError for degenerate models.
[[nodiscard]] ExtendedReal rate(const CovarianceModel& model, double x);
[[nodiscard]] ExtendedReal rate(const CovarianceModel& model, const EdgeData& edge, double x);

/// (beta/2) (Gbar - G) at x, the derivative of the rate function.
[[nodiscard]] double rate_derivative(const CovarianceModel& model, const EdgeData& edge, double x);

/// Rate function of a degenerate model: 0 at x = 0, +inf elsewhere.
[[nodiscard]] ExtendedReal rate_degenerate(double x);

/// Rate at each point of an ascending grid whose first point is >= r_sigma, by
/// cumulative quadrature over consecutive segments (parallel over segments).
[[nodiscard]] std::vector<double> rate_on_grid(const CovarianceModel& model, const EdgeData& edge,
                                               const std::vector<double>& xs);
[[nodiscard]] std::vector<double> rate_on_grid_serial(const CovarianceModel& model,
                                                      const EdgeData& edge,
                                                      const std::vector<double>& xs);

/// v(mu, theta, lambda).
[[nodiscard]] double v_fn(const SpectralMeasure& mu, double theta, double lambda);
/// J(mu, theta, lambda) = theta v - 1/2 int log(1 + 2 theta v - 2 theta y) mu(dy).
[[nodiscard]] double j_fn(const SpectralMeasure& mu, double theta, double lambda);
/// F(rho, theta) = -(alpha/2) int log(1 - theta t / alpha) rho(dt).
[[nodiscard]] double f_fn(const CovarianceModel& model, double theta);

struct VariationalResult {
  double value = 0.0;        ///< I(x, theta_x), scaled by beta / 1
  double theta_x = 0.0;      ///< Gbar(x)
  double scan_max = 0.0;     ///< largest value found by the theta scan
  double scan_argmax = 0.0;
  double mass_defect = 0.0;  ///< of the sigma grid used for J
};

/// Variational rate J(sigma, theta/2, x) - F(rho, theta) at theta = Gbar(x), with a
/// 50-point log scan plus golden-section refinement checking that no theta beats it
/// by more than `scan_tol`. Throws SolverError if it does or if the sigma grid mass
/// defect exceeds 1e-3.
[[nodiscard]] VariationalResult rate_variational(const CovarianceModel& model, const EdgeData& edge,
                                                 const SigmaGrid& sigma, double x,
                                                 double scan_tol = 2e-3);
[[nodiscard]] double rate_variational(const CovarianceModel& model, double x);

struct TruncationResult {
  SpectralMeasure measure;
  double eps_used = 0.0;
  bool nudged = false;
};

/// Collapse the mass of rho in (r - eps, r] onto an atom at r. eps is nudged up by
/// 1e-9 (r - l) when r - eps falls on an atom. A point mass is returned unchanged.
[[nodiscard]] TruncationResult epsilon_truncate(const SpectralMeasure& rho, double eps);

[[nodiscard]] RateTable rate_table(const CovarianceModel& model, double x_max, int points);
[[nodiscard]] RateTable rate_table_serial(const CovarianceModel& model, double x_max, int points);

struct ApproxEntry {
  double eps = 0.0;
  double eps_used = 0.0;
  bool nudged = false;
  double r_sigma_eps = 0.0;
  std::vector<double> i_values;  ///< I^(eps) on the sweep grid
  double sup_error = 0.0;
  double max_excess = 0.0;       ///< max over the grid of I^(eps) - I
};

struct ApproxReport {
  std::vector<double> x_grid;
  std::vector<double> i_values;  ///< I on the sweep grid
  double r_sigma = 0.0;
  std::vector<ApproxEntry> entries;  ///< in the order of the eps list
  bool dominated = true;             ///< I^(eps) <= I + domination_tol everywhere
  bool r_monotone = true;            ///< r(sigma^(eps)) nondecreasing in eps
};

/// Rate functions of the eps-truncated models on x_grid, compared with the exact one.
[[nodiscard]] ApproxReport approx_sweep(const CovarianceModel& model, const std::vector<double>& eps,
                                        const std::vector<double>& x_grid,
                                        double domination_tol = 1e-9);

}  // namespace rmtldp
