#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rmtldp/extended_real.hpp"
#include "rmtldp/measure.hpp"

namespace rmtldp {

enum class EntryLaw { gaussian, rademacher, uniform_sqrt3, complex_gaussian, complex_rademacher };

[[nodiscard]] bool is_complex(EntryLaw law);
[[nodiscard]] bool is_gaussian(EntryLaw law);
[[nodiscard]] std::string to_string(EntryLaw law);
[[nodiscard]] EntryLaw entry_law_from_string(const std::string& name);

/// Generalised sample covariance ensemble H_N = (1/M) Z^* Gamma Z with M ~ alpha N,
/// spectral limit of Gamma given by rho.
class CovarianceModel {
 public:
  CovarianceModel(SpectralMeasure rho, double alpha, int beta, EntryLaw law);
  /// Gaussian entries of the matching symmetry class.
  CovarianceModel(SpectralMeasure rho, double alpha, int beta = 1);

  [[nodiscard]] const SpectralMeasure& rho() const { return rho_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] int beta() const { return beta_; }
  [[nodiscard]] EntryLaw entry_law() const { return law_; }

  /// Same model with a different rho (used by truncation and reflection).
  [[nodiscard]] CovarianceModel with_rho(SpectralMeasure rho) const;

  friend bool operator==(const CovarianceModel& a, const CovarianceModel& b) {
    return a.alpha_ == b.alpha_ && a.beta_ == b.beta_ && a.law_ == b.law_ && a.rho_ == b.rho_;
  }

 private:
  SpectralMeasure rho_;
  double alpha_;
  int beta_;
  EntryLaw law_;
};

enum class EdgeCase { pos_edge_infinite_xc, pos_edge_finite_xc, nonpos_edge };
[[nodiscard]] std::string to_string(EdgeCase c);

struct Thresholds {
  ExtendedReal theta_max;
  ExtendedReal x_c;
};

/// Solved quantities at the right edge of sigma. Only theta_max is set when the
/// model is degenerate.
struct EdgeData {
  ExtendedReal theta_max;
  bool degenerate = false;
  std::optional<ExtendedReal> x_c;
  std::optional<double> theta_c;
  std::optional<double> r_sigma;
  std::optional<EdgeCase> case_tag;
};

/// H_rho(theta) = 1/theta + int alpha u / (alpha - theta u) rho(du), 0 < theta < theta_max.
[[nodiscard]] double h_rho(const CovarianceModel& model, double theta);
/// Analytic continuation of H_rho to complex arguments.
[[nodiscard]] std::complex<double> h_rho(const CovarianceModel& model, std::complex<double> theta);
/// theta^2 H_rho'(theta) = -1 + alpha int u^2 theta^2 / (alpha - u theta)^2 rho(du).
[[nodiscard]] double f_rho(const CovarianceModel& model, double theta);

[[nodiscard]] ExtendedReal theta_max(const CovarianceModel& model);
/// theta_max and x_c; x_c from the closed form, cross-checked against H_rho near theta_max.
[[nodiscard]] Thresholds thresholds(const CovarianceModel& model);
/// r(rho) <= 0 and alpha (1 - rho({0})) <= 1.
[[nodiscard]] bool detect_degenerate(const CovarianceModel& model);
[[nodiscard]] EdgeData edge_solve(const CovarianceModel& model);

/// Stieltjes transform of sigma on [r_sigma, inf): the root of H_rho(y) = x in (0, theta_c].
[[nodiscard]] double g_sigma(const EdgeData& edge, const CovarianceModel& model, double x);
/// Second branch: root of H_rho(y) = x in [theta_c, theta_max), capped at theta_max
/// for x >= x_c.
[[nodiscard]] double g_bar_sigma(const EdgeData& edge, const CovarianceModel& model, double x);
/// Upper end of the domain of the second branch (0 when r(rho) <= 0, else +inf).
[[nodiscard]] ExtendedReal g_bar_domain_end(const CovarianceModel& model);

/// Stieltjes transform of sigma at complex z (Im z > 0), continued down from
/// large imaginary part.
[[nodiscard]] std::complex<double> g_sigma_complex(const CovarianceModel& model,
                                                  std::complex<double> z);
/// Mass of the atom of sigma at zero: max(0, 1 - alpha (1 - rho({0}))).
[[nodiscard]] double sigma_zero_atom(const CovarianceModel& model);
/// Absolutely continuous density of sigma at x from -Im G(x + i eta) / pi, with the
/// smoothed zero atom removed.
[[nodiscard]] double sigma_density(const CovarianceModel& model, double x, double eta);

/// Edges of the support of sigma; the left edge is obtained from the reflected model.
[[nodiscard]] Interval sigma_support(const CovarianceModel& model);

struct GridSpec {
  int points = 2000;
  /// eta as a fraction of the grid span.
  double eta_relative = 1e-5;
};

/// sigma discretised on an angle-mapped grid over its support.
struct SigmaGrid {
  SpectralMeasure measure;
  double mass_defect = 0.0;
  double eta = 0.0;
  Interval support;
};

/// Densities at the given points; OpenMP-parallel over points.
[[nodiscard]] std::vector<double> sigma_density_grid(const CovarianceModel& model,
                                                     const std::vector<double>& xs,
                                                     double eta);
/// Serial reference for sigma_density_grid.
[[nodiscard]] std::vector<double> sigma_density_grid_serial(const CovarianceModel& model,
                                                            const std::vector<double>& xs,
                                                            double eta);

/// Table measure on `support` from density(x, eta) at angle-mapped nodes, plus an
/// atom at zero of mass `zero_atom`; eta shrinks near the support edges.
[[nodiscard]] SigmaGrid grid_measure(Interval support, double zero_atom, const GridSpec& grid,
                                     const std::function<double(double, double)>& density);

[[nodiscard]] SigmaGrid sigma_measure(const CovarianceModel& model, const GridSpec& grid = {});

}  // namespace rmtldp
