#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "rmtldp/dyson.hpp"
#include "rmtldp/extended_real.hpp"
#include "rmtldp/measure.hpp"

namespace rmtldp {

/// X_N = W_N / sqrt(N) + D_N with D_N diagonal, spectral limit mu_d.
class DeformedWignerModel {
 public:
  DeformedWignerModel(SpectralMeasure mu_d, int beta, EntryLaw law);
  explicit DeformedWignerModel(SpectralMeasure mu_d, int beta = 1);

  [[nodiscard]] const SpectralMeasure& mu_d() const { return mu_d_; }
  [[nodiscard]] int beta() const { return beta_; }
  [[nodiscard]] EntryLaw entry_law() const { return law_; }
  [[nodiscard]] DeformedWignerModel with_mu_d(SpectralMeasure mu_d) const;

  friend bool operator==(const DeformedWignerModel& a, const DeformedWignerModel& b) {
    return a.beta_ == b.beta_ && a.law_ == b.law_ && a.mu_d_ == b.mu_d_;
  }

 private:
  SpectralMeasure mu_d_;
  int beta_;
  EntryLaw law_;
};

struct DWEdgeData {
  double y_c = 0.0;
  double r_edge = 0.0;
  ExtendedReal x_c_dw;
  ExtendedReal g_edge_mu_d;
};

/// K_mu(y) = G_mu^{-1}(y) for y in (0, G_mu(r(mu))].
[[nodiscard]] double k_transform(const SpectralMeasure& mu, double y);
/// H(y) = y + K_{mu_d}(y) up to G_{mu_d}(r(mu_d)), y + r(mu_d) beyond.
[[nodiscard]] double dw_h(const DeformedWignerModel& model, double y);
[[nodiscard]] DWEdgeData dw_edge(const DeformedWignerModel& model);
/// Smaller and larger roots of H(w) = x.
[[nodiscard]] std::pair<double, double> dw_branches(const DeformedWignerModel& model,
                                                    const DWEdgeData& edge, double x);
[[nodiscard]] std::pair<double, double> dw_branches(const DeformedWignerModel& model, double x);

/// beta * 1/2 int_{r_edge}^x (Gbar - G); +inf below r_edge.
[[nodiscard]] ExtendedReal dw_rate(const DeformedWignerModel& model, const DWEdgeData& edge,
                                   double x);
[[nodiscard]] ExtendedReal dw_rate(const DeformedWignerModel& model, double x);

/// Stieltjes transform of the semicircle-deformed measure at Im z > 0, from the
/// fixed point G = G_{mu_d}(z - G) by damped Newton with eta continuation.
[[nodiscard]] std::complex<double> free_convolution_stieltjes(const DeformedWignerModel& model,
                                                              std::complex<double> z);
[[nodiscard]] double free_convolution_density(const DeformedWignerModel& model, double x,
                                              double eta);
[[nodiscard]] Interval free_convolution_support(const DeformedWignerModel& model);
/// Free-convolution measure discretised on an angle-mapped grid over its support.
[[nodiscard]] SigmaGrid free_convolution_measure(const DeformedWignerModel& model,
                                                 const GridSpec& grid = {});

struct DWVariationalResult {
  double value = 0.0;
  double theta_x = 0.0;
  double scan_max = 0.0;
  double scan_argmax = 0.0;
  double mass_defect = 0.0;
};

/// beta (J(conv, theta, x) - theta^2 - J(mu_d, theta, r(mu_d))) at theta = Gbar(x)/2,
/// scan-verified like rate_variational.
[[nodiscard]] DWVariationalResult dw_rate_variational(const DeformedWignerModel& model,
                                                      const DWEdgeData& edge,
                                                      const SigmaGrid& conv, double x,
                                                      double scan_tol = 2e-3);
[[nodiscard]] double dw_rate_variational(const DeformedWignerModel& model, double x);

/// Deformation with the mass of (r - eps, r] moved onto r(mu_d).
[[nodiscard]] DeformedWignerModel dw_epsilon_cap(const DeformedWignerModel& model, double eps);

}  // namespace rmtldp
