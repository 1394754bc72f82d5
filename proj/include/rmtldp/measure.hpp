#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rmtldp/extended_real.hpp"

namespace rmtldp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Atom {
  double location = 0.0;
  double weight = 0.0;
  friend bool operator==(const Atom&, const Atom&) = default;
};

enum class DensityKind { semicircle, uniform, table };

/// Shape parameters of a density kind. Semicircle uses (center, radius), uniform
/// uses [a, b], table uses the sampled (x, density) pairs interpolated linearly.
struct DensityParams {
  double center = 0.0;
  double radius = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> table_x;
  std::vector<double> table_density;
  friend bool operator==(const DensityParams&, const DensityParams&) = default;
};

/// Absolutely continuous piece of a measure: `scale * shape(x)` restricted to
/// `support`, discretised by a Gauss-Legendre rule in the angle variable
/// x = mid - half * cos(phi). Cell boundaries partition the support with one cell
/// per node; the CDF is linear inside each cell. For semicircle and uniform kinds
/// the cell masses come from the exact CDF, otherwise they equal the weights.
struct DensityPart {
  DensityKind kind = DensityKind::table;
  DensityParams params;
  Interval support;
  double scale = 1.0;
  int node_count = 0;
  bool left_edge_integrable = false;
  bool right_edge_integrable = false;

  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> cell_bounds;
  std::vector<double> cell_mass;
  double mass = 0.0;

  /// Shape density (before `scale`) at x; zero outside the shape's natural support.
  [[nodiscard]] double shape(double x) const;
  /// True when the support is the kind's whole natural support, so that the
  /// closed-form transforms apply.
  [[nodiscard]] bool has_closed_form() const;
};

/// Options for SpectralMeasure::from_density.
struct DensityOptions {
  /// Declared finiteness of the Stieltjes transform at each support endpoint.
  bool left_edge_integrable = false;
  bool right_edge_integrable = false;
};

/// Compactly supported probability measure: sorted atoms plus zero or more
/// discretised density parts. Immutable after construction.
class SpectralMeasure {
 public:
  static SpectralMeasure from_atoms(std::span<const double> locations,
                                    std::span<const double> weights);
  static SpectralMeasure from_density(const std::function<double(double)>& density,
                                      Interval support, int nodes_per_interval,
                                      const DensityOptions& options = {});
  /// Semicircle with the given center and radius, density 2/(pi R^2) sqrt(R^2-(x-c)^2).
  static SpectralMeasure semicircle(double center, double radius, int nodes = 128);
  static SpectralMeasure uniform(double a, double b, int nodes = 128);
  /// Piecewise-linear tabulated density, renormalised to mass 1.
  static SpectralMeasure table(std::vector<double> x, std::vector<double> density, int nodes,
                               bool left_edge_integrable, bool right_edge_integrable);
  /// Assemble from parts whose masses already sum to 1; validates invariants.
  static SpectralMeasure compose(std::vector<Atom> atoms, std::vector<DensityPart> parts);

  /// The n quadrature nodes a density part on `support` uses, ascending.
  static std::vector<double> angle_nodes(Interval support, int n);

  /// Rebuild a density part's nodes, weights and cells from its defining fields.
  static DensityPart make_part(DensityKind kind, DensityParams params, Interval support,
                               double scale, int nodes, bool left_integrable,
                               bool right_integrable);

  [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
  [[nodiscard]] const std::vector<DensityPart>& parts() const { return parts_; }

  [[nodiscard]] double left_edge() const { return left_; }
  [[nodiscard]] double right_edge() const { return right_; }
  [[nodiscard]] std::pair<double, double> edges() const { return {left_, right_}; }
  [[nodiscard]] double atom_mass(double x) const;
  [[nodiscard]] double total_mass() const;
  /// Mass of the density handed to from_density before renormalisation (1 otherwise).
  [[nodiscard]] double raw_mass() const { return raw_mass_; }

  /// G(z) = int mu(dl) / (z - l) for real z outside [left_edge, right_edge].
  [[nodiscard]] double stieltjes(double z) const;
  /// G(z) for Im z != 0.
  [[nodiscard]] std::complex<double> stieltjes(std::complex<double> z) const;
  /// G'(z) for real z outside the support.
  [[nodiscard]] double stieltjes_derivative(double z) const;
  [[nodiscard]] std::complex<double> stieltjes_derivative(std::complex<double> z) const;
  /// lim_{z -> r+} G(z); +inf when an atom sits at r or a part touching r is not
  /// declared edge-integrable.
  [[nodiscard]] ExtendedReal stieltjes_at_right_edge() const;

  [[nodiscard]] double cdf(double x) const;
  /// Left limit of the CDF, mu((-inf, x)).
  [[nodiscard]] double cdf_left(double x) const;
  /// Sorted points where the CDF may change slope or jump.
  [[nodiscard]] const std::vector<double>& cdf_knots() const { return knot_x_; }
  /// Generalised inverse: smallest x with cdf(x) >= p.
  [[nodiscard]] double quantile(double p) const;

  /// Sum of f over atoms and quadrature nodes, weighted.
  template <class F>
  [[nodiscard]] auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R sum{};
    for (const auto& a : atoms_) sum += a.weight * f(a.location);
    for (const auto& p : parts_) {
      for (std::size_t i = 0; i < p.nodes.size(); ++i) sum += p.weights[i] * f(p.nodes[i]);
    }
    return sum;
  }

  /// Pushforward under x -> c x (c != 0), with the mass multiplied by `mass_factor`
  /// for use inside compose().
  [[nodiscard]] std::pair<std::vector<Atom>, std::vector<DensityPart>> scaled_pieces(
      double c, double mass_factor) const;
  /// Pushforward under x -> -x.
  [[nodiscard]] SpectralMeasure reflected() const;

  /// Equality of the defining data: atoms and each part's kind, parameters, support,
  /// scale, node count and edge flags. Derived quadrature weights are not compared.
  friend bool operator==(const SpectralMeasure& a, const SpectralMeasure& b);

 private:
  SpectralMeasure() = default;
  void finalize();

  std::vector<Atom> atoms_;
  std::vector<DensityPart> parts_;
  double left_ = 0.0;
  double right_ = 0.0;
  double raw_mass_ = 1.0;
  // CDF knots: location, F just below, F at (right-continuous).
  std::vector<double> knot_x_;
  std::vector<double> knot_below_;
  std::vector<double> knot_at_;
};

/// Remove the atom at zero: delete it, renormalise, scale locations by (1 - w0) and
/// return alpha' = alpha (1 - w0). H_{rho,alpha} and H_{tau,alpha'} coincide.
std::pair<SpectralMeasure, double> remove_zero_atom(const SpectralMeasure& rho, double alpha);


}  // namespace rmtldp
