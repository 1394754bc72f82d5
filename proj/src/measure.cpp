#include "rmtldp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "rmtldp/errors.hpp"
#include "rmtldp/numerics.hpp"

namespace rmtldp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMassTol = 1e-12;

bool same_location(double a, double b) {
  return std::abs(a - b) <= 1e-14 * std::max({1.0, std::abs(a), std::abs(b)});
}

double interp_table(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.end()) return ys.back();
  const auto k = static_cast<std::size_t>(it - xs.begin());
  if (k == 0) return ys.front();
  const double x0 = xs[k - 1];
  const double x1 = xs[k];
  if (x == x0) return ys[k - 1];
  const double t = (x - x0) / (x1 - x0);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

// Exact CDF of the normalised shape, for kinds that have one.
double shape_cdf(const DensityPart& p, double x) {
  switch (p.kind) {
    case DensityKind::semicircle: {
      const double u = std::clamp((x - p.params.center) / p.params.radius, -1.0, 1.0);
      return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / kPi;
    }
    case DensityKind::uniform:
      return std::clamp((x - p.params.a) / (p.params.b - p.params.a), 0.0, 1.0);
    case DensityKind::table:
      break;
  }
  throw DomainError("shape_cdf: table densities have no closed-form CDF");
}

bool near_support(const DensityPart& p, double z) {
  const double span = p.support.hi - p.support.lo;
  return z - p.support.hi <= 2.0 * span && p.support.lo - z <= 2.0 * span;
}

double part_stieltjes(const DensityPart& p, double z) {
  if (p.has_closed_form() && near_support(p, z)) {
    if (p.kind == DensityKind::semicircle) {
      const double r = p.params.radius;
      const double w = z - p.params.center;
      const double root = std::sqrt(w * w - r * r);
      return p.mass * 2.0 / (r * r) * (w > 0 ? w - root : w + root);
    }
    const double a = p.params.a;
    const double b = p.params.b;
    return p.mass / (b - a) * std::log((z - a) / (z - b));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) s += p.weights[i] / (z - p.nodes[i]);
  return s;
}

double part_stieltjes_derivative(const DensityPart& p, double z) {
  if (p.has_closed_form() && near_support(p, z)) {
    if (p.kind == DensityKind::semicircle) {
      const double r = p.params.radius;
      const double w = z - p.params.center;
      const double root = std::sqrt(w * w - r * r);
      return p.mass * 2.0 / (r * r) * (w > 0 ? 1.0 - w / root : 1.0 + w / root);
    }
    const double a = p.params.a;
    const double b = p.params.b;
    return p.mass / (b - a) * (1.0 / (z - a) - 1.0 / (z - b));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const double d = z - p.nodes[i];
    s -= p.weights[i] / (d * d);
  }
  return s;
}

using cplx = std::complex<double>;

bool near_support(const DensityPart& p, cplx z) {
  const double mid = 0.5 * (p.support.lo + p.support.hi);
  return std::abs(z - mid) <= 3.0 * (p.support.hi - p.support.lo);
}

cplx part_stieltjes(const DensityPart& p, cplx z) {
  if (p.has_closed_form() && near_support(p, z)) {
    if (p.kind == DensityKind::semicircle) {
      const double r = p.params.radius;
      const cplx w = z - p.params.center;
      return p.mass * 2.0 / (r * r) * (w - std::sqrt(w - r) * std::sqrt(w + r));
    }
    const double a = p.params.a;
    const double b = p.params.b;
    return p.mass / (b - a) * (std::log(z - a) - std::log(z - b));
  }
  cplx s = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) s += p.weights[i] / (z - p.nodes[i]);
  return s;
}

cplx part_stieltjes_derivative(const DensityPart& p, cplx z) {
  if (p.has_closed_form() && near_support(p, z)) {
    if (p.kind == DensityKind::semicircle) {
      const double r = p.params.radius;
      const cplx w = z - p.params.center;
      return p.mass * 2.0 / (r * r) * (1.0 - w / (std::sqrt(w - r) * std::sqrt(w + r)));
    }
    const double a = p.params.a;
    const double b = p.params.b;
    return p.mass / (b - a) * (1.0 / (z - a) - 1.0 / (z - b));
  }
  cplx s = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const cplx d = z - p.nodes[i];
    s -= p.weights[i] / (d * d);
  }
  return s;
}

void check_complex_argument(cplx z) {
  if (z.imag() == 0.0) {
    throw DomainError("stieltjes: complex argument must have nonzero imaginary part");
  }
}

}  // namespace

double DensityPart::shape(double x) const {
  switch (kind) {
    case DensityKind::semicircle: {
      const double r = params.radius;
      const double d = x - params.center;
      const double q = r * r - d * d;
      return q > 0 ? 2.0 / (kPi * r * r) * std::sqrt(q) : 0.0;
    }
    case DensityKind::uniform:
      return (x >= params.a && x <= params.b) ? 1.0 / (params.b - params.a) : 0.0;
    case DensityKind::table:
      return interp_table(params.table_x, params.table_density, x);
  }
  return 0.0;
}

bool DensityPart::has_closed_form() const {
  switch (kind) {
    case DensityKind::semicircle:
      return same_location(support.lo, params.center - params.radius) &&
             same_location(support.hi, params.center + params.radius);
    case DensityKind::uniform:
      return same_location(support.lo, params.a) && same_location(support.hi, params.b);
    case DensityKind::table:
      return false;
  }
  return false;
}

std::vector<double> SpectralMeasure::angle_nodes(Interval support, int n) {
  const auto rule = numerics::gauss_legendre(n);
  const double mid = 0.5 * (support.lo + support.hi);
  const double half = 0.5 * (support.hi - support.lo);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double phi = 0.5 * kPi * (rule.nodes[i] + 1.0);
    xs[i] = std::clamp(mid - half * std::cos(phi), support.lo, support.hi);
  }
  return xs;
}

DensityPart SpectralMeasure::make_part(DensityKind kind, DensityParams params,
                                       Interval support, double scale, int nodes,
                                       bool left_integrable, bool right_integrable) {
  if (nodes < 1) throw DomainError("density part needs at least one node");
  if (!(support.lo < support.hi) || !std::isfinite(support.lo) || !std::isfinite(support.hi)) {
    throw DomainError("density part needs a finite support interval with lo < hi");
  }
  if (!(scale > 0) || !std::isfinite(scale)) throw DomainError("density scale must be positive");
  if (kind == DensityKind::semicircle && !(params.radius > 0)) {
    throw DomainError("semicircle radius must be positive");
  }
  if (kind == DensityKind::uniform && !(params.a < params.b)) {
    throw DomainError("uniform density needs a < b");
  }
  if (kind == DensityKind::table) {
    const auto& xs = params.table_x;
    if (xs.size() < 2 || xs.size() != params.table_density.size()) {
      throw DomainError("table density needs >= 2 (x, density) pairs of equal length");
    }
    if (!std::is_sorted(xs.begin(), xs.end())) throw DomainError("table x must be sorted");
  }

  DensityPart p;
  p.kind = kind;
  p.params = std::move(params);
  p.support = support;
  p.scale = scale;
  p.node_count = nodes;
  p.left_edge_integrable = left_integrable;
  p.right_edge_integrable = right_integrable;

  const auto rule = numerics::gauss_legendre(nodes);
  const double mid = 0.5 * (support.lo + support.hi);
  const double half = 0.5 * (support.hi - support.lo);
  p.nodes.resize(nodes);
  p.weights.resize(nodes);
  p.cell_bounds.resize(nodes + 1);
  p.cell_mass.resize(nodes);
  double phi_acc = 0.0;
  p.cell_bounds[0] = support.lo;
  for (int i = 0; i < nodes; ++i) {
    const double phi = 0.5 * kPi * (rule.nodes[i] + 1.0);
    const double wphi = 0.5 * kPi * rule.weights[i];
    const double x = std::clamp(mid - half * std::cos(phi), support.lo, support.hi);
    const double value = p.shape(x);
    if (!(value >= 0) || !std::isfinite(value)) {
      throw DomainError("negative or non-finite density sample " + std::to_string(value) +
                        " at x = " + std::to_string(x));
    }
    p.nodes[i] = x;
    p.weights[i] = scale * value * half * std::sin(phi) * wphi;
    phi_acc += wphi;
    p.cell_bounds[i + 1] = std::clamp(mid - half * std::cos(phi_acc), support.lo, support.hi);
  }
  p.cell_bounds.back() = support.hi;

  const double quad_mass = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  if (kind == DensityKind::table) {
    p.cell_mass = p.weights;
    p.mass = quad_mass;
  } else {
    double prev = shape_cdf(p, support.lo);
    for (int i = 0; i < nodes; ++i) {
      const double next = shape_cdf(p, p.cell_bounds[i + 1]);
      p.cell_mass[i] = scale * (next - prev);
      prev = next;
    }
    p.mass = scale * (shape_cdf(p, support.hi) - shape_cdf(p, support.lo));
    if (quad_mass > 0) {
      for (auto& w : p.weights) w *= p.mass / quad_mass;
    }
  }
  if (!(p.mass > 0)) throw DomainError("density part has zero total mass");
  return p;
}

SpectralMeasure SpectralMeasure::compose(std::vector<Atom> atoms, std::vector<DensityPart> parts) {
  SpectralMeasure m;
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const auto& a : atoms) {
    if (!(a.weight > 0) || !std::isfinite(a.location)) {
      throw DomainError("atom weights must be positive and locations finite");
    }
    if (!m.atoms_.empty() && same_location(m.atoms_.back().location, a.location)) {
      m.atoms_.back().weight += a.weight;
    } else {
      m.atoms_.push_back(a);
    }
  }
  m.parts_ = std::move(parts);
  if (m.atoms_.empty() && m.parts_.empty()) throw DomainError("measure has no mass");
  const double total = m.total_mass();
  if (std::abs(total - 1.0) > kMassTol) {
    throw DomainError("total mass " + std::to_string(total) + " differs from 1");
  }
  m.finalize();
  return m;
}

void SpectralMeasure::finalize() {
  left_ = HUGE_VAL;
  right_ = -HUGE_VAL;
  for (const auto& a : atoms_) {
    left_ = std::min(left_, a.location);
    right_ = std::max(right_, a.location);
  }
  for (const auto& p : parts_) {
    left_ = std::min(left_, p.support.lo);
    right_ = std::max(right_, p.support.hi);
    for (double x : p.nodes) {
      if (x < p.support.lo || x > p.support.hi) throw DomainError("node outside support");
    }
  }

  std::vector<double> xs;
  for (const auto& a : atoms_) xs.push_back(a.location);
  for (const auto& p : parts_) xs.insert(xs.end(), p.cell_bounds.begin(), p.cell_bounds.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  knot_x_ = xs;
  knot_at_.assign(xs.size(), 0.0);
  knot_below_.assign(xs.size(), 0.0);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    double f = 0.0;
    double jump = 0.0;
    for (const auto& a : atoms_) {
      if (a.location <= x) f += a.weight;
      if (a.location == x) jump += a.weight;
    }
    for (const auto& p : parts_) {
      if (x <= p.support.lo) continue;
      if (x >= p.support.hi) {
        f += std::accumulate(p.cell_mass.begin(), p.cell_mass.end(), 0.0);
        continue;
      }
      auto it = std::upper_bound(p.cell_bounds.begin(), p.cell_bounds.end(), x);
      const auto cell = static_cast<std::size_t>(it - p.cell_bounds.begin()) - 1;
      f += std::accumulate(p.cell_mass.begin(), p.cell_mass.begin() + cell, 0.0);
      const double b0 = p.cell_bounds[cell];
      const double b1 = p.cell_bounds[cell + 1];
      if (b1 > b0) f += p.cell_mass[cell] * (x - b0) / (b1 - b0);
    }
    knot_at_[k] = f;
    knot_below_[k] = f - jump;
  }
}

SpectralMeasure SpectralMeasure::from_atoms(std::span<const double> locations,
                                            std::span<const double> weights) {
  if (locations.empty()) throw DomainError("from_atoms: empty input");
  if (locations.size() != weights.size()) {
    throw DomainError("from_atoms: locations and weights differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0) || !std::isfinite(w)) throw DomainError("from_atoms: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTol) {
    throw DomainError("from_atoms: weights sum to " + std::to_string(total) + ", not 1");
  }
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    atoms.push_back({locations[i], weights[i] / total});
  }
  return compose(std::move(atoms), {});
}

SpectralMeasure SpectralMeasure::from_density(const std::function<double(double)>& density,
                                              Interval support, int nodes_per_interval,
                                              const DensityOptions& options) {
  if (nodes_per_interval < 1) throw DomainError("from_density: need at least one node");
  if (!(support.lo < support.hi)) throw DomainError("from_density: empty support");
  // Sample at the angle-mapped nodes plus both endpoints; the stored table
  // interpolates linearly and reproduces the samples exactly at the nodes.
  const auto nodes = angle_nodes(support, nodes_per_interval);
  DensityParams params;
  params.table_x.reserve(nodes.size() + 2);
  params.table_x.push_back(support.lo);
  params.table_x.insert(params.table_x.end(), nodes.begin(), nodes.end());
  params.table_x.push_back(support.hi);
  for (double x : params.table_x) params.table_density.push_back(density(x));
  for (std::size_t i = 1; i + 1 < params.table_x.size(); ++i) {
    const double v = params.table_density[i];
    if (!(v >= 0) || !std::isfinite(v)) {
      throw DomainError("from_density: negative density sample " + std::to_string(v) +
                        " at x = " + std::to_string(params.table_x[i]));
    }
  }
  auto& d = params.table_density;
  if (!(d.front() >= 0) || !std::isfinite(d.front())) d.front() = d[1];
  if (!(d.back() >= 0) || !std::isfinite(d.back())) d.back() = d[d.size() - 2];

  auto raw = make_part(DensityKind::table, params, support, 1.0, nodes_per_interval,
                       options.left_edge_integrable, options.right_edge_integrable);
  if (!(raw.mass > 0)) throw DomainError("from_density: zero total mass");
  auto part = make_part(DensityKind::table, std::move(params), support, 1.0 / raw.mass,
                        nodes_per_interval, options.left_edge_integrable,
                        options.right_edge_integrable);
  // Absorb rounding so the total is 1 to the last bit the sum allows.
  const double mass = std::accumulate(part.weights.begin(), part.weights.end(), 0.0);
  for (auto& w : part.weights) w /= mass;
  part.cell_mass = part.weights;
  part.mass = 1.0;
  SpectralMeasure m = compose({}, {std::move(part)});
  m.raw_mass_ = raw.mass;
  return m;
}

SpectralMeasure SpectralMeasure::semicircle(double center, double radius, int nodes) {
  DensityParams params;
  params.center = center;
  params.radius = radius;
  auto part = make_part(DensityKind::semicircle, params, {center - radius, center + radius}, 1.0,
                        nodes, true, true);
  return compose({}, {std::move(part)});
}

SpectralMeasure SpectralMeasure::uniform(double a, double b, int nodes) {
  DensityParams params;
  params.a = a;
  params.b = b;
  auto part = make_part(DensityKind::uniform, params, {a, b}, 1.0, nodes, false, false);
  return compose({}, {std::move(part)});
}

SpectralMeasure SpectralMeasure::table(std::vector<double> x, std::vector<double> density,
                                       int nodes, bool left_edge_integrable,
                                       bool right_edge_integrable) {
  DensityParams params;
  if (x.size() < 2) throw DomainError("table density needs at least two points");
  const Interval support{x.front(), x.back()};
  params.table_x = std::move(x);
  params.table_density = std::move(density);
  auto raw = make_part(DensityKind::table, params, support, 1.0, nodes, left_edge_integrable,
                       right_edge_integrable);
  auto part = make_part(DensityKind::table, std::move(params), support, 1.0 / raw.mass, nodes,
                        left_edge_integrable, right_edge_integrable);
  const double mass = std::accumulate(part.weights.begin(), part.weights.end(), 0.0);
  for (auto& w : part.weights) w /= mass;
  part.cell_mass = part.weights;
  part.mass = 1.0;
  SpectralMeasure m = compose({}, {std::move(part)});
  m.raw_mass_ = raw.mass;
  return m;
}

double SpectralMeasure::atom_mass(double x) const {
  for (const auto& a : atoms_) {
    if (same_location(a.location, x)) return a.weight;
  }
  return 0.0;
}

double SpectralMeasure::total_mass() const {
  double total = 0.0;
  for (const auto& a : atoms_) total += a.weight;
  for (const auto& p : parts_) total += p.mass;
  return total;
}

double SpectralMeasure::stieltjes(double z) const {
  if (!(z > right_ || z < left_)) {
    throw DomainError("stieltjes: real z = " + std::to_string(z) + " lies inside [" +
                      std::to_string(left_) + ", " + std::to_string(right_) +
                      "]; use a complex argument");
  }
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight / (z - a.location);
  for (const auto& p : parts_) s += part_stieltjes(p, z);
  return s;
}

std::complex<double> SpectralMeasure::stieltjes(std::complex<double> z) const {
  check_complex_argument(z);
  cplx s = 0.0;
  for (const auto& a : atoms_) s += a.weight / (z - a.location);
  for (const auto& p : parts_) s += part_stieltjes(p, z);
  return s;
}

double SpectralMeasure::stieltjes_derivative(double z) const {
  if (!(z > right_ || z < left_)) {
    throw DomainError("stieltjes_derivative: real z inside the support");
  }
  double s = 0.0;
  for (const auto& a : atoms_) {
    const double d = z - a.location;
    s -= a.weight / (d * d);
  }
  for (const auto& p : parts_) s += part_stieltjes_derivative(p, z);
  return s;
}

std::complex<double> SpectralMeasure::stieltjes_derivative(std::complex<double> z) const {
  check_complex_argument(z);
  cplx s = 0.0;
  for (const auto& a : atoms_) {
    const cplx d = z - a.location;
    s -= a.weight / (d * d);
  }
  for (const auto& p : parts_) s += part_stieltjes_derivative(p, z);
  return s;
}

ExtendedReal SpectralMeasure::stieltjes_at_right_edge() const {
  const double r = right_;
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.location == r) return ExtendedReal::infinity();
    s += a.weight / (r - a.location);
  }
  for (const auto& p : parts_) {
    if (p.support.hi == r) {
      if (!p.right_edge_integrable) return ExtendedReal::infinity();
      if (p.has_closed_form() && p.kind == DensityKind::semicircle) {
        s += 2.0 * p.mass / p.params.radius;
        continue;
      }
      for (std::size_t i = 0; i < p.nodes.size(); ++i) s += p.weights[i] / (r - p.nodes[i]);
    } else {
      s += part_stieltjes(p, r);
    }
  }
  return s;
}

double SpectralMeasure::cdf(double x) const {
  if (knot_x_.empty() || x < knot_x_.front()) return 0.0;
  if (x >= knot_x_.back()) return knot_at_.back();
  auto it = std::upper_bound(knot_x_.begin(), knot_x_.end(), x);
  const auto k = static_cast<std::size_t>(it - knot_x_.begin()) - 1;
  if (x == knot_x_[k]) return knot_at_[k];
  const double t = (x - knot_x_[k]) / (knot_x_[k + 1] - knot_x_[k]);
  return knot_at_[k] + t * (knot_below_[k + 1] - knot_at_[k]);
}

double SpectralMeasure::cdf_left(double x) const {
  auto it = std::lower_bound(knot_x_.begin(), knot_x_.end(), x);
  if (it != knot_x_.end() && *it == x) {
    return knot_below_[static_cast<std::size_t>(it - knot_x_.begin())];
  }
  return cdf(x);
}

double SpectralMeasure::quantile(double p) const {
  if (p <= 0.0) return left_;
  auto it = std::lower_bound(knot_at_.begin(), knot_at_.end(), p);
  if (it == knot_at_.end()) return right_;
  const auto k = static_cast<std::size_t>(it - knot_at_.begin());
  if (k > 0 && knot_below_[k] >= p && knot_below_[k] > knot_at_[k - 1]) {
    const double t = (p - knot_at_[k - 1]) / (knot_below_[k] - knot_at_[k - 1]);
    return std::clamp(knot_x_[k - 1] + t * (knot_x_[k] - knot_x_[k - 1]), left_, right_);
  }
  return knot_x_[k];
}

std::pair<std::vector<Atom>, std::vector<DensityPart>> SpectralMeasure::scaled_pieces(
    double c, double mass_factor) const {
  if (c == 0.0) throw DomainError("scaled_pieces: zero scale");
  std::vector<Atom> atoms;
  for (const auto& a : atoms_) atoms.push_back({c * a.location, a.weight * mass_factor});
  std::vector<DensityPart> parts;
  for (const auto& p : parts_) {
    DensityParams q = p.params;
    Interval s{c * p.support.lo, c * p.support.hi};
    bool left_int = p.left_edge_integrable;
    bool right_int = p.right_edge_integrable;
    if (c < 0) {
      std::swap(s.lo, s.hi);
      std::swap(left_int, right_int);
    }
    switch (p.kind) {
      case DensityKind::semicircle:
        q.center *= c;
        q.radius *= std::abs(c);
        break;
      case DensityKind::uniform:
        q.a = std::min(c * p.params.a, c * p.params.b);
        q.b = std::max(c * p.params.a, c * p.params.b);
        break;
      case DensityKind::table: {
        for (auto& x : q.table_x) x *= c;
        for (auto& y : q.table_density) y /= std::abs(c);
        if (c < 0) {
          std::reverse(q.table_x.begin(), q.table_x.end());
          std::reverse(q.table_density.begin(), q.table_density.end());
        }
        break;
      }
    }
    parts.push_back(make_part(p.kind, std::move(q), s, p.scale * mass_factor, p.node_count,
                              left_int, right_int));
  }
  return {std::move(atoms), std::move(parts)};
}

SpectralMeasure SpectralMeasure::reflected() const {
  auto [atoms, parts] = scaled_pieces(-1.0, 1.0);
  return compose(std::move(atoms), std::move(parts));
}

bool operator==(const SpectralMeasure& a, const SpectralMeasure& b) {
  if (a.atoms_ != b.atoms_ || a.parts_.size() != b.parts_.size()) return false;
  for (std::size_t i = 0; i < a.parts_.size(); ++i) {
    const auto& p = a.parts_[i];
    const auto& q = b.parts_[i];
    if (p.kind != q.kind || !(p.params == q.params) || !(p.support == q.support) ||
        p.scale != q.scale || p.node_count != q.node_count ||
        p.left_edge_integrable != q.left_edge_integrable ||
        p.right_edge_integrable != q.right_edge_integrable) {
      return false;
    }
  }
  return true;
}

std::pair<SpectralMeasure, double> remove_zero_atom(const SpectralMeasure& rho, double alpha) {
  if (!(alpha > 0)) throw DomainError("remove_zero_atom: alpha must be positive");
  const double w0 = rho.atom_mass(0.0);
  if (w0 == 0.0) return {rho, alpha};
  if (rho.parts().empty() && rho.atoms().size() == 1) {
    throw DomainError("remove_zero_atom: rho is the point mass at zero (fully degenerate)");
  }
  const double keep = 1.0 - w0;
  auto [atoms, parts] = rho.scaled_pieces(keep, 1.0 / keep);
  std::erase_if(atoms, [](const Atom& a) { return a.location == 0.0; });
  // Renormalise away rounding in 1/keep.
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  for (const auto& p : parts) total += p.mass;
  for (auto& a : atoms) a.weight /= total;
  for (auto& p : parts) {
    for (auto& w : p.weights) w /= total;
    for (auto& w : p.cell_mass) w /= total;
    p.mass /= total;
    p.scale /= total;
  }
  return {SpectralMeasure::compose(std::move(atoms), std::move(parts)), alpha * keep};
}

}  // namespace rmtldp
