#include "rmtldp/dyson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rmtldp/errors.hpp"
#include "rmtldp/numerics.hpp"
#include "rmtldp/parallel.hpp"

namespace rmtldp {

namespace {

using cplx = std::complex<double>;

// Fraction of theta_max kept clear of the pole when probing from below.
constexpr double kPoleGap = 1e-14;
// Cap margin below theta_max for the second branch of a finite-x_c model.
constexpr double kCapGap = 1e-10;
// eta at a grid point is at most this fraction of its distance to the nearest edge.
constexpr double kEdgeEtaFraction = 1e-2;

double root_tol(double scale) { return std::min(1e-12, 1e-14 * std::max(scale, 1e-300)); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool is_complex(EntryLaw law) {
  return law == EntryLaw::complex_gaussian || law == EntryLaw::complex_rademacher;
}

bool is_gaussian(EntryLaw law) {
  return law == EntryLaw::gaussian || law == EntryLaw::complex_gaussian;
}

std::string to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::gaussian: return "gaussian";
    case EntryLaw::rademacher: return "rademacher";
    case EntryLaw::uniform_sqrt3: return "uniform_sqrt3";
    case EntryLaw::complex_gaussian: return "complex_gaussian";
    case EntryLaw::complex_rademacher: return "complex_rademacher";
  }
  return "?";
}

EntryLaw entry_law_from_string(const std::string& name) {
  for (auto law : {EntryLaw::gaussian, EntryLaw::rademacher, EntryLaw::uniform_sqrt3,
                   EntryLaw::complex_gaussian, EntryLaw::complex_rademacher}) {
    if (to_string(law) == name) return law;
  }
  throw DomainError("unknown entry law '" + name + "'");
}

std::string to_string(EdgeCase c) {
  switch (c) {
    case EdgeCase::pos_edge_infinite_xc: return "pos_edge_infinite_xc";
    case EdgeCase::pos_edge_finite_xc: return "pos_edge_finite_xc";
    case EdgeCase::nonpos_edge: return "nonpos_edge";
  }
  return "?";
}

CovarianceModel::CovarianceModel(SpectralMeasure rho, double alpha, int beta, EntryLaw law)
    : rho_(std::move(rho)), alpha_(alpha), beta_(beta), law_(law) {
  if (!(alpha_ > 0) || !std::isfinite(alpha_)) throw DomainError("alpha must be positive");
  if (beta_ != 1 && beta_ != 2) throw DomainError("beta must be 1 or 2");
  if ((beta_ == 2) != is_complex(law_)) {
    throw DomainError("beta = 2 requires a complex entry law and beta = 1 a real one");
  }
  if (!is_gaussian(law_) && rho_.left_edge() < 0) {
    throw DomainError("non-Gaussian entries require the support of rho in [0, inf)");
  }
}

CovarianceModel::CovarianceModel(SpectralMeasure rho, double alpha, int beta)
    : CovarianceModel(std::move(rho), alpha, beta,
                      beta == 2 ? EntryLaw::complex_gaussian : EntryLaw::gaussian) {}

CovarianceModel CovarianceModel::with_rho(SpectralMeasure rho) const {
  const EntryLaw law = (!is_gaussian(law_) && rho.left_edge() < 0)
                           ? (beta_ == 2 ? EntryLaw::complex_gaussian : EntryLaw::gaussian)
                           : law_;
  return CovarianceModel(std::move(rho), alpha_, beta_, law);
}

ExtendedReal theta_max(const CovarianceModel& model) {
  const double r = model.rho().right_edge();
  if (r > 0) return model.alpha() / r;
  return ExtendedReal::infinity();
}

double h_rho(const CovarianceModel& model, double theta) {
  const auto tmax = theta_max(model);
  if (!(theta > 0) || !(ExtendedReal(theta) < tmax)) {
    throw DomainError("h_rho: theta = " + fmt(theta) + " outside (0, theta_max)");
  }
  // int alpha u / (alpha - theta u) rho(du) = z (z G(z) - 1) with z = alpha / theta.
  const double z = model.alpha() / theta;
  if (!(z > model.rho().right_edge())) {
    throw DomainError("h_rho: theta = " + fmt(theta) + " too close to theta_max");
  }
  const double g = model.rho().stieltjes(z);
  return 1.0 / theta + z * (z * g - 1.0);
}

std::complex<double> h_rho(const CovarianceModel& model, std::complex<double> theta) {
  const cplx z = model.alpha() / theta;
  const cplx g = model.rho().stieltjes(z);
  return 1.0 / theta + z * (z * g - 1.0);
}

namespace {

// dH/dtheta at complex theta.
cplx h_rho_derivative(const CovarianceModel& model, cplx theta) {
  const double alpha = model.alpha();
  const cplx z = alpha / theta;
  const cplx g = model.rho().stieltjes(z);
  const cplx dg = model.rho().stieltjes_derivative(z);
  return -1.0 / (theta * theta) - (z * z / alpha) * (2.0 * z * g + z * z * dg - 1.0);
}

}  // namespace

double f_rho(const CovarianceModel& model, double theta) {
  const double alpha = model.alpha();
  const double z = alpha / theta;
  if (!(theta > 0) || !(z > model.rho().right_edge())) {
    throw DomainError("f_rho: theta = " + fmt(theta) + " outside (0, theta_max)");
  }
  const double g = model.rho().stieltjes(z);
  const double dg = model.rho().stieltjes_derivative(z);
  return -1.0 + alpha * (-z * z * dg - 2.0 * z * g + 1.0);
}

Thresholds thresholds(const CovarianceModel& model) {
  Thresholds t{theta_max(model), ExtendedReal::infinity()};
  const double r = model.rho().right_edge();
  if (!(r > 0)) return t;
  const ExtendedReal g_edge = model.rho().stieltjes_at_right_edge();
  if (g_edge.is_infinite()) return t;
  const double alpha = model.alpha();
  const double xc = r * r * g_edge.value() + (1.0 / alpha - 1.0) * r;
  const double probe = h_rho(model, t.theta_max.value() * (1.0 - kPoleGap));
  if (std::abs(probe - xc) > 1e-3 * std::max(1.0, std::abs(xc))) {
    throw SolverError("thresholds: cannot confirm finiteness of G_rho(r(rho)); closed form x_c = " +
                      fmt(xc) + " but H_rho near theta_max = " + fmt(probe) +
                      " (check the declared edge integrability)");
  }
  t.x_c = xc;
  return t;
}

bool detect_degenerate(const CovarianceModel& model) {
  const double r = model.rho().right_edge();
  return r <= 0 && model.alpha() * (1.0 - model.rho().atom_mass(0.0)) <= 1.0;
}

EdgeData edge_solve(const CovarianceModel& model) {
  EdgeData e;
  e.theta_max = theta_max(model);
  if (detect_degenerate(model)) {
    e.degenerate = true;
    return e;
  }
  const auto th = thresholds(model);
  e.x_c = th.x_c;
  const double r = model.rho().right_edge();
  if (r > 0) {
    e.case_tag = th.x_c.is_finite() ? EdgeCase::pos_edge_finite_xc : EdgeCase::pos_edge_infinite_xc;
  } else {
    e.case_tag = EdgeCase::nonpos_edge;
  }

  auto f = [&](double theta) { return f_rho(model, theta); };
  double lo = 0.0;
  double hi = 0.0;
  if (e.theta_max.is_finite()) {
    const double tmax = e.theta_max.value();
    hi = tmax * (1.0 - kPoleGap);
    if (f(hi) < 0) {
      // H_rho still decreasing at theta_max: the edge is the boundary value x_c.
      if (th.x_c.is_infinite()) {
        throw SolverError("edge_solve: f_rho negative up to theta_max with x_c = inf");
      }
      e.theta_c = tmax;
      e.r_sigma = th.x_c.value();
      return e;
    }
    lo = tmax * 1e-12;
  } else {
    hi = 1.0;
    std::vector<double> samples;
    int k = 0;
    while (f(hi) < 0) {
      samples.push_back(f(hi));
      hi *= 2.0;
      if (++k > 1000) {
        std::ostringstream os;
        os << "edge_solve: cannot bracket the root of f_rho; samples:";
        for (std::size_t i = samples.size() > 5 ? samples.size() - 5 : 0; i < samples.size(); ++i) {
          os << ' ' << samples[i];
        }
        throw SolverError(os.str());
      }
    }
    lo = hi * 1e-15;
  }
  if (!(f(lo) < 0)) {
    throw SolverError("edge_solve: f_rho not negative near 0 (f = " + fmt(f(lo)) + ")");
  }
  const double theta_c = numerics::bisect(f, lo, hi, root_tol(hi));
  e.theta_c = theta_c;
  e.r_sigma = h_rho(model, theta_c);
  return e;
}

namespace {

void require_nondegenerate(const EdgeData& edge, const char* what) {
  if (edge.degenerate) {
    throw DegenerateModelError(std::string(what) + ": model is degenerate");
  }
}

}  // namespace

double g_sigma(const EdgeData& edge, const CovarianceModel& model, double x) {
  require_nondegenerate(edge, "g_sigma");
  const double rs = *edge.r_sigma;
  const double tc = *edge.theta_c;
  if (x < rs - 1e-12 * std::max(1.0, std::abs(rs))) {
    throw DomainError("g_sigma: x = " + fmt(x) + " below r(sigma) = " + fmt(rs) +
                      "; H_rho(y) = x has no solution");
  }
  if (x <= rs) return tc;
  auto h = [&](double y) { return h_rho(model, y) - x; };
  const double hi = tc;
  double lo = 0.5 * tc;
  for (int k = 0; h(lo) <= 0; ++k) {
    lo *= 0.5;
    if (k > 2000) throw SolverError("g_sigma: cannot bracket at x = " + fmt(x));
  }
  return numerics::bisect(h, lo, hi, root_tol(hi));
}

ExtendedReal g_bar_domain_end(const CovarianceModel& model) {
  if (model.rho().right_edge() <= 0) return 0.0;
  return ExtendedReal::infinity();
}

double g_bar_sigma(const EdgeData& edge, const CovarianceModel& model, double x) {
  require_nondegenerate(edge, "g_bar_sigma");
  const double rs = *edge.r_sigma;
  const double tc = *edge.theta_c;
  const auto end = g_bar_domain_end(model);
  if (x < rs - 1e-12 * std::max(1.0, std::abs(rs)) || !(ExtendedReal(x) < end)) {
    throw DomainError("g_bar_sigma: x = " + fmt(x) + " outside the domain [r(sigma), " +
                      (end.is_finite() ? fmt(end.value()) : std::string("inf")) + ")");
  }
  if (x <= rs) return tc;
  auto h = [&](double y) { return h_rho(model, y) - x; };

  if (edge.theta_max.is_finite()) {
    const double tmax = edge.theta_max.value();
    const bool finite_xc = edge.x_c->is_finite();
    if (finite_xc && x >= edge.x_c->value()) return tmax;
    if (tc >= tmax) return tmax;
    const double hi = tmax * (1.0 - (finite_xc ? kCapGap : kPoleGap));
    if (h(hi) <= 0) return finite_xc ? tmax : hi;
    return numerics::bisect(h, tc, hi, root_tol(hi));
  }

  // r(rho) <= 0: H_rho(theta) ~ (1 - alpha (1 - rho({0}))) / theta as theta -> inf.
  const double alpha_eff = model.alpha() * (1.0 - model.rho().atom_mass(0.0));
  double hi = std::max(2.0 * tc, 2.0 * (1.0 - alpha_eff) / x);
  for (int k = 0; h(hi) < 0; ++k) {
    hi *= 2.0;
    if (k > 2000) throw SolverError("g_bar_sigma: cannot bracket at x = " + fmt(x));
  }
  return numerics::bisect(h, tc, hi, root_tol(hi));
}

namespace {

// Newton on H_rho(G) = z from the starting point g. Returns false if it does not
// converge or leaves the lower half-plane.
bool newton_dyson(const CovarianceModel& model, cplx z, cplx& g) {
  cplx cur = g;
  for (int it = 0; it < 80; ++it) {
    const cplx resid = h_rho(model, cur) - z;
    const cplx deriv = h_rho_derivative(model, cur);
    if (!std::isfinite(std::abs(resid)) || std::abs(deriv) == 0.0) return false;
    cplx step = resid / deriv;
    const double cap = 0.5 * std::abs(cur);
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    cplx next = cur - step;
    for (int k = 0; k < 30 && next.imag() >= 0; ++k) {
      step *= 0.5;
      next = cur - step;
    }
    if (next.imag() >= 0) return false;
    cur = next;
    if (std::abs(step) <= 1e-15 * std::abs(cur)) {
      g = cur;
      return true;
    }
  }
  const cplx resid = h_rho(model, cur) - z;
  if (std::abs(resid) <= 1e-10 * (1.0 + std::abs(z))) {
    g = cur;
    return true;
  }
  return false;
}

double spectral_scale(const CovarianceModel& model) {
  const auto& rho = model.rho();
  const double s = 1.0 + 1.0 / std::sqrt(model.alpha());
  return std::max({1.0, s * s * std::abs(rho.left_edge()), s * s * std::abs(rho.right_edge())});
}

}  // namespace

std::complex<double> g_sigma_complex(const CovarianceModel& model, std::complex<double> z) {
  if (!(z.imag() > 0)) throw DomainError("g_sigma_complex: need Im z > 0");
  const double x = z.real();
  const double eta = z.imag();
  double level = std::max(eta, 10.0 * spectral_scale(model) + std::abs(x));
  cplx g = 1.0 / cplx(x, level);
  if (!newton_dyson(model, cplx(x, level), g)) {
    throw SolverError("g_sigma_complex: Newton failed at the seed level, x = " + fmt(x));
  }
  double ratio = 0.5;
  while (level > eta) {
    const double next = std::max(eta, level * ratio);
    cplx trial = g;
    if (newton_dyson(model, cplx(x, next), trial)) {
      g = trial;
      level = next;
      ratio = std::max(1e-3, ratio * ratio);
      ratio = std::min(ratio, 0.5);
    } else {
      ratio = std::sqrt(ratio);
      if (ratio > 0.9999) {
        throw SolverError("g_sigma_complex: Newton divergence at x = " + fmt(x) +
                          ", eta = " + fmt(next));
      }
    }
  }
  return g;
}

double sigma_zero_atom(const CovarianceModel& model) {
  return std::max(0.0, 1.0 - model.alpha() * (1.0 - model.rho().atom_mass(0.0)));
}

double sigma_density(const CovarianceModel& model, double x, double eta) {
  if (!(eta > 0)) throw DomainError("sigma_density: eta must be positive");
  const cplx g = g_sigma_complex(model, cplx(x, eta));
  const double m0 = sigma_zero_atom(model);
  const double lorentz = m0 * eta / (std::numbers::pi * (x * x + eta * eta));
  return std::max(0.0, -g.imag() / std::numbers::pi - lorentz);
}

Interval sigma_support(const CovarianceModel& model) {
  const auto right = edge_solve(model);
  const double r = right.degenerate ? 0.0 : *right.r_sigma;
  const CovarianceModel mirror(model.rho().reflected(), model.alpha(), 1, EntryLaw::gaussian);
  const auto left = edge_solve(mirror);
  const double l = left.degenerate ? 0.0 : -*left.r_sigma;
  return {std::min(l, r), r};
}

std::vector<double> sigma_density_grid(const CovarianceModel& model,
                                       const std::vector<double>& xs, double eta) {
  std::vector<double> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { out[i] = sigma_density(model, xs[i], eta); });
  return out;
}

std::vector<double> sigma_density_grid_serial(const CovarianceModel& model,
                                              const std::vector<double>& xs, double eta) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = sigma_density(model, xs[i], eta);
  return out;
}

SigmaGrid grid_measure(Interval support, double zero_atom, const GridSpec& grid,
                       const std::function<double(double, double)>& density) {
  if (grid.points < 2) throw DomainError("grid_measure: need at least 2 grid points");
  if (!(grid.eta_relative > 0)) throw DomainError("grid_measure: eta must be positive");
  const double m0 = zero_atom;
  SigmaGrid out{SpectralMeasure::from_atoms(std::vector<double>{0.0}, std::vector<double>{1.0}),
                0.0, 0.0, support};
  if (!(support.hi > support.lo) || m0 >= 1.0) return out;
  const double eta = grid.eta_relative * (support.hi - support.lo);
  out.eta = eta;
  const auto nodes = SpectralMeasure::angle_nodes(support, grid.points);
  // Near an edge, eta shrinks with the distance so the smoothing does not leak mass.
  std::vector<double> dens(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    const double dist = std::min(nodes[i] - support.lo, support.hi - nodes[i]);
    const double eta_i = std::max(std::min(eta, kEdgeEtaFraction * dist), 1e-3 * eta);
    dens[i] = density(nodes[i], eta_i);
  });

  DensityParams params;
  params.table_x.push_back(support.lo);
  params.table_x.insert(params.table_x.end(), nodes.begin(), nodes.end());
  params.table_x.push_back(support.hi);
  params.table_density.push_back(0.0);
  params.table_density.insert(params.table_density.end(), dens.begin(), dens.end());
  params.table_density.push_back(0.0);

  auto raw = SpectralMeasure::make_part(DensityKind::table, params, support, 1.0, grid.points,
                                        false, true);
  out.mass_defect = std::abs(raw.mass + m0 - 1.0);
  auto part = SpectralMeasure::make_part(DensityKind::table, std::move(params), support,
                                         (1.0 - m0) / raw.mass, grid.points, false, true);
  std::vector<Atom> atoms;
  if (m0 > 0) atoms.push_back({0.0, m0});
  // Absorb rounding in the rescale.
  const double target = 1.0 - m0;
  for (auto& w : part.weights) w *= target / part.mass;
  part.cell_mass = part.weights;
  part.mass = target;
  out.measure = SpectralMeasure::compose(std::move(atoms), {std::move(part)});
  return out;
}

SigmaGrid sigma_measure(const CovarianceModel& model, const GridSpec& grid) {
  return grid_measure(sigma_support(model), sigma_zero_atom(model), grid,
                      [&](double x, double eta) { return sigma_density(model, x, eta); });
}

}  // namespace rmtldp
