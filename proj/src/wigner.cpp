#include "rmtldp/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rmtldp/errors.hpp"
#include "rmtldp/numerics.hpp"
#include "rmtldp/rate.hpp"

namespace rmtldp {

namespace {

using cplx = std::complex<double>;

constexpr int kScanPoints = 50;
constexpr double kMaxMassDefect = 1e-3;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double stieltjes_from_right(const SpectralMeasure& mu, double y) {
  if (y > mu.right_edge()) return mu.stieltjes(y);
  return mu.stieltjes_at_right_edge().as_double();
}

double xtol_for(double scale) { return 1e-15 * std::max(1.0, std::abs(scale)); }

}  // namespace

DeformedWignerModel::DeformedWignerModel(SpectralMeasure mu_d, int beta, EntryLaw law)
    : mu_d_(std::move(mu_d)), beta_(beta), law_(law) {
  if (beta_ != 1 && beta_ != 2) throw DomainError("beta must be 1 or 2");
  if ((beta_ == 2) != is_complex(law_)) {
    throw DomainError("beta = 2 requires a complex entry law and beta = 1 a real one");
  }
}

DeformedWignerModel::DeformedWignerModel(SpectralMeasure mu_d, int beta)
    : DeformedWignerModel(std::move(mu_d), beta,
                          beta == 2 ? EntryLaw::complex_gaussian : EntryLaw::gaussian) {}

DeformedWignerModel DeformedWignerModel::with_mu_d(SpectralMeasure mu_d) const {
  return DeformedWignerModel(std::move(mu_d), beta_, law_);
}

double k_transform(const SpectralMeasure& mu, double y) {
  const double r = mu.right_edge();
  const double g_edge = mu.stieltjes_at_right_edge().as_double();
  if (!(y > 0) || y > g_edge) {
    throw DomainError("k_transform: y = " + fmt(y) + " outside (0, G(r(mu))] = (0, " +
                      fmt(g_edge) + "]");
  }
  if (y == g_edge) return r;
  // 1/(K - l) <= G(K) <= 1/(K - r) brackets the root.
  const double lo = std::max(r, mu.left_edge() + 1.0 / y);
  const double hi = r + 1.0 / y;
  auto f = [&](double k) { return stieltjes_from_right(mu, k) - y; };
  if (lo >= hi || f(hi) >= 0) return hi;
  if (f(lo) <= 0) return lo;
  return numerics::bisect(f, lo, hi, xtol_for(hi));
}

double dw_h(const DeformedWignerModel& model, double y) {
  if (!(y > 0)) throw DomainError("dw_h: y must be positive");
  const auto& mu = model.mu_d();
  const double g_edge = mu.stieltjes_at_right_edge().as_double();
  if (y <= g_edge) return y + k_transform(mu, y);
  return y + mu.right_edge();
}

DWEdgeData dw_edge(const DeformedWignerModel& model) {
  const auto& mu = model.mu_d();
  const double r = mu.right_edge();
  DWEdgeData e;
  e.g_edge_mu_d = mu.stieltjes_at_right_edge();
  e.x_c_dw = e.g_edge_mu_d.is_finite() ? ExtendedReal(r + e.g_edge_mu_d.value())
                                       : ExtendedReal::infinity();
  // H'(y) = 1 + 1/G'(K(y)) vanishes where G'(lambda) = -1 with lambda = K(y); G' increases
  // on (r, inf) and |G'(lambda)| <= 1/(lambda - r)^2.
  auto slope = [&](double lambda) { return mu.stieltjes_derivative(lambda) + 1.0; };
  const double lo = r + 1e-14 * std::max(1.0, std::abs(r));
  const double hi = r + 2.0;
  if (slope(lo) >= 0) {
    if (e.g_edge_mu_d.is_infinite()) throw SolverError("dw_edge: inconsistent edge slope");
    e.y_c = e.g_edge_mu_d.value();
  } else {
    const double lambda = numerics::bisect(slope, lo, hi, xtol_for(hi));
    e.y_c = mu.stieltjes(lambda);
    if (e.g_edge_mu_d.is_finite()) e.y_c = std::min(e.y_c, e.g_edge_mu_d.value());
  }
  e.r_edge = dw_h(model, e.y_c);
  return e;
}

std::pair<double, double> dw_branches(const DeformedWignerModel& model, const DWEdgeData& edge,
                                      double x) {
  if (x < edge.r_edge - 1e-12 * std::max(1.0, std::abs(edge.r_edge))) {
    throw DomainError("dw_branches: x = " + fmt(x) + " below the edge " + fmt(edge.r_edge));
  }
  if (x <= edge.r_edge) return {edge.y_c, edge.y_c};
  auto h = [&](double w) { return dw_h(model, w) - x; };
  double lo = 0.5 * edge.y_c;
  for (int k = 0; h(lo) <= 0; ++k) {
    lo *= 0.5;
    if (k > 2000) throw SolverError("dw_branches: cannot bracket G at x = " + fmt(x));
  }
  const double g = numerics::bisect(h, lo, edge.y_c, xtol_for(edge.y_c));
  // H(w) >= w + r(mu_d), so the larger root is at most x - r(mu_d).
  const double hi = std::max(edge.y_c, x - model.mu_d().right_edge());
  const double gbar = h(hi) <= 0 ? hi : numerics::bisect(h, edge.y_c, hi, xtol_for(hi));
  return {g, gbar};
}

std::pair<double, double> dw_branches(const DeformedWignerModel& model, double x) {
  return dw_branches(model, dw_edge(model), x);
}

ExtendedReal dw_rate(const DeformedWignerModel& model, const DWEdgeData& edge, double x) {
  if (x < edge.r_edge) return ExtendedReal::infinity();
  const double re = edge.r_edge;
  auto piece = [&](double a, double b) {
    const double s0 = std::sqrt(std::max(0.0, a - re));
    const double s1 = std::sqrt(std::max(0.0, b - re));
    auto f = [&](double s) {
      const auto [g, gbar] = dw_branches(model, edge, re + s * s);
      return 2.0 * s * (gbar - g);
    };
    return numerics::integrate(f, s0, s1, 1e-12, 1e-11);
  };
  double total = 0.0;
  if (edge.x_c_dw.is_finite() && edge.x_c_dw.value() > re && edge.x_c_dw.value() < x) {
    total = piece(re, edge.x_c_dw.value()) + piece(edge.x_c_dw.value(), x);
  } else {
    total = piece(re, x);
  }
  return 0.5 * model.beta() * total;
}

ExtendedReal dw_rate(const DeformedWignerModel& model, double x) {
  return dw_rate(model, dw_edge(model), x);
}

namespace {

// Newton on G - G_mu(z - G) = 0 from the starting point g; false on failure.
bool newton_fc(const SpectralMeasure& mu, cplx z, cplx& g) {
  cplx cur = g;
  for (int it = 0; it < 80; ++it) {
    const cplx w = z - cur;
    const cplx resid = cur - mu.stieltjes(w);
    const cplx deriv = 1.0 + mu.stieltjes_derivative(w);
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
  if (std::abs(cur - mu.stieltjes(z - cur)) <= 1e-10 * std::abs(cur)) {
    g = cur;
    return true;
  }
  return false;
}

}  // namespace

std::complex<double> free_convolution_stieltjes(const DeformedWignerModel& model,
                                                std::complex<double> z) {
  if (!(z.imag() > 0)) throw DomainError("free_convolution_stieltjes: need Im z > 0");
  const auto& mu = model.mu_d();
  const double x = z.real();
  const double eta = z.imag();
  const double scale = 2.0 + std::max(std::abs(mu.left_edge()), std::abs(mu.right_edge()));
  double level = std::max(eta, 10.0 * scale + std::abs(x));
  cplx g = 1.0 / cplx(x, level);
  if (!newton_fc(mu, cplx(x, level), g)) {
    throw SolverError("free_convolution: fixed point diverged at the seed level, x = " + fmt(x));
  }
  double ratio = 0.5;
  while (level > eta) {
    const double next = std::max(eta, level * ratio);
    cplx trial = g;
    if (newton_fc(mu, cplx(x, next), trial)) {
      g = trial;
      level = next;
      ratio = std::min(0.5, std::max(1e-3, ratio * ratio));
    } else {
      ratio = std::sqrt(ratio);
      if (ratio > 0.9999) {
        throw SolverError("free_convolution: fixed point diverged at x = " + fmt(x) +
                          ", eta = " + fmt(next));
      }
    }
  }
  return g;
}

double free_convolution_density(const DeformedWignerModel& model, double x, double eta) {
  if (!(eta > 0)) throw DomainError("free_convolution_density: eta must be positive");
  const cplx g = free_convolution_stieltjes(model, cplx(x, eta));
  return std::max(0.0, -g.imag() / std::numbers::pi);
}

Interval free_convolution_support(const DeformedWignerModel& model) {
  const double r = dw_edge(model).r_edge;
  const DeformedWignerModel mirror(model.mu_d().reflected(), 1, EntryLaw::gaussian);
  const double l = -dw_edge(mirror).r_edge;
  return {l, r};
}

SigmaGrid free_convolution_measure(const DeformedWignerModel& model, const GridSpec& grid) {
  return grid_measure(free_convolution_support(model), 0.0, grid, [&](double x, double eta) {
    return free_convolution_density(model, x, eta);
  });
}

DWVariationalResult dw_rate_variational(const DeformedWignerModel& model, const DWEdgeData& edge,
                                        const SigmaGrid& conv, double x, double scan_tol) {
  if (conv.mass_defect > kMaxMassDefect) {
    throw SolverError("dw_rate_variational: convolution grid mass defect " +
                      fmt(conv.mass_defect) + " exceeds " + fmt(kMaxMassDefect));
  }
  if (x < edge.r_edge) throw DomainError("dw_rate_variational: x below the edge");
  const auto& mu = model.mu_d();
  const double lambda = std::max(x, conv.measure.right_edge());
  auto value = [&](double theta) {
    return model.beta() *
           (j_fn(conv.measure, theta, lambda) - theta * theta - j_fn(mu, theta, mu.right_edge()));
  };
  DWVariationalResult res;
  res.mass_defect = conv.mass_defect;
  res.theta_x = 0.5 * dw_branches(model, edge, x).second;
  res.value = value(res.theta_x);

  const auto grid = numerics::logspace(1e-3 * res.theta_x, 10.0 * res.theta_x, kScanPoints);
  std::vector<double> vals(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = value(grid[i]);
    if (vals[i] > vals[best]) best = i;
  }
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[std::min(best + 1, grid.size() - 1)];
  auto [arg, refined] = numerics::golden_section_max(value, a, b, 1e-10 * b);
  res.scan_max = vals[best];
  res.scan_argmax = grid[best];
  if (refined > res.scan_max) {
    res.scan_max = refined;
    res.scan_argmax = arg;
  }
  if (res.scan_max > res.value + scan_tol) {
    throw SolverError("dw_rate_variational: theta scan found " + fmt(res.scan_max) +
                      " at theta = " + fmt(res.scan_argmax) + ", above the value " +
                      fmt(res.value) + " at theta_x = " + fmt(res.theta_x));
  }
  return res;
}

double dw_rate_variational(const DeformedWignerModel& model, double x) {
  const auto edge = dw_edge(model);
  return dw_rate_variational(model, edge, free_convolution_measure(model), x).value;
}

DeformedWignerModel dw_epsilon_cap(const DeformedWignerModel& model, double eps) {
  return model.with_mu_d(epsilon_truncate(model.mu_d(), eps).measure);
}

}  // namespace rmtldp
