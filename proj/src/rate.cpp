#include "rmtldp/rate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmtldp/errors.hpp"
#include "rmtldp/numerics.hpp"
#include "rmtldp/parallel.hpp"

namespace rmtldp {

namespace {

constexpr double kQuadAbsTol = 1e-12;
constexpr double kQuadRelTol = 1e-11;
constexpr double kMaxMassDefect = 1e-3;
constexpr int kScanPoints = 50;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_nondegenerate(const EdgeData& edge) {
  if (edge.degenerate) {
    throw DegenerateModelError(
        "rate: model is degenerate (lambda_max is trapped at 0); use rate_degenerate");
  }
}

// True when x lies where the rate function is finite.
bool in_domain(const CovarianceModel& model, const EdgeData& edge, double x) {
  if (x < *edge.r_sigma) return false;
  return ExtendedReal(x) < g_bar_domain_end(model);
}

double gap(const CovarianceModel& model, const EdgeData& edge, double u) {
  return g_bar_sigma(edge, model, u) - g_sigma(edge, model, u);
}

// int_a^b (Gbar - G) du with u = r_sigma + s^2, split at a finite x_c.
double segment_integral(const CovarianceModel& model, const EdgeData& edge, double a, double b) {
  if (b <= a) return 0.0;
  const double rs = *edge.r_sigma;
  auto piece = [&](double lo, double hi) {
    const double s0 = std::sqrt(std::max(0.0, lo - rs));
    const double s1 = std::sqrt(std::max(0.0, hi - rs));
    auto f = [&](double s) { return 2.0 * s * gap(model, edge, rs + s * s); };
    return numerics::integrate(f, s0, s1, kQuadAbsTol, kQuadRelTol);
  };
  if (edge.x_c->is_finite()) {
    const double xc = edge.x_c->value();
    if (a < xc && xc < b) return piece(a, xc) + piece(xc, b);
  }
  return piece(a, b);
}

template <class Loop>
std::vector<double> rate_on_grid_impl(const CovarianceModel& model, const EdgeData& edge,
                                      const std::vector<double>& xs, Loop&& loop) {
  require_nondegenerate(edge);
  if (!std::is_sorted(xs.begin(), xs.end())) throw DomainError("rate_on_grid: grid not ascending");
  std::vector<double> out(xs.size(), HUGE_VAL);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (in_domain(model, edge, xs[i])) idx.push_back(i);
  }
  std::vector<double> seg(idx.size());
  loop(idx.size(), [&](std::size_t k) {
    const double a = k == 0 ? *edge.r_sigma : xs[idx[k - 1]];
    seg[k] = segment_integral(model, edge, a, xs[idx[k]]);
  });
  const double factor = 0.5 * model.beta();
  double acc = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    acc += seg[k];
    out[idx[k]] = factor * acc;
  }
  return out;
}

template <class Loop>
RateTable rate_table_impl(const CovarianceModel& model, double x_max, int points, Loop&& loop,
                          bool parallel) {
  if (points < 2) throw DomainError("rate_table: need at least 2 points");
  RateTable t;
  t.edge = edge_solve(model);
  require_nondegenerate(t.edge);
  const double rs = *t.edge.r_sigma;
  if (!(x_max > rs)) {
    throw DomainError("rate_table: x_max = " + fmt(x_max) + " must exceed r(sigma) = " + fmt(rs));
  }
  if (!in_domain(model, t.edge, x_max)) {
    throw DomainError("rate_table: x_max = " + fmt(x_max) +
                      " outside the domain of the rate function (r(rho) <= 0 needs x_max < 0)");
  }
  t.beta = model.beta();
  t.x_grid = numerics::linspace(rs, x_max, points);
  t.g_values.resize(t.x_grid.size());
  t.gbar_values.resize(t.x_grid.size());
  loop(t.x_grid.size(), [&](std::size_t i) {
    t.g_values[i] = g_sigma(t.edge, model, t.x_grid[i]);
    t.gbar_values[i] = g_bar_sigma(t.edge, model, t.x_grid[i]);
  });
  t.i_values = parallel ? rate_on_grid(model, t.edge, t.x_grid)
                        : rate_on_grid_serial(model, t.edge, t.x_grid);
  t.i_values[0] = 0.0;
  return t;
}

auto serial_loop = [](std::size_t n, const auto& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
};
auto parallel_loop = [](std::size_t n, const auto& body) { parallel_for(n, body); };

// G_mu at y >= r(mu); +inf at r(mu) when G_mu(r(mu)) diverges.
double stieltjes_from_right(const SpectralMeasure& mu, double y) {
  if (y > mu.right_edge()) return mu.stieltjes(y);
  const auto g = mu.stieltjes_at_right_edge();
  return g.as_double();
}

}  // namespace

ExtendedReal RateTable::interpolate(double x) const {
  if (x_grid.empty()) throw DomainError("RateTable::interpolate: empty table");
  if (x < x_grid.front()) return ExtendedReal::infinity();
  if (x > x_grid.back()) {
    throw DomainError("RateTable::interpolate: x = " + fmt(x) + " beyond the table");
  }
  auto it = std::upper_bound(x_grid.begin(), x_grid.end(), x);
  if (it == x_grid.end()) return i_values.back();
  const auto k = static_cast<std::size_t>(it - x_grid.begin());
  const double t = (x - x_grid[k - 1]) / (x_grid[k] - x_grid[k - 1]);
  return i_values[k - 1] + t * (i_values[k] - i_values[k - 1]);
}

ExtendedReal rate(const CovarianceModel& model, const EdgeData& edge, double x) {
  require_nondegenerate(edge);
  if (!in_domain(model, edge, x)) return ExtendedReal::infinity();
  return 0.5 * model.beta() * segment_integral(model, edge, *edge.r_sigma, x);
}

ExtendedReal rate(const CovarianceModel& model, double x) {
  return rate(model, edge_solve(model), x);
}

double rate_derivative(const CovarianceModel& model, const EdgeData& edge, double x) {
  require_nondegenerate(edge);
  return 0.5 * model.beta() * gap(model, edge, x);
}

ExtendedReal rate_degenerate(double x) {
  if (x == 0.0) return 0.0;
  return ExtendedReal::infinity();
}

std::vector<double> rate_on_grid(const CovarianceModel& model, const EdgeData& edge,
                                 const std::vector<double>& xs) {
  return rate_on_grid_impl(model, edge, xs, parallel_loop);
}

std::vector<double> rate_on_grid_serial(const CovarianceModel& model, const EdgeData& edge,
                                        const std::vector<double>& xs) {
  return rate_on_grid_impl(model, edge, xs, serial_loop);
}

double v_fn(const SpectralMeasure& mu, double theta, double lambda) {
  if (!(theta > 0)) throw DomainError("v_fn: theta must be positive");
  const double r = mu.right_edge();
  if (lambda < r) {
    throw DomainError("v_fn: lambda = " + fmt(lambda) + " below r(mu) = " + fmt(r));
  }
  const double target = 2.0 * theta;
  if (stieltjes_from_right(mu, lambda) <= target) return lambda - 1.0 / target;
  // G_mu(y) lies between 1/(y - l) and 1/(y - r), which brackets the root.
  const double lo = std::max(lambda, mu.left_edge() + 1.0 / target);
  const double hi = r + 1.0 / target;
  auto f = [&](double y) { return stieltjes_from_right(mu, y) - target; };
  if (lo >= hi || f(lo) <= 0) return lo - 1.0 / target;
  if (f(hi) >= 0) return hi - 1.0 / target;
  const double y = numerics::bisect(f, lo, hi, 1e-15 * std::max(1.0, std::abs(hi)));
  return y - 1.0 / target;
}

double j_fn(const SpectralMeasure& mu, double theta, double lambda) {
  if (theta < 0) throw DomainError("j_fn: theta must be nonnegative");
  if (lambda < mu.right_edge()) {
    throw DomainError("j_fn: lambda = " + fmt(lambda) + " below r(mu) = " + fmt(mu.right_edge()));
  }
  if (theta == 0.0) return 0.0;
  const double v = v_fn(mu, theta, lambda);
  bool bad = false;
  const double integral = mu.integrate([&](double y) {
    const double arg = 1.0 + 2.0 * theta * v - 2.0 * theta * y;
    if (!(arg > 0)) {
      bad = true;
      return 0.0;
    }
    return std::log(arg);
  });
  if (bad) {
    throw SolverError("j_fn: nonpositive log argument at theta = " + fmt(theta) +
                      ", lambda = " + fmt(lambda));
  }
  return theta * v - 0.5 * integral;
}

double f_fn(const CovarianceModel& model, double theta) {
  if (theta < 0) throw DomainError("f_fn: theta must be nonnegative");
  if (!(ExtendedReal(theta) < theta_max(model))) {
    throw DomainError("f_fn: theta = " + fmt(theta) + " not below theta_max");
  }
  if (theta == 0.0) return 0.0;
  const double alpha = model.alpha();
  const double integral =
      model.rho().integrate([&](double t) { return std::log(1.0 - theta * t / alpha); });
  return -0.5 * alpha * integral;
}

VariationalResult rate_variational(const CovarianceModel& model, const EdgeData& edge,
                                   const SigmaGrid& sigma, double x, double scan_tol) {
  require_nondegenerate(edge);
  if (sigma.mass_defect > kMaxMassDefect) {
    throw SolverError("rate_variational: sigma grid mass defect " + fmt(sigma.mass_defect) +
                      " exceeds " + fmt(kMaxMassDefect) + "; refine the grid");
  }
  if (!in_domain(model, edge, x)) {
    throw DomainError("rate_variational: x = " + fmt(x) + " outside the domain of the rate");
  }
  const double theta_x = g_bar_sigma(edge, model, x);
  if (!(ExtendedReal(theta_x) < edge.theta_max)) {
    throw DomainError("rate_variational: x = " + fmt(x) +
                      " is at or beyond x_c, where the optimiser sits at theta_max");
  }
  const double lambda = std::max(x, sigma.measure.right_edge());
  auto value = [&](double theta) {
    return model.beta() * (j_fn(sigma.measure, 0.5 * theta, lambda) - f_fn(model, theta));
  };

  VariationalResult res;
  res.theta_x = theta_x;
  res.value = value(theta_x);
  res.mass_defect = sigma.mass_defect;

  const double lo = 1e-3 * theta_x;
  const double hi = edge.theta_max.is_finite() ? edge.theta_max.value() * (1.0 - 1e-9)
                                               : 50.0 * theta_x;
  const auto grid = numerics::logspace(lo, hi, kScanPoints);
  std::size_t best = 0;
  std::vector<double> vals(grid.size());
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
    throw SolverError("rate_variational: theta scan found " + fmt(res.scan_max) + " at theta = " +
                      fmt(res.scan_argmax) + ", above the value " + fmt(res.value) +
                      " at theta_x = " + fmt(theta_x));
  }
  return res;
}

double rate_variational(const CovarianceModel& model, double x) {
  const auto edge = edge_solve(model);
  require_nondegenerate(edge);
  return rate_variational(model, edge, sigma_measure(model), x).value;
}

TruncationResult epsilon_truncate(const SpectralMeasure& rho, double eps) {
  const double r = rho.right_edge();
  const double l = rho.left_edge();
  if (r == l) {
    if (!(eps > 0)) throw DomainError("epsilon_truncate: eps must be positive");
    return {rho, eps, false};
  }
  if (!(eps > 0) || !(eps < r - l)) {
    throw DomainError("epsilon_truncate: eps = " + fmt(eps) + " outside (0, " + fmt(r - l) + ")");
  }
  TruncationResult res{rho, eps, false};
  for (const auto& a : rho.atoms()) {
    if (std::abs(a.location - (r - res.eps_used)) <= 1e-12) {
      res.eps_used += 1e-9 * (r - l);
      res.nudged = true;
      break;
    }
  }
  const double cut = r - res.eps_used;

  std::vector<Atom> atoms;
  std::vector<DensityPart> parts;
  double kept = 0.0;
  for (const auto& a : rho.atoms()) {
    if (a.location <= cut) {
      atoms.push_back(a);
      kept += a.weight;
    }
  }
  for (const auto& p : rho.parts()) {
    if (p.support.hi <= cut) {
      parts.push_back(p);
      kept += p.mass;
    } else if (p.support.lo < cut) {
      auto q = SpectralMeasure::make_part(p.kind, p.params, {p.support.lo, cut}, p.scale,
                                          p.node_count, p.left_edge_integrable, true);
      kept += q.mass;
      parts.push_back(std::move(q));
    }
  }
  const double moved = 1.0 - kept;
  if (moved > 0) atoms.push_back({r, moved});
  res.measure = SpectralMeasure::compose(std::move(atoms), std::move(parts));
  return res;
}

RateTable rate_table(const CovarianceModel& model, double x_max, int points) {
  return rate_table_impl(model, x_max, points, parallel_loop, true);
}

RateTable rate_table_serial(const CovarianceModel& model, double x_max, int points) {
  return rate_table_impl(model, x_max, points, serial_loop, false);
}

ApproxReport approx_sweep(const CovarianceModel& model, const std::vector<double>& eps,
                          const std::vector<double>& x_grid, double domination_tol) {
  if (eps.empty()) throw DomainError("approx_sweep: empty eps list");
  const auto edge = edge_solve(model);
  require_nondegenerate(edge);
  ApproxReport rep;
  rep.x_grid = x_grid;
  rep.r_sigma = *edge.r_sigma;
  rep.i_values = rate_on_grid(model, edge, x_grid);

  for (double e : eps) {
    ApproxEntry entry;
    entry.eps = e;
    auto trunc = epsilon_truncate(model.rho(), e);
    entry.eps_used = trunc.eps_used;
    entry.nudged = trunc.nudged;
    const auto m_eps = model.with_rho(std::move(trunc.measure));
    const auto edge_eps = edge_solve(m_eps);
    require_nondegenerate(edge_eps);
    entry.r_sigma_eps = *edge_eps.r_sigma;
    entry.i_values = rate_on_grid(m_eps, edge_eps, x_grid);
    entry.max_excess = -HUGE_VAL;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      const double a = entry.i_values[i];
      const double b = rep.i_values[i];
      if (std::isinf(b)) continue;
      const double diff = std::isinf(a) ? HUGE_VAL : std::abs(a - b);
      entry.sup_error = std::max(entry.sup_error, diff);
      if (!std::isinf(a)) entry.max_excess = std::max(entry.max_excess, a - b);
    }
    if (entry.max_excess > domination_tol) rep.dominated = false;
    rep.entries.push_back(std::move(entry));
  }

  std::vector<const ApproxEntry*> by_eps;
  for (const auto& e : rep.entries) by_eps.push_back(&e);
  std::sort(by_eps.begin(), by_eps.end(),
            [](const ApproxEntry* a, const ApproxEntry* b) { return a->eps < b->eps; });
  for (std::size_t i = 1; i < by_eps.size(); ++i) {
    if (by_eps[i]->r_sigma_eps < by_eps[i - 1]->r_sigma_eps - 1e-12) rep.r_monotone = false;
  }
  return rep;
}

}  // namespace rmtldp
