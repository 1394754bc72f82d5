#include "rmtldp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "rmtldp/dyson.hpp"
#include "rmtldp/io.hpp"
#include "rmtldp/montecarlo.hpp"
#include "rmtldp/numerics.hpp"
#include "rmtldp/parallel.hpp"
#include "rmtldp/rate.hpp"
#include "rmtldp/wigner.hpp"

namespace rmtldp::cli {

namespace {

/// Raised for bad option values or a model of the wrong kind.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string model_path;
  std::string out_path = "-";
  std::string model_out;
};

struct Options {
  Common common;
  double x_max = NAN;
  std::optional<double> x_min;
  int points = 0;
  double eta_relative = 1e-5;
  std::vector<double> xs;
  std::vector<double> eps;
  std::size_t n = 0;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::string spectra_path;
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    out.flush();
  } else {
    io::write_atomic(path, content);
  }
}

io::Model load(const Common& c, std::ostream& out) {
  io::Model m = io::read_model(c.model_path);
  if (!c.model_out.empty()) emit(c.model_out, io::model_to_json(m).dump(2) + "\n", out);
  return m;
}

CovarianceModel load_covariance(const Common& c, const std::string& cmd, std::ostream& out) {
  auto m = load(c, out);
  if (auto* cov = std::get_if<CovarianceModel>(&m)) return std::move(*cov);
  throw UsageError(cmd + ": expects a model of kind \"covariance\", got \"deformed-wigner\"");
}

DeformedWignerModel load_wigner(const Common& c, const std::string& cmd, std::ostream& out) {
  auto m = load(c, out);
  if (auto* dw = std::get_if<DeformedWignerModel>(&m)) return std::move(*dw);
  throw UsageError(cmd + ": expects a model of kind \"deformed-wigner\", got \"covariance\"");
}

void require_points(int points, int minimum) {
  if (points < minimum) {
    throw UsageError("--points must be at least " + std::to_string(minimum));
  }
}

std::string density_csv(const std::vector<double>& xs, const std::vector<double>& ds) {
  std::string s = "x,density\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += io::format_number(xs[i]) + ',' + io::format_number(ds[i]) + '\n';
  }
  return s;
}

int cmd_edge(const Options& o, std::ostream& out) {
  const auto model = load_covariance(o.common, "edge", out);
  emit(o.common.out_path, io::edge_to_json(edge_solve(model)).dump() + "\n", out);
  return kExitOk;
}

int cmd_rate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto model = load_covariance(o.common, "rate", out);
  require_points(o.points, 2);
  const auto edge = edge_solve(model);
  if (edge.degenerate) {
    err << "rate: the model is degenerate (lambda_max is pinned at 0, the rate is 0 at x = 0 and "
           "+inf elsewhere); run `rmtldp edge --model "
        << o.common.model_path << "` to see degenerate=true\n";
    return kExitNumeric;
  }
  if (!(o.x_max > *edge.r_sigma)) {
    throw UsageError("rate: --xmax must exceed r_sigma = " + io::format_number(*edge.r_sigma));
  }
  emit(o.common.out_path, io::rate_table_csv(rate_table(model, o.x_max, o.points)), out);
  return kExitOk;
}

int cmd_density(const Options& o, std::ostream& out, std::ostream& err) {
  const auto model = load_covariance(o.common, "density", out);
  require_points(o.points, 2);
  const Interval support = sigma_support(model);
  const double lo = o.x_min.value_or(support.lo);
  const double hi = std::isnan(o.x_max) ? support.hi : o.x_max;
  if (!(lo < hi)) throw UsageError("density: empty x range");
  const double eta = o.eta_relative * (support.hi - support.lo);
  const auto xs = numerics::linspace(lo, hi, o.points);
  const auto ds = sigma_density_grid(model, xs, eta);
  const double atom = sigma_zero_atom(model);
  if (atom > 0) err << "density: sigma has an atom of mass " << io::format_number(atom) << " at 0\n";
  emit(o.common.out_path, density_csv(xs, ds), out);
  return kExitOk;
}

int cmd_variational(const Options& o, std::ostream& out) {
  const auto model = load_covariance(o.common, "variational", out);
  if (o.xs.empty()) throw UsageError("variational: --x needs at least one point");
  const auto edge = edge_solve(model);
  if (edge.degenerate) throw DegenerateModelError("variational: the model is degenerate");
  const auto sigma = sigma_measure(model);
  std::string s = "x,I,I_variational,theta_x,scan_max,mass_defect\n";
  for (double x : o.xs) {
    if (!(x > *edge.r_sigma)) {
      throw UsageError("variational: every x must exceed r_sigma = " +
                       io::format_number(*edge.r_sigma));
    }
    const auto v = rate_variational(model, edge, sigma, x);
    s += io::format_number(x) + ',' + io::format_number(rate(model, edge, x).as_double()) + ',' +
         io::format_number(v.value) + ',' + io::format_number(v.theta_x) + ',' +
         io::format_number(v.scan_max) + ',' + io::format_number(v.mass_defect) + '\n';
  }
  emit(o.common.out_path, s, out);
  return kExitOk;
}

int cmd_approx(const Options& o, std::ostream& out, std::ostream& err) {
  const auto model = load_covariance(o.common, "approx", out);
  require_points(o.points, 2);
  if (o.eps.empty()) throw UsageError("approx: --eps needs at least one value");
  for (std::size_t i = 0; i < o.eps.size(); ++i) {
    if (!(o.eps[i] > 0)) throw UsageError("approx: --eps values must be positive");
    if (i > 0 && !(o.eps[i] < o.eps[i - 1])) {
      throw UsageError("approx: --eps must be a strictly descending list");
    }
  }
  const auto edge = edge_solve(model);
  if (edge.degenerate) throw DegenerateModelError("approx: the model is degenerate");
  const double lo = o.x_min.value_or(*edge.r_sigma + 0.5);
  if (!(lo < o.x_max)) throw UsageError("approx: --xmax must exceed the grid start");
  const auto rep = approx_sweep(model, o.eps, numerics::linspace(lo, o.x_max, o.points));
  for (const auto& e : rep.entries) {
    if (e.nudged) {
      err << "approx: eps " << io::format_number(e.eps) << " nudged to "
          << io::format_number(e.eps_used) << " to avoid an atom at the cut\n";
    }
  }
  err << "approx: dominated=" << (rep.dominated ? "true" : "false")
      << " r_monotone=" << (rep.r_monotone ? "true" : "false") << '\n';
  emit(o.common.out_path, io::approx_csv(rep), out);
  return kExitOk;
}

int cmd_mc(const Options& o, std::ostream& out) {
  const auto model = load(o.common, out);
  if (o.n < 1) throw UsageError("mc: --n must be positive");
  if (o.replicas < 1) throw UsageError("mc: --replicas must be positive");
  const auto samples = std::visit(
      [&](const auto& m) { return sample_replicas(m, o.n, o.replicas, o.seed); }, model);
  if (!o.spectra_path.empty()) io::write_atomic(o.spectra_path, io::spectra_binary(samples));
  emit(o.common.out_path, io::mc_csv(samples), out);
  return kExitOk;
}

int cmd_wigner_edge(const Options& o, std::ostream& out) {
  const auto model = load_wigner(o.common, "wigner-edge", out);
  emit(o.common.out_path, io::dw_edge_to_json(dw_edge(model)).dump() + "\n", out);
  return kExitOk;
}

int cmd_wigner_rate(const Options& o, std::ostream& out) {
  const auto model = load_wigner(o.common, "wigner-rate", out);
  require_points(o.points, 2);
  const auto edge = dw_edge(model);
  if (!(o.x_max > edge.r_edge)) {
    throw UsageError("wigner-rate: --xmax must exceed the edge " + io::format_number(edge.r_edge));
  }
  const auto xs = numerics::linspace(edge.r_edge, o.x_max, o.points);
  std::vector<double> g(xs.size()), gbar(xs.size()), is(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    const auto [a, b] = dw_branches(model, edge, xs[i]);
    g[i] = a;
    gbar[i] = b;
    is[i] = dw_rate(model, edge, xs[i]).as_double();
  });
  emit(o.common.out_path, io::rate_table_csv(xs, g, gbar, is), out);
  return kExitOk;
}

int cmd_wigner_density(const Options& o, std::ostream& out) {
  const auto model = load_wigner(o.common, "wigner-density", out);
  require_points(o.points, 2);
  const Interval support = free_convolution_support(model);
  const double lo = o.x_min.value_or(support.lo);
  const double hi = std::isnan(o.x_max) ? support.hi : o.x_max;
  if (!(lo < hi)) throw UsageError("wigner-density: empty x range");
  const double eta = o.eta_relative * (support.hi - support.lo);
  const auto xs = numerics::linspace(lo, hi, o.points);
  std::vector<double> ds(xs.size());
  parallel_for(xs.size(),
               [&](std::size_t i) { ds[i] = free_convolution_density(model, xs[i], eta); });
  emit(o.common.out_path, density_csv(xs, ds), out);
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--model", c.model_path, "model JSON file")->required();
  sub->add_option("--out", c.out_path, "output file, - for standard output");
  sub->add_option("--model-out", c.model_out, "also write the parsed model as JSON");
}

std::optional<int> threads_from_env() {
  const char* v = std::getenv("RMTLDP_THREADS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError("RMTLDP_THREADS must be a positive integer");
  return static_cast<int>(n);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Large-deviation rate functions for the largest eigenvalue", "rmtldp"};
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "upper bound on worker threads (default RMTLDP_THREADS)");

  Options o;
  auto* edge = app.add_subcommand("edge", "edge quantities of a covariance model (JSON)");
  add_common(edge, o.common);

  auto* rate_cmd = app.add_subcommand("rate", "rate function table x,G,Gbar,I (CSV)");
  add_common(rate_cmd, o.common);
  rate_cmd->add_option("--xmax", o.x_max, "right end of the grid")->required();
  rate_cmd->add_option("--points", o.points, "grid points")->default_val(200);

  auto* density = app.add_subcommand("density", "limiting spectral density x,density (CSV)");
  add_common(density, o.common);
  density->add_option("--xmin", o.x_min, "left end (default: support)");
  density->add_option("--xmax", o.x_max, "right end (default: support)");
  density->add_option("--points", o.points, "grid points")->default_val(400);
  density->add_option("--eta", o.eta_relative, "eta relative to the support width")
      ->default_val(1e-5);

  auto* variational = app.add_subcommand("variational", "rate vs variational formula (CSV)");
  add_common(variational, o.common);
  variational->add_option("--x", o.xs, "comma-separated x values")->required()->delimiter(',');

  auto* approx = app.add_subcommand("approx", "eps-truncation sweep eps,r_sigma_eps,sup_error");
  add_common(approx, o.common);
  approx->add_option("--eps", o.eps, "comma-separated descending eps list")
      ->required()
      ->delimiter(',');
  approx->add_option("--xmin", o.x_min, "grid start (default r_sigma + 0.5)");
  approx->add_option("--xmax", o.x_max, "grid end")->required();
  approx->add_option("--points", o.points, "grid points")->default_val(100);

  auto* mc = app.add_subcommand("mc", "Monte Carlo largest eigenvalues (CSV)");
  add_common(mc, o.common);
  mc->add_option("--n", o.n, "matrix dimension")->required();
  mc->add_option("--replicas", o.replicas, "number of replicas")->default_val(1);
  mc->add_option("--seed", o.seed, "generator seed")->default_val(0);
  mc->add_option("--spectra", o.spectra_path, "binary sidecar of all eigenvalues");

  auto* w_edge = app.add_subcommand("wigner-edge", "edge quantities of a deformed Wigner model");
  add_common(w_edge, o.common);

  auto* w_rate = app.add_subcommand("wigner-rate", "deformed Wigner rate table (CSV)");
  add_common(w_rate, o.common);
  w_rate->add_option("--xmax", o.x_max, "right end of the grid")->required();
  w_rate->add_option("--points", o.points, "grid points")->default_val(200);

  auto* w_density = app.add_subcommand("wigner-density", "free convolution density (CSV)");
  add_common(w_density, o.common);
  w_density->add_option("--xmin", o.x_min, "left end (default: support)");
  w_density->add_option("--xmax", o.x_max, "right end (default: support)");
  w_density->add_option("--points", o.points, "grid points")->default_val(400);
  w_density->add_option("--eta", o.eta_relative, "eta relative to the support width")
      ->default_val(1e-5);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!threads) threads = threads_from_env();
    if (threads) {
      if (*threads < 1) throw UsageError("--threads must be positive");
      set_thread_count(*threads);
    }
    if (edge->parsed()) return cmd_edge(o, out);
    if (rate_cmd->parsed()) return cmd_rate(o, out, err);
    if (density->parsed()) return cmd_density(o, out, err);
    if (variational->parsed()) return cmd_variational(o, out);
    if (approx->parsed()) return cmd_approx(o, out, err);
    if (mc->parsed()) return cmd_mc(o, out);
    if (w_edge->parsed()) return cmd_wigner_edge(o, out);
    if (w_rate->parsed()) return cmd_wigner_rate(o, out);
    if (w_density->parsed()) return cmd_wigner_density(o, out);
    err << "rmtldp: no subcommand\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "rmtldp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::FormatError& e) {
    err << "rmtldp: invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "rmtldp: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace rmtldp::cli
