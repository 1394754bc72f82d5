#include "rmtldp/montecarlo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "rmtldp/errors.hpp"
#include "rmtldp/parallel.hpp"
#include "rmtldp/philox.hpp"

namespace rmtldp {

namespace {

using cplx = std::complex<double>;

double real_entry(EntryLaw law, const EntryStream& rng, std::uint64_t entry) {
  switch (law) {
    case EntryLaw::gaussian:
      return rng.normals(entry).first;
    case EntryLaw::rademacher:
      return rng.uniforms(entry).first < 0.5 ? -1.0 : 1.0;
    case EntryLaw::uniform_sqrt3:
      return std::sqrt(3.0) * (2.0 * rng.uniforms(entry).first - 1.0);
    default:
      break;
  }
  throw DomainError("real_entry: complex law " + to_string(law));
}

cplx complex_entry(EntryLaw law, const EntryStream& rng, std::uint64_t entry) {
  const double s = std::sqrt(0.5);
  switch (law) {
    case EntryLaw::complex_gaussian: {
      const auto [a, b] = rng.normals(entry);
      return {s * a, s * b};
    }
    case EntryLaw::complex_rademacher: {
      const auto [u, v] = rng.uniforms(entry);
      return {u < 0.5 ? -s : s, v < 0.5 ? -s : s};
    }
    default:
      break;
  }
  throw DomainError("complex_entry: real law " + to_string(law));
}

// (1/M) Z^* diag(gamma) Z, lower triangle only (the eigensolver reads no more).
template <class Matrix>
Matrix gram(const Matrix& z, const std::vector<double>& gamma, double m_real) {
  const auto rows = z.rows();
  const Eigen::Map<const Eigen::VectorXd> d(gamma.data(), rows);
  Matrix h = Matrix::Zero(z.cols(), z.cols());
  const bool nonneg = d.minCoeff() >= 0;
  const bool nonpos = d.maxCoeff() <= 0;
  if (nonneg || nonpos) {
    // Symmetric rank-M update with Y = sqrt(|gamma|) Z halves the work.
    const Eigen::VectorXd root = d.cwiseAbs().cwiseSqrt();
    const Matrix y = root.asDiagonal() * z;
    h.template selfadjointView<Eigen::Lower>().rankUpdate(y.adjoint(),
                                                          (nonneg ? 1.0 : -1.0) / m_real);
  } else {
    h = z.adjoint() * (d.asDiagonal() * z) / m_real;
  }
  return h;
}

template <class Matrix>
std::vector<double> eigenvalues_of(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw SolverError("eigensolver did not converge for a " + std::to_string(h.rows()) + " x " +
                      std::to_string(h.cols()) + " matrix");
  }
  const auto& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

SpectrumSample finish(std::vector<double> ev, std::size_t n, std::size_t m, std::uint64_t seed,
                      std::uint64_t replica) {
  SpectrumSample s;
  s.n = n;
  s.m = m;
  s.lambda_max = ev.back();
  s.eigenvalues = std::move(ev);
  s.seed = seed;
  s.replica_index = replica;
  return s;
}

template <class Model, class Loop>
std::vector<SpectrumSample> replicas_impl(const Model& model, std::size_t n, std::size_t replicas,
                                          std::uint64_t seed, Loop&& loop) {
  std::vector<SpectrumSample> out(replicas);
  loop(replicas, [&](std::size_t r) { out[r] = sample_spectrum(model, n, seed, r); });
  return out;
}

EdgeStats summarize(std::vector<double> lmax) {
  EdgeStats st;
  const double count = static_cast<double>(lmax.size());
  st.mean = std::accumulate(lmax.begin(), lmax.end(), 0.0) / count;
  double ss = 0.0;
  for (double v : lmax) ss += (v - st.mean) * (v - st.mean);
  st.sd = lmax.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  std::vector<double> sorted = lmax;
  std::sort(sorted.begin(), sorted.end());
  for (double p : st.quantile_levels) {
    // Linear interpolation between order statistics.
    const double pos = p * (count - 1.0);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(k);
    const double hi = sorted[std::min(k + 1, sorted.size() - 1)];
    st.quantiles.push_back(sorted[k] + frac * (hi - sorted[k]));
  }
  st.lambda_max = std::move(lmax);
  return st;
}

template <class Model, class Loop>
EdgeStats edge_stats_impl(const Model& model, std::size_t n, std::size_t replicas,
                          std::uint64_t seed, Loop&& loop) {
  if (replicas < 1) throw DomainError("edge_stats: need at least one replica");
  std::vector<double> lmax(replicas);
  loop(replicas, [&](std::size_t r) { lmax[r] = sample_spectrum(model, n, seed, r).lambda_max; });
  return summarize(std::move(lmax));
}

auto serial_loop = [](std::size_t n, const auto& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
};
auto parallel_loop = [](std::size_t n, const auto& body) { parallel_for(n, body); };

}  // namespace

std::vector<double> build_gamma(const SpectralMeasure& rho, std::size_t m) {
  if (m < 1) throw DomainError("build_gamma: m must be >= 1");
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    d[i] = std::clamp(rho.quantile(p), rho.left_edge(), rho.right_edge());
  }
  std::sort(d.begin(), d.end());
  return d;
}

SpectrumSample sample_spectrum(const CovarianceModel& model, std::size_t n, std::uint64_t seed,
                               std::uint64_t replica_index) {
  if (n < 2) throw DomainError("sample_spectrum: n must be >= 2");
  const double m_real = std::round(model.alpha() * static_cast<double>(n));
  if (m_real < 1) throw DomainError("sample_spectrum: M = round(alpha n) must be >= 1");
  if (m_real * static_cast<double>(n) > kMaxMatrixEntries) {
    throw DomainError("sample_spectrum: n * M = " + std::to_string(m_real * n) +
                      " exceeds the limit of 4e7 entries");
  }
  const auto m = static_cast<std::size_t>(m_real);
  const auto gamma = build_gamma(model.rho(), m);
  const EntryStream rng(seed, replica_index);
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(n);

  if (is_complex(model.entry_law())) {
    Eigen::MatrixXcd z(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        z(i, j) = complex_entry(model.entry_law(), rng, static_cast<std::uint64_t>(i * cols + j));
      }
    }
    return finish(eigenvalues_of(gram(z, gamma, m_real)), n, m, seed, replica_index);
  }
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      z(i, j) = real_entry(model.entry_law(), rng, static_cast<std::uint64_t>(i * cols + j));
    }
  }
  return finish(eigenvalues_of(gram(z, gamma, m_real)), n, m, seed, replica_index);
}

SpectrumSample sample_spectrum(const DeformedWignerModel& model, std::size_t n, std::uint64_t seed,
                               std::uint64_t replica_index) {
  if (n < 2) throw DomainError("sample_spectrum: n must be >= 2");
  if (static_cast<double>(n) * static_cast<double>(n) > kMaxMatrixEntries) {
    throw DomainError("sample_spectrum: n^2 exceeds the limit of 4e7 entries");
  }
  const auto gamma = build_gamma(model.mu_d(), n);
  const EntryStream rng(seed, replica_index);
  const auto size = static_cast<Eigen::Index>(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double diag_scale = std::sqrt(2.0) * scale;

  if (is_complex(model.entry_law())) {
    Eigen::MatrixXcd x(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
      for (Eigen::Index j = i; j < size; ++j) {
        const cplx w = complex_entry(model.entry_law(), rng, static_cast<std::uint64_t>(i * size + j));
        if (i == j) {
          x(i, i) = diag_scale * w.real() + gamma[static_cast<std::size_t>(i)];
        } else {
          x(i, j) = scale * w;
          x(j, i) = std::conj(x(i, j));
        }
      }
    }
    return finish(eigenvalues_of(x), n, n, seed, replica_index);
  }
  Eigen::MatrixXd x(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = i; j < size; ++j) {
      const double w = real_entry(model.entry_law(), rng, static_cast<std::uint64_t>(i * size + j));
      if (i == j) {
        x(i, i) = diag_scale * w + gamma[static_cast<std::size_t>(i)];
      } else {
        x(i, j) = scale * w;
        x(j, i) = x(i, j);
      }
    }
  }
  return finish(eigenvalues_of(x), n, n, seed, replica_index);
}

std::vector<SpectrumSample> sample_replicas(const CovarianceModel& model, std::size_t n,
                                            std::size_t replicas, std::uint64_t seed) {
  return replicas_impl(model, n, replicas, seed, parallel_loop);
}

std::vector<SpectrumSample> sample_replicas(const DeformedWignerModel& model, std::size_t n,
                                            std::size_t replicas, std::uint64_t seed) {
  return replicas_impl(model, n, replicas, seed, parallel_loop);
}

EdgeStats edge_stats(const CovarianceModel& model, std::size_t n, std::size_t replicas,
                     std::uint64_t seed) {
  return edge_stats_impl(model, n, replicas, seed, parallel_loop);
}

EdgeStats edge_stats(const DeformedWignerModel& model, std::size_t n, std::size_t replicas,
                     std::uint64_t seed) {
  return edge_stats_impl(model, n, replicas, seed, parallel_loop);
}

EdgeStats edge_stats_serial(const CovarianceModel& model, std::size_t n, std::size_t replicas,
                            std::uint64_t seed) {
  return edge_stats_impl(model, n, replicas, seed, serial_loop);
}

Distances cdf_distances(const std::vector<double>& sorted_values, const SpectralMeasure& target) {
  if (sorted_values.empty()) throw DomainError("cdf_distances: empty sample");
  if (!std::is_sorted(sorted_values.begin(), sorted_values.end())) {
    throw DomainError("cdf_distances: sample not sorted");
  }
  const double count = static_cast<double>(sorted_values.size());
  std::vector<double> pts = sorted_values;
  pts.insert(pts.end(), target.cdf_knots().begin(), target.cdf_knots().end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  auto emp_at = [&](double x) {
    return static_cast<double>(std::upper_bound(sorted_values.begin(), sorted_values.end(), x) -
                               sorted_values.begin()) / count;
  };
  auto emp_left = [&](double x) {
    return static_cast<double>(std::lower_bound(sorted_values.begin(), sorted_values.end(), x) -
                               sorted_values.begin()) / count;
  };

  Distances d;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double x = pts[k];
    const double fe = emp_at(x);
    const double fs = target.cdf(x);
    d.d_ks = std::max({d.d_ks, std::abs(fe - fs), std::abs(emp_left(x) - target.cdf_left(x))});
    if (k + 1 < pts.size()) {
      // Both CDFs are affine on the open gap: the empirical one is constant.
      const double w = pts[k + 1] - x;
      const double d0 = fs - fe;
      const double d1 = target.cdf_left(pts[k + 1]) - fe;
      if ((d0 >= 0) == (d1 >= 0)) {
        d.w1 += 0.5 * w * (std::abs(d0) + std::abs(d1));
      } else {
        d.w1 += 0.5 * w * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
      }
    }
  }
  d.d_ks = std::min(d.d_ks, 1.0);
  return d;
}

Distances distance_stats(const CovarianceModel& model, const SigmaGrid& sigma, std::size_t n,
                         std::uint64_t seed, std::uint64_t replica_index) {
  const auto sample = sample_spectrum(model, n, seed, replica_index);
  return cdf_distances(sample.eigenvalues, sigma.measure);
}

Distances distance_stats(const CovarianceModel& model, std::size_t n, std::uint64_t seed) {
  return distance_stats(model, sigma_measure(model), n, seed, 0);
}

std::vector<TailPoint> tail_curve(const CovarianceModel& model, double x,
                                  const std::vector<std::size_t>& n_list, std::size_t replicas,
                                  std::uint64_t seed) {
  if (replicas < 1) throw DomainError("tail_curve: need at least one replica");
  constexpr double z = 1.959963984540054;
  std::vector<TailPoint> out;
  for (std::size_t n : n_list) {
    std::vector<unsigned char> hit(replicas, 0);
    parallel_for(replicas, [&](std::size_t r) {
      hit[r] = sample_spectrum(model, n, seed, r).lambda_max >= x ? 1 : 0;
    });
    TailPoint tp;
    tp.n = n;
    tp.replicas = replicas;
    tp.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    const double total = static_cast<double>(replicas);
    const double p = static_cast<double>(tp.hits) / total;
    tp.fraction = p;
    const double denom = 1.0 + z * z / total;
    const double center = (p + z * z / (2.0 * total)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom;
    const double p_lo = std::max(0.0, center - half);
    const double p_hi = std::min(1.0, center + half);
    const double nn = static_cast<double>(n);
    tp.ci_low = -std::log(p_hi) / nn;
    tp.ci_high = p_lo > 0 ? -std::log(p_lo) / nn : HUGE_VAL;
    if (tp.hits == 0) {
      tp.lower_bound = true;
      tp.estimate = tp.ci_low;
    } else {
      tp.estimate = -std::log(p) / nn;
    }
    out.push_back(tp);
  }
  return out;
}

}  // namespace rmtldp
