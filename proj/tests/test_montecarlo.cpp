#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rmtldp/montecarlo.hpp"
#include "rmtldp/parallel.hpp"
#include "rmtldp/philox.hpp"

using namespace rmtldp;

namespace {

CovarianceModel point_mass_model(double location, double alpha, int beta = 1,
                                 EntryLaw law = EntryLaw::gaussian) {
  const std::vector<double> loc{location}, w{1.0};
  return CovarianceModel(SpectralMeasure::from_atoms(loc, w), alpha, beta, law);
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) ==
          C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("entry streams are pure functions of (seed, replica, entry)") {
    const EntryStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    CHECK(a.uniforms(11) == b.uniforms(11));
    CHECK(a.uniforms(11) != c.uniforms(11));
    CHECK(a.uniforms(11) != d.uniforms(11));
    CHECK(a.uniforms(11) != a.uniforms(12));
  }

  TEST_CASE("uniform and normal moments") {
    const EntryStream s(123, 0);
    const int n = 200000;
    double su = 0, sz = 0, sz2 = 0, umin = 1, umax = 0;
    for (int i = 0; i < n; ++i) {
      const auto [u1, u2] = s.uniforms(static_cast<std::uint64_t>(i));
      su += u1 + u2;
      umin = std::min({umin, u1, u2});
      umax = std::max({umax, u1, u2});
      const auto [z1, z2] = s.normals(static_cast<std::uint64_t>(i) + n);
      sz += z1 + z2;
      sz2 += z1 * z1 + z2 * z2;
    }
    CHECK(umin > 0.0);
    CHECK(umax < 1.0);
    CHECK(su / (2 * n) == doctest::Approx(0.5).epsilon(5e-3));
    CHECK(std::abs(sz / (2 * n)) < 0.01);
    CHECK(sz2 / (2 * n) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_SUITE("montecarlo") {
  TEST_CASE("population quantiles") {
    const std::vector<double> loc{1.0, 3.0}, w{0.25, 0.75};
    const auto g = build_gamma(SpectralMeasure::from_atoms(loc, w), 8);
    CHECK(std::count(g.begin(), g.end(), 1.0) == 2);
    CHECK(std::count(g.begin(), g.end(), 3.0) == 6);
    CHECK(std::is_sorted(g.begin(), g.end()));
  }

  TEST_CASE("samples are reproducible and independent of the thread count") {
    const auto m = point_mass_model(1.0, 1.0);
    const auto a = sample_spectrum(m, 40, 5, 2);
    const auto b = sample_spectrum(m, 40, 5, 2);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.m == 40);
    CHECK(a.lambda_max == a.eigenvalues.back());
    CHECK(sample_spectrum(m, 40, 5, 3).eigenvalues != a.eigenvalues);

    const int before = thread_count();
    set_thread_count(1);
    const auto one = edge_stats(m, 30, 6, 9);
    set_thread_count(4);
    const auto four = edge_stats(m, 30, 6, 9);
    set_thread_count(before);
    CHECK(one.lambda_max == four.lambda_max);
    CHECK(edge_stats_serial(m, 30, 6, 9).lambda_max == one.lambda_max);
    CHECK(one.quantiles.size() == one.quantile_levels.size());
    CHECK(one.sd > 0);
  }

  TEST_CASE("replica i of a batch equals a single draw of replica i") {
    const auto m = point_mass_model(1.0, 2.0);
    const auto batch = sample_replicas(m, 20, 4, 11);
    REQUIRE(batch.size() == 4);
    CHECK(batch[2].eigenvalues == sample_spectrum(m, 20, 11, 2).eigenvalues);
    CHECK(batch[2].m == 40);
  }

  TEST_CASE("trace identity: mean eigenvalue is close to the population mean") {
    const auto m = point_mass_model(2.0, 1.0);
    const auto s = sample_spectrum(m, 200, 1, 0);
    const double mean = std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0) / 200;
    CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
  }

  TEST_CASE("entry laws and complex entries") {
    for (auto law : {EntryLaw::rademacher, EntryLaw::uniform_sqrt3}) {
      const auto s = sample_spectrum(point_mass_model(1.0, 1.0, 1, law), 100, 3, 0);
      CHECK(s.lambda_max > 3.0);
      CHECK(s.lambda_max < 5.0);
    }
    for (auto law : {EntryLaw::complex_gaussian, EntryLaw::complex_rademacher}) {
      const auto s = sample_spectrum(point_mass_model(1.0, 1.0, 2, law), 100, 3, 0);
      CHECK(s.eigenvalues.front() > -1e-10);
      CHECK(s.lambda_max < 5.0);
    }
  }

  TEST_CASE("negative population gives a negative semidefinite matrix") {
    const auto s = sample_spectrum(point_mass_model(-1.0, 0.5), 50, 1, 0);
    CHECK(std::abs(s.lambda_max) < 1e-10);
    CHECK(s.eigenvalues.front() < -0.5);
  }

  TEST_CASE("deformed Wigner samples") {
    const DeformedWignerModel m(SpectralMeasure::from_atoms(std::vector<double>{0.0},
                                                            std::vector<double>{1.0}));
    const auto s = sample_spectrum(m, 200, 4, 0);
    CHECK(s.lambda_max == doctest::Approx(2.0).epsilon(0.1));
    const auto stats = edge_stats(m, 50, 4, 4);
    CHECK(stats.lambda_max.size() == 4);
  }

  TEST_CASE("exact CDF distances") {
    const std::vector<double> loc{0.0, 1.0}, w{0.5, 0.5};
    const auto target = SpectralMeasure::from_atoms(loc, w);
    const auto same = cdf_distances({0.0, 1.0}, target);
    CHECK(same.d_ks == doctest::Approx(0.0));
    CHECK(same.w1 == doctest::Approx(0.0));
    const auto shifted = cdf_distances({0.5, 1.5}, target);
    CHECK(shifted.d_ks == doctest::Approx(0.5));
    CHECK(shifted.w1 == doctest::Approx(0.5));
    const auto uni = SpectralMeasure::uniform(0.0, 1.0);
    const auto d = cdf_distances({0.5}, uni);
    CHECK(d.d_ks == doctest::Approx(0.5));
    CHECK(d.w1 == doctest::Approx(0.25));
  }

  TEST_CASE("tail curve bookkeeping") {
    const auto m = point_mass_model(1.0, 1.0);
    const auto pts = tail_curve(m, 4.3, {10, 20}, 50, 1);
    REQUIRE(pts.size() == 2);
    for (const auto& p : pts) {
      CHECK(p.replicas == 50);
      CHECK(p.fraction == doctest::Approx(static_cast<double>(p.hits) / 50.0));
      CHECK(p.ci_low <= p.estimate);
      CHECK(p.estimate <= p.ci_high);
    }
    const auto none = tail_curve(m, 50.0, {10}, 5, 1);
    CHECK(none[0].hits == 0);
    CHECK(none[0].lower_bound);
    CHECK(std::isinf(none[0].ci_high));
  }

  TEST_CASE("size guard") {
    CHECK_THROWS_AS((void)sample_spectrum(point_mass_model(1.0, 1.0), 10000, 1, 0), DomainError);
  }
}
