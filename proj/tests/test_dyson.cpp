#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rmtldp/dyson.hpp"
#include "rmtldp/numerics.hpp"

using namespace rmtldp;

namespace {

CovarianceModel point_mass_model(double location, double alpha, int beta = 1) {
  const std::vector<double> loc{location}, w{1.0};
  return CovarianceModel(SpectralMeasure::from_atoms(loc, w), alpha, beta);
}

}  // namespace

TEST_SUITE("dyson") {
  TEST_CASE("model validation") {
    const std::vector<double> loc{1.0}, w{1.0};
    const auto rho = SpectralMeasure::from_atoms(loc, w);
    CHECK_THROWS_AS(CovarianceModel(rho, 0.0), DomainError);
    CHECK_THROWS_AS(CovarianceModel(rho, 1.0, 3), DomainError);
    CHECK_THROWS_AS(CovarianceModel(rho, 1.0, 2, EntryLaw::gaussian), DomainError);
    const std::vector<double> neg{-1.0};
    CHECK_THROWS_AS(
        CovarianceModel(SpectralMeasure::from_atoms(neg, w), 1.0, 1, EntryLaw::rademacher),
        DomainError);
    CHECK(entry_law_from_string(to_string(EntryLaw::uniform_sqrt3)) == EntryLaw::uniform_sqrt3);
    CHECK_THROWS((void)entry_law_from_string("cauchy"));
  }

  TEST_CASE("H_rho for a point mass") {
    const auto m = point_mass_model(1.0, 2.0);
    CHECK(h_rho(m, 0.5) == doctest::Approx(2.0 + 2.0 / 1.5));
    CHECK(theta_max(m).value() == 2.0);
    CHECK_THROWS_AS((void)h_rho(m, 2.5), DomainError);
    const auto hz = h_rho(m, std::complex<double>(0.5, 1e-9));
    CHECK(hz.real() == doctest::Approx(h_rho(m, 0.5)));
  }

  TEST_CASE("Marchenko-Pastur edges for several ratios") {
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
      CAPTURE(alpha);
      const auto e = edge_solve(point_mass_model(1.0, alpha));
      REQUIRE_FALSE(e.degenerate);
      CHECK(*e.r_sigma == doctest::Approx(oracle::mp_right_edge(alpha)).epsilon(1e-10));
      CHECK(e.x_c->is_infinite());
      CHECK(*e.case_tag == EdgeCase::pos_edge_infinite_xc);
      CHECK(h_rho(point_mass_model(1.0, alpha), *e.theta_c) ==
            doctest::Approx(*e.r_sigma).epsilon(1e-12));
    }
  }

  TEST_CASE("negative population edge") {
    const auto e = edge_solve(point_mass_model(-1.0, 2.0));
    CHECK(*e.r_sigma == doctest::Approx(oracle::negative_wishart_edge_alpha2()).epsilon(1e-10));
    CHECK(*e.theta_c == doctest::Approx(oracle::negative_wishart_theta_c_alpha2()).epsilon(1e-10));
    CHECK(*e.case_tag == EdgeCase::nonpos_edge);
    CHECK(e.theta_max.is_infinite());
  }

  TEST_CASE("degenerate detection") {
    CHECK(detect_degenerate(point_mass_model(-1.0, 0.5)));
    CHECK(detect_degenerate(point_mass_model(-1.0, 1.0)));
    CHECK_FALSE(detect_degenerate(point_mass_model(-1.0, 2.0)));
    CHECK_FALSE(detect_degenerate(point_mass_model(1.0, 0.5)));
    const auto e = edge_solve(point_mass_model(-1.0, 0.5));
    CHECK(e.degenerate);
    CHECK_FALSE(e.r_sigma.has_value());
    // An atom at zero lowers the effective ratio.
    const std::vector<double> loc{-1.0, 0.0}, w{0.5, 0.5};
    CHECK(detect_degenerate(CovarianceModel(SpectralMeasure::from_atoms(loc, w), 2.0)));
  }

  TEST_CASE("finite threshold for the semicircle population") {
    const CovarianceModel m(SpectralMeasure::semicircle(2.0, 1.0), 1.0);
    const auto t = thresholds(m);
    CHECK(t.theta_max.value() == doctest::Approx(1.0 / 3.0));
    CHECK(t.x_c.value() == doctest::Approx(18.0).epsilon(1e-8));
    const auto e = edge_solve(m);
    CHECK(*e.case_tag == EdgeCase::pos_edge_finite_xc);
    CHECK(g_bar_sigma(e, m, 18.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(g_bar_sigma(e, m, 20.0) == 1.0 / 3.0);
    CHECK(g_bar_sigma(e, m, 30.0) == 1.0 / 3.0);
    CHECK(g_bar_sigma(e, m, 17.0) < 1.0 / 3.0);
  }

  TEST_CASE("branches solve the Dyson equation") {
    for (double alpha : {0.5, 1.0, 3.0}) {
      const auto m = point_mass_model(1.0, alpha);
      const auto e = edge_solve(m);
      for (double x : {*e.r_sigma + 0.1, *e.r_sigma + 2.0, 50.0}) {
        CAPTURE(alpha);
        CAPTURE(x);
        CHECK(g_sigma(e, m, x) == doctest::Approx(oracle::mp_g_small(alpha, x)).epsilon(1e-10));
        CHECK(g_bar_sigma(e, m, x) ==
              doctest::Approx(oracle::mp_g_large(alpha, x)).epsilon(1e-10));
      }
      CHECK_THROWS_AS((void)g_sigma(e, m, *e.r_sigma - 0.1), DomainError);
    }
  }

  TEST_CASE("density against Marchenko-Pastur, with and without a zero atom") {
    for (double alpha : {1.0, 2.0, 0.5}) {
      const auto m = point_mass_model(1.0, alpha);
      const double lo = oracle::mp_left_edge(alpha), hi = oracle::mp_right_edge(alpha);
      double worst = 0.0;
      for (double x : numerics::linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 40)) {
        worst = std::max(worst, std::abs(sigma_density(m, x, 1e-9) - oracle::mp_density(alpha, x)));
      }
      CAPTURE(alpha);
      CHECK(worst < 1e-6);
    }
    CHECK(sigma_zero_atom(point_mass_model(1.0, 0.5)) == doctest::Approx(0.5));
    CHECK(sigma_zero_atom(point_mass_model(1.0, 2.0)) == 0.0);
    const auto s = sigma_support(point_mass_model(1.0, 2.0));
    CHECK(s.lo == doctest::Approx(oracle::mp_left_edge(2.0)).epsilon(1e-6));
    CHECK(s.hi == doctest::Approx(oracle::mp_right_edge(2.0)).epsilon(1e-10));
  }

  TEST_CASE("complex Dyson solution is a Stieltjes transform") {
    const auto m = point_mass_model(1.0, 1.0);
    const auto g = g_sigma_complex(m, {2.0, 1e-3});
    CHECK(g.imag() < 0);
    const auto far = g_sigma_complex(m, {6.0, 1e-12});
    CHECK(far.real() == doctest::Approx(oracle::mp_g_small(1.0, 6.0)).epsilon(1e-8));
  }

  TEST_CASE("grid measure is a probability measure close to sigma") {
    const auto m = point_mass_model(1.0, 2.0);
    const auto grid = sigma_measure(m);
    CHECK(grid.mass_defect < 1e-3);
    CHECK(grid.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grid.measure.right_edge() == doctest::Approx(oracle::mp_right_edge(2.0)).epsilon(1e-9));
    const double mean = grid.measure.integrate([](double x) { return x; });
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-3));

    const auto half = sigma_measure(point_mass_model(1.0, 0.5));
    CHECK(half.measure.atom_mass(0.0) == doctest::Approx(0.5));
  }

  TEST_CASE("parallel density grid equals the serial reference") {
    const CovarianceModel m(SpectralMeasure::semicircle(2.0, 1.0), 1.0);
    const auto xs = numerics::linspace(0.1, 8.4, 64);
    CHECK(sigma_density_grid(m, xs, 1e-4) == sigma_density_grid_serial(m, xs, 1e-4));
  }
}
