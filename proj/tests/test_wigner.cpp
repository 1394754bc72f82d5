#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rmtldp/numerics.hpp"
#include "rmtldp/wigner.hpp"

using namespace rmtldp;

namespace {

DeformedWignerModel atoms_model(std::vector<double> loc, std::vector<double> w) {
  return DeformedWignerModel(SpectralMeasure::from_atoms(loc, w));
}

}  // namespace

TEST_SUITE("wigner") {
  TEST_CASE("K transform inverts the Stieltjes transform") {
    const auto semi = SpectralMeasure::semicircle(0.0, 1.0);
    CHECK(k_transform(semi, 1.0) == doctest::Approx(1.25).epsilon(1e-12));
    for (double y : {0.1, 0.5, 1.5}) {
      CHECK(semi.stieltjes(k_transform(semi, y)) == doctest::Approx(y).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)k_transform(semi, 2.5), DomainError);
  }

  TEST_CASE("undeformed model reduces to the semicircle edge and rate") {
    const auto m = atoms_model({0.0}, {1.0});
    const auto e = dw_edge(m);
    CHECK(e.y_c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.r_edge == doctest::Approx(2.0).epsilon(1e-12));
    const auto [g, gbar] = dw_branches(m, e, 3.0);
    CHECK(g == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(gbar == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    for (double x : {2.0, 2.5, 3.0, 6.0}) {
      CAPTURE(x);
      CHECK(std::abs(dw_rate(m, e, x).value() - (x == 2.0 ? 0.0 : oracle::goe_rate(x))) < 1e-9);
    }
    CHECK(dw_rate(m, e, 1.9).is_infinite());
    const DeformedWignerModel complex_model(SpectralMeasure::from_atoms(std::vector<double>{0.0},
                                                                        std::vector<double>{1.0}),
                                            2);
    CHECK(dw_rate(complex_model, 3.0).value() ==
          doctest::Approx(2.0 * dw_rate(m, 3.0).value()).epsilon(1e-12));
  }

  TEST_CASE("semicircle deformation has a finite threshold") {
    const DeformedWignerModel m(SpectralMeasure::semicircle(0.0, 1.0));
    const auto e = dw_edge(m);
    CHECK(e.y_c == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-9));
    CHECK(e.r_edge == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
    CHECK(e.x_c_dw.value() == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(dw_h(m, 3.0) == doctest::Approx(4.0).epsilon(1e-12));
    // Beyond x_c the larger branch follows the linear piece y + r(mu_d).
    const auto [g, gbar] = dw_branches(m, e, 3.5);
    CHECK(gbar == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(g < e.y_c);
  }

  TEST_CASE("two-point deformation edge") {
    const auto m = atoms_model({-1.0, 1.0}, {0.5, 0.5});
    CHECK(dw_edge(m).r_edge == doctest::Approx(oracle::two_point_wigner_edge()).epsilon(1e-9));
    const auto s = free_convolution_support(m);
    CHECK(s.hi == doctest::Approx(oracle::two_point_wigner_edge()).epsilon(1e-9));
    CHECK(s.lo == doctest::Approx(-oracle::two_point_wigner_edge()).epsilon(1e-9));
  }

  TEST_CASE("free convolution with a point mass is the semicircle") {
    const auto m = atoms_model({0.0}, {1.0});
    double worst = 0.0;
    for (double x : numerics::linspace(-1.8, 1.8, 37)) {
      worst = std::max(worst,
                       std::abs(free_convolution_density(m, x, 1e-9) -
                                oracle::semicircle_density(0.0, 2.0, x)));
    }
    CHECK(worst < 1e-6);
    const auto g = free_convolution_stieltjes(m, {3.0, 1e-12});
    CHECK(g.real() == doctest::Approx(oracle::semicircle_stieltjes(0.0, 2.0, 3.0)).epsilon(1e-9));
    const auto grid = free_convolution_measure(m);
    CHECK(grid.mass_defect < 1e-3);
  }

  TEST_CASE("variational form for the deformed model") {
    const auto m = atoms_model({0.0}, {1.0});
    for (double x : {2.5, 4.0}) {
      CHECK(std::abs(dw_rate_variational(m, x) - dw_rate(m, x).value()) < 2e-3);
    }
  }

  TEST_CASE("epsilon cap moves the top mass onto the edge") {
    const DeformedWignerModel m(SpectralMeasure::semicircle(0.0, 1.0));
    const auto capped = dw_epsilon_cap(m, 0.25);
    CHECK(capped.mu_d().right_edge() == 1.0);
    CHECK(capped.mu_d().atom_mass(1.0) > 0.0);
    const auto e = dw_edge(capped);
    const auto e0 = dw_edge(m);
    for (double x : {3.0, 4.0}) {
      CHECK(dw_rate(capped, e, x).value() <= dw_rate(m, e0, x).value() + 1e-9);
    }
  }
}
