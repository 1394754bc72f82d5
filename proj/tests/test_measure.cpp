#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "rmtldp/measure.hpp"
#include "rmtldp/numerics.hpp"

using namespace rmtldp;

TEST_SUITE("numerics") {
  TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    const auto rule = numerics::gauss_legendre(8);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      s += rule.weights[i] * std::pow(rule.nodes[i], 14);
    }
    CHECK(s == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
  }

  TEST_CASE("adaptive integration handles an endpoint square-root singularity") {
    const double v = numerics::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                                         1e-10, 1e-10);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
    const double w = numerics::integrate([](double x) { return std::sin(x); }, 0.0,
                                         std::numbers::pi);
    CHECK(w == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("bisection and golden section") {
    const double r = numerics::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-15);
    CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(numerics::bisect([](double x) { return x * x + 1.0; }, 0.0, 1.0, 1e-12),
                    SolverError);
    const auto [arg, val] =
        numerics::golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3) + 1.0; }, 0, 1);
    CHECK(arg == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(val == doctest::Approx(1.0));
  }

  TEST_CASE("grids include both ends") {
    const auto l = numerics::linspace(1.0, 2.0, 11);
    CHECK(l.size() == 11);
    CHECK(l.front() == 1.0);
    CHECK(l.back() == 2.0);
    const auto g = numerics::logspace(1e-3, 10.0, 5);
    CHECK(g.front() == doctest::Approx(1e-3));
    CHECK(g.back() == doctest::Approx(10.0));
  }
}

TEST_SUITE("measure") {
  TEST_CASE("atoms: validation, edges and transforms") {
    const std::vector<double> loc{2.0, -1.0}, w{0.25, 0.75};
    const auto m = SpectralMeasure::from_atoms(loc, w);
    CHECK(m.left_edge() == -1.0);
    CHECK(m.right_edge() == 2.0);
    CHECK(m.atom_mass(2.0) == 0.25);
    CHECK(m.stieltjes(3.0) == doctest::Approx(0.25 / 1.0 + 0.75 / 4.0));
    CHECK(m.stieltjes_derivative(3.0) == doctest::Approx(-0.25 - 0.75 / 16.0));
    CHECK(m.stieltjes_at_right_edge().is_infinite());
    CHECK(m.cdf(0.0) == doctest::Approx(0.75));
    CHECK(m.cdf_left(-1.0) == 0.0);
    CHECK(m.cdf(-1.0) == doctest::Approx(0.75));
    CHECK(m.quantile(0.5) == -1.0);
    CHECK(m.quantile(0.9) == 2.0);

    const std::vector<double> bad_w{0.5, 0.4};
    CHECK_THROWS_AS(SpectralMeasure::from_atoms(loc, bad_w), DomainError);
    const std::vector<double> neg_w{1.5, -0.5};
    CHECK_THROWS_AS(SpectralMeasure::from_atoms(loc, neg_w), DomainError);
  }

  TEST_CASE("semicircle transform and CDF match the closed form") {
    const auto m = SpectralMeasure::semicircle(2.0, 1.0);
    for (double z : {3.001, 3.5, 5.0, 20.0}) {
      CHECK(m.stieltjes(z) == doctest::Approx(oracle::semicircle_stieltjes(2.0, 1.0, z))
                                  .epsilon(1e-12));
    }
    CHECK(m.stieltjes_at_right_edge().value() == doctest::Approx(2.0));
    CHECK(m.cdf(2.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.quantile(0.5) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
    // Complex transform far from the support agrees with the real one.
    const auto gz = m.stieltjes(std::complex<double>(5.0, 1e-9));
    CHECK(gz.real() == doctest::Approx(m.stieltjes(5.0)).epsilon(1e-9));
  }

  TEST_CASE("from_density recovers the uniform law") {
    const auto m = SpectralMeasure::from_density([](double) { return 3.0; }, {0.0, 2.0}, 64);
    CHECK(m.raw_mass() == doctest::Approx(6.0).epsilon(1e-10));
    // Table CDFs are linear inside quadrature cells.
    CHECK(m.cdf(0.5) == doctest::Approx(0.25).epsilon(1e-3));
    const double mean = m.integrate([](double x) { return x; });
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.stieltjes(3.0) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-6));
  }

  TEST_CASE("compose mixes atoms and densities") {
    auto part = SpectralMeasure::make_part(DensityKind::uniform, {.a = 1.0, .b = 3.0}, {1.0, 3.0},
                                           0.5, 32, false, false);
    CHECK(part.mass == doctest::Approx(0.5));
    const auto m = SpectralMeasure::compose({{0.0, 0.5}}, {part});
    CHECK(m.cdf(2.0) == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(m.right_edge() == 3.0);
    CHECK_THROWS_AS(SpectralMeasure::compose({{0.0, 0.4}}, {part}), DomainError);
  }

  TEST_CASE("reflection and zero-atom removal") {
    const std::vector<double> loc{0.0, 1.0, 3.0}, w{0.5, 0.25, 0.25};
    const auto m = SpectralMeasure::from_atoms(loc, w);
    const auto r = m.reflected();
    CHECK(r.left_edge() == -3.0);
    CHECK(r.right_edge() == 0.0);
    CHECK(r.atom_mass(-1.0) == 0.25);

    const auto [tau, alpha2] = remove_zero_atom(m, 2.0);
    CHECK(alpha2 == doctest::Approx(1.0));
    CHECK(tau.atom_mass(0.0) == 0.0);
    CHECK(tau.atom_mass(0.5) == doctest::Approx(0.5));
    CHECK(tau.atom_mass(1.5) == doctest::Approx(0.5));
  }

  TEST_CASE("equality compares defining data") {
    CHECK(SpectralMeasure::semicircle(0, 1) == SpectralMeasure::semicircle(0, 1));
    CHECK_FALSE(SpectralMeasure::semicircle(0, 1) == SpectralMeasure::semicircle(0, 1, 64));
  }
}
