#include <cmath>
#include <numeric>

#include <doctest.h>

#include "impact/market_model.hpp"

using namespace impact;

TEST_CASE("constant coefficients evaluate as given") {
    const auto m = MarketModel::constant(0.05, 0.2);
    const auto [b, s] = m.coefficients(0.3, 7.0);
    CHECK(b == 0.05);
    CHECK(s == 0.2);
    CHECK_THROWS_AS(m.coefficients(0.0, std::nan("")), input_error);
}

TEST_CASE("affine drift clamps at its sup bound") {
    const auto m = MarketModel::affine(0.0, 0.1, 0.5, 0.2, 0.01, 0.3);
    CHECK(m.drift(0.0, 10.0) == doctest::Approx(0.5));
    CHECK(m.drift(0.0, 1.0) == doctest::Approx(0.1));
    CHECK(m.vol(0.0, -100.0) == 0.0);  // clamped below at zero volatility
    CHECK(m.vol(0.0, 100.0) == doctest::Approx(0.3));
}

TEST_CASE("degenerate simulation is deterministic transport") {
    std::vector<double> grid{0.0, 0.5, 1.0};
    const auto still = simulate_paths(MarketModel::constant(0.0, 0.0), 0.0, 3.0, grid, 4, 7);
    for (std::size_t p = 0; p < 4; ++p)
        for (std::size_t j = 0; j < 3; ++j) CHECK(still.at(p, j) == 3.0);

    const auto drift = simulate_paths(MarketModel::constant(0.05, 0.0), 0.0, 1.0, grid, 2, 7);
    CHECK(drift.at(0, 2) == doctest::Approx(1.05).epsilon(1e-12));
}

TEST_CASE("simulated moments match arithmetic Brownian motion") {
    std::vector<double> grid(26);
    for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = j / 25.0;
    const std::size_t n = 100000;
    const auto ps = simulate_paths(MarketModel::constant(0.0, 0.2), 0.0, 1.0, grid, n, 42);
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) mean += ps.at(p, 25);
    mean /= n;
    double var = 0.0;
    for (std::size_t p = 0; p < n; ++p) var += (ps.at(p, 25) - mean) * (ps.at(p, 25) - mean);
    var /= (n - 1);
    const double se = 0.2 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - 1.0) < 3.0 * se);
    CHECK(var == doctest::Approx(0.04).epsilon(0.05));
}

TEST_CASE("path simulation is reproducible") {
    std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto m = MarketModel::constant(0.05, 0.2);
    const auto a = simulate_paths(m, 0.0, 1.0, grid, 64, 123);
    const auto b = simulate_paths(m, 0.0, 1.0, grid, 64, 123);
    CHECK(a.x_values == b.x_values);
    const auto c = simulate_paths(m, 0.0, 1.0, grid, 64, 124);
    CHECK(a.x_values != c.x_values);
}

TEST_CASE("quadrature weights and moments") {
    const auto m = MarketModel::constant(0.0, 0.2);
    const auto q = transition_quadrature(m, 0.0, 1.0, 0.01, 7);
    REQUIRE(q.size() == 7);
    double wsum = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& n : q) {
        wsum += n.weight;
        m1 += n.weight * n.x_next;
        m2 += n.weight * (n.x_next - 1.0) * (n.x_next - 1.0);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m2 == doctest::Approx(4e-4).epsilon(1e-9));
}

TEST_CASE("quadrature is exact for high moments") {
    // n nodes integrate polynomials up to degree 2n-1 against the Gaussian.
    const auto m = MarketModel::constant(0.0, 1.0);
    const auto q = transition_quadrature(m, 0.0, 0.0, 1.0, 7);
    double m4 = 0.0, m6 = 0.0;
    for (const auto& n : q) {
        m4 += n.weight * std::pow(n.x_next, 4);
        m6 += n.weight * std::pow(n.x_next, 6);
    }
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("degenerate volatility collapses the quadrature") {
    const auto m = MarketModel::constant(0.1, 0.0);
    const auto q = transition_quadrature(m, 0.0, 2.0, 0.5, 7);
    REQUIRE(q.size() == 1);
    CHECK(q[0].x_next == doctest::Approx(2.05));
    CHECK(q[0].weight == 1.0);
}

TEST_CASE("quadrature agrees with Monte Carlo for a smooth function") {
    const auto m = MarketModel::constant(0.05, 0.2);
    const auto q = transition_quadrature(m, 0.0, 1.0, 0.1, 7);
    auto g = [](double x) { return std::sin(3.0 * x) + x * x; };
    double quad = 0.0;
    for (const auto& n : q) quad += n.weight * g(n.x_next);

    std::vector<double> grid{0.0, 0.1};
    const std::size_t n_paths = 1000000;
    const auto ps = simulate_paths(m, 0.0, 1.0, grid, n_paths, 9);
    double mc = 0.0, ss = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) mc += g(ps.at(p, 1));
    mc /= n_paths;
    for (std::size_t p = 0; p < n_paths; ++p)
        ss += (g(ps.at(p, 1)) - mc) * (g(ps.at(p, 1)) - mc);
    const double se = std::sqrt(ss / (n_paths - 1) / n_paths);
    CHECK(std::abs(quad - mc) < 3.0 * se);
}

TEST_CASE("input validation") {
    const auto m = MarketModel::constant(0.0, 0.2);
    CHECK_THROWS_AS(transition_quadrature(m, 0.0, 1.0, -0.1, 7), input_error);
    CHECK_THROWS_AS(transition_quadrature(m, 0.0, 1.0, 0.1, 4), input_error);
    CHECK_THROWS_AS(simulate_paths(m, 0.0, 1.0, {0.0}, 2, 1), input_error);
    CHECK_THROWS_AS(simulate_paths(m, 0.0, 1.0, {0.0, 0.0}, 2, 1), input_error);
}
