#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "impact/cara_reduced.hpp"
#include "impact/qvi_solver.hpp"

using namespace impact;

namespace {

std::vector<double> uniform_nodes(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

CaraProblem base_problem() {
    CaraProblem p;
    p.b0 = 0.0;
    p.s0 = 0.2;
    p.risk_aversion = 1.0;
    p.cost = CostSpec::power(1.0, 0.5, 2.0, 1.0);
    p.t_nodes = uniform_nodes(0.0, 1.0, 5);
    p.z_nodes = uniform_nodes(-1.0, 1.0, 5);
    p.M = 2.0;
    return p;
}

}  // namespace

TEST_CASE("reduced terminal slice is the liquidation premium") {
    const auto p = base_problem();
    const auto sol = solve_cara(p);
    const std::size_t jt = p.t_nodes.size() - 1;
    for (std::size_t iz = 0; iz < p.z_nodes.size(); ++iz)
        CHECK(sol.log_w[sol.idx(jt, iz)] ==
              doctest::Approx(p.cost.cost(-p.z_nodes[iz])).epsilon(1e-12));
    // W(T, 1) = exp(a c(-1)) = e for the unit square-root cost.
    CHECK(sol.w(jt, 4) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("flat column stays at one without drift") {
    const auto p = base_problem();
    const auto sol = solve_cara(p);
    for (std::size_t jt = 0; jt < p.t_nodes.size(); ++jt) {
        CHECK(sol.log_w[sol.idx(jt, 2)] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sol.w(jt, 2) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("immediate liquidation bounds the whole surface without drift") {
    // b0 = 0: holding only adds variance penalty, so jumping to zero now is
    // optimal and log W(t,z) = a c(-z) at every time.
    const auto p = base_problem();
    const auto sol = solve_cara(p);
    for (std::size_t jt = 0; jt < p.t_nodes.size(); ++jt)
        for (std::size_t iz = 0; iz < p.z_nodes.size(); ++iz) {
            const double bound = p.risk_aversion * p.cost.cost(-p.z_nodes[iz]);
            CHECK(sol.log_w[sol.idx(jt, iz)] <= bound + 1e-12);
            CHECK(sol.log_w[sol.idx(jt, iz)] ==
                  doctest::Approx(bound).epsilon(1e-12));
        }
    // And the policy says so: before T every nonzero column jumps to zero.
    for (std::size_t jt = 0; jt + 1 < p.t_nodes.size(); ++jt)
        for (std::size_t iz = 0; iz < p.z_nodes.size(); ++iz) {
            if (iz == 2) continue;
            CHECK(sol.exercise[sol.idx(jt, iz)] == 1);
            CHECK(sol.target_idx[sol.idx(jt, iz)] == 2);
        }
}

TEST_CASE("deterministic drift run has a closed-form value") {
    // s0 = 0, b0 = 0.5: holding z = 1 to T earns drift against the final
    // unit liquidation cost, so log W(0, 1) = a c(-1) - a b0 T = 0.5.
    auto p = base_problem();
    p.b0 = 0.5;
    p.s0 = 0.0;
    const auto sol = solve_cara(p);
    CHECK(sol.log_w[sol.idx(0, 4)] == doctest::Approx(0.5).epsilon(1e-12));
    // Holding beats any jump before T on the z = 1 column.
    for (std::size_t jt = 0; jt + 1 < p.t_nodes.size(); ++jt)
        CHECK(sol.exercise[sol.idx(jt, 4)] == 0);
}

TEST_CASE("more same-instant rounds can only lower the surface") {
    auto p1 = base_problem();
    p1.b0 = 0.3;
    p1.jump_rounds = 1;
    auto p8 = p1;
    p8.jump_rounds = 8;
    const auto s1 = solve_cara(p1);
    const auto s8 = solve_cara(p8);
    for (std::size_t i = 0; i < s1.log_w.size(); ++i)
        CHECK(s8.log_w[i] <= s1.log_w[i] + 1e-12);
}

TEST_CASE("reduced problem validation") {
    auto p = base_problem();
    p.z_nodes = {-1.0, 0.5, 1.0};  // asymmetric
    CHECK_THROWS_AS(solve_cara(p), input_error);
    p = base_problem();
    p.z_nodes = {-1.0, 1.0};  // missing zero and too few
    CHECK_THROWS_AS(solve_cara(p), input_error);
    p = base_problem();
    p.risk_aversion = 0.0;
    CHECK_THROWS_AS(solve_cara(p), input_error);
    p = base_problem();
    p.t_nodes = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(solve_cara(p), input_error);
}

TEST_CASE("csv export shape") {
    const auto sol = solve_cara(base_problem());
    const std::string file = "cara_export_test.csv";
    sol.export_csv(file);
    std::ifstream f(file);
    std::string header;
    std::getline(f, header);
    CHECK(header == "t,z,value,action,target");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(f, line)) ++rows;
    CHECK(rows == sol.t_nodes.size() * sol.z_nodes.size());
    std::remove(file.c_str());
}

TEST_CASE("factorization cross-check against the generic solver") {
    // Shared (t, z) grid; the generic solve runs on the full 4d lattice with
    // exponential utility, the reduced solve on (t, z) only.
    const double a = 1.0;
    const auto cost = CostSpec::power(0.1, 0.5, 1.0, 1.0);
    const auto market = MarketModel::constant(0.05, 0.2);
    const auto g = make_grid(0.5, 3, 1.0, 0.9, 9, 0.0, 3.5, 141, 1.0, 5, 0.0);

    SolverConfig sc;
    sc.grid = g;
    sc.n_max = 6;
    sc.stop_tol = 1e-10;
    const auto res = solve_vn(sc, market, cost, UtilitySpec::cara(a));

    CaraProblem p;
    p.b0 = 0.05;
    p.s0 = 0.2;
    p.risk_aversion = a;
    p.cost = cost;
    p.t_nodes = g.t_nodes;
    p.z_nodes = g.z_nodes;
    p.M = 1.0;
    const auto reduced = solve_cara(p);

    const double err = cross_check_factorization(res.surfaces.back(), 1.0, 0.0, a, reduced);
    CHECK(err < 0.02);

    // Negative control: a mismatched risk aversion breaks the factorization.
    const auto wrong = [&] {
        auto q = p;
        q.risk_aversion = 2.0;
        return solve_cara(q);
    }();
    CHECK(cross_check_factorization(res.surfaces.back(), 1.0, 0.0, 2.0, wrong) >
          5.0 * err + 0.01);

    // Mismatched time grid is rejected.
    auto shifted = reduced;
    shifted.t_nodes[1] += 0.01;
    CHECK_THROWS_AS(cross_check_factorization(res.surfaces.back(), 1.0, 0.0, a, shifted),
                    input_error);
}
