#include <cmath>
#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "impact/qvi_solver.hpp"
#include "impact/strategy_engine.hpp"

using namespace impact;

namespace {

GridSpec toy_grid() {
    return make_grid(1.0, 3, 0.0, 2.0, 3, 0.0, 4.0, 9, 1.0, 3, 0.0);
}

PathSet drift_paths(double b, std::size_t n_paths, std::uint64_t seed,
                    const GridSpec& g, double sigma = 0.0) {
    return simulate_paths(MarketModel::constant(b, sigma), g.t_nodes.front(), 0.0,
                          g.t_nodes, n_paths, seed);
}

}  // namespace

TEST_CASE("hold-to-end strategy earns drift minus the final liquidation cost") {
    const auto g = toy_grid();
    const auto policy = PolicyField::make(g);  // never exercises
    const auto cost = CostSpec::power(0.5, 0.5, 1.0, 1.0);
    const auto paths = drift_paths(0.1, 4, 11, g);

    const auto strats = execute_policy(policy, paths, 0.0, 1.0, cost);
    for (const auto& sp : strats) {
        REQUIRE(sp.trades.size() == 1);  // only the forced terminal unwind
        CHECK(sp.trades[0].t == doctest::Approx(1.0));
        CHECK(sp.trades[0].z_before == doctest::Approx(1.0));
        CHECK(sp.trades[0].z_after == 0.0);
        CHECK(sp.n_jumps == 1);
        CHECK(sp.wealth_terminal ==
              doctest::Approx(0.1 - cost.cost(-1.0)).epsilon(1e-12));
    }
    CHECK(audit_self_financing(strats, paths, 0.0, 1.0, cost) <= 1e-10);
}

TEST_CASE("flat start never trades") {
    const auto g = toy_grid();
    const auto policy = PolicyField::make(g);
    const auto cost = CostSpec::power(0.5, 0.5, 1.0, 1.0);
    const auto paths = drift_paths(0.1, 3, 12, g, 0.2);
    const auto strats = execute_policy(policy, paths, 2.0, 0.0, cost);
    for (const auto& sp : strats) {
        CHECK(sp.trades.empty());
        CHECK(sp.wealth_terminal == 2.0);
        CHECK(sp.n_jumps == 0);
    }
    CHECK(audit_self_financing(strats, paths, 2.0, 0.0, cost) == 0.0);
}

TEST_CASE("immediate liquidation policy pays the cost up front") {
    const auto g = toy_grid();
    auto policy = PolicyField::make(g);
    const std::size_t iz_p = g.exact_z_index(1.0);
    const std::size_t iz0 = g.zero_z_index();
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
        for (std::size_t iy = 0; iy < g.ny(); ++iy) {
            policy.exercise[policy.idx(0, ix, iy, iz_p)] = 1;
            policy.target_idx[policy.idx(0, ix, iy, iz_p)] =
                static_cast<std::int32_t>(iz0);
        }
    const auto cost = CostSpec::power(0.5, 0.5, 1.0, 1.0);
    const auto paths = drift_paths(0.1, 4, 13, g, 0.3);
    const auto strats = execute_policy(policy, paths, 0.0, 1.0, cost);
    for (const auto& sp : strats) {
        REQUIRE(sp.trades.size() == 1);
        CHECK(sp.trades[0].t == 0.0);
        CHECK(sp.wealth_terminal == doctest::Approx(-cost.cost(-1.0)).epsilon(1e-12));
    }
    CHECK(audit_self_financing(strats, paths, 0.0, 1.0, cost) <= 1e-10);
}

TEST_CASE("self-financing audit catches tampered wealth") {
    const auto g = toy_grid();
    const auto policy = PolicyField::make(g);
    const auto cost = CostSpec::power(0.5, 0.5, 1.0, 1.0);
    const auto paths = drift_paths(0.1, 2, 14, g);
    auto strats = execute_policy(policy, paths, 0.0, 1.0, cost);
    strats[0].wealth_terminal += 1e-3;
    CHECK_THROWS_AS(audit_self_financing(strats, paths, 0.0, 1.0, cost),
                    solver_invariant_error);
}

TEST_CASE("jump statistics on a synthetic trade log") {
    const double eps1 = 0.1;
    std::vector<StrategyPath> strats(4);
    // Path 0: one small jump landing at zero, then nothing.
    strats[0].trades = {{0.0, 0.05, 0.0, 0.01, 0.0}};
    // Path 1: small jump landing off zero, immediately followed by a large one.
    strats[1].trades = {{0.0, 0.06, 0.01, 0.01, 0.0}, {0.5, 0.01, 1.0, 0.3, 0.0}};
    // Path 2: large jump only, plus a zero-size trade that must be ignored.
    strats[2].trades = {{0.0, 1.0, 0.0, 0.5, 0.0}, {0.5, 0.0, 0.0, 0.0, 0.0}};
    // Path 3: two small jumps, both to zero-distance neighbors of zero.
    strats[3].trades = {{0.0, 0.05, 0.0, 0.01, 0.0}, {0.5, 0.05, 0.0, 0.01, 0.0}};

    const auto s = jump_statistics(strats, eps1);
    CHECK(s.n_paths == 4);
    CHECK(s.n_small == 4);
    CHECK(s.n_large == 2);
    CHECK(s.mean_n == doctest::Approx(6.0 / 4.0));
    // Histogram: one path with 0 small jumps, two with 1, one with 2.
    REQUIRE(s.small_jump_counts.size() == 3);
    CHECK(s.small_jump_counts[0] == 1);
    CHECK(s.small_jump_counts[1] == 2);
    CHECK(s.small_jump_counts[2] == 1);
    CHECK(s.tail_prob(1) == doctest::Approx(0.75));
    CHECK(s.tail_prob(2) == doctest::Approx(0.25));
    CHECK(s.tail_prob(3) == 0.0);
    // 3 of 4 small jumps land exactly at zero.
    CHECK(s.land_zero_rate == doctest::Approx(0.75));
    // Among small jumps with a successor trade (paths 1 and 3), one of two
    // successors is large.
    CHECK(s.large_jump_freq == doctest::Approx(0.5));

    CHECK_THROWS_AS(jump_statistics({}, eps1), input_error);
    const auto json = stats_to_json(s);
    CHECK(json.find("land_zero_rate") != std::string::npos);
    CHECK(json.find("small_jump_counts") != std::string::npos);
}

TEST_CASE("monte carlo estimate is exact for deterministic wealth") {
    const auto g = toy_grid();
    const auto policy = PolicyField::make(g);
    const auto cost = CostSpec::power(0.5, 0.5, 1.0, 1.0);
    const auto paths = drift_paths(0.1, 128, 15, g);  // sigma = 0
    const auto strats = execute_policy(policy, paths, 0.0, 1.0, cost);
    const auto u = UtilitySpec::bounded_slope(0.5, 1.5);
    const auto est = mc_value_estimate(strats, u);
    CHECK(est.n == 128);
    CHECK(est.half_width <= 1e-12);  // rounding noise only
    CHECK(est.mean == doctest::Approx(u.value(0.1 - cost.cost(-1.0))).epsilon(1e-12));
    CHECK_THROWS_AS(
        mc_value_estimate(std::vector<StrategyPath>(strats.begin(), strats.begin() + 50),
                          u),
        input_error);
}

TEST_CASE("trade log export format") {
    const auto g = toy_grid();
    const auto policy = PolicyField::make(g);
    const auto cost = CostSpec::power(0.5, 0.5, 1.0, 1.0);
    const auto paths = drift_paths(0.1, 3, 16, g);
    const auto strats = execute_policy(policy, paths, 0.0, 1.0, cost);
    const std::string file = "trades_export_test.csv";
    export_trades_csv(strats, file);
    std::ifstream f(file);
    std::string header;
    std::getline(f, header);
    CHECK(header == "path_id,t,z_before,z_after,cost_paid,y_after");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(f, line)) ++rows;
    CHECK(rows == 3);  // one forced liquidation per path
    std::remove(file.c_str());
}

TEST_CASE("solved policy simulates cleanly end to end") {
    const auto g = make_grid(1.0, 4, 1.0, 0.6, 9, 0.0, 4.0, 17, 1.0, 5, 0.1);
    const auto cost = CostSpec::power(0.2, 0.5, 1.0, 1.0);
    const auto market = MarketModel::constant(0.05, 0.2);
    SolverConfig sc;
    sc.grid = g;
    sc.n_max = 2;
    const auto res = solve_vn(sc, market, cost, UtilitySpec::bounded_slope(0.5, 1.5));
    const auto policy = extract_policy(res, sc, cost);

    const auto paths =
        simulate_paths(market, g.t_nodes.front(), 1.0, g.t_nodes, 300, 99);
    const auto strats = execute_policy(policy, paths, 0.0, 0.5, cost);
    REQUIRE(strats.size() == 300);
    CHECK(audit_self_financing(strats, paths, 0.0, 0.5, cost) <= 1e-10);

    const auto stats = jump_statistics(strats, 0.1);
    CHECK(stats.mean_n >= 1.0);  // at least the forced unwind on every path
    const auto est = mc_value_estimate(strats, UtilitySpec::bounded_slope(0.5, 1.5));
    CHECK(std::isfinite(est.mean));
    CHECK(est.half_width > 0.0);
}
