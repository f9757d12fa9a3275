// Command-line runner: solve / simulate / verify / envelope / constants /
// cara / all, wired through a single JSON run config.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "impact/cara_reduced.hpp"
#include "impact/cost_model.hpp"
#include "impact/lattice.hpp"
#include "impact/market_model.hpp"
#include "impact/property_suite.hpp"
#include "impact/qvi_solver.hpp"
#include "impact/run_config.hpp"
#include "impact/strategy_engine.hpp"

namespace fs = std::filesystem;
using namespace impact;

namespace {

struct Ctx {
    RunConfig cfg;
    std::string out_dir;
    std::uint64_t config_hash = 0;
};

double slope_bounds_lambda(const RunConfig& c) {
    return c.utility.kind == UtilityKind::BoundedSlope ? c.utility.lambda : 1e-6;
}
double slope_bounds_Lambda(const RunConfig& c) {
    return c.utility.kind == UtilityKind::BoundedSlope ? c.utility.Lambda : 1e6;
}

ConcavityConstants pick_constants(const RunConfig& c) {
    // The positivized normalization is used whenever the literal one leaves
    // the large-jump bound untestable; the choice is recorded in reports.
    const auto lit =
        concavity_constants(c.cost, c.market, slope_bounds_lambda(c),
                            slope_bounds_Lambda(c), c.T, Normalization::Literal);
    if (lit.C1 > 2.0 * lit.C0) return lit;
    return concavity_constants(c.cost, c.market, slope_bounds_lambda(c),
                               slope_bounds_Lambda(c), c.T, Normalization::Positivized);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw input_error("cannot write " + path);
    f << text << '\n';
}

int do_solve(const Ctx& ctx) {
    const auto constants = pick_constants(ctx.cfg);
    const GridSpec grid = ctx.cfg.build_grid(constants);
    const SolverConfig sc = ctx.cfg.build_solver(grid);
    auto result = solve_vn(sc, ctx.cfg.market, ctx.cfg.cost, ctx.cfg.utility);
    for (const auto& s : result.surfaces) {
        std::ostringstream name;
        name << ctx.out_dir << "/surface_k" << s.n_jumps << ".bin";
        s.save(name.str(), ctx.config_hash, ctx.cfg.seed);
    }
    const PolicyField policy = extract_policy(result, sc, ctx.cfg.cost);
    policy.save(ctx.out_dir + "/policy.bin", ctx.config_hash, ctx.cfg.seed);
    write_text(ctx.out_dir + "/solve_report.json",
               result.report.to_json(ctx.config_hash, ctx.cfg.seed));
    std::cout << "solved k=" << result.report.k_done << ", surfaces and policy written to "
              << ctx.out_dir << "\n";
    return 0;
}

int do_simulate(const Ctx& ctx) {
    std::uint64_t hash = 0, seed = 0;
    if (!fs::exists(ctx.out_dir + "/policy.bin")) {
        std::cerr << "simulate: missing " << ctx.out_dir << "/policy.bin (run solve first)\n";
        return 3;
    }
    const PolicyField policy = PolicyField::load(ctx.out_dir + "/policy.bin", &hash, &seed);
    if (hash != ctx.config_hash) {
        std::cerr << "simulate: policy.bin was produced by a different config\n";
        return 4;
    }
    const auto paths = simulate_paths(ctx.cfg.market, 0.0, ctx.cfg.x0,
                                      policy.grid.t_nodes, ctx.cfg.n_paths, ctx.cfg.seed);
    const auto strategies =
        execute_policy(policy, paths, ctx.cfg.y0, ctx.cfg.z_init, ctx.cfg.cost);
    audit_self_financing(strategies, paths, ctx.cfg.y0, ctx.cfg.z_init, ctx.cfg.cost);
    export_trades_csv(strategies, ctx.out_dir + "/trades.csv");
    const auto constants = pick_constants(ctx.cfg);
    const auto stats = jump_statistics(strategies, constants.eps1);
    nlohmann::json j = nlohmann::json::parse(stats_to_json(stats));
    j["config_hash"] = ctx.config_hash;
    j["seed"] = ctx.cfg.seed;
    const auto mc = mc_value_estimate(strategies, ctx.cfg.utility);
    j["mc_mean"] = mc.mean;
    j["mc_half_width"] = mc.half_width;
    write_text(ctx.out_dir + "/jump_stats.json", j.dump(2));
    std::cout << "simulated " << ctx.cfg.n_paths << " paths, mean jumps " << stats.mean_n
              << "\n";
    return 0;
}

int do_verify(const Ctx& ctx) {
    std::vector<ValueSurface> surfaces;
    for (int k = 1; k <= ctx.cfg.n_max; ++k) {
        std::ostringstream name;
        name << ctx.out_dir << "/surface_k" << k << ".bin";
        if (!fs::exists(name.str())) break;
        std::uint64_t hash = 0;
        surfaces.push_back(ValueSurface::load(name.str(), &hash));
        if (hash != ctx.config_hash) {
            std::cerr << "verify: " << name.str() << " was produced by a different config\n";
            return 4;
        }
    }
    if (surfaces.empty()) {
        std::cerr << "verify: no surfaces in " << ctx.out_dir << " (run solve first)\n";
        return 3;
    }
    std::uint64_t phash = 0;
    const PolicyField policy = PolicyField::load(ctx.out_dir + "/policy.bin", &phash);
    if (phash != ctx.config_hash) {
        std::cerr << "verify: policy.bin was produced by a different config\n";
        return 4;
    }

    const auto constants = pick_constants(ctx.cfg);
    const GridSpec& g = surfaces.front().grid;
    const double x_half = 0.5 * (g.x_nodes.back() - g.x_nodes.front());
    const double growth_c =
        std::abs(ctx.cfg.utility.value(0.0)) +
        slope_bounds_Lambda(ctx.cfg) *
            (1.0 + 2.0 * ctx.cfg.cost.M * x_half + ctx.cfg.cost.max_cost());

    auto reports = run_surface_checks(surfaces, slope_bounds_lambda(ctx.cfg),
                                      slope_bounds_Lambda(ctx.cfg), ctx.cfg.cost,
                                      growth_c);
    const auto paths = simulate_paths(ctx.cfg.market, 0.0, ctx.cfg.x0, g.t_nodes,
                                      ctx.cfg.n_paths, ctx.cfg.seed);
    const auto strategies =
        execute_policy(policy, paths, ctx.cfg.y0, ctx.cfg.z_init, ctx.cfg.cost);
    const auto stats = jump_statistics(strategies, constants.eps1);
    const auto strat_reports = run_strategy_checks(stats, strategies, constants);
    reports.insert(reports.end(), strat_reports.begin(), strat_reports.end());

    write_text(ctx.out_dir + "/check_reports.json", reports_to_json(reports));
    int failed = 0;
    for (const auto& r : reports) {
        std::cout << (r.skipped ? "SKIP" : r.pass ? "PASS" : "FAIL") << "  " << r.name
                  << "\n";
        if (!r.pass && !r.skipped) ++failed;
    }
    return failed == 0 ? 0 : 1;
}

int do_envelope(const Ctx& ctx) {
    const double lim = 2.0 * ctx.cfg.cost.M;
    const int half = 128;
    std::vector<double> zs;
    for (int i = -half; i <= half; ++i) zs.push_back(lim * i / half);
    const auto env = subadditive_envelope(ctx.cfg.cost, zs, 16);
    std::ofstream f(ctx.out_dir + "/envelope.csv");
    if (!f) throw input_error("cannot write envelope.csv");
    f << "z,c\n";
    f.precision(17);
    for (std::size_t i = 0; i < zs.size(); ++i) f << zs[i] << ',' << env[i] << '\n';
    std::cout << "envelope written to " << ctx.out_dir << "/envelope.csv\n";
    return 0;
}

int do_constants(const Ctx& ctx) {
    const auto lit =
        concavity_constants(ctx.cfg.cost, ctx.cfg.market, slope_bounds_lambda(ctx.cfg),
                            slope_bounds_Lambda(ctx.cfg), ctx.cfg.T,
                            Normalization::Literal);
    const auto pos =
        concavity_constants(ctx.cfg.cost, ctx.cfg.market, slope_bounds_lambda(ctx.cfg),
                            slope_bounds_Lambda(ctx.cfg), ctx.cfg.T,
                            Normalization::Positivized);
    auto to_json = [](const ConcavityConstants& c) {
        return nlohmann::json{{"eta_32", c.eta_32},
                              {"eta_2", c.eta_2},
                              {"eta_3", c.eta_3},
                              {"gamma", c.gamma},
                              {"alpha1", c.alpha1},
                              {"beta1", c.beta1},
                              {"C0", c.C0},
                              {"C1", c.C1},
                              {"eps1", c.eps1},
                              {"c1_nonpositive", c.c1_nonpositive}};
    };
    nlohmann::json j;
    j["literal"] = to_json(lit);
    j["positivized"] = to_json(pos);
    j["assumptions"] =
        nlohmann::json::parse(check_assumptions(ctx.cfg.cost, 200).to_json());
    j["config_hash"] = ctx.config_hash;
    write_text(ctx.out_dir + "/constants.json", j.dump(2));
    std::cout << "constants written to " << ctx.out_dir << "/constants.json\n";
    return 0;
}

int do_cara(const Ctx& ctx) {
    if (ctx.cfg.utility.kind != UtilityKind::Cara) {
        std::cerr << "cara: config must select the cara utility\n";
        return 2;
    }
    const auto constants = pick_constants(ctx.cfg);
    const GridSpec grid = ctx.cfg.build_grid(constants);

    CaraProblem p;
    p.b0 = ctx.cfg.market.drift_level;
    p.s0 = ctx.cfg.market.vol_level;
    p.risk_aversion = ctx.cfg.utility.risk_aversion;
    p.cost = ctx.cfg.cost;
    p.t_nodes = grid.t_nodes;
    p.z_nodes = grid.z_nodes;
    p.M = ctx.cfg.cost.M;
    p.jump_rounds = ctx.cfg.n_max;
    const auto reduced = solve_cara(p);
    reduced.export_csv(ctx.out_dir + "/cara.csv");

    const SolverConfig sc = ctx.cfg.build_solver(grid);
    const auto result = solve_vn(sc, ctx.cfg.market, ctx.cfg.cost, ctx.cfg.utility);
    const std::size_t iy = grid.nearest_y_index(ctx.cfg.y0);
    const std::size_t ix = grid.nearest_x_index(ctx.cfg.x0);
    const double err = cross_check_factorization(
        result.surfaces.back(), grid.x_nodes[ix], grid.y_nodes[iy],
        ctx.cfg.utility.risk_aversion, reduced);
    nlohmann::json j;
    j["factorization_max_rel_error"] = err;
    j["config_hash"] = ctx.config_hash;
    write_text(ctx.out_dir + "/cara_report.json", j.dump(2));
    std::cout << "factorization max relative error " << err << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"concave-impact portfolio solver"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int workers = 0;
    app.add_option("--config", config_path, "run config JSON");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed_override, "seed override")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--workers", workers, "cap worker threads (0 = default)");

    for (const char* name : {"solve", "simulate", "verify", "envelope", "constants",
                             "cara", "all"})
        app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);

    try {
        Ctx ctx;
        ctx.cfg = config_path.empty() ? RunConfig::defaults()
                                      : RunConfig::from_file(config_path);
        if (seed_given) ctx.cfg.seed = seed_override;
        if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
        ctx.out_dir = ctx.cfg.out_dir;
        ctx.config_hash = ctx.cfg.hash();
#ifdef _OPENMP
        if (workers > 0) omp_set_num_threads(workers);
#endif
        fs::create_directories(ctx.out_dir);

        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "solve") return do_solve(ctx);
        if (sub == "simulate") return do_simulate(ctx);
        if (sub == "verify") return do_verify(ctx);
        if (sub == "envelope") return do_envelope(ctx);
        if (sub == "constants") return do_constants(ctx);
        if (sub == "cara") return do_cara(ctx);
        // all: chain the stages; the reduced cross-check only applies to
        // cara configs.
        int rc = do_solve(ctx);
        if (rc == 0) rc = do_simulate(ctx);
        if (rc == 0) rc = do_verify(ctx);
        if (rc == 0) rc = do_envelope(ctx);
        if (rc == 0) rc = do_constants(ctx);
        if (rc == 0 && ctx.cfg.utility.kind == UtilityKind::Cara) rc = do_cara(ctx);
        return rc;
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}
