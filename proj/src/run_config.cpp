#include "impact/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace impact {

using ordered_json = nlohmann::ordered_json;

RunConfig RunConfig::defaults() {
    RunConfig c;
    // Strong drift against a small concave cost: the optimal strategy
    // genuinely trades, so the default run exercises the jump machinery.
    c.market = MarketModel::constant(0.3, 0.2);
    c.cost = CostSpec::power(0.02, 0.5, 2.0, 1.0);
    c.utility = UtilitySpec::bounded_slope(0.5, 1.5);
    return c;
}

std::string RunConfig::to_json_text() const {
    ordered_json j;
    ordered_json m;
    if (market.drift_kind == CoefKind::Constant && market.vol_kind == CoefKind::Constant) {
        m["kind"] = "constant";
        m["b"] = market.drift_level;
        m["sigma"] = market.vol_level;
    } else {
        m["kind"] = "affine";
        m["drift_level"] = market.drift_level;
        m["drift_slope"] = market.drift_slope;
        m["b_sup"] = market.b_sup;
        m["vol_level"] = market.vol_level;
        m["vol_slope"] = market.vol_slope;
        m["s_sup"] = market.s_sup;
    }
    j["market"] = m;

    ordered_json co;
    switch (cost.kind) {
        case CostKind::Power:
            co["kind"] = "power";
            co["c0"] = cost.c0;
            co["alpha"] = cost.alpha;
            break;
        case CostKind::FixedPlusPower:
            co["kind"] = "fixed_plus_power";
            co["fixed"] = cost.fixed;
            co["c0"] = cost.c0;
            co["alpha"] = cost.alpha;
            break;
        case CostKind::Proportional:
            co["kind"] = "proportional";
            co["c0"] = cost.c0;
            break;
        case CostKind::Tabulated:
            co["kind"] = "tabulated";
            co["z"] = cost.tab_z;
            co["c"] = cost.tab_c;
            break;
    }
    co["M"] = cost.M;
    co["eps0"] = cost.eps0;
    j["cost"] = co;

    ordered_json u;
    if (utility.kind == UtilityKind::BoundedSlope) {
        u["kind"] = "bounded_slope";
        u["lambda"] = utility.lambda;
        u["Lambda"] = utility.Lambda;
    } else {
        u["kind"] = "cara";
        u["risk_aversion"] = utility.risk_aversion;
    }
    j["utility"] = u;

    j["grid"] = ordered_json{{"T", T},   {"nt", nt}, {"x0", x0}, {"nx", nx},
                             {"y0", y0}, {"ny", ny}, {"nz", nz}};
    j["solver"] = ordered_json{{"n_max", n_max},
                               {"stop_tol", stop_tol},
                               {"exercise_tol", exercise_tol},
                               {"quad_nodes", quad_nodes}};
    j["simulation"] =
        ordered_json{{"n_paths", n_paths}, {"seed", seed}, {"z_init", z_init}};
    j["out_dir"] = out_dir;
    return j.dump(2);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw input_error(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c = defaults();
    try {
        if (j.contains("market")) {
            const auto& m = j.at("market");
            const std::string kind = m.value("kind", "constant");
            if (kind == "constant")
                c.market = MarketModel::constant(m.value("b", 0.05), m.value("sigma", 0.2));
            else if (kind == "affine")
                c.market = MarketModel::affine(
                    m.at("drift_level"), m.at("drift_slope"), m.at("b_sup"),
                    m.at("vol_level"), m.at("vol_slope"), m.at("s_sup"));
            else
                throw input_error("config: unknown market.kind '" + kind + "'");
        }
        if (j.contains("cost")) {
            const auto& co = j.at("cost");
            const std::string kind = co.value("kind", "power");
            const double M = co.value("M", 2.0);
            const double eps0 = co.value("eps0", 1.0);
            if (kind == "power")
                c.cost = CostSpec::power(co.value("c0", 0.1), co.value("alpha", 0.5), M,
                                         eps0);
            else if (kind == "fixed_plus_power")
                c.cost = CostSpec::fixed_plus_power(co.at("fixed"), co.value("c0", 0.1),
                                                    co.value("alpha", 0.5), M, eps0);
            else if (kind == "proportional")
                c.cost = CostSpec::proportional(co.value("c0", 0.1), M);
            else if (kind == "tabulated")
                c.cost = CostSpec::tabulated(co.at("z").get<std::vector<double>>(),
                                             co.at("c").get<std::vector<double>>(), M,
                                             eps0);
            else
                throw input_error("config: unknown cost.kind '" + kind + "'");
        }
        if (j.contains("utility")) {
            const auto& u = j.at("utility");
            const std::string kind = u.value("kind", "bounded_slope");
            if (kind == "bounded_slope")
                c.utility = UtilitySpec::bounded_slope(u.value("lambda", 0.5),
                                                       u.value("Lambda", 1.5));
            else if (kind == "cara")
                c.utility = UtilitySpec::cara(u.value("risk_aversion", 1.0));
            else
                throw input_error("config: unknown utility.kind '" + kind + "'");
        }
        if (j.contains("grid")) {
            const auto& gr = j.at("grid");
            c.T = gr.value("T", c.T);
            c.nt = gr.value("nt", c.nt);
            c.x0 = gr.value("x0", c.x0);
            c.nx = gr.value("nx", c.nx);
            c.y0 = gr.value("y0", c.y0);
            c.ny = gr.value("ny", c.ny);
            c.nz = gr.value("nz", c.nz);
        }
        if (j.contains("solver")) {
            const auto& so = j.at("solver");
            c.n_max = so.value("n_max", c.n_max);
            c.stop_tol = so.value("stop_tol", c.stop_tol);
            c.exercise_tol = so.value("exercise_tol", c.exercise_tol);
            c.quad_nodes = so.value("quad_nodes", c.quad_nodes);
        }
        if (j.contains("simulation")) {
            const auto& si = j.at("simulation");
            c.n_paths = si.value("n_paths", c.n_paths);
            c.seed = si.value("seed", c.seed);
            c.z_init = si.value("z_init", c.z_init);
        }
        c.out_dir = j.value("out_dir", c.out_dir);
    } catch (const ordered_json::exception& e) {
        throw input_error(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return from_json_text(ss.str());
}

void RunConfig::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw input_error("config: cannot open for write " + path);
    f << to_json_text() << '\n';
}

std::uint64_t RunConfig::hash() const {
    // The output location does not affect results, so it stays out of the
    // provenance hash.
    RunConfig c = *this;
    c.out_dir.clear();
    return fnv1a(c.to_json_text());
}

void RunConfig::validate() const {
    if (!(T > 0.0)) throw input_error("config: grid.T must be > 0");
    if (nt < 2) throw input_error("config: grid.nt must be >= 2");
    if (nx < 2 || ny < 2) throw input_error("config: grid.nx, grid.ny must be >= 2");
    if (nz < 3 || nz % 2 == 0)
        throw input_error("config: grid.nz must be odd and >= 3");
    if (n_max < 1) throw input_error("config: solver.n_max must be >= 1");
    if (!(stop_tol > 0.0)) throw input_error("config: solver.stop_tol must be > 0");
    if (exercise_tol < 0.0) throw input_error("config: solver.exercise_tol must be >= 0");
    if (quad_nodes < 3 || quad_nodes % 2 == 0)
        throw input_error("config: solver.quad_nodes must be odd and >= 3");
    if (n_paths < 1) throw input_error("config: simulation.n_paths must be >= 1");
    if (std::abs(z_init) > cost.M + 1e-12)
        throw input_error("config: simulation.z_init must satisfy |z| <= M");
    if (utility.kind == UtilityKind::Cara &&
        (market.drift_kind != CoefKind::Constant || market.vol_kind != CoefKind::Constant))
        throw input_error("config: cara utility requires constant market coefficients");
}

GridSpec RunConfig::build_grid(const ConcavityConstants& constants) const {
    // x box: +-6 volatility standard deviations around x0 (at least a token
    // half-width for degenerate volatility), drift excursion added.
    const double x_half =
        std::max(6.0 * market.s_sup * std::sqrt(T) + market.b_sup * T, 0.5);
    // y box: worst-case trading gains/losses plus cost outlay, so clamping
    // stays rare; y out-of-box reads extrapolate linearly anyway.
    const double y_half =
        2.0 * cost.M * x_half + (n_max + 1) * cost.max_cost() + 1.0;
    return make_grid(T, nt, x0, x_half, nx, y0, y_half, ny, cost.M, nz, constants.eps1);
}

SolverConfig RunConfig::build_solver(const GridSpec& grid) const {
    SolverConfig s;
    s.grid = grid;
    s.n_max = n_max;
    s.stop_tol = stop_tol;
    s.exercise_tol = exercise_tol;
    s.quad_nodes = quad_nodes;
    return s;
}

}  // namespace impact
