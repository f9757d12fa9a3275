#pragma once

#include <cstdint>
#include <string>

#include "impact/cost_model.hpp"
#include "impact/market_model.hpp"
#include "impact/payoff_model.hpp"
#include "impact/qvi_solver.hpp"

namespace impact {

// One JSON file fully determines a run. Section layout mirrors the module
// types; parse(emit(config)) round-trips exactly.
struct RunConfig {
    MarketModel market;
    CostSpec cost;
    UtilitySpec utility;

    // grid section
    double T = 1.0;
    std::size_t nt = 51;  // 50 steps
    double x0 = 1.0;
    std::size_t nx = 41;
    double y0 = 0.0;
    std::size_t ny = 41;
    std::size_t nz = 21;

    // solver section
    int n_max = 8;
    double stop_tol = 1e-4;
    double exercise_tol = 1e-8;
    int quad_nodes = 7;

    // simulation section
    std::size_t n_paths = 20000;
    std::uint64_t seed = 20240815;
    double z_init = 1.0;

    std::string out_dir = "out";

    static RunConfig defaults();
    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    std::string to_json_text() const;
    void save(const std::string& path) const;

    // Hash of the canonical JSON emission; stamped into every artifact.
    std::uint64_t hash() const;

    // Derived pieces.
    GridSpec build_grid(const ConcavityConstants& constants) const;
    SolverConfig build_solver(const GridSpec& grid) const;
    void validate() const;  // throws input_error naming the offending field
};

}  // namespace impact
