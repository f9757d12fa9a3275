// Times the OpenMP solver kernels against the serial reference on one
// backward layer and checks they agree bitwise.

#include <chrono>
#include <cstring>
#include <iostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "impact/qvi_solver.hpp"
#include "impact/run_config.hpp"

using namespace impact;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int repeats = 5;
    if (argc > 1) repeats = std::atoi(argv[1]);

    RunConfig cfg = RunConfig::defaults();
    const auto constants =
        concavity_constants(cfg.cost, cfg.market, cfg.utility.lambda, cfg.utility.Lambda,
                            cfg.T, Normalization::Positivized);
    const GridSpec g = cfg.build_grid(constants);
    const auto cmat = cost_matrix(g, cfg.cost);
    const auto orders = tie_orders(g, SolverConfig{}.tie_break);
    const auto quad = make_quadrature_table(cfg.market, g, cfg.quad_nodes);

    const std::size_t ss = g.slice_size();
    std::vector<double> in(ss), next(ss);
    terminal_layer(g, cfg.utility, cfg.cost, in.data());
    terminal_layer(g, cfg.utility, cfg.cost, next.data());

    std::vector<double> bar_p(ss), bar_s(ss), hat_p(ss), hat_s(ss);
    std::vector<std::int32_t> psi_p(ss), psi_s(ss);
    std::vector<std::uint8_t> cont_p(ss), cont_s(ss);
    KernelStats st;

#ifdef _OPENMP
    std::cout << "threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "threads: 1 (no OpenMP)\n";
#endif

    double tp = 0.0, ts = 0.0;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = clk::now();
        kernels::bar_slice(g, in.data(), cmat, orders, bar_p.data(), psi_p.data(), st);
        kernels::hat_slice(g, next.data(), bar_p.data(), &quad.entries[0], 1e-8,
                           hat_p.data(), cont_p.data(), st);
        tp += seconds_since(t0);

        t0 = clk::now();
        serial_ref::bar_slice(g, in.data(), cmat, orders, bar_s.data(), psi_s.data(), st);
        serial_ref::hat_slice(g, next.data(), bar_s.data(), &quad.entries[0], 1e-8,
                              hat_s.data(), cont_s.data(), st);
        ts += seconds_since(t0);
    }

    const bool same =
        std::memcmp(bar_p.data(), bar_s.data(), ss * sizeof(double)) == 0 &&
        std::memcmp(hat_p.data(), hat_s.data(), ss * sizeof(double)) == 0 &&
        std::memcmp(psi_p.data(), psi_s.data(), ss * sizeof(std::int32_t)) == 0 &&
        std::memcmp(cont_p.data(), cont_s.data(), ss * sizeof(std::uint8_t)) == 0;

    std::cout << "parallel layer: " << tp / repeats << " s\n";
    std::cout << "serial layer:   " << ts / repeats << " s\n";
    std::cout << "speedup:        " << ts / tp << "x\n";
    std::cout << "bitwise match:  " << (same ? "yes" : "NO") << "\n";
    return same ? 0 : 1;
}
