#include "impact/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace impact {

namespace {

double clamp_abs(double v, double bound) {
    return std::clamp(v, -bound, bound);
}

}  // namespace

MarketModel MarketModel::constant(double b, double sigma) {
    if (!std::isfinite(b) || !std::isfinite(sigma) || sigma < 0.0)
        throw input_error("constant market: b must be finite, sigma finite and >= 0");
    MarketModel m;
    m.drift_kind = CoefKind::Constant;
    m.drift_level = b;
    m.vol_kind = CoefKind::Constant;
    m.vol_level = sigma;
    m.b_sup = std::abs(b);
    m.s_sup = sigma;
    m.lipschitz_k = 0.0;
    return m;
}

MarketModel MarketModel::affine(double drift_level, double drift_slope, double b_sup,
                                double vol_level, double vol_slope, double s_sup) {
    if (b_sup < 0.0 || s_sup < 0.0)
        throw input_error("affine market: sup bounds must be >= 0");
    MarketModel m;
    m.drift_kind = CoefKind::AffineClamped;
    m.drift_level = drift_level;
    m.drift_slope = drift_slope;
    m.vol_kind = CoefKind::AffineClamped;
    m.vol_level = vol_level;
    m.vol_slope = vol_slope;
    m.b_sup = b_sup;
    m.s_sup = s_sup;
    m.lipschitz_k = std::max(std::abs(drift_slope), std::abs(vol_slope));
    return m;
}

double MarketModel::drift(double t, double x) const {
    (void)t;
    if (drift_kind == CoefKind::Constant) return drift_level;
    return clamp_abs(drift_level + drift_slope * x, b_sup);
}

double MarketModel::vol(double t, double x) const {
    (void)t;
    if (vol_kind == CoefKind::Constant) return vol_level;
    return std::clamp(vol_level + vol_slope * x, 0.0, s_sup);
}

std::pair<double, double> MarketModel::coefficients(double t, double x) const {
    if (!std::isfinite(x)) throw input_error("coefficients: non-finite x");
    return {drift(t, x), vol(t, x)};
}

PathSet simulate_paths(const MarketModel& model, double t0, double x0,
                       const std::vector<double>& time_grid, std::size_t n_paths,
                       std::uint64_t seed) {
    if (time_grid.size() < 2) throw input_error("simulate_paths: need >= 2 times");
    for (std::size_t j = 1; j < time_grid.size(); ++j)
        if (!(time_grid[j] > time_grid[j - 1]))
            throw input_error("simulate_paths: time grid must be strictly increasing");
    if (std::abs(time_grid.front() - t0) > 1e-12)
        throw input_error("simulate_paths: time grid must start at t0");

    PathSet out;
    out.t0 = t0;
    out.time_grid = time_grid;
    out.n_paths = n_paths;
    out.seed = seed;
    const std::size_t nt = time_grid.size();
    out.x_values.assign(n_paths * nt, 0.0);

#pragma omp parallel for schedule(static)
    for (long long pi = 0; pi < static_cast<long long>(n_paths); ++pi) {
        const auto p = static_cast<std::size_t>(pi);
        // Per-path stream derived from (seed, path index) so results do not
        // depend on worker count or scheduling.
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(0x9E3779B97F4A7C15ULL + p)));
        std::normal_distribution<double> normal(0.0, 1.0);
        double x = x0;
        out.x_values[p * nt] = x;
        for (std::size_t j = 1; j < nt; ++j) {
            const double t = time_grid[j - 1];
            const double dt = time_grid[j] - t;
            const auto [b, s] = model.coefficients(t, x);
            x += b * dt + s * std::sqrt(dt) * normal(rng);
            out.x_values[p * nt + j] = x;
        }
    }
    return out;
}

void export_paths_csv(const PathSet& paths, const std::string& file) {
    std::ofstream f(file);
    if (!f) throw input_error("export_paths_csv: cannot open " + file);
    f << "path_id,t,x\n";
    f.precision(17);
    for (std::size_t p = 0; p < paths.n_paths; ++p)
        for (std::size_t j = 0; j < paths.n_times(); ++j)
            f << p << ',' << paths.time_grid[j] << ',' << paths.at(p, j) << '\n';
}

void gauss_hermite_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw input_error("gauss_hermite_rule: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    // Newton iteration on physicists' Hermite H_n with standard initial
    // guesses; roots found from the outside in, symmetric about 0.
    const double pi = 3.14159265358979323846;
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(n, 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * nodes[n - 1];
        else if (i == 3)
            z = 1.91 * z - 0.91 * nodes[n - 2];
        else
            z = 2.0 * z - nodes[n - i + 1];

        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Recurrence for orthonormal Hermite functions keeps values tame.
            double p1 = 1.0 / std::pow(pi, 0.25);
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = 2.0 / (pp * pp);
        weights[i] = weights[n - 1 - i];
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double& w : weights) w /= wsum;  // normalize: weights of a probability law
}

std::vector<QuadNode> transition_quadrature(const MarketModel& model, double t, double x,
                                            double dt, int n_nodes) {
    if (dt <= 0.0) throw input_error("transition_quadrature: dt must be > 0");
    if (n_nodes < 3 || n_nodes % 2 == 0)
        throw input_error("transition_quadrature: n_nodes must be odd and >= 3");
    const auto [b, s] = model.coefficients(t, x);
    const double mean = x + b * dt;
    if (s == 0.0) return {QuadNode{mean, 1.0}};

    std::vector<double> u, w;
    gauss_hermite_rule(n_nodes, u, w);
    std::vector<QuadNode> q(n_nodes);
    const double scale = s * std::sqrt(2.0 * dt);  // e^{-u^2} weight => sqrt(2) factor
    for (int i = 0; i < n_nodes; ++i) q[i] = {mean + scale * u[i], w[i]};
    return q;
}

}  // namespace impact
