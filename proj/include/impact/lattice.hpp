#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "impact/common.hpp"

namespace impact {

// Discretization of (t, x, y, z). z nodes are symmetric about 0, contain 0,
// and contain +-eps1 as exact nodes so the small/large jump threshold is
// representable without rounding.
struct GridSpec {
    std::vector<double> t_nodes;
    std::vector<double> x_nodes;
    std::vector<double> y_nodes;
    std::vector<double> z_nodes;

    std::size_t nt() const { return t_nodes.size(); }
    std::size_t nx() const { return x_nodes.size(); }
    std::size_t ny() const { return y_nodes.size(); }
    std::size_t nz() const { return z_nodes.size(); }
    std::size_t slice_size() const { return nx() * ny() * nz(); }

    std::size_t zero_z_index() const;
    // Exact node lookup within 1e-12 absolute; throws input_error if absent.
    std::size_t exact_t_index(double t) const;
    std::size_t exact_z_index(double z) const;
    std::size_t nearest_x_index(double x) const;
    std::size_t nearest_y_index(double y) const;

    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double T, std::size_t nt, double x0, double x_half, std::size_t nx,
                   double y0, double y_half, std::size_t ny, double M, std::size_t nz,
                   double eps1);

struct InterpStats {
    long long out_of_box = 0;  // x clamps plus y extrapolations
};

struct ValueSurface {
    GridSpec grid;
    int n_jumps = 0;
    std::vector<double> values;  // index ((jt*nx + ix)*ny + iy)*nz + iz

    static ValueSurface zeros(GridSpec g, int n_jumps);

    double& at(std::size_t jt, std::size_t ix, std::size_t iy, std::size_t iz);
    double at(std::size_t jt, std::size_t ix, std::size_t iy, std::size_t iz) const;
    const double* slice(std::size_t jt) const;
    double* slice(std::size_t jt);

    // Multilinear in (x, y); t must be a grid time; in z, piecewise linear
    // within the same sign region only -- queries strictly between the
    // smallest positive and largest negative node resolve to the nearer
    // same-sign node, never averaging across z = 0. Out-of-box x is
    // clamped and out-of-box y linearly extrapolated with the edge-cell
    // slope; both are counted in stats.
    double interpolate(double t, double x, double y, double z,
                       InterpStats* stats = nullptr) const;

    void save(const std::string& file, std::uint64_t config_hash = 0,
              std::uint64_t seed = 0) const;
    static ValueSurface load(const std::string& file, std::uint64_t* config_hash = nullptr,
                             std::uint64_t* seed = nullptr);
    void export_csv(const std::string& file) const;
};

struct PolicyField {
    GridSpec grid;
    std::vector<std::uint8_t> exercise;   // same indexing as ValueSurface
    std::vector<std::int32_t> target_idx; // z-node index of the jump target

    static PolicyField make(GridSpec g);
    std::size_t idx(std::size_t jt, std::size_t ix, std::size_t iy, std::size_t iz) const;

    void save(const std::string& file, std::uint64_t config_hash = 0,
              std::uint64_t seed = 0) const;
    static PolicyField load(const std::string& file, std::uint64_t* config_hash = nullptr,
                            std::uint64_t* seed = nullptr);
};

// Throws input_error when two lattice objects do not share a grid.
void check_same_grid(const GridSpec& a, const GridSpec& b, const std::string& what);

// Linear interpolation helpers shared by the solver kernels.
// locate() returns the cell index i (0..n-2) and unclamped weight w so that
// v = nodes[i]*(1-w) + nodes[i+1]*w; w outside [0,1] means extrapolation.
struct Cell {
    std::size_t i;
    double w;
};
Cell locate(const std::vector<double>& nodes, double v);

}  // namespace impact
