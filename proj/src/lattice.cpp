#include "impact/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace impact {

namespace {

constexpr double kExactTol = 1e-12;
constexpr char kMagic[8] = {'I', 'M', 'P', 'L', 'A', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindSurface = 0;
constexpr std::uint32_t kKindPolicy = 1;

std::size_t exact_index(const std::vector<double>& nodes, double v, const char* axis) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), v - 1e-9);
    for (auto j = it; j != nodes.end() && *j <= v + 1e-9; ++j)
        if (std::abs(*j - v) <= kExactTol)
            return static_cast<std::size_t>(j - nodes.begin());
    std::ostringstream s;
    s.precision(17);
    s << axis << " = " << v << " is not a grid node";
    throw input_error(s.str());
}

std::size_t nearest_index(const std::vector<double>& nodes, double v) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
    if (it == nodes.begin()) return 0;
    if (it == nodes.end()) return nodes.size() - 1;
    const auto i = static_cast<std::size_t>(it - nodes.begin());
    return (v - nodes[i - 1] <= nodes[i] - v) ? i - 1 : i;
}

void require_increasing(const std::vector<double>& nodes, const char* axis) {
    if (nodes.size() < 2) throw input_error(std::string(axis) + ": need >= 2 nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw input_error(std::string(axis) + ": nodes must be strictly increasing");
}

// Buffered binary writer/reader that folds every byte into an FNV hash so
// files carry a trailing integrity checksum.
struct HashWriter {
    std::ofstream f;
    std::uint64_t h = 1469598103934665603ULL;
    explicit HashWriter(const std::string& path) : f(path, std::ios::binary) {
        if (!f) throw input_error("cannot open for write: " + path);
    }
    void raw(const void* p, std::size_t n) {
        f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        h = fnv1a(p, n, h);
    }
    template <class T>
    void put(const T& v) {
        raw(&v, sizeof(T));
    }
    void put_vec_d(const std::vector<double>& v) {
        put(static_cast<std::uint64_t>(v.size()));
        raw(v.data(), v.size() * sizeof(double));
    }
    void finish() {
        const std::uint64_t tail = h;
        f.write(reinterpret_cast<const char*>(&tail), sizeof(tail));
        if (!f) throw corruption_error("write failed while closing");
    }
};

struct HashReader {
    std::ifstream f;
    std::uint64_t h = 1469598103934665603ULL;
    std::string path;
    explicit HashReader(const std::string& p) : f(p, std::ios::binary), path(p) {
        if (!f) throw input_error("cannot open for read: " + p);
    }
    void raw(void* p, std::size_t n) {
        f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (f.gcount() != static_cast<std::streamsize>(n))
            throw corruption_error("truncated file: " + path);
        h = fnv1a(p, n, h);
    }
    template <class T>
    T get() {
        T v;
        raw(&v, sizeof(T));
        return v;
    }
    std::vector<double> get_vec_d() {
        const auto n = get<std::uint64_t>();
        if (n > (1ULL << 32)) throw corruption_error("implausible vector size: " + path);
        std::vector<double> v(n);
        raw(v.data(), n * sizeof(double));
        return v;
    }
    void verify_tail() {
        const std::uint64_t expect = h;
        std::uint64_t tail = 0;
        f.read(reinterpret_cast<char*>(&tail), sizeof(tail));
        if (f.gcount() != sizeof(tail) || tail != expect)
            throw corruption_error("content hash mismatch: " + path);
    }
};

void write_header(HashWriter& w, std::uint32_t kind, const GridSpec& g, int n_jumps,
                  std::uint64_t config_hash, std::uint64_t seed) {
    w.raw(kMagic, sizeof(kMagic));
    w.put(kVersion);
    w.put(kind);
    w.put(static_cast<std::uint64_t>(g.nt()));
    w.put(static_cast<std::uint64_t>(g.nx()));
    w.put(static_cast<std::uint64_t>(g.ny()));
    w.put(static_cast<std::uint64_t>(g.nz()));
    w.put(static_cast<std::int32_t>(n_jumps));
    w.put(config_hash);
    w.put(seed);
    w.put_vec_d(g.t_nodes);
    w.put_vec_d(g.x_nodes);
    w.put_vec_d(g.y_nodes);
    w.put_vec_d(g.z_nodes);
}

GridSpec read_header(HashReader& r, std::uint32_t expect_kind, int* n_jumps,
                     std::uint64_t* config_hash, std::uint64_t* seed) {
    char magic[8];
    r.raw(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw corruption_error("bad magic: " + r.path);
    if (r.get<std::uint32_t>() != kVersion)
        throw corruption_error("unsupported version: " + r.path);
    if (r.get<std::uint32_t>() != expect_kind)
        throw input_error("wrong artifact kind: " + r.path);
    const auto nt = r.get<std::uint64_t>();
    const auto nx = r.get<std::uint64_t>();
    const auto ny = r.get<std::uint64_t>();
    const auto nz = r.get<std::uint64_t>();
    *n_jumps = r.get<std::int32_t>();
    const auto ch = r.get<std::uint64_t>();
    const auto sd = r.get<std::uint64_t>();
    if (config_hash) *config_hash = ch;
    if (seed) *seed = sd;
    GridSpec g;
    g.t_nodes = r.get_vec_d();
    g.x_nodes = r.get_vec_d();
    g.y_nodes = r.get_vec_d();
    g.z_nodes = r.get_vec_d();
    if (g.nt() != nt || g.nx() != nx || g.ny() != ny || g.nz() != nz)
        throw corruption_error("dimension mismatch: " + r.path);
    g.validate();
    return g;
}

}  // namespace

std::size_t GridSpec::zero_z_index() const { return exact_index(z_nodes, 0.0, "z"); }

std::size_t GridSpec::exact_t_index(double t) const { return exact_index(t_nodes, t, "t"); }

std::size_t GridSpec::exact_z_index(double z) const { return exact_index(z_nodes, z, "z"); }

std::size_t GridSpec::nearest_x_index(double x) const { return nearest_index(x_nodes, x); }

std::size_t GridSpec::nearest_y_index(double y) const { return nearest_index(y_nodes, y); }

void GridSpec::validate() const {
    require_increasing(t_nodes, "t");
    require_increasing(x_nodes, "x");
    require_increasing(y_nodes, "y");
    require_increasing(z_nodes, "z");
    zero_z_index();  // throws when 0 is missing
    for (double z : z_nodes) {
        bool found = false;
        for (double w : z_nodes)
            if (std::abs(w + z) <= kExactTol) {
                found = true;
                break;
            }
        if (!found) throw input_error("z grid is not symmetric about 0");
    }
}

GridSpec make_grid(double T, std::size_t nt, double x0, double x_half, std::size_t nx,
                   double y0, double y_half, std::size_t ny, double M, std::size_t nz,
                   double eps1) {
    if (nt < 2 || nx < 2 || ny < 2 || nz < 3)
        throw input_error("make_grid: degenerate node counts");
    if (nz % 2 == 0) throw input_error("make_grid: nz must be odd so 0 is a node");
    if (!(T > 0.0) || !(x_half > 0.0) || !(y_half > 0.0) || !(M > 0.0))
        throw input_error("make_grid: T, x_half, y_half, M must be > 0");
    GridSpec g;
    g.t_nodes.resize(nt);
    for (std::size_t j = 0; j < nt; ++j)
        g.t_nodes[j] = T * static_cast<double>(j) / static_cast<double>(nt - 1);
    g.x_nodes.resize(nx);
    for (std::size_t i = 0; i < nx; ++i)
        g.x_nodes[i] =
            x0 - x_half + 2.0 * x_half * static_cast<double>(i) / static_cast<double>(nx - 1);
    g.y_nodes.resize(ny);
    for (std::size_t i = 0; i < ny; ++i)
        g.y_nodes[i] =
            y0 - y_half + 2.0 * y_half * static_cast<double>(i) / static_cast<double>(ny - 1);

    // Symmetric z ladder with 0 at the center; the small-jump threshold
    // +-eps1 is inserted as an exact node so threshold tests never round.
    const std::size_t half = nz / 2;
    std::vector<double> zs;
    for (std::size_t i = 1; i <= half; ++i)
        zs.push_back(M * static_cast<double>(i) / static_cast<double>(half));
    if (eps1 > 0.0 && eps1 < M) {
        bool present = false;
        for (double z : zs)
            if (std::abs(z - eps1) <= kExactTol) present = true;
        if (!present) zs.push_back(eps1);
    }
    std::sort(zs.begin(), zs.end());
    g.z_nodes.clear();
    for (auto it = zs.rbegin(); it != zs.rend(); ++it) g.z_nodes.push_back(-*it);
    g.z_nodes.push_back(0.0);
    for (double z : zs) g.z_nodes.push_back(z);
    g.validate();
    return g;
}

Cell locate(const std::vector<double>& nodes, double v) {
    const std::size_t n = nodes.size();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    std::size_t i;
    if (it == nodes.begin())
        i = 0;
    else if (it == nodes.end())
        i = n - 2;
    else
        i = static_cast<std::size_t>(it - nodes.begin()) - 1;
    i = std::min(i, n - 2);
    const double w = (v - nodes[i]) / (nodes[i + 1] - nodes[i]);
    return {i, w};
}

ValueSurface ValueSurface::zeros(GridSpec g, int n_jumps) {
    g.validate();
    ValueSurface s;
    s.grid = std::move(g);
    s.n_jumps = n_jumps;
    s.values.assign(s.grid.nt() * s.grid.slice_size(), 0.0);
    return s;
}

double& ValueSurface::at(std::size_t jt, std::size_t ix, std::size_t iy, std::size_t iz) {
    return values[((jt * grid.nx() + ix) * grid.ny() + iy) * grid.nz() + iz];
}

double ValueSurface::at(std::size_t jt, std::size_t ix, std::size_t iy,
                        std::size_t iz) const {
    return values[((jt * grid.nx() + ix) * grid.ny() + iy) * grid.nz() + iz];
}

const double* ValueSurface::slice(std::size_t jt) const {
    return values.data() + jt * grid.slice_size();
}

double* ValueSurface::slice(std::size_t jt) {
    return values.data() + jt * grid.slice_size();
}

double ValueSurface::interpolate(double t, double x, double y, double z,
                                 InterpStats* stats) const {
    const std::size_t jt = grid.exact_t_index(t);
    if (std::abs(z) > grid.z_nodes.back() + kExactTol)
        throw input_error("interpolate: |z| exceeds the position bound");

    Cell cx = locate(grid.x_nodes, x);
    if (cx.w < 0.0 || cx.w > 1.0) {
        cx.w = std::clamp(cx.w, 0.0, 1.0);  // x clamps at the box edge
        if (stats) ++stats->out_of_box;
    }
    Cell cy = locate(grid.y_nodes, y);
    if ((cy.w < 0.0 || cy.w > 1.0) && stats) ++stats->out_of_box;  // y extrapolates

    // z resolves within its own sign region only; values on either side of
    // 0 are never averaged together.
    const std::size_t iz0 = grid.zero_z_index();
    std::size_t za, zb;
    double wz;
    if (std::abs(z) <= kExactTol) {
        za = zb = iz0;
        wz = 0.0;
    } else if (z > 0.0) {
        const double z_min = grid.z_nodes[iz0 + 1];
        if (z <= z_min + kExactTol) {
            za = zb = iz0 + 1;
            wz = 0.0;
        } else {
            Cell cz = locate(grid.z_nodes, z);
            za = std::max(cz.i, iz0 + 1);
            zb = za + 1;
            wz = std::clamp((z - grid.z_nodes[za]) / (grid.z_nodes[zb] - grid.z_nodes[za]),
                            0.0, 1.0);
        }
    } else {
        const double z_max_neg = grid.z_nodes[iz0 - 1];
        if (z >= z_max_neg - kExactTol) {
            za = zb = iz0 - 1;
            wz = 0.0;
        } else {
            Cell cz = locate(grid.z_nodes, z);
            za = std::min(cz.i, iz0 - 2);
            zb = za + 1;
            wz = std::clamp((z - grid.z_nodes[za]) / (grid.z_nodes[zb] - grid.z_nodes[za]),
                            0.0, 1.0);
        }
    }

    auto corner = [&](std::size_t ix, std::size_t iy) {
        const double va = at(jt, ix, iy, za);
        const double vb = at(jt, ix, iy, zb);
        return va * (1.0 - wz) + vb * wz;
    };
    auto along_y = [&](std::size_t ix) {
        const double v0 = corner(ix, cy.i);
        const double v1 = corner(ix, cy.i + 1);
        return v0 * (1.0 - cy.w) + v1 * cy.w;  // linear, extrapolates past edges
    };
    return along_y(cx.i) * (1.0 - cx.w) + along_y(cx.i + 1) * cx.w;
}

void ValueSurface::save(const std::string& file, std::uint64_t config_hash,
                        std::uint64_t seed) const {
    HashWriter w(file);
    write_header(w, kKindSurface, grid, n_jumps, config_hash, seed);
    w.raw(values.data(), values.size() * sizeof(double));
    w.finish();
}

ValueSurface ValueSurface::load(const std::string& file, std::uint64_t* config_hash,
                                std::uint64_t* seed) {
    HashReader r(file);
    ValueSurface s;
    s.grid = read_header(r, kKindSurface, &s.n_jumps, config_hash, seed);
    s.values.resize(s.grid.nt() * s.grid.slice_size());
    r.raw(s.values.data(), s.values.size() * sizeof(double));
    r.verify_tail();
    return s;
}

void ValueSurface::export_csv(const std::string& file) const {
    std::ofstream f(file);
    if (!f) throw input_error("export_csv: cannot open " + file);
    f << "t,x,y,z,value\n";
    f.precision(17);
    for (std::size_t jt = 0; jt < grid.nt(); ++jt)
        for (std::size_t ix = 0; ix < grid.nx(); ++ix)
            for (std::size_t iy = 0; iy < grid.ny(); ++iy)
                for (std::size_t iz = 0; iz < grid.nz(); ++iz)
                    f << grid.t_nodes[jt] << ',' << grid.x_nodes[ix] << ','
                      << grid.y_nodes[iy] << ',' << grid.z_nodes[iz] << ','
                      << at(jt, ix, iy, iz) << '\n';
}

PolicyField PolicyField::make(GridSpec g) {
    g.validate();
    PolicyField p;
    p.grid = std::move(g);
    const std::size_t n = p.grid.nt() * p.grid.slice_size();
    p.exercise.assign(n, 0);
    p.target_idx.resize(n);
    // A non-exercising state targets its own z node.
    const std::size_t nz = p.grid.nz();
    for (std::size_t i = 0; i < n; ++i)
        p.target_idx[i] = static_cast<std::int32_t>(i % nz);
    return p;
}

std::size_t PolicyField::idx(std::size_t jt, std::size_t ix, std::size_t iy,
                             std::size_t iz) const {
    return ((jt * grid.nx() + ix) * grid.ny() + iy) * grid.nz() + iz;
}

void PolicyField::save(const std::string& file, std::uint64_t config_hash,
                       std::uint64_t seed) const {
    HashWriter w(file);
    write_header(w, kKindPolicy, grid, 0, config_hash, seed);
    w.raw(exercise.data(), exercise.size() * sizeof(std::uint8_t));
    w.raw(target_idx.data(), target_idx.size() * sizeof(std::int32_t));
    w.finish();
}

PolicyField PolicyField::load(const std::string& file, std::uint64_t* config_hash,
                              std::uint64_t* seed) {
    HashReader r(file);
    PolicyField p;
    int dummy = 0;
    p.grid = read_header(r, kKindPolicy, &dummy, config_hash, seed);
    const std::size_t n = p.grid.nt() * p.grid.slice_size();
    p.exercise.resize(n);
    p.target_idx.resize(n);
    r.raw(p.exercise.data(), n * sizeof(std::uint8_t));
    r.raw(p.target_idx.data(), n * sizeof(std::int32_t));
    r.verify_tail();
    return p;
}

void check_same_grid(const GridSpec& a, const GridSpec& b, const std::string& what) {
    if (!(a == b)) throw input_error(what + ": grid mismatch");
}

}  // namespace impact
