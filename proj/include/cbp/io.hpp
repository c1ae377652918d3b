// File formats: columnar CSV and binary dumps for path bundles, solution
// CSV, residual JSON.  All numeric CSV output goes through fmt_double so
// the bytes are identical for identical inputs on any platform.
// Layouts are documented in docs/formats.md.

#ifndef CBP_IO_HPP
#define CBP_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "path.hpp"
#include "solver.hpp"

namespace cbp {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// FNV-1a over raw bytes; used for output manifests.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// --- path bundles ----------------------------------------------------------

// header: time,b1..bN; one row per grid point
inline std::string bundle_to_csv(const PathBundle& b) {
    std::ostringstream os;
    os << "time";
    for (std::size_t j = 1; j <= b.count(); ++j) os << ",b" << j;
    os << "\n";
    for (std::size_t k = 0; k < b.grid.n_points(); ++k) {
        os << fmt_double(b.grid.time(k));
        for (std::size_t j = 1; j <= b.count(); ++j) os << ',' << fmt_double(b.at(j, k));
        os << "\n";
    }
    return os.str();
}

// little-endian binary dump: magic "CBPB", u32 version, u64 rows, u64 points,
// then the grid times and each row as f64, row-major
inline std::string bundle_to_binary(const PathBundle& b) {
    std::string out;
    auto put = [&out](const void* p, std::size_t n) {
        out.append(static_cast<const char*>(p), n);
    };
    out.append("CBPB", 4);
    const std::uint32_t version = 1;
    put(&version, 4);
    const std::uint64_t rows = b.count(), points = b.grid.n_points();
    put(&rows, 8);
    put(&points, 8);
    for (std::size_t k = 0; k < points; ++k) {
        const double t = b.grid.time(k);
        put(&t, 8);
    }
    for (std::size_t j = 1; j <= rows; ++j)
        for (std::size_t k = 0; k < points; ++k) {
            const double v = b.at(j, k);
            put(&v, 8);
        }
    return out;
}

inline PathBundle bundle_from_binary(const std::string& bytes) {
    if (bytes.size() < 24 || bytes.compare(0, 4, "CBPB") != 0)
        throw std::runtime_error("bundle_from_binary: bad magic");
    std::size_t off = 4;
    auto get = [&bytes, &off](void* p, std::size_t n) {
        if (off + n > bytes.size()) throw std::runtime_error("bundle_from_binary: truncated");
        std::memcpy(p, bytes.data() + off, n);
        off += n;
    };
    std::uint32_t version = 0;
    get(&version, 4);
    if (version != 1) throw std::runtime_error("bundle_from_binary: unknown version");
    std::uint64_t rows = 0, points = 0;
    get(&rows, 8);
    get(&points, 8);
    std::vector<double> times(points);
    for (auto& t : times) get(&t, 8);
    PathBundle b;
    b.grid = TimeGrid(std::move(times));
    b.kind = PathKind::Deterministic;
    b.values.assign(rows, std::vector<double>(points, 0.0));
    for (auto& row : b.values)
        for (auto& v : row) get(&v, 8);
    return b;
}

// --- particle solutions ----------------------------------------------------

// header: time,x1..xN,l12..l{N-1}{N}
inline std::string solution_to_csv(const ParticleSolution& sol) {
    std::ostringstream os;
    os << "time";
    for (std::size_t j = 1; j <= sol.count; ++j) os << ",x" << j;
    for (std::size_t j = 1; j + 1 <= sol.count; ++j) os << ",l" << j << (j + 1);
    os << "\n";
    for (std::size_t k = 0; k < sol.grid.n_points(); ++k) {
        os << fmt_double(sol.grid.time(k));
        for (std::size_t j = 1; j <= sol.count; ++j) os << ',' << fmt_double(sol.X[j - 1][k]);
        for (std::size_t j = 1; j + 1 <= sol.count; ++j) os << ',' << fmt_double(sol.L[j - 1][k]);
        os << "\n";
    }
    return os.str();
}

inline std::string residual_to_json(const ResidualReport& rep) {
    std::ostringstream os;
    os << "{\n"
       << "  \"max_order_violation\": " << fmt_double(rep.max_order_violation) << ",\n"
       << "  \"max_identity_residual\": " << fmt_double(rep.max_identity_residual) << ",\n"
       << "  \"max_complementarity\": " << fmt_double(rep.max_complementarity) << ",\n"
       << "  \"picard_iters\": " << rep.picard_iters << ",\n"
       << "  \"converged\": " << (rep.converged ? "true" : "false") << "\n"
       << "}\n";
    return os.str();
}

} // namespace cbp

#endif // CBP_IO_HPP
