#include "rf/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rf {

namespace {

constexpr char kMagic[6] = {'R', 'F', 'R', 'P', '1', '\n'};

void write_raw(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_raw(std::istream& in, void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("load_rough_path: truncated file");
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_rough_path(const GridRoughPath& rp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_rough_path: cannot open " + path);
    write_raw(out, kMagic, sizeof(kMagic));
    const std::uint64_t dim = static_cast<std::uint64_t>(rp.dim());
    const std::uint64_t n = static_cast<std::uint64_t>(rp.grid().n_steps());
    const double horizon = rp.grid().horizon();
    const double alpha = rp.alpha();
    write_raw(out, &dim, 8);
    write_raw(out, &n, 8);
    write_raw(out, &horizon, 8);
    write_raw(out, &alpha, 8);
    for (const Vec& v : rp.level1_all()) write_raw(out, v.data(), 8 * v.size());
    for (const Mat& m : rp.level2_cells_all()) write_raw(out, m.data(), 8 * m.size());
    if (!out) throw std::runtime_error("save_rough_path: write failed on " + path);
}

GridRoughPath load_rough_path(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_rough_path: cannot open " + path);
    char magic[sizeof(kMagic)];
    read_raw(in, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_rough_path: bad magic in " + path);
    std::uint64_t dim = 0, n = 0;
    double horizon = 0.0, alpha = 0.0;
    read_raw(in, &dim, 8);
    read_raw(in, &n, 8);
    read_raw(in, &horizon, 8);
    read_raw(in, &alpha, 8);
    if (dim < 1 || dim > 1024 || n < 1 || n > (1u << 26))
        throw std::runtime_error("load_rough_path: implausible header in " + path);
    const int d = static_cast<int>(dim);
    std::vector<Vec> level1(n + 1, Vec(d));
    std::vector<Mat> cells(n, Mat(d, d));
    for (auto& v : level1) read_raw(in, v.data(), 8 * v.size());
    for (auto& m : cells) read_raw(in, m.data(), 8 * m.size());
    return GridRoughPath(d, Grid(horizon, static_cast<int>(n)), std::move(level1),
                         std::move(cells), alpha);
}

void save_rough_path_csv(const GridRoughPath& rp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_rough_path_csv: cannot open " + path);
    out << rp.dim() << "," << rp.grid().n_steps() << ","
        << format_double(rp.grid().horizon()) << "," << format_double(rp.alpha())
        << "\n";
    const int d = rp.dim();
    for (const Vec& v : rp.level1_all()) {
        for (int c = 0; c < d; ++c) out << (c ? "," : "") << format_double(v(c));
        out << "\n";
    }
    for (const Mat& m : rp.level2_cells_all()) {
        bool first = true;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                out << (first ? "" : ",") << format_double(m(a, b));
                first = false;
            }
        out << "\n";
    }
    if (!out) throw std::runtime_error("save_rough_path_csv: write failed on " + path);
}

GridRoughPath load_rough_path_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_rough_path_csv: cannot open " + path);
    auto next_row = [&in, &path](int expect) {
        std::string line;
        if (!std::getline(in, line))
            throw std::runtime_error("load_rough_path_csv: truncated " + path);
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (expect > 0 && static_cast<int>(row.size()) != expect)
            throw std::runtime_error("load_rough_path_csv: malformed row in " + path);
        return row;
    };
    const auto header = next_row(4);
    const int d = static_cast<int>(header[0]);
    const int n = static_cast<int>(header[1]);
    if (d < 1 || n < 1)
        throw std::runtime_error("load_rough_path_csv: implausible header in " + path);
    std::vector<Vec> level1(n + 1);
    for (auto& v : level1) {
        const auto row = next_row(d);
        v = Eigen::Map<const Vec>(row.data(), d);
    }
    std::vector<Mat> cells(n);
    for (auto& m : cells) {
        const auto row = next_row(d * d);
        m = Mat(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) m(a, b) = row[a * d + b];
    }
    return GridRoughPath(d, Grid(header[2], n), std::move(level1), std::move(cells),
                         header[3]);
}

std::uint64_t content_hash_bytes(const void* data, std::size_t n, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t content_hash(const GridRoughPath& rp) {
    std::uint64_t h = 14695981039346656037ull;
    const std::uint64_t dims[2] = {static_cast<std::uint64_t>(rp.dim()),
                                   static_cast<std::uint64_t>(rp.grid().n_steps())};
    h = content_hash_bytes(dims, sizeof(dims), h);
    for (const Vec& v : rp.level1_all()) h = content_hash_bytes(v.data(), 8 * v.size(), h);
    for (const Mat& m : rp.level2_cells_all())
        h = content_hash_bytes(m.data(), 8 * m.size(), h);
    return h;
}

std::uint64_t content_hash(const MicroPath& mp) {
    std::uint64_t h = 14695981039346656037ull;
    const std::uint64_t dims[3] = {static_cast<std::uint64_t>(mp.dim),
                                   static_cast<std::uint64_t>(mp.substeps),
                                   mp.stream_id};
    h = content_hash_bytes(dims, sizeof(dims), h);
    for (const Vec& v : mp.values) h = content_hash_bytes(v.data(), 8 * v.size(), h);
    return h;
}

}  // namespace rf
