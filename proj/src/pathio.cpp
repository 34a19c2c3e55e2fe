#include "fracpredict/pathio.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fracpredict {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'B', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void export_paths_csv(const PathBatch& batch, std::ostream& out) {
    char buf[40];
    for (std::size_t i = 0; i < batch.grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", batch.grid[i]);
        out << (i ? "," : "") << "t_" << buf;
    }
    out << "\n";
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const auto row = batch.path(p);
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

PathBatch import_paths_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("paths csv: missing header");
    std::vector<double> times;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell.rfind("t_", 0) != 0) throw DomainError("paths csv: bad header cell " + cell);
            times.push_back(std::stod(cell.substr(2)));
        }
    }
    PathBatch batch{TimeGrid(times), 0, {}, "imported", 0};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            batch.values.push_back(std::stod(cell));
            ++count;
        }
        if (count != times.size()) throw DomainError("paths csv: ragged row");
        ++batch.n_paths;
    }
    return batch;
}

void export_paths_fpb1(const PathBatch& batch, std::ostream& out) {
    out.write(kMagic, 4);
    put_u64(out, batch.n_paths);
    put_u64(out, batch.grid.size());
    put_u64(out, batch.seed);
    for (std::size_t i = 0; i < batch.grid.size(); ++i) put_f64(out, batch.grid[i]);
    for (double v : batch.values) put_f64(out, v);
}

PathBatch import_paths_fpb1(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DomainError("paths fpb1: bad magic");
    const std::uint64_t n_paths = get_u64(in);
    const std::uint64_t n_points = get_u64(in);
    const std::uint64_t seed = get_u64(in);
    std::vector<double> times(n_points);
    for (auto& t : times) t = get_f64(in);
    PathBatch batch{TimeGrid(std::move(times)), static_cast<std::size_t>(n_paths),
                    Vector(n_paths * n_points), "imported", seed};
    for (auto& v : batch.values) v = get_f64(in);
    if (!in) throw DomainError("paths fpb1: truncated stream");
    return batch;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file " + path);
    out << contents;
}

}  // namespace fracpredict
