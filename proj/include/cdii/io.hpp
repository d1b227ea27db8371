#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cdii/grid.hpp"

namespace cdii {

// FLD2 text format:
//   FLD2 nx ny h ox oy
//   ny lines of nx whitespace-separated values (row j on line j)
// Vector/matrix fields are FLD2 blocks each preceded by a "COMP name" line.

inline void write_fld2_block(std::ostream& os, const ScalarField2& f) {
    const Grid2D& g = f.grid;
    os << "FLD2 " << g.nx << ' ' << g.ny << ' '
       << std::setprecision(17) << g.h << ' ' << g.ox << ' ' << g.oy << '\n';
    os << std::setprecision(17);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) os << ' ';
            os << f.at(i, j);
        }
        os << '\n';
    }
}

inline ScalarField2 read_fld2_block(std::istream& is) {
    std::string tag;
    is >> tag;
    if (tag != "FLD2") throw std::runtime_error("FLD2: bad magic '" + tag + "'");
    int nx, ny;
    double h, ox, oy;
    if (!(is >> nx >> ny >> h >> ox >> oy))
        throw std::runtime_error("FLD2: bad header");
    ScalarField2 f(Grid2D(nx, ny, h, ox, oy));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (!(is >> f.at(i, j))) throw std::runtime_error("FLD2: short data");
    return f;
}

inline void save_scalar(const std::filesystem::path& path, const ScalarField2& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    write_fld2_block(os, f);
}

inline ScalarField2 load_scalar(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return read_fld2_block(is);
}

inline void save_vector(const std::filesystem::path& path, const VectorField2& F) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    ScalarField2 c{};
    c.grid = F.grid;
    os << "COMP cx\n";
    c.values = F.cx;
    write_fld2_block(os, c);
    os << "COMP cy\n";
    c.values = F.cy;
    write_fld2_block(os, c);
}

inline VectorField2 load_vector(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    VectorField2 F{};
    for (int c = 0; c < 2; ++c) {
        std::string tag, name;
        is >> tag >> name;
        if (tag != "COMP") throw std::runtime_error("FLD2 vector: expected COMP line");
        ScalarField2 f = read_fld2_block(is);
        if (c == 0) {
            F.grid = f.grid;
            F.cx = std::move(f.values);
        } else {
            require_same_grid(F.grid, f.grid, "load_vector");
            F.cy = std::move(f.values);
        }
    }
    return F;
}

/// Line-oriented `key = value` file, `#` comments. Used for manifests and
/// reports. Keys keep insertion-independent (sorted) order on write.
inline std::map<std::string, std::string>
read_kv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

inline void write_kv(const std::filesystem::path& path,
                     const std::map<std::string, std::string>& kv) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
}

inline std::string fmt17(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

}  // namespace cdii
