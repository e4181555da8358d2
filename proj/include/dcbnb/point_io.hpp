#pragma once

#include "geometry.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dcbnb {

// Point file format: one point per line, whitespace-separated coordinates.
// Lines whose first non-space character is '#' and blank lines are skipped.
// The dimension is inferred from the first data line and enforced after.

inline PointSet read_point_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open point file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        std::istringstream ss(line);
        std::vector<double> coords;
        double v;
        while (ss >> v) coords.push_back(v);
        if (!ss.eof()) {
            std::string tok;
            ss.clear();
            ss >> tok;
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": non-numeric token '" + tok + "'");
        }
        if (dim == 0) {
            dim = coords.size();
            if (dim != 2 && dim != 3)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": points must have 2 or 3 coordinates, got " +
                                         std::to_string(coords.size()));
        } else if (coords.size() != dim) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(dim) +
                                     " coordinates, got " + std::to_string(coords.size()));
        }
        rows.push_back(std::move(coords));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data lines");

    Eigen::MatrixXd pts(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < dim; ++k)
            pts(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[i][k];
    return PointSet(std::move(pts));
}

inline void write_point_file(const std::string& path, const PointSet& ps,
                             const std::string& comment = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write point file: " + path);
    out.precision(17);
    if (!comment.empty()) out << "# " << comment << "\n";
    for (int i = 0; i < ps.size(); ++i) {
        for (int k = 0; k < ps.dim(); ++k) {
            if (k) out << ' ';
            out << ps.points()(k, i);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace dcbnb
