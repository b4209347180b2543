#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "lolguard/errors.hpp"

namespace lolguard::detail {

// Doubles travel as C99 hex floats: bit-exact round trips, no locale or
// precision surprises.
inline void write_double(std::ostream& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    out << buf;
}

inline double read_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw FormatError("model: unexpected end of numeric data");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw FormatError("model: bad numeric token: " + tok);
    return v;
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) out << ' ';
            write_double(out, m(r, c));
        }
        out << '\n';
    }
}

inline Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_double(in);
    return m;
}

inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out << ' ';
        write_double(out, v(i));
    }
    out << '\n';
}

inline Eigen::VectorXd read_vector(std::istream& in, Eigen::Index size) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = read_double(in);
    return v;
}

// Reads `<keyword> <count>` and returns the count.
inline std::size_t expect_sized_header(std::istream& in, const std::string& keyword) {
    std::string tag;
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != keyword)
        throw FormatError("model: expected `" + keyword + " <count>` header");
    return count;
}

} // namespace lolguard::detail
