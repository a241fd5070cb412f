// Matrix files.
//
// CSV: one row per line, comma separated decimals. Lossy on write for floats
// (display only); on read every token is parsed exactly as a rational, so
// "0.1" is 1/10.
//
// Lossless (.pvm):
//   pivotlab-matrix 1
//   field <exact|emulated(p)|binary64>
//   size <rows> <cols>
//   <rows lines of space separated entries>
// with entries "n/d" (exact), "<sign>:<hex significand>:<exponent>@<p>" or
// "0@<p>" (emulated, value = sign * significand * 2^exponent), or C99 hex
// floats (binary64).
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "pivotlab/matrix.hpp"

namespace pivotlab {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
void write_csv(std::ostream& out, const Matrix<T>& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << decimal_string(m(i, j));
        }
        out << '\n';
    }
}

Matrix<Rational> read_csv(std::istream& in);

template <class T>
void write_lossless(std::ostream& out, const Matrix<T>& m) {
    out << "pivotlab-matrix 1\n";
    out << "field " << (m.data().empty() ? std::string("exact") : field_tag(m(0, 0))) << '\n';
    out << "size " << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << lossless_string(m(i, j));
        }
        out << '\n';
    }
}

using AnyMatrix = std::variant<Matrix<Rational>, Matrix<EmulatedFloat>, Matrix<double>>;

AnyMatrix read_lossless(std::istream& in);

/// Reads by extension: ".pvm" lossless, anything else CSV. Throws IoError if
/// the file cannot be opened and FormatError on malformed content.
AnyMatrix read_matrix_file(const std::filesystem::path& path);

}  // namespace pivotlab
