#include "pivotlab/matrix_io.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

namespace pivotlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Matrix<Rational> read_csv(std::istream& in) {
    std::vector<Rational> entries;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::size_t count = 0;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                entries.push_back(parse_rational(tok));
            } catch (const std::invalid_argument& e) {
                throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
            }
            ++count;
        }
        if (rows == 0) cols = count;
        if (count != cols) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                              " columns, found " + std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0) throw FormatError("empty matrix file");
    return Matrix<Rational>(rows, cols, std::move(entries));
}

AnyMatrix read_lossless(std::istream& in) {
    std::string magic, version, key, field;
    std::size_t rows = 0, cols = 0;
    if (!(in >> magic >> version) || magic != "pivotlab-matrix" || version != "1") {
        throw FormatError("not a pivotlab-matrix v1 file");
    }
    if (!(in >> key >> field) || key != "field") throw FormatError("missing field line");
    if (!(in >> key >> rows >> cols) || key != "size" || rows == 0 || cols == 0) {
        throw FormatError("missing or invalid size line");
    }
    std::vector<std::string> tokens(rows * cols);
    for (auto& t : tokens)
        if (!(in >> t)) throw FormatError("fewer entries than declared size");
    try {
        if (field == "exact") {
            std::vector<Rational> v;
            for (const auto& t : tokens) v.push_back(parse_rational(t));
            return Matrix<Rational>(rows, cols, std::move(v));
        }
        if (field == "binary64") {
            std::vector<double> v;
            for (const auto& t : tokens) {
                char* end = nullptr;
                v.push_back(std::strtod(t.c_str(), &end));
                if (end == t.c_str() || *end != '\0') throw FormatError("bad binary64 entry " + t);
            }
            return Matrix<double>(rows, cols, std::move(v));
        }
        if (field.rfind("emulated(", 0) == 0) {
            const int p = std::stoi(field.substr(9));
            std::vector<EmulatedFloat> v;
            for (const auto& t : tokens) {
                auto f = from_triple(parse_triple(t));
                if (f.precision() != p) throw FormatError("entry precision differs from field: " + t);
                v.push_back(std::move(f));
            }
            return Matrix<EmulatedFloat>(rows, cols, std::move(v));
        }
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    throw FormatError("unknown field " + field);
}

AnyMatrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    if (path.extension() == ".pvm") return read_lossless(in);
    return read_csv(in);
}

}  // namespace pivotlab
