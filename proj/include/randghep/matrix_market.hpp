#pragma once

// Matrix Market (array / coordinate, real, general / symmetric) and
// one-value-per-line CSV vectors.

#include "randghep/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace randghep {

namespace detail {

inline std::string lowercase(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline double parse_real(std::string_view tok, std::size_t line)
{
    // from_chars accepts fixed and scientific notation with '.' decimals.
    double v        = 0.0;
    const char* beg = tok.data();
    const char* end = tok.data() + tok.size();
    if (!tok.empty() && *beg == '+')
        ++beg;
    auto [ptr, ec] = std::from_chars(beg, end, v);
    if (ec != std::errc{} || ptr != end)
        throw FormatError("cannot parse real value '" + std::string(tok) + "'", line);
    return v;
}

inline long long parse_int(std::string_view tok, std::size_t line)
{
    long long v    = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw FormatError("cannot parse integer '" + std::string(tok) + "'", line);
    return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])))
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace detail

inline Matrix read_matrix_market(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line))
        throw FormatError("empty Matrix Market stream", 1);
    ++lineno;
    auto header = detail::split_ws(line);
    if (header.size() != 5 || detail::lowercase(std::string(header[0])) != "%%matrixmarket")
        throw FormatError("missing %%MatrixMarket header", lineno);
    const std::string object   = detail::lowercase(std::string(header[1]));
    const std::string format   = detail::lowercase(std::string(header[2]));
    const std::string field    = detail::lowercase(std::string(header[3]));
    const std::string symmetry = detail::lowercase(std::string(header[4]));

    if (object != "matrix")
        throw FormatError("unsupported object '" + object + "'", lineno);
    if (format != "array" && format != "coordinate")
        throw FormatError("unknown format '" + format + "'", lineno);
    if (field == "complex")
        throw UnsupportedError("Matrix Market: complex field is not supported");
    if (field != "real" && field != "integer" && field != "double")
        throw UnsupportedError("Matrix Market: unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw UnsupportedError("Matrix Market: unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    // Size line, skipping comments and blank lines.
    std::vector<std::string_view> size_tok;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%')
            continue;
        size_tok = detail::split_ws(line);
        if (!size_tok.empty())
            break;
    }
    const std::string size_line = line;
    size_tok                    = detail::split_ws(size_line);
    const std::size_t size_lineno = lineno;

    const std::size_t want = format == "array" ? 2 : 3;
    if (size_tok.size() != want)
        throw FormatError("bad size line", size_lineno);
    const long long rows = detail::parse_int(size_tok[0], size_lineno);
    const long long cols = detail::parse_int(size_tok[1], size_lineno);
    if (rows <= 0 || cols <= 0)
        throw FormatError("non-positive dimensions", size_lineno);
    if (symmetric && rows != cols)
        throw FormatError("symmetric matrix must be square", size_lineno);

    Matrix M = Matrix::Zero(rows, cols);

    if (format == "array") {
        // Column-major; symmetric stores the lower triangle only.
        std::vector<std::pair<Index, Index>> slots;
        for (Index j = 0; j < cols; ++j)
            for (Index i = symmetric ? j : 0; i < rows; ++i)
                slots.emplace_back(i, j);
        std::size_t next = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '%')
                continue;
            for (auto tok : detail::split_ws(line)) {
                if (next >= slots.size())
                    throw FormatError("too many entries", lineno);
                auto [i, j] = slots[next++];
                M(i, j)     = detail::parse_real(tok, lineno);
                if (symmetric)
                    M(j, i) = M(i, j);
            }
        }
        if (next != slots.size())
            throw FormatError("expected " + std::to_string(slots.size()) + " entries, found " +
                                  std::to_string(next),
                              lineno);
    } else {
        const long long nnz = detail::parse_int(size_tok[2], size_lineno);
        if (nnz < 0)
            throw FormatError("negative entry count", size_lineno);
        long long seen = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '%')
                continue;
            auto tok = detail::split_ws(line);
            if (tok.empty())
                continue;
            if (tok.size() != 3)
                throw FormatError("coordinate entry needs 'row col value'", lineno);
            const long long i = detail::parse_int(tok[0], lineno) - 1;
            const long long j = detail::parse_int(tok[1], lineno) - 1;
            if (i < 0 || i >= rows || j < 0 || j >= cols)
                throw FormatError("index out of range", lineno);
            const double v = detail::parse_real(tok[2], lineno);
            M(i, j) += v;
            if (symmetric && i != j)
                M(j, i) += v;
            ++seen;
        }
        if (seen != nnz)
            throw FormatError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen),
                              lineno);
    }
    return M;
}

inline Matrix load_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open Matrix Market file '" + path.string() + "'");
    return read_matrix_market(in);
}

/// Writes a dense array file in general storage with round-trip precision.
inline void write_matrix_market(std::ostream& out, const MatrixRef& M)
{
    out << "%%MatrixMarket matrix array real general\n";
    out << M.rows() << ' ' << M.cols() << '\n';
    out << std::setprecision(17);
    for (Index j = 0; j < M.cols(); ++j)
        for (Index i = 0; i < M.rows(); ++i)
            out << M(i, j) << '\n';
}

inline void save_matrix_market(const std::filesystem::path& path, const MatrixRef& M)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    write_matrix_market(out, M);
}

inline Vector read_csv_vector(std::istream& in)
{
    std::vector<double> vals;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = detail::split_ws(line);
        if (tok.empty())
            continue;
        if (tok.size() != 1)
            throw FormatError("expected one value per line", lineno);
        vals.push_back(detail::parse_real(tok[0], lineno));
    }
    return Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
}

inline Vector load_csv_vector(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path.string() + "'");
    return read_csv_vector(in);
}

inline void save_csv_vector(const std::filesystem::path& path, const VectorRef& v)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    for (Index i = 0; i < v.size(); ++i)
        out << v(i) << '\n';
}

} // namespace randghep
