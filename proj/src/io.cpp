#include "matest/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "matest/errors.hpp"

namespace matest {

namespace {

// 17 significant digits round-trip an IEEE double exactly.
std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_matrix_text(const std::filesystem::path& file, const Mat& a) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    const Eigen::Index p = a.rows();
    out << p << "\n";
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (j) out << ' ';
            out << format_double(a(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + file.string());
}

Mat read_matrix_text(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open: " + file.string());
    Eigen::Index p = 0;
    if (!(in >> p) || p < 1) throw IoError("bad matrix header in " + file.string());
    Mat a(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (!(in >> a(i, j))) throw IoError("truncated matrix in " + file.string());
    return a;
}

void write_matrix_binary(const std::filesystem::path& file, const Mat& a) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    const std::uint64_t p = static_cast<std::uint64_t>(a.rows());
    out.write(reinterpret_cast<const char*>(&p), sizeof(p));
    std::vector<double> row(a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) row[static_cast<size_t>(j)] = a(i, j);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed: " + file.string());
}

Mat read_matrix_binary(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open: " + file.string());
    std::uint64_t p = 0;
    in.read(reinterpret_cast<char*>(&p), sizeof(p));
    if (!in || p == 0 || p > (1u << 20)) throw IoError("bad matrix header in " + file.string());
    Mat a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    std::vector<double> row(p);
    for (std::uint64_t i = 0; i < p; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(p * sizeof(double)));
        if (!in) throw IoError("truncated matrix in " + file.string());
        for (std::uint64_t j = 0; j < p; ++j)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return a;
}

void write_matrix(const std::filesystem::path& file, const Mat& a) {
    if (file.extension() == ".txt")
        write_matrix_text(file, a);
    else
        write_matrix_binary(file, a);
}

Mat read_matrix(const std::filesystem::path& file) {
    if (file.extension() == ".txt") return read_matrix_text(file);
    return read_matrix_binary(file);
}

}  // namespace matest
