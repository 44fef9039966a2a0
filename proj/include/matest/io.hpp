#pragma once

// Matrix (de)serialization.
//
// Text format:    "p\n" followed by p rows of space-separated decimals.
// Binary format:  u64 p (little endian), then p^2 f64 row-major.
// The binary form round-trips bit-exactly.

#include <filesystem>
#include <string>

#include "matest/types.hpp"

namespace matest {

void write_matrix_text(const std::filesystem::path& file, const Mat& a);
Mat read_matrix_text(const std::filesystem::path& file);

void write_matrix_binary(const std::filesystem::path& file, const Mat& a);
Mat read_matrix_binary(const std::filesystem::path& file);

// Dispatch on extension: ".txt" text, anything else binary.
void write_matrix(const std::filesystem::path& file, const Mat& a);
Mat read_matrix(const std::filesystem::path& file);

}  // namespace matest
