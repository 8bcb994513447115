#pragma once

#include "fsi/stepper.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fsi {

// 17 significant digits: exact round trip for binary64.
std::string format_double(double x);
std::string csv_row(const std::vector<double>& values);
std::string csv_header(const std::vector<std::string>& names);

// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// 64-bit FNV-1a
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Binary checkpoint, little-endian: "FSIP", version u32, n i32, R f64, time f64,
// u2 and u3 arrays (row-major), p (n x n), then xi2, xi3, delta2, delta3, omega, theta.
void write_checkpoint(const std::filesystem::path& path, const Grid& g, const SystemState& st);
// Throws InvalidInput on a corrupt file or a grid mismatch.
SystemState read_checkpoint(const std::filesystem::path& path, const Grid& g);

}  // namespace fsi
