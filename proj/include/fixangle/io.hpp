#pragma once

#include <filesystem>
#include <string>

#include "fixangle/forward.hpp"
#include "fixangle/grid.hpp"

namespace fixangle::io {

// Field files: <stem>.bin holds little-endian float64 samples (interleaved
// re/im for complex) in row-major node order; <stem>.json is the sidecar
// {"d","N","L","R","kind"}.
void write_field(const RealField& f, const std::filesystem::path& stem);
void write_field(const ComplexField& f, const std::filesystem::path& stem);
RealField read_real_field(const std::filesystem::path& stem);
/// Accepts either kind; real files load with zero imaginary part.
ComplexField read_complex_field(const std::filesystem::path& stem);
/// "real" or "complex" from the sidecar.
std::string field_kind(const std::filesystem::path& stem);

// Dataset files: <stem>.json manifest {"d","theta0","R","k_count",
// "omega_count","generator"} and <stem>.csv with header
// sign,k,omega_1,...,omega_d,re,im and %.17g numbers.
void write_dataset(const FarFieldDataset& ds, const std::filesystem::path& stem);
FarFieldDataset read_dataset(const std::filesystem::path& stem);
std::string dataset_csv(const FarFieldDataset& ds);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// %.17g formatting, independent of the global locale.
std::string format_double(double v);

}  // namespace fixangle::io
