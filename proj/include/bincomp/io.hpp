#pragma once

// Matrix CSV files and SHA-256 input fingerprints.
//
// A matrix file is plain CSV, one row per line, no header. An optional first
// line starting with '#' carries whitespace-separated key=value metadata,
// e.g. "# n=16 r=3 kind=sign".

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "bincomp/matcore.hpp"
#include "bincomp/schur.hpp"

namespace bincomp {

struct MatrixFile {
  Matrix data;
  std::map<std::string, std::string> meta;
};

/// Shortest-safe decimal form: 17 significant digits, so parsing gives back
/// the same double.
std::string format_double(double x);

/// Throws Error(ParseError) on ragged rows, empty input, or a field that is
/// not a finite decimal number.
MatrixFile parse_matrix_csv(std::string_view text);
std::string format_matrix_csv(const Matrix& m, const std::map<std::string, std::string>& meta = {});

/// Integer matrices are written without a decimal point.
std::string format_matrix_csv(const IntMatrix& m, const std::map<std::string, std::string>& meta = {});

/// Whole file as bytes. Throws Error(ParseError) if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

MatrixFile read_matrix_csv(const std::filesystem::path& path);

/// Entries must be integral to within 1e-12. Throws Error(ParseError).
IntMatrix to_int_matrix(const Matrix& m);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace bincomp
