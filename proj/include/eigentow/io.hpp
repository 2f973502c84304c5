#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "eigentow/sparse_operator.hpp"

namespace eigentow {

/// Shortest decimal that parses back to exactly `x`.
std::string format_double(double x);
/// Strict full-string double parse; throws std::invalid_argument.
double parse_double(std::string_view s);

// Matrix text format: "dim nnz", then nnz lines "row col value", 0-based,
// upper triangle only. Written canonically (sorted, shortest round-trip).
void write_matrix(std::ostream& os, const SparseSymmetricOperator& op);
SparseSymmetricOperator read_matrix(std::istream& is);
void save_matrix(const std::filesystem::path& path, const SparseSymmetricOperator& op);
SparseSymmetricOperator load_matrix(const std::filesystem::path& path);

// State text format: one amplitude per line.
void write_state(std::ostream& os, const StateVector& v);
StateVector read_state(std::istream& is);
void save_state(const std::filesystem::path& path, const StateVector& v);
StateVector load_state(const std::filesystem::path& path);

/// Parsed CSV: '#' lines are metadata, first other line is the header.
struct CsvTable {
  std::vector<std::string> comments;  ///< without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  ///< throws if absent
  double number(std::size_t row, std::string_view col) const;
};

CsvTable read_csv(std::istream& is);
CsvTable load_csv(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eigentow
