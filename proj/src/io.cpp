#include "eigentow/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "eigentow/error.hpp"

namespace eigentow {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return x;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > j) out.push_back(line.substr(j, i - j));
  }
  return out;
}

std::size_t parse_index(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError("expected a nonnegative integer, got '" + std::string(s) + "'", line);
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

}  // namespace

void write_matrix(std::ostream& os, const SparseSymmetricOperator& op) {
  os << op.dim() << ' ' << op.nnz() << '\n';
  for (const Entry& e : op.entries()) os << e.row << ' ' << e.col << ' ' << format_double(e.value) << '\n';
}

SparseSymmetricOperator read_matrix(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!split_ws(line).empty()) return true;
    }
    return false;
  };
  if (!next()) throw ParseError("empty matrix file", lineno == 0 ? 1 : lineno);
  auto head = split_ws(line);
  if (head.size() != 2) throw ParseError("header must be 'dim nnz'", lineno);
  const std::size_t dim = parse_index(head[0], lineno);
  const std::size_t nnz = parse_index(head[1], lineno);
  if (dim == 0) throw ParseError("dimension must be positive", lineno);

  std::vector<Entry> entries;
  entries.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!next()) throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k), lineno + 1);
    auto f = split_ws(line);
    if (f.size() != 3) throw ParseError("entry must be 'row col value'", lineno);
    Entry e{parse_index(f[0], lineno), parse_index(f[1], lineno), 0.0};
    try {
      e.value = parse_double(f[2]);
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed value '" + std::string(f[2]) + "'", lineno);
    }
    if (e.row > e.col) throw ParseError("entry below the diagonal (row > col)", lineno);
    if (e.col >= dim) throw ParseError("index outside dimension", lineno);
    entries.push_back(e);
  }
  if (next()) throw ParseError("trailing data after " + std::to_string(nnz) + " entries", lineno);
  try {
    return SparseSymmetricOperator(dim, std::move(entries));
  } catch (const ContractViolation& ex) {
    throw ParseError(ex.what(), lineno);
  }
}

void save_matrix(const std::filesystem::path& path, const SparseSymmetricOperator& op) {
  std::ostringstream os;
  write_matrix(os, op);
  write_text_file(path, os.str());
}

SparseSymmetricOperator load_matrix(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_matrix(is);
}

void write_state(std::ostream& os, const StateVector& v) {
  for (double a : v.amps()) os << format_double(a) << '\n';
}

StateVector read_state(std::istream& is) {
  std::vector<double> a;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 1) throw ParseError("expected one amplitude per line", lineno);
    try {
      a.push_back(parse_double(f[0]));
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed amplitude '" + std::string(f[0]) + "'", lineno);
    }
  }
  if (a.empty()) throw ParseError("empty state file", lineno == 0 ? 1 : lineno);
  return StateVector(std::move(a));
}

void save_state(const std::filesystem::path& path, const StateVector& v) {
  std::ostringstream os;
  write_state(os, v);
  write_text_file(path, os.str());
}

StateVector load_state(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_state(is);
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("no column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view col) const {
  return parse_double(rows.at(row).at(column(col)));
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
    return out;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (line.front() == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size())
        throw ParseError("expected " + std::to_string(t.header.size()) + " fields", lineno);
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty()) throw ParseError("missing CSV header", lineno == 0 ? 1 : lineno);
  return t;
}

CsvTable load_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_csv(is);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace eigentow
