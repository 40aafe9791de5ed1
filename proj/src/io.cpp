#include "lobpcg/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "lobpcg/error.hpp"

namespace lobpcg::io {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::string lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && !token.empty();
}

struct Header {
  std::string format;
  std::string field;
  std::string symmetry;
};

// Reads the banner line and validates object and field.
Header read_header(std::istream& in, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadHeader, "empty file", 1);
  ++line_no;
  const auto tokens = split_ws(line);
  if (tokens.size() != 5 || lower(std::string(tokens[0])) != "%%matrixmarket") {
    throw Error(ErrorCode::BadHeader, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
                line_no);
  }
  if (lower(std::string(tokens[1])) != "matrix") {
    throw Error(ErrorCode::BadHeader, "object must be 'matrix'", line_no);
  }
  Header h{lower(std::string(tokens[2])), lower(std::string(tokens[3])),
           lower(std::string(tokens[4]))};
  if (h.format != "coordinate" && h.format != "array") {
    throw Error(ErrorCode::BadHeader, "unknown format '" + h.format + "'", line_no);
  }
  if (h.field != "real") {
    throw Error(ErrorCode::UnsupportedField, "field '" + h.field + "' is not supported", line_no);
  }
  if (h.symmetry != "symmetric" && h.symmetry != "general") {
    throw Error(ErrorCode::UnsupportedField, "symmetry '" + h.symmetry + "' is not supported",
                line_no);
  }
  return h;
}

// Next line that is neither blank nor a comment; false at end of input.
bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    return true;
  }
  return false;
}

void write_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

SparseSymMatrix parse_matrix_market(std::istream& in) {
  std::size_t line_no = 0;
  const Header h = read_header(in, line_no);
  if (h.format != "coordinate") {
    throw Error(ErrorCode::UnsupportedField, "only coordinate matrices can be read as operators",
                line_no);
  }

  std::string line;
  if (!next_data_line(in, line, line_no)) throw Error(ErrorCode::ParseError, "missing size line");
  const auto size = split_ws(line);
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t nnz = 0;
  if (size.size() != 3 || !parse_number(size[0], rows) || !parse_number(size[1], cols) ||
      !parse_number(size[2], nnz)) {
    throw Error(ErrorCode::ParseError, "size line must be 'rows cols entries'", line_no);
  }
  if (rows != cols || rows == 0) {
    throw Error(ErrorCode::ParseError, "matrix must be square and nonempty", line_no);
  }

  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  while (triplets.size() < nnz) {
    if (!next_data_line(in, line, line_no)) {
      throw Error(ErrorCode::ParseError, "expected " + std::to_string(nnz) + " entries, found " +
                                             std::to_string(triplets.size()),
                  line_no);
    }
    const auto tok = split_ws(line);
    std::size_t i = 0;
    std::size_t j = 0;
    double v = 0.0;
    if (tok.size() != 3 || !parse_number(tok[0], i) || !parse_number(tok[1], j) ||
        !parse_number(tok[2], v)) {
      throw Error(ErrorCode::ParseError, "entry must be 'row col value'", line_no);
    }
    if (i == 0 || j == 0 || i > rows || j > cols) {
      throw Error(ErrorCode::ParseError, "index out of range", line_no);
    }
    triplets.push_back({i - 1, j - 1, v});
  }
  if (next_data_line(in, line, line_no)) {
    throw Error(ErrorCode::ParseError, "trailing data after the declared entries", line_no);
  }

  if (h.symmetry == "general") {
    // Every off-diagonal entry needs a matching transpose entry.
    std::map<std::pair<std::size_t, std::size_t>, double> sums;
    for (const auto& t : triplets) sums[{t.row, t.col}] += t.value;
    for (const auto& [key, value] : sums) {
      if (key.first == key.second) continue;
      const auto it = sums.find({key.second, key.first});
      const double mirror = it == sums.end() ? 0.0 : it->second;
      if (std::abs(value - mirror) > 1e-12 * std::max(std::abs(value), std::abs(mirror))) {
        throw Error(ErrorCode::NonSymmetricData,
                    "general matrix is not symmetric at (" + std::to_string(key.first + 1) + ", " +
                        std::to_string(key.second + 1) + ")");
      }
    }
  }
  return csr_from_coo(rows, triplets);
}

SparseSymMatrix parse_matrix_market(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_matrix_market(in);
}

void write_matrix_market(const SparseSymMatrix& m, const std::filesystem::path& path) {
  std::size_t lower_nnz = 0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t k = m.row_offsets()[i]; k < m.row_offsets()[i + 1]; ++k)
      if (m.col_indices()[k] <= i) ++lower_nnz;

  auto out = open_output(path);
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.dim() << ' ' << m.dim() << ' ' << lower_nnz << '\n';
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t k = m.row_offsets()[i]; k < m.row_offsets()[i + 1]; ++k) {
      const std::size_t j = m.col_indices()[k];
      if (j > i) continue;
      out << i + 1 << ' ' << j + 1 << ' ';
      write_double(out, m.values()[k]);
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

DenseMatrix parse_matrix_market_array(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::size_t line_no = 0;
  const Header h = read_header(in, line_no);
  if (h.format != "array" || h.symmetry != "general") {
    throw Error(ErrorCode::UnsupportedField, "expected an 'array real general' file", line_no);
  }
  std::string line;
  if (!next_data_line(in, line, line_no)) throw Error(ErrorCode::ParseError, "missing size line");
  const auto size = split_ws(line);
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (size.size() != 2 || !parse_number(size[0], rows) || !parse_number(size[1], cols)) {
    throw Error(ErrorCode::ParseError, "size line must be 'rows cols'", line_no);
  }
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) {
    if (!next_data_line(in, line, line_no)) {
      throw Error(ErrorCode::ParseError, "array file ends early", line_no);
    }
    if (!parse_number(trim(line), v)) throw Error(ErrorCode::ParseError, "bad value", line_no);
  }
  return m;
}

void write_matrix_market_array(const DenseMatrix& m, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (double v : m.data()) {
    write_double(out, v);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

EdgeList parse_edge_csv(std::istream& in) {
  EdgeList list;
  std::string raw;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                                : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    Edge e{};
    const bool ok = fields.size() == 3 && parse_number(fields[0], e.u) &&
                    parse_number(fields[1], e.v) && parse_number(fields[2], e.weight);
    if (!ok) {
      // A header is a first row with some non-numeric field; a short or
      // malformed numeric row is an error even on the first line.
      const bool header = first_content && std::ranges::any_of(fields, [](std::string_view f) {
        double x = 0.0;
        return !parse_number(f, x);
      });
      if (header) {
        first_content = false;
        continue;
      }
      throw Error(ErrorCode::ParseError, "edge row must be 'u,v,weight'", line_no);
    }
    first_content = false;
    list.vertex_count = std::max({list.vertex_count, e.u + 1, e.v + 1});
    list.edges.push_back(e);
  }
  return list;
}

EdgeList parse_edge_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_edge_csv(in);
}

}  // namespace lobpcg::io
