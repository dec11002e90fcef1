#include "projclust/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace projclust {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("failed to format double");
  return std::string(buf, res.ptr);
}

namespace {

// Next line that is neither blank nor a '#' comment.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line)) throw InputError("matrix file: missing header line");
  std::istringstream header(line);
  long rows = 0, cols = 0;
  if (!(header >> rows >> cols) || rows < 1 || cols < 1) {
    throw InputError("matrix file: header must be two positive integers");
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!next_content_line(in, line)) {
      throw InputError("matrix file: expected " + std::to_string(rows) + " rows, got " +
                       std::to_string(i));
    }
    std::istringstream row(line);
    for (long j = 0; j < cols; ++j) {
      std::string tok;
      if (!(row >> tok)) throw InputError("matrix file: row " + std::to_string(i + 1) + " is short");
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw InputError("matrix file: bad number '" + tok + "'");
      }
      m(i, j) = v;
    }
    std::string extra;
    if (row >> extra) throw InputError("matrix file: row " + std::to_string(i + 1) + " is long");
  }
  return m;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Dataset read_dataset(std::istream& in) { return Dataset(read_matrix(in)); }

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& x) { write_matrix(out, x.points()); }

void write_dataset_file(const std::string& path, const Dataset& x) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_dataset(out, x);
}

}  // namespace projclust
