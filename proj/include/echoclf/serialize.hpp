#pragma once

// Line-oriented text format for model artifacts:
//   key value
//   matrix <name> <rows> <cols>   followed by <rows> lines of row-major values
// Numbers are written with 17 significant digits so reading them back is exact.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "echoclf/csv.hpp"
#include "echoclf/error.hpp"
#include "echoclf/numkit.hpp"

namespace echoclf::textio {

inline void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) {
        out << ' ';
      }
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next non-empty line split on whitespace; empty vector at end of input.
  std::vector<std::string> tokens() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::istringstream ss(line);
      std::vector<std::string> out;
      for (std::string t; ss >> t;) {
        out.push_back(t);
      }
      if (!out.empty()) {
        return out;
      }
    }
    return {};
  }

  // Next line verbatim (used for names that may contain spaces).
  std::string raw_line() {
    std::string line;
    if (!std::getline(in_, line)) {
      fail("unexpected end of file");
    }
    ++line_;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    return line;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t values) {
    auto t = tokens();
    if (t.empty() || t[0] != key || t.size() != values + 1) {
      fail("expected '" + key + "' with " + std::to_string(values) + " value(s)");
    }
    return t;
  }

  std::string string_value(const std::string& key) { return expect(key, 1)[1]; }

  double number(const std::string& key) { return to_number(expect(key, 1)[1]); }

  std::size_t count(const std::string& key) {
    const double v = number(key);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      fail("'" + key + "' must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
  }

  Matrix matrix(const std::string& name) {
    const auto head = expect("matrix", 3);
    if (head[1] != name) {
      fail("expected matrix '" + name + "', found '" + head[1] + "'");
    }
    const auto rows = static_cast<Eigen::Index>(to_number(head[2]));
    const auto cols = static_cast<Eigen::Index>(to_number(head[3]));
    if (rows < 0 || cols < 0) {
      fail("negative matrix dimension");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto t = tokens();
      if (static_cast<Eigen::Index>(t.size()) != cols) {
        fail("matrix '" + name + "' row " + std::to_string(i) + " has " + std::to_string(t.size()) + " values");
      }
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = to_number(t[static_cast<std::size_t>(j)]);
      }
    }
    return m;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("model file line " + std::to_string(line_) + ": " + what);
  }

private:
  double to_number(const std::string& s) const {
    const auto v = parse_double(s);
    if (!v) {
      fail("bad number '" + s + "'");
    }
    return *v;
  }

  std::istream& in_;
  std::size_t line_ = 0;
};

} // namespace echoclf::textio
