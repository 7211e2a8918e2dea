#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rcbo {

/// Formats a double with enough digits to round-trip the exact bit pattern.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Parses a double, accepting "nan"/"inf" spellings that stream extraction
/// rejects.
inline double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw std::runtime_error("malformed numeric token '" + token + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& token) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0')
    throw std::runtime_error("malformed integer token '" + token + "'");
  return static_cast<std::uint64_t>(v);
}

// Text matrix format, one matrix per stream:
//   rcbo-matrix v1
//   <rows> <cols> <seed>
//   <cols> decimal values per line, <rows> lines
inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m,
                         std::uint64_t seed = 0) {
  os << "rcbo-matrix v1\n";
  os << m.rows() << ' ' << m.cols() << ' ' << seed << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

inline Eigen::MatrixXd read_matrix(std::istream& is,
                                   std::uint64_t* seed_out = nullptr) {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "rcbo-matrix")
    throw std::runtime_error("not a matrix file (bad magic '" + magic + "')");
  if (version != "v1")
    throw std::runtime_error("unsupported matrix format version '" + version + "'");
  Eigen::Index rows = 0, cols = 0;
  std::string seed_token;
  is >> rows >> cols >> seed_token;
  if (!is || rows < 0 || cols < 0)
    throw std::runtime_error("malformed matrix header");
  if (seed_out) *seed_out = parse_u64(seed_token);
  Eigen::MatrixXd m(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(is >> token)) throw std::runtime_error("matrix data truncated");
      m(i, j) = parse_double(token);
    }
  return m;
}

inline void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m,
                              std::uint64_t seed = 0) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix(os, m, seed);
  if (!os) throw std::runtime_error("failed while writing '" + path + "'");
}

inline Eigen::MatrixXd read_matrix_file(const std::string& path,
                                        std::uint64_t* seed_out = nullptr) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_matrix(is, seed_out);
}

}  // namespace rcbo
