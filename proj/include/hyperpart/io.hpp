#pragma once

// Text formats.
//
// Tensor file: first line "m n", then n^m whitespace-separated decimal
// values in lexicographic index order (last index fastest). Values are
// written with 17 significant digits so a write/read round trip is exact.
//
// Partition sidecar: one line of n whitespace-separated cluster ids, -1 for
// unassigned vertices.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hyperpart/errors.hpp"
#include "hyperpart/partition.hpp"
#include "hyperpart/tensor.hpp"

namespace hyperpart {

/// Shortest round-trippable decimal for a double ("%.17g").
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_tensor(std::ostream& os, const Tensor& t) {
  os << t.order() << ' ' << t.dim() << '\n';
  const std::size_t n = t.dim();
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << format_double(t[i]) << ((i + 1) % n == 0 ? '\n' : ' ');
  }
}

inline Tensor read_tensor(std::istream& is, SymmetryCheck check = SymmetryCheck::none,
                          double tol = 1e-12) {
  std::string line;
  std::size_t lineno = 0;
  int m = 0, n = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> m >> n) || (hs >> extra)) throw ParseError("expected header 'm n'", lineno);
    break;
  }
  if (m < 1 || n < 1) throw ParseError("missing or invalid tensor header", lineno);
  const std::size_t need = Tensor::power(n, m);
  std::vector<double> values;
  values.reserve(need);
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ParseError("invalid number '" + tok + "'", lineno);
      }
      if (used != tok.size()) throw ParseError("invalid number '" + tok + "'", lineno);
      if (values.size() == need) throw ParseError("more than n^m values", lineno);
      values.push_back(v);
    }
  }
  if (values.size() != need)
    throw ParseError("expected " + std::to_string(need) + " values, found " +
                     std::to_string(values.size()));
  try {
    return Tensor(m, n, std::move(values), check, tol);
  } catch (const ParameterError& e) {
    throw ParseError(e.what());
  }
}

inline void write_partition(std::ostream& os, const Partition& p) {
  for (int v = 0; v < p.n(); ++v) os << (v ? " " : "") << p.cluster_of(v);
  os << '\n';
}

inline Partition read_partition(std::istream& is) {
  std::vector<int> labels;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    int v;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw ParseError("invalid cluster id '" + tok + "'");
    }
    if (used != tok.size()) throw ParseError("invalid cluster id '" + tok + "'");
    labels.push_back(v);
  }
  if (labels.empty()) throw ParseError("empty partition file");
  try {
    return Partition::from_labels(std::move(labels));
  } catch (const ParameterError& e) {
    throw ParseError(e.what());
  }
}

inline Tensor load_tensor(const std::string& path, SymmetryCheck check = SymmetryCheck::none) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  return read_tensor(f, check);
}

inline Partition load_partition(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  return read_partition(f);
}

inline void save_tensor(const std::string& path, const Tensor& t) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_tensor(f, t);
}

inline void save_partition(const std::string& path, const Partition& p) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_partition(f, p);
}

}  // namespace hyperpart
