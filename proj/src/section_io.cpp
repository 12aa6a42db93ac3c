#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kcosym/fields.hpp"

namespace kcosym {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("section csv: line " + std::to_string(line_no) + ": bad number '" +
                             std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> header_for(int k, int n) {
  std::vector<std::string> h;
  for (int a = 1; a <= k; ++a) h.push_back("t" + std::to_string(a));
  for (int i = 1; i <= n; ++i) h.push_back("q" + std::to_string(i));
  for (int a = 1; a <= k; ++a) {
    for (int i = 1; i <= n; ++i) h.push_back("p" + std::to_string(a) + "_" + std::to_string(i));
  }
  return h;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_section_csv(std::ostream& out, const SectionGrid& section) {
  const BaseGrid& grid = section.grid();
  const Dimensions d = section.dims();
  const auto header = header_for(d.k(), d.n());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const ChartPoint x = section.point(node);
    const Vec flat = x.flat();
    for (Eigen::Index c = 0; c < flat.size(); ++c) out << (c ? "," : "") << format_double(flat(c));
    out << '\n';
  }
}

void write_section_csv(const std::string& path, const SectionGrid& section) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("section csv: cannot open " + path + " for writing");
  write_section_csv(out, section);
  if (!out) throw std::runtime_error("section csv: write to " + path + " failed");
}

SectionGrid read_section_csv(std::istream& in, const BaseGrid& grid) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("section csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto cols = split(line, ',');
  int k = 0;
  int n = 0;
  for (const auto c : cols) {
    if (!c.empty() && c.front() == 't') ++k;
    if (!c.empty() && c.front() == 'q') ++n;
  }
  if (k != grid.k() || n < 1) {
    throw std::runtime_error("section csv: header has " + std::to_string(k) + " base columns, grid has " +
                             std::to_string(grid.k()));
  }
  const auto expected = header_for(k, n);
  if (cols.size() != expected.size()) throw std::runtime_error("section csv: unexpected column count");
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] != expected[c]) {
      throw std::runtime_error("section csv: column " + std::to_string(c + 1) + " is '" + std::string(cols[c]) +
                               "', expected '" + expected[c] + "'");
    }
  }

  const Dimensions d(k, n);
  SectionGrid section(grid, n);
  std::size_t node = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (node >= grid.node_count()) throw std::runtime_error("section csv: more rows than grid nodes");
    const auto fields = split(line, ',');
    if (fields.size() != expected.size()) {
      throw std::runtime_error("section csv: line " + std::to_string(line_no) + ": wrong field count");
    }
    Vec flat(static_cast<Eigen::Index>(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) flat(static_cast<Eigen::Index>(c)) = parse_double(fields[c], line_no);
    const ChartPoint x = ChartPoint::from_flat(d, flat);
    if (x.t != grid.coordinates(node)) {
      throw std::runtime_error("section csv: line " + std::to_string(line_no) +
                               ": base coordinates do not match the grid");
    }
    const auto e = static_cast<Eigen::Index>(node);
    section.psi().row(e) = x.q.transpose();
    for (int a = 0; a < k; ++a) section.momenta().block(e, a * n, 1, n) = x.p.row(a);
    ++node;
  }
  if (node != grid.node_count()) {
    throw std::runtime_error("section csv: " + std::to_string(node) + " rows for " +
                             std::to_string(grid.node_count()) + " grid nodes");
  }
  return section;
}

SectionGrid read_section_csv(const std::string& path, const BaseGrid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("section csv: cannot open " + path);
  return read_section_csv(in, grid);
}

}  // namespace kcosym
