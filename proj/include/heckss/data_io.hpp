#pragma once

// Delimited data files with a header row. Column `s` holds the 0/1
// selection indicator and column `y` the outcome; an empty field or NA
// marks a missing outcome. Comma-delimited unless the header has tabs and
// no commas.

#include <Eigen/Dense>
#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "heckss/config.hpp"
#include "heckss/dataset.hpp"
#include "heckss/errors.hpp"

namespace heckss {

struct DataTable {
  std::vector<std::string> header;
  // rows[r][c] raw field text; line_numbers[r] its 1-based line.
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline DataTable read_table(std::istream& is) {
  DataTable t;
  std::string line;
  std::size_t no = 0;
  if (!std::getline(is, line)) throw ParseError("data: empty file", 1);
  ++no;
  const char sep = (line.find('\t') != std::string::npos && line.find(',') == std::string::npos) ? '\t' : ',';
  auto split = [&](const std::string& l) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(l);
    while (std::getline(ss, field, sep)) out.push_back(trim(field));
    if (!l.empty() && l.back() == sep) out.emplace_back();
    return out;
  };
  t.header = split(trim(line));
  for (const auto& h : t.header) {
    if (h.empty()) throw ParseError("data: empty column name in header", 1);
  }
  while (std::getline(is, line)) {
    ++no;
    if (trim(line).empty()) continue;
    auto fields = split(trim(line) == line ? line : line.substr(0, line.find_last_not_of("\r\n") + 1));
    if (fields.size() != t.header.size()) {
      throw ParseError("data: expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       no);
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(no);
  }
  if (t.rows.empty()) throw ParseError("data: no data rows", no);
  return t;
}

/// Build a Dataset. Empty `outcome_cols` selects every column other than s
/// and y; empty `selection_cols` reuses the outcome columns.
inline Dataset dataset_from_table(const DataTable& t, std::vector<std::string> outcome_cols = {},
                                  std::vector<std::string> selection_cols = {}) {
  const auto s_col = t.column("s");
  const auto y_col = t.column("y");
  if (!s_col) throw ParseError("data: missing column 's'", 1);
  if (!y_col) throw ParseError("data: missing column 'y'", 1);
  if (outcome_cols.empty()) {
    for (const auto& h : t.header) {
      if (h != "s" && h != "y") outcome_cols.push_back(h);
    }
  }
  if (selection_cols.empty()) selection_cols = outcome_cols;
  auto index_of = [&](const std::string& name) {
    const auto c = t.column(name);
    if (!c) throw ParseError("data: unknown column '" + name + "'", 1);
    if (name == "s" || name == "y") throw ParseError("data: column '" + name + "' cannot be a covariate", 1);
    return *c;
  };
  std::vector<std::size_t> xi, wi;
  for (const auto& c : outcome_cols) xi.push_back(index_of(c));
  for (const auto& c : selection_cols) wi.push_back(index_of(c));

  const auto n = static_cast<Eigen::Index>(t.rows.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(xi.size())), W(n, static_cast<Eigen::Index>(wi.size()));
  std::vector<std::uint8_t> s(static_cast<std::size_t>(n));
  std::vector<std::optional<double>> y(static_cast<std::size_t>(n));
  auto number = [&](const std::string& f, std::size_t line, const std::string& col) {
    try {
      std::size_t used = 0;
      const double v = std::stod(f, &used);
      if (used != f.size() || !std::isfinite(v)) throw std::invalid_argument(f);
      return v;
    } catch (const std::exception&) {
      throw ParseError("data: column '" + col + "': bad number '" + f + "'", line);
    }
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    const std::size_t line = t.line_numbers[static_cast<std::size_t>(i)];
    const std::string& sf = row[*s_col];
    if (sf != "0" && sf != "1") throw ParseError("data: s must be 0 or 1, got '" + sf + "'", line);
    s[static_cast<std::size_t>(i)] = sf == "1";
    const std::string& yf = row[*y_col];
    const bool missing = yf.empty() || yf == "NA";
    if (missing == (sf == "1")) {
      throw ParseError(sf == "1" ? "data: s = 1 but y is missing" : "data: s = 0 but y is present", line);
    }
    if (!missing) y[static_cast<std::size_t>(i)] = number(yf, line, "y");
    for (std::size_t j = 0; j < xi.size(); ++j) {
      X(i, static_cast<Eigen::Index>(j)) = number(row[xi[j]], line, t.header[xi[j]]);
    }
    for (std::size_t k = 0; k < wi.size(); ++k) {
      W(i, static_cast<Eigen::Index>(k)) = number(row[wi[k]], line, t.header[wi[k]]);
    }
  }
  return Dataset(std::move(X), std::move(W), std::move(s), std::move(y), outcome_cols, selection_cols);
}

inline void write_dataset(std::ostream& os, const Dataset& d) {
  // Columns are written once when X and W share names.
  std::vector<std::string> names = d.outcome_names();
  std::vector<std::pair<bool, Eigen::Index>> src;
  for (Eigen::Index j = 0; j < d.p(); ++j) src.emplace_back(true, j);
  for (Eigen::Index k = 0; k < d.q(); ++k) {
    const auto& nm = d.selection_names()[static_cast<std::size_t>(k)];
    if (std::find(names.begin(), names.end(), nm) == names.end()) {
      names.push_back(nm);
      src.emplace_back(false, k);
    }
  }
  os << std::setprecision(17);
  for (const auto& nm : names) os << nm << ',';
  os << "s,y\n";
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (const auto& [is_x, c] : src) os << (is_x ? d.X()(i, c) : d.W()(i, c)) << ',';
    os << (d.selected(i) ? 1 : 0) << ',';
    if (d.y(i)) os << *d.y(i);
    else os << "NA";
    os << '\n';
  }
}

}  // namespace heckss
