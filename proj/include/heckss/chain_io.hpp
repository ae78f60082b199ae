#pragma once

// Columnar draw files: a header row of names, then one whitespace-separated
// row per stored draw.
//
//   alpha0 alpha.1..q beta0 beta.1..p rho_tilde sigma_tilde_sq gamma_S.1..q gamma_O.1..p r

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "heckss/errors.hpp"
#include "heckss/gibbs.hpp"

namespace heckss {

inline std::vector<std::string> draw_columns(Eigen::Index p, Eigen::Index q) {
  std::vector<std::string> cols{"alpha0"};
  for (Eigen::Index k = 1; k <= q; ++k) cols.push_back("alpha." + std::to_string(k));
  cols.push_back("beta0");
  for (Eigen::Index j = 1; j <= p; ++j) cols.push_back("beta." + std::to_string(j));
  cols.push_back("rho_tilde");
  cols.push_back("sigma_tilde_sq");
  for (Eigen::Index k = 1; k <= q; ++k) cols.push_back("gamma_S." + std::to_string(k));
  for (Eigen::Index j = 1; j <= p; ++j) cols.push_back("gamma_O." + std::to_string(j));
  cols.push_back("r");
  return cols;
}

inline void write_draws(std::ostream& os, const ChainOutput& chain) {
  const auto cols = draw_columns(chain.p, chain.q);
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "\t" : "") << cols[c];
  os << '\n';
  os << std::setprecision(17);
  for (const auto& d : chain.draws) {
    os << d.alpha0;
    for (Eigen::Index k = 0; k < chain.q; ++k) os << '\t' << d.alpha[k];
    os << '\t' << d.beta0;
    for (Eigen::Index j = 0; j < chain.p; ++j) os << '\t' << d.beta[j];
    os << '\t' << d.rho_tilde << '\t' << d.sigma_tilde_sq;
    for (auto g : d.gamma_S) os << '\t' << int(g);
    for (auto g : d.gamma_O) os << '\t' << int(g);
    os << '\t' << d.r << '\n';
  }
}

/// Read a draw file written by write_draws. Dimensions are inferred from the
/// header; mixing variables are set to 1 and s* is left empty.
inline ChainOutput read_draws(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("draw file: missing header", 1);
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    for (std::string tok; hs >> tok;) header.push_back(tok);
  }
  Eigen::Index p = 0, q = 0;
  for (const auto& h : header) {
    if (h.rfind("alpha.", 0) == 0) ++q;
    if (h.rfind("beta.", 0) == 0) ++p;
  }
  if (header != draw_columns(p, q)) throw ParseError("draw file: unexpected header", 1);
  ChainOutput chain;
  chain.p = p;
  chain.q = q;
  const std::size_t width = header.size();
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> v;
    for (std::string tok; ls >> tok;) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("draw file: bad number '" + tok + "'", line_no);
      }
    }
    if (v.size() != width) throw ParseError("draw file: expected " + std::to_string(width) + " fields", line_no);
    ParameterState st = ParameterState::zeros(p, q, 0);
    std::size_t c = 0;
    st.alpha0 = v[c++];
    for (Eigen::Index k = 0; k < q; ++k) st.alpha[k] = v[c++];
    st.beta0 = v[c++];
    for (Eigen::Index j = 0; j < p; ++j) st.beta[j] = v[c++];
    st.rho_tilde = v[c++];
    st.sigma_tilde_sq = v[c++];
    for (Eigen::Index k = 0; k < q; ++k) st.gamma_S[static_cast<std::size_t>(k)] = v[c++] != 0.0;
    for (Eigen::Index j = 0; j < p; ++j) st.gamma_O[static_cast<std::size_t>(j)] = v[c++] != 0.0;
    st.r = v[c++];
    if (!(st.sigma_tilde_sq > 0.0)) throw ParseError("draw file: sigma_tilde_sq must be > 0", line_no);
    chain.draws.push_back(std::move(st));
  }
  return chain;
}

}  // namespace heckss
