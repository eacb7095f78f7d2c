#pragma once

// Plain-text exit problem files.
//
//   dim: 2
//   x0: 0.3 0.2
//   convention: dynkin          # or paper_verbatim
//   diffusion_cols: 2           # optional, columns of F (default dim)
//   g:
//   2 0 : 1
//   end
//   drift[1]:                   # 1-based indices; omitted entries are 0
//   1 0 : -0.5
//   end
//   diffusion[1][1]:            # F entries; or A[i][j] for the generator matrix
//   0 0 : 1
//   end
//
// Without diffusion or A blocks the diffusion is the identity.

#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "exitsos/generator.hpp"
#include "exitsos/polynomial.hpp"

namespace exitsos {

struct ProblemParseError : std::runtime_error {
  ProblemParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

inline ExitProblem parse_problem(const std::string& text) {
  std::istringstream is(text);
  std::string raw;
  std::size_t lineno = 0;
  std::optional<std::size_t> dim;
  std::optional<std::vector<double>> x0;
  std::optional<std::size_t> cols;
  Convention conv = Convention::Dynkin;
  std::optional<Polynomial> g;
  std::map<std::size_t, Polynomial> drift;
  std::map<std::pair<std::size_t, std::size_t>, Polynomial> diffusion, amat;

  static const std::regex indexed(R"(^(drift|diffusion|A)\[(\d+)\](?:\[(\d+)\])?$)");
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ProblemParseError(lineno, "expected 'key: value' or a block header");
    const std::string key = detail::trim(line.substr(0, colon));
    const std::string value = detail::trim(line.substr(colon + 1));

    if (key == "dim") {
      try {
        const long d = std::stol(value);
        if (d < 1) throw ProblemParseError(lineno, "dim must be positive");
        dim = static_cast<std::size_t>(d);
      } catch (const std::logic_error&) {
        throw ProblemParseError(lineno, "dim is not an integer");
      }
      continue;
    }
    if (key == "x0") {
      std::istringstream vs(value);
      std::vector<double> v;
      std::string tok;
      while (vs >> tok) {
        try {
          v.push_back(std::stod(tok));
        } catch (const std::logic_error&) {
          throw ProblemParseError(lineno, "bad x0 entry '" + tok + "'");
        }
      }
      x0 = v;
      continue;
    }
    if (key == "convention") {
      try {
        conv = convention_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ProblemParseError(lineno, e.what());
      }
      continue;
    }
    if (key == "diffusion_cols") {
      try {
        cols = static_cast<std::size_t>(std::stoul(value));
      } catch (const std::logic_error&) {
        throw ProblemParseError(lineno, "diffusion_cols is not an integer");
      }
      continue;
    }

    // Polynomial block.
    if (!value.empty()) throw ProblemParseError(lineno, "unexpected text after block header '" + key + ":'");
    if (!dim) throw ProblemParseError(lineno, "dim must be given before polynomial blocks");
    std::string body;
    const std::size_t start = lineno;
    bool closed = false;
    while (std::getline(is, raw)) {
      ++lineno;
      const std::string t = detail::trim(raw.substr(0, raw.find('#')));
      if (t == "end") {
        closed = true;
        break;
      }
      body += t + "\n";
    }
    if (!closed) throw ProblemParseError(start, "block '" + key + "' is missing 'end'");
    Polynomial p(*dim);
    try {
      p = polynomial_from_text(*dim, body);
    } catch (const std::exception& e) {
      throw ProblemParseError(start, "block '" + key + "': " + e.what());
    }
    if (key == "g") {
      g = p;
      continue;
    }
    std::smatch m;
    if (!std::regex_match(key, m, indexed)) throw ProblemParseError(start, "unknown block '" + key + "'");
    const std::string kind = m[1];
    const std::size_t i = std::stoul(m[2]);
    if (i < 1) throw ProblemParseError(start, "indices are 1-based");
    if (kind == "drift") {
      if (m[3].matched) throw ProblemParseError(start, "drift takes one index");
      drift[i - 1] = p;
    } else {
      if (!m[3].matched) throw ProblemParseError(start, kind + " takes two indices");
      const std::size_t j = std::stoul(m[3]);
      if (j < 1) throw ProblemParseError(start, "indices are 1-based");
      (kind == "A" ? amat : diffusion)[{i - 1, j - 1}] = p;
    }
  }

  if (!dim) throw ProblemParseError(lineno, "missing dim");
  if (!x0) throw ProblemParseError(lineno, "missing x0");
  if (!g) throw ProblemParseError(lineno, "missing g block");
  if (!diffusion.empty() && !amat.empty()) throw ProblemParseError(lineno, "give either diffusion or A, not both");
  const std::size_t n = *dim;
  std::vector<Polynomial> f0 = zero_vector(n);
  for (const auto& [i, p] : drift) {
    if (i >= n) throw ProblemParseError(lineno, "drift index out of range");
    f0[i] = p;
  }
  try {
    if (!amat.empty()) {
      PolyMatrix A(n, std::vector<Polynomial>(n, Polynomial(n)));
      for (const auto& [ij, p] : amat) {
        if (ij.first >= n || ij.second >= n) throw ProblemParseError(lineno, "A index out of range");
        A[ij.first][ij.second] = p;
      }
      return ExitProblem::from_generator_matrix(f0, A, *g, *x0, conv);
    }
    const std::size_t r = cols.value_or(n);
    PolyMatrix F = diffusion.empty() ? identity_matrix(n) : PolyMatrix(n, std::vector<Polynomial>(r, Polynomial(n)));
    for (const auto& [ij, p] : diffusion) {
      if (ij.first >= n || ij.second >= r) throw ProblemParseError(lineno, "diffusion index out of range");
      F[ij.first][ij.second] = p;
    }
    return ExitProblem::from_diffusion(f0, F, *g, *x0, conv);
  } catch (const std::invalid_argument& e) {
    throw ProblemParseError(lineno, e.what());
  }
}

inline ExitProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

/// Canonical text form; parse_problem(problem_to_text(p)) reproduces p.
inline std::string problem_to_text(const ExitProblem& p) {
  std::ostringstream os;
  os << "dim: " << p.n << "\nx0:";
  for (double v : p.x0) os << ' ' << format_real(v);
  os << "\nconvention: " << to_string(p.convention) << "\n";
  os << "g:\n" << to_text(p.g) << "end\n";
  for (std::size_t i = 0; i < p.n; ++i)
    if (!p.drift[i].is_zero()) os << "drift[" << i + 1 << "]:\n" << to_text(p.drift[i]) << "end\n";
  if (p.diffusion) {
    os << "diffusion_cols: " << (*p.diffusion)[0].size() << "\n";
    for (std::size_t i = 0; i < p.n; ++i)
      for (std::size_t j = 0; j < (*p.diffusion)[i].size(); ++j)
        if (!(*p.diffusion)[i][j].is_zero())
          os << "diffusion[" << i + 1 << "][" << j + 1 << "]:\n" << to_text((*p.diffusion)[i][j]) << "end\n";
  } else {
    for (std::size_t i = 0; i < p.n; ++i)
      for (std::size_t j = 0; j < p.n; ++j)
        if (!p.A[i][j].is_zero()) os << "A[" << i + 1 << "][" << j + 1 << "]:\n" << to_text(p.A[i][j]) << "end\n";
  }
  return os.str();
}

}  // namespace exitsos
