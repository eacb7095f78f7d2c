#pragma once

// Solver-agnostic conic programs: free scalars and symmetric PSD blocks tied
// together by sparse affine equalities, with a linear objective.
//
// Scalar unknowns are numbered in declaration order. A PSD block of side s
// contributes s(s+1)/2 scalars, its upper triangle packed row by row. An
// equality coefficient on a packed off-diagonal scalar X_ij (i < j) applies
// once to the shared entry: in trace form it is the matrix entry c/2 placed
// at both (i,j) and (j,i).

#include <algorithm>
#include <cstddef>
#include <tuple>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exitsos/polynomial.hpp"

namespace exitsos {

using LinearForm = std::map<std::size_t, double>;

/// constant + sum_k coef_k * unknown_k.
struct AffineForm {
  LinearForm linear;
  double constant = 0.0;

  void add(std::size_t var, double c) {
    if (c == 0.0) return;
    auto [it, ins] = linear.try_emplace(var, c);
    if (!ins) {
      it->second += c;
      if (it->second == 0.0) linear.erase(it);
    }
  }
  AffineForm& operator+=(const AffineForm& o) {
    constant += o.constant;
    for (const auto& [k, c] : o.linear) add(k, c);
    return *this;
  }
  AffineForm& operator*=(double s) {
    constant *= s;
    for (auto it = linear.begin(); it != linear.end();) {
      it->second *= s;
      if (it->second == 0.0)
        it = linear.erase(it);
      else
        ++it;
    }
    return *this;
  }
  bool is_zero() const { return constant == 0.0 && linear.empty(); }
  double evaluate(const std::vector<double>& values) const {
    double s = constant;
    for (const auto& [k, c] : linear) s += c * values.at(k);
    return s;
  }
};

enum class Sense { Maximize, Minimize };

struct PsdBlock {
  std::string name;
  std::size_t side = 0;
  std::size_t base = 0;  // global index of packed entry (0,0)

  std::size_t packed_size() const { return side * (side + 1) / 2; }
  /// Global index of entry (i,j); order-insensitive.
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    if (j >= side) throw std::out_of_range("PsdBlock::index out of range");
    return base + i * side - i * (i - 1) / 2 + (j - i);
  }
};

struct Equality {
  LinearForm lhs;
  double rhs = 0.0;
  std::string label;
};

class ConicProgram {
 public:
  struct ScalarRef {
    int block = -1;  // -1 for a free scalar
    std::size_t i = 0, j = 0;  // position in the block, or free-variable ordinal in i
  };

  std::size_t add_free(const std::string& name) {
    const std::size_t idx = scalars_.size();
    scalars_.push_back({-1, free_names_.size(), 0});
    free_index_.push_back(idx);
    free_names_.push_back(name);
    return idx;
  }

  /// Returns the block ordinal.
  std::size_t add_psd_block(const std::string& name, std::size_t side) {
    if (side == 0) throw std::invalid_argument("ConicProgram: PSD block side must be positive");
    PsdBlock b{name, side, scalars_.size()};
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = i; j < side; ++j) scalars_.push_back({static_cast<int>(blocks_.size()), i, j});
    blocks_.push_back(b);
    return blocks_.size() - 1;
  }

  void add_equality(LinearForm lhs, double rhs, std::string label = {}) {
    for (const auto& [k, c] : lhs)
      if (k >= scalars_.size()) throw std::out_of_range("ConicProgram: equality references an undeclared unknown");
    equalities_.push_back({std::move(lhs), rhs, std::move(label)});
  }

  /// Adds the equality form == 0, moving the constant to the right-hand side.
  void add_equality(const AffineForm& form, std::string label = {}) {
    add_equality(form.linear, -form.constant, std::move(label));
  }

  void set_objective(AffineForm obj, Sense s) {
    for (const auto& [k, c] : obj.linear)
      if (k >= scalars_.size()) throw std::out_of_range("ConicProgram: objective references an undeclared unknown");
    objective_ = std::move(obj);
    sense_ = s;
  }

  std::size_t num_scalars() const { return scalars_.size(); }
  std::size_t num_free() const { return free_names_.size(); }
  const std::vector<std::string>& free_names() const { return free_names_; }
  const std::vector<std::size_t>& free_indices() const { return free_index_; }
  const std::vector<PsdBlock>& blocks() const { return blocks_; }
  const std::vector<Equality>& equalities() const { return equalities_; }
  const std::vector<ScalarRef>& scalars() const { return scalars_; }
  const AffineForm& objective() const { return objective_; }
  Sense sense() const { return sense_; }

  std::size_t max_block_side() const {
    std::size_t m = 0;
    for (const auto& b : blocks_) m = std::max(m, b.side);
    return m;
  }

  static constexpr const char* kPackingNote =
      "upper-triangular row-major packing; an off-diagonal coefficient applies once to the shared entry";

 private:
  std::vector<ScalarRef> scalars_;
  std::vector<std::string> free_names_;
  std::vector<std::size_t> free_index_;
  std::vector<PsdBlock> blocks_;
  std::vector<Equality> equalities_;
  AffineForm objective_;
  Sense sense_ = Sense::Minimize;
};

/// Offset of (i, j), i <= j, inside an upper-triangular row-major packing of side s.
inline std::size_t packed_offset(std::size_t s, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return i * s - i * (i - 1) / 2 + (j - i);
}

/// Writes the program in sparse SDPA format (.dat-s).
///
/// The PSD blocks and a diagonal block holding free scalars split as x+ - x-
/// form the SDPA dual variable Y; equality k becomes <F_k, Y> = c_k and the
/// objective (negated when minimizing) becomes F_0, so SDPA's dual problem
/// "max <F_0, Y>" reproduces the program. The objective constant is reported
/// in a comment only.
inline void write_sdpa(const ConicProgram& prog, std::ostream& os) {
  const bool has_free = prog.num_free() > 0;
  const std::size_t nblocks = prog.blocks().size() + (has_free ? 1 : 0);
  const double sign = prog.sense() == Sense::Maximize ? 1.0 : -1.0;
  os << "\"exitsos conic program; " << (prog.sense() == Sense::Maximize ? "maximize" : "minimize")
     << "; objective constant " << format_real(prog.objective().constant) << "\n";
  os << "\"free scalars are stored as x+ - x- in the final diagonal block\n";
  os << prog.equalities().size() << "\n" << nblocks << "\n";
  for (std::size_t b = 0; b < prog.blocks().size(); ++b) os << (b ? " " : "") << prog.blocks()[b].side;
  if (has_free) os << (prog.blocks().empty() ? "" : " ") << "-" << 2 * prog.num_free();
  os << "\n";
  for (std::size_t k = 0; k < prog.equalities().size(); ++k)
    os << (k ? " " : "") << format_real(prog.equalities()[k].rhs);
  os << "\n";

  struct Entry {
    std::size_t mat, blk, i, j;
    double v;
  };
  auto emit_form = [&](std::size_t mat, const LinearForm& form, double scale) {
    std::vector<Entry> entries;
    for (const auto& [idx, c] : form) {
      const auto& ref = prog.scalars()[idx];
      if (ref.block < 0) {
        const std::size_t blk = prog.blocks().size() + 1;
        entries.push_back({mat, blk, 2 * ref.i + 1, 2 * ref.i + 1, scale * c});
        entries.push_back({mat, blk, 2 * ref.i + 2, 2 * ref.i + 2, -scale * c});
      } else {
        const double v = ref.i == ref.j ? c : 0.5 * c;
        entries.push_back({mat, static_cast<std::size_t>(ref.block) + 1, ref.i + 1, ref.j + 1, scale * v});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.blk, a.i, a.j) < std::tie(b.blk, b.i, b.j);
    });
    for (const auto& e : entries)
      if (e.v != 0.0) os << e.mat << ' ' << e.blk << ' ' << e.i << ' ' << e.j << ' ' << format_real(e.v) << '\n';
  };
  emit_form(0, prog.objective().linear, sign);
  for (std::size_t k = 0; k < prog.equalities().size(); ++k) emit_form(k + 1, prog.equalities()[k].lhs, 1.0);
}

inline nlohmann::json to_json(const ConicProgram& prog) {
  using nlohmann::json;
  json j;
  j["packing"] = ConicProgram::kPackingNote;
  j["sense"] = prog.sense() == Sense::Maximize ? "max" : "min";
  json order = json::array();
  // Declaration order of free scalars and blocks, so indices round-trip.
  std::size_t next_block = 0;
  for (std::size_t idx = 0; idx < prog.num_scalars();) {
    const auto& ref = prog.scalars()[idx];
    if (ref.block < 0) {
      order.push_back({{"free", prog.free_names()[ref.i]}});
      ++idx;
    } else {
      const auto& b = prog.blocks()[next_block++];
      order.push_back({{"psd", b.name}, {"side", b.side}});
      idx += b.packed_size();
    }
  }
  j["unknowns"] = order;
  json eqs = json::array();
  for (const auto& e : prog.equalities()) {
    json terms = json::array();
    for (const auto& [k, c] : e.lhs) terms.push_back({k, c});
    eqs.push_back({{"terms", terms}, {"rhs", e.rhs}, {"label", e.label}});
  }
  j["equalities"] = eqs;
  json obj = json::array();
  for (const auto& [k, c] : prog.objective().linear) obj.push_back({k, c});
  j["objective"] = {{"terms", obj}, {"constant", prog.objective().constant}};
  return j;
}

inline ConicProgram conic_program_from_json(const nlohmann::json& j) {
  ConicProgram p;
  for (const auto& u : j.at("unknowns")) {
    if (u.contains("free"))
      p.add_free(u.at("free").get<std::string>());
    else
      p.add_psd_block(u.at("psd").get<std::string>(), u.at("side").get<std::size_t>());
  }
  for (const auto& e : j.at("equalities")) {
    LinearForm lf;
    for (const auto& t : e.at("terms")) lf[t.at(0).get<std::size_t>()] = t.at(1).get<double>();
    p.add_equality(std::move(lf), e.at("rhs").get<double>(), e.at("label").get<std::string>());
  }
  AffineForm obj;
  for (const auto& t : j.at("objective").at("terms")) obj.linear[t.at(0).get<std::size_t>()] = t.at(1).get<double>();
  obj.constant = j.at("objective").at("constant").get<double>();
  p.set_objective(std::move(obj), j.at("sense").get<std::string>() == "max" ? Sense::Maximize : Sense::Minimize);
  return p;
}

}  // namespace exitsos
