#pragma once

// Solver adapter boundary and the built-in primal-dual interior-point method.
//
// The IPM solves, for the program's PSD blocks X_k and free scalars x_f,
//   min  c_f'x_f + sum_k <C_k, X_k>   s.t.  A_f x_f + sum_k A_k(X_k) = b,  X_k >= 0
// together with its dual
//   max  b'y   s.t.  A_f' y = c_f,  S_k = C_k - A_k^*(y) >= 0,
// using the HKM search direction with Mehrotra predictor-corrector steps.
// Free scalars enter the Newton system through the reduced KKT matrix
//   [ M    A_f ] [dy  ]   [h  ]
//   [ A_f'  0  ] [dx_f] = [r_f],   M_ij = <A_i, X A_j S^{-1}>.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "exitsos/conic_program.hpp"

namespace exitsos {

enum class SolveStatus { Optimal, Infeasible, Unbounded, Inaccurate, Timeout };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "OPTIMAL";
    case SolveStatus::Infeasible: return "INFEASIBLE";
    case SolveStatus::Unbounded: return "UNBOUNDED";
    case SolveStatus::Inaccurate: return "INACCURATE";
    case SolveStatus::Timeout: return "TIMEOUT";
  }
  return "UNKNOWN";
}

struct SolverOptions {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  double infeasibility_tol = 1e-8;
  int max_iterations = 150;
  double time_limit_seconds = 600.0;
  double step_fraction = 0.95;
  bool verbose = false;  // per-iteration trace on stderr
};

struct SolverResult {
  SolveStatus status = SolveStatus::Inaccurate;
  std::vector<double> primal;  // one value per program scalar, declaration order
  std::vector<double> dual;    // one multiplier per equality
  double objective = 0.0;      // in the program's own sense, constant included
  double dual_objective = 0.0;
  int iterations = 0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  double seconds = 0.0;
  std::string message;
};

class SolverAdapter {
 public:
  virtual ~SolverAdapter() = default;
  virtual std::string name() const = 0;
  virtual SolverResult solve(const ConicProgram& program, const SolverOptions& options) const = 0;
};

namespace ipm {

// Above this estimate the explicit Schur matrix is replaced by its QR-factored form.
inline constexpr double kFactoredSchurCondition = 1e10;

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One packed coefficient: contributes v * X(p,q) to a row, p <= q.
struct Coef {
  int p, q;
  double v;
};

struct RowSlice {
  std::size_t row;
  std::vector<Coef> coefs;
};

struct Block {
  std::size_t side = 0;
  std::size_t base = 0;  // global scalar index of (0,0) in the program
  MatrixXd C;
  std::vector<RowSlice> rows;
};

struct Data {
  std::size_t m = 0;
  VectorXd b;
  MatrixXd Af;  // m x nf
  VectorXd cf;
  std::vector<Block> blocks;
  std::vector<std::size_t> free_global;  // global index of each free scalar
  std::vector<std::size_t> row_map;      // kept row -> program equality
  std::vector<double> row_scale;
  double obj_sign = 1.0;  // program objective = obj_sign * (min objective) + constant
  double obj_constant = 0.0;
  bool trivially_infeasible = false;
};

inline double apply_row(const std::vector<Coef>& coefs, const MatrixXd& Y) {
  double s = 0.0;
  for (const auto& c : coefs) s += c.p == c.q ? c.v * Y(c.p, c.p) : 0.5 * c.v * (Y(c.p, c.q) + Y(c.q, c.p));
  return s;
}

inline void add_sym(MatrixXd& M, const Coef& c, double scale) {
  if (c.p == c.q) {
    M(c.p, c.p) += scale * c.v;
  } else {
    M(c.p, c.q) += 0.5 * scale * c.v;
    M(c.q, c.p) += 0.5 * scale * c.v;
  }
}

inline Data build(const ConicProgram& prog) {
  Data d;
  d.obj_sign = prog.sense() == Sense::Maximize ? -1.0 : 1.0;
  d.obj_constant = prog.objective().constant;
  const std::size_t nf = prog.num_free();
  d.free_global = prog.free_indices();
  std::vector<long> free_ordinal(prog.num_scalars(), -1);
  for (std::size_t k = 0; k < nf; ++k) free_ordinal[d.free_global[k]] = static_cast<long>(k);

  for (const auto& pb : prog.blocks()) {
    Block b;
    b.side = pb.side;
    b.base = pb.base;
    b.C = MatrixXd::Zero(pb.side, pb.side);
    d.blocks.push_back(std::move(b));
  }
  d.cf = VectorXd::Zero(nf);
  for (const auto& [idx, c] : prog.objective().linear) {
    const auto& ref = prog.scalars()[idx];
    const double v = d.obj_sign * c;
    if (ref.block < 0)
      d.cf(free_ordinal[idx]) += v;
    else
      add_sym(d.blocks[ref.block].C, {static_cast<int>(ref.i), static_cast<int>(ref.j), v}, 1.0);
  }

  // Rows are normalized to unit Euclidean norm; empty rows are dropped (or flag infeasibility).
  std::vector<std::vector<std::pair<std::size_t, double>>> free_entries;
  std::vector<double> rhs;
  for (std::size_t e = 0; e < prog.equalities().size(); ++e) {
    const auto& eq = prog.equalities()[e];
    double nrm = 0.0;
    for (const auto& [idx, c] : eq.lhs) nrm += c * c;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) {
      if (std::abs(eq.rhs) > 1e-12) d.trivially_infeasible = true;
      continue;
    }
    const std::size_t row = d.row_map.size();
    d.row_map.push_back(e);
    d.row_scale.push_back(1.0 / nrm);
    rhs.push_back(eq.rhs / nrm);
    free_entries.emplace_back();
    std::vector<std::vector<Coef>> per_block(d.blocks.size());
    for (const auto& [idx, c] : eq.lhs) {
      const auto& ref = prog.scalars()[idx];
      if (ref.block < 0)
        free_entries.back().push_back({static_cast<std::size_t>(free_ordinal[idx]), c / nrm});
      else
        per_block[ref.block].push_back({static_cast<int>(ref.i), static_cast<int>(ref.j), c / nrm});
    }
    for (std::size_t k = 0; k < d.blocks.size(); ++k)
      if (!per_block[k].empty()) d.blocks[k].rows.push_back({row, std::move(per_block[k])});
  }
  d.m = rhs.size();
  d.b = Eigen::Map<VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  d.Af = MatrixXd::Zero(d.m, nf);
  for (std::size_t r = 0; r < d.m; ++r)
    for (const auto& [k, v] : free_entries[r]) d.Af(r, k) += v;
  return d;
}

struct Iterate {
  std::vector<MatrixXd> X, S;
  VectorXd xf, y;
};

inline VectorXd A_op(const Data& d, const std::vector<MatrixXd>& Y, const VectorXd& xf) {
  VectorXd out = d.Af * xf;
  for (std::size_t k = 0; k < d.blocks.size(); ++k)
    for (const auto& rs : d.blocks[k].rows) out(rs.row) += apply_row(rs.coefs, Y[k]);
  return out;
}

inline std::vector<MatrixXd> A_adj(const Data& d, const VectorXd& y) {
  std::vector<MatrixXd> out;
  for (const auto& b : d.blocks) {
    MatrixXd M = MatrixXd::Zero(b.side, b.side);
    for (const auto& rs : b.rows)
      for (const auto& c : rs.coefs) add_sym(M, c, y(rs.row));
    out.push_back(std::move(M));
  }
  return out;
}

/// P = A A^* over blocks and free columns; fixed for the whole solve.
inline MatrixXd row_gram(const Data& d) {
  MatrixXd P = d.Af * d.Af.transpose();
  for (const auto& blk : d.blocks) {
    std::map<std::pair<int, int>, std::vector<std::pair<std::size_t, double>>> by_entry;
    for (const auto& rs : blk.rows)
      for (const auto& c : rs.coefs) by_entry[{c.p, c.q}].push_back({rs.row, c.v});
    for (const auto& [pq, list] : by_entry) {
      const double w = pq.first == pq.second ? 1.0 : 0.5;
      for (const auto& [ra, va] : list)
        for (const auto& [rb, vb] : list) P(ra, rb) += w * va * vb;
    }
  }
  return P;
}

/// Largest step alpha with X + alpha dX PSD, given the Cholesky factor of X.
inline double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dX) {
  const auto L = chol.matrixL();
  MatrixXd Z = L.solve(dX);
  Z = L.solve(Z.transpose()).transpose();
  Z = 0.5 * (Z + Z.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(Z, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

inline MatrixXd inverse_spd(const Eigen::LLT<MatrixXd>& chol, std::size_t n) {
  MatrixXd W = chol.solve(MatrixXd::Identity(n, n));
  return 0.5 * (W + W.transpose());
}

inline MatrixXd schur_matrix(const Data& d, const std::vector<MatrixXd>& X, const std::vector<MatrixXd>& W) {
  MatrixXd M = MatrixXd::Zero(d.m, d.m);
  for (std::size_t k = 0; k < d.blocks.size(); ++k) {
    const auto& blk = d.blocks[k];
    const Eigen::Index n = static_cast<Eigen::Index>(blk.side);
    MatrixXd T = MatrixXd::Zero(n, n);
    std::vector<int> touched;
    std::vector<char> mark(blk.side, 0);
    for (const auto& rj : blk.rows) {
      // T = A_j W, nonzero only in the rows touched by A_j.
      touched.clear();
      for (const auto& c : rj.coefs) {
        if (c.p == c.q) {
          T.row(c.p) += c.v * W[k].row(c.p);
        } else {
          T.row(c.p) += 0.5 * c.v * W[k].row(c.q);
          T.row(c.q) += 0.5 * c.v * W[k].row(c.p);
        }
        for (int r : {c.p, c.q})
          if (!mark[r]) {
            mark[r] = 1;
            touched.push_back(r);
          }
      }
      MatrixXd Xc(n, static_cast<Eigen::Index>(touched.size()));
      MatrixXd Tr(static_cast<Eigen::Index>(touched.size()), n);
      for (std::size_t t = 0; t < touched.size(); ++t) {
        Xc.col(t) = X[k].col(touched[t]);
        Tr.row(t) = T.row(touched[t]);
      }
      const MatrixXd G = Xc * Tr;  // X A_j W
      for (int r : touched) {
        T.row(r).setZero();
        mark[r] = 0;
      }
      for (const auto& ri : blk.rows) M(ri.row, rj.row) += apply_row(ri.coefs, G);
    }
  }
  return 0.5 * (M + M.transpose());
}

/// Square root of the same matrix: M = B'B with column j of B equal to
/// vec(L' A_j R), where X = L L' and S^{-1} = R R'. M itself is never formed.
inline MatrixXd schur_factor(const Data& d, const std::vector<Eigen::LLT<MatrixXd>>& cholX,
                             const std::vector<Eigen::LLT<MatrixXd>>& cholS) {
  Eigen::Index rows = 0;
  for (const auto& blk : d.blocks) rows += static_cast<Eigen::Index>(blk.side * blk.side);
  MatrixXd B = MatrixXd::Zero(rows, static_cast<Eigen::Index>(d.m));
  Eigen::Index off = 0;
  for (std::size_t k = 0; k < d.blocks.size(); ++k) {
    const auto& blk = d.blocks[k];
    const Eigen::Index n = static_cast<Eigen::Index>(blk.side);
    const MatrixXd L = cholX[k].matrixL();
    // R' = L_S^{-1}, so row q of R is column q of L_S^{-1}.
    const MatrixXd Rt = cholS[k].matrixL().solve(MatrixXd::Identity(n, n));
    MatrixXd Z(n, n);
    for (const auto& rs : blk.rows) {
      Z.setZero();
      for (const auto& c : rs.coefs) {
        if (c.p == c.q) {
          Z.noalias() += c.v * L.row(c.p).transpose() * Rt.col(c.p).transpose();
        } else {
          Z.noalias() += 0.5 * c.v * L.row(c.p).transpose() * Rt.col(c.q).transpose();
          Z.noalias() += 0.5 * c.v * L.row(c.q).transpose() * Rt.col(c.p).transpose();
        }
      }
      B.col(static_cast<Eigen::Index>(rs.row)).segment(off, n * n) = Eigen::Map<const VectorXd>(Z.data(), n * n);
    }
    off += n * n;
  }
  return B;
}

/// Orthogonal split of the dual space by the free columns: Af P = [Q1 N] [R11 R12; 0 0].
struct FreeSplit {
  Eigen::Index rank = 0;
  MatrixXd Q1, N, R11;
  Eigen::PermutationMatrix<Eigen::Dynamic> perm;

  explicit FreeSplit(const MatrixXd& Af) {
    const Eigen::Index m = Af.rows();
    if (Af.cols() == 0) {
      N = MatrixXd::Identity(m, m);
      return;
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(Af);
    qr.setThreshold(1e-12);
    rank = qr.rank();
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(m, m);
    Q1 = Q.leftCols(rank);
    N = Q.rightCols(m - rank);
    R11 = qr.matrixR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
    perm = qr.colsPermutation();
  }
};

/// Solves [M Af; Af' 0] [dy; dxf] = [h; rf] on the null space of Af'. The reduced
/// matrix N'MN is factored either by Cholesky of an explicit M or, when M is too
/// ill-conditioned for that, by QR of B N where M = B'B.
class KktSolver {
 public:
  KktSolver(const MatrixXd& M, const MatrixXd& Af, const FreeSplit& split)
      : M_(&M), Af_(Af), split_(split) {
    const MatrixXd Mr = Af.cols() == 0 ? M : MatrixXd(split.N.transpose() * M * split.N);
    if (Mr.rows() == 0) {
      ok_ = true;
      return;
    }
    Eigen::LLT<MatrixXd> llt(0.5 * (Mr + Mr.transpose()));
    if (llt.info() != Eigen::Success) return;
    R_ = llt.matrixU();
    finish();
  }

  struct FromFactor {};
  KktSolver(FromFactor, const MatrixXd& B, const MatrixXd& Af, const FreeSplit& split)
      : B_(&B), Af_(Af), split_(split) {
    const MatrixXd BN = Af.cols() == 0 ? B : MatrixXd(B * split.N);
    const Eigen::Index k = BN.cols();
    if (k == 0) {
      ok_ = true;
      return;
    }
    Eigen::HouseholderQR<MatrixXd> qr(BN);
    R_ = MatrixXd::Zero(k, k);
    const Eigen::Index top = std::min(BN.rows(), k);
    R_.topRows(top) = qr.matrixQR().topRows(top).triangularView<Eigen::Upper>();
    const double scale = std::max(1e-300, R_.diagonal().cwiseAbs().maxCoeff());
    if (R_.diagonal().cwiseAbs().minCoeff() <= 1e-15 * scale) {
      // Rank deficient rows: append a small multiple of the identity.
      MatrixXd Br(BN.rows() + k, k);
      Br << BN, 1e-8 * scale * MatrixXd::Identity(k, k);
      Eigen::HouseholderQR<MatrixXd> qr2(Br);
      R_ = qr2.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    }
    finish();
  }

  /// Squared ratio of extreme diagonal entries of the triangular factor; a cheap
  /// lower estimate of the condition number of N'MN.
  double condition_estimate() const { return cond_; }
  bool ok() const { return ok_; }

  /// Solves with two rounds of iterative refinement against the full system.
  void solve(const VectorXd& h, const VectorXd& rf, VectorXd& dy, VectorXd& dxf) const {
    solve_once(h, rf, dy, dxf);
    for (int round = 0; round < 2; ++round) {
      const VectorXd r1 = h - apply_m(dy) - Af_ * dxf;
      const VectorXd r2 = rf - Af_.transpose() * dy;
      VectorXd cy, cx;
      solve_once(r1, r2, cy, cx);
      dy += cy;
      dxf += cx;
    }
  }

 private:
  VectorXd reduced_solve(const VectorXd& r) const {
    if (R_.rows() == 0) return VectorXd::Zero(0);
    const VectorXd t = R_.transpose().triangularView<Eigen::Lower>().solve(r);
    return R_.triangularView<Eigen::Upper>().solve(t);
  }
  VectorXd apply_m(const VectorXd& y) const { return M_ ? VectorXd(*M_ * y) : VectorXd(B_->transpose() * (*B_ * y)); }

  void finish() {
    const VectorXd dg = R_.diagonal().cwiseAbs();
    const double lo = dg.minCoeff(), hi = dg.maxCoeff();
    ok_ = std::isfinite(lo) && std::isfinite(hi) && lo > 0.0;
    cond_ = ok_ ? (hi / lo) * (hi / lo) : std::numeric_limits<double>::infinity();
  }

  void solve_once(const VectorXd& h, const VectorXd& rf, VectorXd& dy, VectorXd& dxf) const {
    if (Af_.cols() == 0) {
      dy = reduced_solve(h);
      dxf.resize(0);
      return;
    }
    const FreeSplit& f = split_;
    const VectorXd prf = f.perm.transpose() * rf;
    const VectorXd u = f.R11.transpose().triangularView<Eigen::Lower>().solve(prf.head(f.rank));
    dy = f.Q1 * u;
    dy += f.N * reduced_solve(f.N.transpose() * (h - apply_m(dy)));
    const VectorXd w1 = f.R11.triangularView<Eigen::Upper>().solve(f.Q1.transpose() * (h - apply_m(dy)));
    VectorXd w = VectorXd::Zero(Af_.cols());
    w.head(f.rank) = w1;
    dxf = f.perm * w;
  }

  const MatrixXd* M_ = nullptr;
  const MatrixXd* B_ = nullptr;
  const MatrixXd& Af_;
  const FreeSplit& split_;
  MatrixXd R_;
  bool ok_ = false;
  double cond_ = std::numeric_limits<double>::infinity();
};

}  // namespace ipm

class InteriorPointSolver final : public SolverAdapter {
 public:
  std::string name() const override { return "ipm"; }

  SolverResult solve(const ConicProgram& program, const SolverOptions& opt) const override {
    using namespace ipm;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    SolverResult res;
    const Data d = build(program);
    const std::size_t nb = d.blocks.size();
    const std::size_t nf = d.cf.size();
    res.primal.assign(program.num_scalars(), 0.0);
    res.dual.assign(program.equalities().size(), 0.0);
    if (d.trivially_infeasible) {
      res.status = SolveStatus::Infeasible;
      res.message = "an equality with no unknowns has a nonzero right-hand side";
      return res;
    }

    // Primal directions are projected back onto A(dX) + A_f dx_f = r_p; rounding in
    // dX grows like 1/mu and otherwise erodes primal feasibility near the optimum.
    Eigen::LDLT<MatrixXd> projector(row_gram(d));

    std::size_t total_side = 0;
    for (const auto& b : d.blocks) total_side += b.side;

    // Starting point: scaled identities, y = 0, x_f = 0.
    Iterate it;
    it.xf = VectorXd::Zero(nf);
    it.y = VectorXd::Zero(d.m);
    for (const auto& blk : d.blocks) {
      const double n = static_cast<double>(blk.side);
      double max_row_norm = 0.0, ratio = 0.0;
      std::vector<double> row_norm(d.m, 0.0);
      for (const auto& rs : blk.rows) {
        double s = 0.0;
        for (const auto& c : rs.coefs) s += (c.p == c.q ? 1.0 : 0.5) * c.v * c.v;
        row_norm[rs.row] = std::sqrt(s);
      }
      for (std::size_t r = 0; r < d.m; ++r) {
        max_row_norm = std::max(max_row_norm, row_norm[r]);
        ratio = std::max(ratio, (1.0 + std::abs(d.b(r))) / (1.0 + row_norm[r]));
      }
      const double xi = std::max({10.0, std::sqrt(n), n * ratio});
      const double eta = std::max({10.0, std::sqrt(n), max_row_norm, blk.C.norm()});
      it.X.push_back(xi * MatrixXd::Identity(blk.side, blk.side));
      it.S.push_back(eta * MatrixXd::Identity(blk.side, blk.side));
    }

    const double b_norm = d.b.norm();
    double c_norm = d.cf.squaredNorm();
    for (const auto& blk : d.blocks) c_norm += blk.C.squaredNorm();
    c_norm = std::sqrt(c_norm);

    auto finish = [&](SolveStatus st, std::string msg) {
      res.status = st;
      res.message = std::move(msg);
      for (std::size_t k = 0; k < nf; ++k) res.primal[d.free_global[k]] = it.xf(k);
      for (std::size_t k = 0; k < nb; ++k) {
        const auto& blk = d.blocks[k];
        for (std::size_t i = 0; i < blk.side; ++i)
          for (std::size_t j = i; j < blk.side; ++j)
            res.primal[blk.base + packed_offset(blk.side, i, j)] = it.X[k](i, j);
      }
      for (std::size_t r = 0; r < d.m; ++r) res.dual[d.row_map[r]] = it.y(r) * d.row_scale[r];
      double pobj = d.cf.dot(it.xf);
      for (std::size_t k = 0; k < nb; ++k) pobj += d.blocks[k].C.cwiseProduct(it.X[k]).sum();
      res.objective = d.obj_sign * pobj + d.obj_constant;
      res.dual_objective = d.obj_sign * d.b.dot(it.y) + d.obj_constant;
      res.seconds = elapsed();
      return res;
    };

    const ipm::FreeSplit free_split(d.Af);
    bool factored_schur = false;
    for (int iter = 0;; ++iter) {
      res.iterations = iter;
      // Residuals and objectives.
      const VectorXd rp = d.b - A_op(d, it.X, it.xf);
      const std::vector<MatrixXd> Aty = A_adj(d, it.y);
      std::vector<MatrixXd> Rd(nb);
      double rd2 = 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        Rd[k] = d.blocks[k].C - Aty[k] - it.S[k];
        rd2 += Rd[k].squaredNorm();
      }
      const VectorXd rf = d.cf - d.Af.transpose() * it.y;
      rd2 += rf.squaredNorm();
      double pobj = d.cf.dot(it.xf), gap_xs = 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        pobj += d.blocks[k].C.cwiseProduct(it.X[k]).sum();
        gap_xs += it.X[k].cwiseProduct(it.S[k]).sum();
      }
      const double dobj = d.b.dot(it.y);
      res.primal_infeasibility = rp.norm() / (1.0 + b_norm);
      res.dual_infeasibility = std::sqrt(rd2) / (1.0 + c_norm);
      res.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

      if (res.primal_infeasibility <= opt.feasibility_tol && res.dual_infeasibility <= opt.feasibility_tol &&
          res.relative_gap <= opt.gap_tol)
        return finish(SolveStatus::Optimal, "converged");

      // Farkas certificate for primal infeasibility: b'y > 0, A^*(y) <= 0, A_f'y = 0.
      if (dobj > 0.0) {
        double viol = (d.Af.transpose() * it.y).norm();
        for (std::size_t k = 0; k < nb; ++k) {
          const double lmax =
              Eigen::SelfAdjointEigenSolver<MatrixXd>(Aty[k], Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
          viol = std::max(viol, lmax);
        }
        if (viol / dobj <= opt.infeasibility_tol)
          return finish(SolveStatus::Infeasible, "dual ray certifies primal infeasibility");
      }
      // Certificate for dual infeasibility: a primal ray with negative cost.
      if (pobj < 0.0) {
        const VectorXd ax = A_op(d, it.X, it.xf);
        if (ax.norm() / -pobj <= opt.infeasibility_tol)
          return finish(SolveStatus::Unbounded, "primal ray certifies unboundedness");
      }
      if (iter >= opt.max_iterations) return finish(SolveStatus::Timeout, "iteration limit reached");
      if (elapsed() > opt.time_limit_seconds) return finish(SolveStatus::Timeout, "time limit reached");

      const double mu = total_side > 0 ? gap_xs / static_cast<double>(total_side) : 0.0;
      if (opt.verbose)
        std::fprintf(stderr, "ipm %3d  pobj %+.10e  dobj %+.10e  pinf %.2e  dinf %.2e  gap %.2e  mu %.2e\n", iter, pobj,
                     dobj, res.primal_infeasibility, res.dual_infeasibility, res.relative_gap, mu);

      std::vector<Eigen::LLT<MatrixXd>> cholX(nb), cholS(nb);
      std::vector<MatrixXd> W(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        cholX[k].compute(it.X[k]);
        cholS[k].compute(it.S[k]);
        if (cholX[k].info() != Eigen::Success || cholS[k].info() != Eigen::Success)
          return finish(SolveStatus::Inaccurate, "iterate lost positive definiteness");
        W[k] = inverse_spd(cholS[k], d.blocks[k].side);
      }
      MatrixXd M, Bs;
      std::optional<KktSolver> kkt;
      if (!factored_schur) {
        M = schur_matrix(d, it.X, W);
        kkt.emplace(M, d.Af, free_split);
        factored_schur = !kkt->ok() || kkt->condition_estimate() > kFactoredSchurCondition;
      }
      if (factored_schur) {
        Bs = schur_factor(d, cholX, cholS);
        kkt.emplace(KktSolver::FromFactor{}, Bs, d.Af, free_split);
      }
      if (!kkt->ok()) return finish(SolveStatus::Inaccurate, "Schur complement factorization failed");

      struct Direction {
        std::vector<MatrixXd> dX, dS;
        VectorXd dy, dxf;
      };
      auto direction = [&](double sigma, const Direction* pred) {
        Direction dir;
        std::vector<MatrixXd> Y(nb);
        for (std::size_t k = 0; k < nb; ++k) {
          Y[k] = sigma * mu * W[k] - it.X[k] - it.X[k] * Rd[k] * W[k];
          if (pred) Y[k] -= pred->dX[k] * pred->dS[k] * W[k];
        }
        const VectorXd h = rp - A_op(d, Y, VectorXd::Zero(nf));
        kkt->solve(h, rf, dir.dy, dir.dxf);
        const std::vector<MatrixXd> Atdy = A_adj(d, dir.dy);
        dir.dX.resize(nb);
        dir.dS.resize(nb);
        for (std::size_t k = 0; k < nb; ++k) {
          dir.dS[k] = Rd[k] - Atdy[k];
          MatrixXd dX = sigma * mu * W[k] - it.X[k] - it.X[k] * dir.dS[k] * W[k];
          if (pred) dX -= pred->dX[k] * pred->dS[k] * W[k];
          dir.dX[k] = 0.5 * (dX + dX.transpose());
        }
        const VectorXd z = projector.solve(rp - A_op(d, dir.dX, dir.dxf));
        const std::vector<MatrixXd> Atz = A_adj(d, z);
        for (std::size_t k = 0; k < nb; ++k) dir.dX[k] += Atz[k];
        if (nf > 0) dir.dxf += d.Af.transpose() * z;
        return dir;
      };
      auto steps = [&](const Direction& dir, double& ap, double& ad) {
        ap = ad = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nb; ++k) {
          ap = std::min(ap, max_step(cholX[k], dir.dX[k]));
          ad = std::min(ad, max_step(cholS[k], dir.dS[k]));
        }
      };

      const Direction pred = direction(0.0, nullptr);
      double ap, ad;
      steps(pred, ap, ad);
      ap = std::min(1.0, ap);
      ad = std::min(1.0, ad);
      double mu_aff = 0.0;
      for (std::size_t k = 0; k < nb; ++k)
        mu_aff += (it.X[k] + ap * pred.dX[k]).cwiseProduct(it.S[k] + ad * pred.dS[k]).sum();
      mu_aff = total_side > 0 ? mu_aff / static_cast<double>(total_side) : 0.0;
      const double sigma = mu > 0.0 ? std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0) : 0.0;

      const Direction corr = direction(sigma, &pred);
      steps(corr, ap, ad);
      ap = std::min(1.0, opt.step_fraction * ap);
      ad = std::min(1.0, opt.step_fraction * ad);

      // Backtrack if rounding left a trial iterate without a Cholesky factor.
      auto factorable = [&](const std::vector<MatrixXd>& base, const std::vector<MatrixXd>& dir, double a) {
        for (std::size_t k = 0; k < nb; ++k) {
          Eigen::LLT<MatrixXd> llt(base[k] + a * dir[k]);
          if (llt.info() != Eigen::Success) return false;
        }
        return true;
      };
      auto backtrack = [&](const std::vector<MatrixXd>& base, const std::vector<MatrixXd>& dir, double a) {
        for (int t = 0; t < 60 && a > 0.0; ++t, a *= 0.7)
          if (factorable(base, dir, a)) return a;
        return 0.0;
      };
      ap = backtrack(it.X, corr.dX, ap);
      ad = backtrack(it.S, corr.dS, ad);

      for (std::size_t k = 0; k < nb; ++k) {
        it.X[k] += ap * corr.dX[k];
        it.S[k] += ad * corr.dS[k];
      }
      if (nf > 0) it.xf += ap * corr.dxf;
      it.y += ad * corr.dy;

      if (ap < 1e-12 && ad < 1e-12)
        return finish(SolveStatus::Inaccurate, "step lengths collapsed");
    }
  }
};

/// Solver by name; "ipm" is the built-in interior-point method.
inline std::unique_ptr<SolverAdapter> make_solver(std::string_view name) {
  if (name.empty() || name == "ipm") return std::make_unique<InteriorPointSolver>();
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (available: ipm)");
}

/// Solver selected by the EXITSOS_SOLVER environment variable (default "ipm").
inline std::unique_ptr<SolverAdapter> solver_from_environment() {
  const char* env = std::getenv("EXITSOS_SOLVER");
  return make_solver(env ? std::string_view(env) : std::string_view("ipm"));
}

}  // namespace exitsos
