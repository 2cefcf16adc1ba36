#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "cpext/linalg.hpp"

// Standard-form conic programs over real symmetric PSD blocks, nonnegative
// orthants and free scalars:
//
//   min  sum_b <C_b, X_b> + cfree' xfree
//   s.t. sum_b <A_kb, X_b> + sum_j F_kj xfree_j = b_k
//        X_b PSD (or entrywise >= 0), xfree free
//
// with dual  max b'y  s.t.  Z_b = C_b - sum_k y_k A_kb in the cone, F'y = cfree.
namespace cpext::sdp {

using SpMat = Eigen::SparseMatrix<double>;

enum class Cone { Psd, Nonneg };

struct Block {
  Cone cone = Cone::Psd;
  int n = 0;
};

struct Term {
  int block = 0;
  SpMat coeff;  // symmetric n x n; diagonal for Nonneg blocks
};

struct Row {
  std::vector<Term> terms;
  std::vector<std::pair<int, double>> free;
  double rhs = 0;
};

struct Problem {
  std::vector<Block> blocks;
  int nfree = 0;
  std::vector<SpMat> c;  // per block; a 0x0 matrix means zero
  RVec cfree;
  std::vector<Row> rows;

  void check() const;
};

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, Marginal, NumericFailure };
const char* to_string(Status s);

struct Options {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  double psd_tol = 1e-9;
  double margin_tol = 1e-7;
  int max_iter = 200;
  bool presolve = true;
  double trace_bound = 1e4;  // feasibility(): trace penalty weight is 1/trace_bound
  int verbose = 0;
  std::string dump_path;  // write debug_json(problem) here when set
};

struct Certificate {
  Status kind = Status::PrimalInfeasible;
  RVec y;                // PrimalInfeasible: A*(y) <= 0, F'y = 0, b'y = 1
  std::vector<RMat> X;   // DualInfeasible: A(X) + F xfree = 0, X >= 0, <C,X> + cfree'xfree = -1
  RVec xfree;
  double violation = 0;  // largest cone/equality violation measured independently
};

struct IterLog {
  double primal_obj, dual_obj, primal_res, dual_res, mu;
};

struct Solution {
  Status status = Status::NumericFailure;
  std::vector<RMat> X, Z;  // Nonneg blocks are stored as n x 1 columns
  RVec xfree, y;
  double primal_obj = 0, dual_obj = 0, gap = 0, primal_res = 0, dual_res = 0;
  int iterations = 0;
  std::optional<Certificate> certificate;
  std::vector<IterLog> history;
  std::string message;
};

Solution solve(const Problem& p, const Options& opts = {});

enum class Feasibility { Feasible, Infeasible, Marginal };
const char* to_string(Feasibility f);

struct FeasibilityResult {
  Feasibility status = Feasibility::Marginal;
  std::vector<RMat> X;  // Feasible: the point
  RVec xfree;
  RVec y;               // Infeasible: Farkas ray (A*(y) <= 0, F'y = 0, b'y > 0)
  double residual = 0;  // best residual found in the bounded search
  double separation = 0;  // best b'y over the normalized ray box
  std::string message;
};

FeasibilityResult feasibility(const Problem& p, const Options& opts = {});

// Independent evaluation helpers; none of them touch solver state.
RVec apply_rows(const Problem& p, const std::vector<RMat>& X, const RVec& xfree);
std::vector<RMat> adjoint_rows(const Problem& p, const RVec& y);
RVec adjoint_free(const Problem& p, const RVec& y);
double objective_value(const Problem& p, const std::vector<RMat>& X, const RVec& xfree);
double cone_min(const Problem& p, const std::vector<RMat>& X);
// Returns the largest violation of the Farkas conditions for ray y
// normalized to b'y = 1 (infinity when b'y <= 0).
double farkas_violation(const Problem& p, const RVec& y);

std::string debug_json(const Problem& p);

}  // namespace cpext::sdp
