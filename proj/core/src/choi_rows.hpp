#pragma once

#include <vector>

#include "cpext/cpcheck.hpp"
#include "cpext/sdp_builder.hpp"

namespace cpext::detail {

using sdp::Builder;
using sdp::HermVar;

inline double re_tr(const Mat& a, const Mat& b) { return a.cwiseProduct(b.transpose()).sum().real(); }

// Re tr[B T_C(x)] = Re tr[(B (x) x^T) C]
inline Mat apply_coeff(const Mat& b, const Mat& x) { return tensor(b, x.transpose()); }
// Re tr[G T*_C(xp)] = Re tr[(xp (x) G^T) C]
inline Mat dual_coeff(const Mat& g, const Mat& xp) { return tensor(xp, g.transpose()); }
// Re tr[G tr_1 C] = Re tr[(1 (x) G) C]
inline Mat trace1_coeff(const Mat& g, int dout) { return tensor(identity(dout), g); }

// One row per orthonormal Hermitian basis element B of M_n with right side
// Re tr[B rhs]; fill(B, row) adds the left-hand terms.
template <class F>
std::vector<int> matrix_rows(Builder& b, int n, const Mat& rhs, F&& fill) {
  std::vector<int> rows;
  for (const Mat& B : hermitian_unit_basis(n)) {
    int r = b.row(re_tr(B, rhs));
    fill(B, r);
    rows.push_back(r);
  }
  return rows;
}

// sum_k y_{rows[k]} B_k
inline Mat rows_to_matrix(const RVec& y, const std::vector<int>& rows, int n) {
  const auto& basis = hermitian_unit_basis(n);
  Mat m = Mat::Zero(n, n);
  for (size_t k = 0; k < rows.size(); ++k) m += y(rows[k]) * basis[k];
  return m;
}

inline Choi decode_choi(const std::vector<RMat>& X, HermVar c, int din, int dout) {
  return Choi{din, dout, sdp::herm_value(X, c)};
}

inline bool usable(sdp::Status s) { return s == sdp::Status::Optimal || s == sdp::Status::Marginal; }

}  // namespace cpext::detail
