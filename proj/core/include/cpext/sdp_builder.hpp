#pragma once

#include <map>
#include <vector>

#include "cpext/sdp.hpp"

// Assembles sdp::Problem instances whose variables are complex Hermitian PSD
// matrices. A Hermitian n x n variable H is stored as the real 2n x 2n block
// [[Re H, -Im H], [Im H, Re H]].
namespace cpext::sdp {

struct HermVar {
  int block = -1;
  int n = 0;
};

class Builder {
 public:
  HermVar herm(int n);
  int nonneg(int n);      // returns the block index
  int free_vars(int n);   // returns the first free index

  int row(double rhs = 0);
  void set_rhs(int r, double rhs);
  // row r gains Re tr(a H)
  void add_herm(int r, HermVar v, const Mat& a, double scale = 1.0);
  void add_nonneg(int r, int block, int i, double c);
  void add_free(int r, int j, double c);

  // objective gains Re tr(a H), c x_i, c f_j
  void obj_herm(HermVar v, const Mat& a, double scale = 1.0);
  void obj_nonneg(int block, int i, double c);
  void obj_free(int j, double c);

  int num_rows() const { return static_cast<int>(rhs_.size()); }
  int num_free() const { return nfree_; }
  Problem build() const;

 private:
  using Trip = std::vector<Eigen::Triplet<double>>;
  void push_herm(Trip& t, HermVar v, const Mat& a, double scale) const;

  std::vector<Block> blocks_;
  int nfree_ = 0;
  std::vector<double> rhs_;
  std::vector<std::map<int, Trip>> row_terms_;
  std::vector<std::vector<std::pair<int, double>>> row_free_;
  std::map<int, Trip> obj_;
  std::map<int, double> obj_free_;
};

// Re tr(a H) = <herm_coeff(a), emb(H)>
SpMat herm_coeff(const Mat& a);
Mat herm_value(const std::vector<RMat>& X, HermVar v);
double nonneg_value(const std::vector<RMat>& X, int block, int i);

}  // namespace cpext::sdp
