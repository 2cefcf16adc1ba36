#include "cpext/sdp_builder.hpp"

namespace cpext::sdp {

HermVar Builder::herm(int n) {
  blocks_.push_back({Cone::Psd, 2 * n});
  return {static_cast<int>(blocks_.size()) - 1, n};
}

int Builder::nonneg(int n) {
  blocks_.push_back({Cone::Nonneg, n});
  return static_cast<int>(blocks_.size()) - 1;
}

int Builder::free_vars(int n) {
  int first = nfree_;
  nfree_ += n;
  return first;
}

int Builder::row(double rhs) {
  rhs_.push_back(rhs);
  row_terms_.emplace_back();
  row_free_.emplace_back();
  return static_cast<int>(rhs_.size()) - 1;
}

void Builder::set_rhs(int r, double rhs) { rhs_.at(r) = rhs; }

void Builder::push_herm(Trip& t, HermVar v, const Mat& a, double scale) const {
  const int n = v.n;
  if (a.rows() != n || a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "builder: coefficient size");
  // hermitian part of a, halved embedding
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cplx h = 0.5 * (a(i, j) + std::conj(a(j, i)));
      double re = 0.5 * scale * h.real(), im = 0.5 * scale * h.imag();
      if (re != 0) {
        t.emplace_back(i, j, re);
        t.emplace_back(n + i, n + j, re);
      }
      if (im != 0) {
        t.emplace_back(i, n + j, -im);
        t.emplace_back(n + i, j, im);
      }
    }
}

void Builder::add_herm(int r, HermVar v, const Mat& a, double scale) {
  push_herm(row_terms_.at(r)[v.block], v, a, scale);
}

void Builder::add_nonneg(int r, int block, int i, double c) {
  if (c != 0) row_terms_.at(r)[block].emplace_back(i, i, c);
}

void Builder::add_free(int r, int j, double c) {
  if (c != 0) row_free_.at(r).push_back({j, c});
}

void Builder::obj_herm(HermVar v, const Mat& a, double scale) { push_herm(obj_[v.block], v, a, scale); }

void Builder::obj_nonneg(int block, int i, double c) {
  if (c != 0) obj_[block].emplace_back(i, i, c);
}

void Builder::obj_free(int j, double c) { obj_free_[j] += c; }

Problem Builder::build() const {
  Problem p;
  p.blocks = blocks_;
  p.nfree = nfree_;
  p.c.assign(blocks_.size(), SpMat());
  for (const auto& [b, t] : obj_) {
    SpMat a(blocks_[b].n, blocks_[b].n);
    a.setFromTriplets(t.begin(), t.end());
    a.prune(0.0);
    p.c[b] = a;
  }
  p.cfree = RVec::Zero(nfree_);
  for (const auto& [j, c] : obj_free_) p.cfree(j) = c;
  p.rows.resize(rhs_.size());
  for (size_t r = 0; r < rhs_.size(); ++r) {
    Row& row = p.rows[r];
    row.rhs = rhs_[r];
    for (const auto& [b, t] : row_terms_[r]) {
      SpMat a(blocks_[b].n, blocks_[b].n);
      a.setFromTriplets(t.begin(), t.end());
      a.prune(0.0);
      if (a.nonZeros() > 0) row.terms.push_back({b, a});
    }
    std::map<int, double> f;
    for (const auto& [j, c] : row_free_[r]) f[j] += c;
    for (const auto& [j, c] : f)
      if (c != 0) row.free.push_back({j, c});
  }
  return p;
}

SpMat herm_coeff(const Mat& a) {
  Builder b;
  HermVar v = b.herm(a.rows());
  int r = b.row();
  b.add_herm(r, v, a);
  Problem p = b.build();
  return p.rows[0].terms.empty() ? SpMat(2 * a.rows(), 2 * a.rows()) : p.rows[0].terms[0].coeff;
}

Mat herm_value(const std::vector<RMat>& X, HermVar v) {
  const RMat& x = X.at(v.block);
  const int n = v.n;
  RMat re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  RMat im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  Mat h(n, n);
  h.real() = re;
  h.imag() = im;
  return hermitian_part(h);
}

double nonneg_value(const std::vector<RMat>& X, int block, int i) { return X.at(block)(i, 0); }

}  // namespace cpext::sdp
