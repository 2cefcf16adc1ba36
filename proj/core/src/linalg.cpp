#include "cpext/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace cpext {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotLinear: return "NotLinear";
    case ErrorKind::Incompatible: return "Incompatible";
    case ErrorKind::NotCommuting: return "NotCommuting";
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

Mat identity(int n) { return Mat::Identity(n, n); }

Mat pauli(char which) {
  Mat s = Mat::Zero(2, 2);
  const cplx i(0, 1);
  switch (which) {
    case 'x': s(0, 1) = 1; s(1, 0) = 1; break;
    case 'y': s(0, 1) = -i; s(1, 0) = i; break;
    case 'z': s(0, 0) = 1; s(1, 1) = -1; break;
    case 'i': s(0, 0) = 1; s(1, 1) = 1; break;
    default: throw Error(ErrorKind::InvalidArgument, "unknown Pauli label");
  }
  return s;
}

Mat diag(const std::vector<double>& d) {
  Mat m = Mat::Zero(d.size(), d.size());
  for (size_t k = 0; k < d.size(); ++k) m(k, k) = d[k];
  return m;
}

Mat ket_bra(int n, int i, int j) {
  Mat m = Mat::Zero(n, n);
  m(i, j) = 1;
  return m;
}

Mat projector(const Vec& v) { return v * v.adjoint(); }

Mat omega(int d) {
  Mat m = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i * d + i, j * d + j) = 1;
  return m;
}

void require_square(const Mat& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": expected a nonempty square matrix");
}

void require_finite(const Mat& a, const char* what) {
  if (!a.allFinite()) throw Error(ErrorKind::InvalidArgument, std::string(what) + ": non-finite entry");
}

bool is_hermitian(const Mat& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

void require_hermitian(const Mat& a, double rel_tol, const char* what) {
  require_square(a, what);
  require_finite(a, what);
  if (!is_hermitian(a, rel_tol)) throw Error(ErrorKind::NotHermitian, std::string(what) + ": matrix is not Hermitian");
}

Mat hermitian_part(const Mat& a) { return (a + a.adjoint()) / 2.0; }

Mat tensor(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

Mat partial_trace(const Mat& m, int d1, int d2, int which) {
  if (m.rows() != d1 * d2 || m.cols() != d1 * d2)
    throw Error(ErrorKind::DimensionMismatch, "partial_trace: matrix size does not match d1*d2");
  if (which == 1) {
    Mat r = Mat::Zero(d2, d2);
    for (int a = 0; a < d1; ++a) r += m.block(a * d2, a * d2, d2, d2);
    return r;
  }
  if (which == 2) {
    Mat r(d1, d1);
    for (int a = 0; a < d1; ++a)
      for (int b = 0; b < d1; ++b) r(a, b) = m.block(a * d2, b * d2, d2, d2).trace();
    return r;
  }
  throw Error(ErrorKind::InvalidArgument, "partial_trace: factor index must be 1 or 2");
}

Mat swap_factors(const Mat& m, int d1, int d2) {
  Mat r(d1 * d2, d1 * d2);
  for (int a = 0; a < d1; ++a)
    for (int i = 0; i < d2; ++i)
      for (int b = 0; b < d1; ++b)
        for (int j = 0; j < d2; ++j) r(i * d1 + a, j * d1 + b) = m(a * d2 + i, b * d2 + j);
  return r;
}

static void check_choi(const Choi& c) {
  if (c.m.rows() != c.din * c.dout || c.m.cols() != c.din * c.dout)
    throw Error(ErrorKind::DimensionMismatch, "Choi matrix size does not match dout*din");
}

Mat apply_choi(const Choi& c, const Mat& x) {
  check_choi(c);
  if (x.rows() != c.din || x.cols() != c.din) throw Error(ErrorKind::DimensionMismatch, "apply_choi: input size");
  const int d = c.din, e = c.dout;
  Mat r = Mat::Zero(e, e);
  for (int a = 0; a < e; ++a)
    for (int b = 0; b < e; ++b) {
      cplx s = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += c.m(a * d + i, b * d + j) * x(i, j);
      r(a, b) = s;
    }
  return r;
}

Mat dual_apply(const Choi& c, const Mat& y) {
  check_choi(c);
  if (y.rows() != c.dout || y.cols() != c.dout) throw Error(ErrorKind::DimensionMismatch, "dual_apply: input size");
  const int d = c.din, e = c.dout;
  // T*(Y)(i,j) = sum_{a,b} Y(a,b) C(b*d+j, a*d+i)
  Mat r = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx s = 0;
      for (int a = 0; a < e; ++a)
        for (int b = 0; b < e; ++b) s += y(a, b) * c.m(b * d + j, a * d + i);
      r(i, j) = s;
    }
  return r;
}

Choi choi_of(const std::function<Mat(const Mat&)>& t, int din, int dout) {
  Choi c{din, dout, Mat::Zero(din * dout, din * dout)};
  for (int j = 0; j < din; ++j)
    for (int k = 0; k < din; ++k) {
      Mat img = t(ket_bra(din, j, k));
      if (img.rows() != dout || img.cols() != dout) throw Error(ErrorKind::DimensionMismatch, "choi_of: image size");
      c.m += tensor(img, ket_bra(din, j, k));
    }
  return c;
}

Choi choi_from_kraus(const std::vector<Mat>& kraus) {
  if (kraus.empty()) throw Error(ErrorKind::InvalidArgument, "choi_from_kraus: no operators");
  const int dout = kraus[0].rows(), din = kraus[0].cols();
  // C = sum_k |K_k>><<K_k| in (output x input) order with |K>> = sum_ij K_ij |i>|j>
  Choi c{din, dout, Mat::Zero(din * dout, din * dout)};
  for (const Mat& k : kraus) {
    Vec v(din * dout);
    for (int a = 0; a < dout; ++a)
      for (int i = 0; i < din; ++i) v(a * din + i) = k(a, i);
    c.m += v * v.adjoint();
  }
  return c;
}

Choi identity_choi(int d) { return Choi{d, d, omega(d)}; }

Eigh eigh(const Mat& h) {
  require_square(h, "eigh");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericFailure, "eigendecomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

RVec eigvalsh(const Mat& h) {
  require_square(h, "eigvalsh");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericFailure, "eigendecomposition did not converge");
  return es.eigenvalues();
}

namespace {

RVec singular_values(const Mat& a) {
  if (a.rows() == a.cols() && a.isApprox(a.adjoint(), 1e-14)) return eigvalsh(a).cwiseAbs();
  return Eigen::JacobiSVD<Mat>(a).singularValues();
}

}  // namespace

double trace_norm(const Mat& h) { return singular_values(h).sum(); }
double op_norm(const Mat& h) { return h.size() == 0 ? 0.0 : singular_values(h).maxCoeff(); }
double min_eig(const Mat& h) { return eigvalsh(h).minCoeff(); }
double max_eig(const Mat& h) { return eigvalsh(h).maxCoeff(); }

double rank_tol(const Mat& a) {
  return a.rows() * std::numeric_limits<double>::epsilon() * op_norm(a);
}

Tri psd_status(const Mat& h, double psd_tol) {
  double m = min_eig(h);
  if (m > psd_tol) return Tri::Yes;
  if (m < -psd_tol) return Tri::No;
  return Tri::Marginal;
}

Mat sqrt_psd(const Mat& a, double psd_tol) {
  Eigh e = eigh(a);
  if (e.values.minCoeff() < -psd_tol) throw Error(ErrorKind::NotPSD, "sqrt_psd: matrix has a negative eigenvalue");
  RVec s = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * s.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

double fidelity(const Mat& a, const Mat& b, double psd_tol) {
  if (a.rows() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "fidelity: sizes differ");
  Mat sa = sqrt_psd(a, psd_tol), sb = sqrt_psd(b, psd_tol);
  Eigen::JacobiSVD<Mat> svd(sa * sb);
  return svd.singularValues().sum();
}

double inf_ratio(const Mat& a, const Mat& b, double psd_tol) {
  if (a.rows() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "inf_ratio: sizes differ");
  if (b.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::InvalidArgument, "inf_ratio: B is zero");
  Eigh ea = eigh(a);
  if (ea.values.minCoeff() < -psd_tol) throw Error(ErrorKind::NotPSD, "inf_ratio: A is not PSD");
  if (min_eig(b) < -psd_tol) throw Error(ErrorKind::NotPSD, "inf_ratio: B is not PSD");
  const int n = a.rows();
  const double tol = std::max(rank_tol(a), 1e-300);
  std::vector<int> sup, ker;
  for (int k = 0; k < n; ++k) (ea.values(k) > tol ? sup : ker).push_back(k);
  if (sup.empty()) return 0.0;
  Mat bt = ea.vectors.adjoint() * b * ea.vectors;
  // supp B inside supp A iff B vanishes on ker A
  double leak = 0;
  for (int i : ker)
    for (int j : ker) leak = std::max(leak, std::abs(bt(i, j)));
  if (leak > 10 * std::max(tol, rank_tol(b))) return 0.0;
  const int r = sup.size();
  Mat w(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      w(i, j) = bt(sup[i], sup[j]) / std::sqrt(ea.values(sup[i]) * ea.values(sup[j]));
  double top = max_eig(w);
  if (top <= 0) throw Error(ErrorKind::InvalidArgument, "inf_ratio: B has no weight on supp A");
  return 1.0 / top;
}

Mat support_projector(const Mat& a, double tol) {
  Eigh e = eigh(a);
  if (e.values.minCoeff() < -std::max(tol, 1e-9)) throw Error(ErrorKind::NotPSD, "support_projector: not PSD");
  Mat p = Mat::Zero(a.rows(), a.cols());
  for (int k = 0; k < a.rows(); ++k)
    if (e.values(k) > tol) p += projector(e.vectors.col(k));
  return p;
}

int numerical_rank(const Mat& a, double tol) {
  RVec v = eigvalsh(a);
  int r = 0;
  for (int k = 0; k < v.size(); ++k)
    if (std::abs(v(k)) > tol) ++r;
  return r;
}

const std::vector<Mat>& hermitian_unit_basis(int n) {
  static std::mutex mu;
  static std::map<int, std::vector<Mat>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<Mat> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) basis.push_back(ket_bra(n, j, j));
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      Mat s = Mat::Zero(n, n);
      s(j, k) = r;
      s(k, j) = r;
      basis.push_back(s);
      Mat a = Mat::Zero(n, n);
      a(j, k) = cplx(0, r);
      a(k, j) = cplx(0, -r);
      basis.push_back(a);
    }
  return cache.emplace(n, std::move(basis)).first->second;
}

RVec herm_coords(const Mat& h) {
  const int n = h.rows();
  RVec v(n * n);
  const double s2 = std::sqrt(2.0);
  int p = 0;
  for (int j = 0; j < n; ++j) v(p++) = h(j, j).real();
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      // Re tr(B H) for the two off-diagonal basis elements
      v(p++) = s2 * 0.5 * (h(j, k).real() + h(k, j).real());
      v(p++) = s2 * 0.5 * (h(j, k).imag() - h(k, j).imag());
    }
  return v;
}

Mat from_herm_coords(const RVec& v, int n) {
  if (v.size() != n * n) throw Error(ErrorKind::DimensionMismatch, "from_herm_coords: length");
  const double r = 1.0 / std::sqrt(2.0);
  Mat h = Mat::Zero(n, n);
  int p = 0;
  for (int j = 0; j < n; ++j) h(j, j) = v(p++);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      double re = v(p++) * r, im = v(p++) * r;
      h(j, k) = cplx(re, im);
      h(k, j) = cplx(re, -im);
    }
  return h;
}

SpanBasis hermitian_basis_of_span(const std::vector<Mat>& mats) {
  if (mats.empty()) throw Error(ErrorKind::InvalidArgument, "hermitian_basis_of_span: empty list");
  const int n = mats[0].rows();
  double scale = 0;
  for (const Mat& m : mats) {
    if (m.rows() != n || m.cols() != n) throw Error(ErrorKind::DimensionMismatch, "hermitian_basis_of_span: sizes differ");
    require_finite(m, "hermitian_basis_of_span");
    scale = std::max(scale, m.cwiseAbs().maxCoeff());
  }
  if (scale == 0) throw Error(ErrorKind::InvalidArgument, "hermitian_basis_of_span: all matrices are zero");
  const double tol = 1e-10 * scale * n;

  SpanBasis out;
  std::vector<RVec> q;
  auto consider = [&](const Mat& h) {
    RVec v = herm_coords(h);
    RVec r = v;
    for (const RVec& u : q) r -= u.dot(r) * u;
    for (const RVec& u : q) r -= u.dot(r) * u;
    if (r.norm() > tol) {
      q.push_back(r / r.norm());
      out.basis.push_back(h);
    }
  };
  const cplx i(0, 1);
  for (const Mat& m : mats) {
    consider((m + m.adjoint()) / 2.0);
    consider((m - m.adjoint()) / (2.0 * i));
  }

  // complex rank of the original list; the span is Hermitian iff it matches
  Mat stacked(n * n, mats.size());
  for (size_t k = 0; k < mats.size(); ++k) stacked.col(k) = Eigen::Map<const Vec>(mats[k].data(), n * n);
  Eigen::JacobiSVD<Mat> svd(stacked);
  int crank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > tol) ++crank;
  out.was_hermitian_span = (crank == static_cast<int>(out.basis.size()));
  return out;
}

RMat real_embedding(const Mat& h) {
  const int n = h.rows();
  RMat r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = h.real();
  r.topRightCorner(n, n) = -h.imag();
  r.bottomLeftCorner(n, n) = h.imag();
  r.bottomRightCorner(n, n) = h.real();
  return r;
}

Mat from_real_embedding(const RMat& r) {
  const int n = r.rows() / 2;
  Mat h(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      h(a, b) = cplx(0.5 * (r(a, b) + r(n + a, n + b)), 0.5 * (r(n + a, b) - r(a, n + b)));
  return hermitian_part(h);
}

static Mat ginibre(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      double re = g(rng);
      double im = g(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

Mat random_unitary(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Mat> qr(ginibre(d, d, rng));
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR();
  for (int k = 0; k < d; ++k) {
    double a = std::abs(r(k, k));
    if (a > 0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

Mat random_density(int d, std::mt19937_64& rng) {
  Mat a = ginibre(d, d, rng);
  Mat rho = a * a.adjoint();
  return hermitian_part(rho / rho.trace().real());
}

Mat random_density_unit_square(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double re = u(rng);
      double im = u(rng);
      a(i, j) = cplx(re, im);
    }
  Mat rho = a * a.adjoint();
  return hermitian_part(rho / rho.trace().real());
}

Mat random_hermitian(int d, std::mt19937_64& rng) { return hermitian_part(ginibre(d, d, rng)); }

Choi random_channel(int din, int dout, int kraus_rank, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Mat> qr(ginibre(dout * kraus_rank, din, rng));
  Mat v = qr.householderQ() * Mat::Identity(dout * kraus_rank, din);
  std::vector<Mat> k;
  for (int e = 0; e < kraus_rank; ++e) k.push_back(v.block(e * dout, 0, dout, din));
  return choi_from_kraus(k);
}

}  // namespace cpext
