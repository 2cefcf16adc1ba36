#include "cpext/classical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace cpext {

const char* to_string(Positivity p) { return p == Positivity::Positive ? "Positive" : "NotPositive"; }

const char* to_string(RangeStatus s) {
  switch (s) {
    case RangeStatus::Exists: return "Exists";
    case RangeStatus::NotCP: return "NotCP";
    case RangeStatus::Marginal: return "Marginal";
  }
  return "Unknown";
}

const char* to_string(DomainStatus s) {
  switch (s) {
    case DomainStatus::Exists: return "Exists";
    case DomainStatus::NotExists: return "NotExists";
    case DomainStatus::OutOfGuaranteedRange: return "OutOfGuaranteedRange";
  }
  return "Unknown";
}

Mat diag_embed(const RVec& p) {
  Mat m = Mat::Zero(p.size(), p.size());
  for (int i = 0; i < p.size(); ++i) m(i, i) = p(i);
  return m;
}

CommonBasis simultaneous_diagonalization(const std::vector<Mat>& mats, double commute_tol, double cluster_tol) {
  if (mats.empty()) throw Error(ErrorKind::InvalidArgument, "simultaneous_diagonalization: no matrices");
  const int n = mats[0].rows();
  std::vector<Mat> norm;
  for (const Mat& m : mats) {
    if (m.rows() != n || m.cols() != n) throw Error(ErrorKind::DimensionMismatch, "simultaneous_diagonalization: sizes differ");
    require_hermitian(m, 1e-12, "commuting family");
    double s = trace_norm(m);
    if (s > 0) norm.push_back(hermitian_part(m) / s);
  }
  for (size_t a = 0; a < norm.size(); ++a)
    for (size_t b = a + 1; b < norm.size(); ++b)
      if (op_norm(Mat(norm[a] * norm[b] - norm[b] * norm[a])) > commute_tol)
        throw Error(ErrorKind::NotCommuting, "matrices " + std::to_string(a) + " and " + std::to_string(b) + " do not commute");

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  std::function<Mat(const Mat&)> refine = [&](const Mat& q) -> Mat {
    const int r = q.cols();
    std::vector<Mat> blocks;
    bool scalar = true;
    for (const Mat& m : norm) {
      Mat b = q.adjoint() * m * q;
      cplx mean = b.trace() / double(r);
      if ((b - mean * Mat::Identity(r, r)).norm() > cluster_tol) scalar = false;
      blocks.push_back(b);
    }
    if (scalar || r == 1) return q;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Mat combo = Mat::Zero(r, r);
      for (const Mat& b : blocks) combo += gauss(rng) * b;
      Eigh e = eigh(hermitian_part(combo));
      std::vector<std::pair<int, int>> clusters;  // [start, end)
      int start = 0;
      for (int k = 1; k <= r; ++k)
        if (k == r || e.values(k) - e.values(k - 1) > cluster_tol) {
          clusters.push_back({start, k});
          start = k;
        }
      if (clusters.size() == 1) continue;
      Mat out(q.rows(), r);
      int col = 0;
      for (auto [s, t] : clusters) {
        Mat sub = refine(Mat(q * e.vectors.middleCols(s, t - s)));
        out.middleCols(col, sub.cols()) = sub;
        col += sub.cols();
      }
      return out;
    }
    return q;
  };
  CommonBasis cb;
  bool diagonal = true;
  for (const Mat& m : norm)
    if ((m - Mat(m.diagonal().asDiagonal())).norm() > cluster_tol) diagonal = false;
  cb.u = diagonal ? Mat(Mat::Identity(n, n)) : refine(Mat::Identity(n, n));
  for (const Mat& m : mats) cb.diagonals.push_back(Mat(cb.u.adjoint() * m * cb.u).diagonal().real());
  return cb;
}

namespace {

// Greedy independent subset; returns indices kept.
std::vector<int> independent(const std::vector<RVec>& vs, double tol) {
  std::vector<int> keep;
  std::vector<RVec> basis;
  for (size_t i = 0; i < vs.size(); ++i) {
    RVec r = vs[i];
    for (const RVec& b : basis) r -= b.dot(r) * b;
    for (const RVec& b : basis) r -= b.dot(r) * b;
    if (r.norm() > tol * std::max(1.0, vs[i].norm())) {
      basis.push_back(r / r.norm());
      keep.push_back(i);
    }
  }
  return keep;
}

bool next_subset(std::vector<int>& idx, int n) {
  const int k = idx.size();
  for (int i = k - 1; i >= 0; --i)
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  return false;
}

}  // namespace

ClassicalPolytope polytope_extremes(const std::vector<RVec>& vectors) {
  if (vectors.empty()) throw Error(ErrorKind::InvalidArgument, "polytope_extremes: no vectors");
  const int d = vectors[0].size();
  for (const RVec& v : vectors)
    if (v.size() != d) throw Error(ErrorKind::DimensionMismatch, "polytope_extremes: lengths differ");
  if (d > 12) throw Error(ErrorKind::InvalidArgument, "polytope_extremes: dimension above 12 is not supported");
  ClassicalPolytope poly;
  poly.dim = d;
  for (int i : independent(vectors, 1e-10)) poly.affine_basis.push_back(vectors[i]);
  const int K = poly.affine_basis.size();
  if (K - 1 > 6) throw Error(ErrorKind::InvalidArgument, "polytope_extremes: affine dimension above 6 is not supported");
  RMat V(d, K);
  for (int k = 0; k < K; ++k) V.col(k) = poly.affine_basis[k];
  const RVec ones_v = V.colwise().sum().transpose();
  const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());

  // a vertex has K-1 independent active coordinates plus the unit-sum row
  std::vector<int> idx(K - 1);
  for (int i = 0; i < K - 1; ++i) idx[i] = i;
  if (K - 1 > d) return poly;
  do {
    RMat m(K, K);
    for (int r = 0; r < K - 1; ++r) m.row(r) = V.row(idx[r]);
    m.row(K - 1) = ones_v.transpose();
    Eigen::FullPivLU<RMat> lu(m);
    lu.setThreshold(1e-10);
    if (lu.rank() < K) continue;
    RVec rhs = RVec::Zero(K);
    rhs(K - 1) = 1;
    RVec c = lu.solve(rhs);
    RVec x = V * c;
    if (x.minCoeff() < -1e-12 * scale) continue;
    for (int j = 0; j < d; ++j)
      if (std::abs(x(j)) <= 1e-12 * scale) x(j) = 0;
    bool dup = false;
    for (const RVec& e : poly.extremes)
      if ((e - x).norm() <= 1e-9) dup = true;
    if (dup) continue;
    poly.extremes.push_back(x);
    poly.coefficients.push_back(c);
  } while (next_subset(idx, d));
  return poly;
}

namespace {

MapSpec pairs_of(const MapSpec& spec) {
  MapSpec s;
  s.din = spec.din;
  s.dout = spec.dout;
  s.xs = spec.xs;
  s.ys = spec.ys;
  return s;
}

Mat combine(const std::vector<Mat>& ys, const RVec& c) {
  Mat m = Mat::Zero(ys[0].rows(), ys[0].cols());
  for (int i = 0; i < c.size(); ++i) m += c(i) * ys[i];
  return m;
}

double output_scale(const MapSpec& spec) {
  double s = 1;
  for (const Mat& y : spec.ys) s = std::max(s, op_norm(y));
  return s;
}

}  // namespace

PositivityResult commuting_domain_positive(const MapSpec& spec, const Tolerances& tol) {
  PositivityResult out;
  out.basis = simultaneous_diagonalization(spec.xs, tol.commute, tol.cluster);
  out.polytope = polytope_extremes(out.basis.diagonals);
  // preprocessed inputs are independent, so the polytope basis is the full input list
  if ((int)out.polytope.affine_basis.size() != spec.size())
    throw Error(ErrorKind::InvalidArgument, "commuting_domain_positive: inputs are not independent");
  out.min_eig = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < out.polytope.extremes.size(); ++a) {
    Mat img = combine(spec.ys, out.polytope.coefficients[a]);
    double m = min_eig(img);
    if (m < out.min_eig) out.min_eig = m;
    if (m < -tol.psd && out.status == Positivity::Positive) {
      out.status = Positivity::NotPositive;
      out.vertex = Mat(out.basis.u * diag_embed(out.polytope.extremes[a]) * out.basis.u.adjoint());
      out.image = img;
    }
  }
  if (out.polytope.extremes.empty()) out.min_eig = 0;
  return out;
}

RangeExtension commuting_range_cp_extension(const MapSpec& spec_in, const Tolerances& tol) {
  const MapSpec spec = pairs_of(spec_in);
  CommonBasis ob = simultaneous_diagonalization(spec.ys, tol.commute, tol.cluster);
  RangeExtension out;
  CpVerdict v = gamma_sdp(spec, tol);
  if (v.status == CpStatus::NotCP) {
    out.status = RangeStatus::NotCP;
    out.witness = v.witness;
    out.message = "map is not positive on the span of the inputs";
    return out;
  }
  if (v.status == CpStatus::Marginal) {
    out.message = "positivity undecided: " + v.message;
    return out;
  }
  ExactExtension ex = exact_cp_extension(spec, tol);
  if (ex.status != ExactStatus::Exists) {
    out.message = "no exact CP extension found: " + ex.message;
    return out;
  }
  const int d = spec.din, e = spec.dout;
  Mat c = Mat::Zero(e * d, e * d);
  for (int k = 0; k < e; ++k) {
    Mat p = tensor(Mat(ob.u.col(k) * ob.u.col(k).adjoint()), identity(d));
    c += p * ex.choi->m * p;
  }
  Choi pinched{d, e, hermitian_part(c)};
  double resid = constraint_residual(spec, pinched);
  if (resid > tol.feas * output_scale(spec) || min_eig(pinched.m) < -tol.psd) {
    out.message = "pinched extension failed re-validation (residual " + std::to_string(resid) + ")";
    return out;
  }
  out.status = RangeStatus::Exists;
  out.choi = std::move(pinched);
  return out;
}

namespace {

// Pi as a d x d matrix acting on probability vectors; empty when no explicit
// construction applies.
std::optional<RMat> explicit_projection(const ClassicalPolytope& poly, int d, int K, std::string& name) {
  if (K == d) {
    name = "identity";
    return RMat::Identity(d, d);
  }
  if (K == 1) {
    const RVec& v = poly.affine_basis[0];
    RMat pi(d, d);
    for (int x = 0; x < d; ++x) pi.col(x) = v / v.sum();
    name = "trace-preparation";
    return pi;
  }
  if (d == 3 && K == 2 && poly.extremes.size() == 2) {
    const RVec &e1 = poly.extremes[0], &e2 = poly.extremes[1];
    for (int z = 0; z < 3; ++z)
      if (e1(z) == 0 && e2(z) == 0) {
        RMat pi = RMat::Identity(3, 3);
        pi(z, z) = 0;
        name = "face-projection";
        return pi;
      }
    for (int z1 = 0; z1 < 3; ++z1)
      for (int z2 = 0; z2 < 3; ++z2) {
        if (z1 == z2 || e1(z1) != 0 || e2(z2) != 0 || e1(z2) <= 0 || e2(z1) <= 0) continue;
        RMat pi = RMat::Zero(3, 3);
        pi.col(z2) = e1 / e1(z2);
        pi.col(z1) = e2 / e2(z1);
        name = "boundary-projection";
        return pi;
      }
  }
  return std::nullopt;
}

}  // namespace

DomainExtension commuting_domain_extension(const MapSpec& spec_in, bool trace_preserving, const Tolerances& tol) {
  const MapSpec spec = pairs_of(spec_in);
  const int d = spec.din, e = spec.dout, K = spec.size();
  for (const Mat& x : spec.xs)
    if (min_eig(x) < -tol.psd) throw Error(ErrorKind::Precondition, "commuting_domain_extension: inputs must be PSD");
  PositivityResult pos = commuting_domain_positive(spec, tol);
  if (pos.status == Positivity::NotPositive)
    throw Error(ErrorKind::Precondition, "commuting_domain_extension: map is not positive on the span of the inputs");

  DomainExtension out;
  const bool guaranteed = trace_preserving ? d <= 2 : d <= 3;
  bool trace_ok = true;
  for (int i = 0; i < K; ++i)
    if (std::abs(spec.xs[i].trace().real() - spec.ys[i].trace().real()) > 1e-9 * (1 + std::abs(spec.xs[i].trace())))
      trace_ok = false;

  if (guaranteed && (!trace_preserving || trace_ok)) {
    std::string name;
    std::optional<RMat> pi = explicit_projection(pos.polytope, d, K, name);
    if (pi) {
      RMat V(d, K);
      for (int k = 0; k < K; ++k) V.col(k) = pos.polytope.affine_basis[k];
      RMat L = V.completeOrthogonalDecomposition().pseudoInverse();
      Mat LP = (L * *pi).cast<cplx>();
      const Mat& u = pos.basis.u;
      auto map = [&](const Mat& x) {
        Vec delta(d);
        for (int k = 0; k < d; ++k) delta(k) = u.col(k).dot(x * u.col(k));
        Vec a = LP * delta;
        Mat y = Mat::Zero(e, e);
        for (int i = 0; i < K; ++i) y += a(i) * spec.ys[i];
        return y;
      };
      Choi c = choi_of(map, d, e);
      c.m = hermitian_part(c.m);
      double resid = constraint_residual(spec, c);
      double tp_resid = trace_preserving ? op_norm(Mat(partial_trace(c.m, e, d, 1) - identity(d))) : 0.0;
      if (resid <= 1e-9 * output_scale(spec) && tp_resid <= 1e-9 && min_eig(c.m) >= -tol.psd) {
        out.status = DomainStatus::Exists;
        out.choi = std::move(c);
        out.construction = name;
        return out;
      }
      out.message = "explicit construction failed re-validation; ";
    }
  }

  out.construction = "sdp";
  if (trace_preserving) {
    ChannelResult ch = channel_extension(spec, tol);
    out.message += ch.message;
    if (ch.status == ChannelStatus::Exists) {
      out.status = DomainStatus::Exists;
      out.choi = ch.choi;
    } else if (ch.status == ChannelStatus::NotExists) {
      out.status = DomainStatus::NotExists;
      out.witness = ch.witness;
    }
    return out;
  }
  ExactExtension ex = exact_cp_extension(spec, tol);
  out.message += ex.message;
  if (ex.status == ExactStatus::Exists) {
    out.status = DomainStatus::Exists;
    out.choi = ex.choi;
  } else if (ex.status == ExactStatus::NotExists) {
    out.status = DomainStatus::NotExists;
    out.witness = ex.certificate;
  } else {
    CpVerdict v = gamma_sdp(spec, tol);
    if (v.status == CpStatus::NotCP) {
      out.status = DomainStatus::NotExists;
      out.witness = v.witness;
    }
  }
  return out;
}

}  // namespace cpext
