#include "cpext/cpcheck.hpp"

#include <algorithm>
#include <cmath>

#include "choi_rows.hpp"

namespace cpext {

using detail::apply_coeff;
using detail::Builder;
using detail::dual_coeff;
using detail::HermVar;
using detail::matrix_rows;
using detail::re_tr;
using detail::usable;

const char* to_string(CpStatus s) {
  switch (s) {
    case CpStatus::CompletelyPositive: return "CompletelyPositive";
    case CpStatus::NotCP: return "NotCP";
    case CpStatus::Marginal: return "Marginal";
  }
  return "Unknown";
}

const char* to_string(ExactStatus s) {
  switch (s) {
    case ExactStatus::Exists: return "Exists";
    case ExactStatus::NotExists: return "NotExists";
    case ExactStatus::ApproxOnlyOrUndecided: return "ApproxOnlyOrUndecided";
  }
  return "Unknown";
}

const char* to_string(Guarantee g) {
  switch (g) {
    case Guarantee::NoNonzeroPsd: return "no-nonzero-psd";
    case Guarantee::StrictlyPositiveElement: return "strictly-positive-element";
    case Guarantee::SpannedByPsd: return "spanned-by-psd";
    case Guarantee::None: return "none";
  }
  return "unknown";
}

sdp::Options solver_options(const Tolerances& tol) {
  sdp::Options o;
  o.feas_tol = tol.feas;
  o.gap_tol = tol.gap;
  o.psd_tol = tol.psd;
  o.margin_tol = tol.margin;
  return o;
}

namespace {

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double frob(const Mat& a) { return a.norm(); }

}  // namespace

MapSpec preprocess(const std::vector<Mat>& xs, const std::vector<Mat>& ys, const std::vector<Mat>& dual_xs,
                   const std::vector<Mat>& dual_ys, const Tolerances& tol) {
  if (xs.empty()) throw Error(ErrorKind::InvalidArgument, "preprocess: no input/output pairs");
  if (xs.size() != ys.size()) throw Error(ErrorKind::InvalidArgument, "preprocess: inputs and outputs differ in count");
  if (dual_xs.size() != dual_ys.size())
    throw Error(ErrorKind::InvalidArgument, "preprocess: dual inputs and outputs differ in count");
  MapSpec s;
  s.din = xs[0].rows();
  s.dout = ys[0].rows();
  for (size_t i = 0; i < xs.size(); ++i) {
    require_hermitian(xs[i], tol.hermiticity, "input");
    require_hermitian(ys[i], tol.hermiticity, "output");
    if (xs[i].rows() != s.din || ys[i].rows() != s.dout)
      throw Error(ErrorKind::DimensionMismatch, "preprocess: inconsistent pair dimensions");
  }
  for (size_t j = 0; j < dual_xs.size(); ++j) {
    require_hermitian(dual_xs[j], tol.hermiticity, "dual input");
    require_hermitian(dual_ys[j], tol.hermiticity, "dual output");
    if (dual_xs[j].rows() != s.dout || dual_ys[j].rows() != s.din)
      throw Error(ErrorKind::DimensionMismatch, "preprocess: inconsistent dual pair dimensions");
  }

  // greedy independent subset in Hermitian coordinates
  std::vector<RVec> kept;
  for (size_t i = 0; i < xs.size(); ++i) {
    Mat x = hermitian_part(xs[i]), y = hermitian_part(ys[i]);
    RVec v = herm_coords(x);
    RVec coef;
    double resid = v.norm();
    if (!kept.empty()) {
      RMat b(v.size(), kept.size());
      for (size_t q = 0; q < kept.size(); ++q) b.col(q) = kept[q];
      coef = b.colPivHouseholderQr().solve(v);
      resid = (v - b * coef).norm();
    }
    if (resid > 1e-9 * std::max(1.0, v.norm())) {
      kept.push_back(v);
      s.xs.push_back(x);
      s.ys.push_back(y);
      continue;
    }
    Mat pred = Mat::Zero(s.dout, s.dout);
    double scale = 1 + frob(y);
    for (int q = 0; q < coef.size(); ++q) {
      pred += coef(q) * s.ys[q];
      scale += std::abs(coef(q)) * frob(s.ys[q]);
    }
    if (frob(y - pred) > 1e-9 * scale)
      throw Error(ErrorKind::NotLinear, "preprocess: dependent input " + std::to_string(i) + " has an inconsistent image");
  }
  if (s.xs.empty()) throw Error(ErrorKind::InvalidArgument, "preprocess: all inputs are zero");

  for (size_t j = 0; j < dual_xs.size(); ++j) {
    Mat xp = hermitian_part(dual_xs[j]), yp = hermitian_part(dual_ys[j]);
    for (size_t i = 0; i < s.xs.size(); ++i) {
      cplx lhs = (xp.adjoint() * s.ys[i]).trace();
      cplx rhs = (yp.adjoint() * s.xs[i]).trace();
      double scale = 1 + frob(xp) * frob(s.ys[i]) + frob(yp) * frob(s.xs[i]);
      if (std::abs(lhs - rhs) > 1e-9 * scale)
        throw Error(ErrorKind::Incompatible,
                    "preprocess: dual pair " + std::to_string(j) + " is incompatible with pair " + std::to_string(i));
    }
    s.dual_xs.push_back(xp);
    s.dual_ys.push_back(yp);
  }
  return s;
}

MapSpec with_trace_preservation(MapSpec spec) {
  spec.dual_xs.push_back(identity(spec.dout));
  spec.dual_ys.push_back(identity(spec.din));
  return spec;
}

WitnessCheck check_witness(const MapSpec& spec, const Witness& w, const Tolerances& tol, Pairing pairing,
                           double h0_bound) {
  WitnessCheck c;
  if (w.h.size() != spec.xs.size() || w.h0.size() > spec.dual_xs.size()) {
    c.reason = "witness has the wrong number of components";
    return c;
  }
  const int n = spec.din * spec.dout;
  Mat m = Mat::Zero(n, n);
  for (size_t i = 0; i < w.h.size(); ++i) {
    if (w.h[i].rows() != spec.dout || w.h[i].cols() != spec.dout) {
      c.reason = "witness component has the wrong size";
      return c;
    }
    m += tensor(spec.xs[i], w.h[i]);
    c.objective += (spec.ys[i].transpose() * w.h[i]).trace().real();
    c.max_op_norm = std::max(c.max_op_norm, op_norm(w.h[i]));
    c.sum_trace_norm += trace_norm(w.h[i]);
  }
  for (size_t j = 0; j < w.h0.size(); ++j) {
    if (w.h0[j].rows() != spec.din || w.h0[j].cols() != spec.din) {
      c.reason = "witness component has the wrong size";
      return c;
    }
    m += tensor(w.h0[j], spec.dual_xs[j].transpose());
    c.objective += (spec.dual_ys[j] * w.h0[j]).trace().real();
    c.h0_trace_norm += trace_norm(w.h0[j]);
  }
  if (!is_hermitian(m, 1e-10)) {
    c.reason = "certificate operator is not Hermitian";
    return c;
  }
  c.min_eig = min_eig(m);
  if (c.min_eig < -tol.psd) {
    c.reason = "certificate operator is not PSD";
    return c;
  }
  if (pairing == Pairing::SumTrace && c.max_op_norm > 1 + tol.psd) {
    c.reason = "operator norm bound exceeded";
    return c;
  }
  if (pairing == Pairing::MaxTrace && c.sum_trace_norm > 1 + tol.psd) {
    c.reason = "trace norm bound exceeded";
    return c;
  }
  if (h0_bound >= 0 && c.h0_trace_norm > h0_bound + tol.psd) {
    c.reason = "H0 trace norm bound exceeded";
    return c;
  }
  if (c.objective > -tol.witness_margin) {
    c.reason = "objective is not below the witness margin";
    return c;
  }
  c.valid = true;
  return c;
}

CpVerdict gamma_sdp(const MapSpec& spec, const Tolerances& tol, Pairing pairing) {
  const int N = spec.size(), d = spec.din, e = spec.dout;
  Builder b;
  HermVar s = b.herm(d * e);
  std::vector<HermVar> pos(N), neg(N);  // H_i = pos_i - neg_i (MaxTrace) or (pos_i - neg_i)/2 with pos_i + neg_i = 2
  for (int i = 0; i < N; ++i) {
    pos[i] = b.herm(e);
    neg[i] = b.herm(e);
  }
  const double hs = pairing == Pairing::SumTrace ? 0.5 : 1.0;
  // S = sum_i X_i (x) H_i
  matrix_rows(b, d * e, Mat::Zero(d * e, d * e), [&](const Mat& g, int r) {
    b.add_herm(r, s, g);
    for (int i = 0; i < N; ++i) {
      Mat k = partial_trace(g * tensor(spec.xs[i], identity(e)), d, e, 1);
      b.add_herm(r, pos[i], k, -hs);
      b.add_herm(r, neg[i], k, hs);
    }
  });
  if (pairing == Pairing::SumTrace) {
    for (int i = 0; i < N; ++i)
      matrix_rows(b, e, 2.0 * identity(e), [&](const Mat& g, int r) {
        b.add_herm(r, pos[i], g);
        b.add_herm(r, neg[i], g);
      });
  } else {
    int slack = b.nonneg(1);
    int r = b.row(1.0);
    for (int i = 0; i < N; ++i) {
      b.add_herm(r, pos[i], identity(e));
      b.add_herm(r, neg[i], identity(e));
    }
    b.add_nonneg(r, slack, 0, 1.0);
  }
  for (int i = 0; i < N; ++i) {
    Mat yt = spec.ys[i].transpose();
    b.obj_herm(pos[i], yt, hs);
    b.obj_herm(neg[i], yt, -hs);
  }

  sdp::Solution sol = sdp::solve(b.build(), solver_options(tol));
  CpVerdict v;
  v.solver_status = sol.status;
  v.gamma = sol.primal_obj;
  v.message = sol.message;

  if (usable(sol.status) || sol.status == sdp::Status::NumericFailure) {
    Witness w;
    double scale = 0;
    for (int i = 0; i < N; ++i) {
      w.h.push_back(hs * (sdp::herm_value(sol.X, pos[i]) - sdp::herm_value(sol.X, neg[i])));
      scale = std::max(scale, pairing == Pairing::SumTrace ? op_norm(w.h.back()) : 0.0);
    }
    if (pairing == Pairing::MaxTrace)
      for (const Mat& h : w.h) scale += trace_norm(h);
    if (scale > 1)
      for (Mat& h : w.h) h /= scale;
    WitnessCheck chk = check_witness(spec, w, tol, pairing);
    if (chk.valid) {
      v.status = CpStatus::NotCP;
      v.gamma = chk.objective;
      v.witness = std::move(w);
      return v;
    }
  }
  const double wm = tol.witness_margin;
  if (sol.status == sdp::Status::Optimal && sol.primal_obj >= -wm) {
    v.status = CpStatus::CompletelyPositive;
  } else if (sol.status == sdp::Status::Marginal && sol.primal_obj >= -wm && sol.dual_obj >= -wm) {
    v.status = CpStatus::CompletelyPositive;
  } else if (sol.status == sdp::Status::NumericFailure) {
    throw Error(ErrorKind::NumericFailure, "gamma_sdp: solver failed: " + sol.message);
  } else {
    v.status = CpStatus::Marginal;
  }
  v.gamma = std::min(0.0, v.gamma);
  return v;
}

double approximation_error(const MapSpec& spec, const Choi& c, Pairing pairing) {
  double s = 0;
  for (int i = 0; i < spec.size(); ++i) {
    Mat diff = hermitian_part(apply_choi(c, spec.xs[i]) - spec.ys[i]);
    if (pairing == Pairing::SumTrace)
      s += trace_norm(diff);
    else
      s = std::max(s, op_norm(diff));
  }
  return s;
}

double constraint_residual(const MapSpec& spec, const Choi& c) {
  double r = 0;
  for (int i = 0; i < spec.size(); ++i) r = std::max(r, spectral_norm(apply_choi(c, spec.xs[i]) - spec.ys[i]));
  for (size_t j = 0; j < spec.dual_xs.size(); ++j)
    r = std::max(r, spectral_norm(dual_apply(c, spec.dual_xs[j]) - spec.dual_ys[j]));
  return r;
}

DeltaResult delta_sdp(const MapSpec& spec, const Tolerances& tol, Pairing pairing) {
  const int N = spec.size(), d = spec.din, e = spec.dout;
  Builder b;
  HermVar c = b.herm(e * d);
  std::vector<HermVar> pv(N), qv(N);
  for (int i = 0; i < N; ++i) {
    pv[i] = b.herm(e);
    qv[i] = b.herm(e);
  }
  if (pairing == Pairing::SumTrace) {
    // P_i - Q_i - T_C(X_i) = -Y_i
    for (int i = 0; i < N; ++i) {
      matrix_rows(b, e, -spec.ys[i], [&](const Mat& g, int r) {
        b.add_herm(r, pv[i], g);
        b.add_herm(r, qv[i], g, -1.0);
        b.add_herm(r, c, apply_coeff(g, spec.xs[i]), -1.0);
      });
      b.obj_herm(pv[i], identity(e));
      b.obj_herm(qv[i], identity(e));
    }
  } else {
    // t - (T_C(X_i) - Y_i) = P_i and t + (T_C(X_i) - Y_i) = Q_i, minimize t
    int t = b.free_vars(1);
    for (int i = 0; i < N; ++i) {
      matrix_rows(b, e, spec.ys[i], [&](const Mat& g, int r) {
        b.add_herm(r, pv[i], g);
        b.add_free(r, t, -g.trace().real());
        b.add_herm(r, c, apply_coeff(g, spec.xs[i]));
      });
      matrix_rows(b, e, -spec.ys[i], [&](const Mat& g, int r) {
        b.add_herm(r, qv[i], g);
        b.add_free(r, t, -g.trace().real());
        b.add_herm(r, c, apply_coeff(g, spec.xs[i]), -1.0);
      });
    }
    b.obj_free(t, 1.0);
  }
  sdp::Solution sol = sdp::solve(b.build(), solver_options(tol));
  if (sol.status == sdp::Status::NumericFailure || sol.X.empty())
    throw Error(ErrorKind::NumericFailure, "delta_sdp: solver failed: " + sol.message);
  DeltaResult r;
  r.solver_status = sol.status;
  r.sdp_value = sol.primal_obj;
  r.best_choi = detail::decode_choi(sol.X, c, d, e);
  r.delta = approximation_error(spec, r.best_choi, pairing);
  return r;
}

namespace {

struct ChoiSystem {
  Builder b;
  HermVar c;
  std::vector<std::vector<int>> pair_rows, dual_rows;
};

// C PSD with T_C(X_i) = Y_i and T*_C(X'_j) = Y'_j
ChoiSystem choi_system(const MapSpec& spec) {
  ChoiSystem s;
  const int d = spec.din, e = spec.dout;
  s.c = s.b.herm(e * d);
  for (int i = 0; i < spec.size(); ++i)
    s.pair_rows.push_back(
        matrix_rows(s.b, e, spec.ys[i], [&](const Mat& g, int r) { s.b.add_herm(r, s.c, apply_coeff(g, spec.xs[i])); }));
  for (size_t j = 0; j < spec.dual_xs.size(); ++j)
    s.dual_rows.push_back(matrix_rows(s.b, d, spec.dual_ys[j], [&](const Mat& g, int r) {
      s.b.add_herm(r, s.c, dual_coeff(g, spec.dual_xs[j]));
    }));
  return s;
}

// Farkas multipliers of the Choi system -> witness (normalized to max ||H_i|| = 1)
Witness witness_from_multipliers(const MapSpec& spec, const ChoiSystem& s, const RVec& y) {
  Witness w;
  for (int i = 0; i < spec.size(); ++i)
    w.h.push_back(Mat(-detail::rows_to_matrix(y, s.pair_rows[i], spec.dout).transpose()));
  for (size_t j = 0; j < spec.dual_xs.size(); ++j)
    w.h0.push_back(-detail::rows_to_matrix(y, s.dual_rows[j], spec.din));
  double scale = 0;
  for (const Mat& h : w.h) scale = std::max(scale, op_norm(h));
  if (scale > 0) {
    for (Mat& h : w.h) h /= scale;
    for (Mat& h : w.h0) h /= scale;
  }
  return w;
}

}  // namespace

ExactExtension exact_cp_extension(const MapSpec& spec, const Tolerances& tol) {
  ChoiSystem s = choi_system(spec);
  sdp::FeasibilityResult f = sdp::feasibility(s.b.build(), solver_options(tol));
  ExactExtension out;
  out.message = f.message;
  if (f.status == sdp::Feasibility::Feasible) {
    Choi c = detail::decode_choi(f.X, s.c, spec.din, spec.dout);
    double scale = 1;
    for (const Mat& y : spec.ys) scale = std::max(scale, spectral_norm(y));
    out.residual = constraint_residual(spec, c);
    if (out.residual <= tol.feas * scale * 10 && min_eig(c.m) >= -tol.psd) {
      out.status = ExactStatus::Exists;
      out.choi = std::move(c);
      return out;
    }
    out.message = "feasible point failed re-validation";
    return out;
  }
  if (f.status == sdp::Feasibility::Infeasible) {
    Witness w = witness_from_multipliers(spec, s, f.y);
    WitnessCheck chk = check_witness(spec, w, tol);
    if (chk.valid) {
      out.status = ExactStatus::NotExists;
      out.certificate = std::move(w);
      return out;
    }
    out.message = "separating certificate failed re-validation: " + chk.reason;
  }
  return out;
}

PsdElement contains_nonzero_psd(const std::vector<Mat>& basis, const Tolerances& tol) {
  if (basis.empty()) throw Error(ErrorKind::InvalidArgument, "contains_nonzero_psd: empty basis");
  const int n = basis[0].rows(), K = basis.size();
  Builder b;
  HermVar p = b.herm(n);
  int c0 = b.free_vars(K);
  int slack = b.nonneg(1);
  matrix_rows(b, n, Mat::Zero(n, n), [&](const Mat& g, int r) {
    b.add_herm(r, p, g);
    for (int k = 0; k < K; ++k) b.add_free(r, c0 + k, -re_tr(g, basis[k]));
  });
  int tr = b.row(1.0);
  b.add_herm(tr, p, identity(n));
  b.add_nonneg(tr, slack, 0, 1.0);
  b.obj_herm(p, identity(n), -1.0);
  sdp::Solution sol = sdp::solve(b.build(), solver_options(tol));
  PsdElement out;
  if (sol.X.empty() || !(usable(sol.status) || sol.status == sdp::Status::NumericFailure)) return out;
  Mat el = sdp::herm_value(sol.X, p);
  out.value = -sol.primal_obj;
  double t = el.trace().real();
  out.element = t > 0 ? Mat(el / t) : el;
  if (out.value >= 1 - 1e-6 && usable(sol.status))
    out.status = Tri::Yes;
  else if (out.value <= tol.margin && sol.primal_res <= 1e-6)
    out.status = Tri::No;
  return out;
}

StrictElement strictly_positive_element(const std::vector<Mat>& basis, const Tolerances& tol) {
  if (basis.empty()) throw Error(ErrorKind::InvalidArgument, "strictly_positive_element: empty basis");
  const int n = basis[0].rows(), K = basis.size();
  Builder b;
  HermVar w = b.herm(n);
  int c0 = b.free_vars(K);
  int t = b.free_vars(1);
  int slack = b.nonneg(1);
  // W + t*1 - sum_k c_k B_k = 0, tr W + n t + s = 1
  matrix_rows(b, n, Mat::Zero(n, n), [&](const Mat& g, int r) {
    b.add_herm(r, w, g);
    b.add_free(r, t, g.trace().real());
    for (int k = 0; k < K; ++k) b.add_free(r, c0 + k, -re_tr(g, basis[k]));
  });
  int tr = b.row(1.0);
  b.add_herm(tr, w, identity(n));
  b.add_free(tr, t, n);
  b.add_nonneg(tr, slack, 0, 1.0);
  b.obj_free(t, -1.0);
  sdp::Solution sol = sdp::solve(b.build(), solver_options(tol));
  StrictElement out;
  if (sol.X.empty() || sol.xfree.size() == 0) return out;
  out.t = sol.xfree(t);
  out.element = sdp::herm_value(sol.X, w) + out.t * identity(n);
  return out;
}

Classification classify(const MapSpec& spec, const Tolerances& tol) {
  Classification c;
  c.cp = gamma_sdp(spec, tol);
  PsdElement psd = contains_nonzero_psd(spec.xs, tol);
  const bool cp = c.cp.status == CpStatus::CompletelyPositive;
  if (psd.status == Tri::No) {
    c.guarantee = Guarantee::NoNonzeroPsd;
    c.implied = ExactStatus::Exists;
    c.explanation = "the span holds no nonzero PSD element, so every Hermitian map on it is CP and extends";
  } else {
    StrictElement strict = strictly_positive_element(spec.xs, tol);
    if (strict.t > tol.margin) {
      c.guarantee = Guarantee::StrictlyPositiveElement;
      c.element = strict.element;
    } else if (psd.status == Tri::Yes) {
      // the PSD elements span the whole space iff every input lives on the
      // support of a PSD element of maximal rank
      Eigh e = eigh(psd.element);
      const double cut = 1e-6 * std::max(1.0, e.values.maxCoeff());
      Mat q = Mat::Zero(spec.din, spec.din);
      for (int k = 0; k < e.values.size(); ++k)
        if (e.values(k) > cut) q += projector(e.vectors.col(k));
      bool spanned = true;
      for (const Mat& x : spec.xs)
        if ((x - q * x * q).norm() > 1e-6 * std::max(1.0, x.norm())) spanned = false;
      if (spanned) {
        c.guarantee = Guarantee::SpannedByPsd;
        c.element = psd.element;
      }
    }
    if (c.guarantee != Guarantee::None && cp) {
      c.implied = ExactStatus::Exists;
      c.explanation = "CP on a span with positive structure, so a CP extension exists";
    } else if (c.cp.status == CpStatus::NotCP) {
      c.implied = ExactStatus::NotExists;
      c.explanation = "not CP on the span, so no CP extension exists";
    } else {
      c.explanation = "no analytic guarantee decides; see the solver outcome";
    }
  }
  if (c.cp.status == CpStatus::NotCP && c.guarantee == Guarantee::NoNonzeroPsd) {
    c.implied = ExactStatus::NotExists;
    c.explanation = "solver found a CP violation on a span without PSD elements";
  }
  c.exact = exact_cp_extension(spec, tol);
  return c;
}

Unboundedness unboundedness_diagnostic(const MapSpec& spec, const std::vector<double>& epsilons,
                                       const Tolerances& tol) {
  std::vector<double> eps = epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  const int N = spec.size(), d = spec.din, e = spec.dout;
  Unboundedness out;
  for (double ep : eps) {
    if (!(ep > 0)) throw Error(ErrorKind::InvalidArgument, "unboundedness_diagnostic: epsilon must be positive");
    Builder b;
    HermVar c = b.herm(e * d);
    std::vector<HermVar> pv(N), qv(N);
    for (int i = 0; i < N; ++i) {
      pv[i] = b.herm(e);
      qv[i] = b.herm(e);
    }
    HermVar w = b.herm(d);
    int t = b.free_vars(1);
    int slack = b.nonneg(1);
    for (int i = 0; i < N; ++i)
      matrix_rows(b, e, -spec.ys[i], [&](const Mat& g, int r) {
        b.add_herm(r, pv[i], g);
        b.add_herm(r, qv[i], g, -1.0);
        b.add_herm(r, c, apply_coeff(g, spec.xs[i]), -1.0);
      });
    int budget = b.row(ep);
    for (int i = 0; i < N; ++i) {
      b.add_herm(budget, pv[i], identity(e));
      b.add_herm(budget, qv[i], identity(e));
    }
    b.add_nonneg(budget, slack, 0, 1.0);
    // W = t*1 - tr_1 C
    matrix_rows(b, d, Mat::Zero(d, d), [&](const Mat& g, int r) {
      b.add_herm(r, w, g);
      b.add_herm(r, c, detail::trace1_coeff(g, e));
      b.add_free(r, t, -g.trace().real());
    });
    b.obj_free(t, 1.0);
    sdp::Solution sol = sdp::solve(b.build(), solver_options(tol));
    UnboundednessPoint pt;
    pt.epsilon = ep;
    pt.solver_status = sol.status;
    if (!sol.X.empty()) {
      Choi ch = detail::decode_choi(sol.X, c, d, e);
      pt.dual_norm = op_norm(dual_apply(ch, identity(e)));
      pt.delta = approximation_error(spec, ch);
    }
    out.series.push_back(pt);
  }
  if (!out.series.empty()) {
    out.monotone = true;
    for (size_t k = 1; k < out.series.size(); ++k)
      if (out.series[k].dual_norm < out.series[k - 1].dual_norm * (1 - 1e-6)) out.monotone = false;
    const double first = out.series.front().dual_norm;
    out.growth = first > 0 ? out.series.back().dual_norm / first : 0.0;
    out.unbounded_flag = out.monotone && out.growth >= 10;
  }
  return out;
}

ExtensionVerdict approximate(const MapSpec& spec, const Tolerances& tol) {
  ExtensionVerdict v;
  DeltaResult dr = delta_sdp(spec, tol);
  v.delta = dr.delta;
  v.best_choi = dr.best_choi;
  v.exact = exact_cp_extension(spec, tol);
  if (v.delta <= 1e-6 && v.exact.status != ExactStatus::Exists) {
    Unboundedness u = unboundedness_diagnostic(spec, {1e-1, 1e-2, 1e-3}, tol);
    v.unbounded_flag = u.unbounded_flag;
  }
  return v;
}

}  // namespace cpext
