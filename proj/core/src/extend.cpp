#include "cpext/extend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "choi_rows.hpp"

namespace cpext {

using detail::apply_coeff;
using detail::Builder;
using detail::HermVar;
using detail::matrix_rows;
using detail::trace1_coeff;
using detail::usable;

const char* to_string(ChannelStatus s) {
  switch (s) {
    case ChannelStatus::Exists: return "Exists";
    case ChannelStatus::NotExists: return "NotExists";
    case ChannelStatus::Marginal: return "Marginal";
  }
  return "Unknown";
}

const char* to_string(HilbertStatus s) {
  switch (s) {
    case HilbertStatus::Exists: return "Exists";
    case HilbertStatus::NotExists: return "NotExists";
    case HilbertStatus::SupportIncompatible: return "SupportIncompatible";
  }
  return "Unknown";
}

void require_density(const Mat& rho, const char* what, double tol) {
  require_hermitian(rho, 1e-12, what);
  if (std::abs(rho.trace().real() - 1) > tol)
    throw Error(ErrorKind::InvalidArgument, std::string(what) + ": trace is not one");
  if (min_eig(rho) < -tol) throw Error(ErrorKind::NotPSD, std::string(what) + ": not positive semidefinite");
}

namespace {

MapSpec pairs_only(const MapSpec& spec) {
  MapSpec s;
  s.din = spec.din;
  s.dout = spec.dout;
  s.xs = spec.xs;
  s.ys = spec.ys;
  return s;
}

double output_scale(const MapSpec& spec) {
  double s = 1;
  for (const Mat& y : spec.ys) s = std::max(s, op_norm(y));
  return s;
}

// Adds P_i - Q_i - T_C(X_i) = -Y_i with objective sum tr(P_i + Q_i).
void add_sum_trace_error(Builder& b, const MapSpec& spec, HermVar c) {
  const int e = spec.dout;
  for (int i = 0; i < spec.size(); ++i) {
    HermVar p = b.herm(e), q = b.herm(e);
    matrix_rows(b, e, -spec.ys[i], [&](const Mat& g, int r) {
      b.add_herm(r, p, g);
      b.add_herm(r, q, g, -1.0);
      b.add_herm(r, c, apply_coeff(g, spec.xs[i]), -1.0);
    });
    b.obj_herm(p, identity(e));
    b.obj_herm(q, identity(e));
  }
}

struct WitnessProblem {
  Builder b;
  std::vector<HermVar> pos, neg;  // H_i = (pos_i - neg_i)/2
  HermVar a{}, bneg{};            // bounded H0 = a - bneg
  int h0_free = -1;               // unbounded H0 in Hermitian coordinates
};

// min tr H0 + sum_i tr[Y_i^T H_i]  s.t. H0 (x) 1 + sum_i X_i (x) H_i PSD,
// ||H_i|| <= 1, and ||H0||_1 <= w when w >= 0 (H0 free otherwise).
WitnessProblem build_witness_problem(const MapSpec& spec, double w) {
  WitnessProblem wp;
  Builder& b = wp.b;
  const int N = spec.size(), d = spec.din, e = spec.dout;
  HermVar s = b.herm(d * e);
  wp.pos.resize(N);
  wp.neg.resize(N);
  for (int i = 0; i < N; ++i) {
    wp.pos[i] = b.herm(e);
    wp.neg[i] = b.herm(e);
  }
  const auto& dbasis = hermitian_unit_basis(d);
  if (w >= 0) {
    wp.a = b.herm(d);
    wp.bneg = b.herm(d);
  } else {
    wp.h0_free = b.free_vars(d * d);
  }
  // S = sum_i X_i (x) H_i + H0 (x) 1 with H_i = (pos_i - neg_i)/2
  matrix_rows(b, d * e, Mat::Zero(d * e, d * e), [&](const Mat& g, int r) {
    b.add_herm(r, s, g);
    for (int i = 0; i < N; ++i) {
      Mat k = partial_trace(g * tensor(spec.xs[i], identity(e)), d, e, 1);
      b.add_herm(r, wp.pos[i], k, -0.5);
      b.add_herm(r, wp.neg[i], k, 0.5);
    }
    Mat k0 = partial_trace(g, d, e, 2);
    if (w >= 0) {
      b.add_herm(r, wp.a, k0, -1.0);
      b.add_herm(r, wp.bneg, k0, 1.0);
    } else {
      for (int k = 0; k < d * d; ++k) b.add_free(r, wp.h0_free + k, -detail::re_tr(k0, dbasis[k]));
    }
  });
  for (int i = 0; i < N; ++i)
    matrix_rows(b, e, 2.0 * identity(e), [&](const Mat& g, int r) {
      b.add_herm(r, wp.pos[i], g);
      b.add_herm(r, wp.neg[i], g);
    });
  for (int i = 0; i < N; ++i) {
    Mat yt = spec.ys[i].transpose();
    b.obj_herm(wp.pos[i], yt, 0.5);
    b.obj_herm(wp.neg[i], yt, -0.5);
  }
  if (w >= 0) {
    int slack = b.nonneg(1);
    int r = b.row(w);
    b.add_herm(r, wp.a, identity(d));
    b.add_herm(r, wp.bneg, identity(d));
    b.add_nonneg(r, slack, 0, 1.0);
    b.obj_herm(wp.a, identity(d));
    b.obj_herm(wp.bneg, identity(d), -1.0);
  } else {
    for (int k = 0; k < d * d; ++k) b.obj_free(wp.h0_free + k, dbasis[k].trace().real());
  }
  return wp;
}

Witness decode_witness(const WitnessProblem& wp, const sdp::Solution& sol, int din) {
  Witness w;
  for (size_t i = 0; i < wp.pos.size(); ++i)
    w.h.push_back(0.5 * (sdp::herm_value(sol.X, wp.pos[i]) - sdp::herm_value(sol.X, wp.neg[i])));
  if (wp.h0_free >= 0) {
    const auto& basis = hermitian_unit_basis(din);
    Mat h0 = Mat::Zero(din, din);
    for (int k = 0; k < din * din; ++k) h0 += sol.xfree(wp.h0_free + k) * basis[k];
    w.h0.push_back(h0);
  } else {
    w.h0.push_back(sdp::herm_value(sol.X, wp.a) - sdp::herm_value(sol.X, wp.bneg));
  }
  double scale = 0;
  for (const Mat& h : w.h) scale = std::max(scale, op_norm(h));
  if (scale > 1) {
    for (Mat& h : w.h) h /= scale;
    for (Mat& h : w.h0) h /= scale;
  }
  return w;
}

// H0 -> H0 + t*1 raises every eigenvalue of H0 (x) 1 + sum_i X_i (x) H_i by t;
// used to absorb the equality residual left by the solver.
void shift_to_psd(const MapSpec& spec, Witness& w, double h0_bound) {
  const int d = spec.din, e = spec.dout;
  Mat m = tensor(w.h0[0], identity(e));
  for (int i = 0; i < spec.size(); ++i) m += tensor(spec.xs[i], w.h[i]);
  double lo = min_eig(m);
  if (lo >= 0) return;
  w.h0[0] += (-lo * (1 + 1e-9) + 1e-14) * identity(d);
  if (h0_bound >= 0) {
    double n = trace_norm(w.h0[0]);
    if (n > h0_bound && n > 0) {
      for (Mat& h : w.h) h *= h0_bound / n;
      w.h0[0] *= h0_bound / n;
    }
  }
}

}  // namespace

WitnessCheck check_channel_witness(const MapSpec& spec, const Witness& w, const Tolerances& tol, double h0_bound) {
  return check_witness(with_trace_preservation(pairs_only(spec)), w, tol, Pairing::SumTrace, h0_bound);
}

TpExtensionResult cptp_delta(const MapSpec& spec, double w, const Tolerances& tol) {
  if (!(w >= 0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "cptp_delta: weight must be finite and >= 0");
  const int d = spec.din, e = spec.dout;
  TpExtensionResult out;
  out.weight_w = w;

  // lambda*1 -/+ (tr_1 C - 1) PSD, minimize w*lambda + sum_i ||T_C(X_i) - Y_i||_1
  Builder b;
  HermVar c = b.herm(e * d);
  HermVar l1 = b.herm(d), l2 = b.herm(d);
  int lam = b.nonneg(1);
  add_sum_trace_error(b, spec, c);
  matrix_rows(b, d, identity(d), [&](const Mat& g, int r) {
    b.add_herm(r, l1, g);
    b.add_nonneg(r, lam, 0, -g.trace().real());
    b.add_herm(r, c, trace1_coeff(g, e));
  });
  matrix_rows(b, d, -identity(d), [&](const Mat& g, int r) {
    b.add_herm(r, l2, g);
    b.add_nonneg(r, lam, 0, -g.trace().real());
    b.add_herm(r, c, trace1_coeff(g, e), -1.0);
  });
  b.obj_nonneg(lam, 0, w);
  sdp::Solution sol = sdp::solve(b.build(), solver_options(tol));
  if (sol.status == sdp::Status::NumericFailure || sol.X.empty())
    throw Error(ErrorKind::NumericFailure, "cptp_delta: solver failed: " + sol.message);
  out.primal_status = sol.status;
  out.sdp_value = sol.primal_obj;
  out.best_choi = detail::decode_choi(sol.X, c, d, e);
  out.lambda = op_norm(partial_trace(out.best_choi.m, e, d, 1) - identity(d));
  out.delta_tp = w * out.lambda + approximation_error(pairs_only(spec), out.best_choi);

  WitnessProblem wp = build_witness_problem(spec, w);
  sdp::Solution dsol = sdp::solve(wp.b.build(), solver_options(tol));
  out.dual_status = dsol.status;
  if (!dsol.X.empty()) {
    out.gamma_tp = dsol.primal_obj;
    Witness wit = decode_witness(wp, dsol, d);
    shift_to_psd(spec, wit, w);
    if (check_channel_witness(spec, wit, tol, w).valid) out.witness = std::move(wit);
  }
  return out;
}

double cptp_delta_hard(const MapSpec& spec, const Tolerances& tol, Choi* best) {
  const int d = spec.din, e = spec.dout;
  Builder b;
  HermVar c = b.herm(e * d);
  add_sum_trace_error(b, spec, c);
  matrix_rows(b, d, identity(d), [&](const Mat& g, int r) { b.add_herm(r, c, trace1_coeff(g, e)); });
  sdp::Solution sol = sdp::solve(b.build(), solver_options(tol));
  if (sol.status == sdp::Status::NumericFailure || sol.X.empty())
    throw Error(ErrorKind::NumericFailure, "cptp_delta_hard: solver failed: " + sol.message);
  Choi ch = detail::decode_choi(sol.X, c, d, e);
  double delta = approximation_error(pairs_only(spec), ch);
  if (best) *best = std::move(ch);
  return delta;
}

ChannelResult channel_extension(const MapSpec& spec_in, const Tolerances& tol) {
  const MapSpec spec = pairs_only(spec_in);
  const int d = spec.din, e = spec.dout;
  ChannelResult out;

  for (int i = 0; i < spec.size(); ++i) {
    double tx = spec.xs[i].trace().real(), ty = spec.ys[i].trace().real();
    if (std::abs(ty - tx) > 1e-9 * (1 + std::abs(tx))) {
      // H_i = -s*1, H0 = s*X_i gives a zero operator and objective -|tr Y_i - tr X_i|
      double sgn = ty > tx ? 1.0 : -1.0;
      Witness w;
      for (int k = 0; k < spec.size(); ++k) w.h.push_back(Mat::Zero(e, e));
      w.h[i] = -sgn * identity(e);
      w.h0.push_back(sgn * spec.xs[i]);
      WitnessCheck chk = check_channel_witness(spec, w, tol);
      out.status = ChannelStatus::NotExists;
      out.trace_mismatch = true;
      out.gamma = chk.objective;
      out.delta = std::abs(ty - tx);
      out.witness = std::move(w);
      out.message = "trace mismatch on pair " + std::to_string(i) + ": tr X = " + std::to_string(tx) +
                    ", tr Y = " + std::to_string(ty);
      return out;
    }
  }

  Choi best;
  out.delta = cptp_delta_hard(spec, tol, &best);
  const MapSpec tp = with_trace_preservation(spec);
  if (out.delta <= tol.witness_margin) {
    double resid = constraint_residual(tp, best);
    if (resid <= tol.feas * output_scale(spec) && min_eig(best.m) >= -tol.psd) {
      out.status = ChannelStatus::Exists;
      out.choi = std::move(best);
      return out;
    }
    out.message = "near-feasible channel failed re-validation (residual " + std::to_string(resid) + ")";
    return out;
  }

  WitnessProblem wp = build_witness_problem(spec, -1);
  sdp::Solution dsol = sdp::solve(wp.b.build(), solver_options(tol));
  if (!dsol.X.empty()) {
    Witness w = decode_witness(wp, dsol, d);
    shift_to_psd(spec, w, -1);
    WitnessCheck chk = check_channel_witness(spec, w, tol);
    out.gamma = chk.objective;
    if (chk.valid) {
      out.status = ChannelStatus::NotExists;
      out.witness = std::move(w);
      return out;
    }
    out.message = "witness failed re-validation: " + chk.reason;
  } else {
    out.message = "witness problem failed: " + dsol.message;
  }
  return out;
}

UnitalScale minimal_unital_scale(const MapSpec& spec, const Tolerances& tol, double precision) {
  const int d = spec.din, e = spec.dout;
  std::vector<Mat> basis = spec.xs;
  basis.push_back(identity(d));
  for (const Mat& x : spec.xs)
    if (std::abs(x.trace()) > 1e-9 * (1 + x.norm()))
      throw Error(ErrorKind::InvalidArgument, "minimal_unital_scale: inputs must be traceless");
  if ((int)hermitian_basis_of_span(basis).basis.size() != spec.size() + 1)
    throw Error(ErrorKind::InvalidArgument, "minimal_unital_scale: identity lies in the span of the inputs");

  auto cp_at = [&](double c) {
    MapSpec s = pairs_only(spec);
    s.xs.push_back(identity(d));
    s.ys.push_back(c * identity(e));
    return gamma_sdp(s, tol).status != CpStatus::NotCP;
  };
  UnitalScale out;
  double hi = 0;
  for (const Mat& y : spec.ys) hi += op_norm(y);
  hi = std::max(10 * hi, 1.0);
  out.upper_bracket = hi;
  if (!cp_at(hi)) return out;
  double lo = 0;
  if (cp_at(lo)) {
    out.found = true;
    return out;
  }
  while (hi - lo > precision) {
    double mid = 0.5 * (lo + hi);
    (cp_at(mid) ? hi : lo) = mid;
    ++out.bisection_steps;
  }
  out.found = true;
  out.c_star = hi;
  return out;
}

namespace {

struct ProbSystem {
  Builder b;
  HermVar c{};
  int p = -1;
};

// C PSD, 1 - tr_1 C PSD, T_C(rho_i) = p_i rho'_i, p >= 0
ProbSystem prob_system(const std::vector<Mat>& rho, const std::vector<Mat>& rho_out, bool equal) {
  if (rho.empty() || rho.size() != rho_out.size())
    throw Error(ErrorKind::InvalidArgument, "probabilistic: need matching nonempty state lists");
  const int d = rho[0].rows(), e = rho_out[0].rows();
  for (size_t i = 0; i < rho.size(); ++i) {
    if (rho[i].rows() != d || rho_out[i].rows() != e)
      throw Error(ErrorKind::DimensionMismatch, "probabilistic: inconsistent state dimensions");
    require_density(rho[i], "input state");
    require_density(rho_out[i], "output state");
  }
  const int N = rho.size();
  ProbSystem s;
  Builder& b = s.b;
  s.c = b.herm(e * d);
  HermVar slack = b.herm(d);
  s.p = b.nonneg(N);
  for (int i = 0; i < N; ++i)
    matrix_rows(b, e, Mat::Zero(e, e), [&](const Mat& g, int r) {
      b.add_herm(r, s.c, apply_coeff(g, rho[i]));
      b.add_nonneg(r, s.p, i, -detail::re_tr(g, rho_out[i]));
    });
  matrix_rows(b, d, identity(d), [&](const Mat& g, int r) {
    b.add_herm(r, slack, g);
    b.add_herm(r, s.c, trace1_coeff(g, e));
  });
  if (equal)
    for (int i = 0; i + 1 < N; ++i) {
      int r = b.row(0);
      b.add_nonneg(r, s.p, i, 1);
      b.add_nonneg(r, s.p, i + 1, -1);
    }
  return s;
}

void finish(ProbabilisticResult& out, const ProbSystem& s, const sdp::Solution& sol, const std::vector<Mat>& rho,
            int d, int e) {
  out.solver_status = sol.status;
  out.message = sol.message;
  if (sol.X.empty()) throw Error(ErrorKind::NumericFailure, "probabilistic: solver failed: " + sol.message);
  out.choi = detail::decode_choi(sol.X, s.c, d, e);
  out.probs.clear();
  for (const Mat& r : rho) out.probs.push_back(apply_choi(out.choi, r).trace().real());
}

}  // namespace

ProbabilisticResult probabilistic_maximin(const std::vector<Mat>& rho, const std::vector<Mat>& rho_out, bool equal,
                                          const Tolerances& tol) {
  ProbSystem s = prob_system(rho, rho_out, equal);
  const int N = rho.size();
  int q = s.b.free_vars(1);
  int sl = s.b.nonneg(N);
  for (int i = 0; i < N; ++i) {
    int r = s.b.row(0);
    s.b.add_nonneg(r, s.p, i, 1);
    s.b.add_free(r, q, -1);
    s.b.add_nonneg(r, sl, i, -1);
  }
  s.b.obj_free(q, -1);
  sdp::Solution sol = sdp::solve(s.b.build(), solver_options(tol));
  ProbabilisticResult out;
  out.kind = ObjectiveKind::Maximin;
  finish(out, s, sol, rho, rho[0].rows(), rho_out[0].rows());
  out.value = *std::min_element(out.probs.begin(), out.probs.end());
  return out;
}

ProbabilisticResult probabilistic_weighted(const std::vector<Mat>& rho, const std::vector<Mat>& rho_out,
                                           const std::vector<double>& priors, std::optional<double> floor, bool equal,
                                           const Tolerances& tol) {
  const int N = rho.size();
  if ((int)priors.size() != N) throw Error(ErrorKind::InvalidArgument, "probabilistic: one prior per state required");
  double total = 0;
  for (double p : priors) {
    if (!(p >= 0)) throw Error(ErrorKind::InvalidArgument, "probabilistic: priors must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1) > 1e-9) throw Error(ErrorKind::InvalidArgument, "probabilistic: priors must sum to one");
  ProbabilisticResult out;
  out.kind = ObjectiveKind::Weighted;
  if (floor) {
    if (!(*floor >= 0)) throw Error(ErrorKind::InvalidArgument, "probabilistic: floor must be nonnegative");
    ProbabilisticResult mm = probabilistic_maximin(rho, rho_out, equal, tol);
    if (mm.value < *floor - tol.feas) {
      out = mm;
      out.kind = ObjectiveKind::Weighted;
      out.infeasible = true;
      out.value = 0;
      out.message = "floor " + std::to_string(*floor) + " exceeds the best attainable minimum " + std::to_string(mm.value);
      return out;
    }
  }
  ProbSystem s = prob_system(rho, rho_out, equal);
  if (floor) {
    int f = s.b.nonneg(N);
    for (int i = 0; i < N; ++i) {
      int r = s.b.row(*floor);
      s.b.add_nonneg(r, s.p, i, 1);
      s.b.add_nonneg(r, f, i, -1);
    }
  }
  for (int i = 0; i < N; ++i) s.b.obj_nonneg(s.p, i, -priors[i]);
  sdp::Solution sol = sdp::solve(s.b.build(), solver_options(tol));
  finish(out, s, sol, rho, rho[0].rows(), rho_out[0].rows());
  out.value = 0;
  for (int i = 0; i < N; ++i) out.value += priors[i] * out.probs[i];
  return out;
}

namespace {

struct Inclusion {
  bool included = true;
  bool boundary = false;
};

// supp a within supp b: weight of a on the kernel of b
Inclusion support_inclusion(const Mat& a, const Mat& b) {
  Eigh eb = eigh(b);
  const RVec& vals = eb.values;
  const Mat& vecs = eb.vectors;
  const double rt = rank_tol(b);
  std::vector<int> ker;
  for (int k = 0; k < vals.size(); ++k)
    if (vals(k) <= rt) ker.push_back(k);
  Inclusion inc;
  if (ker.empty()) return inc;
  Mat k(b.rows(), ker.size());
  for (size_t q = 0; q < ker.size(); ++q) k.col(q) = vecs.col(ker[q]);
  double leak = op_norm(Mat(k.adjoint() * a * k));
  const double at = rank_tol(a);
  inc.included = leak <= 10 * at;
  inc.boundary = leak > at && leak <= 10 * at;
  return inc;
}

double metric_product(const Mat& a, const Mat& b) {
  double r1 = inf_ratio(a, b), r2 = inf_ratio(b, a);
  if (r1 <= 0 || r2 <= 0) return std::numeric_limits<double>::infinity();
  return 1 / (r1 * r2);
}

}  // namespace

HilbertResult hilbert_metric_check(const Mat& rho1, const Mat& rho2, const Mat& rho1_out, const Mat& rho2_out) {
  require_density(rho1, "rho1");
  require_density(rho2, "rho2");
  require_density(rho1_out, "rho1'");
  require_density(rho2_out, "rho2'");
  if (rho1.rows() != rho2.rows() || rho1_out.rows() != rho2_out.rows())
    throw Error(ErrorKind::DimensionMismatch, "hilbert: inconsistent state dimensions");
  HilbertResult out;
  Inclusion in12 = support_inclusion(rho1, rho2), in21 = support_inclusion(rho2, rho1);
  Inclusion out12 = support_inclusion(rho1_out, rho2_out), out21 = support_inclusion(rho2_out, rho1_out);
  out.support_boundary = in12.boundary || in21.boundary || out12.boundary || out21.boundary;
  if ((in12.included && !out12.included) || (in21.included && !out21.included)) {
    out.status = HilbertStatus::SupportIncompatible;
    out.lhs = metric_product(rho1, rho2);
    out.rhs = std::numeric_limits<double>::infinity();
    out.message = "a support inclusion of the inputs is not preserved by the outputs";
    return out;
  }
  out.lhs = metric_product(rho1, rho2);
  out.rhs = metric_product(rho1_out, rho2_out);
  bool ok = std::isinf(out.lhs) || out.lhs >= out.rhs - 1e-9;
  out.status = ok ? HilbertStatus::Exists : HilbertStatus::NotExists;
  return out;
}

}  // namespace cpext
