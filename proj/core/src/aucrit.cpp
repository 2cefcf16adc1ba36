#include "cpext/aucrit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cpext {

const char* to_string(AuStatus s) {
  switch (s) {
    case AuStatus::Holds: return "Holds";
    case AuStatus::Fails: return "Fails";
    case AuStatus::Marginal: return "Marginal";
  }
  return "Unknown";
}

const char* to_string(FidelityStatus s) { return s == FidelityStatus::Exists ? "Exists" : "NotExists"; }

const char* to_string(FidelityFailure f) {
  switch (f) {
    case FidelityFailure::None: return "none";
    case FidelityFailure::FirstPositivity: return "first-positivity";
    case FidelityFailure::SecondPositivity: return "second-positivity";
    case FidelityFailure::FidelityInequality: return "fidelity-inequality";
  }
  return "unknown";
}

void validate(const AuInstance& inst, double tol) {
  require_density(inst.rho1, "rho1", tol);
  require_density(inst.rho2, "rho2", tol);
  require_density(inst.rho1_out, "rho1'", tol);
  require_density(inst.rho2_out, "rho2'", tol);
  if (inst.rho2.rows() != inst.rho1.rows() || inst.rho2_out.rows() != inst.rho1_out.rows())
    throw Error(ErrorKind::DimensionMismatch, "instance: state dimensions differ");
}

MapSpec to_spec(const AuInstance& inst) {
  MapSpec s;
  s.din = inst.din();
  s.dout = inst.dout();
  s.xs = {inst.rho1, inst.rho2};
  s.ys = {inst.rho1_out, inst.rho2_out};
  return s;
}

namespace {

double au_value(const AuInstance& inst, double p) {
  return trace_norm(Mat(p * inst.rho1 - (1 - p) * inst.rho2)) -
         trace_norm(Mat(p * inst.rho1_out - (1 - p) * inst.rho2_out));
}

// Generalized eigenvalues of a relative to b on the support of b.
std::vector<double> pencil_values(const Mat& a, const Mat& b) {
  Eigh e = eigh(b);
  const double cut = 10 * rank_tol(b);
  std::vector<int> sup;
  for (int k = 0; k < e.values.size(); ++k)
    if (e.values(k) > cut) sup.push_back(k);
  if (sup.empty()) return {};
  Mat w(b.rows(), sup.size());
  for (size_t q = 0; q < sup.size(); ++q) w.col(q) = e.vectors.col(sup[q]) / std::sqrt(e.values(sup[q]));
  RVec vals = eigvalsh(hermitian_part(Mat(w.adjoint() * a * w)));
  return {vals.data(), vals.data() + vals.size()};
}

void add_breakpoints(std::vector<double>& ps, const Mat& a, const Mat& b) {
  // p a - (1-p) b singular where (1-p)/p is a generalized eigenvalue of a w.r.t. b
  for (double l : pencil_values(a, b))
    if (l >= 0) ps.push_back(1 / (1 + l));
  for (double m : pencil_values(b, a))
    if (m >= 0) ps.push_back(m / (1 + m));
}

Mat psd_part(const Mat& h) {
  Eigh e = eigh(hermitian_part(h));
  return e.vectors * e.values.cwiseMax(0.0).cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace

double au_min_uniform(const AuInstance& inst, int points) {
  double m = 0;
  for (int i = 0; i < points; ++i) m = std::min(m, au_value(inst, double(i) / (points - 1)));
  return m;
}

AuResult au_condition(const AuInstance& inst, const Tolerances& tol, int grid) {
  validate(inst);
  std::vector<double> ps;
  for (int i = 0; i < grid; ++i) ps.push_back(double(i) / (grid - 1));
  add_breakpoints(ps, inst.rho1, inst.rho2);
  add_breakpoints(ps, inst.rho1_out, inst.rho2_out);
  for (double& p : ps) p = std::clamp(p, 0.0, 1.0);
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());

  AuResult r;
  std::vector<double> fs(ps.size());
  size_t best = 0;
  for (size_t i = 0; i < ps.size(); ++i) {
    fs[i] = au_value(inst, ps[i]);
    if (fs[i] < fs[best]) best = i;
  }
  r.evaluations = ps.size();
  r.min_value = fs[best];
  r.argmin_p = ps[best];
  // golden-section refinement on both neighbouring intervals
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int side = -1; side <= 1; side += 2) {
    long j = long(best) + side;
    if (j < 0 || j >= long(ps.size())) continue;
    double lo = std::min(ps[best], ps[j]), hi = std::max(ps[best], ps[j]);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = au_value(inst, x1), f2 = au_value(inst, x2);
    r.evaluations += 2;
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = au_value(inst, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = au_value(inst, x2);
      }
      ++r.evaluations;
    }
    for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}})
      if (f < r.min_value) {
        r.min_value = f;
        r.argmin_p = x;
      }
  }
  if (r.min_value >= -tol.au)
    r.status = AuStatus::Holds;
  else if (r.min_value < -10 * tol.au)
    r.status = AuStatus::Fails;
  else
    r.status = AuStatus::Marginal;
  return r;
}

FidelityResult fidelity_criterion(const AuInstance& inst, const Tolerances& tol) {
  validate(inst);
  if (inst.din() > 2) throw Error(ErrorKind::Precondition, "fidelity_criterion: input dimension must be at most 2");
  FidelityResult r;
  r.a = inf_ratio(inst.rho1, inst.rho2);
  r.b = inf_ratio(inst.rho2, inst.rho1);
  Mat o1 = inst.rho1_out - r.a * inst.rho2_out, o2 = inst.rho2_out - r.b * inst.rho1_out;
  r.min_eig_first = min_eig(o1);
  r.min_eig_second = min_eig(o2);
  // a condition failed by less than ten times its tolerance is near the boundary
  auto band = [](double v, double t) { return v < -t && v >= -10 * t; };
  r.near_boundary = band(r.min_eig_first, tol.psd) || band(r.min_eig_second, tol.psd);
  if (r.min_eig_first < -tol.psd) {
    r.failed = FidelityFailure::FirstPositivity;
  } else if (r.min_eig_second < -tol.psd) {
    r.failed = FidelityFailure::SecondPositivity;
  } else {
    r.fidelity_in = fidelity(psd_part(inst.rho1 - r.a * inst.rho2), psd_part(inst.rho2 - r.b * inst.rho1));
    r.fidelity_out = fidelity(psd_part(o1), psd_part(o2));
    double slack = r.fidelity_out - r.fidelity_in;
    r.near_boundary = r.near_boundary || band(slack, 1e-9);
    if (slack < -1e-9) r.failed = FidelityFailure::FidelityInequality;
  }
  r.status = r.failed == FidelityFailure::None ? FidelityStatus::Exists : FidelityStatus::NotExists;
  return r;
}

namespace {

Vec top_vector(const Mat& h) {
  Eigh e = eigh(hermitian_part(h));
  return e.vectors.col(e.values.size() - 1);
}

void check_channel(const AuInstance& inst, const Choi& c) {
  double r1 = op_norm(Mat(apply_choi(c, inst.rho1) - inst.rho1_out));
  double r2 = op_norm(Mat(apply_choi(c, inst.rho2) - inst.rho2_out));
  double tp = op_norm(Mat(partial_trace(c.m, c.dout, c.din, 1) - identity(c.din)));
  double me = min_eig(c.m);
  if (r1 > 1e-8 || r2 > 1e-8 || tp > 1e-8 || me < -1e-9)
    throw Error(ErrorKind::NumericFailure, "construct_qubit_channel: result failed validation (pairs " +
                                               std::to_string(std::max(r1, r2)) + ", trace " + std::to_string(tp) +
                                               ", min eigenvalue " + std::to_string(me) + ")");
}

}  // namespace

Choi construct_qubit_channel(const AuInstance& inst, const Tolerances& tol) {
  FidelityResult fr = fidelity_criterion(inst, tol);
  if (fr.status != FidelityStatus::Exists)
    throw Error(ErrorKind::Precondition, std::string("construct_qubit_channel: criterion fails (") +
                                             to_string(fr.failed) + ")");
  const int d = inst.din(), e = inst.dout();
  if (op_norm(Mat(inst.rho1 - inst.rho2)) <= 1e-12 || d == 1) {
    Mat out = inst.rho1_out;
    Choi c = choi_of([&](const Mat& x) { return Mat(x.trace() * out); }, d, e);
    check_channel(inst, c);
    return c;
  }
  const double a = fr.a, b = fr.b;
  Vec psi1 = top_vector(inst.rho1 - a * inst.rho2);
  Vec psi2 = top_vector(inst.rho2 - b * inst.rho1);
  Mat s1 = sqrt_psd(psd_part((inst.rho1_out - a * inst.rho2_out) / (1 - a)));
  Mat s2 = sqrt_psd(psd_part((inst.rho2_out - b * inst.rho1_out) / (1 - b)));

  // purifications |M>> with overlap tr[M1^H M2] = F, real and nonnegative
  Eigen::JacobiSVD<Mat> svd(s1 * s2, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat m1 = s1, m2 = s2 * svd.matrixV() * svd.matrixU().adjoint();
  double f = svd.singularValues().sum();

  cplx ov = psi1.dot(psi2);
  if (std::abs(ov) > 0) psi2 *= std::conj(ov) / std::abs(ov);
  double r = f > 0 ? std::min(1.0, std::abs(ov) / f) : 0.0;
  Vec phi1(2), phi2(2);
  phi1 << 1, 0;
  phi2 << r, std::sqrt(std::max(0.0, 1 - r * r));

  const int anc = 2 * e;
  Mat B(e * anc, 2);
  for (int j = 0; j < e; ++j)
    for (int k = 0; k < e; ++k)
      for (int l = 0; l < 2; ++l) {
        B(j * anc + k * 2 + l, 0) = m1(j, k) * phi1(l);
        B(j * anc + k * 2 + l, 1) = m2(j, k) * phi2(l);
      }
  Mat A(2, 2);
  A.col(0) = psi1;
  A.col(1) = psi2;
  Mat V = B * A.inverse();
  // remove rounding so the channel is exactly trace preserving
  Eigh g = eigh(hermitian_part(Mat(V.adjoint() * V)));
  V = V * g.vectors * g.values.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * g.vectors.adjoint();

  std::vector<Mat> kraus;
  for (int m = 0; m < anc; ++m) {
    Mat k(e, d);
    for (int j = 0; j < e; ++j) k.row(j) = V.row(j * anc + m);
    if (k.norm() > 0) kraus.push_back(k);
  }
  Choi c = choi_from_kraus(kraus);
  check_channel(inst, c);
  return c;
}

AuWitnessCheck verify_au_witness(const AuInstance& inst, const AuWitnessPackage& pkg, const Tolerances& tol,
                                 int eps_samples) {
  const int d = inst.din(), e = inst.dout();
  if (pkg.h0.rows() != d || pkg.h0.cols() != d || pkg.h1.rows() != e || pkg.h1.cols() != e || pkg.h2.rows() != e ||
      pkg.h2.cols() != e)
    throw Error(ErrorKind::DimensionMismatch, "verify_au_witness: witness dimensions do not match the instance");
  AuWitnessCheck c;
  Mat base = tensor(inst.rho1, pkg.h1) + tensor(inst.rho2, pkg.h2);
  auto evaluate = [&](double eps, double& me, double& obj) {
    Mat h0 = pkg.h0 + eps * identity(d);
    me = min_eig(hermitian_part(Mat(base + tensor(h0, identity(e)))));
    obj = h0.trace().real() + (inst.rho1_out * pkg.h1.transpose()).trace().real() +
          (inst.rho2_out * pkg.h2.transpose()).trace().real();
  };
  evaluate(0, c.min_eig, c.objective);
  if (c.min_eig < -tol.psd)
    c.reason = "operator is not PSD";
  else if (!(pkg.objective_bound < -tol.witness_margin))
    c.reason = "objective bound is not below the witness margin";
  else if (c.objective > pkg.objective_bound)
    c.reason = "objective exceeds the bound";
  c.valid = c.reason.empty();
  if (pkg.eps_range) {
    auto [lo, hi] = *pkg.eps_range;
    const int n = std::max(eps_samples, 2);
    for (int i = 0; i < n; ++i) {
      EpsCheck ec;
      ec.eps = lo + (hi - lo) * i / (n - 1);
      evaluate(ec.eps, ec.min_eig, ec.objective);
      ec.valid = ec.min_eig >= -tol.psd && ec.objective < -tol.witness_margin;
      if (!ec.valid && c.valid) {
        c.valid = false;
        c.reason = "shifted variant at eps = " + std::to_string(ec.eps) + " is not a witness";
      }
      c.eps_checks.push_back(ec);
    }
  }
  return c;
}

SearchReport transpose_counterexample_search(int d, int trials, std::uint64_t seed, const Tolerances& tol) {
  if (d < 1 || trials < 1) throw Error(ErrorKind::InvalidArgument, "search: need d >= 1 and trials >= 1");
  SearchReport rep;
  rep.d = d;
  rep.trials = trials;
  rep.seed = seed;
  for (int t = 0; t < trials; ++t) {
    std::seed_seq sq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(t)};
    std::mt19937_64 rng(sq);
    AuInstance inst;
    inst.rho1 = random_density_unit_square(d, rng);
    inst.rho2 = random_density_unit_square(d, rng);
    inst.rho1_out = inst.rho1.transpose();
    inst.rho2_out = inst.rho2.transpose();
    if (au_condition(inst, tol).status != AuStatus::Holds) ++rep.au_failures;
    ChannelResult ch = channel_extension(to_spec(inst), tol);
    if (ch.status != ChannelStatus::NotExists || !ch.witness || ch.delta <= tol.witness_margin) continue;
    AuWitnessPackage pkg{ch.witness->h0.at(0), ch.witness->h.at(0), ch.witness->h.at(1), 0, std::nullopt};
    double obj = pkg.h0.trace().real() + (inst.rho1_out * pkg.h1.transpose()).trace().real() +
                 (inst.rho2_out * pkg.h2.transpose()).trace().real();
    pkg.objective_bound = obj * (1 - 1e-9);
    if (!verify_au_witness(inst, pkg, tol).valid) continue;
    rep.hits.push_back({t, inst, ch.delta, pkg});
  }
  rep.hit_fraction = double(rep.hits.size()) / trials;
  return rep;
}

AuInstance embed_counterexample(const AuInstance& base, int d, int d_out) {
  if (d < 3 || d_out < 3) throw Error(ErrorKind::InvalidArgument, "embed_counterexample: target dimensions must be >= 3");
  if (d < base.din() || d_out < base.dout())
    throw Error(ErrorKind::InvalidArgument, "embed_counterexample: target dimensions below the base instance");
  auto pad = [](const Mat& m, int n) {
    Mat r = Mat::Zero(n, n);
    r.topLeftCorner(m.rows(), m.cols()) = m;
    return r;
  };
  return {pad(base.rho1, d), pad(base.rho2, d), pad(base.rho1_out, d_out), pad(base.rho2_out, d_out)};
}

}  // namespace cpext
