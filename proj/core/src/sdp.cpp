#include "cpext/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace cpext::sdp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::PrimalInfeasible: return "PrimalInfeasible";
    case Status::DualInfeasible: return "DualInfeasible";
    case Status::Marginal: return "Marginal";
    case Status::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible: return "Feasible";
    case Feasibility::Infeasible: return "Infeasible";
    case Feasibility::Marginal: return "Marginal";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inner(const SpMat& a, const RMat& x, Cone cone) {
  double s = 0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      s += it.value() * (cone == Cone::Psd ? x(it.row(), it.col()) : x(it.row(), 0));
  return s;
}

void axpy(RMat& s, double a, const SpMat& m, Cone cone) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      if (cone == Cone::Psd)
        s(it.row(), it.col()) += a * it.value();
      else
        s(it.row(), 0) += a * it.value();
    }
}

RMat zero_var(const Block& b) { return b.cone == Cone::Psd ? RMat::Zero(b.n, b.n) : RMat::Zero(b.n, 1); }

RMat scaled_identity(const Block& b, double v) {
  return b.cone == Cone::Psd ? RMat(v * RMat::Identity(b.n, b.n)) : RMat(RMat::Constant(b.n, 1, v));
}

double dot(const RMat& a, const RMat& b) { return a.cwiseProduct(b).sum(); }

RMat sym(const RMat& a) { return 0.5 * (a + a.transpose()); }

double block_min(const Block& b, const RMat& x) {
  if (b.cone == Cone::Nonneg) return x.minCoeff();
  Eigen::SelfAdjointEigenSolver<RMat> es(sym(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double block_max(const Block& b, const RMat& x) {
  if (b.cone == Cone::Nonneg) return x.maxCoeff();
  Eigen::SelfAdjointEigenSolver<RMat> es(sym(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(b.n - 1);
}

double frob2(const SpMat& a) {
  double s = 0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) s += it.value() * it.value();
  return s;
}

// Internal, presolved and scaled problem in per-block column layout.
struct Work {
  std::vector<Block> blocks;
  int m = 0, nf = 0;
  double ntot = 0;
  std::vector<std::vector<std::pair<int, SpMat>>> cols;
  std::vector<RMat> C;
  RVec cf, b;
  RMat F;
  double normb = 0, normc = 0;
};

RVec Aop(const Work& w, const std::vector<RMat>& X, const RVec& xf) {
  RVec r = RVec::Zero(w.m);
  if (w.nf > 0) r += w.F * xf;
  for (size_t b = 0; b < w.blocks.size(); ++b)
    for (const auto& [k, a] : w.cols[b]) r(k) += inner(a, X[b], w.blocks[b].cone);
  return r;
}

std::vector<RMat> ATop(const Work& w, const RVec& y) {
  std::vector<RMat> s;
  for (size_t b = 0; b < w.blocks.size(); ++b) {
    RMat t = zero_var(w.blocks[b]);
    for (const auto& [k, a] : w.cols[b]) axpy(t, y(k), a, w.blocks[b].cone);
    s.push_back(std::move(t));
  }
  return s;
}

struct Presolved {
  std::vector<int> keep;
  bool infeasible = false;
  RVec ray;
};

// Drops linearly dependent rows; an inconsistent dependent row yields a ray.
Presolved presolve(const Problem& p, bool enabled) {
  Presolved out;
  const int m = p.rows.size();
  if (!enabled || m == 0) {
    for (int k = 0; k < m; ++k) out.keep.push_back(k);
    return out;
  }
  std::vector<int> offset(p.blocks.size());
  int nvar = 0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    offset[b] = nvar;
    const int n = p.blocks[b].n;
    nvar += p.blocks[b].cone == Cone::Psd ? n * (n + 1) / 2 : n;
  }
  const int free_off = nvar;
  nvar += p.nfree;

  RMat At = RMat::Zero(nvar, m);
  RVec bn(m), norms(m);
  const double s2 = std::sqrt(2.0);
  for (int k = 0; k < m; ++k) {
    const Row& row = p.rows[k];
    for (const Term& t : row.terms) {
      const Block& blk = p.blocks[t.block];
      for (int o = 0; o < t.coeff.outerSize(); ++o)
        for (SpMat::InnerIterator it(t.coeff, o); it; ++it) {
          int r = it.row(), c = it.col();
          if (blk.cone == Cone::Nonneg) {
            At(offset[t.block] + r, k) += it.value();
          } else if (r <= c) {
            // svec index of (r,c), column-major upper triangle
            int idx = offset[t.block] + c * (c + 1) / 2 + r;
            At(idx, k) += (r == c ? 1.0 : s2) * it.value();
          }
        }
    }
    for (const auto& [j, v] : row.free) At(free_off + j, k) += v;
    norms(k) = At.col(k).norm();
    bn(k) = row.rhs;
  }

  std::vector<int> nonzero;
  for (int k = 0; k < m; ++k) {
    if (norms(k) > 0) {
      nonzero.push_back(k);
      At.col(k) /= norms(k);
      bn(k) /= norms(k);
    } else if (std::abs(p.rows[k].rhs) > 0) {
      out.infeasible = true;
      out.ray = RVec::Zero(m);
      out.ray(k) = p.rows[k].rhs > 0 ? 1.0 : -1.0;
      return out;
    }
  }
  if (nonzero.empty()) return out;

  RMat An(nvar, nonzero.size());
  for (size_t q = 0; q < nonzero.size(); ++q) An.col(q) = At.col(nonzero[q]);
  Eigen::ColPivHouseholderQR<RMat> qr(An);
  qr.setThreshold(1e-10);
  const int rank = qr.rank();
  std::vector<int> kept, dropped;
  for (int q = 0; q < static_cast<int>(nonzero.size()); ++q) {
    int pos = -1;
    for (int t = 0; t < static_cast<int>(nonzero.size()); ++t)
      if (qr.colsPermutation().indices()(t) == q) pos = t;
    (pos < rank ? kept : dropped).push_back(nonzero[q]);
  }
  out.keep = kept;
  if (dropped.empty()) return out;

  RMat Ak(nvar, kept.size());
  RVec bk(kept.size());
  for (size_t q = 0; q < kept.size(); ++q) {
    Ak.col(q) = At.col(kept[q]);
    bk(q) = bn(kept[q]);
  }
  Eigen::HouseholderQR<RMat> hq(Ak);
  for (int k : dropped) {
    RVec coef = hq.solve(RVec(At.col(k)));
    double mismatch = bn(k) - coef.dot(bk);
    double scale = 1.0 + std::abs(bn(k)) + coef.cwiseAbs().dot(bk.cwiseAbs());
    if (std::abs(mismatch) > 1e-9 * scale) {
      out.infeasible = true;
      out.ray = RVec::Zero(m);
      double sgn = mismatch > 0 ? 1.0 : -1.0;
      out.ray(k) = sgn / norms(k);
      for (size_t q = 0; q < kept.size(); ++q) out.ray(kept[q]) = -sgn * coef(q) / norms(kept[q]);
      return out;
    }
  }
  return out;
}

struct Scaling {
  std::vector<int> keep;
  RVec row_norm;
  double beta = 1, gamma = 1;
};

Work build_work(const Problem& p, const std::vector<int>& keep, Scaling& sc) {
  Work w;
  w.blocks = p.blocks;
  w.m = keep.size();
  w.nf = p.nfree;
  for (const Block& b : p.blocks) w.ntot += b.n;
  w.cols.resize(p.blocks.size());
  w.F = RMat::Zero(w.m, w.nf);
  w.b = RVec::Zero(w.m);
  sc.keep = keep;
  sc.row_norm = RVec::Ones(w.m);

  for (int q = 0; q < w.m; ++q) {
    const Row& row = p.rows[keep[q]];
    double n2 = 0;
    for (const Term& t : row.terms) n2 += frob2(t.coeff);
    for (const auto& fv : row.free) n2 += fv.second * fv.second;
    double nr = n2 > 0 ? std::sqrt(n2) : 1.0;
    sc.row_norm(q) = nr;
    for (const Term& t : row.terms) w.cols[t.block].emplace_back(q, t.coeff / nr);
    for (const auto& [j, v] : row.free) w.F(q, j) += v / nr;
    w.b(q) = row.rhs / nr;
  }
  // merge duplicate (row, block) entries
  for (auto& col : w.cols) {
    std::map<int, SpMat> merged;
    for (auto& [k, a] : col) {
      auto it = merged.find(k);
      if (it == merged.end())
        merged.emplace(k, a);
      else
        it->second += a;
    }
    col.assign(merged.begin(), merged.end());
  }

  double cn2 = 0;
  w.C.resize(p.blocks.size());
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    w.C[b] = zero_var(p.blocks[b]);
    if (b < p.c.size() && p.c[b].size() > 0) axpy(w.C[b], 1.0, p.c[b], p.blocks[b].cone);
    cn2 += w.C[b].squaredNorm();
  }
  w.cf = RVec::Zero(w.nf);
  if (p.cfree.size() == w.nf) w.cf = p.cfree;
  cn2 += w.cf.squaredNorm();

  sc.beta = std::max(1.0, w.b.norm());
  sc.gamma = std::max(1.0, std::sqrt(cn2));
  w.b /= sc.beta;
  for (auto& c : w.C) c /= sc.gamma;
  w.cf /= sc.gamma;
  w.normb = w.b.norm();
  w.normc = std::sqrt(cn2) / sc.gamma;
  return w;
}

struct State {
  std::vector<RMat> X, Z;
  RVec xf, y;
};

struct Factors {
  std::vector<Eigen::LLT<RMat>> lx, lz;
  std::vector<RMat> zinv;
  Eigen::LLT<RMat> mllt;
  RMat minv_f;
  Eigen::LDLT<RMat> sf;
};

bool factor_blocks(const Work& w, const State& s, Factors& f) {
  const size_t nb = w.blocks.size();
  f.lx.assign(nb, Eigen::LLT<RMat>());
  f.lz.assign(nb, Eigen::LLT<RMat>());
  f.zinv.assign(nb, RMat());
  for (size_t b = 0; b < nb; ++b) {
    if (w.blocks[b].cone == Cone::Nonneg) {
      if (s.X[b].minCoeff() <= 0 || s.Z[b].minCoeff() <= 0) return false;
      f.zinv[b] = s.Z[b].cwiseInverse();
      continue;
    }
    f.lx[b].compute(s.X[b]);
    f.lz[b].compute(s.Z[b]);
    if (f.lx[b].info() != Eigen::Success || f.lz[b].info() != Eigen::Success) return false;
    f.zinv[b] = f.lz[b].solve(RMat::Identity(w.blocks[b].n, w.blocks[b].n));
    f.zinv[b] = sym(f.zinv[b]);
  }
  return true;
}

RMat schur(const Work& w, const State& s, const Factors& f) {
  RMat M = RMat::Zero(w.m, w.m);
  for (size_t b = 0; b < w.blocks.size(); ++b) {
    const auto& col = w.cols[b];
    if (col.empty()) continue;
    const Block& blk = w.blocks[b];
    if (blk.cone == Cone::Nonneg) {
      RMat a = RMat::Zero(col.size(), blk.n);
      for (size_t q = 0; q < col.size(); ++q)
        for (int o = 0; o < col[q].second.outerSize(); ++o)
          for (SpMat::InnerIterator it(col[q].second, o); it; ++it) a(q, it.row()) += it.value();
      RVec dvec = s.X[b].col(0).cwiseProduct(f.zinv[b].col(0));
      RMat blockm = a * dvec.asDiagonal() * a.transpose();
      for (size_t i = 0; i < col.size(); ++i)
        for (size_t j = 0; j < col.size(); ++j) M(col[i].first, col[j].first) += blockm(i, j);
      continue;
    }
    for (size_t j = 0; j < col.size(); ++j) {
      RMat g = (f.zinv[b] * col[j].second) * s.X[b];
      for (size_t i = 0; i < col.size(); ++i) M(col[i].first, col[j].first) += inner(col[i].second, g, Cone::Psd);
    }
  }
  return sym(M);
}

bool factor_schur(const Work& w, RMat M, Factors& f) {
  double reg = 0;
  const double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 6; ++attempt) {
    if (reg > 0) M.diagonal().array() += reg;
    f.mllt.compute(M);
    if (f.mllt.info() == Eigen::Success) break;
    reg = reg == 0 ? 1e-14 * scale : reg * 100;
    if (attempt == 5) return false;
  }
  if (w.nf > 0) {
    f.minv_f = f.mllt.solve(w.F);
    f.sf.compute(w.F.transpose() * f.minv_f);
    if (f.sf.info() != Eigen::Success) return false;
  }
  return true;
}

void solve_schur(const Work& w, const Factors& f, const RVec& h, const RVec& rf, RVec& dy, RVec& dxf) {
  RVec mh = f.mllt.solve(h);
  if (w.nf > 0) {
    dxf = f.sf.solve(w.F.transpose() * mh - rf);
    dy = mh - f.minv_f * dxf;
  } else {
    dxf = RVec::Zero(0);
    dy = mh;
  }
}

struct Direction {
  std::vector<RMat> dX, dZ;
  RVec dy, dxf;
};

Direction direction(const Work& w, const State& s, const Factors& f, const RVec& rp,
                    const std::vector<RMat>& Rd, const RVec& rf, double target,
                    const std::vector<RMat>* corr) {
  const size_t nb = w.blocks.size();
  std::vector<RMat> W(nb);
  for (size_t b = 0; b < nb; ++b) {
    if (w.blocks[b].cone == Cone::Nonneg) {
      RVec x = s.X[b].col(0), zi = f.zinv[b].col(0), rd = Rd[b].col(0);
      RVec v = target * zi - x - rd.cwiseProduct(x).cwiseProduct(zi);
      if (corr) v += (*corr)[b].col(0);
      W[b] = v;
    } else {
      W[b] = target * f.zinv[b] - s.X[b] - f.zinv[b] * Rd[b] * s.X[b];
      if (corr) W[b] += (*corr)[b];
    }
  }
  RVec h = rp - Aop(w, W, RVec::Zero(w.nf));
  Direction d;
  solve_schur(w, f, h, rf, d.dy, d.dxf);
  std::vector<RMat> aty = ATop(w, d.dy);
  d.dX.resize(nb);
  d.dZ.resize(nb);
  for (size_t b = 0; b < nb; ++b) {
    d.dZ[b] = Rd[b] - aty[b];
    if (w.blocks[b].cone == Cone::Nonneg) {
      RVec x = s.X[b].col(0), zi = f.zinv[b].col(0);
      RVec v = target * zi - x - d.dZ[b].col(0).cwiseProduct(x).cwiseProduct(zi);
      if (corr) v += (*corr)[b].col(0);
      d.dX[b] = v;
    } else {
      RMat v = target * f.zinv[b] - s.X[b] - f.zinv[b] * d.dZ[b] * s.X[b];
      if (corr) v += (*corr)[b];
      d.dX[b] = sym(v);
    }
  }
  return d;
}

double max_step(const Block& blk, const RMat& x, const Eigen::LLT<RMat>& l, const RMat& dx) {
  if (blk.cone == Cone::Nonneg) {
    double a = kInf;
    for (int i = 0; i < blk.n; ++i)
      if (dx(i, 0) < 0) a = std::min(a, -x(i, 0) / dx(i, 0));
    return a;
  }
  RMat t = l.matrixL().solve(dx);
  RMat wm = l.matrixL().solve(RMat(t.transpose()));
  Eigen::SelfAdjointEigenSolver<RMat> es(sym(wm), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues()(0);
  return lmin < 0 ? -1.0 / lmin : kInf;
}

struct StepLengths {
  double p, d;
};

StepLengths step_lengths(const Work& w, const State& s, const Factors& f, const Direction& d) {
  StepLengths a{kInf, kInf};
  for (size_t b = 0; b < w.blocks.size(); ++b) {
    a.p = std::min(a.p, max_step(w.blocks[b], s.X[b], f.lx[b], d.dX[b]));
    a.d = std::min(a.d, max_step(w.blocks[b], s.Z[b], f.lz[b], d.dZ[b]));
  }
  return a;
}

struct IpmOut {
  Status status = Status::NumericFailure;
  State s;
  int iters = 0;
  std::vector<IterLog> hist;
  std::string msg;
  bool primal_ray = false, dual_ray = false;
};

IpmOut ipm(const Work& w, const Options& o) {
  IpmOut out;
  const size_t nb = w.blocks.size();
  State s;
  const double xi = std::max(10.0, std::sqrt(w.ntot));
  for (size_t b = 0; b < nb; ++b) {
    s.X.push_back(scaled_identity(w.blocks[b], xi));
    s.Z.push_back(scaled_identity(w.blocks[b], xi));
  }
  s.xf = RVec::Zero(w.nf);
  s.y = RVec::Zero(w.m);

  const double tight_feas = 1e-2 * o.feas_tol, tight_gap = 1e-2 * o.gap_tol;
  State best;
  double best_score = kInf;
  bool have_best = false;
  int since_loose = 0, stalls = 0;

  for (int it = 0; it < o.max_iter; ++it) {
    out.iters = it + 1;
    RVec rp = w.b - Aop(w, s.X, s.xf);
    std::vector<RMat> aty = ATop(w, s.y);
    std::vector<RMat> Rd(nb);
    double rd2 = 0, pobj = 0, xz = 0;
    for (size_t b = 0; b < nb; ++b) {
      Rd[b] = w.C[b] - aty[b] - s.Z[b];
      rd2 += Rd[b].squaredNorm();
      pobj += dot(w.C[b], s.X[b]);
      xz += dot(s.X[b], s.Z[b]);
    }
    RVec rf = w.cf - (w.nf > 0 ? RVec(w.F.transpose() * s.y) : RVec::Zero(0));
    rd2 += rf.squaredNorm();
    if (w.nf > 0) pobj += w.cf.dot(s.xf);
    const double dobj = w.b.dot(s.y);
    const double mu = xz / w.ntot;
    const double pres = rp.norm() / (1 + w.normb);
    const double dres = std::sqrt(rd2) / (1 + w.normc);
    const double relgap = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));
    out.hist.push_back({pobj, dobj, pres, dres, mu});
    if (o.verbose > 1)
      std::fprintf(stderr, "%3d pobj %+.10e dobj %+.10e pres %.2e dres %.2e gap %.2e mu %.2e\n", it, pobj, dobj, pres,
                   dres, relgap, mu);

    const bool loose = pres <= o.feas_tol && dres <= o.feas_tol && relgap <= o.gap_tol;
    const double score = std::max({pres / o.feas_tol, dres / o.feas_tol, relgap / o.gap_tol});
    if (score < best_score) {
      best_score = score;
      best = s;
      have_best = true;
    }
    if (pres <= tight_feas && dres <= tight_feas && relgap <= tight_gap) break;
    if (loose && ++since_loose > 8) break;
    if (!std::isfinite(pobj) || !std::isfinite(dobj)) {
      out.msg = "non-finite iterate";
      break;
    }

    if (!loose) {
      // improving-ray tests on the scaled data
      const double ynorm = s.y.cwiseAbs().maxCoeff();
      if (dobj > 0 && ynorm > 1e4) {
        double viol = 0;
        for (size_t b = 0; b < nb; ++b) viol = std::max(viol, block_max(w.blocks[b], aty[b]) / dobj);
        if (w.nf > 0) viol = std::max(viol, (w.F.transpose() * s.y).cwiseAbs().maxCoeff() / dobj);
        if (viol <= o.feas_tol) {
          out.primal_ray = true;
          out.s = s;
          out.status = Status::PrimalInfeasible;
          return out;
        }
      }
      double xnorm = 0;
      for (size_t b = 0; b < nb; ++b) xnorm = std::max(xnorm, s.X[b].cwiseAbs().maxCoeff());
      if (pobj < 0 && xnorm > 1e4) {
        RVec ax = Aop(w, s.X, s.xf) / (-pobj);
        if (ax.size() == 0 || ax.cwiseAbs().maxCoeff() <= o.feas_tol) {
          out.dual_ray = true;
          out.s = s;
          out.status = Status::DualInfeasible;
          return out;
        }
      }
    }

    Factors f;
    if (!factor_blocks(w, s, f)) {
      out.msg = "iterate left the cone interior";
      break;
    }
    if (!factor_schur(w, schur(w, s, f), f)) {
      out.msg = "Schur complement factorization failed";
      break;
    }

    Direction pred = direction(w, s, f, rp, Rd, rf, 0.0, nullptr);
    StepLengths ap = step_lengths(w, s, f, pred);
    const double app = std::min(1.0, ap.p), apd = std::min(1.0, ap.d);
    double xz_aff = 0;
    for (size_t b = 0; b < nb; ++b) xz_aff += dot(s.X[b] + app * pred.dX[b], s.Z[b] + apd * pred.dZ[b]);
    const double mu_aff = std::max(0.0, xz_aff / w.ntot);
    double sigma = mu > 0 ? std::pow(mu_aff / mu, 3) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    std::vector<RMat> corr(nb);
    for (size_t b = 0; b < nb; ++b) {
      if (w.blocks[b].cone == Cone::Nonneg)
        corr[b] = -pred.dZ[b].cwiseProduct(pred.dX[b]).cwiseProduct(f.zinv[b]);
      else
        corr[b] = -f.zinv[b] * pred.dZ[b] * pred.dX[b];
    }
    Direction d = direction(w, s, f, rp, Rd, rf, sigma * mu, &corr);
    StepLengths a = step_lengths(w, s, f, d);
    const double tau = 0.95;
    const double alp = std::min(1.0, tau * a.p), ald = std::min(1.0, tau * a.d);
    if (!std::isfinite(alp) || !std::isfinite(ald)) {
      out.msg = "non-finite step";
      break;
    }
    for (size_t b = 0; b < nb; ++b) {
      s.X[b] += alp * d.dX[b];
      s.Z[b] += ald * d.dZ[b];
    }
    if (w.nf > 0) s.xf += alp * d.dxf;
    s.y += ald * d.dy;
    if (std::max(alp, ald) < 1e-10) {
      if (++stalls >= 3) {
        out.msg = "stalled";
        break;
      }
    } else {
      stalls = 0;
    }
  }
  out.s = have_best ? best : s;
  if (best_score <= 1.0)
    out.status = Status::Optimal;
  else if (best_score <= 100.0)
    out.status = Status::Marginal;
  else
    out.status = Status::NumericFailure;
  if (out.msg.empty() && out.status != Status::Optimal) out.msg = "iteration limit reached";
  return out;
}

}  // namespace

void Problem::check() const {
  if (c.size() != blocks.size()) throw Error(ErrorKind::InvalidArgument, "sdp: objective needs one entry per block");
  if (cfree.size() != 0 && cfree.size() != nfree) throw Error(ErrorKind::InvalidArgument, "sdp: cfree length");
  if (!cfree.allFinite()) throw Error(ErrorKind::InvalidArgument, "sdp: non-finite objective");
  auto check_coeff = [&](const SpMat& a, const Block& b, const char* where) {
    if (a.size() == 0) return;
    if (a.rows() != b.n || a.cols() != b.n) throw Error(ErrorKind::DimensionMismatch, std::string("sdp: ") + where + " size");
    for (int o = 0; o < a.outerSize(); ++o)
      for (SpMat::InnerIterator it(a, o); it; ++it) {
        if (!std::isfinite(it.value())) throw Error(ErrorKind::InvalidArgument, std::string("sdp: non-finite ") + where);
        if (b.cone == Cone::Nonneg && it.row() != it.col())
          throw Error(ErrorKind::InvalidArgument, std::string("sdp: off-diagonal ") + where + " on orthant block");
      }
    if (b.cone == Cone::Psd) {
      SpMat d = a - SpMat(a.transpose());
      double scale = 1.0;
      for (int o = 0; o < a.outerSize(); ++o)
        for (SpMat::InnerIterator it(a, o); it; ++it) scale = std::max(scale, std::abs(it.value()));
      for (int o = 0; o < d.outerSize(); ++o)
        for (SpMat::InnerIterator it(d, o); it; ++it)
          if (std::abs(it.value()) > 1e-12 * scale)
            throw Error(ErrorKind::InvalidArgument, std::string("sdp: asymmetric ") + where);
    }
  };
  for (const Block& b : blocks)
    if (b.n <= 0) throw Error(ErrorKind::InvalidArgument, "sdp: empty block");
  for (size_t b = 0; b < blocks.size(); ++b) check_coeff(c[b], blocks[b], "objective");
  for (const Row& r : rows) {
    if (!std::isfinite(r.rhs)) throw Error(ErrorKind::InvalidArgument, "sdp: non-finite right-hand side");
    for (const Term& t : r.terms) {
      if (t.block < 0 || t.block >= static_cast<int>(blocks.size()))
        throw Error(ErrorKind::InvalidArgument, "sdp: block index out of range");
      check_coeff(t.coeff, blocks[t.block], "constraint");
    }
    for (const auto& fv : r.free) {
      if (fv.first < 0 || fv.first >= nfree) throw Error(ErrorKind::InvalidArgument, "sdp: free index out of range");
      if (!std::isfinite(fv.second)) throw Error(ErrorKind::InvalidArgument, "sdp: non-finite coefficient");
    }
  }
}

RVec apply_rows(const Problem& p, const std::vector<RMat>& X, const RVec& xfree) {
  RVec r(p.rows.size());
  for (size_t k = 0; k < p.rows.size(); ++k) {
    double s = 0;
    for (const Term& t : p.rows[k].terms) s += inner(t.coeff, X[t.block], p.blocks[t.block].cone);
    for (const auto& [j, v] : p.rows[k].free) s += v * xfree(j);
    r(k) = s;
  }
  return r;
}

std::vector<RMat> adjoint_rows(const Problem& p, const RVec& y) {
  std::vector<RMat> s;
  for (const Block& b : p.blocks) s.push_back(zero_var(b));
  for (size_t k = 0; k < p.rows.size(); ++k)
    for (const Term& t : p.rows[k].terms) axpy(s[t.block], y(k), t.coeff, p.blocks[t.block].cone);
  for (size_t b = 0; b < p.blocks.size(); ++b)
    if (p.blocks[b].cone == Cone::Psd) s[b] = sym(s[b]);
  return s;
}

RVec adjoint_free(const Problem& p, const RVec& y) {
  RVec r = RVec::Zero(p.nfree);
  for (size_t k = 0; k < p.rows.size(); ++k)
    for (const auto& [j, v] : p.rows[k].free) r(j) += v * y(k);
  return r;
}

double objective_value(const Problem& p, const std::vector<RMat>& X, const RVec& xfree) {
  double s = 0;
  for (size_t b = 0; b < p.blocks.size(); ++b)
    if (p.c[b].size() > 0) s += inner(p.c[b], X[b], p.blocks[b].cone);
  if (p.cfree.size() == p.nfree && p.nfree > 0) s += p.cfree.dot(xfree);
  return s;
}

double cone_min(const Problem& p, const std::vector<RMat>& X) {
  double m = kInf;
  for (size_t b = 0; b < p.blocks.size(); ++b) m = std::min(m, block_min(p.blocks[b], X[b]));
  return m;
}

double farkas_violation(const Problem& p, const RVec& y) {
  RVec b(p.rows.size());
  for (size_t k = 0; k < p.rows.size(); ++k) b(k) = p.rows[k].rhs;
  const double by = b.dot(y);
  if (!(by > 0)) return kInf;
  RVec yh = y / by;
  std::vector<RMat> s = adjoint_rows(p, yh);
  double viol = 0;
  for (size_t q = 0; q < p.blocks.size(); ++q) viol = std::max(viol, block_max(p.blocks[q], s[q]));
  RVec fr = adjoint_free(p, yh);
  if (fr.size() > 0) viol = std::max(viol, fr.cwiseAbs().maxCoeff());
  return viol;
}

Solution solve(const Problem& p, const Options& o) {
  p.check();
  if (!o.dump_path.empty()) {
    std::ofstream f(o.dump_path);
    f << debug_json(p);
  }
  Solution sol;
  const int m = p.rows.size();
  Presolved pre = presolve(p, o.presolve);
  if (pre.infeasible) {
    Certificate c;
    c.kind = Status::PrimalInfeasible;
    RVec b(m);
    for (int k = 0; k < m; ++k) b(k) = p.rows[k].rhs;
    c.y = pre.ray / b.dot(pre.ray);
    c.violation = farkas_violation(p, c.y);
    sol.status = Status::PrimalInfeasible;
    sol.certificate = c;
    sol.message = "inconsistent linearly dependent equality rows";
    return sol;
  }

  Scaling sc;
  Work w = build_work(p, pre.keep, sc);
  IpmOut r = ipm(w, o);
  sol.iterations = r.iters;
  sol.history = r.hist;
  sol.message = r.msg;

  // undo scaling
  const size_t nb = p.blocks.size();
  sol.X.resize(nb);
  sol.Z.resize(nb);
  for (size_t b = 0; b < nb; ++b) {
    sol.X[b] = sc.beta * r.s.X[b];
    sol.Z[b] = sc.gamma * r.s.Z[b];
  }
  sol.xfree = sc.beta * r.s.xf;
  sol.y = RVec::Zero(m);
  for (size_t q = 0; q < pre.keep.size(); ++q) sol.y(pre.keep[q]) = sc.gamma * r.s.y(q) / sc.row_norm(q);

  RVec b(m);
  for (int k = 0; k < m; ++k) b(k) = p.rows[k].rhs;

  if (r.primal_ray) {
    Certificate c;
    c.kind = Status::PrimalInfeasible;
    c.y = sol.y / b.dot(sol.y);
    c.violation = farkas_violation(p, c.y);
    if (c.violation <= std::max(o.feas_tol, 1e-6)) {
      sol.status = Status::PrimalInfeasible;
      sol.certificate = c;
      sol.message = "primal infeasible (dual improving ray)";
      return sol;
    }
    r.status = Status::NumericFailure;
  }
  if (r.dual_ray) {
    Certificate c;
    c.kind = Status::DualInfeasible;
    const double cx = -objective_value(p, sol.X, sol.xfree);
    if (cx > 0) {
      c.X = sol.X;
      for (auto& x : c.X) x /= cx;
      c.xfree = sol.xfree / cx;
      RVec ax = apply_rows(p, c.X, c.xfree);
      c.violation = std::max(ax.size() ? ax.cwiseAbs().maxCoeff() : 0.0, std::max(0.0, -cone_min(p, c.X)));
      if (c.violation <= std::max(o.feas_tol, 1e-6)) {
        sol.status = Status::DualInfeasible;
        sol.certificate = c;
        sol.message = "dual infeasible (primal improving ray)";
        return sol;
      }
    }
    r.status = Status::NumericFailure;
  }

  sol.status = r.status;
  sol.primal_obj = objective_value(p, sol.X, sol.xfree);
  sol.dual_obj = b.dot(sol.y);
  sol.gap = std::abs(sol.primal_obj - sol.dual_obj);
  RVec rp = b - apply_rows(p, sol.X, sol.xfree);
  sol.primal_res = m > 0 ? rp.norm() / (1 + b.norm()) : 0.0;
  std::vector<RMat> aty = adjoint_rows(p, sol.y);
  double rd2 = 0, cn2 = 0;
  for (size_t q = 0; q < nb; ++q) {
    RMat c = zero_var(p.blocks[q]);
    if (p.c[q].size() > 0) axpy(c, 1.0, p.c[q], p.blocks[q].cone);
    rd2 += (c - aty[q] - sol.Z[q]).squaredNorm();
    cn2 += c.squaredNorm();
  }
  if (p.nfree > 0) {
    RVec cf = p.cfree.size() == p.nfree ? p.cfree : RVec::Zero(p.nfree);
    rd2 += (cf - adjoint_free(p, sol.y)).squaredNorm();
    cn2 += cf.squaredNorm();
  }
  sol.dual_res = std::sqrt(rd2) / (1 + std::sqrt(cn2));
  return sol;
}

namespace {

struct TripletRow {
  std::map<int, std::vector<Eigen::Triplet<double>>> blocks;
  std::vector<std::pair<int, double>> free;
  double rhs = 0;
};

Row to_row(const std::vector<Block>& blocks, TripletRow&& tr) {
  Row r;
  for (auto& [b, trip] : tr.blocks) {
    SpMat a(blocks[b].n, blocks[b].n);
    a.setFromTriplets(trip.begin(), trip.end());
    r.terms.push_back({b, std::move(a)});
  }
  r.free = std::move(tr.free);
  r.rhs = tr.rhs;
  return r;
}

SpMat diag_ones(int n) {
  SpMat a(n, n);
  a.setIdentity();
  return a;
}

}  // namespace

FeasibilityResult feasibility(const Problem& p, const Options& o) {
  p.check();
  FeasibilityResult out;
  const int m = p.rows.size();
  const int nf = p.nfree;
  RVec b(m);
  for (int k = 0; k < m; ++k) b(k) = p.rows[k].rhs;
  const double bscale = 1.0 + (m ? b.cwiseAbs().maxCoeff() : 0.0);

  // Phase A: minimize the l1 residual plus a small trace penalty.
  {
    Problem q;
    q.blocks = p.blocks;
    const int nb0 = p.blocks.size();
    const int ub = q.blocks.size();
    q.blocks.push_back({Cone::Nonneg, std::max(1, 2 * m)});
    int fb = -1;
    if (nf > 0) {
      fb = q.blocks.size();
      q.blocks.push_back({Cone::Nonneg, 2 * nf});
    }
    const double eps = 1.0 / o.trace_bound;
    q.c.assign(q.blocks.size(), SpMat());
    for (int bb = 0; bb < nb0; ++bb) q.c[bb] = eps * diag_ones(p.blocks[bb].n);
    if (fb >= 0) q.c[fb] = eps * diag_ones(2 * nf);
    {
      SpMat cu(q.blocks[ub].n, q.blocks[ub].n);
      std::vector<Eigen::Triplet<double>> t;
      for (int k = 0; k < 2 * m; ++k) t.emplace_back(k, k, 1.0);
      cu.setFromTriplets(t.begin(), t.end());
      q.c[ub] = cu;
    }
    for (int k = 0; k < m; ++k) {
      TripletRow tr;
      for (const Term& t : p.rows[k].terms)
        for (int oo = 0; oo < t.coeff.outerSize(); ++oo)
          for (SpMat::InnerIterator it(t.coeff, oo); it; ++it)
            tr.blocks[t.block].emplace_back(it.row(), it.col(), it.value());
      for (const auto& [j, v] : p.rows[k].free) {
        tr.blocks[fb].emplace_back(j, j, v);
        tr.blocks[fb].emplace_back(nf + j, nf + j, -v);
      }
      tr.blocks[ub].emplace_back(k, k, 1.0);
      tr.blocks[ub].emplace_back(m + k, m + k, -1.0);
      tr.rhs = p.rows[k].rhs;
      q.rows.push_back(to_row(q.blocks, std::move(tr)));
    }

    Solution s = solve(q, o);
    if (s.status == Status::Optimal || s.status == Status::Marginal) {
      out.residual = kInf;
      std::vector<RMat> X(s.X.begin(), s.X.begin() + nb0);
      RVec xf = RVec::Zero(nf);
      if (fb >= 0)
        for (int j = 0; j < nf; ++j) xf(j) = s.X[fb](j, 0) - s.X[fb](nf + j, 0);
      RVec res = b - apply_rows(p, X, xf);
      const double rmax = m ? res.cwiseAbs().maxCoeff() : 0.0;
      const double cmin = X.empty() ? 0.0 : cone_min(p, X);
      if (rmax <= o.feas_tol * bscale && cmin >= -o.psd_tol) {
        out.status = Feasibility::Feasible;
        out.X = std::move(X);
        out.xfree = xf;
        out.residual = rmax;
        out.message = "point found";
        return out;
      }
    } else {
      out.residual = kInf;
    }
  }

  // Phase B: look for a normalized Farkas ray.
  {
    Problem q;
    q.blocks = p.blocks;
    const int nb0 = p.blocks.size();
    const int box = q.blocks.size();
    q.blocks.push_back({Cone::Nonneg, std::max(1, 2 * m)});
    q.nfree = m;
    q.c.assign(q.blocks.size(), SpMat());
    q.cfree = -b;
    // coefficient lookup: for each block, entry (r,c) -> list of (row, value)
    std::vector<std::map<std::pair<int, int>, std::vector<std::pair<int, double>>>> entries(nb0);
    for (int k = 0; k < m; ++k)
      for (const Term& t : p.rows[k].terms)
        for (int oo = 0; oo < t.coeff.outerSize(); ++oo)
          for (SpMat::InnerIterator it(t.coeff, oo); it; ++it) {
            int r = it.row(), c = it.col();
            if (r > c) continue;
            entries[t.block][{r, c}].push_back({k, it.value()});
          }
    for (int bb = 0; bb < nb0; ++bb) {
      const Block& blk = p.blocks[bb];
      for (int c = 0; c < blk.n; ++c)
        for (int r = 0; r <= (blk.cone == Cone::Psd ? c : -1); ++r) {
          TripletRow tr;
          if (r == c) {
            tr.blocks[bb].emplace_back(r, r, 1.0);
          } else {
            tr.blocks[bb].emplace_back(r, c, 0.5);
            tr.blocks[bb].emplace_back(c, r, 0.5);
          }
          auto it = entries[bb].find({r, c});
          if (it != entries[bb].end())
            for (auto [k, v] : it->second) tr.free.push_back({k, v});
          q.rows.push_back(to_row(q.blocks, std::move(tr)));
        }
      if (blk.cone == Cone::Nonneg)
        for (int i = 0; i < blk.n; ++i) {
          TripletRow tr;
          tr.blocks[bb].emplace_back(i, i, 1.0);
          auto it = entries[bb].find({i, i});
          if (it != entries[bb].end())
            for (auto [k, v] : it->second) tr.free.push_back({k, v});
          q.rows.push_back(to_row(q.blocks, std::move(tr)));
        }
    }
    for (int j = 0; j < nf; ++j) {
      TripletRow tr;
      for (int k = 0; k < m; ++k)
        for (const auto& [jj, v] : p.rows[k].free)
          if (jj == j) tr.free.push_back({k, v});
      q.rows.push_back(to_row(q.blocks, std::move(tr)));
    }
    for (int k = 0; k < m; ++k) {
      TripletRow up, lo;
      up.free.push_back({k, 1.0});
      up.blocks[box].emplace_back(k, k, 1.0);
      up.rhs = 1.0;
      lo.free.push_back({k, -1.0});
      lo.blocks[box].emplace_back(m + k, m + k, 1.0);
      lo.rhs = 1.0;
      q.rows.push_back(to_row(q.blocks, std::move(up)));
      q.rows.push_back(to_row(q.blocks, std::move(lo)));
    }
    Solution s = solve(q, o);
    if (s.status == Status::Optimal || s.status == Status::Marginal) {
      RVec y = s.xfree;
      out.separation = b.dot(y);
      if (out.separation > o.margin_tol) {
        const double viol = farkas_violation(p, y);
        if (viol <= o.feas_tol) {
          out.status = Feasibility::Infeasible;
          out.y = y / out.separation;
          out.message = "separating ray found";
          return out;
        }
      }
    }
  }
  out.status = Feasibility::Marginal;
  out.message = "no point within the residual tolerance and no strict separation";
  return out;
}

std::string debug_json(const Problem& p) {
  std::ostringstream os;
  os.precision(17);
  auto write_sp = [&](const SpMat& a) {
    os << "[";
    bool first = true;
    for (int o = 0; o < a.outerSize(); ++o)
      for (SpMat::InnerIterator it(a, o); it; ++it) {
        if (!first) os << ",";
        first = false;
        os << "[" << it.row() << "," << it.col() << "," << it.value() << "]";
      }
    os << "]";
  };
  os << "{\"blocks\":[";
  for (size_t b = 0; b < p.blocks.size(); ++b)
    os << (b ? "," : "") << "{\"cone\":\"" << (p.blocks[b].cone == Cone::Psd ? "psd" : "nonneg")
       << "\",\"n\":" << p.blocks[b].n << "}";
  os << "],\"nfree\":" << p.nfree << ",\"objective\":{\"blocks\":[";
  for (size_t b = 0; b < p.c.size(); ++b) {
    if (b) os << ",";
    write_sp(p.c[b]);
  }
  os << "],\"free\":[";
  for (int j = 0; j < p.cfree.size(); ++j) os << (j ? "," : "") << p.cfree(j);
  os << "]},\"constraints\":[";
  for (size_t k = 0; k < p.rows.size(); ++k) {
    if (k) os << ",";
    os << "{\"terms\":[";
    for (size_t t = 0; t < p.rows[k].terms.size(); ++t) {
      if (t) os << ",";
      os << "{\"block\":" << p.rows[k].terms[t].block << ",\"entries\":";
      write_sp(p.rows[k].terms[t].coeff);
      os << "}";
    }
    os << "],\"free\":[";
    for (size_t j = 0; j < p.rows[k].free.size(); ++j)
      os << (j ? "," : "") << "[" << p.rows[k].free[j].first << "," << p.rows[k].free[j].second << "]";
    os << "],\"rhs\":" << p.rows[k].rhs << "}";
  }
  os << "]}\n";
  return os.str();
}

}  // namespace cpext::sdp
