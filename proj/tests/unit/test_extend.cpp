#include <doctest.h>

#include "cpext/fixtures.hpp"
#include "oracles.hpp"

using namespace cpext;

namespace {

MapSpec add_identity(MapSpec s) {
  std::vector<Mat> xs = s.xs, ys = s.ys;
  xs.push_back(identity(s.din));
  ys.push_back(identity(s.dout));
  return preprocess(xs, ys);
}

}  // namespace

TEST_CASE("channel images admit validated channel extensions") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 4; ++t) {
    Choi c = random_channel(2, 2 + t % 2, 2, rng);
    std::vector<Mat> xs{oracle::random_density(2, rng), oracle::random_density(2, rng)};
    std::vector<Mat> ys{oracle::apply(c, xs[0]), oracle::apply(c, xs[1])};
    MapSpec s = preprocess(xs, ys);
    ChannelResult r = channel_extension(s);
    REQUIRE(r.status == ChannelStatus::Exists);
    oracle::ChannelCheck k = oracle::check_channel(*r.choi, xs, ys);
    CHECK(k.pairs < 1e-7);
    CHECK(k.trace < 1e-7);
    CHECK(k.min_eig > -1e-9);
  }
}

TEST_CASE("Pauli relabelings: rank-one channel versus witness") {
  ChannelResult cyc = channel_extension(add_identity(fixtures::pauli_cycle()));
  REQUIRE(cyc.status == ChannelStatus::Exists);
  RVec ev = eigvalsh(cyc.choi->m);
  CHECK(ev(ev.size() - 2) <= 1e-6);

  MapSpec swap = add_identity(fixtures::pauli_swap());
  ChannelResult sw = channel_extension(swap);
  REQUIRE(sw.status == ChannelStatus::NotExists);
  REQUIRE(sw.witness);
  oracle::WitnessValue v = oracle::channel_witness_value(swap, *sw.witness);
  CHECK(v.min_eig > -1e-9);
  CHECK(v.objective < -1e-7);
}

TEST_CASE("minimal unital scales") {
  UnitalScale cyc = minimal_unital_scale(fixtures::pauli_cycle());
  REQUIRE(cyc.found);
  CHECK(cyc.c_star == doctest::Approx(1).epsilon(1e-4));
  UnitalScale sw = minimal_unital_scale(fixtures::pauli_swap());
  REQUIRE(sw.found);
  CHECK(sw.c_star == doctest::Approx(3).epsilon(1e-4));
}

TEST_CASE("trace mismatch is refuted by an explicit witness") {
  MapSpec s = preprocess({diag({1, 0})}, {diag({0.5, 0})});
  ChannelResult r = channel_extension(s);
  REQUIRE(r.status == ChannelStatus::NotExists);
  CHECK(r.trace_mismatch);
  REQUIRE(r.witness);
  oracle::WitnessValue v = oracle::channel_witness_value(s, *r.witness);
  CHECK(v.min_eig > -1e-9);
  CHECK(v.objective < 0);
}

TEST_CASE("weighted trace-preservation defect") {
  MapSpec s = fixtures::projector_flip();
  TpExtensionResult r = cptp_delta(s, 1.0);
  CHECK(r.delta_tp > 1e-6);
  CHECK(r.delta_tp == doctest::Approx(-r.gamma_tp).epsilon(1e-6));
  REQUIRE(r.witness);
  WitnessCheck c = check_channel_witness(s, *r.witness, {}, 1.0);
  CHECK(c.valid);
  CHECK(c.h0_trace_norm <= 1 + 1e-7);
  // recompute the primal value from the returned Choi matrix
  double err = 0;
  for (int i = 0; i < s.size(); ++i) err += oracle::trace_norm(oracle::apply(r.best_choi, s.xs[i]) - s.ys[i]);
  double defect = oracle::op_norm(oracle::ptrace(r.best_choi.m, 2, 2, 1) - identity(2));
  CHECK(r.delta_tp == doctest::Approx(err + defect).epsilon(1e-7));
  // a larger weight cannot decrease the optimum; the hard constraint bounds it
  TpExtensionResult heavy = cptp_delta(s, 10.0);
  CHECK(heavy.delta_tp >= r.delta_tp - 1e-7);
  CHECK(heavy.delta_tp <= cptp_delta_hard(s) + 1e-6);
}

TEST_CASE("sigma-y stretch: CP extension but no channel") {
  MapSpec s = fixtures::sigma_y_stretch();
  ChannelResult r = channel_extension(s);
  CHECK(r.status == ChannelStatus::NotExists);
  // expansion factor of sigma_y
  double f = oracle::trace_norm(s.ys[1]) / oracle::trace_norm(s.xs[1]);
  Mat k = fixtures::sigma_y_stretch_kernel();
  Mat sq = sqrt_psd(k);
  CHECK(oracle::trace_norm(sq * pauli('y') * sq) / 2 == doctest::Approx(f).epsilon(1e-12));
  CHECK(f > 1);
}

TEST_CASE("probabilistic transformation of a state pair") {
  auto sp = fixtures::probabilistic_pair();
  ProbabilisticResult r = probabilistic_maximin(sp.in, sp.out);
  CHECK(r.value >= 0.6 - 1e-6);
  REQUIRE(r.probs.size() == 2);
  for (int i = 0; i < 2; ++i) {
    Mat img = oracle::apply(r.choi, sp.in[i]);
    CHECK((img - r.probs[i] * sp.out[i]).norm() < 1e-6);
  }
  CHECK(oracle::min_eig(r.choi.m) > -1e-9);
  CHECK(oracle::min_eig(identity(2) - oracle::ptrace(r.choi.m, 2, 2, 1)) > -1e-8);

  ProbabilisticResult eq = probabilistic_maximin(sp.in, sp.out, true);
  CHECK(eq.value <= 1e-6);

  ProbabilisticResult w = probabilistic_weighted(sp.in, sp.out, {0.5, 0.5});
  CHECK(w.value >= 0.6 - 1e-6);
  ProbabilisticResult fl = probabilistic_weighted(sp.in, sp.out, {0.5, 0.5}, 0.9);
  CHECK(fl.infeasible);
}

TEST_CASE("Hilbert metric comparison") {
  auto sp = fixtures::probabilistic_pair();
  HilbertResult r = hilbert_metric_check(sp.in[0], sp.in[1], sp.out[0], sp.out[1]);
  CHECK(r.status == HilbertStatus::Exists);
  CHECK(r.lhs == doctest::Approx(2).epsilon(1e-9));
  CHECK(r.rhs == doctest::Approx(2).epsilon(1e-9));
  // diagonal oracle: 1 / (min ratio * min inverse ratio)
  Mat a = diag({0.1, 0.9}), b = diag({0.6, 0.4});
  double expected = 1.0 / ((0.1 / 0.6) * (0.4 / 0.9));
  HilbertResult d = hilbert_metric_check(a, b, diag({0.5, 0.5}), diag({0.5, 0.5}));
  CHECK(d.status == HilbertStatus::Exists);
  CHECK(d.lhs == doctest::Approx(expected).epsilon(1e-9));
  CHECK(d.rhs == doctest::Approx(1).epsilon(1e-9));
  // distinguishable outputs from overlapping inputs
  HilbertResult no = hilbert_metric_check(diag({0.5, 0.5}), diag({0.4, 0.6}), diag({1, 0}), diag({0, 1}));
  CHECK(no.status != HilbertStatus::Exists);
}

TEST_CASE("state operations reject non-states") {
  CHECK_THROWS_AS(require_density(diag({0.7, 0.7}), "rho"), Error);
  CHECK_THROWS_AS(require_density(diag({1.2, -0.2}), "rho"), Error);
  CHECK_NOTHROW(require_density(diag({0.2, 0.8}), "rho"));
}
