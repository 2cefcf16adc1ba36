#include <doctest.h>

#include "cpext/fixtures.hpp"
#include "oracles.hpp"

using namespace cpext;

TEST_CASE("contraction test on simple instances") {
  AuInstance same{diag({0.3, 0.7}), diag({0.6, 0.4}), diag({0.3, 0.7}), diag({0.6, 0.4})};
  CHECK(au_condition(same).status == AuStatus::Holds);
  AuInstance sharpen{diag({0.5, 0.5}), diag({0.4, 0.6}), diag({1, 0}), diag({0, 1})};
  AuResult r = au_condition(sharpen);
  CHECK(r.status == AuStatus::Fails);
  // the reported argmin reproduces the value
  double v = oracle::trace_norm(r.argmin_p * sharpen.rho1 - (1 - r.argmin_p) * sharpen.rho2) -
             oracle::trace_norm(r.argmin_p * sharpen.rho1_out - (1 - r.argmin_p) * sharpen.rho2_out);
  CHECK(v == doctest::Approx(r.min_value).epsilon(1e-9));
  CHECK(r.min_value <= au_min_uniform(sharpen, 101) + 1e-12);
}

TEST_CASE("contraction test minimum is no larger than a fine grid") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 10; ++t) {
    AuInstance a{oracle::random_density(2, rng), oracle::random_density(2, rng), oracle::random_density(2, rng),
                 oracle::random_density(2, rng)};
    AuResult r = au_condition(a);
    CHECK(r.min_value <= au_min_uniform(a, 2001) + 1e-12);
  }
}

TEST_CASE("fidelity criterion and constructive channel") {
  std::mt19937_64 rng(72);
  int exists = 0;
  for (int t = 0; t < 40; ++t) {
    int dout = 2 + t % 2;
    AuInstance a{oracle::random_density(2, rng), oracle::random_density(2, rng), Mat(), Mat()};
    if (t % 2) {
      Choi c = random_channel(2, dout, 2, rng);
      a.rho1_out = oracle::apply(c, a.rho1);
      a.rho2_out = oracle::apply(c, a.rho2);
    } else {
      a.rho1_out = oracle::random_density(dout, rng);
      a.rho2_out = oracle::random_density(dout, rng);
    }
    FidelityResult f = fidelity_criterion(a);
    if (t % 2) CHECK(f.status == FidelityStatus::Exists);
    if (f.status != FidelityStatus::Exists) continue;
    ++exists;
    Choi c = construct_qubit_channel(a);
    oracle::ChannelCheck k = oracle::check_channel(c, {a.rho1, a.rho2}, {a.rho1_out, a.rho2_out});
    CHECK(k.pairs <= 1e-8);
    CHECK(k.trace <= 1e-8);
    CHECK(k.min_eig >= -1e-9);
  }
  CHECK(exists >= 20);
  AuInstance big{identity(3) / 3.0, diag({1, 0, 0}), diag({0.5, 0.5}), diag({1, 0})};
  CHECK_THROWS_AS(fidelity_criterion(big), Error);
}

TEST_CASE("qutrit transpose instance: contraction holds, no channel, witness validates") {
  AuInstance a = fixtures::transpose_qutrits();
  CHECK(au_condition(a).status == AuStatus::Holds);
  AuWitnessPackage w = fixtures::transpose_qutrits_witness();
  AuWitnessCheck c = verify_au_witness(a, w);
  CHECK(c.valid);
  CHECK(c.objective <= -2.2 + 1e-6);
  // independent recomputation of M and the objective
  Mat m = oracle::kron(w.h0, identity(3)) + oracle::kron(a.rho1, w.h1) + oracle::kron(a.rho2, w.h2);
  CHECK(oracle::min_eig(m) == doctest::Approx(c.min_eig).epsilon(1e-9));
  double obj = w.h0.trace().real() + (a.rho1_out * w.h1.transpose()).trace().real() +
               (a.rho2_out * w.h2.transpose()).trace().real();
  CHECK(obj == doctest::Approx(c.objective).epsilon(1e-12));

  AuWitnessPackage tight = w;
  tight.objective_bound = -3;
  CHECK_FALSE(verify_au_witness(a, tight).valid);
  AuWitnessPackage broken = w;
  broken.h0 = -w.h0;
  CHECK_FALSE(verify_au_witness(a, broken).valid);
}

TEST_CASE("embedding preserves the counterexample") {
  AuInstance e = embed_counterexample(fixtures::transpose_qutrits(), 4, 4);
  CHECK(e.din() == 4);
  CHECK(e.dout() == 4);
  CHECK(au_condition(e).status == AuStatus::Holds);
  CHECK(channel_extension(to_spec(e)).status == ChannelStatus::NotExists);
  CHECK_THROWS_AS(embed_counterexample(fixtures::transpose_qutrits(), 2, 3), Error);
}

TEST_CASE("random search is reproducible") {
  SearchReport a = transpose_counterexample_search(3, 4, 99);
  SearchReport b = transpose_counterexample_search(3, 4, 99);
  REQUIRE(a.hits.size() == b.hits.size());
  for (size_t i = 0; i < a.hits.size(); ++i) {
    CHECK(a.hits[i].trial == b.hits[i].trial);
    CHECK((a.hits[i].instance.rho1 - b.hits[i].instance.rho1).norm() == 0);
    CHECK(verify_au_witness(a.hits[i].instance, a.hits[i].witness).valid);
  }
  CHECK(transpose_counterexample_search(2, 5, 99).hits.empty());
}
