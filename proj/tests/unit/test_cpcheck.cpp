#include <doctest.h>

#include "cpext/fixtures.hpp"
#include "oracles.hpp"

using namespace cpext;

namespace {

MapSpec channel_image_spec(int din, int dout, int n, std::mt19937_64& rng) {
  Choi c = random_channel(din, dout, 2, rng);
  std::vector<Mat> xs, ys;
  for (int i = 0; i < n; ++i) {
    xs.push_back(random_hermitian(din, rng));
    ys.push_back(oracle::apply(c, xs.back()));
  }
  return preprocess(xs, ys);
}

MapSpec random_output_spec(int din, int dout, int n, std::mt19937_64& rng) {
  std::vector<Mat> xs, ys;
  for (int i = 0; i < n; ++i) {
    xs.push_back(random_hermitian(din, rng));
    ys.push_back(random_hermitian(dout, rng));
  }
  return preprocess(xs, ys);
}

void check_witness_independently(const MapSpec& s, const Witness& w, double gamma) {
  oracle::WitnessValue v = oracle::witness_value(s.xs, s.ys, s.dual_xs, s.dual_ys, w);
  CHECK(v.min_eig > -1e-9);
  CHECK(v.max_op_norm <= 1 + 1e-9);
  CHECK(v.objective < 0);
  CHECK(v.objective == doctest::Approx(gamma).epsilon(1e-6));
}

}  // namespace

TEST_CASE("preprocess reduces dependent inputs and rejects nonlinear data") {
  MapSpec s = preprocess({pauli('x'), pauli('z'), pauli('x') + pauli('z')},
                         {pauli('z'), pauli('x'), pauli('x') + pauli('z')});
  CHECK(s.size() == 2);
  try {
    preprocess({pauli('x'), 2.0 * pauli('x')}, {pauli('z'), pauli('x')});
    FAIL("expected NotLinear");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotLinear);
  }
  CHECK_THROWS_AS(preprocess({pauli('x')}, {}), Error);
  CHECK_THROWS_AS(preprocess({pauli('x'), identity(3)}, {pauli('x'), pauli('z')}), Error);
}

TEST_CASE("images of channels are completely positive") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 6; ++t) {
    MapSpec s = channel_image_spec(2 + t % 2, 2 + (t / 2) % 2, 2 + t % 3, rng);
    CpVerdict v = gamma_sdp(s);
    CHECK(v.status == CpStatus::CompletelyPositive);
    CHECK(v.gamma <= 1e-9);
    CHECK(v.gamma >= -1e-7);
  }
}

TEST_CASE("transpose on the full algebra is not CP and the witness validates") {
  std::vector<Mat> xs{diag({1, 0}), diag({0, 1}), pauli('x'), pauli('y')};
  std::vector<Mat> ys{diag({1, 0}), diag({0, 1}), pauli('x'), Mat(-pauli('y'))};
  MapSpec s = preprocess(xs, ys);
  CpVerdict v = gamma_sdp(s);
  REQUIRE(v.status == CpStatus::NotCP);
  REQUIRE(v.witness);
  check_witness_independently(s, *v.witness, v.gamma);
  WitnessCheck c = check_witness(s, *v.witness, {});
  CHECK(c.valid);
  ExactExtension e = exact_cp_extension(s);
  CHECK(e.status == ExactStatus::NotExists);
}

TEST_CASE("strong duality delta = -gamma") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 8; ++t) {
    int din = 2 + t % 2, dout = 2 + (t / 2) % 2, n = 1 + t % 4;
    MapSpec s = t % 2 ? random_output_spec(din, dout, n, rng) : channel_image_spec(din, dout, n, rng);
    CpVerdict g = gamma_sdp(s);
    DeltaResult d = delta_sdp(s);
    CHECK(std::abs(d.delta + g.gamma) <= 1e-6 * (1 + std::abs(d.delta)));
    CHECK(approximation_error(s, d.best_choi) == doctest::Approx(d.delta).epsilon(1e-9));
    CHECK(oracle::min_eig(d.best_choi.m) > -1e-9);
  }
}

TEST_CASE("max-trace pairing also closes the gap") {
  std::mt19937_64 rng(78);
  for (int t = 0; t < 4; ++t) {
    MapSpec s = random_output_spec(2, 2, 2, rng);
    CpVerdict g = gamma_sdp(s, {}, Pairing::MaxTrace);
    DeltaResult d = delta_sdp(s, {}, Pairing::MaxTrace);
    CHECK(std::abs(d.delta + g.gamma) <= 1e-6 * (1 + std::abs(d.delta)));
  }
}

TEST_CASE("projector flip: CP on its span, approximable but never exactly extendable") {
  MapSpec s = fixtures::projector_flip();
  CpVerdict g = gamma_sdp(s);
  CHECK(g.status == CpStatus::CompletelyPositive);
  DeltaResult d = delta_sdp(s);
  CHECK(d.delta <= 1e-6);
  CHECK(exact_cp_extension(s).status != ExactStatus::Exists);
  Classification c = classify(s);
  CHECK(c.guarantee == Guarantee::None);
}

TEST_CASE("approximating Kraus family converges to the data with growing dual norm") {
  MapSpec s = fixtures::projector_flip();
  double last_norm = 0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    Choi c = choi_from_kraus(fixtures::approximating_kraus(eps));
    double err = approximation_error(s, c);
    CHECK(err <= 2 * eps);
    double dual_norm = oracle::op_norm(oracle::ptrace(c.m, 2, 2, 1));
    CHECK(dual_norm > last_norm);
    last_norm = dual_norm;
  }
  Unboundedness u = unboundedness_diagnostic(s, {1e-1, 1e-2, 1e-3});
  CHECK(u.monotone);
  CHECK(u.growth >= 10);
}

TEST_CASE("sigma-y stretch has a strictly positive element and an exact extension") {
  MapSpec s = fixtures::sigma_y_stretch();
  Classification c = classify(s);
  CHECK(c.guarantee == Guarantee::StrictlyPositiveElement);
  REQUIRE(c.exact.status == ExactStatus::Exists);
  const Choi& ch = *c.exact.choi;
  CHECK(oracle::min_eig(ch.m) > -1e-9);
  for (int i = 0; i < s.size(); ++i) CHECK((oracle::apply(ch, s.xs[i]) - s.ys[i]).norm() < 1e-7);
}

TEST_CASE("psd elements of a span") {
  PsdElement none = contains_nonzero_psd({pauli('x'), pauli('z')});
  CHECK(none.status == Tri::No);
  PsdElement some = contains_nonzero_psd({diag({1, 0}), pauli('x')});
  CHECK(some.status == Tri::Yes);
  CHECK(oracle::min_eig(some.element) > -1e-9);
  StrictElement st = strictly_positive_element({diag({0.3, 0.7}), pauli('y')});
  CHECK(st.t > 0.29);
}

TEST_CASE("dual pairs constrain the adjoint") {
  // identity data with the extra requirement T*(1) = 1
  MapSpec s = preprocess({pauli('x'), pauli('z')}, {pauli('x'), pauli('z')}, {identity(2)}, {identity(2)});
  ExactExtension e = exact_cp_extension(s);
  REQUIRE(e.status == ExactStatus::Exists);
  CHECK(constraint_residual(s, *e.choi) < 1e-7);
  CHECK((oracle::ptrace(e.choi->m, 2, 2, 1) - identity(2)).norm() < 1e-6);
}
