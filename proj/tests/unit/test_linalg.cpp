#include <doctest.h>

#include "cpext/linalg.hpp"
#include "oracles.hpp"

using namespace cpext;

namespace {

Mat random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

}  // namespace

TEST_CASE("tensor and partial traces agree with index loops") {
  std::mt19937_64 rng(11);
  for (int d1 : {1, 2, 3})
    for (int d2 : {2, 3}) {
      Mat a = random_matrix(d1, d1, rng), b = random_matrix(d2, d2, rng);
      CHECK((tensor(a, b) - oracle::kron(a, b)).norm() < 1e-12);
      Mat m = random_matrix(d1 * d2, d1 * d2, rng);
      CHECK((partial_trace(m, d1, d2, 1) - oracle::ptrace(m, d1, d2, 1)).norm() < 1e-12);
      CHECK((partial_trace(m, d1, d2, 2) - oracle::ptrace(m, d1, d2, 2)).norm() < 1e-12);
    }
}

TEST_CASE("swap_factors exchanges tensor factors") {
  std::mt19937_64 rng(3);
  Mat a = random_matrix(2, 2, rng), b = random_matrix(3, 3, rng);
  CHECK((swap_factors(tensor(a, b), 2, 3) - tensor(b, a)).norm() < 1e-12);
}

TEST_CASE("spectral quantities match SVD and closed forms") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    Mat h = random_hermitian(3, rng);
    CHECK(trace_norm(h) == doctest::Approx(oracle::trace_norm(h)).epsilon(1e-10));
    CHECK(op_norm(h) == doctest::Approx(oracle::op_norm(h)).epsilon(1e-10));
    CHECK(min_eig(h) == doctest::Approx(oracle::min_eig(h)).epsilon(1e-10));
    Eigh e = eigh(h);
    CHECK((e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint() - h).norm() < 1e-10);
    for (int i = 1; i < e.values.size(); ++i) CHECK(e.values(i - 1) <= e.values(i));
  }
  CHECK(trace_norm(pauli('y')) == doctest::Approx(2));
}

TEST_CASE("sqrt_psd squares back") {
  std::mt19937_64 rng(8);
  Mat r = random_density(3, rng);
  Mat s = sqrt_psd(r);
  CHECK((s * s - r).norm() < 1e-12);
  CHECK(oracle::min_eig(s) > -1e-12);
}

TEST_CASE("fidelity closed forms") {
  // commuting: sum_i sqrt(a_i b_i)
  Mat a = diag({0.2, 0.3, 0.5}), b = diag({0.6, 0.1, 0.3});
  CHECK(fidelity(a, b) == doctest::Approx(std::sqrt(0.12) + std::sqrt(0.03) + std::sqrt(0.15)).epsilon(1e-12));
  // pure states: |<psi|phi>|
  Vec psi(2), phi(2);
  psi << 1, 0;
  phi << std::cos(0.3), cplx(0, std::sin(0.3));
  CHECK(fidelity(projector(psi), projector(phi)) == doctest::Approx(std::cos(0.3)).epsilon(1e-7));
  // unnormalized scaling: F(sA, tB) = sqrt(st) F(A, B)
  CHECK(fidelity(4 * a, 9 * b) == doctest::Approx(6 * fidelity(a, b)).epsilon(1e-12));
}

TEST_CASE("inf_ratio is the largest feasible multiple") {
  CHECK(inf_ratio(diag({0.2, 0.8}), diag({0.5, 0.5})) == doctest::Approx(0.4));
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    Mat a = random_density(3, rng), b = random_density(3, rng);
    double l = inf_ratio(a, b);
    CHECK(l > 0);
    CHECK(oracle::min_eig(a - l * b) > -1e-9);
    CHECK(oracle::min_eig(a - (l + 1e-6) * b) < 0);
  }
  // support of b not inside support of a
  CHECK(inf_ratio(diag({1, 0}), diag({0.5, 0.5})) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("Choi correspondence") {
  std::mt19937_64 rng(13);
  Choi c = random_channel(2, 3, 2, rng);
  CHECK(oracle::min_eig(c.m) > -1e-10);
  CHECK((oracle::ptrace(c.m, 3, 2, 1) - Mat::Identity(2, 2)).norm() < 1e-10);
  for (int t = 0; t < 5; ++t) {
    Mat x = random_matrix(2, 2, rng);
    CHECK((apply_choi(c, x) - oracle::apply(c, x)).norm() < 1e-10);
    Mat y = random_matrix(3, 3, rng);
    // <Y, T(X)> = <T*(Y), X>
    cplx lhs = (y.adjoint() * apply_choi(c, x)).trace();
    cplx rhs = (dual_apply(c, y).adjoint() * x).trace();
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
  std::vector<Mat> kraus = {random_matrix(3, 2, rng), random_matrix(3, 2, rng)};
  Choi k = choi_from_kraus(kraus);
  Choi f = choi_of([&](const Mat& x) { return Mat(kraus[0] * x * kraus[0].adjoint() + kraus[1] * x * kraus[1].adjoint()); }, 2, 3);
  CHECK((k.m - f.m).norm() < 1e-10);
  CHECK((identity_choi(2).m - omega(2)).norm() < 1e-12);
}

TEST_CASE("Hermitian coordinates") {
  std::mt19937_64 rng(17);
  for (int n : {1, 2, 3}) {
    const auto& basis = hermitian_unit_basis(n);
    REQUIRE(static_cast<int>(basis.size()) == n * n);
    for (size_t i = 0; i < basis.size(); ++i)
      for (size_t j = 0; j < basis.size(); ++j)
        CHECK((basis[i] * basis[j]).trace().real() == doctest::Approx(i == j ? 1.0 : 0.0));
    Mat h = random_hermitian(n, rng);
    CHECK((from_herm_coords(herm_coords(h), n) - h).norm() < 1e-12);
    CHECK((from_real_embedding(real_embedding(h)) - h).norm() < 1e-12);
  }
}

TEST_CASE("hermitian_basis_of_span") {
  SpanBasis s = hermitian_basis_of_span({pauli('x'), pauli('z'), pauli('x') + pauli('z')});
  CHECK(s.basis.size() == 2);
  CHECK(s.was_hermitian_span);
  SpanBasis t = hermitian_basis_of_span({ket_bra(2, 0, 1)});
  CHECK(t.basis.size() == 2);
  CHECK_FALSE(t.was_hermitian_span);
}

TEST_CASE("input checks raise typed errors") {
  Mat a(2, 2);
  a << 1, 2, 0, 1;
  try {
    require_hermitian(a, 1e-12, "a");
    FAIL("expected NotHermitian");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotHermitian);
  }
  Mat r(2, 3);
  r.setZero();
  CHECK_THROWS_AS(require_square(r, "r"), Error);
  Mat nan = Mat::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(require_finite(nan, "nan"), Error);
}

TEST_CASE("random samplers") {
  std::mt19937_64 rng(1);
  for (int d : {2, 3, 4}) {
    Mat r = random_density(d, rng);
    CHECK(r.trace().real() == doctest::Approx(1));
    CHECK(oracle::min_eig(r) > -1e-12);
    Mat u = random_unitary(d, rng);
    CHECK((u * u.adjoint() - Mat::Identity(d, d)).norm() < 1e-10);
    Mat s = random_density_unit_square(d, rng);
    CHECK(s.trace().real() == doctest::Approx(1));
    CHECK(oracle::min_eig(s) > -1e-12);
  }
}
