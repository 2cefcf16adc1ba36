#include "cpext/fixtures.hpp"

#include <cmath>

namespace cpext::fixtures {

namespace {

Mat ket_plus() { return Mat::Constant(2, 2, 0.5); }

Mat herm3(cplx a00, cplx a01, cplx a02, cplx a11, cplx a12, cplx a22) {
  Mat m(3, 3);
  m << a00, a01, a02, std::conj(a01), a11, a12, std::conj(a02), std::conj(a12), a22;
  return m;
}

}  // namespace

MapSpec projector_flip() { return preprocess({diag({1, 0}), pauli('x')}, {diag({1, 0}), pauli('z')}); }

std::vector<Mat> approximating_kraus(double eps) {
  Mat k1(2, 2), k2(2, 2);
  k1 << 1, 0.5, 0, 0;
  k2 << 0, 0, eps, -1 / (2 * eps);
  return {k1, k2};
}

Mat sigma_y_stretch_kernel(double p) {
  Mat k(2, 2);
  k << 3 * p - 1, 2, 2, 3 * p + 2;
  return 0.5 * k;
}

MapSpec sigma_y_stretch(double p) {
  Mat s = sqrt_psd(sigma_y_stretch_kernel(p));
  Mat rho = diag({p, 1 - p});
  return preprocess({rho, pauli('y')}, {Mat(s * rho * s), Mat(s * pauli('y') * s)});
}

MapSpec pauli_cycle() {
  return preprocess({pauli('x'), pauli('y'), pauli('z')}, {pauli('y'), pauli('z'), pauli('x')});
}

MapSpec pauli_swap() {
  return preprocess({pauli('x'), pauli('y'), pauli('z')}, {pauli('y'), pauli('x'), pauli('z')});
}

StatePairs probabilistic_pair() {
  return {{diag({1.0 / 3, 2.0 / 3}), diag({0.2, 0.8})}, {diag({0.5, 0.5}), diag({1.0 / 3, 2.0 / 3})}};
}

MapSpec commuting_square() {
  return preprocess({diag({0.5, 0.5, 0, 0}), diag({0, 0.5, 0.5, 0}), diag({0, 0, 0.5, 0.5})},
                    {ket_bra(2, 0, 0), ket_plus(), ket_bra(2, 1, 1)});
}

std::vector<RVec> square_vertices() {
  std::vector<RVec> v(4, RVec::Zero(4));
  v[0] << 0.5, 0.5, 0, 0;
  v[1] << 0, 0.5, 0.5, 0;
  v[2] << 0, 0, 0.5, 0.5;
  v[3] << 0.5, 0, 0, 0.5;
  return v;
}

MapSpec commuting_face_pair() {
  return preprocess({diag({0.5, 0.5, 0}), diag({0.5, 0, 0.5})}, {ket_bra(2, 0, 0), ket_bra(2, 1, 1)});
}

MapSpec commuting_single() { return preprocess({diag({1.0 / 3, 2.0 / 3})}, {ket_plus()}); }

MapSpec commuting_boundary_pair(double p, double q) {
  return preprocess({diag({p, 1 - p, 0}), diag({q, 0, 1 - q})}, {ket_bra(2, 0, 0), ket_plus()});
}

AuInstance transpose_qutrits() {
  const cplx i(0, 1);
  Mat r1 = herm3(2, 1, 0, 2, 1, 2) / 6.0;
  Mat r2 = herm3(2, 1, 0, 2, -i, 2) / 6.0;
  return {r1, r2, r1.transpose(), r2.transpose()};
}

AuWitnessPackage transpose_qutrits_witness() {
  const cplx i(0, 1);
  AuWitnessPackage w;
  w.h0 = herm3(2.4, -5.3, 0, 26.7, 0, 28.8);
  w.h1 = herm3(10.6, -25.0 + 3.2 * i, 44.0 + 33.4 * i, 54.6, -174.4 - 146.2 * i, 44);
  w.h2 = herm3(10.6, -25.0 - 3.2 * i, -33.4 - 44.0 * i, 54.6, 146.2 + 174.4 * i, 44);
  w.objective_bound = -2.2;
  w.eps_range = std::pair{0.01, 0.69};
  return w;
}

std::vector<std::string> names() {
  return {"projector-flip",   "approximating-kraus", "sigma-y-stretch",     "pauli-cycle",
          "pauli-swap",       "probabilistic-pair",  "commuting-square",    "commuting-face-pair",
          "commuting-single", "commuting-boundary-pair", "transpose-qutrits", "transpose-qutrits-witness"};
}

}  // namespace cpext::fixtures
