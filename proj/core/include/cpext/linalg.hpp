#pragma once

#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cpext {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

enum class ErrorKind {
  DimensionMismatch,
  NotHermitian,
  NotPSD,
  NotLinear,
  Incompatible,
  NotCommuting,
  Precondition,
  InvalidArgument,
  NumericFailure,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct Tolerances {
  double feas = 1e-8;
  double gap = 1e-8;
  double psd = 1e-9;
  double margin = 1e-7;
  double witness_margin = 1e-7;
  double hermiticity = 1e-12;
  double au = 1e-8;
  double commute = 1e-10;
  double cluster = 1e-8;
};

// Three-valued answer used wherever a floating point boundary matters.
enum class Tri { Yes, No, Marginal };

struct Choi {
  int din = 0;
  int dout = 0;
  Mat m;  // (dout*din) x (dout*din), output factor first
};

// --- construction helpers ---
Mat identity(int n);
Mat pauli(char which);  // 'x', 'y', 'z', 'i'
Mat diag(const std::vector<double>& d);
Mat ket_bra(int n, int i, int j);
Mat projector(const Vec& v);
Mat omega(int d);  // |Omega><Omega| = sum_ij |ii><jj|

// --- checks ---
void require_square(const Mat& a, const char* what);
bool is_hermitian(const Mat& a, double rel_tol);
void require_hermitian(const Mat& a, double rel_tol, const char* what);
Mat hermitian_part(const Mat& a);
void require_finite(const Mat& a, const char* what);

// --- tensor structure ---
Mat tensor(const Mat& a, const Mat& b);
// which = 1 traces out the first factor, which = 2 the second.
Mat partial_trace(const Mat& m, int d1, int d2, int which);
Mat swap_factors(const Mat& m, int d1, int d2);

// --- Choi correspondence ---
Mat apply_choi(const Choi& c, const Mat& x);
Mat dual_apply(const Choi& c, const Mat& y);
Choi choi_of(const std::function<Mat(const Mat&)>& t, int din, int dout);
Choi choi_from_kraus(const std::vector<Mat>& kraus);
Choi identity_choi(int d);

// --- spectral ---
struct Eigh {
  RVec values;  // ascending
  Mat vectors;
};
Eigh eigh(const Mat& h);
RVec eigvalsh(const Mat& h);
double trace_norm(const Mat& h);
double op_norm(const Mat& h);
double min_eig(const Mat& h);
double max_eig(const Mat& h);
double rank_tol(const Mat& a);
Tri psd_status(const Mat& h, double psd_tol);

Mat sqrt_psd(const Mat& a, double psd_tol = 1e-9);
double fidelity(const Mat& a, const Mat& b, double psd_tol = 1e-9);
double inf_ratio(const Mat& a, const Mat& b, double psd_tol = 1e-9);
Mat support_projector(const Mat& a, double rank_tol);
int numerical_rank(const Mat& a, double tol);

// --- Hermitian coordinates ---
// Orthonormal basis of the real space of n x n Hermitian matrices under
// <A,B> = Re tr(AB): E_jj, (E_jk+E_kj)/sqrt2, i(E_jk-E_kj)/sqrt2 for j<k.
const std::vector<Mat>& hermitian_unit_basis(int n);
RVec herm_coords(const Mat& h);
Mat from_herm_coords(const RVec& v, int n);

struct SpanBasis {
  std::vector<Mat> basis;
  bool was_hermitian_span = false;
};
SpanBasis hermitian_basis_of_span(const std::vector<Mat>& mats);

RMat real_embedding(const Mat& h);
Mat from_real_embedding(const RMat& r);

// --- random sampling ---
Mat random_unitary(int d, std::mt19937_64& rng);
Mat random_density(int d, std::mt19937_64& rng);               // Ginibre
Mat random_density_unit_square(int d, std::mt19937_64& rng);  // entries uniform on [0,1]+i[0,1]
Mat random_hermitian(int d, std::mt19937_64& rng);
Choi random_channel(int din, int dout, int kraus_rank, std::mt19937_64& rng);

}  // namespace cpext
