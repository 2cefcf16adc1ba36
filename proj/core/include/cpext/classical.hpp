#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpext/cpcheck.hpp"
#include "cpext/extend.hpp"

namespace cpext {

struct CommonBasis {
  Mat u;                       // columns: common eigenvectors
  std::vector<RVec> diagonals;  // real diagonal of u^H m u for each input
};

// Joint eigenbasis of pairwise commuting Hermitian matrices. Throws
// NotCommuting when a normalized commutator exceeds commute_tol.
CommonBasis simultaneous_diagonalization(const std::vector<Mat>& mats, double commute_tol = 1e-10,
                                         double cluster_tol = 1e-8);

struct ClassicalPolytope {
  int dim = 0;
  std::vector<RVec> affine_basis;  // independent generators actually used
  std::vector<RVec> extremes;
  std::vector<RVec> coefficients;  // extremes[a] = sum_i coefficients[a](i) * affine_basis[i]
};

// Vertices of span{v_i} intersected with the probability simplex.
ClassicalPolytope polytope_extremes(const std::vector<RVec>& vectors);

enum class Positivity { Positive, NotPositive };
const char* to_string(Positivity p);

struct PositivityResult {
  Positivity status = Positivity::Positive;
  ClassicalPolytope polytope;
  CommonBasis basis;
  std::optional<Mat> vertex;  // violating vertex, in the original input basis
  std::optional<Mat> image;
  double min_eig = 0;         // smallest eigenvalue over all vertex images
};

PositivityResult commuting_domain_positive(const MapSpec& spec, const Tolerances& tol = {});

enum class RangeStatus { Exists, NotCP, Marginal };
const char* to_string(RangeStatus s);

struct RangeExtension {
  RangeStatus status = RangeStatus::Marginal;
  std::optional<Choi> choi;
  std::optional<Witness> witness;
  std::string message;
};

// CP extension into the algebra generated by commuting outputs, obtained by
// pinching a CP extension in the common output eigenbasis.
RangeExtension commuting_range_cp_extension(const MapSpec& spec, const Tolerances& tol = {});

enum class DomainStatus { Exists, NotExists, OutOfGuaranteedRange };
const char* to_string(DomainStatus s);

struct DomainExtension {
  DomainStatus status = DomainStatus::OutOfGuaranteedRange;
  std::optional<Choi> choi;
  std::optional<Witness> witness;
  std::string construction;  // identity, trace-preparation, boundary-projection, face-projection, sdp
  std::string message;
};

DomainExtension commuting_domain_extension(const MapSpec& spec, bool trace_preserving, const Tolerances& tol = {});

// Diagonal matrix with the given entries.
Mat diag_embed(const RVec& p);

}  // namespace cpext
