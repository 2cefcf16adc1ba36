#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpext/linalg.hpp"
#include "cpext/sdp.hpp"

namespace cpext {

// A linear map given on span{X_i} by X_i -> Y_i, optionally constrained on the
// Heisenberg side by T*(X'_j) = Y'_j.
struct MapSpec {
  int din = 0;
  int dout = 0;
  std::vector<Mat> xs, ys;            // din x din -> dout x dout
  std::vector<Mat> dual_xs, dual_ys;  // dout x dout -> din x din

  int size() const { return static_cast<int>(xs.size()); }
};

// Reduces the inputs to an independent subset, checking linearity of the
// data and compatibility with the dual pairs.
MapSpec preprocess(const std::vector<Mat>& xs, const std::vector<Mat>& ys,
                   const std::vector<Mat>& dual_xs = {}, const std::vector<Mat>& dual_ys = {},
                   const Tolerances& tol = {});

// Adds the pair (1_din, 1_dout) as a trace-preservation constraint.
MapSpec with_trace_preservation(MapSpec spec);

sdp::Options solver_options(const Tolerances& tol);

// Dual certificate: M = sum_i X_i (x) H_i + sum_j H0_j (x) X'_j^T is PSD while
// sum_i tr[Y_i^T H_i] + sum_j tr[Y'_j H0_j] is negative.
struct Witness {
  std::vector<Mat> h;   // dout x dout, one per pair
  std::vector<Mat> h0;  // din x din, one per dual pair
};

struct WitnessCheck {
  bool valid = false;
  double min_eig = 0;
  double objective = 0;
  double max_op_norm = 0;   // max_i ||H_i||
  double sum_trace_norm = 0;  // sum_i ||H_i||_1
  double h0_trace_norm = 0;   // sum_j ||H0_j||_1
  std::string reason;
};

// Pairing between the compactness constraint on the witness and the
// approximation measure: SumTrace bounds max_i ||H_i|| and measures
// sum_i ||T(X_i)-Y_i||_1; MaxTrace bounds sum_i ||H_i||_1 and measures
// max_i ||T(X_i)-Y_i||.
enum class Pairing { SumTrace, MaxTrace };

// Recomputes everything from the spec. norm_bound limits max ||H_i||
// (SumTrace) or sum ||H_i||_1 (MaxTrace); h0_bound limits sum ||H0_j||_1 when
// finite.
WitnessCheck check_witness(const MapSpec& spec, const Witness& w, const Tolerances& tol,
                           Pairing pairing = Pairing::SumTrace, double h0_bound = -1);

enum class CpStatus { CompletelyPositive, NotCP, Marginal };
const char* to_string(CpStatus s);

struct CpVerdict {
  CpStatus status = CpStatus::Marginal;
  double gamma = 0;
  std::optional<Witness> witness;
  sdp::Status solver_status = sdp::Status::NumericFailure;
  std::string message;
};

CpVerdict gamma_sdp(const MapSpec& spec, const Tolerances& tol = {}, Pairing pairing = Pairing::SumTrace);

struct DeltaResult {
  double delta = 0;       // recomputed from best_choi
  double sdp_value = 0;   // optimal value reported by the solver
  Choi best_choi;
  sdp::Status solver_status = sdp::Status::NumericFailure;
};

DeltaResult delta_sdp(const MapSpec& spec, const Tolerances& tol = {}, Pairing pairing = Pairing::SumTrace);

// Sum_i ||T_C(X_i) - Y_i||_1 (or the max of operator norms for MaxTrace).
double approximation_error(const MapSpec& spec, const Choi& c, Pairing pairing = Pairing::SumTrace);

// Largest violation of the pairs and dual pairs by c.
double constraint_residual(const MapSpec& spec, const Choi& c);

enum class ExactStatus { Exists, NotExists, ApproxOnlyOrUndecided };
const char* to_string(ExactStatus s);

struct ExactExtension {
  ExactStatus status = ExactStatus::ApproxOnlyOrUndecided;
  std::optional<Choi> choi;
  std::optional<Witness> certificate;
  double residual = 0;
  std::string message;
};

ExactExtension exact_cp_extension(const MapSpec& spec, const Tolerances& tol = {});

struct PsdElement {
  Tri status = Tri::Marginal;  // Yes: span holds a nonzero PSD element
  Mat element;                 // trace-one PSD element of largest rank found
  double value = 0;            // optimal tr[P]
};

PsdElement contains_nonzero_psd(const std::vector<Mat>& basis, const Tolerances& tol = {});

// Largest t with P - t*1 PSD over P in the span with tr[P] <= 1.
struct StrictElement {
  double t = 0;
  Mat element;
};
StrictElement strictly_positive_element(const std::vector<Mat>& basis, const Tolerances& tol = {});

enum class Guarantee { NoNonzeroPsd, StrictlyPositiveElement, SpannedByPsd, None };
const char* to_string(Guarantee g);

struct Classification {
  CpVerdict cp;
  Guarantee guarantee = Guarantee::None;
  std::optional<Mat> element;       // the PSD element behind the guarantee
  ExactStatus implied = ExactStatus::ApproxOnlyOrUndecided;
  ExactExtension exact;             // solver outcome
  std::string explanation;
};

Classification classify(const MapSpec& spec, const Tolerances& tol = {});

struct UnboundednessPoint {
  double epsilon = 0;
  double dual_norm = 0;  // ||T*(1)||
  double delta = 0;
  sdp::Status solver_status = sdp::Status::NumericFailure;
};

struct Unboundedness {
  std::vector<UnboundednessPoint> series;
  bool monotone = false;
  double growth = 0;  // last / first
  bool unbounded_flag = false;
};

// For each epsilon: the smallest ||T*(1)|| over CP maps with approximation
// error at most epsilon.
Unboundedness unboundedness_diagnostic(const MapSpec& spec, const std::vector<double>& epsilons,
                                       const Tolerances& tol = {});

struct ExtensionVerdict {
  double delta = 0;
  Choi best_choi;
  ExactExtension exact;
  std::optional<bool> unbounded_flag;
};

ExtensionVerdict approximate(const MapSpec& spec, const Tolerances& tol = {});

}  // namespace cpext
