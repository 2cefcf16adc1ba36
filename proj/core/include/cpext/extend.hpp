#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpext/cpcheck.hpp"

namespace cpext {

struct TpExtensionResult {
  double delta_tp = 0;  // w*||tr_1 C - 1|| + sum_i ||T_C(X_i) - Y_i||_1, recomputed from best_choi
  double sdp_value = 0;
  double lambda = 0;    // ||tr_1 C - 1||
  Choi best_choi;
  double gamma_tp = 0;  // optimum of the witness problem
  std::optional<Witness> witness;  // h0 holds the single trace-side component
  double weight_w = 1;
  sdp::Status primal_status = sdp::Status::NumericFailure;
  sdp::Status dual_status = sdp::Status::NumericFailure;
};

// Best approximation by CP maps with the trace-preservation defect weighted by
// w, together with the witness problem
//   min tr H0 + sum_i tr[Y_i^T H_i]
//   s.t. H0 (x) 1 + sum_i X_i (x) H_i PSD, ||H_i|| <= 1, ||H0||_1 <= w.
TpExtensionResult cptp_delta(const MapSpec& spec, double w = 1.0, const Tolerances& tol = {});

// Same objective with tr_1 C = 1 imposed exactly (no witness problem).
double cptp_delta_hard(const MapSpec& spec, const Tolerances& tol = {}, Choi* best = nullptr);

enum class ChannelStatus { Exists, NotExists, Marginal };
const char* to_string(ChannelStatus s);

struct ChannelResult {
  ChannelStatus status = ChannelStatus::Marginal;
  std::optional<Choi> choi;
  std::optional<Witness> witness;  // h0 holds the trace-side component
  double delta = 0;
  double gamma = 0;
  bool trace_mismatch = false;
  std::string message;
};

// Channel (CPTP) extension of the pairs; dual pairs of the spec are ignored.
ChannelResult channel_extension(const MapSpec& spec, const Tolerances& tol = {});

// Validates a channel witness for the pairs of spec plus trace preservation.
WitnessCheck check_channel_witness(const MapSpec& spec, const Witness& w, const Tolerances& tol,
                                   double h0_bound = -1);

struct UnitalScale {
  bool found = false;
  double c_star = 0;
  double upper_bracket = 0;
  int bisection_steps = 0;
};

// Smallest c such that the map extended by 1 -> c*1 is CP.
UnitalScale minimal_unital_scale(const MapSpec& spec, const Tolerances& tol = {}, double precision = 1e-7);

enum class ObjectiveKind { Maximin, Weighted };

struct ProbabilisticResult {
  ObjectiveKind kind = ObjectiveKind::Maximin;
  double value = 0;
  std::vector<double> probs;
  Choi choi;
  bool infeasible = false;  // floor unreachable
  sdp::Status solver_status = sdp::Status::NumericFailure;
  std::string message;
};

// Maximizes min_i p_i over CP trace-non-increasing maps with T(rho_i) = p_i rho'_i.
ProbabilisticResult probabilistic_maximin(const std::vector<Mat>& rho, const std::vector<Mat>& rho_out,
                                          bool equal_probabilities = false, const Tolerances& tol = {});

// Maximizes sum_i pi_i p_i, optionally with p_i >= floor.
ProbabilisticResult probabilistic_weighted(const std::vector<Mat>& rho, const std::vector<Mat>& rho_out,
                                           const std::vector<double>& priors, std::optional<double> floor = {},
                                           bool equal_probabilities = false, const Tolerances& tol = {});

enum class HilbertStatus { Exists, NotExists, SupportIncompatible };
const char* to_string(HilbertStatus s);

struct HilbertResult {
  HilbertStatus status = HilbertStatus::NotExists;
  double lhs = 0;  // infinite when a support is not contained in the other
  double rhs = 0;
  bool support_boundary = false;  // a support decision sat within 10x the rank tolerance
  std::string message;
};

HilbertResult hilbert_metric_check(const Mat& rho1, const Mat& rho2, const Mat& rho1_out, const Mat& rho2_out);

// Density-matrix precondition shared by the state-based operations.
void require_density(const Mat& rho, const char* what, double tol = 1e-9);

}  // namespace cpext
