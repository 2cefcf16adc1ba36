#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpext/extend.hpp"

namespace cpext {

// Two input states of dimension d and two output states of dimension d'.
struct AuInstance {
  Mat rho1, rho2;
  Mat rho1_out, rho2_out;

  int din() const { return static_cast<int>(rho1.rows()); }
  int dout() const { return static_cast<int>(rho1_out.rows()); }
};

// Throws unless all four are density matrices of consistent size.
void validate(const AuInstance& inst, double tol = 1e-9);

MapSpec to_spec(const AuInstance& inst);

enum class AuStatus { Holds, Fails, Marginal };
const char* to_string(AuStatus s);

struct AuResult {
  AuStatus status = AuStatus::Holds;
  double min_value = 0;  // min over p of ||p r1 - (1-p) r2||_1 - ||p r1' - (1-p) r2'||_1
  double argmin_p = 0;
  int evaluations = 0;
};

// Trace-norm contraction test over priors p in [0,1]: Holds when the minimum
// is >= -au_tol, Fails below -10 au_tol, Marginal in between.
AuResult au_condition(const AuInstance& inst, const Tolerances& tol = {}, int grid = 512);

// Same function on a uniform grid only.
double au_min_uniform(const AuInstance& inst, int points);

enum class FidelityStatus { Exists, NotExists };
const char* to_string(FidelityStatus s);

enum class FidelityFailure { None, FirstPositivity, SecondPositivity, FidelityInequality };
const char* to_string(FidelityFailure f);

struct FidelityResult {
  FidelityStatus status = FidelityStatus::NotExists;
  FidelityFailure failed = FidelityFailure::None;
  double a = 0, b = 0;  // inf(r1/r2), inf(r2/r1)
  double min_eig_first = 0, min_eig_second = 0;
  double fidelity_in = 0, fidelity_out = 0;
  bool near_boundary = false;  // some condition failed by less than ten times its tolerance
};

FidelityResult fidelity_criterion(const AuInstance& inst, const Tolerances& tol = {});

// Channel realizing both pairs; requires fidelity_criterion == Exists. The
// result is validated before it is returned.
Choi construct_qubit_channel(const AuInstance& inst, const Tolerances& tol = {});

struct AuWitnessPackage {
  Mat h0, h1, h2;
  double objective_bound = 0;
  std::optional<std::pair<double, double>> eps_range;
};

struct EpsCheck {
  double eps = 0;
  double min_eig = 0;
  double objective = 0;
  bool valid = false;
};

struct AuWitnessCheck {
  bool valid = false;
  double min_eig = 0;
  double objective = 0;
  std::vector<EpsCheck> eps_checks;  // H0 + eps*1 over the package range
  std::string reason;
};

// M = H0 (x) 1 + r1 (x) H1 + r2 (x) H2 must be PSD and
// tr H0 + tr[r1' H1^T] + tr[r2' H2^T] <= objective_bound < -witness_margin.
// Shifted variants must be PSD with objective below -witness_margin.
AuWitnessCheck verify_au_witness(const AuInstance& inst, const AuWitnessPackage& pkg, const Tolerances& tol = {},
                                 int eps_samples = 8);

struct SearchHit {
  int trial = 0;
  AuInstance instance;
  double delta_tp = 0;
  AuWitnessPackage witness;
};

struct SearchReport {
  int d = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<SearchHit> hits;
  int au_failures = 0;  // sampled instances where the contraction test did not hold
  double hit_fraction = 0;
};

// Random inputs with entries uniform on the unit square, outputs their
// transposes; collects instances without a channel together with witnesses.
SearchReport transpose_counterexample_search(int d, int trials, std::uint64_t seed, const Tolerances& tol = {});

// Zero-padded embedding into dimensions (d, d_out).
AuInstance embed_counterexample(const AuInstance& base, int d, int d_out);

}  // namespace cpext
