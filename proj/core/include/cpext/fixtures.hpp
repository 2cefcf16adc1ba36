#pragma once

#include <string>
#include <vector>

#include "cpext/aucrit.hpp"
#include "cpext/classical.hpp"

// Reference data sets used by the tests, the CLI and the benchmarks.
namespace cpext::fixtures {

// diag(1,0) -> diag(1,0), sigma_x -> sigma_z: CP on its span, no CP extension.
MapSpec projector_flip();

// Kraus pair K1 = [[1, 1/2],[0,0]], K2 = [[0,0],[eps, -1/(2 eps)]] approximating projector_flip.
std::vector<Mat> approximating_kraus(double eps);

// span{diag(p,1-p), sigma_y} under X -> K^{1/2} X K^{1/2}, K = [[3p-1, 2],[2, 3p+2]]/2.
MapSpec sigma_y_stretch(double p = 14.0 / 15.0);
Mat sigma_y_stretch_kernel(double p = 14.0 / 15.0);

// Pauli relabelings on traceless inputs.
MapSpec pauli_cycle();  // x -> y, y -> z, z -> x
MapSpec pauli_swap();   // x -> y, y -> x, z -> z

// Two-state probabilistic transformation with a known feasible point (2/3, 3/5).
struct StatePairs {
  std::vector<Mat> in, out;
};
StatePairs probabilistic_pair();

// Commuting-domain data.
MapSpec commuting_square();                 // diag(1,1,0,0)/2, diag(0,1,1,0)/2, diag(0,0,1,1)/2 -> |0>,|+>,|1>
MapSpec commuting_face_pair();              // diag(1,1,0)/2, diag(1,0,1)/2 -> |0>,|1>
MapSpec commuting_single();                 // diag(1,2)/3 -> |+><+|
MapSpec commuting_boundary_pair(double p, double q);  // diag(p,1-p,0), diag(q,0,1-q) -> |0>,|+>
std::vector<RVec> square_vertices();        // the four expected vertices of commuting_square

// Qutrit states whose transposes satisfy the trace-norm contraction test
// although no channel maps them there.
AuInstance transpose_qutrits();
AuWitnessPackage transpose_qutrits_witness();

std::vector<std::string> names();

}  // namespace cpext::fixtures
