#pragma once

#include <cstdint>
#include <vector>

#include "qlsim/statesim.hpp"

namespace qlsim {

// Truncated double-sum representation of 1/x:
//   h(x) = i/sqrt(2 pi) sum_{j=0}^{J-1} dy sum_{k=-K}^{K} dz z_k e^{-z_k^2/2} e^{-i x y_j z_k}
// with y_j = j dy and z_k = k dz.
struct FourierInverseParams {
  double kappa = 1.0;
  double epsilon = 0.1;
  std::int64_t j_terms = 1;  // J
  std::int64_t k_terms = 1;  // K
  double delta_y = 1.0;
  double delta_z = 1.0;
  int refinements = 0;       // J/K doublings performed by the audit loop
  double audited_error = -1.0;  // sup error found by the final audit (-1: not audited)

  double y(std::int64_t j) const { return static_cast<double>(j) * delta_y; }
  double z(std::int64_t k) const { return static_cast<double>(k) * delta_z; }
  // J (2K + 1) summands.
  std::int64_t total_terms() const { return j_terms * (2 * k_terms + 1); }
  void validate() const;
};

inline constexpr std::int64_t kFourierTermBudget = std::int64_t{1} << 20;

// Closed-form starting schedule (no audit).
FourierInverseParams fourier_inverse_schedule(double kappa, double epsilon);
// Starting schedule, then doubles J and K until the domain audit passes.
// Throws ResourceError if the term budget runs out first.
FourierInverseParams fourier_inverse_params(double kappa, double epsilon, int grid_size = 4000);

Complex evaluate_h(double x, const FourierInverseParams& p);
// Real part only, via the closed-form j-sum (exactly odd in x).
double evaluate_h_real(double x, const FourierInverseParams& p);

// Limit dz -> 0, K dz -> infinity at fixed Y: (1 - exp(-(x Y)^2 / 2)) / x.
// Isolates the error from cutting the y integral at Y = J dy.
double h_y_truncated_limit(double x, double y_max);

struct DomainAudit {
  double sup_error = 0.0;
  double worst_x = 0.0;
  bool worst_at_edge = false;  // worst point is x = +-1/kappa
  double max_imaginary = 0.0;
  std::vector<double> grid;    // positive half; the negative half mirrors it
  std::vector<double> errors;  // |h(x) - 1/x| on the positive half
};

// Audit over D_kappa = [-1, -1/kappa] u [1/kappa, 1] on a grid uniform in 1/x
// (grid_size points per half). Points are evaluated on `threads` workers;
// the reduction order is fixed.
DomainAudit sup_error_on_domain(const FourierInverseParams& p, double kappa, int grid_size, int threads = 0);

// h applied to a Hermitian matrix through its eigenvalues.
ComplexMatrix apply_h_spectral(const HermitianOperator& a, const FourierInverseParams& p);

// V = sum_i alpha_i U_i with alpha_i > 0.
struct LcuProgram {
  std::vector<double> alpha;
  std::vector<ComplexMatrix> unitaries;

  double alpha_total() const;
  std::size_t size() const { return alpha.size(); }
  ComplexMatrix dense() const;
  void validate() const;
};

struct LcuResult {
  CVector state;                  // normalised system state after postselection
  double success_probability = 0.0;
  int ancilla_qubits = 0;
  StateVector full_state;         // ancilla register "anc" then system "S", before postselection
};

// W|0^m> = sum_i sqrt(alpha_i / alpha) |i>, multiplexed select, W^dagger,
// postselect the ancilla on |0^m>. Throws AlgorithmError when V|phi> vanishes.
LcuResult lcu_apply(const LcuProgram& program, const CVector& phi);

// Terms of h(A) with 1 <= j < j_limit and 0 < |k| <= k_limit: coefficient
// dy dz |z_k| e^{-z_k^2/2} / sqrt(2 pi), unitary i sign(z_k) e^{-i A y_j z_k}.
// The j = 0 terms cancel in pairs and are left out.
LcuProgram fourier_lcu_program(const HermitianOperator& a, const FourierInverseParams& p, std::int64_t j_limit,
                               std::int64_t k_limit);

struct ClosenessAudit {
  double eps_op = 0.0;       // |A - A~| (spectral)
  double distance = 0.0;     // | A b/|A b| - A~ b/|A~ b| |
  double inverse_distance = 0.0;  // same with A^{-1}, A~^{-1}
  bool pass = false;         // distance < 4 eps_op, or both states identical
};

// Requires every |eigenvalue| of A to be at least 1 and eps_op < 1/2.
ClosenessAudit state_closeness_audit(const HermitianOperator& a, const HermitianOperator& a_tilde, const CVector& b);

}  // namespace qlsim
