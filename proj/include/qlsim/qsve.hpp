#pragma once

#include <cstdint>
#include <vector>

#include "qlsim/statesim.hpp"

namespace qlsim {

// A / |A|_F = M^dagger N on C^{m' n'} (m', n' the padded row/column counts),
// with register order |row>_R |column>_J.
//   M |i> = |i> (x) |A_i>,  |A_i> = sum_j conj(A_ij) |j> / |A_i|
//   N |j> = |A_F> (x) |j>,  |A_F> = sum_i |A_i| |i> / |A|_F
// A zero row maps to |i> (x) |0>.
struct QsveFactorisation {
  ComplexMatrix a;        // padded to m' x n'
  Eigen::Index rows = 0;  // original shape
  Eigen::Index cols = 0;
  double frobenius = 0.0;
  int row_qubits = 0;
  int col_qubits = 0;
  std::vector<double> row_norms;
  ComplexMatrix m;
  ComplexMatrix n;

  // (2 M M^dagger - I)(2 N N^dagger - I)
  ComplexMatrix walk() const;
};

QsveFactorisation build_factorisation(const ComplexMatrix& a);

// Smallest t with 2^t >= 2 pi / delta.
int qsve_clock_qubits(double delta);

// min(k, T - k): the clock value with the +-theta ambiguity removed.
std::uint64_t fold_phase(std::uint64_t k, std::uint64_t T);
// |A|_F cos(pi fold / T), i.e. cos(theta~ / 2) with theta~ = 2 pi fold / T.
double sigma_from_fold(std::uint64_t fold, std::uint64_t T, double frobenius);

// One coherent singular value estimation on an existing state: loads |A_F>
// into R (which must be zero), phase-estimates W on (R, J) with `clock`,
// XORs the folded clock value into `value`, then undoes phase estimation
// and the loader. Applying it twice restores the state.
void apply_qsve(const QsveFactorisation& f, StateVector& s, const Register& clock, const Register& value,
                const Register& rows, const Register& cols);

struct QsveEstimate {
  int t = 0;
  std::vector<double> fold_probabilities;  // index = folded clock value, size T/2 + 1
  double frobenius = 0.0;

  std::uint64_t clock_size() const { return std::uint64_t{1} << t; }
  double sigma(std::uint64_t fold) const;
  double most_likely_sigma() const;
  double sample(Rng& rng) const;
};

// Distribution of sigma estimates for input sum_i alpha_i |i> on the column
// space (alpha of length n), at precision delta.
QsveEstimate qsve_estimate(const QsveFactorisation& f, const CVector& alpha, double delta);
QsveEstimate qsve_estimate_with_clock(const QsveFactorisation& f, const CVector& alpha, int t);

struct QlssConfig {
  double kappa = 2.0;
  int t = 5;                   // clock qubits shared by both estimations
  double gamma = 0.0;          // rotation scale, 0 selects 1/(2 kappa)
  double frobenius_b = 0.0;    // Frobenius norm to pad A to (0: no padding)
  double frobenius_c = 0.0;    // same for A + mu I
  bool require_precision = true;  // insist on 2 pi / T <= 1/(2 kappa)
  int max_retries = 2;         // clock doublings after a comparator tie

  double mu() const { return 1.0 / kappa; }
  double rotation_scale() const { return gamma > 0.0 ? gamma : 1.0 / (2.0 * kappa); }
  double delta() const { return 2.0 * kPi / static_cast<double>(std::uint64_t{1} << t); }
  void validate() const;
};

struct QlssReport {
  double fidelity = 0.0;             // vs A^{-1} b, global phase ignored
  double re_distance = 0.0;
  double success_probability = 0.0;  // ancilla |0> weight
  double predicted_probability = 0.0;  // sum |beta_j gamma / lambda_j|^2
  double tie_weight = 0.0;           // amplitude mass on comparator ties in the final run
  int t_used = 0;
  int retries = 0;
  int qubits = 0;
};

struct QlssResult {
  CVector solution;  // normalised, length dim(A)
  QlssReport report;
};

// Algorithm: two coherent singular value estimations (A into B, A + mu I
// into C), a sign phase (-1)^[sigma_B > sigma_C], uncompute C, rotate an
// ancilla to gamma / sigma_B, uncompute B, postselect the ancilla on |0>.
QlssResult qlss_solve(const HermitianOperator& a, const CVector& b, const QlssConfig& cfg);

struct SignFlag {
  double lambda = 0.0;
  double sigma_b = 0.0;  // most likely estimate of |lambda|
  double sigma_c = 0.0;  // most likely estimate of |lambda + mu|
  bool flag = false;     // sigma_b > sigma_c
  bool tie = false;
};
// The comparator evaluated on each eigenvector of A through the same
// estimation circuits (most likely outcome per register).
std::vector<SignFlag> qlss_sign_flags(const HermitianOperator& a, const QlssConfig& cfg);

// Parameters for which both estimations read out exactly on a T = 2^t grid:
// A has spectrum {a, a, -b, -b} with max(a, b) = 1, and the Frobenius pads
// make a / F_B, b / F_B, (a + mu) / F_C, (b - mu) / F_C all of the form
// cos(pi k / T).
struct QlssExactConfig {
  int t = 0;
  int k1 = 0, k2 = 0, k3 = 0, k4 = 0;
  double a = 0.0, b = 0.0, mu = 0.0;
  double frobenius_b = 0.0, frobenius_c = 0.0;
  double kappa() const { return 1.0 / mu; }
};
// Sorted by kappa; only configurations with 2 pi / T <= mu / 2.
std::vector<QlssExactConfig> qlss_exact_configurations(int t);
// Random eigenbasis for one configuration, plus the matching solver config.
std::pair<HermitianOperator, QlssConfig> qlss_exact_instance(const QlssExactConfig& c, Rng& rng);

}  // namespace qlsim
