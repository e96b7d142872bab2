#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qlsim/statesim.hpp"

namespace qlsim {

struct FilterFunctionParams {
  double kappa = 2.0;
  double c = 1.0;  // rotation normalisation, folded into f

  double kappa_prime() const { return 2.0 * kappa; }
  void validate() const;
};

// Piecewise filters on lambda > 0: f = 1/(2 kappa lambda) above 1/kappa, zero
// below 1/kappa', and a quarter-period sine/cosine interpolation in between.
double filter_f(double lambda, const FilterFunctionParams& p);
double filter_g(double lambda, const FilterFunctionParams& p);
// (sqrt(1 - f^2 - g^2), f, g)
std::array<double, 3> filter_vector(double lambda, const FilterFunctionParams& p);

struct LipschitzCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};
// lhs = |h(l1) - h(l2)| (equal to sqrt(2(1 - <h1|h2>)) for these unit real
// vectors, without the cancellation), rhs = (pi/2) kappa |l1 - l2|.
LipschitzCheck lipschitz_check(double lambda1, double lambda2, const FilterFunctionParams& p);

enum class ClockWindow { sine, uniform };
enum class PostselectMode { repeat_until_success, amplitude_amplify };
enum class EvolutionMethod { exact, trotter };

struct HhlConfig {
  int t = 8;                   // clock qubits
  double t0 = 100.0;           // evolution scale
  FilterFunctionParams filter;
  int amplification_rounds = -1;  // -1: optimal for the measured success probability
  PostselectMode mode = PostselectMode::repeat_until_success;
  ClockWindow window = ClockWindow::sine;
  EvolutionMethod evolution = EvolutionMethod::exact;
  int trotter_steps = 64;      // per unit U = exp(i A t0 / T) when evolution == trotter
  std::uint64_t seed = 1;      // repeat-until-success draws
  bool allow_zero_eigenvalues = false;  // flagged ill instead of rejected

  std::uint64_t clock_size() const { return std::uint64_t{1} << t; }
  void validate() const;
};

struct FlagDistribution {
  double nothing = 0.0;
  double well = 0.0;
  double ill = 0.0;
};

struct SolveReport {
  double fidelity = 0.0;              // |<0_C, x, well | psi>| on the postselected state
  double conditional_fidelity = 0.0;  // I register at clock 0 only, renormalised
  double re_distance = 0.0;           // sqrt(2(1 - Re<x|x~>)) on the conditional solution
  double residual = 0.0;              // |c A x~ - b^| at the best scale c
  double success_probability = 0.0;  // weight of the well flag
  double predicted_probability = 0.0; // sum_j |beta_j f(lambda_j)|^2
  bool representable = false;         // every eigenvalue sits on the readout grid
  FlagDistribution flags;
  double clock_residual = 0.0;        // postselected weight with clock != 0
  double clock_entropy = 0.0;         // bits, clock vs input register
  int qubits = 0;
  std::uint64_t controlled_evolutions = 0;
  std::uint64_t filter_rotations = 0;
  std::uint64_t attempts = 0;          // repeat-until-success draws
  int amplification_rounds = 0;
  double amplified_probability = 0.0;
};

struct HhlResult {
  StateVector state;     // postselected state over C, I, S
  StateVector solution;  // I register at clock 0, normalised
  SolveReport report;
};

// Sine-window clock state sqrt(2/T) sin(pi (tau + 1/2) / T) on register "C".
StateVector clock_initial_state(std::uint64_t T);

// Eigenvalue estimate attached to clock value k: 2 pi k / t0 in the lower
// half of the range, 2 pi (k - T) / t0 in the upper half.
double clock_eigenvalue(std::uint64_t k, std::uint64_t T, double t0);

// Full circuit up to (not including) postselection: returns the state after
// uncomputation together with the flag distribution seen before it.
struct HhlPrepared {
  StateVector state;
  FlagDistribution flags;
  std::uint64_t controlled_evolutions = 0;
  std::uint64_t filter_rotations = 0;
};
HhlPrepared hhl_prepare(const HermitianOperator& a, const CVector& b, const HhlConfig& cfg);

HhlResult hhl_solve(const HermitianOperator& a, const CVector& b, const HhlConfig& cfg);

// Runs on the Hermitian dilation of A (rescaled to unit spectral norm) with
// input (b; 0); solution coordinates are rows [m, m + n). Zero singular
// directions are flagged ill, giving the pseudoinverse.
struct NonHermitianResult {
  CVector solution;       // normalised, length n
  double fidelity = 0.0;  // vs pseudoinverse(A) b, global phase ignored
  double scale = 1.0;     // spectral norm divided out
  SolveReport report;
};
NonHermitianResult solve_nonhermitian(const ComplexMatrix& a, const CVector& b, const HhlConfig& cfg);

struct InfidelityRecord {
  double t0 = 0.0;
  double infidelity = 0.0;
};
std::vector<InfidelityRecord> infidelity_scaling_experiment(const HermitianOperator& a, const CVector& b,
                                                            const std::vector<double>& t0_grid, HhlConfig cfg);

// Throws InputError unless every |lambda| lies in [1/kappa - 1e-9, 1 + 1e-9]
// (optionally also exactly zero).
void check_admissible_spectrum(const HermitianOperator& a, double kappa, bool allow_zero = false);

}  // namespace qlsim
