#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qlsim/numerics.hpp"
#include "qlsim/statesim.hpp"

namespace qlsim {

// Unitary DFT matrix D_jk = w^{jk} / sqrt(N), w = exp(2 pi i / N).
ComplexMatrix dft_matrix(int qubits);

void qft(StateVector& s, const Register& r);
void inverse_qft(StateVector& s, const Register& r);

struct PhaseEstimationConfig {
  int t = 1;          // clock qubits, T = 2^t
  ComplexMatrix u;    // target unitary
  double delta = 0.0; // precision goal (informational)

  std::uint64_t clock_size() const { return std::uint64_t{1} << t; }
};

// U = exp(i H t0 / T), the evolution used for eigenvalue readout.
PhaseEstimationConfig phase_estimation_for_hamiltonian(const HermitianOperator& h, double t0, int t);

// For clock qubit q (weight 2^{t-1-q}) applies U^{weight} controlled on q.
// With inverse set, applies the adjoint of the whole sequence.
void apply_controlled_powers(StateVector& s, const Register& clock, const Register& target,
                             const ComplexMatrix& u, bool inverse = false);

// Standard circuit on a zeroed clock: H^t, controlled powers, inverse QFT.
void phase_estimate(const PhaseEstimationConfig& cfg, StateVector& s, const Register& clock,
                    const Register& target);
void inverse_phase_estimate(const PhaseEstimationConfig& cfg, StateVector& s, const Register& clock,
                            const Register& target);
// Convenience: fresh layout C (clock) + I (target) with the input on I.
StateVector phase_estimate(const PhaseEstimationConfig& cfg, const CVector& input);

struct QpeAmplitude {
  std::uint64_t j = 0;
  std::uint64_t k = 0;
  Complex alpha;
  double delta = 0.0;  // lambda_j t0 - 2 pi k
};

// Amplitude of clock outcome k for a sine-window clock state and eigenvalue
// lambda, by direct summation over tau.
Complex qpe_amplitude_direct(double lambda, double t0, std::uint64_t T, std::uint64_t k);
QpeAmplitude qpe_amplitude_closed_form(std::uint64_t j, std::uint64_t k, double lambda, double t0,
                                       std::uint64_t T);

// |v>|0> -> |v>(cos theta(v)|0> + sin theta(v)|1>) on a single target qubit.
void controlled_rotation_by_register(StateVector& s, const Register& value,
                                     const std::function<double(std::uint64_t)>& theta,
                                     const Register& target_qubit);

struct GroverProblem {
  int n = 1;
  std::vector<std::uint64_t> marked;

  std::uint64_t size() const { return std::uint64_t{1} << n; }
  void validate() const;
};

void apply_phase_oracle(StateVector& s, const Register& r, const std::vector<std::uint64_t>& marked);
// Inversion about the mean on register r (2|psi0><psi0| - I).
void apply_diffusion(StateVector& s, const Register& r);
StateVector grover_state(const GroverProblem& p, int iterations);
double grover_run(const GroverProblem& p, int iterations);
int optimal_iterations(std::uint64_t N, std::uint64_t M);
// Integer k maximising sin^2((2k+1) theta), ties to the smaller k.
int optimal_rounds_for_angle(double theta);

// In-place application of a projector to raw amplitudes.
using Projector = std::function<void(std::vector<Complex>&)>;
Projector basis_projector(std::function<bool(std::uint64_t)> good);
Projector matrix_projector(const ComplexMatrix& p);

struct AmplificationResult {
  StateVector state;
  double probability = 0.0;          // good-subspace weight after amplification
  double initial_probability = 0.0;
  int rounds = 0;
};

// Rounds < 0 selects the optimal count for the initial success probability.
AmplificationResult amplitude_amplify(const StateVector& prepared, const Projector& good, int rounds = -1);

}  // namespace qlsim
