#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qlsim/numerics.hpp"

namespace qlsim {

// Qubit 0 is the most significant bit of a basis index. A register covering
// qubits [start, start + width) therefore reads its value from bits
// (n - start - width) .. (n - start - 1) of the index, its first qubit being
// the register's own most significant bit.
struct Register {
  std::string name;
  int start = 0;
  int width = 0;

  std::uint64_t dim() const { return std::uint64_t{1} << width; }
  Register qubit(int i) const;
  // Sub-range [offset, offset + w) of this register.
  Register slice(int offset, int w) const;
  bool overlaps(const Register& other) const;
};

// Union of adjacent registers, in order, as one register.
Register concat(const Register& first, const Register& second);

class RegisterLayout {
 public:
  RegisterLayout() = default;
  RegisterLayout& add(const std::string& name, int width);

  const Register& operator[](std::string_view name) const;
  bool has(std::string_view name) const;
  int num_qubits() const { return n_; }
  const std::vector<Register>& registers() const { return regs_; }
  bool operator==(const RegisterLayout& other) const;

 private:
  std::vector<Register> regs_;
  int n_ = 0;
};

// Qubit budget: 22 unless QLSIM_MAX_QUBITS says otherwise.
int max_qubits();

class StateVector {
 public:
  StateVector(RegisterLayout layout, std::vector<Complex> amplitudes);

  const RegisterLayout& layout() const { return layout_; }
  int num_qubits() const { return layout_.num_qubits(); }
  std::uint64_t size() const { return amps_.size(); }
  const Register& reg(std::string_view name) const { return layout_[name]; }

  Complex& operator[](std::uint64_t i) { return amps_[i]; }
  const Complex& operator[](std::uint64_t i) const { return amps_[i]; }
  std::vector<Complex>& amplitudes() { return amps_; }
  const std::vector<Complex>& amplitudes() const { return amps_; }

  double norm() const;
  void normalise();

  // Bit position of the register's least significant qubit.
  int shift(const Register& r) const { return num_qubits() - r.start - r.width; }
  std::uint64_t mask(const Register& r) const { return (r.dim() - 1) << shift(r); }
  std::uint64_t value(std::uint64_t index, const Register& r) const {
    return (index >> shift(r)) & (r.dim() - 1);
  }
  std::uint64_t with_value(std::uint64_t index, const Register& r, std::uint64_t v) const {
    return (index & ~mask(r)) | (v << shift(r));
  }

 private:
  RegisterLayout layout_;
  std::vector<Complex> amps_;
};

struct MeasurementRecord {
  std::string register_name;
  std::uint64_t outcome = 0;
  int width = 0;
  double probability = 0.0;

  std::string bitstring() const;
};

StateVector init_basis(const RegisterLayout& layout, std::uint64_t index);

void apply_unitary(StateVector& s, const ComplexMatrix& u, const Register& target);
void apply_controlled(StateVector& s, const ComplexMatrix& u, const Register& control,
                      std::uint64_t control_value, const Register& target);
// Uniformly controlled operation: the target sees gates[v] when the control
// register holds v. Every entry must be unitary.
void apply_multiplexed(StateVector& s, const Register& control, const Register& target,
                       const std::vector<ComplexMatrix>& gates);
// Multiplies each amplitude by phase(index); |phase| must be 1.
void apply_diagonal(StateVector& s, const std::function<Complex(std::uint64_t)>& phase);
// Moves amplitude at index i to map(i). The map must be a bijection.
void apply_permutation(StateVector& s, const std::function<std::uint64_t(std::uint64_t)>& map);
// Reflection I - 2 v v^dagger / |v|^2 on the register.
void apply_reflection(StateVector& s, const CVector& v, const Register& target);

// Born-rule distribution over the values of one register.
std::vector<double> register_probabilities(const StateVector& s, const Register& r);
std::pair<StateVector, double> measure_postselect(const StateVector& s, const Register& r,
                                                  std::uint64_t outcome);
// Samples a register outcome without collapsing the state.
MeasurementRecord sample_register(const StateVector& s, const Register& r, Rng& rng);

// Amplitudes of `keep` with every other qubit pinned to `rest_index`'s bits
// (unnormalised).
CVector slice_register(const StateVector& s, const Register& keep, std::uint64_t rest_index = 0);

double fidelity(const StateVector& a, const StateVector& b);
// Re<a|b>-based distance sqrt(2(1 - Re<a|b>)).
double re_distance(const StateVector& a, const StateVector& b);

StateVector amplitude_encode(const std::vector<double>& x, const std::string& register_name = "I");
CVector to_cvector(const StateVector& s);

nlohmann::json to_json(const StateVector& s);
StateVector state_from_json(const nlohmann::json& j);

}  // namespace qlsim
