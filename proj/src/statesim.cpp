#include "qlsim/statesim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace qlsim {

Register Register::qubit(int i) const { return slice(i, 1); }

Register Register::slice(int offset, int w) const {
  if (offset < 0 || w < 0 || offset + w > width) {
    throw InputError("register slice [" + std::to_string(offset) + ", " + std::to_string(offset + w) +
                     ") outside register " + name);
  }
  return Register{name + "[" + std::to_string(offset) + ":" + std::to_string(offset + w) + "]", start + offset, w};
}

bool Register::overlaps(const Register& other) const {
  if (width == 0 || other.width == 0) return false;
  return start < other.start + other.width && other.start < start + width;
}

Register concat(const Register& first, const Register& second) {
  if (first.start + first.width != second.start) {
    throw InputError("registers " + first.name + " and " + second.name + " are not adjacent");
  }
  return Register{first.name + "+" + second.name, first.start, first.width + second.width};
}

RegisterLayout& RegisterLayout::add(const std::string& name, int width) {
  if (width < 0) throw InputError("register " + name + " has negative width");
  if (has(name)) throw InputError("duplicate register name " + name);
  regs_.push_back(Register{name, n_, width});
  n_ += width;
  return *this;
}

const Register& RegisterLayout::operator[](std::string_view name) const {
  for (const auto& r : regs_)
    if (r.name == name) return r;
  throw InputError("unknown register " + std::string(name));
}

bool RegisterLayout::has(std::string_view name) const {
  return std::any_of(regs_.begin(), regs_.end(), [&](const Register& r) { return r.name == name; });
}

bool RegisterLayout::operator==(const RegisterLayout& other) const {
  if (n_ != other.n_ || regs_.size() != other.regs_.size()) return false;
  for (std::size_t i = 0; i < regs_.size(); ++i) {
    if (regs_[i].name != other.regs_[i].name || regs_[i].start != other.regs_[i].start ||
        regs_[i].width != other.regs_[i].width)
      return false;
  }
  return true;
}

int max_qubits() {
  if (const char* env = std::getenv("QLSIM_MAX_QUBITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 40) return static_cast<int>(v);
  }
  return 22;
}

StateVector::StateVector(RegisterLayout layout, std::vector<Complex> amplitudes)
    : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
  if (layout_.num_qubits() > max_qubits()) {
    throw ResourceError("state needs " + std::to_string(layout_.num_qubits()) + " qubits, budget is " +
                        std::to_string(max_qubits()));
  }
  if (amps_.size() != (std::uint64_t{1} << layout_.num_qubits())) {
    throw InputError("amplitude count " + std::to_string(amps_.size()) + " does not match " +
                     std::to_string(layout_.num_qubits()) + " qubits");
  }
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

void StateVector::normalise() {
  const double nrm = norm();
  if (nrm < 1e-300) throw AlgorithmError("cannot normalise the zero vector");
  for (auto& a : amps_) a /= nrm;
}

std::string MeasurementRecord::bitstring() const {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i)
    if ((outcome >> (width - 1 - i)) & 1U) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

StateVector init_basis(const RegisterLayout& layout, std::uint64_t index) {
  if (layout.num_qubits() > max_qubits()) {
    throw ResourceError("state needs " + std::to_string(layout.num_qubits()) + " qubits, budget is " +
                        std::to_string(max_qubits()));
  }
  const std::uint64_t dim = std::uint64_t{1} << layout.num_qubits();
  if (index >= dim) {
    throw InputError("basis index " + std::to_string(index) + " out of range for " +
                     std::to_string(layout.num_qubits()) + " qubits");
  }
  std::vector<Complex> amps(dim, Complex(0.0, 0.0));
  amps[index] = 1.0;
  return StateVector(layout, std::move(amps));
}

namespace {

void check_register(const StateVector& s, const Register& r) {
  if (r.start < 0 || r.width < 0 || r.start + r.width > s.num_qubits()) {
    throw InputError("register " + r.name + " outside the state's " + std::to_string(s.num_qubits()) + " qubits");
  }
}

void check_gate(const ComplexMatrix& u, const Register& target) {
  if (static_cast<std::uint64_t>(u.rows()) != target.dim() || u.cols() != u.rows()) {
    throw InputError("gate of size " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                     " does not fit register " + target.name + " of width " + std::to_string(target.width));
  }
  if (!is_unitary(u, 1e-10)) throw InputError("gate on register " + target.name + " is not unitary");
}

// Core kernel. For every assignment of the qubits outside `target`, applies
// gate(v) (row-major, may be null for identity) to the target fibre, where v
// is the control register's value on that assignment.
template <typename GateFor>
void apply_fibres(StateVector& s, const Register& control, const Register& target, GateFor gate_for) {
  const int n = s.num_qubits();
  const int w = target.width;
  const int sh = s.shift(target);
  const std::uint64_t tdim = target.dim();
  const std::uint64_t low_mask = (std::uint64_t{1} << sh) - 1;
  const std::uint64_t outer = std::uint64_t{1} << (n - w);
  std::vector<Complex> in(tdim), out(tdim);
  std::vector<std::uint64_t> nz;
  nz.reserve(tdim);
  auto& amps = s.amplitudes();
  for (std::uint64_t r = 0; r < outer; ++r) {
    const std::uint64_t base = ((r >> sh) << (sh + w)) | (r & low_mask);
    const std::uint64_t cv = control.width == 0 ? 0 : s.value(base, control);
    const Complex* g = gate_for(cv);
    if (g == nullptr) continue;
    if (tdim == 2) {
      Complex& a0 = amps[base];
      Complex& a1 = amps[base | (std::uint64_t{1} << sh)];
      if (a0 == Complex(0.0, 0.0) && a1 == Complex(0.0, 0.0)) continue;
      const Complex x0 = a0, x1 = a1;
      a0 = g[0] * x0 + g[1] * x1;
      a1 = g[2] * x0 + g[3] * x1;
      continue;
    }
    nz.clear();
    for (std::uint64_t v = 0; v < tdim; ++v) {
      in[v] = amps[base | (v << sh)];
      if (in[v] != Complex(0.0, 0.0)) nz.push_back(v);
    }
    // Structured states leave many fibres empty or sparse.
    if (nz.empty()) continue;
    for (std::uint64_t i = 0; i < tdim; ++i) {
      Complex acc(0.0, 0.0);
      const Complex* row = g + i * tdim;
      for (std::uint64_t j : nz) acc += row[j] * in[j];
      out[i] = acc;
    }
    for (std::uint64_t v = 0; v < tdim; ++v) amps[base | (v << sh)] = out[v];
  }
}

std::vector<Complex> row_major(const ComplexMatrix& u) {
  std::vector<Complex> out(static_cast<std::size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) out[static_cast<std::size_t>(i * u.cols() + j)] = u(i, j);
  return out;
}

}  // namespace

void apply_unitary(StateVector& s, const ComplexMatrix& u, const Register& target) {
  check_register(s, target);
  check_gate(u, target);
  const std::vector<Complex> g = row_major(u);
  apply_fibres(s, Register{"", 0, 0}, target, [&](std::uint64_t) { return g.data(); });
}

void apply_controlled(StateVector& s, const ComplexMatrix& u, const Register& control,
                      std::uint64_t control_value, const Register& target) {
  check_register(s, control);
  check_register(s, target);
  if (control.overlaps(target)) {
    throw InputError("control register " + control.name + " overlaps target register " + target.name);
  }
  check_gate(u, target);
  if (control_value >= control.dim()) return;
  const std::vector<Complex> g = row_major(u);
  apply_fibres(s, control, target,
               [&](std::uint64_t cv) { return cv == control_value ? g.data() : nullptr; });
}

void apply_multiplexed(StateVector& s, const Register& control, const Register& target,
                       const std::vector<ComplexMatrix>& gates) {
  check_register(s, control);
  check_register(s, target);
  if (control.overlaps(target)) {
    throw InputError("control register " + control.name + " overlaps target register " + target.name);
  }
  if (gates.size() != control.dim()) {
    throw InputError("multiplexed operation needs " + std::to_string(control.dim()) + " gates, got " +
                     std::to_string(gates.size()));
  }
  std::vector<std::vector<Complex>> rows;
  rows.reserve(gates.size());
  for (const auto& u : gates) {
    check_gate(u, target);
    rows.push_back(row_major(u));
  }
  apply_fibres(s, control, target, [&](std::uint64_t cv) { return rows[cv].data(); });
}

void apply_diagonal(StateVector& s, const std::function<Complex(std::uint64_t)>& phase) {
  auto& amps = s.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    const Complex p = phase(i);
    if (std::abs(std::abs(p) - 1.0) > 1e-10) throw InputError("diagonal entry is not a unit phase");
    amps[i] *= p;
  }
}

void apply_permutation(StateVector& s, const std::function<std::uint64_t(std::uint64_t)>& map) {
  auto& amps = s.amplitudes();
  std::vector<Complex> out(amps.size(), Complex(0.0, 0.0));
  std::vector<bool> hit(amps.size(), false);
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    const std::uint64_t j = map(i);
    if (j >= amps.size() || hit[j]) throw InputError("basis map is not a permutation");
    hit[j] = true;
    out[j] = amps[i];
  }
  amps.swap(out);
}

void apply_reflection(StateVector& s, const CVector& v, const Register& target) {
  check_register(s, target);
  if (static_cast<std::uint64_t>(v.size()) != target.dim()) {
    throw InputError("reflection vector does not fit register " + target.name);
  }
  const double vv = v.squaredNorm();
  if (vv < 1e-30) return;
  const int n = s.num_qubits();
  const int sh = s.shift(target);
  const std::uint64_t tdim = target.dim();
  const std::uint64_t low_mask = (std::uint64_t{1} << sh) - 1;
  const std::uint64_t outer = std::uint64_t{1} << (n - target.width);
  auto& amps = s.amplitudes();
  for (std::uint64_t r = 0; r < outer; ++r) {
    const std::uint64_t base = ((r >> sh) << (sh + target.width)) | (r & low_mask);
    Complex dot(0.0, 0.0);
    for (std::uint64_t k = 0; k < tdim; ++k) dot += std::conj(v(static_cast<Eigen::Index>(k))) * amps[base | (k << sh)];
    const Complex c = 2.0 * dot / vv;
    for (std::uint64_t k = 0; k < tdim; ++k) amps[base | (k << sh)] -= c * v(static_cast<Eigen::Index>(k));
  }
}

std::vector<double> register_probabilities(const StateVector& s, const Register& r) {
  check_register(s, r);
  std::vector<double> p(r.dim(), 0.0);
  const auto& amps = s.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) p[s.value(i, r)] += std::norm(amps[i]);
  return p;
}

std::pair<StateVector, double> measure_postselect(const StateVector& s, const Register& r,
                                                  std::uint64_t outcome) {
  check_register(s, r);
  if (outcome >= r.dim()) {
    throw InputError("outcome " + std::to_string(outcome) + " does not fit register " + r.name);
  }
  StateVector out = s;
  double p = 0.0;
  auto& amps = out.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (out.value(i, r) == outcome) {
      p += std::norm(amps[i]);
    } else {
      amps[i] = 0.0;
    }
  }
  const double total = s.norm();
  p /= total * total;
  if (p < 1e-14) throw AlgorithmError("impossible outcome on register " + r.name);
  out.normalise();
  return {std::move(out), p};
}

MeasurementRecord sample_register(const StateVector& s, const Register& r, Rng& rng) {
  const std::vector<double> p = register_probabilities(s, r);
  double total = 0.0;
  for (double x : p) total += x;
  std::uniform_real_distribution<double> u(0.0, total);
  const double draw = u(rng);
  double acc = 0.0;
  std::uint64_t pick = p.size() - 1;
  for (std::uint64_t v = 0; v < p.size(); ++v) {
    acc += p[v];
    if (draw < acc) {
      pick = v;
      break;
    }
  }
  return MeasurementRecord{r.name, pick, r.width, p[pick] / total};
}

CVector slice_register(const StateVector& s, const Register& keep, std::uint64_t rest_index) {
  check_register(s, keep);
  const std::uint64_t base = rest_index & ~s.mask(keep);
  CVector out(static_cast<Eigen::Index>(keep.dim()));
  for (std::uint64_t v = 0; v < keep.dim(); ++v) out(static_cast<Eigen::Index>(v)) = s[base | (v << s.shift(keep))];
  return out;
}

namespace {
Complex inner(const StateVector& a, const StateVector& b) {
  if (!(a.layout() == b.layout())) throw InputError("fidelity needs states with the same register layout");
  Complex acc(0.0, 0.0);
  for (std::uint64_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}
}  // namespace

double fidelity(const StateVector& a, const StateVector& b) {
  return std::clamp(std::abs(inner(a, b)), 0.0, 1.0);
}

double re_distance(const StateVector& a, const StateVector& b) {
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - inner(a, b).real())));
}

StateVector amplitude_encode(const std::vector<double>& x, const std::string& register_name) {
  double nrm = 0.0;
  for (double v : x) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (x.empty() || nrm == 0.0) throw InputError("cannot amplitude-encode the zero vector");
  const int n = std::max(1, ceil_log2(x.size()));
  RegisterLayout layout;
  layout.add(register_name, n);
  std::vector<Complex> amps(std::uint64_t{1} << n, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) amps[i] = x[i] / nrm;
  return StateVector(layout, std::move(amps));
}

CVector to_cvector(const StateVector& s) {
  CVector v(static_cast<Eigen::Index>(s.size()));
  for (std::uint64_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

nlohmann::json to_json(const StateVector& s) {
  nlohmann::json regs = nlohmann::json::object();
  for (const auto& r : s.layout().registers()) regs[r.name] = {{"start", r.start}, {"width", r.width}};
  nlohmann::json amps = nlohmann::json::array();
  for (const auto& a : s.amplitudes()) amps.push_back({a.real(), a.imag()});
  return {{"n", s.num_qubits()}, {"registers", regs}, {"amplitudes", amps}};
}

StateVector state_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    std::vector<Register> regs;
    for (const auto& [name, spec] : j.at("registers").items())
      regs.push_back(Register{name, spec.at("start").get<int>(), spec.at("width").get<int>()});
    std::sort(regs.begin(), regs.end(), [](const Register& a, const Register& b) { return a.start < b.start; });
    RegisterLayout layout;
    for (const auto& r : regs) {
      if (r.start != layout.num_qubits()) throw InputError("registers in state JSON are not contiguous");
      layout.add(r.name, r.width);
    }
    if (layout.num_qubits() != n) throw InputError("register widths in state JSON do not sum to n");
    std::vector<Complex> amps;
    for (const auto& a : j.at("amplitudes")) amps.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    return StateVector(layout, std::move(amps));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed state JSON: ") + e.what());
  }
}

}  // namespace qlsim
