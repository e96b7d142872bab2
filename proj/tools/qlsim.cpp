#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlsim/harness.hpp"

using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::string format;
  std::optional<int> trials;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output directory (default: stdout)");
  cmd->add_option("--threads", c.threads, "Worker threads for trials")->check(CLI::Range(1, 1024));
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--trials", c.trials, "Number of trials")->check(CLI::Range(1, 1000000));
}

// Options that map one-to-one onto experiment parameters; only the ones the
// user actually passed reach the config, so defaults live in the library.
struct ParamOptions {
  std::map<std::string, std::optional<double>> numbers;
  std::map<std::string, std::optional<std::string>> words;
};

void number_param(CLI::App* cmd, ParamOptions& p, const std::string& flag, const std::string& key,
                  const std::string& help) {
  cmd->add_option(flag, p.numbers[key], help);
}

void word_param(CLI::App* cmd, ParamOptions& p, const std::string& flag, const std::string& key,
                const std::string& help) {
  cmd->add_option(flag, p.words[key], help);
}

struct MatrixOptions {
  std::string file;
  std::optional<int> dim;
  std::optional<double> kappa;
  std::optional<std::string> definiteness;
  std::optional<int> sparsity;
  std::optional<std::uint64_t> snap;
  std::optional<std::uint64_t> matrix_seed;

  bool any_generator() const { return dim || kappa || definiteness || sparsity || snap || matrix_seed; }
};

void add_matrix(CLI::App* cmd, MatrixOptions& m) {
  cmd->add_option("--matrix", m.file, "Matrix JSON file");
  cmd->add_option("--dim", m.dim, "Generated matrix dimension (power of two)");
  cmd->add_option("--kappa-target", m.kappa, "Generated matrix condition number");
  cmd->add_option("--definiteness", m.definiteness, "positive or indefinite");
  cmd->add_option("--sparsity", m.sparsity, "Nonzeros per row of the generated matrix (0: dense)");
  cmd->add_option("--snap", m.snap, "Round generated eigenvalues to multiples of 1/snap");
  cmd->add_option("--matrix-seed", m.matrix_seed, "Generator seed (default: derived per trial)");
}

json matrix_json(const MatrixOptions& m) {
  if (!m.file.empty()) return json{{"file", m.file}};
  json g = json::object();
  if (m.dim) g["dimension"] = *m.dim;
  if (m.kappa) g["kappa"] = *m.kappa;
  if (m.definiteness) g["definiteness"] = *m.definiteness;
  if (m.sparsity) g["sparsity"] = *m.sparsity;
  if (m.snap) g["snap"] = *m.snap;
  if (m.matrix_seed) g["seed"] = *m.matrix_seed;
  return json{{"generator", g}};
}

json build_document(const std::string& experiment, const Common& c, const ParamOptions& p, const MatrixOptions* m) {
  json doc;
  if (!c.config.empty()) {
    doc = qlsim::load_config(c.config).source;
    if (doc.at("experiment") != experiment) {
      throw qlsim::InputError("config experiment \"" + doc.at("experiment").get<std::string>() +
                              "\" does not match subcommand (" + experiment + ")");
    }
  } else {
    doc["experiment"] = experiment;
  }
  json params = doc.contains("parameters") ? doc["parameters"] : json::object();
  for (const auto& [key, value] : p.numbers) {
    if (!value) continue;
    const double v = *value;
    if (v == static_cast<double>(static_cast<long long>(v))) {
      params[key] = static_cast<long long>(v);
    } else {
      params[key] = v;
    }
  }
  for (const auto& [key, value] : p.words) {
    if (value) params[key] = *value;
  }
  if (!params.empty()) doc["parameters"] = params;
  if (m && (!m->file.empty() || m->any_generator())) doc["matrix"] = matrix_json(*m);
  if (c.seed) doc["seed"] = *c.seed;
  if (c.threads) doc["threads"] = *c.threads;
  if (c.trials) doc["trials"] = *c.trials;
  if (!c.out.empty() || !c.format.empty()) {
    json out = doc.contains("output") ? doc["output"] : json::object();
    if (!c.out.empty()) out["directory"] = c.out;
    if (!c.format.empty()) out["format"] = c.format;
    doc["output"] = out;
  }
  return doc;
}

int run(const json& doc) {
  const auto cfg = qlsim::parse_config(doc);
  const auto result = qlsim::run_experiment(cfg);
  if (result.files.empty()) {
    if (cfg.output.format == "json") {
      qlsim::write_json(result.table, std::cout);
    } else {
      qlsim::write_csv(result.table, std::cout);
    }
  } else {
    for (const auto& f : result.files) std::cerr << "wrote " << f << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qlsim: statevector experiments for quantum linear-system solvers"};
  app.require_subcommand(1);

  struct Command {
    std::string experiment;
    Common common;
    ParamOptions params;
    MatrixOptions matrix;
    bool uses_matrix = false;
    CLI::App* app = nullptr;
  };
  std::map<std::string, Command> commands;
  auto make = [&](const std::string& name, const std::string& experiment, const std::string& help, bool matrix) {
    Command& c = commands[name];
    c.experiment = experiment;
    c.uses_matrix = matrix;
    c.app = app.add_subcommand(name, help);
    add_common(c.app, c.common);
    if (matrix) add_matrix(c.app, c.matrix);
    return &c;
  };

  auto* solve = make("solve", "hhl", "HHL solve of A x = b", true);
  number_param(solve->app, solve->params, "--t", "t", "Clock qubits");
  number_param(solve->app, solve->params, "--t0", "t0", "Evolution scale");
  number_param(solve->app, solve->params, "--kappa", "kappa", "Filter condition number (default: audited)");
  number_param(solve->app, solve->params, "--trotter-steps", "trotter_steps", "Trotter steps per unit evolution");
  word_param(solve->app, solve->params, "--window", "window", "Clock window: sine or uniform");
  word_param(solve->app, solve->params, "--mode", "mode", "Postselection: rus or aa");
  word_param(solve->app, solve->params, "--evolution", "evolution", "exact or trotter");

  auto* qlss = make("qlss", "qlss", "Sign-aware solver built on two singular value estimations", true);
  number_param(qlss->app, qlss->params, "--t", "t", "Clock qubits");
  number_param(qlss->app, qlss->params, "--config-index", "config_index", "Exact instance index");
  number_param(qlss->app, qlss->params, "--kappa", "kappa", "Condition number bound for a given matrix");

  auto* qsve = make("qsve", "qsve", "Singular value estimation per right singular vector", true);
  number_param(qsve->app, qsve->params, "--delta", "delta", "Precision");

  auto* qpe = make("qpe", "qpe", "Phase estimation distribution for a single phase", false);
  number_param(qpe->app, qpe->params, "--t", "t", "Clock qubits");
  number_param(qpe->app, qpe->params, "--phase", "phase", "Eigenphase in turns");

  auto* grover = make("grover", "grover", "Grover success probability vs closed form", false);
  number_param(grover->app, grover->params, "--qubits", "qubits", "Search register qubits");
  number_param(grover->app, grover->params, "--marked", "marked", "Number of marked items");
  number_param(grover->app, grover->params, "--iterations", "max_iterations", "Largest iteration count");

  auto* qram = make("qram", "qram", "Tree loader round trip and rotation noise", false);
  number_param(qram->app, qram->params, "--dim", "dimension", "Vector length");
  number_param(qram->app, qram->params, "--eps-rot", "eps_rot", "Rotation angle noise");

  auto* trotter = make("trotter", "trotter", "First-order Trotter error for a random pair", false);
  number_param(trotter->app, trotter->params, "--dim", "dimension", "Matrix dimension");
  number_param(trotter->app, trotter->params, "--t", "t", "Evolution time");
  number_param(trotter->app, trotter->params, "--m", "m", "Trotter steps");

  auto* fourier = make("fourier-inverse", "fourier_inverse", "Fourier-series 1/x audit grid", false);
  number_param(fourier->app, fourier->params, "--kappa", "kappa", "Domain condition number");
  number_param(fourier->app, fourier->params, "--epsilon", "epsilon", "Target sup error");
  number_param(fourier->app, fourier->params, "--grid", "grid", "Audit points per half-domain");

  auto* bqp = make("bqp-reduction", "bqp_reduction", "Circuit simulation by matrix inversion", false);
  number_param(bqp->app, bqp->params, "--qubits", "qubits", "Circuit qubits");
  number_param(bqp->app, bqp->params, "--gates", "gates", "Circuit length T");
  number_param(bqp->app, bqp->params, "--samples", "samples", "Sampled estimate alongside the exact one");

  auto* gen = make("gen-matrix", "gen_matrix", "Generate and audit a Hermitian test matrix", true);
  std::string save_path;
  gen->app->add_option("--save", save_path, "Also write the matrix JSON to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& [name, cmd] : commands) {
      if (!cmd.app->parsed()) continue;
      const json doc = build_document(cmd.experiment, cmd.common, cmd.params, cmd.uses_matrix ? &cmd.matrix : nullptr);
      if (name == "gen-matrix" && !save_path.empty()) {
        const auto cfg = qlsim::parse_config(doc);
        const auto result = qlsim::run_experiment(cfg);
        const auto& cell = result.table.rows.at(0).back();
        const auto m = qlsim::matrix_from_json(json::parse(std::get<std::string>(cell)), "generated");
        qlsim::save_matrix_file(m, save_path);
        std::cerr << "wrote " << save_path << '\n';
      }
      return run(doc);
    }
  } catch (const qlsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
