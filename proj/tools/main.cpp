// Command-line front end: dataset generation, the learners, the clock and
// ground-state verifiers, and the experiment harness behind one binary.
//
// Exit codes: 0 success / experiment passed, 1 bad input (flags, files,
// config), 2 a verification or experiment missed its tolerance, 3 internal
// failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "obslearn/clockham.hpp"
#include "obslearn/harness.hpp"
#include "obslearn/kitaev.hpp"

using namespace obslearn;

namespace {

json load_json_file(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": invalid JSON");
  return j;
}

// Every command prints the configuration it actually ran with; in JSON mode
// the config rides inside the result object instead.
void echo_config(bool json_mode, const json& cfg) {
  if (!json_mode) std::cout << "config: " << cfg.dump() << '\n';
}

void emit_json(const json& out) { std::cout << out.dump(2) << '\n'; }

Circuit load_or_random_circuit(const std::string& file, int work, int gates,
                               std::uint64_t seed) {
  if (!file.empty()) return parse_circuit(read_text_file(file), work);
  Rng rng = Rng::stream(seed, 0, 0x636c69);
  return random_circuit(work, gates, rng);
}

Eigen::VectorXcd seeded_state(int n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 1, 0x636c69);
  Eigen::VectorXcd psi(std::int64_t(1) << n);
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    psi[i] = cd(rng.normal(), rng.normal());
  psi.normalize();
  return psi;
}

// ---------------------------------------------------------------------------

struct GenDatasetArgs {
  std::string config;
  std::string out;
  std::string features_out;
  std::string labels_out;
  std::int64_t count = 0;
  std::int64_t seed = -1;
  bool json = false;
};

int cmd_gen_dataset(const GenDatasetArgs& a) {
  ExperimentConfig cfg = ExperimentConfig::from_json(load_json_file(a.config));
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  ConceptBundle bundle = make_concept(cfg.target);
  ConceptEvaluator eval(bundle.spec);

  NoiseModel noise = NoiseModel::exact();
  if (cfg.noise == "uniform") noise = NoiseModel::uniform(cfg.eps2);
  if (cfg.noise == "shots") noise = NoiseModel::with_shots(cfg.shots);

  std::int64_t count = a.count > 0 ? a.count : cfg.n_train;
  if (count <= 0)
    throw DomainError("gen-dataset: pass --count or set n_train in the "
                      "config");

  json cfg_j = cfg.to_json();
  cfg_j["count"] = count;
  echo_config(a.json, cfg_j);

  if (bundle.spec->variant() == ConceptSpec::Variant::kFlipped) {
    if (!a.features_out.empty() || !a.labels_out.empty())
      throw DomainError("gen-dataset: flipped samples already hold the "
                        "coefficient rows; --features-out/--labels-out do "
                        "not apply");
    FlippedSampleSet set = gen_flipped_dataset(eval, count, noise, cfg.seed);
    save_flipped_file(a.out, set);
    json out{{"config", cfg_j},
             {"out", a.out},
             {"count", set.alphas.rows()},
             {"m", set.alphas.cols()}};
    if (a.json) emit_json(out);
    else
      std::cout << "wrote " << count << " coefficient samples (m = "
                << set.alphas.cols() << ") to " << a.out << '\n';
    return 0;
  }

  Dataset ds = gen_dataset(eval, bundle.dist, count, noise, cfg.seed);
  save_dataset_file(a.out, ds);
  if (!a.features_out.empty()) {
    std::ostringstream os;
    for (const Sample& s : ds.samples) {
      Eigen::VectorXd phi = eval.features(s.x);
      os << json(std::vector<double>(phi.data(), phi.data() + phi.size()))
                .dump()
         << '\n';
    }
    write_text_file(a.features_out, os.str());
  }
  if (!a.labels_out.empty()) {
    std::ostringstream os;
    for (const Sample& s : ds.samples) os << json(s.y).dump() << '\n';
    write_text_file(a.labels_out, os.str());
  }
  json out{{"config", cfg_j},
           {"out", a.out},
           {"count", ds.meta.count},
           {"concept", ds.meta.concept_fingerprint},
           {"eps2_declared", ds.meta.eps2_declared},
           {"eps2_observed", ds.meta.eps2_observed}};
  if (a.json) emit_json(out);
  else
    std::cout << "wrote " << ds.meta.count << " samples of "
              << ds.meta.concept_fingerprint << " to " << a.out
              << " (declared label error " << ds.meta.eps2_declared << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainLassoArgs {
  std::string features;
  std::string labels;
  std::string model_out;
  double b = 1.0;
  double eps3 = 0.01;
  std::int64_t max_iters = 100000;
  std::string step = "fixed";
  bool json = false;
};

int cmd_train_lasso(const TrainLassoArgs& a) {
  std::istringstream fin(read_text_file(a.features));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(fin, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_array())
      throw ParseError(a.features + " line " + std::to_string(lineno) +
                       ": expected a JSON array of numbers");
    rows.push_back(j.get<std::vector<double>>());
    if (rows.back().size() != rows.front().size())
      throw ParseError(a.features + " line " + std::to_string(lineno) +
                       ": ragged feature width");
  }
  if (rows.empty()) throw ParseError(a.features + ": no feature rows");

  std::istringstream lin(read_text_file(a.labels));
  std::vector<double> ys;
  lineno = 0;
  while (std::getline(lin, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_number())
      throw ParseError(a.labels + " line " + std::to_string(lineno) +
                       ": expected one number per line");
    ys.push_back(j.get<double>());
  }
  if (ys.size() != rows.size())
    throw ParseError("feature/label row counts differ: " +
                     std::to_string(rows.size()) + " vs " +
                     std::to_string(ys.size()));

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index m = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd phi(n, m);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m; ++k)
      phi(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    y[i] = ys[static_cast<std::size_t>(i)];
  }

  LassoConfig cfg;
  cfg.b = a.b;
  cfg.eps3 = a.eps3;
  cfg.max_iters = a.max_iters;
  if (a.step == "fixed") cfg.step = LassoConfig::Step::kFixed;
  else if (a.step == "backtracking")
    cfg.step = LassoConfig::Step::kBacktracking;
  else
    throw ParseError("--step must be fixed or backtracking");

  json cfg_j{{"features", a.features}, {"labels", a.labels},   {"b", cfg.b},
             {"eps3", cfg.eps3},       {"max_iters", cfg.max_iters},
             {"step", a.step},         {"n", n},               {"m", m}};
  echo_config(a.json, cfg_j);

  LassoModel model = lasso_train(phi, y, cfg);
  if (!a.model_out.empty()) save_model_file(a.model_out, model, {});
  json out{{"config", cfg_j}, {"model", model_to_json(model, {})}};
  if (a.json) emit_json(out);
  else {
    std::cout << "train mse: " << model.diag.train_mse << '\n'
              << "certified gap: " << model.diag.certified_gap << " (target "
              << cfg.eps3 / 2 << ")\n"
              << "iterations: " << model.diag.iterations
              << (model.diag.converged ? "" : " (certificate not reached)")
              << '\n';
    if (!a.model_out.empty()) std::cout << "model: " << a.model_out << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ShallowArgs {
  std::string probes;
  std::string model_out;
  int k_max = 1;
  double eps = 0.1;
  double delta = 0.05;
  double threshold = 0.0;
  std::string geometry = "all";
  bool json = false;
};

int cmd_shallow_learn(const ShallowArgs& a) {
  std::istringstream in(read_text_file(a.probes));
  std::vector<ShallowProbe> probes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("labels") ||
        !j.contains("value"))
      throw ParseError(a.probes + " line " + std::to_string(lineno) +
                       ": expected {\"labels\": [...], \"value\": ...}");
    ShallowProbe p;
    p.labels = j.at("labels").get<std::vector<int>>();
    p.value = j.at("value").get<double>();
    probes.push_back(std::move(p));
  }

  ShallowLearnConfig cfg;
  cfg.k_max = a.k_max;
  cfg.eps = a.eps;
  cfg.delta = a.delta;
  cfg.threshold = a.threshold;
  cfg.geometry = a.geometry == "line" ? BasisGeometry::kLine
                                      : BasisGeometry::kAllSubsets;
  if (a.geometry != "line" && a.geometry != "all")
    throw ParseError("--geometry must be line or all");

  json cfg_j{{"probes", a.probes},   {"k_max", cfg.k_max},
             {"eps", cfg.eps},       {"delta", cfg.delta},
             {"threshold", cfg.threshold}, {"geometry", a.geometry},
             {"count", probes.size()}};
  echo_config(a.json, cfg_j);

  ShallowResult res = shallow_learn(probes, cfg);
  json terms = json::array();
  for (std::size_t i = 0; i < res.observable.basis().size(); ++i)
    terms.push_back(
        json{{"p", res.observable.basis()[i].letters()},
             {"alpha", res.observable.alpha()[static_cast<Eigen::Index>(i)]}});
  json out{{"config", cfg_j},
           {"terms", terms},
           {"probes_used", res.probes_used},
           {"candidates", res.candidates},
           {"kept", res.kept},
           {"recommended_probes", res.recommended_probes},
           {"warnings", res.warnings}};
  if (!a.model_out.empty()) write_text_file(a.model_out, out.dump(2) + "\n");
  if (a.json) emit_json(out);
  else {
    for (const json& t : terms)
      std::cout << t.at("p").get<std::string>() << ": "
                << t.at("alpha").get<double>() << '\n';
    std::cout << "kept " << res.kept << " of " << res.candidates
              << " candidates from " << res.probes_used << " probes"
              << " (recommended " << res.recommended_probes << ")\n";
    for (const std::string& w : res.warnings)
      std::cout << "warning: " << w << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct FlippedArgs {
  std::string data;
  std::string out;
  double ridge = 0.0;
  bool json = false;
};

int cmd_flipped_solve(const FlippedArgs& a) {
  FlippedSampleSet set = load_flipped_file(a.data);
  json cfg_j{{"data", a.data},
             {"ridge", a.ridge},
             {"count", set.alphas.rows()},
             {"m", set.alphas.cols()}};
  echo_config(a.json, cfg_j);
  FlippedResult res = flipped_solve(set.alphas, set.y, a.ridge);
  json out{{"config", cfg_j},
           {"v", std::vector<double>(res.v.data(), res.v.data() + res.v.size())},
           {"rank", res.rank},
           {"condition", res.condition},
           {"residual", res.residual},
           {"min_norm", res.min_norm},
           {"ridge", res.ridge}};
  if (!a.out.empty()) write_text_file(a.out, out.dump(2) + "\n");
  if (a.json) emit_json(out);
  else {
    std::cout << "v:";
    for (Eigen::Index i = 0; i < res.v.size(); ++i)
      std::cout << ' ' << res.v[i];
    std::cout << "\nrank: " << res.rank << "  condition: " << res.condition
              << "  residual: " << res.residual << '\n';
    if (res.min_norm)
      std::cout << "rank deficient: minimum-norm solution returned\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ClockVerifyArgs {
  int gates = 4;
  int work = 2;
  double tol = 1e-9;
  double t = -1.0;
  std::string circuit;
  std::int64_t seed = 1;
  bool json = false;
};

int cmd_clock_verify(const ClockVerifyArgs& a) {
  Circuit c = load_or_random_circuit(a.circuit, a.work, a.gates,
                                     static_cast<std::uint64_t>(a.seed));
  Eigen::VectorXcd psi = seeded_state(c.n(), static_cast<std::uint64_t>(a.seed));
  json cfg_j{{"gates", static_cast<std::int64_t>(c.size())},
             {"work", c.n()},
             {"tol", a.tol},
             {"t", a.t},
             {"circuit", a.circuit},
             {"seed", a.seed}};
  echo_config(a.json, cfg_j);
  TransferReport r = verify_perfect_transfer(c, psi, a.tol, a.t);
  json out{{"config", cfg_j}, {"report", transfer_report_json(r)}};
  if (a.json) emit_json(out);
  else
    std::cout << "fidelity: " << r.fidelity << " at t = " << r.t_used << '\n'
              << "leakage: " << r.leakage << '\n'
              << "unary locality: " << r.locality_measured << '\n'
              << (r.passed ? "transfer within tolerance\n"
                           : "transfer MISSED tolerance\n");
  return r.passed ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct KitaevVerifyArgs {
  int gates = 2;
  int work = 2;
  std::string input;
  double tol = 1e-9;
  std::string circuit;
  std::int64_t seed = 1;
  bool json = false;
};

int cmd_kitaev_verify(const KitaevVerifyArgs& a) {
  Circuit c = load_or_random_circuit(a.circuit, a.work, a.gates,
                                     static_cast<std::uint64_t>(a.seed));
  std::string x = a.input.empty()
                      ? std::string(static_cast<std::size_t>(c.n()), '0')
                      : a.input;
  json cfg_j{{"gates", static_cast<std::int64_t>(c.size())},
             {"work", c.n()},
             {"input", x},
             {"tol", a.tol},
             {"circuit", a.circuit},
             {"seed", a.seed}};
  echo_config(a.json, cfg_j);
  KitaevHamiltonian h = build_kitaev(c, x);
  GroundReport r = verify_ground(h, a.tol);
  json out{{"config", cfg_j}, {"report", ground_report_json(r)}};
  if (a.json) emit_json(out);
  else
    std::cout << "ground energy: " << r.energy << " (residual " << r.residual
              << ")\n"
              << "spectral gap: " << r.gap << '\n'
              << "decision value: " << r.decision_value << '\n'
              << (r.passed ? "history state is the ground state\n"
                           : "ground-state check FAILED\n");
  return r.passed && r.gap > 0.0 ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct EvolveArgs {
  int gates = 3;
  int work = 2;
  double t = -1.0;
  std::string clock = "childs";
  std::string circuit;
  std::int64_t seed = 1;
  bool json = false;
};

int cmd_evolve(const EvolveArgs& a) {
  Circuit c = load_or_random_circuit(a.circuit, a.work, a.gates,
                                     static_cast<std::uint64_t>(a.seed));
  if (a.clock != "childs" && a.clock != "feynman")
    throw ParseError("--clock must be childs or feynman");
  ClockHamiltonian h = a.clock == "childs"
                           ? ClockHamiltonian::childs_weighted(c)
                           : ClockHamiltonian::feynman(c);
  double t = a.t < 0.0 ? std::acos(-1.0) : a.t;
  json cfg_j{{"gates", static_cast<std::int64_t>(c.size())},
             {"work", c.n()},
             {"clock", a.clock},
             {"t", t},
             {"circuit", a.circuit},
             {"seed", a.seed}};
  echo_config(a.json, cfg_j);

  Eigen::VectorXcd psi = seeded_state(c.n(), static_cast<std::uint64_t>(a.seed));
  Eigen::VectorXcd evolved = evolve(h.op(), h.embed(psi, 0), t);
  const std::int64_t dim_work = std::int64_t(1) << c.n();
  std::vector<double> occupation;
  for (int level = 0; level <= h.steps(); ++level)
    occupation.push_back(
        evolved.segment(level * dim_work, dim_work).squaredNorm());
  double fid = transfer_fidelity(h, psi, t);
  json out{{"config", cfg_j},
           {"occupation", occupation},
           {"transfer_fidelity", fid}};
  if (a.json) emit_json(out);
  else {
    std::cout << "clock occupation after t = " << t << ":\n";
    for (std::size_t i = 0; i < occupation.size(); ++i)
      std::cout << "  level " << i << ": " << occupation[i] << '\n';
    std::cout << "transfer fidelity: " << fid << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
  bool json = false;
};

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentConfig cfg = ExperimentConfig::from_json(load_json_file(a.config));
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (!a.out.empty()) cfg.report_path = a.out;
  ExperimentReport rep = run_experiment(cfg);
  echo_config(a.json, rep.resolved.to_json());
  if (a.json) emit_json(rep.to_json());
  else {
    std::cout << "concept: " << rep.concept_fingerprint << '\n'
              << "n_train: " << rep.resolved.n_train << "  m: " << rep.m
              << "  b: " << rep.b << '\n'
              << "risk target: " << rep.risk_target << " (" << rep.risk_rule
              << ")\n";
    for (const RepReport& r : rep.reps)
      std::cout << "rep " << r.rep << ": train " << r.train_mse << "  test "
                << r.test_mse << (r.passed ? "  pass" : "  FAIL") << '\n';
    std::cout << "passed " << rep.passes << "/" << rep.reps.size()
              << " (required " << rep.required_passes << ") in " << rep.total_s
              << " s\n";
    if (!a.out.empty()) std::cout << "report: " << a.out << '\n';
  }
  return rep.passed ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string axes;
  std::string out_dir;
  std::string csv;
  std::int64_t seed = -1;
  bool json = false;
};

int cmd_sweep(const SweepArgs& a) {
  ExperimentConfig base = ExperimentConfig::from_json(load_json_file(a.config));
  if (a.seed >= 0) base.seed = static_cast<std::uint64_t>(a.seed);
  std::vector<SweepAxis> axes;
  if (!a.axes.empty())
    axes = sweep_axes_from_json(load_json_file(a.axes));
  json cfg_j{{"config", a.config},
             {"axes", a.axes},
             {"cells_declared", axes.size()},
             {"seed", base.seed}};
  echo_config(a.json, cfg_j);

  SweepResult res = sweep(base, axes);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
      json body = res.reports[i].to_json();
      body["cell"] = res.cells[i];
      std::ostringstream name;
      name << a.out_dir << "/report_"
           << res.cells[i].at("cell").get<std::int64_t>() << "_"
           << res.cells[i].at("rep").get<int>() << ".json";
      write_text_file(name.str(), body.dump(2) + "\n");
    }
  }
  if (!a.csv.empty()) write_text_file(a.csv, res.csv);
  if (a.json) {
    json cells = json::array();
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
      json row = res.cells[i];
      row["test_mse"] = res.reports[i].reps.at(0).test_mse;
      row["passed"] = res.reports[i].passed;
      cells.push_back(std::move(row));
    }
    emit_json(json{{"config", cfg_j},
                   {"reports", res.reports.size()},
                   {"cells", cells},
                   {"csv", res.csv}});
  } else {
    std::cout << res.csv;
    std::cout << res.reports.size() << " reports";
    if (!a.out_dir.empty()) std::cout << " in " << a.out_dir;
    std::cout << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifySuiteArgs {
  bool json = false;
};

int cmd_verify_suite(const VerifySuiteArgs& a) {
  echo_config(a.json, json{{"suite", "all-module invariants"}});
  VerifySummary s = verify_suite();
  if (a.json) emit_json(s.to_json());
  else {
    for (const VerifyCheck& c : s.checks)
      std::cout << (c.passed ? "pass  " : "FAIL  ") << c.module << "/"
                << c.name << "  value " << c.value << " vs budget " << c.budget
                << "  (" << c.detail << ")\n";
    std::cout << (s.passed ? "all checks passed" : "checks FAILED") << " in "
              << s.total_s << " s\n";
  }
  return s.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Observable-learning toolkit: clock Hamiltonians, ground-state "
      "verifiers, Pauli-observable learners, and a PAC-style experiment "
      "harness."};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Cap worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);

  GenDatasetArgs gen;
  auto* sub_gen = app.add_subcommand(
      "gen-dataset", "Sample a labeled dataset from a concept config");
  sub_gen->add_option("--config", gen.config, "Experiment config JSON")
      ->required();
  sub_gen->add_option("--out", gen.out, "Dataset JSONL path")->required();
  sub_gen->add_option("--features-out", gen.features_out,
                      "Also write exact feature rows (JSON array per line)");
  sub_gen->add_option("--labels-out", gen.labels_out,
                      "Also write labels (one number per line)");
  sub_gen->add_option("--count", gen.count,
                      "Sample count (default: resolved n_train)");
  sub_gen->add_option("--seed", gen.seed, "Override the config seed");
  sub_gen->add_flag("--json", gen.json, "Machine-readable output");

  TrainLassoArgs tl;
  auto* sub_tl = app.add_subcommand(
      "train-lasso", "l1-constrained least squares on feature/label files");
  sub_tl->add_option("--features", tl.features,
                     "JSONL: one JSON array of features per line")
      ->required();
  sub_tl->add_option("--labels", tl.labels, "JSONL: one number per line")
      ->required();
  sub_tl->add_option("--b", tl.b, "l1 budget");
  sub_tl->add_option("--eps3", tl.eps3, "Optimization slack target");
  sub_tl->add_option("--max-iters", tl.max_iters, "Iteration cap");
  sub_tl->add_option("--step", tl.step, "fixed | backtracking");
  sub_tl->add_option("--model-out", tl.model_out, "Write the model JSON here");
  sub_tl->add_flag("--json", tl.json, "Machine-readable output");

  ShallowArgs sh;
  auto* sub_sh = app.add_subcommand(
      "shallow-learn",
      "Recover a local Pauli observable from stabilizer-product probes");
  sub_sh->add_option("--probes", sh.probes,
                     "JSONL: {\"labels\": [0..5 per qubit], \"value\": y}")
      ->required();
  sub_sh->add_option("--k-max", sh.k_max, "Max support size");
  sub_sh->add_option("--eps", sh.eps, "Coefficient error target");
  sub_sh->add_option("--delta", sh.delta, "Failure probability");
  sub_sh->add_option("--threshold", sh.threshold,
                     "Drop coefficients below this");
  sub_sh->add_option("--geometry", sh.geometry, "line | all");
  sub_sh->add_option("--model-out", sh.model_out, "Write the result here");
  sub_sh->add_flag("--json", sh.json, "Machine-readable output");

  FlippedArgs fl;
  auto* sub_fl = app.add_subcommand(
      "flipped-solve",
      "Solve for per-term expectations from coefficient samples");
  sub_fl->add_option("--data", fl.data, "Flipped-sample JSONL")->required();
  sub_fl->add_option("--ridge", fl.ridge, "Ridge regularization strength");
  sub_fl->add_option("--out", fl.out, "Write the solution JSON here");
  sub_fl->add_flag("--json", fl.json, "Machine-readable output");

  ClockVerifyArgs cv;
  auto* sub_cv = app.add_subcommand(
      "clock-verify",
      "Check exact state transfer through the weighted clock at t = pi");
  sub_cv->add_option("--gates", cv.gates, "Random circuit length");
  sub_cv->add_option("--work", cv.work, "Work qubits");
  sub_cv->add_option("--tol", cv.tol, "Fidelity tolerance");
  sub_cv->add_option("--t", cv.t, "Evolution time (default pi)");
  sub_cv->add_option("--circuit", cv.circuit,
                     "Circuit text file (instead of a random circuit)");
  sub_cv->add_option("--seed", cv.seed, "Circuit/state seed");
  sub_cv->add_flag("--json", cv.json, "Machine-readable output");

  KitaevVerifyArgs kv;
  auto* sub_kv = app.add_subcommand(
      "kitaev-verify",
      "Check the circuit history state is the padded Hamiltonian's ground "
      "state");
  sub_kv->add_option("--gates", kv.gates, "Random circuit length");
  sub_kv->add_option("--work", kv.work, "Work qubits");
  sub_kv->add_option("--input", kv.input, "Input bitstring (default zeros)");
  sub_kv->add_option("--tol", kv.tol, "Energy tolerance");
  sub_kv->add_option("--circuit", kv.circuit,
                     "Circuit text file (instead of a random circuit)");
  sub_kv->add_option("--seed", kv.seed, "Circuit seed");
  sub_kv->add_flag("--json", kv.json, "Machine-readable output");

  EvolveArgs ev;
  auto* sub_ev = app.add_subcommand(
      "evolve", "Evolve a seeded state under a clock Hamiltonian and report "
                "the clock-level occupation");
  sub_ev->add_option("--gates", ev.gates, "Random circuit length");
  sub_ev->add_option("--work", ev.work, "Work qubits");
  sub_ev->add_option("--t", ev.t, "Evolution time (default pi)");
  sub_ev->add_option("--clock", ev.clock, "childs | feynman");
  sub_ev->add_option("--circuit", ev.circuit,
                     "Circuit text file (instead of a random circuit)");
  sub_ev->add_option("--seed", ev.seed, "Circuit/state seed");
  sub_ev->add_flag("--json", ev.json, "Machine-readable output");

  ExperimentArgs ex;
  auto* sub_ex = app.add_subcommand(
      "experiment", "Generate, train, and score one learning experiment");
  sub_ex->add_option("--config", ex.config, "Experiment config JSON")
      ->required();
  sub_ex->add_option("--out", ex.out, "Report JSON path");
  sub_ex->add_option("--seed", ex.seed, "Override the config seed");
  sub_ex->add_flag("--json", ex.json, "Machine-readable output");

  SweepArgs sw;
  auto* sub_sw = app.add_subcommand(
      "sweep", "Run a Cartesian grid of experiments and aggregate a CSV");
  sub_sw->add_option("--config", sw.config, "Base experiment config JSON")
      ->required();
  sub_sw->add_option("--axes", sw.axes,
                     "JSON: [{\"pointer\": \"/eps\", \"values\": [...]}]");
  sub_sw->add_option("--out-dir", sw.out_dir, "Per-report output directory");
  sub_sw->add_option("--csv", sw.csv, "Aggregate CSV path");
  sub_sw->add_option("--seed", sw.seed, "Override the config seed");
  sub_sw->add_flag("--json", sw.json, "Machine-readable output");

  VerifySuiteArgs vs;
  auto* sub_vs = app.add_subcommand(
      "verify-suite", "Run the cross-module invariant checks");
  sub_vs->add_flag("--json", vs.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) set_thread_cap(threads);
    if (sub_gen->parsed()) return cmd_gen_dataset(gen);
    if (sub_tl->parsed()) return cmd_train_lasso(tl);
    if (sub_sh->parsed()) return cmd_shallow_learn(sh);
    if (sub_fl->parsed()) return cmd_flipped_solve(fl);
    if (sub_cv->parsed()) return cmd_clock_verify(cv);
    if (sub_kv->parsed()) return cmd_kitaev_verify(kv);
    if (sub_ev->parsed()) return cmd_evolve(ev);
    if (sub_ex->parsed()) return cmd_experiment(ex);
    if (sub_sw->parsed()) return cmd_sweep(sw);
    if (sub_vs->parsed()) return cmd_verify_suite(vs);
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
