#include "obslearn/io.hpp"

#include <fstream>
#include <sstream>

namespace obslearn {

namespace {

json meta_to_json(const DatasetMeta& m) {
  return json{{"concept", m.concept_fingerprint},
              {"count", m.count},
              {"distribution", m.distribution},
              {"eps2_declared", m.eps2_declared},
              {"eps2_observed", m.eps2_observed},
              {"n_bits", m.n_bits},
              {"noise", m.noise},
              {"schema", 1},
              {"seed", m.seed}};
}

DatasetMeta meta_from_json(const json& j) {
  DatasetMeta m;
  m.concept_fingerprint = j.at("concept").get<std::string>();
  m.count = j.at("count").get<std::int64_t>();
  m.distribution = j.at("distribution").get<std::string>();
  m.eps2_declared = j.at("eps2_declared").get<double>();
  m.eps2_observed = j.value("eps2_observed", 0.0);
  m.n_bits = j.at("n_bits").get<int>();
  m.noise = j.at("noise").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

json parse_line(const std::string& line, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw ParseError("dataset line " + std::to_string(lineno) +
                     ": invalid JSON");
  return j;
}

}  // namespace

void save_dataset(std::ostream& out, const Dataset& ds) {
  out << json{{"meta", meta_to_json(ds.meta)}}.dump() << '\n';
  for (const auto& s : ds.samples)
    out << json{{"x", s.x}, {"y", s.y}}.dump() << '\n';
}

Dataset load_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, lineno);
    if (!have_meta) {
      if (!j.contains("meta"))
        throw ParseError("dataset: first record must carry the meta header");
      ds.meta = meta_from_json(j.at("meta"));
      have_meta = true;
      continue;
    }
    Sample s;
    s.x = j.at("x").get<std::string>();
    s.y = j.at("y").get<double>();
    if (static_cast<int>(s.x.size()) != ds.meta.n_bits)
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": bit count disagrees with the header");
    ds.samples.push_back(std::move(s));
  }
  if (!have_meta) throw ParseError("dataset: empty stream");
  if (static_cast<std::int64_t>(ds.samples.size()) != ds.meta.count)
    throw ParseError("dataset: sample count disagrees with the header");
  return ds;
}

void save_dataset_file(const std::string& path, const Dataset& ds) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open for writing: " + path);
  save_dataset(f, ds);
  if (!f) throw ParseError("write failed: " + path);
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open: " + path);
  return load_dataset(f);
}

json model_to_json(const LassoModel& model,
                   const std::vector<std::string>& basis_labels) {
  if (!basis_labels.empty() &&
      static_cast<Eigen::Index>(basis_labels.size()) != model.w.size())
    throw DimensionError("model_to_json: label count does not match weights");
  json diag{{"train_mse", model.diag.train_mse},
            {"iterations", model.diag.iterations},
            {"certified_gap", model.diag.certified_gap},
            {"converged", model.diag.converged},
            {"lipschitz", model.diag.lipschitz},
            {"step_size", model.diag.step_size}};
  std::vector<double> w(model.w.data(), model.w.data() + model.w.size());
  return json{{"schema", 1},
              {"basis", basis_labels},
              {"w", w},
              {"b", model.b},
              {"fingerprint", model.basis_fingerprint},
              {"diagnostics", diag}};
}

void save_model_file(const std::string& path, const LassoModel& model,
                     const std::vector<std::string>& basis_labels) {
  write_text_file(path, model_to_json(model, basis_labels).dump(2) + "\n");
}

std::pair<LassoModel, std::vector<std::string>> load_model_file(
    const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError("model file: invalid JSON: " + path);
  LassoModel m;
  auto w = j.at("w").get<std::vector<double>>();
  m.w = Eigen::Map<Eigen::VectorXd>(w.data(),
                                    static_cast<Eigen::Index>(w.size()));
  m.b = j.at("b").get<double>();
  m.basis_fingerprint = j.value("fingerprint", "");
  if (j.contains("diagnostics")) {
    const json& d = j.at("diagnostics");
    m.diag.train_mse = d.value("train_mse", 0.0);
    m.diag.iterations = d.value("iterations", std::int64_t(0));
    m.diag.certified_gap = d.value("certified_gap", 0.0);
    m.diag.converged = d.value("converged", false);
    m.diag.lipschitz = d.value("lipschitz", 0.0);
    m.diag.step_size = d.value("step_size", 0.0);
  }
  auto labels = j.at("basis").get<std::vector<std::string>>();
  if (!labels.empty() &&
      static_cast<Eigen::Index>(labels.size()) != m.w.size())
    throw ParseError("model file: basis/weight size mismatch: " + path);
  return {std::move(m), std::move(labels)};
}

void save_flipped(std::ostream& out, const FlippedSampleSet& s) {
  out << json{{"meta", json{{"schema", 1},
                            {"count", s.alphas.rows()},
                            {"m", s.alphas.cols()}}}}
             .dump()
      << '\n';
  for (Eigen::Index i = 0; i < s.alphas.rows(); ++i) {
    std::vector<double> row(s.alphas.row(i).begin(), s.alphas.row(i).end());
    out << json{{"alpha", row}, {"y", s.y[i]}}.dump() << '\n';
  }
}

FlippedSampleSet load_flipped(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  Eigen::Index count = -1;
  Eigen::Index m = -1;
  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, lineno);
    if (count < 0) {
      if (!j.contains("meta"))
        throw ParseError("flipped samples: missing meta header");
      count = j.at("meta").at("count").get<Eigen::Index>();
      m = j.at("meta").at("m").get<Eigen::Index>();
      continue;
    }
    auto row = j.at("alpha").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != m)
      throw ParseError("flipped samples line " + std::to_string(lineno) +
                       ": coefficient count disagrees with the header");
    rows.push_back(std::move(row));
    ys.push_back(j.at("y").get<double>());
  }
  if (count < 0) throw ParseError("flipped samples: empty stream");
  if (static_cast<Eigen::Index>(rows.size()) != count)
    throw ParseError("flipped samples: row count disagrees with the header");
  FlippedSampleSet out;
  out.alphas.resize(count, m);
  out.y.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j2 = 0; j2 < m; ++j2)
      out.alphas(i, j2) = rows[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(j2)];
    out.y[i] = ys[static_cast<std::size_t>(i)];
  }
  return out;
}

void save_flipped_file(const std::string& path, const FlippedSampleSet& s) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open for writing: " + path);
  save_flipped(f, s);
  if (!f) throw ParseError("write failed: " + path);
}

FlippedSampleSet load_flipped_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open: " + path);
  return load_flipped(f);
}

json transfer_report_json(const TransferReport& r) {
  return json{{"k", r.k},
              {"n_work", r.n_work},
              {"fidelity", r.fidelity},
              {"t", r.t_used},
              {"leakage", r.leakage},
              {"locality", r.locality_measured},
              {"passed", r.passed}};
}

json ground_report_json(const GroundReport& r) {
  return json{{"n_work", r.work_n},
              {"gates", r.gate_count},
              {"energy", r.energy},
              {"residual", r.residual},
              {"gap", r.gap},
              {"decision_value", r.decision_value},
              {"passed", r.passed}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open for writing: " + path);
  f << body;
  if (!f) throw ParseError("write failed: " + path);
}

}  // namespace obslearn
