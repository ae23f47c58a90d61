#include "lrmr/io.hpp"

#include <fstream>
#include <sstream>

namespace lrmr {

namespace fs = std::filesystem;

double real_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error("expected a real number, got \"" + s + "\"");
    return v;
  }
  throw Error("expected a real number, got " + j.dump());
}

json matrix_to_json(const MatrixXd& x) {
  json rows = json::array();
  for (Index i = 0; i < x.rows(); ++i) {
    json row = json::array();
    for (Index c = 0; c < x.cols(); ++c) row.push_back(x(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw Error("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  MatrixXd x(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw DimensionError("matrix rows differ in length");
    for (Index c = 0; c < cols; ++c) x(i, c) = real_from_json(row[static_cast<std::size_t>(c)]);
  }
  return x;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw Error("vector must be an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = real_from_json(j[i]);
  return v;
}

json ensemble_to_json(const MeasurementEnsemble& ens) {
  json mats = json::array();
  for (Index i = 0; i < ens.size(); ++i) mats.push_back(vector_to_json(ens.design().row(i).transpose()));
  return json{{"m", ens.size()}, {"n1", ens.rows()}, {"n2", ens.cols()}, {"matrices", std::move(mats)}};
}

MeasurementEnsemble ensemble_from_json(const json& j) {
  if (!j.is_object()) throw Error("ensemble document must be an object");
  for (const char* key : {"m", "n1", "n2", "matrices"})
    if (!j.contains(key)) throw Error(std::string("ensemble document lacks \"") + key + "\"");
  const auto m = j.at("m").get<Index>();
  const auto n1 = j.at("n1").get<Index>();
  const auto n2 = j.at("n2").get<Index>();
  const json& mats = j.at("matrices");
  if (m < 1 || n1 < 1 || n2 < 1) throw DimensionError("ensemble: m, n1, n2 must be positive");
  if (!mats.is_array() || static_cast<Index>(mats.size()) != m)
    throw DimensionError("ensemble: \"matrices\" must list exactly m matrices");
  MatrixXd design(m, n1 * n2);
  for (Index i = 0; i < m; ++i) {
    const VectorXd row = vector_from_json(mats[static_cast<std::size_t>(i)]);
    if (row.size() != n1 * n2) throw DimensionError("ensemble: matrix entry count != n1*n2");
    design.row(i) = row.transpose();
  }
  return MeasurementEnsemble(n1, n2, std::move(design));
}

json problem_to_json(const RecoveryProblem& p) {
  json j{{"ensemble", ensemble_to_json(p.ensemble)},
         {"b", vector_to_json(p.b)},
         {"lambda", p.lambda},
         {"epsilon", p.epsilon}};
  if (p.truth) j["truth"] = matrix_to_json(*p.truth);
  if (p.noise) j["noise"] = vector_to_json(*p.noise);
  return j;
}

RecoveryProblem problem_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error("problem document must be an object");
  for (const char* key : {"ensemble", "b", "lambda"})
    if (!j.contains(key)) throw Error(std::string("problem document lacks \"") + key + "\"");
  RecoveryProblem p;
  const json& e = j.at("ensemble");
  if (e.is_string()) {
    fs::path path = e.get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    p.ensemble = read_ensemble(path);
  } else {
    p.ensemble = ensemble_from_json(e);
  }
  p.b = vector_from_json(j.at("b"));
  p.lambda = real_from_json(j.at("lambda"));
  p.epsilon = j.contains("epsilon") ? real_from_json(j.at("epsilon")) : 0.0;
  if (j.contains("truth") && !j.at("truth").is_null()) p.truth = matrix_from_json(j.at("truth"));
  if (j.contains("noise") && !j.at("noise").is_null()) p.noise = vector_from_json(j.at("noise"));
  p.validate();
  return p;
}

json certificate_to_json(const OptimalityCertificate& c) {
  return json{{"dual_spectral_norm", c.dual_norm},
              {"alignment_gap", c.alignment_gap},
              {"solution_norm", c.solution_norm},
              {"tolerance", c.tolerance},
              {"passes", c.passes()}};
}

namespace {

template <typename R>
json result_common(const R& r) {
  return json{{"iterations", r.iterations},
              {"final_objective", r.final_objective},
              {"objective_trace", r.objective_trace},
              {"converged", r.converged},
              {"residual_norm", r.residual_norm},
              {"certificate", certificate_to_json(r.certificate)}};
}

}  // namespace

json solver_result_to_json(const SolverResult& r) {
  json j = result_common(r);
  j["solution"] = matrix_to_json(r.solution);
  return j;
}

json solver_result_to_json(const VectorSolverResult& r) {
  json j = result_common(r);
  j["solution"] = vector_to_json(r.solution);
  // BPDN certificates use the sup norm of the dual vector.
  j["certificate"]["dual_sup_norm"] = j["certificate"]["dual_spectral_norm"];
  j["certificate"].erase("dual_spectral_norm");
  return j;
}

json ric_to_json(const RicEstimate& r) {
  json j{{"order", r.order},         {"value", r.value},
         {"method", to_string(r.method)}, {"samples", r.samples},
         {"is_exact", r.is_exact},   {"is_lower_bound", r.is_lower_bound}};
  if (r.witness) j["witness"] = matrix_to_json(*r.witness);
  return j;
}

RicEstimate ric_from_json(const json& j) {
  RicEstimate r;
  r.order = j.at("order").get<int>();
  r.value = real_from_json(j.at("value"));
  r.method = ric_method_from_string(j.at("method").get<std::string>());
  r.samples = j.value("samples", 0LL);
  r.is_exact = j.at("is_exact").get<bool>();
  r.is_lower_bound = j.at("is_lower_bound").get<bool>();
  if (j.contains("witness")) r.witness = matrix_from_json(j.at("witness"));
  return r;
}

json bounds_to_json(const TheoryBounds& b) {
  json j{{"beta1", b.beta1}, {"beta2", b.beta2}, {"c1", b.c1}, {"c2", b.c2},
         {"condition_ok", b.condition_ok}, {"beta2_lt_one", b.beta2_lt_one}};
  j["c3"] = b.c3 ? json(*b.c3) : json(nullptr);
  j["c4"] = b.c4 ? json(*b.c4) : json(nullptr);
  return j;
}

json lemma3_to_json(const Lemma3Report& r) {
  return json{{"map_error", r.map_error},       {"head_nuclear", r.head_nuclear},
              {"tail_nuclear", r.tail_nuclear}, {"truth_tail", r.truth_tail},
              {"ineq5_lhs", r.ineq5_lhs},       {"ineq5_rhs", r.ineq5_rhs},
              {"ineq5_pass", r.ineq5_pass},     {"ineq6_lhs", r.ineq6_lhs},
              {"ineq6_rhs", r.ineq6_rhs},       {"ineq6_pass", r.ineq6_pass},
              {"pass", r.passes()}};
}

json theorem1_to_json(const Theorem1Report& r) {
  json j{{"gate_status", to_string(r.status)},
         {"reason", r.reason},
         {"noise_norm", r.noise_norm},
         {"tail_norm", r.tail_norm},
         {"map_error", r.map_error},
         {"frob_error", r.frob_error}};
  if (r.status == GateStatus::verified) {
    j["bounds"] = bounds_to_json(r.bounds);
    j["bound8_rhs"] = r.bound8_rhs;
    j["bound9_rhs"] = r.bound9_rhs;
    j["bound8_pass"] = r.bound8_pass;
    j["bound9_pass"] = r.bound9_pass;
    j["pass"] = r.passes();
  }
  return j;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_json(const json& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

MeasurementEnsemble read_ensemble(const fs::path& path) { return ensemble_from_json(read_json(path)); }

void write_ensemble(const MeasurementEnsemble& ens, const fs::path& path) {
  write_json(ensemble_to_json(ens), path);
}

RecoveryProblem read_problem(const fs::path& path) {
  return problem_from_json(read_json(path), path.parent_path());
}

json provenance(const std::string& command, const json& config) {
  return json{{"tool", "lrmr"}, {"version", LRMR_VERSION}, {"command", command}, {"config", config}};
}

}  // namespace lrmr
