#pragma once

// JSON and file formats shared by the CLI and the harness.
//
//   matrix    : array of rows, [[a11, a12, ...], [a21, ...], ...]
//   vector    : flat array
//   ensemble  : {"m": m, "n1": n1, "n2": n2,
//                "matrices": [[row-major entries of A(1)], ...]}
//   problem   : {"ensemble": <ensemble doc | path>, "b": [...],
//                "lambda": l, "epsilon": e, "truth": <matrix>?, "noise": [...]?}
//
// Reals are written as JSON numbers with round-trip precision; readers also
// accept decimal strings.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lrmr/ensemble.hpp"
#include "lrmr/ric.hpp"
#include "lrmr/solvers.hpp"
#include "lrmr/theory.hpp"

namespace lrmr {

using json = nlohmann::json;

double real_from_json(const json& j);

json matrix_to_json(const MatrixXd& x);
MatrixXd matrix_from_json(const json& j);
json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const json& j);

json ensemble_to_json(const MeasurementEnsemble& ens);
MeasurementEnsemble ensemble_from_json(const json& j);

/// Relative ensemble paths resolve against `base_dir`.
json problem_to_json(const RecoveryProblem& p);
RecoveryProblem problem_from_json(const json& j, const std::filesystem::path& base_dir = {});

json certificate_to_json(const OptimalityCertificate& c);
json solver_result_to_json(const SolverResult& r);
json solver_result_to_json(const VectorSolverResult& r);

json ric_to_json(const RicEstimate& r);
RicEstimate ric_from_json(const json& j);

json bounds_to_json(const TheoryBounds& b);
json lemma3_to_json(const Lemma3Report& r);
json theorem1_to_json(const Theorem1Report& r);

json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; output is deterministic.
void write_json(const json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

MeasurementEnsemble read_ensemble(const std::filesystem::path& path);
void write_ensemble(const MeasurementEnsemble& ens, const std::filesystem::path& path);
RecoveryProblem read_problem(const std::filesystem::path& path);

/// Provenance block embedded in every JSON output.
json provenance(const std::string& command, const json& config);

}  // namespace lrmr
