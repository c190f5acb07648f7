#pragma once

// Text formats. One self-describing JSON document per file:
//
//   matrix   {"dim": d, "re": [[...]], "im": [[...]]}   ("im" may be omitted)
//   problem  {"sense": "maximize", "blocks": [d...], "objective": [matrix|null...],
//             "constraints": [{"coeffs": [matrix|null...], "relation": "<=", "rhs": r}]}
//   states   {"alpha0": matrix, "alpha1": matrix, "beta0": ..., "beta1": ...}
//   classical {"p": [...], "q": [...]}
//   p1       {"x": "0101...", "s": "...", "y": "..."}
//   p2       {"n": n, "matching": [[i, j]...], "edge_bits": "...", "y": "..."}
//
// Indices in files are 1-based. Every malformed document is an InputError.

#include <string>

#include <json.hpp>

#include "stateid/classical.hpp"
#include "stateid/linmat.hpp"
#include "stateid/sdp.hpp"
#include "stateid/smp.hpp"
#include "stateid/tolerances.hpp"

namespace stateid::io {

using Json = nlohmann::ordered_json;

Json read_json(const std::string& path);
/// Throws InputError if the file cannot be written.
void write_json(const std::string& path, const Json& j);
/// Two-space indentation and a trailing newline.
std::string dump(const Json& j);

Json matrix_to_json(const linmat::ComplexMatrix& m);
linmat::ComplexMatrix matrix_from_json(const Json& j);
linmat::HermitianMatrix hermitian_from_json(const Json& j, const Tolerances& tol = default_tolerances());
linmat::DensityMatrix density_from_json(const Json& j, const Tolerances& tol = default_tolerances());

Json problem_to_json(const sdp::SdpProblem& p);
sdp::SdpProblem problem_from_json(const Json& j);

/// The named density matrices of a states document.
linmat::DensityMatrix state_from(const Json& doc, const char* key, const Tolerances& tol = default_tolerances());

Json classical_to_json(const classical::ClassicalPair& c);
classical::ClassicalPair classical_from_json(const Json& j, double eps);

Json bits_to_json(const smp::Bits& b);
smp::Bits bits_from_json(const Json& j);
Json p1_to_json(const smp::P1Input& in);
smp::P1Input p1_from_json(const Json& j);
Json p2_to_json(const smp::P2Input& in);
smp::P2Input p2_from_json(const Json& j);

Json tolerances_to_json(const Tolerances& t);

}  // namespace stateid::io
