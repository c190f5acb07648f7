#include "stateid/io.hpp"

#include <fstream>
#include <sstream>

#include "stateid/errors.hpp"

namespace stateid::io {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string(what) + ": expected a number");
  return j.get<double>();
}

linmat::RealVector real_vector(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array");
  linmat::RealVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number(j[k], what);
  return v;
}

Eigen::MatrixXd real_matrix(const Json& j, Eigen::Index d, const char* what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(d))
    throw InputError(std::string("matrix ") + what + ": expected " + std::to_string(d) + " rows");
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d))
      throw InputError(std::string("matrix ") + what + ": row length mismatch");
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

sdp::Relation relation_from(const std::string& s) {
  if (s == "<=") return sdp::Relation::LessEqual;
  if (s == "=" || s == "==") return sdp::Relation::Equal;
  if (s == ">=") return sdp::Relation::GreaterEqual;
  throw InputError("unknown relation '" + s + "'");
}

std::string relation_symbol(sdp::Relation r) {
  switch (r) {
    case sdp::Relation::LessEqual: return "<=";
    case sdp::Relation::Equal: return "=";
    case sdp::Relation::GreaterEqual: return ">=";
  }
  return "?";
}

Json optional_matrix(const linmat::ComplexMatrix& m) { return m.size() == 0 ? Json(nullptr) : matrix_to_json(m); }

linmat::ComplexMatrix optional_matrix_from(const Json& j) {
  return j.is_null() ? linmat::ComplexMatrix() : matrix_from_json(j);
}

}  // namespace

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << dump(j);
  if (!out) throw InputError("write to '" + path + "' failed");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json matrix_to_json(const linmat::ComplexMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ri = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  Json j;
  j["dim"] = m.rows();
  j["re"] = re;
  j["im"] = im;
  return j;
}

linmat::ComplexMatrix matrix_from_json(const Json& j) {
  const auto& d = field(j, "dim");
  if (!d.is_number_integer() || d.get<long>() < 1) throw InputError("matrix: dim must be a positive integer");
  const auto dim = static_cast<Eigen::Index>(d.get<long>());
  const Eigen::MatrixXd re = real_matrix(field(j, "re"), dim, "re");
  const Eigen::MatrixXd im = j.contains("im") ? real_matrix(j.at("im"), dim, "im") : Eigen::MatrixXd::Zero(dim, dim);
  linmat::ComplexMatrix m(dim, dim);
  m.real() = re;
  m.imag() = im;
  return m;
}

linmat::HermitianMatrix hermitian_from_json(const Json& j, const Tolerances& tol) {
  return linmat::HermitianMatrix(matrix_from_json(j), tol);
}

linmat::DensityMatrix density_from_json(const Json& j, const Tolerances& tol) {
  return linmat::DensityMatrix(matrix_from_json(j), tol);
}

Json problem_to_json(const sdp::SdpProblem& p) {
  Json j;
  j["sense"] = sdp::to_string(p.sense);
  j["blocks"] = p.block_dims;
  Json obj = Json::array();
  for (std::size_t b = 0; b < p.block_dims.size(); ++b)
    obj.push_back(b < p.objective.size() ? optional_matrix(p.objective[b]) : Json(nullptr));
  j["objective"] = obj;
  Json cons = Json::array();
  for (const auto& c : p.constraints) {
    Json cj, coeffs = Json::array();
    for (std::size_t b = 0; b < p.block_dims.size(); ++b)
      coeffs.push_back(b < c.coeffs.size() ? optional_matrix(c.coeffs[b]) : Json(nullptr));
    cj["coeffs"] = coeffs;
    cj["relation"] = relation_symbol(c.relation);
    cj["rhs"] = c.rhs;
    cons.push_back(cj);
  }
  j["constraints"] = cons;
  return j;
}

sdp::SdpProblem problem_from_json(const Json& j) {
  sdp::SdpProblem p;
  const auto& sense = field(j, "sense");
  if (!sense.is_string()) throw InputError("problem: sense must be a string");
  if (sense == "maximize") p.sense = sdp::Sense::Maximize;
  else if (sense == "minimize") p.sense = sdp::Sense::Minimize;
  else throw InputError("problem: sense must be 'maximize' or 'minimize'");

  const auto& blocks = field(j, "blocks");
  if (!blocks.is_array() || blocks.empty()) throw InputError("problem: blocks must be a non-empty array");
  for (const auto& b : blocks) {
    if (!b.is_number_integer() || b.get<long>() < 1) throw InputError("problem: block dims must be positive");
    p.block_dims.push_back(b.get<long>());
  }
  const auto& obj = field(j, "objective");
  if (!obj.is_array() || obj.size() != p.block_dims.size())
    throw InputError("problem: one objective entry per block");
  for (const auto& o : obj) p.objective.push_back(optional_matrix_from(o));

  const auto& cons = field(j, "constraints");
  if (!cons.is_array()) throw InputError("problem: constraints must be an array");
  for (const auto& c : cons) {
    sdp::Constraint k;
    const auto& coeffs = field(c, "coeffs");
    if (!coeffs.is_array() || coeffs.size() != p.block_dims.size())
      throw InputError("problem: one coefficient entry per block");
    for (const auto& m : coeffs) k.coeffs.push_back(optional_matrix_from(m));
    const auto& rel = field(c, "relation");
    if (!rel.is_string()) throw InputError("problem: relation must be a string");
    k.relation = relation_from(rel.get<std::string>());
    k.rhs = number(field(c, "rhs"), "rhs");
    p.constraints.push_back(std::move(k));
  }
  p.validate();
  return p;
}

linmat::DensityMatrix state_from(const Json& doc, const char* key, const Tolerances& tol) {
  return density_from_json(field(doc, key), tol);
}

Json classical_to_json(const classical::ClassicalPair& c) {
  Json j;
  j["p"] = std::vector<double>(c.p.data(), c.p.data() + c.p.size());
  j["q"] = std::vector<double>(c.q.data(), c.q.data() + c.q.size());
  return j;
}

classical::ClassicalPair classical_from_json(const Json& j, double eps) {
  return classical::ClassicalPair(real_vector(field(j, "p"), "p"), real_vector(field(j, "q"), "q"), eps);
}

Json bits_to_json(const smp::Bits& b) {
  std::string s;
  for (int v : b) s += v ? '1' : '0';
  return s;
}

smp::Bits bits_from_json(const Json& j) {
  if (!j.is_string()) throw InputError("bit strings must be strings of 0 and 1");
  smp::Bits b;
  for (char c : j.get<std::string>()) {
    if (c != '0' && c != '1') throw InputError("bit strings must be strings of 0 and 1");
    b.push_back(c - '0');
  }
  return b;
}

Json p1_to_json(const smp::P1Input& in) {
  Json j;
  j["x"] = bits_to_json(in.x);
  j["s"] = bits_to_json(in.s);
  j["y"] = bits_to_json(in.y);
  return j;
}

smp::P1Input p1_from_json(const Json& j) {
  return smp::P1Input(bits_from_json(field(j, "x")), bits_from_json(field(j, "s")), bits_from_json(field(j, "y")));
}

Json p2_to_json(const smp::P2Input& in) {
  Json j;
  j["n"] = in.n;
  Json m = Json::array();
  for (auto [a, b] : in.matching) m.push_back({a + 1, b + 1});
  j["matching"] = m;
  j["edge_bits"] = bits_to_json(in.edge_bits);
  j["y"] = bits_to_json(in.y);
  return j;
}

smp::P2Input p2_from_json(const Json& j) {
  const auto& n = field(j, "n");
  if (!n.is_number_integer()) throw InputError("p2: n must be an integer");
  const auto& m = field(j, "matching");
  if (!m.is_array()) throw InputError("p2: matching must be an array of pairs");
  smp::Matching matching;
  for (const auto& e : m) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw InputError("p2: matching must be an array of integer pairs");
    matching.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
  }
  return smp::P2Input(n.get<int>(), matching, bits_from_json(field(j, "edge_bits")), bits_from_json(field(j, "y")));
}

Json tolerances_to_json(const Tolerances& t) {
  Json j;
  j["hermitian"] = t.hermitian;
  j["density_trace"] = t.density_trace;
  j["density_min_eig"] = t.density_min_eig;
  j["pure_norm"] = t.pure_norm;
  j["eig_threshold"] = t.eig_threshold;
  j["eig_max_sweeps"] = t.eig_max_sweeps;
  j["psd_clamp"] = t.psd_clamp;
  j["sdp_gap"] = t.sdp_gap;
  j["sdp_feasibility"] = t.sdp_feasibility;
  j["sdp_max_iterations"] = t.sdp_max_iterations;
  j["sdp_infeasibility_certificate"] = t.sdp_infeasibility_certificate;
  j["certificate_slack"] = t.certificate_slack;
  j["measurement_psd"] = t.measurement_psd;
  return j;
}

}  // namespace stateid::io
