#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>

#include <CLI11.hpp>

#include "stateid/classical.hpp"
#include "stateid/errors.hpp"
#include "stateid/ident.hpp"
#include "stateid/io.hpp"
#include "stateid/sdp.hpp"
#include "stateid/smp.hpp"

namespace stateid::cli {

namespace {

using io::Json;
using linmat::DensityMatrix;
using linmat::Rng;

// Runs up to this many qubit-simulation inputs are enumerated exhaustively.
constexpr int kExhaustiveP2 = 8;
// Exact mode is the default up to this size.
constexpr int kExactDefault = 16;

struct Options {
  double eps = 0.0, delta = 0.0, eta = 1e-3;
  int n = 0;
  long trials = 0;
  std::uint64_t seed = 0;
  bool exact = false;
  double tol_gap = 0.0, tol_feas = 0.0;
  std::string out, input;
  int reps = 0, s_size = 0, copies = 1;

  // which options were given
  CLI::App* leaf = nullptr;
  bool given(const char* name) const { return leaf->get_option(name)->count() > 0; }
};

struct Run {
  Options o;
  Tolerances tol;
  Json config;
  Json results;
  Json checks = Json::array();

  void check(const std::string& name, double value, const char* rel, double bound) {
    const bool ok = std::string(rel) == "<=" ? value <= bound : value >= bound;
    Json c;
    c["name"] = name;
    c["value"] = value;
    c["relation"] = rel;
    c["bound"] = bound;
    c["satisfied"] = ok;
    checks.push_back(c);
  }
  bool all_satisfied() const {
    return std::all_of(checks.begin(), checks.end(), [](const Json& c) { return c["satisfied"].get<bool>(); });
  }

  double eps() {
    if (!o.given("--eps")) throw InputError("--eps is required");
    ident::check_eps(o.eps);
    config["eps"] = o.eps;
    return o.eps;
  }
  double eps_or(double fallback) {
    const double e = o.given("--eps") ? o.eps : fallback;
    ident::check_eps(e);
    config["eps"] = e;
    return e;
  }
  Json input() {
    if (o.input.empty()) throw InputError("--input is required");
    config["input"] = std::filesystem::path(o.input).filename().string();
    return io::read_json(o.input);
  }
  Rng rng() {
    if (!o.given("--seed")) throw InputError("--seed is required for randomized runs");
    return Rng(o.seed);
  }
};

// ---------------------------------------------------------------------------
// ident

Json measurement_json(const ident::PredictorMeasurement& m, std::span<const DensityMatrix> states) {
  const auto rep = ident::check_measurement(m, states);
  Json j;
  j["outcomes"] = m.names;
  j["answer_probability"] = rep.answer_probability;
  j["conditional_error"] = rep.conditional_error;
  j["min_element_eigenvalue"] = rep.min_element_eigenvalue;
  j["min_abstain_eigenvalue"] = rep.min_abstain_eigenvalue;
  return j;
}

void ident_report(Run& run, const ident::IdentificationProgram& prog, const ident::IdentResult& r) {
  const auto slack = ident::certificate_slack(prog, r.certificate.x, r.certificate.z);
  Json j;
  j["value"] = r.value;
  j["status"] = sdp::to_string(r.status);
  j["iterations"] = r.iterations;
  j["solver_primal"] = r.solver_primal;
  j["solver_dual"] = r.solver_dual;
  j["measurement"] = measurement_json(r.measurement, prog.states);
  Json c;
  c["trace"] = r.certificate.value;
  c["z"] = r.certificate.z;
  c["x_min_eigenvalue"] = slack.x_min_eigenvalue;
  c["slack_min_eigenvalues"] = slack.outcome_min_eigenvalues;
  j["certificate"] = c;
  run.results = j;

  const auto& m = j["measurement"];
  run.check("measurement_psd", m["min_element_eigenvalue"].get<double>(), ">=", -run.tol.measurement_psd);
  run.check("abstain_psd", m["min_abstain_eigenvalue"].get<double>(), ">=", -run.tol.measurement_psd);
  run.check("conditional_error", m["conditional_error"].get<double>(), "<=", prog.eps + run.tol.certificate_slack);
  run.check("certificate_slack", slack.min(), ">=", -run.tol.certificate_slack);
  run.check("bracket", r.certificate.value - r.value, "<=", ident::kCertifiedGap);
  run.check("bracket_order", r.certificate.value - r.value, ">=", -run.tol.certificate_slack);
}

ident::IdentQuad load_quad(Run& run, double eps) {
  const Json doc = run.input();
  return ident::IdentQuad(io::state_from(doc, "alpha0", run.tol), io::state_from(doc, "alpha1", run.tol),
                          io::state_from(doc, "beta0", run.tol), io::state_from(doc, "beta1", run.tol), eps);
}

void ident_single(Run& run) {
  const double eps = run.eps();
  const Json doc = run.input();
  const ident::IdentPair p(io::state_from(doc, "alpha0", run.tol), io::state_from(doc, "alpha1", run.tol), eps);
  ident_report(run, ident::IdentificationProgram::single(p), ident::d_eps_single(p, run.tol));
}

void ident_quad(Run& run) {
  const auto q = load_quad(run, run.eps());
  ident_report(run, ident::IdentificationProgram::quad(q), ident::d_eps_quad(q, run.tol));
}

void ident_parity(Run& run) {
  const auto q = load_quad(run, run.eps());
  ident_report(run, ident::IdentificationProgram::parity(q), ident::d_eps_parity(q, run.tol));
}

bool is_pure(const DensityMatrix& rho) {
  try {
    ident::as_pure(rho);
    return true;
  } catch (const InputError&) {
    return false;
  }
}

void ident_direct_product(Run& run) {
  const auto q = load_quad(run, run.eps());
  const bool pure = is_pure(q.alpha0) && is_pure(q.alpha1);
  const auto r = pure ? ident::check_direct_product_pure(q, run.tol) : ident::check_corollary_mixed(q, run.tol);
  Json j;
  j["case"] = pure ? "pure" : "mixed";
  j["a_lower"] = r.a_lower;
  j["b"] = r.b;
  j["p"] = r.p;
  j["bound"] = r.bound;
  j["margin"] = r.margin;
  j["delta"] = r.delta;
  j["b_dual"] = r.b_dual;
  j["p_dual"] = r.p_dual;
  j["theorem_bound"] = r.theorem_bound;
  if (pure) {
    j["lifted_value"] = r.lifted_value;
  } else {
    j["fidelity"] = r.fidelity;
    j["purification_overlap"] = r.purification_overlap;
  }
  run.results = j;
  run.check("direct_product", r.p, "<=", r.bound + ident::kDirectProductSlack);
  run.check("b_bracket", r.b_dual - r.b, "<=", ident::kCertifiedGap);
  run.check("p_bracket", r.p_dual - r.p, "<=", ident::kCertifiedGap);
  if (!pure) run.check("purification_overlap", std::abs(r.purification_overlap - r.fidelity), "<=", 1e-8);
}

void ident_dual_lift(Run& run) {
  const auto q = load_quad(run, run.eps());
  const auto a0 = ident::as_pure(q.alpha0);
  const auto a1 = ident::as_pure(q.alpha1);
  const auto cert = ident::dual_single(q.beta0, q.beta1, q.eps, run.tol);
  const auto lift = ident::dual_lift(a0, a1, q.beta0, q.beta1, q.eps, cert, run.tol);
  const auto cond = ident::verify_claim2(a0, a1, q.beta0, q.beta1, q.eps, cert.z, run.tol);

  Json j;
  j["single"] = {{"trace", cert.value}, {"z", cert.z}};
  j["delta"] = lift.delta;
  j["z"] = lift.certificate.z;
  j["z_formula"] = ident::lifted_z(q.eps, cert.z);
  j["trace"] = lift.certificate.value;
  j["trace_bound"] = lift.trace_bound;
  j["slack_min_eigenvalues"] = lift.slack_min_eigenvalues;
  j["lift_conditions"] = {{"first_matrix_min_eigenvalue", cond.first_matrix_min_eigenvalue},
                 {"second_matrix_min_eigenvalue", cond.second_matrix_min_eigenvalue},
                 {"full_min_eigenvalue", cond.full_min_eigenvalue},
                 {"first_scalar", cond.first_scalar},
                 {"second_scalar", cond.second_scalar},
                 {"reduced_linear", cond.reduced_linear}};
  run.results = j;

  for (std::size_t i = 0; i < 4; ++i)
    run.check("lift_slack_" + std::to_string(i + 1), lift.slack_min_eigenvalues[i], ">=", -1e-8);
  run.check("lift_trace", lift.certificate.value, "<=", lift.trace_bound + 1e-8);
  run.check("lift_z", std::abs(lift.certificate.z - ident::lifted_z(q.eps, cert.z)), "<=", 0.0);
  run.check("condition_first_matrix", cond.first_matrix_min_eigenvalue, ">=", -1e-8);
  run.check("condition_second_matrix", cond.second_matrix_min_eigenvalue, ">=", -1e-8);
  run.check("condition_full", cond.full_min_eigenvalue, ">=", -1e-8);
  run.check("condition_first_scalar", cond.first_scalar, ">=", 0.0);
  run.check("condition_second_scalar", cond.second_scalar, ">=", 0.0);
}

// ---------------------------------------------------------------------------
// classical

Json classical_measurement_json(const classical::ClassicalMeasurement& m) {
  Json j;
  j["guess"] = m.guess;
  j["answer"] = m.answer;
  return j;
}

void classical_solve(Run& run) {
  const double eps = run.eps();
  const auto c = io::classical_from_json(run.input(), eps);
  const auto g = classical::optimal_classical(c);
  const double lp = classical::lp_oracle(c, run.tol);
  const double err = classical::conditional_error_classical(c, g.measurement);
  const double mass = classical::answer_mass_classical(c, g.measurement);
  Json j;
  j["value"] = g.value;
  j["lp_value"] = lp;
  j["answer_mass"] = mass;
  j["conditional_error"] = err;
  j["measurement"] = classical_measurement_json(g.measurement);
  run.results = j;
  run.check("greedy_vs_lp", std::abs(g.value - lp), "<=", 1e-9);
  run.check("answer_mass", std::abs(mass - g.value), "<=", 1e-12);
  run.check("conditional_error", err, "<=", eps + 1e-12);
}

// ---------------------------------------------------------------------------
// protocol simulations

smp::Bits random_bits(int n, Rng& rng) {
  smp::Bits b(n);
  std::bernoulli_distribution coin(0.5);
  for (auto& v : b) v = coin(rng) ? 1 : 0;
  return b;
}

smp::Bits random_half(int n, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  smp::Bits s(n, 0);
  for (int k = 0; k < n / 2; ++k) s[idx[k]] = 1;
  return s;
}

smp::P2Input random_p2(int n, Rng& rng) {
  const int k = std::uniform_int_distribution<int>(0, n / 2 - 1)(rng);
  return smp::P2Input(n, smp::gen_matching(k, n), random_bits(n / 2, rng), random_bits(n, rng));
}

int size_option(Run& run, int fallback) {
  const int n = run.o.given("--n") ? run.o.n : fallback;
  if (n < 2) throw InputError("--n must be at least 2");
  return n;
}

void check_size(const Run& run, int n) {
  if (run.o.given("--n") && run.o.n != n) throw InputError("--n disagrees with the input file");
}

Json costs_json(const smp::Transcript& t) {
  return {{"alice_bits", t.alice.bits},
          {"alice_qubits", t.alice.qubits},
          {"bob_bits", t.bob.bits},
          {"bob_qubits", t.bob.qubits},
          {"shared_random_bits", t.shared_random_bits},
          {"epr_pairs", t.epr_pairs}};
}

Json one_based(std::vector<int> out, int indices) {
  for (int k = 0; k < indices && k < static_cast<int>(out.size()); ++k) out[k] += 1;
  return out;
}

struct Tally {
  long trials = 0, found = 0, valid = 0, wrong = 0;
  Json costs;
  double rate() const { return trials ? static_cast<double>(found) / trials : 0.0; }
  double stderr_() const { return trials ? std::sqrt(rate() * (1.0 - rate()) / trials) : 0.0; }
};

// `found` counts transcripts with a real (non-fallback, non-Fail) output;
// `wrong` counts those that do not validate, which must never happen.
Tally sample(long trials, Rng& rng, const std::function<smp::Transcript(Rng&)>& protocol) {
  Tally t;
  for (long k = 0; k < trials; ++k) {
    const auto tr = protocol(rng);
    if (k == 0) t.costs = costs_json(tr);
    ++t.trials;
    t.valid += tr.valid ? 1 : 0;
    if (!tr.fallback && !tr.output.empty()) {
      ++t.found;
      t.wrong += tr.valid ? 0 : 1;
    }
  }
  return t;
}

void monte_carlo(Run& run, const Tally& t, double expected) {
  Json j;
  j["trials"] = t.trials;
  j["success_rate"] = t.rate();
  j["stderr"] = t.stderr_();
  j["valid_outputs"] = t.valid;
  j["invalid_outputs"] = t.wrong;
  if (!std::isnan(expected)) j["expected"] = expected;
  run.results["monte_carlo"] = j;
  run.results["costs"] = t.costs;
  run.check("invalid_outputs", static_cast<double>(t.wrong), "<=", 0.0);
  if (!std::isnan(expected)) {
    const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(t.trials));
    run.check("monte_carlo_3sigma", std::abs(t.rate() - expected), "<=", 3.0 * sigma + 1e-12);
  }
}

smp::P1Input p1_input(Run& run, int default_n) {
  if (!run.o.input.empty()) {
    auto in = io::p1_from_json(run.input());
    check_size(run, in.n);
    return in;
  }
  const int n = size_option(run, default_n);
  Rng rng = run.rng();
  run.config["input"] = "random";
  return smp::P1Input(random_bits(n, rng), random_half(n, rng), random_bits(n, rng));
}

void trials_config(Run& run) {
  if (run.o.trials < 0) throw InputError("--trials must be nonnegative");
  run.config["trials"] = run.o.trials;
  if (run.o.trials > 0 && !run.o.given("--seed")) throw InputError("--seed is required for randomized runs");
  if (run.o.given("--seed")) run.config["seed"] = run.o.seed;
}

void sim_p1_pub(Run& run) {
  const auto in = p1_input(run, 8);
  const int r = run.o.given("--reps") ? run.o.reps : 4;
  if (r < 1) throw InputError("--reps must be at least 1");
  const bool exact = run.o.exact || in.n <= kExactDefault;
  run.config["n"] = in.n;
  run.config["reps"] = r;
  run.config["exact"] = exact;
  trials_config(run);

  const double expected_failure = std::ldexp(1.0, -r);
  run.results = Json::object();
  run.results["expected_failure"] = expected_failure;
  if (exact) {
    const double f = smp::p1_pub_failure_exact(in, r);
    run.results["exact_failure"] = f;
    run.check("exact_failure", std::abs(f - expected_failure), "<=", 1e-12);
  }
  if (run.o.trials > 0) {
    Rng rng = run.rng();
    const auto t = sample(run.o.trials, rng, [&](Rng& g) { return smp::p1_pub_protocol(in, r, g); });
    monte_carlo(run, t, 1.0 - expected_failure);
  } else {
    run.results["costs"] = costs_json(smp::p1_pub_run(in, std::vector<int>(r, 0)));
  }
}

void sim_p1_sqrt(Run& run) {
  const auto in = p1_input(run, 4);
  const int reps = run.o.given("--reps") ? run.o.reps : 1;
  if (reps < 1) throw InputError("--reps must be at least 1");
  const bool exact = run.o.exact || in.n <= kExactDefault;
  run.config["n"] = in.n;
  run.config["reps"] = reps;
  run.config["exact"] = exact;
  trials_config(run);

  const double expected = 1.0 - std::ldexp(1.0, -reps);
  run.results = Json::object();
  run.results["expected_success"] = expected;
  if (exact) {
    const double per = smp::p1_sqrt_success_exact(in);
    run.results["per_repetition_success"] = per;
    run.results["exact_success"] = 1.0 - std::pow(1.0 - per, reps);
    run.check("per_repetition_success", std::abs(per - 0.5), "<=", 1e-12);
  }
  if (run.o.trials > 0) {
    Rng rng = run.rng();
    const auto t = sample(run.o.trials, rng, [&](Rng& g) { return smp::p1_private_sqrt(in, reps, g); });
    monte_carlo(run, t, expected);
  } else {
    run.results["costs"] = costs_json(smp::p1_sqrt_run(in, std::vector<std::pair<int, int>>(reps, {0, 0})));
  }
}

Json distribution_json(const smp::P2Distribution& d, bool with_support) {
  Json j;
  j["success_probability"] = d.success_probability;
  j["total_probability"] = d.total_probability;
  j["max_norm_deviation"] = d.max_norm_deviation;
  j["support_size"] = d.support.size();
  bool identity = true;
  for (const auto& s : d.support) identity = identity && s.identity_holds;
  j["identity_holds"] = identity;
  if (with_support) {
    Json sup = Json::array();
    for (const auto& s : d.support)
      sup.push_back({{"edge", {s.edge.first + 1, s.edge.second + 1}},
                     {"k", s.k},
                     {"l", s.l},
                     {"probability", s.probability},
                     {"output", one_based(s.output, 2)},
                     {"valid", s.valid}});
    j["support"] = sup;
  }
  return j;
}

void check_distribution(Run& run, double success, double total, double norm, bool identity) {
  run.check("success_probability", std::abs(success - 1.0), "<=", 1e-12);
  run.check("total_probability", std::abs(total - 1.0), "<=", 1e-12);
  run.check("norm_deviation", norm, "<=", 1e-12);
  run.check("identity", identity ? 1.0 : 0.0, ">=", 1.0);
}

void sim_p2_ent(Run& run) {
  trials_config(run);
  if (run.o.input.empty() && !run.o.given("--seed")) {
    // no input: enumerate every instance built from the matchings M_k
    const int n = size_option(run, 4);
    if (n > kExhaustiveP2) throw InputError("exhaustive mode needs n <= 8; pass --input or --seed");
    if (run.o.trials > 0) throw InputError("--trials needs --seed");
    run.config["n"] = n;
    run.config["input"] = "exhaustive";
    run.config["exact"] = true;
    long instances = 0;
    double worst = 0.0, worst_total = 0.0, worst_norm = 0.0;
    bool identity = true;
    for (int k = 0; k < n / 2; ++k)
      for (int e = 0; e < (1 << (n / 2)); ++e)
        for (int y = 0; y < (1 << n); ++y) {
          smp::Bits eb(n / 2), yb(n);
          for (int b = 0; b < n / 2; ++b) eb[b] = (e >> b) & 1;
          for (int b = 0; b < n; ++b) yb[b] = (y >> b) & 1;
          const auto d = smp::p2_entangled_exact(smp::P2Input(n, smp::gen_matching(k, n), eb, yb));
          ++instances;
          worst = std::max(worst, std::abs(d.success_probability - 1.0));
          worst_total = std::max(worst_total, std::abs(d.total_probability - 1.0));
          worst_norm = std::max(worst_norm, d.max_norm_deviation);
          for (const auto& s : d.support) identity = identity && s.identity_holds;
        }
    run.results = {{"instances", instances},
                   {"max_success_deviation", worst},
                   {"max_total_deviation", worst_total},
                   {"max_norm_deviation", worst_norm},
                   {"identity_holds", identity}};
    check_distribution(run, 1.0 - worst, 1.0 + worst_total, worst_norm, identity);
    return;
  }

  smp::P2Input in = [&] {
    if (!run.o.input.empty()) return io::p2_from_json(run.input());
    const int n = size_option(run, 4);
    Rng rng = run.rng();
    run.config["input"] = "random";
    return random_p2(n, rng);
  }();
  check_size(run, in.n);
  const bool exact = run.o.exact || in.n <= kExactDefault;
  run.config["n"] = in.n;
  run.config["exact"] = exact;
  run.results = Json::object();
  if (exact) {
    const auto d = smp::p2_entangled_exact(in);
    run.results["exact"] = distribution_json(d, in.n <= kExhaustiveP2);
    bool identity = true;
    for (const auto& s : d.support) identity = identity && s.identity_holds;
    check_distribution(run, d.success_probability, d.total_probability, d.max_norm_deviation, identity);
  }
  if (run.o.trials > 0) {
    Rng rng = run.rng();
    const auto t = sample(run.o.trials, rng, [&](Rng& g) { return smp::p2_entangled(in, g); });
    monte_carlo(run, t, 1.0);
  }
}

void sim_p2_sub(Run& run) {
  Rng rng = run.rng();
  std::vector<int> subset;
  smp::P2Input in = [&] {
    if (!run.o.input.empty()) {
      const Json doc = run.input();
      if (doc.contains("subset")) {
        if (!doc["subset"].is_array()) throw InputError("p2: subset must be an array of indices");
        for (const auto& v : doc["subset"]) {
          if (!v.is_number_integer()) throw InputError("p2: subset must be an array of indices");
          subset.push_back(v.get<int>() - 1);
        }
      }
      return io::p2_from_json(doc);
    }
    const int n = size_option(run, 16);
    run.config["input"] = "random";
    return random_p2(n, rng);
  }();
  check_size(run, in.n);
  const int copies = run.o.copies;
  if (copies < 1) throw InputError("--copies must be at least 1");
  const long trials = run.o.trials > 0 ? run.o.trials : 1000;
  run.config["n"] = in.n;
  run.config["copies"] = copies;
  run.config["trials"] = trials;
  run.config["seed"] = run.o.seed;
  run.results = Json::object();

  if (!subset.empty()) {
    if (run.o.given("--s-size") && run.o.s_size != static_cast<int>(subset.size()))
      throw InputError("--s-size disagrees with the input subset");
    const auto inside = smp::edges_inside(in, subset);
    const double png = smp::p2_nongarbage_probability(in, subset);
    const double expected = 1.0 - std::pow(1.0 - png, copies);
    const double formula = 2.0 * static_cast<double>(inside.size()) / static_cast<double>(subset.size());
    run.config["s_size"] = subset.size();
    run.results["edges_inside"] = inside.size();
    run.results["nongarbage_probability"] = png;
    run.results["nongarbage_formula"] = formula;
    run.results["exact_success"] = expected;
    run.check("nongarbage_probability", std::abs(png - formula), "<=", 1e-12);
    const auto t = sample(trials, rng, [&](Rng& g) { return smp::p2_sublinear_run(in, subset, copies, g); });
    monte_carlo(run, t, expected);
  } else {
    const int s_size = run.o.given("--s-size") ? run.o.s_size : std::max(2, in.n / 4);
    if (s_size < 1 || s_size > in.n) throw InputError("--s-size must lie in [1, n]");
    run.config["s_size"] = s_size;
    const auto t = sample(trials, rng, [&](Rng& g) { return smp::p2_sublinear(in, s_size, copies, g); });
    monte_carlo(run, t, std::nan(""));
  }
}

// ---------------------------------------------------------------------------
// counterexamples

void counterexample_parity(Run& run) {
  const double delta = run.o.given("--delta") ? run.o.delta : 0.05;
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("--delta must lie in (0, 1)");
  const double eps = run.eps_or(0.49);
  run.config["delta"] = delta;
  const auto q = ident::counterexample_quad(delta, eps);
  const auto a = ident::d_eps_single(ident::IdentPair(q.alpha0, q.alpha1, eps), run.tol);
  const auto b = ident::d_eps_single(ident::IdentPair(q.beta0, q.beta1, eps), run.tol);
  const auto p = ident::d_eps_parity(q, run.tol);
  const auto states = q.product_states();
  const auto w = ident::parity_witness(delta);
  const auto& e = w.elements[0].matrix();
  const double p00 = (e * states[0].matrix()).trace().real();
  const double p01 = (e * states[1].matrix()).trace().real();
  const double d2 = delta * delta;
  const double s = std::sqrt(1.0 - d2) - 1.0;

  Json j;
  j["a"] = a.value;
  j["b"] = b.value;
  j["parity"] = p.value;
  j["a_dual"] = a.certificate.value;
  j["b_dual"] = b.certificate.value;
  j["parity_dual"] = p.certificate.value;
  j["witness"] = measurement_json(w, states);
  j["witness_p00"] = p00;
  j["witness_p01"] = p01;
  j["closed_p00"] = d2 / (2.0 + d2);
  j["closed_p01"] = d2 * s * s / (2.0 + d2);
  run.results = j;

  run.check("a_lower", a.value, ">=", d2 / 2.0);
  run.check("a_upper", a.value, "<=", 3.0 * d2);
  run.check("b_lower", b.value, ">=", d2 / 2.0);
  run.check("b_upper", b.value, "<=", 3.0 * d2);
  run.check("parity_lower", p.value, ">=", d2 / 5.0);
  run.check("product_upper", 16.0 * a.value * b.value, "<=", 150.0 * d2 * d2);
  run.check("witness_error", j["witness"]["conditional_error"].get<double>(), "<=", eps);
  run.check("closed_p00", std::abs(p00 - d2 / (2.0 + d2)), "<=", 1e-12);
  run.check("closed_p01", std::abs(p01 - d2 * s * s / (2.0 + d2)), "<=", 1e-12);
}

void counterexample_quarter(Run& run) {
  const double delta = run.o.given("--delta") ? run.o.delta : 0.01;
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("--delta must lie in (0, 1)");
  const double eps = run.eps_or(0.251);
  run.config["delta"] = delta;
  const auto q = ident::counterexample_quad(delta, eps);
  const auto states = q.product_states();
  const auto w = ident::quarter_witness(delta);
  const auto r = ident::d_eps_quad(q, run.tol);
  Json j;
  j["value"] = r.value;
  j["dual"] = r.certificate.value;
  j["witness"] = measurement_json(w, states);
  run.results = j;
  const double err = j["witness"]["conditional_error"].get<double>();
  const double mass = j["witness"]["answer_probability"].get<double>();
  run.check("value_lower", r.value, ">=", delta * delta / 3.0);
  run.check("witness_error", err, "<=", eps);
  run.check("value_vs_witness", r.value, ">=", mass - run.tol.certificate_slack);
}

// ---------------------------------------------------------------------------
// rac, sdp

void rac_check(Run& run) {
  if (!run.o.input.empty()) {
    const Json doc = run.input();
    if (!doc.contains("q") || !doc["q"].is_number()) throw InputError("rac: missing number 'q'");
    if (!doc.contains("predictors") || !doc["predictors"].is_array()) throw InputError("rac: missing 'predictors'");
    std::vector<smp::PredictorSpec> preds;
    for (const auto& p : doc["predictors"]) {
      if (!p.contains("lambda") || !p.contains("eps") || !p["lambda"].is_number() || !p["eps"].is_number())
        throw InputError("rac: predictors need numeric 'lambda' and 'eps'");
      preds.push_back({p["lambda"].get<double>(), p["eps"].get<double>()});
    }
    const double q = doc["q"].get<double>();
    const auto r = smp::rac_bound(preds, q);
    run.results = {{"lhs", r.lhs}, {"q", q}};
    run.check("rac_bound", r.lhs, "<=", q);
    return;
  }
  const double eta = run.o.eta;
  if (!(eta > 0.0 && eta < 0.5)) throw InputError("--eta must lie in (0, 1/2)");
  run.config["eta"] = eta;
  const double gain = 1.0 - smp::binary_entropy(0.5 - eta);
  const double ratio = gain / (2.0 / std::log(2.0) * eta * eta);
  run.results = {{"gain", gain}, {"ratio", ratio}};
  run.check("ratio_lower", ratio, ">=", 0.95);
  run.check("ratio_upper", ratio, "<=", 1.05);
}

void sdp_solve(Run& run) {
  const auto p = io::problem_from_json(run.input());
  const auto s = sdp::solve(p, sdp::SolverOptions::from(run.tol));
  Json j;
  j["status"] = sdp::to_string(s.status);
  j["primal_value"] = s.primal_value;
  j["dual_value"] = s.dual_value;
  j["gap"] = s.gap;
  j["max_residual"] = s.max_residual;
  j["iterations"] = s.iterations;
  run.results = j;
  if (s.status != sdp::Status::Optimal) {
    run.check("optimal", 0.0, ">=", 1.0);
    return;
  }
  Json blocks = Json::array();
  for (const auto& b : s.primal_blocks) blocks.push_back(io::matrix_to_json(b));
  run.results["primal_blocks"] = blocks;
  run.results["multipliers"] = s.dual_multipliers;
  const auto pr = sdp::check_primal_feasibility(p, s.primal_blocks);
  const auto dr = sdp::check_dual_feasibility(p, s.dual_multipliers);
  run.results["primal_violation"] = pr.max_violation;
  run.results["min_block_eigenvalue"] = pr.min_block_eigenvalue;
  run.results["min_dual_slack_eigenvalue"] = dr.min_slack_eigenvalue;
  run.results["dual_bound"] = dr.bound;
  run.check("gap", s.gap, "<=", run.tol.sdp_gap);
  run.check("primal_violation", pr.max_violation, "<=", 1e-6);
  run.check("primal_psd", pr.min_block_eigenvalue, ">=", -1e-6);
  run.check("dual_slack", dr.min_slack_eigenvalue, ">=", -1e-6);
  run.check("dual_signs", static_cast<double>(dr.sign_violations.size()), "<=", 0.0);
}

// ---------------------------------------------------------------------------

void add_options(CLI::App* sub, Options& o) {
  sub->add_option("--eps", o.eps, "tolerated conditional error, in [0, 1/2)");
  sub->add_option("--delta", o.delta, "counterexample overlap parameter");
  sub->add_option("--eta", o.eta, "rac bias (default 1e-3)");
  sub->add_option("--n", o.n, "problem size");
  sub->add_option("--trials", o.trials, "Monte Carlo trials");
  sub->add_option("--seed", o.seed, "random seed; required whenever randomness is used");
  sub->add_flag("--exact", o.exact, "enumerate instead of sampling (default for n <= 16)");
  sub->add_option("--tol-gap", o.tol_gap, "solver relative gap");
  sub->add_option("--tol-feas", o.tol_feas, "solver feasibility tolerance");
  sub->add_option("--out", o.out, "report path (default stdout)");
  sub->add_option("--input,--states", o.input, "input document");
  sub->add_option("--reps", o.reps, "protocol repetitions");
  sub->add_option("--s-size", o.s_size, "shared subset size");
  sub->add_option("--copies", o.copies, "copies of Bob's state");
}

struct Leaf {
  const char* group;
  const char* name;
  void (*handler)(Run&);
};

constexpr Leaf kLeaves[] = {
    {"ident", "single", ident_single},
    {"ident", "quad", ident_quad},
    {"ident", "parity", ident_parity},
    {"ident", "direct-product", ident_direct_product},
    {"ident", "dual-lift", ident_dual_lift},
    {"classical", "solve", classical_solve},
    {"sim", "p1-pub", sim_p1_pub},
    {"sim", "p1-sqrt", sim_p1_sqrt},
    {"sim", "p2-ent", sim_p2_ent},
    {"sim", "p2-sub", sim_p2_sub},
    {"counterexample", "parity", counterexample_parity},
    {"counterexample", "quarter", counterexample_quarter},
    {"rac", "check", rac_check},
    {"sdp", "solve", sdp_solve},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bounded-error state identification"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<CLI::App*, const Leaf*>> leaves;
  for (const auto& leaf : kLeaves) {
    CLI::App* group = app.get_subcommand_no_throw(leaf.group);
    if (!group) {
      group = app.add_subcommand(leaf.group);
      group->require_subcommand(1);
    }
    CLI::App* sub = group->add_subcommand(leaf.name);
    add_options(sub, o);
    leaves.emplace_back(sub, &leaf);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  const Leaf* chosen = nullptr;
  for (const auto& [sub, leaf] : leaves)
    if (sub->parsed()) {
      o.leaf = sub;
      chosen = leaf;
    }
  if (!chosen) {
    err << "error: no subcommand\n";
    return kExitInput;
  }

  Run r;
  r.o = o;
  r.config["command"] = std::string(chosen->group) + " " + chosen->name;
  try {
    if (o.given("--tol-gap")) {
      if (!(o.tol_gap > 0.0)) throw InputError("--tol-gap must be positive");
      r.tol.sdp_gap = o.tol_gap;
    }
    if (o.given("--tol-feas")) {
      if (!(o.tol_feas > 0.0)) throw InputError("--tol-feas must be positive");
      r.tol.sdp_feasibility = o.tol_feas;
    }
    const auto start = std::chrono::steady_clock::now();
    chosen->handler(r);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json report;
    report["command"] = r.config["command"];
    r.config.erase("command");
    r.config["tolerances"] = io::tolerances_to_json(r.tol);
    report["config"] = r.config;
    report["results"] = r.results;
    report["checks"] = r.checks;
    report["satisfied"] = r.all_satisfied();
    report["timing"] = {{"wall_seconds", wall}};
    if (o.out.empty()) {
      out << io::dump(report);
    } else {
      io::write_json(o.out, report);
      out << report["command"].get<std::string>() << ": " << (r.all_satisfied() ? "satisfied" : "VIOLATED")
          << " -> " << o.out << "\n";
    }
    for (const auto& c : r.checks)
      if (!c["satisfied"].get<bool>())
        err << "violated: " << c["name"].get<std::string>() << " (" << c["value"].get<double>() << " "
            << c["relation"].get<std::string>() << " " << c["bound"].get<double>() << ")\n";
    return r.all_satisfied() ? kExitOk : kExitViolation;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitViolation;
  }
}

}  // namespace stateid::cli
