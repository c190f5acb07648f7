#include "stateid/smp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "stateid/errors.hpp"

namespace stateid::smp {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kSupport = 1e-14;

void check_bits(const Bits& b, std::size_t n, const char* name) {
  if (b.size() != n) throw InputError(std::string("smp: ") + name + " has the wrong length");
  for (int v : b)
    if (v != 0 && v != 1) throw InputError(std::string("smp: ") + name + " is not a bit string");
}

bool is_power_of_two(long n) { return n >= 1 && (n & (n - 1)) == 0; }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

int isqrt_exact(int n) {
  const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (m * m != n) throw InputError("p1_private_sqrt: n must be a perfect square");
  return m;
}

}  // namespace

P1Input::P1Input(Bits x_, Bits s_, Bits y_)
    : n(static_cast<int>(x_.size())), x(std::move(x_)), s(std::move(s_)), y(std::move(y_)) {
  if (n < 2 || !is_power_of_two(n)) throw InputError("P1: n must be a power of two >= 2");
  check_bits(x, n, "x");
  check_bits(s, n, "s");
  check_bits(y, n, "y");
  if (std::accumulate(s.begin(), s.end(), 0) != n / 2) throw InputError("P1: s must have Hamming weight n/2");
}

P2Input::P2Input(int n_, Matching matching_, Bits edge_bits_, Bits y_)
    : n(n_), matching(std::move(matching_)), edge_bits(std::move(edge_bits_)), y(std::move(y_)) {
  if (n < 2 || !is_power_of_two(n)) throw InputError("P2: n must be a power of two >= 2");
  if (!is_perfect_matching(n, matching)) throw InputError("P2: not a perfect matching");
  check_bits(edge_bits, matching.size(), "edge bits");
  check_bits(y, n, "y");
}

bool is_perfect_matching(int n, const Matching& m) {
  if (n % 2 != 0 || m.size() != static_cast<std::size_t>(n / 2)) return false;
  std::vector<int> seen(n, 0);
  for (auto [i, j] : m) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) return false;
    if (seen[i]++ || seen[j]++) return false;
  }
  return true;
}

Matching gen_matching(int k, int n) {
  if (n < 2 || n % 2 != 0) throw InputError("gen_matching: n must be even");
  const int h = n / 2;
  if (k < 0 || k >= h) throw InputError("gen_matching: k must lie in [0, n/2)");
  Matching m;
  for (int i = 0; i < h; ++i) m.emplace_back(i, (i + k) % h + h);
  return m;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(ComplexVector amplitudes) : v_(std::move(amplitudes)) {
  if (v_.size() == 0 || std::abs(v_.norm() - 1.0) > kNormTolerance)
    throw InputError("StateVector: amplitudes must have norm 1");
}

StateVector StateVector::basis(Eigen::Index dim, Eigen::Index k) {
  if (k < 0 || k >= dim) throw InputError("StateVector: basis index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(k) = 1.0;
  return StateVector(v);
}

void StateVector::apply_phases(const Bits& signs) {
  if (signs.size() != static_cast<std::size_t>(dim())) throw InputError("apply_phases: length mismatch");
  for (Eigen::Index k = 0; k < dim(); ++k)
    if (signs[k]) v_(k) = -v_(k);
}

void StateVector::apply_hadamard(int qubit) {
  if (!is_power_of_two(dim())) throw InputError("apply_hadamard: dimension is not a power of two");
  const Eigen::Index bit = Eigen::Index{1} << qubit;
  if (qubit < 0 || bit >= dim()) throw InputError("apply_hadamard: no such qubit");
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index k = 0; k < dim(); ++k) {
    if (k & bit) continue;
    const Complex a = v_(k), b = v_(k | bit);
    v_(k) = r * (a + b);
    v_(k | bit) = r * (a - b);
  }
}

void StateVector::apply_hadamard_all() {
  for (int q = 0; (Eigen::Index{1} << q) < dim(); ++q) apply_hadamard(q);
}

double StateVector::probability(const std::vector<Eigen::Index>& support) const {
  double p = 0.0;
  for (auto k : support) {
    if (k < 0 || k >= dim()) throw InputError("StateVector: index out of range");
    p += std::norm(v_(k));
  }
  return p;
}

double StateVector::collapse(const std::vector<Eigen::Index>& support) {
  const double p = probability(support);
  if (p <= 0.0) throw InputError("StateVector: collapse onto a zero-probability outcome");
  ComplexVector w = ComplexVector::Zero(dim());
  for (auto k : support) w(k) = v_(k);
  v_ = w / std::sqrt(p);
  return p;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(dim());
  for (Eigen::Index k = 0; k < dim(); ++k) p[k] = std::norm(v_(k));
  return p;
}

// ---------------------------------------------------------------------------

bool validate_p1(const P1Input& in, const std::vector<int>& out) {
  if (out.size() != 3) return false;
  const int i = out[0];
  if (i < 0 || i >= in.n) return false;
  return in.s[i] == 1 && out[1] == in.x[i] && out[2] == in.y[i];
}

bool validate_p2(const P2Input& in, const std::vector<int>& out) {
  if (out.size() != 4) return false;
  for (std::size_t e = 0; e < in.matching.size(); ++e) {
    const auto [i, j] = in.matching[e];
    if (out[0] == i && out[1] == j)
      return out[2] == in.edge_bits[e] && out[3] == (in.y[i] ^ in.y[j]);
  }
  return false;
}

int index_bits(int n) {
  int b = 0;
  while ((1L << b) < n) ++b;
  return b;
}

// ---------------------------------------------------------------------------
// P1

Transcript p1_pub_run(const P1Input& in, const std::vector<int>& indices) {
  const int lg = index_bits(in.n);
  Transcript t;
  for (int i : indices) {
    if (i < 0 || i >= in.n) throw InputError("p1_pub: shared index out of range");
    t.alice.content.insert(t.alice.content.end(), {i, in.x[i], in.s[i]});
    t.bob.content.insert(t.bob.content.end(), {i, in.y[i]});
  }
  const int r = static_cast<int>(indices.size());
  t.alice.bits = r * (lg + 2);
  t.bob.bits = r * (lg + 1);
  t.shared_random_bits = r * lg;
  for (int i : indices) {
    if (in.s[i] == 1) {
      t.output = {i, in.x[i], in.y[i]};
      break;
    }
  }
  if (t.output.empty()) {
    t.output = {0, 0, 0};
    t.fallback = true;
  }
  t.valid = validate_p1(in, t.output);
  return t;
}

Transcript p1_pub_protocol(const P1Input& in, int r, Rng& rng) {
  if (r < 1) throw InputError("p1_pub: need at least one repetition");
  std::vector<int> idx(r);
  for (auto& i : idx) i = uniform_int(rng, 0, in.n - 1);
  return p1_pub_run(in, idx);
}

double p1_pub_failure_exact(const P1Input& in, int r) {
  if (r < 1) throw InputError("p1_pub: need at least one repetition");
  const double tuples = std::pow(static_cast<double>(in.n), r);
  if (tuples > 1e8) throw InputError("p1_pub_failure_exact: too many index tuples to enumerate");
  std::vector<int> idx(r, 0);
  long fails = 0, total = 0;
  while (true) {
    ++total;
    if (p1_pub_run(in, idx).fallback) ++fails;
    int pos = 0;
    while (pos < r && ++idx[pos] == in.n) idx[pos++] = 0;
    if (pos == r) break;
  }
  return static_cast<double>(fails) / static_cast<double>(total);
}

Transcript p1_sqrt_run(const P1Input& in, const std::vector<std::pair<int, int>>& choices) {
  const int m = isqrt_exact(in.n);
  const int lg = index_bits(m);
  Transcript t;
  for (auto [row, col] : choices) {
    if (row < 0 || row >= m || col < 0 || col >= m) throw InputError("p1_private_sqrt: choice out of range");
    t.alice.content.push_back(row);
    for (int c = 0; c < m; ++c) t.alice.content.push_back(in.x[row * m + c]);
    for (int c = 0; c < m; ++c) t.alice.content.push_back(in.s[row * m + c]);
    t.bob.content.push_back(col);
    for (int r = 0; r < m; ++r) t.bob.content.push_back(in.y[r * m + col]);
  }
  const int reps = static_cast<int>(choices.size());
  t.alice.bits = reps * (lg + 2 * m);
  t.bob.bits = reps * (lg + m);
  for (auto [row, col] : choices) {
    const int i = row * m + col;
    if (in.s[i] == 1) {
      t.output = {i, in.x[i], in.y[i]};
      break;
    }
  }
  if (t.output.empty()) {
    t.output = {0, 0, 0};
    t.fallback = true;
  }
  t.valid = validate_p1(in, t.output);
  return t;
}

Transcript p1_private_sqrt(const P1Input& in, int reps, Rng& rng) {
  const int m = isqrt_exact(in.n);
  if (reps < 1) throw InputError("p1_private_sqrt: need at least one repetition");
  std::vector<std::pair<int, int>> choices(reps);
  for (auto& c : choices) {
    c.first = uniform_int(rng, 0, m - 1);   // Alice's private row
    c.second = uniform_int(rng, 0, m - 1);  // Bob's private column
  }
  return p1_sqrt_run(in, choices);
}

double p1_sqrt_success_exact(const P1Input& in) {
  const int m = isqrt_exact(in.n);
  int hits = 0;
  for (int row = 0; row < m; ++row)
    for (int col = 0; col < m; ++col) hits += p1_sqrt_run(in, {{row, col}}).fallback ? 0 : 1;
  return static_cast<double>(hits) / (m * m);
}

// ---------------------------------------------------------------------------
// P2

int gf2_dot(int a, int b) { return std::popcount(static_cast<unsigned>(a & b)) & 1; }

namespace {

// (1/sqrt n) sum_i |i>|i> with Bob's phases; Alice's register holds the high
// bits of the index.
StateVector shared_state(const P2Input& in) {
  const int n = in.n;
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(n) * n);
  for (int i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i) * n + i) = 1.0 / std::sqrt(static_cast<double>(n));
  StateVector psi(v);
  Bits phases(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) phases[static_cast<std::size_t>(a) * n + b] = in.y[b];
  psi.apply_phases(phases);
  return psi;
}

// Alice's projector E_ij (x) I.
std::vector<Eigen::Index> alice_edge_support(int n, Edge e) {
  std::vector<Eigen::Index> s;
  for (int a : {e.first, e.second})
    for (int b = 0; b < n; ++b) s.push_back(static_cast<Eigen::Index>(a) * n + b);
  return s;
}

P2Outcome referee(const P2Input& in, std::size_t edge, int k, int l, double prob) {
  const auto [i, j] = in.matching[edge];
  P2Outcome o{in.matching[edge], k, l, prob, {}, false, false};
  o.output = {i, j, in.edge_bits[edge], gf2_dot(k ^ l, i ^ j)};
  o.valid = validate_p2(in, o.output);
  o.identity_holds = gf2_dot(k ^ l, i ^ j) == (in.y[i] ^ in.y[j]);
  return o;
}

void p2_costs(const P2Input& in, Transcript& t) {
  const int lg = index_bits(in.n);
  t.alice.bits = 3 * lg + 1;  // i, j, k, x_(i,j)
  t.bob.bits = lg;            // l
  t.epr_pairs = lg;
}

}  // namespace

P2Distribution p2_entangled_exact(const P2Input& in) {
  const int n = in.n;
  P2Distribution d{{}, 0.0, 0.0, 0.0};
  const StateVector psi = shared_state(in);
  d.max_norm_deviation = std::abs(psi.norm() - 1.0);
  for (std::size_t e = 0; e < in.matching.size(); ++e) {
    StateVector post = psi;
    const double pe = post.collapse(alice_edge_support(n, in.matching[e]));
    d.max_norm_deviation = std::max(d.max_norm_deviation, std::abs(post.norm() - 1.0));
    post.apply_hadamard_all();
    d.max_norm_deviation = std::max(d.max_norm_deviation, std::abs(post.norm() - 1.0));
    const auto probs = post.probabilities();
    for (std::size_t idx = 0; idx < probs.size(); ++idx) {
      const double p = pe * probs[idx];
      if (p <= kSupport) continue;
      auto o = referee(in, e, static_cast<int>(idx) / n, static_cast<int>(idx) % n, p);
      d.total_probability += p;
      if (o.valid) d.success_probability += p;
      d.support.push_back(std::move(o));
    }
  }
  return d;
}

Transcript p2_entangled(const P2Input& in, Rng& rng) {
  const int n = in.n;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const std::vector<double>& weights) {
    double u = unit(rng) * std::accumulate(weights.begin(), weights.end(), 0.0);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (u < weights[k]) return k;
      u -= weights[k];
    }
    std::size_t last = weights.size() - 1;
    while (weights[last] <= 0.0) --last;
    return last;
  };

  StateVector psi = shared_state(in);
  std::vector<double> edge_probs;
  for (const auto& e : in.matching) edge_probs.push_back(psi.probability(alice_edge_support(n, e)));
  const std::size_t e = draw(edge_probs);
  psi.collapse(alice_edge_support(n, in.matching[e]));
  psi.apply_hadamard_all();
  const auto idx = static_cast<int>(draw(psi.probabilities()));
  const auto o = referee(in, e, idx / n, idx % n, 1.0);

  Transcript t;
  p2_costs(in, t);
  t.alice.content = {o.edge.first, o.edge.second, o.k, in.edge_bits[e]};
  t.bob.content = {o.l};
  t.output = o.output;
  t.valid = o.valid;
  return t;
}

Matching edges_inside(const P2Input& in, const std::vector<int>& subset) {
  std::vector<int> in_s(in.n, 0);
  for (int i : subset) {
    if (i < 0 || i >= in.n) throw InputError("p2_sublinear: subset index out of range");
    in_s[i] = 1;
  }
  Matching m;
  for (const auto& e : in.matching)
    if (in_s[e.first] && in_s[e.second]) m.push_back(e);
  return m;
}

namespace {

// (1/sqrt|S|) sum_{i in S} (-1)^{y_i} |i>
StateVector bob_state(const P2Input& in, const std::vector<int>& subset) {
  if (subset.empty()) throw InputError("p2_sublinear: empty subset");
  ComplexVector v = ComplexVector::Zero(in.n);
  for (int i : subset) v(i) = (in.y[i] ? -1.0 : 1.0) / std::sqrt(static_cast<double>(subset.size()));
  return StateVector(v);
}

}  // namespace

double p2_nongarbage_probability(const P2Input& in, const std::vector<int>& subset) {
  const StateVector psi = bob_state(in, subset);
  double p = 0.0;
  for (const auto& e : edges_inside(in, subset)) p += psi.probability({e.first, e.second});
  return p;
}

Transcript p2_sublinear_run(const P2Input& in, const std::vector<int>& subset, int copies, Rng& rng) {
  if (copies < 1) throw InputError("p2_sublinear: need at least one copy");
  const int lg = index_bits(in.n);
  const Matching inside = edges_inside(in, subset);
  const StateVector psi = bob_state(in, subset);

  Transcript t;
  for (const auto& e : inside) {
    const auto pos = std::find(in.matching.begin(), in.matching.end(), e) - in.matching.begin();
    t.alice.content.insert(t.alice.content.end(), {e.first, e.second, in.edge_bits[pos]});
  }
  t.alice.bits = static_cast<int>(inside.size()) * (2 * lg + 1);
  t.bob.qubits = copies * lg;
  t.shared_random_bits = static_cast<int>(subset.size()) * lg;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < copies && t.output.empty(); ++c) {
    // edge projectors, then E_garbage = I - sum E_ij
    double u = unit(rng);
    for (const auto& e : inside) {
      StateVector post = psi;
      const double p = post.probability({e.first, e.second});
      if (u >= p) {
        u -= p;
        continue;
      }
      post.collapse({e.first, e.second});
      // basis (|i> + |j>)/sqrt2, (|i> - |j>)/sqrt2
      const Complex plus = (post.amplitudes()(e.first) + post.amplitudes()(e.second)) / std::sqrt(2.0);
      const int parity = unit(rng) < std::norm(plus) ? 0 : 1;
      const auto pos = std::find(in.matching.begin(), in.matching.end(), e) - in.matching.begin();
      t.output = {e.first, e.second, in.edge_bits[pos], parity};
      break;
    }
  }
  t.valid = !t.output.empty() && validate_p2(in, t.output);
  return t;
}

Transcript p2_sublinear(const P2Input& in, int s_size, int copies, Rng& rng) {
  if (s_size < 1 || s_size > in.n) throw InputError("p2_sublinear: subset size must lie in [1, n]");
  std::vector<int> all(in.n);
  std::iota(all.begin(), all.end(), 0);
  // partial Fisher-Yates with the explicit generator
  for (int k = 0; k < s_size; ++k) std::swap(all[k], all[uniform_int(rng, k, in.n - 1)]);
  std::vector<int> subset(all.begin(), all.begin() + s_size);
  std::sort(subset.begin(), subset.end());
  return p2_sublinear_run(in, subset, copies, rng);
}

// ---------------------------------------------------------------------------

SuccessEstimate estimate_success(const std::function<Transcript(Rng&)>& protocol, long trials, Rng& rng) {
  if (trials < 1) throw InputError("estimate_success: need at least one trial");
  long ok = 0;
  for (long t = 0; t < trials; ++t) ok += protocol(rng).valid ? 1 : 0;
  const double rate = static_cast<double>(ok) / static_cast<double>(trials);
  return {rate, std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials)), trials};
}

SuccessEstimate exact_success(double rate) { return {rate, 0.0, 0}; }

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw InputError("binary_entropy: argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

RacResult rac_bound(const std::vector<PredictorSpec>& preds, double q) {
  if (!(q >= 0.0)) throw InputError("rac_bound: q must be nonnegative");
  double lhs = 0.0;
  for (const auto& p : preds) {
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw InputError("rac_bound: lambda outside [0, 1]");
    lhs += p.lambda * (1.0 - binary_entropy(p.eps));
  }
  return {lhs, lhs <= q};
}

}  // namespace stateid::smp
