#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "stateid/errors.hpp"
#include "stateid/smp.hpp"

using namespace stateid;
using namespace stateid::smp;

namespace {

Bits bits_of(unsigned v, int n) {
  Bits b(n);
  for (int k = 0; k < n; ++k) b[k] = (v >> k) & 1;
  return b;
}

Bits random_bits(int n, Rng& rng) {
  Bits b(n);
  for (auto& v : b) v = std::uniform_int_distribution<int>(0, 1)(rng);
  return b;
}

// s of weight n/2 at random positions
Bits random_half(int n, Rng& rng) {
  Bits s(n, 0);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int k = 0; k < n / 2; ++k) s[idx[k]] = 1;
  return s;
}

Bits first_half(int n) {
  Bits s(n, 0);
  for (int k = 0; k < n / 2; ++k) s[k] = 1;
  return s;
}

}  // namespace

TEST_CASE("gen_matching") {
  CHECK(gen_matching(0, 4) == Matching{{0, 2}, {1, 3}});
  for (int n : {4, 8, 16}) CHECK(gen_matching(1, n).front() == Edge{0, n / 2 + 1});
  // the listing (1, n/2+2), (2, n/2+3), ..., (n/2-1, n), (n/2, n/2+1) in 1-based form
  const auto m1 = gen_matching(1, 8);
  CHECK(m1 == Matching{{0, 5}, {1, 6}, {2, 7}, {3, 4}});

  std::set<Edge> all;
  for (int k = 0; k < 4; ++k) {
    const auto m = gen_matching(k, 8);
    CHECK(is_perfect_matching(8, m));
    for (const auto& e : m) {
      CHECK(e.first < 4);
      CHECK(e.second >= 4);
      CHECK(all.insert(e).second);
    }
  }
  CHECK(all.size() == 16);

  CHECK_THROWS_AS(gen_matching(2, 4), InputError);
  CHECK_THROWS_AS(gen_matching(-1, 4), InputError);
  CHECK_THROWS_AS(gen_matching(0, 5), InputError);
  CHECK_FALSE(is_perfect_matching(4, {{0, 1}, {1, 2}}));
  CHECK_FALSE(is_perfect_matching(4, {{0, 1}}));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(P1Input({0, 1, 0, 1}, {1, 1, 1, 0}, {0, 0, 0, 0}), InputError);
  CHECK_THROWS_AS(P1Input({0, 1, 0, 2}, {1, 1, 0, 0}, {0, 0, 0, 0}), InputError);
  CHECK_THROWS_AS(P1Input({0, 1, 0}, {1, 1, 0}, {0, 0, 0}), InputError);
  CHECK_THROWS_AS(P2Input(4, {{0, 1}, {1, 2}}, {0, 0}, {0, 0, 0, 0}), InputError);
  CHECK_THROWS_AS(P2Input(6, gen_matching(0, 6), {0, 0, 0}, Bits(6, 0)), InputError);
  CHECK_THROWS_AS(P2Input(4, gen_matching(0, 4), {0}, Bits(4, 0)), InputError);
}

TEST_CASE("state vector") {
  ComplexVector v(4);
  v << 0.5, 0.5, 0.5, -0.5;
  StateVector psi(v);
  psi.apply_hadamard_all();
  // H (x) H of (|00> + |01> + |10> - |11>)/2 = (|00> + |01> + |10> - |11>)/2
  CHECK((psi.amplitudes() - v).norm() <= 1e-15);
  psi.apply_phases({0, 0, 0, 1});
  CHECK(std::abs(psi.norm() - 1.0) <= 1e-12);
  CHECK(psi.probability({0, 1}) == doctest::Approx(0.5));
  CHECK(psi.collapse({0, 1}) == doctest::Approx(0.5));
  CHECK(std::abs(psi.norm() - 1.0) <= 1e-12);

  auto b = StateVector::basis(8, 0);
  b.apply_hadamard_all();
  for (double p : b.probabilities()) CHECK(p == doctest::Approx(1.0 / 8));

  ComplexVector bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS(StateVector{bad}, InputError);
  CHECK_THROWS_AS(StateVector::basis(2, 0).apply_hadamard(1), InputError);
  CHECK_THROWS_AS(StateVector::basis(3, 0).apply_hadamard(0), InputError);
  CHECK_THROWS_AS(StateVector::basis(2, 0).collapse({1}), InputError);
}

TEST_CASE("validators") {
  const P1Input in({1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0});
  CHECK(validate_p1(in, {0, 1, 0}));
  CHECK_FALSE(validate_p1(in, {1, 0, 1}));  // s_1 = 0
  CHECK_FALSE(validate_p1(in, {0, 0, 0}));  // wrong x
  CHECK_FALSE(validate_p1(in, {7, 0, 0}));
  CHECK_FALSE(validate_p1(in, {}));

  const P2Input p2(4, gen_matching(0, 4), {1, 0}, {0, 1, 1, 1});
  CHECK(validate_p2(p2, {0, 2, 1, 1}));
  CHECK_FALSE(validate_p2(p2, {0, 2, 1, 0}));  // wrong parity
  CHECK_FALSE(validate_p2(p2, {0, 2, 0, 1}));  // wrong edge bit
  CHECK_FALSE(validate_p2(p2, {0, 1, 0, 1}));  // not an edge
}

TEST_CASE("p1 shared randomness") {
  const P1Input forced({1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0});
  const auto t = p1_pub_run(forced, {0});
  CHECK(t.output == std::vector<int>{0, 1, 0});
  CHECK(t.valid);
  CHECK_FALSE(t.fallback);
  CHECK(t.alice.bits == 4);
  CHECK(t.bob.bits == 3);
  CHECK(t.shared_random_bits == 2);

  const auto miss = p1_pub_run(forced, {1, 2});
  CHECK(miss.fallback);
  CHECK(miss.output == std::vector<int>{0, 0, 0});

  Rng rng(51);
  for (int r = 1; r <= 4; ++r) {
    const P1Input in(random_bits(8, rng), random_half(8, rng), random_bits(8, rng));
    CHECK(p1_pub_failure_exact(in, r) == std::ldexp(1.0, -r));
  }

  // non-fallback outputs are always valid
  const P1Input in(random_bits(16, rng), random_half(16, rng), random_bits(16, rng));
  for (int k = 0; k < 500; ++k) {
    const auto tr = p1_pub_protocol(in, 2, rng);
    if (!tr.fallback) CHECK(tr.valid);
  }

  // Monte Carlo against 1 - 2^-r
  const P1Input adv(Bits(8, 1), first_half(8), Bits(8, 1));  // fallback (0, 0, 0) is invalid here
  for (int r : {1, 3}) {
    Rng mc(100 + r);
    const auto est = estimate_success([&](Rng& g) { return p1_pub_protocol(adv, r, g); }, 20000, mc);
    const double expect = 1.0 - std::ldexp(1.0, -r);
    CHECK(std::abs(est.rate - expect) <= 3.0 * std::sqrt(expect * (1 - expect) / 20000));
  }
}

TEST_CASE("p1 private sqrt") {
  const P1Input in({0, 1, 1, 0}, first_half(4), {1, 1, 0, 0});
  CHECK(p1_sqrt_success_exact(in) == 0.5);
  const auto t = p1_sqrt_run(in, {{0, 1}});
  CHECK(t.output == std::vector<int>{1, 1, 1});
  CHECK(t.valid);
  CHECK(t.alice.bits == 1 + 4);
  CHECK(t.bob.bits == 1 + 2);

  // reps = 5 fails only if all five intersections miss s: (1/2)^5
  int fails = 0, total = 0;
  for (int c = 0; c < (1 << 10); ++c) {
    std::vector<std::pair<int, int>> ch;
    for (int r = 0; r < 5; ++r) ch.emplace_back((c >> (2 * r)) & 1, (c >> (2 * r + 1)) & 1);
    fails += p1_sqrt_run(in, ch).fallback ? 1 : 0;
    ++total;
  }
  CHECK(static_cast<double>(fails) / total == 1.0 / 32);

  Rng rng(52);
  for (int k = 0; k < 200; ++k) {
    const P1Input r(random_bits(16, rng), random_half(16, rng), random_bits(16, rng));
    CHECK(p1_sqrt_success_exact(r) == 0.5);
    const auto tr = p1_private_sqrt(r, 3, rng);
    if (!tr.fallback) CHECK(tr.valid);
  }
  CHECK_THROWS_AS(p1_private_sqrt(P1Input(Bits(8, 0), first_half(8), Bits(8, 0)), 1, rng), InputError);
}

TEST_CASE("gf2_dot") {
  CHECK(gf2_dot(0b101, 0b100) == 1);
  CHECK(gf2_dot(0b101, 0b101) == 0);
  CHECK(gf2_dot(0, 7) == 0);
}

TEST_CASE("p2 entanglement protocol, exhaustive n = 4") {
  int runs = 0;
  for (int k = 0; k < 2; ++k)
    for (unsigned y = 0; y < 16; ++y)
      for (unsigned x = 0; x < 4; ++x) {
        const P2Input in(4, gen_matching(k, 4), bits_of(x, 2), bits_of(y, 4));
        const auto d = p2_entangled_exact(in);
        CHECK(std::abs(d.total_probability - 1.0) <= 1e-12);
        CHECK(std::abs(d.success_probability - 1.0) <= 1e-12);
        CHECK(d.max_norm_deviation <= 1e-12);
        for (const auto& o : d.support) {
          CHECK(o.valid);
          CHECK(o.identity_holds);
        }
        ++runs;
      }
  CHECK(runs == 128);
}

TEST_CASE("p2 entanglement protocol details") {
  // zero phases: every parity output is 0
  const P2Input zero(8, gen_matching(2, 8), Bits(4, 1), Bits(8, 0));
  const auto d = p2_entangled_exact(zero);
  for (const auto& o : d.support) CHECK(o.output[3] == 0);
  // each edge has probability 2/n; given it, (k, l) is uniform over n^2/2 points
  CHECK(d.support.size() == 4 * 32);
  for (const auto& o : d.support) CHECK(o.probability == doctest::Approx(1.0 / 4 / 32).epsilon(1e-12));

  Rng rng(53);
  for (int t = 0; t < 1000; ++t) {
    const P2Input in(8, gen_matching(t % 4, 8), random_bits(4, rng), random_bits(8, rng));
    const auto tr = p2_entangled(in, rng);
    CHECK(tr.valid);
    CHECK(tr.alice.bits == 10);
    CHECK(tr.bob.bits == 3);
    CHECK(tr.epr_pairs == 3);
    const int i = tr.alice.content[0], j = tr.alice.content[1], k = tr.alice.content[2], l = tr.bob.content[0];
    CHECK(gf2_dot(k ^ l, i ^ j) == (in.y[i] ^ in.y[j]));
  }
}

TEST_CASE("p2 sublinear protocol") {
  Rng rng(54);
  const P2Input in(8, gen_matching(0, 8), {1, 0, 1, 0}, {1, 0, 0, 1, 1, 1, 0, 0});

  // one edge, |S| = 2: never garbage
  CHECK(p2_nongarbage_probability(in, {0, 4}) == doctest::Approx(1.0).epsilon(1e-15));
  for (int t = 0; t < 50; ++t) {
    const auto tr = p2_sublinear_run(in, {0, 4}, 1, rng);
    CHECK(tr.valid);
    CHECK(tr.output == std::vector<int>{0, 4, 1, 0});
  }
  // no edge inside S: always Fail
  CHECK(p2_nongarbage_probability(in, {0, 1, 2}) == 0.0);
  for (int t = 0; t < 20; ++t) {
    const auto tr = p2_sublinear_run(in, {0, 1, 2}, 5, rng);
    CHECK(tr.output.empty());
    CHECK_FALSE(tr.valid);
  }

  // n = 64, |S| = 16, M_0: non-garbage probability 2 |M_0 inside S| / 16
  const P2Input big(64, gen_matching(0, 64), random_bits(32, rng), random_bits(64, rng));
  std::vector<int> subset;
  for (int i = 0; i < 8; ++i) subset.push_back(i * 4);         // 0, 4, ..., 28
  for (int i : {32, 40, 48, 56}) subset.push_back(i);  // partners of 0, 8, 16, 24
  for (int i : {33, 35, 37, 39}) subset.push_back(i);  // partners outside S
  const auto inside = edges_inside(big, subset);
  const double png = p2_nongarbage_probability(big, subset);
  CHECK(png == doctest::Approx(2.0 * inside.size() / 16.0).epsilon(1e-14));
  CHECK(inside.size() == 4);
  const int copies = 3;
  const double expect = 1.0 - std::pow(1.0 - png, copies);
  const long trials = 20000;
  long ok = 0;
  for (long t = 0; t < trials; ++t) {
    const auto tr = p2_sublinear_run(big, subset, copies, rng);
    if (!tr.output.empty()) CHECK(tr.valid);
    ok += tr.valid ? 1 : 0;
  }
  const double rate = static_cast<double>(ok) / trials;
  CHECK(std::abs(rate - expect) <= 3.0 * std::sqrt(expect * (1 - expect) / trials));

  const auto tr = p2_sublinear(big, 16, copies, rng);
  CHECK(tr.bob.qubits == copies * 6);
  CHECK_THROWS_AS(p2_sublinear(big, 65, 1, rng), InputError);
}

TEST_CASE("estimate_success") {
  Rng rng(55);
  const P2Input in(4, gen_matching(1, 4), {0, 1}, {1, 1, 0, 1});
  const auto est = estimate_success([&](Rng& g) { return p2_entangled(in, g); }, 500, rng);
  CHECK(est.rate == 1.0);
  CHECK(est.stderr_ == 0.0);

  const P1Input adv(Bits(8, 1), first_half(8), Bits(8, 1));
  Rng a(7), b(7);
  const auto e1 = estimate_success([&](Rng& g) { return p1_pub_protocol(adv, 1, g); }, 100000, a);
  const auto e2 = estimate_success([&](Rng& g) { return p1_pub_protocol(adv, 1, g); }, 100000, b);
  CHECK(e1.rate == e2.rate);
  CHECK(std::abs(e1.rate - 0.5) <= 3.0 * e1.stderr_);

  const auto ex = exact_success(0.75);
  CHECK(ex.trials == 0);
  CHECK(ex.stderr_ == 0.0);
}

TEST_CASE("binary entropy and the random access code bound") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.11) == doctest::Approx(0.4999).epsilon(1e-4));
  CHECK_THROWS_AS(binary_entropy(1.5), InputError);
  CHECK_THROWS_AS(binary_entropy(-0.1), InputError);

  CHECK(rac_bound(std::vector<PredictorSpec>(7, {1.0, 0.0}), 7.0).lhs == 7.0);
  CHECK(rac_bound(std::vector<PredictorSpec>(7, {1.0, 0.0}), 7.0).satisfied);
  CHECK_FALSE(rac_bound(std::vector<PredictorSpec>(7, {1.0, 0.0}), 6.0).satisfied);
  CHECK(rac_bound({{1.0, 0.5}}, 0.0).lhs == 0.0);

  for (double eta : {1e-2, 1e-3}) {
    const double ratio = (1.0 - binary_entropy(0.5 - eta)) / (2.0 / std::log(2.0) * eta * eta);
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.05);
  }

  // monotone in lambda and in eps on [0, 1/2]
  Rng rng(56);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<PredictorSpec> p(4);
    for (auto& s : p) s = {u(rng), 0.5 * u(rng)};
    const double base = rac_bound(p, 0.0).lhs;
    auto more = p;
    more[t % 4].lambda = std::min(1.0, more[t % 4].lambda + 0.1);
    CHECK(rac_bound(more, 0.0).lhs >= base);
    auto less = p;
    less[t % 4].eps *= 0.5;
    CHECK(rac_bound(less, 0.0).lhs >= base);
  }
}
