#pragma once

// Simultaneous-message-passing protocols: Alice and Bob each send one message
// to a referee. Indices are 0-based here; reports convert to 1-based.
//
//   P1: Alice holds x, s (|s| = n/2), Bob holds y; output (i, x_i, y_i) with
//       s_i = 1.
//   P2: Alice holds a perfect matching M and a bit x_e per edge, Bob holds y;
//       output (i, j, x_(i,j), y_i xor y_j) for an edge (i, j) in M.

#include <functional>
#include <utility>
#include <vector>

#include "stateid/linmat.hpp"

namespace stateid::smp {

using linmat::Complex;
using linmat::ComplexVector;
using linmat::Rng;
using Bits = std::vector<int>;
using Edge = std::pair<int, int>;
using Matching = std::vector<Edge>;

// ---------------------------------------------------------------------------
// Inputs

struct P1Input {
  /// Throws InputError unless n = |x| is a power of two >= 2, x, s, y are
  /// 0/1 strings of length n and |s| = n/2.
  P1Input(Bits x, Bits s, Bits y);
  int n;
  Bits x, s, y;
};

struct P2Input {
  /// Throws InputError unless n is a power of two >= 2, `matching` is a
  /// perfect matching of [n] and there is one edge bit per edge.
  P2Input(int n, Matching matching, Bits edge_bits, Bits y);
  int n;
  Matching matching;
  Bits edge_bits;
  Bits y;
};

bool is_perfect_matching(int n, const Matching& m);

/// M_k = {(i, (i + k) mod n/2 + n/2) : 0 <= i < n/2}. Throws InputError
/// unless n is even and 0 <= k < n/2.
Matching gen_matching(int k, int n);

// ---------------------------------------------------------------------------
// State vectors over qubits; qubit b is bit b of the basis index.

class StateVector {
 public:
  /// Throws InputError unless the norm is 1 within 1e-12.
  explicit StateVector(ComplexVector amplitudes);
  static StateVector basis(Eigen::Index dim, Eigen::Index k);

  const ComplexVector& amplitudes() const noexcept { return v_; }
  Eigen::Index dim() const noexcept { return v_.size(); }
  double norm() const { return v_.norm(); }

  /// Multiplies amplitude k by (-1)^{signs[k]}.
  void apply_phases(const Bits& signs);
  /// Throws InputError unless dim is a power of two and the qubit exists.
  void apply_hadamard(int qubit);
  void apply_hadamard_all();

  /// Probability of the projector onto the listed basis states.
  double probability(const std::vector<Eigen::Index>& support) const;
  /// Projects onto the listed basis states and renormalizes; returns the
  /// probability. Throws InputError if it is 0.
  double collapse(const std::vector<Eigen::Index>& support);
  std::vector<double> probabilities() const;

 private:
  ComplexVector v_;
};

// ---------------------------------------------------------------------------
// Transcripts

struct Message {
  std::vector<int> content;
  int bits = 0;
  int qubits = 0;
};

struct Transcript {
  Message alice, bob;
  int shared_random_bits = 0;  // free: not counted as communication
  int epr_pairs = 0;           // free as well
  /// P1: (i, x_i, y_i); P2: (i, j, x_e, parity). Empty means Fail.
  std::vector<int> output;
  bool fallback = false;  // P1: no index with s_i = 1 was seen; output guessed
  bool valid = false;
};

bool validate_p1(const P1Input& in, const std::vector<int>& output);
bool validate_p2(const P2Input& in, const std::vector<int>& output);

/// ceil(log2 n), and 0 for n = 1.
int index_bits(int n);

// ---------------------------------------------------------------------------
// P1

/// Shared-randomness protocol on given shared indices.
Transcript p1_pub_run(const P1Input& in, const std::vector<int>& indices);
/// Draws r uniform shared indices.
Transcript p1_pub_protocol(const P1Input& in, int r, Rng& rng);
/// Probability that none of r uniform indices has s_i = 1, by enumerating all
/// n^r index tuples.
double p1_pub_failure_exact(const P1Input& in, int r);

/// sqrt(n) x sqrt(n) protocol on given (row, column) choices, one per
/// repetition. Throws InputError unless n is a perfect square.
Transcript p1_sqrt_run(const P1Input& in, const std::vector<std::pair<int, int>>& choices);
Transcript p1_private_sqrt(const P1Input& in, int reps, Rng& rng);
/// Per-repetition success probability by enumerating row and column.
double p1_sqrt_success_exact(const P1Input& in);

// ---------------------------------------------------------------------------
// P2

struct P2Outcome {
  Edge edge;
  int k, l;  // Alice's and Bob's computational outcomes
  double probability;
  std::vector<int> output;
  bool valid;
  bool identity_holds;  // (k + l) . (i + j) = y_i xor y_j over GF(2)
};

struct P2Distribution {
  std::vector<P2Outcome> support;  // outcomes with probability > 1e-14
  double total_probability;        // over the support
  double success_probability;      // over valid support points
  double max_norm_deviation;       // | ||psi|| - 1 | over all intermediate states
};

/// GF(2) inner product of binary encodings.
int gf2_dot(int a, int b);

/// Entanglement protocol, full output distribution.
P2Distribution p2_entangled_exact(const P2Input& in);
Transcript p2_entangled(const P2Input& in, Rng& rng);

/// Edges of the matching with both ends in S.
Matching edges_inside(const P2Input& in, const std::vector<int>& subset);
/// Probability that one copy of Bob's state does not land in the garbage
/// outcome, from the projectors.
double p2_nongarbage_probability(const P2Input& in, const std::vector<int>& subset);
/// Sublinear protocol on a given shared subset.
Transcript p2_sublinear_run(const P2Input& in, const std::vector<int>& subset, int copies, Rng& rng);
/// Draws the shared subset of size s_size. Throws InputError if s_size > n.
Transcript p2_sublinear(const P2Input& in, int s_size, int copies, Rng& rng);

// ---------------------------------------------------------------------------
// Estimation and the random access code bound

struct SuccessEstimate {
  double rate;
  double stderr_;
  long trials;  // 0 for an exact rate
};

/// Monte Carlo fraction of valid transcripts with binomial standard error.
SuccessEstimate estimate_success(const std::function<Transcript(Rng&)>& protocol, long trials, Rng& rng);
/// An enumerated rate, reported without sampling.
SuccessEstimate exact_success(double rate);

/// -x log2 x - (1 - x) log2 (1 - x); throws InputError outside [0, 1].
double binary_entropy(double x);

struct PredictorSpec {
  double lambda;
  double eps;
};

struct RacResult {
  double lhs;
  bool satisfied;
};

/// lhs = sum lambda_i (1 - H(eps_i)), satisfied iff lhs <= q.
RacResult rac_bound(const std::vector<PredictorSpec>& preds, double q);

}  // namespace stateid::smp
