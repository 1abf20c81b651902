#pragma once

// Polarized endomorphisms of P^n: validation, Tate canonical heights with a
// certified error, preperiodicity and backward-iteration sampling of the
// canonical measure on P^1(C).

#include <cstdint>
#include <random>
#include <vector>

#include "arakelov/heights.hpp"
#include "arakelov/numkernel.hpp"
#include "json.hpp"

namespace arakelov::dynamics {

struct Term {
  BigInt coeff;
  std::vector<int> exponents;  // length n + 1
};
using Form = std::vector<Term>;

class Endomorphism {
 public:
  enum class Kind { General, PowerMap };

  /// General entry point; forms must be homogeneous of a common degree q >= 2.
  static Endomorphism validate(int n, const std::vector<Form>& forms);
  /// n = 1 dense forms: entry k of each list multiplies x0^(q-k) x1^k.
  static Endomorphism binary(std::vector<std::vector<BigInt>> forms);
  static Endomorphism power_map(int n, int q);

  int n() const { return n_; }
  int q() const { return q_; }
  Kind kind() const { return kind_; }
  /// Dense n = 1 forms (also filled for power maps when n = 1).
  const std::vector<std::vector<BigInt>>& binary_forms() const { return binary_; }
  /// Homogeneous resultant of (f0, f1) for n = 1, 1 for power maps.
  const BigInt& resultant() const { return resultant_; }

  /// Image of an integer representative (not reduced).
  std::vector<BigInt> apply(const std::vector<BigInt>& x) const;
  heights::RationalProjectivePoint apply(const heights::RationalProjectivePoint& x) const;

 private:
  int n_ = 1;
  int q_ = 2;
  Kind kind_ = Kind::General;
  std::vector<std::vector<BigInt>> binary_;
  BigInt resultant_ = 1;
};

struct TransformBound {
  double upper = 0.0;  // C+ = log((q+1) max_i sum|coeffs f_i|)
  double lower = 0.0;  // C- = log of the Bezout cofactor norm
  double value = 0.0;  // max(C+, C-), 0 for power maps
};
TransformBound height_transform_bounds(const Endomorphism& phi);
double height_transform_bound(const Endomorphism& phi);

struct TateEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  int iterations = 0;
  double transform_constant = 0.0;
};

struct OrbitOptions {
  Precision prec{128};
  /// Orbits are tracked exactly until a coordinate exceeds this many bits.
  std::size_t exact_bits = 4096;
  /// Limit on the bit size of the residue modulus in the hybrid phase.
  std::size_t residue_bits_budget = std::size_t{1} << 24;
  /// Hard cap on the iteration count.
  int max_iterations = 200;
};

class OrbitOverflow : public Error {
 public:
  OrbitOverflow(const std::string& what, TateEstimate partial)
      : Error(ErrorKind::OrbitOverflow, what), partial_(partial) {}
  const TateEstimate& partial() const { return partial_; }

 private:
  TateEstimate partial_;
};

/// Iterations needed for error C q^-N / (q-1) <= eps.
int tate_iterations(double c, int q, double eps);

/// h(phi^N(x)) / q^N with the certified bound; power maps return the naive
/// height with error 0.
TateEstimate canonical_height(const Endomorphism& phi, const heights::Point& x, double eps,
                              const OrbitOptions& opts = {});
/// Same with an explicit iteration count (no eps); used for fixed-depth oracles.
TateEstimate tate_iterate(const Endomorphism& phi, const heights::RationalProjectivePoint& x, int iterations,
                          const OrbitOptions& opts = {});

bool is_preperiodic(const Endomorphism& phi, const heights::RationalProjectivePoint& x);

struct CanonicalMeasureSample {
  std::vector<PrecComplex> points;  // chart coordinate x1/x0
  std::vector<bool> at_infinity;
  std::vector<double> weights;
  std::uint64_t seed = 0;
  int generations = 0;
};

std::mt19937_64 seeded_engine(std::uint64_t seed);

/// Backward iteration from z = 2: each step picks a uniform preimage (with
/// multiplicity). The first burn_in states are discarded.
CanonicalMeasureSample brolin_sample(const Endomorphism& phi, std::size_t count, int burn_in = 30,
                                     std::uint64_t seed = 0, Precision prec = {128});

Endomorphism endomorphism_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Endomorphism& phi);

}  // namespace arakelov::dynamics
