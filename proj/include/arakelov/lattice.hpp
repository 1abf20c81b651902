#pragma once

// Quadratically normed Z-modules: free part with an exact rational Gram
// matrix plus a finite torsion order.

#include <cstdint>
#include <utility>
#include <vector>

#include "arakelov/numkernel.hpp"
#include "json.hpp"

namespace arakelov::lattice {

class NormedLattice {
 public:
  /// Validates symmetry and positive definiteness (leading minors > 0).
  static NormedLattice make(RationalMatrix gram, BigInt torsion = 1);
  static NormedLattice identity(int rank);

  int rank() const { return static_cast<int>(gram_.rows()); }
  const RationalMatrix& gram() const { return gram_; }
  const BigInt& torsion() const { return torsion_; }

  /// Squared norm of the integer coordinate vector v.
  Rational norm2(const std::vector<BigInt>& v) const;
  /// Gram scaled by 1/alpha^2 (norm multiplied by alpha).
  NormedLattice scaled(const Rational& alpha2) const;

 private:
  NormedLattice(RationalMatrix gram, BigInt torsion) : gram_(std::move(gram)), torsion_(std::move(torsion)) {}
  RationalMatrix gram_;
  BigInt torsion_;
};

/// A sublattice given by integer generators (columns of basis, r x r').
struct SublatticeEmbedding {
  NormedLattice ambient;
  IntMatrix basis;

  static SublatticeEmbedding make(NormedLattice ambient, IntMatrix basis);
};

double unit_ball_volume(int r);
double log_unit_ball_volume(int r);

/// det(gram) / torsion^2. chi(M) = log V(r) - 1/2 log of this.
Rational covolume_invariant(const NormedLattice& m);
double chi(const NormedLattice& m);
/// chi from a floating log-determinant, for Grams that are not exact.
double chi_from_log_det(int rank, double log_det, double log_torsion = 0.0);

struct EnumerationOptions {
  int rank_cap = 12;
  unsigned threads = 1;
  std::uint64_t count_cap = std::uint64_t{1} << 36;
};

/// #{x in Z^r : x^T q x < 1} (strict) or <= 1 (closed); exact for rational q.
std::uint64_t count_ellipsoid_points(const RationalMatrix& q, bool strict, const EnumerationOptions& opts = {});

BigInt h0_count(const NormedLattice& m, const EnumerationOptions& opts = {});
BigInt h1_count(const NormedLattice& m, const EnumerationOptions& opts = {});
double h0(const NormedLattice& m, const EnumerationOptions& opts = {});
double h1(const NormedLattice& m, const EnumerationOptions& opts = {});
double riemann_roch_defect(const NormedLattice& m, const EnumerationOptions& opts = {});

/// Row-style unimodular reduction: transform * input = reduced, with
/// reduced upper echelon (nonzero rows first) and inverse_transform = transform^-1.
struct UnimodularReduction {
  IntMatrix reduced;
  IntMatrix transform;
  IntMatrix inverse_transform;
  int rank = 0;
};
UnimodularReduction unimodular_reduce(const IntMatrix& input);

/// Basis (r x r') of the saturation (span_Q(basis) intersect Z^r).
IntMatrix saturate(const IntMatrix& basis);
bool is_saturated(const IntMatrix& basis);

struct SubQuotient {
  NormedLattice sub;
  NormedLattice quotient;
  /// Columns lifting the quotient basis into the ambient lattice.
  IntMatrix quotient_lift;
};
SubQuotient induced_sub_quotient(const NormedLattice& m, const SublatticeEmbedding& s);

struct GeneratorBound {
  bool holds = false;
  double slack = 0.0;  // chi(M) - (log V(r) - r log c)
};
GeneratorBound generator_bound_check(const NormedLattice& m, const Rational& c,
                                     const std::vector<std::vector<BigInt>>& generators);

nlohmann::json to_json(const NormedLattice& m);
NormedLattice lattice_from_json(const nlohmann::json& j);

}  // namespace arakelov::lattice
