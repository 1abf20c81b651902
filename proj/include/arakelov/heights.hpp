#pragma once

// Heights of algebraic points on projective space and P^1.

#include <utility>
#include <variant>
#include <vector>

#include "arakelov/numkernel.hpp"
#include "json.hpp"

namespace arakelov::heights {

/// Point of P^n(Q) stored as its primitive integer representative with the
/// first nonzero coordinate positive.
class RationalProjectivePoint {
 public:
  static RationalProjectivePoint make(std::vector<BigInt> coords);
  static RationalProjectivePoint from_rationals(const std::vector<Rational>& coords);

  const std::vector<BigInt>& coords() const { return coords_; }
  int dimension() const { return static_cast<int>(coords_.size()) - 1; }

 private:
  explicit RationalProjectivePoint(std::vector<BigInt> c) : coords_(std::move(c)) {}
  std::vector<BigInt> coords_;
};

enum class Irreducibility {
  Certified,
  /// No factor was found by root-subset search, but the search was not exhaustive.
  AssumedIrreducible,
};

class AlgebraicP1Point {
 public:
  /// Normalizes to a primitive polynomial with positive leading coefficient.
  /// Throws InvalidArgument if the polynomial is constant, not squarefree, or
  /// a factor is found.
  static AlgebraicP1Point from_minpoly(IntPolynomial minpoly, std::size_t subset_budget = 20000);
  static AlgebraicP1Point infinity();

  bool is_infinity() const { return infinity_; }
  const IntPolynomial& minpoly() const { return minpoly_; }
  int degree() const { return infinity_ ? 1 : minpoly_.degree(); }
  Irreducibility irreducibility() const { return status_; }

 private:
  AlgebraicP1Point() = default;
  IntPolynomial minpoly_;
  bool infinity_ = false;
  Irreducibility status_ = Irreducibility::Certified;
};

struct CyclotomicTorusPoint {
  long long m = 1;
  std::vector<long long> exponents;  // reduced mod m

  static CyclotomicTorusPoint make(long long m, std::vector<long long> exponents);
};

double naive_height_rational(const RationalProjectivePoint& x);
/// (1/d)(log|a_d| + sum log max(1, |alpha_i|)); exactly 0 for cyclotomic
/// minimal polynomials and for z.
double naive_height_minpoly(const AlgebraicP1Point& x, double tol = 1e-30, Precision prec = {});
double height_cyclotomic(const CyclotomicTorusPoint& x);

bool is_cyclotomic(const IntPolynomial& p);

/// Prime factorization of |n| (n != 0) as sorted (prime, exponent) pairs.
std::vector<std::pair<BigInt, unsigned>> factor_integer(const BigInt& n);

struct PlaceTerm {
  BigInt prime;  // 0 marks the archimedean place
  double log_abs_value;
};
/// log|q|_v for the archimedean place and every prime dividing num or den.
std::vector<PlaceTerm> place_terms(const Rational& q);
/// Sum over all places of log|q|_v; 0 exactly when the valuation
/// bookkeeping reproduces q.
double product_formula_check(const Rational& q);

using Point = std::variant<RationalProjectivePoint, AlgebraicP1Point, CyclotomicTorusPoint>;
Point point_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Point& p);
double height(const Point& p, double tol = 1e-30, Precision prec = {});

}  // namespace arakelov::heights
