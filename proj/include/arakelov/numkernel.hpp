#pragma once

// Exact and configurable-precision numeric substrate: big integers and
// rationals (GMP via Boost.Multiprecision), MPFR-backed floats with explicit
// precision, integer polynomials, polynomial roots and resultants.

#include <boost/multiprecision/gmp.hpp>
#include <mpfr.h>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arakelov/errors.hpp"

namespace arakelov {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

/// Natural log of |v|; v must be nonzero. Exact to double rounding even for
/// integers far outside the double range.
double log_abs(const BigInt& v);
double log_abs(const Rational& v);

/// "num/den" (or "num" when den == 1).
std::string to_string(const Rational& v);
/// Accepts "a", "a/b", or a decimal like "0.25" (converted exactly).
Rational parse_rational(std::string_view text);

BigInt gcd(const BigInt& a, const BigInt& b);

/// Bits of significand carried by every value in one computation.
struct Precision {
  unsigned bits = 128;
};

class BigFloat {
 public:
  explicit BigFloat(Precision prec = {});
  BigFloat(double v, Precision prec);
  BigFloat(const BigInt& v, Precision prec);
  BigFloat(const Rational& v, Precision prec);
  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  unsigned precision() const { return static_cast<unsigned>(mpfr_get_prec(v_)); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  /// Binary exponent e with |v| in [2^(e-1), 2^e); zero maps to a large negative value.
  long exponent() const;

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

  BigFloat& operator+=(const BigFloat& o);
  BigFloat& operator-=(const BigFloat& o);
  BigFloat& operator*=(const BigFloat& o);
  BigFloat& operator/=(const BigFloat& o);

  friend BigFloat operator+(BigFloat a, const BigFloat& b) { return a += b; }
  friend BigFloat operator-(BigFloat a, const BigFloat& b) { return a -= b; }
  friend BigFloat operator*(BigFloat a, const BigFloat& b) { return a *= b; }
  friend BigFloat operator/(BigFloat a, const BigFloat& b) { return a /= b; }
  BigFloat operator-() const;

  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return b < a; }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const BigFloat& a, const BigFloat& b) { return b <= a; }

  static BigFloat pi(Precision prec);

 private:
  mpfr_t v_;
};

BigFloat abs(const BigFloat& x);
BigFloat sqrt(const BigFloat& x);
BigFloat log(const BigFloat& x);
BigFloat exp(const BigFloat& x);
BigFloat sin(const BigFloat& x);
BigFloat cos(const BigFloat& x);
BigFloat atan2(const BigFloat& y, const BigFloat& x);
BigFloat hypot(const BigFloat& x, const BigFloat& y);
BigFloat max(const BigFloat& a, const BigFloat& b);

struct PrecComplex {
  BigFloat re;
  BigFloat im;

  explicit PrecComplex(Precision prec = {}) : re(prec), im(prec) {}
  PrecComplex(BigFloat r, BigFloat i) : re(std::move(r)), im(std::move(i)) {}
  PrecComplex(std::complex<double> z, Precision prec) : re(z.real(), prec), im(z.imag(), prec) {}

  unsigned precision() const { return re.precision(); }
  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }

  PrecComplex& operator+=(const PrecComplex& o);
  PrecComplex& operator-=(const PrecComplex& o);
  PrecComplex& operator*=(const PrecComplex& o);
  PrecComplex& operator/=(const PrecComplex& o);
  friend PrecComplex operator+(PrecComplex a, const PrecComplex& b) { return a += b; }
  friend PrecComplex operator-(PrecComplex a, const PrecComplex& b) { return a -= b; }
  friend PrecComplex operator*(PrecComplex a, const PrecComplex& b) { return a *= b; }
  friend PrecComplex operator/(PrecComplex a, const PrecComplex& b) { return a /= b; }
};

BigFloat abs(const PrecComplex& z);
BigFloat norm(const PrecComplex& z);  // |z|^2
BigFloat arg(const PrecComplex& z);
/// e^{2 pi i * num/den}
PrecComplex root_of_unity(const BigInt& num, const BigInt& den, Precision prec);

/// Univariate integer polynomial; coefficient i multiplies z^i.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<BigInt> coeffs);
  static IntPolynomial from_ints(std::initializer_list<long long> coeffs);
  static IntPolynomial monomial(const BigInt& c, int degree);

  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<BigInt>& coeffs() const { return coeffs_; }
  const BigInt& operator[](std::size_t i) const { return coeffs_[i]; }
  const BigInt& leading() const;

  BigInt content() const;
  IntPolynomial primitive_part() const;
  IntPolynomial derivative() const;
  BigInt max_abs_coeff() const;

  Rational eval(const Rational& x) const;
  PrecComplex eval(const PrecComplex& z) const;

  friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b);
  friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) { return a.coeffs_ == b.coeffs_; }

  std::string to_string() const;

 private:
  void trim();
  std::vector<BigInt> coeffs_;
};

/// Exact division a / b; throws InvalidArgument if b does not divide a over Z.
IntPolynomial exact_divide(const IntPolynomial& a, const IntPolynomial& b);
/// Primitive gcd over Q[z] with positive leading coefficient.
IntPolynomial gcd(const IntPolynomial& a, const IntPolynomial& b);
bool is_squarefree(const IntPolynomial& p);

/// All deg(p) complex roots with multiplicity (Aberth-Ehrlich with companion
/// matrix restart). Each root r satisfies |p(r)| <= tol * max|a_i| * max(1,|r|)^deg.
std::vector<PrecComplex> poly_roots(const IntPolynomial& p, double tol, Precision prec = {});
/// Same for complex coefficients (coeffs[i] multiplies z^i, leading nonzero).
std::vector<PrecComplex> poly_roots(std::span<const PrecComplex> coeffs, double tol, Precision prec = {});

/// Determinant of the Sylvester matrix with f-rows first, using the formal
/// degrees given by the coefficient spans (index i multiplies z^i).
BigInt sylvester_resultant(std::span<const BigInt> f, std::span<const BigInt> g);
BigInt resultant(const IntPolynomial& f, const IntPolynomial& g);

/// Small dense row-major matrix used for exact linear algebra.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::InvalidArgument, "matrix shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMatrix = Matrix<BigInt>;
using RationalMatrix = Matrix<Rational>;

BigInt determinant(const IntMatrix& m);  // fraction-free Bareiss
Rational determinant(const RationalMatrix& m);
/// Throws InvalidArgument when singular.
RationalMatrix inverse(const RationalMatrix& m);
RationalMatrix to_rational(const IntMatrix& m);

long long euler_phi(long long m);
int mobius(long long m);
/// m-th cyclotomic polynomial Phi_m, exact.
IntPolynomial cyclotomic_polynomial(long long m);

}  // namespace arakelov
