#pragma once

// Analysis on P^1(C) for rotation-invariant metrics on O(d): curvature
// measures, L^2 Gram matrices, sup norms, distortion functions, twisted norms,
// arithmetic intersection numbers and chi-growth experiments.
//
// Charts: z = x1/x0 on |z| <= 1 (chart 0) and w = x0/x1 on |w| <= 1 (chart
// infinity). A section of O(d) is a coefficient vector, entry k multiplying
// x0^(d-k) x1^k; it reads as sum s_k z^k in chart 0 and sum s_k w^(d-k) in
// chart infinity.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "arakelov/numkernel.hpp"
#include "json.hpp"

namespace arakelov::bergman {

/// Metric on O(1). The weight phi = -log ||x0||^2 in chart 0 and
/// -log ||x1||^2 in chart infinity.
class LineMetric {
 public:
  enum class Kind { C, T };

  /// ||s|| = |s| / sqrt(|x0|^2 + c |x1|^2), c > 0.
  static LineMetric c_family(double c);
  /// ||s|| = |s| / (|x0|^t + |x1|^t)^(1/t), t >= 1.
  static LineMetric t_family(int t);

  Kind kind() const { return kind_; }
  double param() const { return param_; }

  double phi0(double r) const;
  double phi_inf(double u) const;
  /// Curvature density per Lebesgue area, times 2 pi r (radial mass element).
  double mass0(double r) const;
  double mass_inf(double u) const;
  /// Curvature density per Lebesgue area in chart 0.
  double density0(double r) const;
  /// log ||x1|| at the point (0:1).
  double log_norm_x1_at_infinity() const;

  std::string label() const;
  friend bool operator==(const LineMetric& a, const LineMetric& b) {
    return a.kind_ == b.kind_ && a.param_ == b.param_;
  }

 private:
  LineMetric(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_;
  double param_;
};

/// Tensor combination sum_i e_i * metric_i on O(sum e_i); exponents may be negative.
class HermitianMetric {
 public:
  HermitianMetric() = default;
  static HermitianMetric power(const LineMetric& m, int exponent = 1);

  const std::vector<std::pair<LineMetric, int>>& terms() const { return terms_; }
  int degree() const;
  bool has_nonnegative_exponents() const;

  double phi0(double r) const;
  double phi_inf(double u) const;

  HermitianMetric& operator+=(const HermitianMetric& o);
  friend HermitianMetric operator+(HermitianMetric a, const HermitianMetric& b) { return a += b; }
  friend HermitianMetric operator-(HermitianMetric a, const HermitianMetric& b) { return a += b.scaled(-1); }
  HermitianMetric scaled(int n) const;

  std::string label() const;

 private:
  void add(const LineMetric& m, int e);
  std::vector<std::pair<LineMetric, int>> terms_;
};

/// Probability measure c_1(metric) / degree for a metric with nonnegative exponents.
class CurvatureMeasure {
 public:
  static CurvatureMeasure of(const HermitianMetric& m);
  static CurvatureMeasure of(const LineMetric& m) { return of(HermitianMetric::power(m)); }

  double mass0(double r) const;
  double mass_inf(double u) const;
  double density0(double r) const;
  const HermitianMetric& metric() const { return metric_; }

 private:
  HermitianMetric metric_;
};

struct QuadratureOptions {
  double tolerance = 1e-13;  // relative change between node doublings
  int min_nodes = 32;
  int max_nodes = 8192;  // budget per radial integral
};

struct QuadratureCertificate {
  int nodes = 0;
  double error_estimate = 0.0;
};

/// Gauss-Legendre nodes and weights on [0, 1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre01(int n);

/// Total mass of the measure by the same radial quadrature (should be 1).
double total_mass(const CurvatureMeasure& mu, const QuadratureOptions& opts = {});

/// R(m) = integral of |z|^(2m) e^(-phi) dmu for the weight of degree D, m = 0..D + extra.
/// Entry m is the Gram inner product of monomials z^k, z^l with k + l = 2m in the weight's degree.
struct RadialMoments {
  std::vector<double> values;
  QuadratureCertificate certificate;
};
RadialMoments radial_moments(const HermitianMetric& weight, const CurvatureMeasure& mu,
                             const QuadratureOptions& opts = {});

struct GramData {
  Eigen::MatrixXd gram;
  int degree = 0;
  QuadratureCertificate certificate;
  bool diagonal = false;  // rotation invariant: only diagonal entries are nonzero
};

/// Gram matrix of the monomial basis of O(weight.degree()).
GramData l2_gram(const HermitianMetric& weight, const CurvatureMeasure& mu, const QuadratureOptions& opts = {});
/// Closed form for the c-family metric on O(N) against its own measure:
/// diag c^-k k! (N-k)! / (N+1)!.
GramData l2_gram_closed_form(double c, int n);
/// Gram of ||t||_s^2 = integral |s|^2 |t|^2 dmu for t in O(weight.degree()),
/// s a section of the metric s_metric.
GramData twisted_gram(const std::vector<double>& s, const HermitianMetric& s_metric, const HermitianMetric& weight,
                      const CurvatureMeasure& mu, const QuadratureOptions& opts = {});

/// log det via equilibrated Cholesky; NotPositiveDefinite on failure.
double log_det(const GramData& g);

/// Pointwise norm |s(z)| e^(-phi/2), chart selected by |z|.
double pointwise_norm(const std::vector<double>& s, const HermitianMetric& metric, std::complex<double> z);
double pointwise_norm_at_infinity(const std::vector<double>& s, const HermitianMetric& metric);
/// sup over P^1 of the pointwise norm (polar grids in both charts, then local refinement).
double sup_norm(const std::vector<double>& s, const HermitianMetric& metric);

struct DistortionGrid {
  int radial = 64;   // per chart
  int angular = 1;   // 1 is enough for diagonal Grams
  bool refine = true;
};

struct DistortionPoint {
  bool chart_inf = false;
  std::complex<double> coord;  // z in chart 0, w in chart infinity
  double value = 0.0;
};

struct DistortionProfile {
  std::vector<DistortionPoint> points;
  double sup = 0.0;
  double inf = 0.0;
  double condition = 0.0;  // of the equilibrated Gram
};

/// Evaluator of b(z) = e^(-phi) v^* G^-1 v for a Gram.
class DistortionEvaluator {
 public:
  DistortionEvaluator(const GramData& g, const HermitianMetric& weight, double max_condition = 1e12);
  /// b at a point given in chart coordinates.
  double operator()(bool chart_inf, std::complex<double> coord) const;
  /// Same through the eigendecomposition (independent orthonormal basis).
  double via_eigenbasis(bool chart_inf, std::complex<double> coord) const;
  double condition() const { return condition_; }

 private:
  Eigen::VectorXd scaled_vector_real(bool chart_inf, std::complex<double> coord, Eigen::VectorXd& imag) const;
  HermitianMetric weight_;
  int degree_;
  Eigen::VectorXd log_scale_;  // -1/2 log G_kk
  Eigen::MatrixXd chol_l_;
  Eigen::MatrixXd eig_vectors_;
  Eigen::VectorXd eig_values_;
  double condition_ = 0.0;
};

DistortionProfile distortion(const GramData& g, const HermitianMetric& weight, const DistortionGrid& grid = {});

struct DifferenceReport {
  DistortionProfile profile;
  int degree = 0;         // N a - j b
  int full_dimension = 0;  // N a + 1
  double ratio = 0.0;     // sup b / (N a + 1)
};
/// Distortion of O(N a - j b) with weight N phi_L - j phi_M against mu_L.
DifferenceReport distortion_difference(int n, int j, const HermitianMetric& l, const HermitianMetric& m,
                                       const DistortionGrid& grid = {}, const QuadratureOptions& opts = {});

/// integral of log ||s|| against mu (Jensen's formula on circles, tanh-sinh in the radius).
double log_norm_integral(const std::vector<double>& s, const HermitianMetric& metric, const CurvatureMeasure& mu);

struct VolumeComparison {
  double lhs = 0.0;          // 1/2 (log det G_s - log det G_L2) = log(vol B_L2 / vol B_s)
  double log_integral = 0.0;  // integral of log ||s|| dmu_L
  int dimension = 0;         // dim Gamma(N L)
  double comparator = 0.0;   // dimension * log_integral
};
/// Sections of N L - j M; s a section of M with sup norm <= 1 (else NotEffective).
VolumeComparison volume_comparison(int n, int j, const std::vector<double>& s, const HermitianMetric& l,
                                   const HermitianMetric& m, const QuadratureOptions& opts = {});

/// max over random sections of Gamma(k L + j M) of ||s||_sup / ||s||_L2 (L^2 against mu_L).
double gromov_ratio(int k, int j, const HermitianMetric& l, const HermitianMetric& m, int trials, std::uint64_t seed,
                    const QuadratureOptions& opts = {});

/// -log ||x1||_B(0:1) + integral of (-log ||x0||_A) c_1(B), both O(1) metrics.
double mixed_arithmetic_intersection(const LineMetric& a, const LineMetric& b);
/// Bilinear extension to tensor combinations.
double mixed_arithmetic_intersection(const HermitianMetric& a, const HermitianMetric& b);
double arithmetic_self_intersection_c(double c);

struct ChiRow {
  int n = 0;
  double chi = 0.0;
  double normalized = 0.0;  // chi / (N^2 / 2), NaN at N = 0
};
/// chi of the monomial lattice of O(N) with the L^2 norm of N * metric against its measure.
std::vector<ChiRow> chi_l2_series(const LineMetric& metric, const std::vector<int>& ns,
                                  const QuadratureOptions& opts = {});

struct SiuRow {
  int n = 0;
  double chi = 0.0;
  double per_n2 = 0.0;  // chi / N^2
};
struct SiuReport {
  std::vector<SiuRow> rows;
  double l_squared = 0.0;
  double l_dot_m = 0.0;
  double coefficient = 0.0;       // (L^2 - 2 L.M) / 2
  double measured_last = 0.0;     // chi / N^2 at the largest N
  double measured_liminf = 0.0;   // min of chi / N^2 over the upper half of the range
};
/// chi_L2 of O(N (deg L - deg M)) with weight N (phi_L - phi_M) against mu_L.
SiuReport siu_growth_experiment(const HermitianMetric& l, const HermitianMetric& m, const std::vector<int>& ns,
                                const QuadratureOptions& opts = {});

LineMetric line_metric_from_json(const nlohmann::json& j);
HermitianMetric metric_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HermitianMetric& m);

}  // namespace arakelov::bergman
