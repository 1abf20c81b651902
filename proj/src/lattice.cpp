#include "arakelov/lattice.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <string>

namespace arakelov::lattice {

namespace {

void require_square_symmetric(const RationalMatrix& g) {
  if (g.rows() != g.cols()) throw Error(ErrorKind::InvalidArgument, "gram must be square");
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (g(i, j) != g(j, i)) throw Error(ErrorKind::InvalidArgument, "gram must be symmetric");
}

// q(x) = sum_i d[i] * (x_i + sum_{j>i} u(i,j) x_j)^2, exact.
struct Decomposition {
  std::vector<Rational> d;
  RationalMatrix u;
};

Decomposition decompose(const RationalMatrix& q) {
  const std::size_t r = q.rows();
  Decomposition out{std::vector<Rational>(r), RationalMatrix(r, r)};
  for (std::size_t i = 0; i < r; ++i) {
    Rational di = q(i, i);
    for (std::size_t k = 0; k < i; ++k) di -= out.d[k] * out.u(k, i) * out.u(k, i);
    if (di <= 0) throw Error(ErrorKind::NotPositiveDefinite, "gram is not positive definite");
    out.d[i] = di;
    out.u(i, i) = 1;
    for (std::size_t j = i + 1; j < r; ++j) {
      Rational s = q(i, j);
      for (std::size_t k = 0; k < i; ++k) s -= out.d[k] * out.u(k, i) * out.u(k, j);
      out.u(i, j) = s / di;
    }
  }
  return out;
}

Rational quadratic_form(const RationalMatrix& q, const std::vector<long long>& x) {
  Rational acc = 0;
  const std::size_t r = q.rows();
  for (std::size_t i = 0; i < r; ++i) {
    if (x[i] == 0) continue;
    Rational row = 0;
    for (std::size_t j = 0; j < r; ++j)
      if (x[j] != 0) row += q(i, j) * x[j];
    acc += row * x[i];
  }
  return acc;
}

class Enumerator {
 public:
  Enumerator(const RationalMatrix& q, bool strict, std::uint64_t cap) : q_(q), strict_(strict), cap_(cap) {
    auto dec = decompose(q);
    r_ = q.rows();
    d_.resize(r_);
    u_.assign(r_ * r_, 0.0L);
    for (std::size_t i = 0; i < r_; ++i) {
      d_[i] = dec.d[i].convert_to<long double>();
      for (std::size_t j = i + 1; j < r_; ++j) u_[i * r_ + j] = dec.u(i, j).convert_to<long double>();
    }
  }

  std::size_t rank() const { return r_; }

  // Range of the top coordinate.
  std::pair<long long, long long> top_range() const {
    long double rho = std::sqrt((1.0L + kSlack) / d_[r_ - 1]);
    return {static_cast<long long>(std::ceil(-rho - kSlack)), static_cast<long long>(std::floor(rho + kSlack))};
  }

  std::uint64_t count_with_top(long long top) const {
    std::vector<long long> x(r_, 0);
    x[r_ - 1] = top;
    long double partial = d_[r_ - 1] * static_cast<long double>(top) * static_cast<long double>(top);
    if (partial > 1.0L + kSlack) return 0;
    std::uint64_t count = 0;
    descend(static_cast<long>(r_) - 2, partial, x, count);
    return count;
  }

 private:
  static constexpr long double kSlack = 1e-9L;
  static constexpr long double kExactBand = 1e-7L;

  void descend(long level, long double partial, std::vector<long long>& x, std::uint64_t& count) const {
    if (level < 0) {
      if (accept(partial, x)) {
        if (++count > cap_) throw Error(ErrorKind::InvalidArgument, "enumeration exceeds point cap");
      }
      return;
    }
    const auto i = static_cast<std::size_t>(level);
    long double center = 0;
    for (std::size_t j = i + 1; j < r_; ++j) center -= u_[i * r_ + j] * static_cast<long double>(x[j]);
    long double rem = (1.0L + kSlack - partial) / d_[i];
    if (rem < 0) return;
    long double rho = std::sqrt(rem);
    auto lo = static_cast<long long>(std::ceil(center - rho - kSlack));
    auto hi = static_cast<long long>(std::floor(center + rho + kSlack));
    for (long long v = lo; v <= hi; ++v) {
      long double t = static_cast<long double>(v) - center;
      long double next = partial + d_[i] * t * t;
      if (next > 1.0L + kSlack) continue;
      x[i] = v;
      descend(level - 1, next, x, count);
    }
    x[i] = 0;
  }

  bool accept(long double value, const std::vector<long long>& x) const {
    if (value < 1.0L - kExactBand) return true;
    if (value > 1.0L + kExactBand) return false;
    Rational exact = quadratic_form(q_, x);
    return strict_ ? exact < 1 : exact <= 1;
  }

  const RationalMatrix& q_;
  bool strict_;
  std::uint64_t cap_;
  std::size_t r_ = 0;
  std::vector<long double> d_;
  std::vector<long double> u_;
};

void ext_gcd(const BigInt& a, const BigInt& b, BigInt& g, BigInt& s, BigInt& t) {
  BigInt old_r = a, r = b, old_s = 1, s1 = 0, old_t = 0, t1 = 1;
  while (r != 0) {
    BigInt q = old_r / r;
    BigInt tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s1;
    old_s = s1;
    s1 = tmp;
    tmp = old_t - q * t1;
    old_t = t1;
    t1 = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  g = old_r;
  s = old_s;
  t = old_t;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
  return q;
}

}  // namespace

NormedLattice NormedLattice::make(RationalMatrix gram, BigInt torsion) {
  require_square_symmetric(gram);
  if (torsion < 1) throw Error(ErrorKind::InvalidArgument, "torsion order must be >= 1");
  decompose(gram);
  return NormedLattice(std::move(gram), std::move(torsion));
}

NormedLattice NormedLattice::identity(int rank) {
  return make(RationalMatrix::identity(static_cast<std::size_t>(rank)), 1);
}

Rational NormedLattice::norm2(const std::vector<BigInt>& v) const {
  if (v.size() != gram_.rows()) throw Error(ErrorKind::InvalidArgument, "vector length does not match rank");
  Rational acc = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) acc += gram_(i, j) * v[i] * v[j];
  return acc;
}

NormedLattice NormedLattice::scaled(const Rational& alpha2) const {
  if (alpha2 <= 0) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  RationalMatrix g = gram_;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) /= alpha2;
  return NormedLattice(std::move(g), torsion_);
}

SublatticeEmbedding SublatticeEmbedding::make(NormedLattice ambient, IntMatrix basis) {
  if (basis.rows() != static_cast<std::size_t>(ambient.rank()))
    throw Error(ErrorKind::InvalidArgument, "basis rows must equal ambient rank");
  if (unimodular_reduce(basis).rank != static_cast<int>(basis.cols()))
    throw Error(ErrorKind::InvalidArgument, "sublattice basis must have full column rank");
  return SublatticeEmbedding{std::move(ambient), std::move(basis)};
}

double log_unit_ball_volume(int r) {
  if (r < 0) throw Error(ErrorKind::InvalidArgument, "rank must be nonnegative");
  const double h = 0.5 * r;
  return h * std::log(std::numbers::pi) - std::lgamma(h + 1.0);
}

double unit_ball_volume(int r) { return std::exp(log_unit_ball_volume(r)); }

Rational covolume_invariant(const NormedLattice& m) {
  Rational t(m.torsion());
  return determinant(m.gram()) / (t * t);
}

double chi(const NormedLattice& m) {
  return log_unit_ball_volume(m.rank()) - 0.5 * log_abs(covolume_invariant(m));
}

double chi_from_log_det(int rank, double log_det, double log_torsion) {
  return log_unit_ball_volume(rank) - 0.5 * log_det + log_torsion;
}

std::uint64_t count_ellipsoid_points(const RationalMatrix& q, bool strict, const EnumerationOptions& opts) {
  require_square_symmetric(q);
  if (static_cast<int>(q.rows()) > opts.rank_cap)
    throw Error(ErrorKind::RankTooLarge, "rank " + std::to_string(q.rows()) + " exceeds enumeration cap");
  if (q.rows() == 0) return 1;
  Enumerator e(q, strict, opts.count_cap);
  auto [lo, hi] = e.top_range();
  if (opts.threads <= 1 || hi - lo < 2) {
    std::uint64_t total = 0;
    for (long long v = lo; v <= hi; ++v) total += e.count_with_top(v);
    return total;
  }
  std::vector<std::future<std::uint64_t>> parts;
  const long long span = hi - lo + 1;
  const long long chunks = std::min<long long>(opts.threads, span);
  for (long long c = 0; c < chunks; ++c) {
    long long a = lo + span * c / chunks, b = lo + span * (c + 1) / chunks;
    parts.push_back(std::async(std::launch::async, [&e, a, b] {
      std::uint64_t s = 0;
      for (long long v = a; v < b; ++v) s += e.count_with_top(v);
      return s;
    }));
  }
  std::uint64_t total = 0;
  for (auto& p : parts) total += p.get();
  return total;
}

BigInt h0_count(const NormedLattice& m, const EnumerationOptions& opts) {
  return BigInt(count_ellipsoid_points(m.gram(), true, opts)) * m.torsion();
}

BigInt h1_count(const NormedLattice& m, const EnumerationOptions& opts) {
  if (m.rank() == 0) return 1;
  if (m.rank() > opts.rank_cap) throw Error(ErrorKind::RankTooLarge, "rank exceeds enumeration cap");
  return BigInt(count_ellipsoid_points(inverse(m.gram()), false, opts));
}

double h0(const NormedLattice& m, const EnumerationOptions& opts) { return log_abs(h0_count(m, opts)); }
double h1(const NormedLattice& m, const EnumerationOptions& opts) { return log_abs(h1_count(m, opts)); }

double riemann_roch_defect(const NormedLattice& m, const EnumerationOptions& opts) {
  return h0(m, opts) - h1(m, opts) - chi(m);
}

UnimodularReduction unimodular_reduce(const IntMatrix& input) {
  const std::size_t rows = input.rows(), cols = input.cols();
  UnimodularReduction out{input, IntMatrix::identity(rows), IntMatrix::identity(rows), 0};
  IntMatrix& a = out.reduced;
  IntMatrix& t = out.transform;
  IntMatrix& ti = out.inverse_transform;

  auto row_combine = [&](std::size_t p, std::size_t k, const BigInt& s, const BigInt& tt, const BigInt& ag,
                         const BigInt& bg) {
    // rows (p, k) <- [[s, tt], [-bg, ag]] * rows (p, k); determinant 1
    for (IntMatrix* m : {&a, &t}) {
      for (std::size_t j = 0; j < m->cols(); ++j) {
        BigInt x = (*m)(p, j), y = (*m)(k, j);
        (*m)(p, j) = s * x + tt * y;
        (*m)(k, j) = -bg * x + ag * y;
      }
    }
    for (std::size_t i = 0; i < rows; ++i) {
      BigInt x = ti(i, p), y = ti(i, k);
      ti(i, p) = x * ag + y * bg;
      ti(i, k) = -tt * x + s * y;
    }
  };

  std::size_t p = 0;
  for (std::size_t c = 0; c < cols && p < rows; ++c) {
    for (std::size_t k = p + 1; k < rows; ++k) {
      if (a(k, c) == 0) continue;
      BigInt g, s, tt;
      ext_gcd(a(p, c), a(k, c), g, s, tt);
      BigInt ag = a(p, c) / g, bg = a(k, c) / g;
      row_combine(p, k, s, tt, ag, bg);
    }
    if (a(p, c) == 0) continue;
    if (a(p, c) < 0) {
      for (IntMatrix* m : {&a, &t})
        for (std::size_t j = 0; j < m->cols(); ++j) (*m)(p, j) = -(*m)(p, j);
      for (std::size_t i = 0; i < rows; ++i) ti(i, p) = -ti(i, p);
    }
    for (std::size_t i = 0; i < p; ++i) {
      BigInt q = floor_div(a(i, c), a(p, c));
      if (q == 0) continue;
      for (IntMatrix* m : {&a, &t})
        for (std::size_t j = 0; j < m->cols(); ++j) (*m)(i, j) -= q * (*m)(p, j);
      for (std::size_t k = 0; k < rows; ++k) ti(k, p) += q * ti(k, i);
    }
    ++p;
  }
  out.rank = static_cast<int>(p);
  return out;
}

namespace {

BigInt pivot_product(const UnimodularReduction& red, std::size_t cols) {
  BigInt prod = 1;
  for (std::size_t i = 0; i < cols; ++i) prod *= red.reduced(i, i);
  return prod;
}

IntMatrix column_block(const IntMatrix& m, std::size_t from, std::size_t to) {
  IntMatrix out(m.rows(), to - from);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = from; j < to; ++j) out(i, j - from) = m(i, j);
  return out;
}

}  // namespace

IntMatrix saturate(const IntMatrix& basis) {
  auto red = unimodular_reduce(basis);
  if (red.rank != static_cast<int>(basis.cols()))
    throw Error(ErrorKind::InvalidArgument, "basis must have full column rank");
  return column_block(red.inverse_transform, 0, basis.cols());
}

bool is_saturated(const IntMatrix& basis) {
  auto red = unimodular_reduce(basis);
  if (red.rank != static_cast<int>(basis.cols())) return false;
  return abs(pivot_product(red, basis.cols())) == 1;
}

SubQuotient induced_sub_quotient(const NormedLattice& m, const SublatticeEmbedding& s) {
  const std::size_t r = static_cast<std::size_t>(m.rank());
  if (s.basis.rows() != r) throw Error(ErrorKind::InvalidArgument, "basis rows must equal ambient rank");
  const std::size_t rs = s.basis.cols();
  auto red = unimodular_reduce(s.basis);
  if (red.rank != static_cast<int>(rs)) throw Error(ErrorKind::InvalidArgument, "basis must have full column rank");
  if (abs(pivot_product(red, rs)) != 1) throw Error(ErrorKind::NotSaturated, "sublattice is not saturated");

  const RationalMatrix& g = m.gram();
  RationalMatrix b = to_rational(s.basis);
  IntMatrix lift = column_block(red.inverse_transform, rs, r);
  RationalMatrix c = to_rational(lift);

  RationalMatrix gb = g * b;
  RationalMatrix sub_gram = b.transpose() * gb;
  RationalMatrix quot(r - rs, r - rs);
  if (r > rs) {
    RationalMatrix gc = g * c;
    RationalMatrix ctgc = c.transpose() * gc;
    if (rs == 0) {
      quot = ctgc;
    } else {
      RationalMatrix cross = c.transpose() * gb;  // C^T G B
      quot = ctgc;
      RationalMatrix corr = cross * inverse(sub_gram) * cross.transpose();
      for (std::size_t i = 0; i < quot.rows(); ++i)
        for (std::size_t j = 0; j < quot.cols(); ++j) quot(i, j) -= corr(i, j);
    }
  }
  return SubQuotient{NormedLattice::make(std::move(sub_gram), 1), NormedLattice::make(std::move(quot), m.torsion()),
                     std::move(lift)};
}

GeneratorBound generator_bound_check(const NormedLattice& m, const Rational& c,
                                     const std::vector<std::vector<BigInt>>& generators) {
  if (c <= 0) throw Error(ErrorKind::InvalidArgument, "c must be positive");
  const std::size_t r = static_cast<std::size_t>(m.rank());
  IntMatrix rowsm(generators.size(), r);
  for (std::size_t i = 0; i < generators.size(); ++i) {
    if (generators[i].size() != r) throw Error(ErrorKind::InvalidArgument, "generator length does not match rank");
    if (m.norm2(generators[i]) > c * c)
      throw Error(ErrorKind::InvalidArgument, "generator " + std::to_string(i) + " has norm above c");
    for (std::size_t j = 0; j < r; ++j) rowsm(i, j) = generators[i][j];
  }
  auto red = unimodular_reduce(rowsm);
  if (red.rank != static_cast<int>(r) || pivot_product(red, r) != 1)
    throw Error(ErrorKind::GeneratorsDoNotSpan, "generators do not span the free part");
  double bound = log_unit_ball_volume(m.rank()) - static_cast<double>(r) * log_abs(c);
  double slack = chi(m) - bound;
  // slack is mathematically >= 0; tolerate rounding at equality
  return GeneratorBound{slack >= -1e-12, slack};
}

nlohmann::json to_json(const NormedLattice& m) {
  nlohmann::json gram = nlohmann::json::array();
  for (std::size_t i = 0; i < m.gram().rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.gram().cols(); ++j) row.push_back(to_string(m.gram()(i, j)));
    gram.push_back(std::move(row));
  }
  nlohmann::json tor;
  if (m.torsion() <= BigInt(std::numeric_limits<std::int64_t>::max()))
    tor = m.torsion().convert_to<std::int64_t>();
  else
    tor = m.torsion().str();
  return {{"rank", m.rank()}, {"gram", std::move(gram)}, {"torsion", std::move(tor)}};
}

NormedLattice lattice_from_json(const nlohmann::json& j) {
  try {
    const auto& rows = j.at("gram");
    const std::size_t r = rows.size();
    if (j.contains("rank") && j.at("rank").get<std::size_t>() != r)
      throw Error(ErrorKind::InvalidArgument, "rank does not match gram size");
    RationalMatrix g(r, r);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != r) throw Error(ErrorKind::InvalidArgument, "gram must be square");
      for (std::size_t k = 0; k < r; ++k) {
        const auto& e = rows[i][k];
        g(i, k) = e.is_string() ? parse_rational(e.get<std::string>()) : parse_rational(e.dump());
      }
    }
    BigInt tor = 1;
    if (j.contains("torsion")) {
      const auto& t = j.at("torsion");
      tor = t.is_string() ? BigInt(t.get<std::string>()) : BigInt(t.get<std::int64_t>());
    }
    return NormedLattice::make(std::move(g), std::move(tor));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed lattice JSON: ") + e.what());
  }
}

}  // namespace arakelov::lattice
