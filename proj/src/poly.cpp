#include "smdiff/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "smdiff/error.hpp"

namespace smdiff {

namespace {

double pair_tolerance(Complex r) { return kPairTolerance * (1.0 + std::abs(r)); }

struct Paired {
  std::vector<double> real;
  std::vector<Complex> upper;  // one representative per conjugate pair, imag > 0
};

Paired pair_conjugates(std::span<const Complex> roots) {
  Paired out;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    const Complex r = roots[i];
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
      throw Error(ErrorCode::InvalidArgument, "non-finite root");
    }
    used[i] = true;
    if (2.0 * std::abs(r.imag()) < pair_tolerance(r)) {
      out.real.push_back(r.real());
      continue;
    }
    std::size_t best = roots.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(r - std::conj(roots[j]));
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best == roots.size() || best_dist >= pair_tolerance(r)) {
      throw Error(ErrorCode::NotConjugateClosed,
                  "root (" + std::to_string(r.real()) + ", " + std::to_string(r.imag()) +
                      ") has no conjugate partner");
    }
    used[best] = true;
    Complex mid = 0.5 * (r + std::conj(roots[best]));
    if (mid.imag() < 0.0) mid = std::conj(mid);
    out.upper.push_back(mid);
  }
  return out;
}

// Parlett-Reinsch style balancing with power-of-two scalings.
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index size = a.rows();
  constexpr double kGamma = 0.95;
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (Eigen::Index i = 0; i < size; ++i) {
      const double col = a.col(i).lpNorm<1>() - std::abs(a(i, i));
      const double row = a.row(i).lpNorm<1>() - std::abs(a(i, i));
      if (col == 0.0 || row == 0.0) continue;
      int exponent = 0;
      std::frexp(row / col, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double scaled_col = std::ldexp(col, exponent);
      const double scaled_row = std::ldexp(row, -exponent);
      if (scaled_col + scaled_row < kGamma * (col + row)) {
        a.col(i) *= std::ldexp(1.0, exponent);
        a.row(i) *= std::ldexp(1.0, -exponent);
        changed = true;
      }
    }
  }
}

double residual_measure(const RealPolynomial& p, Complex r) {
  return std::abs(p(r)) / (1.0 + std::pow(std::abs(r), p.degree()));
}

constexpr double kPolishTolerance = 1e-9;
constexpr int kPolishIterations = 60;

// Newton iteration that only accepts steps which shrink |p|.
Complex polish(const RealPolynomial& p, const RealPolynomial& dp, Complex r) {
  Complex value = p(r);
  for (int it = 0; it < kPolishIterations; ++it) {
    const Complex slope = dp(r);
    if (slope == Complex(0.0, 0.0)) break;
    const Complex step = value / slope;
    const Complex candidate = r - step;
    const Complex candidate_value = p(candidate);
    if (!(std::abs(candidate_value) < std::abs(value))) break;
    r = candidate;
    value = candidate_value;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(r)) break;
  }
  return r;
}

}  // namespace

RealPolynomial::RealPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw Error(ErrorCode::InvalidArgument, "polynomial needs coefficients");
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
  }
}

double RealPolynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex RealPolynomial::operator()(Complex x) const {
  Complex acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

RealPolynomial RealPolynomial::derivative() const {
  if (coeffs_.size() == 1) return RealPolynomial({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t j = 1; j < coeffs_.size(); ++j) d[j - 1] = static_cast<double>(j) * coeffs_[j];
  return RealPolynomial(std::move(d));
}

RootSet RootSet::repeated(Complex root, int count) {
  return RootSet(std::vector<Complex>(static_cast<std::size_t>(std::max(count, 0)), root));
}

bool RootSet::is_conjugate_closed() const {
  try {
    pair_conjugates(roots_);
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool RootSet::is_repeated_real() const {
  if (roots_.empty()) return false;
  const Complex first = roots_.front();
  if (first.imag() != 0.0) return false;
  return std::all_of(roots_.begin(), roots_.end(), [&](Complex r) { return r == first; });
}

double RootSet::max_real_part() const {
  double best = -std::numeric_limits<double>::infinity();
  for (Complex r : roots_) best = std::max(best, r.real());
  return best;
}

RealPolynomial coeffs_from_roots(const RootSet& roots) {
  const Paired paired = pair_conjugates(roots.roots());

  // Complex product over the symmetrised multiset; the imaginary residue is
  // then pure rounding and is checked before being dropped.
  std::vector<Complex> acc{Complex(1.0, 0.0)};
  auto multiply = [&acc](Complex r) {
    acc.push_back(Complex(0.0, 0.0));
    for (std::size_t j = acc.size() - 1; j > 0; --j) acc[j] = acc[j - 1] - r * acc[j];
    acc[0] = -r * acc[0];
  };
  for (double r : paired.real) multiply(Complex(r, 0.0));
  for (Complex r : paired.upper) {
    multiply(r);
    multiply(std::conj(r));
  }

  double scale = 0.0;
  for (const Complex& c : acc) scale = std::max(scale, std::abs(c));
  std::vector<double> coeffs(acc.size());
  for (std::size_t j = 0; j < acc.size(); ++j) {
    if (std::abs(acc[j].imag()) > 1e-12 * scale) {
      throw Error(ErrorCode::NotConjugateClosed, "imaginary residue in coefficient " +
                                                     std::to_string(j));
    }
    coeffs[j] = acc[j].real();
  }
  coeffs.back() = 1.0;
  return RealPolynomial(std::move(coeffs));
}

RootSet roots_from_coeffs(const RealPolynomial& p) {
  if (p.degree() < 1) throw Error(ErrorCode::InvalidArgument, "degree must be at least 1");
  const double lead = p.coeffs().back();
  if (lead == 0.0) throw Error(ErrorCode::InvalidArgument, "leading coefficient is zero");

  std::vector<double> c = p.coeffs();
  for (double& v : c) v /= lead;
  const RealPolynomial monic(c);

  std::vector<Complex> roots;
  // Exact zero roots are split off so the companion matrix stays nonsingular.
  std::size_t zeros = 0;
  while (zeros + 1 < c.size() && c[zeros] == 0.0) ++zeros;
  roots.assign(zeros, Complex(0.0, 0.0));
  std::vector<double> reduced(c.begin() + static_cast<std::ptrdiff_t>(zeros), c.end());
  const int degree = static_cast<int>(reduced.size()) - 1;

  if (degree == 1) {
    roots.emplace_back(-reduced[0], 0.0);
  } else if (degree > 1) {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -reduced[static_cast<std::size_t>(i)];
    balance(companion);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::ConvergenceFailure, "companion eigenvalue iteration failed");
    }
    const RealPolynomial reduced_poly(reduced);
    const RealPolynomial slope = reduced_poly.derivative();
    const Eigen::VectorXcd eig = solver.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
      const Complex r = eig(i);
      if (r.imag() < 0.0) continue;  // filled from its conjugate partner
      const Complex polished = polish(reduced_poly, slope, r);
      if (r.imag() == 0.0) {
        roots.emplace_back(polished.real(), 0.0);
      } else {
        const Complex upper(polished.real(), std::abs(polished.imag()));
        roots.push_back(upper);
        roots.push_back(std::conj(upper));
      }
    }
  }

  for (Complex r : roots) {
    if (!(residual_measure(monic, r) < kPolishTolerance)) {
      throw Error(ErrorCode::ConvergenceFailure, "root polish did not reach tolerance");
    }
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() > b.imag();
  });
  return RootSet(std::move(roots));
}

RealPolynomial build_char_poly_q(std::span<const double> lambda, double lipschitz, int m) {
  if (m < 0) throw Error(ErrorCode::InvalidOrder, "m must be non-negative");
  if (lambda.size() != static_cast<std::size_t>(m + 1)) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(m + 1) +
                                                  " gains, got " + std::to_string(lambda.size()));
  }
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw Error(ErrorCode::InvalidArgument, "L must be positive");
  }
  std::vector<double> coeffs(static_cast<std::size_t>(m + 2));
  const double order = m + 1;
  for (int j = 0; j <= m; ++j) {
    const double lam = lambda[static_cast<std::size_t>(j)];
    if (!(lam > 0.0) || !std::isfinite(lam)) {
      throw Error(ErrorCode::InvalidArgument, "gains must be positive");
    }
    coeffs[static_cast<std::size_t>(j)] = lam * std::pow(lipschitz, (order - j) / order);
  }
  coeffs.back() = 1.0;
  return RealPolynomial(std::move(coeffs));
}

Eigen::MatrixXd eval_poly_at_matrix(const RealPolynomial& p,
                                    std::span<const Eigen::MatrixXd> powers) {
  if (powers.size() < p.coeffs().size()) {
    throw Error(ErrorCode::DimensionMismatch, "not enough matrix powers for the degree");
  }
  const Eigen::Index size = powers.front().rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t j = 0; j < p.coeffs().size(); ++j) {
    if (powers[j].rows() != size || powers[j].cols() != size) {
      throw Error(ErrorCode::DimensionMismatch, "ragged matrix powers");
    }
    out += p.coeffs()[j] * powers[j];
  }
  return out;
}

double max_matched_error(const RootSet& a, const RootSet& b, double floor) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "root sets differ in size");
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (Complex r : a) {
    std::size_t best = b.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(r - b[j]);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    used[best] = true;
    double denom = std::max(std::abs(r), floor);
    if (denom == 0.0) denom = 1.0;
    worst = std::max(worst, best_dist / denom);
  }
  return worst;
}

}  // namespace smdiff
