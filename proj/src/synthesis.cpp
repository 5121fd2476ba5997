#include "smdiff/synthesis.hpp"

#include <cmath>
#include <string>

#include "smdiff/error.hpp"

namespace smdiff {

namespace {

void check_dims(int n, int n_f) {
  if (n < 0) throw Error(ErrorCode::InvalidOrder, "n must be non-negative");
  if (n_f < 1) throw Error(ErrorCode::InvalidOrder, "n_f must be at least 1");
}

Eigen::MatrixXd unit_psi(int n, int n_f, double tau) {
  const int dim = n + n_f + 1;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(dim, dim);
  for (int i = 0; i < n_f; ++i) psi(i, i + 1) = tau;
  for (int i = n_f; i < dim; ++i) {
    double term = 1.0;
    for (int j = i + 1; j < dim; ++j) {
      term *= tau / static_cast<double>(j - i);
      psi(i, j) = term;
    }
  }
  return psi;
}

Eigen::MatrixXd observability_rows(const Eigen::MatrixXd& psi) {
  const Eigen::Index dim = psi.rows();
  Eigen::MatrixXd s(dim, dim);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Unit(dim, 0);
  for (Eigen::Index j = 0; j < dim; ++j) {
    s.row(j) = row;
    row = row * psi;
  }
  return s;
}

// exp(z) - 1 without cancellation for small |z|.
Complex expm1(Complex z) {
  const double x = z.real();
  const double y = z.imag();
  if (y == 0.0) return {std::expm1(x), 0.0};
  const double half_sin = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * half_sin * half_sin, std::exp(x) * std::sin(y)};
}

void check_matching_inputs(const RootSet& b, double tau, int m) {
  if (b.size() != static_cast<std::size_t>(m + 1)) {
    throw Error(ErrorCode::DimensionMismatch, "need " + std::to_string(m + 1) + " roots, got " +
                                                  std::to_string(b.size()));
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  for (Complex r : b) {
    if (!(r.real() < 0.0)) {
      throw Error(ErrorCode::UnstableRoot, "root with non-negative real part " +
                                               std::to_string(r.real()));
    }
  }
}

double time_scale(double w1, int m, double w1_floor) {
  const double magnitude = std::max(std::abs(w1), w1_floor);
  return std::pow(magnitude, -1.0 / static_cast<double>(m + 1));
}

}  // namespace

PsiMatrix build_psi(int n, int n_f, double tau) {
  check_dims(n, n_f);
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidArgument, "tau must be finite and non-negative");
  }
  return PsiMatrix{unit_psi(n, n_f, tau), n, n_f, tau};
}

ObservabilityMatrix::ObservabilityMatrix(const PsiMatrix& psi)
    : s_(observability_rows(psi.entries)) {
  if (!(psi.tau > 0.0)) throw Error(ErrorCode::Singular, "S is rank-deficient at tau = 0");
  unit_lu_.compute(observability_rows(unit_psi(psi.n, psi.n_f, 1.0)));
  if (!unit_lu_.isInvertible()) throw Error(ErrorCode::Singular, "observability matrix is singular");
  inv_scale_.resize(psi.dim());
  double scale = 1.0;
  for (int i = 0; i < psi.dim(); ++i) {
    inv_scale_(i) = scale;
    scale /= psi.tau;
  }
}

Eigen::VectorXd ObservabilityMatrix::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != s_.rows()) throw Error(ErrorCode::DimensionMismatch, "rhs size");
  Eigen::VectorXd unit = unit_lu_.solve(rhs);
  return unit.cwiseProduct(inv_scale_);
}

Eigen::VectorXd ObservabilityMatrix::solve_last_unit() const {
  return solve(Eigen::VectorXd::Unit(s_.rows(), s_.rows() - 1));
}

ObservabilityMatrix build_observability(const PsiMatrix& psi) { return ObservabilityMatrix(psi); }

SynthesisCache precompute(int n, int n_f, double tau) {
  SynthesisCache cache;
  cache.n = n;
  cache.n_f = n_f;
  cache.tau = tau;
  cache.psi = build_psi(n, n_f, tau);
  const ObservabilityMatrix obs(cache.psi);
  const int dim = cache.dim();
  const int m = cache.order();

  cache.psi_powers.reserve(static_cast<std::size_t>(m + 2));
  cache.psi_powers.push_back(Eigen::MatrixXd::Identity(dim, dim));
  for (int j = 1; j <= m + 1; ++j) cache.psi_powers.push_back(cache.psi_powers.back() * cache.psi.entries);

  cache.s_inv_col = obs.solve_last_unit();
  for (int j = 0; j <= m + 1; ++j) cache.power_basis.push_back(cache.psi_powers[static_cast<std::size_t>(j)] * cache.s_inv_col);

  // The nilpotent basis is built at tau = 1 and rescaled row-wise; every
  // entry is then a single tau power times an exact-ish constant.
  const Eigen::MatrixXd unit_shift = unit_psi(n, n_f, 1.0) - Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd v = ObservabilityMatrix(build_psi(n, n_f, 1.0)).solve_last_unit();
  for (int k = 0; k <= m; ++k) {
    cache.unit_shifted_basis.push_back(v);
    Eigen::VectorXd scaled = v;
    double s = 1.0;
    for (int i = 0; i < dim; ++i) {
      scaled(i) *= s;
      s /= tau;
    }
    cache.shifted_basis.push_back(scaled);
    v = unit_shift * v;
  }
  return cache;
}

RootSet matching_map(const RootSet& b, double w1, double tau, int m, double w1_floor) {
  check_matching_inputs(b, tau, m);
  std::vector<Complex> d(b.size(), Complex(0.0, 0.0));
  if (w1 == 0.0) return RootSet(std::move(d));
  const double scale = tau * time_scale(w1, m, w1_floor);
  for (std::size_t j = 0; j < b.size(); ++j) d[j] = std::exp(scale * b[j]);
  return RootSet(std::move(d));
}

RootSet matching_map_shifted(const RootSet& b, double w1, double tau, int m, double w1_floor) {
  check_matching_inputs(b, tau, m);
  std::vector<Complex> shifted(b.size(), Complex(-1.0, 0.0));
  if (w1 == 0.0) return RootSet(std::move(shifted));
  const double scale = tau * time_scale(w1, m, w1_floor);
  for (std::size_t j = 0; j < b.size(); ++j) shifted[j] = expm1(scale * b[j]);
  return RootSet(std::move(shifted));
}

RealPolynomial shifted_desired_poly(const RootSet& shifted) {
  if (shifted.is_repeated_real()) {
    // (x - s)^{k}: binomial coefficients, no root pairing needed.
    const int degree = static_cast<int>(shifted.size());
    const double s = shifted[0].real();
    std::vector<double> coeffs(static_cast<std::size_t>(degree + 1));
    double binom = 1.0;
    for (int j = degree; j >= 0; --j) {
      coeffs[static_cast<std::size_t>(j)] = binom * std::pow(-s, degree - j);
      binom = binom * j / static_cast<double>(degree - j + 1);
    }
    return RealPolynomial(std::move(coeffs));
  }
  return coeffs_from_roots(shifted);
}

Eigen::VectorXd gamma_from_shifted(const RootSet& shifted, const SynthesisCache& cache) {
  const int m = cache.order();
  if (shifted.size() != static_cast<std::size_t>(m + 1)) {
    throw Error(ErrorCode::DimensionMismatch, "need " + std::to_string(m + 1) + " roots");
  }
  const RealPolynomial beta = shifted_desired_poly(shifted);
  // (Psi - I)^{m+1} = 0, so the leading term drops out.
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cache.dim());
  for (int k = 0; k <= m; ++k) out.noalias() -= beta[k] * cache.shifted_basis[static_cast<std::size_t>(k)];
  return out;
}

Eigen::VectorXd gamma(const RootSet& d, const SynthesisCache& cache) {
  std::vector<Complex> shifted;
  shifted.reserve(d.size());
  for (Complex r : d) shifted.push_back(r - 1.0);
  return gamma_from_shifted(RootSet(std::move(shifted)), cache);
}

Eigen::VectorXd gamma_ackermann(const RootSet& d, const SynthesisCache& cache) {
  const int m = cache.order();
  if (d.size() != static_cast<std::size_t>(m + 1)) {
    throw Error(ErrorCode::DimensionMismatch, "need " + std::to_string(m + 1) + " roots");
  }
  const RealPolynomial alpha = coeffs_from_roots(d);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cache.dim());
  for (int j = 0; j <= m + 1; ++j) out.noalias() -= alpha[j] * cache.power_basis[static_cast<std::size_t>(j)];
  return out;
}

}  // namespace smdiff
