#include "smdiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smdiff/error.hpp"

namespace smdiff {

namespace {

void require_square(const Eigen::MatrixXd& M, const char* name) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must be square");
}

double eigen_spectral_radius(const Eigen::MatrixXd& E) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(E, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "eigenvalues of E");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// C(k, i) as a double.
double binomial(int k, int i) {
  double b = 1.0;
  for (int q = 1; q <= i; ++q) b = b * (k - i + q) / q;
  return b;
}

}  // namespace

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& E, const Eigen::MatrixXd& Q,
                                        const LyapunovOptions& options) {
  require_square(E, "E");
  require_square(Q, "Q");
  if (E.rows() != Q.rows()) throw Error(ErrorCode::DimensionMismatch, "E and Q sizes differ");
  if (!E.allFinite() || !Q.allFinite()) throw Error(ErrorCode::NonFinite, "E or Q has non-finite entries");

  const double rho = options.spectral_radius ? *options.spectral_radius : eigen_spectral_radius(E);
  if (!(rho < 1.0 - 1e-9)) {
    throw Error(ErrorCode::Unstable, "spectral radius " + std::to_string(rho) + " is not below 1");
  }

  const Eigen::MatrixXd Et = E.transpose();
  Eigen::MatrixXd P = Q;
  for (long it = 0; it < options.max_iterations; ++it) {
    Eigen::MatrixXd next = Et * P * E + Q;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) throw Error(ErrorCode::Unstable, "Lyapunov iteration diverged");
    const double change = (next - P).norm();
    const double scale = next.norm();
    P = std::move(next);
    if (change <= options.rel_tol * scale) return P;
  }
  throw Error(ErrorCode::ConvergenceFailure, "Lyapunov iteration hit the iteration cap");
}

double lyapunov_residual(const Eigen::MatrixXd& E, const Eigen::MatrixXd& P,
                         const Eigen::MatrixXd& Q) {
  return (E.transpose() * P * E - P + Q).norm();
}

double normalized_lyapunov_residual(const Eigen::MatrixXd& E, const Eigen::MatrixXd& P,
                                    const Eigen::MatrixXd& Q) {
  const double scale = Q.norm() + E.squaredNorm() * P.norm();
  return lyapunov_residual(E, P, Q) / scale;
}

double theorem1_bound(const Eigen::MatrixXd& E, const Eigen::MatrixXd& P,
                      const Eigen::MatrixXd& Q) {
  require_square(Q, "Q");
  const double q_min = min_eigenvalue_sym(Q);
  if (!(q_min > 1.0)) {
    throw Error(ErrorCode::InvalidQ, "lambda_min(Q) = " + std::to_string(q_min) + " must exceed 1");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(E);
  const double e_max = svd.singularValues()(0);
  return std::sqrt((e_max + max_eigenvalue_sym(P)) / (q_min - 1.0));
}

RemainderBound remainder_bound(double lipschitz, double tau, int n) {
  if (!(lipschitz > 0.0) || !(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "L and tau must be positive");
  if (n < 0) throw Error(ErrorCode::InvalidOrder, "n must be non-negative");
  RemainderBound out;
  out.h_bound.resize(n + 1);
  out.factorial.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    const int p = n + 1 - j;
    double fact = 1.0;
    for (int q = 2; q <= p; ++q) fact *= q;
    const double base = lipschitz * std::pow(tau, p);
    out.h_bound(j) = base / p;
    out.factorial(j) = base / fact;
  }
  return out;
}

double state_error_norm(const StepRecord& r) {
  return std::sqrt(r.w.squaredNorm() + r.sigma.squaredNorm());
}

ErrorMetrics error_metrics(const std::vector<StepRecord>& records, double settle_fraction) {
  if (!(settle_fraction > 0.0 && settle_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "settle_fraction must lie in (0, 1)");
  }
  if (records.empty()) throw Error(ErrorCode::NoTruth, "no records");
  const Eigen::Index width = records.front().z.size();
  for (const StepRecord& r : records) {
    if (r.x.size() != width || r.sigma.size() != width) throw Error(ErrorCode::NoTruth, "records lack ground truth");
  }

  const std::size_t count = records.size();
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(settle_fraction * static_cast<double>(count))));
  const std::size_t start = count - std::min(tail, count);

  ErrorMetrics m;
  m.tail_start_step = records[start].k;
  m.tail_records = count - start;
  m.tail_sup.assign(static_cast<std::size_t>(width), 0.0);
  for (std::size_t i = start; i < count; ++i) {
    for (Eigen::Index j = 0; j < width; ++j) {
      m.tail_sup[static_cast<std::size_t>(j)] = std::max(m.tail_sup[static_cast<std::size_t>(j)], std::abs(records[i].sigma(j)));
    }
    m.tail_sup_state_norm = std::max(m.tail_sup_state_norm, state_error_norm(records[i]));
  }

  // Last index violating the 5% band, walking backwards.
  auto settle = [&](auto value, double sup) -> long long {
    const double band = 1.05 * sup;
    for (std::size_t i = count; i-- > 0;) {
      if (value(records[i]) > band) return i + 1 < count ? records[i + 1].k : records[i].k;
    }
    return records.front().k;
  };
  for (Eigen::Index j = 0; j < width; ++j) {
    const long long s = settle([j](const StepRecord& r) { return std::abs(r.sigma(j)); },
                               m.tail_sup[static_cast<std::size_t>(j)]);
    m.settling_steps.push_back(s);
    m.settling_step = std::max(m.settling_step, s);
  }
  m.settling_step_state_norm = settle(state_error_norm, m.tail_sup_state_norm);
  m.settling_step = std::max(m.settling_step, m.settling_step_state_norm);
  return m;
}

Eigen::MatrixXd closed_loop_matrix(const PsiMatrix& psi, const Eigen::VectorXd& gamma) {
  if (gamma.size() != psi.dim()) throw Error(ErrorCode::DimensionMismatch, "gamma size");
  Eigen::MatrixXd E = psi.entries;
  E.col(0) += gamma;
  return E;
}

RealPolynomial closed_loop_charpoly_shifted(const PsiMatrix& psi, const Eigen::VectorXd& gamma) {
  const int dim = psi.dim();
  if (gamma.size() != dim) throw Error(ErrorCode::DimensionMismatch, "gamma size");
  const int m = dim - 1;
  const Eigen::MatrixXd N = psi.entries - Eigen::MatrixXd::Identity(dim, dim);
  std::vector<double> c(static_cast<std::size_t>(dim + 1), 0.0);
  c[static_cast<std::size_t>(dim)] = 1.0;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Unit(dim, 0);
  for (int k = 0; k <= m; ++k) {
    c[static_cast<std::size_t>(m - k)] = -row.dot(gamma);
    row = row * N;
  }
  return RealPolynomial(std::move(c));
}

RealPolynomial closed_loop_charpoly(const PsiMatrix& psi, const Eigen::VectorXd& gamma) {
  const RealPolynomial q = closed_loop_charpoly_shifted(psi, gamma);
  const int deg = q.degree();
  std::vector<double> p(static_cast<std::size_t>(deg + 1), 0.0);
  // q(r - 1) = sum_k q_k sum_i C(k, i) r^i (-1)^{k-i}.
  for (int k = 0; k <= deg; ++k) {
    for (int i = 0; i <= k; ++i) {
      const double sign = ((k - i) % 2 == 0) ? 1.0 : -1.0;
      p[static_cast<std::size_t>(i)] += q[k] * binomial(k, i) * sign;
    }
  }
  p.back() = 1.0;
  return RealPolynomial(std::move(p));
}

RootSet closed_loop_spectrum(const PsiMatrix& psi, const Eigen::VectorXd& gamma) {
  const RootSet shifted = roots_from_coeffs(closed_loop_charpoly_shifted(psi, gamma));
  std::vector<Complex> r;
  r.reserve(shifted.size());
  for (Complex x : shifted) r.push_back(x + 1.0);
  return RootSet(std::move(r));
}

double pole_placement_residual(const PsiMatrix& psi, const Eigen::VectorXd& gamma,
                               const RootSet& d) {
  if (d.size() != static_cast<std::size_t>(psi.dim())) throw Error(ErrorCode::DimensionMismatch, "root count");
  const RealPolynomial q = closed_loop_charpoly_shifted(psi, gamma);
  const int m = psi.order();
  double worst = 0.0;
  for (Complex dj : d) {
    const double value = std::abs(q(dj - 1.0));
    worst = std::max(worst, value / std::pow(1.0 + std::abs(dj), m + 1));
  }
  return worst;
}

double annihilation_residual(const PsiMatrix& psi, const Eigen::VectorXd& gamma,
                             const RootSet& d) {
  const int dim = psi.dim();
  if (gamma.size() != dim) throw Error(ErrorCode::DimensionMismatch, "gamma size");
  if (d.size() != static_cast<std::size_t>(dim)) throw Error(ErrorCode::DimensionMismatch, "root count");
  Eigen::MatrixXd A = build_psi(psi.n, psi.n_f, 1.0).entries;
  double s = 1.0;
  for (int i = 0; i < dim; ++i) {
    A(i, 0) += gamma(i) * s;
    s *= psi.tau;
  }
  const RealPolynomial alpha = coeffs_from_roots(d);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(dim, dim);
  double scale = 0.0;
  const double a_norm = A.norm();
  for (int j = 0; j <= alpha.degree(); ++j) {
    acc += alpha[j] * power;
    scale += std::abs(alpha[j]) * std::pow(a_norm, j);
    power = power * A;
  }
  return acc.norm() / scale;
}

LyapunovCertificate certify_frozen(const SynthesisCache& cache, const RootSet& b, double w1) {
  const int m = cache.order();
  const RootSet shifted = matching_map_shifted(b, w1, cache.tau, m);
  const Eigen::VectorXd g = gamma_from_shifted(shifted, cache);

  LyapunovCertificate c;
  c.w1 = w1;
  const Eigen::MatrixXd E = closed_loop_matrix(cache.psi, g);
  double rho = 0.0;
  for (Complex r : closed_loop_spectrum(cache.psi, g)) rho = std::max(rho, std::abs(r));
  c.spectral_radius = rho;
  c.Q = 2.0 * Eigen::MatrixXd::Identity(cache.dim(), cache.dim());
  LyapunovOptions opts;
  opts.spectral_radius = rho;
  c.P = solve_discrete_lyapunov(E, c.Q, opts);
  c.K = theorem1_bound(E, c.P, c.Q);
  c.residual = normalized_lyapunov_residual(E, c.P, c.Q);
  return c;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
    throw Error(ErrorCode::InvalidArgument, "grid needs 0 < lo <= hi and at least one point");
  }
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    grid.push_back(lo);
    return grid;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    grid.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::vector<LyapunovCertificate> certify_grid(const SynthesisCache& cache, const RootSet& b,
                                              const std::vector<double>& w1_grid) {
  std::vector<LyapunovCertificate> out;
  out.reserve(w1_grid.size());
  for (double w1 : w1_grid) out.push_back(certify_frozen(cache, b, w1));
  return out;
}

Theorem1Check theorem1_check(const std::vector<StepRecord>& records,
                             const DifferentiatorParams& params, const ErrorMetrics& metrics,
                             const GridSpec& grid) {
  if (!params.lipschitz) throw Error(ErrorCode::Config, "L: required for the remainder bound");
  Theorem1Check check;
  check.settling_step = metrics.settling_step;
  check.h_norm = remainder_bound(*params.lipschitz, params.tau, params.n).h_bound.norm();

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const StepRecord& r : records) {
    if (r.k < metrics.settling_step) continue;
    check.observed_max = std::max(check.observed_max, state_error_norm(r));
    const double a = std::abs(r.w(0));
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (hi == 0.0 && !std::isfinite(lo)) lo = 0.0;
  check.w1_min = lo;
  check.w1_max = hi;

  std::vector<double> w1s{lo};
  if (hi != lo) w1s.push_back(hi);
  for (double w : log_grid(grid.w1_min, grid.w1_max, grid.points)) {
    if (w > lo && w < hi) w1s.push_back(w);
  }
  std::sort(w1s.begin(), w1s.end());

  const SynthesisCache cache = precompute(params);
  const RootSet b = resolve_roots(params);
  for (double w : w1s) check.k_max = std::max(check.k_max, certify_frozen(cache, b, w).K);
  check.certified_w1 = std::move(w1s);
  check.bound = check.k_max * check.h_norm;
  check.holds = check.observed_max <= check.bound;
  return check;
}

}  // namespace smdiff
