#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "smdiff/differentiators.hpp"
#include "smdiff/harness.hpp"
#include "smdiff/poly.hpp"
#include "smdiff/synthesis.hpp"

namespace smdiff {

// ---------------------------------------------------------------------------
// Lyapunov

struct LyapunovOptions {
  double rel_tol = 1e-12;
  long max_iterations = 1'000'000;
  /// When set, used instead of an eigenvalue solve for the stability
  /// precheck. Callers that know the spectrum accurately should pass it.
  std::optional<double> spectral_radius;
};

/// P with E^T P E - P + Q = 0 by the fixed-point iteration P <- E^T P E + Q.
/// Throws Unstable if the spectral radius is >= 1 - 1e-9 or the iteration
/// blows up, ConvergenceFailure if the iteration cap is hit.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& E, const Eigen::MatrixXd& Q,
                                        const LyapunovOptions& options = {});

/// ||E^T P E - P + Q||_F.
double lyapunov_residual(const Eigen::MatrixXd& E, const Eigen::MatrixXd& P,
                         const Eigen::MatrixXd& Q);
/// Residual divided by ||Q||_F + ||E||_F^2 ||P||_F, the size of the terms
/// being cancelled. Meaningful when P is many orders above Q.
double normalized_lyapunov_residual(const Eigen::MatrixXd& E, const Eigen::MatrixXd& P,
                                    const Eigen::MatrixXd& Q);

/// K = sqrt((sigma_max(E) + lambda_max(P)) / (lambda_min(Q) - 1)).
/// Throws InvalidQ when lambda_min(Q) <= 1.
double theorem1_bound(const Eigen::MatrixXd& E, const Eigen::MatrixXd& P,
                      const Eigen::MatrixXd& Q);

// ---------------------------------------------------------------------------
// Taylor remainder

struct RemainderBound {
  Eigen::VectorXd h_bound;    // L tau^{n+1-j} / (n+1-j)
  Eigen::VectorXd factorial;  // L tau^{n+1-j} / (n+1-j)!
};

RemainderBound remainder_bound(double lipschitz, double tau, int n);

// ---------------------------------------------------------------------------
// Error metrics

struct ErrorMetrics {
  std::vector<double> tail_sup;            // per derivative j
  std::vector<long long> settling_steps;   // per derivative j
  double tail_sup_state_norm = 0.0;        // ||(w, sigma)||_2
  long long settling_step_state_norm = 0;
  long long settling_step = 0;             // max over all of the above
  long long tail_start_step = 0;
  std::size_t tail_records = 0;
};

/// Sup errors over the last `settle_fraction` of the records. A settling step
/// is the first k from which the value never exceeds 1.05x its tail sup.
/// Throws NoTruth when records lack ground truth.
ErrorMetrics error_metrics(const std::vector<StepRecord>& records, double settle_fraction);

double state_error_norm(const StepRecord& record);

// ---------------------------------------------------------------------------
// Closed loop

/// Psi + Gamma e_1^T.
Eigen::MatrixXd closed_loop_matrix(const PsiMatrix& psi, const Eigen::VectorXd& gamma);

/// Characteristic polynomial of Psi + Gamma e_1^T in the variable x = r - 1,
/// from the determinant lemma:
///   chi(1 + x) = x^{m+1} - sum_k (e_1^T N^k Gamma) x^{m-k},  N = Psi - I.
RealPolynomial closed_loop_charpoly_shifted(const PsiMatrix& psi, const Eigen::VectorXd& gamma);

/// Characteristic polynomial in r (Taylor shift of the above).
RealPolynomial closed_loop_charpoly(const PsiMatrix& psi, const Eigen::VectorXd& gamma);

/// Eigenvalues of Psi + Gamma e_1^T.
RootSet closed_loop_spectrum(const PsiMatrix& psi, const Eigen::VectorXd& gamma);

/// max_j |chi(d_j)| / (1 + |d_j|)^{m+1}.
double pole_placement_residual(const PsiMatrix& psi, const Eigen::VectorXd& gamma,
                               const RootSet& d);

/// ||P_d(A)||_F / sum_j |alpha_j| ||A||_F^j with A = Psi(1) + T Gamma e_1^T,
/// the closed loop in unit-step coordinates (T = diag(tau^i)).
double annihilation_residual(const PsiMatrix& psi, const Eigen::VectorXd& gamma,
                             const RootSet& d);

// ---------------------------------------------------------------------------
// Certificates

struct LyapunovCertificate {
  double w1 = 0.0;
  double spectral_radius = 0.0;
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  double K = 0.0;
  double residual = 0.0;  // normalized, see normalized_lyapunov_residual
};

/// Freezes w1, builds E = Psi + Gamma(w1) e_1^T and certifies it with Q = 2I.
LyapunovCertificate certify_frozen(const SynthesisCache& cache, const RootSet& b, double w1);

/// 10^linspace(log10 lo, log10 hi, points).
std::vector<double> log_grid(double lo, double hi, int points);

/// Serial reference over a w1 grid; the first failure is rethrown.
std::vector<LyapunovCertificate> certify_grid(const SynthesisCache& cache, const RootSet& b,
                                              const std::vector<double>& w1_grid);

struct GridSpec {
  double w1_min = 1e-4;
  double w1_max = 1e2;
  int points = 13;
};

struct Theorem1Check {
  double k_max = 0.0;
  double h_norm = 0.0;
  double bound = 0.0;
  double observed_max = 0.0;   // max ||(w, sigma)|| from the settling step on
  long long settling_step = 0;
  double w1_min = 0.0;         // observed |w1| range after settling
  double w1_max = 0.0;
  std::vector<double> certified_w1;
  bool holds = false;
};

/// K_max over the grid points inside the observed |w1| range after settling,
/// plus both range endpoints, against the non-factorial remainder bound.
Theorem1Check theorem1_check(const std::vector<StepRecord>& records,
                             const DifferentiatorParams& params, const ErrorMetrics& metrics,
                             const GridSpec& grid = {});

}  // namespace smdiff
