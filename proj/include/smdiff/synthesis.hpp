#pragma once

#include <vector>

#include <Eigen/Dense>

#include "smdiff/poly.hpp"

namespace smdiff {

/// Discrete transition matrix of the filtering differentiator, state order
/// (w_1..w_{n_f}, z_0..z_n). Entry (i, j) is tau^{j-i} times a tau-free
/// constant, so Psi(tau) = T^{-1} Psi(1) T with T = diag(tau^i).
struct PsiMatrix {
  Eigen::MatrixXd entries;
  int n = 0;
  int n_f = 0;
  double tau = 0.0;

  int order() const { return n + n_f; }
  int dim() const { return n + n_f + 1; }
};

PsiMatrix build_psi(int n, int n_f, double tau);

/// S with row j = e_1^T Psi^j, j = 0..m. The factorisation is held for the
/// unit-step matrix S(1); S(tau) = S(1) T.
class ObservabilityMatrix {
 public:
  explicit ObservabilityMatrix(const PsiMatrix& psi);

  const Eigen::MatrixXd& matrix() const { return s_; }
  /// x with S x = rhs.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// S^{-1} e_{m+1}.
  Eigen::VectorXd solve_last_unit() const;

 private:
  Eigen::MatrixXd s_;
  Eigen::FullPivLU<Eigen::MatrixXd> unit_lu_;
  Eigen::VectorXd inv_scale_;  // tau^{-i}
};

ObservabilityMatrix build_observability(const PsiMatrix& psi);

/// Everything tau-dependent that the online gain evaluation needs.
struct SynthesisCache {
  int n = 0;
  int n_f = 0;
  double tau = 0.0;
  PsiMatrix psi;
  std::vector<Eigen::MatrixXd> psi_powers;    // Psi^0 .. Psi^{m+1}
  Eigen::VectorXd s_inv_col;                  // S^{-1} e_{m+1}
  std::vector<Eigen::VectorXd> power_basis;   // Psi^j s_inv_col, j = 0..m+1
  std::vector<Eigen::VectorXd> shifted_basis; // (Psi - I)^k s_inv_col, k = 0..m
  std::vector<Eigen::VectorXd> unit_shifted_basis;  // same at tau = 1

  int order() const { return n + n_f; }
  int dim() const { return n + n_f + 1; }
};

SynthesisCache precompute(int n, int n_f, double tau);

inline constexpr double kDefaultW1Floor = 1e-300;

/// Matched discrete eigenvalues d_j = exp(tau |w1|^{-1/(m+1)} b_j); all zero
/// at w1 = 0. Throws UnstableRoot if any Re(b_j) >= 0.
RootSet matching_map(const RootSet& b, double w1, double tau, int m,
                     double w1_floor = kDefaultW1Floor);

/// Same map, returning d_j - 1 evaluated with expm1 so that values close to
/// the unit circle keep their relative accuracy.
RootSet matching_map_shifted(const RootSet& b, double w1, double tau, int m,
                             double w1_floor = kDefaultW1Floor);

/// Injection gain placing the spectrum of Psi + Gamma e_1^T at d.
Eigen::VectorXd gamma(const RootSet& d, const SynthesisCache& cache);

/// Gain from the shifted roots d_j - 1; the runtime path.
Eigen::VectorXd gamma_from_shifted(const RootSet& shifted, const SynthesisCache& cache);

/// Textbook Ackermann evaluation -(sum_j alpha_j Psi^j) S^{-1} e_{m+1}.
/// Kept as an independent reference; loses accuracy when all d_j are near 1.
Eigen::VectorXd gamma_ackermann(const RootSet& d, const SynthesisCache& cache);

/// Coefficients of prod_j (x - s_j) for the shifted roots s_j, with the
/// binomial fast path for a repeated real root.
RealPolynomial shifted_desired_poly(const RootSet& shifted);

}  // namespace smdiff
