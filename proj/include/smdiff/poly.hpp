#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace smdiff {

using Complex = std::complex<double>;

/// Real-coefficient polynomial stored in ascending degree order:
/// coeffs()[j] multiplies x^j.
class RealPolynomial {
 public:
  RealPolynomial() = default;
  explicit RealPolynomial(std::vector<double> coeffs);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](int j) const { return coeffs_[static_cast<std::size_t>(j)]; }
  bool is_monic() const { return !coeffs_.empty() && coeffs_.back() == 1.0; }

  double operator()(double x) const;
  Complex operator()(Complex x) const;
  RealPolynomial derivative() const;

 private:
  std::vector<double> coeffs_;
};

/// Multiset of complex roots. Conjugate closure is checked by the operations
/// that need it, not on construction.
class RootSet {
 public:
  RootSet() = default;
  explicit RootSet(std::vector<Complex> roots) : roots_(std::move(roots)) {}

  static RootSet repeated(Complex root, int count);

  std::size_t size() const { return roots_.size(); }
  bool empty() const { return roots_.empty(); }
  const Complex& operator[](std::size_t i) const { return roots_[i]; }
  std::span<const Complex> roots() const { return roots_; }
  auto begin() const { return roots_.begin(); }
  auto end() const { return roots_.end(); }

  bool is_conjugate_closed() const;
  /// True when every root is real and all roots are equal.
  bool is_repeated_real() const;
  double max_real_part() const;

 private:
  std::vector<Complex> roots_;
};

/// Pairing tolerance |r - conj(s)| < kPairTolerance * (1 + |r|).
inline constexpr double kPairTolerance = 1e-9;

/// Monic polynomial with the given roots. Throws NotConjugateClosed when the
/// roots cannot be paired into conjugates.
RealPolynomial coeffs_from_roots(const RootSet& roots);

/// All roots of a polynomial via balanced companion-matrix eigenvalues and a
/// Newton polish. Output is conjugate-closed and sorted by real part.
RootSet roots_from_coeffs(const RealPolynomial& p);

/// Q(b) = b^{m+1} + sum_j lambda_j L^{(m+1-j)/(m+1)} b^j.
RealPolynomial build_char_poly_q(std::span<const double> lambda, double lipschitz, int m);

/// sum_j coeffs[j] * powers[j]; powers[j] must hold M^j for one square M.
Eigen::MatrixXd eval_poly_at_matrix(const RealPolynomial& p,
                                    std::span<const Eigen::MatrixXd> powers);

/// Greedy nearest-neighbour matching; returns max_i |a_i - b_match(i)| / max(|a_i|, floor).
double max_matched_error(const RootSet& a, const RootSet& b, double floor = 0.0);

}  // namespace smdiff
