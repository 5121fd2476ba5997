#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "smdiff/poly.hpp"
#include "smdiff/synthesis.hpp"

namespace smdiff {

/// All m+1 continuous roots equal to `value` (must be negative).
struct RepeatedRoot {
  double value = -1.5;
};
/// Roots of Q(b) built from lambda and L.
struct FromCharPoly {};
struct ExplicitRoots {
  RootSet roots;
};
using RootSpec = std::variant<FromCharPoly, RepeatedRoot, ExplicitRoots>;

std::string describe(const RootSpec& spec);

enum class Variant { Matching, StandardEuler, FilteringEuler };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct DifferentiatorParams {
  int n = 0;    // highest derivative estimated
  int n_f = 1;  // filtering order; 0 only for the standard differentiator
  double tau = 0.01;
  std::vector<double> lambda;        // lambda_0 .. lambda_m
  std::optional<double> lipschitz;   // L
  RootSpec roots = FromCharPoly{};

  int order() const { return n + n_f; }
  int dim() const { return n + n_f + 1; }
};

/// Checks the parameter invariants required by `variant`; throws Config or
/// InvalidOrder errors with a field name in the message.
void validate(const DifferentiatorParams& params, Variant variant);

/// Continuous roots b_j for the matching differentiator.
RootSet resolve_roots(const DifferentiatorParams& params);

SynthesisCache precompute(const DifferentiatorParams& params);

struct FilterState {
  Eigen::VectorXd w;  // w_1 .. w_{n_f}
  Eigen::VectorXd z;  // z_0 .. z_n
  long long k = 0;
  double t0 = 0.0;
  double t = 0.0;
};

struct Estimate {
  Eigen::VectorXd derivatives;  // estimates of f, f', ..., f^{(n)}
};

struct StepOutput {
  FilterState state;
  Estimate estimate;
  double gamma_norm = 0.0;  // ||Gamma_k||_2 for the matching variant, 0 otherwise
};

/// Any state entry above this magnitude is reported as NonFinite.
inline constexpr double kDivergenceThreshold = 1e12;

/// w = 0, z_0 = first sample, higher derivatives zero.
FilterState init(const DifferentiatorParams& params, double f0_sample, double t0 = 0.0);

StepOutput step_matching(const FilterState& state, double f_k, const SynthesisCache& cache,
                         const RootSet& b);
StepOutput step_standard_euler(const FilterState& state, double f_k,
                               const DifferentiatorParams& params);
StepOutput step_filtering_euler(const FilterState& state, double f_k,
                                const DifferentiatorParams& params);

/// |x|^gamma sign(x) with sign(0) = 0.
double signed_power(double x, double gamma);

/// Streaming front end over the three variants.
class Differentiator {
 public:
  Differentiator(DifferentiatorParams params, Variant variant);

  void reset(double f0_sample, double t0 = 0.0);
  void reset(FilterState state);
  /// Consumes f(t_k) and advances to k+1.
  const Estimate& update(double f_k);

  const FilterState& state() const { return state_; }
  const Estimate& estimate() const { return estimate_; }
  double last_gamma_norm() const { return gamma_norm_; }
  const DifferentiatorParams& params() const { return params_; }
  Variant variant() const { return variant_; }
  const std::optional<SynthesisCache>& cache() const { return cache_; }
  const RootSet& roots() const { return roots_; }

 private:
  DifferentiatorParams params_;
  Variant variant_;
  std::optional<SynthesisCache> cache_;
  RootSet roots_;
  FilterState state_;
  Estimate estimate_;
  double gamma_norm_ = 0.0;
};

}  // namespace smdiff
