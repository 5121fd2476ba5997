#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "smdiff/differentiators.hpp"

namespace smdiff {

// ---------------------------------------------------------------------------
// Signals

struct PolynomialSignal {
  std::vector<double> coeffs;  // ascending powers of t
};
/// f(t) = t cos(t/2).
struct TCosHalfSignal {};
/// f(t) = sin t + cos 2t + sin 3t + cos 4t.
struct HarmonicMixSignal {};
struct Sinusoid {
  double amplitude = 1.0;
  double frequency = 1.0;  // rad/s
  double phase = 0.0;      // rad; term is a sin(w t + phase)
};
struct CustomSignal {
  std::vector<Sinusoid> sinusoids;
  std::vector<double> polynomial;
};
using SignalModel = std::variant<PolynomialSignal, TCosHalfSignal, HarmonicMixSignal, CustomSignal>;

inline constexpr int kMaxTruthOrder = 8;

/// Exact f(t), f'(t), ..., f^{(up_to)}(t).
std::vector<double> truth(const SignalModel& signal, double t, int up_to);

// ---------------------------------------------------------------------------
// Noise

/// a cos(w t).
struct SinusoidNoise {
  double amplitude = 1.0;
  double frequency = 1.0;
};
struct GaussianNoise {
  double sigma = 1.0;
  std::uint64_t seed = 1;
};
using NoiseTerm = std::variant<SinusoidNoise, GaussianNoise>;

/// Sum of terms; an empty list is the noise-free case.
struct NoiseModel {
  std::vector<NoiseTerm> terms;
};

/// Portable normal generator: std::mt19937_64 words, 53-bit uniforms and the
/// Box-Muller transform (cosine sample first, then the cached sine sample).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform_open();  // (0, 1]
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Stateful sampler; call sample() once per step in step order.
class NoiseSource {
 public:
  explicit NoiseSource(const NoiseModel& model);
  double sample(double t);

 private:
  NoiseModel model_;
  std::vector<GaussianSource> gaussians_;
};

// ---------------------------------------------------------------------------
// Runs

struct StepRecord {
  long long k = 0;
  double t = 0.0;
  double f = 0.0;             // input sample f(t_k) including noise
  Eigen::VectorXd z;          // estimates
  Eigen::VectorXd x;          // true derivatives (empty when unknown)
  Eigen::VectorXd sigma;      // z - x
  Eigen::VectorXd w;          // filter states
  double gamma_norm = 0.0;
};

struct RunConfig {
  DifferentiatorParams params;
  SignalModel signal = TCosHalfSignal{};
  NoiseModel noise;
  double t0 = 0.0;
  double t_end = 1.0;
  Variant variant = Variant::Matching;
  int record_stride = 1;
  /// Optional initial error (w, sigma) of length m+1 replacing the default
  /// first-sample initialisation.
  std::optional<std::vector<double>> initial_error;
};

inline constexpr long long kMaxSteps = 100'000'000;

long long step_count(const RunConfig& config);
void validate(const RunConfig& config);

/// Steps the selected differentiator over [t0, t_end]. Record k holds the
/// state at t_k and the input f(t_k) that is consumed from that state.
/// Throws Diverged (with the step index) if the state blows up.
std::vector<StepRecord> run(const RunConfig& config);

/// sim1 validity horizon for L = 2.
inline constexpr double kSim1Horizon = 31.54619;
inline constexpr std::uint64_t kDefaultSim2Seed = 20200711;

struct PresetOverrides {
  std::optional<double> tau;
  std::optional<double> t_end;
  std::optional<RootSpec> roots;
  std::optional<std::uint64_t> seed;
  std::optional<Variant> variant;
  std::optional<int> record_stride;
};

/// "sim1" or "sim2"; throws UnknownPreset otherwise.
RunConfig preset(std::string_view name, const PresetOverrides& overrides = {});

/// sim1 gain sequence lambda_0..lambda_5.
std::vector<double> sim1_gains();

/// Replaces every Gaussian seed in the noise model.
void set_noise_seed(NoiseModel& noise, std::uint64_t seed);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Header row followed by one line per record. `comment`, when non-empty, is
/// written first as a single '#'-prefixed line.
void write_trace_csv(std::ostream& os, const std::vector<StepRecord>& records, int n, int n_f,
                     std::string_view comment = {});

}  // namespace smdiff
