#include "smdiff/harness.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "smdiff/error.hpp"

namespace smdiff {

namespace {

// j-th derivative of a sin(w t + phi) (or a cos(...) when `cosine`), given
// s = sin(w t + phi) and c = cos(w t + phi).
double harmonic_derivative(double amplitude, double omega, double s, double c, int j, bool cosine) {
  const int idx = (j + (cosine ? 1 : 0)) % 4;
  const double base = idx == 0 ? s : idx == 1 ? c : idx == 2 ? -s : -c;
  return amplitude * std::pow(omega, j) * base;
}

void add_polynomial(const std::vector<double>& coeffs, double t, std::vector<double>& out) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > j;) {
      double falling = 1.0;
      for (std::size_t q = 0; q < j; ++q) falling *= static_cast<double>(i - q);
      acc = acc * t + coeffs[i] * falling;
    }
    out[j] += acc;
  }
}

}  // namespace

std::vector<double> truth(const SignalModel& signal, double t, int up_to) {
  if (up_to < 0 || up_to > kMaxTruthOrder) {
    throw Error(ErrorCode::InvalidArgument, "truth order must be in [0, 8]");
  }
  std::vector<double> out(static_cast<std::size_t>(up_to + 1), 0.0);
  struct Visitor {
    double t;
    std::vector<double>& out;
    void operator()(const PolynomialSignal& p) const { add_polynomial(p.coeffs, t, out); }
    void operator()(const TCosHalfSignal&) const {
      // (t g)^{(j)} = t g^{(j)} + j g^{(j-1)}, g = cos(t/2).
      const double s = std::sin(0.5 * t);
      const double c = std::cos(0.5 * t);
      for (std::size_t j = 0; j < out.size(); ++j) {
        const int jj = static_cast<int>(j);
        out[j] += t * harmonic_derivative(1.0, 0.5, s, c, jj, true);
        if (jj > 0) out[j] += jj * harmonic_derivative(1.0, 0.5, s, c, jj - 1, true);
      }
    }
    void operator()(const HarmonicMixSignal&) const {
      const double s1 = std::sin(t), c1 = std::cos(t);
      const double s2 = std::sin(2.0 * t), c2 = std::cos(2.0 * t);
      const double s3 = std::sin(3.0 * t), c3 = std::cos(3.0 * t);
      const double s4 = std::sin(4.0 * t), c4 = std::cos(4.0 * t);
      for (std::size_t j = 0; j < out.size(); ++j) {
        const int jj = static_cast<int>(j);
        out[j] += harmonic_derivative(1.0, 1.0, s1, c1, jj, false) +
                  harmonic_derivative(1.0, 2.0, s2, c2, jj, true) +
                  harmonic_derivative(1.0, 3.0, s3, c3, jj, false) +
                  harmonic_derivative(1.0, 4.0, s4, c4, jj, true);
      }
    }
    void operator()(const CustomSignal& cs) const {
      add_polynomial(cs.polynomial, t, out);
      for (const Sinusoid& s : cs.sinusoids) {
        const double arg = s.frequency * t + s.phase;
        const double sn = std::sin(arg);
        const double cn = std::cos(arg);
        for (std::size_t j = 0; j < out.size(); ++j) {
          out[j] += harmonic_derivative(s.amplitude, s.frequency, sn, cn, static_cast<int>(j), false);
        }
      }
    }
  };
  std::visit(Visitor{t, out}, signal);
  return out;
}

double GaussianSource::uniform_open() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double GaussianSource::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

NoiseSource::NoiseSource(const NoiseModel& model) : model_(model) {
  for (const NoiseTerm& term : model_.terms) {
    if (const auto* g = std::get_if<GaussianNoise>(&term)) gaussians_.emplace_back(g->seed);
  }
}

double NoiseSource::sample(double t) {
  double total = 0.0;
  std::size_t gaussian = 0;
  for (const NoiseTerm& term : model_.terms) {
    if (const auto* s = std::get_if<SinusoidNoise>(&term)) {
      total += s->amplitude * std::cos(s->frequency * t);
    } else {
      total += std::get<GaussianNoise>(term).sigma * gaussians_[gaussian++].next();
    }
  }
  return total;
}

void set_noise_seed(NoiseModel& noise, std::uint64_t seed) {
  for (NoiseTerm& term : noise.terms) {
    if (auto* g = std::get_if<GaussianNoise>(&term)) g->seed = seed;
  }
}

long long step_count(const RunConfig& config) {
  return std::llround((config.t_end - config.t0) / config.params.tau);
}

void validate(const RunConfig& config) {
  validate(config.params, config.variant);
  if (!std::isfinite(config.t0) || !std::isfinite(config.t_end) || !(config.t_end > config.t0)) {
    throw Error(ErrorCode::Config, "t_end: must be greater than t0");
  }
  if ((config.t_end - config.t0) / config.params.tau > static_cast<double>(kMaxSteps)) {
    throw Error(ErrorCode::Config, "tau: run exceeds the step budget");
  }
  if (config.record_stride < 1) throw Error(ErrorCode::Config, "record_stride: must be >= 1");
  if (config.params.n > kMaxTruthOrder) throw Error(ErrorCode::Config, "n: at most 8 supported");
  if (config.initial_error &&
      config.initial_error->size() != static_cast<std::size_t>(config.params.dim())) {
    throw Error(ErrorCode::Config, "initial_error: expected " +
                                       std::to_string(config.params.dim()) + " entries");
  }
  for (const NoiseTerm& term : config.noise.terms) {
    if (const auto* g = std::get_if<GaussianNoise>(&term); g && !(g->sigma >= 0.0)) {
      throw Error(ErrorCode::Config, "noise.sigma: must be non-negative");
    }
  }
}

std::vector<StepRecord> run(const RunConfig& config) {
  validate(config);
  const DifferentiatorParams& p = config.params;
  Differentiator diff(p, config.variant);
  NoiseSource noise(config.noise);
  const long long steps = step_count(config);
  const int n = p.n;

  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(steps / config.record_stride + 1));

  for (long long k = 0; k <= steps; ++k) {
    const double t = config.t0 + static_cast<double>(k) * p.tau;
    const std::vector<double> x = truth(config.signal, t, n);
    const double f = x[0] + noise.sample(t);

    if (k == 0) {
      if (config.initial_error) {
        const auto& err = *config.initial_error;
        FilterState s = init(p, f, config.t0);
        for (int i = 0; i < p.n_f; ++i) s.w(i) = err[static_cast<std::size_t>(i)];
        for (int j = 0; j <= n; ++j) s.z(j) = x[static_cast<std::size_t>(j)] + err[static_cast<std::size_t>(p.n_f + j)];
        diff.reset(std::move(s));
      } else {
        diff.reset(f, config.t0);
      }
    }

    const FilterState current = diff.state();
    try {
      diff.update(f);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      throw Error(ErrorCode::Diverged, "step " + std::to_string(k) + ": " + e.what());
    }

    if (k % config.record_stride == 0) {
      StepRecord r;
      r.k = k;
      r.t = t;
      r.f = f;
      r.z = current.z;
      r.x = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
      r.sigma = r.z - r.x;
      r.w = current.w;
      r.gamma_norm = diff.last_gamma_norm();
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::vector<double> sim1_gains() { return {1.1, 6.75, 20.26, 32.24, 23.72, 7.0}; }

RunConfig preset(std::string_view name, const PresetOverrides& overrides) {
  RunConfig c;
  c.params.n = 3;
  c.params.n_f = 2;
  c.params.lambda = sim1_gains();
  c.params.roots = FromCharPoly{};
  c.variant = Variant::Matching;
  if (name == "sim1") {
    c.params.tau = 0.01;
    c.params.lipschitz = 2.0;
    c.signal = TCosHalfSignal{};
    c.t0 = 0.0;
    c.t_end = 30.0;
    c.record_stride = 1;
  } else if (name == "sim2") {
    c.params.tau = 1e-4;
    c.params.lipschitz = 320.0;
    c.signal = HarmonicMixSignal{};
    c.noise.terms = {SinusoidNoise{1.0, 10000.0}, GaussianNoise{1.0, kDefaultSim2Seed}};
    c.t0 = 0.0;
    c.t_end = 10.0;
    c.record_stride = 10;
  } else {
    throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
  }

  if (overrides.tau) c.params.tau = *overrides.tau;
  if (overrides.t_end) c.t_end = *overrides.t_end;
  if (overrides.roots) c.params.roots = *overrides.roots;
  if (overrides.seed) set_noise_seed(c.noise, *overrides.seed);
  if (overrides.variant) c.variant = *overrides.variant;
  if (overrides.record_stride) c.record_stride = *overrides.record_stride;

  if (name == "sim1" && !(c.t_end < kSim1Horizon)) {
    throw Error(ErrorCode::Config, "t_end: sim1 is limited to t < 31.54619 s where |f''''| <= L = 2");
  }
  return c;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const std::vector<StepRecord>& records, int n, int n_f,
                     std::string_view comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "k,t,f";
  for (int j = 0; j <= n; ++j) os << ",z" << j;
  for (int j = 0; j <= n; ++j) os << ",x" << j;
  for (int j = 0; j <= n; ++j) os << ",sigma" << j;
  for (int j = 1; j <= n_f; ++j) os << ",w" << j;
  os << ",gamma_norm\n";

  auto put = [&os](double v) { os << ',' << format_double(v); };
  for (const StepRecord& r : records) {
    os << r.k << ',' << format_double(r.t) << ',' << format_double(r.f);
    for (Eigen::Index j = 0; j < r.z.size(); ++j) put(r.z(j));
    for (int j = 0; j <= n; ++j) {
      if (r.x.size() > j) put(r.x(j)); else os << ',';
    }
    for (int j = 0; j <= n; ++j) {
      if (r.sigma.size() > j) put(r.sigma(j)); else os << ',';
    }
    for (Eigen::Index j = 0; j < r.w.size(); ++j) put(r.w(j));
    put(r.gamma_norm);
    os << '\n';
  }
}

}  // namespace smdiff
