#include "smdiff/differentiators.hpp"

#include <cmath>
#include <sstream>

#include "smdiff/error.hpp"

namespace smdiff {

namespace {

void check_finite(const FilterState& s) {
  auto bad = [](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v(i)) || std::abs(v(i)) > kDivergenceThreshold) return true;
    }
    return false;
  };
  if (bad(s.w) || bad(s.z)) {
    throw Error(ErrorCode::NonFinite, "state left the finite range at step " + std::to_string(s.k));
  }
}

FilterState advance(const FilterState& s, Eigen::VectorXd w, Eigen::VectorXd z, double tau) {
  FilterState next;
  next.w = std::move(w);
  next.z = std::move(z);
  next.k = s.k + 1;
  next.t0 = s.t0;
  next.t = s.t0 + static_cast<double>(next.k) * tau;
  check_finite(next);
  return next;
}

void require_gains(const DifferentiatorParams& p, std::size_t count) {
  if (p.lambda.size() != count) {
    throw Error(ErrorCode::Config, "lambda: expected " + std::to_string(count) + " gains, got " +
                                       std::to_string(p.lambda.size()));
  }
  for (double l : p.lambda) {
    if (!(l > 0.0) || !std::isfinite(l)) throw Error(ErrorCode::Config, "lambda: gains must be positive");
  }
  if (!p.lipschitz || !(*p.lipschitz > 0.0) || !std::isfinite(*p.lipschitz)) {
    throw Error(ErrorCode::Config, "L: a positive Lipschitz bound is required");
  }
}

}  // namespace

std::string describe(const RootSpec& spec) {
  struct Visitor {
    std::string operator()(const FromCharPoly&) const { return "from-charpoly"; }
    std::string operator()(const RepeatedRoot& r) const {
      std::ostringstream os;
      os.precision(17);
      os << "repeated:" << r.value;
      return os.str();
    }
    std::string operator()(const ExplicitRoots& e) const {
      std::ostringstream os;
      os.precision(17);
      os << "explicit:";
      for (std::size_t i = 0; i < e.roots.size(); ++i) {
        if (i) os << ',';
        os << e.roots[i].real();
        if (e.roots[i].imag() != 0.0) os << (e.roots[i].imag() > 0 ? "+" : "") << e.roots[i].imag() << 'i';
      }
      return os.str();
    }
  };
  return std::visit(Visitor{}, spec);
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Matching: return "matching";
    case Variant::StandardEuler: return "standard-euler";
    case Variant::FilteringEuler: return "filtering-euler";
  }
  return "matching";
}

Variant parse_variant(std::string_view name) {
  if (name == "matching") return Variant::Matching;
  if (name == "standard-euler") return Variant::StandardEuler;
  if (name == "filtering-euler") return Variant::FilteringEuler;
  throw Error(ErrorCode::Config, "variant: unknown value '" + std::string(name) + "'");
}

void validate(const DifferentiatorParams& p, Variant variant) {
  if (p.n < 0) throw Error(ErrorCode::InvalidOrder, "n: must be non-negative");
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) throw Error(ErrorCode::Config, "tau: must be positive");
  switch (variant) {
    case Variant::StandardEuler:
      if (p.n_f != 0) throw Error(ErrorCode::InvalidOrder, "n_f: the standard differentiator needs n_f = 0");
      require_gains(p, static_cast<std::size_t>(p.n + 1));
      break;
    case Variant::FilteringEuler:
      if (p.n_f < 1) throw Error(ErrorCode::InvalidOrder, "n_f: must be at least 1");
      require_gains(p, static_cast<std::size_t>(p.order() + 1));
      break;
    case Variant::Matching:
      if (p.n_f < 1) throw Error(ErrorCode::InvalidOrder, "n_f: must be at least 1");
      if (std::holds_alternative<FromCharPoly>(p.roots)) {
        require_gains(p, static_cast<std::size_t>(p.order() + 1));
      } else if (const auto* r = std::get_if<RepeatedRoot>(&p.roots)) {
        if (!(r->value < 0.0)) throw Error(ErrorCode::UnstableRoot, "roots: repeated root must be negative");
      } else {
        const auto& e = std::get<ExplicitRoots>(p.roots);
        if (e.roots.size() != static_cast<std::size_t>(p.order() + 1)) {
          throw Error(ErrorCode::Config, "roots: expected " + std::to_string(p.order() + 1) + " explicit roots");
        }
        if (!e.roots.is_conjugate_closed()) throw Error(ErrorCode::NotConjugateClosed, "roots: not conjugate-closed");
        if (!(e.roots.max_real_part() < 0.0)) throw Error(ErrorCode::UnstableRoot, "roots: real parts must be negative");
      }
      break;
  }
}

RootSet resolve_roots(const DifferentiatorParams& p) {
  const int m = p.order();
  if (const auto* r = std::get_if<RepeatedRoot>(&p.roots)) return RootSet::repeated(r->value, m + 1);
  if (const auto* e = std::get_if<ExplicitRoots>(&p.roots)) return e->roots;
  require_gains(p, static_cast<std::size_t>(m + 1));
  return roots_from_coeffs(build_char_poly_q(p.lambda, *p.lipschitz, m));
}

SynthesisCache precompute(const DifferentiatorParams& params) {
  return precompute(params.n, params.n_f, params.tau);
}

double signed_power(double x, double gamma) {
  if (x == 0.0) return 0.0;
  if (gamma == 0.0) return x > 0.0 ? 1.0 : -1.0;
  return std::copysign(std::pow(std::abs(x), gamma), x);
}

FilterState init(const DifferentiatorParams& params, double f0_sample, double t0) {
  FilterState s;
  s.w = Eigen::VectorXd::Zero(params.n_f);
  s.z = Eigen::VectorXd::Zero(params.n + 1);
  s.z(0) = f0_sample;
  s.t0 = t0;
  s.t = t0;
  return s;
}

StepOutput step_matching(const FilterState& state, double f_k, const SynthesisCache& cache,
                         const RootSet& b) {
  const int n_f = cache.n_f;
  const int dim = cache.dim();
  if (state.w.size() != n_f || state.z.size() != cache.n + 1) {
    throw Error(ErrorCode::DimensionMismatch, "state does not match the synthesis cache");
  }
  Eigen::VectorXd xi(dim);
  xi << state.w, state.z;
  const double w1 = xi(0);

  const RootSet shifted = matching_map_shifted(b, w1, cache.tau, cache.order());
  const Eigen::VectorXd g = gamma_from_shifted(shifted, cache);

  Eigen::VectorXd next = cache.psi.entries * xi + g * w1;
  next(n_f - 1) -= cache.tau * f_k;

  StepOutput out;
  out.state = advance(state, next.head(n_f), next.tail(cache.n + 1), cache.tau);
  out.estimate.derivatives = out.state.z;
  out.gamma_norm = g.norm();
  return out;
}

StepOutput step_standard_euler(const FilterState& state, double f_k,
                               const DifferentiatorParams& p) {
  const int n = p.n;
  const double L = *p.lipschitz;
  const double sigma0 = state.z(0) - f_k;
  Eigen::VectorXd z = state.z;
  for (int j = 0; j <= n; ++j) {
    const double gain = p.lambda[static_cast<std::size_t>(n - j)] *
                        std::pow(L, static_cast<double>(j + 1) / (n + 1));
    const double injection = -gain * signed_power(sigma0, static_cast<double>(n - j) / (n + 1));
    const double chain = j < n ? state.z(j + 1) : 0.0;
    z(j) = state.z(j) + p.tau * (chain + injection);
  }
  StepOutput out;
  out.state = advance(state, state.w, std::move(z), p.tau);
  out.estimate.derivatives = out.state.z;
  return out;
}

StepOutput step_filtering_euler(const FilterState& state, double f_k,
                                const DifferentiatorParams& p) {
  const int n_f = p.n_f;
  const int m = p.order();
  const double L = *p.lipschitz;
  Eigen::VectorXd xi(m + 1);
  xi << state.w, state.z;
  const double w1 = xi(0);
  Eigen::VectorXd next(m + 1);
  // Row r (1-based): -lambda_{m+1-r} L^{r/(m+1)} [w1]^{(m+1-r)/(m+1)} + next state.
  for (int r = 1; r <= m + 1; ++r) {
    const double gain = p.lambda[static_cast<std::size_t>(m + 1 - r)] *
                        std::pow(L, static_cast<double>(r) / (m + 1));
    const double injection = -gain * signed_power(w1, static_cast<double>(m + 1 - r) / (m + 1));
    double chain = 0.0;
    if (r == n_f) {
      chain = xi(n_f) - f_k;
    } else if (r <= m) {
      chain = xi(r);
    }
    next(r - 1) = xi(r - 1) + p.tau * (injection + chain);
  }
  StepOutput out;
  out.state = advance(state, next.head(n_f), next.tail(p.n + 1), p.tau);
  out.estimate.derivatives = out.state.z;
  return out;
}

Differentiator::Differentiator(DifferentiatorParams params, Variant variant)
    : params_(std::move(params)), variant_(variant) {
  validate(params_, variant_);
  if (variant_ == Variant::Matching) {
    cache_ = precompute(params_);
    roots_ = resolve_roots(params_);
  }
  state_ = init(params_, 0.0);
  estimate_.derivatives = state_.z;
}

void Differentiator::reset(double f0_sample, double t0) { reset(init(params_, f0_sample, t0)); }

void Differentiator::reset(FilterState state) {
  if (state.w.size() != params_.n_f || state.z.size() != params_.n + 1) {
    throw Error(ErrorCode::DimensionMismatch, "state size does not match parameters");
  }
  state_ = std::move(state);
  estimate_.derivatives = state_.z;
  gamma_norm_ = 0.0;
}

const Estimate& Differentiator::update(double f_k) {
  StepOutput out;
  switch (variant_) {
    case Variant::Matching: out = step_matching(state_, f_k, *cache_, roots_); break;
    case Variant::StandardEuler: out = step_standard_euler(state_, f_k, params_); break;
    case Variant::FilteringEuler: out = step_filtering_euler(state_, f_k, params_); break;
  }
  state_ = std::move(out.state);
  estimate_ = std::move(out.estimate);
  gamma_norm_ = out.gamma_norm;
  return estimate_;
}

}  // namespace smdiff
