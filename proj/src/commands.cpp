#include "smdiff/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "smdiff/error.hpp"
#include "smdiff/sweep.hpp"

namespace smdiff {

using nlohmann::json;

namespace {

void apply_overrides(RunConfig& c, const PresetOverrides& o) {
  if (o.tau) c.params.tau = *o.tau;
  if (o.t_end) c.t_end = *o.t_end;
  if (o.roots) c.params.roots = *o.roots;
  if (o.seed) set_noise_seed(c.noise, *o.seed);
  if (o.variant) c.variant = *o.variant;
  if (o.record_stride) c.record_stride = *o.record_stride;
}

CliConfig base_config(const std::optional<std::string>& config_path,
                      const std::optional<std::string>& preset_name, const PresetOverrides& o) {
  if (config_path && preset_name) throw Error(ErrorCode::Config, "--config and --preset are exclusive");
  CliConfig cfg;
  if (config_path) {
    cfg = load_config(*config_path);
    apply_overrides(cfg.run, o);
    if (cfg.preset && *cfg.preset == "sim1" && !(cfg.run.t_end < kSim1Horizon)) {
      throw Error(ErrorCode::Config, "t_end: sim1 is limited to t < 31.54619 s");
    }
  } else if (preset_name) {
    cfg.preset = *preset_name;
    cfg.run = preset(*preset_name, o);
  } else {
    throw Error(ErrorCode::Config, "one of --config or --preset is required");
  }
  return cfg;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "smdiff: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "smdiff: " << e.what() << '\n';
    return 1;
  }
}

class Output {
 public:
  Output(const std::optional<std::string>& path, std::ostream& fallback) : stream_(&fallback) {
    if (path && *path != "-") {
      file_.open(*path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::Config, "cannot write '" + *path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json config_echo(const CliConfig& cfg) {
  json j = to_json(cfg.run);
  j["preset"] = cfg.preset ? json(*cfg.preset) : json(nullptr);
  j["settle_fraction"] = cfg.settle_fraction;
  j["certify_grid"] = to_json(cfg.grid);
  return j;
}

json certificate_json(const LyapunovCertificate& c) {
  return {{"w1", c.w1}, {"spectral_radius", c.spectral_radius}, {"K", c.K}, {"residual", c.residual}};
}

}  // namespace

int exit_code_for(const Error& e) { return is_numerical(e.code()) ? 2 : 1; }

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("SMDIFF_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string text(raw);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::Config, "SMDIFF_SEED: expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

CliConfig resolve_run(const RunOptions& options) {
  PresetOverrides o = options.overrides;
  if (!o.seed && options.env_seed) o.seed = options.env_seed;
  CliConfig cfg = base_config(options.config_path, options.preset, o);
  if (options.trace_path) cfg.trace_path = options.trace_path;
  if (options.metrics_path) cfg.metrics_path = options.metrics_path;
  if (options.settle_fraction) {
    if (!(*options.settle_fraction > 0.0 && *options.settle_fraction < 1.0)) {
      throw Error(ErrorCode::Config, "settle_fraction: must lie in (0, 1)");
    }
    cfg.settle_fraction = *options.settle_fraction;
  }
  validate(cfg.run);
  return cfg;
}

json run_metrics(const CliConfig& cfg, const std::vector<StepRecord>& records) {
  const RunConfig& run = cfg.run;
  const ErrorMetrics m = error_metrics(records, cfg.settle_fraction);

  double noise_tail = 0.0;
  for (const StepRecord& r : records) {
    if (r.k >= m.tail_start_step) noise_tail = std::max(noise_tail, std::abs(r.f - r.x(0)));
  }

  json doc;
  doc["config"] = config_echo(cfg);
  doc["steps"] = step_count(run);
  doc["records"] = records.size();
  doc["tail_start_step"] = m.tail_start_step;
  doc["tail_sup"] = m.tail_sup;
  doc["settling_steps"] = m.settling_steps;
  doc["settling_step"] = m.settling_step;
  doc["tail_sup_state_norm"] = m.tail_sup_state_norm;
  doc["tail_sup_noise"] = noise_tail;

  if (run.variant == Variant::Matching && run.params.lipschitz) {
    doc["roots"] = to_json(resolve_roots(run.params));
    const Theorem1Check t = theorem1_check(records, run.params, m, cfg.grid);
    doc["theorem1"] = {{"noise_free", run.noise.terms.empty()},
                       {"K_max", t.k_max},
                       {"h_bound_norm", t.h_norm},
                       {"bound", t.bound},
                       {"observed_max", t.observed_max},
                       {"w1_range", {t.w1_min, t.w1_max}},
                       {"certified_w1", t.certified_w1},
                       {"holds", t.holds}};
  } else {
    doc["theorem1"] = nullptr;
  }
  return doc;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const CliConfig cfg = resolve_run(options);
    const std::vector<StepRecord> records = run(cfg.run);
    const json metrics = run_metrics(cfg, records);

    const bool trace_to_stdout = !cfg.trace_path || *cfg.trace_path == "-";
    {
      Output trace(cfg.trace_path, out);
      write_trace_csv(trace.get(), records, cfg.run.params.n, cfg.run.params.n_f,
                      "config " + config_echo(cfg).dump());
    }
    Output metrics_out(cfg.metrics_path, trace_to_stdout ? err : out);
    metrics_out.get() << metrics.dump(2) << '\n';
    return 0;
  });
}

int cmd_roots(const RootsOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.m < 0) throw Error(ErrorCode::Config, "m: must be non-negative");
    if (options.lambda.size() != static_cast<std::size_t>(options.m + 1)) {
      throw Error(ErrorCode::Config, "lambda: expected " + std::to_string(options.m + 1) + " gains");
    }
    for (double l : options.lambda) {
      if (!(l > 0.0)) throw Error(ErrorCode::Config, "lambda: gains must be positive");
    }
    if (!(options.lipschitz > 0.0)) throw Error(ErrorCode::Config, "L: must be positive");
    const RealPolynomial q = build_char_poly_q(options.lambda, options.lipschitz, options.m);
    const RootSet roots = roots_from_coeffs(q);
    json arr = json::array();
    for (Complex r : roots) arr.push_back({{"re", r.real()}, {"im", r.imag()}, {"residual", std::abs(q(r))}});
    json doc = {{"lambda", options.lambda}, {"L", options.lipschitz}, {"m", options.m},
                {"coefficients", q.coeffs()}, {"roots", arr}};
    out << doc.dump(2) << '\n';
    return 0;
  });
}

int cmd_gains(const GainsOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.n < 0 || options.n_f < 1) throw Error(ErrorCode::Config, "need n >= 0 and n_f >= 1");
    if (!(options.tau > 0.0)) throw Error(ErrorCode::Config, "tau: must be positive");
    const RootSpec spec = parse_root_spec("explicit:" + options.d);
    const RootSet d = std::get<ExplicitRoots>(spec).roots;
    const int dim = options.n + options.n_f + 1;
    if (d.size() != static_cast<std::size_t>(dim)) {
      throw Error(ErrorCode::DimensionMismatch, "d: expected " + std::to_string(dim) + " roots, got " +
                                                    std::to_string(d.size()));
    }
    if (!d.is_conjugate_closed()) throw Error(ErrorCode::NotConjugateClosed, "d: not conjugate-closed");
    const SynthesisCache cache = precompute(options.n, options.n_f, options.tau);
    const Eigen::VectorXd g = gamma(d, cache);
    json doc = {{"n", options.n}, {"n_f", options.n_f}, {"tau", options.tau}, {"d", to_json(d)},
                {"gamma", std::vector<double>(g.data(), g.data() + g.size())},
                {"residual", pole_placement_residual(cache.psi, g, d)},
                {"annihilation_residual", annihilation_residual(cache.psi, g, d)}};
    out << doc.dump(2) << '\n';
    return 0;
  });
}

int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CliConfig cfg;
    if (options.config_path || options.preset) {
      cfg = base_config(options.config_path, options.preset, options.overrides);
    } else {
      if (!options.n) throw Error(ErrorCode::Config, "n: required without --config or --preset");
      DifferentiatorParams& p = cfg.run.params;
      p.n = *options.n;
      p.n_f = options.n_f.value_or(1);
      p.lambda = options.lambda.value_or(std::vector<double>{});
      p.lipschitz = options.lipschitz;
      if (options.overrides.tau) p.tau = *options.overrides.tau;
      if (options.overrides.roots) p.roots = *options.overrides.roots;
    }
    if (options.w1_min) cfg.grid.w1_min = *options.w1_min;
    if (options.w1_max) cfg.grid.w1_max = *options.w1_max;
    if (options.points) cfg.grid.points = *options.points;

    const DifferentiatorParams& p = cfg.run.params;
    validate(p, Variant::Matching);
    const std::vector<double> grid =
        options.w1 ? std::vector<double>{*options.w1} : log_grid(cfg.grid.w1_min, cfg.grid.w1_max, cfg.grid.points);
    const SynthesisCache cache = precompute(p);
    const RootSet b = resolve_roots(p);
    const std::vector<CertifyOutcome> results =
        options.serial ? certify_grid_serial(cache, b, grid) : certify_grid_parallel(cache, b, grid);

    json certs = json::array();
    double k_max = 0.0;
    std::optional<Error> first_error;
    for (const CertifyOutcome& r : results) {
      if (r.certificate) {
        certs.push_back(certificate_json(*r.certificate));
        k_max = std::max(k_max, r.certificate->K);
      } else {
        certs.push_back({{"w1", r.w1}, {"error", r.error->what()}});
        if (!first_error) first_error = r.error;
      }
    }
    json params = to_json(cfg.run)["params"];
    json doc = {{"params", params}, {"roots", to_json(b)}, {"Q", "2I"}, {"certificates", certs},
                {"K_max", k_max}, {"all_stable", !first_error.has_value()}};
    out << doc.dump(2) << '\n';
    if (first_error) {
      err << "smdiff: " << first_error->what() << '\n';
      return exit_code_for(*first_error);
    }
    return 0;
  });
}

}  // namespace smdiff
