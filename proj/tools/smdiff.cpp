// smdiff: run, roots, gains, certify.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smdiff/commands.hpp"
#include "smdiff/error.hpp"

namespace {

using smdiff::Error;

template <class T>
void opt(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

struct OverrideFlags {
  std::optional<double> tau;
  std::optional<double> t_end;
  std::optional<std::string> roots;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<int> stride;

  smdiff::PresetOverrides resolve() const {
    smdiff::PresetOverrides o;
    o.tau = tau;
    o.t_end = t_end;
    if (roots) o.roots = smdiff::parse_root_spec(*roots);
    o.seed = seed;
    if (variant) o.variant = smdiff::parse_variant(*variant);
    o.record_stride = stride;
    return o;
  }
};

int with_errors(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "smdiff: " << e.what() << '\n';
    return smdiff::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time filtering differentiator toolkit"};
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  // run
  smdiff::RunOptions run_opts;
  OverrideFlags run_flags;
  std::optional<std::string> run_config, run_preset, run_out, run_metrics;
  std::optional<double> run_settle;
  CLI::App* run = app.add_subcommand("run", "simulate a preset or a JSON config");
  opt(run, "--config", run_config, "JSON run configuration");
  opt(run, "--preset", run_preset, "sim1 or sim2");
  opt(run, "--tau", run_flags.tau, "sampling period override");
  opt(run, "--t-end", run_flags.t_end, "end time override");
  opt(run, "--roots", run_flags.roots, "from-charpoly | repeated:<b> | explicit:<list>");
  opt(run, "--seed", run_flags.seed, "Gaussian noise seed (beats SMDIFF_SEED)");
  opt(run, "--variant", run_flags.variant, "matching | standard-euler | filtering-euler");
  opt(run, "--stride", run_flags.stride, "record every k-th step");
  opt(run, "--out", run_out, "trace CSV path ('-' for stdout)");
  opt(run, "--metrics", run_metrics, "metrics JSON path");
  opt(run, "--settle-fraction", run_settle, "tail window fraction for metrics");

  // roots
  smdiff::RootsOptions roots_opts;
  CLI::App* roots = app.add_subcommand("roots", "roots of Q(b) for a gain sequence");
  roots->add_option("--lambda", roots_opts.lambda, "gains lambda_0..lambda_m")->delimiter(',')->required();
  roots->add_option("--L", roots_opts.lipschitz, "Lipschitz bound")->required();
  roots->add_option("--m", roots_opts.m, "order m = n + n_f")->required();

  // gains
  smdiff::GainsOptions gains_opts;
  CLI::App* gains = app.add_subcommand("gains", "injection gain for given discrete eigenvalues");
  gains->add_option("--n", gains_opts.n, "differentiation order")->required();
  gains->add_option("--nf", gains_opts.n_f, "filtering order")->required();
  gains->add_option("--tau", gains_opts.tau, "sampling period")->required();
  gains->add_option("--d", gains_opts.d, "eigenvalues, e.g. 0.5,0.2+0.1i,0.2-0.1i")->required();

  // certify
  smdiff::CertifyOptions cert_opts;
  OverrideFlags cert_flags;
  std::optional<std::string> cert_config, cert_preset;
  std::optional<std::vector<double>> cert_lambda;
  CLI::App* certify = app.add_subcommand("certify", "frozen-w1 Lyapunov certificates");
  opt(certify, "--config", cert_config, "JSON run configuration");
  opt(certify, "--preset", cert_preset, "sim1 or sim2");
  opt(certify, "--tau", cert_flags.tau, "sampling period");
  opt(certify, "--roots", cert_flags.roots, "from-charpoly | repeated:<b> | explicit:<list>");
  opt(certify, "--n", cert_opts.n, "differentiation order");
  opt(certify, "--nf", cert_opts.n_f, "filtering order");
  certify->add_option_function<std::vector<double>>(
      "--lambda", [&cert_lambda](const std::vector<double>& v) { cert_lambda = v; }, "gains")->delimiter(',');
  opt(certify, "--L", cert_opts.lipschitz, "Lipschitz bound");
  opt(certify, "--w1-min", cert_opts.w1_min, "grid lower end");
  opt(certify, "--w1-max", cert_opts.w1_max, "grid upper end");
  opt(certify, "--points", cert_opts.points, "log-spaced grid size");
  opt(certify, "--w1", cert_opts.w1, "single frozen w1");
  certify->add_flag("--serial", cert_opts.serial, "use the serial reference executor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (run->parsed()) {
    return with_errors([&] {
      run_opts.config_path = run_config;
      run_opts.preset = run_preset;
      run_opts.overrides = run_flags.resolve();
      run_opts.env_seed = smdiff::seed_from_env();
      run_opts.trace_path = run_out;
      run_opts.metrics_path = run_metrics;
      run_opts.settle_fraction = run_settle;
      return smdiff::cmd_run(run_opts, std::cout, std::cerr);
    });
  }
  if (roots->parsed()) return smdiff::cmd_roots(roots_opts, std::cout, std::cerr);
  if (gains->parsed()) return smdiff::cmd_gains(gains_opts, std::cout, std::cerr);
  return with_errors([&] {
    cert_opts.config_path = cert_config;
    cert_opts.preset = cert_preset;
    cert_opts.overrides = cert_flags.resolve();
    cert_opts.lambda = cert_lambda;
    return smdiff::cmd_certify(cert_opts, std::cout, std::cerr);
  });
}
