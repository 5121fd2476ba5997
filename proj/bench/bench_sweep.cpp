// Serial vs OpenMP timing for the two parallel kernels: independent runs and
// the frozen-w1 certification grid.
#include <chrono>
#include <iostream>

#include "smdiff/sweep.hpp"

namespace {

template <class Fn>
double seconds(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main() {
  using namespace smdiff;
  std::cout << "threads: " << max_threads() << '\n';

  std::vector<RunConfig> configs;
  for (double b : {-1.5, -2.5, -5.0}) {
    for (double tau : {0.01, 0.005}) {
      PresetOverrides o;
      o.roots = RepeatedRoot{b};
      o.tau = tau;
      configs.push_back(preset("sim1", o));
    }
  }
  configs.push_back(preset("sim1"));
  configs.push_back(preset("sim2", {.tau = {}, .t_end = 2.0}));

  std::vector<RunOutcome> serial, parallel;
  const double ts = seconds([&] { serial = run_sweep_serial(configs); });
  const double tp = seconds([&] { parallel = run_sweep_parallel(configs); });
  std::cout << "run sweep (" << configs.size() << " runs): serial " << ts << " s, parallel " << tp
            << " s, speedup " << ts / tp << '\n';

  const RunConfig sim1 = preset("sim1");
  const SynthesisCache cache = precompute(sim1.params);
  const RootSet b = resolve_roots(sim1.params);
  const std::vector<double> grid = log_grid(1e-4, 1e2, 49);
  std::vector<CertifyOutcome> cs, cp;
  const double cs_t = seconds([&] { cs = certify_grid_serial(cache, b, grid); });
  const double cp_t = seconds([&] { cp = certify_grid_parallel(cache, b, grid); });
  std::cout << "certify grid (" << grid.size() << " points): serial " << cs_t << " s, parallel " << cp_t
            << " s, speedup " << cs_t / cp_t << '\n';

  bool same = true;
  for (std::size_t i = 0; i < serial.size(); ++i) {
    if (serial[i].records.has_value() != parallel[i].records.has_value()) same = false;
    else if (serial[i].records && serial[i].records->back().z != parallel[i].records->back().z) same = false;
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].certificate && cp[i].certificate && cs[i].certificate->K != cp[i].certificate->K) same = false;
  }
  std::cout << "serial == parallel: " << (same ? "yes" : "NO") << '\n';
  return same ? 0 : 1;
}
