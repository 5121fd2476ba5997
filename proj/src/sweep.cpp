#include "smdiff/sweep.hpp"

#include <omp.h>

namespace smdiff {

namespace {

template <class Outcome, class Fn>
void capture(Outcome& out, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    out.error = e;
  } catch (const std::exception& e) {
    out.error = Error(ErrorCode::InvalidArgument, e.what());
  }
}

RunOutcome run_one(const RunConfig& config) {
  RunOutcome out;
  capture(out, [&] { out.records = run(config); });
  return out;
}

CertifyOutcome certify_one(const SynthesisCache& cache, const RootSet& b, double w1) {
  CertifyOutcome out;
  out.w1 = w1;
  capture(out, [&] { out.certificate = certify_frozen(cache, b, w1); });
  return out;
}

}  // namespace

std::vector<RunOutcome> run_sweep_serial(const std::vector<RunConfig>& configs) {
  std::vector<RunOutcome> out;
  out.reserve(configs.size());
  for (const RunConfig& c : configs) out.push_back(run_one(c));
  return out;
}

std::vector<RunOutcome> run_sweep_parallel(const std::vector<RunConfig>& configs) {
  std::vector<RunOutcome> out(configs.size());
  const auto count = static_cast<long long>(configs.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = run_one(configs[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<CertifyOutcome> certify_grid_serial(const SynthesisCache& cache, const RootSet& b,
                                                const std::vector<double>& w1_grid) {
  std::vector<CertifyOutcome> out;
  out.reserve(w1_grid.size());
  for (double w1 : w1_grid) out.push_back(certify_one(cache, b, w1));
  return out;
}

std::vector<CertifyOutcome> certify_grid_parallel(const SynthesisCache& cache, const RootSet& b,
                                                  const std::vector<double>& w1_grid) {
  std::vector<CertifyOutcome> out(w1_grid.size());
  const auto count = static_cast<long long>(w1_grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = certify_one(cache, b, w1_grid[static_cast<std::size_t>(i)]);
  }
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace smdiff
