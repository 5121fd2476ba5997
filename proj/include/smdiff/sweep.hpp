#pragma once

#include <optional>
#include <vector>

#include "smdiff/analysis.hpp"
#include "smdiff/error.hpp"
#include "smdiff/harness.hpp"

namespace smdiff {

/// Outcome of one sweep item; exactly one of the two members is set.
struct RunOutcome {
  std::optional<std::vector<StepRecord>> records;
  std::optional<Error> error;
};

struct CertifyOutcome {
  double w1 = 0.0;
  std::optional<LyapunovCertificate> certificate;
  std::optional<Error> error;
};

/// Independent runs; each item owns its differentiator and noise source, so
/// the parallel executor returns exactly what the serial one does.
std::vector<RunOutcome> run_sweep_serial(const std::vector<RunConfig>& configs);
std::vector<RunOutcome> run_sweep_parallel(const std::vector<RunConfig>& configs);

std::vector<CertifyOutcome> certify_grid_serial(const SynthesisCache& cache, const RootSet& b,
                                                const std::vector<double>& w1_grid);
std::vector<CertifyOutcome> certify_grid_parallel(const SynthesisCache& cache, const RootSet& b,
                                                  const std::vector<double>& w1_grid);

/// Threads the OpenMP runtime would use.
int max_threads();

}  // namespace smdiff
