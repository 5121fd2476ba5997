// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "smdiff/analysis.hpp"
#include "smdiff/commands.hpp"
#include "smdiff/harness.hpp"

using namespace smdiff;

namespace {

// Tolerances.
constexpr double kRootAbsTol = 1e-3;
constexpr double kRootRuntime = 1.0;
constexpr double kScalingRelTol = 1e-9;
constexpr double kPolePlacementRelTol = 1e-8;
constexpr double kRelFloor = 1e-3;
constexpr double kAnnihilationTol = 1e-9;
constexpr int kPoleSets = 1000;
constexpr double kPoleRuntime = 10.0;
constexpr double kDeadbeatTol = 1e-9;
constexpr long long kDeadbeatSteps = 300;
constexpr double kBaselineFactor = 10.0;
constexpr double kBaselineTauRef = 1e-5;
constexpr double kBaselineRuntime = 60.0;
constexpr double kRefineSigma3Factor = 1.5;
constexpr double kLyapunovPTol = 1e-12;
constexpr double kLyapunovKTol = 1e-9;
constexpr double kSettleFraction = 0.5;

const std::string kCli = SMDIFF_CLI_PATH;
const std::string kTmp = SMDIFF_TEST_TMP;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Greedy nearest-neighbour matching, absolute distance.
double max_abs_matched(const std::vector<Complex>& want, const RootSet& got) {
  std::vector<bool> used(got.size(), false);
  double worst = 0.0;
  for (Complex w : want) {
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < got.size(); ++j) {
      if (!used[j] && std::abs(w - got[j]) < dist) {
        dist = std::abs(w - got[j]);
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, dist);
  }
  return worst;
}

RootSet roots_via_command(double lipschitz) {
  RootsOptions o;
  o.lambda = sim1_gains();
  o.lipschitz = lipschitz;
  o.m = 5;
  std::ostringstream out, err;
  if (cmd_roots(o, out, err) != 0) throw std::runtime_error("roots command failed: " + err.str());
  const auto doc = nlohmann::json::parse(out.str());
  std::vector<Complex> r;
  for (const auto& e : doc["roots"]) r.emplace_back(e["re"].get<double>(), e["im"].get<double>());
  return RootSet(std::move(r));
}

Verdict criterion1() {
  const auto start = Clock::now();
  const RootSet got = roots_via_command(2.0);
  const double elapsed = seconds_since(start);
  const std::vector<Complex> reference{{-2.8072, 2.7583}, {-2.8072, -2.7583}, {-0.2725, 0.3729},
                                     {-0.2725, -0.3729}, {-1.0831, 0.0}, {-0.6148, 0.0}};
  const double err = max_abs_matched(reference, got);
  return {err < kRootAbsTol && elapsed < kRootRuntime,
          "max |b - reference| = " + fmt(err) + ", " + fmt(elapsed) + " s"};
}

Verdict criterion2() {
  const RootSet low = roots_via_command(2.0);
  const RootSet high = roots_via_command(320.0);
  const double factor = std::pow(160.0, 1.0 / 6.0);
  std::vector<Complex> scaled;
  for (Complex r : low) scaled.push_back(r * factor);
  const double rel = max_matched_error(RootSet(scaled), high, 0.0);

  const std::vector<Complex> reference{{-6.5408, 6.4269}, {-6.5408, -6.4269}, {-0.6348, 0.8689},
                                     {-0.6348, -0.8689}, {-2.5235, 0.0}};
  // Match the five consistent reference values against the computed set minus its
  // remaining real root, which is checked against the scaling law instead.
  const double five = max_abs_matched(reference, high);
  double sixth = std::numeric_limits<double>::infinity();
  for (Complex r : high) {
    if (r.imag() == 0.0 && std::abs(r.real() + 2.5235) > 0.1) sixth = r.real();
  }
  const bool sixth_ok = std::abs(sixth - (-0.6148 * factor)) < kRootAbsTol;
  std::string detail = "scaling rel err = " + fmt(rel) + ", five reference max err = " + fmt(five) +
                       ", sixth root = " + fmt(sixth) + " (reference table lists -0.6348; discrepancy logged)";
  return {rel < kScalingRelTol && five < kRootAbsTol && sixth_ok, detail};
}

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Closed loop in unit-step coordinates, where entries stay O(1) for any tau.
MatrixXld unit_closed_loop(const SynthesisCache& c, const Eigen::VectorXd& g) {
  MatrixXld a = build_psi(c.n, c.n_f, 1.0).entries.cast<long double>();
  long double s = 1.0L;
  for (int i = 0; i < c.dim(); ++i) {
    a(i, 0) += static_cast<long double>(g(i)) * s;
    s *= c.tau;
  }
  return a;
}

// Independent gains in extended precision: Ackermann's formula on the
// unit-step Psi with an explicit observability matrix.
VectorXld ackermann_unit(int n, int n_f, const RootSet& d) {
  const int dim = n + n_f + 1;
  const MatrixXld psi = build_psi(n, n_f, 1.0).entries.cast<long double>();
  MatrixXld S(dim, dim);
  MatrixXld row = MatrixXld::Zero(1, dim);
  row(0, 0) = 1.0L;
  for (int i = 0; i < dim; ++i) {
    S.row(i) = row;
    row = row * psi;
  }
  std::vector<std::complex<long double>> poly{1.0L};
  for (Complex r : d) {
    std::vector<std::complex<long double>> next(poly.size() + 1, 0.0L);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] += poly[k];
      next[k] -= poly[k] * std::complex<long double>(r.real(), r.imag());
    }
    poly = std::move(next);
  }
  MatrixXld pd = MatrixXld::Zero(dim, dim), power = MatrixXld::Identity(dim, dim);
  for (const auto& c : poly) {
    pd += c.real() * power;
    power = power * psi;
  }
  VectorXld e = VectorXld::Zero(dim);
  e(dim - 1) = 1.0L;
  return -(pd * S.fullPivLu().solve(e));
}

RootSet eigenvalues(const MatrixXld& a) {
  Eigen::EigenSolver<MatrixXld> es(a, false);
  std::vector<Complex> ev;
  for (const auto& e : es.eigenvalues()) ev.emplace_back(static_cast<double>(e.real()), static_cast<double>(e.imag()));
  return RootSet(std::move(ev));
}

Verdict criterion3() {
  std::mt19937_64 gen(0xacce55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double taus[] = {1e-4, 1e-2, 1.0};
  double worst_eig = 0.0, worst_ann = 0.0, worst_gamma = 0.0, worst_rounded = 0.0;
  int over = 0;
  const auto start = Clock::now();
  for (int trial = 0; trial < kPoleSets; ++trial) {
    const int m = 1 + static_cast<int>(u(gen) * 6.0) % 6;
    const int n_f = 1 + static_cast<int>(u(gen) * m) % m;
    const double tau = taus[trial % 3];
    std::vector<Complex> d;
    while (static_cast<int>(d.size()) < m + 1) {
      const double radius = 0.999 * std::sqrt(u(gen));
      if (static_cast<int>(d.size()) + 2 <= m + 1 && u(gen) < 0.5) {
        const Complex z = std::polar(radius, u(gen) * M_PI);
        d.push_back(z);
        d.push_back(std::conj(z));
      } else {
        d.push_back(u(gen) < 0.5 ? radius : -radius);
      }
    }
    const RootSet ds(d);
    const SynthesisCache cache = precompute(m - n_f, n_f, tau);
    const Eigen::VectorXd g = gamma(ds, cache);
    const double err = max_matched_error(ds, eigenvalues(unit_closed_loop(cache, g)), kRelFloor);
    worst_eig = std::max(worst_eig, err);
    worst_ann = std::max(worst_ann, annihilation_residual(cache.psi, g, ds));

    // Where the check misses, measure how far the gains are from exact and
    // what plain double rounding of the exact gains already costs.
    if (err >= kPolePlacementRelTol) {
      ++over;
      const VectorXld exact = ackermann_unit(m - n_f, n_f, ds);
      MatrixXld rounded = build_psi(m - n_f, n_f, 1.0).entries.cast<long double>();
      long double s = 1.0L;
      for (int i = 0; i <= m; ++i) {
        const long double gi = static_cast<long double>(g(i)) * s;
        worst_gamma = std::max(worst_gamma, static_cast<double>(std::abs(gi - exact(i)) / std::max(1.0L, std::abs(exact(i)))));
        rounded(i, 0) += static_cast<long double>(static_cast<double>(exact(i)));
        s *= tau;
      }
      worst_rounded = std::max(worst_rounded, max_matched_error(ds, eigenvalues(rounded), kRelFloor));
    }
  }
  const double elapsed = seconds_since(start);
  std::string detail = "max eig rel err = " + fmt(worst_eig) + ", max annihilation = " + fmt(worst_ann) + ", " +
                       fmt(elapsed) + " s";
  if (over > 0) {
    detail += "; " + std::to_string(over) + " clustered sets over tolerance, gains within " + fmt(worst_gamma) +
              " of the extended-precision oracle, exact gains rounded to double give " + fmt(worst_rounded);
  }
  return {worst_eig < kPolePlacementRelTol && worst_ann < kAnnihilationTol && elapsed < kPoleRuntime, detail};
}

RunConfig noise_free_sim1(RootSpec roots) {
  PresetOverrides o;
  o.roots = roots;
  return preset("sim1", o);
}

Verdict criterion4() {
  RunConfig c = noise_free_sim1(RepeatedRoot{-2.5});
  c.signal = PolynomialSignal{{0.0, 0.0, 0.0, 1.0}};
  c.initial_error = std::vector<double>{1, 1, 1, 1, 0, 0};
  const std::vector<StepRecord> rec = run(c);
  long long first = -1;
  double floor_after = 0.0;
  for (const StepRecord& r : rec) {
    const double e = state_error_norm(r);
    if (first < 0 && e < kDeadbeatTol) first = r.k;
    if (first >= 0) floor_after = std::max(floor_after, e);
  }
  return {first >= 0 && first <= kDeadbeatSteps,
          "first step below 1e-9: " + std::to_string(first) + ", max afterwards " + fmt(floor_after) +
              " (rounding through deadbeat gains)"};
}

Verdict criterion5() {
  bool all = true;
  std::string detail;
  const std::pair<const char*, RootSpec> configs[] = {{"Q", FromCharPoly{}},
                                                      {"-1.5", RepeatedRoot{-1.5}},
                                                      {"-2.5", RepeatedRoot{-2.5}},
                                                      {"-5", RepeatedRoot{-5.0}}};
  for (const auto& [name, roots] : configs) {
    const RunConfig c = noise_free_sim1(roots);
    const std::vector<StepRecord> rec = run(c);
    const ErrorMetrics m = error_metrics(rec, kSettleFraction);
    const Theorem1Check t = theorem1_check(rec, c.params, m);
    all = all && t.holds;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": observed " + fmt(t.observed_max) +
              " <= " + fmt(t.bound) + " (K_max " + fmt(t.k_max) + ")";
  }
  return {all, detail};
}

Verdict criterion6() {
  const auto start = Clock::now();
  const RunConfig matching = noise_free_sim1(FromCharPoly{});
  RunConfig euler = matching;
  euler.variant = Variant::FilteringEuler;
  euler.params.tau = kBaselineTauRef;
  euler.record_stride = static_cast<int>(std::llround(matching.params.tau / kBaselineTauRef));
  const std::vector<StepRecord> a = run(matching);
  const std::vector<StepRecord> b = run(euler);
  const double elapsed = seconds_since(start);
  const ErrorMetrics ma = error_metrics(a, kSettleFraction);
  const ErrorMetrics mb = error_metrics(b, kSettleFraction);
  bool ok = a.size() == b.size() && elapsed < kBaselineRuntime;
  std::string detail;
  for (std::size_t j = 0; j < ma.tail_sup.size(); ++j) {
    const double ratio = std::max(ma.tail_sup[j] / mb.tail_sup[j], mb.tail_sup[j] / ma.tail_sup[j]);
    ok = ok && ratio <= kBaselineFactor;
    detail += "j" + std::to_string(j) + " " + fmt(ma.tail_sup[j]) + " vs " + fmt(mb.tail_sup[j]) + "; ";
  }
  return {ok, detail + fmt(elapsed) + " s"};
}

Verdict criterion7() {
  RunConfig coarse = noise_free_sim1(FromCharPoly{});
  RunConfig fine = coarse;
  fine.params.tau = coarse.params.tau / 2.0;
  const ErrorMetrics mc = error_metrics(run(coarse), kSettleFraction);
  const ErrorMetrics mf = error_metrics(run(fine), kSettleFraction);
  bool ok = true;
  std::string detail;
  for (std::size_t j = 0; j < mc.tail_sup.size(); ++j) {
    ok = ok && mf.tail_sup[j] <= mc.tail_sup[j];
    detail += "j" + std::to_string(j) + " " + fmt(mc.tail_sup[j]) + " -> " + fmt(mf.tail_sup[j]) + "; ";
  }
  const double gain = mc.tail_sup[3] / mf.tail_sup[3];
  ok = ok && gain >= kRefineSigma3Factor;
  return {ok, detail + "sigma3 ratio " + fmt(gain)};
}

Verdict criterion8() {
  bool ok = true;
  std::string detail;
  const std::pair<const char*, RootSpec> configs[] = {{"-2.5", RepeatedRoot{-2.5}}, {"Q", FromCharPoly{}}};
  for (const auto& [name, roots] : configs) {
    PresetOverrides o;
    o.roots = roots;
    const RunConfig c = preset("sim2", o);
    try {
      const std::vector<StepRecord> rec = run(c);
      const ErrorMetrics m = error_metrics(rec, kSettleFraction);
      double noise = 0.0;
      for (const StepRecord& r : rec) {
        if (r.k >= m.tail_start_step) noise = std::max(noise, std::abs(r.f - r.x(0)));
      }
      const bool steps_ok = rec.back().k + 1 >= 100000;
      ok = ok && steps_ok && m.tail_sup[0] < noise;
      detail += std::string(detail.empty() ? "" : "; ") + name + ": sigma0 " + fmt(m.tail_sup[0]) +
                " < noise " + fmt(noise) + ", " + std::to_string(rec.back().k + 1) + " steps";
    } catch (const Error& e) {
      ok = false;
      detail += std::string(name) + ": " + e.what() + "; ";
    }
  }
  return {ok, detail};
}

Verdict criterion9() {
  const Eigen::MatrixXd E = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const Eigen::MatrixXd P = solve_discrete_lyapunov(E, Q);
  const double K = theorem1_bound(E, P, Q);
  const double k_ref = std::sqrt(0.5 + 8.0 / 3.0);
  const double dp = std::abs(P(0, 0) - 8.0 / 3.0);
  const double dk = std::abs(K - k_ref);
  return {dp < kLyapunovPTol && dk < kLyapunovKTol,
          "P = " + fmt(P(0, 0)) + " (err " + fmt(dp) + "), K = " + fmt(K) + " (err " + fmt(dk) + ")"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion10() {
  const std::string a = kTmp + "/accept_sim2_a.csv", b = kTmp + "/accept_sim2_b.csv";
  int rc = 0;
  for (const std::string& path : {a, b}) {
    const std::string cmd = "\"" + kCli + "\" run --preset sim2 --seed 20200711 --out \"" + path +
                            "\" --metrics /dev/null";
    rc |= std::system(cmd.c_str());
  }
  const std::string ca = slurp(a), cb = slurp(b);
  return {rc == 0 && !ca.empty() && ca == cb,
          std::to_string(ca.size()) + " bytes, " + (ca == cb ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"root fixtures", criterion1},        {"scaling law", criterion2},
      {"pole placement", criterion3},       {"deadbeat exactness", criterion4},
      {"neighborhood bound", criterion5},   {"baseline consistency", criterion6},
      {"tau refinement", criterion7},       {"noisy robustness", criterion8},
      {"scalar Lyapunov", criterion9},      {"reproducibility", criterion10}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  std::cout << failures << " of " << criteria.size() << " criteria failed" << std::endl;
  return failures == 0 ? 0 : 1;
}
