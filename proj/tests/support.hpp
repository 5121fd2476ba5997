#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "smdiff/error.hpp"
#include "smdiff/poly.hpp"

#define CHECK_CODE(expr, expected)                                \
  do {                                                            \
    bool thrown_ = false;                                         \
    try {                                                         \
      (void)(expr);                                               \
    } catch (const smdiff::Error& e_) {                           \
      thrown_ = true;                                             \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());          \
    }                                                             \
    CHECK_MESSAGE(thrown_, "expected an smdiff::Error");          \
  } while (false)

namespace testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eed5eedULL);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

/// Conjugate-closed set of `count` roots drawn uniformly in the disc |z| < radius.
inline smdiff::RootSet random_disc_roots(int count, double radius) {
  std::vector<smdiff::Complex> r;
  while (static_cast<int>(r.size()) < count) {
    const double rho = radius * std::sqrt(uniform(0.0, 1.0));
    const double phi = uniform(0.0, 2.0 * std::numbers::pi);
    if (count - static_cast<int>(r.size()) >= 2 && uniform(0.0, 1.0) < 0.5) {
      r.emplace_back(rho * std::cos(phi), rho * std::sin(phi));
      r.emplace_back(rho * std::cos(phi), -rho * std::sin(phi));
    } else {
      r.emplace_back(rho * std::cos(phi), 0.0);
    }
  }
  return smdiff::RootSet(std::move(r));
}

/// Independent product of (x - r) in complex arithmetic, highest degree last.
inline std::vector<smdiff::Complex> naive_poly(const smdiff::RootSet& roots) {
  std::vector<smdiff::Complex> c{1.0};
  for (smdiff::Complex r : roots) {
    std::vector<smdiff::Complex> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  return c;
}

}  // namespace testing
