#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pinnbench {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Eigen::Index;

// Raised when an arithmetic step produces a non-finite value or would
// (division by a magnitude below kDivisionFloor, log/sqrt outside domain).
// Carries enough context to name the offending operation.
struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kDivisionFloor = 1e-300;

inline double checked_div(double a, double b, const char* where) {
  if (std::abs(b) < kDivisionFloor)
    throw EvalError(std::string(where) + ": division by near-zero value");
  return a / b;
}

// Deterministic RNG. mt19937_64 has a standardized sequence; the
// distributions below avoid std::*_distribution, whose output is
// implementation-defined, so streams are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // splitmix64 warmup decorrelates small seeds
    for (int i = 0; i < 4; ++i) next_raw();
  }

  std::uint64_t next_raw() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return double(next_raw() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one value per call, cached pair for determinism
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t uniform_index(std::uint64_t n) { return next_raw() % n; }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::logic_error(msg);
}

// Deterministic stream splitter: every consumer of randomness derives its own
// seed from the run seed and a fixed salt.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  Rng r(base ^ (0x9e3779b97f4a7c15ull * (salt + 0x51ed2701ull)));
  return r.next_raw();
}

}  // namespace pinnbench
