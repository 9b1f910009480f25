// Deterministic random draws. std::uniform_real_distribution is not pinned
// across standard library versions, so uniforms are mapped from raw 64-bit
// output directly; identical seeds give identical fields on any platform.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace peflow {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  Eigen::VectorXd uniform_field(int n, double a, double b) {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = uniform(a, b);
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace peflow
