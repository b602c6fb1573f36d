#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "quadrange/matrix.hpp"

namespace quadrange {

// Seeded generator with hand-rolled distributions. mt19937_64 output is fully
// specified by the standard and the transforms below avoid the library
// distributions (whose algorithms are implementation-defined), so a seed pins
// the exact stream everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive on both ends.
  int uniform_int(int lo, int hi) {
    const double u = uniform();
    int v = lo + static_cast<int>(u * (static_cast<double>(hi) - lo + 1.0));
    return std::min(v, hi);
  }

  // Box-Muller; the pair is cached so draws come two per transform.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec gaussian_vec(int n) {
    Vec v(n);
    for (double& x : v) x = gaussian();
    return v;
  }

  Vec unit_vec(int n) {
    for (;;) {
      Vec v = gaussian_vec(n);
      const double nv = norm2(v);
      if (nv > 1e-150) {
        for (double& x : v) x /= nv;
        return v;
      }
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace quadrange
