#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace frao {

// Deterministic random source. Uses mt19937_64 plus an explicit Box-Muller
// transform so streams are reproducible bit-for-bit across platforms and
// standard-library versions (std::normal_distribution is not pinned).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::span<double> out) {
        for (double& x : out) x = normal();
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace frao
