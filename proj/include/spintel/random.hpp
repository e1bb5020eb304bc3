#pragma once

// Portable seeded sampling: mt19937_64 output is specified by the standard,
// the conversion to [0, 1) below is fixed here rather than left to the library.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace spintel {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    //! Inverse-CDF draw from unnormalized nonnegative weights.
    std::size_t pick(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::domain_error("Rng::pick: weights have no mass");
        const double u = uniform() * total;
        double acc = 0.0;
        std::size_t last = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            acc += weights[i];
            last = i;
            if (u < acc) return i;
        }
        return last;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace spintel
