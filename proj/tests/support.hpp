#pragma once

// Independent references for the unit tests: brute-force qubit registers and
// seeded random states.

#include "spintel/spin_core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spintel::reference {

inline Vec random_vector(int dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(g(gen), g(gen));
    return v / v.norm();
}

inline EnsembleState random_state(int n, std::uint64_t seed) { return {n, random_vector(n + 1, seed)}; }

// 2^N register, bit i set = qubit i up. Collective operators are sums of Pauli matrices.
struct QubitRegister {
    int n;

    int dim() const { return 1 << n; }

    Vec product(BlochAngles a) const {
        const cplx up = std::cos(a.theta / 2) * std::polar(1.0, -a.phi / 2);
        const cplx dn = std::sin(a.theta / 2) * std::polar(1.0, a.phi / 2);
        Vec v(dim());
        for (int s = 0; s < dim(); ++s) {
            cplx amp = 1.0;
            for (int i = 0; i < n; ++i) amp *= (s >> i) & 1 ? up : dn;
            v[s] = amp;
        }
        return v;
    }

    // Normalized symmetric state with k qubits up.
    Vec dicke(int k) const {
        Vec v = Vec::Zero(dim());
        for (int s = 0; s < dim(); ++s)
            if (__builtin_popcount(static_cast<unsigned>(s)) == k) v[s] = 1.0;
        return v / v.norm();
    }

    Mat collective(Axis axis) const {
        Mat m = Mat::Zero(dim(), dim());
        for (int s = 0; s < dim(); ++s)
            for (int i = 0; i < n; ++i) {
                const bool up = (s >> i) & 1;
                if (axis == Axis::Z) {
                    m(s, s) += up ? 1.0 : -1.0;
                } else {
                    const int t = s ^ (1 << i);
                    // sigma^y |up> = i|down>, sigma^y |down> = -i|up>.
                    m(t, s) += axis == Axis::X ? cplx(1.0) : (up ? cplx(0.0, 1.0) : cplx(0.0, -1.0));
                }
            }
        return m;
    }

    SpinVector expectation(const Vec& v) const {
        return {v.dot(collective(Axis::X) * v).real(), v.dot(collective(Axis::Y) * v).real(),
                v.dot(collective(Axis::Z) * v).real()};
    }
};

}  // namespace spintel::reference
