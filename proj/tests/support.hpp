#pragma once

#include <cstdint>
#include <random>

#include "emd/common.hpp"

namespace emd::testing {

// Property runner: calls body(rng, case_index) `cases` times from a fixed seed.
template <class Body>
void for_all(int cases, std::uint64_t seed, Body&& body) {
    std::mt19937_64 rng(seed);
    for (int k = 0; k < cases; ++k) body(rng, k);
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() ? static_cast<double>(m.cwiseAbs().maxCoeff()) : 0.0;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gauss(std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Lorentzian metric: eta plus a small symmetric perturbation.
inline Mat4 random_lorentz_metric(std::mt19937_64& rng, double eps = 0.1) {
    Mat4 g = Mat4::Zero();
    g.diagonal() << -1, 1, 1, 1;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
            const double d = eps * gauss(rng);
            g(a, b) += d;
            if (a != b) g(b, a) += d;
        }
    return g;
}

inline Mat4 random_two_form(std::mt19937_64& rng) {
    Mat4 w = Mat4::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            w(a, b) = gauss(rng);
            w(b, a) = -w(a, b);
        }
    return w;
}

}  // namespace emd::testing
