#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "emd/stencil.hpp"
#include "support.hpp"

using namespace emd;

namespace {

std::vector<SimdBackend> available() {
    std::vector<SimdBackend> out;
    for (SimdBackend b : {SimdBackend::Scalar, SimdBackend::Avx2, SimdBackend::Neon})
        if (backend_available(b)) out.push_back(b);
    return out;
}

std::size_t flat(const Shape4& n, const std::array<int, 4>& i) {
    return ((static_cast<std::size_t>(i[0]) * n[1] + i[1]) * n[2] + i[2]) * n[3] + i[3];
}

// Oracle: textbook stencils written per node with explicit neighbour indexing.
std::vector<double> oracle(const std::vector<double>& f, const Shape4& n, int axis, double h, int order) {
    std::vector<double> out(f.size());
    std::array<int, 4> i{};
    for (i[0] = 0; i[0] < n[0]; ++i[0])
        for (i[1] = 0; i[1] < n[1]; ++i[1])
            for (i[2] = 0; i[2] < n[2]; ++i[2])
                for (i[3] = 0; i[3] < n[3]; ++i[3]) {
                    auto at = [&](int off) {
                        auto j = i;
                        j[axis] += off;
                        return f[flat(n, j)];
                    };
                    const int k = i[axis], L = n[axis];
                    double v;
                    if (order == 1) {
                        if (k == 0) v = -1.5 * at(0) + 2.0 * at(1) - 0.5 * at(2);
                        else if (k == L - 1) v = 1.5 * at(0) - 2.0 * at(-1) + 0.5 * at(-2);
                        else v = 0.5 * (at(1) - at(-1));
                        v /= h;
                    } else {
                        if (k == 0) v = 2 * at(0) - 5 * at(1) + 4 * at(2) - at(3);
                        else if (k == L - 1) v = 2 * at(0) - 5 * at(-1) + 4 * at(-2) - at(-3);
                        else v = at(1) - 2 * at(0) + at(-1);
                        v /= h * h;
                    }
                    out[flat(n, i)] = v;
                }
    return out;
}

}  // namespace

TEST_CASE("backend selection") {
    CHECK(backend_available(SimdBackend::Scalar));
    CHECK(backend_available(default_backend()));
    CHECK(backend_name(SimdBackend::Avx2) == "avx2");
}

TEST_CASE("property: every backend is bitwise equal to the scalar kernel") {
    const auto backs = available();
    emd::testing::for_all(60, 11, [&](std::mt19937_64& rng, int) {
        Shape4 n;
        for (auto& x : n) x = 4 + static_cast<int>(rng() % 6);
        std::vector<double> f(node_count(n));
        for (auto& x : f) x = emd::testing::gauss(rng) * std::exp(emd::testing::uniform(rng, -5, 5));
        const double h = emd::testing::uniform(rng, 0.01, 1.0);
        for (int axis = 0; axis < 4; ++axis)
            for (int order = 1; order <= 2; ++order) {
                std::vector<double> ref(f.size());
                (order == 1 ? diff1 : diff2)(f.data(), ref.data(), n, axis, h, SimdBackend::Scalar);
                for (SimdBackend b : backs) {
                    std::vector<double> got(f.size());
                    (order == 1 ? diff1 : diff2)(f.data(), got.data(), n, axis, h, b);
                    CHECK(std::memcmp(got.data(), ref.data(), f.size() * sizeof(double)) == 0);
                }
            }
    });
}

TEST_CASE("kernel tails shorter than a vector") {
    for (SimdBackend b : available())
        for (std::size_t len = 0; len < 11; ++len) {
            std::vector<double> p(len), m(len), c(len), o1(len, -7), o2(len, -7);
            for (std::size_t k = 0; k < len; ++k) {
                p[k] = 1.0 + k;
                m[k] = 0.5 * k;
                c[k] = 0.25 * k * k;
            }
            kernels::central_diff(p.data(), m.data(), o1.data(), len, 3.0, b);
            kernels::second_diff(p.data(), c.data(), m.data(), o2.data(), len, 3.0, b);
            for (std::size_t k = 0; k < len; ++k) {
                CHECK(o1[k] == (p[k] - m[k]) * 3.0);
                CHECK(o2[k] == ((p[k] - 2.0 * c[k]) + m[k]) * 3.0);
            }
        }
}

TEST_CASE("property: stencils match the per-node oracle") {
    emd::testing::for_all(20, 12, [](std::mt19937_64& rng, int) {
        Shape4 n;
        for (auto& x : n) x = 4 + static_cast<int>(rng() % 4);
        std::vector<double> f(node_count(n));
        for (auto& x : f) x = emd::testing::gauss(rng);
        const double h = 0.3;
        for (int axis = 0; axis < 4; ++axis)
            for (int order = 1; order <= 2; ++order) {
                std::vector<double> got(f.size());
                (order == 1 ? diff1 : diff2)(f.data(), got.data(), n, axis, h, default_backend());
                const auto want = oracle(f, n, axis, h, order);
                for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-11 * (1 + std::abs(want[k])));
            }
    });
}

TEST_CASE("stencils are exact on quadratics, boundaries included") {
    const Shape4 n{5, 6, 7, 8};
    const double h = 0.25;
    std::vector<double> f(node_count(n));
    std::array<int, 4> i{};
    auto q = [](const std::array<double, 4>& x) {
        return 1.0 + 2 * x[0] - x[3] + 0.5 * x[0] * x[0] + 3 * x[1] * x[2] - 0.75 * x[3] * x[3] + x[2] * x[2];
    };
    for (i[0] = 0; i[0] < n[0]; ++i[0])
        for (i[1] = 0; i[1] < n[1]; ++i[1])
            for (i[2] = 0; i[2] < n[2]; ++i[2])
                for (i[3] = 0; i[3] < n[3]; ++i[3])
                    f[flat(n, i)] = q({h * i[0], h * i[1], h * i[2], h * i[3]});
    std::vector<double> d(f.size()), dd(f.size());
    diff2(f.data(), dd.data(), n, 3, h, default_backend());
    diff1(f.data(), d.data(), n, 0, h, default_backend());
    for (i[0] = 0; i[0] < n[0]; ++i[0])
        for (i[1] = 0; i[1] < n[1]; ++i[1])
            for (i[2] = 0; i[2] < n[2]; ++i[2])
                for (i[3] = 0; i[3] < n[3]; ++i[3]) {
                    CHECK(dd[flat(n, i)] == doctest::Approx(-1.5).epsilon(1e-12));
                    CHECK(d[flat(n, i)] == doctest::Approx(2 + h * i[0]).epsilon(1e-12));
                }
}

TEST_CASE("stencil argument checks") {
    std::vector<double> f(3 * 4 * 4 * 4), g(f.size());
    CHECK_THROWS_AS(diff2(f.data(), g.data(), {3, 4, 4, 4}, 0, 0.1, SimdBackend::Scalar), DimensionError);
    CHECK_THROWS_AS(diff1(f.data(), g.data(), {3, 4, 4, 4}, 4, 0.1, SimdBackend::Scalar), DimensionError);
    CHECK_NOTHROW(diff1(f.data(), g.data(), {3, 4, 4, 4}, 0, 0.1, SimdBackend::Scalar));
}
