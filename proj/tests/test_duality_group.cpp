#include <doctest.h>

#include "emd/duality_group.hpp"
#include "emd/linalg.hpp"
#include "emd/symplectic.hpp"
#include "support.hpp"

using namespace emd;
using emd::testing::for_all;
using emd::testing::max_abs;
using emd::testing::uniform;

namespace {

// Oracle: L_xi G by central differences of both the metric and the field.
double killing_residual_fd(const KillingField& xi, const Vec& p) {
    const double h = 1e-5;
    const int d = xi.chart.dim;
    const Mat G = xi.chart.metric(p);
    Mat L = Mat::Zero(d, d);
    const Vec v = xi.at(p);
    for (int k = 0; k < d; ++k) {
        Vec e = Vec::Zero(d);
        e[k] = h;
        const Mat dG = (xi.chart.metric(p + e) - xi.chart.metric(p - e)) / (2 * h);
        const Vec dxi = (xi.at(p + e) - xi.at(p - e)) / (2 * h);  // d_k xi
        L += v[k] * dG;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == k) L(i, j) += (G.row(j) * dxi)(0);
                if (j == k) L(i, j) += (G.row(i) * dxi)(0);
            }
    }
    return L.cwiseAbs().maxCoeff();
}

// Oracle: stabilizer of i Id by brute force is {X in sp : X J0 = J0 X}.
int commutant_dim_oracle(int n) {
    const Mat J0 = gamma({Mat::Zero(n, n), Mat::Identity(n, n)});
    const auto B = sp_basis(n);
    Mat S(4 * n * n, static_cast<Eigen::Index>(B.size()));
    for (std::size_t k = 0; k < B.size(); ++k) S.col(static_cast<Eigen::Index>(k)) = (B[k] * J0 - J0 * B[k]).reshaped();
    return static_cast<int>(B.size()) - numerical_rank(S);
}

}  // namespace

TEST_CASE("killing_basis") {
    const ScalarChart H;
    CHECK(killing_basis(H).size() == 3);
    ScalarChart flat1{MetricKind::Flat, 1};
    CHECK(killing_basis(flat1).size() == 1);
    ScalarChart flat3{MetricKind::Flat, 3};
    CHECK(killing_basis(flat3).size() == 6);
    for (const auto& chart : {H, flat1, flat3}) {
        const auto pts = sample_points(chart, 100, 3);
        for (const auto& xi : killing_basis(chart))
            for (const auto& p : pts) {
                CHECK(killing_residual(xi, p) <= 1e-8);
                CHECK(killing_residual_fd(xi, p) <= 1e-8);
            }
    }
    // Negative control: a non-Killing field is detected by both.
    KillingField bad{"bad", H, {Expr::coord(0), Expr::num(0)}};
    CHECK(killing_residual(bad, Vec{{0.1, 1.0}}) > 0.1);
    CHECK(killing_residual_fd(bad, Vec{{0.1, 1.0}}) > 0.1);
}

TEST_CASE("sample points are deterministic and in the box") {
    const auto a = sample_points(ScalarChart{}, 16);
    const auto b = sample_points(ScalarChart{}, 16);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(max_abs(a[k] - b[k]) == 0.0);
        CHECK(a[k][0] >= -1.0);
        CHECK(a[k][0] <= 1.0);
        CHECK(a[k][1] >= 0.5);
        CHECK(a[k][1] <= 2.0);
    }
}

TEST_CASE("stabilizer dimensions of the builtins") {
    const auto S = sample_points(ScalarChart{}, 32);
    for (int n = 1; n <= 3; ++n) {
        const auto r = stab_sp_algebra(constant_i(n), S);
        CHECK(r.dim_stab_sp == n * n);
        CHECK(r.dim_stab_sp == commutant_dim_oracle(n));
        CHECK(r.residual <= 1e-8);
        const Mat J0 = gamma({Mat::Zero(n, n), Mat::Identity(n, n)});
        for (const auto& X : r.basis) CHECK(max_abs(X * J0 - J0 * X) <= 1e-8);
        CHECK(r.prefix_dims == std::vector<int>{n * n, n * n, n * n});
    }
    CHECK(stab_sp_algebra(builtin("identity-tau"), S).dim_stab_sp == 0);
    CHECK(stab_sp_algebra(builtin("t3"), S).dim_stab_sp == 0);

    const auto ad = stab_sp_algebra(builtin("axio-dilaton"), S);
    REQUIRE(ad.dim_stab_sp == 1);
    CHECK(ad.residual <= 1e-8);
    CHECK(diagonal_rotation_residual(ad.basis[0]) <= 1e-8);
    // Hand solution: X = [[0, B], [-B, 0]] with B = [[0,1],[1,0]] up to scale.
    Mat X = Mat::Zero(4, 4);
    X(0, 3) = X(1, 2) = 1;
    X(2, 1) = X(3, 0) = -1;
    X /= X.norm();
    const Mat& Y = ad.basis[0];
    CHECK(std::min(max_abs(Y - X), max_abs(Y + X)) <= 1e-8);
}

TEST_CASE("stabilizer warnings") {
    const auto r = stab_sp_algebra(builtin("identity-tau"), sample_points(ScalarChart{}, 4));
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("property: stabilizer elements exponentiate to duality transformations") {
    const auto S = sample_points(ScalarChart{}, 16);
    for (const auto& name : {"constant-i:2", "axio-dilaton"}) {
        const Model m = builtin(name);
        const auto r = stab_sp_algebra(m, S);
        for (const auto& X : r.basis)
            for (double t : {0.1, 0.5, 1.0}) {
                const Mat A = expm(t * X);
                CHECK(sp_check(A, 1e-10).ok);
                CHECK(check_uduality_pair(ChartMap::identity(m.chart), A, m, S) <= 1e-8);
            }
    }
}

TEST_CASE("lifts") {
    const auto S = sample_points(ScalarChart{}, 16);
    const Model id = builtin("identity-tau");
    const auto fields = killing_basis(id.chart);
    const auto l0 = lift_killing_field(id, fields[0], S);
    CHECK(l0.lifted);
    Mat want = Mat::Zero(2, 2);
    want(1, 0) = 1;
    CHECK(max_abs(l0.X - want) <= 1e-10);

    const Model t3 = builtin("t3");
    for (const auto& xi : killing_basis(t3.chart)) {
        const auto l = lift_killing_field(t3, xi, S);
        CHECK_MESSAGE(l.lifted, xi.name << " residual " << l.residual);
        CHECK(sp_algebra_violation(l.X) <= 1e-12);
    }

    const Model c = builtin("constant-i");
    const auto lc = lift_killing_field(c, fields[0], S);
    CHECK(lc.lifted);
    CHECK(max_abs(lc.X) <= 1e-12);

    // No lift: a field that is not an isometry direction of N for identity-tau.
    KillingField bad{"bad", id.chart, {Expr::coord(0) * Expr::coord(1), Expr::num(0)}};
    CHECK_FALSE(lift_killing_field(id, bad, S).lifted);
}

TEST_CASE("property: lifts are unique modulo the stabilizer") {
    const Model ad = builtin("axio-dilaton");
    const auto S1 = sample_points(ad.chart, 16, 0);
    const auto S2 = sample_points(ad.chart, 16, 101);
    const auto stab = stab_sp_algebra(ad, S1);
    Mat span(16, static_cast<Eigen::Index>(stab.basis.size()));
    for (std::size_t k = 0; k < stab.basis.size(); ++k) span.col(static_cast<Eigen::Index>(k)) = stab.basis[k].reshaped();
    for (const auto& xi : killing_basis(ad.chart)) {
        const auto a = lift_killing_field(ad, xi, S1);
        const auto b = lift_killing_field(ad, xi, S2);
        REQUIRE(a.lifted);
        REQUIRE(b.lifted);
        // add a stabilizer element to one lift; the difference must stay in the span
        const Vec diff = (a.X + 0.37 * stab.basis[0] - b.X).reshaped();
        const Vec coef = span.colPivHouseholderQr().solve(diff);
        CHECK((span * coef - diff).norm() <= 1e-8);
    }
}

TEST_CASE("U-duality algebra dimensions") {
    const auto S = sample_points(ScalarChart{}, 16);
    struct Case {
        const char* name;
        int u, stab, iso;
    };
    for (const Case& c : {Case{"constant-i", 4, 1, 3}, Case{"identity-tau", 3, 0, 3}, Case{"axio-dilaton", 4, 1, 3},
                          Case{"t3", 3, 0, 3}}) {
        const auto r = uduality_algebra(builtin(c.name), S);
        CHECK_MESSAGE(r.dim_u == c.u, c.name);
        CHECK_MESSAGE(r.dim_stab_sp == c.stab, c.name);
        CHECK_MESSAGE(r.dim_iso_pr == c.iso, c.name);
        CHECK(r.exactness_gap == 0);
        for (const auto& l : r.lift_table) CHECK(l.lifted);
    }
}

TEST_CASE("check_uduality_pair") {
    const auto S = sample_points(ScalarChart{}, 16);
    const Model id = builtin("identity-tau");
    CHECK(check_uduality_pair(ChartMap::identity(id.chart), Mat::Identity(2, 2), id, S) == 0.0);
    const ChartMap shift = ChartMap::mobius(1, 0, 1, 1);
    Mat A(2, 2);
    A << 1, 0, 1, 1;
    CHECK(check_uduality_pair(shift, A, id, S) <= 1e-12);
    CHECK(check_uduality_pair(shift, Mat::Identity(2, 2), id, S) == doctest::Approx(1.0));
    for (const auto& name : builtin_names()) CHECK(minus_identity_residual(builtin(name), S) == 0.0);
}

TEST_CASE("property: chart maps") {
    for_all(50, 5, [](std::mt19937_64& rng, int) {
        const Mat A = random_sp_group(1, rng, 0.6);
        const ChartMap f = ChartMap::mobius(A(0, 0), A(0, 1), A(1, 0), A(1, 1));
        CHECK(f.is_isometry(1e-10));
        const Vec p{{uniform(rng, -1, 1), uniform(rng, 0.5, 2)}};
        const double h = 1e-6;
        Mat fd(2, 2);
        for (int k = 0; k < 2; ++k) {
            Vec e = Vec::Zero(2);
            e[k] = h;
            fd.col(k) = (f.apply(p + e) - f.apply(p - e)) / (2 * h);
        }
        CHECK(max_abs(fd - f.jacobian(p)) <= 1e-6 * std::max(1.0, max_abs(fd)));
        // Isometry: J^T G(f p) J = G(p)
        const ScalarChart H;
        const Mat J = f.jacobian(p);
        CHECK(max_abs(J.transpose() * H.metric(f.apply(p)) * J - H.metric(p)) <= 1e-9 * max_abs(H.metric(p)));
    });
}
