#include <doctest.h>

#include "emd/model.hpp"
#include "emd/symplectic.hpp"
#include "support.hpp"

using namespace emd;
using emd::testing::for_all;
using emd::testing::max_abs;
using emd::testing::uniform;

namespace {

Vec pt(double x, double y) { return Vec{{x, y}}; }

// Oracle: the t3 imaginary part written out in real coordinates.
Mat t3_im_oracle(double x, double y) {
    Mat I(2, 2);
    I << y * y * y + 3 * x * x * y, -3 * x * y, -3 * x * y, 3 * y;
    return I;
}

// Random AST generator over the full grammar; literals are non-negative as in parsed text.
Expr random_expr(std::mt19937_64& rng, int depth, int ncoords) {
    std::uniform_int_distribution<int> leaf(0, 4), node(0, 6);
    if (depth == 0 || std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
        switch (leaf(rng)) {
            case 0: return Expr::num(std::uniform_int_distribution<int>(0, 9)(rng) * 0.5);
            case 1: return Expr::imag();
            case 2: return Expr::tau();
            case 3: return Expr::conj_tau();
            default: return Expr::coord(std::uniform_int_distribution<int>(0, ncoords - 1)(rng));
        }
    }
    const Expr a = random_expr(rng, depth - 1, ncoords);
    switch (node(rng)) {
        case 0: return -a;
        case 1: return a + random_expr(rng, depth - 1, ncoords);
        case 2: return a - random_expr(rng, depth - 1, ncoords);
        case 3: return a * random_expr(rng, depth - 1, ncoords);
        case 4: return a / random_expr(rng, depth - 1, ncoords);
        case 5: return pow(a, std::uniform_int_distribution<int>(-3, 3)(rng));
        default: return a;
    }
}

}  // namespace

TEST_CASE("parse examples") {
    const Model id = parse_model("nv=1\nN[1,1] = tau");
    CHECK(id.nv == 1);
    CHECK(structurally_equal(id.entry(0, 0), Expr::tau()));

    const Model ad = parse_model("N[1,1] = tau; N[2,2] = -1/tau; N[1,2] = 0");
    CHECK(ad.nv == 2);
    CHECK(ad.chart.kind == MetricKind::Poincare);
    const CMat v = eval_period(ad, pt(0.3, 1.1));
    const cplx t(0.3, 1.1);
    CHECK(std::abs(v(0, 0) - t) < 1e-15);
    CHECK(std::abs(v(1, 1) + 1.0 / t) < 1e-15);
    CHECK(std::abs(v(0, 1)) == 0.0);

    try {
        parse_model("nv=1\nN[1,1] = tau +");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 15);  // one past the last character
    }
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_model("N[1,1] = sin(tau)"), ParseError);
    CHECK_THROWS_AS(parse_model("N[2,1] = tau\nN[1,1]=tau\nN[2,2]=tau"), ParseError);
    CHECK_THROWS_AS(parse_model("nv=1\nN[1,1] = tau\nN[2,2] = tau"), ParseError);
    CHECK_THROWS_AS(parse_model("N[1,1] = tau\nN[1,1] = tau"), ParseError);
    CHECK_THROWS_AS(parse_model("N[1,1] = tau^1.5"), ParseError);
    CHECK_THROWS_AS(parse_model("chart=flat\ndim=1\nN[1,1] = tau"), ParseError);
    CHECK_THROWS_AS(parse_model("chart=sphere\nN[1,1] = tau"), ParseError);
    try {
        parse_model("# comment\nN[1,1] = tau * (1 + foo)");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 21);
    }
}

TEST_CASE("builtins") {
    const Model ad = builtin("axio-dilaton");
    CHECK(ad.nv == 2);
    CHECK(ad.chart.kind == MetricKind::Poincare);
    CHECK(max_abs(eval_period(ad, pt(0, 1)) - cplx(0, 1) * CMat::Identity(2, 2)) < 1e-15);

    const Model t3 = builtin("t3");
    CHECK(max_abs(eval_period(t3, pt(0, 1)).imag() - t3_im_oracle(0, 1)) < 1e-14);
    Mat want(2, 2);
    want << 8, 0, 0, 6;
    CHECK(max_abs(eval_period(t3, pt(0, 2)).imag() - want) < 1e-13);

    const Model c3 = builtin("constant-i:3");
    CHECK(c3.nv == 3);
    CHECK(max_abs(eval_period(c3, pt(-0.4, 0.7)) - cplx(0, 1) * CMat::Identity(3, 3)) == 0.0);
    CHECK_THROWS_AS(builtin("unknown"), LookupError);
    CHECK_THROWS_AS(builtin("constant-i:x"), LookupError);
}

TEST_CASE("property: t3 imaginary part matches the closed form and is positive") {
    const Model t3 = builtin("t3");
    for_all(300, 7, [&](std::mt19937_64& rng, int) {
        const double x = uniform(rng, -3, 3), y = uniform(rng, 0.05, 4);
        const Mat im = eval_period(t3, pt(x, y)).imag();
        CHECK(max_abs(im - t3_im_oracle(x, y)) <= 1e-12 * std::max(1.0, max_abs(im)));
        CHECK(im.trace() > 0);
        CHECK(im.determinant() > 0);
    });
}

TEST_CASE("builtins are Siegel-valued on a 32x32 sample of the domain") {
    for (const auto& name : builtin_names()) {
        const Model m = builtin(name);
        for (int a = 0; a < 32; ++a)
            for (int b = 0; b < 32; ++b) {
                const Vec p = pt(-1.0 + 2.0 * a / 31.0, 0.5 + 1.5 * b / 31.0);
                const auto sc = siegel_check(eval_period(m, p));
                CHECK(sc.ok);
                CHECK(sc.asymmetry == 0.0);
            }
    }
}

TEST_CASE("poles and domain") {
    const Model ad = builtin("axio-dilaton");
    CHECK_THROWS_AS(eval_period_raw(ad, pt(0, 0)), PoleError);
    CHECK_THROWS_AS(eval_period(ad, pt(0, -1)), ModelInvalidError);
    const Model bad = parse_model("N[1,1] = -tau");
    CHECK_THROWS_AS(eval_period(bad, pt(0, 1)), ModelInvalidError);
}

TEST_CASE("derivatives") {
    const Model id = builtin("identity-tau");
    CHECK(std::abs(eval_period_derivative(id, pt(0.2, 1), Vec{{1, 0}})(0, 0) - 1.0) == 0.0);
    CHECK(std::abs(eval_period_derivative(id, pt(0.2, 1), Vec{{0, 1}})(0, 0) - cplx(0, 1)) == 0.0);

    // Oracle: central differences with h = 1e-5.
    const Model t3 = builtin("t3");
    const double h = 1e-5;
    const CMat fd = (eval_period(t3, pt(h, 1)) - eval_period(t3, pt(-h, 1))) / (2 * h);
    CHECK(max_abs(eval_period_derivative(t3, pt(0, 1), Vec{{1, 0}}) - fd) < 1e-8);
}

TEST_CASE("property: tree derivative matches central differences on builtins") {
    for (const auto& name : builtin_names()) {
        const Model m = builtin(name);
        for_all(50, 9, [&](std::mt19937_64& rng, int) {
            const Vec p = pt(uniform(rng, -1, 1), uniform(rng, 0.5, 2));
            const Vec v{{uniform(rng, -1, 1), uniform(rng, -1, 1)}};
            const double h = 1e-5;
            const CMat fd = (eval_period(m, p + h * v) - eval_period(m, p - h * v)) / (2 * h);
            const CMat an = eval_period_derivative(m, p, v);
            CHECK(max_abs(fd - an) <= 1e-7 * std::max(1.0, max_abs(an)));
        });
    }
}

TEST_CASE("property: printer/parser round trip") {
    for (const auto& name : builtin_names()) {
        const Model m = builtin(name);
        CHECK(structurally_equal(parse_model(print_model(m)), m));
    }
    for_all(100, 10, [](std::mt19937_64& rng, int) {
        const Expr e = random_expr(rng, 5, 3);
        const std::string s = to_string(e);
        const Expr back = parse_expr(s);
        CHECK_MESSAGE(structurally_equal(back, e), s);
        CHECK(to_string(back) == s);
    });
}

TEST_CASE("property: derivative of random expressions matches central differences") {
    int checked = 0;
    for_all(200, 12, [&](std::mt19937_64& rng, int) {
        const Expr e = random_expr(rng, 4, 3);
        const Vec x{{uniform(rng, -1, 1), uniform(rng, 0.5, 2), uniform(rng, -1, 1)}};
        for (int k = 0; k < 3; ++k) {
            try {
                const cplx an = evaluate(derivative(e, k), x);
                Vec xp = x, xm = x;
                const double h = 1e-6;
                xp[k] += h;
                xm[k] -= h;
                const cplx fd = (evaluate(e, xp) - evaluate(e, xm)) / (2 * h);
                if (std::abs(an) > 1e4) continue;  // near a pole; finite differences are meaningless
                CHECK_MESSAGE(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)), to_string(e));
                ++checked;
            } catch (const PoleError&) {
            }
        }
    });
    CHECK(checked > 300);
}
