#include "emd/field_algebra.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace emd {

int levi_civita(int a, int b, int c, int d) {
    const int p[4] = {a, b, c, d};
    int sign = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            if (p[i] == p[j]) return 0;
            if (p[i] > p[j]) sign = -sign;
        }
    return sign;
}

void validate_metric(const Mat4& g) {
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > tol::alg * std::max(1.0, g.cwiseAbs().maxCoeff()))
        throw DomainError("metric is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat4> es(g, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    if (ev.cwiseAbs().minCoeff() <= 1e-14 * scale) throw DomainError("singular metric");
    if (!(ev(0) < 0 && ev(1) > 0)) throw DomainError("metric signature is not (-,+,+,+)");
}

Mat4 raise_both(const Mat4& g_inv, const Mat4& w) { return g_inv * w * g_inv; }

Mat4 hodge2(const Mat4& g, const Mat4& w) {
    const double det = g.determinant();
    if (!(det < 0)) throw DomainError("hodge2 needs a Lorentzian metric (det g < 0)");
    const Mat4 up = raise_both(g.inverse(), w);
    const double vol = std::sqrt(-det);
    Mat4 s = Mat4::Zero();
    for (int m = 0; m < 4; ++m)
        for (int n = m + 1; n < 4; ++n) {
            double acc = 0.0;
            for (int r = 0; r < 4; ++r)
                for (int q = 0; q < 4; ++q) acc += levi_civita(m, n, r, q) * up(r, q);
            s(m, n) = 0.5 * vol * acc;
            s(n, m) = -s(m, n);
        }
    return s;
}

TwoFormBlock hodge(const Mat4& g, const TwoFormBlock& V) {
    TwoFormBlock out;
    out.reserve(V.size());
    for (const auto& w : V) out.push_back(hodge2(g, w));
    return out;
}

TwoFormBlock apply_fiber(const Mat& M, const TwoFormBlock& V) {
    if (M.cols() != static_cast<Eigen::Index>(V.size())) throw DimensionError("fiber matrix does not match block size");
    TwoFormBlock out(static_cast<std::size_t>(M.rows()), Mat4::Zero());
    for (Eigen::Index a = 0; a < M.rows(); ++a)
        for (Eigen::Index b = 0; b < M.cols(); ++b)
            if (M(a, b) != 0.0) out[static_cast<std::size_t>(a)] += M(a, b) * V[static_cast<std::size_t>(b)];
    return out;
}

TwoFormBlock add(const TwoFormBlock& a, const TwoFormBlock& b, double sb) {
    if (a.size() != b.size()) throw DimensionError("block size mismatch");
    TwoFormBlock out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + sb * b[k];
    return out;
}

TwoFormBlock scale(const TwoFormBlock& a, double s) {
    TwoFormBlock out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = s * a[k];
    return out;
}

double max_abs(const TwoFormBlock& V) {
    double m = 0.0;
    for (const auto& w : V) m = std::max(m, w.cwiseAbs().maxCoeff());
    return m;
}

TwoFormBlock zero_block(int size) { return TwoFormBlock(static_cast<std::size_t>(size), Mat4::Zero()); }

TwoFormBlock twisted_star(const Mat4& g, const Mat& J, const TwoFormBlock& V) { return apply_fiber(J, hodge(g, V)); }

SelfDualSplit project_sd(const Mat4& g, const Mat& J, const TwoFormBlock& V) {
    const TwoFormBlock s = twisted_star(g, J, V);
    return {scale(add(V, s), 0.5), scale(add(V, s, -1.0), 0.5)};
}

double twisted_selfduality_residual(const Mat4& g, const Mat& J, const TwoFormBlock& V) {
    return max_abs(add(hodge(g, V), apply_fiber(J, V)));
}

TwoFormBlock assemble_V(const TwoFormBlock& F, const ElectromagneticPair& em, const Mat4& g) {
    const int n = em.n();
    if (static_cast<int>(F.size()) != n) throw DimensionError("F block size does not match nv");
    TwoFormBlock V = F;
    const TwoFormBlock RF = apply_fiber(em.R, F);
    const TwoFormBlock IsF = apply_fiber(em.I, hodge(g, F));
    for (int a = 0; a < n; ++a) V.push_back(RF[static_cast<std::size_t>(a)] - IsF[static_cast<std::size_t>(a)]);
    return V;
}

CTwoFormBlock complexify_plus(const TwoFormBlock& V, const Mat4& g) {
    const TwoFormBlock s = hodge(g, V);
    CTwoFormBlock out(V.size());
    for (std::size_t k = 0; k < V.size(); ++k) out[k] = 0.5 * (V[k].cast<cplx>() - cplx(0, 1) * s[k].cast<cplx>());
    return out;
}

double form_inner(const Mat4& g, const Mat4& a, const Mat4& b) {
    return 0.5 * (a.cwiseProduct(raise_both(g.inverse(), b))).sum();
}

double twisted_pairing(const Mat4& g, const Mat& J, const TwoFormBlock& A, const TwoFormBlock& B) {
    if (A.size() != B.size() || static_cast<Eigen::Index>(A.size()) != J.rows())
        throw DimensionError("twisted_pairing: block sizes do not match");
    const Mat Q = omega(half_dim(J)) * J;
    const Mat4 gi = g.inverse();
    double acc = 0.0;
    for (std::size_t a = 0; a < A.size(); ++a)
        for (std::size_t b = 0; b < B.size(); ++b) {
            const double q = Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (q != 0.0) acc += q * 0.5 * A[a].cwiseProduct(raise_both(gi, B[b])).sum();
        }
    return acc;
}

Mat4 oslash_Q(const Mat4& g, const Mat& J, const TwoFormBlock& V, const TwoFormBlock& W) {
    if (V.size() != W.size() || static_cast<Eigen::Index>(V.size()) != J.rows())
        throw DimensionError("oslash_Q: block sizes do not match");
    const Mat Q = omega(half_dim(J)) * J;
    const Mat4 gi = g.inverse();
    Mat4 T = Mat4::Zero();
    for (std::size_t a = 0; a < V.size(); ++a)
        for (std::size_t b = 0; b < W.size(); ++b) {
            const double q = Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (q != 0.0) T += q * V[a] * gi * W[b].transpose();
        }
    return T;
}

Mat4 stress_gauge(const Mat4& g, const Mat& J, const TwoFormBlock& V) {
    const Mat4 T = oslash_Q(g, J, V, V);
    return 0.5 * (T + T.transpose());
}

Mat4 stress_gauge_RI(const Mat4& g, const ElectromagneticPair& em, const TwoFormBlock& F) {
    const Mat4 gi = g.inverse();
    Mat4 T = Mat4::Zero();
    double trace = 0.0;
    for (int a = 0; a < em.n(); ++a)
        for (int b = 0; b < em.n(); ++b) {
            const double I = em.I(a, b);
            const Mat4& Fa = F[static_cast<std::size_t>(a)];
            const Mat4& Fb = F[static_cast<std::size_t>(b)];
            T += 2.0 * I * Fa * gi * Fb.transpose();
            trace += I * Fa.cwiseProduct(raise_both(gi, Fb)).sum();
        }
    return T - 0.5 * trace * g;
}

Mat4 stress_scalar(const Mat4& g, const Mat& G, const Mat& dphi) {
    if (dphi.rows() != 4 || dphi.cols() != G.rows()) throw DimensionError("stress_scalar: dphi must be 4 x n_s");
    const Mat4 P = dphi * G * dphi.transpose();
    const double tr = (g.inverse().cwiseProduct(P)).sum();
    Mat4 T = P - 0.5 * tr * g;
    return 0.5 * (T + T.transpose());
}

}  // namespace emd
