#include "emd/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "emd/linalg.hpp"
#include "emd/symplectic.hpp"

namespace emd {

Mat evaluate_word(const BundlePresentation& P, const std::vector<int>& word) {
    const auto dim = 2 * P.nv;
    Mat W = Mat::Identity(dim, dim);
    for (int s : word) {
        const int k = std::abs(s);
        if (k < 1 || k > static_cast<int>(P.generators.size()))
            throw DomainError("relation word refers to generator " + std::to_string(k));
        const Mat& H = P.generators[static_cast<std::size_t>(k - 1)];
        W = W * (s > 0 ? H : sp_inverse(H));
    }
    return W;
}

PresentationDiagnostics presentation_check(const BundlePresentation& P, double tol) {
    PresentationDiagnostics d;
    d.ok = true;
    for (const auto& H : P.generators) {
        if (H.rows() != 2 * P.nv || H.cols() != 2 * P.nv) throw DimensionError("generator size does not match nv");
        const double v = sp_check(H, tol).violation;
        d.generator_violation.push_back(v);
        d.ok = d.ok && v <= tol;
    }
    const Mat Id = Mat::Identity(2 * P.nv, 2 * P.nv);
    for (const auto& w : P.relations) {
        const double v = (evaluate_word(P, w) - Id).cwiseAbs().maxCoeff();
        d.relation_violation.push_back(v);
        d.ok = d.ok && v <= tol;
    }
    return d;
}

namespace {

AlgebraReport commutant(int n, const std::vector<Mat>& constraints) {
    const auto basis = sp_basis(n);
    const auto d2 = static_cast<Eigen::Index>(4 * n * n);
    Mat S(d2 * static_cast<Eigen::Index>(constraints.size()), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t c = 0; c < constraints.size(); ++c)
        for (std::size_t k = 0; k < basis.size(); ++k)
            S.block(static_cast<Eigen::Index>(c) * d2, static_cast<Eigen::Index>(k), d2, 1) =
                (basis[k] * constraints[c] - constraints[c] * basis[k]).reshaped();
    const NullSpace ns = null_space(S);
    AlgebraReport r;
    r.dim = static_cast<int>(ns.basis.cols());
    for (Eigen::Index c = 0; c < ns.basis.cols(); ++c) {
        Mat X = sp_from_coords(n, ns.basis.col(c));
        X /= X.norm();
        for (const auto& H : constraints) r.residual = std::max(r.residual, (X * H - H * X).cwiseAbs().maxCoeff());
        r.basis.push_back(X);
    }
    return r;
}

}  // namespace

AlgebraReport centralizer_algebra(const BundlePresentation& P) { return commutant(P.nv, P.generators); }

AlgebraReport autb_theta_algebra(const BundlePresentation& P, const Mat& J0) {
    if (J0.rows() != 2 * P.nv) throw DimensionError("taming size does not match nv");
    if (!check_taming(J0).ok) throw DomainError("J0 is not a compatible taming");
    auto cons = P.generators;
    cons.push_back(J0);
    return commutant(P.nv, cons);
}

std::vector<double> conjugacy_invariants(const BundlePresentation& P, int max_len) {
    if (max_len < 1) throw DomainError("max_word_len must be >= 1");
    if (max_len > kMaxWordLength) throw DomainError("max_word_len is capped at " + std::to_string(kMaxWordLength));
    const auto dim = 2 * P.nv;
    std::vector<double> traces;
    const int g = static_cast<int>(P.generators.size());
    if (g == 0) return {static_cast<double>(dim)};
    std::vector<Mat> letters;
    std::vector<int> labels;
    for (int k = 1; k <= g; ++k) {
        letters.push_back(P.generators[static_cast<std::size_t>(k - 1)]);
        labels.push_back(k);
        letters.push_back(sp_inverse(P.generators[static_cast<std::size_t>(k - 1)]));
        labels.push_back(-k);
    }
    std::function<void(const Mat&, int, int)> grow = [&](const Mat& W, int last, int len) {
        for (std::size_t a = 0; a < letters.size(); ++a) {
            if (labels[a] == -last) continue;  // freely reduced
            const Mat next = W * letters[a];
            traces.push_back(next.trace());
            if (len + 1 < max_len) grow(next, labels[a], len + 1);
        }
    };
    grow(Mat::Identity(dim, dim), 0, 0);
    std::sort(traces.begin(), traces.end());
    return traces;
}

std::string compare_invariants(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return "distinct";
    for (std::size_t k = 0; k < a.size(); ++k)
        if (std::abs(a[k] - b[k]) > tol * std::max(1.0, std::abs(a[k]))) return "distinct";
    return "not distinguished";
}

}  // namespace emd
