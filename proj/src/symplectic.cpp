#include "emd/symplectic.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace emd {

Mat omega(int n) {
    Mat W = Mat::Zero(2 * n, 2 * n);
    W.topRightCorner(n, n) = -Mat::Identity(n, n);
    W.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return W;
}

int half_dim(const Mat& A) {
    if (A.rows() != A.cols() || A.rows() % 2 != 0 || A.rows() == 0)
        throw DimensionError("expected a square matrix of even dimension, got " +
                             std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    return static_cast<int>(A.rows() / 2);
}

Blocks blocks(const Mat& A) {
    const int n = half_dim(A);
    return {A.topLeftCorner(n, n), A.topRightCorner(n, n), A.bottomLeftCorner(n, n),
            A.bottomRightCorner(n, n)};
}

Mat from_blocks(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
    const auto n = a.rows();
    Mat A(2 * n, 2 * n);
    A << a, b, c, d;
    return A;
}

SpCheck sp_check(const Mat& A, double tol) {
    const int n = half_dim(A);
    const Mat W = omega(n);
    SpCheck r;
    r.violation = (A.transpose() * W * A - W).cwiseAbs().maxCoeff();
    r.ok = r.violation <= tol;
    return r;
}

double sp_algebra_violation(const Mat& X) {
    const Mat W = omega(half_dim(X));
    return (X.transpose() * W + W * X).cwiseAbs().maxCoeff();
}

int sp_dim(int n) { return n * (2 * n + 1); }

std::vector<Mat> sp_basis(int n) {
    if (n < 1) throw DimensionError("sp_basis needs n >= 1");
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(sp_dim(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Mat X = Mat::Zero(2 * n, 2 * n);
            X(i, j) = 1.0;
            X(n + j, n + i) = -1.0;
            out.push_back(X);
        }
    for (int off : {0, 1})  // off=0: b block (upper right), off=1: c block (lower left)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Mat X = Mat::Zero(2 * n, 2 * n);
                const int r0 = off ? n : 0, c0 = off ? 0 : n;
                X(r0 + i, c0 + j) = 1.0;
                X(r0 + j, c0 + i) = 1.0;
                out.push_back(X);
            }
    return out;
}

Mat sp_from_coords(int n, const Vec& coords) {
    if (coords.size() != sp_dim(n)) throw DimensionError("sp coordinate vector has wrong length");
    Mat X = Mat::Zero(2 * n, 2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            X(i, j) += coords[k];
            X(n + j, n + i) -= coords[k];
            ++k;
        }
    for (int off : {0, 1})
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const int r0 = off ? n : 0, c0 = off ? 0 : n;
                X(r0 + i, c0 + j) = coords[k];
                X(r0 + j, c0 + i) = coords[k];
                ++k;
            }
    return X;
}

Vec sp_to_coords(const Mat& X) {
    const int n = half_dim(X);
    Vec c(sp_dim(n));
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c[k++] = X(i, j);
    for (int off : {0, 1})
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const int r0 = off ? n : 0, c0 = off ? 0 : n;
                c[k++] = X(r0 + i, c0 + j);
            }
    return c;
}

Mat sp_inverse(const Mat& A) {
    const Mat W = omega(half_dim(A));
    return -W * A.transpose() * W;
}

Mat expm(const Mat& X) { return X.exp(); }

double min_eigenvalue_sym(const Mat& S) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool positive_definite(const Mat& S) {
    const double scale = S.cwiseAbs().maxCoeff();
    return scale > 0.0 && min_eigenvalue_sym(S) > tol::pd_rel * scale;
}

void validate(const ElectromagneticPair& em) {
    const auto n = em.R.rows();
    if (n == 0 || em.R.cols() != n || em.I.rows() != n || em.I.cols() != n)
        throw DimensionError("electromagnetic pair blocks must be square and of equal size");
    const double scale = std::max(1.0, std::max(em.R.cwiseAbs().maxCoeff(), em.I.cwiseAbs().maxCoeff()));
    if ((em.R - em.R.transpose()).cwiseAbs().maxCoeff() > tol::alg * scale)
        throw DomainError("R is not symmetric");
    if ((em.I - em.I.transpose()).cwiseAbs().maxCoeff() > tol::alg * scale)
        throw DomainError("I is not symmetric");
    if (!positive_definite(em.I)) throw DomainError("I is not positive definite");
}

TamingCheck check_taming(const Mat& J, double tol) {
    const int n = half_dim(J);
    const Mat W = omega(n);
    const Mat Id = Mat::Identity(2 * n, 2 * n);
    const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
    TamingCheck r;
    r.square = (J * J + Id).cwiseAbs().maxCoeff();
    r.compatible = (J.transpose() * W * J - W).cwiseAbs().maxCoeff();
    const Mat G = W * J;
    r.gram_asym = (G - G.transpose()).cwiseAbs().maxCoeff();
    r.gram_min_eig = min_eigenvalue_sym(G);
    const double s2 = scale * scale;
    r.ok = r.square <= tol * s2 && r.compatible <= tol * s2 && r.gram_asym <= tol * scale &&
           r.gram_min_eig > tol::pd_rel * G.cwiseAbs().maxCoeff();
    return r;
}

Mat gamma(const ElectromagneticPair& em) {
    validate(em);
    const Mat& R = em.R;
    const Mat K = em.I.llt().solve(Mat::Identity(em.n(), em.n()));
    return from_blocks(-K * R, K, -em.I - R * K * R, R * K);
}

ElectromagneticPair gamma_inv(const Mat& J) {
    const int n = half_dim(J);
    const TamingCheck tc = check_taming(J);
    if (!tc.ok)
        throw DomainError("not a compatible taming (|J^2+1|=" + std::to_string(tc.square) +
                          ", |J^T W J - W|=" + std::to_string(tc.compatible) +
                          ", min eig W J=" + std::to_string(tc.gram_min_eig) + ")");
    // Columns f_1..f_n and J f_1..J f_n form a real basis; e_a = sum_b Re N_ab f_b + Im N_ab J f_b.
    Mat T(2 * n, 2 * n);
    T.leftCols(n).setZero();
    T.bottomLeftCorner(n, n).setIdentity();
    T.rightCols(n) = J.rightCols(n);
    Mat E = Mat::Zero(2 * n, n);
    E.topRows(n).setIdentity();
    Eigen::FullPivLU<Mat> lu(T);
    if (!lu.isInvertible()) throw NumericalError("singular frame (f, J f) in gamma_inv");
    const Mat Z = lu.solve(E);
    const Mat reN = Z.topRows(n).transpose();
    const Mat imN = Z.bottomRows(n).transpose();
    ElectromagneticPair em{-0.5 * (reN + reN.transpose()), 0.5 * (imN + imN.transpose())};
    if (!positive_definite(em.I)) throw DomainError("Im N is not positive definite");
    return em;
}

CMat period_point(const ElectromagneticPair& em) {
    return em.R.cast<cplx>() + cplx(0, 1) * em.I.cast<cplx>();
}

CMat lagrangian_matrix(const ElectromagneticPair& em) {
    return -em.R.cast<cplx>() + cplx(0, 1) * em.I.cast<cplx>();
}

CMat mu(const Mat& J) { return period_point(gamma_inv(J)); }

Mat mu_inv(const CMat& tau) {
    const SiegelCheck sc = siegel_check(tau, tol::inversion);
    if (!sc.ok) throw DomainError("not a point of the Siegel upper space");
    return gamma({tau.real(), tau.imag()});
}

SiegelCheck siegel_check(const CMat& tau, double tol) {
    if (tau.rows() != tau.cols() || tau.rows() == 0) throw DimensionError("Siegel point must be square");
    SiegelCheck r;
    r.asymmetry = (tau - tau.transpose()).cwiseAbs().maxCoeff();
    const Mat im = tau.imag();
    r.im_min_eig = min_eigenvalue_sym(im);
    const double scale = std::max(1.0, tau.cwiseAbs().maxCoeff());
    r.ok = r.asymmetry <= tol * scale && r.im_min_eig > tol::pd_rel * im.cwiseAbs().maxCoeff();
    return r;
}

CMat fractional_action(const Mat& A, const CMat& tau) {
    const int n = half_dim(A);
    if (tau.rows() != n || tau.cols() != n) throw DimensionError("fractional_action: size mismatch");
    const Blocks B = blocks(A);
    const CMat den = B.a.cast<cplx>() + B.b.cast<cplx>() * tau;
    const CMat num = B.c.cast<cplx>() + B.d.cast<cplx>() * tau;
    Eigen::JacobiSVD<CMat> svd(den);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) < tol::pole * std::max(1.0, s(0)))
        throw PoleError("fractional_action: a + b tau is singular");
    // X den = num  <=>  den^T X^T = num^T
    return den.transpose().partialPivLu().solve(num.transpose()).transpose();
}

CMat infinitesimal_action_unchecked(const Mat& X, const CMat& tau) {
    const Blocks B = blocks(X);
    const CMat t = tau;
    return B.c.cast<cplx>() + B.d.cast<cplx>() * t - t * B.a.cast<cplx>() - t * B.b.cast<cplx>() * t;
}

CMat infinitesimal_fractional_action(const Mat& X, const CMat& tau) {
    const double v = sp_algebra_violation(X);
    if (v > tol::alg * std::max(1.0, X.cwiseAbs().maxCoeff()))
        throw DomainError("infinitesimal_fractional_action: X is not in sp (violation " + std::to_string(v) + ")");
    if (tau.rows() != half_dim(X)) throw DimensionError("infinitesimal_fractional_action: size mismatch");
    return infinitesimal_action_unchecked(X, tau);
}

Mat conjugate_taming(const Mat& A, const Mat& J) {
    if (A.rows() != J.rows()) throw DimensionError("conjugate_taming: size mismatch");
    return A * J * A.partialPivLu().inverse();
}

Mat random_symmetric(int n, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> N(0.0, 1.0);
    Mat S(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) S(i, j) = S(j, i) = scale * N(rng);
    return S;
}

ElectromagneticPair random_em(int n, std::mt19937_64& rng, double eps) {
    std::normal_distribution<double> N(0.0, 1.0);
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = N(rng);
    Mat R = random_symmetric(n, rng);
    Mat I = M.transpose() * M + eps * Mat::Identity(n, n);
    I = 0.5 * (I + I.transpose());
    return {R, I};
}

Mat random_taming(int n, std::mt19937_64& rng) { return gamma(random_em(n, rng)); }

Mat random_sp_algebra(int n, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> N(0.0, 1.0);
    Vec c(sp_dim(n));
    for (int k = 0; k < c.size(); ++k) c[k] = scale * N(rng);
    return sp_from_coords(n, c);
}

Mat random_sp_group(int n, std::mt19937_64& rng, double scale) {
    return expm(random_sp_algebra(n, rng, scale));
}

CMat random_siegel(int n, std::mt19937_64& rng) { return period_point(random_em(n, rng)); }

}  // namespace emd
