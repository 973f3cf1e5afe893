#pragma once

#include <random>
#include <vector>

#include "emd/common.hpp"

namespace emd {

/// Standard symplectic form [[0, -Id], [Id, 0]] on R^{2n}, basis (e_1..e_n, f_1..f_n).
Mat omega(int n);

/// Blocks of a 2n x 2n matrix in the layout [[a, b], [c, d]].
struct Blocks {
    Mat a, b, c, d;
};
Blocks blocks(const Mat& A);
Mat from_blocks(const Mat& a, const Mat& b, const Mat& c, const Mat& d);

/// Half the dimension of an even square matrix; throws DimensionError otherwise.
int half_dim(const Mat& A);

struct SpCheck {
    bool ok = false;
    double violation = 0.0;  // max |A^T Omega A - Omega|
};
SpCheck sp_check(const Mat& A, double tol = tol::alg);

/// max |X^T Omega + Omega X|
double sp_algebra_violation(const Mat& X);

/// Basis of sp(2n): gl(n) part, then symmetric b, then symmetric c. Length n(2n+1).
std::vector<Mat> sp_basis(int n);
int sp_dim(int n);
Mat sp_from_coords(int n, const Vec& coords);
/// Inverse of sp_from_coords on sp(2n); the input is assumed to lie in sp(2n).
Vec sp_to_coords(const Mat& X);

/// A^{-1} = -Omega A^T Omega for symplectic A.
Mat sp_inverse(const Mat& A);
Mat expm(const Mat& X);

struct ElectromagneticPair {
    Mat R;  // symmetric
    Mat I;  // symmetric positive definite
    int n() const { return static_cast<int>(R.rows()); }
};

/// Throws DomainError unless R, I are symmetric and I is positive definite.
void validate(const ElectromagneticPair& em);
double min_eigenvalue_sym(const Mat& S);
bool positive_definite(const Mat& S);

struct TamingCheck {
    double square = 0.0;       // max |J^2 + Id|
    double compatible = 0.0;   // max |J^T Omega J - Omega|
    double gram_asym = 0.0;    // max |Omega J - (Omega J)^T|
    double gram_min_eig = 0.0; // smallest eigenvalue of sym(Omega J)
    bool ok = false;
};
TamingCheck check_taming(const Mat& J, double tol = tol::inversion);

/// J = [[-I^-1 R, I^-1], [-I - R I^-1 R, R I^-1]].
Mat gamma(const ElectromagneticPair& em);

/// Solves e_a = sum_b N_ab f_b with J acting as i; returns (R, I) = (-Re N, Im N).
ElectromagneticPair gamma_inv(const Mat& J);

/// The coupling-matrix period point R + iI (the convention carried by mu).
CMat period_point(const ElectromagneticPair& em);
/// The Lagrangian-relation matrix N = -R + iI solved for in gamma_inv.
CMat lagrangian_matrix(const ElectromagneticPair& em);

CMat mu(const Mat& J);
Mat mu_inv(const CMat& tau);

struct SiegelCheck {
    double asymmetry = 0.0;
    double im_min_eig = 0.0;
    bool ok = false;
};
SiegelCheck siegel_check(const CMat& tau, double tol = tol::alg);

/// A.tau = (c + d tau)(a + b tau)^{-1}; throws PoleError when a + b tau is singular.
CMat fractional_action(const Mat& A, const CMat& tau);

/// (X_c + X_d tau) - tau (X_a + X_b tau); throws DomainError if X is not in sp.
CMat infinitesimal_fractional_action(const Mat& X, const CMat& tau);

/// Linear map X -> infinitesimal action, without the sp membership check.
CMat infinitesimal_action_unchecked(const Mat& X, const CMat& tau);

Mat conjugate_taming(const Mat& A, const Mat& J);

// Random generators for tests and tools.
Mat random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0);
/// R symmetric Gaussian, I = M^T M + eps Id.
ElectromagneticPair random_em(int n, std::mt19937_64& rng, double eps = 0.1);
Mat random_taming(int n, std::mt19937_64& rng);
/// Random element of sp(2n) with Gaussian coordinates times scale.
Mat random_sp_algebra(int n, std::mt19937_64& rng, double scale = 1.0);
/// exp of a random sp element.
Mat random_sp_group(int n, std::mt19937_64& rng, double scale = 0.5);
CMat random_siegel(int n, std::mt19937_64& rng);

}  // namespace emd
