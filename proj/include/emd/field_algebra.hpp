#pragma once

#include <vector>

#include "emd/symplectic.hpp"

namespace emd {

using CMat4 = Eigen::Matrix4cd;
/// V_{mu nu}^A, one antisymmetric 4x4 matrix per symplectic index A = 1..2n.
using TwoFormBlock = std::vector<Mat4>;
using CTwoFormBlock = std::vector<CMat4>;

/// Eigenvalue of the twisted star carried by solutions of *V = -J V.
/// Since * and J act on different indices, *V = -JV gives (* x J)V = J(*V) = -J^2 V = V.
inline constexpr int kTwistedSelfDualEigenvalue = +1;

/// Levi-Civita symbol with eps_{0123} = +1.
int levi_civita(int a, int b, int c, int d);

/// Throws DomainError unless g is symmetric with signature (-,+,+,+).
void validate_metric(const Mat4& g);

Mat4 raise_both(const Mat4& g_inv, const Mat4& w);

/// (*w)_{mu nu} = 1/2 sqrt(-det g) eps_{mu nu rho sigma} w^{rho sigma}.
Mat4 hodge2(const Mat4& g, const Mat4& w);
TwoFormBlock hodge(const Mat4& g, const TwoFormBlock& V);

/// (M V)^A = sum_B M_AB V^B.
TwoFormBlock apply_fiber(const Mat& M, const TwoFormBlock& V);
TwoFormBlock add(const TwoFormBlock& a, const TwoFormBlock& b, double sb = 1.0);
TwoFormBlock scale(const TwoFormBlock& a, double s);
double max_abs(const TwoFormBlock& V);
TwoFormBlock zero_block(int size);

TwoFormBlock twisted_star(const Mat4& g, const Mat& J, const TwoFormBlock& V);

struct SelfDualSplit {
    TwoFormBlock plus;   // fixed by the twisted star
    TwoFormBlock minus;  // negated by the twisted star
};
SelfDualSplit project_sd(const Mat4& g, const Mat& J, const TwoFormBlock& V);

/// max |*V + J V|.
double twisted_selfduality_residual(const Mat4& g, const Mat& J, const TwoFormBlock& V);

/// V = (F, R F - I *F).
TwoFormBlock assemble_V(const TwoFormBlock& F, const ElectromagneticPair& em, const Mat4& g);

/// V+ = (V - i *V)/2.
CTwoFormBlock complexify_plus(const TwoFormBlock& V, const Mat4& g);

/// (a, b)_g = 1/2 a_{mu nu} b^{mu nu}.
double form_inner(const Mat4& g, const Mat4& a, const Mat4& b);

/// sum_{A,B} (V^A, W^B)_g Q_AB with Q = Omega J.
double twisted_pairing(const Mat4& g, const Mat& J, const TwoFormBlock& A, const TwoFormBlock& B);

/// (V oslash_Q W)_{ab} = sum_{A,B} Q_AB V^A_{ac} W^B_{bd} g^{cd}.
Mat4 oslash_Q(const Mat4& g, const Mat& J, const TwoFormBlock& V, const TwoFormBlock& W);

/// T_ab = omega(V_ac, J V_b^c); equals oslash_Q(V, V).
Mat4 stress_gauge(const Mat4& g, const Mat& J, const TwoFormBlock& V);

/// 2 I F_ac F_b^c - 1/2 g_ab I F_cd F^cd.
Mat4 stress_gauge_RI(const Mat4& g, const ElectromagneticPair& em, const TwoFormBlock& F);

/// G_ij d_a phi^i d_b phi^j - 1/2 g_ab G_ij d_c phi^i d^c phi^j; dphi is 4 x n_s.
Mat4 stress_scalar(const Mat4& g, const Mat& G, const Mat& dphi);

}  // namespace emd
