#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "emd/eom.hpp"

namespace emd {

/// Real Majorana representation of Cl(3,1) with eta = diag(-1, 1, 1, 1):
///   g0 = e (x) 1, g1 = s1 (x) 1, g2 = s3 (x) s1, g3 = s3 (x) s3, with e = [[0,1],[-1,0]].
/// Charge conjugation C = g0 satisfies g_a^T C = -C g_a.
struct CliffordRep {
    std::array<Mat4, 4> gamma;
    Mat4 eta;
    Mat4 gamma5;                          // g0 g1 g2 g3, squares to -1
    Mat4 C;                               // bilinear B(x, y) = x^T C y
    std::array<std::array<Mat4, 4>, 4> gamma_ab;  // gamma_{ab} = [g_a, g_b]/2 (lower indices)
};
const CliffordRep& clifford_rep();

/// Orthonormal frame e^a_mu on a grid (matrix rows a, columns mu), stored per component.
struct FramePatch {
    GridPatch grid;
    std::array<std::vector<double>, 16> e;  // index a * 4 + mu

    static FramePatch from_function(const GridPatch& grid, const std::function<Mat4(const Vec4&)>& frame);
    Mat4 frame_at(std::size_t k) const;
    Mat4 metric_at(std::size_t k) const;  // e^T eta e
};

/// Builtin frames: "minkowski" on [0,1]^4 and "ads4-poincare" e = delta/(lambda z), z = x^3 in [2, 3],
/// other coordinates in [0, 1]. The AdS patch sits away from z = 1 so that 9- and 17-point grids are
/// already in the asymptotic second-order regime.
FramePatch builtin_frame(const std::string& name, double lambda, int resolution = 17);

/// omega_{mu a b}, stored for a < b; antisymmetric by construction.
struct SpinConnection {
    GridPatch grid;
    std::array<std::vector<double>, 24> w;  // index mu * 6 + pair(a, b)

    std::array<Mat4, 4> at(std::size_t k) const;
    SpinConnection scaled(double s) const;
};

/// Torsion-free spin connection omega_mu^a_b = e^a_nu (d_mu E_b^nu + Gamma^nu_{mu l} E_b^l),
/// antisymmetrized after lowering. Derivatives by second-order differences (one-sided at faces).
SpinConnection spin_connection(const FramePatch& fr, SimdBackend backend = default_backend());

/// Metric-compatibility check: max |d_mu g_{nu rho} - omega-reconstruction| at interior nodes,
/// i.e. the frame postulate residual max |d_mu e^a_nu - Gamma^r_{mu nu} e^a_r + omega_mu^a_b e^b_nu|.
double frame_postulate_residual(const FramePatch& fr, const SpinConnection& w, int margin = 2);

struct SpinorField {
    GridPatch grid;
    std::array<std::vector<double>, 4> c;
    double lambda = 0.0;

    Vec4 at(std::size_t k) const;
};

struct KillingResidual {
    std::array<double, 4> per_direction{};
    double max = 0.0;
};

/// max over interior nodes of |d_mu eps + 1/4 omega_{mu ab} gamma^{ab} eps - lambda/2 gamma_mu eps|.
KillingResidual killing_residual(const FramePatch& fr, const SpinConnection& w, const SpinorField& eps,
                                 int margin = 2);
KillingResidual killing_residual(const FramePatch& fr, const SpinorField& eps, int margin = 2);
/// Same, restricted to the given nodes (e.g. common_nodes for refinement studies).
KillingResidual killing_residual_at(const FramePatch& fr, const SpinConnection& w, const SpinorField& eps,
                                    const std::vector<std::size_t>& nodes);

struct KillingIntegration {
    SpinorField field;
    double path_defect = 0.0;      // far corner, axis orders (0,1,2,3) vs (3,2,1,0)
    double path_defect_max = 0.0;  // over all nodes
};

/// Transports eps0 from node (0,0,0,0) along axis-ordered lines with classical RK4 steps; midpoint
/// connection values come from 4-point interpolation along the line.
SpinorField integrate_along(const FramePatch& fr, const SpinConnection& w, double lambda, const Vec4& eps0,
                            const std::array<int, 4>& order);
KillingIntegration integrate_killing(const FramePatch& fr, double lambda, const Vec4& eps0);
KillingIntegration integrate_killing(const FramePatch& fr, const SpinConnection& w, double lambda, const Vec4& eps0);

/// Max |Ric - k g| at interior nodes (AdS: k = -3 lambda^2).
double einstein_constant_residual(const FramePatch& fr, double k, int margin = 2);
double einstein_constant_residual_at(const FramePatch& fr, double k, const std::vector<std::size_t>& nodes);

/// One-form field in coordinate components.
struct OneFormField {
    GridPatch grid;
    std::array<std::vector<double>, 4> c;
    Vec4 at(std::size_t k) const;
};

/// Bilinear candidates for the first-order system:
///   u_mu = B(eps, gamma_mu eps), Phi_{mu nu} = B(eps, gamma_{mu nu} eps),
///   l = sign * Phi(., d_0) / u_0  (unit and orthogonal to u when Phi is the null 2-form u ^ l).
/// The gamma5-inserted bilinear B(eps, gamma_mu gamma5 eps) vanishes identically for commuting
/// real spinors in this representation and is reported, not used.
struct Bilinears {
    OneFormField u, l;
    double gamma5_bilinear_max = 0.0;
};
Bilinears bilinears(const FramePatch& fr, const SpinorField& eps, double l_sign);

/// kappa per node by least squares from nabla l - lambda (l l - g) = kappa (x) u.
/// kappa_first = true fits (nabla_mu l)_nu = kappa_mu u_nu + ..., otherwise kappa_nu u_mu.
OneFormField fit_kappa(const FramePatch& fr, const OneFormField& u, const OneFormField& l, double lambda,
                       bool kappa_first = true);

struct FirstOrderReport {
    double du_residual = 0.0;        // |nabla u - lambda u ^ l|
    double dl_residual = 0.0;        // |nabla l - kappa (x) u - lambda (l l - g)|
    double null_residual = 0.0;      // |g(u, u)|
    double unit_residual = 0.0;      // |g(l, l) - 1|
    double orth_residual = 0.0;      // |g(u, l)|
    double killing_residual = 0.0;   // |nabla_mu u_nu + nabla_nu u_mu|
    double geodesic_residual = 0.0;  // |u^mu nabla_mu u_nu|
    double dkappa_max = 0.0;         // informational only
    double u_max = 0.0;
    bool nontrivial = false;         // u not identically zero
    bool algebraic_ok(double tol) const;
};

FirstOrderReport verify_first_order(const FramePatch& fr, const OneFormField& u, const OneFormField& l, const OneFormField& kappa,
                         double lambda, bool kappa_first = true, int margin = 2);
FirstOrderReport verify_first_order_at(const FramePatch& fr, const OneFormField& u, const OneFormField& l,
                            const OneFormField& kappa, double lambda, bool kappa_first,
                            const std::vector<std::size_t>& nodes);

/// Result of searching the finite set of bilinear conventions (sign of l, kappa slot).
struct FirstOrderSearch {
    struct Entry {
        double l_sign;
        bool kappa_first;
        FirstOrderReport report;
    };
    std::vector<Entry> entries;
    std::size_t best = 0;  // smallest max(du, dl)
};
FirstOrderSearch search_first_order(const FramePatch& fr, const SpinorField& eps, double lambda);
FirstOrderSearch search_first_order_at(const FramePatch& fr, const SpinorField& eps, double lambda,
                           const std::vector<std::size_t>& nodes);

/// Chiral projectors P+- = (1 -+ i gamma5)/2 onto the gamma5 = +-i eigenspaces.
CMat chiral_projector(int sign);

/// T_w(e1 + e2)(gamma_a) = gamma_a (w e1 + conj(w) e2) for e1 in the +i and e2 in the -i eigenspace.
std::array<CVec, 4> t_w(cplx w, const CVec& e1, const CVec& e2);

struct ChiralCheck {
    double linearity = 0.0;       // |T(alpha e) - alpha T(e)|
    double conjugation = 0.0;     // |conj T(e1, e2) - T(conj e2, conj e1)|
    double real_reduction = 0.0;  // for real w and real e: |T(e) - w gamma e|; 0 when w is not real
    bool projected = false;       // input was not chiral and has been projected
    std::vector<std::string> warnings;
};
ChiralCheck chiral_operator_check(cplx w, const CVec& e1, const CVec& e2);

}  // namespace emd
