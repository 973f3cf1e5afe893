#pragma once

#include <array>
#include <string>
#include <vector>

#include "emd/grid.hpp"

namespace emd {

/// Gamma[rho](mu, nu).
using Christoffel = std::array<Mat4, 4>;

/// Metric with its first and second coordinate derivatives at a point.
struct MetricJet {
    Mat4 g;
    std::array<Mat4, 4> dg;                 // dg[a] = d_a g
    std::array<std::array<Mat4, 4>, 4> ddg;  // ddg[a][b] = d_a d_b g
};

Christoffel christoffel_at(const Mat4& g, const std::array<Mat4, 4>& dg);
Mat4 ricci_at(const MetricJet& j);
Mat4 einstein_at(const MetricJet& j);

/// Everything the residuals need at one node.
struct NodeJet {
    MetricJet metric;
    Vec phi;
    Mat dphi;                   // 4 x ns, dphi(a, i) = d_a phi^i
    std::vector<Mat4> ddphi;    // per i: d_a d_b phi^i
    TwoFormBlock V;
    std::array<TwoFormBlock, 4> dV;
};

/// Couplings and their scalar-space derivatives at phi.
struct PointCouplings {
    ElectromagneticPair em;
    Mat J;
    std::vector<Mat> dR, dI, dJ;  // per scalar coordinate
};
PointCouplings couplings_at(const Theory& th, const Vec& phi);

/// Relative normalization between the two assemblies of the scalar source:
/// 1/2 dR F*F + 1/2 dI FF (full contractions) = kScalarSourceNormalization * 1/2 (*V, Psi V)_{g,Q}.
/// Fixed by the cross-assembly check in the tests.
inline constexpr double kScalarSourceNormalization = -1.0;

Mat4 einstein_residual_at(const NodeJet& j, const Theory& th, const PointCouplings& c);
/// Local (R, I)-derivative assembly: div(G_ik d phi^i) - right-hand side, per k.
Vec scalar_residual_local_at(const NodeJet& j, const Theory& th, const PointCouplings& c);
/// Global assembly: G_kj Tr_g(nabla d phi)^j - kScalarSourceNormalization * 1/2 (*V, Psi_k V)_{g,Q}.
Vec scalar_residual_global_at(const NodeJet& j, const Theory& th, const PointCouplings& c);
/// dV per component: rows A, columns the triples (012, 013, 023, 123).
Mat maxwell_at(const NodeJet& j);

/// Finite-difference jets of a configuration, computed once with the stencil kernels.
class JetField {
public:
    /// With metric_only, scalar and gauge derivatives are skipped and at() must not be used.
    JetField(const FieldConfiguration& cfg, SimdBackend backend = default_backend(), bool metric_only = false);
    /// Throws DomainError naming the node if the metric there is singular.
    NodeJet at(std::size_t k) const;
    MetricJet metric_at(std::size_t k) const;

private:
    const FieldConfiguration& cfg_;
    using Arr = std::vector<double>;
    std::array<std::array<Arr, 10>, 4> dg_;
    std::array<std::array<std::array<Arr, 10>, 4>, 4> ddg_;  // a <= b filled
    std::vector<std::array<Arr, 4>> dphi_;
    std::vector<std::array<std::array<Arr, 4>, 4>> ddphi_;
    std::vector<std::array<Arr, 4>> dV_;
};

std::vector<Christoffel> christoffel(const FieldConfiguration& cfg, int margin = 2);
std::vector<Mat4> ricci(const FieldConfiguration& cfg, int margin = 2);
std::vector<Mat4> einstein(const FieldConfiguration& cfg, int margin = 2);

struct NodeResidual {
    Mat4 einstein;
    Vec scalar_local, scalar_global;
    Mat maxwell;
    double selfduality = 0.0;
};

struct ResidualField {
    GridPatch patch;
    std::vector<std::size_t> nodes;  // interior nodes, margin 2
    std::vector<NodeResidual> values;
};

ResidualField evaluate_residuals(const FieldConfiguration& cfg, SimdBackend backend = default_backend(), int margin = 2);

struct ResidualReport {
    double einstein_max = 0, scalar_max = 0, maxwell_max = 0;
    double einstein_mean = 0, scalar_mean = 0, maxwell_mean = 0;
    double scalar_global_max = 0;
    double scalar_assembly_gap = 0;  // max |local - global|
    double selfduality_max = 0;
    std::array<int, 4> einstein_worst{}, scalar_worst{}, maxwell_worst{};
    std::array<int, 4> resolution{};
    std::array<double, 4> spacing{};
    std::size_t nodes = 0;
    std::vector<std::string> warnings;
};

ResidualReport summarize(const ResidualField& r);

/// (g, f o phi, A V) as a configuration of the transformed theory. f must be an isometry of the chart.
FieldConfiguration transport_config(const ChartMap& f, const Mat& A, const FieldConfiguration& cfg);

struct EquivarianceReport {
    ResidualReport before, after;
    double einstein_gap = 0;  // |E' - E|
    double scalar_gap = 0;    // |r' - Df^-T r|, both assemblies
    double maxwell_gap = 0;   // |M' - A M|
    double selfduality_after = 0;
    double max_gap() const;
};

/// Evaluates both configurations and compares node by node. Gaps are relative to max(1, |original|).
/// f must be an affine isometry so that finite differences commute with the transport.
EquivarianceReport equivariance_harness(const FieldConfiguration& cfg, const ChartMap& f, const Mat& A,
                                        SimdBackend backend = default_backend());

}  // namespace emd
