#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "emd/duality_group.hpp"
#include "emd/field_algebra.hpp"
#include "emd/model.hpp"
#include "emd/stencil.hpp"

namespace emd {

/// Uniform node lattice over a box in (t, x, y, z).
struct GridPatch {
    std::array<double, 4> lo{}, hi{};
    Shape4 n{7, 7, 7, 7};

    static GridPatch cube(const Vec4& center, double half_width, int resolution);

    /// Throws DimensionError unless every axis has >= min_resolution nodes and a positive width.
    void validate(int min_resolution = 7) const;
    double h(int axis) const;
    std::size_t size() const { return node_count(n); }
    std::size_t index(const std::array<int, 4>& i) const;
    std::array<int, 4> unflatten(std::size_t k) const;
    Vec4 coord(std::size_t k) const;
    /// Nodes at distance >= margin from every face.
    std::vector<std::size_t> interior(int margin = 2) const;
};

/// Nodes of `fine` that coincide with the margin-interior nodes of `coarse`; the patches must share
/// extents and satisfy fine.n - 1 = 2 (coarse.n - 1) on every axis.
std::vector<std::size_t> common_nodes(const GridPatch& fine, const GridPatch& coarse, int margin = 2);

/// Period map of a theory, possibly transported: N'(p) = A . N(f^-1(p)) applied step by step.
struct Theory {
    struct Step {
        ChartMap f, finv;
        Mat A;
    };
    Model model;
    std::vector<Step> steps;

    static Theory of(Model m);
    /// The theory (f_* G, J^f_A). Requires f to be an isometry of the chart.
    Theory transformed(const ChartMap& f, const Mat& A) const;

    int nv() const { return model.nv; }
    int ns() const { return model.chart.dim; }
    const ScalarChart& chart() const { return model.chart; }

    CMat period(const Vec& p) const;
    /// N and d_k N at p.
    std::pair<CMat, std::vector<CMat>> period_jet(const Vec& p) const;
    ElectromagneticPair couplings(const Vec& p) const;
    Mat taming(const Vec& p) const;
    /// d_k J at p.
    std::vector<Mat> taming_partials(const Vec& p) const;
};

/// d J for J = gamma(R, I), given dR and dI.
Mat taming_differential(const ElectromagneticPair& em, const Mat& dR, const Mat& dI);

/// Index of the symmetric pair (mu <= nu) among the 10 metric components.
int sym_index(int mu, int nu);
/// Index of the antisymmetric pair (mu < nu) among the 6 two-form components.
int pair_index(int mu, int nu);
inline constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 2>, 10> kSymPairs{
    {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

/// Node data stored component-major (one contiguous array per component).
struct FieldConfiguration {
    GridPatch patch;
    Theory theory;
    std::array<std::vector<double>, 10> g;
    std::vector<std::vector<double>> phi;  // ns arrays
    std::vector<std::vector<double>> V;    // 2nv * 6 arrays, index A * 6 + pair

    FieldConfiguration(GridPatch p, Theory t);

    Mat4 metric_at(std::size_t k) const;
    Vec phi_at(std::size_t k) const;
    TwoFormBlock V_at(std::size_t k) const;
    void set_node(std::size_t k, const Mat4& gk, const Vec& phik, const TwoFormBlock& Vk);
};

using MetricFn = std::function<Mat4(const Vec4&)>;
using ScalarFn = std::function<Vec(const Vec4&)>;
using GaugeFn = std::function<TwoFormBlock(const Vec4&)>;

/// Samples g and phi, and sets V = assemble_V(F, couplings(phi), g) so that every node is
/// twisted self-dual by construction. Throws DomainError when phi leaves the chart.
FieldConfiguration manufacture(const GridPatch& patch, const Theory& theory, const MetricFn& g, const ScalarFn& phi,
                               const GaugeFn& F);

Mat4 minkowski();

/// Grid configuration files (JSON). Fields:
///   center [4], half_width, resolution   or   extents [[lo,hi] x4], resolution (int or [4])
///   model (builtin name) or model_file (path, relative to the config file)
///   metric  {kind: minkowski | polynomial, linear: [[a,mu,nu,c]...], quadratic: [[a,b,mu,nu,c]...]}
///   scalar  {kind: constant-phi | polynomial, value: [...], linear: [[i,a,c]...], quadratic: [[i,a,b,c]...]}
///   gauge   {kind: zero | polynomial, constant: [[L,mu,nu,c]...], linear: [[L,a,mu,nu,c]...]}
FieldConfiguration load_config(const std::string& path);
FieldConfiguration config_from_json_text(const std::string& text, const std::string& base_dir = ".");

}  // namespace emd
