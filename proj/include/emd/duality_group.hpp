#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emd/model.hpp"

namespace emd {

struct KillingField {
    std::string name;
    ScalarChart chart;
    std::vector<Expr> components;  // real-valued expressions in x1..x_dim

    Vec at(const Vec& p) const;
    /// Jacobian d_j xi^i.
    Mat jacobian(const Vec& p) const;
};

std::vector<KillingField> killing_basis(const ScalarChart& chart);

/// max |L_xi G| at p, from analytic derivatives of the components and the chart metric.
double killing_residual(const KillingField& xi, const Vec& p);

/// Quasi-random (Halton) points in the chart's sample box; `seed` shifts the sequence start.
std::vector<Vec> sample_points(const ScalarChart& chart, int count, std::uint64_t seed = 0);

struct StabilizerReport {
    int dim_stab_sp = 0;
    std::vector<Mat> basis;            // unit-norm sp matrices
    double residual = 0.0;             // worst |X_c + X_d tau - tau (X_a + X_b tau)| over basis and samples
    int samples_used = 0;
    std::vector<int> prefix_dims;      // dims on sample prefixes 8, 16, ... (sample-stability record)
    std::vector<std::string> warnings;
};

StabilizerReport stab_sp_algebra(const Model& model, const std::vector<Vec>& samples);

struct LiftResult {
    bool lifted = false;
    Mat X;                 // minimum-norm least-squares solution (orthogonal to the stabilizer)
    double residual = 0.0; // |M x - b| / max(1, |b|)
};

LiftResult lift_killing_field(const Model& model, const KillingField& xi, const std::vector<Vec>& samples);

struct UDualityReport {
    int dim_u = 0;
    int dim_stab_sp = 0;
    int dim_iso_pr = 0;
    int exactness_gap = 0;
    std::vector<std::string> field_names;
    std::vector<LiftResult> lift_table;
    std::vector<int> prefix_dims;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
};

UDualityReport uduality_algebra(const Model& model, const std::vector<Vec>& samples);

/// Chart isometry: fractional map tau -> (c + d tau)/(a + b tau) on poincare charts,
/// or p -> Q p + t on flat charts.
struct ChartMap {
    MetricKind kind = MetricKind::Poincare;
    Mat M;  // 2x2 [[a,b],[c,d]] (poincare) or orthogonal Q (flat)
    Vec t;  // translation (flat only)

    static ChartMap identity(const ScalarChart& chart);
    static ChartMap mobius(double a, double b, double c, double d);
    static ChartMap affine(const Mat& Q, const Vec& t);

    Vec apply(const Vec& p) const;
    Mat jacobian(const Vec& p) const;
    /// True when the map preserves the chart metric (det 1 Mobius or orthogonal Q).
    bool is_isometry(double tol = 1e-12) const;
    /// True when the map is affine in the chart coordinates.
    bool is_affine() const;
    ChartMap inverse() const;
};

/// max over samples of |A . N(p) - N(f(p))|_max.
double check_uduality_pair(const ChartMap& f, const Mat& A, const Model& model, const std::vector<Vec>& samples);

/// max over samples of |(-Id) . N(p) - N(p)|; zero exactly in exact arithmetic.
double minus_identity_residual(const Model& model, const std::vector<Vec>& samples);

/// Residual of "X is antisymmetric and X^2 = -c^2 Id", i.e. X generates equal rotations
/// in n orthogonal planes (the diagonal of SO(2) x ... x SO(2)).
double diagonal_rotation_residual(const Mat& X);

}  // namespace emd
