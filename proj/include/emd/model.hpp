#pragma once

#include <string>
#include <utility>
#include <vector>

#include "emd/expr.hpp"

namespace emd {

enum class MetricKind { Flat, Poincare };

/// Scalar chart with either the flat metric or the Poincare metric (dx^2 + dy^2)/y^2 on y > 0.
struct ScalarChart {
    MetricKind kind = MetricKind::Poincare;
    int dim = 2;

    bool contains(const Vec& p) const;
    Mat metric(const Vec& p) const;
    /// d_k G at p, one matrix per coordinate k.
    std::vector<Mat> metric_derivative(const Vec& p) const;
    /// Box used for quasi-random sampling: Re tau in [-1,1], Im tau in [0.5,2] for poincare.
    std::vector<std::pair<double, double>> sample_box() const;
};

struct ModelInvalidError : Error {
    ModelInvalidError(const std::string& msg, Vec point);
    Vec point;
};

struct Model {
    std::string name = "unnamed";
    int nv = 0;
    ScalarChart chart;
    /// entries[i][j - i] holds N[i+1, j+1] for j >= i.
    std::vector<std::vector<Expr>> entries;

    const Expr& entry(int i, int j) const;
};

Model parse_model(const std::string& text);
std::string print_model(const Model& m);
bool structurally_equal(const Model& a, const Model& b);

/// Evaluates N(p) without Siegel validation.
CMat eval_period_raw(const Model& m, const Vec& p);
/// Evaluates N(p); throws ModelInvalidError if the value is not a Siegel point.
CMat eval_period(const Model& m, const Vec& p);
/// Directional derivative dN(v) at p.
CMat eval_period_derivative(const Model& m, const Vec& p, const Vec& v);
/// Partial derivatives d_k N at p, k over chart coordinates.
std::vector<CMat> eval_period_partials(const Model& m, const Vec& p);

/// Known names: constant-i (optionally constant-i:<nv>), identity-tau, axio-dilaton, t3.
Model builtin(const std::string& name);
std::vector<std::string> builtin_names();
Model constant_i(int nv);

}  // namespace emd
