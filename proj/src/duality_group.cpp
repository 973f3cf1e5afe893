#include "emd/duality_group.hpp"

#include <cmath>

#include "emd/linalg.hpp"
#include "emd/symplectic.hpp"

namespace emd {

Vec KillingField::at(const Vec& p) const {
    Vec v(static_cast<Eigen::Index>(components.size()));
    for (std::size_t i = 0; i < components.size(); ++i) v[static_cast<Eigen::Index>(i)] = evaluate(components[i], p).real();
    return v;
}

Mat KillingField::jacobian(const Vec& p) const {
    const auto d = static_cast<Eigen::Index>(components.size());
    Mat J(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            J(i, j) = evaluate(derivative(components[static_cast<std::size_t>(i)], static_cast<int>(j)), p).real();
    return J;
}

std::vector<KillingField> killing_basis(const ScalarChart& chart) {
    std::vector<KillingField> out;
    const Expr x = Expr::coord(0);
    if (chart.kind == MetricKind::Poincare) {
        if (chart.dim != 2) throw DomainError("poincare chart must have dim 2");
        const Expr y = Expr::coord(1);
        out.push_back({"translation", chart, {Expr::num(1), Expr::num(0)}});
        out.push_back({"dilation", chart, {x, y}});
        out.push_back({"special", chart, {pow(x, 2) - pow(y, 2), Expr::num(2) * x * y}});
        return out;
    }
    const int k = chart.dim;
    for (int i = 0; i < k; ++i) {
        std::vector<Expr> c(static_cast<std::size_t>(k), Expr::num(0));
        c[static_cast<std::size_t>(i)] = Expr::num(1);
        out.push_back({"translation-" + std::to_string(i + 1), chart, c});
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            std::vector<Expr> c(static_cast<std::size_t>(k), Expr::num(0));
            c[static_cast<std::size_t>(i)] = -Expr::coord(j);
            c[static_cast<std::size_t>(j)] = Expr::coord(i);
            out.push_back({"rotation-" + std::to_string(i + 1) + std::to_string(j + 1), chart, c});
        }
    return out;
}

double killing_residual(const KillingField& xi, const Vec& p) {
    const Mat G = xi.chart.metric(p);
    const auto dG = xi.chart.metric_derivative(p);
    const Vec v = xi.at(p);
    const Mat Dxi = xi.jacobian(p);  // Dxi(k, i) = d_i xi^k
    Mat L = G * Dxi + Dxi.transpose() * G;
    for (Eigen::Index k = 0; k < v.size(); ++k) L += v[k] * dG[static_cast<std::size_t>(k)];
    return L.cwiseAbs().maxCoeff();
}

namespace {

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
    }
    return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// Rows: for every sample and i <= j, Re and Im of the (i,j) entry; columns: sp coordinates.
Mat stabilizer_system(const Model& m, const std::vector<CMat>& taus) {
    const int n = m.nv;
    const auto basis = sp_basis(n);
    const int per = n * (n + 1);
    Mat M(static_cast<Eigen::Index>(taus.size()) * per, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t s = 0; s < taus.size(); ++s)
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const CMat L = infinitesimal_action_unchecked(basis[k], taus[s]);
            Eigen::Index r = static_cast<Eigen::Index>(s) * per;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    M(r++, static_cast<Eigen::Index>(k)) = L(i, j).real();
                    M(r++, static_cast<Eigen::Index>(k)) = L(i, j).imag();
                }
        }
    return M;
}

Vec stack(const Model& m, const std::vector<CMat>& mats) {
    const int n = m.nv;
    Vec b(static_cast<Eigen::Index>(mats.size()) * n * (n + 1));
    Eigen::Index r = 0;
    for (const auto& D : mats)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                b(r++) = D(i, j).real();
                b(r++) = D(i, j).imag();
            }
    return b;
}

std::vector<CMat> period_values(const Model& m, const std::vector<Vec>& samples) {
    std::vector<CMat> t;
    t.reserve(samples.size());
    for (const auto& p : samples) t.push_back(eval_period(m, p));
    return t;
}

Mat killing_columns(const Model& m, const std::vector<KillingField>& fields, const std::vector<Vec>& samples) {
    Mat B(static_cast<Eigen::Index>(samples.size()) * m.nv * (m.nv + 1), static_cast<Eigen::Index>(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
        std::vector<CMat> d;
        for (const auto& p : samples) d.push_back(eval_period_derivative(m, p, fields[j].at(p)));
        B.col(static_cast<Eigen::Index>(j)) = stack(m, d);
    }
    return B;
}

std::vector<int> prefix_sizes(std::size_t total) {
    std::vector<int> sizes;
    for (std::size_t s = 8; s < total; s *= 2) sizes.push_back(static_cast<int>(s));
    sizes.push_back(static_cast<int>(total));
    return sizes;
}

Mat rows_for_prefix(const Mat& M, int samples, int per) { return M.topRows(static_cast<Eigen::Index>(samples) * per); }

void check_stability(const std::vector<int>& dims, const std::string& what) {
    for (int d : dims)
        if (d != dims.back())
            throw InstabilityError(what + " dimension changes with the sample count");
}

}  // namespace

std::vector<Vec> sample_points(const ScalarChart& chart, int count, std::uint64_t seed) {
    const auto box = chart.sample_box();
    if (box.size() > std::size(kPrimes)) throw DimensionError("chart dimension too large for sampling");
    std::vector<Vec> out;
    for (int k = 0; k < count; ++k) {
        Vec p(chart.dim);
        for (int d = 0; d < chart.dim; ++d) {
            const auto [lo, hi] = box[static_cast<std::size_t>(d)];
            p[d] = lo + (hi - lo) * halton(static_cast<std::uint64_t>(k) + 1 + seed, kPrimes[d]);
        }
        out.push_back(p);
    }
    return out;
}

StabilizerReport stab_sp_algebra(const Model& model, const std::vector<Vec>& samples) {
    StabilizerReport rep;
    rep.samples_used = static_cast<int>(samples.size());
    if (samples.empty()) throw DomainError("stab_sp_algebra needs samples");
    if (samples.size() < 8) rep.warnings.push_back("fewer than 8 samples: null space may be under-determined");
    const int n = model.nv;
    const int per = n * (n + 1);
    const auto taus = period_values(model, samples);
    const Mat M = stabilizer_system(model, taus);
    for (int s : prefix_sizes(samples.size()))
        rep.prefix_dims.push_back(static_cast<int>(M.cols()) - numerical_rank(rows_for_prefix(M, s, per)));
    check_stability(rep.prefix_dims, "stabilizer");
    const NullSpace ns = null_space(M);
    rep.dim_stab_sp = static_cast<int>(ns.basis.cols());
    for (Eigen::Index c = 0; c < ns.basis.cols(); ++c) {
        Mat X = sp_from_coords(n, ns.basis.col(c));
        X /= X.norm();
        for (const auto& t : taus)
            rep.residual = std::max(rep.residual, infinitesimal_action_unchecked(X, t).cwiseAbs().maxCoeff());
        rep.basis.push_back(X);
    }
    return rep;
}

LiftResult lift_killing_field(const Model& model, const KillingField& xi, const std::vector<Vec>& samples) {
    if (samples.empty()) throw DomainError("lift_killing_field needs samples");
    const Mat M = stabilizer_system(model, period_values(model, samples));
    const Vec b = killing_columns(model, {xi}, samples).col(0);
    const Vec x = min_norm_solve(M, b);
    LiftResult r;
    r.residual = (M * x - b).norm() / std::max(1.0, b.norm());
    r.lifted = r.residual <= tol::lift;
    r.X = sp_from_coords(model.nv, x);
    return r;
}

UDualityReport uduality_algebra(const Model& model, const std::vector<Vec>& samples) {
    UDualityReport rep;
    if (samples.empty()) throw DomainError("uduality_algebra needs samples");
    if (samples.size() < 8) rep.warnings.push_back("fewer than 8 samples: null space may be under-determined");
    const auto fields = killing_basis(model.chart);
    const int n = model.nv;
    const int per = n * (n + 1);
    const Mat M = stabilizer_system(model, period_values(model, samples));
    const Mat B = killing_columns(model, fields, samples);
    const auto m = static_cast<Eigen::Index>(fields.size());
    Mat joint(M.rows(), m + M.cols());
    joint << -B, M;
    for (int s : prefix_sizes(samples.size()))
        rep.prefix_dims.push_back(static_cast<int>(joint.cols()) - numerical_rank(rows_for_prefix(joint, s, per)));
    check_stability(rep.prefix_dims, "U-duality algebra");
    const NullSpace ns = null_space(joint);
    rep.dim_u = static_cast<int>(ns.basis.cols());
    rep.dim_stab_sp = static_cast<int>(M.cols()) - numerical_rank(M);
    rep.dim_iso_pr = ns.basis.cols() ? numerical_rank(ns.basis.topRows(m)) : 0;
    rep.exactness_gap = rep.dim_u - rep.dim_stab_sp - rep.dim_iso_pr;
    for (const auto& f : fields) {
        rep.field_names.push_back(f.name);
        rep.lift_table.push_back(lift_killing_field(model, f, samples));
    }
    rep.notes.push_back("Lie algebra level only; discrete parts of the stabilizer beyond the exact -Id check are not computed");
    return rep;
}

ChartMap ChartMap::identity(const ScalarChart& chart) {
    if (chart.kind == MetricKind::Poincare) return mobius(1, 0, 0, 1);
    return affine(Mat::Identity(chart.dim, chart.dim), Vec::Zero(chart.dim));
}

ChartMap ChartMap::mobius(double a, double b, double c, double d) {
    ChartMap f;
    f.kind = MetricKind::Poincare;
    f.M.resize(2, 2);
    f.M << a, b, c, d;
    return f;
}

ChartMap ChartMap::affine(const Mat& Q, const Vec& t) {
    if (Q.rows() != Q.cols() || Q.rows() != t.size()) throw DimensionError("affine map: size mismatch");
    ChartMap f;
    f.kind = MetricKind::Flat;
    f.M = Q;
    f.t = t;
    return f;
}

Vec ChartMap::apply(const Vec& p) const {
    if (kind == MetricKind::Flat) return M * p + t;
    const cplx tau(p[0], p[1]);
    const cplx den = M(0, 0) + M(0, 1) * tau;
    if (std::abs(den) < tol::pole) throw PoleError("chart map pole");
    const cplx w = (M(1, 0) + M(1, 1) * tau) / den;
    return Vec{{w.real(), w.imag()}};
}

Mat ChartMap::jacobian(const Vec& p) const {
    if (kind == MetricKind::Flat) return M;
    const cplx tau(p[0], p[1]);
    const cplx den = M(0, 0) + M(0, 1) * tau;
    const cplx fp = (M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0)) / (den * den);
    Mat J(2, 2);
    J << fp.real(), -fp.imag(), fp.imag(), fp.real();
    return J;
}

bool ChartMap::is_isometry(double tol) const {
    if (kind == MetricKind::Flat)
        return (M.transpose() * M - Mat::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff() <= tol;
    return std::abs(M.determinant() - 1.0) <= tol;
}

bool ChartMap::is_affine() const { return kind == MetricKind::Flat || M(0, 1) == 0.0; }

ChartMap ChartMap::inverse() const {
    if (std::abs(M.determinant()) < tol::pole) throw DomainError("chart map is not invertible");
    ChartMap g = *this;
    g.M = M.inverse();
    if (kind == MetricKind::Flat) g.t = -(g.M * t);
    return g;
}

double check_uduality_pair(const ChartMap& f, const Mat& A, const Model& model, const std::vector<Vec>& samples) {
    if (half_dim(A) != model.nv) throw DimensionError("symplectic matrix does not match nv");
    double worst = 0.0;
    for (const auto& p : samples) {
        const CMat lhs = fractional_action(A, eval_period(model, p));
        const CMat rhs = eval_period(model, f.apply(p));
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

double minus_identity_residual(const Model& model, const std::vector<Vec>& samples) {
    const Mat A = -Mat::Identity(2 * model.nv, 2 * model.nv);
    double worst = 0.0;
    for (const auto& p : samples) {
        const CMat t = eval_period(model, p);
        worst = std::max(worst, (fractional_action(A, t) - t).cwiseAbs().maxCoeff());
    }
    return worst;
}

double diagonal_rotation_residual(const Mat& X) {
    const double asym = (X + X.transpose()).cwiseAbs().maxCoeff();
    const Mat X2 = X * X;
    const double c2 = -X2.trace() / static_cast<double>(X.rows());
    const double eq = (X2 + c2 * Mat::Identity(X.rows(), X.cols())).cwiseAbs().maxCoeff();
    return std::max(asym, eq) / std::max(1e-300, X.cwiseAbs().maxCoeff() * std::max(1.0, std::sqrt(std::abs(c2))));
}

}  // namespace emd
