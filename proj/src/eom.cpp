#include "emd/eom.hpp"

#include <cmath>
#include <sstream>

namespace emd {

Christoffel christoffel_at(const Mat4& g, const std::array<Mat4, 4>& dg) {
    const Mat4 gi = g.inverse();
    Christoffel G;
    for (int r = 0; r < 4; ++r) G[r].setZero();
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
            for (int s = 0; s < 4; ++s) {
                const double S = dg[m](s, n) + dg[n](s, m) - dg[s](m, n);
                for (int r = 0; r < 4; ++r) G[r](m, n) += 0.5 * gi(r, s) * S;
            }
    return G;
}

Mat4 ricci_at(const MetricJet& j) {
    const Mat4 gi = j.g.inverse();
    const Christoffel G = christoffel_at(j.g, j.dg);
    // dG[a][r](m, n) = d_a Gamma^r_{mn}
    std::array<Christoffel, 4> dG;
    for (int a = 0; a < 4; ++a) {
        const Mat4 dgi = -gi * j.dg[a] * gi;
        const auto& dd = j.ddg[a];
        for (int r = 0; r < 4; ++r) dG[a][r].setZero();
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n)
                for (int s = 0; s < 4; ++s) {
                    const double S = j.dg[m](s, n) + j.dg[n](s, m) - j.dg[s](m, n);
                    const double dS = dd[m](s, n) + dd[n](s, m) - dd[s](m, n);
                    for (int r = 0; r < 4; ++r) dG[a][r](m, n) += 0.5 * (dgi(r, s) * S + gi(r, s) * dS);
                }
    }
    Mat4 Ric = Mat4::Zero();
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            double v = 0.0;
            for (int r = 0; r < 4; ++r) {
                v += dG[r][r](m, n) - dG[n][r](r, m);
                for (int l = 0; l < 4; ++l) v += G[r](r, l) * G[l](m, n) - G[r](n, l) * G[l](r, m);
            }
            Ric(m, n) = v;
        }
    return 0.5 * (Ric + Ric.transpose());
}

Mat4 einstein_at(const MetricJet& j) {
    const Mat4 Ric = ricci_at(j);
    const double R = j.g.inverse().cwiseProduct(Ric).sum();
    return Ric - 0.5 * R * j.g;
}

PointCouplings couplings_at(const Theory& th, const Vec& phi) {
    const auto [N, dN] = th.period_jet(phi);
    PointCouplings c;
    c.em = {N.real(), N.imag()};
    c.J = gamma(c.em);
    for (const auto& d : dN) {
        c.dR.push_back(d.real());
        c.dI.push_back(d.imag());
        c.dJ.push_back(taming_differential(c.em, d.real(), d.imag()));
    }
    return c;
}

Mat4 einstein_residual_at(const NodeJet& j, const Theory& th, const PointCouplings& c) {
    const Mat4& g = j.metric.g;
    return einstein_at(j.metric) - stress_scalar(g, th.chart().metric(j.phi), j.dphi) - stress_gauge(g, c.J, j.V);
}

namespace {

/// div(G_ik d phi^i) = g^ab [d_j G_ik d_a phi^j d_b phi^i + G_ik (d_a d_b phi^i - Gamma^c_ab d_c phi^i)].
/// Also returns the box term without the metric-derivative part for the global assembly.
Vec trace_hessian(const NodeJet& j, const Christoffel& Gam, const Mat4& gi) {
    const int ns = static_cast<int>(j.phi.size());
    Vec out = Vec::Zero(ns);
    for (int i = 0; i < ns; ++i) {
        double v = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double h = j.ddphi[static_cast<std::size_t>(i)](a, b);
                for (int cc = 0; cc < 4; ++cc) h -= Gam[cc](a, b) * j.dphi(cc, i);
                v += gi(a, b) * h;
            }
        out[i] = v;
    }
    return out;
}

/// a_{mu nu} b^{mu nu}
double full_contraction(const Mat4& gi, const Mat4& a, const Mat4& b) { return a.cwiseProduct(raise_both(gi, b)).sum(); }

}  // namespace

Vec scalar_residual_local_at(const NodeJet& j, const Theory& th, const PointCouplings& c) {
    const Mat4& g = j.metric.g;
    const Mat4 gi = g.inverse();
    const Christoffel Gam = christoffel_at(g, j.metric.dg);
    const Mat G = th.chart().metric(j.phi);
    const std::vector<Mat> dG = th.chart().metric_derivative(j.phi);
    const int ns = th.ns(), n = th.nv();
    const Mat P = j.dphi.transpose() * gi * j.dphi;  // P_ij = d phi^i . d phi^j
    const Vec box = trace_hessian(j, Gam, gi);
    std::vector<Mat4> starF;
    for (int L = 0; L < n; ++L) starF.push_back(hodge2(g, j.V[static_cast<std::size_t>(L)]));
    Vec r(ns);
    for (int k = 0; k < ns; ++k) {
        double lhs = (G.row(k) * box)(0);
        for (int jj = 0; jj < ns; ++jj)
            for (int i = 0; i < ns; ++i) lhs += dG[static_cast<std::size_t>(jj)](i, k) * P(jj, i);
        double rhs = 0.5 * dG[static_cast<std::size_t>(k)].cwiseProduct(P).sum();
        for (int L = 0; L < n; ++L)
            for (int S = 0; S < n; ++S) {
                const Mat4& FL = j.V[static_cast<std::size_t>(L)];
                const Mat4& FS = j.V[static_cast<std::size_t>(S)];
                rhs += 0.5 * c.dR[static_cast<std::size_t>(k)](L, S) * full_contraction(gi, FL, starF[static_cast<std::size_t>(S)]);
                rhs += 0.5 * c.dI[static_cast<std::size_t>(k)](L, S) * full_contraction(gi, FL, FS);
            }
        r[k] = lhs - rhs;
    }
    return r;
}

Vec scalar_residual_global_at(const NodeJet& j, const Theory& th, const PointCouplings& c) {
    const Mat4& g = j.metric.g;
    const Mat4 gi = g.inverse();
    const Christoffel Gam = christoffel_at(g, j.metric.dg);
    const Mat G = th.chart().metric(j.phi);
    const Mat Gi = G.inverse();
    const std::vector<Mat> dG = th.chart().metric_derivative(j.phi);
    const int ns = th.ns();
    const Mat P = j.dphi.transpose() * gi * j.dphi;
    // Tr_g(nabla d phi)^m = box phi^m + Gamma_T^m_il P_il
    Vec tr = trace_hessian(j, Gam, gi);
    for (int m = 0; m < ns; ++m)
        for (int i = 0; i < ns; ++i)
            for (int l = 0; l < ns; ++l) {
                double GT = 0.0;
                for (int q = 0; q < ns; ++q)
                    GT += 0.5 * Gi(m, q) *
                          (dG[static_cast<std::size_t>(i)](q, l) + dG[static_cast<std::size_t>(l)](q, i) -
                           dG[static_cast<std::size_t>(q)](i, l));
                tr[m] += GT * P(i, l);
            }
    const TwoFormBlock sV = hodge(g, j.V);
    Vec r = G * tr;
    for (int k = 0; k < ns; ++k)
        r[k] -= kScalarSourceNormalization * 0.5 *
                twisted_pairing(g, c.J, sV, apply_fiber(c.dJ[static_cast<std::size_t>(k)], j.V));
    return r;
}

Mat maxwell_at(const NodeJet& j) {
    static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    Mat out(static_cast<Eigen::Index>(j.V.size()), 4);
    for (std::size_t A = 0; A < j.V.size(); ++A)
        for (int t = 0; t < 4; ++t) {
            const int a = kTriples[t][0], b = kTriples[t][1], c = kTriples[t][2];
            out(static_cast<Eigen::Index>(A), t) = j.dV[a][A](b, c) + j.dV[b][A](c, a) + j.dV[c][A](a, b);
        }
    return out;
}

JetField::JetField(const FieldConfiguration& cfg, SimdBackend backend, bool metric_only) : cfg_(cfg) {
    const GridPatch& P = cfg.patch;
    P.validate(5);
    const std::size_t N = P.size();
    auto d1 = [&](const Arr& in, int axis) {
        Arr out(N);
        diff1(in.data(), out.data(), P.n, axis, P.h(axis), backend);
        return out;
    };
    auto d2 = [&](const Arr& in, int axis) {
        Arr out(N);
        diff2(in.data(), out.data(), P.n, axis, P.h(axis), backend);
        return out;
    };
    for (int c = 0; c < 10; ++c)
        for (int a = 0; a < 4; ++a) dg_[a][c] = d1(cfg.g[c], a);
    for (int c = 0; c < 10; ++c)
        for (int a = 0; a < 4; ++a) {
            ddg_[a][a][c] = d2(cfg.g[c], a);
            for (int b = a + 1; b < 4; ++b) ddg_[a][b][c] = d1(dg_[a][c], b);
        }
    if (metric_only) return;
    dphi_.resize(cfg.phi.size());
    ddphi_.resize(cfg.phi.size());
    for (std::size_t i = 0; i < cfg.phi.size(); ++i)
        for (int a = 0; a < 4; ++a) {
            dphi_[i][a] = d1(cfg.phi[i], a);
            ddphi_[i][a][a] = d2(cfg.phi[i], a);
            for (int b = 0; b < a; ++b) ddphi_[i][b][a] = d1(dphi_[i][b], a);
        }
    dV_.resize(cfg.V.size());
    for (std::size_t c = 0; c < cfg.V.size(); ++c)
        for (int a = 0; a < 4; ++a) dV_[c][a] = d1(cfg.V[c], a);
}

namespace {

Mat4 sym_from(const std::array<std::vector<double>, 10>& comps, std::size_t k) {
    Mat4 m;
    for (int c = 0; c < 10; ++c) {
        const auto [mu, nu] = kSymPairs[c];
        m(mu, nu) = m(nu, mu) = comps[c][k];
    }
    return m;
}

std::string node_name(const GridPatch& p, std::size_t k) {
    const auto i = p.unflatten(k);
    std::ostringstream os;
    os << "(" << i[0] << "," << i[1] << "," << i[2] << "," << i[3] << ")";
    return os.str();
}

}  // namespace

MetricJet JetField::metric_at(std::size_t k) const {
    MetricJet j;
    j.g = cfg_.metric_at(k);
    if (!(std::abs(j.g.determinant()) > 1e-14)) throw DomainError("singular metric at node " + node_name(cfg_.patch, k));
    for (int a = 0; a < 4; ++a) j.dg[a] = sym_from(dg_[a], k);
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) j.ddg[a][b] = j.ddg[b][a] = sym_from(ddg_[a][b], k);
    return j;
}

NodeJet JetField::at(std::size_t k) const {
    NodeJet j;
    j.metric = metric_at(k);
    j.phi = cfg_.phi_at(k);
    const int ns = static_cast<int>(cfg_.phi.size());
    j.dphi.resize(4, ns);
    j.ddphi.assign(static_cast<std::size_t>(ns), Mat4::Zero());
    for (int i = 0; i < ns; ++i)
        for (int a = 0; a < 4; ++a) {
            j.dphi(a, i) = dphi_[static_cast<std::size_t>(i)][a][k];
            for (int b = 0; b <= a; ++b)
                j.ddphi[static_cast<std::size_t>(i)](a, b) = j.ddphi[static_cast<std::size_t>(i)](b, a) =
                    ddphi_[static_cast<std::size_t>(i)][b][a][k];
        }
    j.V = cfg_.V_at(k);
    for (int a = 0; a < 4; ++a) {
        j.dV[a].assign(j.V.size(), Mat4::Zero());
        for (std::size_t A = 0; A < j.V.size(); ++A)
            for (int c = 0; c < 6; ++c) {
                const auto [mu, nu] = kPairs[c];
                j.dV[a][A](mu, nu) = dV_[A * 6 + c][a][k];
                j.dV[a][A](nu, mu) = -dV_[A * 6 + c][a][k];
            }
    }
    return j;
}

std::vector<Christoffel> christoffel(const FieldConfiguration& cfg, int margin) {
    const JetField J(cfg, default_backend(), true);
    std::vector<Christoffel> out;
    for (std::size_t k : cfg.patch.interior(margin)) {
        const MetricJet m = J.metric_at(k);
        out.push_back(christoffel_at(m.g, m.dg));
    }
    return out;
}

std::vector<Mat4> ricci(const FieldConfiguration& cfg, int margin) {
    const JetField J(cfg, default_backend(), true);
    std::vector<Mat4> out;
    for (std::size_t k : cfg.patch.interior(margin)) out.push_back(ricci_at(J.metric_at(k)));
    return out;
}

std::vector<Mat4> einstein(const FieldConfiguration& cfg, int margin) {
    const JetField J(cfg, default_backend(), true);
    std::vector<Mat4> out;
    for (std::size_t k : cfg.patch.interior(margin)) out.push_back(einstein_at(J.metric_at(k)));
    return out;
}

ResidualField evaluate_residuals(const FieldConfiguration& cfg, SimdBackend backend, int margin) {
    cfg.patch.validate();
    const JetField J(cfg, backend);
    ResidualField r;
    r.patch = cfg.patch;
    r.nodes = cfg.patch.interior(margin);
    r.values.reserve(r.nodes.size());
    for (std::size_t k : r.nodes) {
        const NodeJet j = J.at(k);
        PointCouplings c;
        try {
            c = couplings_at(cfg.theory, j.phi);
        } catch (const ModelInvalidError& e) {
            throw DomainError("invalid couplings at node " + node_name(cfg.patch, k) + ": " + e.what());
        }
        NodeResidual v;
        v.einstein = einstein_residual_at(j, cfg.theory, c);
        v.scalar_local = scalar_residual_local_at(j, cfg.theory, c);
        v.scalar_global = scalar_residual_global_at(j, cfg.theory, c);
        v.maxwell = maxwell_at(j);
        v.selfduality = twisted_selfduality_residual(j.metric.g, c.J, j.V);
        r.values.push_back(std::move(v));
    }
    return r;
}

ResidualReport summarize(const ResidualField& r) {
    ResidualReport rep;
    rep.resolution = r.patch.n;
    for (int a = 0; a < 4; ++a) rep.spacing[a] = r.patch.h(a);
    rep.nodes = r.nodes.size();
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
        const auto& v = r.values[q];
        const double e = v.einstein.cwiseAbs().maxCoeff();
        const double s = v.scalar_local.size() ? v.scalar_local.cwiseAbs().maxCoeff() : 0.0;
        const double sg = v.scalar_global.size() ? v.scalar_global.cwiseAbs().maxCoeff() : 0.0;
        const double m = v.maxwell.size() ? v.maxwell.cwiseAbs().maxCoeff() : 0.0;
        const double gap = v.scalar_local.size() ? (v.scalar_local - v.scalar_global).cwiseAbs().maxCoeff() : 0.0;
        if (e > rep.einstein_max) rep.einstein_max = e, rep.einstein_worst = r.patch.unflatten(r.nodes[q]);
        if (s > rep.scalar_max) rep.scalar_max = s, rep.scalar_worst = r.patch.unflatten(r.nodes[q]);
        if (m > rep.maxwell_max) rep.maxwell_max = m, rep.maxwell_worst = r.patch.unflatten(r.nodes[q]);
        rep.scalar_global_max = std::max(rep.scalar_global_max, sg);
        rep.scalar_assembly_gap = std::max(rep.scalar_assembly_gap, gap);
        rep.selfduality_max = std::max(rep.selfduality_max, v.selfduality);
        rep.einstein_mean += e;
        rep.scalar_mean += s;
        rep.maxwell_mean += m;
    }
    if (rep.nodes) {
        rep.einstein_mean /= double(rep.nodes);
        rep.scalar_mean /= double(rep.nodes);
        rep.maxwell_mean /= double(rep.nodes);
    }
    if (rep.selfduality_max > 1e-8)
        rep.warnings.push_back("configuration is not twisted self-dual (max residual " +
                               std::to_string(rep.selfduality_max) + ")");
    return rep;
}

FieldConfiguration transport_config(const ChartMap& f, const Mat& A, const FieldConfiguration& cfg) {
    FieldConfiguration out(cfg.patch, cfg.theory.transformed(f, A));
    out.g = cfg.g;
    for (std::size_t k = 0; k < cfg.patch.size(); ++k) {
        const Vec p = f.apply(cfg.phi_at(k));
        if (!out.theory.chart().contains(p))
            throw DomainError("transport: scalar leaves the chart at node " + node_name(cfg.patch, k));
        out.set_node(k, cfg.metric_at(k), p, apply_fiber(A, cfg.V_at(k)));
    }
    return out;
}

double EquivarianceReport::max_gap() const { return std::max({einstein_gap, scalar_gap, maxwell_gap}); }

EquivarianceReport equivariance_harness(const FieldConfiguration& cfg, const ChartMap& f, const Mat& A,
                                        SimdBackend backend) {
    if (!f.is_affine()) throw DomainError("equivariance harness: chart map must be affine");
    const FieldConfiguration moved = transport_config(f, A, cfg);
    const ResidualField r0 = evaluate_residuals(cfg, backend);
    const ResidualField r1 = evaluate_residuals(moved, backend);
    EquivarianceReport rep;
    rep.before = summarize(r0);
    rep.after = summarize(r1);
    rep.selfduality_after = rep.after.selfduality_max;
    double se = 1.0, ss = 1.0, sm = 1.0;
    for (std::size_t q = 0; q < r0.nodes.size(); ++q) {
        const auto& a = r0.values[q];
        const auto& b = r1.values[q];
        const Mat DfT_inv = f.jacobian(cfg.phi_at(r0.nodes[q])).transpose().inverse();
        rep.einstein_gap = std::max(rep.einstein_gap, (b.einstein - a.einstein).cwiseAbs().maxCoeff());
        rep.scalar_gap = std::max({rep.scalar_gap, (b.scalar_local - DfT_inv * a.scalar_local).cwiseAbs().maxCoeff(),
                                   (b.scalar_global - DfT_inv * a.scalar_global).cwiseAbs().maxCoeff()});
        rep.maxwell_gap = std::max(rep.maxwell_gap, (b.maxwell - A * a.maxwell).cwiseAbs().maxCoeff());
        se = std::max(se, a.einstein.cwiseAbs().maxCoeff());
        ss = std::max(ss, a.scalar_local.cwiseAbs().maxCoeff());
        sm = std::max(sm, a.maxwell.cwiseAbs().maxCoeff() * std::max(1.0, A.cwiseAbs().maxCoeff()));
    }
    rep.einstein_gap /= se;
    rep.scalar_gap /= ss;
    rep.maxwell_gap /= sm;
    return rep;
}

}  // namespace emd
