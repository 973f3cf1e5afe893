#include "emd/spinor.hpp"

#include <cmath>

namespace emd {

namespace {

Mat4 kron(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

CliffordRep build_rep() {
    Eigen::Matrix2d one = Eigen::Matrix2d::Identity(), s1, s3, e;
    s1 << 0, 1, 1, 0;
    s3 << 1, 0, 0, -1;
    e << 0, 1, -1, 0;
    CliffordRep r;
    r.gamma = {kron(e, one), kron(s1, one), kron(s3, s1), kron(s3, s3)};
    r.eta = minkowski();
    r.gamma5 = r.gamma[0] * r.gamma[1] * r.gamma[2] * r.gamma[3];
    r.C = r.gamma[0];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) r.gamma_ab[a][b] = 0.5 * (r.gamma[a] * r.gamma[b] - r.gamma[b] * r.gamma[a]);
    return r;
}

}  // namespace

const CliffordRep& clifford_rep() {
    static const CliffordRep rep = build_rep();
    return rep;
}

FramePatch FramePatch::from_function(const GridPatch& grid, const std::function<Mat4(const Vec4&)>& frame) {
    FramePatch fr;
    fr.grid = grid;
    for (auto& c : fr.e) c.assign(grid.size(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Mat4 e = frame(grid.coord(k));
        if (!(std::abs(e.determinant()) > 1e-14)) throw DomainError("singular frame");
        for (int a = 0; a < 4; ++a)
            for (int m = 0; m < 4; ++m) fr.e[a * 4 + m][k] = e(a, m);
    }
    return fr;
}

Mat4 FramePatch::frame_at(std::size_t k) const {
    Mat4 e;
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m) e(a, m) = this->e[a * 4 + m][k];
    return e;
}

Mat4 FramePatch::metric_at(std::size_t k) const {
    const Mat4 e = frame_at(k);
    return e.transpose() * minkowski() * e;
}

FramePatch builtin_frame(const std::string& name, double lambda, int resolution) {
    GridPatch g;
    g.n = {resolution, resolution, resolution, resolution};
    g.lo = {0, 0, 0, 0};
    g.hi = {1, 1, 1, 1};
    if (name == "minkowski") return FramePatch::from_function(g, [](const Vec4&) { return Mat4::Identity().eval(); });
    if (name == "ads4-poincare") {
        if (!(lambda > 0)) throw DomainError("ads4-poincare needs lambda > 0");
        g.lo[3] = 2.0;
        g.hi[3] = 3.0;
        return FramePatch::from_function(g, [lambda](const Vec4& x) { return (Mat4::Identity() / (lambda * x[3])).eval(); });
    }
    throw LookupError("unknown frame '" + name + "'");
}

namespace {

/// Frame derivatives and the pointwise geometry built from them.
class FrameGeometry {
public:
    FrameGeometry(const FramePatch& fr, SimdBackend backend) : fr_(fr) {
        const auto& P = fr.grid;
        for (int m = 0; m < 4; ++m)
            for (int c = 0; c < 16; ++c) {
                de_[m][c].resize(P.size());
                diff1(fr.e[c].data(), de_[m][c].data(), P.n, m, P.h(m), backend);
            }
    }

    struct Node {
        Mat4 e, E, g;
        std::array<Mat4, 4> de, dg;
        Christoffel Gam;
    };

    Node at(std::size_t k) const {
        Node n;
        n.e = fr_.frame_at(k);
        n.E = n.e.inverse();
        const Mat4 eta = minkowski();
        n.g = n.e.transpose() * eta * n.e;
        for (int m = 0; m < 4; ++m) {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) n.de[m](a, b) = de_[m][a * 4 + b][k];
            n.dg[m] = n.de[m].transpose() * eta * n.e + n.e.transpose() * eta * n.de[m];
        }
        n.Gam = christoffel_at(n.g, n.dg);
        return n;
    }

private:
    const FramePatch& fr_;
    std::array<std::array<std::vector<double>, 16>, 4> de_;
};

std::array<Mat4, 4> connection_at(const FrameGeometry::Node& n) {
    const Mat4 eta = minkowski();
    std::array<Mat4, 4> w;
    for (int m = 0; m < 4; ++m) {
        const Mat4 dE = -n.E * n.de[m] * n.E;
        Mat4 Gm;  // Gm(nu, l) = Gamma^nu_{m l}
        for (int nu = 0; nu < 4; ++nu) Gm.row(nu) = n.Gam[nu].row(m);
        const Mat4 W = n.e * (dE + Gm * n.E);  // omega_m^a_b
        const Mat4 low = eta * W;
        w[m] = 0.5 * (low - low.transpose());
    }
    return w;
}

/// 1/4 omega_{mu ab} gamma^{ab}
Mat4 spin_matrix(const Mat4& w) {
    const auto& R = clifford_rep();
    Mat4 S = Mat4::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) S += 0.5 * w(a, b) * R.eta(a, a) * R.eta(b, b) * R.gamma_ab[a][b];
    return S;
}

Mat4 gamma_coord(const Mat4& e, int mu) {
    const auto& R = clifford_rep();
    Mat4 g = Mat4::Zero();
    for (int a = 0; a < 4; ++a) g += e(a, mu) * R.gamma[a];
    return g;
}

}  // namespace

std::array<Mat4, 4> SpinConnection::at(std::size_t k) const {
    std::array<Mat4, 4> out;
    for (int m = 0; m < 4; ++m) {
        out[m].setZero();
        for (int c = 0; c < 6; ++c) {
            const auto [a, b] = kPairs[c];
            out[m](a, b) = w[m * 6 + c][k];
            out[m](b, a) = -w[m * 6 + c][k];
        }
    }
    return out;
}

SpinConnection SpinConnection::scaled(double s) const {
    SpinConnection out = *this;
    for (auto& c : out.w)
        for (auto& v : c) v *= s;
    return out;
}

SpinConnection spin_connection(const FramePatch& fr, SimdBackend backend) {
    fr.grid.validate(3);
    const FrameGeometry geo(fr, backend);
    SpinConnection sc;
    sc.grid = fr.grid;
    for (auto& c : sc.w) c.assign(fr.grid.size(), 0.0);
    for (std::size_t k = 0; k < fr.grid.size(); ++k) {
        const auto w = connection_at(geo.at(k));
        for (int m = 0; m < 4; ++m)
            for (int c = 0; c < 6; ++c) sc.w[m * 6 + c][k] = w[m](kPairs[c][0], kPairs[c][1]);
    }
    return sc;
}

double frame_postulate_residual(const FramePatch& fr, const SpinConnection& w, int margin) {
    const FrameGeometry geo(fr, default_backend());
    const Mat4 eta = minkowski();
    double worst = 0.0;
    for (std::size_t k : fr.grid.interior(margin)) {
        const auto n = geo.at(k);
        const auto om = w.at(k);
        for (int m = 0; m < 4; ++m) {
            Mat4 Ge;  // sum_r e(a, r) Gamma^r_{m nu}
            Ge.setZero();
            for (int r = 0; r < 4; ++r) Ge += n.e.col(r) * n.Gam[r].row(m);
            const Mat4 res = n.de[m] - Ge + eta * om[m] * n.e;
            worst = std::max(worst, res.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

Vec4 SpinorField::at(std::size_t k) const { return Vec4(c[0][k], c[1][k], c[2][k], c[3][k]); }
Vec4 OneFormField::at(std::size_t k) const { return Vec4(c[0][k], c[1][k], c[2][k], c[3][k]); }

KillingResidual killing_residual(const FramePatch& fr, const SpinConnection& w, const SpinorField& eps, int margin) {
    return killing_residual_at(fr, w, eps, fr.grid.interior(margin));
}

KillingResidual killing_residual_at(const FramePatch& fr, const SpinConnection& w, const SpinorField& eps,
                                    const std::vector<std::size_t>& nodes) {
    const auto& P = fr.grid;
    std::array<std::array<std::vector<double>, 4>, 4> d;  // d[mu][i]
    for (int m = 0; m < 4; ++m)
        for (int i = 0; i < 4; ++i) {
            d[m][i].resize(P.size());
            diff1(eps.c[i].data(), d[m][i].data(), P.n, m, P.h(m), default_backend());
        }
    KillingResidual r;
    for (std::size_t k : nodes) {
        const Mat4 e = fr.frame_at(k);
        const auto om = w.at(k);
        const Vec4 x = eps.at(k);
        for (int m = 0; m < 4; ++m) {
            const Vec4 dx(d[m][0][k], d[m][1][k], d[m][2][k], d[m][3][k]);
            const Vec4 res = dx + spin_matrix(om[m]) * x - 0.5 * eps.lambda * gamma_coord(e, m) * x;
            r.per_direction[m] = std::max(r.per_direction[m], res.cwiseAbs().maxCoeff());
        }
    }
    for (double v : r.per_direction) r.max = std::max(r.max, v);
    return r;
}

KillingResidual killing_residual(const FramePatch& fr, const SpinorField& eps, int margin) {
    return killing_residual(fr, spin_connection(fr), eps, margin);
}

SpinorField integrate_along(const FramePatch& fr, const SpinConnection& w, double lambda, const Vec4& eps0,
                            const std::array<int, 4>& order) {
    const auto& P = fr.grid;
    P.validate(4);
    const std::size_t N = P.size();
    // A[mu][k] = -1/4 omega_{mu ab} gamma^{ab} + lambda/2 gamma_mu, so that d_mu eps = A eps.
    std::array<std::vector<Mat4>, 4> A;
    for (int m = 0; m < 4; ++m) A[m].resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        const Mat4 e = fr.frame_at(k);
        const auto om = w.at(k);
        for (int m = 0; m < 4; ++m) A[m][k] = -spin_matrix(om[m]) + 0.5 * lambda * gamma_coord(e, m);
    }
    SpinorField out;
    out.grid = P;
    out.lambda = lambda;
    for (auto& c : out.c) c.assign(N, 0.0);
    std::vector<char> filled(N, 0);
    auto put = [&](std::size_t k, const Vec4& v) {
        for (int i = 0; i < 4; ++i) out.c[i][k] = v[i];
        filled[k] = 1;
    };
    put(0, eps0);
    for (int axis : order) {
        std::vector<std::size_t> starts;
        for (std::size_t k = 0; k < N; ++k)
            if (filled[k]) starts.push_back(k);
        const int L = P.n[axis];
        const double h = P.h(axis);
        for (std::size_t k0 : starts) {
            auto idx = P.unflatten(k0);
            auto node = [&](int i) {
                auto j = idx;
                j[axis] = i;
                return P.index(j);
            };
            Vec4 x = out.at(k0);
            for (int i = 0; i + 1 < L; ++i) {
                // 4-point interpolation of the connection at the midpoint of [i, i+1].
                Mat4 Am;
                if (i == 0)
                    Am = (5 * A[axis][node(0)] + 15 * A[axis][node(1)] - 5 * A[axis][node(2)] + A[axis][node(3)]) / 16;
                else if (i + 2 > L - 1)
                    Am = (A[axis][node(L - 4)] - 5 * A[axis][node(L - 3)] + 15 * A[axis][node(L - 2)] + 5 * A[axis][node(L - 1)]) / 16;
                else
                    Am = (-A[axis][node(i - 1)] + 9 * A[axis][node(i)] + 9 * A[axis][node(i + 1)] - A[axis][node(i + 2)]) / 16;
                const Mat4& A0 = A[axis][node(i)];
                const Mat4& A1 = A[axis][node(i + 1)];
                const Vec4 k1 = A0 * x;
                const Vec4 k2 = Am * (x + 0.5 * h * k1);
                const Vec4 k3 = Am * (x + 0.5 * h * k2);
                const Vec4 k4 = A1 * (x + h * k3);
                x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                put(node(i + 1), x);
            }
        }
    }
    return out;
}

KillingIntegration integrate_killing(const FramePatch& fr, const SpinConnection& w, double lambda, const Vec4& eps0) {
    KillingIntegration r;
    r.field = integrate_along(fr, w, lambda, eps0, {0, 1, 2, 3});
    const SpinorField other = integrate_along(fr, w, lambda, eps0, {3, 2, 1, 0});
    const std::size_t far = fr.grid.size() - 1;
    r.path_defect = (r.field.at(far) - other.at(far)).cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < fr.grid.size(); ++k)
        r.path_defect_max = std::max(r.path_defect_max, (r.field.at(k) - other.at(k)).cwiseAbs().maxCoeff());
    return r;
}

KillingIntegration integrate_killing(const FramePatch& fr, double lambda, const Vec4& eps0) {
    return integrate_killing(fr, spin_connection(fr), lambda, eps0);
}

double einstein_constant_residual(const FramePatch& fr, double k, int margin) {
    return einstein_constant_residual_at(fr, k, fr.grid.interior(margin));
}

double einstein_constant_residual_at(const FramePatch& fr, double k, const std::vector<std::size_t>& nodes) {
    FieldConfiguration cfg(fr.grid, Theory::of(constant_i(1)));
    for (std::size_t q = 0; q < fr.grid.size(); ++q) {
        const Mat4 g = fr.metric_at(q);
        for (int c = 0; c < 10; ++c) cfg.g[c][q] = g(kSymPairs[c][0], kSymPairs[c][1]);
    }
    const JetField J(cfg, default_backend(), true);
    double worst = 0.0;
    for (std::size_t q : nodes) {
        const MetricJet m = J.metric_at(q);
        worst = std::max(worst, (ricci_at(m) - k * m.g).cwiseAbs().maxCoeff());
    }
    return worst;
}

namespace {

OneFormField empty_form(const GridPatch& g) {
    OneFormField f;
    f.grid = g;
    for (auto& c : f.c) c.assign(g.size(), 0.0);
    return f;
}

void set_form(OneFormField& f, std::size_t k, const Vec4& v) {
    for (int i = 0; i < 4; ++i) f.c[i][k] = v[i];
}

/// d[mu][nu] arrays of d_mu f_nu.
std::array<std::array<std::vector<double>, 4>, 4> form_derivatives(const OneFormField& f) {
    std::array<std::array<std::vector<double>, 4>, 4> d;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            d[m][n].resize(f.grid.size());
            diff1(f.c[n].data(), d[m][n].data(), f.grid.n, m, f.grid.h(m), default_backend());
        }
    return d;
}

/// (nabla f)(mu, nu) = d_mu f_nu - Gamma^r_{mu nu} f_r
Mat4 covariant(const std::array<std::array<std::vector<double>, 4>, 4>& d, const Christoffel& G, const Vec4& f,
               std::size_t k) {
    Mat4 out;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            double v = d[m][n][k];
            for (int r = 0; r < 4; ++r) v -= G[r](m, n) * f[r];
            out(m, n) = v;
        }
    return out;
}

}  // namespace

Bilinears bilinears(const FramePatch& fr, const SpinorField& eps, double l_sign) {
    const auto& R = clifford_rep();
    Bilinears b;
    b.u = empty_form(fr.grid);
    b.l = empty_form(fr.grid);
    for (std::size_t k = 0; k < fr.grid.size(); ++k) {
        const Mat4 e = fr.frame_at(k);
        const Vec4 x = eps.at(k);
        Vec4 ua;
        Mat4 Phi_ab;
        for (int a = 0; a < 4; ++a) {
            ua[a] = x.dot(R.C * R.gamma[a] * x);
            b.gamma5_bilinear_max = std::max(b.gamma5_bilinear_max, std::abs(x.dot(R.C * R.gamma[a] * R.gamma5 * x)));
            for (int c = 0; c < 4; ++c) Phi_ab(a, c) = x.dot(R.C * R.gamma_ab[a][c] * x);
        }
        const Vec4 u = e.transpose() * ua;
        const Mat4 Phi = e.transpose() * Phi_ab * e;
        set_form(b.u, k, u);
        if (std::abs(u[0]) > 1e-300) set_form(b.l, k, l_sign * Phi.col(0) / u[0]);
    }
    return b;
}

OneFormField fit_kappa(const FramePatch& fr, const OneFormField& u, const OneFormField& l, double lambda,
                       bool kappa_first) {
    const FrameGeometry geo(fr, default_backend());
    const auto dl = form_derivatives(l);
    OneFormField kappa = empty_form(fr.grid);
    for (std::size_t k = 0; k < fr.grid.size(); ++k) {
        const auto n = geo.at(k);
        const Vec4 lk = l.at(k), uk = u.at(k);
        const Mat4 X = covariant(dl, n.Gam, lk, k) - lambda * (lk * lk.transpose() - n.g);
        const double uu = uk.squaredNorm();
        if (uu == 0.0) continue;
        set_form(kappa, k, kappa_first ? Vec4(X * uk / uu) : Vec4(X.transpose() * uk / uu));
    }
    return kappa;
}

bool FirstOrderReport::algebraic_ok(double tol) const {
    return null_residual <= tol && unit_residual <= tol && orth_residual <= tol;
}

FirstOrderReport verify_first_order(const FramePatch& fr, const OneFormField& u, const OneFormField& l, const OneFormField& kappa,
                         double lambda, bool kappa_first, int margin) {
    return verify_first_order_at(fr, u, l, kappa, lambda, kappa_first, fr.grid.interior(margin));
}

FirstOrderReport verify_first_order_at(const FramePatch& fr, const OneFormField& u, const OneFormField& l,
                            const OneFormField& kappa, double lambda, bool kappa_first,
                            const std::vector<std::size_t>& nodes) {
    const FrameGeometry geo(fr, default_backend());
    const auto du = form_derivatives(u);
    const auto dl = form_derivatives(l);
    const auto dk = form_derivatives(kappa);
    FirstOrderReport r;
    for (std::size_t k = 0; k < fr.grid.size(); ++k) r.u_max = std::max(r.u_max, u.at(k).cwiseAbs().maxCoeff());
    r.nontrivial = r.u_max > 1e-12;
    for (std::size_t k : nodes) {
        const auto n = geo.at(k);
        const Mat4 gi = n.g.inverse();
        const Vec4 uk = u.at(k), lk = l.at(k), kk = kappa.at(k);
        const Mat4 Du = covariant(du, n.Gam, uk, k);
        const Mat4 Dl = covariant(dl, n.Gam, lk, k);
        const Mat4 wedge = uk * lk.transpose() - lk * uk.transpose();
        const Mat4 ku = kappa_first ? Mat4(kk * uk.transpose()) : Mat4(uk * kk.transpose());
        r.du_residual = std::max(r.du_residual, (Du - lambda * wedge).cwiseAbs().maxCoeff());
        r.dl_residual = std::max(r.dl_residual, (Dl - ku - lambda * (lk * lk.transpose() - n.g)).cwiseAbs().maxCoeff());
        r.null_residual = std::max(r.null_residual, std::abs(uk.dot(gi * uk)));
        r.unit_residual = std::max(r.unit_residual, std::abs(lk.dot(gi * lk) - 1.0));
        r.orth_residual = std::max(r.orth_residual, std::abs(uk.dot(gi * lk)));
        r.killing_residual = std::max(r.killing_residual, (Du + Du.transpose()).cwiseAbs().maxCoeff());
        r.geodesic_residual = std::max(r.geodesic_residual, (Du.transpose() * (gi * uk)).cwiseAbs().maxCoeff());
        for (int m = 0; m < 4; ++m)
            for (int q = m + 1; q < 4; ++q) r.dkappa_max = std::max(r.dkappa_max, std::abs(dk[m][q][k] - dk[q][m][k]));
    }
    return r;
}

FirstOrderSearch search_first_order(const FramePatch& fr, const SpinorField& eps, double lambda) {
    return search_first_order_at(fr, eps, lambda, fr.grid.interior(2));
}

FirstOrderSearch search_first_order_at(const FramePatch& fr, const SpinorField& eps, double lambda,
                           const std::vector<std::size_t>& nodes) {
    FirstOrderSearch s;
    double best = 1e300;
    for (double sign : {1.0, -1.0}) {
        const Bilinears b = bilinears(fr, eps, sign);
        for (bool kf : {true, false}) {
            const OneFormField kappa = fit_kappa(fr, b.u, b.l, lambda, kf);
            const FirstOrderReport rep = verify_first_order_at(fr, b.u, b.l, kappa, lambda, kf, nodes);
            const double score = std::max(rep.du_residual, rep.dl_residual);
            if (score < best) {
                best = score;
                s.best = s.entries.size();
            }
            s.entries.push_back({sign, kf, rep});
        }
    }
    return s;
}

CMat chiral_projector(int sign) {
    const CMat g5 = clifford_rep().gamma5.cast<cplx>();
    return 0.5 * (CMat::Identity(4, 4) - double(sign) * cplx(0, 1) * g5);
}

std::array<CVec, 4> t_w(cplx w, const CVec& e1, const CVec& e2) {
    std::array<CVec, 4> out;
    const CVec mix = w * e1 + std::conj(w) * e2;
    for (int a = 0; a < 4; ++a) out[a] = clifford_rep().gamma[a].cast<cplx>() * mix;
    return out;
}

ChiralCheck chiral_operator_check(cplx w, const CVec& e1_in, const CVec& e2_in) {
    if (e1_in.size() != 4 || e2_in.size() != 4) throw DimensionError("chiral check needs 4-component spinors");
    ChiralCheck c;
    const CMat Pp = chiral_projector(+1), Pm = chiral_projector(-1);
    CVec e1 = e1_in, e2 = e2_in;
    const double scale = std::max(1.0, std::max(e1.cwiseAbs().maxCoeff(), e2.cwiseAbs().maxCoeff()));
    if ((Pp * e1 - e1).cwiseAbs().maxCoeff() > 1e-12 * scale || (Pm * e2 - e2).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        e1 = Pp * e1;
        e2 = Pm * e2;
        c.projected = true;
        c.warnings.push_back("input was not chiral; projected onto the gamma5 eigenspaces");
    }
    const cplx alpha(0.3, -1.7);
    const auto T = t_w(w, e1, e2);
    const auto Ta = t_w(w, alpha * e1, alpha * e2);
    const auto Tc = t_w(w, e2.conjugate(), e1.conjugate());
    for (int a = 0; a < 4; ++a) {
        c.linearity = std::max(c.linearity, (Ta[a] - alpha * T[a]).cwiseAbs().maxCoeff());
        c.conjugation = std::max(c.conjugation, (T[a].conjugate() - Tc[a]).cwiseAbs().maxCoeff());
    }
    if (w.imag() == 0.0) {
        const CVec real = e1 + e1.conjugate();  // c-real spinor with chiral halves e1, conj(e1)
        const auto Tr = t_w(w, Pp * real, Pm * real);
        for (int a = 0; a < 4; ++a)
            c.real_reduction = std::max(
                c.real_reduction, (Tr[a] - w.real() * clifford_rep().gamma[a].cast<cplx>() * real).cwiseAbs().maxCoeff());
    }
    return c;
}

}  // namespace emd
