#include "emd/grid.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace emd {

GridPatch GridPatch::cube(const Vec4& center, double half_width, int resolution) {
    GridPatch p;
    for (int a = 0; a < 4; ++a) {
        p.lo[a] = center[a] - half_width;
        p.hi[a] = center[a] + half_width;
        p.n[a] = resolution;
    }
    return p;
}

void GridPatch::validate(int min_resolution) const {
    for (int a = 0; a < 4; ++a) {
        if (n[a] < min_resolution)
            throw DimensionError("grid: axis " + std::to_string(a) + " has " + std::to_string(n[a]) +
                                 " nodes, need >= " + std::to_string(min_resolution));
        if (!(hi[a] > lo[a])) throw DomainError("grid: empty extent on axis " + std::to_string(a));
    }
}

double GridPatch::h(int axis) const { return (hi[axis] - lo[axis]) / (n[axis] - 1); }

std::size_t GridPatch::index(const std::array<int, 4>& i) const {
    return ((static_cast<std::size_t>(i[0]) * n[1] + i[1]) * n[2] + i[2]) * n[3] + i[3];
}

std::array<int, 4> GridPatch::unflatten(std::size_t k) const {
    std::array<int, 4> i{};
    for (int a = 3; a >= 0; --a) {
        i[a] = static_cast<int>(k % static_cast<std::size_t>(n[a]));
        k /= static_cast<std::size_t>(n[a]);
    }
    return i;
}

Vec4 GridPatch::coord(std::size_t k) const {
    const auto i = unflatten(k);
    Vec4 x;
    for (int a = 0; a < 4; ++a) x[a] = lo[a] + i[a] * h(a);
    return x;
}

std::vector<std::size_t> GridPatch::interior(int margin) const {
    std::vector<std::size_t> out;
    std::array<int, 4> i{};
    for (i[0] = margin; i[0] < n[0] - margin; ++i[0])
        for (i[1] = margin; i[1] < n[1] - margin; ++i[1])
            for (i[2] = margin; i[2] < n[2] - margin; ++i[2])
                for (i[3] = margin; i[3] < n[3] - margin; ++i[3]) out.push_back(index(i));
    return out;
}

std::vector<std::size_t> common_nodes(const GridPatch& fine, const GridPatch& coarse, int margin) {
    for (int a = 0; a < 4; ++a)
        if (fine.n[a] - 1 != 2 * (coarse.n[a] - 1) || fine.lo[a] != coarse.lo[a] || fine.hi[a] != coarse.hi[a])
            throw DimensionError("common_nodes: fine patch is not a 2x refinement of the coarse patch");
    std::vector<std::size_t> out;
    for (std::size_t k : coarse.interior(margin)) {
        auto i = coarse.unflatten(k);
        for (auto& v : i) v *= 2;
        out.push_back(fine.index(i));
    }
    return out;
}

Theory Theory::of(Model m) {
    Theory t;
    t.model = std::move(m);
    return t;
}

Theory Theory::transformed(const ChartMap& f, const Mat& A) const {
    if (half_dim(A) != nv()) throw DimensionError("transform: symplectic matrix does not match nv");
    if (!sp_check(A, 1e-9).ok) throw DomainError("transform: matrix is not symplectic");
    if (f.kind != model.chart.kind) throw DomainError("transform: chart map kind does not match the chart");
    if (!f.is_isometry(1e-10)) throw DomainError("transform: chart map is not an isometry");
    Theory t = *this;
    t.steps.push_back({f, f.inverse(), A});
    return t;
}

namespace {

std::pair<CMat, std::vector<CMat>> jet_at(const Theory& th, const Vec& p, std::size_t level) {
    if (level == 0) {
        if (!th.model.chart.contains(p)) throw ModelInvalidError("point outside chart domain", p);
        return {eval_period(th.model, p), eval_period_partials(th.model, p)};
    }
    const auto& st = th.steps[level - 1];
    const Vec q = st.finv.apply(p);
    const Mat Dq = st.finv.jacobian(p);
    auto [Nq, dNq] = jet_at(th, q, level - 1);
    const int n = th.nv();
    const Mat a = st.A.topLeftCorner(n, n), b = st.A.topRightCorner(n, n);
    const Mat d = st.A.bottomRightCorner(n, n);
    const CMat N = fractional_action(st.A, Nq);
    const CMat Xinv = (a.cast<cplx>() + b.cast<cplx>() * Nq).inverse();
    const CMat L = d.cast<cplx>() - N * b.cast<cplx>();
    std::vector<CMat> dN;
    for (int k = 0; k < Dq.cols(); ++k) {
        CMat dq = CMat::Zero(n, n);
        for (int j = 0; j < Dq.rows(); ++j) dq += dNq[static_cast<std::size_t>(j)] * Dq(j, k);
        CMat v = L * dq * Xinv;
        dN.push_back(0.5 * (v + v.transpose()));
    }
    return {N, dN};
}

}  // namespace

CMat Theory::period(const Vec& p) const { return period_jet(p).first; }

std::pair<CMat, std::vector<CMat>> Theory::period_jet(const Vec& p) const { return jet_at(*this, p, steps.size()); }

ElectromagneticPair Theory::couplings(const Vec& p) const {
    const CMat N = period(p);
    return {N.real(), N.imag()};
}

Mat Theory::taming(const Vec& p) const { return gamma(couplings(p)); }

Mat taming_differential(const ElectromagneticPair& em, const Mat& dR, const Mat& dI) {
    const Mat K = em.I.inverse();
    const Mat dK = -K * dI * K;
    const Mat& R = em.R;
    const int n = em.n();
    Mat dJ(2 * n, 2 * n);
    dJ.topLeftCorner(n, n) = -dK * R - K * dR;
    dJ.topRightCorner(n, n) = dK;
    dJ.bottomLeftCorner(n, n) = -dI - dR * K * R - R * dK * R - R * K * dR;
    dJ.bottomRightCorner(n, n) = dR * K + R * dK;
    return dJ;
}

std::vector<Mat> Theory::taming_partials(const Vec& p) const {
    const auto [N, dN] = period_jet(p);
    const ElectromagneticPair em{N.real(), N.imag()};
    std::vector<Mat> out;
    for (const auto& d : dN) out.push_back(taming_differential(em, d.real(), d.imag()));
    return out;
}

int sym_index(int mu, int nu) {
    if (mu > nu) std::swap(mu, nu);
    for (int k = 0; k < 10; ++k)
        if (kSymPairs[k][0] == mu && kSymPairs[k][1] == nu) return k;
    throw DimensionError("sym_index out of range");
}

int pair_index(int mu, int nu) {
    for (int k = 0; k < 6; ++k)
        if (kPairs[k][0] == mu && kPairs[k][1] == nu) return k;
    throw DimensionError("pair_index requires mu < nu < 4");
}

FieldConfiguration::FieldConfiguration(GridPatch p, Theory t) : patch(p), theory(std::move(t)) {
    const std::size_t N = patch.size();
    for (auto& c : g) c.assign(N, 0.0);
    phi.assign(static_cast<std::size_t>(theory.ns()), std::vector<double>(N, 0.0));
    V.assign(static_cast<std::size_t>(12 * theory.nv()), std::vector<double>(N, 0.0));
}

Mat4 FieldConfiguration::metric_at(std::size_t k) const {
    Mat4 m;
    for (int c = 0; c < 10; ++c) {
        const auto [mu, nu] = kSymPairs[c];
        m(mu, nu) = m(nu, mu) = g[c][k];
    }
    return m;
}

Vec FieldConfiguration::phi_at(std::size_t k) const {
    Vec p(static_cast<Eigen::Index>(phi.size()));
    for (std::size_t i = 0; i < phi.size(); ++i) p[static_cast<Eigen::Index>(i)] = phi[i][k];
    return p;
}

TwoFormBlock FieldConfiguration::V_at(std::size_t k) const {
    TwoFormBlock out(V.size() / 6, Mat4::Zero());
    for (std::size_t A = 0; A < out.size(); ++A)
        for (int c = 0; c < 6; ++c) {
            const auto [mu, nu] = kPairs[c];
            out[A](mu, nu) = V[A * 6 + c][k];
            out[A](nu, mu) = -V[A * 6 + c][k];
        }
    return out;
}

void FieldConfiguration::set_node(std::size_t k, const Mat4& gk, const Vec& phik, const TwoFormBlock& Vk) {
    if (phik.size() != static_cast<Eigen::Index>(phi.size()) || Vk.size() * 6 != V.size())
        throw DimensionError("set_node: size mismatch");
    for (int c = 0; c < 10; ++c) g[c][k] = gk(kSymPairs[c][0], kSymPairs[c][1]);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i][k] = phik[static_cast<Eigen::Index>(i)];
    for (std::size_t A = 0; A < Vk.size(); ++A)
        for (int c = 0; c < 6; ++c) V[A * 6 + c][k] = Vk[A](kPairs[c][0], kPairs[c][1]);
}

Mat4 minkowski() {
    Mat4 g = Mat4::Zero();
    g.diagonal() << -1, 1, 1, 1;
    return g;
}

namespace {

std::string fmt_node(const GridPatch& p, std::size_t k) {
    const auto i = p.unflatten(k);
    std::ostringstream os;
    os << "node (" << i[0] << "," << i[1] << "," << i[2] << "," << i[3] << ")";
    return os.str();
}

}  // namespace

FieldConfiguration manufacture(const GridPatch& patch, const Theory& theory, const MetricFn& gfun, const ScalarFn& pfun,
                               const GaugeFn& Ffun) {
    patch.validate();
    FieldConfiguration cfg(patch, theory);
    for (std::size_t k = 0; k < patch.size(); ++k) {
        const Vec4 x = patch.coord(k);
        const Mat4 g = gfun(x);
        const Vec p = pfun(x);
        if (!theory.chart().contains(p)) throw DomainError("manufacture: scalar leaves the chart at " + fmt_node(patch, k));
        const TwoFormBlock F = Ffun(x);
        if (static_cast<int>(F.size()) != theory.nv()) throw DimensionError("manufacture: F needs nv blocks");
        ElectromagneticPair em;
        try {
            em = theory.couplings(p);
        } catch (const ModelInvalidError& e) {
            throw DomainError(std::string("manufacture: invalid couplings at ") + fmt_node(patch, k) + ": " + e.what());
        }
        cfg.set_node(k, g, p, assemble_V(F, em, g));
    }
    return cfg;
}

namespace {

using nlohmann::json;

int idx(const json& v, int hi, const char* what) {
    const int i = v.get<int>();
    if (i < 0 || i >= hi) throw DomainError(std::string("config: index out of range in ") + what);
    return i;
}

MetricFn metric_from(const json& j) {
    const std::string kind = j.value("kind", "minkowski");
    if (kind == "minkowski") return [](const Vec4&) { return minkowski(); };
    if (kind != "polynomial") throw DomainError("config: unknown metric kind '" + kind + "'");
    std::vector<std::array<double, 4>> lin;    // a, mu, nu, c
    std::vector<std::array<double, 5>> quad;   // a, b, mu, nu, c
    for (const auto& r : j.value("linear", json::array()))
        lin.push_back({double(idx(r.at(0), 4, "metric")), double(idx(r.at(1), 4, "metric")),
                       double(idx(r.at(2), 4, "metric")), r.at(3).get<double>()});
    for (const auto& r : j.value("quadratic", json::array()))
        quad.push_back({double(idx(r.at(0), 4, "metric")), double(idx(r.at(1), 4, "metric")),
                        double(idx(r.at(2), 4, "metric")), double(idx(r.at(3), 4, "metric")), r.at(4).get<double>()});
    return [lin, quad](const Vec4& x) {
        Mat4 g = minkowski();
        auto bump = [&g](int mu, int nu, double v) {
            g(mu, nu) += v;
            if (mu != nu) g(nu, mu) += v;
        };
        for (const auto& r : lin) bump(int(r[1]), int(r[2]), r[3] * x[int(r[0])]);
        for (const auto& r : quad) bump(int(r[2]), int(r[3]), r[4] * x[int(r[0])] * x[int(r[1])]);
        return g;
    };
}

ScalarFn scalar_from(const json& j, int ns) {
    const std::string kind = j.value("kind", "constant-phi");
    Vec value = Vec::Zero(ns);
    if (j.contains("value")) {
        const auto& v = j.at("value");
        if (static_cast<int>(v.size()) != ns) throw DimensionError("config: scalar value has wrong size");
        for (int i = 0; i < ns; ++i) value[i] = v.at(static_cast<std::size_t>(i)).get<double>();
    }
    if (kind == "constant-phi") return [value](const Vec4&) { return value; };
    if (kind != "polynomial") throw DomainError("config: unknown scalar kind '" + kind + "'");
    std::vector<std::array<double, 3>> lin;
    std::vector<std::array<double, 4>> quad;
    for (const auto& r : j.value("linear", json::array()))
        lin.push_back({double(idx(r.at(0), ns, "scalar")), double(idx(r.at(1), 4, "scalar")), r.at(2).get<double>()});
    for (const auto& r : j.value("quadratic", json::array()))
        quad.push_back({double(idx(r.at(0), ns, "scalar")), double(idx(r.at(1), 4, "scalar")),
                        double(idx(r.at(2), 4, "scalar")), r.at(3).get<double>()});
    return [value, lin, quad](const Vec4& x) {
        Vec p = value;
        for (const auto& r : lin) p[int(r[0])] += r[2] * x[int(r[1])];
        for (const auto& r : quad) p[int(r[0])] += r[3] * x[int(r[1])] * x[int(r[2])];
        return p;
    };
}

GaugeFn gauge_from(const json& j, int nv) {
    const std::string kind = j.value("kind", "zero");
    if (kind == "zero") return [nv](const Vec4&) { return zero_block(nv); };
    if (kind != "polynomial") throw DomainError("config: unknown gauge kind '" + kind + "'");
    std::vector<std::array<double, 4>> cst;  // L, mu, nu, c
    std::vector<std::array<double, 5>> lin;  // L, a, mu, nu, c
    for (const auto& r : j.value("constant", json::array()))
        cst.push_back({double(idx(r.at(0), nv, "gauge")), double(idx(r.at(1), 4, "gauge")),
                       double(idx(r.at(2), 4, "gauge")), r.at(3).get<double>()});
    for (const auto& r : j.value("linear", json::array()))
        lin.push_back({double(idx(r.at(0), nv, "gauge")), double(idx(r.at(1), 4, "gauge")),
                       double(idx(r.at(2), 4, "gauge")), double(idx(r.at(3), 4, "gauge")), r.at(4).get<double>()});
    return [nv, cst, lin](const Vec4& x) {
        TwoFormBlock F = zero_block(nv);
        auto bump = [&F](int L, int mu, int nu, double v) {
            F[L](mu, nu) += v;
            F[L](nu, mu) -= v;
        };
        for (const auto& r : cst) bump(int(r[0]), int(r[1]), int(r[2]), r[3]);
        for (const auto& r : lin) bump(int(r[0]), int(r[2]), int(r[3]), r[4] * x[int(r[1])]);
        return F;
    };
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

FieldConfiguration config_from_json_text(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FileError(std::string("config: malformed JSON: ") + e.what());
    }
    try {
        GridPatch patch;
        const auto& res = j.at("resolution");
        for (int a = 0; a < 4; ++a) patch.n[a] = res.is_array() ? res.at(static_cast<std::size_t>(a)).get<int>() : res.get<int>();
        if (j.contains("extents")) {
            for (int a = 0; a < 4; ++a) {
                patch.lo[a] = j["extents"].at(static_cast<std::size_t>(a)).at(0).get<double>();
                patch.hi[a] = j["extents"].at(static_cast<std::size_t>(a)).at(1).get<double>();
            }
        } else {
            const double w = j.at("half_width").get<double>();
            for (int a = 0; a < 4; ++a) {
                const double c = j.at("center").at(static_cast<std::size_t>(a)).get<double>();
                patch.lo[a] = c - w;
                patch.hi[a] = c + w;
            }
        }
        Model model;
        if (j.contains("model_file")) {
            const std::filesystem::path p = std::filesystem::path(base_dir) / j["model_file"].get<std::string>();
            model = parse_model(read_file(p.string()));
        } else {
            model = builtin(j.value("model", "constant-i"));
        }
        const Theory th = Theory::of(model);
        return manufacture(patch, th, metric_from(j.value("metric", json::object())),
                           scalar_from(j.value("scalar", json::object()), th.ns()),
                           gauge_from(j.value("gauge", json::object()), th.nv()));
    } catch (const json::exception& e) {
        throw FileError(std::string("config: ") + e.what());
    }
}

FieldConfiguration load_config(const std::string& path) {
    return config_from_json_text(read_file(path), std::filesystem::path(path).parent_path().string());
}

}  // namespace emd
