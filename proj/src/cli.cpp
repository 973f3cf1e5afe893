#include "emd/cli.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "emd/duality_group.hpp"
#include "emd/eom.hpp"
#include "emd/holonomy.hpp"
#include "emd/report.hpp"
#include "emd/spinor.hpp"

namespace emd::cli {
namespace {

using nlohmann::json;

struct UsageError : Error {
    using Error::Error;
};

constexpr std::uint64_t kDefaultSeed = 20240917;
constexpr double kFloor = 1e-12;  // below this on both grids a refinement ratio is meaningless

struct Options {
    std::string model, killing, f, A, bundle, taming, compare, config, frame, name;
    int samples = 32;
    int maxlen = 3;
    int resolution = 17;
    double lambda = 1.0;
    bool expect_solution = false;
    SimdBackend backend = SimdBackend::Scalar;
    std::uint64_t seed = kDefaultSeed;
};

std::uint64_t seed_from_env() {
    const char* s = std::getenv("EMDUALITY_SEED");
    if (!s || !*s) return kDefaultSeed;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0' || errno != 0 || *s == '-') throw UsageError(std::string("EMDUALITY_SEED is not an unsigned integer: ") + s);
    return v;
}

SimdBackend parse_backend(const std::string& s) {
    if (s == "auto") return default_backend();
    SimdBackend b;
    if (s == "scalar")
        b = SimdBackend::Scalar;
    else if (s == "avx2")
        b = SimdBackend::Avx2;
    else if (s == "neon")
        b = SimdBackend::Neon;
    else
        throw UsageError("unknown SIMD backend '" + s + "'");
    if (!backend_available(b)) throw UsageError("SIMD backend '" + s + "' is not available on this machine");
    return b;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path, Report& r, const std::string& key) {
    const std::string text = read_file(path);
    r.input_file(key, path, text);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FileError(path + ": " + e.what());
    }
}

Mat read_matrix(const std::string& path, Report& r, const std::string& key) {
    try {
        return matrix_from_json(read_json(path, r, key));
    } catch (const FileError& e) {
        throw FileError(path + ": " + e.what());
    }
}

/// A path to a model file, or a builtin name.
Model resolve_model(const std::string& m, Report& r) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(m, ec)) {
        const std::string text = read_file(m);
        r.input_file("model", m, text);
        try {
            return parse_model(text);
        } catch (const Error& e) {
            throw FileError(m + ": " + e.what());
        }
    }
    r.input("model", m);
    return builtin(m);
}

std::vector<double> numbers(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        try {
            out.push_back(std::stod(item, &used));
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw UsageError("bad number '" + item + "' in " + what);
    }
    return out;
}

/// "identity", "mobius:a,b,c,d" or "affine:Q (row-major, comma separated);t".
ChartMap parse_chart_map(const std::string& spec, const ScalarChart& chart) {
    if (spec == "identity") return ChartMap::identity(chart);
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon), rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    ChartMap f;
    if (kind == "mobius") {
        const auto v = numbers(rest, "--f");
        if (v.size() != 4) throw UsageError("mobius needs 4 entries a,b,c,d");
        f = ChartMap::mobius(v[0], v[1], v[2], v[3]);
    } else if (kind == "affine") {
        const auto semi = rest.find(';');
        const auto q = numbers(rest.substr(0, semi), "--f");
        const int k = chart.dim;
        if (static_cast<int>(q.size()) != k * k) throw UsageError("affine map needs a " + std::to_string(k) + "x" + std::to_string(k) + " matrix");
        Mat Q(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) Q(i, j) = q[i * k + j];
        Vec t = Vec::Zero(k);
        if (semi != std::string::npos) {
            const auto tv = numbers(rest.substr(semi + 1), "--f");
            if (static_cast<int>(tv.size()) != k) throw UsageError("affine translation needs " + std::to_string(k) + " entries");
            for (int i = 0; i < k; ++i) t[i] = tv[i];
        }
        f = ChartMap::affine(Q, t);
    } else {
        throw UsageError("unknown chart map '" + spec + "' (identity | mobius:a,b,c,d | affine:Q;t)");
    }
    if (f.kind != chart.kind) throw UsageError("chart map kind does not match the model chart");
    return f;
}

BundlePresentation read_bundle(const std::string& path, Report& r, const std::string& key) {
    const json j = read_json(path, r, key);
    BundlePresentation P;
    try {
        P.nv = j.at("nv").get<int>();
        for (const auto& g : j.at("generators")) P.generators.push_back(matrix_from_json(g));
        if (j.contains("relations")) P.relations = j.at("relations").get<std::vector<std::vector<int>>>();
    } catch (const json::exception& e) {
        throw FileError(path + ": " + e.what());
    } catch (const FileError& e) {
        throw FileError(path + ": " + e.what());
    }
    if (P.nv < 1) throw FileError(path + ": nv must be positive");
    for (const auto& g : P.generators)
        if (g.rows() != 2 * P.nv || g.cols() != 2 * P.nv) throw FileError(path + ": generator size does not match nv");
    const int ng = static_cast<int>(P.generators.size());
    for (const auto& w : P.relations)
        for (int k : w)
            if (k == 0 || std::abs(k) > ng) throw FileError(path + ": relation refers to generator " + std::to_string(k));
    return P;
}

FieldConfiguration read_config(const std::string& path, Report& r) {
    const std::string text = read_file(path);
    r.input_file("config", path, text);
    std::string base = std::filesystem::path(path).parent_path().string();
    if (base.empty()) base = ".";
    try {
        return config_from_json_text(text, base);
    } catch (const LookupError&) {
        throw;
    } catch (const FileError& e) {
        throw FileError(path + ": " + e.what());
    } catch (const Error& e) {
        throw FileError(path + ": " + e.what());
    }
}

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

json residual_json(const ResidualReport& s) {
    return json{{"einstein_max", s.einstein_max},
                {"einstein_mean", s.einstein_mean},
                {"scalar_max", s.scalar_max},
                {"scalar_mean", s.scalar_mean},
                {"scalar_global_max", s.scalar_global_max},
                {"scalar_assembly_gap", s.scalar_assembly_gap},
                {"maxwell_max", s.maxwell_max},
                {"maxwell_mean", s.maxwell_mean},
                {"selfduality_max", s.selfduality_max},
                {"einstein_worst_node", s.einstein_worst},
                {"scalar_worst_node", s.scalar_worst},
                {"maxwell_worst_node", s.maxwell_worst},
                {"resolution", s.resolution},
                {"spacing", s.spacing},
                {"nodes", s.nodes},
                {"warnings", s.warnings}};
}

void add_presentation_checks(Report& r, const BundlePresentation& P) {
    const auto d = presentation_check(P);
    r.data["generator_violation"] = d.generator_violation;
    r.data["relation_violation"] = d.relation_violation;
    r.check_max("generator_violation", max_of(d.generator_violation), tol::alg);
    r.check_max("relation_violation", max_of(d.relation_violation), tol::alg);
}

// ---- commands -------------------------------------------------------------------------------

void cmd_models_list(Report& r, const Options&) { r.data["models"] = builtin_names(); }

void cmd_models_show(Report& r, const Options& o) {
    const Model m = resolve_model(o.name, r);
    const std::string text = print_model(m);
    r.data["name"] = m.name;
    r.data["nv"] = m.nv;
    r.data["chart"] = m.chart.kind == MetricKind::Poincare ? "poincare" : "flat";
    r.data["dim"] = m.chart.dim;
    r.data["text"] = text;
    r.check_true("print_parse_roundtrip", structurally_equal(parse_model(text), m));
}

void cmd_stabilizer(Report& r, const Options& o) {
    const Model m = resolve_model(o.model, r);
    r.input("samples", o.samples);
    if (o.samples < 1) throw UsageError("--samples must be positive");
    const auto pts = sample_points(m.chart, o.samples, o.seed);
    const auto s = stab_sp_algebra(m, pts);
    r.data["dim_stab_sp"] = s.dim_stab_sp;
    r.data["samples_used"] = s.samples_used;
    r.data["prefix_dims"] = s.prefix_dims;
    json basis = json::array(), rot = json::array();
    for (const auto& X : s.basis) {
        basis.push_back(to_json(X));
        rot.push_back(diagonal_rotation_residual(X));
    }
    r.data["basis"] = basis;
    r.data["basis_diagonal_rotation_residual"] = rot;
    for (const auto& w : s.warnings) r.warn(w);
    r.check_max("stabilizer_residual", s.residual, tol::inversion);
    r.check_max("minus_identity_residual", minus_identity_residual(m, pts), kFloor);
}

void cmd_uduality(Report& r, const Options& o) {
    const Model m = resolve_model(o.model, r);
    r.input("samples", o.samples);
    if (o.samples < 1) throw UsageError("--samples must be positive");
    const auto u = uduality_algebra(m, sample_points(m.chart, o.samples, o.seed));
    r.data["dim_u"] = u.dim_u;
    r.data["dim_stab_sp"] = u.dim_stab_sp;
    r.data["dim_iso_pr"] = u.dim_iso_pr;
    r.data["exactness_gap"] = u.exactness_gap;
    r.data["prefix_dims"] = u.prefix_dims;
    r.data["notes"] = u.notes;
    json table = json::array();
    for (std::size_t i = 0; i < u.lift_table.size(); ++i) {
        const auto& L = u.lift_table[i];
        json e{{"field", u.field_names[i]}, {"lifted", L.lifted}, {"residual", L.residual}};
        if (L.lifted) e["X"] = to_json(L.X);
        table.push_back(std::move(e));
    }
    r.data["lift_table"] = table;
    for (const auto& w : u.warnings) r.warn(w);
    r.check_max("exactness_gap", std::abs(u.exactness_gap), 0.0);
}

void cmd_lift(Report& r, const Options& o) {
    const Model m = resolve_model(o.model, r);
    r.input("killing", o.killing);
    r.input("samples", o.samples);
    if (o.samples < 1) throw UsageError("--samples must be positive");
    const auto basis = killing_basis(m.chart);
    const KillingField* xi = nullptr;
    std::string known;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].name == o.killing || std::to_string(i + 1) == o.killing) xi = &basis[i];
        known += (i ? ", " : "") + basis[i].name;
    }
    if (!xi) throw LookupError("unknown Killing field '" + o.killing + "' (known: " + known + ")");
    const auto pts = sample_points(m.chart, o.samples, o.seed);
    double kres = 0.0;
    for (const auto& p : pts) kres = std::max(kres, killing_residual(*xi, p));
    r.data["field"] = xi->name;
    r.check_max("killing_equation", kres, tol::inversion);
    const auto L = lift_killing_field(m, *xi, pts);
    r.data["lifted"] = L.lifted;
    r.data["residual"] = L.residual;
    if (L.lifted) {
        r.data["X"] = to_json(L.X);
        r.check_max("sp_membership", sp_algebra_violation(L.X), tol::alg);
        r.check_max("lift_residual", L.residual, tol::lift);
    }
}

void cmd_pair_check(Report& r, const Options& o) {
    const Model m = resolve_model(o.model, r);
    r.input("f", o.f);
    r.input("samples", o.samples);
    if (o.samples < 1) throw UsageError("--samples must be positive");
    const ChartMap f = parse_chart_map(o.f, m.chart);
    const Mat A = read_matrix(o.A, r, "A");
    if (A.rows() != 2 * m.nv || A.cols() != 2 * m.nv) throw FileError(o.A + ": matrix size does not match the model");
    r.check_max("symplectic_violation", sp_check(A).violation, tol::alg);
    r.check_true("chart_isometry", f.is_isometry());
    r.check_max("pair_residual", check_uduality_pair(f, A, m, sample_points(m.chart, o.samples, o.seed)),
                tol::inversion);
}

void cmd_centralizer(Report& r, const Options& o) {
    const auto P = read_bundle(o.bundle, r, "bundle");
    add_presentation_checks(r, P);
    const auto c = centralizer_algebra(P);
    r.data["sp_dim"] = sp_dim(P.nv);
    r.data["centralizer_dim"] = c.dim;
    json basis = json::array();
    for (const auto& X : c.basis) basis.push_back(to_json(X));
    r.data["centralizer_basis"] = basis;
    r.check_max("centralizer_residual", c.residual, tol::inversion);
    if (o.taming.empty()) return;
    const Mat J0 = read_matrix(o.taming, r, "taming");
    if (J0.rows() != 2 * P.nv || J0.cols() != 2 * P.nv) throw FileError(o.taming + ": taming size does not match nv");
    const auto tc = check_taming(J0);
    r.data["taming"] = json{{"square", tc.square}, {"compatible", tc.compatible}, {"gram_min_eig", tc.gram_min_eig}};
    r.check_true("taming_compatible", tc.ok);
    if (!tc.ok) return;
    const auto a = autb_theta_algebra(P, J0);
    r.data["autb_dim"] = a.dim;
    r.check_max("autb_residual", a.residual, tol::inversion);
}

void cmd_invariants(Report& r, const Options& o) {
    r.input("maxlen", o.maxlen);
    if (o.maxlen < 1 || o.maxlen > kMaxWordLength)
        throw UsageError("--maxlen must be in 1.." + std::to_string(kMaxWordLength));
    const auto P = read_bundle(o.bundle, r, "bundle");
    add_presentation_checks(r, P);
    const auto t = conjugacy_invariants(P, o.maxlen);
    r.data["traces"] = t;
    if (!o.compare.empty()) {
        const auto Q = read_bundle(o.compare, r, "compare");
        r.data["comparison"] = compare_invariants(t, conjugacy_invariants(Q, o.maxlen));
    }
}

void cmd_selfdual(Report& r, const Options& o) {
    const FieldConfiguration cfg = read_config(o.config, r);
    const int nv = cfg.theory.nv();
    double tsd = 0, block = 0, star2 = 0, tstar2 = 0, minus = 0;
    for (std::size_t k = 0; k < cfg.patch.size(); ++k) {
        const Mat4 g = cfg.metric_at(k);
        const Vec phi = cfg.phi_at(k);
        const TwoFormBlock V = cfg.V_at(k);
        const Mat J = cfg.theory.taming(phi);
        const double s = std::max(1.0, max_abs(V));
        const TwoFormBlock F(V.begin(), V.begin() + nv);
        tsd = std::max(tsd, twisted_selfduality_residual(g, J, V) / s);
        block = std::max(block, max_abs(add(V, assemble_V(F, cfg.theory.couplings(phi), g), -1.0)) / s);
        star2 = std::max(star2, max_abs(add(hodge(g, hodge(g, V)), V)) / s);
        tstar2 = std::max(tstar2, max_abs(add(twisted_star(g, J, twisted_star(g, J, V)), V, -1.0)) / s);
        minus = std::max(minus, max_abs(project_sd(g, J, V).minus) / s);
    }
    r.data["nodes"] = cfg.patch.size();
    r.data["antiselfdual_part_max"] = minus;
    r.check_max("twisted_selfduality", tsd, tol::alg);
    r.check_max("block_identity", block, tol::alg);
    r.check_max("star_squared_plus_one", star2, kFloor);
    r.check_max("twisted_star_squared_minus_one", tstar2, kFloor);
}

void cmd_residuals(Report& r, const Options& o) {
    const FieldConfiguration cfg = read_config(o.config, r);
    r.input("expect_solution", o.expect_solution);
    const auto s = summarize(evaluate_residuals(cfg, o.backend));
    r.data["residuals"] = residual_json(s);
    r.data["simd_backend"] = backend_name(o.backend);
    for (const auto& w : s.warnings) r.warn(w);
    r.check_max("scalar_assembly_gap", s.scalar_assembly_gap / std::max(1.0, s.scalar_max), 1e-9);
    r.check_max("selfduality_max", s.selfduality_max, tol::alg);
    if (o.expect_solution) {
        r.check_max("einstein_max", s.einstein_max, tol::inversion);
        r.check_max("scalar_max", s.scalar_max, tol::inversion);
        r.check_max("maxwell_max", s.maxwell_max, tol::inversion);
    }
}

void cmd_transport(Report& r, const Options& o) {
    const FieldConfiguration cfg = read_config(o.config, r);
    r.input("f", o.f);
    const ChartMap f = parse_chart_map(o.f, cfg.theory.chart());
    const Mat A = read_matrix(o.A, r, "A");
    if (A.rows() != 2 * cfg.theory.nv() || A.cols() != 2 * cfg.theory.nv())
        throw FileError(o.A + ": matrix size does not match the model");
    const bool sp_ok = r.check_max("symplectic_violation", sp_check(A).violation, tol::alg).pass;
    const bool f_ok = r.check_true("affine_isometry", f.is_affine() && f.is_isometry()).pass;
    r.data["simd_backend"] = backend_name(o.backend);
    if (!sp_ok || !f_ok) {
        r.warn("transport skipped: the pair is not an affine isometry with a symplectic matrix");
        return;
    }
    const auto e = equivariance_harness(cfg, f, A, o.backend);
    r.data["before"] = residual_json(e.before);
    r.data["after"] = residual_json(e.after);
    r.check_max("einstein_gap", e.einstein_gap, 1e-9);
    r.check_max("scalar_gap", e.scalar_gap, 1e-9);
    r.check_max("maxwell_gap", e.maxwell_gap, 1e-9);
    r.check_max("selfduality_after", e.selfduality_after, tol::alg);
}

// Two-level refinement shared by the spinor commands: `fine` at the requested resolution, `coarse`
// with half the cells; quantities are compared on the coarse interior nodes.
struct Refined {
    FramePatch coarse, fine;
    std::vector<std::size_t> nodes_c, nodes_f;
    SpinConnection wc, wf;
    KillingIntegration kc, kf;
};

Refined refine(Report& r, const Options& o) {
    r.input("frame", o.frame);
    r.input("lambda", o.lambda);
    r.input("resolution", o.resolution);
    if (o.resolution < 13 || o.resolution % 2 == 0) throw UsageError("--resolution must be odd and >= 13");
    const int rc = (o.resolution - 1) / 2 + 1;
    FramePatch c = builtin_frame(o.frame, o.lambda, rc), f = builtin_frame(o.frame, o.lambda, o.resolution);
    Refined R{c, f, c.grid.interior(2), common_nodes(f.grid, c.grid), spin_connection(c, o.backend),
              spin_connection(f, o.backend), {}, {}};
    const Vec4 eps0 = Vec4(1, 0.5, -0.3, 0.2).normalized();
    R.kc = integrate_killing(R.coarse, R.wc, o.lambda, eps0);
    R.kf = integrate_killing(R.fine, R.wf, o.lambda, eps0);
    r.data["resolutions"] = {rc, o.resolution};
    r.data["spacing"] = {R.coarse.grid.h(0), R.fine.grid.h(0)};
    r.data["base_spinor"] = {eps0[0], eps0[1], eps0[2], eps0[3]};
    return R;
}

void order_check(Report& r, const std::string& name, double coarse, double fine) {
    const double order = std::log2(coarse / fine);
    r.data[name] = json{{"coarse", coarse}, {"fine", fine}, {"order", std::isfinite(order) ? json(order) : json()}};
    if (coarse <= kFloor && fine <= kFloor)
        r.check_max(name, fine, kFloor);
    else
        r.check_range(name + "_order", order, 1.8, 2.2);
}

void cmd_spinor_check(Report& r, const Options& o) {
    const Refined R = refine(r, o);
    r.check_max("frame_postulate",
                std::max(frame_postulate_residual(R.coarse, R.wc), frame_postulate_residual(R.fine, R.wf)), 1e-10);
    order_check(r, "killing_residual", killing_residual_at(R.coarse, R.wc, R.kc.field, R.nodes_c).max,
                killing_residual_at(R.fine, R.wf, R.kf.field, R.nodes_f).max);
    const double k = -3.0 * o.lambda * o.lambda;
    order_check(r, "einstein_constant", einstein_constant_residual_at(R.coarse, k, R.nodes_c),
                einstein_constant_residual_at(R.fine, k, R.nodes_f));
    const double dc = R.kc.path_defect, df = R.kf.path_defect;
    r.data["path_defect"] = json{{"coarse", dc}, {"fine", df}, {"fine_max", R.kf.path_defect_max}};
    if (dc <= kFloor && df <= kFloor)
        r.check_max("path_defect", df, kFloor);
    else
        r.check_max("path_defect_ratio", df / dc, 0.5);
}

void cmd_first_order(Report& r, const Options& o) {
    const Refined R = refine(r, o);
    const auto sc = search_first_order_at(R.coarse, R.kc.field, o.lambda, R.nodes_c);
    const auto sf = search_first_order_at(R.fine, R.kf.field, o.lambda, R.nodes_f);
    const auto& bc = sc.entries[sc.best];
    const auto& bf = sf.entries[sf.best];
    json entries = json::array();
    for (const auto& e : sf.entries)
        entries.push_back(json{{"l_sign", e.l_sign},
                               {"kappa_first", e.kappa_first},
                               {"du", e.report.du_residual},
                               {"dl", e.report.dl_residual}});
    r.data["conventions"] = entries;
    r.data["best"] = json{{"l_sign", bf.l_sign}, {"kappa_first", bf.kappa_first}};
    r.data["dkappa_max"] = bf.report.dkappa_max;
    r.data["u_max"] = bf.report.u_max;
    r.check_true("convention_stable", bc.l_sign == bf.l_sign && bc.kappa_first == bf.kappa_first);
    const double hc = R.coarse.grid.h(0), hf = R.fine.grid.h(0);
    auto stable = [&](const std::string& name, double vc, double vf) {
        const double Cc = vc / (hc * hc), Cf = vf / (hf * hf);
        r.data[name] = json{{"coarse", vc}, {"fine", vf}, {"C_coarse", Cc}, {"C_fine", Cf}};
        if (vc <= kFloor && vf <= kFloor)
            r.check_max(name, vf, kFloor);
        else
            r.check_max(name + "_C_drift", std::abs(std::log2(Cf / Cc)), std::log2(4.0 / 3.0));
    };
    stable("du_residual", bc.report.du_residual, bf.report.du_residual);
    stable("dl_residual", bc.report.dl_residual, bf.report.dl_residual);
    stable("killing_vector_residual", bc.report.killing_residual, bf.report.killing_residual);
    stable("geodesic_residual", bc.report.geodesic_residual, bf.report.geodesic_residual);
    r.check_max("null_residual", bf.report.null_residual, kFloor);
    r.check_max("unit_residual", bf.report.unit_residual, kFloor);
    r.check_max("orth_residual", bf.report.orth_residual, kFloor);
    r.check_true("nontrivial", bf.report.nontrivial);
}

std::string error_kind(const Error& e) {
    if (dynamic_cast<const PoleError*>(&e)) return "pole";
    if (dynamic_cast<const InstabilityError*>(&e)) return "instability";
    if (dynamic_cast<const ModelInvalidError*>(&e)) return "model-invalid";
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
    return "error";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Electromagnetic duality toolkit: duality algebras, field-equation residuals, Killing spinors",
                 "emduality"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    bool timing = false;
    std::vector<std::string> tols;
    std::string simd = "auto";
    app.add_flag("--timing", timing, "Record wall time in the report");
    app.add_option("--tol", tols, "Override a check tolerance: name=max or name=lo:hi")->allow_extra_args(false);
    app.add_option("--simd", simd, "Stencil backend: auto, scalar, avx2 or neon");

    std::vector<std::pair<CLI::App*, std::function<void(Report&, const Options&)>>> table;
    auto sub = [&](CLI::App* parent, const std::string& name, const std::string& help,
                   std::function<void(Report&, const Options&)> fn) {
        CLI::App* s = parent->add_subcommand(name, help);
        if (fn) table.emplace_back(s, std::move(fn));
        return s;
    };
    auto add_samples = [&](CLI::App* s) { s->add_option("--samples", o.samples, "Chart sample count")->capture_default_str(); };

    CLI::App* models = sub(&app, "models", "List or show models", nullptr);
    models->require_subcommand(1);
    sub(models, "list", "List builtin models", cmd_models_list);
    sub(models, "show", "Print a model (builtin name or file)", cmd_models_show)
        ->add_option("name", o.name, "Model name or file")->required();

    CLI::App* s = sub(&app, "stabilizer", "Stabilizer algebra of the period map", cmd_stabilizer);
    s->add_option("--model", o.model, "Model name or file")->required();
    add_samples(s);
    s = sub(&app, "uduality", "U-duality algebra dimensions and lift table", cmd_uduality);
    s->add_option("--model", o.model, "Model name or file")->required();
    add_samples(s);
    s = sub(&app, "lift", "Lift one Killing field to sp(2n)", cmd_lift);
    s->add_option("--model", o.model, "Model name or file")->required();
    s->add_option("--killing", o.killing, "Killing field name or 1-based index")->required();
    add_samples(s);
    s = sub(&app, "pair-check", "Check a finite duality pair (f, A)", cmd_pair_check);
    s->add_option("--model", o.model, "Model name or file")->required();
    s->add_option("--f", o.f, "identity | mobius:a,b,c,d | affine:Q;t")->required();
    s->add_option("--A", o.A, "Symplectic matrix file (JSON)")->required();
    add_samples(s);
    s = sub(&app, "centralizer", "Centralizer of the holonomy", cmd_centralizer);
    s->add_option("--bundle", o.bundle, "Bundle presentation file (JSON)")->required();
    s->add_option("--taming", o.taming, "Taming matrix file (JSON)");
    s = sub(&app, "invariants", "Trace invariants of holonomy words", cmd_invariants);
    s->add_option("--bundle", o.bundle, "Bundle presentation file (JSON)")->required();
    s->add_option("--maxlen", o.maxlen, "Maximal word length")->required();
    s->add_option("--compare", o.compare, "Second bundle to compare against");
    s = sub(&app, "selfdual", "Twisted self-duality of a grid configuration", cmd_selfdual);
    s->add_option("--config", o.config, "Grid configuration file (JSON)")->required();
    s = sub(&app, "residuals", "Field-equation residuals of a grid configuration", cmd_residuals);
    s->add_option("--config", o.config, "Grid configuration file (JSON)")->required();
    s->add_flag("--expect-solution", o.expect_solution, "Also require the residuals to vanish");
    s = sub(&app, "transport", "Residual equivariance under a duality pair", cmd_transport);
    s->add_option("--config", o.config, "Grid configuration file (JSON)")->required();
    s->add_option("--f", o.f, "identity | mobius:a,b,c,d | affine:Q;t")->required();
    s->add_option("--A", o.A, "Symplectic matrix file (JSON)")->required();
    for (const char* name : {"spinor-check", "thm53"}) {
        s = sub(&app, name,
                std::string(name) == "thm53" ? "First-order system for Killing spinor bilinears"
                                             : "Killing spinor integration and refinement checks",
                std::string(name) == "thm53" ? cmd_first_order : cmd_spinor_check);
        s->add_option("--frame", o.frame, "minkowski | ads4-poincare")->required();
        s->add_option("--lambda", o.lambda, "Killing constant")->required();
        s->add_option("--resolution", o.resolution, "Fine grid points per axis (odd, >= 13)")->capture_default_str();
    }

    std::vector<std::string> argv_s{"emduality"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitPass;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        Report r(args.empty() ? "" : args.front());
        r.fail("usage", e.what());
        out << r.dump() << "\n";
        return kExitUsage;
    }

    const std::function<void(Report&, const Options&)>* fn = nullptr;
    std::string command;
    for (const auto& [sc, f] : table)
        if (sc->parsed()) {
            fn = &f;
            command = sc->get_parent() == &app ? sc->get_name() : sc->get_parent()->get_name() + " " + sc->get_name();
        }

    Report r(command);
    int code = kExitPass;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        try {
            r.set_overrides(parse_overrides(tols));
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
        o.seed = seed_from_env();
        r.set_seed(o.seed);
        o.backend = parse_backend(simd);
        (*fn)(r, o);
        for (const auto& u : r.unused_overrides()) r.warn("tolerance override '" + u + "' matched no check");
        code = r.passed() ? kExitPass : kExitCheckFailed;
    } catch (const UsageError& e) {
        r.fail("usage", e.what());
        err << "error: " << e.what() << "\n";
        code = kExitUsage;
    } catch (const LookupError& e) {
        r.fail("lookup", e.what());
        err << "error: " << e.what() << "\n";
        code = kExitUsage;
    } catch (const FileError& e) {
        r.fail("file", e.what());
        err << "error: " << e.what() << "\n";
        code = kExitFile;
    } catch (const Error& e) {
        r.fail(error_kind(e), e.what());
        err << "error: " << e.what() << "\n";
        code = kExitCheckFailed;
    } catch (const std::exception& e) {
        r.fail("internal", e.what());
        err << "error: " << e.what() << "\n";
        code = kExitCheckFailed;
    }
    if (timing)
        r.set_wall_time(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    out << r.dump() << "\n";
    return code;
}

}  // namespace emd::cli
