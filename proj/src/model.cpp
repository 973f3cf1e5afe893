#include "emd/model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "emd/symplectic.hpp"

namespace emd {

bool ScalarChart::contains(const Vec& p) const {
    if (p.size() != dim) return false;
    if (!p.allFinite()) return false;
    return kind == MetricKind::Flat || p[1] > 0.0;
}

Mat ScalarChart::metric(const Vec& p) const {
    if (kind == MetricKind::Flat) return Mat::Identity(dim, dim);
    return Mat::Identity(2, 2) / (p[1] * p[1]);
}

std::vector<Mat> ScalarChart::metric_derivative(const Vec& p) const {
    std::vector<Mat> d(static_cast<std::size_t>(dim), Mat::Zero(dim, dim));
    if (kind == MetricKind::Poincare) d[1] = -2.0 * Mat::Identity(2, 2) / (p[1] * p[1] * p[1]);
    return d;
}

std::vector<std::pair<double, double>> ScalarChart::sample_box() const {
    if (kind == MetricKind::Poincare) return {{-1.0, 1.0}, {0.5, 2.0}};
    return std::vector<std::pair<double, double>>(static_cast<std::size_t>(dim), {-1.0, 1.0});
}

namespace {
std::string fmt_point(const Vec& p) {
    std::ostringstream os;
    os << '(';
    for (Eigen::Index k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
    os << ')';
    return os.str();
}
}  // namespace

ModelInvalidError::ModelInvalidError(const std::string& msg, Vec p)
    : Error(msg + " at " + fmt_point(p)), point(std::move(p)) {}

const Expr& Model::entry(int i, int j) const {
    if (i > j) std::swap(i, j);
    return entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - i)];
}

// ---------------------------------------------------------------------------
// Model file parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string& s, int line, int col, const std::string& what) {
    const std::string t = trim(s);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(what + " must be a positive integer", line, col);
    return std::stoi(t);
}

struct PendingEntry {
    int i, j;
    Expr e;
    int line, col;
};

}  // namespace

Model parse_model(const std::string& text) {
    Model m;
    int declared_nv = -1;
    bool chart_set = false, dim_set = false;
    std::vector<PendingEntry> pending;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = raw.substr(0, raw.find('#'));
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t stop = line.find(';', start);
            if (stop == std::string::npos) stop = line.size();
            const std::string stmt = line.substr(start, stop - start);
            const int col0 = static_cast<int>(start);
            const std::size_t eq = stmt.find('=');
            const std::string lhs = trim(stmt.substr(0, eq));
            if (!trim(stmt).empty()) {
                const int lhs_col = col0 + static_cast<int>(stmt.find_first_not_of(" \t")) + 1;
                if (eq == std::string::npos) throw ParseError("expected '='", line_no, lhs_col);
                const std::string rhs = stmt.substr(eq + 1);
                const int rhs_col = col0 + static_cast<int>(eq) + 1;
                if (lhs == "name") {
                    m.name = trim(rhs);
                } else if (lhs == "nv") {
                    declared_nv = parse_int(rhs, line_no, rhs_col + 1, "nv");
                    if (declared_nv < 1) throw ParseError("nv must be >= 1", line_no, rhs_col + 1);
                } else if (lhs == "chart") {
                    const std::string v = trim(rhs);
                    if (v == "poincare")
                        m.chart.kind = MetricKind::Poincare;
                    else if (v == "flat")
                        m.chart.kind = MetricKind::Flat;
                    else
                        throw ParseError("unknown chart '" + v + "'", line_no, rhs_col + 1);
                    chart_set = true;
                } else if (lhs == "dim") {
                    m.chart.dim = parse_int(rhs, line_no, rhs_col + 1, "dim");
                    dim_set = true;
                } else if (lhs.size() > 1 && lhs[0] == 'N' && lhs[1] == '[') {
                    const auto close = lhs.find(']');
                    const auto comma = lhs.find(',');
                    if (close == std::string::npos || comma == std::string::npos || comma > close ||
                        trim(lhs.substr(close + 1)) != "")
                        throw ParseError("malformed entry index, expected N[i,j]", line_no, lhs_col);
                    const int i = parse_int(lhs.substr(2, comma - 2), line_no, lhs_col + 2, "row index");
                    const int j = parse_int(lhs.substr(comma + 1, close - comma - 1), line_no, lhs_col + 2,
                                            "column index");
                    if (i < 1 || j < 1) throw ParseError("indices are 1-based", line_no, lhs_col);
                    if (i > j) throw ParseError("only entries with i <= j are stored", line_no, lhs_col);
                    pending.push_back({i - 1, j - 1, parse_expr(rhs, line_no, rhs_col), line_no, lhs_col});
                } else {
                    throw ParseError("unknown header '" + lhs + "'", line_no, lhs_col);
                }
            }
            start = stop + 1;
        }
    }
    if (!chart_set && !dim_set) m.chart = ScalarChart{};
    if (m.chart.kind == MetricKind::Poincare && m.chart.dim != 2)
        throw ParseError("poincare chart requires dim=2", line_no, 1);
    int max_index = 0;
    for (const auto& p : pending) max_index = std::max(max_index, p.j + 1);
    m.nv = declared_nv > 0 ? declared_nv : max_index;
    if (m.nv == 0) throw ParseError("no entries", line_no, 1);
    m.entries.assign(static_cast<std::size_t>(m.nv), {});
    for (int i = 0; i < m.nv; ++i) m.entries[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.nv - i));
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(m.nv), std::vector<bool>(static_cast<std::size_t>(m.nv)));
    for (const auto& p : pending) {
        if (p.j >= m.nv)
            throw ParseError("entry N[" + std::to_string(p.i + 1) + "," + std::to_string(p.j + 1) +
                                 "] exceeds declared nv=" + std::to_string(m.nv),
                             p.line, p.col);
        if (seen[static_cast<std::size_t>(p.i)][static_cast<std::size_t>(p.j)])
            throw ParseError("duplicate entry", p.line, p.col);
        seen[static_cast<std::size_t>(p.i)][static_cast<std::size_t>(p.j)] = true;
        const int need = coords_needed(p.e);
        if (need > m.chart.dim)
            throw ParseError("expression uses coordinates beyond chart dim " + std::to_string(m.chart.dim), p.line,
                             p.col);
        m.entries[static_cast<std::size_t>(p.i)][static_cast<std::size_t>(p.j - p.i)] = p.e;
    }
    for (int i = 0; i < m.nv; ++i)
        for (int j = i; j < m.nv; ++j)
            if (!seen[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                if (i == j)
                    throw ParseError("missing diagonal entry N[" + std::to_string(i + 1) + "," +
                                         std::to_string(i + 1) + "]",
                                     line_no, 1);
                m.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - i)] = Expr::num(0);
            }
    return m;
}

std::string print_model(const Model& m) {
    std::ostringstream os;
    os << "name=" << m.name << "\n";
    os << "nv=" << m.nv << "\n";
    os << "chart=" << (m.chart.kind == MetricKind::Poincare ? "poincare" : "flat") << "\n";
    os << "dim=" << m.chart.dim << "\n";
    for (int i = 0; i < m.nv; ++i)
        for (int j = i; j < m.nv; ++j)
            os << "N[" << i + 1 << "," << j + 1 << "] = " << to_string(m.entry(i, j)) << "\n";
    return os.str();
}

bool structurally_equal(const Model& a, const Model& b) {
    if (a.name != b.name || a.nv != b.nv || a.chart.kind != b.chart.kind || a.chart.dim != b.chart.dim) return false;
    for (int i = 0; i < a.nv; ++i)
        for (int j = i; j < a.nv; ++j)
            if (!structurally_equal(a.entry(i, j), b.entry(i, j))) return false;
    return true;
}

CMat eval_period_raw(const Model& m, const Vec& p) {
    if (p.size() != m.chart.dim) throw DimensionError("chart point has wrong dimension");
    CMat N(m.nv, m.nv);
    for (int i = 0; i < m.nv; ++i)
        for (int j = i; j < m.nv; ++j) N(i, j) = N(j, i) = evaluate(m.entry(i, j), p);
    return N;
}

CMat eval_period(const Model& m, const Vec& p) {
    if (!m.chart.contains(p)) throw ModelInvalidError("point outside chart domain", p);
    const CMat N = eval_period_raw(m, p);
    const SiegelCheck sc = siegel_check(N);
    if (!sc.ok) throw ModelInvalidError("value is not a Siegel point", p);
    return N;
}

std::vector<CMat> eval_period_partials(const Model& m, const Vec& p) {
    if (!m.chart.contains(p)) throw ModelInvalidError("point outside chart domain", p);
    std::vector<CMat> out;
    for (int k = 0; k < m.chart.dim; ++k) {
        CMat D(m.nv, m.nv);
        for (int i = 0; i < m.nv; ++i)
            for (int j = i; j < m.nv; ++j) D(i, j) = D(j, i) = evaluate(derivative(m.entry(i, j), k), p);
        out.push_back(D);
    }
    return out;
}

CMat eval_period_derivative(const Model& m, const Vec& p, const Vec& v) {
    if (v.size() != m.chart.dim) throw DimensionError("tangent vector has wrong dimension");
    if (!v.allFinite()) throw DomainError("tangent vector is not finite");
    const auto parts = eval_period_partials(m, p);
    CMat D = CMat::Zero(m.nv, m.nv);
    for (int k = 0; k < m.chart.dim; ++k) D += v[k] * parts[static_cast<std::size_t>(k)];
    return D;
}

Model constant_i(int nv) {
    if (nv < 1) throw LookupError("constant-i needs nv >= 1");
    std::ostringstream os;
    os << "name=constant-i\nnv=" << nv << "\nchart=poincare\ndim=2\n";
    for (int i = 1; i <= nv; ++i) os << "N[" << i << "," << i << "] = i\n";
    Model m = parse_model(os.str());
    if (nv > 1) m.name = "constant-i:" + std::to_string(nv);
    return m;
}

Model builtin(const std::string& name) {
    if (name == "constant-i") return constant_i(1);
    if (name.rfind("constant-i:", 0) == 0) {
        const std::string tail = name.substr(11);
        if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos || tail.size() > 3)
            throw LookupError("unknown model '" + name + "'");
        return constant_i(std::stoi(tail));
    }
    if (name == "identity-tau") return parse_model("name=identity-tau\nnv=1\nchart=poincare\nN[1,1] = tau\n");
    if (name == "axio-dilaton")
        return parse_model("name=axio-dilaton\nnv=2\nchart=poincare\nN[1,1] = tau; N[2,2] = -1/tau; N[1,2] = 0\n");
    if (name == "t3")
        return parse_model(
            "name=t3\nnv=2\nchart=poincare\n"
            "N[1,1] = (tau^2/2)*(tau + 3*conj(tau))\n"
            "N[1,2] = -(3/2)*tau*(tau + conj(tau))\n"
            "N[2,2] = 3*(tau + conj(tau)) + (3/2)*(tau - conj(tau))\n");
    throw LookupError("unknown model '" + name + "'");
}

std::vector<std::string> builtin_names() { return {"constant-i", "identity-tau", "axio-dilaton", "t3"}; }

}  // namespace emd
