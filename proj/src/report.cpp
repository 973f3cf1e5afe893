#include "emd/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace emd {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

json to_json(const CMat& m) { return json{{"re", to_json(Mat(m.real()))}, {"im", to_json(Mat(m.imag()))}}; }

Mat matrix_from_json(const json& j) {
    const json& rows = j.is_object() && j.contains("matrix") ? j.at("matrix") : j;
    if (!rows.is_array() || rows.empty() || !rows.front().is_array())
        throw FileError("matrix must be a non-empty array of rows");
    const std::size_t cols = rows.front().size();
    Mat m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != cols) throw FileError("matrix rows must have equal length");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!rows[i][k].is_number()) throw FileError("matrix entries must be numbers");
            m(i, k) = rows[i][k].get<double>();
        }
    }
    return m;
}

ToleranceOverrides parse_overrides(const std::vector<std::string>& items) {
    ToleranceOverrides out;
    for (const auto& s : items) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw DomainError("tolerance override must be name=value: " + s);
        const std::string name = s.substr(0, eq), v = s.substr(eq + 1);
        try {
            const auto colon = v.find(':');
            std::size_t used = 0;
            if (colon == std::string::npos) {
                const double hi = std::stod(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
                out[name] = {-std::numeric_limits<double>::infinity(), hi};
            } else {
                std::size_t used2 = 0;
                const std::string a = v.substr(0, colon), b = v.substr(colon + 1);
                const double lo = std::stod(a, &used), hi = std::stod(b, &used2);
                if (used != a.size() || used2 != b.size()) throw std::invalid_argument(v);
                out[name] = {lo, hi};
            }
        } catch (const std::logic_error&) {
            throw DomainError("bad tolerance value: " + s);
        }
    }
    return out;
}

Report::Report(std::string command) : command_(std::move(command)) {}

void Report::input(const std::string& key, const json& value) { inputs_[key] = value; }

void Report::input_file(const std::string& key, const std::string& path, std::string_view bytes) {
    inputs_[key] = json{{"path", path}, {"fnv1a", hex64(fnv1a(bytes))}};
}

void Report::set_seed(std::uint64_t seed) {
    seed_ = seed;
    has_seed_ = true;
}

const Check& Report::check_range(const std::string& name, double value, double lo, double hi) {
    if (auto it = overrides_.find(name); it != overrides_.end()) {
        // "name=hi" keeps the lower bound, "name=lo:hi" replaces both.
        if (!std::isinf(it->second.first)) lo = it->second.first;
        hi = it->second.second;
        used_[name] = true;
    }
    Check c{name, value, lo, hi, false};
    c.pass = std::isfinite(value) && value >= lo && value <= hi;
    checks_.push_back(c);
    return checks_.back();
}

const Check& Report::check_max(const std::string& name, double value, double tol) {
    return check_range(name, value, -std::numeric_limits<double>::infinity(), tol);
}

const Check& Report::check_true(const std::string& name, bool ok) { return check_range(name, ok ? 1.0 : 0.0, 1.0, 1.0); }

void Report::fail(const std::string& kind, const std::string& message) {
    error_ = json{{"kind", kind}, {"message", message}};
}

void Report::set_wall_time(double seconds) { wall_ = seconds; }

bool Report::passed() const {
    if (has_error()) return false;
    for (const auto& c : checks_)
        if (!c.pass) return false;
    return true;
}

std::vector<std::string> Report::unused_overrides() const {
    std::vector<std::string> out;
    for (const auto& [name, v] : overrides_)
        if (!used_.count(name)) out.push_back(name);
    return out;
}

json Report::to_json() const {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["command"] = command_;
    j["inputs"] = inputs_;
    j["inputs_digest"] = hex64(fnv1a(inputs_.dump(), fnv1a(command_)));
    if (has_seed_) j["seed"] = seed_;
    json cs = json::array();
    for (const auto& c : checks_) {
        json t;
        if (std::isinf(c.lo))
            t = c.hi;
        else
            t = json::array({c.lo, c.hi});
        cs.push_back(json{{"name", c.name}, {"value", c.value}, {"tolerance", t}, {"pass", c.pass}});
    }
    j["checks"] = cs;
    j["data"] = data;
    j["warnings"] = warnings_;
    if (has_error()) j["error"] = error_;
    j["pass"] = passed();
    if (wall_ >= 0) j["wall_time_s"] = wall_;
    return j;
}

std::string Report::dump() const { return to_json().dump(2); }

}  // namespace emd
