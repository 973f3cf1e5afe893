#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emd/common.hpp"

namespace emd {

inline constexpr int kReportSchemaVersion = 1;

/// 64-bit FNV-1a; pass the previous value as `h` to continue a running hash.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull);
std::string hex64(std::uint64_t v);

nlohmann::json to_json(const Mat& m);
/// {"re": [...], "im": [...]}.
nlohmann::json to_json(const CMat& m);
/// Array of equal-length rows, or an object with a "matrix" member; throws FileError otherwise.
Mat matrix_from_json(const nlohmann::json& j);

struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0, hi = 0.0;  // pass iff lo <= value <= hi; upper-only checks have lo = -inf
    bool pass = false;
};

/// Tolerance overrides, "name=hi" or "name=lo:hi".
using ToleranceOverrides = std::map<std::string, std::pair<double, double>>;
/// Throws DomainError on malformed entries.
ToleranceOverrides parse_overrides(const std::vector<std::string>& items);

class Report {
public:
    explicit Report(std::string command);

    /// Records an input value; all inputs feed the digest.
    void input(const std::string& key, const nlohmann::json& value);
    /// Records the digest of a file's contents under `key`.
    void input_file(const std::string& key, const std::string& path, std::string_view bytes);
    void set_seed(std::uint64_t seed);
    void set_overrides(ToleranceOverrides o) { overrides_ = std::move(o); }

    /// value <= tol (or the override).
    const Check& check_max(const std::string& name, double value, double tol);
    /// lo <= value <= hi (or the override).
    const Check& check_range(const std::string& name, double value, double lo, double hi);
    /// Recorded as value 1/0 with required range [1, 1].
    const Check& check_true(const std::string& name, bool ok);

    void warn(const std::string& w) { warnings_.push_back(w); }
    void fail(const std::string& kind, const std::string& message);
    void set_wall_time(double seconds);

    bool passed() const;
    bool has_error() const { return !error_.is_null(); }
    const std::vector<Check>& checks() const { return checks_; }
    std::vector<std::string> unused_overrides() const;

    nlohmann::json data = nlohmann::json::object();

    nlohmann::json to_json() const;
    std::string dump() const;

private:
    std::string command_;
    nlohmann::json inputs_ = nlohmann::json::object();
    std::uint64_t seed_ = 0;
    bool has_seed_ = false;
    std::vector<Check> checks_;
    std::vector<std::string> warnings_;
    nlohmann::json error_;
    double wall_ = -1.0;
    ToleranceOverrides overrides_;
    std::map<std::string, bool> used_;
};

}  // namespace emd
