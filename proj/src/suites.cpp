#include "relkin/suites.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <json.hpp>
#include <sstream>
#include <sys/utsname.h>

#include "relkin/parallel.hpp"
#include "relkin/types.hpp"
#include "suite_registry.hpp"

#ifndef RELKIN_BUILD_TYPE
#define RELKIN_BUILD_TYPE "unknown"
#endif

namespace relkin {

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <class T> T parse_number(const std::string& key, const std::string& s) {
    T v{};
    const char* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) throw ConfigError("parameter " + key + ": cannot parse '" + s + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

bool holds(double m, const std::string& rel, double t) {
    if (rel == "<=") return m <= t;
    if (rel == ">=") return m >= t;
    if (rel == "<") return m < t;
    if (rel == ">") return m > t;
    throw std::logic_error("unknown relation " + rel);
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

SuiteConfig SuiteConfig::load(const std::filesystem::path& ini) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(ini.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config " + ini.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    SuiteConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config " + ini.string() + ": key '" + section + "' outside a section");
        for (const auto& [key, v] : body) c.set(section + "." + key, trim(v.data()));
    }
    return c;
}

void SuiteConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void SuiteConfig::set(const std::string& key, const std::string& value) {
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.')
        throw ConfigError("parameter key '" + key + "' must look like section.key");
    if (key == "run.seed")
        seed = parse_number<std::uint64_t>(key, value);
    else if (key == "run.out")
        out_dir = value;
    else if (key == "run.threads")
        threads = parse_number<unsigned>(key, value);
    else
        values_[key] = value;
}

double SuiteConfig::real(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    const double v = it == values_.end() ? fallback : parse_number<double>(key, it->second);
    if (!std::isfinite(v)) throw ConfigError("parameter " + key + " must be finite");
    used_[key] = shortest(v);
    return v;
}

std::int64_t SuiteConfig::count(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    const auto v = it == values_.end() ? fallback : parse_number<std::int64_t>(key, it->second);
    if (v < 1) throw ConfigError("parameter " + key + " must be >= 1");
    used_[key] = std::to_string(v);
    return v;
}

double SuiteConfig::tolerance(const std::string& key, double fallback) const {
    const double v = real(key, fallback);
    if (!(v > 0)) throw ConfigError("tolerance " + key + " must be positive");
    return v;
}

std::vector<std::string> SuiteConfig::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------
// reports

const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skip: return "skip";
    }
    return "?";
}

bool SuiteReport::passed() const {
    for (const auto& c : checks)
        if (c.status == CheckStatus::fail) return false;
    return true;
}

bool SuiteReport::check(const std::string& name, double measured, const std::string& relation, double threshold,
                        const std::string& note) {
    const bool ok = holds(measured, relation, threshold);
    checks.push_back({name, ok ? CheckStatus::pass : CheckStatus::fail, measured, threshold, relation, false, note});
    return ok;
}

bool SuiteReport::check_timing(const std::string& name, double seconds, double limit) {
    const bool ok = check(name, seconds, "<=", limit, "seconds");
    checks.back().timing = true;
    return ok;
}

void SuiteReport::skip(const std::string& name, const std::string& why) {
    checks.push_back({name, CheckStatus::skip, 0, 0, "", false, why});
}

const std::vector<std::string>& registered_suites() {
    static const std::vector<std::string> names = {"lorentz",    "metrics",     "kernels", "coefficients", "theta",
                                                   "transforms", "homogeneous", "rfp",     "barriers"};
    return names;
}

SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg) {
    const auto& names = registered_suites();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw UsageError("unknown suite '" + name + "' (expected one of: " + list + ")");
    }
    SuiteReport r;
    r.suite = name;
    r.seed = cfg.seed;
    if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        suite_body(name)(r, cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        r.checks.push_back({"suite completed", CheckStatus::fail, 0, 0, "", false, e.what()});
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.parameters = cfg.used();
    r.unused_parameters = cfg.unused();
    return r;
}

std::map<std::string, std::string> environment_fingerprint() {
    std::map<std::string, std::string> env;
    env["compiler"] = __VERSION__;
    env["cxx_standard"] = std::to_string(__cplusplus);
    env["build_type"] = RELKIN_BUILD_TYPE;
    env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                   std::to_string(EIGEN_MINOR_VERSION);
    env["boost"] = BOOST_LIB_VERSION;
    utsname u{};
    if (uname(&u) == 0) env["os"] = std::string(u.sysname) + " " + u.release + " " + u.machine;
    env["threads"] = std::to_string(worker_count());
    return env;
}

std::string report_json(const SuiteReport& r, bool with_timing) {
    using json = nlohmann::ordered_json;
    json j;
    j["schema"] = "relkin.suite-report";
    j["schema_version"] = kReportSchemaVersion;
    j["suite"] = r.suite;
    j["seed"] = r.seed;
    j["status"] = r.passed() ? "pass" : "fail";
    json checks = json::array();
    for (const auto& c : r.checks) {
        if (c.timing && !with_timing) continue;
        json e;
        e["name"] = c.name;
        e["status"] = to_string(c.status);
        if (c.status != CheckStatus::skip) {
            e["measured"] = c.measured;
            e["relation"] = c.relation;
            e["threshold"] = c.threshold;
        }
        if (c.timing) e["timing"] = true;
        if (!c.note.empty()) e["note"] = c.note;
        checks.push_back(e);
    }
    j["checks"] = checks;
    j["diagnostics"] = json::object();
    for (const auto& [k, v] : r.diagnostics) j["diagnostics"][k] = v;
    j["parameters"] = json::object();
    for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
    j["unused_parameters"] = r.unused_parameters;
    j["environment"] = json::object();
    for (const auto& [k, v] : environment_fingerprint()) j["environment"][k] = v;
    if (with_timing) j["wall_seconds"] = r.wall_seconds;
    return j.dump(2) + "\n";
}

std::string report_text(const SuiteReport& r) {
    std::ostringstream os;
    os << "suite " << r.suite << " seed " << r.seed << "\n";
    for (const auto& c : r.checks) {
        os << "  [" << to_string(c.status) << "] " << c.name;
        if (c.status != CheckStatus::skip) os << ": " << shortest(c.measured) << " " << c.relation << " " << shortest(c.threshold);
        if (!c.note.empty()) os << "  (" << c.note << ")";
        os << "\n";
    }
    for (const auto& [k, v] : r.diagnostics) os << "  diag " << k << " = " << shortest(v) << "\n";
    for (const auto& k : r.unused_parameters) os << "  warning: parameter " << k << " was not used\n";
    os << "  " << (r.passed() ? "PASS" : "FAIL") << " in " << shortest(std::round(r.wall_seconds * 100) / 100) << " s\n";
    return os.str();
}

std::map<std::string, double> deterministic_values(const SuiteReport& r) {
    std::map<std::string, double> out;
    for (const auto& c : r.checks)
        if (!c.timing && c.status != CheckStatus::skip) out["check:" + c.name] = c.measured;
    for (const auto& [k, v] : r.diagnostics) out["diag:" + k] = v;
    return out;
}

}  // namespace relkin
