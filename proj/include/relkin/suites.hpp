#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace relkin {

// Bad command line or unknown suite; the CLI maps it to exit code 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Parameters live under "section.key". The INI grammar is documented in docs/config.md.
class SuiteConfig {
public:
    std::string suite;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;  // empty: write nothing
    unsigned threads = 0;           // 0 defers to RELKIN_THREADS

    static SuiteConfig load(const std::filesystem::path& ini);  // ConfigError if unreadable
    // "section.key=value"; run.seed, run.out and run.threads go to the fields above
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    // Typed lookups record the effective value so the report lists every parameter used.
    double real(const std::string& key, double fallback) const;
    std::int64_t count(const std::string& key, std::int64_t fallback) const;  // >= 1
    double tolerance(const std::string& key, double fallback) const;          // > 0

    const std::map<std::string, std::string>& used() const { return used_; }
    std::vector<std::string> unused() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, std::string> used_;
};

enum class CheckStatus { pass, fail, skip };
const char* to_string(CheckStatus s);

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::skip;
    double measured = 0;
    double threshold = 0;
    std::string relation;  // how measured compares to threshold when passing: "<=", ">=", "<", ">"
    bool timing = false;   // wall-clock based, excluded from determinism comparisons
    std::string note;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    std::map<std::string, double> diagnostics;  // informative values without a threshold
    std::map<std::string, std::string> parameters;
    std::vector<std::string> unused_parameters;
    double wall_seconds = 0;

    bool passed() const;
    // Check a relation and record it; returns whether it passed.
    bool check(const std::string& name, double measured, const std::string& relation, double threshold,
               const std::string& note = {});
    bool check_timing(const std::string& name, double seconds, double limit);
    void skip(const std::string& name, const std::string& why);
};

inline constexpr int kReportSchemaVersion = 1;

const std::vector<std::string>& registered_suites();
// UsageError for unknown names. Exceptions from the suite body become a failed check.
SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg);

// Single JSON document. Without timing, wall times and timing checks are dropped so two runs with the
// same seed compare byte for byte.
std::string report_json(const SuiteReport& r, bool with_timing = true);
std::string report_text(const SuiteReport& r);
// measured values of non-timing checks and diagnostics, for determinism comparisons
std::map<std::string, double> deterministic_values(const SuiteReport& r);

std::map<std::string, std::string> environment_fingerprint();

}  // namespace relkin
