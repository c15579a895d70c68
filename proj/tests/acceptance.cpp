// Acceptance gate: one line per criterion, exit status 0 only if all ten pass.
// Thresholds are pinned here rather than taken from suite defaults.
#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relkin/suites.hpp"
#include "relkin/types.hpp"

using namespace relkin;

namespace {

struct Criterion {
    int row;
    std::string suite;
    std::vector<std::pair<std::string, std::string>> pinned;
};

const std::vector<Criterion> kCriteria = {
    {1, "lorentz",
     {{"lorentz.samples", "20000"}, {"lorentz.momentum_cap", "20"}, {"lorentz.rotation_tol", "1e-10"},
      {"lorentz.time_limit", "60"}}},
    {2, "metrics",
     {{"metrics.pairs", "1000000"}, {"metrics.equality_tol", "1e-12"}, {"metrics.time_limit", "30"}}},
    {3, "kernels",
     {{"kernels.stability_tol", "0.1"}, {"kernels.fd_tol", "1e-6"}, {"kernels.time_limit", "120"}}},
    {4, "coefficients",
     {{"coefficients.triples", "100"}, {"coefficients.form_tol", "1e-5"}, {"coefficients.ellipticity_radius", "20"},
      {"coefficients.time_limit", "900"}}},
    {5, "theta",
     {{"theta.table_samples", "10000"}, {"theta.ibp1_tol", "1e-5"}, {"theta.ibp2_tol", "1e-4"},
      {"theta.time_limit", "300"}}},
    {6, "transforms",
     {{"transforms.dual_tol", "1e-7"}, {"transforms.p0_max", "50"}, {"transforms.time_limit", "120"}}},
    {7, "homogeneous",
     {{"homogeneous.n", "32"}, {"homogeneous.drift_tol", "1e-3"}, {"homogeneous.improvement", "3"},
      {"homogeneous.lag", "5"}, {"homogeneous.time_limit", "1800"}}},
    {8, "barriers", {{"barriers.n", "32"}, {"barriers.time_limit", "300"}}},
    {9, "rfp", {{"rfp.time_limit", "300"}}},
};

SuiteConfig config_for(const Criterion& c) {
    SuiteConfig cfg;
    cfg.suite = c.suite;
    cfg.seed = 1;
    for (const auto& [k, v] : c.pinned) cfg.set(k, v);
    return cfg;
}

std::string first_failure(const SuiteReport& r) {
    for (const auto& c : r.checks)
        if (c.status == CheckStatus::fail) return c.name + (c.note.empty() ? "" : " (" + c.note + ")");
    return {};
}

}  // namespace

int main() {
    int failed = 0;
    std::map<std::string, std::map<std::string, double>> first_run;
    for (const auto& c : kCriteria) {
        SuiteReport r;
        std::string detail;
        bool ok = false;
        try {
            r = run_suite(c.suite, config_for(c));
            ok = r.passed();
            detail = ok ? std::to_string(r.checks.size()) + " checks" : "first failure: " + first_failure(r);
        } catch (const std::exception& e) {
            detail = std::string("error: ") + e.what();
        }
        first_run[c.suite] = deterministic_values(r);
        std::printf("criterion %2d %-12s %s  %.1f s, %s\n", c.row, c.suite.c_str(), ok ? "PASS" : "FAIL",
                    r.wall_seconds, detail.c_str());
        std::fflush(stdout);
        failed += !ok;
    }

    // rerun every suite with the same seed; measured values must agree bit for bit
    std::string mismatch;
    std::size_t compared = 0;
    for (const auto& c : kCriteria) {
        try {
            const auto again = deterministic_values(run_suite(c.suite, config_for(c)));
            const auto& before = first_run[c.suite];
            compared += again.size();
            if (again.size() != before.size()) {
                mismatch = c.suite + ": different value sets";
                continue;
            }
            for (const auto& [k, v] : again) {
                const auto it = before.find(k);
                if (it == before.end() || std::memcmp(&it->second, &v, sizeof v) != 0) {
                    if (mismatch.empty()) mismatch = c.suite + ": " + k;
                }
            }
        } catch (const std::exception& e) {
            mismatch = c.suite + ": " + e.what();
        }
    }
    const bool det = mismatch.empty();
    std::printf("criterion 10 %-12s %s  %zu values compared%s%s\n", "determinism", det ? "PASS" : "FAIL", compared,
                det ? "" : ", first mismatch: ", mismatch.c_str());
    failed += !det;
    std::printf("%s: %d of 10 criteria failed\n", failed ? "FAIL" : "PASS", failed);
    return failed ? 1 : 0;
}
