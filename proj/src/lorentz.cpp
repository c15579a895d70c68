#include "relkin/lorentz.hpp"

#include <algorithm>
#include <cmath>

#include "relkin/rng.hpp"

namespace relkin {

namespace {

double log_scale(Rng& rng, double lo, double hi) { return std::pow(10.0, rng.uniform(lo, hi)); }

void update(RatioStat& s, double num, double den) {
    if (!(den > 0.0) || !std::isfinite(num) || !std::isfinite(den)) {
        ++s.skipped;
        return;
    }
    ++s.evaluated;
    s.max_ratio = std::max(s.max_ratio, num / den);
}

}  // namespace

MetricComparisonReport metric_comparison_report(std::int64_t samples, double momentum_cap, std::uint64_t seed) {
    if (samples < 1) throw ConfigError("metric_comparison_report: sample_count must be >= 1");
    MetricComparisonReport rep;
    rep.l_controls_g.name = "dG(phi) <= C [dL + <p0>^1/2 dL^3/2]";
    rep.g_controls_l.name = "dL <= C [<p0><p> dG + <p0>^1/2 dG^3/2]";
    rep.e_controls_l.name = "|p-p0| <= C <p0>^2 |pbar|";
    rep.perp_parallel.name = "perp/parallel inequalities (excess over RHS)";

    Rng rng(seed, 0x4c6f72656e747a);
    for (std::int64_t i = 0; i < samples; ++i) {
        PhasePoint z0(rng.uniform(-1, 1), rng.in_ball(1.0), rng.in_ball(momentum_cap));
        PhasePoint z = z0;
        z.t += (rng.uniform() < 0.5 ? -1 : 1) * log_scale(rng, -4, 1);
        z.x += rng.unit_vector() * log_scale(rng, -4, 1);
        // half the samples stay near p0, where the ratios are most delicate
        if (rng.uniform() < 0.5)
            z.p = z0.p + rng.unit_vector() * log_scale(rng, -4, 0);
        else
            z.p = rng.in_ball(momentum_cap);

        const double dl = dist_L(z, z0);
        const double dg = dist_G(to_velocity(z), to_velocity(z0));
        const double e0 = energy(z0.p);
        const double e = energy(z.p);
        update(rep.l_controls_g, dg, dl + std::sqrt(e0) * std::pow(dl, 1.5));
        update(rep.g_controls_l, dl, e0 * e * dg + std::sqrt(e0) * std::pow(dg, 1.5));
        const Vec3 pbar = boost_inverse(z0, z).p;
        update(rep.e_controls_l, (z.p - z0.p).norm(), e0 * e0 * pbar.norm());

        // perp/parallel: the inequalities hold with constant 1, record the excess
        const Vec3 u = rng.in_ball(momentum_cap);
        const Vec3 w = rng.in_ball(momentum_cap);
        const double c = 1.0 + log_scale(rng, -3, 2);
        const Vec3 upar = parallel_part(u, w);
        const Vec3 uperp = u - upar;
        const double l1 = (uperp + c * upar + w).norm(), r1 = (c * u + w).norm();
        const double l2 = (uperp + upar + w).norm(), r2 = (uperp + c * (upar + w)).norm();
        const double excess = std::max((l1 - r1) / (1.0 + r1), (l2 - r2) / (1.0 + r2));
        ++rep.perp_parallel.evaluated;
        if (i == 0 || excess > rep.perp_parallel.max_ratio) rep.perp_parallel.max_ratio = excess;
    }
    return rep;
}

}  // namespace relkin
