#include "mbcascade/pipeline.hpp"
#include "oracles/fd_oracle.hpp"
#include "oracles/hausdorff_oracle.hpp"
#include "oracles/snf_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

using namespace mbcascade;

namespace {

constexpr double kRuntimeLimit = 300.0;      // seconds per scenario
constexpr double kRatioLimit = 0.25;
constexpr double kFinalFraction = 1e-2;      // of the diameter
constexpr int kScheduleSize = 7;
constexpr int kCriticalGrid = 100;
constexpr double kParameterDrift = 1e-6;
constexpr int kOracleMatrices = 1000;
constexpr int kOracleHausdorff = 1000;
constexpr double kHausdorffTol = 1e-12;
constexpr double kGradientTol = 1e-5;        // relative

struct Criterion {
    bool passed = true;
    std::ostringstream detail;
    void fail(const std::string& s) {
        if (!passed) detail << "; ";
        passed = false;
        detail << s;
    }
};

struct Run {
    ScenarioConfig cfg;
    PipelineReport report;
    double seconds = 0.0;
};

bool no_torsion(const HomologyResult& h) {
    for (const auto& t : h.torsion)
        if (!t.empty()) return false;
    return true;
}

std::string betti_string(const std::vector<int>& b) {
    std::string s;
    for (int v : b) s += (s.empty() ? "" : ",") + std::to_string(v);
    return "(" + s + ")";
}

double max_parameter_shift(const std::vector<std::pair<std::string, double>>& a,
                           const std::vector<std::pair<std::string, double>>& b) {
    double worst = 0.0;
    for (const auto& [fa, pa] : a) {
        double best = INFINITY;
        for (const auto& [fb, pb] : b)
            if (fa == fb) best = std::min(best, std::abs(angle_difference(pa, pb)));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

int main() {
    std::vector<Run> runs;
    for (const std::string& name : catalog_names()) {
        Run r;
        r.cfg = catalog_scenario(name);
        r.cfg.epsilon.schedule_points = kScheduleSize;
        const auto t0 = std::chrono::steady_clock::now();
        r.report = run_pipeline(r.cfg, kStageAll);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "%s: %.1f s, %s\n", name.c_str(), r.seconds, r.report.passed ? "pass" : "fail");
        for (const StageFailure& f : r.report.failures)
            std::fprintf(stderr, "  [%s] %s\n", f.stage.c_str(), f.message.c_str());
        runs.push_back(std::move(r));
    }

    Criterion c[10];

    for (const Run& run : runs) {
        const PipelineReport& r = run.report;
        const MorseBottScenario& sc = run.cfg.scenario;
        const std::string& n = r.scenario_name;
        const double diam = sc.surface.diameter;

        // 1: homology of both complexes, runtime
        if (!r.h_complex || !r.cascade_complex) {
            c[1].fail(n + ": complexes missing");
        } else {
            const std::vector<int> expected = surface_betti(sc.surface.euler_characteristic);
            for (const ComplexSummary* s : {&*r.h_complex, &*r.cascade_complex})
                if (s->homology.betti != expected || !no_torsion(s->homology))
                    c[1].fail(n + ": betti " + betti_string(s->homology.betti) + " vs " + betti_string(expected));
        }
        if (run.seconds > kRuntimeLimit) c[1].fail(n + ": " + std::to_string(run.seconds) + " s");

        // 2: boundary relation and d o d = 0
        if (!r.h_complex || !r.cascade_complex) {
            c[2].fail(n + ": complexes missing");
        } else {
            if (!r.boundary_relation) c[2].fail(n + ": cascade boundary != -perturbed boundary");
            for (const ComplexSummary* s : {&*r.h_complex, &*r.cascade_complex}) {
                try {
                    verify_d_squared(s->complex);
                } catch (const DSquaredNonzero& e) {
                    c[2].fail(n + ": " + e.what());
                }
            }
        }

        // 3: matching at the automatic epsilon
        if (r.matches.size() != r.cascades.size()) c[3].fail(n + ": matching incomplete");
        for (const MatchReport& m : r.matches)
            if (!m.passed) c[3].fail(n + ": " + m.reason);

        // 4, 5: sweeps
        if (r.schedule.size() != static_cast<size_t>(kScheduleSize)) c[4].fail(n + ": schedule size");
        if (r.sweeps.size() != r.cascades.size()) {
            c[4].fail(n + ": sweeps missing");
            c[5].fail(n + ": sweeps missing");
        }
        for (const SweepReport& s : r.sweeps) {
            const std::string pair = n + " " + r.labels[s.q] + "->" + r.labels[s.p];
            if (!s.counts_constant || !s.signs_constant || !s.sign_relation) c[4].fail(pair);
            if (!s.ratio_ok) c[5].fail(pair + ": distance ratio above " + std::to_string(kRatioLimit));
            for (int k = 0; k < s.cascade_count; ++k) {
                const double d = s.rows.back().distances[k];
                if (!(d < kFinalFraction * diam)) c[5].fail(pair + ": final distance " + std::to_string(d));
            }
        }

        // 6: critical points of h along the schedule, conditions at eps0
        if (!r.conditions || !r.conditions->passed) c[6].fail(n + ": conditions fail at eps0");
        for (double eps : r.schedule) {
            if (r.epsilon && eps > *r.epsilon) continue;
            try {
                const PerturbationData pd = build_h_eps(sc, run.cfg.tubes, eps);
                const CriticalSweep cs = critical_points_of_h(pd, kCriticalGrid);
                if (cs.points.size() != sc.points.size()) c[6].fail(n + ": critical point count");
                for (const HCriticalPoint& p : cs.points)
                    if (p.index != sc.point(p.generator).total_index) c[6].fail(n + ": index of " + sc.point(p.generator).label);
            } catch (const std::exception& e) {
                c[6].fail(n + " at eps " + std::to_string(eps) + ": " + e.what());
            }
        }

        // 7: no continuum at relative index one
        for (const StageFailure& f : r.failures)
            if (f.message.find("continuum") != std::string::npos) c[7].fail(n + ": " + f.message);
        if (r.cascades.size() != adjacent_pairs(sc).size()) c[7].fail(n + ": enumeration incomplete");

        // 8: Euler identity
        if (!r.verification || r.verification->euler_sum != sc.surface.euler_characteristic)
            c[8].fail(n + ": Euler identity");

        // 9: refinement
        if (r.epsilon && r.cascades.size() == adjacent_pairs(sc).size()) {
            CascadeSettings fine = run.cfg.cascade;
            fine.samples *= 2;
            fine.ode.rtol /= 2.0;
            fine.ode.atol /= 2.0;
            const PerturbationData pd = build_h_eps(sc, run.cfg.tubes, *r.epsilon);
            for (size_t k = 0; k < r.cascades.size(); ++k) {
                const CascadeEnumeration& base = r.cascades[k];
                const std::string pair = n + " " + r.labels[base.q] + "->" + r.labels[base.p];
                try {
                    const CascadeEnumeration ref = enumerate_cascades(sc, base.q, base.p, fine);
                    if (ref.cascades.size() != base.cascades.size()) c[9].fail(pair + ": cascade count changes");
                    std::vector<std::pair<std::string, double>> a, b;
                    for (const auto& x : base.cascades) a.emplace_back(x.family, x.parameter);
                    for (const auto& x : ref.cascades) b.emplace_back(x.family, x.parameter);
                    const double shift = max_parameter_shift(a, b);
                    if (shift > kParameterDrift) c[9].fail(pair + ": cascade parameter moves " + std::to_string(shift));

                    const HFlowEnumeration& hb = r.flows.at(k);
                    const HFlowEnumeration hr = h_flow_lines(pd, base.q, base.p, fine);
                    if (hr.lines.size() != hb.lines.size() || hr.signed_count != hb.signed_count)
                        c[9].fail(pair + ": flow line count changes");
                    a.clear();
                    b.clear();
                    for (const auto& x : hb.lines) a.emplace_back(x.family, x.parameter);
                    for (const auto& x : hr.lines) b.emplace_back(x.family, x.parameter);
                    const double hshift = max_parameter_shift(a, b);
                    if (hshift > kParameterDrift) c[9].fail(pair + ": flow line parameter moves " + std::to_string(hshift));
                } catch (const std::exception& e) {
                    c[9].fail(pair + ": " + e.what());
                }
            }
        } else {
            c[9].fail(n + ": no baseline");
        }
    }

    // 7: negative control
    {
        const ScenarioConfig z = catalog_scenario("sphere-z");
        CascadeSettings gap = z.cascade;
        gap.allow_index_gap = true;
        try {
            enumerate_cascades(z.scenario, z.scenario.find_point("N"), z.scenario.find_point("S"), gap);
            c[7].fail("sphere-z N->S: continuum not detected");
        } catch (const ContinuumDetected&) {
        } catch (const std::exception& e) {
            c[7].fail(std::string("sphere-z N->S: ") + e.what());
        }
    }

    // 8: oracle suites
    {
        std::mt19937 rng(8);
        std::uniform_int_distribution<int> entry(-3, 3);
        for (int t = 0; t < kOracleMatrices; ++t) {
            IntMatrix m(4, 4);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) m(i, j) = entry(rng);
            const SmithForm s = smith_normal_form(m);
            if (s.diagonal != oracle::determinantal_factors(m) || s.diagonal != oracle::elementary_factors(m)) {
                c[8].fail("Smith form disagrees with an oracle");
                break;
            }
            if (rank_mod2(m) != oracle::rank_mod2_bruteforce(m)) {
                c[8].fail("mod 2 rank disagrees with brute force");
                break;
            }
        }
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_int_distribution<int> size(1, 40);
        for (int t = 0; t < kOracleHausdorff; ++t) {
            std::vector<Vec3> a(size(rng)), b(size(rng));
            for (auto& x : a) x = Vec3(u(rng), u(rng), u(rng));
            for (auto& x : b) x = Vec3(u(rng), u(rng), u(rng));
            if (std::abs(hausdorff_distance(a, b) - oracle::hausdorff_brute(a, b)) > kHausdorffTol) {
                c[8].fail("Hausdorff distance disagrees with brute force");
                break;
            }
        }
        std::uniform_real_distribution<double> st(0.05, 0.95);
        for (const Run& run : runs) {
            const MorseBottScenario& sc = run.cfg.scenario;
            double worst = 0.0;
            for (int t = 0; t < 50; ++t) {
                const Vec3 x = project(sc.surface, sc.surface.chart(st(rng), st(rng))).coordinates;
                const Vec3 g = tangential_gradient(sc.surface, sc.f, x);
                const Vec3 fd = oracle::fd_surface_gradient(sc.surface, sc.f, x);
                worst = std::max(worst, (g - fd).norm() / std::max(1.0, fd.norm()));
            }
            if (worst > kGradientTol) c[8].fail(sc.name + ": gradient differs from finite differences");
        }
    }

    const char* titles[10] = {
        "",
        "homology of both complexes matches the surface within the runtime limit",
        "cascade boundary is minus the perturbed boundary and squares to zero",
        "moduli spaces match at the selected epsilon",
        "signed counts stay constant across the epsilon schedule",
        "Hausdorff distances converge",
        "perturbed critical points equal the declared generators",
        "no continuum at relative index one; negative control detected",
        "oracle suites and Euler identity",
        "refinement leaves counts and parameters unchanged",
    };
    bool all = true;
    for (int k = 1; k <= 9; ++k) {
        std::printf("criterion %d: %s  %s", k, c[k].passed ? "PASS" : "FAIL", titles[k]);
        if (!c[k].passed) std::printf("  [%s]", c[k].detail.str().c_str());
        std::printf("\n");
        all = all && c[k].passed;
    }
    return all ? 0 : 1;
}
