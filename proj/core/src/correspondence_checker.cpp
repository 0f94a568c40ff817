#include "mbcascade/correspondence_checker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace mbcascade {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

MatchReport match_moduli(const MorseBottScenario& sc, const CascadeEnumeration& cascades,
                         const HFlowEnumeration& flows, double resolution) {
    MatchReport r;
    r.q = cascades.q;
    r.p = cascades.p;
    r.epsilon = flows.epsilon;
    r.cascade_count = static_cast<int>(cascades.cascades.size());
    r.flow_count = static_cast<int>(flows.lines.size());
    r.signed_count_h = flows.signed_count;
    const int nc = r.cascade_count, nf = r.flow_count;

    std::vector<CascadeImage> ci, fi;
    for (const auto& c : cascades.cascades) ci.push_back(image_of(sc, c, resolution));
    for (const auto& l : flows.lines) fi.push_back(CascadeImage{l.polyline, l.time_vector});

    r.threshold = kInf;
    for (int a = 0; a < nc; ++a)
        for (int b = a + 1; b < nc; ++b) r.threshold = std::min(r.threshold, 0.5 * image_distance(ci[a], ci[b]));

    r.distance_matrix = Eigen::MatrixXd::Zero(nc, nf);
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nf; ++j) r.distance_matrix(i, j) = image_distance(ci[i], fi[j]);

    std::vector<bool> row_used(nc, false), col_used(nf, false);
    for (int step = 0; step < std::min(nc, nf); ++step) {
        int bi = -1, bj = -1;
        double best = kInf;
        for (int i = 0; i < nc; ++i) {
            if (row_used[i]) continue;
            for (int j = 0; j < nf; ++j)
                if (!col_used[j] && r.distance_matrix(i, j) < best) {
                    best = r.distance_matrix(i, j);
                    bi = i;
                    bj = j;
                }
        }
        if (bi < 0) break;
        row_used[bi] = col_used[bj] = true;
        r.matching.emplace_back(bi, bj);
    }
    std::sort(r.matching.begin(), r.matching.end());
    r.cascade_signs.assign(nc, std::nullopt);
    for (auto [i, j] : r.matching) {
        const double d = r.distance_matrix(i, j);
        double second = kInf;
        for (int k = 0; k < nf; ++k)
            if (k != j) second = std::min(second, r.distance_matrix(i, k));
        r.distances.push_back(d);
        r.second_best.push_back(second);
        const int s = flows.lines[j].sign;
        r.cascade_signs[i] = -s;
        r.signed_count_cascades += -s;
        if (cascades.cascades[i].path_sign != s) r.path_signs_agree = false;
    }
    for (int i = 0; i < nc; ++i)
        if (!row_used[i]) r.unmatched_cascades.push_back(i);
    for (int j = 0; j < nf; ++j)
        if (!col_used[j]) r.unmatched_flows.push_back(j);

    std::ostringstream why;
    const std::string& lq = sc.point(r.q).label;
    const std::string& lp = sc.point(r.p).label;
    if (nc != nf) {
        why << lq << " -> " << lp << ": " << nc << " cascades vs " << nf << " flow lines at eps " << r.epsilon;
        r.reason = why.str();
        throw CountMismatch(r.reason, r);
    }
    for (size_t k = 0; k < r.matching.size(); ++k) {
        if (!(r.distances[k] < r.threshold)) {
            why << lq << " -> " << lp << ": matched distance " << r.distances[k] << " not below threshold "
                << r.threshold;
            break;
        }
        if (!(r.second_best[k] > 2.0 * r.distances[k])) {
            why << lq << " -> " << lp << ": second-best distance " << r.second_best[k]
                << " within twice the best " << r.distances[k];
            break;
        }
    }
    if (!why.str().empty()) {
        r.reason = why.str();
        throw Ambiguous(r.reason, r);
    }
    for (const auto& l : flows.lines)
        for (double t : l.time_vector)
            if (compactify(t) > 0.5)
                r.notes.push_back("flow line with a long stay near an intermediate submanifold (near-broken limit)");
    r.passed = true;
    return r;
}

MatchReport match_moduli(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes, int q,
                         int p, double epsilon, const CascadeSettings& cfg) {
    const PerturbationData pd = build_h_eps(sc, tubes, epsilon);
    const ConditionReport cond = check_smallness(pd);
    if (!cond.passed) throw PreconditionFailed("smallness conditions fail at this epsilon: " + cond.first_failure);
    const CascadeEnumeration ce = enumerate_cascades(sc, q, p, cfg);
    const HFlowEnumeration he = h_flow_lines(pd, q, p, cfg);
    return match_moduli(sc, ce, he, cfg.resolution);
}

std::vector<double> geometric_schedule(double eps0, int count, double decades) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k)
        out.push_back(count == 1 ? eps0 : eps0 * std::pow(10.0, -decades * k / (count - 1)));
    return out;
}

std::vector<SweepReport> eps_sweep(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes,
                                   const std::vector<CascadeEnumeration>& cascades,
                                   const std::vector<double>& schedule, const CascadeSettings& cfg,
                                   const SweepSettings& sw) {
    std::vector<SweepReport> out(cascades.size());
    for (size_t a = 0; a < cascades.size(); ++a) {
        out[a].q = cascades[a].q;
        out[a].p = cascades[a].p;
        out[a].cascade_count = static_cast<int>(cascades[a].cascades.size());
    }
    for (double eps : schedule) {
        const PerturbationData pd = build_h_eps(sc, tubes, eps);
        for (size_t a = 0; a < cascades.size(); ++a) {
            SweepRow row;
            row.epsilon = eps;
            row.distances.assign(cascades[a].cascades.size(), kNaN);
            try {
                const HFlowEnumeration he = h_flow_lines(pd, cascades[a].q, cascades[a].p, cfg);
                row.flow_count = static_cast<int>(he.lines.size());
                row.signed_count_h = he.signed_count;
                try {
                    const MatchReport m = match_moduli(sc, cascades[a], he, cfg.resolution);
                    row.matched = true;
                    row.signed_count_cascades = m.signed_count_cascades;
                    for (size_t k = 0; k < m.matching.size(); ++k)
                        row.distances[m.matching[k].first] = m.distances[k];
                } catch (const Ambiguous& e) {
                    row.note = e.what();
                    row.signed_count_cascades = e.report.signed_count_cascades;
                    for (size_t k = 0; k < e.report.matching.size(); ++k)
                        row.distances[e.report.matching[k].first] = e.report.distances[k];
                } catch (const CountMismatch& e) {
                    row.note = e.what();
                }
            } catch (const std::exception& e) {
                row.note = e.what();
                row.flow_count = -1;
            }
            out[a].rows.push_back(std::move(row));
        }
    }

    const double diam = sc.surface.diameter;
    for (SweepReport& r : out) {
        if (r.rows.empty()) continue;
        const SweepRow& first = r.rows.front();
        const SweepRow& last = r.rows.back();
        r.counts_constant = r.signs_constant = r.sign_relation = true;
        for (const SweepRow& row : r.rows) {
            if (row.flow_count != first.flow_count || row.flow_count != r.cascade_count || !row.matched)
                r.counts_constant = false;
            if (row.signed_count_h != first.signed_count_h) r.signs_constant = false;
            if (!row.matched || row.signed_count_cascades != -row.signed_count_h) r.sign_relation = false;
        }
        r.monotone = r.final_small = r.ratio_ok = true;
        const double floor = sw.exact_floor * diam;
        for (int c = 0; c < r.cascade_count; ++c) {
            for (size_t k = 0; k + 1 < r.rows.size(); ++k) {
                const double d0 = r.rows[k].distances[c], d1 = r.rows[k + 1].distances[c];
                if (std::isnan(d0) || std::isnan(d1)) {
                    r.monotone = false;
                    continue;
                }
                if (d1 > (1.0 + sw.monotone_slack) * d0 && d1 > floor) r.monotone = false;
            }
            const double d_first = first.distances[c], d_last = last.distances[c];
            if (!(d_last < sw.final_fraction * diam)) r.final_small = false;
            const double ratio = d_first > 0.0 ? d_last / d_first : 0.0;
            r.ratios.push_back(ratio);
            if (!(d_first <= floor || ratio <= sw.convergence_ratio)) r.ratio_ok = false;
            if (d_first <= floor)
                r.notes.push_back("cascade " + std::to_string(c) + ": distance at the largest epsilon is at the numerical floor");
        }
        r.passed = r.counts_constant && r.signs_constant && r.monotone && r.final_small;
    }
    return out;
}

SweepReport eps_sweep(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes, int q, int p,
                      const std::vector<double>& schedule, const CascadeSettings& cfg, const SweepSettings& sw) {
    const std::vector<CascadeEnumeration> ce{enumerate_cascades(sc, q, p, cfg)};
    return eps_sweep(sc, tubes, ce, schedule, cfg, sw).front();
}

void write_sweep_csv(const SweepReport& r, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "epsilon,flow_count,signed_count";
    for (int c = 0; c < r.cascade_count; ++c) os << ",d_H_" << c;
    os << '\n' << std::setprecision(17);
    for (const SweepRow& row : r.rows) {
        os << row.epsilon << ',' << row.flow_count << ',' << row.signed_count_h;
        for (double d : row.distances) os << ',' << d;
        os << '\n';
    }
}

}  // namespace mbcascade
