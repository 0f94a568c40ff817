#include "mbcascade/pipeline.hpp"

#include "json.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mbcascade {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<Stage, const char*>> kStageNames = {
    {kStageVerify, "verify"},   {kStageCascades, "cascades"},     {kStagePerturb, "perturb"},
    {kStageComplex, "complex"}, {kStageCorrespond, "correspond"},
};

class StageTimer {
public:
    StageTimer(PipelineReport& r, std::string name)
        : r_(r), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        r_.timings[name_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    PipelineReport& r_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

std::string pair_name(const PipelineReport& r, int q, int p) { return r.labels.at(q) + " -> " + r.labels.at(p); }

bool same_betti(const HomologyResult& h, const std::vector<int>& expected) {
    if (h.betti != expected) return false;
    for (const auto& t : h.torsion)
        if (!t.empty()) return false;
    return true;
}

}  // namespace

unsigned parse_stages(const std::string& list) {
    unsigned mask = 0;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "all") {
            mask |= kStageAll;
            continue;
        }
        bool found = false;
        for (const auto& [s, n] : kStageNames)
            if (item == n) {
                mask |= s;
                found = true;
            }
        if (!found) throw std::invalid_argument("unknown stage '" + item + "'");
    }
    if (mask == 0) throw std::invalid_argument("no stage selected");
    return mask;
}

std::vector<std::string> stage_names(unsigned mask) {
    std::vector<std::string> out;
    for (const auto& [s, n] : kStageNames)
        if (mask & s) out.emplace_back(n);
    return out;
}

std::vector<int> surface_betti(int euler_characteristic) { return {1, 2 - euler_characteristic, 1}; }

PipelineReport run_pipeline(const ScenarioConfig& cfg, unsigned stages) {
    const MorseBottScenario& sc = cfg.scenario;
    PipelineReport r;
    r.scenario_name = sc.name;
    r.scenario_json = scenario_to_json(cfg);
    r.seed = cfg.smallness.seed;
    r.stages = stages;
    for (const AuxCriticalPoint& q : sc.points) r.labels.push_back(q.label);

    const bool want_flows = stages & (kStageComplex | kStageCorrespond);
    const bool want_cascades = want_flows || (stages & (kStageCascades | kStagePerturb));
    const bool want_eps = want_flows || (stages & kStagePerturb);
    const auto fail = [&](const char* stage, const std::string& msg) { r.failures.push_back({stage, msg}); };

    // verify
    {
        StageTimer t(r, "verify");
        r.verification = morse_bott_report(sc, cfg.verify_tol);
        if (!r.verification->passed) {
            fail("verify", r.verification->first_failure);
            return r;
        }
    }

    const auto pairs = adjacent_pairs(sc);
    if (want_cascades) {
        StageTimer t(r, "cascades");
        try {
            for (auto [q, p] : pairs) {
                CascadeEnumeration ce = enumerate_cascades(sc, q, p, cfg.cascade);
                long long z = 0;
                for (const CascadeFlowLine& c : ce.cascades) z -= c.path_sign;
                r.cascade_counts_z[{q, p}] = z;
                r.cascade_counts_z2[{q, p}] = static_cast<long long>(ce.cascades.size() % 2);
                r.cascades.push_back(std::move(ce));
            }
        } catch (const std::exception& e) {
            fail("cascades", e.what());
            return r;
        }
    }

    std::optional<PerturbationData> pd;
    if (want_eps) {
        StageTimer t(r, "perturb");
        try {
            if (cfg.epsilon.value > 0.0) {
                r.epsilon = cfg.epsilon.value;
                r.epsilon_overridden = true;
                pd = build_h_eps(sc, cfg.tubes, *r.epsilon);
                r.conditions = check_smallness(*pd, cfg.smallness);
                r.critical = critical_points_of_h(*pd);
                if (!r.conditions->passed) fail("perturb", "smallness conditions fail: " + r.conditions->first_failure);
            } else {
                // accepted once every adjacent pair matches unambiguously
                const auto unambiguous = [&](const PerturbationData& trial) {
                    for (const CascadeEnumeration& ce : r.cascades) {
                        try {
                            match_moduli(sc, ce, h_flow_lines(trial, ce.q, ce.p, cfg.cascade), cfg.cascade.resolution);
                        } catch (const std::exception&) {
                            return false;
                        }
                    }
                    return true;
                };
                EpsilonChoice ch = auto_epsilon(sc, cfg.tubes, unambiguous, cfg.epsilon.start,
                                                cfg.epsilon.max_halvings, cfg.smallness);
                r.epsilon = ch.epsilon;
                r.conditions = ch.conditions;
                r.critical = ch.critical;
                r.epsilon_choice = std::move(ch);
                pd = build_h_eps(sc, cfg.tubes, *r.epsilon);
            }
        } catch (const std::exception& e) {
            fail("perturb", e.what());
            return r;
        }
    }

    if (want_flows) {
        StageTimer t(r, "flows");
        try {
            for (const CascadeEnumeration& ce : r.cascades) {
                HFlowEnumeration he = h_flow_lines(*pd, ce.q, ce.p, cfg.cascade);
                r.h_counts[{ce.q, ce.p}] = he.signed_count;
                try {
                    r.matches.push_back(match_moduli(sc, ce, he, cfg.cascade.resolution));
                } catch (const Ambiguous& e) {
                    r.matches.push_back(e.report);
                } catch (const CountMismatch& e) {
                    r.matches.push_back(e.report);
                }
                r.flows.push_back(std::move(he));
            }
        } catch (const std::exception& e) {
            fail(stages & kStageComplex ? "complex" : "correspond", e.what());
            return r;
        }
    }

    if (stages & kStageComplex) {
        StageTimer t(r, "complex");
        r.expected_betti = surface_betti(sc.surface.euler_characteristic);
        try {
            ComplexSummary h{assemble(sc, r.h_counts, Ring::Z), {}};
            h.homology = homology(h.complex);
            ComplexSummary c{assemble(sc, r.cascade_counts_z, Ring::Z), {}};
            c.homology = homology(c.complex);
            ComplexSummary c2{assemble(sc, r.cascade_counts_z2, Ring::Z2), {}};
            c2.homology = homology(c2.complex);

            r.boundary_relation = true;
            for (size_t k = 0; k < h.complex.boundary.size(); ++k)
                if (h.complex.boundary[k] != -c.complex.boundary[k]) r.boundary_relation = false;

            r.path_signs_agree = true;
            for (const MatchReport& m : r.matches) {
                if (!m.path_signs_agree) r.path_signs_agree = false;
                if (m.passed) r.matched_cascade_counts[{m.q, m.p}] = cascade_count_z(m.cascade_signs);
            }

            if (!same_betti(h.homology, r.expected_betti)) fail("complex", "homology of the perturbed complex differs from the surface");
            if (!same_betti(c.homology, r.expected_betti)) fail("complex", "homology of the cascade complex differs from the surface");
            if (c2.homology.betti != r.expected_betti) fail("complex", "mod 2 homology of the cascade complex differs from the surface");
            if (!r.boundary_relation) fail("complex", "cascade boundary is not minus the perturbed boundary");
            for (size_t k = 0; k < c.complex.boundary.size(); ++k) {
                const IntMatrix reduced = c.complex.boundary[k].unaryExpr([](long long v) { return ((v % 2) + 2) % 2; });
                if (reduced != c2.complex.boundary[k]) {
                    fail("complex", "mod 2 reduction of the cascade complex differs from the mod 2 counts");
                    break;
                }
            }
            if (!r.path_signs_agree) fail("complex", "path signs of matched lines disagree");
            for (const MatchReport& m : r.matches) {
                if (!m.passed) {
                    fail("complex", "no complete matching for " + pair_name(r, m.q, m.p) + ": " + m.reason);
                    continue;
                }
                if (r.matched_cascade_counts.at({m.q, m.p}) != r.cascade_counts_z.at({m.q, m.p}))
                    fail("complex", "matched and intrinsic cascade counts differ for " + pair_name(r, m.q, m.p));
            }
            r.h_complex = std::move(h);
            r.cascade_complex = std::move(c);
            r.cascade_complex_z2 = std::move(c2);
        } catch (const std::exception& e) {
            fail("complex", e.what());
        }
    }

    if (stages & kStageCorrespond) {
        StageTimer t(r, "correspond");
        for (const MatchReport& m : r.matches)
            if (!m.passed) fail("correspond", "matching failed for " + pair_name(r, m.q, m.p) + ": " + m.reason);
        r.schedule = cfg.epsilon.schedule.empty()
                         ? geometric_schedule(*r.epsilon, cfg.epsilon.schedule_points, cfg.epsilon.schedule_decades)
                         : cfg.epsilon.schedule;
        try {
            r.sweeps = eps_sweep(sc, cfg.tubes, r.cascades, r.schedule, cfg.cascade);
            for (const SweepReport& s : r.sweeps) {
                if (!s.passed) fail("correspond", "sweep fails for " + pair_name(r, s.q, s.p));
                else if (!s.sign_relation) fail("correspond", "signed counts break the sign relation for " + pair_name(r, s.q, s.p));
            }
        } catch (const std::exception& e) {
            fail("correspond", e.what());
        }
    }

    r.passed = r.failures.empty();
    return r;
}

// ---- serialization ----------------------------------------------------------------

namespace {

json num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json vec(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json counts_json(const PipelineReport& r, const CountTable& t) {
    json a = json::array();
    for (const auto& [k, v] : t) a.push_back({{"from", r.labels[k.first]}, {"to", r.labels[k.second]}, {"count", v}});
    return a;
}

json matrix_json(const IntMatrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

json complex_json(const PipelineReport& r, const ComplexSummary& c) {
    json gens = json::array();
    for (const auto& g : c.complex.generators) {
        json d = json::array();
        for (int id : g) d.push_back(r.labels[id]);
        gens.push_back(d);
    }
    json bd = json::array();
    for (size_t k = 1; k < c.complex.boundary.size(); ++k) bd.push_back({{"degree", k}, {"matrix", matrix_json(c.complex.boundary[k])}});
    return {{"ring", to_string(c.complex.ring)},
            {"generators", gens},
            {"boundary", bd},
            {"betti", c.homology.betti},
            {"torsion", c.homology.torsion},
            {"euler_characteristic", c.homology.euler_characteristic()}};
}

json conditions_json(const PipelineReport& r, const ConditionReport& c) {
    json tubes = json::array();
    for (const TubeConditions& t : c.tubes)
        tubes.push_back({{"host", t.host},
                         {"eps_term_sup", num(t.eps_term_sup)},
                         {"gradient_inf", num(t.gradient_inf)},
                         {"eps_bound", t.eps_bound},
                         {"variation", num(t.variation)},
                         {"orthogonality", num(t.orthogonality)},
                         {"orthogonality_ok", t.orthogonality_ok},
                         {"model_fit", num(t.model_fit)},
                         {"model_ok", t.model_ok},
                         {"tube_samples", t.tube_samples},
                         {"shell_samples", t.shell_samples}});
    json pairs = json::array();
    for (const PairConditions& p : c.pairs)
        pairs.push_back({{"i", p.i}, {"j", p.j}, {"variation_sum", num(p.variation_sum)},
                         {"value_gap_third", num(p.value_gap_third)}, {"ok", p.ok}});
    (void)r;
    return {{"epsilon", c.epsilon},
            {"seed", c.seed},
            {"tubes", tubes},
            {"pairs", pairs},
            {"disjoint", c.disjoint},
            {"min_decrement", num(c.min_decrement)},
            {"required_decrement", num(c.required_decrement)},
            {"decrement_ok", c.decrement_ok},
            {"passed", c.passed},
            {"first_failure", c.first_failure}};
}

json match_json(const PipelineReport& r, const MatchReport& m) {
    json dm = json::array();
    for (Eigen::Index i = 0; i < m.distance_matrix.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.distance_matrix.cols(); ++j) row.push_back(num(m.distance_matrix(i, j)));
        dm.push_back(row);
    }
    json pairs = json::array();
    for (size_t k = 0; k < m.matching.size(); ++k)
        pairs.push_back({{"cascade", m.matching[k].first},
                         {"flow_line", m.matching[k].second},
                         {"distance", num(m.distances[k])},
                         {"second_best", num(m.second_best[k])}});
    json signs = json::array();
    for (const auto& s : m.cascade_signs) signs.push_back(s ? json(*s) : json(nullptr));
    return {{"from", r.labels[m.q]},
            {"to", r.labels[m.p]},
            {"epsilon", m.epsilon},
            {"cascade_count", m.cascade_count},
            {"flow_count", m.flow_count},
            {"threshold", num(m.threshold)},
            {"distance_matrix", dm},
            {"matching", pairs},
            {"unmatched_cascades", m.unmatched_cascades},
            {"unmatched_flows", m.unmatched_flows},
            {"cascade_signs", signs},
            {"signed_count_h", m.signed_count_h},
            {"signed_count_cascades", m.signed_count_cascades},
            {"path_signs_agree", m.path_signs_agree},
            {"passed", m.passed},
            {"reason", m.reason},
            {"notes", m.notes}};
}

json sweep_json(const PipelineReport& r, const SweepReport& s) {
    json rows = json::array();
    for (const SweepRow& row : s.rows) {
        json d = json::array();
        for (double x : row.distances) d.push_back(num(x));
        rows.push_back({{"epsilon", row.epsilon},
                        {"flow_count", row.flow_count},
                        {"signed_count_h", row.signed_count_h},
                        {"signed_count_cascades", row.signed_count_cascades},
                        {"distances", d},
                        {"matched", row.matched},
                        {"note", row.note}});
    }
    json ratios = json::array();
    for (double x : s.ratios) ratios.push_back(num(x));
    return {{"from", r.labels[s.q]},          {"to", r.labels[s.p]},
            {"cascade_count", s.cascade_count}, {"rows", rows},
            {"counts_constant", s.counts_constant}, {"signs_constant", s.signs_constant},
            {"sign_relation", s.sign_relation}, {"monotone", s.monotone},
            {"final_small", s.final_small},   {"ratio_ok", s.ratio_ok},
            {"ratios", ratios},               {"passed", s.passed},
            {"notes", s.notes}};
}

json verification_json(const VerificationReport& v) {
    json subs = json::array();
    for (const SubmanifoldCheck& c : v.submanifolds)
        subs.push_back({{"name", c.name},
                        {"max_gradient", num(c.max_gradient)},
                        {"value_spread", num(c.value_spread)},
                        {"min_normal_hessian", num(c.min_normal_hessian)},
                        {"fit_relative_error", num(c.fit_relative_error)},
                        {"measured_index", c.measured_index},
                        {"index_constant", c.index_constant},
                        {"aux_positive", c.aux_positive},
                        {"aux_nondegenerate", c.aux_nondegenerate},
                        {"passed", c.passed}});
    return {{"submanifolds", subs},
            {"euler_sum", v.euler_sum},
            {"euler_characteristic", v.euler_characteristic},
            {"min_pairwise_distance", num(v.min_pairwise_distance)},
            {"undeclared_grid_points", v.undeclared_grid_points},
            {"passed", v.passed},
            {"first_failure", v.first_failure}};
}

}  // namespace

std::string report_to_json(const PipelineReport& r) {
    json j;
    j["scenario"] = r.scenario_name;
    j["configuration"] = json::parse(r.scenario_json);
    j["seed"] = r.seed;
    j["stages"] = stage_names(r.stages);
    json labels = json::array();
    for (const std::string& l : r.labels) labels.push_back(l);
    j["critical_points"] = labels;

    if ((r.stages & kStageVerify) && r.verification) j["verification"] = verification_json(*r.verification);

    if (r.stages & kStageCascades) {
        json inv = json::array();
        for (const CascadeEnumeration& ce : r.cascades) {
            json lines = json::array();
            for (const CascadeFlowLine& c : ce.cascades) {
                json inter = json::array();
                for (int k : c.intermediate) inter.push_back(k);
                lines.push_back({{"cascades", c.n},
                                 {"family", c.family},
                                 {"parameter", c.parameter},
                                 {"landing", c.landing.key()},
                                 {"intermediate", inter},
                                 {"backward_limit", vec(c.backward_limit)},
                                 {"forward_limit", vec(c.forward_limit)},
                                 {"path_sign", c.path_sign},
                                 {"polyline_points", c.polyline.size()}});
            }
            inv.push_back({{"from", r.labels[ce.q]},
                           {"to", r.labels[ce.p]},
                           {"lines", lines},
                           {"integrations", ce.integrations},
                           {"notes", ce.notes}});
        }
        j["cascades"] = {{"inventory", inv},
                         {"counts_z", counts_json(r, r.cascade_counts_z)},
                         {"counts_z2", counts_json(r, r.cascade_counts_z2)}};
    }

    if ((r.stages & kStagePerturb) && r.epsilon) {
        json p = {{"epsilon", *r.epsilon}, {"overridden", r.epsilon_overridden}};
        if (r.epsilon_choice) {
            p["halvings"] = r.epsilon_choice->halvings;
            p["rejected"] = r.epsilon_choice->rejected;
        }
        if (r.conditions) p["conditions"] = conditions_json(r, *r.conditions);
        if (r.critical) {
            json pts = json::array();
            for (const HCriticalPoint& c : r.critical->points)
                pts.push_back({{"generator", r.labels[c.generator]},
                               {"location", vec(c.location)},
                               {"index", c.index},
                               {"offset", num(c.offset)},
                               {"gradient", num(c.gradient)}});
            p["critical_points"] = {{"points", pts},
                                    {"grid_minima", r.critical->grid_minima},
                                    {"refined_zeros", r.critical->refined_zeros}};
        }
        j["perturbation"] = p;
    }

    if (r.stages & kStageComplex) {
        json c;
        json flows = json::array();
        for (const HFlowEnumeration& he : r.flows) {
            json lines = json::array();
            for (const HFlowLine& l : he.lines) {
                json tv = json::array();
                for (double x : l.time_vector) tv.push_back(num(x));
                lines.push_back({{"family", l.family},
                                 {"parameter", l.parameter},
                                 {"landing", l.landing.key()},
                                 {"sign", l.sign},
                                 {"time_vector", tv},
                                 {"polyline_points", l.polyline.size()}});
            }
            flows.push_back({{"from", r.labels[he.q]},
                             {"to", r.labels[he.p]},
                             {"epsilon", he.epsilon},
                             {"lines", lines},
                             {"signed_count", he.signed_count},
                             {"integrations", he.integrations},
                             {"notes", he.notes}});
        }
        c["flow_lines"] = flows;
        c["counts_h"] = counts_json(r, r.h_counts);
        c["counts_cascades_matched"] = counts_json(r, r.matched_cascade_counts);
        if (r.h_complex) c["perturbed"] = complex_json(r, *r.h_complex);
        if (r.cascade_complex) c["cascade"] = complex_json(r, *r.cascade_complex);
        if (r.cascade_complex_z2) c["cascade_mod2"] = complex_json(r, *r.cascade_complex_z2);
        c["expected_betti"] = r.expected_betti;
        c["boundary_relation"] = r.boundary_relation;
        c["path_signs_agree"] = r.path_signs_agree;
        j["complexes"] = c;
    }

    if (r.stages & kStageCorrespond) {
        json m = json::array();
        for (const MatchReport& x : r.matches) m.push_back(match_json(r, x));
        json s = json::array();
        for (const SweepReport& x : r.sweeps) s.push_back(sweep_json(r, x));
        j["correspondence"] = {{"matches", m}, {"schedule", r.schedule}, {"sweeps", s}};
    }

    json f = json::array();
    for (const StageFailure& x : r.failures) f.push_back({{"stage", x.stage}, {"message", x.message}});
    j["failures"] = f;
    j["passed"] = r.passed;
    return j.dump(2);
}

std::string timings_to_json(const PipelineReport& r) {
    json j = json::object();
    for (const auto& [k, v] : r.timings) j[k] = v;
    return j.dump(2);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text << '\n';
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

std::string file_label(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
    return out;
}

void write_polylines(const fs::path& path, const std::vector<const std::vector<Vec3>*>& lines) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "line,vertex,x,y,z\n" << std::setprecision(17);
    for (size_t l = 0; l < lines.size(); ++l)
        for (size_t k = 0; k < lines[l]->size(); ++k) {
            const Vec3& x = (*lines[l])[k];
            os << l << ',' << k << ',' << x[0] << ',' << x[1] << ',' << x[2] << '\n';
        }
}

}  // namespace

void write_report(const PipelineReport& r, const std::string& dir) {
    fs::create_directories(dir);
    write_text(fs::path(dir) / "report.json", report_to_json(r));
    write_text(fs::path(dir) / "timings.json", timings_to_json(r));
}

std::vector<std::string> export_plots(const PipelineReport& r, const MorseBottScenario& sc,
                                      const std::string& dir) {
    fs::create_directories(dir);
    std::vector<std::string> written;
    json empty = json::array();
    const auto stem = [&](int q, int p) {
        return file_label(sc.point(q).label) + "_" + file_label(sc.point(p).label);
    };
    for (const CascadeEnumeration& ce : r.cascades) {
        if (ce.cascades.empty()) {
            empty.push_back({{"from", sc.point(ce.q).label}, {"to", sc.point(ce.p).label}, {"set", "cascades"}});
            continue;
        }
        std::vector<const std::vector<Vec3>*> lines;
        for (const CascadeFlowLine& c : ce.cascades) lines.push_back(&c.polyline);
        const std::string name = "cascades_" + stem(ce.q, ce.p) + ".csv";
        write_polylines(fs::path(dir) / name, lines);
        written.push_back(name);
    }
    for (const HFlowEnumeration& he : r.flows) {
        if (he.lines.empty()) {
            empty.push_back({{"from", sc.point(he.q).label}, {"to", sc.point(he.p).label}, {"set", "flow_lines"}});
            continue;
        }
        std::vector<const std::vector<Vec3>*> lines;
        for (const HFlowLine& l : he.lines) lines.push_back(&l.polyline);
        const std::string name = "flows_" + stem(he.q, he.p) + ".csv";
        write_polylines(fs::path(dir) / name, lines);
        written.push_back(name);
    }
    for (const SweepReport& s : r.sweeps) {
        if (s.cascade_count == 0) continue;
        const std::string name = "sweep_" + stem(s.q, s.p) + ".csv";
        write_sweep_csv(s, (fs::path(dir) / name).string());
        written.push_back(name);
    }
    json manifest = {{"scenario", r.scenario_name}, {"files", written}, {"empty_pairs", empty}};
    if (r.epsilon) manifest["epsilon"] = *r.epsilon;
    write_text(fs::path(dir) / "manifest.json", manifest.dump(2));
    return written;
}

std::vector<std::string> report_consistency(const PipelineReport& r) {
    std::vector<std::string> out;
    const auto inventory = [&](int q, int p) -> const CascadeEnumeration* {
        for (const CascadeEnumeration& ce : r.cascades)
            if (ce.q == q && ce.p == p) return &ce;
        return nullptr;
    };
    for (const auto& [k, v] : r.cascade_counts_z) {
        const CascadeEnumeration* ce = inventory(k.first, k.second);
        if (!ce) {
            out.push_back("cascade count for " + pair_name(r, k.first, k.second) + " has no inventory entry");
            continue;
        }
        long long z = 0;
        for (const CascadeFlowLine& c : ce->cascades) z -= c.path_sign;
        if (z != v) out.push_back("cascade count for " + pair_name(r, k.first, k.second) + " differs from its inventory");
    }
    for (const auto& [k, v] : r.h_counts) {
        bool found = false;
        for (const HFlowEnumeration& he : r.flows)
            if (he.q == k.first && he.p == k.second) {
                found = true;
                if (he.signed_count != v)
                    out.push_back("perturbed count for " + pair_name(r, k.first, k.second) + " differs from its flow lines");
            }
        if (!found) out.push_back("perturbed count for " + pair_name(r, k.first, k.second) + " has no flow-line entry");
    }
    const auto check_complex = [&](const std::optional<ComplexSummary>& c, const CountTable& t, const char* what) {
        if (!c) return;
        for (size_t k = 1; k < c->complex.boundary.size(); ++k) {
            const IntMatrix& B = c->complex.boundary[k];
            for (Eigen::Index i = 0; i < B.rows(); ++i)
                for (Eigen::Index j = 0; j < B.cols(); ++j) {
                    if (B(i, j) == 0) continue;
                    const int q = c->complex.generators[k][j], p = c->complex.generators[k - 1][i];
                    if (!t.count({q, p}))
                        out.push_back(std::string(what) + " boundary entry " + pair_name(r, q, p) + " is not in the counts");
                }
        }
    };
    check_complex(r.h_complex, r.h_counts, "perturbed");
    check_complex(r.cascade_complex, r.cascade_counts_z, "cascade");
    check_complex(r.cascade_complex_z2, r.cascade_counts_z2, "cascade mod 2");
    for (const MatchReport& m : r.matches)
        if (!inventory(m.q, m.p)) out.push_back("match for " + pair_name(r, m.q, m.p) + " has no inventory entry");
    return out;
}

}  // namespace mbcascade
