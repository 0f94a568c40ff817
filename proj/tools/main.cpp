#include "mbcascade/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>

using namespace mbcascade;

namespace {

struct Overrides {
    std::string scenario;
    std::optional<double> epsilon;
    std::optional<double> rtol, atol, bisection, delta, resolution, verify;
    std::optional<int> samples, smallness_samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("scenario", o.scenario, "Scenario file or catalog name")->required();
    app->add_option("--epsilon", o.epsilon, "Fixed perturbation size (skips automatic selection)")
        ->check(CLI::PositiveNumber);
    app->add_option("--rtol", o.rtol, "Integrator relative tolerance");
    app->add_option("--atol", o.atol, "Integrator absolute tolerance");
    app->add_option("--bisection", o.bisection, "Shooting bisection tolerance");
    app->add_option("--samples", o.samples, "Shooting scan size");
    app->add_option("--delta", o.delta, "Seed offset from the source");
    app->add_option("--resolution", o.resolution, "Polyline spacing");
    app->add_option("--verify-tol", o.verify, "Tolerance of the Morse-Bott verification");
    app->add_option("--smallness-samples", o.smallness_samples, "Quasi-random samples per condition check");
    app->add_option("--seed", o.seed, "Seed of the condition sampling");
    app->add_option("-o,--out", o.out, "Output directory");
}

ScenarioConfig load(const Overrides& o) {
    ScenarioConfig c = load_scenario(o.scenario);
    if (o.epsilon) c.epsilon.value = *o.epsilon;
    if (o.rtol) c.cascade.ode.rtol = *o.rtol;
    if (o.atol) c.cascade.ode.atol = *o.atol;
    if (o.bisection) c.cascade.bisection_tol = *o.bisection;
    if (o.samples) c.cascade.samples = *o.samples;
    if (o.delta) c.cascade.delta = *o.delta;
    if (o.resolution) c.cascade.resolution = *o.resolution;
    if (o.verify) c.verify_tol = *o.verify;
    if (o.smallness_samples) c.smallness.samples = *o.smallness_samples;
    if (o.seed) c.smallness.seed = *o.seed;
    if (o.out) c.output_dir = *o.out;
    return c;
}

void print_counts(const PipelineReport& r, const char* title, const CountTable& t) {
    std::printf("%s\n", title);
    for (const auto& [k, v] : t) std::printf("  %-8s -> %-8s %lld\n", r.labels[k.first].c_str(), r.labels[k.second].c_str(), v);
}

void print_homology(const char* title, const ComplexSummary& c) {
    std::printf("%s (%s): betti", title, to_string(c.complex.ring));
    for (int b : c.homology.betti) std::printf(" %d", b);
    bool torsion = false;
    for (const auto& t : c.homology.torsion) torsion = torsion || !t.empty();
    std::printf("%s\n", torsion ? ", with torsion" : "");
}

void summarize(const PipelineReport& r) {
    std::printf("scenario %s, stages:", r.scenario_name.c_str());
    for (const auto& s : stage_names(r.stages)) std::printf(" %s", s.c_str());
    std::printf("\n");
    if ((r.stages & kStageVerify) && r.verification)
        std::printf("verification: %s\n", r.verification->passed ? "pass" : "fail");
    if (r.stages & kStageCascades) {
        for (const CascadeEnumeration& ce : r.cascades)
            std::printf("cascades %-8s -> %-8s %zu\n", r.labels[ce.q].c_str(), r.labels[ce.p].c_str(), ce.cascades.size());
        print_counts(r, "signed cascade counts:", r.cascade_counts_z);
    }
    if ((r.stages & kStagePerturb) && r.epsilon) {
        std::printf("epsilon %.6g%s", *r.epsilon, r.epsilon_overridden ? " (fixed)" : "");
        if (r.conditions) std::printf(", conditions %s", r.conditions->passed ? "pass" : "fail");
        std::printf("\n");
    }
    if (r.stages & kStageComplex) {
        print_counts(r, "signed counts of the perturbed function:", r.h_counts);
        if (r.h_complex) print_homology("perturbed complex", *r.h_complex);
        if (r.cascade_complex) print_homology("cascade complex", *r.cascade_complex);
        if (r.cascade_complex_z2) print_homology("cascade complex", *r.cascade_complex_z2);
        std::printf("cascade boundary = -perturbed boundary: %s\n", r.boundary_relation ? "yes" : "no");
    }
    if (r.stages & kStageCorrespond) {
        for (const MatchReport& m : r.matches)
            std::printf("match %-8s -> %-8s %s\n", r.labels[m.q].c_str(), r.labels[m.p].c_str(),
                        m.passed ? "pass" : m.reason.c_str());
        for (const SweepReport& s : r.sweeps)
            std::printf("sweep %-8s -> %-8s %s\n", r.labels[s.q].c_str(), r.labels[s.p].c_str(), s.passed ? "pass" : "fail");
    }
    for (const StageFailure& f : r.failures) std::printf("FAILED [%s] %s\n", f.stage.c_str(), f.message.c_str());
    std::printf("%s\n", r.passed ? "PASS" : "FAIL");
}

int run(const Overrides& o, unsigned stages, bool plots) {
    const ScenarioConfig cfg = load(o);
    const PipelineReport r = run_pipeline(cfg, stages);
    summarize(r);
    write_report(r, cfg.output_dir);
    if (plots) export_plots(r, cfg.scenario, cfg.output_dir);
    std::printf("wrote %s/report.json\n", cfg.output_dir.c_str());
    return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Morse-Bott cascades and their perturbed gradient lines on surfaces"};
    app.require_subcommand(1);

    struct Single {
        const char* name;
        const char* help;
        unsigned stage;
    };
    const Single singles[] = {
        {"verify", "Check the declared Morse-Bott structure", kStageVerify},
        {"cascades", "Enumerate flow lines with cascades", kStageCascades},
        {"perturb", "Select epsilon and check the perturbation conditions", kStagePerturb},
        {"complex", "Assemble both chain complexes and their homology", kStageComplex},
        {"correspond", "Match moduli spaces and sweep epsilon", kStageCorrespond},
    };
    Overrides o;
    std::string stages = "all";
    unsigned selected = 0;
    bool plots = false;
    for (const Single& s : singles) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        add_common(sub, o);
        sub->callback([&selected, &s] { selected = s.stage; });
    }
    CLI::App* run_cmd = app.add_subcommand("run", "Run the selected stages");
    add_common(run_cmd, o);
    run_cmd->add_option("--stages", stages, "Comma-separated stages or 'all'");
    run_cmd->callback([&] { selected = parse_stages(stages); });

    CLI::App* export_cmd = app.add_subcommand("export", "Run every stage and write CSV plot data");
    add_common(export_cmd, o);
    export_cmd->callback([&] {
        selected = kStageAll;
        plots = true;
    });

    std::string show;
    CLI::App* catalog_cmd = app.add_subcommand("catalog", "List built-in scenarios or print one as a scenario file");
    catalog_cmd->add_option("name", show, "Scenario to print");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        if (catalog_cmd->parsed()) {
            if (show.empty()) {
                for (const auto& n : catalog_names()) std::printf("%s\n", n.c_str());
            } else {
                std::printf("%s\n", scenario_to_json(catalog_scenario(show)).c_str());
            }
            return 0;
        }
        return run(o, selected, plots);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
