// infl: analyse inflation rules from the command line.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "infl/infl.hpp"

#ifndef INFL_DATA_DIR
#define INFL_DATA_DIR ""
#endif

namespace {

enum Exit { ok = 0, validation = 2, computation = 3 };

int exit_for(const infl::error& e) {
    using infl::errc;
    switch (e.code()) {
    case errc::parse_error:
    case errc::unknown_letter:
    case errc::shape_mismatch:
    case errc::not_primitive:
    case errc::min_poly_not_found:
    case errc::field_mismatch:
    case errc::overlap_detected:
    case errc::lift_failed: return validation;
    default: return computation;
    }
}

template <class F>
int guarded(F&& f) {
    try {
        f();
        return ok;
    } catch (const infl::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return computation;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier matrix cocycles, pair correlations and spectral verdicts for inflation rules"};
    app.require_subcommand(1);
    std::string data_dir = INFL_DATA_DIR;
    app.add_option("--data-dir", data_dir, "directory searched for bare rule names")->capture_default_str();

    infl::AnalyzeOptions opt;
    std::string rule;
    bool as_json = false, as_text = false;
    auto* an = app.add_subcommand("analyze", "run the full pipeline on a rule file");
    an->add_option("rule", rule, "rule file or corpus name")->required();
    an->add_option("--mean-bound-N", opt.mean_bound_N, "cocycle length for the mean bound (0: automatic)");
    an->add_option("--samples", opt.samples, "torus samples for the mean bound")->capture_default_str();
    an->add_option("--seed", opt.seed, "base seed")->capture_default_str();
    an->add_option("--birkhoff-N", opt.birkhoff_N, "orbit length of Birkhoff estimates")->capture_default_str();
    an->add_option("--birkhoff-k", opt.birkhoff_k, "number of random starting points")->capture_default_str();
    an->add_option("--oracle-level", opt.oracle_level, "supertile level of the frequency oracle")->capture_default_str();
    an->add_option("--epsilon", opt.epsilon, "verdict margin floor")->capture_default_str();
    an->add_option("--mahler-samples", opt.mahler_samples, "Monte Carlo samples for multivariate Mahler measures")->capture_default_str();
    an->add_option("--workers", opt.workers, "worker threads (results do not depend on it)")->capture_default_str();
    auto* fj = an->add_flag("--json", as_json, "JSON report");
    auto* ft = an->add_flag("--text", as_text, "plain-text report (default)");
    fj->excludes(ft);

    std::string trule;
    int lo = 1, hi = 8, tworkers = 1;
    std::size_t tsamples = 20000;
    std::uint64_t tseed = 7;
    auto* tb = app.add_subcommand("table", "CSV of mean bounds over a range of N");
    tb->add_option("rule", trule, "rule file or corpus name")->required();
    tb->add_option("--from", lo, "first N")->capture_default_str();
    tb->add_option("--to", hi, "last N")->capture_default_str();
    tb->add_option("--samples", tsamples, "torus samples")->capture_default_str();
    tb->add_option("--seed", tseed, "seed")->capture_default_str();
    tb->add_option("--workers", tworkers, "worker threads")->capture_default_str();

    std::string crule;
    auto* co = app.add_subcommand("correlations", "CSV of pair correlation coefficients on the cutoff support");
    co->add_option("rule", crule, "rule file or corpus name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : validation;
    }

    if (*an) {
        return guarded([&] {
            auto b = infl::make_bundle(rule, data_dir);
            auto rep = infl::analyze(b, opt);
            if (as_json) std::cout << rep.dump(2) << "\n";
            else std::cout << infl::report_text(rep);
        });
    }
    if (*tb) {
        return guarded([&] {
            auto b = infl::make_bundle(trule, data_dir);
            infl::FourierEvaluator F(b.T);
            std::cout << infl::table_csv(F, lo, hi, tsamples, tseed, tworkers);
        });
    }
    return guarded([&] {
        auto b = infl::make_bundle(crule, data_dir);
        auto S = infl::support_within_cutoff(b.T);
        auto sol = infl::solve_renormalisation(b.T, S);
        std::cout << infl::correlation_csv(sol, b.T, b.file.rule.alphabet);
    });
}
