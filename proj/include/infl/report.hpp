#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "abelian.hpp"
#include "diffraction.hpp"
#include "io.hpp"
#include "paircorr.hpp"

namespace infl {

/// Everything downstream of the rule that does not depend on analysis options.
struct RuleBundle {
    RuleFile file;
    IMat M;
    FieldPtr field;
    PFData pf;
    DisplacementMatrix T;
};

inline RuleBundle make_bundle(const RuleFile& f) {
    RuleBundle b;
    b.file = f;
    const SubstitutionRule& r = f.rule;
    b.M = substitution_matrix(r);
    if (!is_primitive(b.M)) throw error(errc::not_primitive, "rules", "substitution matrix is not primitive");
    switch (r.kind) {
    case RuleKind::one_dim:
        b.field = field_from_charpoly(b.M, r.min_poly);
        b.pf = pf_data(b.M, b.field);
        b.T = displacement_1d(r, b.pf, b.field);
        break;
    case RuleKind::block:
        b.field = rational_field(r.block_volume());
        b.pf = pf_data(b.M, b.field);
        b.T = displacement_block(r);
        break;
    case RuleKind::planar:
        b.field = field_from_charpoly(b.M, r.min_poly);
        b.pf = pf_data(b.M, b.field);
        b.T = displacement_planar(r, b.field);
        break;
    }
    return b;
}

inline RuleBundle make_bundle(const std::string& rule_arg, const std::filesystem::path& data_dir) {
    return make_bundle(load_rule_file(rule_arg, data_dir));
}

struct AnalyzeOptions {
    int mean_bound_N = 0;  // 0: chosen from the flow
    std::size_t samples = 20000;
    std::uint64_t seed = 7;
    int birkhoff_N = 2000;
    int birkhoff_k = 8;
    int oracle_level = 15;
    double epsilon = 0.02;
    int workers = 1;
    std::size_t mahler_samples = std::size_t(1) << 18;
};

/// Largest N keeping the mean-bound flow on 64-bit torus points, capped at 24; 13 for large alphabets.
inline int default_mean_bound_N(const FourierEvaluator& F) {
    if (F.n() >= 10 || F.d() > 1 && F.T().Q.kind == ExpansionMap::Kind::general_linear) return 13;
    const double b = std::log2(std::max(F.flow_radius(), 1.0 + 1e-9));
    return std::max(1, std::min(24, static_cast<int>(std::floor(40.0 / b))));
}

namespace detail {

inline json imat_json(const IMat& M) {
    json a = json::array();
    for (auto& row : M) a.push_back(row);
    return a;
}

inline std::string fmt(double x, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

inline std::string coeff_str(cd c) {
    if (std::abs(c.imag()) < 1e-12) return fmt(c.real());
    if (std::abs(c.real()) < 1e-12) return fmt(c.imag()) + "i";
    return "(" + fmt(c.real()) + (c.imag() < 0 ? "" : "+") + fmt(c.imag()) + "i)";
}

inline std::string poly_str(const EigenPolynomial& p) {
    static const char* names[] = {"x", "y", "z", "w"};
    std::string s;
    for (auto& [e, c] : p.terms) {
        if (!s.empty()) s += " + ";
        s += coeff_str(c);
        for (int a = 0; a < p.vars; ++a) {
            if (e[a] == 0) continue;
            s += "*";
            s += p.vars == 1 ? "u" : (a < 4 ? names[a] : "x" + std::to_string(a + 1));
            if (e[a] != 1) s += "^" + std::to_string(e[a]);
        }
    }
    return s;
}

inline json estimate_json(const ExponentEstimate& e) {
    return {{"method", e.method}, {"N", e.N}, {"chi_B", e.chi_B}, {"stderr", e.stderr_}, {"chi_min", e.chi_min},
            {"raw", e.raw}, {"raw_stderr", e.raw_stderr}, {"samples", e.samples}, {"seed", e.seed}};
}

inline double patch_size(const IMat& M, int seed, int levels) {
    std::vector<double> v(M.size(), 0.0);
    v[seed] = 1;
    for (int l = 0; l < levels; ++l) {
        std::vector<double> w(M.size(), 0.0);
        for (std::size_t i = 0; i < M.size(); ++i)
            for (std::size_t j = 0; j < M.size(); ++j) w[i] += static_cast<double>(M[i][j]) * v[j];
        v = w;
    }
    double s = 0;
    for (double x : v) s += x;
    return s;
}

inline int level_for(const IMat& M, int wanted, double cap) {
    int l = wanted;
    while (l > 1 && patch_size(M, 0, l) > cap) --l;
    return l;
}

} // namespace detail

struct BirkhoffSummary {
    std::vector<ExponentEstimate> runs;
    double mean = 0, sd = 0, truncation = 0, sigma = 0;
};

inline BirkhoffSummary birkhoff_summary(const FourierEvaluator& F, int N, int nk, std::uint64_t seed) {
    BirkhoffSummary s;
    SplitMix64 rng(seed ^ 0x6b69726b686f6666ULL);
    for (int r = 0; r < nk; ++r) {
        std::vector<double> k(F.d());
        for (auto& x : k) x = rng.uniform();
        s.runs.push_back(birkhoff_exponent(F, k, N, seed + static_cast<std::uint64_t>(r)));
    }
    for (auto& e : s.runs) {
        s.mean += e.chi_B;
        s.truncation += e.stderr_;
    }
    s.mean /= nk;
    s.truncation /= nk;
    for (auto& e : s.runs) s.sd += (e.chi_B - s.mean) * (e.chi_B - s.mean);
    s.sd = nk > 1 ? std::sqrt(s.sd / (nk - 1)) : 0;
    s.sigma = std::sqrt(s.sd * s.sd / nk + s.truncation * s.truncation);
    return s;
}

/// Full pipeline; the returned document has sorted keys and no timing data.
inline json analyze(const RuleBundle& b, const AnalyzeOptions& opt) {
    const SubstitutionRule& r = b.file.rule;
    const DisplacementMatrix& T = b.T;
    json rep;
    auto L = constant_length(r);

    rep["rule"] = {{"name", r.name},
                   {"kind", kind_name(r.kind)},
                   {"alphabet", r.alphabet},
                   {"substitution_matrix", detail::imat_json(b.M)},
                   {"primitive", true},
                   {"constant_length", L ? json(*L) : json(nullptr)},
                   {"control_points", b.file.control_points}};
    rep["perron_frobenius"] = {{"lambda", b.pf.lambda},
                               {"left", b.pf.left},
                               {"right", b.pf.right},
                               {"left_normalisation", r.kind == RuleKind::one_dim ? "shortest length 1" : "minimum 1"}};
    rep["field"] = {{"min_poly", poly::to_string(b.field->min_poly)}, {"degree", b.field->degree()}, {"generator", b.field->lambda}};

    auto stone = verify_stone_inflation(T, T.volumes);
    FourierEvaluator F(T);
    json lift = {{"D", F.D()}, {"C", detail::imat_json(F.lift().C)}};
    rep["geometry"] = {{"dim", T.lat.d},
                       {"det_Q", T.Q.det},
                       {"expansive", T.Q.expansive()},
                       {"volumes", T.volumes},
                       {"stone_inflation", stone.ok},
                       {"violations", stone.violations},
                       {"torus_lift", lift}};

    auto dd = digit_matrices(T);
    auto alg = ida_dimension(dd);
    json ida = {{"positions", dd.positions.size()}, {"dimension", alg.dim}, {"irreducible", is_irreducible(alg, T.n)}};
    if (L) {
        auto g = column_group(r);
        std::vector<std::string> kinds;
        for (auto k : g.columns) kinds.push_back(column_kind_name(k));
        ida["column_group"] = {{"columns", kinds},     {"order", g.order},           {"abelian", g.abelian},
                               {"transitive", g.transitive}, {"orbits", g.orbits}, {"bijective", g.bijective}};
    }
    rep["ida"] = ida;

    auto sq = sqrt_lambda_criterion(b.M, b.pf.lambda, L.has_value());
    rep["sqrt_lambda_criterion"] = {{"applicable", sq.applicable}, {"satisfied", sq.satisfied}, {"moduli", sq.moduli}};

    // exponents
    json ex;
    const double thr = F.threshold();
    ex["threshold"] = thr;
    auto wit = det_nonvanishing(F, 10000, opt.seed);
    ex["det_witness"] = wit.found ? json{{"k", wit.k}, {"abs_det", wit.abs_det}} : json(nullptr);

    VerdictInputs vin;
    vin.threshold = thr;
    vin.epsilon_floor = opt.epsilon;
    vin.det_witness = wit.found;
    bool have_upper = false;
    try {
        auto ab = abelian_exponents(r, T, opt.mahler_samples, opt.seed, opt.workers);
        json list = json::array();
        SplitMix64 krng(opt.seed ^ 0x656967656eULL);
        std::vector<std::vector<double>> ks(opt.birkhoff_k, std::vector<double>(F.d()));
        for (auto& k : ks)
            for (auto& x : k) x = krng.uniform();
        for (auto& e : ab.exponents) {
            double eb = 0;
            for (int r = 0; r < opt.birkhoff_k; ++r) eb += eigen_birkhoff(F, e.poly, ks[r], opt.birkhoff_N, opt.seed + r);
            list.push_back({{"label", e.poly.label},
                            {"birkhoff_mean", opt.birkhoff_k > 0 ? eb / opt.birkhoff_k : 0.0},
                            {"polynomial", detail::poly_str(e.poly)},
                            {"mahler", e.mahler.value},
                            {"mahler_stderr", e.mahler.stderr_},
                            {"mahler_method", e.mahler.method},
                            {"chi_centered", e.chi_centered},
                            {"chi_min", e.chi}});
        }
        ex["abelian"] = {{"exponents", list}, {"all_positive", ab.all_positive}, {"max_mahler", ab.max_mahler}};
        vin.upper = ab.max_mahler;
        vin.upper_stderr = ab.max_mahler_stderr;
        vin.upper_route = "mahler";
        have_upper = true;
    } catch (const error& e) {
        ex["abelian"] = {{"not_applicable", e.what()}};
    }
    const int Nmb = opt.mean_bound_N > 0 ? opt.mean_bound_N : default_mean_bound_N(F);
    auto mb = mean_bound(F, Nmb, opt.samples, opt.seed, opt.workers);
    ex["mean_bound"] = detail::estimate_json(mb);
    if (!have_upper) {
        vin.upper = mb.chi_B;
        vin.upper_stderr = mb.stderr_;
        vin.upper_route = "mean_bound(" + std::to_string(Nmb) + ")";
    }
    auto bs = birkhoff_summary(F, opt.birkhoff_N, opt.birkhoff_k, opt.seed);
    json runs = json::array();
    for (auto& e : bs.runs) runs.push_back(e.chi_B);
    ex["birkhoff"] = {{"N", opt.birkhoff_N}, {"values", runs}, {"mean", bs.mean}, {"sd", bs.sd}, {"truncation", bs.truncation},
                      {"sigma", bs.sigma}};
    vin.estimate = bs.mean;
    vin.estimate_stderr = bs.sigma;
    rep["exponents"] = ex;

    // pair correlations
    json pc;
    if (support_supported(T)) {
        try {
            auto S = support_within_cutoff(T);
            auto sol = solve_renormalisation(T, S);
            pc = {{"cutoff", S.cutoff},
                  {"levels", S.levels},
                  {"support_size", S.size()},
                  {"residual", sol.residual},
                  {"normalisation", sol.normalisation},
                  {"symmetry_error", sol.symmetry_error},
                  {"min_value", sol.min_value},
                  {"rayleigh", sol.rayleigh},
                  {"trivial", sol.trivial}};
            const int lvl = detail::level_for(b.M, opt.oracle_level, 2'000'000);
            auto orc = frequency_oracle(T, sol.keys, lvl);
            double dev = 0;
            for (std::size_t u = 0; u < orc.size(); ++u) dev = std::max(dev, std::abs(orc[u] - sol.nu[u]));
            pc["oracle_level"] = lvl;
            pc["oracle_max_deviation"] = dev;
        } catch (const error& e) {
            pc = {{"error", e.what()}};
        }
    } else {
        pc = {{"not_applicable", "supports are harvested for 1D and block rules only"}};
    }
    rep["pair_correlation"] = pc;

    // pure point part at k = 0
    if (T.lat.d == 1) {
        const int lvl = detail::level_for(b.M, 40, 20'000);
        auto pp = point_pattern(T, b.pf, 0, lvl);
        auto pq = point_pattern(T, b.pf, 0, lvl - 1);
        auto I0 = intensity_from_amplitudes(amplitudes(pp, 0.0));
        auto Iq = intensity_from_amplitudes(amplitudes(pq, 0.0));
        auto Ipf = intensity_at_zero(b.pf);
        rep["pure_point"] = {{"tiles", pp.size()},
                             {"I0_vs_frequencies", (I0.I - Ipf.I).norm()},
                             {"recursion_residual_k0", pp_recursion_check(F, {0.0}, I0, Iq)}};
    }

    auto v = classify(vin);
    rep["verdict"] = {{"kind", verdict_name(v.kind)},
                      {"upper", v.in.upper},
                      {"upper_stderr", v.in.upper_stderr},
                      {"upper_route", v.in.upper_route},
                      {"estimate", v.in.estimate},
                      {"estimate_stderr", v.in.estimate_stderr},
                      {"threshold", v.in.threshold},
                      {"epsilon", v.epsilon},
                      {"margin", v.margin}};
    rep["options"] = {{"mean_bound_N", Nmb},        {"samples", opt.samples},           {"seed", opt.seed},
                      {"birkhoff_N", opt.birkhoff_N}, {"birkhoff_k", opt.birkhoff_k},     {"oracle_level", opt.oracle_level},
                      {"epsilon", opt.epsilon},      {"mahler_samples", opt.mahler_samples}};
    return rep;
}

inline std::string report_text(const json& rep) {
    std::ostringstream os;
    auto& ru = rep["rule"];
    os << "rule            " << ru["name"].get<std::string>() << " (" << ru["kind"].get<std::string>() << ", "
       << ru["alphabet"].size() << " letters)\n";
    os << "lambda          " << detail::fmt(rep["perron_frobenius"]["lambda"].get<double>(), 12) << "\n";
    os << "field           " << rep["field"]["min_poly"].get<std::string>() << " (D = " << rep["field"]["degree"] << ")\n";
    os << "stone inflation " << (rep["geometry"]["stone_inflation"].get<bool>() ? "ok" : "VIOLATED") << "\n";
    os << "IDA dimension   " << rep["ida"]["dimension"] << (rep["ida"]["irreducible"].get<bool>() ? " (irreducible)" : "") << "\n";
    auto& ex = rep["exponents"];
    os << "threshold       " << detail::fmt(ex["threshold"].get<double>()) << "  (log sqrt|det Q|)\n";
    if (ex["abelian"].contains("exponents")) {
        for (auto& e : ex["abelian"]["exponents"])
            os << "  " << std::left << std::setw(8) << e["label"].get<std::string>() << " m = " << std::setw(12)
               << detail::fmt(e["mahler"].get<double>()) << " chi_min = " << detail::fmt(e["chi_min"].get<double>()) << "   "
               << e["polynomial"].get<std::string>() << "\n";
    }
    auto& mb = ex["mean_bound"];
    os << "mean bound      N = " << mb["N"] << ": raw " << detail::fmt(mb["raw"].get<double>()) << " +- "
       << detail::fmt(mb["raw_stderr"].get<double>(), 2) << ", halved " << detail::fmt(mb["chi_B"].get<double>()) << "\n";
    os << "birkhoff        N = " << ex["birkhoff"]["N"] << ": " << detail::fmt(ex["birkhoff"]["mean"].get<double>()) << " +- "
       << detail::fmt(ex["birkhoff"]["sigma"].get<double>(), 2) << "\n";
    auto& pc = rep["pair_correlation"];
    if (pc.contains("residual"))
        os << "pair corr.      support " << pc["support_size"] << ", residual " << detail::fmt(pc["residual"].get<double>(), 2)
           << ", oracle deviation " << detail::fmt(pc["oracle_max_deviation"].get<double>(), 2) << "\n";
    auto& v = rep["verdict"];
    os << "verdict         " << v["kind"].get<std::string>() << "  (upper " << detail::fmt(v["upper"].get<double>()) << " via "
       << v["upper_route"].get<std::string>() << ", margin " << detail::fmt(v["margin"].get<double>()) << ", eps "
       << detail::fmt(v["epsilon"].get<double>()) << ")\n";
    return os.str();
}

/// CSV rows N, mean_bound_raw, stderr, halved_bound, threshold, margin for N in [lo, hi].
inline std::string table_csv(const FourierEvaluator& F, int lo, int hi, std::size_t samples, std::uint64_t seed, int workers = 1) {
    std::ostringstream os;
    os << "N,mean_bound_raw,stderr,halved_bound,threshold,margin\n";
    if (hi < lo || hi < 1) return os.str();
    auto est = mean_bound_range(F, hi, samples, seed, workers);
    os << std::setprecision(10);
    for (int N = std::max(1, lo); N <= hi; ++N) {
        auto& e = est[N - 1];
        os << N << ',' << e.raw << ',' << e.raw_stderr << ',' << e.chi_B << ',' << F.threshold() << ',' << F.threshold() - e.chi_B << '\n';
    }
    return os.str();
}

} // namespace infl
