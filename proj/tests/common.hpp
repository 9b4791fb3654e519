#pragma once

#include <string>
#include <vector>

#include "infl/infl.hpp"

namespace testing_util {

inline infl::RuleBundle corpus(const std::string& name) { return infl::make_bundle(name, INFL_DATA_DIR); }

inline infl::RuleFile corpus_file(const std::string& name) { return infl::load_rule_file(name, INFL_DATA_DIR); }

/// One-dimensional rule from single-character letters, e.g. word_rule("ab", {"ab", "a"}).
inline infl::SubstitutionRule word_rule(const std::string& letters, const std::vector<std::string>& images, std::string name = "test") {
    infl::SubstitutionRule r;
    r.name = std::move(name);
    for (char c : letters) r.alphabet.push_back(std::string(1, c));
    for (auto& w : images) {
        std::vector<int> im;
        for (char c : w) im.push_back(r.letter(std::string(1, c)));
        r.images.push_back(im);
    }
    r.validate();
    return r;
}

inline infl::RuleBundle bundle_of(const infl::SubstitutionRule& r) {
    infl::RuleFile f;
    f.rule = r;
    return infl::make_bundle(f);
}

/// The GLB transcription has a period-2 substitution matrix, so make_bundle rejects it;
/// its geometry is still built here for the geometric and cocycle checks.
struct PlanarData {
    infl::RuleFile file;
    infl::IMat M;
    infl::FieldPtr field;
    infl::DisplacementMatrix T;
};

inline PlanarData glb() {
    PlanarData g;
    g.file = corpus_file("glb");
    g.M = infl::substitution_matrix(g.file.rule);
    g.field = infl::field_from_charpoly(g.M, g.file.rule.min_poly);
    g.T = infl::displacement_planar(g.file.rule, g.field);
    return g;
}

/// Displacement data of a bundled rule, GLB included.
inline infl::DisplacementMatrix displacement_of(const std::string& name) { return name == "glb" ? glb().T : corpus(name).T; }

inline const std::vector<std::string>& corpus_names() {
    static const std::vector<std::string> names = {"fibonacci",     "thue_morse", "period_doubling", "tm_return_words",
                                                   "pd_return_words", "d4_example", "rho3",            "rho_V",
                                                   "rudin_shapiro", "rs_return_words", "block3_example"};
    return names;
}

} // namespace testing_util
