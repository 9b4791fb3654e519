#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rules.hpp"

namespace infl {

using json = nlohmann::json;

/// Parsed rule document: the rule plus the free-text fields echoed in reports.
struct RuleFile {
    SubstitutionRule rule;
    std::string description;
    std::string control_points;
    std::string source_path;
};

namespace detail {

[[noreturn]] inline void bad(const std::string& what) { throw error(errc::parse_error, "cli", what); }

inline const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing key '") + key + "'");
    return j.at(key);
}

inline Rat rat_of(const json& v) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rat(v.get<long long>());
    } catch (const std::exception&) {
    }
    bad("field literal must be a \"p/q\" string or an integer");
}

inline FieldCoords coords_of(const json& v) {
    if (!v.is_array()) bad("field element must be an array of rationals");
    FieldCoords c;
    for (auto& x : v) c.push_back(rat_of(x));
    return c;
}

inline FieldVec vec_of(const json& v) {
    if (!v.is_array()) bad("vector must be an array of field elements");
    FieldVec out;
    for (auto& x : v) out.push_back(coords_of(x));
    return out;
}

inline json emit_coords(const FieldCoords& c) {
    json a = json::array();
    for (auto& x : c) a.push_back(to_string(x));
    return a;
}

inline json emit_vec(const FieldVec& v) {
    json a = json::array();
    for (auto& c : v) a.push_back(emit_coords(c));
    return a;
}

inline std::vector<int> word_of(const SubstitutionRule& r, const json& w) {
    if (!w.is_array()) bad("image must be an array of letters");
    std::vector<int> out;
    for (auto& x : w) {
        if (!x.is_string()) bad("letters must be strings");
        out.push_back(r.letter(x.get<std::string>()));
    }
    return out;
}

inline int unflatten_index_guard(int i, int n) {
    if (i < 0 || i >= n) bad("block index out of range");
    return i;
}

// nested arrays, outermost index = last axis
inline void block_of(const SubstitutionRule& r, const json& w, int axis, std::vector<int>& x, std::vector<int>& out) {
    if (!w.is_array() || static_cast<int>(w.size()) != r.shape[axis]) bad("block image does not match the declared shape");
    for (int v = 0; v < r.shape[axis]; ++v) {
        x[axis] = v;
        if (axis == 0) {
            if (!w[v].is_string()) bad("letters must be strings");
            out[unflatten_index_guard(flatten(x, r.shape), static_cast<int>(out.size()))] = r.letter(w[v].get<std::string>());
        } else {
            block_of(r, w[v], axis - 1, x, out);
        }
    }
}

inline json emit_block(const SubstitutionRule& r, const std::vector<int>& im, int axis, std::vector<int>& x) {
    json a = json::array();
    for (int v = 0; v < r.shape[axis]; ++v) {
        x[axis] = v;
        if (axis == 0) a.push_back(r.alphabet[im[flatten(x, r.shape)]]);
        else a.push_back(emit_block(r, im, axis - 1, x));
    }
    return a;
}

} // namespace detail

inline RuleFile parse_rule(const json& j) {
    using namespace detail;
    RuleFile f;
    SubstitutionRule& r = f.rule;
    r.name = j.value("name", std::string("unnamed"));
    f.description = j.value("description", std::string());
    const std::string kind = need(j, "kind").get<std::string>();
    if (kind == "one_dim") r.kind = RuleKind::one_dim;
    else if (kind == "block") r.kind = RuleKind::block;
    else if (kind == "planar") r.kind = RuleKind::planar;
    else bad("unknown kind '" + kind + "'");
    for (auto& a : need(j, "alphabet")) {
        if (!a.is_string()) bad("alphabet entries must be strings");
        r.alphabet.push_back(a.get<std::string>());
    }
    if (j.contains("min_poly")) {
        IPoly p;
        for (auto& c : j.at("min_poly")) {
            Rat q = rat_of(c);
            if (mp::denominator(q) != 1) bad("min_poly coefficients must be integers");
            p.push_back(mp::numerator(q));
        }
        r.min_poly = p;
    }
    if (r.kind == RuleKind::block) {
        for (auto& q : need(j, "shape")) {
            if (!q.is_number_integer() || q.get<int>() < 1) bad("shape entries must be positive integers");
            r.shape.push_back(q.get<int>());
        }
        if (r.shape.empty()) bad("empty shape");
    }
    if (r.kind == RuleKind::planar) {
        const json& g = need(j, "geometry");
        auto pg = std::make_shared<PlanarGeometry>();
        pg->dim = need(g, "dim").get<int>();
        for (auto& v : need(g, "volumes")) pg->volumes.push_back(coords_of(v));
        for (auto& row : need(g, "Q")) pg->Q.push_back(vec_of(row));
        for (auto& b : need(g, "module_basis")) pg->basis.push_back(vec_of(b));
        for (auto& e : need(g, "T")) {
            PlanarGeometry::Entry en;
            en.i = need(e, "i").get<int>();
            en.j = need(e, "j").get<int>();
            en.t = vec_of(need(e, "t"));
            pg->T.push_back(std::move(en));
        }
        pg->control_points = g.value("control_points", std::string());
        if (static_cast<int>(pg->Q.size()) != pg->dim) bad("Q must be dim x dim");
        f.control_points = pg->control_points;
        r.planar = pg;
    } else {
        const json& im = need(j, "images");
        if (!im.is_object()) bad("images must map letters to images");
        for (auto& a : r.alphabet) {
            if (!im.contains(a)) bad("no image for letter '" + a + "'");
            if (r.kind == RuleKind::one_dim) {
                r.images.push_back(word_of(r, im.at(a)));
            } else {
                std::vector<int> out(r.block_volume(), -1), x(r.shape.size(), 0);
                block_of(r, im.at(a), static_cast<int>(r.shape.size()) - 1, x, out);
                r.images.push_back(out);
            }
        }
        for (auto it = im.begin(); it != im.end(); ++it) r.letter(it.key());
        f.control_points = j.value("control_points", std::string(r.kind == RuleKind::one_dim ? "left endpoints" : "lower-left cube corners"));
    }
    r.validate();
    return f;
}

inline json emit_rule(const RuleFile& f) {
    using namespace detail;
    const SubstitutionRule& r = f.rule;
    json j;
    j["name"] = r.name;
    if (!f.description.empty()) j["description"] = f.description;
    j["kind"] = kind_name(r.kind);
    j["alphabet"] = r.alphabet;
    if (r.min_poly) {
        json p = json::array();
        for (auto& c : *r.min_poly) p.push_back(c.str());
        j["min_poly"] = p;
    }
    if (r.kind == RuleKind::planar) {
        const PlanarGeometry& pg = *r.planar;
        json g;
        g["dim"] = pg.dim;
        g["volumes"] = json::array();
        for (auto& v : pg.volumes) g["volumes"].push_back(emit_coords(v));
        g["Q"] = json::array();
        for (auto& row : pg.Q) g["Q"].push_back(emit_vec(row));
        g["module_basis"] = json::array();
        for (auto& b : pg.basis) g["module_basis"].push_back(emit_vec(b));
        g["T"] = json::array();
        for (auto& e : pg.T) g["T"].push_back({{"i", e.i}, {"j", e.j}, {"t", emit_vec(e.t)}});
        g["control_points"] = pg.control_points;
        j["geometry"] = g;
        return j;
    }
    if (r.kind == RuleKind::block) j["shape"] = r.shape;
    json im = json::object();
    for (int a = 0; a < r.size(); ++a) {
        if (r.kind == RuleKind::one_dim) {
            json w = json::array();
            for (int x : r.images[a]) w.push_back(r.alphabet[x]);
            im[r.alphabet[a]] = w;
        } else {
            std::vector<int> x(r.shape.size(), 0);
            im[r.alphabet[a]] = emit_block(r, r.images[a], static_cast<int>(r.shape.size()) - 1, x);
        }
    }
    j["images"] = im;
    j["control_points"] = f.control_points;
    return j;
}

inline RuleFile parse_rule_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        detail::bad(std::string("malformed JSON: ") + e.what());
    }
    try {
        return parse_rule(j);
    } catch (const json::exception& e) {
        detail::bad(std::string("schema: ") + e.what());
    }
}

/// Resolves a path, or a bare corpus name looked up in `data_dir`.
inline std::filesystem::path resolve_rule_path(const std::string& arg, const std::filesystem::path& data_dir) {
    namespace fs = std::filesystem;
    fs::path p(arg);
    if (fs::is_regular_file(p)) return p;
    if (fs::is_regular_file(fs::path(arg + ".json"))) return fs::path(arg + ".json");
    fs::path name = p.filename();
    if (!data_dir.empty()) {
        if (fs::is_regular_file(data_dir / name)) return data_dir / name;
        fs::path withext = data_dir / name;
        withext += ".json";
        if (fs::is_regular_file(withext)) return withext;
    }
    throw error(errc::parse_error, "cli", "rule file '" + arg + "' not found");
}

inline RuleFile load_rule_file(const std::string& arg, const std::filesystem::path& data_dir = {}) {
    auto path = resolve_rule_path(arg, data_dir);
    std::ifstream in(path);
    if (!in) throw error(errc::parse_error, "cli", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RuleFile f = parse_rule_text(ss.str());
    f.source_path = path.string();
    return f;
}

} // namespace infl
