#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "numberfield.hpp"

namespace infl {

enum class RuleKind { one_dim, block, planar };

inline const char* kind_name(RuleKind k) {
    switch (k) {
    case RuleKind::one_dim: return "one_dim";
    case RuleKind::block: return "block";
    case RuleKind::planar: return "planar";
    }
    return "?";
}

using FieldCoords = std::vector<Rat>;  // element of Q(lambda) in the power basis
using FieldVec = std::vector<FieldCoords>;

/// Planar inflation given by explicit geometry; verified downstream, never derived.
struct PlanarGeometry {
    struct Entry {
        int i = 0, j = 0;
        FieldVec t;
    };
    int dim = 2;
    std::vector<FieldCoords> volumes;
    std::vector<FieldVec> Q;      // Q[row][col]
    std::vector<FieldVec> basis;  // torus module generators
    std::vector<Entry> T;
    std::string control_points;
};

struct SubstitutionRule {
    std::string name;
    std::vector<std::string> alphabet;
    RuleKind kind = RuleKind::one_dim;
    std::vector<std::vector<int>> images;  // block images flattened with axis 0 fastest
    std::vector<int> shape;                // block only
    std::optional<IPoly> min_poly;
    std::shared_ptr<const PlanarGeometry> planar;

    int size() const { return static_cast<int>(alphabet.size()); }

    int letter(const std::string& s) const {
        auto it = std::find(alphabet.begin(), alphabet.end(), s);
        if (it == alphabet.end()) throw error(errc::unknown_letter, "rules", "letter '" + s + "' not in alphabet");
        return static_cast<int>(it - alphabet.begin());
    }

    int block_volume() const {
        return std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<int>());
    }

    void validate() const {
        const int n = size();
        if (n < 1) throw error(errc::parse_error, "rules", "empty alphabet");
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (alphabet[i] == alphabet[j]) throw error(errc::parse_error, "rules", "duplicate letter " + alphabet[i]);
        if (kind == RuleKind::planar) {
            if (!planar) throw error(errc::parse_error, "rules", "planar rule without geometry");
            for (auto& e : planar->T)
                if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
                    throw error(errc::unknown_letter, "rules", "T entry refers to an undeclared tile");
            if (static_cast<int>(planar->volumes.size()) != n)
                throw error(errc::shape_mismatch, "rules", "one volume per prototile required");
            return;
        }
        if (static_cast<int>(images.size()) != n) throw error(errc::shape_mismatch, "rules", "one image per letter required");
        for (auto& im : images) {
            if (im.empty()) throw error(errc::shape_mismatch, "rules", "empty image");
            for (int x : im)
                if (x < 0 || x >= n) throw error(errc::unknown_letter, "rules", "image letter out of range");
            if (kind == RuleKind::block && static_cast<int>(im.size()) != block_volume())
                throw error(errc::shape_mismatch, "rules", "block image does not match declared shape");
        }
        if (kind == RuleKind::block && shape.empty()) throw error(errc::shape_mismatch, "rules", "block rule without shape");
    }
};

/// Constant image length L, if any (block rules report q1*...*qd).
inline std::optional<int> constant_length(const SubstitutionRule& r) {
    if (r.kind == RuleKind::block) return r.block_volume();
    if (r.kind != RuleKind::one_dim) return std::nullopt;
    std::size_t L = r.images[0].size();
    for (auto& im : r.images)
        if (im.size() != L) return std::nullopt;
    return static_cast<int>(L);
}

inline IMat substitution_matrix(const SubstitutionRule& r) {
    const int n = r.size();
    IMat M(n, std::vector<long long>(n, 0));
    if (r.kind == RuleKind::planar) {
        for (auto& e : r.planar->T) ++M[e.i][e.j];
        return M;
    }
    for (int j = 0; j < n; ++j)
        for (int x : r.images[j]) ++M[x][j];
    return M;
}

inline IMat mat_mul(const IMat& A, const IMat& B) {
    const std::size_t n = A.size(), m = B[0].size(), k = B.size();
    IMat C(n, std::vector<long long>(m, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (!A[i][l]) continue;
            for (std::size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
        }
    return C;
}

inline IMat mat_pow(const IMat& A, int e) {
    IMat R(A.size(), std::vector<long long>(A.size(), 0));
    for (std::size_t i = 0; i < A.size(); ++i) R[i][i] = 1;
    for (int k = 0; k < e; ++k) R = mat_mul(R, A);
    return R;
}

inline bool is_primitive(const IMat& M) {
    const std::size_t n = M.size();
    if (n == 0) return false;
    std::vector<std::vector<char>> A(n, std::vector<char>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A[i][j] = M[i][j] > 0;
    const std::size_t bound = (n - 1) * (n - 1) + 1;
    for (std::size_t e = 1; e < bound; e *= 2) {
        std::vector<std::vector<char>> S(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                if (A[i][l])
                    for (std::size_t j = 0; j < n; ++j) S[i][j] |= A[l][j];
        A.swap(S);
    }
    for (auto& row : A)
        for (char c : row)
            if (!c) return false;
    return true;
}

struct PFData {
    double lambda = 0;
    std::vector<double> left;   // natural lengths / volumes, shortest = 1
    std::vector<double> right;  // letter frequencies, sum 1
    std::vector<FieldElement> exact_left;
};

namespace detail {

inline std::vector<double> power_vector(const IMat& M, bool transpose, double& lambda) {
    const int n = static_cast<int>(M.size());
    std::vector<double> v(n, 1.0 / n), w(n);
    lambda = 0;
    for (int it = 0; it < 100000; ++it) {
        // (M + I) keeps the iteration aperiodic
        for (int i = 0; i < n; ++i) {
            double s = v[i];
            for (int j = 0; j < n; ++j) s += (transpose ? M[j][i] : M[i][j]) * v[j];
            w[i] = s;
        }
        double sum = std::accumulate(w.begin(), w.end(), 0.0);
        double diff = 0;
        for (int i = 0; i < n; ++i) {
            w[i] /= sum;
            diff = std::max(diff, std::abs(w[i] - v[i]));
        }
        v.swap(w);
        if (diff < 1e-15 && it > 2) break;
    }
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += (transpose ? M[j][i] : M[i][j]) * v[j];
        num += s;
        den += v[i];
    }
    lambda = num / den;
    return v;
}

// kernel vector of (M^T - lambda) over Q(lambda)
inline std::vector<FieldElement> exact_left_vector(const IMat& M, const FieldPtr& f) {
    const int n = static_cast<int>(M.size());
    FieldElement lam = FieldElement::gen(f);
    std::vector<std::vector<FieldElement>> A(n, std::vector<FieldElement>(n, FieldElement(f)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            A[i][j] = FieldElement::rational(f, Rat(M[j][i]));
            if (i == j) A[i][j] = A[i][j] - lam;
        }
    std::vector<int> pivcol;
    int r = 0;
    for (int c = 0; c < n && r < n; ++c) {
        int p = -1;
        for (int i = r; i < n; ++i)
            if (!A[i][c].is_zero()) { p = i; break; }
        if (p < 0) continue;
        std::swap(A[p], A[r]);
        FieldElement inv = A[r][c].inverse();
        for (int j = c; j < n; ++j) A[r][j] = A[r][j] * inv;
        for (int i = 0; i < n; ++i) {
            if (i == r || A[i][c].is_zero()) continue;
            FieldElement fct = A[i][c];
            for (int j = c; j < n; ++j) A[i][j] = A[i][j] - fct * A[r][j];
        }
        pivcol.push_back(c);
        ++r;
    }
    if (r != n - 1) throw error(errc::field_mismatch, "rules", "PF eigenspace over the field is not one-dimensional");
    int freec = 0;
    while (std::find(pivcol.begin(), pivcol.end(), freec) != pivcol.end()) ++freec;
    std::vector<FieldElement> v(n, FieldElement(f));
    v[freec] = FieldElement::rational(f, Rat(1));
    for (int i = 0; i < r; ++i) v[pivcol[i]] = -A[i][freec];
    return v;
}

} // namespace detail

/// PF eigen-data; exact_left is filled when `field` is generated by lambda itself.
inline PFData pf_data(const IMat& M, const FieldPtr& field = nullptr) {
    if (!is_primitive(M)) throw error(errc::not_primitive, "rules", "substitution matrix is not primitive");
    PFData pf;
    double lr = 0, ll = 0;
    pf.right = detail::power_vector(M, false, lr);
    pf.left = detail::power_vector(M, true, ll);
    pf.lambda = 0.5 * (lr + ll);
    double s = std::accumulate(pf.right.begin(), pf.right.end(), 0.0);
    for (auto& x : pf.right) x /= s;
    double mn = *std::min_element(pf.left.begin(), pf.left.end());
    for (auto& x : pf.left) x /= mn;
    if (field && std::abs(FieldElement::gen(field).to_double() - pf.lambda) < 1e-8 * pf.lambda) {
        auto v = detail::exact_left_vector(M, field);
        std::size_t imin = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] < v[imin]) imin = i;
        if (v[imin].sign() < 0) throw error(errc::negative_component, "rules", "exact PF vector not positive");
        FieldElement inv = v[imin].inverse();
        for (auto& x : v) x = x * inv;
        pf.exact_left = v;
        for (std::size_t i = 0; i < v.size(); ++i) pf.left[i] = v[i].to_double();
    }
    for (double x : pf.left)
        if (!(x > 0)) throw error(errc::negative_component, "rules", "PF left vector not positive");
    return pf;
}

inline constexpr std::size_t kImageCap = 10'000'000;

inline std::vector<int> expand_word(const SubstitutionRule& r, int seed, int levels) {
    std::vector<int> w{seed};
    for (int l = 0; l < levels; ++l) {
        std::vector<int> nw;
        for (int x : w) {
            nw.insert(nw.end(), r.images[x].begin(), r.images[x].end());
            if (nw.size() > kImageCap) throw error(errc::size_guard, "rules", "expansion exceeds length cap");
        }
        w.swap(nw);
    }
    return w;
}

namespace detail {

inline std::vector<int> unflatten(int idx, const std::vector<int>& shape) {
    std::vector<int> x(shape.size());
    for (std::size_t a = 0; a < shape.size(); ++a) {
        x[a] = idx % shape[a];
        idx /= shape[a];
    }
    return x;
}

inline int flatten(const std::vector<int>& x, const std::vector<int>& shape) {
    int idx = 0;
    for (int a = static_cast<int>(shape.size()) - 1; a >= 0; --a) idx = idx * shape[a] + x[a];
    return idx;
}

} // namespace detail

inline SubstitutionRule rule_power(const SubstitutionRule& r, int n) {
    if (n < 1) throw error(errc::size_guard, "rules", "power must be positive");
    if (r.kind == RuleKind::planar) throw error(errc::not_applicable, "rules", "planar rules compose through displacement_compose");
    SubstitutionRule out = r;
    out.name = r.name + "^" + std::to_string(n);
    if (r.kind == RuleKind::one_dim) {
        for (int j = 0; j < r.size(); ++j) out.images[j] = expand_word(r, j, n);
        return out;
    }
    SubstitutionRule cur = r;
    for (int k = 1; k < n; ++k) {
        std::vector<int> shp(r.shape.size());
        for (std::size_t a = 0; a < shp.size(); ++a) shp[a] = cur.shape[a] * r.shape[a];
        std::size_t vol = 1;
        for (int q : shp) vol *= q;
        if (vol > kImageCap) throw error(errc::size_guard, "rules", "block power exceeds size cap");
        SubstitutionRule nx = r;
        nx.shape = shp;
        for (int j = 0; j < r.size(); ++j) {
            std::vector<int> img(vol);
            // cur^1 first, then cur inside each cell: image = cur(r(j))
            for (int c = 0; c < r.block_volume(); ++c) {
                auto xc = detail::unflatten(c, r.shape);
                int letter = r.images[j][c];
                for (int s = 0; s < cur.block_volume(); ++s) {
                    auto xs = detail::unflatten(s, cur.shape);
                    std::vector<int> pos(shp.size());
                    for (std::size_t a = 0; a < shp.size(); ++a) pos[a] = xc[a] * cur.shape[a] + xs[a];
                    img[detail::flatten(pos, shp)] = cur.images[letter][s];
                }
            }
            nx.images[j] = img;
        }
        cur = nx;
    }
    out.images = cur.images;
    out.shape = cur.shape;
    return out;
}

} // namespace infl
