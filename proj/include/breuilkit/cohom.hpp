#pragma once

// Galois cohomology of k[u]/u^n under the tame action.  The additive H^1
// vanishes for every twist, the multiplicative H^1 has exactly e classes
// represented by g -> (g pi/pi)^i; both facts are used constructively and
// double-checked by brute force at small sizes.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "breuilkit/errors.hpp"
#include "breuilkit/exactlin.hpp"
#include "breuilkit/upoly.hpp"

namespace breuilkit {

// g . f = (g pi/pi)^w * (g f), the twisted additive action.
inline TruncPoly twisted_act(const TameTower& tw, const GroupElem& g, const TruncPoly& f, long long w) {
    long long r = w % tw.e;
    if (r < 0) r += tw.e;
    return act(tw, g, f).scaled(tw.k.pow(g.zeta, r));
}

struct Cocycle {
    const TameTower* tw = nullptr;
    int n = 0;
    long long twist = 0;      // additive case only
    bool multiplicative = false;
    std::vector<TruncPoly> gen_values; // aligned with tw->group_generators()
};

namespace cohom_detail {

// Values on all of G, built from generator values through c_{sg} = c_s + s.c_g
// (or its multiplicative form), then checked against every pair.  Returns
// nullopt when the generator data does not extend to a cocycle.
inline std::optional<std::vector<TruncPoly>> extend_cocycle(const Cocycle& c) {
    const TameTower& tw = *c.tw;
    const auto gens = tw.group_generators();
    if (gens.size() != c.gen_values.size()) throw DomainError("Cocycle: generator count mismatch");
    const auto els = tw.group_elements();
    const int m = static_cast<int>(els.size());
    std::vector<TruncPoly> val(m);
    std::vector<char> known(m, 0);
    const int id = tw.group_index(tw.gidentity());
    val[id] = c.multiplicative ? TruncPoly::constant(tw, 1, c.n) : TruncPoly::zero(tw, c.n);
    known[id] = 1;
    bool progress = true;
    while (progress) {
        progress = false;
        for (int gi = 0; gi < m; ++gi) {
            if (!known[gi]) continue;
            for (size_t s = 0; s < gens.size(); ++s) {
                const GroupElem sg = tw.gcompose(gens[s], els[gi]);
                const int ti = tw.group_index(sg);
                if (known[ti]) continue;
                if (c.multiplicative)
                    val[ti] = c.gen_values[s] * act(tw, gens[s], val[gi]);
                else
                    val[ti] = c.gen_values[s] + twisted_act(tw, gens[s], val[gi], c.twist);
                known[ti] = 1;
                progress = true;
            }
        }
    }
    for (char kn : known)
        if (!kn) throw InvariantError("extend_cocycle: generators do not generate G");
    // Full relation check: c_{gh} = c_g + g.c_h on every pair.
    for (int gi = 0; gi < m; ++gi)
        for (int hi = 0; hi < m; ++hi) {
            const int pi = tw.group_index(tw.gcompose(els[gi], els[hi]));
            TruncPoly expect = c.multiplicative
                                   ? val[gi] * act(tw, els[gi], val[hi])
                                   : val[gi] + twisted_act(tw, els[gi], val[hi], c.twist);
            if (expect != val[pi]) return std::nullopt;
        }
    return val;
}

inline std::vector<int16_t> poly_coords(const TruncPoly& p) {
    const Field& k = p.tw->k;
    std::vector<int16_t> v(static_cast<size_t>(p.n) * k.f);
    for (int i = 0; i < p.n; ++i)
        for (int d = 0; d < k.f; ++d) v[static_cast<size_t>(i) * k.f + d] = static_cast<int16_t>(k.digit(p.c[i], d));
    return v;
}

inline TruncPoly poly_from_coords(const TameTower& tw, int n, const std::vector<int16_t>& v) {
    TruncPoly p(tw, n);
    for (int i = 0; i < n; ++i) {
        int idx = 0;
        for (int d = tw.k.f - 1; d >= 0; --d) idx = idx * tw.l + v[static_cast<size_t>(i) * tw.k.f + d] % tw.l;
        p.c[i] = static_cast<uint16_t>(idx);
    }
    return p;
}

} // namespace cohom_detail

// Constructive vanishing of the (twisted) additive H^1: returns b with
// c_g = g.b - b for every generator.  Throws InvariantError when no such b
// exists, which contradicts the vanishing of H^1.
inline TruncPoly additive_coboundary_solve(const Cocycle& c) {
    if (c.multiplicative) throw DomainError("additive_coboundary_solve: additive cocycle expected");
    const TameTower& tw = *c.tw;
    if (!cohom_detail::extend_cocycle(c))
        throw DomainError("additive_coboundary_solve: generator values violate the cocycle relation");
    const auto gens = tw.group_generators();
    const int dim = c.n * tw.k.f;
    FlMatrix m(tw.l, dim * static_cast<int>(gens.size()), dim);
    std::vector<int16_t> rhs;
    for (size_t s = 0; s < gens.size(); ++s) {
        for (int j = 0; j < dim; ++j) {
            std::vector<int16_t> basis(dim, 0);
            basis[j] = 1;
            TruncPoly bj = cohom_detail::poly_from_coords(tw, c.n, basis);
            TruncPoly img = twisted_act(tw, gens[s], bj, c.twist) - bj;
            auto coords = cohom_detail::poly_coords(img);
            for (int r = 0; r < dim; ++r) m.at(static_cast<int>(s) * dim + r, j) = coords[r];
        }
        auto target = cohom_detail::poly_coords(c.gen_values[s]);
        rhs.insert(rhs.end(), target.begin(), target.end());
    }
    auto sol = solve(m, rhs);
    if (!sol) throw InvariantError("additive H^1 should vanish but the coboundary equation is unsolvable");
    return cohom_detail::poly_from_coords(tw, c.n, *sol);
}

struct MultClass {
    int cls = 0;        // i in Z/e
    TruncPoly witness;  // unit b with c_g = (g pi/pi)^i * (g b)/b
};

// Class of a multiplicative cocycle: constant term first by exhaustive search
// over k^*, then a degree-by-degree lift through additive coboundary solves.
inline MultClass mult_cocycle_class(const Cocycle& c) {
    if (!c.multiplicative) throw DomainError("mult_cocycle_class: multiplicative cocycle expected");
    const TameTower& tw = *c.tw;
    for (const auto& v : c.gen_values)
        if (!v.is_unit()) throw DomainError("mult_cocycle_class: values must be units");
    if (!cohom_detail::extend_cocycle(c))
        throw DomainError("mult_cocycle_class: generator values violate the cocycle relation");
    const auto gens = tw.group_generators();
    // Constant-term class on k^*.
    int cls = -1, beta = 1;
    for (int i = 0; i < tw.e && cls < 0; ++i) {
        for (int b = 1; b < tw.k.q; ++b) {
            bool ok = true;
            for (size_t s = 0; s < gens.size(); ++s) {
                const int want = c.gen_values[s].eval0();
                const int got = tw.k.mul(tw.k.pow(gens[s].zeta, i), tw.k.div(tw.coeff_act(gens[s], b), b));
                if (want != got) { ok = false; break; }
            }
            if (ok) { cls = i; beta = b; break; }
        }
    }
    if (cls < 0) throw InvariantError("multiplicative H^1 class not among the (g pi/pi)^i");
    TruncPoly b = TruncPoly::constant(tw, beta, c.n);
    for (int d = 1; d < c.n; ++d) {
        // Discrepancy d_g = c_g * b / ((g pi/pi)^cls * g(b)) = 1 + delta_g u^d + ...
        Cocycle delta;
        delta.tw = &tw;
        delta.n = 1;
        delta.twist = d;
        delta.multiplicative = false;
        bool clean = true;
        for (size_t s = 0; s < gens.size(); ++s) {
            TruncPoly den = act(tw, gens[s], b).scaled(tw.k.pow(gens[s].zeta, cls));
            TruncPoly dg = c.gen_values[s] * b * den.inverse();
            for (int t = 1; t < d; ++t)
                if (dg.c[t]) throw InvariantError("mult_cocycle_class: lift lost lower-degree agreement");
            if (d < dg.n && dg.c[d]) clean = false;
            delta.gen_values.push_back(TruncPoly::constant(tw, d < dg.n ? dg.c[d] : 0, 1));
        }
        if (clean) continue;
        TruncPoly eps = additive_coboundary_solve(delta);
        TruncPoly corr = TruncPoly::constant(tw, 1, c.n) + TruncPoly::monomial(tw, eps.eval0(), d, c.n);
        b = b * corr;
    }
    for (size_t s = 0; s < gens.size(); ++s)
        if (c.gen_values[s] * b != act(tw, gens[s], b).scaled(tw.k.pow(gens[s].zeta, cls)))
            throw InvariantError("mult_cocycle_class: witness does not reproduce the cocycle");
    return {cls, b};
}

// Exact sizes of the additive and multiplicative H^1 by enumerating cocycles
// on generators modulo coboundaries.
inline std::pair<long long, long long> h1_sizes_bruteforce(const TameTower& tw, int n) {
    const auto gens = tw.group_generators();
    const int q = tw.k.q;
    if (gens.empty()) return {1, 1};
    const unsigned long long limit = guard_limit(10000000ull);

    auto encode = [&](const std::vector<TruncPoly>& vals) {
        unsigned long long key = 0;
        for (const auto& v : vals)
            for (int i = 0; i < n; ++i) key = key * q + v.c[i];
        return key;
    };

    // Additive count.
    unsigned long long module_size = 1;
    for (int i = 0; i < n; ++i) {
        module_size *= q;
        if (module_size > limit) throw GuardError("h1_sizes_bruteforce: search space exceeds guard");
    }
    unsigned long long space = 1;
    for (size_t s = 0; s < gens.size(); ++s) {
        space *= module_size;
        if (space > limit) throw GuardError("h1_sizes_bruteforce: search space exceeds guard");
    }
    auto decode_poly = [&](unsigned long long code) {
        TruncPoly p(tw, n);
        for (int i = n - 1; i >= 0; --i) {
            p.c[i] = static_cast<uint16_t>(code % q);
            code /= q;
        }
        return p;
    };
    long long z_add = 0;
    for (unsigned long long code = 0; code < space; ++code) {
        Cocycle c;
        c.tw = &tw;
        c.n = n;
        c.twist = 0;
        unsigned long long rem = code;
        for (size_t s = 0; s < gens.size(); ++s) {
            c.gen_values.push_back(decode_poly(rem % module_size));
            rem /= module_size;
        }
        if (cohom_detail::extend_cocycle(c)) ++z_add;
    }
    std::set<unsigned long long> b_add;
    for (unsigned long long code = 0; code < module_size; ++code) {
        TruncPoly b = decode_poly(code);
        std::vector<TruncPoly> cob;
        for (const auto& g : gens) cob.push_back(act(tw, g, b) - b);
        b_add.insert(encode(cob));
    }
    if (z_add % static_cast<long long>(b_add.size()) != 0)
        throw InvariantError("h1_sizes_bruteforce: coboundaries do not divide cocycles");
    long long h1_add = z_add / static_cast<long long>(b_add.size());

    // Multiplicative count.
    unsigned long long unit_count = static_cast<unsigned long long>(q - 1);
    for (int i = 1; i < n; ++i) unit_count *= q;
    unsigned long long uspace = 1;
    for (size_t s = 0; s < gens.size(); ++s) {
        uspace *= unit_count;
        if (uspace > limit) throw GuardError("h1_sizes_bruteforce: search space exceeds guard");
    }
    auto decode_unit = [&](unsigned long long code) {
        TruncPoly p(tw, n);
        p.c[0] = static_cast<uint16_t>(1 + code % (q - 1));
        code /= (q - 1);
        for (int i = 1; i < n; ++i) {
            p.c[i] = static_cast<uint16_t>(code % q);
            code /= q;
        }
        return p;
    };
    long long z_mult = 0;
    for (unsigned long long code = 0; code < uspace; ++code) {
        Cocycle c;
        c.tw = &tw;
        c.n = n;
        c.multiplicative = true;
        unsigned long long rem = code;
        for (size_t s = 0; s < gens.size(); ++s) {
            c.gen_values.push_back(decode_unit(rem % unit_count));
            rem /= unit_count;
        }
        if (cohom_detail::extend_cocycle(c)) ++z_mult;
    }
    std::set<unsigned long long> b_mult;
    for (unsigned long long code = 0; code < unit_count; ++code) {
        TruncPoly b = decode_unit(code);
        TruncPoly binv = b.inverse();
        std::vector<TruncPoly> cob;
        for (const auto& g : gens) cob.push_back(act(tw, g, b) * binv);
        b_mult.insert(encode(cob));
    }
    if (z_mult % static_cast<long long>(b_mult.size()) != 0)
        throw InvariantError("h1_sizes_bruteforce: coboundaries do not divide cocycles");
    return {h1_add, z_mult / static_cast<long long>(b_mult.size())};
}

} // namespace breuilkit
