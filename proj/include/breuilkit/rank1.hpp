#pragma once

// Rank-1 Breuil modules with tame descent data: normal forms M(r, a, c),
// homs between them, the descended Galois character, and the order-l affine
// algebra parameter.

#include <algorithm>
#include <vector>

#include "breuilkit/breuil.hpp"

namespace breuilkit {

struct Rank1Module {
    const TameTower* tw = nullptr;
    int r = 0;        // filtration exponent, divisible by (l-1, e)
    int a = 1;        // kL^* index
    int c = 0;        // integer mod (l-1, e)
    long long k2 = 0; // descent exponent e'c - U l r'
};

inline Rank1Module make_rank1(const TameTower& tw, int r, int a, int c) {
    if (r < 0 || r > tw.e_K) throw DomainError("make_rank1: r out of range");
    if (r % tw.d0 != 0) throw DomainError("make_rank1: r not divisible by (l-1, e)");
    if (a <= 0 || a >= tw.kL.q) throw DomainError("make_rank1: a must be a unit of kL");
    c %= tw.d0;
    if (c < 0) c += tw.d0;
    Rank1Module m;
    m.tw = &tw;
    m.r = r;
    m.a = a;
    m.c = c;
    m.k2 = static_cast<long long>(tw.e_prime) * c - tw.U * tw.l * tw.xprime(r);
    return m;
}

inline std::pair<BreuilModule, DescentData> to_breuil(const Rank1Module& m) {
    const TameTower& tw = *m.tw;
    BreuilModule b;
    b.tw = &tw;
    b.rank = 1;
    b.m1_gens = {{TruncPoly::monomial(tw, 1, m.r)}};
    b.phi1 = {{TruncPoly::constant(tw, tw.embed(m.a))}};
    DescentData dd;
    dd.gens = tw.group_generators();
    for (const auto& g : dd.gens) {
        long long kk = m.k2 % tw.e;
        if (kk < 0) kk += tw.e;
        dd.mats.push_back({{TruncPoly::constant(tw, tw.k.pow(g.zeta, kk))}});
    }
    return {std::move(b), std::move(dd)};
}

// M(r, a) admits generic fibre descent data iff (l-1, e) | r and the unit a
// lies in kL^* ((k[u]/u^{el})^*)^{l-1}.  The principal units are all
// (l-1)-st powers, so only the leading coefficient matters.
inline bool admits_descent(const TameTower& tw, int r, const TruncPoly& a_unit) {
    if (r < 0 || r > tw.e_K || !a_unit.is_unit()) return false;
    if (r % tw.d0 != 0) return false;
    const int a0 = a_unit.eval0();
    for (int w = 1; w < tw.kL.q; ++w)
        if (tw.k.is_power_residue(tw.k.div(a0, tw.embed(w)), tw.l - 1)) return true;
    return false;
}

struct Rank1Hom {
    int alpha;  // kL^* index
    int degree; // l (s - r)/(l - 1)
};

// Nonzero homs M(r,a,c) -> M(s,b,d); the full list of scalars alpha.
inline std::vector<Rank1Hom> homs(const Rank1Module& m, const Rank1Module& n) {
    if (m.tw != n.tw) throw DomainError("homs: tower mismatch");
    const TameTower& tw = *m.tw;
    std::vector<Rank1Hom> out;
    if (m.r > n.r) return out;
    if ((n.r - m.r) % (tw.l - 1) != 0) return out;
    if (!tw.kL.is_power_residue(tw.kL.div(m.a, n.a), tw.l - 1)) return out;
    const long long shift = tw.V_param * ((m.r - n.r) / (tw.l - 1));
    long long want = ((n.c + shift) % tw.d0 + tw.d0) % tw.d0;
    if (m.c != static_cast<int>(want)) return out;
    const int deg = tw.l * (n.r - m.r) / (tw.l - 1);
    const int ratio = tw.kL.div(m.a, n.a);
    for (int alpha = 1; alpha < tw.kL.q; ++alpha)
        if (tw.kL.pow(alpha, tw.l - 1) == ratio) out.push_back({alpha, deg});
    return out;
}

inline Morphism hom_to_morphism(const Rank1Hom& h, const TameTower& tw) {
    Morphism f;
    f.mat = {{TruncPoly::monomial(tw, tw.embed(h.alpha), h.degree)}};
    return f;
}

// chi_a omega^n as (unit class of a, n mod l-1); the unit class is stored by
// its least representative modulo (kL^*)^{l-1}.
struct Character {
    int unit_rep = 1;
    int cyclo_exp = 0;
    bool operator==(const Character& o) const { return unit_rep == o.unit_rep && cyclo_exp == o.cyclo_exp; }
    bool operator!=(const Character& o) const { return !(*this == o); }
    bool operator<(const Character& o) const {
        return unit_rep != o.unit_rep ? unit_rep < o.unit_rep : cyclo_exp < o.cyclo_exp;
    }
};

inline int unit_class_rep(const TameTower& tw, int a) {
    int best = a;
    for (int w = 1; w < tw.kL.q; ++w) best = std::min(best, tw.kL.mul(a, tw.kL.pow(w, tw.l - 1)));
    return best;
}

// The descended character of M(r, a, c).  Needs the declared uniformizer
// relation pi^{e_K} = -l; the class of lambda = -l a (pi^e)^{Vr' - (l-1)'c}
// is then (a, e_L + Vr' - (l-1)'c mod l-1), which for L = Q_l reads
// chi_a omega^{1-c}.
inline Character character(const Rank1Module& m) {
    const TameTower& tw = *m.tw;
    if (!tw.pi_rel) throw DomainError("character: tower lacks the declared uniformizer relation");
    long long expo = tw.e_L + tw.V_param * tw.xprime(m.r) - static_cast<long long>(tw.lm1_prime) * m.c;
    expo %= (tw.l - 1);
    if (expo < 0) expo += tw.l - 1;
    return {unit_class_rep(tw, m.a), static_cast<int>(expo)};
}

struct OortTate {
    int valuation = 0;    // pi-adic valuation of the parameter C
    int unit_residue = 0; // k index of its unit part's residue
};

inline OortTate oort_tate_param(const Rank1Module& m) {
    const TameTower& tw = *m.tw;
    if (!tw.pi_rel) throw DomainError("oort_tate_param: tower lacks a constant G_pi");
    return {tw.e_K - m.r, tw.k.div(tw.embed(m.a), tw.gpi_res)};
}

inline bool isomorphic(const Rank1Module& m, const Rank1Module& n) {
    return m.r == n.r && m.c == n.c && m.tw->kL.is_power_residue(m.tw->kL.div(m.a, n.a), m.tw->l - 1);
}

// One representative per isomorphism class: r over multiples of (l-1, e),
// a over least coset representatives of kL^*/(kL^*)^{l-1}, c mod (l-1, e).
inline std::vector<Rank1Module> census(const TameTower& tw) {
    std::vector<int> reps;
    for (int a = 1; a < tw.kL.q; ++a)
        if (unit_class_rep(tw, a) == a) reps.push_back(a);
    std::vector<Rank1Module> out;
    for (int r = 0; r <= tw.e_K; r += tw.d0)
        for (int a : reps)
            for (int c = 0; c < tw.d0; ++c) out.push_back(make_rank1(tw, r, a, c));
    return out;
}

} // namespace breuilkit
