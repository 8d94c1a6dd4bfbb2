#pragma once

// The Dieudonne relation filter and the classification of rank-2 modules
// attached to a tame type built from the level-2 fundamental character:
// brute-force sweep and closed-form families, the descended two-character
// forms, and the target list they must match.

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "breuilkit/rank2.hpp"

namespace breuilkit {

struct TypeTau {
    int m = 1; // mod l^2 - 1
    int i = 1; // m = (l+1) j + i with 1 <= i <= l
    int j = 0; // mod l - 1
};

inline TypeTau make_type(const TameTower& tw, long long m) {
    const int e = tw.l * tw.l - 1;
    int mm = static_cast<int>((m % e + e) % e);
    if (mm % (tw.l + 1) == 0) throw DomainError("make_type: m divisible by l+1 is not an irreducible tame type");
    TypeTau t;
    t.m = mm;
    t.i = mm % (tw.l + 1);
    t.j = ((mm - t.i) / (tw.l + 1)) % (tw.l - 1);
    return t;
}

namespace adm_detail {

inline std::vector<uint16_t> kmat_mul(const Field& k, const std::vector<uint16_t>& A,
                                      const std::vector<uint16_t>& B, int n) {
    std::vector<uint16_t> C(static_cast<size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < n; ++t) {
            const int v = A[static_cast<size_t>(i) * n + t];
            if (!v) continue;
            for (int j = 0; j < n; ++j)
                C[static_cast<size_t>(i) * n + j] = static_cast<uint16_t>(
                    k.add(C[static_cast<size_t>(i) * n + j], k.mul(v, B[static_cast<size_t>(t) * n + j])));
        }
    return C;
}

inline bool kmat_is_scalar(const std::vector<uint16_t>& A, int n, int scalar) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int want = i == j ? scalar : 0;
            if (A[static_cast<size_t>(i) * n + j] != want) return false;
        }
    return true;
}

} // namespace adm_detail

// The three relations on the reduction: the fixed inertia generator zeta_0
// satisfies [z] + [z]^l = (z^{-m} + z^{-lm}) id and [z]^{l+1} = z^{-(l+1)m} id,
// and F + T V = 0 with T in F_l.
inline bool check_relations(const TameTower& tw, const DieudonneData& D, long long m, int T_fl) {
    const Field& k = tw.k;
    const int n = D.dim;
    auto zp = [&](long long x) { return tw.zeta_pow(x); };
    std::vector<uint16_t> A = D.inertia;
    std::vector<uint16_t> Al = A;
    for (int t = 1; t < tw.l; ++t) Al = adm_detail::kmat_mul(k, Al, A, n);
    std::vector<uint16_t> sum(static_cast<size_t>(n) * n);
    for (size_t i = 0; i < sum.size(); ++i) sum[i] = static_cast<uint16_t>(k.add(A[i], Al[i]));
    if (!adm_detail::kmat_is_scalar(sum, n, k.add(zp(-m), zp(-static_cast<long long>(tw.l) * m))))
        return false;
    std::vector<uint16_t> Al1 = adm_detail::kmat_mul(k, Al, A, n);
    if (!adm_detail::kmat_is_scalar(Al1, n, zp(-static_cast<long long>(tw.l + 1) * m))) return false;
    for (size_t i = 0; i < D.F.size(); ++i)
        if (k.add(D.F[i], k.mul(T_fl % tw.l, D.V[i])) != 0) return false;
    return true;
}

// Closed-form admissible families for tau.  For each type the two families
// M((l-1)(l+1-i), a, 1-i-j; (l-1)i, b, -j; 0, 1) and
// M((l-1)i, a, -j; (l-1)(l+1-i), b, 1-i-j; 0, 1) survive, minus the split
// member at i = 1 resp. i = l, with a != b forced when c = d.
inline std::vector<Rank2Ext> enumerate_admissible(const TameTower& tw, const TypeTau& tau) {
    if (!is_eprime_preset(tw)) throw DomainError("enumerate_admissible: E' preset required");
    const int l = tw.l;
    std::vector<Rank2Ext> out;
    auto push_family = [&](int rp, int cc, int sp, int dd) {
        const bool cd_equal = ((cc - dd) % (l - 1) + (l - 1)) % (l - 1) == 0;
        for (int a = 1; a < l; ++a)
            for (int b = 1; b < l; ++b) {
                if (cd_equal && a == b) continue;
                auto x = make_ext_eprime(tw, rp * (l - 1), a, cc, sp * (l - 1), b, dd);
                if (!x || x->n != 0) throw InvariantError("enumerate_admissible: family member has no normal form");
                out.push_back(*x);
            }
    };
    if (tau.i >= 2) push_family(l + 1 - tau.i, 1 - tau.i - tau.j, tau.i, -tau.j);
    if (tau.i <= l - 1) push_family(tau.i, -tau.j, l + 1 - tau.i, 1 - tau.i - tau.j);
    std::sort(out.begin(), out.end());
    return out;
}

struct DroppedModule {
    Rank2Ext module;
    std::string reason; // "relations" or "split"
};

// Brute-force path: sweep every (r', c, s', d, a, b) with an admissible n,
// reduce, and filter by the relations and the split criterion.
inline std::vector<Rank2Ext> enumerate_admissible_brute(const TameTower& tw, const TypeTau& tau,
                                                        std::vector<DroppedModule>* dropped = nullptr) {
    if (!is_eprime_preset(tw)) throw DomainError("enumerate_admissible_brute: E' preset required");
    const int l = tw.l;
    std::vector<Rank2Ext> out;
    for (int rp = 0; rp <= l + 1; ++rp)
        for (int c = 0; c < l - 1; ++c)
            for (int sp = 0; sp <= l + 1; ++sp)
                for (int d = 0; d < l - 1; ++d)
                    for (int a = 1; a < l; ++a)
                        for (int b = 1; b < l; ++b) {
                            if (a == b && c == d) continue; // centralizer condition
                            auto x = make_ext_eprime(tw, rp * (l - 1), a, c, sp * (l - 1), b, d);
                            if (!x) continue;
                            auto [mod, dd] = to_breuil(*x);
                            DieudonneData D = dieudonne_reduce(mod, dd);
                            const int T = (a * b) % l;
                            if (!check_relations(tw, D, tau.m, T)) {
                                if (dropped) dropped->push_back({*x, "relations"});
                                continue;
                            }
                            if (is_split(*x)) {
                                if (dropped) dropped->push_back({*x, "split"});
                                continue;
                            }
                            out.push_back(*x);
                        }
    std::sort(out.begin(), out.end());
    return out;
}

struct RhoBarForm {
    Character top;    // character of the quotient constituent (sub of rho-bar)
    Character bottom; // character of the sub constituent (quotient of rho-bar)
    bool star_nonzero = true;
    std::optional<bool> peu_ramifie;

    bool operator==(const RhoBarForm& o) const {
        return top == o.top && bottom == o.bottom && star_nonzero == o.star_nonzero &&
               peu_ramifie == o.peu_ramifie;
    }
    bool operator<(const RhoBarForm& o) const {
        if (top != o.top) return top < o.top;
        if (bottom != o.bottom) return bottom < o.bottom;
        if (star_nonzero != o.star_nonzero) return star_nonzero < o.star_nonzero;
        return peu_ramifie.value_or(false) < o.peu_ramifie.value_or(false);
    }
};

// d - c mod l-1, normalized into 1..l-1 (nonsplit families).
inline int peu_invariant(const Rank2Ext& x) {
    const int l = x.tw->l;
    int k = ((x.d - x.c) % (l - 1) + (l - 1)) % (l - 1);
    return k == 0 ? l - 1 : k;
}

// The Breuil-module functor is contravariant: the quotient constituent
// carries the sub-character of the descended representation.
inline RhoBarForm rho_bar_of(const Rank2Ext& x) {
    RhoBarForm f;
    f.top = character(quot_of(x));
    f.bottom = character(sub_of(x));
    f.star_nonzero = !is_split(x);
    if (peu_invariant(x) == 1) f.peu_ramifie = true;
    return f;
}

inline RhoBarForm inertia_restrict(RhoBarForm f) {
    f.top.unit_rep = 1;
    f.bottom.unit_rep = 1;
    return f;
}

// Target list restricted to inertia: (omega^{i+j}, omega^{1+j}) with a
// peu-ramifie star at i = 2, and (omega^{1+j}, omega^{i+j}) with the flag at
// i = l-1; returned as a deduplicated sorted set.
inline std::vector<RhoBarForm> target_inertia_forms(const TameTower& tw, const TypeTau& tau) {
    const int l = tw.l;
    auto mk = [&](int te, int be, bool flag) {
        RhoBarForm f;
        f.top = {1, ((te % (l - 1)) + (l - 1)) % (l - 1)};
        f.bottom = {1, ((be % (l - 1)) + (l - 1)) % (l - 1)};
        f.star_nonzero = true;
        if (flag) f.peu_ramifie = true;
        return f;
    };
    std::vector<RhoBarForm> forms;
    forms.push_back(mk(tau.i + tau.j, 1 + tau.j, tau.i == 2));
    forms.push_back(mk(1 + tau.j, tau.i + tau.j, tau.i == l - 1));
    std::sort(forms.begin(), forms.end());
    forms.erase(std::unique(forms.begin(), forms.end()), forms.end());
    return forms;
}

} // namespace breuilkit
