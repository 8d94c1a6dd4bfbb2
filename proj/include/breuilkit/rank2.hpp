#pragma once

// Extensions of rank-1 modules with descent data: the transport-equation
// solver u^s T - (b/a) u^r T^l = H, extension-space bases, the E' normal
// forms M(r,a,c;s,b,d;n,1), split and hom criteria, and the lattice of
// integral models.

#include <algorithm>
#include <optional>
#include <vector>

#include "breuilkit/rank1.hpp"

namespace breuilkit {

inline bool is_eprime_preset(const TameTower& tw) {
    return tw.e == tw.l * tw.l - 1 && tw.f_rel == 2 && tw.e_L == 1 && tw.f_L == 1 && tw.pi_rel;
}

// ---------------------------------------------------------------------------
// Transport equation.
// ---------------------------------------------------------------------------

namespace rank2_detail {

// Indices 0 <= i < N ordered by distance from i0 = (ls - r)/(l - 1); the
// dependence T_{(i-r)/l} always sits strictly closer to i0.
inline std::vector<int> transport_order(const TameTower& tw, int r, int s) {
    std::vector<int> idx(tw.N);
    for (int i = 0; i < tw.N; ++i) idx[i] = i;
    const long long num = static_cast<long long>(tw.l) * s - r; // i0 * (l-1)
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) {
        const long long dx = std::abs(static_cast<long long>(x) * (tw.l - 1) - num);
        const long long dy = std::abs(static_cast<long long>(y) * (tw.l - 1) - num);
        return dx < dy;
    });
    return idx;
}

} // namespace rank2_detail

// Some T with u^s T - ratio u^r T^l = H in k[u]/u^N, or nullopt.
inline std::optional<TruncPoly> solve_transport(const TameTower& tw, const TruncPoly& H, int r, int s,
                                                int ratio) {
    if (r < 0 || r > tw.e_K || s < 0 || s > tw.e_K) throw DomainError("solve_transport: r, s out of range");
    if (!ratio) throw DomainError("solve_transport: ratio must be nonzero");
    const Field& k = tw.k;
    TruncPoly T(tw, tw.N);
    std::vector<char> det(tw.N, 0);
    for (int i : rank2_detail::transport_order(tw, r, s)) {
        const bool base = (static_cast<long long>(i) * (tw.l - 1) == static_cast<long long>(tw.l) * s - r) &&
                          i >= s;
        if (base) {
            auto x = k.solve_x_minus_cxl(ratio, H.c[i]);
            if (!x) return std::nullopt;
            T.c[i - s] = static_cast<uint16_t>(*x);
            det[i - s] = 1;
            continue;
        }
        int dep = 0;
        if (i >= r && (i - r) % tw.l == 0) {
            const int jd = (i - r) / tw.l;
            if (jd < tw.N) {
                if (!det[jd] && T.c[jd]) throw InvariantError("solve_transport: dependence order broken");
                dep = T.c[jd];
            }
        }
        const int val = k.add(H.c[i], k.mul(ratio, k.frob(dep)));
        if (i >= s) {
            T.c[i - s] = static_cast<uint16_t>(val);
            det[i - s] = 1;
        } else if (val != 0) {
            return std::nullopt;
        }
    }
    if (H != T.shifted(s) - T.pow_l().scaled(ratio).shifted(r))
        throw InvariantError("solve_transport: substitution check failed");
    return T;
}

struct TransportNormalForm {
    TruncPoly h_solvable; // = u^s T - ratio u^r T^l exactly
    int eta_count = 0;    // N in F_l; nonzero only in the unsolvable base case
    int eta = 0;          // the fixed coset representative (k index)
    TruncPoly t_witness;
};

// Least element (k index order) outside the image of x -> x - ratio x^l,
// preferring representatives inside kL.
inline int transport_eta(const TameTower& tw, int ratio) {
    const Field& k = tw.k;
    std::vector<char> in_image(k.q, 0);
    for (int x = 0; x < k.q; ++x) in_image[k.sub(x, k.mul(ratio, k.frob(x)))] = 1;
    for (int w = 0; w < tw.kL.q; ++w)
        if (!in_image[tw.embed(w)]) return tw.embed(w);
    for (int x = 0; x < k.q; ++x)
        if (!in_image[x]) return x;
    throw DomainError("transport_eta: the map is surjective");
}

// Splits H as h_solvable + (residual of degree < s) + eta_count * eta * u^{i0}.
inline TransportNormalForm normal_form_h(const TameTower& tw, const TruncPoly& H, int r, int s, int ratio) {
    if (!ratio) throw DomainError("normal_form_h: ratio must be nonzero");
    const Field& k = tw.k;
    TransportNormalForm out{TruncPoly::zero(tw), 0, 0, TruncPoly::zero(tw)};
    TruncPoly T(tw, tw.N), Hs(tw, tw.N);
    std::vector<char> det(tw.N, 0);
    for (int i : rank2_detail::transport_order(tw, r, s)) {
        const bool base = (static_cast<long long>(i) * (tw.l - 1) == static_cast<long long>(tw.l) * s - r) &&
                          i >= s;
        if (base) {
            int target = H.c[i];
            auto x = k.solve_x_minus_cxl(ratio, target);
            if (!x) {
                out.eta = transport_eta(tw, ratio);
                int count = -1;
                for (int nn = 0; nn < tw.l; ++nn) {
                    const int shifted = k.sub(target, k.mul(nn, out.eta));
                    if ((x = k.solve_x_minus_cxl(ratio, shifted))) { count = nn; target = shifted; break; }
                }
                if (count < 0) throw InvariantError("normal_form_h: eta does not represent the cokernel");
                out.eta_count = count;
            }
            T.c[i - s] = static_cast<uint16_t>(*x);
            det[i - s] = 1;
            Hs.c[i] = static_cast<uint16_t>(target);
            continue;
        }
        int dep = 0;
        if (i >= r && (i - r) % tw.l == 0) {
            const int jd = (i - r) / tw.l;
            if (jd < tw.N) dep = T.c[jd];
        }
        const int val = k.add(H.c[i], k.mul(ratio, k.frob(dep)));
        if (i >= s) {
            T.c[i - s] = static_cast<uint16_t>(val);
            det[i - s] = 1;
            Hs.c[i] = H.c[i];
        } else {
            Hs.c[i] = static_cast<uint16_t>(k.neg(k.mul(ratio, k.frob(dep)))); // residual stays in degree i
        }
    }
    if (Hs != T.shifted(s) - T.pow_l().scaled(ratio).shifted(r))
        throw InvariantError("normal_form_h: solvable part fails substitution");
    out.h_solvable = Hs;
    out.t_witness = T;
    return out;
}

// ---------------------------------------------------------------------------
// Extension spaces.
// ---------------------------------------------------------------------------

struct ExtBasis {
    std::vector<int> degrees;      // allowed monomial degrees, coefficients in kL
    std::optional<int> eta_degree; // (ls - r)/(l - 1) when a hom quot -> sub exists
    int dimension = 0;             // over F_l
};

// Extensions of quot = M(r,a,c) by sub = M(s,b,d) with descent data.
inline ExtBasis ext_basis(const Rank1Module& sub, const Rank1Module& quot) {
    if (sub.tw != quot.tw) throw DomainError("ext_basis: tower mismatch");
    const TameTower& tw = *sub.tw;
    const long long k1 = sub.k2, k2 = quot.k2;
    const int r = quot.r, s = sub.r;
    ExtBasis out;
    long long target = (r + k2 - k1) % tw.e;
    if (target < 0) target += tw.e;
    for (int deg = std::max(0, r + s - tw.e_K); deg < s; ++deg)
        if (deg % tw.e == target) out.degrees.push_back(deg);
    if (!homs(quot, sub).empty()) out.eta_degree = (tw.l * s - r) / (tw.l - 1);
    out.dimension = static_cast<int>(out.degrees.size()) * tw.f_L + (out.eta_degree ? 1 : 0);
    return out;
}

// ---------------------------------------------------------------------------
// E' normal forms M(r,a,c;s,b,d;n,1).
// ---------------------------------------------------------------------------

struct Rank2Ext {
    const TameTower* tw = nullptr;
    int r = 0, a = 1, c = 0; // quotient parameters
    int s = 0, b = 1, d = 0; // sub parameters
    int n = 0;               // h = u^n
    long long k1 = 0, k2 = 0;

    bool operator==(const Rank2Ext& o) const {
        return r == o.r && a == o.a && c == o.c && s == o.s && b == o.b && d == o.d && n == o.n;
    }
    bool operator<(const Rank2Ext& o) const {
        auto t = [](const Rank2Ext& x) { return std::array<int, 7>{x.r, x.a, x.c, x.s, x.b, x.d, x.n}; };
        return t(*this) < t(o);
    }
};

inline Rank1Module sub_of(const Rank2Ext& x) { return make_rank1(*x.tw, x.s, x.b, x.d); }
inline Rank1Module quot_of(const Rank2Ext& x) { return make_rank1(*x.tw, x.r, x.a, x.c); }

// The invariant k with n - (ls' - r') = -k(l+1): 0 for the split stratum,
// l for the exceptional corner (0, l+1).
inline int stratum_k(const Rank2Ext& x) {
    const TameTower& tw = *x.tw;
    const long long diff = static_cast<long long>(tw.l) * tw.xprime(x.s) - tw.xprime(x.r) - x.n;
    if (diff % (tw.l + 1) != 0) throw InvariantError("stratum_k: invariant is not an integer");
    return static_cast<int>(diff / (tw.l + 1));
}

// The nonsplit normal form, when the congruence on n has a solution in the
// window; rejects (a,c) = (b,d).
inline std::optional<Rank2Ext> make_ext_eprime(const TameTower& tw, int r, int a, int c, int s, int b, int d) {
    if (!is_eprime_preset(tw)) throw DomainError("make_ext_eprime: E' preset required");
    if (a == b && ((c - d) % (tw.l - 1)) == 0) throw DomainError("make_ext_eprime: (a,c) = (b,d) is excluded");
    Rank1Module sub = make_rank1(tw, s, b, d);
    Rank1Module quot = make_rank1(tw, r, a, c);
    const int lo = std::max(0, r + s - tw.e_K);
    if (lo >= s) return std::nullopt;
    long long target = (r + quot.k2 - sub.k2) % tw.e;
    if (target < 0) target += tw.e;
    long long n = lo + ((target - lo) % tw.e + tw.e) % tw.e;
    if (n >= s) return std::nullopt;
    Rank2Ext x;
    x.tw = &tw;
    x.r = r;
    x.a = a;
    x.c = quot.c;
    x.s = s;
    x.b = b;
    x.d = sub.c;
    x.n = static_cast<int>(n);
    x.k1 = sub.k2;
    x.k2 = quot.k2;
    return x;
}

inline std::pair<BreuilModule, DescentData> to_breuil(const Rank2Ext& x) {
    const TameTower& tw = *x.tw;
    BreuilModule m;
    m.tw = &tw;
    m.rank = 2;
    m.m1_gens = {
        {TruncPoly::monomial(tw, 1, x.s), TruncPoly::zero(tw)},
        {TruncPoly::monomial(tw, 1, x.n), TruncPoly::monomial(tw, 1, x.r)},
    };
    m.phi1 = {
        {TruncPoly::constant(tw, tw.embed(x.b)), TruncPoly::zero(tw)},
        {TruncPoly::zero(tw), TruncPoly::constant(tw, tw.embed(x.a))},
    };
    DescentData dd;
    dd.gens = tw.group_generators();
    for (const auto& g : dd.gens) {
        auto zp = [&](long long kk) {
            kk %= tw.e;
            if (kk < 0) kk += tw.e;
            return tw.k.pow(g.zeta, kk);
        };
        dd.mats.push_back({
            {TruncPoly::constant(tw, zp(x.k1)), TruncPoly::zero(tw)},
            {TruncPoly::zero(tw), TruncPoly::constant(tw, zp(x.k2))},
        });
    }
    return {std::move(m), std::move(dd)};
}

// Split criterion for the descended representation: r > s and c = d.
inline bool is_split(const Rank2Ext& x) {
    return x.r > x.s && x.c == x.d;
}

// The witness map M(0,a,c) -> M(r,a,c;s,b,d;n,1) that exhibits splitness.
inline Morphism split_witness(const Rank2Ext& x) {
    const TameTower& tw = *x.tw;
    if (!is_split(x)) throw DomainError("split_witness: module is not split");
    const int ab = tw.k.sub(1, tw.k.div(tw.embed(x.a), tw.embed(x.b)));
    Morphism f;
    f.mat = {{TruncPoly::monomial(tw, 1, tw.l * tw.xprime(x.s)),
              TruncPoly::monomial(tw, ab, tw.l * tw.xprime(x.r))}};
    return f;
}

// Generic fibre isomorphism criterion for a map between rank-2 modules of
// triangular monomial shape; falls back to a kernel computation otherwise.
inline bool generic_fibre_iso(const TameTower& tw, const Morphism& f) {
    auto monomial_data = [&](const TruncPoly& p) -> std::optional<std::pair<int, int>> {
        int deg = -1;
        for (int i = 0; i < p.n; ++i)
            if (p.c[i]) {
                if (deg >= 0) return std::nullopt;
                deg = i;
            }
        if (deg < 0) return std::make_pair(-1, 0); // zero
        return std::make_pair(deg, static_cast<int>(p.c[deg]));
    };
    if (f.mat.size() == 2 && f.mat[0].size() == 2) {
        auto p00 = monomial_data(f.mat[0][0]);
        auto p01 = monomial_data(f.mat[0][1]);
        auto p10 = monomial_data(f.mat[1][0]);
        auto p11 = monomial_data(f.mat[1][1]);
        if (p00 && p01 && p10 && p11 && p01->first < 0 && p00->first >= 0 && p11->first >= 0) {
            const int alpha = p00->first, gamma = p11->first;
            const int kill = p10->first < 0 ? std::max(alpha, gamma)
                                            : std::max(gamma, alpha + gamma - p10->first);
            return kill < tw.N;
        }
    }
    const int rank_from = static_cast<int>(f.mat.size());
    FlMatrix m = morphism_flmatrix(tw, rank_from, f);
    for (const auto& v : kernel_basis(m)) {
        PolyVec x = unflatten(tw, rank_from, v);
        for (const auto& p : x)
            if (p.eval0() != 0) return false; // kernel contains a free submodule
    }
    return true;
}

// Map N1 -> N2 that is an isomorphism on generic fibres; exists iff sub and
// quotient data agree and r <= r1, s <= s1.
inline std::optional<Morphism> hom_rank2(const Rank2Ext& x1, const Rank2Ext& x2) {
    const TameTower& tw = *x1.tw;
    if (x1.tw != x2.tw) throw DomainError("hom_rank2: tower mismatch");
    if (!(x1.a == x2.a && x1.c == x2.c && x1.b == x2.b && x1.d == x2.d)) return std::nullopt;
    if (x1.r > x2.r || x1.s > x2.s) return std::nullopt;
    const int k1v = stratum_k(x1), k2v = stratum_k(x2);
    const Field& k = tw.k;
    Morphism f;
    if (k1v == k2v) {
        const int ds = tw.l * (tw.xprime(x2.s) - tw.xprime(x1.s));
        const int dr = tw.l * (tw.xprime(x2.r) - tw.xprime(x1.r));
        f.mat = {{TruncPoly::monomial(tw, 1, ds), TruncPoly::zero(tw)},
                 {TruncPoly::zero(tw), TruncPoly::monomial(tw, 1, dr)}};
    } else if (k1v == 1 && k2v == tw.l) {
        // Into the exceptional corner (r2, s2) = (0, l^2 - 1); forces r1 = 0.
        const int ab = k.div(tw.embed(x1.b), tw.embed(x1.a));
        f.mat = {{TruncPoly::monomial(tw, 1, tw.l * (tw.l + 1 - tw.xprime(x1.s))), TruncPoly::zero(tw)},
                 {TruncPoly::constant(tw, ab), TruncPoly::constant(tw, ab)}};
    } else if (k1v == tw.l && k2v == 1) {
        // Out of the exceptional corner; s2 = l^2 - 1.
        const int ba = k.div(tw.embed(x1.a), tw.embed(x1.b));
        f.mat = {{TruncPoly::constant(tw, 1), TruncPoly::zero(tw)},
                 {TruncPoly::constant(tw, k.neg(1)),
                  TruncPoly::monomial(tw, ba, tw.l * tw.xprime(x2.r))}};
    } else {
        return std::nullopt;
    }
    auto A = to_breuil(x1);
    auto B = to_breuil(x2);
    if (!validate_morphism(A.first, &A.second, B.first, &B.second, f).empty())
        throw InvariantError("hom_rank2: constructed map fails the morphism axioms");
    return f;
}

// ---------------------------------------------------------------------------
// Lattices of integral models.
// ---------------------------------------------------------------------------

struct LatticeReport {
    int k = 0;
    std::vector<Rank2Ext> modules;
    std::vector<std::vector<char>> hom; // hom[i][j]: map modules[i] -> modules[j]
    int max_index = -1;
    int min_index = -1;
    std::optional<bool> peu_ramifie;
};

inline LatticeReport lattice(const TameTower& tw, int kk, int a, int b, int c, int d) {
    if (!is_eprime_preset(tw)) throw DomainError("lattice: E' preset required");
    if (kk < 0 || kk > tw.l) throw DomainError("lattice: k out of range");
    long long want = ((d - c) % (tw.l - 1) + tw.l - 1) % (tw.l - 1);
    if (want != (kk % (tw.l - 1) + tw.l - 1) % (tw.l - 1))
        throw DomainError("lattice: k is not congruent to d - c mod l-1");
    if (want == 0 && a == b) throw DomainError("lattice: a = b with c = d violates the centralizer condition");
    LatticeReport rep;
    rep.k = kk;
    auto try_pair = [&](int rp, int sp) {
        auto x = make_ext_eprime(tw, rp * (tw.l - 1), a, c, sp * (tw.l - 1), b, d);
        if (x && stratum_k(*x) != kk && !(kk == 1 && rp == 0 && sp == tw.l + 1)) return;
        if (x) rep.modules.push_back(*x);
    };
    if (kk == 0) {
        for (int rp = 0; rp <= tw.l + 1; ++rp)
            for (int sp = 0; sp < rp; ++sp) try_pair(rp, sp);
    } else if (kk == tw.l) {
        try_pair(0, tw.l + 1);
    } else {
        for (int rp = 0; rp <= tw.l - kk; ++rp)
            for (int sp = kk + 1; sp <= tw.l + 1; ++sp) try_pair(rp, sp);
    }
    const size_t nmod = rep.modules.size();
    rep.hom.assign(nmod, std::vector<char>(nmod, 0));
    for (size_t i = 0; i < nmod; ++i)
        for (size_t j = 0; j < nmod; ++j) rep.hom[i][j] = hom_rank2(rep.modules[i], rep.modules[j]).has_value();
    for (size_t i = 0; i < nmod; ++i) {
        bool is_max = true, is_min = true;
        for (size_t j = 0; j < nmod; ++j) {
            is_max &= rep.hom[j][i];
            is_min &= rep.hom[i][j];
        }
        if (is_max) rep.max_index = static_cast<int>(i);
        if (is_min) rep.min_index = static_cast<int>(i);
    }
    if (kk == 1 || kk == tw.l) rep.peu_ramifie = true;
    return rep;
}

} // namespace breuilkit
