#pragma once

// The coefficient ring k[u]/u^(e_K l) with its tame Galois action, and the
// split model of G = Gal(K/L).  A group element (t, zeta) acts on
// coefficients through the relative Frobenius power t and sends u to zeta*u.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "breuilkit/errors.hpp"
#include "breuilkit/gfq.hpp"

namespace breuilkit {

class TameTower;

struct GroupElem {
    int t = 0;    // power of the relative Frobenius on coefficients
    int zeta = 1; // k-index of g(pi)/pi, an e-th root of unity

    bool operator==(const GroupElem& o) const { return t == o.t && zeta == o.zeta; }
    bool operator!=(const GroupElem& o) const { return !(*this == o); }
};

class TameTower {
  public:
    int l, e, f_rel, e_L, f_L;
    int e_K, f_K, N;
    int d0, e_prime, lm1_prime;
    long long U = 1, V_param = 0;
    Field k;
    Field kL;
    std::vector<int> kl_embed; // kL index -> k index
    int zeta_e;                // fixed primitive e-th root of unity in k
    bool pi_rel;               // uniformizer relation pi^{e_K} = -l declared
    int gpi_res;               // residue of G_pi when pi_rel holds (= -1)

    TameTower(int l_, int e_, int f_rel_, int e_L_, int f_L_, bool declared_minus_l)
        : l(l_), e(e_), f_rel(f_rel_), e_L(e_L_), f_L(f_L_),
          e_K(e_ * e_L_), f_K(f_rel_ * f_L_), N(e_ * e_L_ * l_),
          k(l_, f_rel_ * f_L_), kL(l_, f_L_), pi_rel(declared_minus_l) {
        if (e < 1 || f_rel < 1 || e_L < 1 || f_L < 1) throw DomainError("TameTower: invariants must be positive");
        if (e % l == 0) throw DomainError("TameTower: extension is not tame (l divides e)");
        if ((k.q - 1) % e != 0)
            throw DomainError("TameTower: mu_e is not contained in k; no split tame model");
        d0 = std::gcd(l - 1, e);
        e_prime = e / d0;
        lm1_prime = (l - 1) / d0;
        // Least positive U with U*(l-1)' = 1 mod e'; then V from the exact identity.
        U = 1;
        while ((U * lm1_prime) % e_prime != 1 % e_prime) ++U;
        V_param = (U * lm1_prime - 1) / e_prime;
        if (U * lm1_prime != 1 + V_param * e_prime) throw InvariantError("TameTower: U(l-1)' = 1 + Ve' fails");
        zeta_e = k.pow(k.g0, (static_cast<long long>(k.q) - 1) / e);
        gpi_res = pi_rel ? k.neg(1) : 0;
        build_embedding();
    }

    TameTower(const TameTower&) = delete;
    TameTower& operator=(const TameTower&) = delete;

    static TameTower eprime(int l) { return TameTower(l, l * l - 1, 2, 1, 1, true); }
    static TameTower unramified(int l, int f_rel) { return TameTower(l, 1, f_rel, 1, 1, true); }
    static TameTower ramified(int l, int e) { return TameTower(l, e, 1, 1, 1, true); }

    // x' = x / (l-1, e); using it asserts the divisibility.
    int xprime(int x) const {
        if (x % d0 != 0) throw DomainError("x' used on an x not divisible by (l-1, e)");
        return x / d0;
    }

    int zeta_pow(long long i) const {
        long long r = i % e;
        if (r < 0) r += e;
        return k.pow(zeta_e, r);
    }

    int embed(int a_kL) const { return kl_embed[a_kL]; }

    // --- group model -------------------------------------------------------
    GroupElem gidentity() const { return {0, 1}; }

    int coeff_act(const GroupElem& g, int a) const { return k.frob_pow(a, g.t * f_L); }

    GroupElem gcompose(const GroupElem& g, const GroupElem& h) const {
        return {(g.t + h.t) % f_rel, k.mul(g.zeta, coeff_act(g, h.zeta))};
    }

    GroupElem ginverse(const GroupElem& g) const {
        int ti = (f_rel - g.t) % f_rel;
        GroupElem gi{ti, 1};
        gi.zeta = k.inv(coeff_act(gi, g.zeta));
        return gi;
    }

    std::vector<GroupElem> group_generators() const {
        std::vector<GroupElem> gens;
        if (f_rel > 1) gens.push_back({1, 1});
        if (e > 1) gens.push_back({0, zeta_e});
        return gens;
    }

    std::vector<GroupElem> group_elements() const {
        std::vector<GroupElem> els;
        els.reserve(static_cast<size_t>(e) * f_rel);
        for (int t = 0; t < f_rel; ++t) {
            int z = 1;
            for (int j = 0; j < e; ++j) {
                els.push_back({t, z});
                z = k.mul(z, zeta_e);
            }
        }
        return els;
    }

    int group_index(const GroupElem& g) const {
        int z = 1;
        for (int j = 0; j < e; ++j) {
            if (z == g.zeta) return g.t * e + j;
            z = k.mul(z, zeta_e);
        }
        throw DomainError("group_index: zeta is not an e-th root of unity");
    }

  private:
    void build_embedding() {
        kl_embed.assign(kL.q, 0);
        if (f_L == 1) {
            for (int a = 0; a < l; ++a) kl_embed[a] = a;
            return;
        }
        // Least root of kL's modulus inside k gives the embedding.
        int alpha = -1;
        for (int x = 0; x < k.q; ++x) {
            int acc = 0, p = 1;
            for (size_t d = 0; d < kL.modulus.size(); ++d) {
                acc = k.add(acc, k.mul(kL.modulus[d] % l, p));
                p = k.mul(p, x);
            }
            if (acc == 0) { alpha = x; break; }
        }
        if (alpha < 0) throw InvariantError("TameTower: kL does not embed into k");
        for (int a = 0; a < kL.q; ++a) {
            int img = 0, p = 1;
            for (int d = 0; d < f_L; ++d) {
                img = k.add(img, k.mul(kL.digit(a, d), p));
                p = k.mul(p, alpha);
            }
            kl_embed[a] = img;
        }
    }
};

// Element of k[u]/u^n.  n defaults to the tower's N = e_K*l; Galois
// cohomology also works at smaller truncation levels.
struct TruncPoly {
    const TameTower* tw = nullptr;
    int n = 0;
    std::vector<uint16_t> c; // k-indices, length n

    TruncPoly() = default;
    TruncPoly(const TameTower& t, int level) : tw(&t), n(level), c(level, 0) {}

    static TruncPoly zero(const TameTower& t, int level = -1) {
        return TruncPoly(t, level < 0 ? t.N : level);
    }
    static TruncPoly constant(const TameTower& t, int a, int level = -1) {
        TruncPoly p(t, level < 0 ? t.N : level);
        if (p.n > 0) p.c[0] = static_cast<uint16_t>(a);
        return p;
    }
    static TruncPoly monomial(const TameTower& t, int a, int deg, int level = -1) {
        TruncPoly p(t, level < 0 ? t.N : level);
        if (deg < p.n) p.c[deg] = static_cast<uint16_t>(a);
        return p;
    }

    bool is_zero() const {
        for (auto x : c)
            if (x) return false;
        return true;
    }
    bool is_unit() const { return n > 0 && c[0] != 0; }
    int eval0() const { return n > 0 ? c[0] : 0; }
    // Lowest nonzero degree, or n if zero.
    int val() const {
        for (int i = 0; i < n; ++i)
            if (c[i]) return i;
        return n;
    }
    int deg() const {
        for (int i = n - 1; i >= 0; --i)
            if (c[i]) return i;
        return -1;
    }

    bool operator==(const TruncPoly& o) const { return n == o.n && c == o.c; }
    bool operator!=(const TruncPoly& o) const { return !(*this == o); }

    TruncPoly operator+(const TruncPoly& o) const {
        check(o);
        TruncPoly r(*tw, n);
        for (int i = 0; i < n; ++i) r.c[i] = static_cast<uint16_t>(tw->k.add(c[i], o.c[i]));
        return r;
    }
    TruncPoly operator-(const TruncPoly& o) const {
        check(o);
        TruncPoly r(*tw, n);
        for (int i = 0; i < n; ++i) r.c[i] = static_cast<uint16_t>(tw->k.sub(c[i], o.c[i]));
        return r;
    }
    TruncPoly operator-() const {
        TruncPoly r(*tw, n);
        for (int i = 0; i < n; ++i) r.c[i] = static_cast<uint16_t>(tw->k.neg(c[i]));
        return r;
    }
    TruncPoly operator*(const TruncPoly& o) const {
        check(o);
        TruncPoly r(*tw, n);
        const Field& k = tw->k;
        for (int i = 0; i < n; ++i) {
            if (!c[i]) continue;
            for (int j = 0; j + i < n; ++j) {
                if (!o.c[j]) continue;
                r.c[i + j] = static_cast<uint16_t>(k.add(r.c[i + j], k.mul(c[i], o.c[j])));
            }
        }
        return r;
    }

    TruncPoly scaled(int a) const {
        TruncPoly r(*tw, n);
        for (int i = 0; i < n; ++i) r.c[i] = static_cast<uint16_t>(tw->k.mul(c[i], a));
        return r;
    }
    TruncPoly shifted(int m) const { // multiply by u^m
        TruncPoly r(*tw, n);
        for (int i = 0; i + m < n; ++i) r.c[i + m] = c[i];
        return r;
    }
    // Exact division by u^m; requires val >= m.
    TruncPoly div_u(int m) const {
        for (int i = 0; i < std::min(m, n); ++i)
            if (c[i]) throw DomainError("div_u: not divisible");
        TruncPoly r(*tw, n);
        for (int i = m; i < n; ++i) r.c[i - m] = c[i];
        return r;
    }
    // P -> P^l; Frobenius on coefficients, degrees multiplied by l.
    TruncPoly pow_l() const {
        TruncPoly r(*tw, n);
        for (int i = 0; static_cast<long long>(i) * tw->l < n && i < n; ++i)
            if (c[i]) r.c[static_cast<size_t>(i) * tw->l] = static_cast<uint16_t>(tw->k.frob(c[i]));
        return r;
    }
    TruncPoly inverse() const {
        if (!is_unit()) throw DomainError("TruncPoly: inverse of a non-unit");
        TruncPoly r(*tw, n);
        const Field& k = tw->k;
        const int c0i = k.inv(c[0]);
        r.c[0] = static_cast<uint16_t>(c0i);
        for (int m = 1; m < n; ++m) {
            int s = 0;
            for (int t = 1; t <= m; ++t) {
                if (!c[t] || !r.c[m - t]) continue;
                s = k.add(s, k.mul(c[t], r.c[m - t]));
            }
            if (s) r.c[m] = static_cast<uint16_t>(k.mul(k.neg(s), c0i));
        }
        return r;
    }

  private:
    void check(const TruncPoly& o) const {
        if (tw != o.tw || n != o.n) throw DomainError("TruncPoly: tower or truncation mismatch");
    }
};

// The tame Galois action: sum a_i u^i -> sum g(a_i) zeta^i u^i.
inline TruncPoly act(const TameTower& tw, const GroupElem& g, const TruncPoly& f) {
    if (f.tw != &tw) throw DomainError("act: tower mismatch");
    TruncPoly r(tw, f.n);
    int zp = 1;
    for (int i = 0; i < f.n; ++i) {
        if (f.c[i]) r.c[i] = static_cast<uint16_t>(tw.k.mul(tw.coeff_act(g, f.c[i]), zp));
        zp = tw.k.mul(zp, g.zeta);
    }
    return r;
}

// True iff the abstract group generated by the split model has order e*f_rel
// and the expected presentation relations hold.
inline bool group_order_check(const TameTower& tw) {
    std::vector<GroupElem> els = tw.group_elements();
    if (static_cast<int>(els.size()) != tw.e * tw.f_rel) return false;
    // Closure and identity.
    auto find = [&](const GroupElem& g) {
        return std::find(els.begin(), els.end(), g) != els.end();
    };
    for (const auto& g : els)
        for (const auto& h : els)
            if (!find(tw.gcompose(g, h))) return false;
    GroupElem id = tw.gidentity();
    for (const auto& g : els) {
        if (tw.gcompose(g, tw.ginverse(g)) != id) return false;
        if (tw.gcompose(tw.gidentity(), g) != g) return false;
    }
    // Inertia generator has order e; Frobenius relation phi g phi^{-1} = g^l.
    GroupElem gz{0, tw.zeta_e};
    GroupElem acc = id;
    for (int i = 0; i < tw.e; ++i) acc = tw.gcompose(acc, gz);
    if (acc != id) return false;
    if (tw.f_rel > 1) {
        GroupElem phi{1, 1};
        GroupElem lhs = tw.gcompose(phi, tw.gcompose(gz, tw.ginverse(phi)));
        GroupElem rhs{0, tw.k.frob_pow(tw.zeta_e, tw.f_L)}; // g_{zeta^(l^{f_L})}
        if (lhs != rhs) return false;
    }
    return true;
}

inline bool fixed_subring_test(const TameTower& tw, const TruncPoly& f) {
    for (const auto& g : tw.group_generators())
        if (act(tw, g, f) != f) return false;
    return true;
}

} // namespace breuilkit
