#pragma once

// Exact arithmetic in F_{l^f} for small odd primes l.  Elements are indices
// in [0, q): the element sum c_i x^i has index sum c_i l^i, so the prime
// subfield occupies indices 0..l-1 and index order is the enumeration order
// used everywhere a "least" element has to be picked.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "breuilkit/errors.hpp"
#include "breuilkit/exactlin.hpp"

namespace breuilkit {

namespace gfq_detail {

inline bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Polynomials over F_l as coefficient vectors, low degree first.
inline std::vector<int> poly_mulmod(const std::vector<int>& a, const std::vector<int>& b,
                                    const std::vector<int>& mod, int l) {
    const int f = static_cast<int>(mod.size()) - 1;
    std::vector<int> prod(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (size_t j = 0; j < b.size(); ++j) prod[i + j] = (prod[i + j] + a[i] * b[j]) % l;
    }
    for (int d = static_cast<int>(prod.size()) - 1; d >= f; --d) {
        const int c = prod[d];
        if (!c) continue;
        prod[d] = 0;
        for (int j = 0; j < f; ++j) {
            int v = (prod[d - f + j] - c * mod[j]) % l;
            if (v < 0) v += l;
            prod[d - f + j] = v;
        }
    }
    prod.resize(f, 0);
    return prod;
}

inline std::vector<int> poly_powmod(std::vector<int> base, long long e, const std::vector<int>& mod, int l) {
    std::vector<int> r(mod.size() - 1, 0);
    r[0] = 1;
    while (e) {
        if (e & 1) r = poly_mulmod(r, base, mod, l);
        base = poly_mulmod(base, base, mod, l);
        e >>= 1;
    }
    return r;
}

inline std::vector<int> poly_gcd(std::vector<int> a, std::vector<int> b, int l) {
    auto deg = [](const std::vector<int>& p) {
        for (int d = static_cast<int>(p.size()) - 1; d >= 0; --d)
            if (p[d]) return d;
        return -1;
    };
    while (deg(b) >= 0) {
        int da = deg(a), db = deg(b);
        if (da < db) { std::swap(a, b); continue; }
        const int inv = fl::inv_mod(b[db], l);
        const int c = a[da] * inv % l;
        for (int j = 0; j <= db; ++j) {
            int v = (a[da - db + j] - c * b[j]) % l;
            if (v < 0) v += l;
            a[da - db + j] = v;
        }
    }
    return a;
}

inline bool poly_irreducible(const std::vector<int>& m, int l) {
    const int f = static_cast<int>(m.size()) - 1;
    std::vector<int> x(f, 0);
    if (f == 1) return true;
    x[1 % f] = 1;
    // x^(l^f) == x mod m, and gcd(x^(l^(f/p)) - x, m) = 1 for primes p | f.
    long long q = 1;
    for (int i = 0; i < f; ++i) q *= l;
    std::vector<int> xq = poly_powmod(x, q, m, l);
    if (xq != x) return false;
    for (int p = 2; p <= f; ++p) {
        if (f % p || !is_prime(p)) continue;
        long long qp = 1;
        for (int i = 0; i < f / p; ++i) qp *= l;
        std::vector<int> t = poly_powmod(x, qp, m, l);
        for (int j = 0; j < f; ++j) {
            t[j] = (t[j] - x[j]) % l;
            if (t[j] < 0) t[j] += l;
        }
        std::vector<int> g = poly_gcd(m, t, l);
        int dg = -1;
        for (int d = static_cast<int>(g.size()) - 1; d >= 0; --d)
            if (g[d]) { dg = d; break; }
        if (dg != 0) return false;
    }
    return true;
}

} // namespace gfq_detail

class Field {
  public:
    int l = 0;
    int f = 0;
    int q = 0;
    std::vector<int> modulus; // monic, length f+1, low degree first
    int g0 = 0;               // least generator of the multiplicative group

    Field(int l_, int f_) : l(l_), f(f_) {
        if (!gfq_detail::is_prime(l) || l == 2) throw DomainError("Field: l must be an odd prime");
        if (f < 1) throw DomainError("Field: extension degree must be >= 1");
        long long qq = 1;
        for (int i = 0; i < f; ++i) qq *= l;
        if (qq > 4096) throw GuardError("Field: l^f too large for table-based arithmetic");
        q = static_cast<int>(qq);
        pick_modulus();
        build_tables();
    }

    Field(const Field&) = delete;
    Field& operator=(const Field&) = delete;

    bool same_as(const Field& o) const { return l == o.l && f == o.f; }

    // --- index-level arithmetic ------------------------------------------
    int add(int a, int b) const { return addt_[static_cast<size_t>(a) * q + b]; }
    int sub(int a, int b) const { return add(a, negt_[b]); }
    int neg(int a) const { return negt_[a]; }
    int mul(int a, int b) const {
        if (!a || !b) return 0;
        return expt_[logt_[a] + logt_[b]];
    }
    int inv(int a) const {
        if (!a) throw DomainError("Field: inverse of zero");
        return invt_[a];
    }
    int div(int a, int b) const { return mul(a, inv(b)); }
    int frob(int a) const { return frobt_[a]; }
    int frob_pow(int a, int t) const {
        t %= f;
        if (t < 0) t += f;
        for (int i = 0; i < t; ++i) a = frobt_[a];
        return a;
    }
    int pow(int a, long long e) const {
        if (!a) {
            if (e == 0) return 1;
            if (e < 0) throw DomainError("Field: 0 to a negative power");
            return 0;
        }
        long long o = q - 1;
        long long k = (logt_[a] * (e % o)) % o;
        if (k < 0) k += o;
        return expt_[k];
    }
    int from_int(long long c) const {
        c %= l;
        if (c < 0) c += l;
        return static_cast<int>(c);
    }
    int digit(int a, int d) const {
        for (int i = 0; i < d; ++i) a /= l;
        return a % l;
    }
    int from_digits(const std::vector<int16_t>& digits) const {
        int a = 0;
        for (int d = f - 1; d >= 0; --d) a = a * l + digits[d] % l;
        return a;
    }
    long long mult_order(int a) const {
        if (!a) throw DomainError("Field: order of zero");
        long long o = q - 1;
        int lg = logt_[a];
        return o / std::gcd<long long>(o, lg == 0 ? o : lg);
    }
    bool in_prime_field(int a) const { return a < l; }

    // x in (F_q^*)^d, tested by the power criterion.
    bool is_power_residue(int x, long long d) const {
        if (!x) throw DomainError("is_power_residue: x must be nonzero");
        if (d <= 0) throw DomainError("is_power_residue: d must be positive");
        long long g = std::gcd<long long>(d, q - 1);
        return pow(x, (q - 1) / g) == 1;
    }

    // Least x (in index order) with x - c*x^l = h, if any.
    std::optional<int> solve_x_minus_cxl(int c, int h) const {
        FlMatrix m(l, f, f);
        for (int j = 0; j < f; ++j) {
            int bj = 1;
            for (int i = 0; i < j; ++i) bj *= l; // basis element x^j
            const int img = sub(bj, mul(c, frob(bj)));
            for (int d = 0; d < f; ++d) m.at(d, j) = static_cast<int16_t>(digit(img, d));
        }
        std::vector<int16_t> rhs(f);
        for (int d = 0; d < f; ++d) rhs[d] = static_cast<int16_t>(digit(h, d));
        auto part = solve(m, rhs);
        if (!part) return std::nullopt;
        auto ker = kernel_basis(m);
        int best = from_digits(*part);
        // The kernel is at most one-dimensional, but sweep generally.
        std::vector<int> combo(ker.size(), 0);
        auto value = [&]() {
            int v = from_digits(*part);
            for (size_t i = 0; i < ker.size(); ++i)
                for (int rep = 0; rep < combo[i]; ++rep) v = add(v, from_digits(ker[i]));
            return v;
        };
        while (true) {
            best = std::min(best, value());
            size_t i = 0;
            while (i < combo.size() && combo[i] == l - 1) combo[i++] = 0;
            if (i == combo.size()) break;
            ++combo[i];
        }
        return best;
    }

  private:
    std::vector<uint16_t> addt_, expt_, frobt_, negt_, invt_;
    std::vector<int> logt_;

    void pick_modulus() {
        if (f == 1) {
            modulus = {0, 1};
            return;
        }
        // Least monic irreducible, ordered by the coefficient word
        // (a_{f-1}, ..., a_0).
        for (int code = 0; code < q; ++code) {
            std::vector<int> m(f + 1, 0);
            m[f] = 1;
            int c = code;
            for (int d = 0; d < f; ++d) {
                m[d] = c % l;
                c /= l;
            }
            if (gfq_detail::poly_irreducible(m, l)) {
                modulus = m;
                return;
            }
        }
        throw InvariantError("Field: no irreducible modulus found");
    }

    std::vector<int> idx_to_poly(int a) const {
        std::vector<int> p(f, 0);
        for (int d = 0; d < f; ++d) {
            p[d] = a % l;
            a /= l;
        }
        return p;
    }
    int poly_to_idx(const std::vector<int>& p) const {
        int a = 0;
        for (int d = f - 1; d >= 0; --d) a = a * l + p[d];
        return a;
    }

    void build_tables() {
        addt_.assign(static_cast<size_t>(q) * q, 0);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                int s = 0, base = 1, x = a, y = b;
                for (int d = 0; d < f; ++d) {
                    s += (x % l + y % l) % l * base;
                    base *= l;
                    x /= l;
                    y /= l;
                }
                addt_[static_cast<size_t>(a) * q + b] = static_cast<uint16_t>(s);
            }
        auto raw_mul = [&](int a, int b) {
            return poly_to_idx(gfq_detail::poly_mulmod(idx_to_poly(a), idx_to_poly(b), modulus, l));
        };
        // Least generator of F_q^*.
        std::vector<long long> prime_factors;
        long long m = q - 1;
        for (long long p = 2; p * p <= m; ++p)
            if (m % p == 0) {
                prime_factors.push_back(p);
                while (m % p == 0) m /= p;
            }
        if (m > 1) prime_factors.push_back(m);
        auto raw_pow = [&](int a, long long e) {
            int r = 1;
            while (e) {
                if (e & 1) r = raw_mul(r, a);
                a = raw_mul(a, a);
                e >>= 1;
            }
            return r;
        };
        g0 = 0;
        for (int cand = 1; cand < q; ++cand) {
            bool gen = true;
            for (long long p : prime_factors)
                if (raw_pow(cand, (q - 1) / p) == 1) { gen = false; break; }
            if (gen) { g0 = cand; break; }
        }
        if (!g0) throw InvariantError("Field: no multiplicative generator");
        expt_.assign(2 * (q - 1), 0);
        logt_.assign(q, 0);
        int cur = 1;
        for (int i = 0; i < q - 1; ++i) {
            expt_[i] = static_cast<uint16_t>(cur);
            expt_[i + q - 1] = static_cast<uint16_t>(cur);
            logt_[cur] = i;
            cur = raw_mul(cur, g0);
        }
        negt_.assign(q, 0);
        invt_.assign(q, 0);
        frobt_.assign(q, 0);
        for (int a = 0; a < q; ++a) {
            int n = 0, base = 1, x = a;
            for (int d = 0; d < f; ++d) {
                n += (l - x % l) % l * base;
                base *= l;
                x /= l;
            }
            negt_[a] = static_cast<uint16_t>(n);
            if (a) invt_[a] = expt_[(q - 1 - logt_[a]) % (q - 1)];
        }
        for (int a = 0; a < q; ++a) frobt_[a] = static_cast<uint16_t>(pow_by_log(a, l));
    }

    int pow_by_log(int a, long long e) const {
        if (!a) return 0;
        long long o = q - 1;
        long long k = (logt_[a] * (e % o)) % o;
        return expt_[k];
    }
};

// Value-type wrapper used where reading arithmetic as formulas matters more
// than raw speed.
struct FqElem {
    const Field* F = nullptr;
    int v = 0;

    FqElem() = default;
    FqElem(const Field& fld, int idx) : F(&fld), v(idx) {}

    FqElem operator+(FqElem o) const { return {*F, F->add(v, o.v)}; }
    FqElem operator-(FqElem o) const { return {*F, F->sub(v, o.v)}; }
    FqElem operator*(FqElem o) const { return {*F, F->mul(v, o.v)}; }
    FqElem operator/(FqElem o) const { return {*F, F->div(v, o.v)}; }
    FqElem operator-() const { return {*F, F->neg(v)}; }
    bool operator==(FqElem o) const { return v == o.v; }
    bool operator!=(FqElem o) const { return v != o.v; }
    FqElem frob() const { return {*F, F->frob(v)}; }
    FqElem pow(long long e) const { return {*F, F->pow(v, e)}; }
    bool is_zero() const { return v == 0; }
};

inline FqElem frobenius(FqElem x) { return x.frob(); }
inline bool is_power_residue(FqElem x, long long d) { return x.F->is_power_residue(x.v, d); }
inline std::optional<FqElem> solve_x_minus_cxl(FqElem c, FqElem h) {
    auto r = c.F->solve_x_minus_cxl(c.v, h.v);
    if (!r) return std::nullopt;
    return FqElem(*c.F, *r);
}

} // namespace breuilkit
