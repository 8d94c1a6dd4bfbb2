#pragma once

// Breuil modules with tame descent data: representation, axiom validators,
// the mod-u Dieudonne reduction, exactness checks, and a linear-algebra hom
// solver.  Everything reduces to F_l-linear algebra because x -> x^l is
// F_l-linear on coefficients.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "breuilkit/cohom.hpp"
#include "breuilkit/exactlin.hpp"
#include "breuilkit/upoly.hpp"

namespace breuilkit {

using PolyVec = std::vector<TruncPoly>;

inline PolyVec pv_zero(const TameTower& tw, int rank) {
    return PolyVec(rank, TruncPoly::zero(tw));
}
inline PolyVec pv_add(const PolyVec& a, const PolyVec& b) {
    PolyVec r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] + b[i];
    return r;
}
inline PolyVec pv_sub(const PolyVec& a, const PolyVec& b) {
    PolyVec r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] - b[i];
    return r;
}
inline PolyVec pv_mul(const PolyVec& a, const TruncPoly& h) {
    PolyVec r = a;
    for (auto& p : r) p = p * h;
    return r;
}
inline bool pv_is_zero(const PolyVec& a) {
    for (const auto& p : a)
        if (!p.is_zero()) return false;
    return true;
}

// Canonical expression of elements of a k[u]/u^N-submodule in terms of its
// generators.  Pivots are chosen by lowest u-valuation, ties broken by
// column then row index; the forward solve below is exact over the chain
// ring k[u]/u^N.
class SpanSolver {
  public:
    SpanSolver(const TameTower& tw, std::vector<PolyVec> gens) : tw_(&tw), ngens_(gens.size()) {
        std::vector<std::vector<TruncPoly>> expr(gens.size());
        for (size_t i = 0; i < gens.size(); ++i) {
            expr[i].assign(gens.size(), TruncPoly::zero(tw));
            expr[i][i] = TruncPoly::constant(tw, 1);
        }
        std::vector<char> active(gens.size(), 1);
        while (true) {
            int prow = -1, pcol = -1, pval = tw.N;
            for (size_t r = 0; r < gens.size(); ++r) {
                if (!active[r]) continue;
                for (size_t c = 0; c < gens[r].size(); ++c) {
                    const int v = gens[r][c].val();
                    if (v < pval || (v == pval && (pcol < 0 || static_cast<int>(c) < pcol))) {
                        if (v < tw.N) { pval = v; prow = static_cast<int>(r); pcol = static_cast<int>(c); }
                    }
                }
            }
            if (prow < 0) break;
            const TruncPoly unit = gens[prow][pcol].div_u(pval);
            const TruncPoly unit_inv = unit.inverse();
            for (size_t r = 0; r < gens.size(); ++r) {
                if (!active[r] || static_cast<int>(r) == prow) continue;
                const TruncPoly& entry = gens[r][pcol];
                if (entry.val() >= tw.N) continue;
                const TruncPoly quot = entry.div_u(pval) * unit_inv;
                for (size_t c = 0; c < gens[r].size(); ++c)
                    gens[r][c] = gens[r][c] - quot * gens[prow][c];
                for (size_t c = 0; c < expr[r].size(); ++c)
                    expr[r][c] = expr[r][c] - quot * expr[prow][c];
            }
            pivots_.push_back({gens[prow], expr[prow], pcol, pval});
            active[prow] = 0;
        }
    }

    // Coefficients (one per original generator) expressing x, or nullopt.
    std::optional<std::vector<TruncPoly>> express(PolyVec x) const {
        std::vector<TruncPoly> out(ngens_, TruncPoly::zero(*tw_));
        for (const auto& p : pivots_) {
            const TruncPoly& entry = x[p.col];
            if (entry.val() < p.val) return std::nullopt;
            if (entry.val() >= tw_->N) continue;
            const TruncPoly quot = entry.div_u(p.val) * p.vec[p.col].div_u(p.val).inverse();
            for (size_t c = 0; c < x.size(); ++c) x[c] = x[c] - quot * p.vec[c];
            for (size_t c = 0; c < out.size(); ++c) out[c] = out[c] + quot * p.expr[c];
        }
        if (!pv_is_zero(x)) return std::nullopt;
        return out;
    }

    bool contains(const PolyVec& x) const { return static_cast<bool>(express(x)); }

  private:
    struct Pivot {
        PolyVec vec;
        std::vector<TruncPoly> expr;
        int col;
        int val;
    };
    const TameTower* tw_;
    size_t ngens_;
    std::vector<Pivot> pivots_;
};

struct BreuilModule {
    const TameTower* tw = nullptr;
    int rank = 0;
    std::vector<PolyVec> m1_gens; // generators of M_1, coordinates in the standard basis
    std::vector<PolyVec> phi1;    // phi_1 images, one per generator
};

// Values of [g] on the standard basis for each group generator;
// mats[s][i] is [g_s](basis_i).
struct DescentData {
    std::vector<GroupElem> gens;
    std::vector<std::vector<PolyVec>> mats;
};

inline PolyVec apply_dd_mat(const TameTower& tw, const GroupElem& g,
                            const std::vector<PolyVec>& mat, const PolyVec& x) {
    PolyVec r = pv_zero(tw, static_cast<int>(mat.empty() ? x.size() : mat[0].size()));
    for (size_t i = 0; i < x.size(); ++i) {
        const TruncPoly tx = act(tw, g, x[i]);
        if (tx.is_zero()) continue;
        for (size_t j = 0; j < r.size(); ++j) r[j] = r[j] + tx * mat[i][j];
    }
    return r;
}

// Matrix of [g] o [h] given the matrices of [g] and [h].
inline std::vector<PolyVec> compose_dd(const TameTower& tw, const GroupElem& g,
                                       const std::vector<PolyVec>& mat_g,
                                       const std::vector<PolyVec>& mat_h) {
    std::vector<PolyVec> out(mat_h.size());
    for (size_t i = 0; i < mat_h.size(); ++i) out[i] = apply_dd_mat(tw, g, mat_g, mat_h[i]);
    return out;
}

// [g] for every element of G, built from the generator values.
inline std::vector<std::vector<PolyVec>> build_all_dd(const TameTower& tw, int rank, const DescentData& dd) {
    const auto els = tw.group_elements();
    std::vector<std::vector<PolyVec>> mats(els.size());
    std::vector<char> known(els.size(), 0);
    std::vector<PolyVec> id(rank, pv_zero(tw, rank));
    for (int i = 0; i < rank; ++i) id[i][i] = TruncPoly::constant(tw, 1);
    const int idx0 = tw.group_index(tw.gidentity());
    mats[idx0] = id;
    known[idx0] = 1;
    bool progress = true;
    while (progress) {
        progress = false;
        for (size_t gi = 0; gi < els.size(); ++gi) {
            if (!known[gi]) continue;
            for (size_t s = 0; s < dd.gens.size(); ++s) {
                const int ti = tw.group_index(tw.gcompose(dd.gens[s], els[gi]));
                if (known[ti]) continue;
                mats[ti] = compose_dd(tw, dd.gens[s], dd.mats[s], mats[gi]);
                known[ti] = 1;
                progress = true;
            }
        }
    }
    for (char kn : known)
        if (!kn) throw DomainError("build_all_dd: descent-data generators do not generate G");
    return mats;
}

inline std::optional<PolyVec> phi1_apply(const BreuilModule& m, const SpanSolver& span, const PolyVec& x) {
    auto expr = span.express(x);
    if (!expr) return std::nullopt;
    PolyVec r = pv_zero(*m.tw, m.rank);
    for (size_t i = 0; i < expr->size(); ++i) {
        const TruncPoly cl = (*expr)[i].pow_l();
        if (cl.is_zero()) continue;
        for (int j = 0; j < m.rank; ++j) r[j] = r[j] + cl * m.phi1[i][j];
    }
    return r;
}

// Rank of a matrix with entries in k (indices), plain elimination over k.
inline int krank(const Field& k, std::vector<uint16_t> a, int rows, int cols) {
    int rk = 0;
    for (int c = 0; c < cols && rk < rows; ++c) {
        int piv = -1;
        for (int r = rk; r < rows; ++r)
            if (a[static_cast<size_t>(r) * cols + c]) { piv = r; break; }
        if (piv < 0) continue;
        for (int cc = 0; cc < cols; ++cc)
            std::swap(a[static_cast<size_t>(rk) * cols + cc], a[static_cast<size_t>(piv) * cols + cc]);
        const int inv = k.inv(a[static_cast<size_t>(rk) * cols + c]);
        for (int cc = 0; cc < cols; ++cc)
            a[static_cast<size_t>(rk) * cols + cc] =
                static_cast<uint16_t>(k.mul(a[static_cast<size_t>(rk) * cols + cc], inv));
        for (int r = 0; r < rows; ++r) {
            if (r == rk) continue;
            const int f = a[static_cast<size_t>(r) * cols + c];
            if (!f) continue;
            for (int cc = 0; cc < cols; ++cc)
                a[static_cast<size_t>(r) * cols + cc] = static_cast<uint16_t>(
                    k.sub(a[static_cast<size_t>(r) * cols + cc],
                          k.mul(f, a[static_cast<size_t>(rk) * cols + cc])));
        }
        ++rk;
    }
    return rk;
}

// Solve y * P = rhs over k (y, rhs row vectors).  Returns nullopt if singular
// or inconsistent.
inline std::optional<std::vector<uint16_t>> ksolve_left(const Field& k, const std::vector<uint16_t>& P,
                                                        int n, const std::vector<uint16_t>& rhs) {
    // Transposed augmented elimination: P^T y^T = rhs^T.
    std::vector<uint16_t> a(static_cast<size_t>(n) * (n + 1), 0);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) a[static_cast<size_t>(r) * (n + 1) + c] = P[static_cast<size_t>(c) * n + r];
        a[static_cast<size_t>(r) * (n + 1) + n] = rhs[r];
    }
    int rk = 0;
    std::vector<int> pivcol(n, -1);
    for (int c = 0; c < n && rk < n; ++c) {
        int piv = -1;
        for (int r = rk; r < n; ++r)
            if (a[static_cast<size_t>(r) * (n + 1) + c]) { piv = r; break; }
        if (piv < 0) continue;
        for (int cc = 0; cc <= n; ++cc)
            std::swap(a[static_cast<size_t>(rk) * (n + 1) + cc], a[static_cast<size_t>(piv) * (n + 1) + cc]);
        const int inv = k.inv(a[static_cast<size_t>(rk) * (n + 1) + c]);
        for (int cc = 0; cc <= n; ++cc)
            a[static_cast<size_t>(rk) * (n + 1) + cc] =
                static_cast<uint16_t>(k.mul(a[static_cast<size_t>(rk) * (n + 1) + cc], inv));
        for (int r = 0; r < n; ++r) {
            if (r == rk) continue;
            const int f = a[static_cast<size_t>(r) * (n + 1) + c];
            if (!f) continue;
            for (int cc = 0; cc <= n; ++cc)
                a[static_cast<size_t>(r) * (n + 1) + cc] = static_cast<uint16_t>(
                    k.sub(a[static_cast<size_t>(r) * (n + 1) + cc],
                          k.mul(f, a[static_cast<size_t>(rk) * (n + 1) + cc])));
        }
        pivcol[rk] = c;
        ++rk;
    }
    std::vector<uint16_t> y(n, 0);
    for (int r = 0; r < rk; ++r) y[pivcol[r]] = a[static_cast<size_t>(r) * (n + 1) + n];
    for (int r = rk; r < n; ++r)
        if (a[static_cast<size_t>(r) * (n + 1) + n]) return std::nullopt;
    // Verify (guards the singular-but-consistent corner).
    for (int c = 0; c < n; ++c) {
        int s = 0;
        for (int i = 0; i < n; ++i) s = k.add(s, k.mul(y[i], P[static_cast<size_t>(i) * n + c]));
        if (s != rhs[c]) return std::nullopt;
    }
    return y;
}

// Dieudonne data on M/uM: row-image matrices of F, V, and of the fixed
// inertia generator.  F and V extend l- resp. l^{-1}-semilinearly.
struct DieudonneData {
    const TameTower* tw = nullptr;
    int dim = 0;
    std::vector<uint16_t> F, V, inertia; // dim x dim, k-indices
};

namespace breuil_detail {

inline std::vector<uint16_t> pv_mod_u(const PolyVec& x) {
    std::vector<uint16_t> r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = static_cast<uint16_t>(x[i].eval0());
    return r;
}

// Fixed, deterministic probe scalars for the semilinearity check.
inline std::vector<TruncPoly> semilinearity_probes(const TameTower& tw) {
    std::vector<TruncPoly> probes;
    probes.push_back(TruncPoly::monomial(tw, 1, 1));                       // u
    probes.push_back(TruncPoly::constant(tw, tw.k.g0));                    // g0
    probes.push_back(TruncPoly::constant(tw, 1) + TruncPoly::monomial(tw, 1, 1)); // 1+u
    probes.push_back(TruncPoly::monomial(tw, tw.k.g0, tw.e_K));            // g0 u^{e_K}
    return probes;
}

} // namespace breuil_detail

// Axiom validator.  Returns an empty list iff the module (and descent data,
// when provided) satisfies every axiom; each violation names the axiom.
inline std::vector<std::string> validate(const BreuilModule& m, const DescentData* dd = nullptr) {
    std::vector<std::string> bad;
    const TameTower& tw = *m.tw;
    if (m.rank <= 0 || m.m1_gens.empty() || m.m1_gens.size() != m.phi1.size()) {
        bad.push_back("shape: generator and image counts incoherent");
        return bad;
    }
    for (const auto& g : m.m1_gens)
        if (static_cast<int>(g.size()) != m.rank) { bad.push_back("shape: generator coordinate count"); return bad; }

    SpanSolver span(tw, m.m1_gens);

    // M_1 contains u^{e_K} M.
    for (int j = 0; j < m.rank; ++j) {
        PolyVec x = pv_zero(tw, m.rank);
        x[j] = TruncPoly::monomial(tw, 1, tw.e_K);
        if (!span.contains(x)) bad.push_back("m1-contains-ueK: u^{e_K} basis_" + std::to_string(j));
    }

    // phi_1 is l-semilinear and consistently defined: probe h * gen against
    // h^l * phi_1(gen) through the canonical expression.
    for (size_t i = 0; i < m.m1_gens.size(); ++i) {
        for (const auto& h : breuil_detail::semilinearity_probes(tw)) {
            auto lhs = phi1_apply(m, span, pv_mul(m.m1_gens[i], h));
            if (!lhs) { bad.push_back("phi1-semilinear: h*gen not expressible"); continue; }
            PolyVec rhs = pv_mul(m.phi1[i], h.pow_l());
            if (!pv_is_zero(pv_sub(*lhs, rhs)))
                bad.push_back("phi1-semilinear: gen_" + std::to_string(i));
        }
    }

    // Span of phi_1(M_1) is all of M (mod-u rank over the local ring).
    {
        const int rows = static_cast<int>(m.phi1.size());
        std::vector<uint16_t> a(static_cast<size_t>(rows) * m.rank);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < m.rank; ++c) a[static_cast<size_t>(r) * m.rank + c] =
                static_cast<uint16_t>(m.phi1[r][c].eval0());
        if (krank(tw.k, a, rows, m.rank) != m.rank) bad.push_back("phi1-span: phi1(M_1) does not generate M");
    }

    if (!dd) return bad;

    if (dd->gens.size() != tw.group_generators().size()) bad.push_back("dd-shape: generator count");
    for (size_t s = 0; s < dd->gens.size() && s < dd->mats.size(); ++s) {
        // [g] preserves M_1 and commutes with phi_1 on its generators.
        for (size_t i = 0; i < m.m1_gens.size(); ++i) {
            PolyVec gx = apply_dd_mat(tw, dd->gens[s], dd->mats[s], m.m1_gens[i]);
            auto lhs = phi1_apply(m, span, gx);
            if (!lhs) { bad.push_back("dd-preserves-m1: gen_" + std::to_string(i)); continue; }
            PolyVec rhs = apply_dd_mat(tw, dd->gens[s], dd->mats[s], m.phi1[i]);
            if (!pv_is_zero(pv_sub(*lhs, rhs)))
                bad.push_back("dd-phi1-commute: generator " + std::to_string(s) + " at gen_" + std::to_string(i));
        }
    }
    // Composition law on (generator, everything) pairs, which propagates to
    // all pairs; the identity is pinned inside build_all_dd.
    try {
        auto all = build_all_dd(tw, m.rank, *dd);
        const auto els = tw.group_elements();
        for (size_t s = 0; s < dd->gens.size(); ++s)
            for (size_t h = 0; h < els.size(); ++h) {
                auto lhs = compose_dd(tw, dd->gens[s], dd->mats[s], all[h]);
                const auto& rhs = all[tw.group_index(tw.gcompose(dd->gens[s], els[h]))];
                bool eq = true;
                for (int i = 0; i < m.rank && eq; ++i) eq = pv_is_zero(pv_sub(lhs[i], rhs[i]));
                if (!eq) bad.push_back("dd-composition: generator " + std::to_string(s) + " against element " +
                                       std::to_string(h));
            }
    } catch (const DomainError& err) {
        bad.push_back(std::string("dd-composition: ") + err.what());
    }
    return bad;
}

// Mod-u reduction.  Requires a tower with constant G_pi, #gens = rank via a
// minimal presentation, and phi_1 invertible mod u.
inline DieudonneData dieudonne_reduce(const BreuilModule& m, const DescentData& dd) {
    const TameTower& tw = *m.tw;
    if (!tw.pi_rel) throw DomainError("dieudonne_reduce: tower lacks a constant-G_pi uniformizer relation");
    if (static_cast<int>(m.m1_gens.size()) != m.rank)
        throw DomainError("dieudonne_reduce: needs a minimal generating set of M_1");
    const int n = m.rank;
    const Field& k = tw.k;

    std::vector<uint16_t> P(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) P[static_cast<size_t>(i) * n + j] = static_cast<uint16_t>(m.phi1[i][j].eval0());
    if (krank(k, P, n, n) != n) throw DomainError("dieudonne_reduce: phi_1 mod u is singular");

    SpanSolver span(tw, m.m1_gens);
    DieudonneData D;
    D.tw = &tw;
    D.dim = n;
    D.F.assign(static_cast<size_t>(n) * n, 0);
    D.V.assign(static_cast<size_t>(n) * n, 0);
    D.inertia.assign(static_cast<size_t>(n) * n, 0);

    // c_pi = -G_pi(u)^l has residue -(gbar^l).
    const int cbar = k.neg(k.pow(tw.gpi_res, tw.l));
    const int cbar_inv = k.inv(cbar);

    for (int j = 0; j < n; ++j) {
        PolyVec x = pv_zero(tw, n);
        x[j] = TruncPoly::monomial(tw, 1, tw.e_K);
        auto img = phi1_apply(m, span, x);
        if (!img) throw DomainError("dieudonne_reduce: u^{e_K} basis vector not in M_1");
        for (int c = 0; c < n; ++c)
            D.F[static_cast<size_t>(j) * n + c] = static_cast<uint16_t>(k.mul(cbar_inv, (*img)[c].eval0()));
    }

    for (int j = 0; j < n; ++j) {
        std::vector<uint16_t> rhs(n, 0);
        rhs[j] = 1;
        auto y = ksolve_left(k, P, n, rhs); // y_i = c_i^l with sum c_i gen_i -> basis_j
        if (!y) throw DomainError("dieudonne_reduce: phi_1 mod u is singular");
        for (int c = 0; c < n; ++c) {
            int acc = 0;
            for (int i = 0; i < n; ++i) {
                const int ci = k.frob_pow((*y)[i], tw.f_K - 1); // l-th root
                acc = k.add(acc, k.mul(ci, m.m1_gens[i][c].eval0()));
            }
            D.V[static_cast<size_t>(j) * n + c] = static_cast<uint16_t>(acc);
        }
    }

    // Fixed inertia generator mod u (identity when e = 1).
    bool found = false;
    for (size_t s = 0; s < dd.gens.size(); ++s)
        if (dd.gens[s].t == 0 && dd.gens[s].zeta == tw.zeta_e && tw.e > 1) {
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < n; ++c)
                    D.inertia[static_cast<size_t>(i) * n + c] = static_cast<uint16_t>(dd.mats[s][i][c].eval0());
            found = true;
        }
    if (!found)
        for (int i = 0; i < n; ++i) D.inertia[static_cast<size_t>(i) * n + i] = 1;
    return D;
}

// ---------------------------------------------------------------------------
// Morphisms and F_l flattening.
// ---------------------------------------------------------------------------

// mat[i] = image of the i-th basis vector of the source, as an element of the
// target; k[u]/u^N-linear by extension.
struct Morphism {
    std::vector<PolyVec> mat;
};

inline PolyVec apply_morphism(const TameTower& tw, const Morphism& f, const PolyVec& x) {
    const int rank_to = f.mat.empty() ? 0 : static_cast<int>(f.mat[0].size());
    PolyVec r = pv_zero(tw, rank_to);
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i].is_zero()) continue;
        for (int j = 0; j < rank_to; ++j) r[j] = r[j] + x[i] * f.mat[i][j];
    }
    return r;
}

inline std::vector<std::string> validate_morphism(const BreuilModule& from, const DescentData* dd_from,
                                                  const BreuilModule& to, const DescentData* dd_to,
                                                  const Morphism& f) {
    std::vector<std::string> bad;
    const TameTower& tw = *from.tw;
    SpanSolver span_to(tw, to.m1_gens);
    for (size_t i = 0; i < from.m1_gens.size(); ++i) {
        PolyVec img = apply_morphism(tw, f, from.m1_gens[i]);
        auto lhs = phi1_apply(to, span_to, img);
        if (!lhs) { bad.push_back("morphism: image of M_1 generator leaves M_1"); continue; }
        PolyVec rhs = apply_morphism(tw, f, from.phi1[i]);
        if (!pv_is_zero(pv_sub(*lhs, rhs))) bad.push_back("morphism: phi_1 does not commute");
    }
    if (dd_from && dd_to) {
        for (size_t s = 0; s < dd_from->gens.size(); ++s)
            for (int i = 0; i < from.rank; ++i) {
                PolyVec basis = pv_zero(tw, from.rank);
                basis[i] = TruncPoly::constant(tw, 1);
                PolyVec lhs = apply_dd_mat(tw, dd_to->gens[s], dd_to->mats[s], f.mat[i]);
                PolyVec rhs = apply_morphism(tw, f, apply_dd_mat(tw, dd_from->gens[s], dd_from->mats[s], basis));
                if (!pv_is_zero(pv_sub(lhs, rhs))) bad.push_back("morphism: descent data does not commute");
            }
    }
    return bad;
}

// F_l coordinates: basis-major, then degree, then field digit.
inline int flat_dim(const TameTower& tw, int rank) { return rank * tw.N * tw.k.f; }

inline std::vector<int16_t> flatten(const TameTower& tw, const PolyVec& x) {
    std::vector<int16_t> v;
    v.reserve(static_cast<size_t>(flat_dim(tw, static_cast<int>(x.size()))));
    for (const auto& p : x)
        for (int t = 0; t < tw.N; ++t)
            for (int d = 0; d < tw.k.f; ++d) v.push_back(static_cast<int16_t>(tw.k.digit(p.c[t], d)));
    return v;
}

inline PolyVec unflatten(const TameTower& tw, int rank, const std::vector<int16_t>& v) {
    PolyVec x = pv_zero(tw, rank);
    size_t pos = 0;
    for (int i = 0; i < rank; ++i)
        for (int t = 0; t < tw.N; ++t) {
            int idx = 0;
            for (int d = tw.k.f - 1; d >= 0; --d) {
                int dv = v[pos + d] % tw.l;
                if (dv < 0) dv += tw.l;
                idx = idx * tw.l + dv;
            }
            x[i].c[t] = static_cast<uint16_t>(idx);
            pos += tw.k.f;
        }
    return x;
}

// dim_to x dim_from matrix of a k[u]-linear morphism.
inline FlMatrix morphism_flmatrix(const TameTower& tw, int rank_from, const Morphism& f) {
    const int rank_to = f.mat.empty() ? 0 : static_cast<int>(f.mat[0].size());
    FlMatrix m(tw.l, flat_dim(tw, rank_to), flat_dim(tw, rank_from));
    int col = 0;
    for (int i = 0; i < rank_from; ++i)
        for (int t = 0; t < tw.N; ++t)
            for (int d = 0; d < tw.k.f; ++d, ++col) {
                int xi = 1;
                for (int dd = 0; dd < d; ++dd) xi *= tw.l; // field basis element x^d
                TruncPoly h = TruncPoly::monomial(tw, xi, t);
                PolyVec img = pv_mul(f.mat[i], h);
                auto coords = flatten(tw, img);
                for (int r = 0; r < m.rows; ++r) m.at(r, col) = coords[r];
            }
    return m;
}

// True iff the underlying sequence sub -> mid -> quot is short exact and
// both maps are (validated) morphisms.
inline bool check_exact(const BreuilModule& sub, const DescentData* dd_sub, const BreuilModule& mid,
                        const DescentData* dd_mid, const BreuilModule& quot, const DescentData* dd_quot,
                        const Morphism& incl, const Morphism& proj) {
    if (!validate_morphism(sub, dd_sub, mid, dd_mid, incl).empty()) return false;
    if (!validate_morphism(mid, dd_mid, quot, dd_quot, proj).empty()) return false;
    const TameTower& tw = *mid.tw;
    FlMatrix mi = morphism_flmatrix(tw, sub.rank, incl);
    FlMatrix mp = morphism_flmatrix(tw, mid.rank, proj);
    const int ri = rank(mi), rp = rank(mp);
    if (ri != flat_dim(tw, sub.rank)) return false;  // injective
    if (rp != flat_dim(tw, quot.rank)) return false; // surjective
    if (ri + rp != flat_dim(tw, mid.rank)) return false;
    // proj o incl = 0.
    for (int i = 0; i < sub.rank; ++i) {
        PolyVec through = apply_morphism(tw, proj, apply_morphism(tw, incl, [&] {
            PolyVec b = pv_zero(tw, sub.rank);
            b[i] = TruncPoly::constant(tw, 1);
            return b;
        }()));
        if (!pv_is_zero(through)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Hom spaces by linear algebra.
// ---------------------------------------------------------------------------

// F_l-basis of Hom(from, to) in the category with descent data.  Auxiliary
// unknowns express the images of M_1 generators inside M_1(to), which makes
// the phi_1 compatibility a linear condition.
inline std::vector<Morphism> hom_space(const BreuilModule& from, const DescentData& dd_from,
                                       const BreuilModule& to, const DescentData& dd_to) {
    const TameTower& tw = *from.tw;
    const int pdim = tw.N * tw.k.f;
    const int dim_to = flat_dim(tw, to.rank);
    const int n_psi = from.rank * dim_to;
    const int n_q = static_cast<int>(from.m1_gens.size() * to.m1_gens.size()) * pdim;
    const int nu = n_psi + n_q;
    auto psi_off = [&](int i) { return i * dim_to; };
    auto q_off = [&](size_t i, size_t j) {
        return n_psi + static_cast<int>((i * to.m1_gens.size() + j)) * pdim;
    };

    // Affine row assembly: each constraint block contributes rows of a big
    // F_l matrix over the unknowns.
    FlMatrix C(tw.l, 0, nu);
    auto add_rows = [&](const FlMatrix& block) {
        for (int r = 0; r < block.rows; ++r) {
            std::vector<int16_t> row(block.a.begin() + static_cast<size_t>(r) * block.cols,
                                     block.a.begin() + static_cast<size_t>(r + 1) * block.cols);
            C.append_row(row);
        }
    };

    // Linear operator on a to-module element, as dim_to x dim_to images.
    auto op_on_to = [&](auto&& fn) {
        FlMatrix op(tw.l, dim_to, dim_to);
        for (int c = 0; c < dim_to; ++c) {
            std::vector<int16_t> basis(dim_to, 0);
            basis[c] = 1;
            PolyVec x = unflatten(tw, to.rank, basis);
            auto img = flatten(tw, fn(x));
            for (int r = 0; r < dim_to; ++r) op.at(r, c) = img[r];
        }
        return op;
    };

    // (a') Psi(m1gen_i) = sum_j Q_ij * m1gen_j(to).
    for (size_t i = 0; i < from.m1_gens.size(); ++i) {
        FlMatrix rows(tw.l, dim_to, nu);
        // Psi part: Psi(m1gen_i) = sum_t gen[t] * Psi_row_t.
        for (int t = 0; t < from.rank; ++t) {
            if (from.m1_gens[i][t].is_zero()) continue;
            FlMatrix op = op_on_to([&](const PolyVec& x) { return pv_mul(x, from.m1_gens[i][t]); });
            for (int r = 0; r < dim_to; ++r)
                for (int c = 0; c < dim_to; ++c) {
                    int v = (rows.at(r, psi_off(t) + c) + op.at(r, c)) % tw.l;
                    rows.at(r, psi_off(t) + c) = static_cast<int16_t>(v);
                }
        }
        // Q part (negated).
        for (size_t j = 0; j < to.m1_gens.size(); ++j) {
            for (int pc = 0; pc < pdim; ++pc) {
                std::vector<int16_t> pv(pdim, 0);
                pv[pc] = 1;
                TruncPoly q = cohom_detail::poly_from_coords(tw, tw.N, pv);
                auto img = flatten(tw, pv_mul(to.m1_gens[j], q));
                for (int r = 0; r < dim_to; ++r) {
                    int v = (rows.at(r, q_off(i, j) + pc) - img[r]) % tw.l;
                    if (v < 0) v += tw.l;
                    rows.at(r, q_off(i, j) + pc) = static_cast<int16_t>(v);
                }
            }
        }
        add_rows(rows);
    }

    // (b) sum_j Q_ij^l * phi1(to gen_j) = Psi(phi1(from gen_i)).
    for (size_t i = 0; i < from.m1_gens.size(); ++i) {
        FlMatrix rows(tw.l, dim_to, nu);
        for (size_t j = 0; j < to.m1_gens.size(); ++j)
            for (int pc = 0; pc < pdim; ++pc) {
                std::vector<int16_t> pv(pdim, 0);
                pv[pc] = 1;
                TruncPoly q = cohom_detail::poly_from_coords(tw, tw.N, pv).pow_l();
                auto img = flatten(tw, pv_mul(to.phi1[j], q));
                for (int r = 0; r < dim_to; ++r) {
                    int v = (rows.at(r, q_off(i, j) + pc) + img[r]) % tw.l;
                    rows.at(r, q_off(i, j) + pc) = static_cast<int16_t>(v);
                }
            }
        for (int t = 0; t < from.rank; ++t) {
            if (from.phi1[i][t].is_zero()) continue;
            FlMatrix op = op_on_to([&](const PolyVec& x) { return pv_mul(x, from.phi1[i][t]); });
            for (int r = 0; r < dim_to; ++r)
                for (int c = 0; c < dim_to; ++c) {
                    int v = (rows.at(r, psi_off(t) + c) - op.at(r, c)) % tw.l;
                    if (v < 0) v += tw.l;
                    rows.at(r, psi_off(t) + c) = static_cast<int16_t>(v);
                }
        }
        add_rows(rows);
    }

    // (c) descent data commutes: [g]_to(Psi_row_i) = Psi([g]_from basis_i).
    for (size_t s = 0; s < dd_from.gens.size(); ++s) {
        FlMatrix actop = op_on_to([&](const PolyVec& x) {
            return apply_dd_mat(tw, dd_to.gens[s], dd_to.mats[s], x);
        });
        for (int i = 0; i < from.rank; ++i) {
            FlMatrix rows(tw.l, dim_to, nu);
            for (int r = 0; r < dim_to; ++r)
                for (int c = 0; c < dim_to; ++c) rows.at(r, psi_off(i) + c) = actop.at(r, c);
            const PolyVec& gi = dd_from.mats[s][i];
            for (int t = 0; t < from.rank; ++t) {
                if (gi[t].is_zero()) continue;
                FlMatrix op = op_on_to([&](const PolyVec& x) { return pv_mul(x, gi[t]); });
                for (int r = 0; r < dim_to; ++r)
                    for (int c = 0; c < dim_to; ++c) {
                        int v = (rows.at(r, psi_off(t) + c) - op.at(r, c)) % tw.l;
                        if (v < 0) v += tw.l;
                        rows.at(r, psi_off(t) + c) = static_cast<int16_t>(v);
                    }
            }
            add_rows(rows);
        }
    }

    auto ker = kernel_basis(C);
    // Keep Psi parts, independent over F_l.
    FlMatrix psis(tw.l, 0, n_psi);
    std::vector<std::vector<int16_t>> kept;
    for (const auto& v : ker) {
        std::vector<int16_t> psi(v.begin(), v.begin() + n_psi);
        FlMatrix trial = psis;
        trial.append_row(psi);
        if (rank(trial) > rank(psis)) {
            psis.append_row(psi);
            kept.push_back(psi);
        }
    }
    std::vector<Morphism> out;
    for (const auto& psi : kept) {
        Morphism f;
        for (int i = 0; i < from.rank; ++i) {
            std::vector<int16_t> part(psi.begin() + psi_off(i), psi.begin() + psi_off(i) + dim_to);
            f.mat.push_back(unflatten(tw, to.rank, part));
        }
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace breuilkit
