#pragma once

// Self-extensions of the admissible rank-2 modules: the two-parameter normal
// form, its 4x4 Dieudonne matrices, the F + TV line in (v, z), and an
// independent linear-algebra computation of the Ext dimension in the
// category with descent data.

#include <array>
#include <vector>

#include "breuilkit/admissible.hpp"

namespace breuilkit {

struct Rank4Module {
    Rank2Ext base;
    int v = 0, z = 0; // F_l
};

inline void require_self_ext_shape(const Rank2Ext& m) {
    const TameTower& tw = *m.tw;
    if (!is_eprime_preset(tw)) throw DomainError("self_ext: E' preset required");
    if (m.n != 0 || m.r + m.s != tw.e_K || m.r <= 0 || m.s <= 0)
        throw DomainError("self_ext: base module is not of the admissible shape");
}

inline Rank4Module self_ext(const Rank2Ext& m, int v, int z) {
    require_self_ext_shape(m);
    const int l = m.tw->l;
    return {m, ((v % l) + l) % l, ((z % l) + l) % l};
}

// Basis order (e, e', f, f').
inline std::pair<BreuilModule, DescentData> to_breuil(const Rank4Module& x) {
    const TameTower& tw = *x.base.tw;
    const int r = x.base.r, s = x.base.s;
    const int a = tw.embed(x.base.a), b = tw.embed(x.base.b);
    auto Z = [&] { return TruncPoly::zero(tw); };
    auto C = [&](int c) { return TruncPoly::constant(tw, c); };
    auto U = [&](int deg) { return TruncPoly::monomial(tw, 1, deg); };
    BreuilModule mod;
    mod.tw = &tw;
    mod.rank = 4;
    mod.m1_gens = {
        {U(s), Z(), Z(), Z()},
        {C(1), U(r), Z(), Z()},
        {Z(), Z(), U(s), Z()},
        {Z(), Z(), C(1), U(r)},
    };
    mod.phi1 = {
        {C(b), Z(), Z(), Z()},
        {Z(), C(a), Z(), Z()},
        {C(x.v % tw.l), Z(), C(b), Z()},
        {Z(), C(x.z % tw.l), Z(), C(a)},
    };
    DescentData dd;
    dd.gens = tw.group_generators();
    for (const auto& g : dd.gens) {
        auto zp = [&](long long kk) {
            kk %= tw.e;
            if (kk < 0) kk += tw.e;
            return tw.k.pow(g.zeta, kk);
        };
        const int z1 = zp(x.base.k1), z2 = zp(x.base.k2);
        dd.mats.push_back({
            {C(z1), Z(), Z(), Z()},
            {Z(), C(z2), Z(), Z()},
            {Z(), Z(), C(z1), Z()},
            {Z(), Z(), Z(), C(z2)},
        });
    }
    return {std::move(mod), std::move(dd)};
}

// Dieudonne data in the basis order (e, f, e', f') of the displayed 4x4
// matrices; row-image convention.
inline DieudonneData dieudonne_rank4(const Rank4Module& x) {
    auto [mod, dd] = to_breuil(x);
    DieudonneData D = dieudonne_reduce(mod, dd);
    static constexpr std::array<int, 4> perm = {0, 2, 1, 3};
    DieudonneData out = D;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            out.F[static_cast<size_t>(i) * 4 + j] = D.F[static_cast<size_t>(perm[i]) * 4 + perm[j]];
            out.V[static_cast<size_t>(i) * 4 + j] = D.V[static_cast<size_t>(perm[i]) * 4 + perm[j]];
            out.inertia[static_cast<size_t>(i) * 4 + j] =
                D.inertia[static_cast<size_t>(perm[i]) * 4 + perm[j]];
        }
    return out;
}

struct ConstrainedSubspace {
    int dim = 1;
    std::pair<int, int> basis_vz; // (-b/a, 1) in F_l
};

// {(v, z) : F + (ab) V = 0} = {(v, z) : v + (b/a) z = 0}.
inline ConstrainedSubspace constrained_subspace(const Rank2Ext& m) {
    require_self_ext_shape(m);
    const int l = m.tw->l;
    const int ba = (m.b * fl::inv_mod(m.a, l)) % l;
    return {1, {(l - ba) % l, 1}};
}

// ---------------------------------------------------------------------------
// The Ext oracle.  Unknowns are the extension data (V, W, Y, Z) of phi_1 on
// the lifted basis together with the descent corrections (A, B, E, F) on
// each group generator; every axiom flattens to an F_l-linear condition.
// Classes are counted modulo the change-of-lift translations.
// ---------------------------------------------------------------------------

struct OracleDetail {
    int n_unknowns = 0;
    int n_constraints = 0;
    int solution_dim = 0;
    int change_rank = 0;
    int ext_dim = 0;
    bool normal_forms_independent = false;
};

namespace ext4_detail {

// pdim x pdim matrix of a linear operator on the coefficients of k[u]/u^N.
template <typename Fn>
FlMatrix poly_op(const TameTower& tw, Fn&& fn) {
    const int pdim = tw.N * tw.k.f;
    FlMatrix op(tw.l, pdim, pdim);
    for (int c = 0; c < pdim; ++c) {
        std::vector<int16_t> basis(pdim, 0);
        basis[c] = 1;
        TruncPoly p = cohom_detail::poly_from_coords(tw, tw.N, basis);
        auto img = cohom_detail::poly_coords(fn(p));
        for (int r = 0; r < pdim; ++r) op.at(r, c) = img[r];
    }
    return op;
}

inline FlMatrix flm_mul(const FlMatrix& A, const FlMatrix& B) {
    FlMatrix C(A.l, A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int t = 0; t < A.cols; ++t) {
            const int v = A.at(i, t);
            if (!v) continue;
            for (int j = 0; j < B.cols; ++j) {
                int acc = C.at(i, j) + v * B.at(t, j);
                C.at(i, j) = static_cast<int16_t>(acc % A.l);
            }
        }
    return C;
}

inline FlMatrix flm_add(const FlMatrix& A, const FlMatrix& B) {
    FlMatrix C = A;
    for (size_t i = 0; i < C.a.size(); ++i) C.a[i] = static_cast<int16_t>((C.a[i] + B.a[i]) % C.l);
    return C;
}

inline FlMatrix flm_sub(const FlMatrix& A, const FlMatrix& B) {
    FlMatrix C = A;
    for (size_t i = 0; i < C.a.size(); ++i) {
        int v = (C.a[i] - B.a[i]) % C.l;
        if (v < 0) v += C.l;
        C.a[i] = static_cast<int16_t>(v);
    }
    return C;
}

// Affine (here: linear) polynomial value over the oracle unknowns.
struct Aff {
    FlMatrix m; // pdim x n_unknowns
};

struct OracleContext {
    const TameTower* tw;
    int pdim, nu;
    FlMatrix C;           // constraint rows
    FlMatrix op_powl;     // P -> P^l
    std::vector<FlMatrix> op_act;        // per generator, the twisted ring action
    mutable std::map<int, FlMatrix> scale_ops; // multiply-by-k-constant operators

    Aff zero() const { return {FlMatrix(tw->l, pdim, nu)}; }
    Aff unknown(int block) const {
        Aff a = zero();
        for (int r = 0; r < pdim; ++r) a.m.at(r, block * pdim + r) = 1;
        return a;
    }
    Aff apply(const FlMatrix& op, const Aff& a) const { return {flm_mul(op, a.m)}; }
    Aff add(const Aff& a, const Aff& b) const { return {flm_add(a.m, b.m)}; }
    Aff sub(const Aff& a, const Aff& b) const { return {flm_sub(a.m, b.m)}; }
    // Multiplication by an arbitrary constant of k, as a digit-linear map.
    Aff scale(int c, const Aff& a) const {
        auto it = scale_ops.find(c);
        if (it == scale_ops.end()) {
            const Field& k = tw->k;
            FlMatrix op(tw->l, k.f, k.f);
            for (int d = 0; d < k.f; ++d) {
                int bd = 1;
                for (int i = 0; i < d; ++i) bd *= tw->l;
                const int img = k.mul(c, bd);
                for (int r = 0; r < k.f; ++r) op.at(r, d) = static_cast<int16_t>(k.digit(img, r));
            }
            it = scale_ops.emplace(c, std::move(op)).first;
        }
        const FlMatrix& op = it->second;
        const int f = tw->k.f;
        Aff r = zero();
        for (int t = 0; t < tw->N; ++t)
            for (int rd = 0; rd < f; ++rd)
                for (int cd = 0; cd < f; ++cd) {
                    const int coeff = op.at(rd, cd);
                    if (!coeff) continue;
                    for (int col = 0; col < nu; ++col) {
                        int acc = r.m.at(t * f + rd, col) + coeff * a.m.at(t * f + cd, col);
                        r.m.at(t * f + rd, col) = static_cast<int16_t>(acc % tw->l);
                    }
                }
        return r;
    }
    // Multiply by c u^deg: pure coordinate arithmetic would need c in F_l;
    // general c needs the full operator, built once by the caller.
    void emit_zero(const Aff& a) {
        for (int r = 0; r < pdim; ++r) {
            std::vector<int16_t> row(a.m.a.begin() + static_cast<size_t>(r) * nu,
                                     a.m.a.begin() + static_cast<size_t>(r + 1) * nu);
            C.append_row(row);
        }
    }
    void emit_low_zero(const Aff& a, int degs) {
        for (int r = 0; r < degs * tw->k.f; ++r) {
            std::vector<int16_t> row(a.m.a.begin() + static_cast<size_t>(r) * nu,
                                     a.m.a.begin() + static_cast<size_t>(r + 1) * nu);
            C.append_row(row);
        }
    }
    // Shift coordinates down by m degrees (exact division after emitting the
    // vanishing of the low part).
    Aff div_u(const Aff& a, int m) const {
        Aff r = zero();
        const int f = tw->k.f;
        for (int t = m; t < tw->N; ++t)
            for (int d = 0; d < f; ++d)
                for (int c = 0; c < nu; ++c)
                    r.m.at((t - m) * f + d, c) = a.m.at(t * f + d, c);
        return r;
    }
};

// Descent correction state of a word in the group, linear in the generator
// unknowns.
struct WordState {
    GroupElem g;
    Aff A, B, E, F;
};

} // namespace ext4_detail

inline OracleDetail oracle_ext(const Rank2Ext& mbase) {
    using namespace ext4_detail;
    require_self_ext_shape(mbase);
    const TameTower& tw = *mbase.tw;
    const Field& k = tw.k;
    const int r = mbase.r, s = mbase.s;
    const int a = tw.embed(mbase.a), b = tw.embed(mbase.b);
    const auto gens = tw.group_generators();
    const int ngens = static_cast<int>(gens.size());
    const int pdim = tw.N * k.f;
    const int nu = (4 + 4 * ngens) * pdim;
    if (static_cast<unsigned long long>(nu) > guard_limit(5000ull))
        throw GuardError("oracle_ext: unknown count exceeds the guard");

    OracleContext cx{&tw, pdim, nu, FlMatrix(tw.l, 0, nu), FlMatrix(), {}, {}};
    cx.op_powl = poly_op(tw, [&](const TruncPoly& p) { return p.pow_l(); });
    for (const auto& g : gens) cx.op_act.push_back(poly_op(tw, [&](const TruncPoly& p) { return act(tw, g, p); }));

    auto zp = [&](const GroupElem& g, long long kk) {
        kk %= tw.e;
        if (kk < 0) kk += tw.e;
        return k.pow(g.zeta, kk);
    };
    const long long k1 = mbase.k1, k2 = mbase.k2;
    for (const auto& g : gens) {
        if (zp(g, r + k2 - k1) != 1 || zp(g, static_cast<long long>(tw.l) * s + (tw.l - 1) * k1) != 1 ||
            zp(g, static_cast<long long>(tw.l) * s - r) != 1)
            throw InvariantError("oracle_ext: exponent congruences fail for this base module");
    }

    // Unknown blocks: V W Y Z, then (A B E F) per generator.
    const Aff V = cx.unknown(0), W = cx.unknown(1), Y = cx.unknown(2), Z = cx.unknown(3);
    std::vector<std::array<Aff, 4>> corr;
    for (int gi = 0; gi < ngens; ++gi)
        corr.push_back({cx.unknown(4 + 4 * gi), cx.unknown(5 + 4 * gi), cx.unknown(6 + 4 * gi),
                        cx.unknown(7 + 4 * gi)});

    // Membership of P e + Q e' in <u^s e, u^r e' + e>, returning the
    // expression coefficients (x, y).
    auto express = [&](const Aff& P, const Aff& Q) {
        cx.emit_low_zero(Q, r);
        Aff y = cx.div_u(Q, r);
        Aff pmy = cx.sub(P, y);
        cx.emit_low_zero(pmy, s);
        Aff x = cx.div_u(pmy, s);
        return std::make_pair(x, y);
    };

    for (int gi = 0; gi < ngens; ++gi) {
        const GroupElem& g = gens[gi];
        const auto& [Ag, Bg, Eg, Fg] = corr[gi];
        const FlMatrix shift_s = poly_op(tw, [&](const TruncPoly& p) { return p.shifted(s).scaled(zp(g, s)); });
        const FlMatrix shift_r = poly_op(tw, [&](const TruncPoly& p) { return p.shifted(r).scaled(zp(g, r)); });

        // [g] u^s f in N_1, and phi_1-commutation there.
        {
            auto [x, y] = express(cx.apply(shift_s, Ag), cx.apply(shift_s, Bg));
            const int zl = zp(g, static_cast<long long>(tw.l) * (s + k1));
            Aff e_row = cx.add(cx.scale(zl, V), cx.scale(b, cx.apply(cx.op_powl, x)));
            e_row = cx.sub(e_row, cx.scale(b, Ag));
            e_row = cx.sub(e_row, cx.scale(zp(g, k1), cx.apply(cx.op_act[gi], V)));
            cx.emit_zero(e_row);
            Aff ep_row = cx.add(cx.scale(zl, W), cx.scale(a, cx.apply(cx.op_powl, y)));
            ep_row = cx.sub(ep_row, cx.scale(b, Bg));
            ep_row = cx.sub(ep_row, cx.scale(zp(g, k2), cx.apply(cx.op_act[gi], W)));
            cx.emit_zero(ep_row);
        }
        // [g](u^r f' + f) in N_1, and phi_1-commutation there.
        {
            Aff P = cx.add(cx.apply(shift_r, Eg), Ag);
            Aff Q = cx.add(cx.apply(shift_r, Fg), Bg);
            auto [x, y] = express(P, Q);
            const int zl = zp(g, static_cast<long long>(tw.l) * k1);
            Aff e_row = cx.add(cx.scale(zl, Y), cx.scale(b, cx.apply(cx.op_powl, x)));
            e_row = cx.sub(e_row, cx.scale(a, Eg));
            e_row = cx.sub(e_row, cx.scale(zp(g, k1), cx.apply(cx.op_act[gi], Y)));
            cx.emit_zero(e_row);
            Aff ep_row = cx.add(cx.scale(zl, Z), cx.scale(a, cx.apply(cx.op_powl, y)));
            ep_row = cx.sub(ep_row, cx.scale(a, Fg));
            ep_row = cx.sub(ep_row, cx.scale(zp(g, k2), cx.apply(cx.op_act[gi], Z)));
            cx.emit_zero(ep_row);
        }
    }

    // Composition corrections for words: [x][y] = [xy] accumulates linearly.
    // The left factor acts through the twisted ring action of its own group
    // element, cached per element.
    std::map<int, FlMatrix> act_cache;
    auto act_of = [&](const GroupElem& g) -> const FlMatrix& {
        const int idx = tw.group_index(g);
        auto it = act_cache.find(idx);
        if (it == act_cache.end())
            it = act_cache.emplace(idx, poly_op(tw, [&](const TruncPoly& p) { return act(tw, g, p); })).first;
        return it->second;
    };
    auto word_of_gen = [&](int gi) {
        return WordState{gens[gi], corr[gi][0], corr[gi][1], corr[gi][2], corr[gi][3]};
    };
    auto compose_words = [&](const WordState& gw, const WordState& hw) {
        WordState out;
        out.g = tw.gcompose(gw.g, hw.g);
        auto cg = [&](long long kk) { return tw.coeff_act(gw.g, zp(hw.g, kk)); };
        const FlMatrix& actg = act_of(gw.g);
        out.A = cx.add(cx.scale(cg(k1), gw.A), cx.scale(zp(gw.g, k1), cx.apply(actg, hw.A)));
        out.B = cx.add(cx.scale(cg(k1), gw.B), cx.scale(zp(gw.g, k2), cx.apply(actg, hw.B)));
        out.E = cx.add(cx.scale(cg(k2), gw.E), cx.scale(zp(gw.g, k1), cx.apply(actg, hw.E)));
        out.F = cx.add(cx.scale(cg(k2), gw.F), cx.scale(zp(gw.g, k2), cx.apply(actg, hw.F)));
        return out;
    };
    auto emit_identity = [&](const WordState& w) {
        if (w.g != tw.gidentity()) throw InvariantError("oracle_ext: relation word is not the identity");
        cx.emit_zero(w.A);
        cx.emit_zero(w.B);
        cx.emit_zero(w.E);
        cx.emit_zero(w.F);
    };
    auto emit_equal = [&](const WordState& u, const WordState& w) {
        if (u.g != w.g) throw InvariantError("oracle_ext: relation words differ in the group");
        cx.emit_zero(cx.sub(u.A, w.A));
        cx.emit_zero(cx.sub(u.B, w.B));
        cx.emit_zero(cx.sub(u.E, w.E));
        cx.emit_zero(cx.sub(u.F, w.F));
    };

    int tau_gi = -1, sigma_gi = -1;
    for (int gi = 0; gi < ngens; ++gi)
        (gens[gi].t == 0 ? tau_gi : sigma_gi) = gi;
    if (tau_gi >= 0) {
        WordState w = word_of_gen(tau_gi);
        for (int i = 1; i < tw.e; ++i) w = compose_words(word_of_gen(tau_gi), w);
        emit_identity(w);
    }
    if (sigma_gi >= 0) {
        WordState w = word_of_gen(sigma_gi);
        for (int i = 1; i < tw.f_rel; ++i) w = compose_words(word_of_gen(sigma_gi), w);
        emit_identity(w);
    }
    if (tau_gi >= 0 && sigma_gi >= 0) {
        WordState lhs = compose_words(word_of_gen(sigma_gi), word_of_gen(tau_gi));
        long long p = 1;
        for (int i = 0; i < tw.f_L; ++i) p = p * tw.l % tw.e;
        WordState taup = word_of_gen(tau_gi);
        for (long long i = 1; i < p; ++i) taup = compose_words(word_of_gen(tau_gi), taup);
        WordState rhs = compose_words(taup, word_of_gen(sigma_gi));
        emit_equal(lhs, rhs);
    }

    // Change-of-lift translations, computed numerically on the split
    // self-extension.
    auto split = to_breuil(self_ext(mbase, 0, 0));
    SpanSolver span(tw, split.first.m1_gens);
    FlMatrix T(tw.l, 0, nu);
    auto poly_of_coord = [&](int coord) {
        std::vector<int16_t> v(pdim, 0);
        v[coord] = 1;
        return cohom_detail::poly_from_coords(tw, tw.N, v);
    };
    for (int block = 0; block < 4; ++block)
        for (int coord = 0; coord < pdim; ++coord) {
            TruncPoly A = TruncPoly::zero(tw), B = A, Cc = A, D = A;
            (block == 0 ? A : block == 1 ? B : block == 2 ? Cc : D) = poly_of_coord(coord);
            TruncPoly Dt = A - B + Cc.shifted(r) + D.shifted(s);
            PolyVec ftil = {A, B.shifted(r), TruncPoly::constant(tw, 1), TruncPoly::zero(tw)};
            PolyVec fptil = {Cc, Dt, TruncPoly::zero(tw), TruncPoly::constant(tw, 1)};
            std::vector<int16_t> col;
            col.reserve(nu);
            // phi_1 data in the new lift.
            PolyVec arg1 = pv_mul(ftil, TruncPoly::monomial(tw, 1, s));
            auto w1 = phi1_apply(split.first, span, arg1);
            if (!w1) throw InvariantError("oracle_ext: translated lift leaves N_1");
            TruncPoly Vp = (*w1)[0] - ftil[0].scaled(b);
            TruncPoly Wp = (*w1)[1] - ftil[1].scaled(b);
            PolyVec arg2 = pv_add(pv_mul(fptil, TruncPoly::monomial(tw, 1, r)), ftil);
            auto w2 = phi1_apply(split.first, span, arg2);
            if (!w2) throw InvariantError("oracle_ext: translated lift leaves N_1");
            TruncPoly Yp = (*w2)[0] - fptil[0].scaled(a);
            TruncPoly Zp = (*w2)[1] - fptil[1].scaled(a);
            auto push_poly = [&](const TruncPoly& p) {
                auto c = cohom_detail::poly_coords(p);
                col.insert(col.end(), c.begin(), c.end());
            };
            push_poly(Vp);
            push_poly(Wp);
            push_poly(Yp);
            push_poly(Zp);
            for (int gi = 0; gi < ngens; ++gi) {
                const GroupElem& g = gens[gi];
                PolyVec gf = apply_dd_mat(tw, g, split.second.mats[gi], ftil);
                push_poly(gf[0] - ftil[0].scaled(zp(g, k1)));
                push_poly(gf[1] - ftil[1].scaled(zp(g, k1)));
                PolyVec gfp = apply_dd_mat(tw, g, split.second.mats[gi], fptil);
                push_poly(gfp[0] - fptil[0].scaled(zp(g, k2)));
                push_poly(gfp[1] - fptil[1].scaled(zp(g, k2)));
            }
            T.append_row(col);
        }

    // Translations must stay inside the solution space.
    for (int t = 0; t < T.rows; ++t)
        for (int rr = 0; rr < cx.C.rows; ++rr) {
            int acc = 0;
            for (int cc = 0; cc < nu; ++cc) acc += cx.C.at(rr, cc) * T.at(t, cc);
            if (acc % tw.l != 0)
                throw InvariantError("oracle_ext: a translation violates the constraints (row " +
                                     std::to_string(rr) + ", delta " + std::to_string(t) + ")");
        }

    OracleDetail out;
    out.n_unknowns = nu;
    out.n_constraints = cx.C.rows;
    out.solution_dim = nu - rank(cx.C);
    out.change_rank = rank(T);
    out.ext_dim = out.solution_dim - out.change_rank;

    // The (v, z) normal forms are solutions, independent modulo translations.
    auto nf_vec = [&](int v, int z) {
        std::vector<int16_t> vec(nu, 0);
        vec[0 * pdim + 0] = static_cast<int16_t>(v % tw.l); // constant term of V
        vec[3 * pdim + 0] = static_cast<int16_t>(z % tw.l); // constant term of Z
        return vec;
    };
    FlMatrix ext = T;
    for (auto vec : {nf_vec(1, 0), nf_vec(0, 1)}) {
        for (int rr = 0; rr < cx.C.rows; ++rr) {
            int acc = 0;
            for (int cc = 0; cc < nu; ++cc) acc += cx.C.at(rr, cc) * vec[cc];
            if (acc % tw.l != 0) throw InvariantError("oracle_ext: normal form violates the constraints");
        }
        ext.append_row(vec);
    }
    out.normal_forms_independent = (rank(ext) == out.change_rank + 2);
    return out;
}

inline int oracle_ext_dim(const Rank2Ext& m) { return oracle_ext(m).ext_dim; }

} // namespace breuilkit
