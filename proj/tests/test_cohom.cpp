#include "doctest.h"

#include <random>

#include "breuilkit/cohom.hpp"

using namespace breuilkit;

namespace {

TruncPoly random_poly(const TameTower& tw, int n, std::mt19937_64& rng) {
    TruncPoly p(tw, n);
    for (auto& c : p.c) c = static_cast<uint16_t>(rng() % tw.k.q);
    return p;
}

TruncPoly random_unit(const TameTower& tw, int n, std::mt19937_64& rng) {
    TruncPoly p = random_poly(tw, n, rng);
    p.c[0] = static_cast<uint16_t>(1 + rng() % (tw.k.q - 1));
    return p;
}

Cocycle coboundary_of(const TameTower& tw, const TruncPoly& b, long long twist) {
    Cocycle c;
    c.tw = &tw;
    c.n = b.n;
    c.twist = twist;
    for (const auto& g : tw.group_generators())
        c.gen_values.push_back(twisted_act(tw, g, b, twist) - b);
    return c;
}

} // namespace

TEST_CASE("additive coboundary solver round-trips") {
    TameTower tw = TameTower::eprime(3);
    std::mt19937_64 rng(11);

    Cocycle zero;
    zero.tw = &tw;
    zero.n = 6;
    zero.twist = 0;
    for (size_t i = 0; i < tw.group_generators().size(); ++i)
        zero.gen_values.push_back(TruncPoly::zero(tw, 6));
    TruncPoly b0 = additive_coboundary_solve(zero);
    for (size_t s = 0; s < tw.group_generators().size(); ++s)
        CHECK(twisted_act(tw, tw.group_generators()[s], b0, 0) == b0);

    for (long long twist : {0LL, 1LL, 5LL})
        for (int rep = 0; rep < 5; ++rep) {
            TruncPoly b = random_poly(tw, 10, rng);
            Cocycle c = coboundary_of(tw, b, twist);
            TruncPoly got = additive_coboundary_solve(c);
            for (size_t s = 0; s < c.gen_values.size(); ++s)
                CHECK(twisted_act(tw, tw.group_generators()[s], got, twist) - got == c.gen_values[s]);
        }
}

TEST_CASE("every additive cocycle is a coboundary (twist 1, n = 6)") {
    TameTower tw = TameTower::eprime(3);
    const int n = 6;
    const long long twist = 1;
    const auto gens = tw.group_generators();
    const int pdim = n * tw.k.f;
    // The cocycle condition on generator values is F_l-linear; its solution
    // space is enumerated through a kernel basis, and each element must be a
    // coboundary.
    const auto els = tw.group_elements();
    FlMatrix cond(tw.l, 0, pdim * static_cast<int>(gens.size()));
    // Build condition rows by probing basis vectors through extend_cocycle's
    // pair check: instead, impose c_{gh} = c_g + g.c_h on all pairs using the
    // BFS extension of basis cocycle data and linearity.
    auto extend = [&](const std::vector<TruncPoly>& gv) -> std::optional<std::vector<TruncPoly>> {
        Cocycle c;
        c.tw = &tw;
        c.n = n;
        c.twist = twist;
        c.gen_values = gv;
        return cohom_detail::extend_cocycle(c);
    };
    // Basis probes are not themselves cocycles, so collect the violation of
    // the pair relation as a linear function of generator values instead.
    // c(code) = sum code_j * basis_j; violation(g, h) = c_g + g.c_h - c_{gh}
    // computed from the BFS extension is linear in the basis, provided the
    // BFS itself is linear - it is, being built from sums and fixed actions.
    std::vector<std::vector<TruncPoly>> basis_ext;
    for (int j = 0; j < pdim * static_cast<int>(gens.size()); ++j) {
        std::vector<TruncPoly> gv(gens.size(), TruncPoly::zero(tw, n));
        std::vector<int16_t> coords(pdim, 0);
        const size_t which = static_cast<size_t>(j) / pdim;
        coords[static_cast<size_t>(j) % pdim] = 1;
        gv[which] = cohom_detail::poly_from_coords(tw, n, coords);
        // BFS extension without the consistency check: replicate it here.
        std::vector<TruncPoly> val(els.size(), TruncPoly::zero(tw, n));
        std::vector<char> known(els.size(), 0);
        known[tw.group_index(tw.gidentity())] = 1;
        bool progress = true;
        while (progress) {
            progress = false;
            for (size_t gi = 0; gi < els.size(); ++gi) {
                if (!known[gi]) continue;
                for (size_t s = 0; s < gens.size(); ++s) {
                    const int ti = tw.group_index(tw.gcompose(gens[s], els[gi]));
                    if (known[ti]) continue;
                    val[ti] = gv[s] + twisted_act(tw, gens[s], val[gi], twist);
                    known[ti] = 1;
                    progress = true;
                }
            }
        }
        basis_ext.push_back(val);
    }
    // Condition rows: for each pair (g, h), violation must vanish.
    for (size_t gi = 0; gi < els.size(); ++gi)
        for (size_t hi = 0; hi < els.size(); ++hi) {
            const int prod = tw.group_index(tw.gcompose(els[gi], els[hi]));
            FlMatrix rows(tw.l, pdim, pdim * static_cast<int>(gens.size()));
            for (int j = 0; j < rows.cols; ++j) {
                TruncPoly viol = basis_ext[j][gi] + twisted_act(tw, els[gi], basis_ext[j][hi], twist) -
                                 basis_ext[j][prod];
                auto coords = cohom_detail::poly_coords(viol);
                for (int r = 0; r < pdim; ++r) rows.at(r, j) = coords[r];
            }
            for (int r = 0; r < rows.rows; ++r) {
                std::vector<int16_t> row(rows.a.begin() + static_cast<size_t>(r) * rows.cols,
                                         rows.a.begin() + static_cast<size_t>(r + 1) * rows.cols);
                cond.append_row(row);
            }
        }
    auto ker = kernel_basis(cond);
    CHECK(!ker.empty());
    int checked = 0;
    for (const auto& v : ker) {
        std::vector<TruncPoly> gv;
        for (size_t s = 0; s < gens.size(); ++s) {
            std::vector<int16_t> part(v.begin() + static_cast<long>(s) * pdim,
                                      v.begin() + static_cast<long>(s + 1) * pdim);
            gv.push_back(cohom_detail::poly_from_coords(tw, n, part));
        }
        REQUIRE(extend(gv).has_value());
        Cocycle c;
        c.tw = &tw;
        c.n = n;
        c.twist = twist;
        c.gen_values = gv;
        TruncPoly b = additive_coboundary_solve(c); // throws if not a coboundary
        (void)b;
        ++checked;
    }
    CHECK(checked == static_cast<int>(ker.size()));
}

TEST_CASE("multiplicative cocycle classes") {
    TameTower tw = TameTower::eprime(3);
    std::mt19937_64 rng(12);
    const auto gens = tw.group_generators();
    const int n = 8;

    Cocycle one;
    one.tw = &tw;
    one.n = n;
    one.multiplicative = true;
    for (size_t s = 0; s < gens.size(); ++s) one.gen_values.push_back(TruncPoly::constant(tw, 1, n));
    auto c0 = mult_cocycle_class(one);
    CHECK(c0.cls == 0);

    Cocycle rep2;
    rep2.tw = &tw;
    rep2.n = n;
    rep2.multiplicative = true;
    for (const auto& g : gens) rep2.gen_values.push_back(TruncPoly::constant(tw, tw.k.pow(g.zeta, 2), n));
    auto c2 = mult_cocycle_class(rep2);
    CHECK(c2.cls == 2);

    for (int rep = 0; rep < 6; ++rep) {
        const int i = static_cast<int>(rng() % tw.e);
        TruncPoly b = random_unit(tw, n, rng);
        Cocycle c;
        c.tw = &tw;
        c.n = n;
        c.multiplicative = true;
        for (const auto& g : gens)
            c.gen_values.push_back(act(tw, g, b).scaled(tw.k.pow(g.zeta, i)) * b.inverse());
        auto got = mult_cocycle_class(c);
        CHECK(got.cls == i);
        for (size_t s = 0; s < gens.size(); ++s)
            CHECK(c.gen_values[s] * got.witness ==
                  act(tw, gens[s], got.witness).scaled(tw.k.pow(gens[s].zeta, got.cls)));
    }
}

TEST_CASE("class of a product is the sum of classes") {
    TameTower tw = TameTower::eprime(3);
    std::mt19937_64 rng(13);
    const auto gens = tw.group_generators();
    const int n = 4;
    for (int rep = 0; rep < 4; ++rep) {
        auto mk = [&](int i) {
            TruncPoly b = random_unit(tw, n, rng);
            Cocycle c;
            c.tw = &tw;
            c.n = n;
            c.multiplicative = true;
            for (const auto& g : gens)
                c.gen_values.push_back(act(tw, g, b).scaled(tw.k.pow(g.zeta, i)) * b.inverse());
            return c;
        };
        const int i1 = static_cast<int>(rng() % tw.e), i2 = static_cast<int>(rng() % tw.e);
        Cocycle c1 = mk(i1), c2 = mk(i2), prod;
        prod.tw = &tw;
        prod.n = n;
        prod.multiplicative = true;
        for (size_t s = 0; s < gens.size(); ++s) prod.gen_values.push_back(c1.gen_values[s] * c2.gen_values[s]);
        CHECK(mult_cocycle_class(prod).cls == (i1 + i2) % tw.e);
    }
}

TEST_CASE("brute-force H^1 sizes") {
    CHECK(h1_sizes_bruteforce(TameTower(3, 2, 1, 1, 1, true), 2) == std::pair<long long, long long>{1, 2});
    CHECK(h1_sizes_bruteforce(TameTower(3, 1, 2, 1, 1, true), 2) == std::pair<long long, long long>{1, 1});
    CHECK(h1_sizes_bruteforce(TameTower(5, 4, 1, 1, 1, true), 1) == std::pair<long long, long long>{1, 4});
}

TEST_CASE("guard refuses oversized searches") {
    TameTower tw = TameTower::eprime(3); // q = 9, two generators
    CHECK_THROWS_AS(h1_sizes_bruteforce(tw, 8), GuardError);
}
