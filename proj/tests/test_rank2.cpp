#include "doctest.h"

#include <random>
#include <set>

#include "breuilkit/admissible.hpp"
#include "breuilkit/rank2.hpp"

using namespace breuilkit;

namespace {

TruncPoly random_poly(const TameTower& tw, std::mt19937_64& rng, int maxdeg = -1) {
    TruncPoly p(tw, tw.N);
    const int hi = maxdeg < 0 ? tw.N : maxdeg + 1;
    for (int i = 0; i < hi && i < tw.N; ++i) p.c[i] = static_cast<uint16_t>(rng() % tw.k.q);
    return p;
}

TruncPoly transport_value(const TameTower& tw, const TruncPoly& T, int r, int s, int ratio) {
    (void)tw;
    return T.shifted(s) - T.pow_l().scaled(ratio).shifted(r);
}

} // namespace

TEST_CASE("transport solver: directed examples") {
    TameTower tw = TameTower::eprime(3);
    CHECK(solve_transport(tw, TruncPoly::zero(tw), 2, 6, 1)->is_zero());

    // T0 = u^4 gives H = u^10 - u^14; some solution must exist.
    TruncPoly T0 = TruncPoly::monomial(tw, 1, 4);
    TruncPoly H = transport_value(tw, T0, 2, 6, 1);
    CHECK(H == TruncPoly::monomial(tw, 1, 10) - TruncPoly::monomial(tw, 1, 14));
    auto T = solve_transport(tw, H, 2, 6, 1);
    REQUIRE(T.has_value());
    CHECK(transport_value(tw, *T, 2, 6, 1) == H);

    // Unsolvable base case: H = c u^8 with c outside the image of x - x^3.
    std::set<int> image;
    for (int x = 0; x < 9; ++x) image.insert(tw.k.sub(x, tw.k.frob(x)));
    for (int cc = 1; cc < 9; ++cc) {
        if (image.count(cc)) continue;
        CHECK(!solve_transport(tw, TruncPoly::monomial(tw, cc, 8), 2, 6, 1).has_value());
    }
}

TEST_CASE("transport solver: seeded round-trips") {
    TameTower tw = TameTower::eprime(3);
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 200; ++rep) {
        const int r = 2 * static_cast<int>(rng() % 5);
        const int s = 2 * static_cast<int>(rng() % 5);
        const int ratio = 1 + static_cast<int>(rng() % (tw.k.q - 1));
        TruncPoly T0 = random_poly(tw, rng);
        TruncPoly H = transport_value(tw, T0, r, s, ratio);
        auto T = solve_transport(tw, H, r, s, ratio);
        REQUIRE(T.has_value());
        CHECK(transport_value(tw, *T, r, s, ratio) == H);
    }
}

TEST_CASE("low-degree solvable H must vanish") {
    TameTower tw = TameTower::eprime(3);
    std::mt19937_64 rng(102);
    int solvable_nonzero = 0;
    for (int rep = 0; rep < 400; ++rep) {
        const int r = 2 * static_cast<int>(rng() % 5);
        const int s = 2 * static_cast<int>(rng() % 4 + 1);
        const int ratio = 1 + static_cast<int>(rng() % (tw.k.q - 1));
        TruncPoly H = random_poly(tw, rng, s - 1);
        if (solve_transport(tw, H, r, s, ratio) && !H.is_zero()) ++solvable_nonzero;
    }
    CHECK(solvable_nonzero == 0);
}

TEST_CASE("normal form of H") {
    TameTower tw = TameTower::eprime(3);
    std::mt19937_64 rng(103);

    // eta for ratio = 1 is the least kL element off the image of x - x^3.
    CHECK(transport_eta(tw, 1) == 1);

    for (int rep = 0; rep < 150; ++rep) {
        const int r = 2 * static_cast<int>(rng() % 5);
        const int s = 2 * static_cast<int>(rng() % 5);
        const int ratio = 1 + static_cast<int>(rng() % (tw.k.q - 1));
        TruncPoly H = random_poly(tw, rng);
        auto nf = normal_form_h(tw, H, r, s, ratio);
        CHECK(solve_transport(tw, nf.h_solvable, r, s, ratio).has_value());
        TruncPoly resid = H - nf.h_solvable;
        if (nf.eta_count) {
            const int i0 = (tw.l * s - r) / (tw.l - 1);
            resid = resid - TruncPoly::monomial(tw, tw.k.mul(nf.eta_count, nf.eta), i0);
        }
        CHECK(resid.deg() < s);
    }

    // Already-solvable H keeps eta_count = 0 and h_solvable = H.
    TruncPoly T0 = random_poly(tw, rng);
    TruncPoly H = transport_value(tw, T0, 2, 6, 2);
    auto nf = normal_form_h(tw, H, 2, 6, 2);
    CHECK(nf.eta_count == 0);
    CHECK(nf.h_solvable == H);
}

TEST_CASE("ext_basis windows and dimensions") {
    TameTower tw = TameTower::eprime(3);
    {
        ExtBasis eb = ext_basis(make_rank1(tw, 6, 2, 0), make_rank1(tw, 2, 1, 0));
        CHECK(eb.degrees == std::vector<int>{0});
        CHECK(!eb.eta_degree);
        CHECK(eb.dimension == 1);
    }
    {
        ExtBasis eb = ext_basis(make_rank1(tw, 6, 1, 0), make_rank1(tw, 2, 1, 0));
        CHECK(eb.degrees == std::vector<int>{0});
        REQUIRE(eb.eta_degree);
        CHECK(*eb.eta_degree == 8); // (ls - r)/(l - 1)
        CHECK(eb.dimension == 2);
    }
    {
        ExtBasis eb = ext_basis(make_rank1(tw, 2, 2, 1), make_rank1(tw, 6, 1, 0));
        CHECK(eb.degrees.empty());
        CHECK(eb.dimension == 0);
    }
    auto all = census(tw);
    for (const auto& sub : all)
        for (const auto& quot : all) {
            ExtBasis eb = ext_basis(sub, quot);
            CHECK(eb.dimension <= 1 + (eb.eta_degree ? 1 : 0));
            CHECK(eb.dimension <= 2);
        }
}

TEST_CASE("E' normal forms") {
    TameTower tw = TameTower::eprime(3);
    auto x = make_ext_eprime(tw, 2, 1, 0, 6, 2, 0);
    REQUIRE(x.has_value());
    CHECK(x->n == 0);
    CHECK_THROWS_AS(make_ext_eprime(tw, 2, 1, 0, 6, 1, 0), DomainError); // (a,c) = (b,d)
    CHECK(!make_ext_eprime(tw, 2, 1, 0, 0, 2, 0).has_value());           // s = 0
    auto y = make_ext_eprime(tw, 0, 1, 0, 4, 2, 1);
    REQUIRE(y.has_value());
    CHECK(y->n == 2); // minimal model of the k = 1 family

    auto [mod, dd] = to_breuil(*y);
    CHECK(validate(mod, &dd).empty());
}

TEST_CASE("split criterion with constructive witness") {
    TameTower tw = TameTower::eprime(3);
    auto split = make_ext_eprime(tw, 6, 1, 0, 2, 2, 0);
    REQUIRE(split.has_value());
    CHECK(is_split(*split));
    {
        auto [mod, dd] = to_breuil(*split);
        auto M0 = to_breuil(make_rank1(tw, 0, 1, 0));
        Morphism w = split_witness(*split);
        CHECK(validate_morphism(M0.first, &M0.second, mod, &dd, w).empty());
    }
    auto nonsplit = make_ext_eprime(tw, 2, 1, 0, 6, 2, 0);
    REQUIRE(nonsplit.has_value());
    CHECK(!is_split(*nonsplit));
    {
        // Exhaustive morphism search: no nonzero map from M(0,a,c).
        auto [mod, dd] = to_breuil(*nonsplit);
        auto M0 = to_breuil(make_rank1(tw, 0, 1, 0));
        CHECK(hom_space(M0.first, M0.second, mod, dd).empty());
    }
    auto cdiff = make_ext_eprime(tw, 6, 1, 1, 2, 2, 0);
    if (cdiff) CHECK(!is_split(*cdiff));
}

TEST_CASE("rank-2 homs and generic fibre isomorphisms") {
    TameTower tw = TameTower::eprime(3);
    auto n1 = make_ext_eprime(tw, 0, 1, 0, 4, 2, 1);
    auto n2 = make_ext_eprime(tw, 4, 1, 0, 8, 2, 1);
    REQUIRE(n1.has_value());
    REQUIRE(n2.has_value());
    CHECK(n2->n == 6);

    auto idm = hom_rank2(*n1, *n1);
    REQUIRE(idm.has_value());
    CHECK(generic_fibre_iso(tw, *idm));

    auto f = hom_rank2(*n1, *n2);
    REQUIRE(f.has_value());
    CHECK(generic_fibre_iso(tw, *f));
    CHECK(!hom_rank2(*n2, *n1).has_value()); // r > r1

    // Exceptional corner: into and out of M(0,a,0;8,b,1;0,1).
    auto corner = make_ext_eprime(tw, 0, 1, 0, 8, 2, 1);
    REQUIRE(corner.has_value());
    CHECK(corner->n == 0);
    CHECK(stratum_k(*corner) == 3);
    auto into = hom_rank2(*n1, *corner);
    REQUIRE(into.has_value());
    CHECK(generic_fibre_iso(tw, *into));
    auto out = hom_rank2(*corner, *n2);
    REQUIRE(out.has_value());
    CHECK(generic_fibre_iso(tw, *out));

    // Zero map: kernel is everything, so no generic fibre isomorphism.
    Morphism zero;
    zero.mat = {pv_zero(tw, 2), pv_zero(tw, 2)};
    CHECK(!generic_fibre_iso(tw, zero));
}

TEST_CASE("lattices of integral models at l = 3") {
    TameTower tw = TameTower::eprime(3);
    LatticeReport rep = lattice(tw, 1, 1, 2, 0, 1);
    CHECK(rep.modules.size() == 9);
    REQUIRE(rep.max_index >= 0);
    REQUIRE(rep.min_index >= 0);
    CHECK(rep.modules[rep.max_index] == *make_ext_eprime(tw, 4, 1, 0, 8, 2, 1));
    CHECK(rep.modules[rep.min_index] == *make_ext_eprime(tw, 0, 1, 0, 4, 2, 1));
    CHECK(rep.peu_ramifie == true);
    for (size_t i = 0; i < rep.modules.size(); ++i)
        for (size_t j = 0; j < rep.modules.size(); ++j) {
            const bool expect = rep.modules[i].r <= rep.modules[j].r && rep.modules[i].s <= rep.modules[j].s;
            CHECK(static_cast<bool>(rep.hom[i][j]) == expect);
        }

    CHECK(lattice(tw, 2, 1, 2, 0, 0).modules.size() == 4);
    CHECK(lattice(tw, 3, 1, 2, 0, 1).modules.size() == 1);

    // k = 0: the split triangle r' > s'.
    LatticeReport split = lattice(tw, 0, 1, 2, 1, 1);
    CHECK(split.modules.size() == 3);
    for (const auto& m : split.modules) {
        CHECK(m.r > m.s);
        CHECK(is_split(m));
    }
}

TEST_CASE("lattice members carry the expected character pair") {
    TameTower tw = TameTower::eprime(3);
    LatticeReport rep = lattice(tw, 1, 2, 1, 1, 0);
    for (const auto& m : rep.modules) {
        CHECK(character(quot_of(m)) == Character{2, 0});
        CHECK(character(sub_of(m)) == Character{1, 1});
    }
}

namespace {

// Semilinear composition in row-image convention: mat(S o T) with S applied
// after T is sigma_S(T) * S.
std::vector<uint16_t> kcomp(const Field& k, const std::vector<uint16_t>& after,
                            const std::vector<uint16_t>& before, int n, int twist_of_after) {
    std::vector<uint16_t> Bt = before;
    for (auto& x : Bt) x = static_cast<uint16_t>(k.frob_pow(x, twist_of_after));
    return adm_detail::kmat_mul(k, Bt, after, n);
}

} // namespace

TEST_CASE("Dieudonne reduction is functorial on lattice homs") {
    TameTower tw = TameTower::eprime(3);
    const Field& k = tw.k;
    LatticeReport rep = lattice(tw, 1, 1, 2, 0, 1);
    for (size_t i = 0; i < rep.modules.size(); ++i) {
        // FV = VF = 0 on every reduction.
        auto [mi, di] = to_breuil(rep.modules[i]);
        DieudonneData Di = dieudonne_reduce(mi, di);
        CHECK(kcomp(k, Di.F, Di.V, 2, 1) == std::vector<uint16_t>(4, 0));
        CHECK(kcomp(k, Di.V, Di.F, 2, tw.f_K - 1) == std::vector<uint16_t>(4, 0));
        for (size_t j = 0; j < rep.modules.size(); ++j) {
            if (!rep.hom[i][j]) continue;
            auto f = hom_rank2(rep.modules[i], rep.modules[j]);
            REQUIRE(f.has_value());
            auto [mj, dj] = to_breuil(rep.modules[j]);
            DieudonneData Dj = dieudonne_reduce(mj, dj);
            // Induced map on reductions: P[i][j] = constant term.
            std::vector<uint16_t> P(4);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) P[static_cast<size_t>(r) * 2 + c] =
                    static_cast<uint16_t>(f->mat[r][c].eval0());
            // f o F_i = F_j o f: F_i * P = P^(l) * F_j (row convention).
            auto lhsF = adm_detail::kmat_mul(k, Di.F, P, 2);
            std::vector<uint16_t> Pl = P;
            for (auto& x : Pl) x = static_cast<uint16_t>(k.frob(x));
            auto rhsF = adm_detail::kmat_mul(k, Pl, Dj.F, 2);
            CHECK(lhsF == rhsF);
            auto lhsV = adm_detail::kmat_mul(k, Di.V, P, 2);
            std::vector<uint16_t> Pli = P;
            for (auto& x : Pli) x = static_cast<uint16_t>(k.frob_pow(x, tw.f_K - 1));
            auto rhsV = adm_detail::kmat_mul(k, Pli, Dj.V, 2);
            CHECK(lhsV == rhsV);
            auto lhsI = adm_detail::kmat_mul(k, Di.inertia, P, 2);
            auto rhsI = adm_detail::kmat_mul(k, P, Dj.inertia, 2);
            CHECK(lhsI == rhsI);
        }
    }
}
