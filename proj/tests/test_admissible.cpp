#include "doctest.h"

#include <map>

#include "breuilkit/admissible.hpp"

using namespace breuilkit;

TEST_CASE("type decomposition") {
    TameTower tw = TameTower::eprime(3);
    TypeTau t = make_type(tw, 1);
    CHECK(t.i == 1);
    CHECK(t.j == 0);
    TypeTau t2 = make_type(tw, 7);
    CHECK(t2.i == 3);
    CHECK(t2.j == 1);
    CHECK_THROWS_AS(make_type(tw, 4), DomainError);
    CHECK_THROWS_AS(make_type(tw, 0), DomainError);
}

TEST_CASE("relation filter on the standard module") {
    TameTower tw = TameTower::eprime(3);
    for (int a : {1, 2})
        for (int b : {1, 2}) {
            if (a == b) continue;
            auto x = make_ext_eprime(tw, 2, a, 0, 6, b, 0);
            REQUIRE(x.has_value());
            auto [mod, dd] = to_breuil(*x);
            DieudonneData D = dieudonne_reduce(mod, dd);
            CHECK(check_relations(tw, D, 1, (a * b) % 3));
            CHECK(!check_relations(tw, D, 2, (a * b) % 3));
        }
}

TEST_CASE("split direct sums fail the F + TV relation") {
    TameTower tw = TameTower::eprime(3);
    // M(0,a,c) + M(0,b,d) by hand.
    BreuilModule m;
    m.tw = &tw;
    m.rank = 2;
    m.m1_gens = {
        {TruncPoly::constant(tw, 1), TruncPoly::zero(tw)},
        {TruncPoly::zero(tw), TruncPoly::constant(tw, 1)},
    };
    m.phi1 = {
        {TruncPoly::constant(tw, 1), TruncPoly::zero(tw)},
        {TruncPoly::zero(tw), TruncPoly::constant(tw, 2)},
    };
    DescentData dd;
    dd.gens = tw.group_generators();
    for (const auto& g : dd.gens) {
        const int z0 = tw.k.pow(g.zeta, 4); // (l+1)c with c = 1
        dd.mats.push_back({
            {TruncPoly::constant(tw, z0), TruncPoly::zero(tw)},
            {TruncPoly::zero(tw), TruncPoly::constant(tw, 1)}, // c = 0
        });
    }
    REQUIRE(validate(m, &dd).empty());
    DieudonneData D = dieudonne_reduce(m, dd);
    for (int mm = 1; mm < 8; ++mm) {
        if (mm % 4 == 0) continue;
        for (int T = 1; T < 3; ++T) CHECK(!check_relations(tw, D, mm, T));
    }
}

TEST_CASE("closed form at l = 3, m = 1") {
    TameTower tw = TameTower::eprime(3);
    auto mods = enumerate_admissible(tw, make_type(tw, 1));
    REQUIRE(mods.size() == 2);
    for (const auto& x : mods) {
        CHECK(x.r == 2);
        CHECK(x.c == 0);
        CHECK(x.s == 6);
        CHECK(x.d == 0);
        CHECK(x.n == 0);
        CHECK(x.a != x.b);
    }
}

TEST_CASE("brute force agrees with the closed form at l = 3") {
    TameTower tw = TameTower::eprime(3);
    for (int m = 1; m < 8; ++m) {
        if (m % 4 == 0) continue;
        TypeTau tau = make_type(tw, m);
        std::vector<DroppedModule> dropped;
        auto brute = enumerate_admissible_brute(tw, tau, &dropped);
        auto closed = enumerate_admissible(tw, tau);
        CHECK(brute == closed);
        for (const auto& d : dropped) CHECK((d.reason == "relations" || d.reason == "split"));
        // Every survivor validates.
        for (const auto& x : brute) {
            auto [mod, dd] = to_breuil(x);
            CHECK(validate(mod, &dd).empty());
        }
    }
}

TEST_CASE("descended forms and the target list") {
    TameTower tw = TameTower::eprime(3);

    // m = 1: both target forms coincide, diag(omega, omega).
    {
        TypeTau tau = make_type(tw, 1);
        auto forms = target_inertia_forms(tw, tau);
        REQUIRE(forms.size() == 1);
        CHECK(forms[0].top == Character{1, 1});
        CHECK(forms[0].bottom == Character{1, 1});
        CHECK(!forms[0].peu_ramifie);
    }
    // m = 2: two forms, both peu-ramifie (i = 2 = l - 1).
    {
        TypeTau tau = make_type(tw, 2);
        auto forms = target_inertia_forms(tw, tau);
        REQUIRE(forms.size() == 2);
        for (const auto& f : forms) CHECK(f.peu_ramifie == true);
    }
    // l = 5, m = 3: forms (omega^3, omega) and (omega, omega^3), no flags.
    {
        TameTower t5 = TameTower::eprime(5);
        auto forms = target_inertia_forms(t5, make_type(t5, 3));
        REQUIRE(forms.size() == 2);
        for (const auto& f : forms) CHECK(!f.peu_ramifie);
        CHECK(forms[0].top.cyclo_exp + forms[0].bottom.cyclo_exp == 4);
    }

    // Inertia restrictions coincide with the enumerated modules, and each
    // full form arises from exactly one module.
    for (int m = 1; m < 8; ++m) {
        if (m % 4 == 0) continue;
        TypeTau tau = make_type(tw, m);
        auto mods = enumerate_admissible(tw, tau);
        std::vector<RhoBarForm> got;
        std::map<std::vector<int>, int> multiplicity;
        for (const auto& x : mods) {
            RhoBarForm f = rho_bar_of(x);
            CHECK(f.star_nonzero);
            got.push_back(inertia_restrict(f));
            multiplicity[{f.top.unit_rep, f.top.cyclo_exp, f.bottom.unit_rep, f.bottom.cyclo_exp,
                          f.peu_ramifie.value_or(false)}]++;
        }
        std::sort(got.begin(), got.end());
        got.erase(std::unique(got.begin(), got.end()), got.end());
        CHECK(got == target_inertia_forms(tw, tau));
        for (const auto& [key, count] : multiplicity) CHECK(count == 1);
    }
}

TEST_CASE("rho-bar of the m = 1 module") {
    TameTower tw = TameTower::eprime(3);
    auto x = make_ext_eprime(tw, 2, 1, 0, 6, 2, 0);
    REQUIRE(x.has_value());
    RhoBarForm f = rho_bar_of(*x);
    CHECK(f.top == Character{1, 1});    // chi_a omega
    CHECK(f.bottom == Character{2, 1}); // chi_b omega
    CHECK(!f.peu_ramifie);              // d - c = 0 -> invariant l - 1 = 2

    // k = 1 family member carries the flag.
    auto y = make_ext_eprime(tw, 0, 1, 0, 4, 2, 1);
    REQUIRE(y.has_value());
    CHECK(rho_bar_of(*y).peu_ramifie == true);
}

TEST_CASE("the admissible set is invariant under m -> lm") {
    for (int l : {3, 5}) {
        TameTower tw = TameTower::eprime(l);
        for (int m = 1; m < l * l - 1; ++m) {
            if (m % (l + 1) == 0) continue;
            auto s1 = enumerate_admissible(tw, make_type(tw, m));
            auto s2 = enumerate_admissible(tw, make_type(tw, (static_cast<long long>(l) * m) % (l * l - 1)));
            CHECK(s1 == s2);
        }
    }
}
