#include "doctest.h"

#include <random>

#include "breuilkit/exactlin.hpp"

using namespace breuilkit;

namespace {

FlMatrix random_matrix(int l, int rows, int cols, std::mt19937_64& rng) {
    FlMatrix m(l, rows, cols);
    for (auto& x : m.a) x = static_cast<int16_t>(rng() % l);
    return m;
}

FlMatrix transpose(const FlMatrix& m) {
    FlMatrix t(m.l, m.cols, m.rows);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
    return t;
}

std::vector<int16_t> mat_vec(const FlMatrix& m, const std::vector<int16_t>& x) {
    std::vector<int16_t> y(m.rows, 0);
    for (int r = 0; r < m.rows; ++r) {
        int s = 0;
        for (int c = 0; c < m.cols; ++c) s += m.at(r, c) * x[c];
        y[r] = static_cast<int16_t>(s % m.l);
    }
    return y;
}

} // namespace

TEST_CASE("rank of trivial matrices") {
    FlMatrix z(3, 4, 5);
    CHECK(rank(z) == 0);
    FlMatrix id(3, 6, 6);
    for (int i = 0; i < 6; ++i) id.at(i, i) = 1;
    CHECK(rank(id) == 6);
}

TEST_CASE("rank equals rank of transpose on random 20x20 over F_3") {
    std::mt19937_64 rng(0);
    for (int rep = 0; rep < 20; ++rep) {
        FlMatrix m = random_matrix(3, 20, 20, rng);
        CHECK(rank(m) == rank(transpose(m)));
    }
}

TEST_CASE("solve basics") {
    std::mt19937_64 rng(1);
    FlMatrix m = random_matrix(5, 7, 4, rng);
    auto x0 = solve(m, std::vector<int16_t>(7, 0));
    REQUIRE(x0.has_value());
    CHECK(*x0 == std::vector<int16_t>(4, 0));

    FlMatrix id(7, 5, 5);
    for (int i = 0; i < 5; ++i) id.at(i, i) = 1;
    std::vector<int16_t> b = {1, 3, 0, 6, 2};
    auto x = solve(id, b);
    REQUIRE(x.has_value());
    CHECK(*x == b);
}

TEST_CASE("solvability matches the rank criterion") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        FlMatrix m = random_matrix(3, 5, 4, rng);
        std::vector<int16_t> b(5);
        for (auto& v : b) v = static_cast<int16_t>(rng() % 3);
        FlMatrix aug(3, 5, 5);
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 4; ++c) aug.at(r, c) = m.at(r, c);
            aug.at(r, 4) = b[r];
        }
        const bool solvable = solve(m, b).has_value();
        CHECK(solvable == (rank(m) == rank(aug)));
        if (solvable) CHECK(mat_vec(m, *solve(m, b)) == b);
    }
}

TEST_CASE("solve agrees with exhaustive search on tiny F_3 systems") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 40; ++rep) {
        const int cols = 1 + static_cast<int>(rng() % 6);
        const int rows = 1 + static_cast<int>(rng() % 4);
        FlMatrix m = random_matrix(3, rows, cols, rng);
        std::vector<int16_t> b(rows);
        for (auto& v : b) v = static_cast<int16_t>(rng() % 3);
        bool found = false;
        long long total = 1;
        for (int i = 0; i < cols; ++i) total *= 3;
        for (long long code = 0; code < total && !found; ++code) {
            std::vector<int16_t> x(cols);
            long long rem = code;
            for (int i = 0; i < cols; ++i) {
                x[i] = static_cast<int16_t>(rem % 3);
                rem /= 3;
            }
            found = (mat_vec(m, x) == b);
        }
        CHECK(solve(m, b).has_value() == found);
    }
}

TEST_CASE("kernel basis") {
    FlMatrix id(3, 4, 4);
    for (int i = 0; i < 4; ++i) id.at(i, i) = 1;
    CHECK(kernel_basis(id).empty());

    FlMatrix z(3, 4, 4);
    CHECK(kernel_basis(z).size() == 4);

    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 30; ++rep) {
        FlMatrix m = random_matrix(5, 6, 8, rng);
        auto ker = kernel_basis(m);
        CHECK(static_cast<int>(ker.size()) == 8 - rank(m));
        for (const auto& v : ker) CHECK(mat_vec(m, v) == std::vector<int16_t>(6, 0));
    }
}
