#pragma once

// Dense exact linear algebra over the prime field F_l.  Plain Gaussian
// elimination; l is a single digit and dimensions stay in the low thousands,
// so nothing fancier is warranted.

#include <cstdint>
#include <optional>
#include <vector>

#include "breuilkit/errors.hpp"

namespace breuilkit {

struct FlMatrix {
    int l = 0;
    int rows = 0;
    int cols = 0;
    std::vector<int16_t> a; // row-major, entries reduced into [0, l)

    FlMatrix() = default;
    FlMatrix(int l_, int rows_, int cols_)
        : l(l_), rows(rows_), cols(cols_), a(static_cast<size_t>(rows_) * cols_, 0) {}

    int16_t& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    int16_t at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    void append_row(const std::vector<int16_t>& row) {
        if (static_cast<int>(row.size()) != cols) throw DomainError("FlMatrix: row size mismatch");
        a.insert(a.end(), row.begin(), row.end());
        ++rows;
    }
};

namespace fl {

inline int inv_mod(int x, int l) {
    x %= l;
    if (x < 0) x += l;
    if (x == 0) throw DomainError("inverse of 0 mod l");
    int r = 1, b = x, e = l - 2; // l prime
    while (e) {
        if (e & 1) r = r * b % l;
        b = b * b % l;
        e >>= 1;
    }
    return r;
}

// In-place row echelon reduction.  Returns pivot columns in order.
inline std::vector<int> echelonize(FlMatrix& m) {
    const int l = m.l;
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < m.cols && row < m.rows; ++col) {
        int piv = -1;
        for (int r = row; r < m.rows; ++r)
            if (m.at(r, col) != 0) { piv = r; break; }
        if (piv < 0) continue;
        if (piv != row)
            for (int c = 0; c < m.cols; ++c) std::swap(m.at(row, c), m.at(piv, c));
        const int inv = inv_mod(m.at(row, col), l);
        for (int c = col; c < m.cols; ++c) m.at(row, c) = static_cast<int16_t>(m.at(row, c) * inv % l);
        for (int r = 0; r < m.rows; ++r) {
            if (r == row) continue;
            const int f = m.at(r, col);
            if (f == 0) continue;
            for (int c = col; c < m.cols; ++c) {
                int v = m.at(r, c) - f * m.at(row, c) % l;
                if (v < 0) v += l;
                m.at(r, c) = static_cast<int16_t>(v);
            }
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

} // namespace fl

inline int rank(FlMatrix m) {
    return static_cast<int>(fl::echelonize(m).size());
}

// Some x with Mx = b, or nullopt.  Free variables are set to 0.
inline std::optional<std::vector<int16_t>> solve(const FlMatrix& m, const std::vector<int16_t>& b) {
    if (static_cast<int>(b.size()) != m.rows) throw DomainError("solve: rhs size mismatch");
    FlMatrix aug(m.l, m.rows, m.cols + 1);
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) aug.at(r, c) = m.at(r, c);
        int v = b[r] % m.l;
        if (v < 0) v += m.l;
        aug.at(r, m.cols) = static_cast<int16_t>(v);
    }
    std::vector<int> pivots = fl::echelonize(aug);
    // Inconsistent iff some pivot lands in the rhs column.
    if (!pivots.empty() && pivots.back() == m.cols) return std::nullopt;
    std::vector<int16_t> x(m.cols, 0);
    for (size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug.at(static_cast<int>(i), m.cols);
    return x;
}

// F_l-basis of the null space; size cols - rank.
inline std::vector<std::vector<int16_t>> kernel_basis(const FlMatrix& m) {
    FlMatrix red = m;
    std::vector<int> pivots = fl::echelonize(red);
    std::vector<char> is_pivot(m.cols, 0);
    for (int p : pivots) is_pivot[p] = 1;
    std::vector<std::vector<int16_t>> basis;
    for (int free = 0; free < m.cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<int16_t> v(m.cols, 0);
        v[free] = 1;
        for (size_t i = 0; i < pivots.size(); ++i) {
            int val = red.at(static_cast<int>(i), free);
            v[pivots[i]] = static_cast<int16_t>(val ? m.l - val : 0);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace breuilkit
