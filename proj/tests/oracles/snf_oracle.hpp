#pragma once

// Independent Smith-form oracles: determinantal divisors and a Euclidean
// elementary-operations reduction with unimodular 2x2 steps.

#include "mbcascade/chain_complexes.hpp"

#include <numeric>
#include <vector>

namespace oracle {

using mbcascade::IntMatrix;

// Exact determinant by fraction-free (Bareiss) elimination.
inline long long bareiss_det(std::vector<std::vector<__int128>> a) {
    const int n = static_cast<int>(a.size());
    if (n == 0) return 1;
    __int128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int r = k + 1;
            while (r < n && a[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return static_cast<long long>(sign * a[n - 1][n - 1]);
}

inline void combinations(int n, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

// Invariant factors d_k = D_k / D_{k-1}, D_k the gcd of all k x k minors.
inline std::vector<long long> determinantal_factors(const IntMatrix& m) {
    const int rows = static_cast<int>(m.rows()), cols = static_cast<int>(m.cols());
    std::vector<long long> out;
    long long prev = 1;
    for (int k = 1; k <= std::min(rows, cols); ++k) {
        std::vector<std::vector<int>> rs, cs;
        std::vector<int> cur;
        combinations(rows, k, 0, cur, rs);
        combinations(cols, k, 0, cur, cs);
        long long g = 0;
        for (const auto& r : rs)
            for (const auto& c : cs) {
                std::vector<std::vector<__int128>> a(k, std::vector<__int128>(k));
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) a[i][j] = m(r[i], c[j]);
                g = std::gcd(g, bareiss_det(a));
            }
        if (g == 0) break;
        out.push_back(g / prev);
        prev = g;
    }
    return out;
}

inline long long ext_gcd(long long a, long long b, long long& x, long long& y) {
    if (b == 0) {
        x = a >= 0 ? 1 : -1;
        y = 0;
        return a >= 0 ? a : -a;
    }
    long long x1, y1;
    const long long g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

// Bezout pair for a pivot step; plain elimination when the pivot already divides q, so
// the pivot magnitude strictly decreases on every step that mixes in the other line.
inline long long pivot_gcd(long long p, long long q, long long& x, long long& y) {
    if (q % p == 0) {
        x = 1;
        y = 0;
        return p;
    }
    return ext_gcd(p, q, x, y);
}

// Diagonalisation by unimodular row/column combinations built from extended gcd, then
// the diagonal is normalised by repeated gcd/lcm exchange.
inline std::vector<long long> elementary_factors(IntMatrix a) {
    const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
    std::vector<long long> diag;
    int t = 0;
    for (; t < std::min(m, n); ++t) {
        int pi = -1, pj = -1;
        for (int i = t; i < m && pi < 0; ++i)
            for (int j = t; j < n; ++j)
                if (a(i, j) != 0) {
                    pi = i;
                    pj = j;
                    break;
                }
        if (pi < 0) break;
        a.row(t).swap(a.row(pi));
        a.col(t).swap(a.col(pj));
        bool changed = true;
        while (changed) {
            changed = false;
            for (int i = t + 1; i < m; ++i) {
                if (a(i, t) == 0) continue;
                long long x, y;
                const long long p = a(t, t), q = a(i, t);
                const long long g = pivot_gcd(p, q, x, y);
                const long long u = p / g, v = q / g;
                const Eigen::Matrix<long long, 1, Eigen::Dynamic> rt = a.row(t), ri = a.row(i);
                a.row(t) = x * rt + y * ri;
                a.row(i) = -v * rt + u * ri;
                changed = true;
            }
            for (int j = t + 1; j < n; ++j) {
                if (a(t, j) == 0) continue;
                long long x, y;
                const long long p = a(t, t), q = a(t, j);
                const long long g = pivot_gcd(p, q, x, y);
                const long long u = p / g, v = q / g;
                const Eigen::Matrix<long long, Eigen::Dynamic, 1> ct = a.col(t), cj = a.col(j);
                a.col(t) = x * ct + y * cj;
                a.col(j) = -v * ct + u * cj;
                changed = true;
            }
        }
        diag.push_back(a(t, t) < 0 ? -a(t, t) : a(t, t));
    }
    // diag(a, b) ~ diag(gcd, lcm)
    for (size_t i = 0; i < diag.size(); ++i)
        for (size_t j = i + 1; j < diag.size(); ++j) {
            const long long g = std::gcd(diag[i], diag[j]);
            const long long l = diag[i] / g * diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    return diag;
}

// Rank over Z/2 by brute-force subset search of the column space (small matrices only).
inline int rank_mod2_bruteforce(const IntMatrix& a) {
    const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
    std::vector<unsigned> cols(n, 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
            if (((a(i, j) % 2) + 2) % 2) cols[j] |= 1u << i;
    std::vector<bool> seen(1u << m, false);
    int count = 0;
    for (unsigned s = 0; s < (1u << n); ++s) {
        unsigned v = 0;
        for (int j = 0; j < n; ++j)
            if (s & (1u << j)) v ^= cols[j];
        if (!seen[v]) {
            seen[v] = true;
            ++count;
        }
    }
    int r = 0;
    while ((1 << r) < count) ++r;
    return r;
}

}  // namespace oracle
