#pragma once

#include <functional>
#include <vector>

#include "carnot/nilgroup.hpp"

namespace carnot::detail {

// Ring operations needed by the series: Ops provides zero(), mul(a, b),
// axpy(acc, c, v) meaning acc += c * v with rational c, and is_zero(a).
template <class T, class Ops>
std::vector<T> ad_apply(const GradedNilpotentAlgebra& alg, const std::vector<T>& x,
                        const std::vector<T>& v, const Ops& ops) {
    std::vector<T> out((std::size_t)alg.ws.n, ops.zero());
    for (const auto& [key, c] : alg.constants) {
        auto [i, j, k] = key;
        ops.axpy(out[k], c, ops.mul(x[i], v[j]));
        ops.axpy(out[k], -c, ops.mul(x[j], v[i]));
    }
    return out;
}

// Product xi . eta as the finite bracket series.  Words are indexed by block
// exponent sequences (a_1, b_1) .. (a_m, b_m) with a_i + b_i >= 1 and total
// letter count N <= r; longer words vanish by nilpotency.  The word for a
// sequence reads ad_xi^{a_1} ad_eta^{b_1} ... and ends with the last letter
// peeled off as the seed vector; its coefficient is
// (-1)^{m+1}/m * 1/(N * prod a_i! b_i!).
template <class T, class Ops>
std::vector<T> dynkin_series(const GradedNilpotentAlgebra& alg, const std::vector<T>& xi,
                             const std::vector<T>& eta, const Ops& ops) {
    int n = alg.ws.n, r = alg.ws.r;
    std::vector<T> acc(n, ops.zero());

    auto all_zero = [&](const std::vector<T>& v) {
        for (const auto& e : v)
            if (!ops.is_zero(e)) return false;
        return true;
    };

    std::vector<std::pair<int, int>> blocks;
    auto process = [&]() {
        int m = (int)blocks.size();
        long long nn = 0;
        Rat fact(1);
        for (auto [a, b] : blocks) {
            nn += a + b;
            for (int q = 2; q <= a; ++q) fact *= q;
            for (int q = 2; q <= b; ++q) fact *= q;
        }
        Rat coef = Rat((m % 2) ? 1 : -1) / (Rat(m) * Rat(nn) * fact);

        auto [am, bm] = blocks[m - 1];
        std::vector<T> v;
        if (bm >= 1) {
            v = eta;
            for (int q = 0; q < bm - 1 && !all_zero(v); ++q) v = ad_apply(alg, eta, v, ops);
            for (int q = 0; q < am && !all_zero(v); ++q) v = ad_apply(alg, xi, v, ops);
        } else {
            v = xi;
            for (int q = 0; q < am - 1 && !all_zero(v); ++q) v = ad_apply(alg, xi, v, ops);
        }
        for (int blk = m - 2; blk >= 0 && !all_zero(v); --blk) {
            auto [a, b] = blocks[blk];
            for (int q = 0; q < b && !all_zero(v); ++q) v = ad_apply(alg, eta, v, ops);
            for (int q = 0; q < a && !all_zero(v); ++q) v = ad_apply(alg, xi, v, ops);
        }
        for (int k = 0; k < n; ++k) ops.axpy(acc[k], coef, v[k]);
    };

    std::function<void(int)> rec = [&](int used) {
        if (!blocks.empty()) process();
        for (int a = 0; used + a <= r; ++a)
            for (int b = (a == 0 ? 1 : 0); used + a + b <= r; ++b) {
                blocks.push_back({a, b});
                rec(used + a + b);
                blocks.pop_back();
            }
    };
    rec(0);
    return acc;
}

struct RatOps {
    Rat zero() const { return Rat(0); }
    Rat mul(const Rat& a, const Rat& b) const { return a * b; }
    void axpy(Rat& acc, const Rat& c, const Rat& v) const { acc += c * v; }
    bool is_zero(const Rat& a) const { return a == 0; }
};

struct WPolyOps {
    std::vector<int> w;
    int ntrunc = 0;
    WPoly zero() const { return wp_zero(w, ntrunc); }
    WPoly mul(const WPoly& a, const WPoly& b) const { return wp_mul(a, b); }
    void axpy(WPoly& acc, const Rat& c, const WPoly& v) const {
        acc = wp_add(acc, wp_scale(c, v));
    }
    bool is_zero(const WPoly& a) const { return a.is_zero(); }
};

} // namespace carnot::detail
