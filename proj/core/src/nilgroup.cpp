#include "carnot/nilgroup.hpp"

#include <sstream>

#include "carnot/error.hpp"
#include "dynkin_detail.hpp"

namespace carnot {

Rat GradedNilpotentAlgebra::bracket_coeff(int i, int j, int k) const {
    if (i == j) return Rat(0);
    if (i < j) {
        auto it = constants.find({i, j, k});
        return it == constants.end() ? Rat(0) : it->second;
    }
    auto it = constants.find({j, i, k});
    return it == constants.end() ? Rat(0) : -it->second;
}

PointQ GradedNilpotentAlgebra::bracket_vec(const PointQ& x, const PointQ& y) const {
    PointQ out(ws.n, Rat(0));
    for (const auto& [key, c] : constants) {
        auto [i, j, k] = key;
        out[k] += c * (x[i] * y[j] - x[j] * y[i]);
    }
    return out;
}

AlgebraValidation validate_algebra(const WeightSequence& ws,
                                   const std::vector<StructureConstant>& raw) {
    AlgebraValidation rep;
    auto fail = [&](const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back(msg);
    };
    auto name = [](int i, int j, int k) {
        std::ostringstream os;
        os << "(" << i + 1 << "," << j + 1 << "," << k + 1 << ")";
        return os.str();
    };

    std::map<std::tuple<int, int, int>, Rat> seen;
    for (const auto& sc : raw) {
        if (sc.i < 0 || sc.i >= ws.n || sc.j < 0 || sc.j >= ws.n || sc.k < 0 || sc.k >= ws.n) {
            fail("constant " + name(sc.i, sc.j, sc.k) + " has an index out of range");
            continue;
        }
        if (sc.i == sc.j) {
            fail("antisymmetry violation: diagonal bracket at " + name(sc.i, sc.j, sc.k));
            continue;
        }
        if (seen.count({sc.i, sc.j, sc.k})) {
            fail("duplicate constant " + name(sc.i, sc.j, sc.k));
            continue;
        }
        seen.emplace(std::tuple{sc.i, sc.j, sc.k}, sc.c);
    }

    // Antisymmetry across mirrored keys.
    for (const auto& [key, c] : seen) {
        auto [i, j, k] = key;
        if (i > j) continue;
        auto it = seen.find({j, i, k});
        if (it != seen.end() && it->second != -c)
            fail("antisymmetry violation between " + name(i, j, k) + " and " + name(j, i, k));
    }

    // Grading support.
    for (const auto& [key, c] : seen) {
        auto [i, j, k] = key;
        if (c != 0 && ws.w[i] + ws.w[j] != ws.w[k])
            fail("grading violation at " + name(i, j, k) + ": weight " +
                 std::to_string(ws.w[i]) + "+" + std::to_string(ws.w[j]) +
                 " does not match " + std::to_string(ws.w[k]));
    }

    if (!rep.ok) return rep;

    // Jacobi on the canonicalized algebra.
    GradedNilpotentAlgebra alg;
    alg.ws = ws;
    for (const auto& [key, c] : seen) {
        auto [i, j, k] = key;
        if (c == 0) continue;
        if (i < j)
            alg.constants[{i, j, k}] = c;
        else if (!seen.count({j, i, k}))
            alg.constants[{j, i, k}] = -c;
    }
    for (int i = 0; i < ws.n; ++i)
        for (int j = i + 1; j < ws.n; ++j)
            for (int l = j + 1; l < ws.n; ++l) {
                PointQ ei(ws.n, Rat(0)), ej(ws.n, Rat(0)), el(ws.n, Rat(0));
                ei[i] = 1, ej[j] = 1, el[l] = 1;
                PointQ sum = alg.bracket_vec(alg.bracket_vec(ei, ej), el);
                PointQ t2 = alg.bracket_vec(alg.bracket_vec(ej, el), ei);
                PointQ t3 = alg.bracket_vec(alg.bracket_vec(el, ei), ej);
                for (int m = 0; m < ws.n; ++m) {
                    Rat v = sum[m] + t2[m] + t3[m];
                    if (v != 0)
                        fail("Jacobi violation on basis triple " + name(i, j, l) +
                             " in component " + std::to_string(m + 1) +
                             ": defect " + rat_str(v));
                }
            }
    return rep;
}

GradedNilpotentAlgebra make_algebra(const WeightSequence& ws,
                                    const std::vector<StructureConstant>& raw) {
    AlgebraValidation rep = validate_algebra(ws, raw);
    if (!rep.ok) {
        std::string msg = "invalid structure constants:";
        for (const auto& v : rep.violations) msg += "\n  " + v;
        throw InputError(msg);
    }
    GradedNilpotentAlgebra alg;
    alg.ws = ws;
    for (const auto& sc : raw) {
        if (sc.c == 0) continue;
        if (sc.i < sc.j)
            alg.constants[{sc.i, sc.j, sc.k}] = sc.c;
        else if (!alg.constants.count({sc.j, sc.i, sc.k}))
            alg.constants[{sc.j, sc.i, sc.k}] = -sc.c;
    }
    return alg;
}

QMat adjoint_matrix(const GradedNilpotentAlgebra& alg, const PointQ& x) {
    if ((int)x.size() != alg.ws.n) throw PreconditionError("point dimension mismatch");
    QMat m = qmat_zero(alg.ws.n, alg.ws.n);
    for (const auto& [key, c] : alg.constants) {
        auto [i, j, k] = key;
        m[k][j] += c * x[i];
        m[k][i] -= c * x[j];
    }
    return m;
}

PointQ dynkin_product(const GradedNilpotentAlgebra& alg, const PointQ& x, const PointQ& y) {
    if ((int)x.size() != alg.ws.n || (int)y.size() != alg.ws.n)
        throw PreconditionError("point dimension mismatch");
    return detail::dynkin_series(alg, x, y, detail::RatOps{});
}

PointQ group_inverse(const PointQ& x) {
    PointQ out = x;
    for (auto& v : out) v = -v;
    return out;
}

NilpotentGroup make_group(const GradedNilpotentAlgebra& alg, int ntrunc) {
    NilpotentGroup g;
    g.alg = alg;
    g.ntrunc = ntrunc < 0 ? 2 * alg.ws.r : ntrunc;

    std::vector<int> ww = alg.ws.w;
    ww.insert(ww.end(), alg.ws.w.begin(), alg.ws.w.end());
    detail::WPolyOps ops{ww, g.ntrunc};

    std::vector<WPoly> xi, eta;
    for (int i = 0; i < alg.ws.n; ++i) xi.push_back(wp_var(ww, g.ntrunc, i));
    for (int i = 0; i < alg.ws.n; ++i) eta.push_back(wp_var(ww, g.ntrunc, alg.ws.n + i));

    std::vector<WPoly> law = detail::dynkin_series(alg, xi, eta, ops);
    g.law.src_w = ww;
    g.law.tgt_w = alg.ws.w;
    g.law.ntrunc = g.ntrunc;
    g.law.comp = std::move(law);
    return g;
}

PointQ group_mul(const NilpotentGroup& g, const PointQ& x, const PointQ& y) {
    PointQ arg;
    arg.reserve(2 * g.alg.ws.n);
    arg.insert(arg.end(), x.begin(), x.end());
    arg.insert(arg.end(), y.begin(), y.end());
    return wpmap_eval(g.law, arg);
}

std::vector<WPolyVectorField> left_invariant_frame(const NilpotentGroup& g) {
    int n = g.alg.ws.n;
    // Component k of the law is jointly homogeneous of degree w_k <= r, so at
    // ntrunc >= r the derived coefficients are complete polynomials.
    bool complete = g.ntrunc >= g.alg.ws.r;
    std::vector<WPolyVectorField> frame;
    frame.reserve(n);
    PointQ zero(n, Rat(0));
    for (int j = 0; j < n; ++j) {
        WPolyVectorField x = vf_zero(g.alg.ws.w, g.ntrunc);
        for (int k = 0; k < n; ++k) {
            WPoly d = wp_derivative(g.law.comp[k], n + j);
            x.coeff[k] = wp_partial_eval(d, n, n, zero);
        }
        if (complete) x = vf_retrunc(x, kExactTrunc);
        frame.push_back(std::move(x));
    }
    return frame;
}

WPolyMap left_translation_jet(const NilpotentGroup& g, const PointQ& a) {
    if ((int)a.size() != g.alg.ws.n) throw PreconditionError("point dimension mismatch");
    if (g.ntrunc < g.alg.ws.r) throw PreconditionError("translation jet needs the complete law");
    return wpmap_retrunc(wpmap_partial_eval(g.law, 0, g.alg.ws.n, a), kExactTrunc);
}

} // namespace carnot
