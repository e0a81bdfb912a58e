#include "carnot/wpoly.hpp"

#include <algorithm>
#include <sstream>

#include "carnot/error.hpp"

namespace carnot {

namespace {

void check_same_space(const WPoly& a, const WPoly& b) {
    if (a.w != b.w) throw PreconditionError("polynomials live over different variable spaces");
    if (a.ntrunc != b.ntrunc) throw PreconditionError("polynomials have different truncation orders");
}

} // namespace

WPoly wp_zero(const std::vector<int>& w, int ntrunc) {
    WPoly p;
    p.w = w;
    p.ntrunc = ntrunc;
    return p;
}

WPoly wp_const(const std::vector<int>& w, int ntrunc, const Rat& c) {
    WPoly p = wp_zero(w, ntrunc);
    wp_add_term(p, MultiIndex(w.size(), 0), c);
    return p;
}

WPoly wp_var(const std::vector<int>& w, int ntrunc, int i) {
    if (i < 0 || i >= (int)w.size()) throw PreconditionError("variable index out of range");
    MultiIndex alpha(w.size(), 0);
    alpha[i] = 1;
    WPoly p = wp_zero(w, ntrunc);
    wp_add_term(p, alpha, Rat(1));
    return p;
}

WPoly wp_monomial(const std::vector<int>& w, int ntrunc, const MultiIndex& alpha, const Rat& c) {
    WPoly p = wp_zero(w, ntrunc);
    wp_add_term(p, alpha, c);
    return p;
}

void wp_add_term(WPoly& p, const MultiIndex& alpha, const Rat& c) {
    if (c == 0) return;
    if ((int)alpha.size() != p.nvars())
        throw PreconditionError("multi-index length does not match variable count");
    if (weighted_degree(alpha, p.w) > p.ntrunc) return;
    auto it = p.terms.find(alpha);
    if (it == p.terms.end()) {
        p.terms.emplace(alpha, c);
    } else {
        it->second += c;
        if (it->second == 0) p.terms.erase(it);
    }
}

WPoly wp_add(const WPoly& a, const WPoly& b) {
    check_same_space(a, b);
    WPoly out = a;
    for (const auto& [alpha, c] : b.terms) wp_add_term(out, alpha, c);
    return out;
}

WPoly wp_sub(const WPoly& a, const WPoly& b) {
    check_same_space(a, b);
    WPoly out = a;
    for (const auto& [alpha, c] : b.terms) wp_add_term(out, alpha, -c);
    return out;
}

WPoly wp_neg(const WPoly& a) {
    WPoly out = a;
    for (auto& [alpha, c] : out.terms) c = -c;
    return out;
}

WPoly wp_mul(const WPoly& a, const WPoly& b) {
    check_same_space(a, b);
    WPoly out = wp_zero(a.w, a.ntrunc);
    MultiIndex gamma(a.nvars());
    for (const auto& [alpha, ca] : a.terms) {
        long long da = weighted_degree(alpha, a.w);
        for (const auto& [beta, cb] : b.terms) {
            if (da + weighted_degree(beta, b.w) > a.ntrunc) continue;
            for (int i = 0; i < a.nvars(); ++i) gamma[i] = alpha[i] + beta[i];
            wp_add_term(out, gamma, ca * cb);
        }
    }
    return out;
}

WPoly wp_scale(const Rat& c, const WPoly& a) {
    if (c == 0) return wp_zero(a.w, a.ntrunc);
    WPoly out = a;
    for (auto& [alpha, v] : out.terms) v *= c;
    return out;
}

WPoly wp_derivative(const WPoly& a, int i) {
    if (i < 0 || i >= a.nvars()) throw PreconditionError("variable index out of range");
    WPoly out = wp_zero(a.w, a.ntrunc);
    for (const auto& [alpha, c] : a.terms) {
        if (alpha[i] == 0) continue;
        MultiIndex beta = alpha;
        beta[i] -= 1;
        wp_add_term(out, beta, c * alpha[i]);
    }
    return out;
}

Rat wp_eval(const WPoly& p, const PointQ& x) {
    if ((int)x.size() != p.nvars()) throw PreconditionError("point dimension mismatch");
    Rat sum(0);
    for (const auto& [alpha, c] : p.terms) {
        Rat term = c;
        for (int i = 0; i < p.nvars(); ++i)
            for (int k = 0; k < alpha[i]; ++k) term *= x[i];
        sum += term;
    }
    return sum;
}

double wp_eval_double(const WPoly& p, const PointD& x) {
    if ((int)x.size() != p.nvars()) throw PreconditionError("point dimension mismatch");
    double sum = 0;
    for (const auto& [alpha, c] : p.terms) {
        double term = to_double(c);
        for (int i = 0; i < p.nvars(); ++i)
            for (int k = 0; k < alpha[i]; ++k) term *= x[i];
        sum += term;
    }
    return sum;
}

WPoly wp_subst(const WPoly& p, const std::vector<WPoly>& vals) {
    if ((int)vals.size() != p.nvars())
        throw PreconditionError("substitution needs one value per variable");
    for (const auto& v : vals) {
        if (v.terms.count(MultiIndex(v.nvars(), 0)))
            throw PreconditionError("substitution value has a constant term");
        if (vals[0].w != v.w || vals[0].ntrunc != v.ntrunc)
            throw PreconditionError("substitution values live over different spaces");
    }
    const std::vector<int>& nw = vals[0].w;
    int ntrunc = vals[0].ntrunc;
    WPoly out = wp_zero(nw, ntrunc);
    // Powers are cached per variable as needed.
    std::vector<std::vector<WPoly>> pow(p.nvars());
    auto power = [&](int i, int k) -> const WPoly& {
        auto& pi = pow[i];
        if (pi.empty()) pi.push_back(wp_const(nw, ntrunc, Rat(1)));
        while ((int)pi.size() <= k) pi.push_back(wp_mul(pi.back(), vals[i]));
        return pi[k];
    };
    for (const auto& [alpha, c] : p.terms) {
        WPoly term = wp_const(nw, ntrunc, c);
        for (int i = 0; i < p.nvars(); ++i)
            if (alpha[i] > 0) term = wp_mul(term, power(i, alpha[i]));
        out = wp_add(out, term);
    }
    return out;
}

WPoly wp_shift(const WPoly& p, const PointQ& a) {
    if ((int)a.size() != p.nvars()) throw PreconditionError("point dimension mismatch");
    WPoly out = p;
    for (int i = 0; i < p.nvars(); ++i) {
        if (a[i] == 0) continue;
        WPoly next = wp_zero(p.w, p.ntrunc);
        for (const auto& [alpha, c] : out.terms) {
            // (x_i + a_i)^k expanded by binomials.
            int k = alpha[i];
            Rat binom(1);
            Rat apow(1);
            for (int j = 0; j <= k; ++j) {
                MultiIndex beta = alpha;
                beta[i] = k - j;
                wp_add_term(next, beta, c * binom * apow);
                binom = binom * (k - j) / (j + 1);
                apow *= a[i];
            }
        }
        out = next;
    }
    return out;
}

WPoly wp_retrunc(const WPoly& p, int ntrunc) {
    WPoly out = wp_zero(p.w, ntrunc);
    for (const auto& [alpha, c] : p.terms) wp_add_term(out, alpha, c);
    return out;
}

WPoly wp_subst_exact(const WPoly& p, const std::vector<WPoly>& vals) {
    if ((int)vals.size() != p.nvars())
        throw PreconditionError("substitution needs one value per variable");
    for (const auto& v : vals)
        if (v.ntrunc != kExactTrunc)
            throw PreconditionError("exact substitution needs exact values");
    const std::vector<int>& nw = vals[0].w;
    WPoly out = wp_zero(nw, kExactTrunc);
    std::vector<std::vector<WPoly>> pow(p.nvars());
    auto power = [&](int i, int k) -> const WPoly& {
        auto& pi = pow[i];
        if (pi.empty()) pi.push_back(wp_const(nw, kExactTrunc, Rat(1)));
        while ((int)pi.size() <= k) pi.push_back(wp_mul(pi.back(), vals[i]));
        return pi[k];
    };
    for (const auto& [alpha, c] : p.terms) {
        WPoly term = wp_const(nw, kExactTrunc, c);
        for (int i = 0; i < p.nvars(); ++i)
            if (alpha[i] > 0) term = wp_mul(term, power(i, alpha[i]));
        out = wp_add(out, term);
    }
    return out;
}

WPoly wp_partial_eval(const WPoly& p, int start, int len, const PointQ& vals) {
    if (start < 0 || len < 0 || start + len > p.nvars())
        throw PreconditionError("partial evaluation block out of range");
    if ((int)vals.size() != len) throw PreconditionError("point dimension mismatch");
    std::vector<int> nw;
    for (int i = 0; i < p.nvars(); ++i)
        if (i < start || i >= start + len) nw.push_back(p.w[i]);
    WPoly out = wp_zero(nw, p.ntrunc);
    for (const auto& [alpha, c] : p.terms) {
        Rat f = c;
        for (int i = 0; i < len; ++i)
            for (int q = 0; q < alpha[start + i]; ++q) f *= vals[i];
        if (f == 0) continue;
        MultiIndex beta;
        beta.reserve(nw.size());
        for (int i = 0; i < p.nvars(); ++i)
            if (i < start || i >= start + len) beta.push_back(alpha[i]);
        wp_add_term(out, beta, f);
    }
    return out;
}

std::optional<long long> wp_min_degree(const WPoly& p) {
    std::optional<long long> best;
    for (const auto& [alpha, c] : p.terms) {
        long long d = weighted_degree(alpha, p.w);
        if (!best || d < *best) best = d;
    }
    return best;
}

long long wp_max_total_degree(const WPoly& p) {
    long long best = 0;
    for (const auto& [alpha, c] : p.terms) {
        long long d = 0;
        for (int e : alpha) d += e;
        best = std::max(best, d);
    }
    return best;
}

WPoly wp_graded_slice(const WPoly& p, long long d) {
    WPoly out = wp_zero(p.w, p.ntrunc);
    for (const auto& [alpha, c] : p.terms)
        if (weighted_degree(alpha, p.w) == d) out.terms.emplace(alpha, c);
    return out;
}

std::string wp_str(const WPoly& p, const std::string& var_prefix) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [alpha, c] : p.terms) {
        if (!first) os << " + ";
        first = false;
        os << rat_str(c);
        for (int i = 0; i < p.nvars(); ++i) {
            if (alpha[i] == 0) continue;
            os << "*" << var_prefix << (i + 1);
            if (alpha[i] > 1) os << "^" << alpha[i];
        }
    }
    return os.str();
}

WPolyMap wpmap_zero(const std::vector<int>& src_w, const std::vector<int>& tgt_w, int ntrunc) {
    WPolyMap f;
    f.src_w = src_w;
    f.tgt_w = tgt_w;
    f.ntrunc = ntrunc;
    f.comp.assign(tgt_w.size(), wp_zero(src_w, ntrunc));
    return f;
}

WPolyMap wpmap_identity(const std::vector<int>& w, int ntrunc) {
    WPolyMap f = wpmap_zero(w, w, ntrunc);
    for (std::size_t i = 0; i < w.size(); ++i) f.comp[i] = wp_var(w, ntrunc, (int)i);
    return f;
}

WPolyMap wpmap_linear(const QMat& a, const std::vector<int>& src_w,
                      const std::vector<int>& tgt_w, int ntrunc) {
    if (a.size() != tgt_w.size() || (a.empty() ? 0 : a[0].size()) != src_w.size())
        throw PreconditionError("matrix shape does not match the coordinate spaces");
    WPolyMap f = wpmap_zero(src_w, tgt_w, ntrunc);
    for (std::size_t k = 0; k < tgt_w.size(); ++k)
        for (std::size_t j = 0; j < src_w.size(); ++j)
            if (a[k][j] != 0) {
                MultiIndex alpha(src_w.size(), 0);
                alpha[j] = 1;
                wp_add_term(f.comp[k], alpha, a[k][j]);
            }
    return f;
}

WPolyMap wpmap_add(const WPolyMap& a, const WPolyMap& b) {
    if (a.src_w != b.src_w || a.tgt_w != b.tgt_w)
        throw PreconditionError("maps live over different spaces");
    WPolyMap out = a;
    for (std::size_t k = 0; k < a.comp.size(); ++k) out.comp[k] = wp_add(a.comp[k], b.comp[k]);
    return out;
}

WPolyMap wpmap_sub(const WPolyMap& a, const WPolyMap& b) {
    if (a.src_w != b.src_w || a.tgt_w != b.tgt_w)
        throw PreconditionError("maps live over different spaces");
    WPolyMap out = a;
    for (std::size_t k = 0; k < a.comp.size(); ++k) out.comp[k] = wp_sub(a.comp[k], b.comp[k]);
    return out;
}

PointQ wpmap_eval(const WPolyMap& f, const PointQ& x) {
    PointQ out(f.tgt_dim());
    for (int k = 0; k < f.tgt_dim(); ++k) out[k] = wp_eval(f.comp[k], x);
    return out;
}

PointD wpmap_eval_double(const WPolyMap& f, const PointD& x) {
    PointD out(f.tgt_dim());
    for (int k = 0; k < f.tgt_dim(); ++k) out[k] = wp_eval_double(f.comp[k], x);
    return out;
}

QMat linear_part(const WPolyMap& f) {
    QMat a = qmat_zero(f.tgt_dim(), f.src_dim());
    for (int k = 0; k < f.tgt_dim(); ++k)
        for (const auto& [alpha, c] : f.comp[k].terms) {
            int deg = 0, var = -1;
            for (int i = 0; i < f.src_dim(); ++i) {
                deg += alpha[i];
                if (alpha[i] == 1) var = i;
            }
            if (deg == 1) a[k][var] = c;
        }
    return a;
}

std::vector<std::vector<WPoly>> jacobian(const WPolyMap& f) {
    std::vector<std::vector<WPoly>> j(f.tgt_dim());
    for (int k = 0; k < f.tgt_dim(); ++k) {
        j[k].reserve(f.src_dim());
        for (int i = 0; i < f.src_dim(); ++i) j[k].push_back(wp_derivative(f.comp[k], i));
    }
    return j;
}

WPolyMap hom_part(const WPolyMap& f, long long ell) {
    int max_w = *std::max_element(f.tgt_w.begin(), f.tgt_w.end());
    if (ell < -max_w)
        throw PreconditionError("homogeneity order below -max target weight");
    WPolyMap out = wpmap_zero(f.src_w, f.tgt_w, f.ntrunc);
    for (int k = 0; k < f.tgt_dim(); ++k)
        out.comp[k] = wp_graded_slice(f.comp[k], ell + f.tgt_w[k]);
    return out;
}

std::optional<long long> weighted_order(const WPolyMap& f) {
    std::optional<long long> best;
    for (int k = 0; k < f.tgt_dim(); ++k)
        for (const auto& [alpha, c] : f.comp[k].terms) {
            long long d = weighted_degree(alpha, f.src_w) - f.tgt_w[k];
            if (!best || d < *best) best = d;
        }
    return best;
}

WPolyMap wpmap_compose(const WPolyMap& outer, const WPolyMap& inner) {
    if (outer.src_dim() != inner.tgt_dim())
        throw PreconditionError("composition dimension mismatch");
    return wpmap_subst(outer, inner.comp, inner.src_w);
}

WPolyMap wpmap_compose_exact(const WPolyMap& outer, const WPolyMap& inner) {
    if (outer.src_dim() != inner.tgt_dim())
        throw PreconditionError("composition dimension mismatch");
    WPolyMap out;
    out.src_w = inner.src_w;
    out.tgt_w = outer.tgt_w;
    out.ntrunc = kExactTrunc;
    out.comp.reserve(outer.comp.size());
    for (const auto& c : outer.comp) out.comp.push_back(wp_subst_exact(c, inner.comp));
    return out;
}

WPolyMap wpmap_retrunc(const WPolyMap& f, int ntrunc) {
    WPolyMap out = f;
    out.ntrunc = ntrunc;
    for (auto& c : out.comp) c = wp_retrunc(c, ntrunc);
    return out;
}

WPolyMap wpmap_partial_eval(const WPolyMap& f, int start, int len, const PointQ& vals) {
    WPolyMap out;
    out.tgt_w = f.tgt_w;
    out.ntrunc = f.ntrunc;
    for (int i = 0; i < f.src_dim(); ++i)
        if (i < start || i >= start + len) out.src_w.push_back(f.src_w[i]);
    out.comp.reserve(f.comp.size());
    for (const auto& c : f.comp) out.comp.push_back(wp_partial_eval(c, start, len, vals));
    return out;
}

WPolyMap wpmap_subst(const WPolyMap& outer, const std::vector<WPoly>& vals,
                     const std::vector<int>& new_src_w) {
    WPolyMap out;
    out.src_w = new_src_w;
    out.tgt_w = outer.tgt_w;
    out.ntrunc = vals.empty() ? outer.ntrunc : vals[0].ntrunc;
    out.comp.reserve(outer.comp.size());
    for (const auto& c : outer.comp) out.comp.push_back(wp_subst(c, vals));
    return out;
}

WPolyMap invert_map(const WPolyMap& f, int passive) {
    int n_all = f.src_dim();
    int nv = n_all - passive;
    if (nv != f.tgt_dim())
        throw PreconditionError("invert_map needs a square moving block");
    // Components must vanish on v = 0.
    for (int k = 0; k < nv; ++k)
        for (const auto& [alpha, c] : f.comp[k].terms) {
            bool pure_u = true;
            for (int i = passive; i < n_all; ++i)
                if (alpha[i] != 0) pure_u = false;
            if (pure_u)
                throw PreconditionError("invert_map input does not vanish at the origin of the moving block");
        }
    // Pure-v linear block.
    QMat a0 = qmat_zero(nv, nv);
    for (int k = 0; k < nv; ++k)
        for (const auto& [alpha, c] : f.comp[k].terms) {
            int deg = 0, var = -1;
            for (int i = 0; i < n_all; ++i) {
                deg += alpha[i];
                if (alpha[i] == 1) var = i;
            }
            if (deg == 1 && var >= passive) a0[k][var - passive] = c;
        }
    if (!qmat_is_invertible(a0))
        throw PreconditionError("invert_map needs an invertible linear part");
    QMat a0inv = qmat_inverse(a0);

    // Source space of the inverse: (u, y) with y carrying the target weights.
    std::vector<int> inv_src_w(f.src_w.begin(), f.src_w.begin() + passive);
    inv_src_w.insert(inv_src_w.end(), f.tgt_w.begin(), f.tgt_w.end());
    std::vector<int> inv_tgt_w(f.src_w.begin() + passive, f.src_w.end());

    // N(u, v) = f - A0 v; iteration v_{m+1} = A0^{-1} (y - N(u, v_m)).
    WPolyMap n_part = f;
    for (int k = 0; k < nv; ++k)
        for (int j = 0; j < nv; ++j)
            if (a0[k][j] != 0) {
                MultiIndex alpha(n_all, 0);
                alpha[passive + j] = 1;
                wp_add_term(n_part.comp[k], alpha, -a0[k][j]);
            }

    // Substitution values for (u, v) <- (u, v_m(u, y)).
    std::vector<WPoly> vals(n_all, wp_zero(inv_src_w, f.ntrunc));
    for (int i = 0; i < passive; ++i) vals[i] = wp_var(inv_src_w, f.ntrunc, i);

    WPolyMap v_m = wpmap_zero(inv_src_w, inv_tgt_w, f.ntrunc);
    WPolyMap y_lin = wpmap_zero(inv_src_w, inv_tgt_w, f.ntrunc);
    for (int k = 0; k < nv; ++k)
        for (int j = 0; j < nv; ++j)
            if (a0inv[k][j] != 0) {
                MultiIndex alpha(passive + nv, 0);
                alpha[passive + j] = 1;
                wp_add_term(y_lin.comp[k], alpha, a0inv[k][j]);
            }

    int it_max = f.ntrunc + 2;
    for (int it = 0; it <= it_max; ++it) {
        for (int i = 0; i < nv; ++i) vals[passive + i] = v_m.comp[i];
        WPolyMap n_sub = wpmap_subst(n_part, vals, inv_src_w);
        WPolyMap next = y_lin;
        for (int k = 0; k < nv; ++k) {
            WPoly corr = wp_zero(inv_src_w, f.ntrunc);
            for (int j = 0; j < nv; ++j)
                if (a0inv[k][j] != 0)
                    corr = wp_add(corr, wp_scale(a0inv[k][j], n_sub.comp[j]));
            next.comp[k] = wp_sub(y_lin.comp[k], corr);
        }
        if (next == v_m) return v_m;
        v_m = next;
    }
    throw TruncationError("invert_map iteration failed to stabilize");
}

WPolyVectorField vf_zero(const std::vector<int>& w, int ntrunc) {
    WPolyVectorField x;
    x.w = w;
    x.ntrunc = ntrunc;
    x.coeff.assign(w.size(), wp_zero(w, ntrunc));
    return x;
}

WPoly vf_apply(const WPolyVectorField& x, const WPoly& f) {
    WPoly out = wp_zero(f.w, f.ntrunc);
    for (int l = 0; l < x.nvars(); ++l)
        if (!x.coeff[l].is_zero()) out = wp_add(out, wp_mul(x.coeff[l], wp_derivative(f, l)));
    return out;
}

WPolyVectorField vf_add(const WPolyVectorField& a, const WPolyVectorField& b) {
    WPolyVectorField out = a;
    for (int l = 0; l < a.nvars(); ++l) out.coeff[l] = wp_add(a.coeff[l], b.coeff[l]);
    return out;
}

WPolyVectorField vf_sub(const WPolyVectorField& a, const WPolyVectorField& b) {
    WPolyVectorField out = a;
    for (int l = 0; l < a.nvars(); ++l) out.coeff[l] = wp_sub(a.coeff[l], b.coeff[l]);
    return out;
}

WPolyVectorField vf_scale(const Rat& c, const WPolyVectorField& a) {
    WPolyVectorField out = a;
    for (auto& p : out.coeff) p = wp_scale(c, p);
    return out;
}

WPolyVectorField vf_retrunc(const WPolyVectorField& x, int ntrunc) {
    WPolyVectorField out;
    out.w = x.w;
    out.ntrunc = ntrunc;
    for (const auto& p : x.coeff) out.coeff.push_back(wp_retrunc(p, ntrunc));
    return out;
}

WPolyVectorField lie_bracket(const WPolyVectorField& a, const WPolyVectorField& b) {
    if (a.w != b.w) throw PreconditionError("vector fields live over different spaces");
    WPolyVectorField out = vf_zero(a.w, a.ntrunc);
    for (int l = 0; l < a.nvars(); ++l)
        out.coeff[l] = wp_sub(vf_apply(a, b.coeff[l]), vf_apply(b, a.coeff[l]));
    return out;
}

std::map<long long, WPolyVectorField> vf_components(const WPolyVectorField& x) {
    std::map<long long, WPolyVectorField> out;
    for (int l = 0; l < x.nvars(); ++l)
        for (const auto& [alpha, c] : x.coeff[l].terms) {
            long long deg = weighted_degree(alpha, x.w) - x.w[l];
            auto it = out.find(deg);
            if (it == out.end()) it = out.emplace(deg, vf_zero(x.w, x.ntrunc)).first;
            wp_add_term(it->second.coeff[l], alpha, c);
        }
    return out;
}

WPolyVectorField dilation_pullback(const Rat& t, const WPolyVectorField& x) {
    if (t == 0) throw PreconditionError("dilation by zero");
    WPolyVectorField out = vf_zero(x.w, x.ntrunc);
    for (int l = 0; l < x.nvars(); ++l)
        for (const auto& [alpha, c] : x.coeff[l].terms) {
            long long e = weighted_degree(alpha, x.w) - x.w[l];
            Rat f(1);
            if (e >= 0)
                for (long long k = 0; k < e; ++k) f *= t;
            else
                for (long long k = 0; k < -e; ++k) f /= t;
            wp_add_term(out.coeff[l], alpha, c * f);
        }
    return out;
}

WPolyMap flow_exp(const std::vector<WPolyVectorField>& fields, int passive,
                  const std::vector<int>& coeff_w, const std::vector<int>& tgt_w,
                  int ntrunc, int n_iter_max) {
    if (fields.empty()) throw PreconditionError("flow_exp needs at least one field");
    int n_all = fields[0].nvars();
    int nv = n_all - passive;
    int m = (int)fields.size();
    if ((int)coeff_w.size() != m)
        throw PreconditionError("flow_exp needs one coefficient weight per field");
    if ((int)tgt_w.size() != nv)
        throw PreconditionError("flow_exp target weights must match the moving block");
    for (const auto& f : fields) {
        if (f.nvars() != n_all) throw PreconditionError("flow_exp fields live over different spaces");
        for (int i = 0; i < passive; ++i)
            if (!f.coeff[i].is_zero())
                throw PreconditionError("flow_exp field moves a passive variable");
    }
    if (n_iter_max < 0) n_iter_max = ntrunc + 2;

    std::vector<int> src_w(fields[0].w.begin(), fields[0].w.begin() + passive);
    src_w.insert(src_w.end(), coeff_w.begin(), coeff_w.end());
    int n_src = passive + m;

    // Divides each monomial by its total degree in the coefficient block.
    auto integrate_s = [&](const WPoly& p) {
        WPoly out = wp_zero(src_w, ntrunc);
        for (const auto& [alpha, c] : p.terms) {
            long long s_deg = 0;
            for (int i = passive; i < n_src; ++i) s_deg += alpha[i];
            if (s_deg == 0)
                throw PreconditionError("flow_exp integrand has a coefficient-free term");
            out.terms.emplace(alpha, c / s_deg);
        }
        return out;
    };

    std::vector<WPoly> svars(m);
    for (int j = 0; j < m; ++j) svars[j] = wp_var(src_w, ntrunc, passive + j);

    WPolyMap y_m = wpmap_zero(src_w, tgt_w, ntrunc);
    std::vector<WPoly> vals(n_all, wp_zero(src_w, ntrunc));
    for (int i = 0; i < passive; ++i) vals[i] = wp_var(src_w, ntrunc, i);

    for (int it = 0; it <= n_iter_max; ++it) {
        for (int i = 0; i < nv; ++i) vals[passive + i] = y_m.comp[i];
        WPolyMap next = wpmap_zero(src_w, tgt_w, ntrunc);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < nv; ++k) {
                const WPoly& a_jk = fields[j].coeff[passive + k];
                if (a_jk.is_zero()) continue;
                next.comp[k] = wp_add(next.comp[k], wp_mul(svars[j], wp_subst(a_jk, vals)));
            }
        for (int k = 0; k < nv; ++k) next.comp[k] = integrate_s(next.comp[k]);
        if (next == y_m) return y_m;
        y_m = next;
    }
    throw TruncationError("flow_exp iteration failed to stabilize");
}

ParamRemainder param_remainder(const WPolyMap& base, int nx, int m) {
    if (nx < 0 || nx > base.src_dim())
        throw PreconditionError("param_remainder passive block out of range");
    ParamRemainder pr;
    pr.base = base;
    pr.nx = nx;
    pr.m = m;

    std::vector<int> tilde_w = base.src_w;
    tilde_w.push_back(0); // the scale variable t
    int nt = base.src_dim();

    pr.tilde = wpmap_zero(tilde_w, base.tgt_w, base.ntrunc);
    for (int k = 0; k < base.tgt_dim(); ++k)
        for (const auto& [alpha, c] : base.comp[k].terms) {
            long long d = 0;
            for (int i = nx; i < nt; ++i) d += (long long)alpha[i] * base.src_w[i];
            long long e = d - base.tgt_w[k] - m;
            if (e < 0) {
                WPoly mono = wp_monomial(base.src_w, base.ntrunc, alpha, Rat(1));
                throw PreconditionError(
                    "rescaled remainder violates the stated order in component " +
                    std::to_string(k + 1) + " at monomial " + wp_str(mono));
            }
            MultiIndex beta = alpha;
            beta.push_back((int)e);
            pr.tilde.comp[k].terms.emplace(beta, c);
        }
    return pr;
}

PointQ param_remainder_eval(const ParamRemainder& pr, const PointQ& x,
                            const PointQ& y, const Rat& t) {
    PointQ arg;
    arg.reserve(pr.tilde.src_dim());
    arg.insert(arg.end(), x.begin(), x.end());
    arg.insert(arg.end(), y.begin(), y.end());
    arg.push_back(t);
    return wpmap_eval(pr.tilde, arg);
}

} // namespace carnot
