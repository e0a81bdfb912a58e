#include "carnot/coords.hpp"

#include <algorithm>
#include <sstream>

namespace carnot {

namespace {

bool all_zero(const PointQ& x) {
    return std::all_of(x.begin(), x.end(), [](const Rat& c) { return c == 0; });
}

bool fields_exact(const HFrame& f) {
    return std::all_of(f.fields.begin(), f.fields.end(),
                       [](const WPolyVectorField& x) { return x.ntrunc == kExactTrunc; });
}

int min_field_trunc(const HFrame& f) {
    int nt = kExactTrunc;
    for (const auto& x : f.fields) nt = std::min(nt, x.ntrunc);
    return nt;
}

std::string field_term_str(const std::vector<int>& w, int slot, const MultiIndex& alpha,
                           const Rat& c) {
    WPoly one = wp_zero(w, kExactTrunc);
    one.terms[alpha] = c;
    return wp_str(one) + " d/dx_" + std::to_string(slot + 1);
}

// First stored term of the first nonzero coefficient.
std::string first_term_str(const WPolyVectorField& x) {
    for (int l = 0; l < (int)x.coeff.size(); ++l)
        if (!x.coeff[l].is_zero()) {
            const auto& [alpha, c] = *x.coeff[l].terms.begin();
            return field_term_str(x.w, l, alpha, c);
        }
    return "0";
}

HFrame recentred(const HFrame& f) {
    return all_zero(f.basepoint) ? f : recentre(f, f.basepoint);
}

// Removes terms of v-block weighted degree above the component weight by
// post-composing corrections in the target; u is the passive block.  Each
// pass strictly raises the lowest offending total degree, so this terminates
// within the truncation order.
WPolyMap normalize_triangular(WPolyMap cur, int passive) {
    int n_all = cur.src_dim();
    for (int i = 0; i < n_all; ++i)
        if (cur.src_w[i] < 1)
            throw PreconditionError("normalization needs positively weighted variables");
    auto positive_part = [&](const WPolyMap& m, bool& any) {
        WPolyMap p = wpmap_zero(m.src_w, m.tgt_w, m.ntrunc);
        any = false;
        for (int k = 0; k < m.tgt_dim(); ++k)
            for (const auto& [alpha, c] : m.comp[k].terms) {
                long long vdeg = 0;
                for (int i = passive; i < n_all; ++i)
                    vdeg += (long long)alpha[i] * m.src_w[i];
                if (vdeg > m.tgt_w[k]) {
                    wp_add_term(p.comp[k], alpha, c);
                    any = true;
                }
            }
        return p;
    };
    std::vector<WPoly> vals(n_all);
    for (int i = 0; i < passive; ++i) vals[i] = wp_var(cur.src_w, cur.ntrunc, i);
    for (int it = 0; it <= cur.ntrunc + 1; ++it) {
        bool any = false;
        WPolyMap p = positive_part(cur, any);
        if (!any) return cur;
        for (int i = 0; i < cur.tgt_dim(); ++i) vals[passive + i] = cur.comp[i];
        cur = wpmap_sub(cur, wpmap_subst(p, vals, cur.src_w));
    }
    throw TruncationError("triangular normalization failed to stabilize");
}

// hat must be the identity plus terms with |alpha| >= 2 and <alpha> <= w_k.
void check_hat_shape(const WPolyMap& hat) {
    for (int k = 0; k < hat.tgt_dim(); ++k)
        for (const auto& [alpha, c] : hat.comp[k].terms) {
            long long total = 0, wdeg = 0;
            for (int i = 0; i < hat.src_dim(); ++i) {
                total += alpha[i];
                wdeg += (long long)alpha[i] * hat.src_w[i];
            }
            bool diag = total == 1 && alpha[k] == 1 && c == 1;
            bool higher = total >= 2 && wdeg <= hat.tgt_w[k];
            if (!diag && !higher) throw Error("eps normalization left a non-triangular term");
        }
}

} // namespace

PointQ affine_apply(const AffineQ& t, const PointQ& x) {
    PointQ out = qmat_apply(t.a, x);
    for (size_t i = 0; i < out.size(); ++i) out[i] += t.b[i];
    return out;
}

AffineQ affine_inverse(const AffineQ& t) {
    QMat ainv = qmat_inverse(t.a);
    PointQ b = qmat_apply(ainv, t.b);
    for (auto& c : b) c = -c;
    return {ainv, b};
}

AffineQ linearly_adapt(const HFrame& f, const PointQ& a) {
    QMat e = frame_matrix_at(f, a);
    if (!qmat_is_invertible(e)) throw PreconditionError("frame not invertible at the point");
    QMat einv = qmat_inverse(e);
    PointQ b = qmat_apply(einv, a);
    for (auto& c : b) c = -c;
    return {einv, b};
}

HFrame pushforward_frame(const HFrame& f, const AffineQ& t) {
    int n = f.ws.n;
    bool exact = fields_exact(f);
    AffineQ tinv = affine_inverse(t);
    if (!exact && !all_zero(tinv.b))
        throw PreconditionError("affine pushforward of a truncated frame must fix 0");
    int nt = min_field_trunc(f);
    std::vector<WPoly> vals(n, wp_zero(f.ws.w, nt));
    for (int i = 0; i < n; ++i) {
        if (tinv.b[i] != 0) wp_add_term(vals[i], MultiIndex(n, 0), tinv.b[i]);
        for (int j = 0; j < n; ++j)
            if (tinv.a[i][j] != 0) {
                MultiIndex e(n, 0);
                e[j] = 1;
                wp_add_term(vals[i], e, tinv.a[i][j]);
            }
    }
    std::vector<WPolyVectorField> out;
    for (int j = 0; j < n; ++j) {
        std::vector<WPoly> sub(n);
        for (int l = 0; l < n; ++l)
            sub[l] = exact ? wp_subst_exact(f.fields[j].coeff[l], vals)
                           : wp_subst(f.fields[j].coeff[l], vals);
        WPolyVectorField x = vf_zero(f.ws.w, nt);
        for (int m = 0; m < n; ++m)
            for (int l = 0; l < n; ++l)
                if (t.a[m][l] != 0) x.coeff[m] = wp_add(x.coeff[m], wp_scale(t.a[m][l], sub[l]));
        out.push_back(std::move(x));
    }
    return make_hframe(f.ws, std::move(out), affine_apply(t, f.basepoint));
}

HFrame pushforward_frame(const HFrame& f, const CoordinateChange& chg, int ntrunc) {
    if (!all_zero(f.basepoint))
        throw PreconditionError("polynomial pushforward needs a frame based at 0");
    int n = f.ws.n;
    int cap = std::min({min_field_trunc(f), chg.forward.ntrunc, chg.inverse.ntrunc});
    int nt = ntrunc >= 0 ? std::min(ntrunc, cap) : cap;
    WPolyMap fwd = wpmap_retrunc(chg.forward, nt);
    std::vector<WPoly> inv(n);
    for (int i = 0; i < n; ++i) inv[i] = wp_retrunc(chg.inverse.comp[i], nt);
    auto jac = jacobian(fwd);
    std::vector<WPolyVectorField> out;
    for (int j = 0; j < n; ++j) {
        std::vector<WPoly> sub(n);
        for (int l = 0; l < n; ++l)
            sub[l] = wp_subst(wp_retrunc(f.fields[j].coeff[l], nt), inv);
        WPolyVectorField x = vf_zero(f.ws.w, nt);
        for (int m = 0; m < n; ++m)
            for (int l = 0; l < n; ++l)
                x.coeff[m] = wp_add(x.coeff[m], wp_mul(wp_subst(jac[m][l], inv), sub[l]));
        out.push_back(std::move(x));
    }
    return make_hframe(f.ws, std::move(out), PointQ(n, Rat(0)));
}

PrivilegedReport is_privileged(const HFrame& f, int ntrunc) {
    HFrame fr = recentred(f);
    int n = f.ws.n;
    int nt = frame_working_trunc(fr, ntrunc);
    PrivilegedReport rep;
    QMat e0 = frame_matrix_at(fr, PointQ(n, Rat(0)));
    rep.linearly_adapted = e0 == qmat_identity(n);
    if (!rep.linearly_adapted)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                if (e0[l][j] != (l == j ? Rat(1) : Rat(0))) {
                    rep.violations.push_back("not linearly adapted: X_" + std::to_string(j + 1) +
                                             "(0) is not d/dx_" + std::to_string(j + 1));
                    break;
                }
    bool degrees_ok = true;
    for (int j = 0; j < n; ++j) {
        auto comps = vf_components(vf_retrunc(fr.fields[j], nt));
        for (const auto& [d, comp] : comps)
            if (d < -f.ws.w[j]) {
                degrees_ok = false;
                std::ostringstream os;
                os << "X_" << j + 1 << " has a component of degree " << d << " below -w_"
                   << j + 1 << " = " << -f.ws.w[j] << ": " << first_term_str(comp);
                rep.violations.push_back(os.str());
            }
    }
    rep.ok = rep.linearly_adapted && degrees_ok;
    return rep;
}

std::vector<WPolyVectorField> model_vector_fields(const HFrame& f, int ntrunc) {
    PrivilegedReport rep = is_privileged(f, ntrunc);
    if (!rep.ok) throw PreconditionError("coordinates are not privileged at the basepoint");
    HFrame fr = recentred(f);
    int nt = frame_working_trunc(fr, ntrunc);
    std::vector<WPolyVectorField> out;
    for (int j = 0; j < f.ws.n; ++j) {
        auto comps = vf_components(vf_retrunc(fr.fields[j], nt));
        auto it = comps.find(-f.ws.w[j]);
        WPolyVectorField m = it != comps.end() ? it->second : vf_zero(f.ws.w, nt);
        // Degree -w_j terms have <alpha> < r, so the slice is complete once
        // the working order reaches r.
        if (nt >= f.ws.r) m = vf_retrunc(m, kExactTrunc);
        out.push_back(std::move(m));
    }
    return out;
}

CoordinateChange exp_coordinates(const HFrame& f, const PointQ& a, ExpMode mode, int ntrunc) {
    HFrame fr = recentre(f, a);
    int nt = frame_working_trunc(fr, ntrunc);
    const std::vector<int>& w = f.ws.w;
    if (mode == ExpMode::CanonicalFirstKind) {
        QMat e = frame_matrix_at(fr, PointQ(f.ws.n, Rat(0)));
        if (!qmat_is_invertible(e))
            throw PreconditionError("frame not invertible at the point");
        AffineQ lin{qmat_inverse(e), PointQ(f.ws.n, Rat(0))};
        HFrame f1 = pushforward_frame(fr, lin);
        std::vector<WPolyVectorField> fx;
        for (const auto& x : f1.fields) fx.push_back(vf_retrunc(x, nt));
        WPolyMap g = flow_exp(fx, 0, w, w, nt);
        WPolyMap c = invert_map(g, 0);
        return {wpmap_compose(c, wpmap_linear(lin.a, w, w, nt)),
                wpmap_compose(wpmap_linear(e, w, w, nt), g)};
    }
    HFrame fb{f.ws, fr.fields, PointQ(f.ws.n, Rat(0))};
    std::vector<WPolyVectorField> model = model_vector_fields(fb, ntrunc);
    std::vector<WPolyVectorField> fx;
    for (const auto& x : model) fx.push_back(vf_retrunc(x, nt));
    WPolyMap g = flow_exp(fx, 0, w, w, nt);
    return {invert_map(g, 0), g};
}

EpsCarnotMap eps_carnot(const HFrame& f, const PointQ& a, int ntrunc) {
    HFrame fr = recentre(f, a);
    int nt = frame_working_trunc(fr, ntrunc);
    if (nt < f.ws.r) throw PreconditionError("eps charts need truncation order at least r");
    const std::vector<int>& w = f.ws.w;
    QMat e = frame_matrix_at(fr, PointQ(f.ws.n, Rat(0)));
    if (!qmat_is_invertible(e)) throw PreconditionError("frame not invertible at the point");
    AffineQ lin{qmat_inverse(e), PointQ(f.ws.n, Rat(0))};
    HFrame f1 = pushforward_frame(fr, lin);
    std::vector<WPolyVectorField> fx;
    for (const auto& x : f1.fields) fx.push_back(vf_retrunc(x, nt));
    WPolyMap g = flow_exp(fx, 0, w, w, nt);
    WPolyMap hat = normalize_triangular(invert_map(g, 0), 0);
    check_hat_shape(hat);
    hat = wpmap_retrunc(hat, kExactTrunc);
    PointQ b = qmat_apply(lin.a, a);
    for (auto& c : b) c = -c;
    return {f.ws, a, AffineQ{lin.a, b}, hat};
}

PointQ eps_apply(const EpsCarnotMap& e, const PointQ& x) {
    return wpmap_eval(e.hat, affine_apply(e.t, x));
}

WPolyMap eps_hat_inverse(const EpsCarnotMap& e) {
    WPolyMap inv = wpmap_retrunc(invert_map(wpmap_retrunc(e.hat, e.ws.r), 0), kExactTrunc);
    WPolyMap idm = wpmap_identity(e.ws.w, kExactTrunc);
    if (wpmap_compose(e.hat, inv) != idm || wpmap_compose(inv, e.hat) != idm)
        throw Error("triangular inverse is not exact");
    return inv;
}

PointQ eps_apply_inverse(const EpsCarnotMap& e, const PointQ& y) {
    return affine_apply(affine_inverse(e.t), wpmap_eval(eps_hat_inverse(e), y));
}

CoordinateChange eps_as_change(const EpsCarnotMap& e) {
    WPolyMap lin_fwd = wpmap_linear(e.t.a, e.ws.w, e.ws.w, kExactTrunc);
    WPolyMap lin_inv = wpmap_linear(qmat_inverse(e.t.a), e.ws.w, e.ws.w, kExactTrunc);
    return {wpmap_compose(e.hat, lin_fwd), wpmap_compose(lin_inv, eps_hat_inverse(e))};
}

CarnotReport is_carnot(const HFrame& f, const GradedNilpotentAlgebra& alg, int ntrunc) {
    CarnotReport rep;
    PrivilegedReport pr = is_privileged(f, ntrunc);
    if (!pr.ok) {
        rep.violations = pr.violations;
        rep.violations.push_back("not privileged, so not Carnot");
        return rep;
    }
    std::vector<WPolyVectorField> model = model_vector_fields(f, ntrunc);
    NilpotentGroup g = make_group(alg);
    std::vector<WPolyVectorField> li = left_invariant_frame(g);
    for (int j = 0; j < f.ws.n; ++j) {
        int nt = std::min(model[j].ntrunc, li[j].ntrunc);
        WPolyVectorField diff = vf_sub(vf_retrunc(model[j], nt), vf_retrunc(li[j], nt));
        bool zero = std::all_of(diff.coeff.begin(), diff.coeff.end(),
                                [](const WPoly& p) { return p.is_zero(); });
        if (!zero)
            rep.violations.push_back(
                "X_" + std::to_string(j + 1) +
                ": model part differs from the left-invariant frame, difference starts at " +
                first_term_str(diff));
    }
    rep.ok = rep.violations.empty();
    return rep;
}

CarnotReport is_carnot(const HFrame& f, int ntrunc) {
    PrivilegedReport pr = is_privileged(f, ntrunc);
    if (!pr.ok) {
        CarnotReport rep;
        rep.violations = pr.violations;
        rep.violations.push_back("not privileged, so not Carnot");
        return rep;
    }
    GradedNilpotentAlgebra alg;
    try {
        alg = tangent_algebra_at(f, f.basepoint);
    } catch (const Error& err) {
        CarnotReport rep;
        rep.violations.push_back(std::string("tangent algebra failed: ") + err.what());
        return rep;
    }
    return is_carnot(f, alg, ntrunc);
}

EpsField eps_field(const HFrame& f, const PointQ& x0, const std::vector<int>& u_w, int ntrunc) {
    int n = f.ws.n;
    if ((int)u_w.size() != n) throw InputError("u block needs one weight per coordinate");
    for (int wi : u_w)
        if (wi < 1) throw InputError("u weights must be at least 1");
    HFrame fr = recentre(f, x0);
    int nt = std::min(ntrunc, min_field_trunc(fr));
    if (nt < f.ws.r) throw PreconditionError("eps fields need truncation order at least r");
    QMat e0 = frame_matrix_at(fr, PointQ(n, Rat(0)));
    if (!qmat_is_invertible(e0)) throw PreconditionError("frame not invertible at the point");

    std::vector<int> jw = u_w;
    jw.insert(jw.end(), f.ws.w.begin(), f.ws.w.end());

    std::vector<WPoly> u_only(n);
    for (int l = 0; l < n; ++l) u_only[l] = wp_var(jw, nt, l);

    // E(u): the coefficient matrix along the u axis.
    PolyMat e_u(n, std::vector<WPoly>(n));
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) e_u[l][j] = wp_subst(fr.fields[j].coeff[l], u_only);
    PolyMat t_u = pmat_inverse(e_u);

    // Fields at x0 + u + E(u) vtilde, expressed in the adapted block vtilde.
    std::vector<WPoly> vals2(n);
    for (int l = 0; l < n; ++l) {
        vals2[l] = u_only[l];
        for (int m = 0; m < n; ++m)
            vals2[l] = wp_add(vals2[l], wp_mul(e_u[l][m], wp_var(jw, nt, n + m)));
    }
    std::vector<WPolyVectorField> fx(n, vf_zero(jw, nt));
    for (int j = 0; j < n; ++j) {
        std::vector<WPoly> amb(n);
        for (int l = 0; l < n; ++l) amb[l] = wp_subst(fr.fields[j].coeff[l], vals2);
        for (int m = 0; m < n; ++m)
            for (int l = 0; l < n; ++l)
                fx[j].coeff[n + m] = wp_add(fx[j].coeff[n + m], wp_mul(t_u[m][l], amb[l]));
    }

    WPolyMap g = flow_exp(fx, n, f.ws.w, f.ws.w, nt);
    WPolyMap hat = normalize_triangular(invert_map(g, n), n);

    // xi(u, v) = hat(u, T(u)(v - u)).
    std::vector<WPoly> vals4(2 * n);
    for (int i = 0; i < n; ++i) vals4[i] = wp_var(jw, nt, i);
    for (int m = 0; m < n; ++m) {
        vals4[n + m] = wp_zero(jw, nt);
        for (int l = 0; l < n; ++l)
            vals4[n + m] = wp_add(vals4[n + m],
                                  wp_mul(t_u[m][l], wp_sub(wp_var(jw, nt, n + l), u_only[l])));
    }
    WPolyMap xi = wpmap_subst(hat, vals4, jw);

    // xi_inv(u, y) = u + E(u) hat^{-1}(u, y).
    WPolyMap hat_inv = invert_map(hat, n);
    WPolyMap xi_inv = wpmap_zero(jw, f.ws.w, nt);
    for (int l = 0; l < n; ++l) {
        xi_inv.comp[l] = u_only[l];
        for (int m = 0; m < n; ++m)
            xi_inv.comp[l] = wp_add(xi_inv.comp[l], wp_mul(e_u[l][m], hat_inv.comp[m]));
    }
    return {f.ws, x0, u_w, xi, xi_inv};
}

OsculationData osculation_residual(const HFrame& f, int ntrunc) {
    CarnotReport rep = is_carnot(f, ntrunc);
    if (!rep.ok) throw PreconditionError("osculation residual needs Carnot coordinates");
    HFrame fr = recentred(f);
    int nt = std::max(frame_working_trunc(fr, ntrunc), f.ws.r);
    int n = f.ws.n;
    EpsField ef = eps_field(f, f.basepoint, f.ws.w, nt);

    GradedNilpotentAlgebra alg = tangent_algebra_at(f, f.basepoint);
    NilpotentGroup g = make_group(alg);
    std::vector<int> jw = f.ws.w;
    jw.insert(jw.end(), f.ws.w.begin(), f.ws.w.end());
    std::vector<WPoly> vals(2 * n);
    for (int i = 0; i < n; ++i) {
        vals[i] = wp_scale(Rat(-1), wp_var(jw, nt, i));
        vals[n + i] = wp_var(jw, nt, n + i);
    }
    WPolyMap law_jet = wpmap_subst(wpmap_retrunc(g.law, nt), vals, jw);

    OsculationData out;
    out.residual = wpmap_sub(ef.xi, law_jet);
    out.order = weighted_order(out.residual);
    out.order_positive = !out.order.has_value() || *out.order >= 1;
    return out;
}

} // namespace carnot
