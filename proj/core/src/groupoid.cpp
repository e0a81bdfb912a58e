#include "carnot/groupoid.hpp"

#include <algorithm>
#include <sstream>

#include "carnot/error.hpp"

namespace carnot {

namespace {

PointQ cat(const PointQ& a, const PointQ& b) {
    PointQ out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Substituting a computed map into slots of weight slot_w[i] keeps the
// truncation sound only when component i starts at degree slot_w[i].
void require_slotted(const WPolyMap& m, const std::vector<int>& slot_w,
                     const char* what) {
    for (size_t i = 0; i < m.comp.size(); ++i) {
        auto d = wp_min_degree(m.comp[i]);
        if (d && *d < slot_w[i]) {
            std::ostringstream os;
            os << what << ": component " << (i + 1) << " starts at degree " << *d
               << " below the slot weight " << slot_w[i];
            throw Error(os.str());
        }
    }
}

// Removes one power of t (the variable at index ti, weight 0).
WPolyMap divide_t(const WPolyMap& f, int ti) {
    WPolyMap out = f;
    for (WPoly& comp : out.comp) {
        std::map<MultiIndex, Rat> terms;
        for (const auto& [alpha, c] : comp.terms) {
            if (alpha[ti] < 1)
                throw Error("transition correction is not divisible by t");
            MultiIndex b = alpha;
            --b[ti];
            terms.emplace(std::move(b), c);
        }
        comp.terms = std::move(terms);
    }
    return out;
}

ChartOp split_op(const WPolyMap& full, int t_index) {
    ChartOp op;
    op.full = full;
    op.at_zero = wpmap_partial_eval(full, t_index, 1, {Rat(0)});
    std::vector<WPoly> vals;
    vals.reserve(t_index);
    for (int i = 0; i < t_index; ++i)
        vals.push_back(wp_var(full.src_w, full.ntrunc, i));
    WPolyMap lifted = wpmap_subst(op.at_zero, vals, full.src_w);
    op.theta = divide_t(wpmap_sub(full, lifted), t_index);
    return op;
}

bool map_is_zero(const WPolyMap& f) {
    for (const WPoly& c : f.comp)
        if (!c.is_zero()) return false;
    return true;
}

const GroupoidPair* as_pair(const GroupoidElem& e) {
    return std::get_if<GroupoidPair>(&e);
}

const TangentElem* as_tangent(const GroupoidElem& e) {
    return std::get_if<TangentElem>(&e);
}

void check_elem_dims(const GroupoidChart& ch, const GroupoidElem& e) {
    size_t n = (size_t)ch.frame.ws.n;
    if (const GroupoidPair* p = as_pair(e)) {
        if (p->x.size() != n || p->y.size() != n)
            throw InputError("element dimension does not match the chart");
        if (p->t == 0) throw InputError("pair elements need t != 0");
    } else {
        const TangentElem* v = as_tangent(e);
        if (v->x.size() != n || v->xi.size() != n)
            throw InputError("element dimension does not match the chart");
    }
}

}  // namespace

GroupoidChart make_groupoid_chart(const HFrame& f, const PointQ& x0, int ntrunc) {
    GroupoidChart ch;
    ch.frame = f;
    ch.centre = x0;
    int nt = frame_working_trunc(f, ntrunc);
    ch.base = eps_carnot(f, x0, nt);
    // The frame in the privileged coordinates of the centre.  There the
    // coefficient of d/dx_k in X_j starts at degree w_k - w_j, which keeps
    // every later substitution inside its slot weight.
    HFrame off = make_hframe(f.ws, recentre(f, x0).fields, PointQ(f.ws.n, Rat(0)));
    HFrame f0 = pushforward_frame(off, eps_as_change(ch.base), nt);
    PrivilegedReport pr = is_privileged(f0, nt);
    if (!pr.ok)
        throw PreconditionError("the frame has no privileged coordinates at the centre");
    ch.ef = eps_field(f0, PointQ(f.ws.n, Rat(0)), f.ws.w, nt);
    ch.ntrunc = ch.ef.xi.ntrunc;
    // When the conjugated frame is left invariant the two-point field is the
    // group translation law: jointly homogeneous of degree w_k per component,
    // hence complete below the working order.  Promoting it keeps charts at
    // different centres composable through transitions.
    bool exact_fields = true;
    for (const auto& x : f.fields)
        exact_fields = exact_fields && x.ntrunc >= kExactTrunc;
    if (exact_fields && nt >= frame_working_trunc(f, -1) && nt >= f.ws.r) {
        std::vector<WPolyVectorField> model = model_vector_fields(f0, nt);
        bool invariant = true;
        for (int j = 0; j < f.ws.n && invariant; ++j)
            for (int l = 0; l < f.ws.n && invariant; ++l)
                invariant = model[j].coeff[l].terms == f0.fields[j].coeff[l].terms;
        if (invariant) {
            ch.ef.xi = wpmap_retrunc(ch.ef.xi, kExactTrunc);
            ch.ef.xi_inv = wpmap_retrunc(ch.ef.xi_inv, kExactTrunc);
            ch.ntrunc = kExactTrunc;
        }
    }
    return ch;
}

ChartCoords elem_to_chart(const GroupoidChart& ch, const GroupoidElem& e) {
    check_elem_dims(ch, e);
    if (const TangentElem* v = as_tangent(e)) return {v->x, v->xi, Rat(0)};
    const GroupoidPair* p = as_pair(e);
    PointQ u = eps_apply(ch.base, p->x);
    PointQ a = wpmap_eval(ch.ef.xi, cat(u, eps_apply(ch.base, p->y)));
    return {p->x, dilate(Rat(1) / p->t, a, ch.frame.ws), p->t};
}

GroupoidElem elem_from_chart(const GroupoidChart& ch, const ChartCoords& c) {
    if ((int)c.x.size() != ch.frame.ws.n || (int)c.xi.size() != ch.frame.ws.n)
        throw InputError("chart coordinates have the wrong dimension");
    if (c.t == 0) return TangentElem{c.x, c.xi};
    PointQ u = eps_apply(ch.base, c.x);
    PointQ v = wpmap_eval(ch.ef.xi_inv, cat(u, dilate(c.t, c.xi, ch.frame.ws)));
    return GroupoidPair{c.x, eps_apply_inverse(ch.base, v), c.t};
}

PointQ elem_base(const GroupoidElem& e) {
    if (const GroupoidPair* p = as_pair(e)) return p->x;
    return as_tangent(e)->x;
}

PointQ elem_partner(const GroupoidElem& e) {
    if (const GroupoidPair* p = as_pair(e)) return p->y;
    return as_tangent(e)->x;
}

ChartOp chart_mult(const GroupoidChart& ch) {
    const WeightSequence& ws = ch.frame.ws;
    int n = ws.n;
    int nt = ch.ef.xi.ntrunc;
    std::vector<int> jw;
    jw.reserve(3 * n);
    for (int rep = 0; rep < 3; ++rep)
        jw.insert(jw.end(), ws.w.begin(), ws.w.end());
    auto v = [&](int i) { return wp_var(jw, nt, i); };

    std::vector<WPoly> v1;
    for (int i = 0; i < n; ++i) v1.push_back(v(i));
    for (int i = 0; i < n; ++i) v1.push_back(v(n + i));
    WPolyMap u2 = wpmap_subst(ch.ef.xi_inv, v1, jw);
    require_slotted(u2, ws.w, "partner offset");

    std::vector<WPoly> v2 = u2.comp;
    for (int i = 0; i < n; ++i) v2.push_back(v(2 * n + i));
    WPolyMap z = wpmap_subst(ch.ef.xi_inv, v2, jw);
    require_slotted(z, ws.w, "second partner offset");

    std::vector<WPoly> v3;
    for (int i = 0; i < n; ++i) v3.push_back(v(i));
    for (int i = 0; i < n; ++i) v3.push_back(z.comp[i]);
    WPolyMap m = wpmap_subst(ch.ef.xi, v3, jw);

    return split_op(param_remainder(m, n, 0).tilde, 3 * n);
}

ChartOp chart_invert(const GroupoidChart& ch) {
    const WeightSequence& ws = ch.frame.ws;
    int n = ws.n;
    int nt = ch.ef.xi.ntrunc;
    std::vector<int> jw;
    jw.reserve(2 * n);
    for (int rep = 0; rep < 2; ++rep)
        jw.insert(jw.end(), ws.w.begin(), ws.w.end());
    auto v = [&](int i) { return wp_var(jw, nt, i); };

    std::vector<WPoly> v1;
    for (int i = 0; i < 2 * n; ++i) v1.push_back(v(i));
    WPolyMap u2 = wpmap_subst(ch.ef.xi_inv, v1, jw);
    require_slotted(u2, ws.w, "partner offset");

    std::vector<WPoly> v2 = u2.comp;
    for (int i = 0; i < n; ++i) v2.push_back(v(i));
    WPolyMap m = wpmap_subst(ch.ef.xi, v2, jw);

    return split_op(param_remainder(m, n, 0).tilde, 2 * n);
}

WPolyMap chart_partner(const GroupoidChart& ch) {
    const WeightSequence& ws = ch.frame.ws;
    int n = ws.n;
    int nt = ch.ef.xi_inv.ntrunc;
    std::vector<int> kw;
    kw.reserve(2 * n + 1);
    kw.insert(kw.end(), ws.w.begin(), ws.w.end());
    kw.insert(kw.end(), ws.w.begin(), ws.w.end());
    kw.push_back(0);
    std::vector<WPoly> vals;
    for (int i = 0; i < n; ++i) vals.push_back(wp_var(kw, nt, i));
    for (int i = 0; i < n; ++i) {
        MultiIndex alpha(2 * n + 1, 0);
        alpha[n + i] = 1;
        alpha[2 * n] = ws.w[i];
        vals.push_back(wp_monomial(kw, nt, alpha, Rat(1)));
    }
    return wpmap_subst(ch.ef.xi_inv, vals, kw);
}

ChartTransition chart_transition(const GroupoidChart& from, const GroupoidChart& to) {
    const WeightSequence& ws = from.frame.ws;
    int n = ws.n;
    if (to.frame.ws.w != ws.w)
        throw InputError("charts live over different weight sequences");
    int nt = std::min(from.ef.xi.ntrunc, to.ef.xi.ntrunc);

    // Point map: to-chart coordinates of the point with from-chart
    // coordinates u.  Both chart maps are exact polynomials, so the
    // composite is exact even when the fields are jets.
    CoordinateChange c1 = eps_as_change(from.base);
    std::vector<WPoly> lin;
    lin.reserve(n);
    for (int k = 0; k < n; ++k) {
        WPoly s = wp_zero(ws.w, c1.inverse.ntrunc);
        for (int j = 0; j < n; ++j)
            s = wp_add(s, wp_scale(to.base.t.a[k][j], c1.inverse.comp[j]));
        lin.push_back(std::move(s));
    }
    WPolyMap hat_sh = to.base.hat;
    PointQ d = affine_apply(to.base.t, from.centre);
    for (WPoly& comp : hat_sh.comp) comp = wp_shift(comp, d);
    ChartTransition tr;
    tr.point = wpmap_subst(hat_sh, lin, ws.w);

    PointQ c2v = eps_apply(to.base, from.centre);
    bool moved = false;
    for (const Rat& c : c2v) moved = moved || c != 0;
    if (moved && to.ef.xi.ntrunc < kExactTrunc)
        throw PreconditionError(
            "the target chart's two-point field is truncated away from its centre");

    std::vector<int> jw;
    jw.reserve(2 * n);
    for (int rep = 0; rep < 2; ++rep)
        jw.insert(jw.end(), ws.w.begin(), ws.w.end());

    // Base and partner through the point map, centred at the image of the
    // from-centre so every substitution stays constant free.
    std::vector<WPoly> head;
    for (int i = 0; i < n; ++i) head.push_back(wp_var(jw, nt, i));
    WPolyMap q = wpmap_retrunc(from.ef.xi_inv, nt);
    WPolyMap pu = wpmap_subst(tr.point, head, jw);
    WPolyMap pq = wpmap_subst(tr.point, q.comp, jw);
    for (int k = 0; k < n; ++k) {
        pu.comp[k] = wp_sub(pu.comp[k], wp_const(jw, nt, c2v[k]));
        pq.comp[k] = wp_sub(pq.comp[k], wp_const(jw, nt, c2v[k]));
    }

    WPolyMap xi2 = to.ef.xi;
    if (moved) {
        // Both argument blocks of the field hold points of the to-chart, so
        // both move by the image of the from-centre.
        PointQ sh(2 * n, Rat(0));
        for (int k = 0; k < n; ++k) sh[k] = sh[n + k] = c2v[k];
        for (WPoly& comp : xi2.comp) comp = wp_shift(comp, sh);
    }
    xi2 = wpmap_retrunc(xi2, nt);

    std::vector<WPoly> vals = pu.comp;
    vals.insert(vals.end(), pq.comp.begin(), pq.comp.end());
    WPolyMap fibre = wpmap_subst(xi2, vals, jw);
    require_slotted(fibre, ws.w, "transition value");
    tr.op = split_op(param_remainder(fibre, n, 0).tilde, 2 * n);
    return tr;
}

ChartCoords transition_coords(const GroupoidChart& from, const GroupoidChart& to,
                              const ChartCoords& c) {
    if (c.t == 0) {
        if ((int)c.x.size() != from.frame.ws.n || (int)c.xi.size() != from.frame.ws.n)
            throw InputError("chart coordinates have the wrong dimension");
        ChartTransition tr = chart_transition(from, to);
        PointQ args = eps_apply(from.base, c.x);
        args.insert(args.end(), c.xi.begin(), c.xi.end());
        return {c.x, wpmap_eval(tr.op.at_zero, args), Rat(0)};
    }
    return elem_to_chart(to, elem_from_chart(from, c));
}

GroupoidElem elem_invert(const GroupoidChart& ch, const GroupoidElem& e) {
    check_elem_dims(ch, e);
    if (const GroupoidPair* p = as_pair(e)) return GroupoidPair{p->y, p->x, p->t};
    const TangentElem* v = as_tangent(e);
    ChartOp inv = chart_invert(ch);
    PointQ u = eps_apply(ch.base, v->x);
    return TangentElem{v->x, wpmap_eval(inv.at_zero, cat(u, v->xi))};
}

GroupoidElem elem_mult(const GroupoidChart& ch, const GroupoidElem& a,
                       const GroupoidElem& b) {
    check_elem_dims(ch, a);
    check_elem_dims(ch, b);
    const GroupoidPair* pa = as_pair(a);
    const GroupoidPair* pb = as_pair(b);
    if ((pa == nullptr) != (pb == nullptr))
        throw InputError("elements live at different parameter values");
    if (pa) {
        if (pa->t != pb->t)
            throw InputError("elements live at different parameter values");
        if (pa->y != pb->x)
            throw InputError("elements are not composable");
        return GroupoidPair{pa->x, pb->y, pa->t};
    }
    const TangentElem* va = as_tangent(a);
    const TangentElem* vb = as_tangent(b);
    if (va->x != vb->x)
        throw InputError("elements are not composable");
    ChartOp mul = chart_mult(ch);
    PointQ u = eps_apply(ch.base, va->x);
    return TangentElem{va->x, wpmap_eval(mul.at_zero, cat(cat(u, va->xi), vb->xi))};
}

GroupoidAxioms check_groupoid_axioms(const GroupoidChart& ch) {
    const WeightSequence& ws = ch.frame.ws;
    int n = ws.n;
    ChartOp mul = chart_mult(ch);
    ChartOp inv = chart_invert(ch);
    WPolyMap partner = chart_partner(ch);
    int nt = mul.full.ntrunc;
    GroupoidAxioms ax;

    {
        WPolyMap rid = wpmap_partial_eval(mul.full, 2 * n, n, PointQ(n, Rat(0)));
        WPolyMap expect = wpmap_zero(rid.src_w, ws.w, nt);
        for (int k = 0; k < n; ++k) expect.comp[k] = wp_var(rid.src_w, nt, n + k);
        ax.identity_right = (rid == expect);
        if (!ax.identity_right) ax.notes.push_back("unit on the right fails");
    }
    {
        WPolyMap lid = wpmap_partial_eval(mul.full, n, n, PointQ(n, Rat(0)));
        WPolyMap expect = wpmap_zero(lid.src_w, ws.w, nt);
        for (int k = 0; k < n; ++k) expect.comp[k] = wp_var(lid.src_w, nt, n + k);
        ax.identity_left = (lid == expect);
        if (!ax.identity_left) ax.notes.push_back("unit on the left fails");
    }
    {
        const std::vector<int>& iw = inv.full.src_w;
        require_slotted(inv.full, ws.w, "inverse value");
        std::vector<WPoly> vals;
        for (int i = 0; i < 2 * n; ++i) vals.push_back(wp_var(iw, nt, i));
        for (int i = 0; i < n; ++i) vals.push_back(inv.full.comp[i]);
        vals.push_back(wp_var(iw, nt, 2 * n));
        WPolyMap res = wpmap_subst(mul.full, vals, iw);
        ax.inverse_ok = map_is_zero(res);
        if (!ax.inverse_ok) ax.notes.push_back("inverse composition is not the unit");
    }
    {
        std::vector<int> jw;
        jw.reserve(4 * n + 1);
        for (int rep = 0; rep < 4; ++rep)
            jw.insert(jw.end(), ws.w.begin(), ws.w.end());
        jw.push_back(0);
        auto v = [&](int i) { return wp_var(jw, nt, i); };
        auto block = [&](std::vector<WPoly>& vals, int start) {
            for (int i = 0; i < n; ++i) vals.push_back(v(start + i));
        };

        std::vector<WPoly> va;
        block(va, 0);
        block(va, n);
        block(va, 2 * n);
        va.push_back(v(4 * n));
        WPolyMap ma = wpmap_subst(mul.full, va, jw);
        require_slotted(ma, ws.w, "product value");

        std::vector<WPoly> vp;
        block(vp, 0);
        block(vp, n);
        vp.push_back(v(4 * n));
        WPolyMap pl = wpmap_subst(partner, vp, jw);
        require_slotted(pl, ws.w, "partner base");

        std::vector<WPoly> vi = pl.comp;
        block(vi, 2 * n);
        block(vi, 3 * n);
        vi.push_back(v(4 * n));
        WPolyMap mi = wpmap_subst(mul.full, vi, jw);
        require_slotted(mi, ws.w, "inner product value");

        std::vector<WPoly> vl;
        block(vl, 0);
        for (int i = 0; i < n; ++i) vl.push_back(ma.comp[i]);
        block(vl, 3 * n);
        vl.push_back(v(4 * n));
        WPolyMap lhs = wpmap_subst(mul.full, vl, jw);

        std::vector<WPoly> vr;
        block(vr, 0);
        block(vr, n);
        for (int i = 0; i < n; ++i) vr.push_back(mi.comp[i]);
        vr.push_back(v(4 * n));
        WPolyMap rhs = wpmap_subst(mul.full, vr, jw);

        ax.assoc_ok = (lhs == rhs);
        if (!ax.assoc_ok) ax.notes.push_back("composition is not associative");
    }
    return ax;
}

GroupoidElem morphism_apply(const HFrame& src, const HFrame& tgt, const WPolyMap& phi,
                            const GroupoidElem& e, int ntrunc) {
    if (phi.ntrunc < kExactTrunc)
        throw PreconditionError("morphism action needs an exact map");
    if (phi.src_w != src.ws.w || phi.tgt_w != tgt.ws.w)
        throw InputError("map spaces do not match the frames");
    if (const GroupoidPair* p = as_pair(e)) {
        if ((int)p->x.size() != src.ws.n || (int)p->y.size() != src.ws.n)
            throw InputError("element dimension does not match the source");
        if (p->t == 0) throw InputError("pair elements need t != 0");
        return GroupoidPair{wpmap_eval(phi, p->x), wpmap_eval(phi, p->y), p->t};
    }
    const TangentElem* v = as_tangent(e);
    if ((int)v->x.size() != src.ws.n || (int)v->xi.size() != src.ws.n)
        throw InputError("element dimension does not match the source");
    HFrame fs = make_hframe(src.ws, src.fields, v->x);
    HFrame ft = make_hframe(tgt.ws, tgt.fields, wpmap_eval(phi, v->x));
    WPolyMap d = carnot_differential(fs, ft, phi, ntrunc);
    return TangentElem{wpmap_eval(phi, v->x), wpmap_eval(d, v->xi)};
}

ConvergenceProbe convergence_probe(const GroupoidChart& ch, const PointQ& x,
                                   const std::vector<PointQ>& ys,
                                   const std::vector<Rat>& ts) {
    int n = ch.frame.ws.n;
    if (ys.size() != ts.size() || ts.size() < 2)
        throw InputError("probe needs matching point and parameter lists, at least two entries");
    if ((int)x.size() != n) throw InputError("probe base has the wrong dimension");
    for (size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] == 0) throw InputError("probe parameters must be nonzero");
        for (size_t j = i + 1; j < ts.size(); ++j)
            if (ts[i] == ts[j]) throw InputError("probe parameters must be distinct");
    }
    ConvergenceProbe out;
    PointQ u = eps_apply(ch.base, x);
    for (size_t l = 0; l < ys.size(); ++l) {
        if ((int)ys[l].size() != n)
            throw InputError("probe point has the wrong dimension");
        PointQ a = wpmap_eval(ch.ef.xi, cat(u, eps_apply(ch.base, ys[l])));
        out.quotients.push_back(dilate(Rat(1) / ts[l], a, ch.frame.ws));
    }
    size_t m = ts.size();
    std::vector<PointQ> row = out.quotients;
    // diag entries T[j][j]; the gap compares the full table against the one
    // without the last node.
    PointQ diag_prev = row[0];
    PointQ diag_last = row[0];
    for (size_t j = 1; j < m; ++j) {
        std::vector<PointQ> next(m);
        for (size_t i = j; i < m; ++i) {
            next[i] = PointQ(n);
            for (int k = 0; k < n; ++k)
                next[i][k] = (ts[i - j] * row[i][k] - ts[i] * row[i - 1][k]) /
                             (ts[i - j] - ts[i]);
        }
        row = std::move(next);
        if (j == m - 2) diag_prev = row[j];
        if (j == m - 1) diag_last = row[j];
    }
    out.extrapolated = diag_last;
    Rat gap(0);
    for (int k = 0; k < n; ++k) {
        Rat d = diag_last[k] - diag_prev[k];
        gap += d * d;
    }
    out.gap_sq = gap;
    out.settled = (gap == 0);
    return out;
}

}  // namespace carnot
