#include "carnot/carnot_map.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include "carnot/error.hpp"

namespace carnot {

namespace {

bool all_zero(const PointQ& a) {
    for (const Rat& c : a)
        if (c != 0) return false;
    return true;
}

bool map_exact(const WPolyMap& f) { return f.ntrunc >= kExactTrunc; }

bool fields_exact(const HFrame& f) {
    for (const auto& x : f.fields)
        if (x.ntrunc < kExactTrunc) return false;
    return true;
}

std::string lowest_term(const WPoly& p) {
    auto best = p.terms.end();
    long long bd = 0;
    for (auto it = p.terms.begin(); it != p.terms.end(); ++it) {
        long long d = weighted_degree(it->first, p.w);
        if (best == p.terms.end() || d < bd) {
            best = it;
            bd = d;
        }
    }
    if (best == p.terms.end()) return "0";
    return wp_str(wp_monomial(p.w, p.ntrunc, best->first, best->second));
}

int resolve_trunc(const HFrame& src, const HFrame& tgt, const WPolyMap& phi,
                  int requested) {
    int nt = std::min(frame_working_trunc(src, requested),
                      frame_working_trunc(tgt, requested));
    if (phi.ntrunc < kExactTrunc) nt = std::min(nt, phi.ntrunc);
    return nt;
}

// Common validation: matching spaces, basepoint sent to basepoint, frames
// and map recentred at 0.
struct MapSetup {
    HFrame src;
    HFrame tgt;
    WPolyMap phi;
    int nt = 0;
    bool exact = false;
};

MapSetup prepare(const HFrame& src, const HFrame& tgt, const WPolyMap& phi,
                 int ntrunc) {
    if (phi.src_w != src.ws.w)
        throw InputError("map source space does not match the source frame");
    if (phi.tgt_w != tgt.ws.w)
        throw InputError("map target space does not match the target frame");
    if ((int)phi.comp.size() != tgt.ws.n)
        throw InputError("map component count does not match the target frame");
    bool ex_phi = map_exact(phi);
    PointQ fa(tgt.ws.n, Rat(0));
    if (ex_phi) {
        fa = wpmap_eval(phi, src.basepoint);
    } else {
        if (!all_zero(src.basepoint) || !all_zero(tgt.basepoint))
            throw PreconditionError("truncated maps need frames based at 0");
        MultiIndex z(phi.src_dim(), 0);
        for (const WPoly& p : phi.comp)
            if (p.terms.count(z))
                throw PreconditionError("truncated maps must fix 0");
    }
    if (fa != tgt.basepoint)
        throw PreconditionError(
            "map does not send the source basepoint to the target basepoint");
    MapSetup s;
    s.src = all_zero(src.basepoint) ? src : recentre(src, src.basepoint);
    s.tgt = all_zero(tgt.basepoint) ? tgt : recentre(tgt, tgt.basepoint);
    s.phi = recentre_map(phi, src.basepoint);
    s.nt = resolve_trunc(src, tgt, phi, ntrunc);
    s.exact = ex_phi && fields_exact(src) && fields_exact(tgt);
    return s;
}

std::string pointwise_violation(const CarnotMapReport& rep) {
    for (const auto& v : rep.violations)
        if (v.find("at the basepoint") != std::string::npos &&
            v.find("value") != std::string::npos)
            return v;
    return rep.violations.empty() ? std::string("filtration violation")
                                  : rep.violations.front();
}

}  // namespace

WPolyMap recentre_map(const WPolyMap& phi, const PointQ& a) {
    if ((int)a.size() != phi.src_dim())
        throw InputError("basepoint dimension does not match the map source");
    bool zero_a = all_zero(a);
    if (!zero_a && !map_exact(phi))
        throw PreconditionError("recentring needs an exact map");
    WPolyMap out = phi;
    for (int k = 0; k < phi.tgt_dim(); ++k) {
        WPoly s = zero_a ? phi.comp[k] : wp_shift(phi.comp[k], a);
        s.terms.erase(MultiIndex(phi.src_dim(), 0));
        out.comp[k] = s;
    }
    return out;
}

PolyMat frame_decompose(const HFrame& src, const HFrame& tgt,
                        const WPolyMap& phi, int ntrunc) {
    MapSetup s = prepare(src, tgt, phi, ntrunc);
    int ns = s.src.ws.n;
    int nt = s.tgt.ws.n;
    WPolyMap pj = wpmap_retrunc(s.phi, s.nt);
    PolyMat esub(nt, std::vector<WPoly>(nt));
    for (int l = 0; l < nt; ++l)
        for (int k = 0; k < nt; ++k)
            esub[l][k] = wp_subst(wp_retrunc(s.tgt.fields[k].coeff[l], s.nt), pj.comp);
    PolyMat einv = pmat_inverse(esub);
    PolyMat c(nt, std::vector<WPoly>(ns));
    for (int j = 0; j < ns; ++j) {
        WPolyVectorField xj = vf_retrunc(s.src.fields[j], s.nt);
        std::vector<WPoly> lhs(nt);
        for (int l = 0; l < nt; ++l) lhs[l] = vf_apply(xj, pj.comp[l]);
        std::vector<WPoly> col = pmat_apply(einv, lhs);
        for (int k = 0; k < nt; ++k) c[k][j] = col[k];
    }
    return c;
}

CarnotMapReport is_carnot_map(const HFrame& src, const HFrame& tgt,
                              const WPolyMap& phi, int ntrunc) {
    PolyMat c = frame_decompose(src, tgt, phi, ntrunc);
    CarnotMapReport rep;
    rep.ok = true;
    rep.graded_everywhere = true;
    for (int j = 0; j < src.ws.n; ++j) {
        for (int k = 0; k < tgt.ws.n; ++k) {
            if (tgt.ws.w[k] <= src.ws.w[j]) continue;
            const WPoly& q = c[k][j];
            if (q.is_zero()) continue;
            rep.graded_everywhere = false;
            std::ostringstream os;
            os << "the image of X_" << (j + 1) << " has an X'_" << (k + 1)
               << " component (weight " << tgt.ws.w[k] << " > " << src.ws.w[j]
               << ")";
            auto it = q.terms.find(MultiIndex(q.nvars(), 0));
            if (it != q.terms.end()) {
                rep.ok = false;
                os << " with value " << rat_str(it->second) << " at the basepoint";
            } else {
                os << " away from the basepoint, lowest term " << lowest_term(q);
            }
            rep.violations.push_back(os.str());
        }
    }
    return rep;
}

WPolyMap map_in_eps_charts(const HFrame& src, const HFrame& tgt,
                           const WPolyMap& phi, int ntrunc) {
    MapSetup s = prepare(src, tgt, phi, ntrunc);
    PointQ zs(s.src.ws.n, Rat(0));
    PointQ zt(s.tgt.ws.n, Rat(0));
    CoordinateChange cs = eps_as_change(eps_carnot(s.src, zs, ntrunc));
    CoordinateChange ct = eps_as_change(eps_carnot(s.tgt, zt, ntrunc));
    if (s.exact) {
        WPolyMap mid = wpmap_compose(s.phi, cs.inverse);
        return wpmap_compose(ct.forward, mid);
    }
    WPolyMap mid = wpmap_compose(wpmap_retrunc(s.phi, s.nt),
                                 wpmap_retrunc(cs.inverse, s.nt));
    return wpmap_compose(wpmap_retrunc(ct.forward, s.nt), mid);
}

WPolyMap carnot_differential(const HFrame& src, const HFrame& tgt,
                             const WPolyMap& phi, int ntrunc) {
    CarnotMapReport rep = is_carnot_map(src, tgt, phi, ntrunc);
    if (!rep.ok)
        throw PreconditionError("no graded differential: " + pointwise_violation(rep));
    WPolyMap d = hom_part(map_in_eps_charts(src, tgt, phi, ntrunc), 0);
    // Terms of component k sit at weighted degree w'_k <= r', so the part is
    // complete once the working order reaches the target step.
    if (d.ntrunc < kExactTrunc && d.ntrunc >= tgt.ws.r)
        d = wpmap_retrunc(d, kExactTrunc);
    return d;
}

bool differential_is_morphism(const WPolyMap& d, const NilpotentGroup& g_src,
                              const NilpotentGroup& g_tgt) {
    if (d.src_w != g_src.alg.ws.w || d.tgt_w != g_tgt.alg.ws.w)
        throw InputError("differential spaces do not match the groups");
    if (!map_exact(d))
        throw PreconditionError("morphism check needs an exact differential");
    if (g_src.ntrunc < g_src.alg.ws.r || g_tgt.ntrunc < g_tgt.alg.ws.r)
        throw PreconditionError("morphism check needs complete group laws");
    WPolyMap law_s = wpmap_retrunc(g_src.law, kExactTrunc);
    WPolyMap law_t = wpmap_retrunc(g_tgt.law, kExactTrunc);
    WPolyMap lhs = wpmap_compose(d, law_s);
    const std::vector<int>& dw = law_s.src_w;
    int n = d.src_dim();
    std::vector<WPoly> xv, yv;
    for (int i = 0; i < n; ++i) xv.push_back(wp_var(dw, kExactTrunc, i));
    for (int i = 0; i < n; ++i) yv.push_back(wp_var(dw, kExactTrunc, n + i));
    WPolyMap dx = wpmap_subst(d, xv, dw);
    WPolyMap dy = wpmap_subst(d, yv, dw);
    std::vector<WPoly> vals;
    vals.reserve(dx.comp.size() + dy.comp.size());
    for (const WPoly& p : dx.comp) vals.push_back(p);
    for (const WPoly& p : dy.comp) vals.push_back(p);
    WPolyMap rhs = wpmap_subst(law_t, vals, dw);
    return lhs == rhs;
}

MapOsculation map_osculation_residual(const HFrame& src, const HFrame& tgt,
                                      const WPolyMap& phi, int ntrunc) {
    WPolyMap fe = map_in_eps_charts(src, tgt, phi, ntrunc);
    MapOsculation out;
    out.residual = wpmap_sub(fe, hom_part(fe, 0));
    out.order = weighted_order(out.residual);
    out.order_positive = !out.order.has_value() || *out.order >= 1;
    return out;
}

PansuResult pansu_numeric(const HFrame& src, const HFrame& tgt,
                          const WPolyMap& phi, const std::vector<PointQ>& probes,
                          const std::vector<Rat>& t_seq, int ntrunc) {
    MapSetup s = prepare(src, tgt, phi, ntrunc);
    if (!s.exact)
        throw PreconditionError("difference quotients need exact frames and an exact map");
    if (probes.empty())
        throw InputError("difference quotients need at least one probe point");
    CarnotMapReport rep = is_carnot_map(src, tgt, phi, ntrunc);
    if (!rep.ok)
        throw PreconditionError("no graded differential: " + pointwise_violation(rep));
    WPolyMap fe = map_in_eps_charts(src, tgt, phi, ntrunc);
    PansuResult out;
    out.differential = hom_part(fe, 0);
    // delta'_{1/t} res(delta_t y) is the full rescaled deviation: the
    // degree-0 part is dilation invariant.
    WPolyMap res = wpmap_sub(fe, out.differential);
    for (const Rat& t : t_seq) {
        if (t == 0) throw InputError("difference quotients need t != 0");
        Rat worst(0);
        for (const PointQ& y : probes) {
            if ((int)y.size() != src.ws.n)
                throw InputError("probe dimension does not match the source");
            PointQ v = wpmap_eval(res, dilate(t, y, src.ws));
            PointQ dev = dilate(Rat(1) / t, v, tgt.ws);
            Rat ss(0);
            for (const Rat& di : dev) ss += di * di;
            if (ss > worst) worst = ss;
        }
        PansuSample smp;
        smp.t = t;
        smp.deviation_sq = worst;
        smp.deviation = std::sqrt(to_double(worst));
        out.samples.push_back(smp);
    }
    out.exact = !out.samples.empty();
    for (const PansuSample& smp : out.samples)
        if (smp.deviation_sq != 0) out.exact = false;
    for (std::size_t i = 1; i < out.samples.size(); ++i) {
        const PansuSample& a = out.samples[i - 1];
        const PansuSample& b = out.samples[i];
        if (a.deviation_sq == 0 || b.deviation_sq == 0) continue;
        double ta = std::abs(to_double(a.t));
        double tb = std::abs(to_double(b.t));
        if (ta == tb) continue;
        out.slopes.push_back(std::log(a.deviation / b.deviation) / std::log(ta / tb));
    }
    return out;
}

}  // namespace carnot
