#include "carnot/carnot_structure.hpp"

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

// Evaluating or shifting a truncated jet away from its centre is unsound.
void require_sound_at(const HFrame& f, const PointQ& x, const char* what) {
    if (!fields_exact(f) && !all_zero(x))
        throw PreconditionError(std::string(what) + " needs exact fields away from 0");
}

PolyMat pmat_add(const PolyMat& a, const PolyMat& b) {
    PolyMat out = a;
    for (size_t i = 0; i < out.size(); ++i)
        for (size_t j = 0; j < out[i].size(); ++j) out[i][j] = wp_add(out[i][j], b[i][j]);
    return out;
}

PolyMat pmat_neg(const PolyMat& a) {
    PolyMat out = a;
    for (auto& row : out)
        for (auto& p : row) p = wp_neg(p);
    return out;
}

bool pmat_is_zero(const PolyMat& a) {
    for (const auto& row : a)
        for (const auto& p : row)
            if (!p.is_zero()) return false;
    return true;
}

std::string term_str(const std::vector<int>& w, const MultiIndex& alpha, const Rat& c) {
    WPoly one = wp_zero(w, kExactTrunc);
    one.terms[alpha] = c;
    return wp_str(one);
}

} // namespace

PolyMat pmat_identity(const std::vector<int>& w, int ntrunc, int n) {
    PolyMat out(n, std::vector<WPoly>(n, wp_zero(w, ntrunc)));
    for (int i = 0; i < n; ++i) out[i][i] = wp_const(w, ntrunc, 1);
    return out;
}

PolyMat pmat_from_qmat(const QMat& a, const std::vector<int>& w, int ntrunc) {
    PolyMat out(a.size(), std::vector<WPoly>(a.empty() ? 0 : a[0].size(), wp_zero(w, ntrunc)));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) out[i][j] = wp_const(w, ntrunc, a[i][j]);
    return out;
}

PolyMat pmat_mul(const PolyMat& a, const PolyMat& b) {
    size_t m = a.size(), p = b.size(), q = b.empty() ? 0 : b[0].size();
    PolyMat out(m, std::vector<WPoly>(q));
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < q; ++j) {
            WPoly acc = wp_zero(a[i][0].w, a[i][0].ntrunc);
            for (size_t k = 0; k < p; ++k) acc = wp_add(acc, wp_mul(a[i][k], b[k][j]));
            out[i][j] = acc;
        }
    return out;
}

std::vector<WPoly> pmat_apply(const PolyMat& a, const std::vector<WPoly>& v) {
    std::vector<WPoly> out;
    for (size_t i = 0; i < a.size(); ++i) {
        WPoly acc = wp_zero(v[0].w, v[0].ntrunc);
        for (size_t k = 0; k < v.size(); ++k) acc = wp_add(acc, wp_mul(a[i][k], v[k]));
        out.push_back(acc);
    }
    return out;
}

QMat pmat_eval(const PolyMat& a, const PointQ& x) {
    QMat out(a.size(), PointQ(a.empty() ? 0 : a[0].size()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) out[i][j] = wp_eval(a[i][j], x);
    return out;
}

PolyMat pmat_inverse(const PolyMat& e) {
    int n = (int)e.size();
    const std::vector<int>& w = e[0][0].w;
    int ntrunc = e[0][0].ntrunc;
    if (ntrunc >= kExactTrunc)
        throw PreconditionError("matrix inverse is a jet; retrunc to a finite order first");
    for (int wi : w)
        if (wi <= 0) throw PreconditionError("matrix inverse jets need positively weighted variables");
    QMat e0inv = qmat_inverse(pmat_eval(e, PointQ(w.size(), Rat(0))));
    PolyMat m = pmat_add(pmat_mul(pmat_from_qmat(e0inv, w, ntrunc), e),
                         pmat_neg(pmat_identity(w, ntrunc, n)));
    PolyMat acc = pmat_identity(w, ntrunc, n);
    PolyMat pw = pmat_neg(m);
    for (int k = 1; !pmat_is_zero(pw); ++k) {
        if (k > ntrunc + 1) throw TruncationError("matrix inverse series did not terminate");
        acc = pmat_add(acc, pw);
        pw = pmat_mul(pw, pmat_neg(m));
    }
    return pmat_mul(acc, pmat_from_qmat(e0inv, w, ntrunc));
}

HFrame make_hframe(const WeightSequence& ws, std::vector<WPolyVectorField> fields,
                   PointQ basepoint) {
    if ((int)fields.size() != ws.n) throw InputError("frame needs one field per coordinate");
    if ((int)basepoint.size() != ws.n) throw InputError("basepoint dimension mismatch");
    for (int j = 0; j < ws.n; ++j) {
        if (fields[j].w != ws.w) throw InputError("field " + std::to_string(j + 1) +
                                                  " lives over the wrong variable space");
        if ((int)fields[j].coeff.size() != ws.n)
            throw InputError("field " + std::to_string(j + 1) + " has a bad coefficient count");
    }
    HFrame f{ws, std::move(fields), std::move(basepoint)};
    if (!fields_exact(f) && !all_zero(f.basepoint))
        throw InputError("truncated frames must be based at 0");
    if (!qmat_is_invertible(frame_matrix_at(f, f.basepoint)))
        throw InputError("coefficient matrix singular at the basepoint");
    return f;
}

PolyMat frame_matrix(const HFrame& f) {
    int n = f.ws.n;
    PolyMat e(n, std::vector<WPoly>(n));
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) e[l][j] = f.fields[j].coeff[l];
    return e;
}

QMat frame_matrix_at(const HFrame& f, const PointQ& x) {
    require_sound_at(f, x, "frame evaluation");
    int n = f.ws.n;
    QMat e(n, PointQ(n));
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) e[l][j] = wp_eval(f.fields[j].coeff[l], x);
    return e;
}

HFrame recentre(const HFrame& f, const PointQ& a) {
    require_sound_at(f, a, "recentring");
    HFrame out = f;
    for (auto& x : out.fields)
        for (auto& p : x.coeff) p = wp_shift(p, a);
    for (int i = 0; i < f.ws.n; ++i) out.basepoint[i] = f.basepoint[i] - a[i];
    return out;
}

int frame_working_trunc(const HFrame& f, int requested) {
    int finite = kExactTrunc;
    for (const auto& x : f.fields) finite = std::min(finite, x.ntrunc);
    if (requested >= 0) return std::min(requested, finite);
    if (finite < kExactTrunc) return finite;
    long long maxdeg = 0;
    for (const auto& x : f.fields)
        for (const auto& p : x.coeff)
            for (const auto& [alpha, c] : p.terms)
                maxdeg = std::max(maxdeg, weighted_degree(alpha, f.ws.w));
    return std::max<long long>(2 * f.ws.r, maxdeg + f.ws.r);
}

BracketData bracket_coefficients(const HFrame& f, int ntrunc) {
    HFrame fr = all_zero(f.basepoint) ? f : recentre(f, f.basepoint);
    int nt = frame_working_trunc(fr, ntrunc);
    std::vector<WPolyVectorField> fx;
    for (const auto& x : fr.fields) fx.push_back(vf_retrunc(x, nt));
    HFrame g{fr.ws, fx, PointQ(fr.ws.n, Rat(0))};

    BracketData out;
    out.ws = f.ws;
    out.basepoint = f.basepoint;
    PolyMat einv = pmat_inverse(frame_matrix(g));
    int n = f.ws.n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            WPolyVectorField br = lie_bracket(fx[i], fx[j]);
            std::vector<WPoly> lv = pmat_apply(einv, br.coeff);
            for (int k = 0; k < n; ++k) {
                if (lv[k].is_zero()) continue;
                out.L[{i, j, k}] = lv[k];
                if (f.ws.w[k] > f.ws.w[i] + f.ws.w[j]) {
                    const auto& [alpha, c] = *lv[k].terms.begin();
                    std::ostringstream os;
                    os << "not a Carnot filtration: [X_" << i + 1 << ", X_" << j + 1
                       << "] has a component on X_" << k + 1 << " (weight " << f.ws.w[k]
                       << " > " << f.ws.w[i] + f.ws.w[j] << "), lowest term "
                       << term_str(f.ws.w, alpha, c);
                    out.report.violations.push_back(os.str());
                }
            }
        }
    out.report.ok = out.report.violations.empty();
    return out;
}

GradedNilpotentAlgebra tangent_algebra_at(const HFrame& f, const PointQ& a) {
    require_sound_at(f, a, "tangent algebra");
    QMat e = frame_matrix_at(f, a);
    if (!qmat_is_invertible(e)) throw PreconditionError("frame not invertible at the point");
    QMat einv = qmat_inverse(e);
    int n = f.ws.n;
    std::vector<StructureConstant> raw;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            WPolyVectorField br = lie_bracket(f.fields[i], f.fields[j]);
            PointQ bv(n);
            for (int l = 0; l < n; ++l) bv[l] = wp_eval(br.coeff[l], a);
            PointQ lv = qmat_apply(einv, bv);
            for (int k = 0; k < n; ++k) {
                if (lv[k] == 0) continue;
                if (f.ws.w[k] > f.ws.w[i] + f.ws.w[j])
                    throw PreconditionError(
                        "bracket leaves the filtration at the point: [X_" + std::to_string(i + 1) +
                        ", X_" + std::to_string(j + 1) + "] has X_" + std::to_string(k + 1) +
                        "-component " + rat_str(lv[k]));
                if (f.ws.w[k] == f.ws.w[i] + f.ws.w[j]) raw.push_back({i, j, k, lv[k]});
            }
        }
    return make_algebra(f.ws, raw);
}

FiltrationReport validate_filtration(const HFrame& f, int ntrunc) {
    FiltrationReport report;
    QMat e = frame_matrix_at(f, f.basepoint);
    if (!qmat_is_invertible(e)) {
        report.ok = false;
        report.violations.push_back("coefficient matrix singular at the basepoint");
        return report;
    }
    report = bracket_coefficients(f, ntrunc).report;

    // Informational: do iterated brackets of the weight-one fields span each
    // layer at the basepoint?
    HFrame fr = all_zero(f.basepoint) ? f : recentre(f, f.basepoint);
    std::vector<WPolyVectorField> layer1;
    for (int j = 0; j < f.ws.n; ++j)
        if (f.ws.w[j] == 1) layer1.push_back(fr.fields[j]);
    QMat vals;
    auto value_at_0 = [&](const WPolyVectorField& x) {
        PointQ v(f.ws.n);
        for (int l = 0; l < f.ws.n; ++l) v[l] = wp_eval(x.coeff[l], PointQ(f.ws.n, Rat(0)));
        return v;
    };
    for (const auto& x : layer1) vals.push_back(value_at_0(x));
    std::vector<WPolyVectorField> cur = layer1;
    bool capped = false, all_full = true;
    for (int v = 2; v <= f.ws.r; ++v) {
        std::vector<WPolyVectorField> next;
        for (const auto& b : cur)
            for (const auto& x : layer1) {
                if (next.size() > 4096) { capped = true; break; }
                next.push_back(lie_bracket(b, x));
            }
        if (capped) break;
        for (const auto& b : next) vals.push_back(value_at_0(b));
        cur = std::move(next);
        int want = 0;
        for (int j = 0; j < f.ws.n; ++j)
            if (f.ws.w[j] <= v) ++want;
        int have = qmat_rank(vals);
        if (have < want) {
            all_full = false;
            std::ostringstream os;
            os << "weight-one fields do not span layer " << v << " at the basepoint (rank "
               << have << " of " << want << ")";
            report.notes.push_back(os.str());
        }
    }
    if (capped)
        report.notes.push_back("bracket generation check skipped (too many brackets)");
    else if (all_full)
        report.notes.push_back("weight-one fields bracket-generate every layer at the basepoint");
    return report;
}

} // namespace carnot
