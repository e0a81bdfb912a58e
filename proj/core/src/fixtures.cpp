#include "carnot/fixtures.hpp"

#include "carnot/error.hpp"

namespace carnot {

namespace {

WPoly mono(const std::vector<int>& w, MultiIndex alpha, const Rat& c) {
    return wp_monomial(w, kExactTrunc, alpha, c);
}

WPolyVectorField coordinate_field(const std::vector<int>& w, int l) {
    WPolyVectorField x = vf_zero(w, kExactTrunc);
    x.coeff[l] = wp_const(w, kExactTrunc, Rat(1));
    return x;
}

HFrame group_frame(const GradedNilpotentAlgebra& alg) {
    NilpotentGroup g = make_group(alg);
    return make_hframe(alg.ws, left_invariant_frame(g), PointQ(alg.ws.n, Rat(0)));
}

} // namespace

GradedNilpotentAlgebra heisenberg_algebra() {
    return make_algebra(make_weight_sequence({1, 1, 2}), {{0, 1, 2, Rat(1)}});
}

GradedNilpotentAlgebra engel_algebra() {
    return make_algebra(make_weight_sequence({1, 1, 2, 3}),
                        {{0, 1, 2, Rat(1)}, {0, 2, 3, Rat(1)}});
}

HFrame abelian2_frame() {
    std::vector<int> w = {1, 1};
    return make_hframe(make_weight_sequence(w),
                       {coordinate_field(w, 0), coordinate_field(w, 1)},
                       PointQ(2, Rat(0)));
}

HFrame heisenberg3_frame() { return group_frame(heisenberg_algebra()); }

HFrame engel4_frame() { return group_frame(engel_algebra()); }

HFrame heisenberg3_polarized_frame() {
    std::vector<int> w = {1, 1, 2};
    WPolyVectorField x2 = coordinate_field(w, 1);
    x2.coeff[2] = mono(w, {1, 0, 0}, Rat(1));
    return make_hframe(make_weight_sequence(w),
                       {coordinate_field(w, 0), x2, coordinate_field(w, 2)},
                       PointQ(3, Rat(0)));
}

HFrame engel4_polarized_frame() {
    std::vector<int> w = {1, 1, 2, 3};
    WPolyVectorField x2 = coordinate_field(w, 1);
    x2.coeff[2] = mono(w, {1, 0, 0, 0}, Rat(1));
    x2.coeff[3] = mono(w, {2, 0, 0, 0}, Rat(1, 2));
    WPolyVectorField x3 = coordinate_field(w, 2);
    x3.coeff[3] = mono(w, {1, 0, 0, 0}, Rat(1));
    return make_hframe(make_weight_sequence(w),
                       {coordinate_field(w, 0), x2, x3, coordinate_field(w, 3)},
                       PointQ(4, Rat(0)));
}

HFrame heisenberg3_perturbed_frame() {
    std::vector<int> w = {1, 1, 2};
    WPolyVectorField x1 = coordinate_field(w, 0);
    x1.coeff[2] = wp_add(mono(w, {0, 1, 0}, Rat(-1, 2)), mono(w, {1, 1, 0}, Rat(-1, 2)));
    WPolyVectorField x2 = coordinate_field(w, 1);
    x2.coeff[2] = mono(w, {1, 0, 0}, Rat(1, 2));
    return make_hframe(make_weight_sequence(w), {x1, x2, coordinate_field(w, 2)},
                       PointQ(3, Rat(0)));
}

HFrame nonprivileged3_frame() {
    std::vector<int> w = {1, 1, 2};
    WPolyVectorField x1 = coordinate_field(w, 0);
    x1.coeff[2] = wp_const(w, kExactTrunc, Rat(1));
    return make_hframe(make_weight_sequence(w),
                       {x1, coordinate_field(w, 1), coordinate_field(w, 2)},
                       PointQ(3, Rat(0)));
}

HFrame heat_lift_frame(const HFrame& f) {
    int n = f.ws.n;
    int p = layer_rank(f.ws, 2);

    std::vector<int> lw;
    lw.reserve(n + 1);
    for (int i = 0; i < p; ++i) lw.push_back(f.ws.w[i]);
    lw.push_back(2);
    for (int i = p; i < n; ++i) lw.push_back(f.ws.w[i]);
    WeightSequence lws = make_weight_sequence(lw);

    auto lift_poly = [&](const WPoly& q) {
        WPoly out = wp_zero(lw, q.ntrunc);
        for (const auto& [alpha, c] : q.terms) {
            MultiIndex beta(alpha.begin(), alpha.begin() + p);
            beta.push_back(0);
            beta.insert(beta.end(), alpha.begin() + p, alpha.end());
            out.terms.emplace(std::move(beta), c);
        }
        return out;
    };

    std::vector<WPolyVectorField> fields;
    fields.reserve(n + 1);
    for (int j = 0; j < n; ++j) {
        const WPolyVectorField& x = f.fields[j];
        WPolyVectorField lx = vf_zero(lw, x.ntrunc);
        for (int l = 0; l < n; ++l) lx.coeff[l < p ? l : l + 1] = lift_poly(x.coeff[l]);
        fields.push_back(std::move(lx));
    }
    fields.insert(fields.begin() + p, coordinate_field(lw, p));

    PointQ base = f.basepoint;
    base.insert(base.begin() + p, Rat(0));
    return make_hframe(lws, std::move(fields), std::move(base));
}

HFrame frame_shear_first_layer(const HFrame& f) {
    if (layer_rank(f.ws, 1) < 2)
        throw PreconditionError("the first layer holds fewer than two fields");
    WPoly x1 = wp_var(f.ws.w, f.fields[0].ntrunc, 0);
    WPolyVectorField extra = f.fields[0];
    for (WPoly& c : extra.coeff) c = wp_mul(x1, c);
    std::vector<WPolyVectorField> fields = f.fields;
    fields[1] = vf_add(fields[1], extra);
    return make_hframe(f.ws, std::move(fields), f.basepoint);
}

namespace {

WPolyMap heis_self_map(std::vector<WPoly> comp) {
    WPolyMap f;
    f.src_w = {1, 1, 2};
    f.tgt_w = {1, 1, 2};
    f.ntrunc = kExactTrunc;
    f.comp = std::move(comp);
    return f;
}

} // namespace

WPolyMap heisenberg_shear(const Rat& c) {
    std::vector<int> w = {1, 1, 2};
    return heis_self_map({mono(w, {1, 0, 0}, Rat(1)),
                          wp_add(mono(w, {0, 1, 0}, Rat(1)), mono(w, {2, 0, 0}, c)),
                          wp_add(mono(w, {0, 0, 1}, Rat(1)), mono(w, {3, 0, 0}, c / Rat(6)))});
}

WPolyMap heisenberg_dilation(const Rat& s) {
    std::vector<int> w = {1, 1, 2};
    return heis_self_map({mono(w, {1, 0, 0}, s), mono(w, {0, 1, 0}, s),
                          mono(w, {0, 0, 1}, s * s)});
}

WPolyMap heisenberg_swap() {
    std::vector<int> w = {1, 1, 2};
    return heis_self_map({mono(w, {0, 1, 0}, Rat(1)), mono(w, {1, 0, 0}, Rat(1)),
                          mono(w, {0, 0, 1}, Rat(-1))});
}

WPolyMap heisenberg_projection() {
    std::vector<int> w = {1, 1, 2};
    WPolyMap f;
    f.src_w = w;
    f.tgt_w = {1, 1};
    f.ntrunc = kExactTrunc;
    f.comp = {mono(w, {1, 0, 0}, Rat(1)), mono(w, {0, 1, 0}, Rat(1))};
    return f;
}

WPolyMap weight_raising_map() {
    std::vector<int> w = {1, 1, 2};
    return heis_self_map({wp_zero(w, kExactTrunc), wp_zero(w, kExactTrunc),
                          mono(w, {1, 0, 0}, Rat(1))});
}

} // namespace carnot
