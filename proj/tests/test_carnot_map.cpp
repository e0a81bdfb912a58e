#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carnot/carnot_map.hpp"

using namespace carnot;

namespace {

GradedNilpotentAlgebra heis() {
    return make_algebra(make_weight_sequence({1, 1, 2}), {{0, 1, 2, Rat(1)}});
}

GradedNilpotentAlgebra engel() {
    return make_algebra(make_weight_sequence({1, 1, 2, 3}),
                        {{0, 1, 2, Rat(1)}, {0, 2, 3, Rat(1)}});
}

GradedNilpotentAlgebra abelian2() {
    return make_algebra(make_weight_sequence({1, 1}), {});
}

HFrame group_frame_at(const GradedNilpotentAlgebra& alg, const PointQ& a) {
    NilpotentGroup g = make_group(alg);
    return make_hframe(alg.ws, left_invariant_frame(g), a);
}

HFrame group_frame(const GradedNilpotentAlgebra& alg) {
    return group_frame_at(alg, PointQ(alg.ws.n, Rat(0)));
}

WPolyMap make_map(const std::vector<int>& sw, const std::vector<int>& tw,
                  const std::vector<std::vector<std::pair<MultiIndex, Rat>>>& comps) {
    WPolyMap f = wpmap_zero(sw, tw, kExactTrunc);
    for (size_t k = 0; k < comps.size(); ++k)
        for (const auto& [alpha, c] : comps[k]) wp_add_term(f.comp[k], alpha, c);
    return f;
}

const std::vector<int> kHw = {1, 1, 2};

// (x1, x2 + c x1^2, x3 + c x1^3 / 6): composes as shear(c) o shear(d) =
// shear(c + d).
WPolyMap shear(const Rat& c) {
    return make_map(kHw, kHw,
                    {{{{1, 0, 0}, Rat(1)}},
                     {{{0, 1, 0}, Rat(1)}, {{2, 0, 0}, c}},
                     {{{0, 0, 1}, Rat(1)}, {{3, 0, 0}, c / 6}}});
}

WPolyMap cubic_map() {
    return make_map(kHw, kHw,
                    {{{{1, 0, 0}, Rat(1)}},
                     {{{0, 1, 0}, Rat(1)}},
                     {{{0, 0, 1}, Rat(1)}, {{3, 0, 0}, Rat(1)}}});
}

WPolyMap swap_map() {
    return make_map(kHw, kHw,
                    {{{{0, 1, 0}, Rat(1)}},
                     {{{1, 0, 0}, Rat(1)}},
                     {{{0, 0, 1}, Rat(-1)}}});
}

WPolyMap collapse_map() {
    return make_map(kHw, kHw, {{}, {}, {{{1, 0, 0}, Rat(1)}}});
}

}  // namespace

TEST_CASE("frame decomposition satisfies its defining identity") {
    HFrame f = group_frame(heis());
    for (const WPolyMap& phi : {shear(Rat(1)), cubic_map()}) {
        PolyMat c = frame_decompose(f, f, phi);
        int nt = c[0][0].ntrunc;
        WPolyMap pj = wpmap_retrunc(phi, nt);
        for (int j = 0; j < 3; ++j) {
            WPolyVectorField xj = vf_retrunc(f.fields[j], nt);
            for (int l = 0; l < 3; ++l) {
                WPoly lhs = vf_apply(xj, pj.comp[l]);
                WPoly rhs = wp_zero(kHw, nt);
                for (int k = 0; k < 3; ++k)
                    rhs = wp_add(rhs, wp_mul(c[k][j],
                                             wp_subst(wp_retrunc(f.fields[k].coeff[l], nt),
                                                      pj.comp)));
                CHECK(lhs == rhs);
            }
        }
    }
}

TEST_CASE("shear decomposition has one off-diagonal coefficient") {
    HFrame f = group_frame(heis());
    PolyMat c = frame_decompose(f, f, shear(Rat(1)));
    int nt = c[0][0].ntrunc;
    WPoly one = wp_const(kHw, nt, Rat(1));
    WPoly zero = wp_zero(kHw, nt);
    WPoly two_x1 = wp_monomial(kHw, nt, {1, 0, 0}, Rat(2));
    CHECK(c[0][0] == one);
    CHECK(c[1][1] == one);
    CHECK(c[2][2] == one);
    CHECK(c[1][0] == two_x1);
    CHECK(c[0][1] == zero);
    CHECK(c[2][0] == zero);
    CHECK(c[2][1] == zero);
    CHECK(c[0][2] == zero);
    CHECK(c[1][2] == zero);
}

TEST_CASE("grading report separates pointwise from jet-wide") {
    HFrame f = group_frame(heis());

    CarnotMapReport rs = is_carnot_map(f, f, shear(Rat(1)));
    CHECK(rs.ok);
    CHECK(rs.graded_everywhere);
    CHECK(rs.violations.empty());

    CarnotMapReport rc = is_carnot_map(f, f, cubic_map());
    CHECK(rc.ok);
    CHECK(!rc.graded_everywhere);
    REQUIRE(rc.violations.size() == 1);
    CHECK(rc.violations[0].find("X_1") != std::string::npos);
    CHECK(rc.violations[0].find("X'_3") != std::string::npos);
    CHECK(rc.violations[0].find("away from the basepoint") != std::string::npos);

    PointQ a = {Rat(1), Rat(0), Rat(0)};
    HFrame fa = group_frame_at(heis(), a);
    HFrame fb = group_frame_at(heis(), wpmap_eval(cubic_map(), a));
    CarnotMapReport ra = is_carnot_map(fa, fb, cubic_map());
    CHECK(!ra.ok);
    CHECK(!ra.graded_everywhere);
    REQUIRE(!ra.violations.empty());
    CHECK(ra.violations[0].find("value 3 at the basepoint") != std::string::npos);

    CarnotMapReport rv = is_carnot_map(f, f, collapse_map());
    CHECK(!rv.ok);
    REQUIRE(!rv.violations.empty());
    CHECK(rv.violations[0].find("value 1 at the basepoint") != std::string::npos);
}

TEST_CASE("shear in eps charts at a generic basepoint, by hand") {
    PointQ a = {Rat(1), Rat(1, 2), Rat(-1)};
    WPolyMap phi = shear(Rat(1));
    PointQ b = wpmap_eval(phi, a);
    CHECK(b == PointQ{Rat(1), Rat(3, 2), Rat(-5, 6)});
    HFrame src = group_frame_at(heis(), a);
    HFrame tgt = group_frame_at(heis(), b);

    WPolyMap fe = map_in_eps_charts(src, tgt, phi);
    WPolyMap fe_expect = make_map(
        kHw, kHw,
        {{{{1, 0, 0}, Rat(1)}},
         {{{1, 0, 0}, Rat(2)}, {{0, 1, 0}, Rat(1)}, {{2, 0, 0}, Rat(1)}},
         {{{0, 0, 1}, Rat(1)}, {{3, 0, 0}, Rat(1, 6)}}});
    CHECK(fe == fe_expect);

    WPolyMap d = carnot_differential(src, tgt, phi);
    QMat m = qmat_identity(3);
    m[1][0] = Rat(2);
    CHECK(d == wpmap_linear(m, kHw, kHw, kExactTrunc));
    CHECK(differential_is_morphism(d, make_group(heis()), make_group(heis())));

    MapOsculation osc = map_osculation_residual(src, tgt, phi);
    WPolyMap r_expect = make_map(kHw, kHw,
                                 {{},
                                  {{{2, 0, 0}, Rat(1)}},
                                  {{{3, 0, 0}, Rat(1, 6)}}});
    CHECK(osc.residual == r_expect);
    REQUIRE(osc.order.has_value());
    CHECK(*osc.order == 1);
    CHECK(osc.order_positive);
}

TEST_CASE("shears compose and the chain rule holds for differentials") {
    Rat c(1), dd(-2);
    CHECK(wpmap_compose(shear(c), shear(dd)) == shear(c + dd));

    PointQ a = {Rat(1), Rat(1, 2), Rat(-1)};
    PointQ b = wpmap_eval(shear(dd), a);
    PointQ cc = wpmap_eval(shear(c), b);
    HFrame fa = group_frame_at(heis(), a);
    HFrame fb = group_frame_at(heis(), b);
    HFrame fc = group_frame_at(heis(), cc);
    WPolyMap d_outer = carnot_differential(fb, fc, shear(c));
    WPolyMap d_inner = carnot_differential(fa, fb, shear(dd));
    WPolyMap d_both = carnot_differential(fa, fc, shear(c + dd));
    CHECK(wpmap_compose(d_outer, d_inner) == d_both);
}

TEST_CASE("graded morphisms are their own differential") {
    HFrame f = group_frame(heis());
    NilpotentGroup g = make_group(heis());

    WPolyMap sw = swap_map();
    CarnotMapReport rep = is_carnot_map(f, f, sw);
    CHECK(rep.ok);
    CHECK(rep.graded_everywhere);
    CHECK(carnot_differential(f, f, sw) == sw);
    CHECK(differential_is_morphism(sw, g, g));
    MapOsculation osc = map_osculation_residual(f, f, sw);
    CHECK(!osc.order.has_value());
    CHECK(osc.order_positive);

    WPolyMap dil = make_map(kHw, kHw,
                            {{{{1, 0, 0}, Rat(2)}},
                             {{{0, 1, 0}, Rat(2)}},
                             {{{0, 0, 1}, Rat(4)}}});
    CHECK(carnot_differential(f, f, dil) == dil);
    CHECK(differential_is_morphism(dil, g, g));

    std::vector<int> ew = {1, 1, 2, 3};
    WPolyMap edil = make_map(ew, ew,
                             {{{{1, 0, 0, 0}, Rat(2)}},
                              {{{0, 1, 0, 0}, Rat(2)}},
                              {{{0, 0, 1, 0}, Rat(4)}},
                              {{{0, 0, 0, 1}, Rat(8)}}});
    HFrame fe = group_frame(engel());
    NilpotentGroup ge = make_group(engel());
    CHECK(carnot_differential(fe, fe, edil) == edil);
    CHECK(differential_is_morphism(edil, ge, ge));
}

TEST_CASE("layer inclusion is pointwise graded but yields no morphism") {
    std::vector<int> ew = {1, 1, 2, 3};
    WPolyMap inc = make_map(kHw, ew,
                            {{{{1, 0, 0}, Rat(1)}},
                             {{{0, 1, 0}, Rat(1)}},
                             {{{0, 0, 1}, Rat(1)}},
                             {}});
    HFrame f = group_frame(heis());
    HFrame fe = group_frame(engel());
    CarnotMapReport rep = is_carnot_map(f, fe, inc);
    CHECK(rep.ok);
    CHECK(!rep.graded_everywhere);
    CHECK(rep.violations.size() == 3);
    WPolyMap d = carnot_differential(f, fe, inc);
    CHECK(d == inc);
    CHECK(!differential_is_morphism(d, make_group(heis()), make_group(engel())));
}

TEST_CASE("projection to the horizontal coordinates is a graded morphism") {
    HFrame f = group_frame(heis());
    HFrame ab = group_frame(abelian2());
    WPolyMap proj = make_map(kHw, {1, 1},
                             {{{{1, 0, 0}, Rat(1)}}, {{{0, 1, 0}, Rat(1)}}});
    PolyMat c = frame_decompose(f, ab, proj);
    CHECK(c[0][2].is_zero());
    CHECK(c[1][2].is_zero());
    CarnotMapReport rep = is_carnot_map(f, ab, proj);
    CHECK(rep.ok);
    CHECK(rep.graded_everywhere);
    WPolyMap d = carnot_differential(f, ab, proj);
    CHECK(d == proj);
    CHECK(differential_is_morphism(d, make_group(heis()), make_group(abelian2())));
}

TEST_CASE("left translations conjugate to the identity in eps charts") {
    struct Case {
        GradedNilpotentAlgebra alg;
        PointQ a;
        PointQ c;
    };
    std::vector<Case> cases = {
        {heis(), {Rat(1, 3), Rat(1), Rat(-1)}, {Rat(1), Rat(-2), Rat(1, 2)}},
        {engel(),
         {Rat(1, 3), Rat(1), Rat(-1), Rat(2)},
         {Rat(1), Rat(-2), Rat(1, 2), Rat(-1, 3)}}};
    for (const Case& cs : cases) {
        NilpotentGroup g = make_group(cs.alg);
        WPolyMap phi = left_translation_jet(g, cs.c);
        HFrame src = group_frame_at(cs.alg, cs.a);
        HFrame tgt = group_frame_at(cs.alg, group_mul(g, cs.c, cs.a));
        WPolyMap fe = map_in_eps_charts(src, tgt, phi);
        CHECK(fe == wpmap_identity(cs.alg.ws.w, kExactTrunc));
        MapOsculation osc = map_osculation_residual(src, tgt, phi);
        CHECK(!osc.order.has_value());
        CHECK(osc.order_positive);
        PansuResult pr = pansu_numeric(src, tgt, phi,
                                       {PointQ(cs.alg.ws.n, Rat(1))},
                                       {Rat(1, 2), Rat(1, 4)});
        CHECK(pr.exact);
        for (const PansuSample& s : pr.samples) CHECK(s.deviation_sq == 0);
        CHECK(pr.slopes.empty());
    }
}

TEST_CASE("cubic shear at 0: residual is the pure cubic and decays linearly") {
    HFrame f = group_frame(heis());
    WPolyMap phi = cubic_map();

    WPolyMap fe = map_in_eps_charts(f, f, phi);
    CHECK(fe == phi);
    MapOsculation osc = map_osculation_residual(f, f, phi);
    WPolyMap r_expect = make_map(kHw, kHw, {{}, {}, {{{3, 0, 0}, Rat(1)}}});
    CHECK(osc.residual == r_expect);
    REQUIRE(osc.order.has_value());
    CHECK(*osc.order == 1);

    std::vector<PointQ> probes = {{Rat(1), Rat(0), Rat(0)}, {Rat(1, 2), Rat(1), Rat(-1)}};
    std::vector<Rat> ts = {Rat(1, 8), Rat(1, 16), Rat(1, 32), Rat(1, 64)};
    PansuResult pr = pansu_numeric(f, f, phi, probes, ts);
    CHECK(!pr.exact);
    REQUIRE(pr.samples.size() == 4);
    // residual (0, 0, x1^3) rescales to t y1^3, so the worst square is t^2.
    for (size_t i = 0; i < ts.size(); ++i)
        CHECK(pr.samples[i].deviation_sq == ts[i] * ts[i]);
    REQUIRE(pr.slopes.size() == 3);
    for (double s : pr.slopes) CHECK(std::abs(s - 1.0) < 1e-12);
}

TEST_CASE("difference quotients match a pointwise recomputation") {
    PointQ a = {Rat(1), Rat(1, 2), Rat(-1)};
    WPolyMap phi = shear(Rat(1));
    PointQ b = wpmap_eval(phi, a);
    HFrame src = group_frame_at(heis(), a);
    HFrame tgt = group_frame_at(heis(), b);
    std::vector<PointQ> probes = {{Rat(1), Rat(1), Rat(1)}, {Rat(1, 2), Rat(-1), Rat(3)}};
    std::vector<Rat> ts;
    for (int k = 2; k <= 7; ++k) ts.push_back(Rat(1) / (1 << k));
    PansuResult pr = pansu_numeric(src, tgt, phi, probes, ts);
    CHECK(!pr.exact);
    REQUIRE(pr.samples.size() == ts.size());

    EpsCarnotMap es = eps_carnot(src, a);
    EpsCarnotMap et = eps_carnot(tgt, b);
    WPolyMap d = carnot_differential(src, tgt, phi);
    WeightSequence ws = heis().ws;
    for (size_t i = 0; i < ts.size(); ++i) {
        Rat worst(0);
        for (const PointQ& y : probes) {
            PointQ x = eps_apply_inverse(es, dilate(ts[i], y, ws));
            PointQ u = eps_apply(et, wpmap_eval(phi, x));
            PointQ lim = wpmap_eval(d, y);
            PointQ dev = dilate(Rat(1) / ts[i], u, ws);
            Rat ss(0);
            for (size_t l = 0; l < dev.size(); ++l) {
                Rat di = dev[l] - lim[l];
                ss += di * di;
            }
            if (ss > worst) worst = ss;
        }
        CHECK(pr.samples[i].deviation_sq == worst);
    }

    for (double s : pr.slopes) CHECK(s >= 0.9);
    CHECK(pr.samples.back().deviation < pr.samples.front().deviation);
}

TEST_CASE("truncated map jets decompose soundly") {
    HFrame f = group_frame(heis());
    WPolyMap jet = wpmap_retrunc(shear(Rat(1)), 3);
    CarnotMapReport rep = is_carnot_map(f, f, jet);
    CHECK(rep.ok);
    CHECK(rep.graded_everywhere);
    PolyMat c = frame_decompose(f, f, jet);
    CHECK(c[0][0].ntrunc == 3);
    CHECK(c[1][0] == wp_monomial(kHw, 3, {1, 0, 0}, Rat(2)));
}

TEST_CASE("map preconditions") {
    HFrame f = group_frame(heis());
    HFrame fe = group_frame(engel());

    WPolyMap wrong = make_map({1, 1}, kHw, {{}, {}, {}});
    CHECK_THROWS_AS(frame_decompose(f, f, wrong), InputError);

    // basepoint image mismatch
    PointQ a = {Rat(1), Rat(0), Rat(0)};
    HFrame fa = group_frame_at(heis(), a);
    CHECK_THROWS_AS(frame_decompose(fa, f, shear(Rat(1))), PreconditionError);

    CHECK_THROWS_AS(carnot_differential(f, f, collapse_map()), PreconditionError);
    CHECK_THROWS_AS(pansu_numeric(f, f, collapse_map(), {{Rat(1), Rat(0), Rat(0)}},
                                  {Rat(1, 2)}),
                    PreconditionError);
    CHECK_THROWS_AS(pansu_numeric(f, f, shear(Rat(1)), {}, {Rat(1, 2)}), InputError);
    CHECK_THROWS_AS(pansu_numeric(f, f, shear(Rat(1)), {{Rat(1), Rat(0), Rat(0)}},
                                  {Rat(0)}),
                    InputError);

    WPolyMap jet_const = wpmap_retrunc(left_translation_jet(make_group(heis()),
                                                            {Rat(1), Rat(0), Rat(0)}),
                                       3);
    CHECK_THROWS_AS(frame_decompose(f, f, jet_const), PreconditionError);
    CHECK_THROWS_AS(recentre_map(wpmap_retrunc(shear(Rat(1)), 3),
                                 {Rat(1), Rat(0), Rat(0)}),
                    PreconditionError);

    // dimension mismatch between the two frames is caught by the map spaces
    CHECK_THROWS_AS(frame_decompose(f, fe, shear(Rat(1))), InputError);
}
