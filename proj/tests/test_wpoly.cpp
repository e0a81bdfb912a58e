#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carnot/error.hpp"
#include "carnot/wpoly.hpp"

using namespace carnot;

namespace {

const std::vector<int> W12 = {1, 1, 2};

WPoly var(const std::vector<int>& w, int n, int i) { return wp_var(w, n, i); }

} // namespace

TEST_CASE("arithmetic hand values") {
    std::vector<int> w = {1, 1};
    WPoly x = var(w, 4, 0), y = var(w, 4, 1);
    WPoly p = wp_mul(wp_add(x, y), wp_sub(x, y));
    WPoly expect = wp_sub(wp_mul(x, x), wp_mul(y, y));
    CHECK(p == expect);

    WPoly q = wp_scale(Rat(3, 2), x);
    CHECK(wp_eval(q, {Rat(2), Rat(0)}) == Rat(3));
}

TEST_CASE("truncation drops high weighted degree but never parameter variables") {
    std::vector<int> w = {1, 2, 0}; // third variable is an ungraded parameter
    WPoly x = var(w, 2, 0), y = var(w, 2, 1), t = var(w, 2, 2);
    CHECK(wp_mul(x, y).is_zero());          // degree 3 > 2
    WPoly t5 = wp_mul(wp_mul(t, t), wp_mul(wp_mul(t, t), t));
    CHECK(!t5.is_zero());                   // parameter degree does not count
    CHECK(!wp_mul(t5, wp_mul(x, x)).is_zero());
    CHECK(wp_mul(t5, wp_mul(y, y)).is_zero());
}

TEST_CASE("evaluation is exact over rationals") {
    WPoly p = wp_zero(W12, 6);
    wp_add_term(p, {2, 0, 0}, Rat(1));
    wp_add_term(p, {0, 1, 1}, Rat(-1, 3));
    // p = x1^2 - x2*x3/3 at (3/7, -2/5, 1/2)
    Rat v = wp_eval(p, {Rat(3, 7), Rat(-2, 5), Rat(1, 2)});
    CHECK(v == Rat(9, 49) + Rat(1, 15));
}

TEST_CASE("derivative hand values") {
    WPoly p = wp_zero(W12, 6);
    wp_add_term(p, {2, 1, 0}, Rat(1, 2));
    WPoly d0 = wp_derivative(p, 0);
    WPoly expect = wp_zero(W12, 6);
    wp_add_term(expect, {1, 1, 0}, Rat(1));
    CHECK(d0 == expect);
    CHECK(wp_derivative(p, 2).is_zero());
}

TEST_CASE("substitution composes polynomials") {
    std::vector<int> w = {1, 1};
    WPoly p = wp_mul(var(w, 6, 0), var(w, 6, 1)); // x1*x2
    std::vector<int> wy = {1, 1};
    WPoly y1 = var(wy, 6, 0), y2 = var(wy, 6, 1);
    WPoly v1 = wp_add(y1, wp_mul(y2, y2));
    WPoly sub = wp_subst(p, {v1, y2});
    WPoly expect = wp_add(wp_mul(y1, y2), wp_mul(wp_mul(y2, y2), y2));
    CHECK(sub == expect);

    WPoly c = wp_const(wy, 6, Rat(1));
    CHECK_THROWS_AS(wp_subst(p, {wp_add(y1, c), y2}), PreconditionError);
}

TEST_CASE("shift expands binomially and exactly") {
    std::vector<int> w = {1};
    WPoly p = wp_mul(var(w, 9, 0), wp_mul(var(w, 9, 0), var(w, 9, 0))); // x^3
    WPoly s = wp_shift(p, {Rat(-2)});
    // (x-2)^3 = x^3 - 6x^2 + 12x - 8
    CHECK(wp_eval(s, {Rat(0)}) == Rat(-8));
    CHECK(wp_eval(s, {Rat(2)}) == Rat(0));
    CHECK(wp_eval(s, {Rat(5)}) == Rat(27));
    CHECK(s.terms.at({2}) == Rat(-6));
    CHECK(s.terms.at({1}) == Rat(12));
}

TEST_CASE("partial evaluation removes a block") {
    WPoly p = wp_zero(W12, kExactTrunc);
    wp_add_term(p, {1, 2, 1}, Rat(2));
    wp_add_term(p, {0, 0, 2}, Rat(1));
    // evaluate (x1, x2) = (1/2, 3): 2*(1/2)*9*x3 + x3^2 = 9*x3 + x3^2
    WPoly q = wp_partial_eval(p, 0, 2, {Rat(1, 2), Rat(3)});
    CHECK(q.nvars() == 1);
    CHECK(wp_eval(q, {Rat(1)}) == Rat(10));
    CHECK(wp_eval(q, {Rat(-9)}) == Rat(0));
}

TEST_CASE("map composition oracle") {
    std::vector<int> w = {1, 1};
    WPolyMap inner = wpmap_zero(w, w, 8);
    inner.comp[0] = wp_add(var(w, 8, 0), var(w, 8, 1));      // x1+x2
    inner.comp[1] = wp_mul(var(w, 8, 0), var(w, 8, 1));      // x1*x2
    WPolyMap outer = wpmap_zero(w, w, 8);
    outer.comp[0] = wp_mul(var(w, 8, 0), var(w, 8, 0));      // u1^2
    outer.comp[1] = wp_add(var(w, 8, 0), var(w, 8, 1));      // u1+u2
    WPolyMap c = wpmap_compose(outer, inner);
    // c = ((x1+x2)^2, x1+x2+x1*x2)
    PointQ v = wpmap_eval(c, {Rat(2), Rat(3)});
    CHECK(v[0] == Rat(25));
    CHECK(v[1] == Rat(11));
}

TEST_CASE("hom parts reconstruct the map") {
    std::vector<int> w = W12;
    WPolyMap f = wpmap_zero(w, w, 4);
    wp_add_term(f.comp[0], {1, 0, 0}, Rat(2));
    wp_add_term(f.comp[0], {0, 0, 1}, Rat(1, 3));
    wp_add_term(f.comp[1], {0, 1, 0}, Rat(1));
    wp_add_term(f.comp[1], {2, 1, 0}, Rat(-1));
    wp_add_term(f.comp[2], {1, 1, 0}, Rat(5));
    wp_add_term(f.comp[2], {0, 0, 2}, Rat(7, 2));
    WPolyMap sum = wpmap_zero(w, w, 4);
    for (long long ell = -2; ell <= 4; ++ell) sum = wpmap_add(sum, hom_part(f, ell));
    CHECK(sum == f);

    // x3 in a weight-1 slot sits at order 1; x1*x2 in a weight-2 slot at 0.
    WPolyMap h1 = hom_part(f, 1);
    CHECK(h1.comp[0].terms.count({0, 0, 1}) == 1);
    WPolyMap h0 = hom_part(f, 0);
    CHECK(h0.comp[2].terms.count({1, 1, 0}) == 1);
    // x3^2 has weighted degree 4, so it sits at order 2 in a weight-2 slot.
    WPolyMap h2 = hom_part(f, 2);
    CHECK(h2.comp[2].terms.count({0, 0, 2}) == 1);

    CHECK_THROWS_AS(hom_part(f, -3), PreconditionError);
}

TEST_CASE("weighted order") {
    std::vector<int> w = W12;
    WPolyMap f = wpmap_zero(w, w, 4);
    CHECK(!weighted_order(f).has_value()); // zero map: order above truncation
    wp_add_term(f.comp[2], {1, 0, 0}, Rat(1)); // degree 1 in a weight-2 slot
    CHECK(weighted_order(f) == -1);
    wp_add_term(f.comp[0], {0, 0, 2}, Rat(1)); // degree 4 in a weight-1 slot
    CHECK(weighted_order(f) == -1);
    f.comp[2] = wp_zero(w, 4);
    CHECK(weighted_order(f) == 3);
}

TEST_CASE("linear part and jacobian") {
    std::vector<int> w = {1, 1};
    WPolyMap f = wpmap_zero(w, w, 4);
    wp_add_term(f.comp[0], {1, 0}, Rat(2));
    wp_add_term(f.comp[0], {1, 1}, Rat(7));
    wp_add_term(f.comp[1], {0, 1}, Rat(-1, 2));
    QMat a = linear_part(f);
    CHECK(a[0][0] == Rat(2));
    CHECK(a[0][1] == Rat(0));
    CHECK(a[1][1] == Rat(-1, 2));
    auto jac = jacobian(f);
    CHECK(wp_eval(jac[0][1], {Rat(3), Rat(0)}) == Rat(21));
}

TEST_CASE("vector field components and grading") {
    // X = d/dx1 - (x2/2) d/dx3 on weights (1,1,2) lies in a single degree -1.
    WPolyVectorField x = vf_zero(W12, 4);
    wp_add_term(x.coeff[0], {0, 0, 0}, Rat(1));
    wp_add_term(x.coeff[2], {0, 1, 0}, Rat(-1, 2));
    auto comps = vf_components(x);
    CHECK(comps.size() == 1);
    CHECK(comps.count(-1) == 1);
    CHECK(comps.at(-1) == x);

    // x1*x2 d/dx3 sits in degree 0; x3 d/dx1 in degree 1.
    WPolyVectorField y = vf_zero(W12, 4);
    wp_add_term(y.coeff[2], {1, 1, 0}, Rat(1));
    wp_add_term(y.coeff[0], {0, 0, 1}, Rat(1));
    auto yc = vf_components(y);
    CHECK(yc.size() == 2);
    CHECK(yc.count(0) == 1);
    CHECK(yc.count(1) == 1);
}

TEST_CASE("lie bracket oracle and jacobi") {
    // Symmetric pair with [X1, X2] = d/dx3, derived by hand.
    WPolyVectorField x1 = vf_zero(W12, 6), x2 = vf_zero(W12, 6), z = vf_zero(W12, 6);
    wp_add_term(x1.coeff[0], {0, 0, 0}, Rat(1));
    wp_add_term(x1.coeff[2], {0, 1, 0}, Rat(-1, 2));
    wp_add_term(x2.coeff[1], {0, 0, 0}, Rat(1));
    wp_add_term(x2.coeff[2], {1, 0, 0}, Rat(1, 2));
    WPolyVectorField b = lie_bracket(x1, x2);
    WPolyVectorField expect = vf_zero(W12, 6);
    wp_add_term(expect.coeff[2], {0, 0, 0}, Rat(1));
    CHECK(b == expect);

    wp_add_term(z.coeff[1], {1, 0, 0}, Rat(1)); // x1 d/dx2
    WPolyVectorField j1 = lie_bracket(lie_bracket(x1, x2), z);
    WPolyVectorField j2 = lie_bracket(lie_bracket(x2, z), x1);
    WPolyVectorField j3 = lie_bracket(lie_bracket(z, x1), x2);
    WPolyVectorField sum = vf_add(j1, vf_add(j2, j3));
    for (const auto& c : sum.coeff) CHECK(c.is_zero());
}

TEST_CASE("dilation pullback matches the graded decomposition exactly") {
    WPolyVectorField y = vf_zero(W12, 4);
    wp_add_term(y.coeff[0], {0, 0, 0}, Rat(1));
    wp_add_term(y.coeff[2], {1, 1, 0}, Rat(3));
    wp_add_term(y.coeff[0], {0, 0, 1}, Rat(-2));
    for (const Rat& t : {Rat(2, 3), Rat(-2), Rat(1, 2)}) {
        WPolyVectorField pb = dilation_pullback(t, y);
        WPolyVectorField sum = vf_zero(W12, 4);
        for (const auto& [deg, comp] : vf_components(y)) {
            Rat f(1);
            if (deg >= 0)
                for (long long q = 0; q < deg; ++q) f *= t;
            else
                for (long long q = 0; q < -deg; ++q) f /= t;
            sum = vf_add(sum, vf_scale(f, comp));
        }
        CHECK(pb == sum);
    }
}

TEST_CASE("invert_map round trips") {
    WPolyMap f = wpmap_identity(W12, 6);
    wp_add_term(f.comp[1], {2, 0, 0}, Rat(1));      // x2 + x1^2
    wp_add_term(f.comp[2], {1, 1, 0}, Rat(1));      // x3 + x1*x2
    WPolyMap inv = invert_map(f);
    WPolyMap both = wpmap_compose(f, inv);
    CHECK(both == wpmap_identity(W12, 6));
    WPolyMap other = wpmap_compose(inv, f);
    CHECK(other == wpmap_identity(W12, 6));

    WPolyMap sing = wpmap_zero(W12, W12, 6);
    sing.comp[0] = var(W12, 6, 0);
    sing.comp[1] = var(W12, 6, 0);
    sing.comp[2] = var(W12, 6, 2);
    CHECK_THROWS_AS(invert_map(sing), PreconditionError);
}

TEST_CASE("invert_map handles a passive parameter block") {
    // Phi_u(v) = v + u*v^2 over one passive u and one moving v.
    std::vector<int> w = {1, 1};
    WPolyMap f;
    f.src_w = w;
    f.tgt_w = {1};
    f.ntrunc = 6;
    f.comp = {wp_zero(w, 6)};
    wp_add_term(f.comp[0], {0, 1}, Rat(1));
    wp_add_term(f.comp[0], {1, 2}, Rat(1));
    WPolyMap inv = invert_map(f, 1);
    // Phi_u(inv_u(y)) = y as a jet identity.
    std::vector<WPoly> vals = {wp_var(w, 6, 0), inv.comp[0]};
    WPolyMap check = wpmap_subst(f, vals, w);
    WPolyMap expect_y = wpmap_zero(w, {1}, 6);
    wp_add_term(expect_y.comp[0], {0, 1}, Rat(1));
    CHECK(check == expect_y);
}

TEST_CASE("flow_exp matches the closed form of a one dimensional flow") {
    // y' = s(1+y), y(0)=0 gives y(1) = e^s - 1 = s + s^2/2 + s^3/6 + s^4/24.
    std::vector<int> w = {1};
    WPolyVectorField x = vf_zero(w, 4);
    wp_add_term(x.coeff[0], {0}, Rat(1));
    wp_add_term(x.coeff[0], {1}, Rat(1));
    WPolyMap flow = flow_exp({x}, 0, {1}, {1}, 4);
    WPoly expect = wp_zero({1}, 4);
    wp_add_term(expect, {1}, Rat(1));
    wp_add_term(expect, {2}, Rat(1, 2));
    wp_add_term(expect, {3}, Rat(1, 6));
    wp_add_term(expect, {4}, Rat(1, 24));
    CHECK(flow.comp[0] == expect);
}

TEST_CASE("flow_exp of coordinate fields is linear") {
    std::vector<int> w = {1, 1};
    WPolyVectorField x1 = vf_zero(w, 4), x2 = vf_zero(w, 4);
    wp_add_term(x1.coeff[0], {0, 0}, Rat(1));
    wp_add_term(x2.coeff[1], {0, 0}, Rat(1));
    WPolyMap flow = flow_exp({x1, x2}, 0, w, w, 4);
    CHECK(flow == wpmap_identity(w, 4));
}

TEST_CASE("one parameter flows are additive in time") {
    // exp(sX) after exp(tX) equals exp((s+t)X) for X = (1+x) d/dx.
    std::vector<int> w1 = {1};
    int nt = 5;
    WPolyVectorField x = vf_zero(w1, nt);
    wp_add_term(x.coeff[0], {0}, Rat(1));
    wp_add_term(x.coeff[0], {1}, Rat(1));

    // Flow from a passive start u: field over (u, v) moving only v, with
    // coefficient (1 + u + v).
    std::vector<int> wuv = {1, 1};
    WPolyVectorField xu = vf_zero(wuv, nt);
    xu.coeff[0] = wp_zero(wuv, nt);
    xu.coeff[1] = wp_zero(wuv, nt);
    wp_add_term(xu.coeff[1], {0, 0}, Rat(1));
    wp_add_term(xu.coeff[1], {1, 0}, Rat(1));
    wp_add_term(xu.coeff[1], {0, 1}, Rat(1));
    // G(u, s) = flow of sX from u, as displacement plus u.
    WPolyMap disp = flow_exp({xu}, 1, {1}, {1}, nt); // (u, s) -> v displacement
    // Point after time t from 0: F(t).
    WPolyMap f = flow_exp({x}, 0, {1}, {1}, nt); // t -> point

    // Compose: u <- F(t), s <- s over variables (s, t).
    std::vector<int> wst = {1, 1};
    WPoly svar = wp_var(wst, nt, 0), tvar = wp_var(wst, nt, 1);
    WPoly ft = wp_subst(f.comp[0], {tvar});
    WPoly gsub = wp_subst(disp.comp[0], {ft, svar});
    WPoly total = wp_add(ft, gsub);

    WPoly fst = wp_subst(f.comp[0], {wp_add(svar, tvar)});
    CHECK(total == fst);
}

TEST_CASE("flow_exp reports non stabilizing iterations") {
    // An iteration cap below the stabilization depth must fail loudly rather
    // than return a partial jet.
    std::vector<int> w = {1};
    WPolyVectorField x = vf_zero(w, 4);
    wp_add_term(x.coeff[0], {0}, Rat(1));
    CHECK_THROWS_AS(flow_exp({x}, 0, {1}, {1}, 4, 0), TruncationError);
}

TEST_CASE("param remainder splits the stated power exactly") {
    // base(x, y) with one passive x (weight 1) and dilated block (y1, y2) of
    // weights (1, 2); target weight (1).
    std::vector<int> w = {1, 1, 2};
    WPolyMap base;
    base.src_w = w;
    base.tgt_w = {1};
    base.ntrunc = 6;
    base.comp = {wp_zero(w, 6)};
    wp_add_term(base.comp[0], {1, 0, 1}, Rat(1));  // x*y2: dilated degree 2
    wp_add_term(base.comp[0], {0, 2, 0}, Rat(3));  // y1^2: dilated degree 2
    wp_add_term(base.comp[0], {0, 1, 1}, Rat(-2)); // y1*y2: dilated degree 3
    ParamRemainder pr = param_remainder(base, 1, 1);

    for (const Rat& t : {Rat(1, 2), Rat(-2), Rat(1, 3)})
        for (const Rat& x : {Rat(0), Rat(1)})
            for (const Rat& y1 : {Rat(1), Rat(-1, 2)})
                for (const Rat& y2 : {Rat(1, 3), Rat(2)}) {
                    // t^{-1} . base(x, t.y) against t^m * tilde(x, y, t).
                    PointQ ty = {t * y1, t * t * y2};
                    Rat lhs = wp_eval(base.comp[0], {x, ty[0], ty[1]}) / t;
                    PointQ rhs = param_remainder_eval(pr, {x}, {y1, y2}, t);
                    CHECK(lhs == t * rhs[0]);
                }

    // A term of dilated degree 1 in a weight-1 slot breaks order 1.
    wp_add_term(base.comp[0], {0, 1, 0}, Rat(1));
    CHECK_THROWS_AS(param_remainder(base, 1, 1), PreconditionError);
    try {
        param_remainder(base, 1, 1);
    } catch (const PreconditionError& e) {
        std::string msg = e.what();
        CHECK(msg.find("component 1") != std::string::npos);
        CHECK(msg.find("x2") != std::string::npos);
    }
}

TEST_CASE("exact composition carries constant terms") {
    std::vector<int> w = {1};
    WPolyMap inner = wpmap_zero(w, w, kExactTrunc);
    wp_add_term(inner.comp[0], {0}, Rat(2)); // constant 2
    wp_add_term(inner.comp[0], {1}, Rat(1)); // + x
    WPolyMap outer = wpmap_zero(w, w, kExactTrunc);
    wp_add_term(outer.comp[0], {2}, Rat(1)); // u^2
    WPolyMap c = wpmap_compose_exact(outer, inner);
    // (x+2)^2 = x^2 + 4x + 4
    CHECK(c.comp[0].terms.at({0}) == Rat(4));
    CHECK(c.comp[0].terms.at({1}) == Rat(4));
    CHECK(c.comp[0].terms.at({2}) == Rat(1));
}
