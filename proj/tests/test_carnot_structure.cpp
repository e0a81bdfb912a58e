#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carnot/carnot_structure.hpp"

using namespace carnot;

namespace {

GradedNilpotentAlgebra heis() {
    return make_algebra(make_weight_sequence({1, 1, 2}), {{0, 1, 2, Rat(1)}});
}

GradedNilpotentAlgebra engel() {
    return make_algebra(make_weight_sequence({1, 1, 2, 3}),
                        {{0, 1, 2, Rat(1)}, {0, 2, 3, Rat(1)}});
}

WPolyVectorField make_field(const std::vector<int>& w,
                            const std::vector<std::tuple<int, MultiIndex, Rat>>& terms) {
    WPolyVectorField x = vf_zero(w, kExactTrunc);
    for (const auto& [slot, alpha, c] : terms) wp_add_term(x.coeff[slot], alpha, c);
    return x;
}

// X_1 = d/dx1, X_2 = d/dx2 + x1 (1 + x2) d/dx3, X_3 = d/dx3 over w = (1,1,2).
HFrame skew_frame(const PointQ& basepoint) {
    std::vector<int> w = {1, 1, 2};
    auto x1 = make_field(w, {{0, {0, 0, 0}, Rat(1)}});
    auto x2 = make_field(w, {{1, {0, 0, 0}, Rat(1)},
                             {2, {1, 0, 0}, Rat(1)},
                             {2, {1, 1, 0}, Rat(1)}});
    auto x3 = make_field(w, {{2, {0, 0, 0}, Rat(1)}});
    return make_hframe(make_weight_sequence(w), {x1, x2, x3}, basepoint);
}

HFrame perturbed_heis(const PointQ& basepoint) {
    std::vector<int> w = {1, 1, 2};
    auto x1 = make_field(w, {{0, {0, 0, 0}, Rat(1)},
                             {2, {0, 1, 0}, Rat(-1, 2)},
                             {2, {1, 1, 0}, Rat(-1, 2)}});
    auto x2 = make_field(w, {{1, {0, 0, 0}, Rat(1)}, {2, {1, 0, 0}, Rat(1, 2)}});
    auto x3 = make_field(w, {{2, {0, 0, 0}, Rat(1)}});
    return make_hframe(make_weight_sequence(w), {x1, x2, x3}, basepoint);
}

} // namespace

TEST_CASE("polynomial matrix inverse round trips") {
    std::vector<int> w = {1, 1, 2};
    int nt = 4;
    PolyMat e = pmat_identity(w, nt, 3);
    wp_add_term(e[0][1], {0, 0, 1}, Rat(1));
    wp_add_term(e[1][0], {1, 0, 0}, Rat(1));
    wp_add_term(e[1][1], {1, 1, 0}, Rat(1));
    wp_add_term(e[1][2], {0, 1, 0}, Rat(1));
    wp_add_term(e[2][1], {2, 0, 0}, Rat(1, 3));
    PolyMat inv = pmat_inverse(e);
    CHECK(pmat_mul(e, inv) == pmat_identity(w, nt, 3));
    CHECK(pmat_mul(inv, e) == pmat_identity(w, nt, 3));

    // Non-unit constant part.
    std::vector<int> w2 = {1, 1};
    PolyMat f(2, std::vector<WPoly>(2, wp_zero(w2, 3)));
    wp_add_term(f[0][0], {0, 0}, Rat(2));
    wp_add_term(f[0][1], {1, 0}, Rat(1));
    wp_add_term(f[1][0], {0, 1}, Rat(1));
    wp_add_term(f[1][1], {0, 0}, Rat(3));
    PolyMat finv = pmat_inverse(f);
    CHECK(pmat_mul(f, finv) == pmat_identity(w2, 3, 2));
}

TEST_CASE("polynomial matrix inverse preconditions") {
    std::vector<int> w = {1, 1};
    PolyMat sing(2, std::vector<WPoly>(2, wp_zero(w, 3)));
    wp_add_term(sing[0][0], {1, 0}, Rat(1));
    wp_add_term(sing[1][1], {0, 0}, Rat(1));
    CHECK_THROWS_AS(pmat_inverse(sing), PreconditionError);

    PolyMat exact = pmat_identity(w, kExactTrunc, 2);
    CHECK_THROWS_AS(pmat_inverse(exact), PreconditionError);
}

TEST_CASE("left invariant frames have constant bracket coefficients") {
    for (const auto& alg : {heis(), engel()}) {
        NilpotentGroup g = make_group(alg);
        HFrame f = make_hframe(alg.ws, left_invariant_frame(g), PointQ(alg.ws.n, Rat(0)));
        BracketData bd = bracket_coefficients(f);
        CHECK(bd.report.ok);
        std::map<std::tuple<int, int, int>, WPoly> expect;
        for (const auto& [key, c] : alg.constants) {
            auto [i, j, k] = key;
            expect[{i, j, k}] = wp_const(alg.ws.w, bd.L.begin()->second.ntrunc, c);
        }
        CHECK(bd.L == expect);
    }
}

TEST_CASE("tangent algebra of a left invariant frame is the algebra everywhere") {
    for (const auto& alg : {heis(), engel()}) {
        NilpotentGroup g = make_group(alg);
        HFrame f = make_hframe(alg.ws, left_invariant_frame(g), PointQ(alg.ws.n, Rat(0)));
        PointQ a(alg.ws.n);
        for (int i = 0; i < alg.ws.n; ++i) a[i] = Rat(2 * i - 3, i + 2);
        for (const PointQ& p : {PointQ(alg.ws.n, Rat(0)), a}) {
            GradedNilpotentAlgebra t = tangent_algebra_at(f, p);
            CHECK(t.ws == alg.ws);
            CHECK(t.constants == alg.constants);
        }
    }
}

TEST_CASE("pointwise bracket coefficient of a skewed frame") {
    HFrame f = skew_frame({Rat(0), Rat(0), Rat(0)});

    GradedNilpotentAlgebra at0 = tangent_algebra_at(f, {Rat(0), Rat(0), Rat(0)});
    CHECK(at0.constants == std::map<std::tuple<int, int, int>, Rat>{{{0, 1, 2}, Rat(1)}});

    GradedNilpotentAlgebra at_a = tangent_algebra_at(f, {Rat(0), Rat(1), Rat(0)});
    CHECK(at_a.constants == std::map<std::tuple<int, int, int>, Rat>{{{0, 1, 2}, Rat(2)}});

    // As a jet around 0 the coefficient is 1 + x2.
    BracketData bd = bracket_coefficients(f);
    CHECK(bd.report.ok);
    int nt = bd.L.at({0, 1, 2}).ntrunc;
    WPoly expect = wp_const(f.ws.w, nt, 1);
    wp_add_term(expect, {0, 1, 0}, Rat(1));
    CHECK(bd.L.at({0, 1, 2}) == expect);
    CHECK(bd.L.size() == 1);
}

TEST_CASE("recentring shifts coefficients exactly") {
    HFrame f = skew_frame({Rat(0), Rat(0), Rat(0)});
    HFrame g = recentre(f, {Rat(0), Rat(1), Rat(0)});
    // x1 (1 + x2) becomes x1 (2 + x2).
    WPoly expect = wp_zero(f.ws.w, kExactTrunc);
    wp_add_term(expect, {1, 0, 0}, Rat(2));
    wp_add_term(expect, {1, 1, 0}, Rat(1));
    CHECK(g.fields[1].coeff[2] == expect);
    CHECK(g.basepoint == PointQ{Rat(0), Rat(-1), Rat(0)});

    WPolyVectorField trunc_field = vf_retrunc(f.fields[0], 4);
    HFrame h = make_hframe(f.ws, {trunc_field, vf_retrunc(f.fields[1], 4), vf_retrunc(f.fields[2], 4)},
                           PointQ(3, Rat(0)));
    CHECK_THROWS_AS(recentre(h, {Rat(1), Rat(0), Rat(0)}), PreconditionError);
}

TEST_CASE("perturbed frame bracket jet and nonzero basepoint") {
    HFrame f = perturbed_heis({Rat(0), Rat(0), Rat(0)});
    BracketData bd = bracket_coefficients(f);
    CHECK(bd.report.ok);
    int nt = bd.L.at({0, 1, 2}).ntrunc;
    WPoly expect = wp_const(f.ws.w, nt, 1);
    wp_add_term(expect, {1, 0, 0}, Rat(1, 2));
    CHECK(bd.L.at({0, 1, 2}) == expect);

    GradedNilpotentAlgebra at_a = tangent_algebra_at(f, {Rat(2), Rat(0), Rat(0)});
    CHECK(at_a.constants == std::map<std::tuple<int, int, int>, Rat>{{{0, 1, 2}, Rat(2)}});

    // Based at (2, 0, 0) the jet is expressed in shifted coordinates.
    HFrame fb = perturbed_heis({Rat(2), Rat(0), Rat(0)});
    BracketData bdb = bracket_coefficients(fb);
    WPoly expectb = wp_const(f.ws.w, bdb.L.at({0, 1, 2}).ntrunc, 2);
    wp_add_term(expectb, {1, 0, 0}, Rat(1, 2));
    CHECK(bdb.L.at({0, 1, 2}) == expectb);
}

TEST_CASE("polarized frame matches the engel algebra") {
    std::vector<int> w = {1, 1, 2, 3};
    auto x1 = make_field(w, {{0, {0, 0, 0, 0}, Rat(1)}});
    auto x2 = make_field(w, {{1, {0, 0, 0, 0}, Rat(1)},
                             {2, {1, 0, 0, 0}, Rat(1)},
                             {3, {2, 0, 0, 0}, Rat(1, 2)}});
    auto x3 = make_field(w, {{2, {0, 0, 0, 0}, Rat(1)}, {3, {1, 0, 0, 0}, Rat(1)}});
    auto x4 = make_field(w, {{3, {0, 0, 0, 0}, Rat(1)}});
    HFrame f = make_hframe(make_weight_sequence(w), {x1, x2, x3, x4}, PointQ(4, Rat(0)));

    GradedNilpotentAlgebra t = tangent_algebra_at(f, PointQ(4, Rat(0)));
    CHECK(t.constants == engel().constants);

    FiltrationReport rep = validate_filtration(f);
    CHECK(rep.ok);
    REQUIRE(rep.notes.size() == 1);
    CHECK(rep.notes[0].find("bracket-generate") != std::string::npos);
}

TEST_CASE("filtration violations are reported with the offending component") {
    std::vector<int> w = {1, 1, 2, 3};
    auto x1 = make_field(w, {{0, {0, 0, 0, 0}, Rat(1)}});
    auto x2 = make_field(w, {{1, {0, 0, 0, 0}, Rat(1)}, {3, {1, 0, 0, 0}, Rat(1)}});
    auto x3 = make_field(w, {{2, {0, 0, 0, 0}, Rat(1)}});
    auto x4 = make_field(w, {{3, {0, 0, 0, 0}, Rat(1)}});
    HFrame f = make_hframe(make_weight_sequence(w), {x1, x2, x3, x4}, PointQ(4, Rat(0)));

    BracketData bd = bracket_coefficients(f);
    CHECK(!bd.report.ok);
    REQUIRE(bd.report.violations.size() == 1);
    CHECK(bd.report.violations[0].find("not a Carnot filtration") != std::string::npos);
    CHECK(bd.report.violations[0].find("[X_1, X_2]") != std::string::npos);
    CHECK(bd.report.violations[0].find("X_4") != std::string::npos);

    CHECK_THROWS_AS(tangent_algebra_at(f, PointQ(4, Rat(0))), PreconditionError);
}

TEST_CASE("jet violation with a clean basepoint still has a tangent algebra") {
    std::vector<int> w = {1, 1, 2, 3};
    auto x1 = make_field(w, {{0, {0, 0, 0, 0}, Rat(1)}});
    auto x2 = make_field(w, {{1, {0, 0, 0, 0}, Rat(1)}, {3, {2, 0, 0, 0}, Rat(1)}});
    auto x3 = make_field(w, {{2, {0, 0, 0, 0}, Rat(1)}});
    auto x4 = make_field(w, {{3, {0, 0, 0, 0}, Rat(1)}});
    HFrame f = make_hframe(make_weight_sequence(w), {x1, x2, x3, x4}, PointQ(4, Rat(0)));

    CHECK(!bracket_coefficients(f).report.ok);

    GradedNilpotentAlgebra t = tangent_algebra_at(f, PointQ(4, Rat(0)));
    CHECK(t.constants.empty());

    CHECK_THROWS_AS(tangent_algebra_at(f, {Rat(1), Rat(0), Rat(0), Rat(0)}),
                    PreconditionError);
}

TEST_CASE("coordinate frame fails the generation note but not the filtration") {
    std::vector<int> w = {1, 1, 2};
    auto x1 = make_field(w, {{0, {0, 0, 0}, Rat(1)}});
    auto x2 = make_field(w, {{1, {0, 0, 0}, Rat(1)}});
    auto x3 = make_field(w, {{2, {0, 0, 0}, Rat(1)}});
    HFrame f = make_hframe(make_weight_sequence(w), {x1, x2, x3}, PointQ(3, Rat(0)));

    FiltrationReport rep = validate_filtration(f);
    CHECK(rep.ok);
    REQUIRE(rep.notes.size() == 1);
    CHECK(rep.notes[0].find("do not span layer 2") != std::string::npos);
}

TEST_CASE("frame construction rejects bad input") {
    std::vector<int> w = {1, 1, 2};
    WeightSequence ws = make_weight_sequence(w);
    auto x1 = make_field(w, {{0, {0, 0, 0}, Rat(1)}});
    auto x3 = make_field(w, {{2, {0, 0, 0}, Rat(1)}});

    CHECK_THROWS_AS(make_hframe(ws, {x1, x3}, PointQ(3, Rat(0))), InputError);

    // Two copies of the same field make the matrix singular.
    CHECK_THROWS_AS(make_hframe(ws, {x1, x1, x3}, PointQ(3, Rat(0))), InputError);

    auto wrong = vf_zero({1, 1, 3}, kExactTrunc);
    wp_add_term(wrong.coeff[1], {0, 0, 0}, Rat(1));
    CHECK_THROWS_AS(make_hframe(ws, {x1, wrong, x3}, PointQ(3, Rat(0))), InputError);

    auto t1 = vf_retrunc(x1, 4);
    auto t2 = make_field(w, {{1, {0, 0, 0}, Rat(1)}});
    CHECK_THROWS_AS(make_hframe(ws, {t1, vf_retrunc(t2, 4), vf_retrunc(x3, 4)},
                                {Rat(1), Rat(0), Rat(0)}),
                    InputError);
}

TEST_CASE("frame matrix evaluation and singular points") {
    std::vector<int> w = {1, 1, 2};
    auto x1 = make_field(w, {{0, {0, 0, 0}, Rat(1)}, {0, {1, 0, 0}, Rat(-1)}});
    auto x2 = make_field(w, {{1, {0, 0, 0}, Rat(1)}});
    auto x3 = make_field(w, {{2, {0, 0, 0}, Rat(1)}});
    HFrame f = make_hframe(make_weight_sequence(w), {x1, x2, x3}, PointQ(3, Rat(0)));

    QMat e = frame_matrix_at(f, {Rat(1, 2), Rat(0), Rat(0)});
    CHECK(e[0][0] == Rat(1, 2));
    CHECK(e[1][1] == Rat(1));

    CHECK_THROWS_AS(tangent_algebra_at(f, {Rat(1), Rat(0), Rat(0)}), PreconditionError);
}
