#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carnot/carnot_map.hpp"
#include "carnot/coords.hpp"
#include "carnot/fixtures.hpp"

using namespace carnot;

namespace {

Rat bracket_at(const HFrame& f, const PointQ& a, int i, int j, int k) {
    return tangent_algebra_at(f, a).bracket_coeff(i, j, k);
}

} // namespace

TEST_CASE("group fixtures reproduce the textbook products") {
    NilpotentGroup heis = make_group(heisenberg_algebra());
    PointQ p = group_mul(heis, {Rat(1), Rat(0), Rat(0)}, {Rat(0), Rat(1), Rat(0)});
    CHECK(p == PointQ{Rat(1), Rat(1), Rat(1, 2)});

    NilpotentGroup engel = make_group(engel_algebra());
    PointQ q = group_mul(engel, {Rat(1), Rat(0), Rat(0), Rat(0)},
                         {Rat(0), Rat(1), Rat(0), Rat(0)});
    CHECK(q == PointQ{Rat(1), Rat(1), Rat(1, 2), Rat(1, 12)});
}

TEST_CASE("frame fixtures carry the advertised tangent algebras") {
    for (const HFrame& f : {heisenberg3_frame(), engel4_frame(),
                            heisenberg3_polarized_frame(), engel4_polarized_frame(),
                            heisenberg3_perturbed_frame(), abelian2_frame()}) {
        CHECK(validate_filtration(f).ok);
        CHECK(is_privileged(f).ok);
    }

    HFrame hp = heisenberg3_polarized_frame();
    CHECK(tangent_algebra_at(hp, hp.basepoint).constants == heisenberg_algebra().constants);
    PointQ a = {Rat(2), Rat(-1), Rat(1, 3)};
    CHECK(tangent_algebra_at(hp, a).constants == heisenberg_algebra().constants);

    HFrame ep = engel4_polarized_frame();
    CHECK(tangent_algebra_at(ep, ep.basepoint).constants == engel_algebra().constants);
    PointQ b = {Rat(1), Rat(1, 2), Rat(-2), Rat(3)};
    CHECK(tangent_algebra_at(ep, b).constants == engel_algebra().constants);

    HFrame pert = heisenberg3_perturbed_frame();
    CHECK(bracket_at(pert, pert.basepoint, 0, 1, 2) == Rat(1));
    CHECK(bracket_at(pert, {Rat(1), Rat(0), Rat(0)}, 0, 1, 2) == Rat(3, 2));
}

TEST_CASE("negative fixtures are rejected with diagnostics") {
    PrivilegedReport rep = is_privileged(nonprivileged3_frame());
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.violations.empty());

    HFrame heis = heisenberg3_frame();
    CarnotMapReport mrep = is_carnot_map(heis, heis, weight_raising_map());
    CHECK_FALSE(mrep.ok);
    CHECK_FALSE(mrep.graded_everywhere);
    CHECK_FALSE(mrep.violations.empty());

    AlgebraValidation bad = validate_algebra(make_weight_sequence({1, 1, 2}),
                                             {{0, 1, 0, Rat(1)}});
    CHECK_FALSE(bad.ok);
    CHECK_FALSE(bad.violations.empty());
}

TEST_CASE("map fixtures are Carnot with the advertised inverses") {
    HFrame heis = heisenberg3_frame();

    WPolyMap shear = heisenberg_shear(Rat(1));
    CarnotMapReport rep = is_carnot_map(heis, heis, shear);
    CHECK(rep.ok);
    CHECK(rep.graded_everywhere);
    CHECK(wpmap_compose(shear, heisenberg_shear(Rat(-1))) ==
          wpmap_identity({1, 1, 2}, kExactTrunc));

    CHECK(wpmap_compose(heisenberg_dilation(Rat(2)), heisenberg_dilation(Rat(1, 2))) ==
          wpmap_identity({1, 1, 2}, kExactTrunc));
    CHECK(wpmap_compose(heisenberg_swap(), heisenberg_swap()) ==
          wpmap_identity({1, 1, 2}, kExactTrunc));
    CHECK(is_carnot_map(heis, heis, heisenberg_dilation(Rat(3))).graded_everywhere);
    CHECK(is_carnot_map(heis, heis, heisenberg_swap()).graded_everywhere);
    CHECK(is_carnot_map(heis, abelian2_frame(), heisenberg_projection()).graded_everywhere);

    NilpotentGroup g = make_group(heisenberg_algebra());
    CHECK(differential_is_morphism(carnot_differential(heis, heis, heisenberg_swap()), g, g));
    CHECK(differential_is_morphism(carnot_differential(heis, heis, heisenberg_dilation(Rat(2))), g, g));
}

TEST_CASE("heat lift inserts a central weight-2 slot") {
    HFrame lift_ab = heat_lift_frame(abelian2_frame());
    CHECK(lift_ab.ws.w == std::vector<int>{1, 1, 2});
    CHECK(validate_filtration(lift_ab).ok);
    CHECK(is_privileged(lift_ab).ok);
    GradedNilpotentAlgebra ab = tangent_algebra_at(lift_ab, lift_ab.basepoint);
    CHECK(ab.constants.empty());

    HFrame lift_en = heat_lift_frame(engel4_frame());
    CHECK(lift_en.ws.w == std::vector<int>{1, 1, 2, 2, 3});
    CHECK((int)lift_en.fields.size() == 5);
    CHECK(validate_filtration(lift_en).ok);
    CHECK(is_privileged(lift_en).ok);
    GradedNilpotentAlgebra en = tangent_algebra_at(lift_en, lift_en.basepoint);
    CHECK(en.bracket_coeff(0, 1, 2) == Rat(1));
    CHECK(en.bracket_coeff(0, 2, 4) == Rat(1));
    CHECK(en.bracket_coeff(0, 1, 3) == Rat(0));
    CHECK(en.bracket_coeff(0, 3, 4) == Rat(0));

    HFrame lift_pert = heat_lift_frame(heisenberg3_perturbed_frame());
    CHECK(lift_pert.ws.w == std::vector<int>{1, 1, 2, 2});
    CHECK(validate_filtration(lift_pert).ok);
    CHECK(bracket_at(lift_pert, {Rat(1), Rat(0), Rat(0), Rat(0)}, 0, 1, 2) == Rat(3, 2));
}

TEST_CASE("shear is not a group homomorphism") {
    NilpotentGroup g = make_group(heisenberg_algebra());
    WPolyMap shear = heisenberg_shear(Rat(1));
    PointQ x = {Rat(1), Rat(0), Rat(0)};
    PointQ y = {Rat(1), Rat(1), Rat(0)};
    PointQ lhs = wpmap_eval(shear, group_mul(g, x, y));
    PointQ rhs = group_mul(g, wpmap_eval(shear, x), wpmap_eval(shear, y));
    CHECK(lhs != rhs);
    CHECK(lhs[1] - rhs[1] == Rat(2));
}

TEST_CASE("the first layer shear keeps the filtration and tangent algebra") {
    HFrame sheared = frame_shear_first_layer(heisenberg3_frame());
    CHECK(sheared != heisenberg3_frame());
    CHECK(validate_filtration(sheared).ok);
    CHECK(is_carnot(sheared).ok);
    GradedNilpotentAlgebra alg = heisenberg_algebra();
    CHECK(tangent_algebra_at(sheared, sheared.basepoint).constants == alg.constants);

    HFrame curved = frame_shear_first_layer(heisenberg3_perturbed_frame());
    CHECK(validate_filtration(curved).ok);
    CHECK(tangent_algebra_at(curved, {Rat(1), Rat(0), Rat(0)}).bracket_coeff(0, 1, 2) ==
          Rat(3, 2));

    WeightSequence thin = make_weight_sequence({1, 2});
    std::vector<WPolyVectorField> fields;
    for (int l = 0; l < 2; ++l) {
        WPolyVectorField x = vf_zero(thin.w, kExactTrunc);
        x.coeff[l] = wp_const(thin.w, kExactTrunc, Rat(1));
        fields.push_back(x);
    }
    HFrame f = make_hframe(thin, fields, {Rat(0), Rat(0)});
    CHECK_THROWS_AS(frame_shear_first_layer(f), const PreconditionError&);
}
