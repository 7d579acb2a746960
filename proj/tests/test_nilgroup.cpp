#include "ngp/nilgroup.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace ngp;

namespace {

MultiPoly random_heis_poly(const VarLayout& l, std::mt19937& rng, int maxdeg, int nterms) {
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_int_distribution<int> pick(0, l.total() - 1);
    std::uniform_int_distribution<int> dege(0, maxdeg);
    MultiPoly p(l);
    for (int t = 0; t < nterms; ++t) {
        Exp e(l.total(), 0);
        int budget = dege(rng);
        for (int i = 0; i < budget; ++i) e[pick(rng)]++;
        p += MultiPoly::monomial(l, e, Scalar(Rat(coef(rng)), Rat(coef(rng))));
    }
    return p;
}

DiffOp random_op(const VarLayout& l, std::mt19937& rng, int max_order) {
    std::uniform_int_distribution<int> pick(0, l.total() - 1);
    std::uniform_int_distribution<int> ord(0, max_order);
    DiffOp d(l);
    for (int t = 0; t < 3; ++t) {
        Exp deriv(l.total(), 0);
        int o = ord(rng);
        for (int i = 0; i < o; ++i) deriv[pick(rng)]++;
        d.add_term(deriv, random_heis_poly(l, rng, 2, 2));
    }
    return d;
}

// L_C = (1/2) sum_{j,k} c_{jk} (Z_j Zbar_k + Zbar_k Z_j), written out by hand
// from the displayed vector fields.
DiffOp LC_by_hand(const PairDescriptor& pair, const Mat& C) {
    VectorFields vf = vector_fields(pair);
    DiffOp out(heisenberg_layout(pair.kappa));
    const Scalar half = Scalar(Rat(1, 2));
    for (int j = 0; j < pair.kappa; ++j)
        for (int k = 0; k < pair.kappa; ++k) {
            if (C(j, k).is_zero()) continue;
            out += (compose(vf.Z[j], vf.Zbar[k]) + compose(vf.Zbar[k], vf.Z[j])) * (half * C(j, k));
        }
    return out;
}

MultiPoly ell_C(const PairDescriptor& pair, const Mat& C) {
    const VarLayout l = heisenberg_layout(pair.kappa);
    MultiPoly p(l);
    for (int j = 0; j < pair.kappa; ++j)
        for (int k = 0; k < pair.kappa; ++k) {
            if (C(j, k).is_zero()) continue;
            Exp e(l.total(), 0);
            e[l.index(Var::v, j)] += 1;
            e[l.index(Var::vbar, k)] += 1;
            p.add_term(std::move(e), C(j, k));
        }
    return p;
}

}  // namespace

TEST_CASE("vector field commutators") {
    PairDescriptor pair = make_pair(6, 2);
    VectorFields vf = vector_fields(pair);
    const VarLayout l = heisenberg_layout(2);

    // [Z_j, Zbar_j] = (i/2) d_t
    for (int j = 0; j < 2; ++j) {
        DiffOp comm = compose(vf.Z[j], vf.Zbar[j]) - compose(vf.Zbar[j], vf.Z[j]);
        CHECK(comm == vf.T * Scalar(Rat(0), Rat(1, 2)));
    }
    // [Z_j, Z_k] = 0, [Z_j, Zbar_k] = 0 for j != k
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            CHECK(compose(vf.Z[j], vf.Z[k]) == compose(vf.Z[k], vf.Z[j]));
            if (j != k)
                CHECK(compose(vf.Z[j], vf.Zbar[k]) == compose(vf.Zbar[k], vf.Z[j]));
        }
    // Z_j 1 = 0
    CHECK(apply(vf.Z[0], MultiPoly::constant(l, Scalar(1))).is_zero());
    // Z_j is homogeneous of doubled degree 1
    CHECK(dilation_degree_x2(vf.Z[0]) == 1);
    CHECK(dilation_degree_x2(vf.T) == 2);
}

TEST_CASE("compose basics and coherence with apply") {
    const VarLayout l = heisenberg_layout(2);
    DiffOp dv = DiffOp::partial(l, Var::v, 0);
    DiffOp mv = DiffOp::multiplication(MultiPoly::variable(l, Var::v, 0));

    // d_{v1} (v1 .) = v1 d_{v1} + 1
    DiffOp expect = DiffOp::identity(l);
    Exp e1(l.total(), 0);
    e1[l.index(Var::v, 0)] = 1;
    expect.add_term(e1, MultiPoly::variable(l, Var::v, 0));
    CHECK(compose(dv, mv) == expect);

    PairDescriptor pair = make_pair(6, 2);
    VectorFields vf = vector_fields(pair);
    CHECK(compose(vf.Z[0], vf.Zbar[0]) - compose(vf.Zbar[0], vf.Z[0]) ==
          vf.T * Scalar(Rat(0), Rat(1, 2)));
    std::mt19937 rng0(3);
    DiffOp d = random_op(l, rng0, 2);
    CHECK(compose(d, DiffOp::identity(l)) == d);
    CHECK(compose(DiffOp::identity(l), d) == d);

    std::mt19937 rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        DiffOp d1 = random_op(l, rng, 2);
        DiffOp d2 = random_op(l, rng, 2);
        MultiPoly q = random_heis_poly(l, rng, 3, 4);
        CHECK(apply(compose(d1, d2), q) == apply(d1, apply(d2, q)));
    }
}

TEST_CASE("formal adjoint") {
    const VarLayout l = heisenberg_layout(2);
    PairDescriptor pair = make_pair(6, 2);
    VectorFields vf = vector_fields(pair);

    // (v1 .)* = (vbar1 .)
    DiffOp mv = DiffOp::multiplication(MultiPoly::variable(l, Var::v, 0));
    CHECK(formal_adjoint(mv) == DiffOp::multiplication(MultiPoly::variable(l, Var::vbar, 0)));

    // Z1* = -Zbar1
    CHECK(formal_adjoint(vf.Z[0]) == vf.Zbar[0] * Scalar(-1));
    CHECK(formal_adjoint(vf.T) == vf.T * Scalar(-1));

    std::mt19937 rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        DiffOp d = random_op(l, rng, 2);
        CHECK(formal_adjoint(formal_adjoint(d)) == d);
        DiffOp d2 = random_op(l, rng, 2);
        CHECK(formal_adjoint(compose(d, d2)) == compose(formal_adjoint(d2), formal_adjoint(d)));
    }
}

TEST_CASE("symmetrize small words") {
    PairDescriptor pair = make_pair(6, 2);
    const VarLayout l = heisenberg_layout(2);
    VectorFields vf = vector_fields(pair);

    CHECK(symmetrize(pair, MultiPoly::constant(l, Scalar(1))) == DiffOp::identity(l));
    CHECK(symmetrize(pair, MultiPoly::variable(l, Var::v, 0)) == vf.Z[0]);

    // symmetrize(v1 vbar1) = (1/2)(Z1 Zbar1 + Zbar1 Z1)
    MultiPoly v1vb1(l);
    Exp e(l.total(), 0);
    e[l.index(Var::v, 0)] = 1;
    e[l.index(Var::vbar, 0)] = 1;
    v1vb1.add_term(e, Scalar(1));
    DiffOp expect = (compose(vf.Z[0], vf.Zbar[0]) + compose(vf.Zbar[0], vf.Z[0])) * Scalar(Rat(1, 2));
    CHECK(symmetrize(pair, v1vb1) == expect);

    // quadratic case: symmetrize(ell_C) = L_C for hermitian C
    std::vector<Mat> cs;
    Mat s1(2, 2), s2(2, 2), s3(2, 2), r(2, 2);
    const Scalar I = Scalar::I();
    s1 << Scalar(0), Scalar(1), Scalar(1), Scalar(0);
    s2 << Scalar(0), Scalar(0) - I, I, Scalar(0);
    s3 << Scalar(1), Scalar(0), Scalar(0), Scalar(-1);
    r << Scalar(Rat(2)), Scalar(Rat(1, 2), Rat(3)), Scalar(Rat(1, 2), Rat(-3)), Scalar(Rat(-7));
    cs = {s1, s2, s3, r};
    for (const Mat& C : cs) CHECK(symmetrize(pair, ell_C(pair, C)) == LC_by_hand(pair, C));

    // rejects z-dependent input
    MultiPoly zpoly = MultiPoly::variable(pair.layout, Var::z, 0);
    CHECK_THROWS_AS(symmetrize(pair, zpoly), std::invalid_argument);
}

TEST_CASE("M_m components are symmetrized V_m vectors with the right grading") {
    PairDescriptor pair = make_pair(6, 2);
    EquivariantOperator m1 = build_Mm(pair, 1);
    REQUIRE(m1.components.size() == 3);
    for (const Rat& n : m1.norms) CHECK(n == Rat(2));
    for (const DiffOp& a : m1.components) CHECK(dilation_degree_x2(a) == 2);

    PairDescriptor p8 = make_pair(8, 2);
    EquivariantOperator m18 = build_Mm(p8, 1);
    CHECK(m18.components.size() == 3);

    EquivariantOperator m2 = build_Mm(pair, 2);
    CHECK(m2.components.size() == 5);
    for (const DiffOp& a : m2.components) CHECK(dilation_degree_x2(a) == 4);

    CHECK_THROWS_AS(build_Mm(pair, 0), std::invalid_argument);
}

TEST_CASE("U_m is self-adjoint and dilation homogeneous of degree 2m") {
    for (const std::string& id : {std::string("L6:n=2"), std::string("L8:n=2")}) {
        PairDescriptor pair = pair_from_id(id);
        for (int m = 1; m <= 2; ++m) {
            DiffOp um = build_Um(pair, m);
            CHECK(formal_adjoint(um) == um);
            CHECK(dilation_degree_x2(um) == 4 * m);
        }
    }
}
