#include "ngp/multipoly.hpp"
#include "ngp/linalg.hpp"
#include "ngp/pairs.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace ngp;

namespace {

// Line 6, n=2 fixtures written out in coordinates; these serve as the
// independent oracles for the structured constructors used elsewhere.
const VarLayout kL62 = VarLayout::group(2, 3);

MultiPoly mono(const VarLayout& l, std::initializer_list<int> e, Scalar c) {
    return MultiPoly::monomial(l, Exp(e), c);
}

// r1 = |v|^2 = v1 vb1 + v2 vb2
MultiPoly r1_l62() {
    MultiPoly p(kL62);
    p += mono(kL62, {1, 0, 1, 0, 0, 0, 0, 0}, Scalar(1));
    p += mono(kL62, {0, 1, 0, 1, 0, 0, 0, 0}, Scalar(1));
    return p;
}

// p1 = z1(vb1 v2 + vb2 v1) + z2(i vb2 v1 - i vb1 v2) + z3(vb1 v1 - vb2 v2),
// the schoolbook expansion of v^*(iz)v in the Pauli z-basis.
MultiPoly p1_l62() {
    const Scalar i = Scalar::I();
    MultiPoly p(kL62);
    p += mono(kL62, {0, 1, 1, 0, 1, 0, 0, 0}, Scalar(1));   // z1 vb1 v2
    p += mono(kL62, {1, 0, 0, 1, 1, 0, 0, 0}, Scalar(1));   // z1 vb2 v1
    p += mono(kL62, {1, 0, 0, 1, 0, 1, 0, 0}, i);           // z2 i vb2 v1
    p += mono(kL62, {0, 1, 1, 0, 0, 1, 0, 0}, -i);          // z2 -i vb1 v2
    p += mono(kL62, {1, 0, 1, 0, 0, 0, 1, 0}, Scalar(1));   // z3 vb1 v1
    p += mono(kL62, {0, 1, 0, 1, 0, 0, 1, 0}, Scalar(-1));  // z3 -vb2 v2
    return p;
}

MultiPoly random_poly(const VarLayout& l, std::mt19937& rng, int maxdeg, int nterms) {
    std::uniform_int_distribution<int> dege(0, maxdeg);
    std::uniform_int_distribution<int> coef(-4, 4);
    MultiPoly p(l);
    for (int t = 0; t < nterms; ++t) {
        Exp e(l.total(), 0);
        int budget = dege(rng);
        for (int i = 0; i < budget; ++i) e[std::uniform_int_distribution<int>(0, l.total() - 1)(rng)]++;
        p += MultiPoly::monomial(l, e, Scalar(Rat(coef(rng)), Rat(coef(rng))));
    }
    return p;
}

}  // namespace

TEST_CASE("scalar field arithmetic is exact") {
    Scalar a(Rat(1, 3), Rat(-2, 7));
    Scalar b(Rat(5, 2), Rat(4));
    CHECK((a * b) / b == a);
    CHECK((a + b) - b == a);
    CHECK(a * Scalar(1) == a);
    CHECK((a.conj().conj()) == a);
    Scalar n = a * a.conj();
    CHECK(n.is_real());
    CHECK(n.re == a.abs2());
    CHECK(parse_rat("-6/21") == Rat(-2, 7));
    CHECK(rat_str(parse_rat("-6/21")) == "-2/7");
}

TEST_CASE("poly_add identities") {
    MultiPoly v1 = MultiPoly::variable(kL62, Var::v, 0);
    MultiPoly zero(kL62);
    CHECK(v1 + zero == v1);
    // v1 vb1 + v2 vb2 is the line-6 invariant r1 for n=2
    MultiPoly s = mono(kL62, {1, 0, 1, 0, 0, 0, 0, 0}, Scalar(1)) +
                  mono(kL62, {0, 1, 0, 1, 0, 0, 0, 0}, Scalar(1));
    CHECK(s == r1_l62());
    MultiPoly p = p1_l62();
    CHECK((p + Scalar(-1) * p).is_zero());
    CHECK((p + Scalar(-1) * p).terms().empty());
}

TEST_CASE("poly_mul and grading") {
    MultiPoly v1 = MultiPoly::variable(kL62, Var::v, 0);
    MultiPoly vb1 = MultiPoly::variable(kL62, Var::vbar, 0);
    CHECK(v1 * vb1 == mono(kL62, {1, 0, 1, 0, 0, 0, 0, 0}, Scalar(1)));

    MultiPoly r2 = r1_l62() * r1_l62();
    auto d = r2.multidegree();
    REQUIRE(d.has_value());
    CHECK(*d == Multidegree(2, 2, 0, 0));

    // p1*p1 against an independent schoolbook expansion over all term pairs
    MultiPoly p = p1_l62();
    MultiPoly expected(kL62);
    for (const auto& [ea, ca] : p.terms())
        for (const auto& [eb, cb] : p.terms()) {
            Exp e(ea.size());
            for (std::size_t i = 0; i < ea.size(); ++i) e[i] = ea[i] + eb[i];
            expected.add_term(e, ca * cb);
        }
    MultiPoly got = p * p;
    CHECK(got == expected);
    CHECK(*got.multidegree() == Multidegree(2, 2, 2, 0));

    MultiPoly ws(kL62);
    CHECK_THROWS_AS(p * MultiPoly(VarLayout::group(3, 8)), std::invalid_argument);
}

TEST_CASE("grade_component extraction") {
    MultiPoly v1 = MultiPoly::variable(kL62, Var::v, 0);
    MultiPoly sum = v1 + v1 * MultiPoly::variable(kL62, Var::vbar, 0);
    CHECK(sum.grade_component(Multidegree(1, 0, 0, 0)) == v1);

    PairDescriptor pair = make_pair(6, 2);
    MultiPoly p1 = p1_l62();
    MultiPoly q2(kL62);
    for (int j = 0; j < 3; ++j) {
        Exp e(kL62.total(), 0);
        e[kL62.index(Var::z, j)] = 2;
        q2.add_term(e, Scalar(2));
    }
    MultiPoly prod = p1 * p1 * q2;
    // direct degree count: the product is itself homogeneous of (2,2,4,0)
    CHECK(prod.grade_component(Multidegree(2, 2, 4, 0)) == prod);
    CHECK(r1_l62().grade_component(Multidegree(0, 0, 1, 0)).is_zero());

    // extracting all components and summing reproduces the polynomial
    std::mt19937 rng(7);
    MultiPoly rp = random_poly(kL62, rng, 4, 12);
    MultiPoly back(kL62);
    for (const auto& [d, comp] : rp.graded_components()) back += comp;
    CHECK(back == rp);
}

TEST_CASE("conjugate is an involution matching the coordinate expansion") {
    MultiPoly v1 = MultiPoly::variable(kL62, Var::v, 0);
    CHECK(v1.conjugate() == MultiPoly::variable(kL62, Var::vbar, 0));

    // p1 is real-valued: expand and conjugate term-wise
    MultiPoly p = p1_l62();
    CHECK(p.conjugate() == p);

    const Scalar i = Scalar::I();
    MultiPoly m = mono(kL62, {1, 0, 0, 1, 0, 0, 0, 0}, i);  // i v1 vb2
    CHECK(m.conjugate() == mono(kL62, {0, 1, 1, 0, 0, 0, 0, 0}, -i));

    std::mt19937 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        MultiPoly rp = random_poly(kL62, rng, 4, 10);
        CHECK(rp.conjugate().conjugate() == rp);
    }
}

TEST_CASE("fischer pairing on monomials") {
    MultiPoly v1 = MultiPoly::variable(kL62, Var::v, 0);
    MultiPoly v2 = MultiPoly::variable(kL62, Var::v, 1);
    CHECK(fischer_inner(v1, v1) == Scalar(1));
    CHECK(fischer_inner(v1 * v1, v1 * v1) == Scalar(2));
    CHECK(fischer_inner(v1, v2) == Scalar(0));

    // tracelessness of iz: p1 evaluated at z = e3 pairs to zero with r1
    MultiPoly p_at_e3 = p1_l62().substitute_block_values(
        Var::z, {Scalar(0), Scalar(0), Scalar(1)});
    CHECK(fischer_inner(p_at_e3, r1_l62()) == Scalar(0));
}

TEST_CASE("fischer pairing properties") {
    std::mt19937 rng(23);
    for (int rep = 0; rep < 8; ++rep) {
        MultiPoly p = random_poly(kL62, rng, 3, 8);
        MultiPoly q = random_poly(kL62, rng, 3, 8);
        CHECK(fischer_inner(p, q) == fischer_inner(q, p).conj());
        Scalar n = fischer_inner(p, p);
        CHECK(n.is_real());
        CHECK(n.re >= 0);
        CHECK((n.re == 0) == p.is_zero());
    }

    // multiplication by a coordinate and d/dx are mutually adjoint, checked on
    // all monomials of degree <= 6 in a two-variable slice
    VarLayout l = VarLayout::vspace(1);
    for (int dp = 0; dp <= 6; ++dp)
        for (int dq = 0; dq <= 6; ++dq) {
            MultiPoly p = MultiPoly::monomial(l, {dp, 0}, Scalar(1));
            MultiPoly q = MultiPoly::monomial(l, {dq, 0}, Scalar(1));
            CHECK(fischer_inner(p.mul_var(0), q) == fischer_inner(p, q.derivative(0)));
        }
}

TEST_CASE("exact kernel and rank") {
    Mat a(2, 3);
    a << Scalar(1), Scalar(2), Scalar(3),
         Scalar(2), Scalar(4), Scalar(6);
    CHECK(rank(a) == 1);
    Mat k = kernel_basis(a);
    CHECK(k.cols() == 2);
    CHECK(is_zero_matrix(a * k));

    Mat g(2, 2);
    g << Scalar(Rat(1, 2)), Scalar(Rat(1, 3)), Scalar(Rat(1, 3)), Scalar(Rat(1, 4));
    Mat gi = inverse(g);
    CHECK(is_zero_matrix(g * gi - Mat::Identity(2, 2)));

    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coef(-5, 5);
    for (int rep = 0; rep < 6; ++rep) {
        Mat m(4, 6);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 6; ++j) m(i, j) = Scalar(Rat(coef(rng)), Rat(coef(rng)));
        Mat kb = kernel_basis(m);
        CHECK(is_zero_matrix(m * kb));
        CHECK(rank(m) + kb.cols() == 6);
    }
}
