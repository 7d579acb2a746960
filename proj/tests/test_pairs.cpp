#include "ngp/pairs.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace ngp;

namespace {

const VarLayout kL62 = VarLayout::group(2, 3);

MultiPoly mono(const VarLayout& l, std::initializer_list<int> e, Scalar c) {
    return MultiPoly::monomial(l, Exp(e), c);
}

MultiPoly r1_l62() {
    MultiPoly p(kL62);
    p += mono(kL62, {1, 0, 1, 0, 0, 0, 0, 0}, Scalar(1));
    p += mono(kL62, {0, 1, 0, 1, 0, 0, 0, 0}, Scalar(1));
    return p;
}

MultiPoly p1_l62() {
    const Scalar i = Scalar::I();
    MultiPoly p(kL62);
    p += mono(kL62, {0, 1, 1, 0, 1, 0, 0, 0}, Scalar(1));
    p += mono(kL62, {1, 0, 0, 1, 1, 0, 0, 0}, Scalar(1));
    p += mono(kL62, {1, 0, 0, 1, 0, 1, 0, 0}, i);
    p += mono(kL62, {0, 1, 1, 0, 0, 1, 0, 0}, -i);
    p += mono(kL62, {1, 0, 1, 0, 0, 0, 1, 0}, Scalar(1));
    p += mono(kL62, {0, 1, 0, 1, 0, 0, 1, 0}, Scalar(-1));
    return p;
}

MultiPoly random_vpoly(const VarLayout& l, std::mt19937& rng, int bideg) {
    std::uniform_int_distribution<int> coef(-3, 3);
    MultiPoly p(l);
    auto vex = exponents_of_degree(l.count(Var::v), bideg);
    for (const Exp& a : vex)
        for (const Exp& b : vex) {
            Exp e(l.total(), 0);
            for (int i = 0; i < l.count(Var::v); ++i) {
                e[l.index(Var::v, i)] = a[i];
                e[l.index(Var::vbar, i)] = b[i];
            }
            p += MultiPoly::monomial(l, e, Scalar(Rat(coef(rng)), Rat(coef(rng))));
        }
    return p;
}

bool proportional(const MultiPoly& a, const MultiPoly& b) {
    if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
    const auto& [e, c] = *a.terms().begin();
    Scalar cb = b.coeff(e);
    if (cb.is_zero()) return false;
    MultiPoly scaled = a * (cb / c);
    return scaled == b;
}

}  // namespace

TEST_CASE("make_pair catalogue") {
    PairDescriptor p62 = make_pair(6, 2);
    CHECK(p62.kappa == 2);
    CHECK(p62.nu1 == 3);
    CHECK(p62.d0 == 2);
    CHECK(p62.generators.size() == 4);  // dim u_2

    PairDescriptor p82 = make_pair(8, 2);
    CHECK(p82.kappa == 4);
    CHECK(p82.nu1 == 3);
    CHECK(p82.d0 == 3);
    CHECK(p82.generators.size() == 7);  // dim(u_2 + su_2)

    PairDescriptor p63 = make_pair(6, 3);
    CHECK(p63.kappa == 3);
    CHECK(p63.nu1 == 8);
    CHECK(p63.generators.size() == 9);

    PairDescriptor p83 = make_pair(8, 3);
    CHECK(p83.kappa == 6);
    CHECK(p83.generators.size() == 12);

    CHECK_THROWS_AS(make_pair(7, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_pair(6, 4), std::invalid_argument);
    CHECK(pair_from_id("L6:n=2").id() == "L6:n=2");
    CHECK_THROWS_AS(pair_from_id("L9:n=2"), std::invalid_argument);
}

TEST_CASE("generator matrices satisfy the structural invariants") {
    for (const std::string& id : supported_pair_ids()) {
        PairDescriptor pair = pair_from_id(id);
        for (const auto& g : pair.generators) {
            // Xv anti-hermitian
            CHECK(is_zero_matrix(g.Xv + conj_transpose(g.Xv)));
            // Xz real and Gram-antisymmetric: Xz^T G + G Xz = 0
            Mat gram = Mat::Zero(pair.nu1, pair.nu1);
            for (int i = 0; i < pair.nu1; ++i) gram(i, i) = Scalar(pair.z_gram[i]);
            Mat anti = g.Xz.transpose() * gram + gram * g.Xz;
            CHECK(is_zero_matrix(anti));
            for (int i = 0; i < pair.nu1; ++i)
                for (int j = 0; j < pair.nu1; ++j) CHECK(g.Xz(i, j).is_real());
        }
    }
}

TEST_CASE("generators close under bracket on the defining representation") {
    for (const std::string& id : {std::string("L6:n=2"), std::string("L8:n=2")}) {
        PairDescriptor pair = pair_from_id(id);
        const int ng = static_cast<int>(pair.generators.size());
        const int kv = pair.kappa;
        Mat basis(kv * kv, ng);
        for (int g = 0; g < ng; ++g)
            for (int i = 0; i < kv; ++i)
                for (int j = 0; j < kv; ++j) basis(i * kv + j, g) = pair.generators[g].Xv(i, j);
        for (int a = 0; a < ng; ++a)
            for (int b = a + 1; b < ng; ++b) {
                Mat cv = pair.generators[a].Xv * pair.generators[b].Xv -
                         pair.generators[b].Xv * pair.generators[a].Xv;
                Vec flat(kv * kv);
                for (int i = 0; i < kv; ++i)
                    for (int j = 0; j < kv; ++j) flat(i * kv + j) = cv(i, j);
                auto x = solve(basis, flat);
                REQUIRE(x.has_value());
                // the same coefficients must reproduce the z-side bracket
                Mat cz = pair.generators[a].Xz * pair.generators[b].Xz -
                         pair.generators[b].Xz * pair.generators[a].Xz;
                Mat rec = Mat::Zero(pair.nu1, pair.nu1);
                for (int g = 0; g < ng; ++g) rec += (*x)(g) * pair.generators[g].Xz;
                CHECK(is_zero_matrix(cz - rec));
            }
    }
}

TEST_CASE("act annihilates constants and the fundamental invariants") {
    PairDescriptor pair = make_pair(6, 2);
    MultiPoly c = MultiPoly::constant(kL62, Scalar(Rat(5, 3)));
    for (const auto& g : pair.generators) {
        CHECK(act(g, c).is_zero());
        CHECK(act(g, r1_l62()).is_zero());
        CHECK(act(g, p1_l62()).is_zero());
    }
    CHECK(is_invariant(pair, p1_l62() * p1_l62() + r1_l62()));
}

TEST_CASE("act is a derivation and skew-adjoint on v-polynomials") {
    PairDescriptor pair = make_pair(6, 2);
    std::mt19937 rng(17);
    for (int rep = 0; rep < 4; ++rep) {
        MultiPoly p = random_vpoly(pair.layout, rng, 2);
        MultiPoly q = random_vpoly(pair.layout, rng, 1);
        for (const auto& g : pair.generators) {
            CHECK(act(g, p * q) == act(g, p) * q + p * act(g, q));
            Scalar lhs = fischer_inner(act(g, p), p) + fischer_inner(p, act(g, p));
            CHECK(lhs == Scalar(0));
            Scalar mixed = fischer_inner(act(g, p * q), p * q) + fischer_inner(p * q, act(g, p * q));
            CHECK(mixed == Scalar(0));
        }
    }
}

TEST_CASE("invariant subspaces at low multidegree, line 6 n=2") {
    PairDescriptor pair = make_pair(6, 2);

    SubspaceBasis b111 = invariant_subspace(pair, Multidegree(1, 1, 1));
    REQUIRE(b111.dim() == 1);
    CHECK(proportional(b111.vectors[0], p1_l62()));

    CHECK(invariant_subspace(pair, Multidegree(0, 0, 1)).dim() == 0);

    SubspaceBasis b110 = invariant_subspace(pair, Multidegree(1, 1, 0));
    REQUIRE(b110.dim() == 1);
    CHECK(proportional(b110.vectors[0], r1_l62()));

    // (2,2,2) holds exactly ptilde(p1^2) and q2 r1^2
    CHECK(invariant_subspace(pair, Multidegree(2, 2, 2)).dim() == 2);
    // t powers ride along
    CHECK(invariant_subspace(pair, Multidegree(1, 1, 0, 2)).dim() == 1);
}

TEST_CASE("brute-force kernel oracle on the 12-dimensional space") {
    // d = (1,1,1): stack all generator actions on the full monomial basis with
    // no weight filtering and compare with invariant_subspace.
    PairDescriptor pair = make_pair(6, 2);
    const VarLayout& l = pair.layout;
    std::vector<Exp> monos;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int z = 0; z < 3; ++z) {
                Exp e(l.total(), 0);
                e[l.index(Var::v, a)] = 1;
                e[l.index(Var::vbar, b)] = 1;
                e[l.index(Var::z, z)] = 1;
                monos.push_back(e);
            }
    REQUIRE(monos.size() == 12);
    std::map<Exp, int> rows;
    std::vector<std::tuple<int, int, Scalar>> trip;
    int nrows = 0;
    for (std::size_t g = 0; g < pair.generators.size(); ++g) {
        for (std::size_t c = 0; c < monos.size(); ++c) {
            MultiPoly im = act(pair.generators[g], MultiPoly::monomial(l, monos[c], Scalar(1)));
            for (const auto& [e, s] : im.terms()) {
                Exp key = e;
                key.push_back(static_cast<int>(g));
                auto [it, fresh] = rows.emplace(key, nrows);
                if (fresh) ++nrows;
                trip.emplace_back(it->second, static_cast<int>(c), s);
            }
        }
    }
    Mat A = Mat::Zero(nrows, 12);
    for (auto& [r, c, s] : trip) A(r, c) += s;
    Mat K = kernel_basis(A);
    CHECK(K.cols() == 1);
}

TEST_CASE("harmonic projection, line 6 n=2") {
    PairDescriptor pair = make_pair(6, 2);
    CHECK(harmonic_projection(pair, r1_l62(), 1).is_zero());
    CHECK(harmonic_projection(pair, p1_l62(), 1) == p1_l62());

    MultiPoly p1sq = p1_l62() * p1_l62();
    MultiPoly h = harmonic_projection(pair, p1sq, 2);
    CHECK(!h.is_zero());
    CHECK(harmonic_projection(pair, h, 2) == h);

    CHECK_THROWS_AS(harmonic_projection(pair, p1sq, 1), std::invalid_argument);
    CHECK(harmonic_projection(pair, MultiPoly(kL62), 3).is_zero());
}

TEST_CASE("harmonic projection is Fischer self-adjoint on P^{m,m}") {
    PairDescriptor pair = make_pair(6, 2);
    std::mt19937 rng(29);
    for (int rep = 0; rep < 4; ++rep) {
        MultiPoly p = random_vpoly(pair.layout, rng, 2);
        MultiPoly q = random_vpoly(pair.layout, rng, 2);
        MultiPoly hp = harmonic_projection(pair, p, 2);
        MultiPoly hq = harmonic_projection(pair, q, 2);
        CHECK(fischer_inner(hp, q) == fischer_inner(p, hq));
    }
}

TEST_CASE("harmonic invariant dimensions match the dichotomy, small degrees") {
    for (const std::string& id : {std::string("L6:n=2"), std::string("L8:n=2")}) {
        PairDescriptor pair = pair_from_id(id);
        for (int m = 0; m <= 2; ++m)
            for (int k = 0; k <= 2; ++k) {
                int dim = harmonic_invariant_dimension(pair, m, k);
                if (k < m) CHECK(dim == 0);
                if (k == m) CHECK(dim == 1);
            }
    }
}

TEST_CASE("hom dimension basics") {
    PairDescriptor pair = make_pair(6, 2);
    const VarLayout& l = pair.layout;

    SubspaceBasis triv;
    triv.space = Multidegree(0, 0, 0);
    triv.vectors.push_back(MultiPoly::constant(l, Scalar(1)));
    CHECK(hom_dimension(triv, triv, pair) == 1);

    SubspaceBasis std_rep;
    std_rep.space = Multidegree(1, 0, 0);
    std_rep.vectors.push_back(MultiPoly::variable(l, Var::v, 0));
    std_rep.vectors.push_back(MultiPoly::variable(l, Var::v, 1));
    CHECK(hom_dimension(std_rep, std_rep, pair) == 1);
    CHECK(hom_dimension(std_rep, triv, pair) == 0);

    // z-coordinates vs the ell_j span: equivalent K-modules
    SubspaceBasis zcoord;
    zcoord.space = Multidegree(0, 0, 1);
    for (int j = 0; j < 3; ++j) zcoord.vectors.push_back(MultiPoly::variable(l, Var::z, j));
    SubspaceBasis ell;
    ell.space = Multidegree(1, 1, 0);
    for (int j = 0; j < 3; ++j) ell.vectors.push_back(p1_l62().derivative(l.index(Var::z, j)));
    CHECK(hom_dimension(zcoord, ell, pair) == 1);
    CHECK(hom_dimension(ell, ell, pair) == 1);

    // non-stable input is rejected
    SubspaceBasis bad;
    bad.space = Multidegree(1, 0, 0);
    bad.vectors.push_back(MultiPoly::variable(l, Var::v, 0));
    CHECK_THROWS_AS(hom_dimension(bad, bad, pair), std::invalid_argument);
}

TEST_CASE("isotypic components of the line-8 Fock layers") {
    PairDescriptor pair = make_pair(8, 2);

    auto c0 = isotypic_components(pair, 0);
    REQUIRE(c0.size() == 1);
    CHECK(c0[0].dim() == 1);
    CHECK(c0[0].label == "s=0,i=0");

    auto c1 = isotypic_components(pair, 1);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].dim() == 4);  // dim R(w1) x S^1 = 2*2
    CHECK(c1[0].label == "s=1,i=1");

    auto c2 = isotypic_components(pair, 2);
    REQUIRE(c2.size() == 2);
    CHECK(c2[0].label == "s=2,i=2");
    CHECK(c2[0].dim() == 9);
    CHECK(c2[1].label == "s=2,i=0");
    CHECK(c2[1].dim() == 1);

    // components are pairwise inequivalent and each is irreducible
    CHECK(hom_dimension(c2[0], c2[1], pair) == 0);
    CHECK(hom_dimension(c2[0], c2[0], pair) == 1);
    CHECK(hom_dimension(c2[1], c2[1], pair) == 1);

    auto c3 = isotypic_components(pair, 3);
    int total = 0;
    for (const auto& c : c3) total += c.dim();
    CHECK(total == 20);  // binom(3+3,3)

    CHECK_THROWS_AS(isotypic_components(make_pair(6, 2), 2), std::invalid_argument);
}
