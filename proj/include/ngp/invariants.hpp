#pragma once

#include "ngp/pairs.hpp"

#include <map>
#include <string>
#include <vector>

namespace ngp {

// The Table-2 fundamental invariants of a pair, split by variable dependence:
// r (v only), q (z only), p (mixed). Every entry is generator-annihilated.
struct InvariantCatalogue {
    std::vector<MultiPoly> r_list;
    std::vector<MultiPoly> q_list;
    std::vector<MultiPoly> p_list;
    std::vector<Multidegree> r_deg;
    std::vector<Multidegree> q_deg;
    std::vector<Multidegree> p_deg;
    std::vector<std::string> r_names;
    std::vector<std::string> q_names;
    std::vector<std::string> p_names;
};

const InvariantCatalogue& fundamental_invariants(const PairDescriptor& pair);

// One element ptilde^alpha q^beta r^gamma (times the requested t power) of the
// canonical basis of the invariant algebra.
struct CanonicalBasisElement {
    Exp alpha;  // over p_list
    Exp beta;   // over q_list
    Exp gamma;  // over r_list
    int t_power = 0;
    int bracket_degree = 0;  // z-degree contributed by ptilde^alpha
    MultiPoly poly;

    std::string label() const;
};

// All canonical basis elements of one multidegree; cardinality equals the
// invariant dimension there. Mixed powers are harmonically projected.
std::vector<CanonicalBasisElement> canonical_basis(const PairDescriptor& pair, const Multidegree& d);

// Harmonic component of the invariant monomial p^alpha (memoized).
MultiPoly ptilde(const PairDescriptor& pair, const Exp& alpha);

inline constexpr int kDefaultDegreeCap = 8;

struct DecompositionTerm {
    Exp alpha;
    Exp beta;
    Exp gamma;
    MultiPoly coeff;  // polynomial in t (constant when the input is t-free)
};

// Unique expansion of a K-invariant polynomial over the canonical basis.
// Throws when G is not invariant or exceeds the degree cap. `reversed_order`
// re-solves against the reversed basis enumeration; the result must agree.
std::vector<DecompositionTerm> decompose_invariant(const PairDescriptor& pair, const MultiPoly& G,
                                                   int degree_cap = kDefaultDegreeCap,
                                                   bool reversed_order = false);

MultiPoly reconstruct_decomposition(const PairDescriptor& pair,
                                    const std::vector<DecompositionTerm>& terms);

// One regrouped term of the Hadamard-type splitting: the z-carrying monomial
// ptilde^alpha q^beta together with its coefficient polynomial in the
// r-invariants.
struct HadamardTerm {
    Exp alpha;
    Exp beta;
    std::map<Exp, Scalar> g;  // exponents over r_list -> coefficient
};

// Regroups the canonical decomposition of a z-homogeneous invariant (degree
// exactly k in z, no t dependence) by its z-carrying monomials.
std::vector<HadamardTerm> hadamard_split(const PairDescriptor& pair, const MultiPoly& G, int k);

struct EquivariantComponents {
    int m = 0;
    std::vector<MultiPoly> a;      // orthogonal basis of V_m = H^{m,m} cap P^m(ell)
    std::vector<Rat> norms;        // Fischer norms <a_j, a_j>
    std::vector<MultiPoly> b;      // z-polynomials with sum_j a_j b_j = ptilde^alpha
    MultiPoly ptilde_alpha;
};

// The ell_j: z-linear coefficients of p_1, spanning a K-module equivalent to z_0.
std::vector<MultiPoly> ell_coefficients(const PairDescriptor& pair);

// Orthogonal basis of V_m (memoized). For m = 1 this is exactly the ell_j.
SubspaceBasis Vm_basis(const PairDescriptor& pair, int m);

EquivariantComponents equivariant_components(const PairDescriptor& pair, const Exp& alpha);

// Fischer pairing in the v variables only: <P(.,z,t), a>_v as a z,t-polynomial.
MultiPoly fischer_inner_v(const MultiPoly& P, const MultiPoly& a);

void clear_invariant_caches();

}  // namespace ngp
