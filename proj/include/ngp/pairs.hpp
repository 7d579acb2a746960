#pragma once

#include "ngp/linalg.hpp"
#include "ngp/multipoly.hpp"

#include <string>
#include <vector>

namespace ngp {

// One generator of the Lie algebra k, given by its action matrices: Xv on the
// complex v-coordinates (anti-hermitian; the action on vbar is the conjugate
// matrix) and Xz on the real z-coordinates (real, Gram-antisymmetric).
struct LieGenerator {
    std::string name;
    Mat Xv;
    Mat Xz;
    bool torus = false;  // diagonal Xv and zero/diagonalizable Xz in the weight basis
};

// A supported Gelfand pair from the catalogue: line 6 is (U_n, C^n, su_n),
// line 8 is (U_2 x SU_n, C^2 (x) C^n, su_2), each with n in {2, 3}.
struct PairDescriptor {
    int line = 0;
    int n = 0;
    int kappa = 0;  // dim_C v
    int nu1 = 0;    // dim z_0
    int d0 = 0;     // number of spectral coordinates of the quotient pair
    std::vector<LieGenerator> generators;
    VarLayout layout;  // (v, vbar, z, t)

    // z-basis bookkeeping: b_j = -i H_j with H_j the hermitian basis matrices;
    // gram(j) = tr(H_j^2) and the weighted z-Fischer uses 1/gram.
    std::vector<Mat> z_basis_h;  // the H_j
    std::vector<Rat> z_gram;

    // Complexified weight coordinates w on z_0^C: w = w_of_z * z. The torus
    // generators act diagonally on monomials written in w.
    Mat w_of_z;
    Mat z_of_w;

    std::string id() const;
    std::vector<Rat> fischer_weights() const;  // per-variable weights (1 on v, vbar, t)
};

PairDescriptor make_pair(int line, int n);
PairDescriptor pair_from_id(const std::string& id);
std::vector<std::string> supported_pair_ids();

// Derivation action of one generator: -(Xv v).d_v - (conj(Xv) vbar).d_vbar - (Xz z).d_z.
MultiPoly act(const LieGenerator& X, const MultiPoly& p);

// True when act(X, p) = 0 for every generator of the pair.
bool is_invariant(const PairDescriptor& pair, const MultiPoly& p);

// The fundamental invariants depending on v only (r_1 = |v|^2, plus
// r_2 = tr((vv*)^2) on line 8). These generate the non-harmonic part.
std::vector<MultiPoly> v_only_invariants(const PairDescriptor& pair);

struct SubspaceBasis {
    Multidegree space;
    std::vector<MultiPoly> vectors;
    std::string label;

    int dim() const { return static_cast<int>(vectors.size()); }
};

// Exact basis of the K-invariants of one multidegree, computed as the joint
// kernel of the generator actions (weight-zero prefiltering in the complex
// z-basis keeps the elimination small).
SubspaceBasis invariant_subspace(const PairDescriptor& pair, const Multidegree& d);

// Fischer-orthogonal projection, in the v/vbar variables only, onto the
// harmonic subspace H^{m,m}(v) = (sum_r r^gamma P^{m-d,m-d})^perp; z and t
// dependence is carried along coefficient-wise. Input must have v-bidegree (m,m).
MultiPoly harmonic_projection(const PairDescriptor& pair, const MultiPoly& p, int m);

// Dimension of the harmonic invariants (H^{m,m}(v) (x) P^k(z_0))^K.
int harmonic_invariant_dimension(const PairDescriptor& pair, int m, int k);

// dim_C Hom_k(A, B), computed as the invariants of conj(A) (x) B. Inputs must
// be k-stable; otherwise this throws.
int hom_dimension(const SubspaceBasis& A, const SubspaceBasis& B, const PairDescriptor& pair);

// Line-8 isotypic decomposition of P^{s,0}(v) under the SU_2-factor Casimir;
// the label i satisfies eigenvalue -i(i+2), i = s, s-2, ..., and j is fixed by
// i + 2j = s. Vectors are holomorphic polynomials in v.
std::vector<SubspaceBasis> isotypic_components(const PairDescriptor& pair, int s);

// Clears the per-pair memo caches (mostly for tests and benchmarks).
void clear_pair_caches();

}  // namespace ngp
