#pragma once

#include "ngp/nilgroup.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ngp {

// Monomial basis of one or several graded layers P^{s,0}(v), ordered degree by
// degree with the deterministic graded-lex enumeration inside each layer.
struct FockBasis {
    int kappa = 0;
    std::vector<int> degrees;
    std::vector<Exp> monomials;  // length-kappa exponents
    std::map<Exp, int> index;

    static FockBasis layer(int kappa, int s);
    static FockBasis layers(int kappa, std::vector<int> degrees);
    int dim() const { return static_cast<int>(monomials.size()); }
    bool single_layer() const { return degrees.size() == 1; }
};

struct GradedMatrix {
    FockBasis source;
    FockBasis target;
    Mat m;
};

// Normal-ordered enveloping-algebra form Z^a Zbar^b T^c of a left-invariant
// operator; exponents use the (v, vbar, t) slot order.
struct PbwOp {
    int kappa = 0;
    std::map<Exp, Scalar> terms;
};

// Extracts the PBW form from a coordinate operator, validating left-invariance
// (throws std::invalid_argument when D is not a Z/Zbar/T word combination).
PbwOp to_pbw(const PairDescriptor& pair, const DiffOp& d);

// Coordinate form of one normal-ordered word (for round-trip checks).
DiffOp pbw_word_coordinates(const PairDescriptor& pair, const Exp& word);

std::string pbw_str(const PbwOp& op);

// Exact matrix of dpi_lambda(D) on P^{s,0}; lambda any nonzero rational (the
// lambda < 0 model swaps the roles of Z and Zbar).
GradedMatrix dpi_matrix(const PairDescriptor& pair, const DiffOp& d, const Rat& lambda, int s);
GradedMatrix dpi_matrix(const PairDescriptor& pair, const PbwOp& op, const Rat& lambda, int s);

// Derivation matrix of phi -> -(Xv).grad phi on holomorphic polynomials.
Mat dsigma_geom(int kappa, const Mat& X, const FockBasis& basis);

// Metaplectic derived action: dsigma_geom(X) - (1/2) tr(X) Id.
Mat dsigma_met(int kappa, const Mat& X, const FockBasis& basis);

// Fock pairing weight of a monomial: e! (2/|lambda|)^{|e|}.
Rat fock_weight(const Exp& e, const Rat& lambda);

// The spectral generating family (D1[, D2], i^{-1} T): D1 = -4 sym(|v|^2) so
// that xi_1 = |lambda|(2s + kappa); on line 8, D2 = 16 sym(tr((vv*)^2)).
const std::vector<DiffOp>& spectral_generators(const PairDescriptor& pair);

// Label of an irreducible V(mu) inside the Fock space: the layer s, plus the
// SU_2 label i on line 8 (i = -1 addresses a whole layer).
struct SpectralLabel {
    int s = 0;
    int i = -1;
    std::string str() const;
};

// The scalar by which dpi_lambda(D) acts on V(mu); throws std::domain_error
// when the restriction is not a multiple of the identity.
Scalar spectral_eigenvalue(const PairDescriptor& pair, const DiffOp& d, const Rat& lambda,
                           const SpectralLabel& label);

struct MetaplecticReport {
    bool pass = false;
    std::string witness;  // first offending entry when failing
};

// Verifies dpi_lambda(i L_C) = (lambda/2) dsigma_met(iC) on every layer s <= S.
MetaplecticReport check_metaplectic(const PairDescriptor& pair, const Mat& C, const Rat& lambda,
                                    int max_s);

struct MmBlockReport {
    std::string label;
    bool admissible = false;
    int joint_rank = 0;
    bool maps_into_block = false;
};

struct MmActionReport {
    std::vector<GradedMatrix> components;
    std::vector<MmBlockReport> blocks;
    bool pass = false;
};

// Matrices of the M_m components on P^{s,0} plus the per-block vanishing and
// intertwining report (blocks are layers on line 6, V_{s,i} on line 8).
MmActionReport Mm_action(const PairDescriptor& pair, int m, const Rat& lambda, int s);

struct UmResult {
    MultiPoly um;       // normalized: leading spectral monomial has coefficient 1
    MultiPoly um_raw;   // exact interpolation of the U_m eigenvalues
    Scalar scale;       // um_raw = scale * um
    bool holdout_ok = false;
    bool product_form_ok = false;  // line 6: proportional to prod(xi1^2 - (2s+kappa)^2 lam^2)
    Scalar coeff_xi1sq;            // line 8 diagnostics on the normalized u_1 ...
    Scalar coeff_xi2;
    Scalar coeff_xi1lam;
    Scalar coeff_lamsq;
};

// Recovers u_m with U_m = u_m(spectral generators) by exact interpolation of
// eigenvalues over (lambda, mu) samples, homogeneous of weighted degree 2m.
UmResult compute_um(const PairDescriptor& pair, int m, int sample_cap);

struct SpectrumPoint {
    std::vector<Scalar> xi;  // d0 coordinates, last one equals lambda
    Rat lambda;
    int s = 0;
    int i = -1;
    bool in_Sm = false;
};

std::vector<SpectrumPoint> spectrum_points(const PairDescriptor& pair, const std::vector<Rat>& lambdas,
                                           int max_s, std::optional<int> m = std::nullopt);

// Exact division p = u_m q for spectral polynomials vanishing on S_m; throws
// std::invalid_argument when p does not vanish on S_m and std::domain_error
// when a remainder survives.
MultiPoly divide_by_um(const PairDescriptor& pair, int m, const MultiPoly& p);

void clear_bargmann_caches();

}  // namespace ngp
