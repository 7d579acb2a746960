#pragma once

#include "ngp/invariants.hpp"
#include "ngp/pairs.hpp"

#include <map>
#include <optional>
#include <vector>

namespace ngp {

// Variables of the Heisenberg quotient group: (v, vbar, t), no z.
inline VarLayout heisenberg_layout(int kappa) {
    VarLayout l;
    l.counts = {kappa, kappa, 0, 1, 0};
    return l;
}

// Polynomial-coefficient differential operator on the Heisenberg group:
// a finite sum of coeff(v, vbar, t) * d^a_v d^b_vbar d^c_t.
class DiffOp {
  public:
    DiffOp() = default;
    explicit DiffOp(VarLayout layout) : layout_(layout) {}

    static DiffOp identity(VarLayout layout) {
        DiffOp d(layout);
        d.add_term(Exp(layout.total(), 0), MultiPoly::constant(layout, Scalar(1)));
        return d;
    }
    static DiffOp multiplication(const MultiPoly& f) {
        DiffOp d(f.layout());
        d.add_term(Exp(f.layout().total(), 0), f);
        return d;
    }
    static DiffOp partial(VarLayout layout, Var b, int i) {
        DiffOp d(layout);
        Exp e(layout.total(), 0);
        e[layout.index(b, i)] = 1;
        d.add_term(std::move(e), MultiPoly::constant(layout, Scalar(1)));
        return d;
    }

    const VarLayout& layout() const { return layout_; }
    const std::map<Exp, MultiPoly>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Exp deriv, MultiPoly coeff) {
        if (coeff.is_zero()) return;
        auto it = terms_.find(deriv);
        if (it == terms_.end()) {
            terms_.emplace(std::move(deriv), std::move(coeff));
        } else {
            it->second += coeff;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    DiffOp& operator+=(const DiffOp& o) {
        for (const auto& [d, c] : o.terms_) add_term(d, c);
        return *this;
    }
    DiffOp& operator-=(const DiffOp& o) {
        for (const auto& [d, c] : o.terms_) add_term(d, c * Scalar(-1));
        return *this;
    }
    DiffOp& operator*=(const Scalar& s) {
        if (s.is_zero()) {
            terms_.clear();
            return *this;
        }
        for (auto& [d, c] : terms_) c *= s;
        return *this;
    }
    friend DiffOp operator+(DiffOp a, const DiffOp& b) { a += b; return a; }
    friend DiffOp operator-(DiffOp a, const DiffOp& b) { a -= b; return a; }
    friend DiffOp operator*(DiffOp a, const Scalar& s) { a *= s; return a; }
    friend DiffOp operator*(const Scalar& s, DiffOp a) { a *= s; return a; }
    friend bool operator==(const DiffOp& a, const DiffOp& b) {
        return a.layout_ == b.layout_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const DiffOp& a, const DiffOp& b) { return !(a == b); }

    std::string str() const;

  private:
    VarLayout layout_;
    std::map<Exp, MultiPoly> terms_;
};

// Exact operator composition: apply(compose(D1, D2), p) = apply(D1, apply(D2, p)).
DiffOp compose(const DiffOp& d1, const DiffOp& d2);

// Applies the operator to a polynomial; p may carry extra z variables, which
// the operator treats as constants.
MultiPoly apply(const DiffOp& d, const MultiPoly& p);

// Formal adjoint with respect to Lebesgue measure in the (v, vbar, t)
// coordinates: (f .)* = conj(f) ., (d_{v_j})* = -d_{vbar_j}, (d_t)* = -d_t.
DiffOp formal_adjoint(const DiffOp& d);

struct VectorFields {
    std::vector<DiffOp> Z;
    std::vector<DiffOp> Zbar;
    DiffOp T;
};

// Z_j = d_{v_j} - (i/4) vbar_j d_t, Zbar_j = d_{vbar_j} + (i/4) v_j d_t, T = d_t.
VectorFields vector_fields(const PairDescriptor& pair);

// Weyl symmetrization: each monomial in v, vbar maps to the average over all
// orderings of the corresponding word in {Z_j, Zbar_j}. Input must not touch
// z or t.
DiffOp symmetrize(const PairDescriptor& pair, const MultiPoly& p);

// Doubled homogeneity degree under r.(v,t) = (r^{1/2} v, r t), or nullopt when
// the operator is not homogeneous. (Doubled so the value stays integral.)
std::optional<int> dilation_degree_x2(const DiffOp& d);

struct EquivariantOperator {
    int m = 0;
    std::vector<DiffOp> components;  // A_j^{(m)} = symmetrize(a_j^{(m)})
    std::vector<Rat> norms;          // Fischer norms of the a_j
    std::string basis_tag;           // label of the V_m basis used
};

// M_m: one symmetrized component per V_m basis vector.
EquivariantOperator build_Mm(const PairDescriptor& pair, int m);

// U_m = sum_j w_j A_j^* A_j with w_j = 2/<a_j, a_j>, the invariant sum;
// the weight normalization matches the raw Pauli basis at m = 1.
DiffOp build_Um(const PairDescriptor& pair, int m);

void clear_nilgroup_caches();

}  // namespace ngp
