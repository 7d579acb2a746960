#pragma once

#include "ngp/scalar.hpp"

#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ngp {

// Variable blocks in their canonical serialization order. v and vbar are the
// complex coordinates on the v-space, z the real coordinates on the z_0-space,
// t the central coordinate, xi the spectral coordinates.
enum class Var : int { v = 0, vbar = 1, z = 2, t = 3, xi = 4 };
inline constexpr int kNumBlocks = 5;

struct VarLayout {
    std::array<int, kNumBlocks> counts{0, 0, 0, 0, 0};

    static VarLayout group(int kappa, int nu1) {
        VarLayout l;
        l.counts = {kappa, kappa, nu1, 1, 0};
        return l;
    }
    static VarLayout vspace(int kappa) {
        VarLayout l;
        l.counts = {kappa, kappa, 0, 0, 0};
        return l;
    }
    static VarLayout spectral(int d0) {
        VarLayout l;
        l.counts = {0, 0, 0, 0, d0};
        return l;
    }

    int count(Var b) const { return counts[static_cast<int>(b)]; }
    int offset(Var b) const {
        int o = 0;
        for (int i = 0; i < static_cast<int>(b); ++i) o += counts[i];
        return o;
    }
    int total() const {
        int o = 0;
        for (int c : counts) o += c;
        return o;
    }
    // Flat index of variable `i` of block `b`.
    int index(Var b, int i) const { return offset(b) + i; }

    friend bool operator==(const VarLayout& a, const VarLayout& b) { return a.counts == b.counts; }
    friend bool operator!=(const VarLayout& a, const VarLayout& b) { return !(a == b); }
};

using Exp = std::vector<int>;

// Per-block total degrees (v, vbar, z, t, xi).
struct Multidegree {
    std::array<int, kNumBlocks> deg{0, 0, 0, 0, 0};

    Multidegree() = default;
    Multidegree(int v, int vbar, int z, int t = 0, int xi = 0) : deg{v, vbar, z, t, xi} {}

    int operator[](Var b) const { return deg[static_cast<int>(b)]; }
    int& operator[](Var b) { return deg[static_cast<int>(b)]; }
    int total() const {
        int s = 0;
        for (int d : deg) s += d;
        return s;
    }

    friend bool operator==(const Multidegree& a, const Multidegree& b) { return a.deg == b.deg; }
    friend bool operator!=(const Multidegree& a, const Multidegree& b) { return !(a == b); }
    friend bool operator<(const Multidegree& a, const Multidegree& b) { return a.deg < b.deg; }

    friend Multidegree operator+(const Multidegree& a, const Multidegree& b) {
        Multidegree r;
        for (int i = 0; i < kNumBlocks; ++i) r.deg[i] = a.deg[i] + b.deg[i];
        return r;
    }

    std::string str() const {
        std::ostringstream os;
        os << "(" << deg[0] << "," << deg[1] << "," << deg[2] << "," << deg[3];
        if (deg[4]) os << "," << deg[4];
        os << ")";
        return os.str();
    }
};

// Sparse multigraded polynomial over Gaussian rationals. Terms map exponent
// vectors to coefficients; zero coefficients are never stored, so structural
// equality is mathematical equality.
class MultiPoly {
  public:
    MultiPoly() = default;
    explicit MultiPoly(VarLayout layout) : layout_(layout) {}

    static MultiPoly constant(VarLayout layout, Scalar c) {
        MultiPoly p(layout);
        p.add_term(Exp(layout.total(), 0), std::move(c));
        return p;
    }
    static MultiPoly variable(VarLayout layout, Var b, int i, Scalar c = Scalar(1)) {
        MultiPoly p(layout);
        Exp e(layout.total(), 0);
        e[layout.index(b, i)] = 1;
        p.add_term(std::move(e), std::move(c));
        return p;
    }
    static MultiPoly monomial(VarLayout layout, Exp e, Scalar c) {
        MultiPoly p(layout);
        if (static_cast<int>(e.size()) != layout.total())
            throw std::invalid_argument("MultiPoly: exponent length mismatch");
        p.add_term(std::move(e), std::move(c));
        return p;
    }

    const VarLayout& layout() const { return layout_; }
    const std::map<Exp, Scalar>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int term_count() const { return static_cast<int>(terms_.size()); }

    void add_term(Exp e, Scalar c) {
        if (c.is_zero()) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(std::move(e), std::move(c));
        } else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    Scalar coeff(const Exp& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Scalar(0) : it->second;
    }

    static Multidegree multidegree_of(const VarLayout& layout, const Exp& e) {
        Multidegree d;
        int pos = 0;
        for (int b = 0; b < kNumBlocks; ++b)
            for (int i = 0; i < layout.counts[b]; ++i) d.deg[b] += e[pos++];
        return d;
    }

    // The multidegree when the polynomial is multihomogeneous, else nullopt.
    std::optional<Multidegree> multidegree() const {
        std::optional<Multidegree> d;
        for (const auto& [e, c] : terms_) {
            Multidegree m = multidegree_of(layout_, e);
            if (!d)
                d = m;
            else if (*d != m)
                return std::nullopt;
        }
        return d;
    }

    int degree_in(Var b) const {
        int m = 0;
        for (const auto& [e, c] : terms_) m = std::max(m, multidegree_of(layout_, e)[b]);
        return m;
    }

    std::map<Multidegree, MultiPoly> graded_components() const {
        std::map<Multidegree, MultiPoly> out;
        for (const auto& [e, c] : terms_) {
            Multidegree d = multidegree_of(layout_, e);
            auto it = out.find(d);
            if (it == out.end()) it = out.emplace(d, MultiPoly(layout_)).first;
            it->second.add_term(e, c);
        }
        return out;
    }

    MultiPoly grade_component(const Multidegree& d) const {
        MultiPoly out(layout_);
        for (const auto& [e, c] : terms_)
            if (multidegree_of(layout_, e) == d) out.add_term(e, c);
        return out;
    }

    MultiPoly& operator+=(const MultiPoly& o) {
        require_same_layout(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        require_same_layout(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    MultiPoly& operator*=(const Scalar& s) {
        if (s.is_zero()) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }

    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { a += b; return a; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { a -= b; return a; }
    friend MultiPoly operator*(MultiPoly a, const Scalar& s) { a *= s; return a; }
    friend MultiPoly operator*(const Scalar& s, MultiPoly a) { a *= s; return a; }

    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.require_same_layout(b);
        MultiPoly r(a.layout_);
        const int n = a.layout_.total();
        Exp e(n, 0);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                for (int i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }

    friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
        return a.layout_ == b.layout_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

    // Swaps v and vbar exponents and conjugates coefficients; z, t, xi fixed.
    MultiPoly conjugate() const {
        const int kv = layout_.count(Var::v);
        if (kv != layout_.count(Var::vbar))
            throw std::domain_error("conjugate: v and vbar counts differ");
        const int ov = layout_.offset(Var::v);
        const int ob = layout_.offset(Var::vbar);
        MultiPoly r(layout_);
        for (const auto& [e, c] : terms_) {
            Exp f = e;
            for (int i = 0; i < kv; ++i) std::swap(f[ov + i], f[ob + i]);
            r.add_term(std::move(f), c.conj());
        }
        return r;
    }

    MultiPoly derivative(int var) const {
        MultiPoly r(layout_);
        for (const auto& [e, c] : terms_) {
            if (e[var] == 0) continue;
            Exp f = e;
            f[var] -= 1;
            r.add_term(std::move(f), c * Scalar(Rat(e[var])));
        }
        return r;
    }

    MultiPoly mul_var(int var, int power = 1) const {
        MultiPoly r(layout_);
        for (const auto& [e, c] : terms_) {
            Exp f = e;
            f[var] += power;
            r.add_term(std::move(f), c);
        }
        return r;
    }

    // Substitutes x_i -> sum_j L(i,j) y_j for the variables of one block
    // (the block keeps its slot and size L.cols() must equal the count).
    template <typename Matrix>
    MultiPoly substitute_block_linear(Var b, const Matrix& L) const {
        const int nb = layout_.count(b);
        if (L.rows() != nb || L.cols() != nb)
            throw std::invalid_argument("substitute_block_linear: shape mismatch");
        const int off = layout_.offset(b);
        MultiPoly out(layout_);
        for (const auto& [e, c] : terms_) {
            MultiPoly term = MultiPoly::constant(layout_, c);
            Exp rest = e;
            for (int i = 0; i < nb; ++i) rest[off + i] = 0;
            term = term * MultiPoly::monomial(layout_, rest, Scalar(1));
            for (int i = 0; i < nb; ++i) {
                if (e[off + i] == 0) continue;
                MultiPoly lin(layout_);
                for (int j = 0; j < nb; ++j) {
                    Scalar lc = L(i, j);
                    if (lc.is_zero()) continue;
                    Exp f(layout_.total(), 0);
                    f[off + j] = 1;
                    lin.add_term(std::move(f), lc);
                }
                for (int k = 0; k < e[off + i]; ++k) term = term * lin;
            }
            out += term;
        }
        return out;
    }

    // Evaluates the variables of one block at scalar values.
    MultiPoly substitute_block_values(Var b, const std::vector<Scalar>& values) const {
        const int nb = layout_.count(b);
        if (static_cast<int>(values.size()) != nb)
            throw std::invalid_argument("substitute_block_values: size mismatch");
        const int off = layout_.offset(b);
        MultiPoly out(layout_);
        for (const auto& [e, c] : terms_) {
            Scalar coeff = c;
            for (int i = 0; i < nb && !coeff.is_zero(); ++i)
                if (e[off + i]) coeff *= rat_pow(values[i], e[off + i]);
            Exp f = e;
            for (int i = 0; i < nb; ++i) f[off + i] = 0;
            out.add_term(std::move(f), std::move(coeff));
        }
        return out;
    }

    // Re-homes the polynomial into a layout with the same per-block counts for
    // the blocks it uses (unused blocks may grow from zero).
    MultiPoly embed(const VarLayout& target) const {
        for (int b = 0; b < kNumBlocks; ++b)
            if (layout_.counts[b] != 0 && layout_.counts[b] != target.counts[b])
                throw std::invalid_argument("embed: incompatible layouts");
        MultiPoly out(target);
        for (const auto& [e, c] : terms_) {
            Exp f(target.total(), 0);
            int src = 0;
            for (int b = 0; b < kNumBlocks; ++b) {
                int toff = 0;
                for (int i = 0; i < b; ++i) toff += target.counts[i];
                for (int i = 0; i < layout_.counts[b]; ++i) f[toff + i] = e[src++];
            }
            out.add_term(std::move(f), c);
        }
        return out;
    }

    std::string str() const;

  private:
    void require_same_layout(const MultiPoly& o) const {
        if (layout_ != o.layout_)
            throw std::invalid_argument("MultiPoly: mismatched variable spaces");
    }

    VarLayout layout_;
    std::map<Exp, Scalar> terms_;
};

// All exponent vectors over `nvars` variables with total degree `deg`, in a
// fixed graded-lexicographic order (first variable's exponent descending).
inline void exponents_of_degree_rec(int nvars, int deg, Exp& cur, std::vector<Exp>& out) {
    if (nvars == 1) {
        cur.push_back(deg);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int e = deg; e >= 0; --e) {
        cur.push_back(e);
        exponents_of_degree_rec(nvars - 1, deg - e, cur, out);
        cur.pop_back();
    }
}

inline std::vector<Exp> exponents_of_degree(int nvars, int deg) {
    if (nvars == 0) return deg == 0 ? std::vector<Exp>{Exp{}} : std::vector<Exp>{};
    std::vector<Exp> out;
    Exp cur;
    exponents_of_degree_rec(nvars, deg, cur, out);
    return out;
}

// Fischer (Bombieri) pairing <x^a, x^b> = a! delta_ab, conjugate-linear in the
// second slot. Positive definite, and multiplication by a coordinate is
// adjoint to the corresponding partial derivative.
inline Scalar fischer_inner(const MultiPoly& p, const MultiPoly& q) {
    if (p.layout() != q.layout()) throw std::invalid_argument("fischer_inner: mismatched variable spaces");
    Scalar acc(0);
    const auto& pt = p.terms();
    const auto& qt = q.terms();
    const auto& small = pt.size() <= qt.size() ? pt : qt;
    const auto& big = pt.size() <= qt.size() ? qt : pt;
    const bool small_is_p = pt.size() <= qt.size();
    for (const auto& [e, c] : small) {
        auto it = big.find(e);
        if (it == big.end()) continue;
        Rat fact(1);
        for (int x : e) fact *= Rat(factorial(x));
        Scalar prod = small_is_p ? c * it->second.conj() : it->second * c.conj();
        acc += prod * Scalar(fact);
    }
    return acc;
}

// Weighted variant <x^a, x^b> = a! w^a delta_ab with one positive rational
// weight per variable; with the inverse-Gram weights on z this is the
// K-invariant pairing on z-polynomials.
inline Scalar fischer_inner_weighted(const MultiPoly& p, const MultiPoly& q,
                                     const std::vector<Rat>& weights) {
    if (p.layout() != q.layout()) throw std::invalid_argument("fischer_inner: mismatched variable spaces");
    if (static_cast<int>(weights.size()) != p.layout().total())
        throw std::invalid_argument("fischer_inner_weighted: weight count mismatch");
    Scalar acc(0);
    for (const auto& [e, c] : p.terms()) {
        auto it = q.terms().find(e);
        if (it == q.terms().end()) continue;
        Rat fact(1);
        for (std::size_t i = 0; i < e.size(); ++i) {
            fact *= Rat(factorial(e[i]));
            for (int k = 0; k < e[i]; ++k) fact *= weights[i];
        }
        acc += c * it->second.conj() * Scalar(fact);
    }
    return acc;
}

inline std::string MultiPoly::str() const {
    if (terms_.empty()) return "0";
    static const char* names[kNumBlocks] = {"v", "vb", "z", "t", "xi"};
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.str() << ")";
        int pos = 0;
        for (int b = 0; b < kNumBlocks; ++b) {
            for (int i = 0; i < layout_.counts[b]; ++i, ++pos) {
                if (e[pos] == 0) continue;
                os << "*" << names[b];
                if (layout_.counts[b] > 1 || b != static_cast<int>(Var::t)) os << (i + 1);
                if (e[pos] > 1) os << "^" << e[pos];
            }
        }
    }
    return os.str();
}

}  // namespace ngp
