#include "ngp/nilgroup.hpp"

#include "ngp/memo.hpp"

#include <functional>
#include <sstream>

namespace ngp {

namespace {

MultiPoly derivative_multi(const MultiPoly& p, const VarLayout& oplayout, const Exp& deriv) {
    // Derivatives indexed in the operator layout, applied to p's layout; the
    // blocks present in the operator must match p's.
    MultiPoly r = p;
    int pos = 0;
    for (int b = 0; b < kNumBlocks; ++b) {
        for (int i = 0; i < oplayout.counts[b]; ++i, ++pos) {
            for (int k = 0; k < deriv[pos] && !r.is_zero(); ++k)
                r = r.derivative(p.layout().index(static_cast<Var>(b), i));
        }
    }
    return r;
}

Rat binom_rat(int n, int k) { return Rat(binomial(n, k)); }

struct WordKey {
    Exp a;
    Exp b;
    auto operator<=>(const WordKey&) const = default;
};

}  // namespace

std::string DiffOp::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    static const char* names[kNumBlocks] = {"v", "vb", "z", "t", "xi"};
    for (const auto& [d, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "[" << c.str() << "]";
        int pos = 0;
        for (int b = 0; b < kNumBlocks; ++b)
            for (int i = 0; i < layout_.counts[b]; ++i, ++pos) {
                if (d[pos] == 0) continue;
                os << " d_" << names[b];
                if (layout_.counts[b] > 1) os << (i + 1);
                if (d[pos] > 1) os << "^" << d[pos];
            }
    }
    return os.str();
}

MultiPoly apply(const DiffOp& d, const MultiPoly& p) {
    const VarLayout& ol = d.layout();
    for (int b = 0; b < kNumBlocks; ++b)
        if (ol.counts[b] != 0 && ol.counts[b] != p.layout().counts[b])
            throw std::invalid_argument("apply: operator and polynomial layouts differ");
    MultiPoly out(p.layout());
    for (const auto& [deriv, coeff] : d.terms()) {
        MultiPoly dp = derivative_multi(p, ol, deriv);
        if (dp.is_zero()) continue;
        out += coeff.embed(p.layout()) * dp;
    }
    return out;
}

DiffOp compose(const DiffOp& d1, const DiffOp& d2) {
    if (d1.layout() != d2.layout()) throw std::invalid_argument("compose: layout mismatch");
    const VarLayout& l = d1.layout();
    const int n = l.total();
    DiffOp out(l);
    for (const auto& [b1, c1] : d1.terms()) {
        for (const auto& [b2, c2] : d2.terms()) {
            // d^{b1} (c2 .) = sum_{g <= b1} binom(b1, g) (d^g c2) d^{b1-g}
            std::function<void(int, Exp&, Rat, MultiPoly)> rec = [&](int pos, Exp& g, Rat mult,
                                                                     MultiPoly dc) {
                if (dc.is_zero()) return;
                if (pos == n) {
                    Exp deriv(n);
                    for (int i = 0; i < n; ++i) deriv[i] = b1[i] - g[i] + b2[i];
                    out.add_term(std::move(deriv), c1 * dc * Scalar(mult));
                    return;
                }
                MultiPoly cur = dc;
                for (int k = 0; k <= b1[pos]; ++k) {
                    g[pos] = k;
                    rec(pos + 1, g, mult * binom_rat(b1[pos], k), cur);
                    if (k < b1[pos]) {
                        cur = cur.derivative(pos);
                        if (cur.is_zero()) break;
                    }
                }
                g[pos] = 0;
            };
            Exp g(n, 0);
            rec(0, g, Rat(1), c2);
        }
    }
    return out;
}

DiffOp formal_adjoint(const DiffOp& d) {
    const VarLayout& l = d.layout();
    const int kv = l.count(Var::v);
    DiffOp out(l);
    for (const auto& [deriv, coeff] : d.terms()) {
        // (c d^b)* = (-1)^{|b|} d^{b~} (conj(c) .), with b~ swapping v and vbar
        Exp swapped = deriv;
        for (int i = 0; i < kv; ++i)
            std::swap(swapped[l.index(Var::v, i)], swapped[l.index(Var::vbar, i)]);
        int order = 0;
        for (int x : deriv) order += x;
        DiffOp pure(l);
        pure.add_term(std::move(swapped),
                      MultiPoly::constant(l, order % 2 ? Scalar(-1) : Scalar(1)));
        DiffOp mult = DiffOp::multiplication(coeff.conjugate());
        out += compose(pure, mult);
    }
    return out;
}

VectorFields vector_fields(const PairDescriptor& pair) {
    const VarLayout l = heisenberg_layout(pair.kappa);
    const Scalar i4 = Scalar(Rat(0), Rat(1, 4));
    VectorFields vf;
    vf.T = DiffOp::partial(l, Var::t, 0);
    for (int j = 0; j < pair.kappa; ++j) {
        DiffOp z = DiffOp::partial(l, Var::v, j);
        DiffOp zc(l);
        Exp dt(l.total(), 0);
        dt[l.index(Var::t, 0)] = 1;
        zc.add_term(dt, MultiPoly::variable(l, Var::vbar, j, Scalar(0) - i4));
        vf.Z.push_back(z + zc);

        DiffOp zb = DiffOp::partial(l, Var::vbar, j);
        DiffOp zbc(l);
        zbc.add_term(dt, MultiPoly::variable(l, Var::v, j, i4));
        vf.Zbar.push_back(zb + zbc);
    }
    return vf;
}

namespace {

MemoCache<std::string, VectorFields>& vf_cache() {
    static MemoCache<std::string, VectorFields> cache;
    return cache;
}

const VectorFields& fields_of(const PairDescriptor& pair) {
    return vf_cache().get_or_compute(pair.id(), [&] { return vector_fields(pair); });
}

}  // namespace

DiffOp symmetrize(const PairDescriptor& pair, const MultiPoly& p) {
    const VarLayout l = heisenberg_layout(pair.kappa);
    const VectorFields& vf = fields_of(pair);
    const int kv = pair.kappa;

    // Weyl(word) = (1/|word|) sum over first letters of letter . Weyl(rest);
    // memoized over the sub-multisets of each monomial's word.
    std::map<WordKey, DiffOp> memo;
    std::function<const DiffOp&(const Exp&, const Exp&)> weyl = [&](const Exp& a,
                                                                    const Exp& b) -> const DiffOp& {
        WordKey key{a, b};
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        int len = 0;
        for (int x : a) len += x;
        for (int x : b) len += x;
        DiffOp result(l);
        if (len == 0) {
            result = DiffOp::identity(l);
        } else {
            for (int j = 0; j < kv; ++j) {
                if (a[j] > 0) {
                    Exp a2 = a;
                    a2[j] -= 1;
                    result += compose(vf.Z[j], weyl(a2, b)) * Scalar(Rat(a[j], len));
                }
                if (b[j] > 0) {
                    Exp b2 = b;
                    b2[j] -= 1;
                    result += compose(vf.Zbar[j], weyl(a, b2)) * Scalar(Rat(b[j], len));
                }
            }
        }
        return memo.emplace(std::move(key), std::move(result)).first->second;
    };

    DiffOp out(l);
    const VarLayout& pl = p.layout();
    if (pl.count(Var::v) != kv) throw std::invalid_argument("symmetrize: wrong v dimension");
    for (const auto& [e, c] : p.terms()) {
        Multidegree d = MultiPoly::multidegree_of(pl, e);
        if (d[Var::z] != 0 || d[Var::t] != 0 || d[Var::xi] != 0)
            throw std::invalid_argument("symmetrize: input depends on z or t");
        Exp a(kv), b(kv);
        for (int i = 0; i < kv; ++i) {
            a[i] = e[pl.index(Var::v, i)];
            b[i] = e[pl.index(Var::vbar, i)];
        }
        out += weyl(a, b) * c;
    }
    return out;
}

std::optional<int> dilation_degree_x2(const DiffOp& d) {
    const VarLayout& l = d.layout();
    std::optional<int> deg;
    for (const auto& [deriv, coeff] : d.terms()) {
        Multidegree dd = MultiPoly::multidegree_of(l, deriv);
        int base = dd[Var::v] + dd[Var::vbar] + 2 * dd[Var::t];
        for (const auto& [e, c] : coeff.terms()) {
            Multidegree ce = MultiPoly::multidegree_of(l, e);
            int w = base - ce[Var::v] - ce[Var::vbar] - 2 * ce[Var::t];
            if (!deg)
                deg = w;
            else if (*deg != w)
                return std::nullopt;
        }
    }
    return deg;
}

namespace {

MultiPoly restrict_to_heisenberg(const MultiPoly& p, const VarLayout& heis) {
    const VarLayout& l = p.layout();
    MultiPoly out(heis);
    for (const auto& [e, c] : p.terms()) {
        Exp f(heis.total(), 0);
        for (int i = 0; i < heis.count(Var::v); ++i) {
            f[heis.index(Var::v, i)] = e[l.index(Var::v, i)];
            f[heis.index(Var::vbar, i)] = e[l.index(Var::vbar, i)];
        }
        for (int i = 0; i < l.count(Var::z); ++i)
            if (e[l.index(Var::z, i)] != 0)
                throw std::invalid_argument("symmetrize: input depends on z");
        if (l.count(Var::t) > 0) f[heis.index(Var::t, 0)] = e[l.index(Var::t, 0)];
        out.add_term(std::move(f), c);
    }
    return out;
}

MemoCache<std::pair<std::string, int>, EquivariantOperator>& mm_cache() {
    static MemoCache<std::pair<std::string, int>, EquivariantOperator> cache;
    return cache;
}

MemoCache<std::pair<std::string, int>, DiffOp>& um_cache() {
    static MemoCache<std::pair<std::string, int>, DiffOp> cache;
    return cache;
}

}  // namespace

EquivariantOperator build_Mm(const PairDescriptor& pair, int m) {
    if (m < 1 || m > 3) throw std::invalid_argument("build_Mm: unsupported m");
    return mm_cache().get_or_compute({pair.id(), m}, [&]() -> EquivariantOperator {
        SubspaceBasis vm = Vm_basis(pair, m);
        const VarLayout heis = heisenberg_layout(pair.kappa);
        EquivariantOperator op;
        op.m = m;
        op.basis_tag = vm.label;
        for (const MultiPoly& aj : vm.vectors) {
            op.norms.push_back(fischer_inner(aj, aj).re);
            op.components.push_back(symmetrize(pair, restrict_to_heisenberg(aj, heis)));
        }
        return op;
    });
}

DiffOp build_Um(const PairDescriptor& pair, int m) {
    if (m < 1 || m > 3) throw std::invalid_argument("build_Um: unsupported m");
    return um_cache().get_or_compute({pair.id(), m}, [&]() -> DiffOp {
        EquivariantOperator mm = build_Mm(pair, m);
        DiffOp um(heisenberg_layout(pair.kappa));
        for (std::size_t j = 0; j < mm.components.size(); ++j) {
            DiffOp term = compose(formal_adjoint(mm.components[j]), mm.components[j]);
            um += term * Scalar(Rat(2) / mm.norms[j]);
        }
        if (formal_adjoint(um) != um) throw std::logic_error("build_Um: result not self-adjoint");
        return um;
    });
}

void clear_nilgroup_caches() {
    vf_cache().clear();
    mm_cache().clear();
    um_cache().clear();
}

}  // namespace ngp
