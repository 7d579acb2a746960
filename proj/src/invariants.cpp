#include "ngp/invariants.hpp"

#include "ngp/memo.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace ngp {

namespace {

using PolyMat = std::vector<std::vector<MultiPoly>>;

PolyMat poly_mat_mul(const PolyMat& a, const PolyMat& b) {
    const std::size_t n = a.size();
    PolyMat c(n, std::vector<MultiPoly>(n, MultiPoly(a[0][0].layout())));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

MultiPoly poly_mat_trace(const PolyMat& a) {
    MultiPoly t(a[0][0].layout());
    for (std::size_t i = 0; i < a.size(); ++i) t += a[i][i];
    return t;
}

MemoCache<std::string, InvariantCatalogue>& catalogue_cache() {
    static MemoCache<std::string, InvariantCatalogue> cache;
    return cache;
}

struct AlphaKey {
    std::string pair;
    Exp alpha;
    auto operator<=>(const AlphaKey&) const = default;
};

MemoCache<AlphaKey, MultiPoly>& ptilde_cache() {
    static MemoCache<AlphaKey, MultiPoly> cache;
    return cache;
}

MemoCache<std::pair<std::string, int>, SubspaceBasis>& vm_cache() {
    static MemoCache<std::pair<std::string, int>, SubspaceBasis> cache;
    return cache;
}

std::string exp_str(const Exp& e) {
    std::string s = "(";
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(e[i]);
    }
    return s + ")";
}

}  // namespace

std::string CanonicalBasisElement::label() const {
    std::string s = "p~" + exp_str(alpha) + " q" + exp_str(beta) + " r" + exp_str(gamma);
    if (t_power) s += " t^" + std::to_string(t_power);
    return s;
}

const InvariantCatalogue& fundamental_invariants(const PairDescriptor& pair) {
    return catalogue_cache().get_or_compute(pair.id(), [&]() -> InvariantCatalogue {
        InvariantCatalogue cat;
        const VarLayout& l = pair.layout;
        const Scalar I = Scalar::I();

        if (pair.line == 6) {
            const int n = pair.n;
            // iz = sum_j z_j H_j as a matrix of z-linear polynomials
            PolyMat iz(n, std::vector<MultiPoly>(n, MultiPoly(l)));
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int j = 0; j < pair.nu1; ++j) {
                        Scalar h = pair.z_basis_h[j](a, b);
                        if (h.is_zero()) continue;
                        Exp e(l.total(), 0);
                        e[l.index(Var::z, j)] = 1;
                        iz[a][b] += MultiPoly::monomial(l, std::move(e), h);
                    }
            PolyMat power = iz;
            for (int k = 1; k <= n; ++k) {
                if (k >= 2) {
                    cat.q_list.push_back(poly_mat_trace(power));
                    cat.q_names.push_back("q" + std::to_string(k));
                }
                if (k <= n - 1) {
                    // p_k = v^* (iz)^k v
                    MultiPoly pk(l);
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b) {
                            if (power[a][b].is_zero()) continue;
                            MultiPoly vv = MultiPoly::variable(l, Var::vbar, a) *
                                           MultiPoly::variable(l, Var::v, b);
                            pk += vv * power[a][b];
                        }
                    cat.p_list.push_back(std::move(pk));
                    cat.p_names.push_back("p" + std::to_string(k));
                }
                if (k < n) power = poly_mat_mul(power, iz);
            }
            cat.r_list = v_only_invariants(pair);
            cat.r_names = {"r1"};
        } else {
            cat.r_list = v_only_invariants(pair);
            cat.r_names = {"r1", "r2"};
            // q1 = tr(z z^*) = sum_j gram_j z_j^2
            MultiPoly q1(l);
            for (int j = 0; j < pair.nu1; ++j) {
                Exp e(l.total(), 0);
                e[l.index(Var::z, j)] = 2;
                q1.add_term(std::move(e), Scalar(pair.z_gram[j]));
            }
            cat.q_list.push_back(std::move(q1));
            cat.q_names = {"q1"};
            // p1 = i tr(v^* z v) = sum_j z_j tr(v^* H_j v) with v a 2 x n matrix
            const int n = pair.n;
            MultiPoly p1(l);
            for (int j = 0; j < pair.nu1; ++j) {
                MultiPoly lj(l);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        Scalar h = pair.z_basis_h[j](a, b);
                        if (h.is_zero()) continue;
                        for (int c = 0; c < n; ++c) {
                            Exp e(l.total(), 0);
                            e[l.index(Var::vbar, a * n + c)] = 1;
                            e[l.index(Var::v, b * n + c)] = 1;
                            lj.add_term(std::move(e), h);
                        }
                    }
                p1 += lj.mul_var(l.index(Var::z, j));
            }
            cat.p_list.push_back(std::move(p1));
            cat.p_names = {"p1"};
        }

        auto fill_degrees = [&](const std::vector<MultiPoly>& ps, std::vector<Multidegree>& ds) {
            for (const MultiPoly& p : ps) {
                auto d = p.multidegree();
                if (!d) throw std::logic_error("fundamental_invariants: inhomogeneous entry");
                ds.push_back(*d);
            }
        };
        fill_degrees(cat.r_list, cat.r_deg);
        fill_degrees(cat.q_list, cat.q_deg);
        fill_degrees(cat.p_list, cat.p_deg);

        for (const auto* list : {&cat.r_list, &cat.q_list, &cat.p_list})
            for (const MultiPoly& p : *list)
                if (!is_invariant(pair, p))
                    throw std::logic_error("fundamental_invariants: entry fails invariance");
        return cat;
    });
}

MultiPoly ptilde(const PairDescriptor& pair, const Exp& alpha) {
    const InvariantCatalogue& cat = fundamental_invariants(pair);
    if (alpha.size() != cat.p_list.size())
        throw std::invalid_argument("ptilde: alpha length mismatch");
    AlphaKey key{pair.id(), alpha};
    return ptilde_cache().get_or_compute(key, [&]() -> MultiPoly {
        MultiPoly pa = MultiPoly::constant(pair.layout, Scalar(1));
        int m = 0;
        for (std::size_t i = 0; i < alpha.size(); ++i)
            for (int e = 0; e < alpha[i]; ++e) {
                pa = pa * cat.p_list[i];
                ++m;
            }
        return harmonic_projection(pair, pa, m);
    });
}

std::vector<CanonicalBasisElement> canonical_basis(const PairDescriptor& pair, const Multidegree& d) {
    const InvariantCatalogue& cat = fundamental_invariants(pair);
    if (d[Var::v] != d[Var::vbar]) return {};
    const int m = d[Var::v];
    const int k = d[Var::z];
    std::vector<CanonicalBasisElement> out;

    const std::size_t np = cat.p_list.size();
    const std::size_t nq = cat.q_list.size();
    const std::size_t nr = cat.r_list.size();

    Exp alpha(np, 0), beta(nq, 0), gamma(nr, 0);
    std::function<void(std::size_t, int, int)> enum_gamma = [&](std::size_t i, int vleft, int zleft) {
        if (i == nr) {
            if (vleft == 0 && zleft == 0) {
                CanonicalBasisElement el;
                el.alpha = alpha;
                el.beta = beta;
                el.gamma = gamma;
                el.t_power = d[Var::t];
                int br = 0;
                for (std::size_t x = 0; x < np; ++x) br += alpha[x] * cat.p_deg[x][Var::z];
                el.bracket_degree = br;
                MultiPoly poly = ptilde(pair, alpha);
                for (std::size_t x = 0; x < nq; ++x)
                    for (int e = 0; e < beta[x]; ++e) poly = poly * cat.q_list[x];
                for (std::size_t x = 0; x < nr; ++x)
                    for (int e = 0; e < gamma[x]; ++e) poly = poly * cat.r_list[x];
                if (el.t_power) poly = poly.mul_var(pair.layout.index(Var::t, 0), el.t_power);
                el.poly = std::move(poly);
                if (el.poly.is_zero())
                    throw std::logic_error("canonical_basis: vanishing basis element");
                out.push_back(std::move(el));
            }
            return;
        }
        int dv = cat.r_deg[i][Var::v];
        for (int e = 0; e * dv <= vleft; ++e) {
            gamma[i] = e;
            enum_gamma(i + 1, vleft - e * dv, zleft);
        }
        gamma[i] = 0;
    };
    std::function<void(std::size_t, int, int)> enum_beta = [&](std::size_t i, int vleft, int zleft) {
        if (i == nq) {
            if (zleft == 0) enum_gamma(0, vleft, 0);
            return;
        }
        int dz = cat.q_deg[i][Var::z];
        for (int e = 0; e * dz <= zleft; ++e) {
            beta[i] = e;
            enum_beta(i + 1, vleft, zleft - e * dz);
        }
        beta[i] = 0;
    };
    std::function<void(std::size_t, int, int)> enum_alpha = [&](std::size_t i, int vleft, int zleft) {
        if (i == np) {
            enum_beta(0, vleft, zleft);
            return;
        }
        int dv = cat.p_deg[i][Var::v];
        int dz = cat.p_deg[i][Var::z];
        for (int e = 0; e * dv <= vleft && e * dz <= zleft; ++e) {
            alpha[i] = e;
            enum_alpha(i + 1, vleft - e * dv, zleft - e * dz);
        }
        alpha[i] = 0;
    };
    enum_alpha(0, m, k);
    return out;
}

std::vector<DecompositionTerm> decompose_invariant(const PairDescriptor& pair, const MultiPoly& G,
                                                   int degree_cap, bool reversed_order) {
    if (G.layout() != pair.layout)
        throw std::invalid_argument("decompose_invariant: wrong variable layout");
    if (!is_invariant(pair, G)) throw std::invalid_argument("decompose_invariant: input is not K-invariant");
    for (const auto& [e, c] : G.terms()) {
        Multidegree d = MultiPoly::multidegree_of(pair.layout, e);
        if (d[Var::v] + d[Var::vbar] + d[Var::z] > degree_cap)
            throw std::invalid_argument("decompose_invariant: degree bound exceeded");
    }

    // Solve in each graded component separately.
    std::map<std::pair<Exp, Exp>, std::map<Exp, MultiPoly>> collected;  // (alpha,beta) -> gamma -> t-poly
    for (const auto& [d, comp] : G.graded_components()) {
        std::vector<CanonicalBasisElement> basis = canonical_basis(pair, d);
        if (reversed_order) std::reverse(basis.begin(), basis.end());
        if (basis.empty()) throw std::logic_error("decompose_invariant: empty basis for a nonzero component");

        std::map<Exp, int> row_of;
        auto row = [&](const Exp& e) {
            auto [it, fresh] = row_of.emplace(e, static_cast<int>(row_of.size()));
            return it->second;
        };
        for (const auto& el : basis)
            for (const auto& [e, c] : el.poly.terms()) row(e);
        for (const auto& [e, c] : comp.terms()) row(e);

        Mat A = Mat::Zero(static_cast<Eigen::Index>(row_of.size()),
                          static_cast<Eigen::Index>(basis.size()));
        Vec b = Vec::Zero(static_cast<Eigen::Index>(row_of.size()));
        for (std::size_t j = 0; j < basis.size(); ++j)
            for (const auto& [e, c] : basis[j].poly.terms())
                A(row(e), static_cast<Eigen::Index>(j)) = c;
        for (const auto& [e, c] : comp.terms()) b(row(e)) = c;
        auto x = solve(A, b);
        if (!x) throw std::logic_error("decompose_invariant: component not in canonical span");

        for (std::size_t j = 0; j < basis.size(); ++j) {
            if ((*x)(static_cast<Eigen::Index>(j)).is_zero()) continue;
            Exp te(pair.layout.total(), 0);
            te[pair.layout.index(Var::t, 0)] = basis[j].t_power;
            MultiPoly tmono = MultiPoly::monomial(pair.layout, te, (*x)(static_cast<Eigen::Index>(j)));
            auto& gmap = collected[{basis[j].alpha, basis[j].beta}];
            auto it = gmap.find(basis[j].gamma);
            if (it == gmap.end()) it = gmap.emplace(basis[j].gamma, MultiPoly(pair.layout)).first;
            it->second += tmono;
        }
    }

    std::vector<DecompositionTerm> terms;
    for (auto& [ab, gmap] : collected)
        for (auto& [gamma, coeff] : gmap) {
            if (coeff.is_zero()) continue;
            DecompositionTerm t;
            t.alpha = ab.first;
            t.beta = ab.second;
            t.gamma = gamma;
            t.coeff = std::move(coeff);
            terms.push_back(std::move(t));
        }
    return terms;
}

MultiPoly reconstruct_decomposition(const PairDescriptor& pair,
                                    const std::vector<DecompositionTerm>& terms) {
    const InvariantCatalogue& cat = fundamental_invariants(pair);
    MultiPoly out(pair.layout);
    for (const DecompositionTerm& t : terms) {
        MultiPoly p = ptilde(pair, t.alpha);
        for (std::size_t x = 0; x < cat.q_list.size(); ++x)
            for (int e = 0; e < t.beta[x]; ++e) p = p * cat.q_list[x];
        for (std::size_t x = 0; x < cat.r_list.size(); ++x)
            for (int e = 0; e < t.gamma[x]; ++e) p = p * cat.r_list[x];
        out += p * t.coeff;
    }
    return out;
}

std::vector<HadamardTerm> hadamard_split(const PairDescriptor& pair, const MultiPoly& G, int k) {
    for (const auto& [e, c] : G.terms()) {
        Multidegree d = MultiPoly::multidegree_of(pair.layout, e);
        if (d[Var::z] != k || d[Var::t] != 0)
            throw std::invalid_argument("hadamard_split: input not z-homogeneous of degree k");
    }
    std::vector<DecompositionTerm> dec = decompose_invariant(pair, G);
    std::map<std::pair<Exp, Exp>, HadamardTerm> grouped;
    for (const DecompositionTerm& t : dec) {
        auto key = std::make_pair(t.alpha, t.beta);
        auto it = grouped.find(key);
        if (it == grouped.end()) {
            HadamardTerm h;
            h.alpha = t.alpha;
            h.beta = t.beta;
            it = grouped.emplace(key, std::move(h)).first;
        }
        // t-free by the precondition, so the coefficient is a single scalar
        Scalar c = t.coeff.coeff(Exp(pair.layout.total(), 0));
        it->second.g[t.gamma] = c;
    }
    std::vector<HadamardTerm> out;
    for (auto& [key, h] : grouped) out.push_back(std::move(h));
    return out;
}

std::vector<MultiPoly> ell_coefficients(const PairDescriptor& pair) {
    const InvariantCatalogue& cat = fundamental_invariants(pair);
    std::vector<MultiPoly> ell;
    for (int j = 0; j < pair.nu1; ++j)
        ell.push_back(cat.p_list[0].derivative(pair.layout.index(Var::z, j)));
    return ell;
}

SubspaceBasis Vm_basis(const PairDescriptor& pair, int m) {
    if (m < 1) throw std::invalid_argument("Vm_basis: degenerate m");
    return vm_cache().get_or_compute({pair.id(), m}, [&]() -> SubspaceBasis {
        std::vector<MultiPoly> ell = ell_coefficients(pair);
        // degree-m monomials in the ell_j
        std::vector<MultiPoly> products;
        for (const Exp& e : exponents_of_degree(pair.nu1, m)) {
            MultiPoly p = MultiPoly::constant(pair.layout, Scalar(1));
            for (int j = 0; j < pair.nu1; ++j)
                for (int x = 0; x < e[j]; ++x) p = p * ell[j];
            products.push_back(std::move(p));
        }

        // coordinates over the (m,m) monomials
        std::map<Exp, int> row_of;
        for (const MultiPoly& p : products)
            for (const auto& [e, c] : p.terms()) row_of.emplace(e, static_cast<int>(row_of.size()));
        Mat cols = Mat::Zero(static_cast<Eigen::Index>(row_of.size()),
                             static_cast<Eigen::Index>(products.size()));
        for (std::size_t j = 0; j < products.size(); ++j)
            for (const auto& [e, c] : products[j].terms())
                cols(row_of.at(e), static_cast<Eigen::Index>(j)) = c;
        std::vector<int> keep = greedy_independent_columns(cols);
        std::vector<MultiPoly> span;
        for (int j : keep) span.push_back(products[j]);

        // intersect with the harmonic subspace: kernel of the non-harmonic parts
        std::vector<MultiPoly> nonharm;
        for (const MultiPoly& s : span) nonharm.push_back(s - harmonic_projection(pair, s, m));
        std::map<Exp, int> nrow;
        for (const MultiPoly& p : nonharm)
            for (const auto& [e, c] : p.terms()) nrow.emplace(e, static_cast<int>(nrow.size()));
        Mat N = Mat::Zero(std::max<Eigen::Index>(1, static_cast<Eigen::Index>(nrow.size())),
                          static_cast<Eigen::Index>(span.size()));
        for (std::size_t j = 0; j < nonharm.size(); ++j)
            for (const auto& [e, c] : nonharm[j].terms())
                N(nrow.at(e), static_cast<Eigen::Index>(j)) = c;
        Mat K = kernel_basis(std::move(N));

        std::vector<MultiPoly> vm;
        for (Eigen::Index col = 0; col < K.cols(); ++col) {
            MultiPoly v(pair.layout);
            for (std::size_t j = 0; j < span.size(); ++j) {
                const Scalar& c = K(static_cast<Eigen::Index>(j), col);
                if (!c.is_zero()) v += span[j] * c;
            }
            vm.push_back(std::move(v));
        }

        // exact Gram-Schmidt without normalization (norms stay rational)
        std::vector<MultiPoly> ortho;
        for (MultiPoly v : vm) {
            for (const MultiPoly& u : ortho) {
                Scalar proj = fischer_inner(v, u) / fischer_inner(u, u);
                if (!proj.is_zero()) v -= u * proj;
            }
            if (v.is_zero()) throw std::logic_error("Vm_basis: dependent vector in Gram-Schmidt");
            ortho.push_back(std::move(v));
        }

        SubspaceBasis sb;
        sb.space = Multidegree(m, m, 0);
        sb.label = "V_" + std::to_string(m);
        sb.vectors = std::move(ortho);
        return sb;
    });
}

MultiPoly fischer_inner_v(const MultiPoly& P, const MultiPoly& a) {
    const VarLayout& l = P.layout();
    // slice P by the z/t part, pair each v-slice with a
    std::map<Exp, MultiPoly> slices;
    for (const auto& [e, c] : P.terms()) {
        Exp zt = e;
        Exp vpart(l.total(), 0);
        for (int i = 0; i < l.count(Var::v); ++i) {
            vpart[l.index(Var::v, i)] = e[l.index(Var::v, i)];
            vpart[l.index(Var::vbar, i)] = e[l.index(Var::vbar, i)];
            zt[l.index(Var::v, i)] = 0;
            zt[l.index(Var::vbar, i)] = 0;
        }
        auto it = slices.find(zt);
        if (it == slices.end()) it = slices.emplace(zt, MultiPoly(l)).first;
        it->second.add_term(std::move(vpart), c);
    }
    MultiPoly out(l);
    for (const auto& [zt, vp] : slices) {
        Scalar c = fischer_inner(vp, a);
        if (!c.is_zero()) out.add_term(zt, c);
    }
    return out;
}

EquivariantComponents equivariant_components(const PairDescriptor& pair, const Exp& alpha) {
    int m = 0;
    for (int e : alpha) m += e;
    if (m == 0) throw std::invalid_argument("equivariant_components: degenerate alpha");
    if (m > 3) throw std::invalid_argument("equivariant_components: |alpha| exceeds supported cap");
    EquivariantComponents ec;
    ec.m = m;
    SubspaceBasis vm = Vm_basis(pair, m);
    ec.a = vm.vectors;
    ec.ptilde_alpha = ptilde(pair, alpha);
    for (const MultiPoly& aj : ec.a) {
        Scalar n = fischer_inner(aj, aj);
        ec.norms.push_back(n.re);
        ec.b.push_back(fischer_inner_v(ec.ptilde_alpha, aj) * (Scalar(1) / n));
    }
    return ec;
}

void clear_invariant_caches() {
    catalogue_cache().clear();
    ptilde_cache().clear();
    vm_cache().clear();
}

}  // namespace ngp
