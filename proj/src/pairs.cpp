#include "ngp/pairs.hpp"

#include "ngp/memo.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

namespace ngp {

namespace {

Mat zero_mat(int r, int c) { return Mat::Zero(r, c); }

Mat unit_mat(int n, int r, int c, Scalar v) {
    Mat m = Mat::Zero(n, n);
    m(r, c) = v;
    return m;
}

Scalar tr(const Mat& m) {
    Scalar s(0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) s += m(i, i);
    return s;
}

// Hermitian basis of traceless matrices in Gell-Mann ordering, unnormalized:
// for n=2 exactly the Pauli matrices; the final diagonal one is
// diag(1,...,1,-(n-1))-type with squared trace norm 2k(k+1)/... kept rational.
std::vector<Mat> hermitian_su_basis(int n) {
    std::vector<Mat> h;
    const Scalar I = Scalar::I();
    for (int k = 1; k < n; ++k) {
        for (int j = 0; j < k; ++j) {
            Mat s = Mat::Zero(n, n);
            s(j, k) = Scalar(1);
            s(k, j) = Scalar(1);
            h.push_back(s);
            Mat a = Mat::Zero(n, n);
            a(j, k) = -I;
            a(k, j) = I;
            h.push_back(a);
        }
        Mat d = Mat::Zero(n, n);
        for (int j = 0; j < k; ++j) d(j, j) = Scalar(1);
        d(k, k) = Scalar(-k);
        h.push_back(d);
    }
    return h;
}

// Decomposes the anti-hermitian matrix M over the basis b_j = -i H_j using the
// trace form; coefficients must come out real rational.
Vec z_coordinates(const std::vector<Mat>& hbasis, const std::vector<Rat>& gram, const Mat& m) {
    Vec c(static_cast<Eigen::Index>(hbasis.size()));
    const Scalar I = Scalar::I();
    Mat residual = m;
    for (std::size_t j = 0; j < hbasis.size(); ++j) {
        // <M, b_j> / <b_j, b_j> with <Y,W> = tr(Y W^*);  b_j^* = i H_j.
        Scalar num = tr(m * (I * hbasis[j]));
        Scalar coeff = num / Scalar(gram[j]);
        if (!coeff.is_real()) throw std::logic_error("z_coordinates: non-real coefficient");
        c(static_cast<Eigen::Index>(j)) = coeff;
        residual -= coeff * (Scalar(0) - I) * hbasis[j];
    }
    if (!is_zero_matrix(residual)) throw std::logic_error("z_coordinates: residual after decomposition");
    return c;
}

// Adjoint action matrix on z-coordinates: column j holds the coordinates of
// [A, b_j].
Mat adjoint_on_z(const std::vector<Mat>& hbasis, const std::vector<Rat>& gram, const Mat& A) {
    const int nu = static_cast<int>(hbasis.size());
    Mat xz = Mat::Zero(nu, nu);
    const Scalar I = Scalar::I();
    for (int j = 0; j < nu; ++j) {
        Mat bj = (Scalar(0) - I) * hbasis[j];
        Mat br = A * bj - bj * A;
        Vec c = z_coordinates(hbasis, gram, br);
        for (int i = 0; i < nu; ++i) xz(i, j) = c(i);
    }
    return xz;
}

// Complex weight coordinates on sl_n: off-diagonal entries E_{jk} first
// (row-major, j != k), then partial-sum coordinates for the H_i = E_ii - E_{i+1,i+1}.
Mat weight_coordinates_of_z(const std::vector<Mat>& hbasis, int n) {
    const int nu = static_cast<int>(hbasis.size());
    Mat w = Mat::Zero(nu, nu);
    const Scalar I = Scalar::I();
    int row = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            for (int l = 0; l < nu; ++l) w(row, l) = ((Scalar(0) - I) * hbasis[l])(j, k);
            ++row;
        }
    for (int i = 0; i + 1 < n; ++i) {
        for (int l = 0; l < nu; ++l) {
            Scalar part(0);
            for (int d = 0; d <= i; ++d) part += ((Scalar(0) - I) * hbasis[l])(d, d);
            w(row, l) = part;
        }
        ++row;
    }
    return w;
}

struct InternalGenerator {
    Mat Xv;
    Mat Xw;  // action on the complex weight coordinates
    bool torus;
};

MemoCache<std::string, std::vector<InternalGenerator>>& weight_gen_cache() {
    static MemoCache<std::string, std::vector<InternalGenerator>> cache;
    return cache;
}

const std::vector<InternalGenerator>& weight_generators(const PairDescriptor& pair) {
    return weight_gen_cache().get_or_compute(pair.id(), [&] {
        std::vector<InternalGenerator> gens;
        for (const auto& g : pair.generators) {
            InternalGenerator ig;
            ig.Xv = g.Xv;
            ig.Xw = pair.w_of_z * g.Xz * pair.z_of_w;
            ig.torus = g.torus;
            if (g.torus) {
                for (Eigen::Index i = 0; i < ig.Xw.rows(); ++i)
                    for (Eigen::Index j = 0; j < ig.Xw.cols(); ++j)
                        if (i != j && !ig.Xw(i, j).is_zero())
                            throw std::logic_error("weight_generators: torus not diagonal on w");
            }
            gens.push_back(std::move(ig));
        }
        return gens;
    });
}

}  // namespace

std::string PairDescriptor::id() const {
    std::ostringstream os;
    os << "L" << line << ":n=" << n;
    return os.str();
}

std::vector<Rat> PairDescriptor::fischer_weights() const {
    std::vector<Rat> w(layout.total(), Rat(1));
    for (int i = 0; i < nu1; ++i) w[layout.index(Var::z, i)] = Rat(1) / z_gram[i];
    return w;
}

std::vector<std::string> supported_pair_ids() {
    return {"L6:n=2", "L6:n=3", "L8:n=2", "L8:n=3"};
}

PairDescriptor make_pair(int line, int n) {
    if (!((line == 6 || line == 8) && (n == 2 || n == 3)))
        throw std::invalid_argument("make_pair: unsupported (line,n)");
    PairDescriptor p;
    p.line = line;
    p.n = n;
    const Scalar I = Scalar::I();

    if (line == 6) {
        p.kappa = n;
        p.nu1 = n * n - 1;
        p.d0 = 2;
        p.z_basis_h = hermitian_su_basis(n);
        for (const Mat& h : p.z_basis_h) {
            Scalar g = tr(h * h);
            p.z_gram.push_back(g.re);
        }
        // u_n generators: torus iE_jj, then rotation pairs.
        for (int j = 0; j < n; ++j) {
            LieGenerator g;
            g.name = "iE" + std::to_string(j + 1) + std::to_string(j + 1);
            g.Xv = unit_mat(n, j, j, I);
            g.Xz = adjoint_on_z(p.z_basis_h, p.z_gram, g.Xv);
            g.torus = true;
            p.generators.push_back(std::move(g));
        }
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                LieGenerator a;
                a.name = "E" + std::to_string(j + 1) + std::to_string(k + 1) + "-E" +
                         std::to_string(k + 1) + std::to_string(j + 1);
                a.Xv = unit_mat(n, j, k, Scalar(1)) + unit_mat(n, k, j, Scalar(-1));
                a.Xz = adjoint_on_z(p.z_basis_h, p.z_gram, a.Xv);
                p.generators.push_back(std::move(a));
                LieGenerator b;
                b.name = "i(E" + std::to_string(j + 1) + std::to_string(k + 1) + "+E" +
                         std::to_string(k + 1) + std::to_string(j + 1) + ")";
                b.Xv = unit_mat(n, j, k, I) + unit_mat(n, k, j, I);
                b.Xz = adjoint_on_z(p.z_basis_h, p.z_gram, b.Xv);
                p.generators.push_back(std::move(b));
            }
        p.w_of_z = weight_coordinates_of_z(p.z_basis_h, n);
    } else {
        // line 8: K = U_2 x SU_n on C^2 (x) C^n, z_0 = su_2.
        p.kappa = 2 * n;
        p.nu1 = 3;
        p.d0 = 3;
        p.z_basis_h = hermitian_su_basis(2);
        for (const Mat& h : p.z_basis_h) p.z_gram.push_back(tr(h * h).re);

        auto vmat_from_u2 = [&](const Mat& A) {
            Mat xv = Mat::Zero(2 * n, 2 * n);
            for (int j = 0; j < 2; ++j)
                for (int jp = 0; jp < 2; ++jp)
                    for (int l = 0; l < n; ++l) xv(j * n + l, jp * n + l) = A(j, jp);
            return xv;
        };
        auto vmat_from_sun = [&](const Mat& B) {
            Mat xv = Mat::Zero(2 * n, 2 * n);
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < n; ++l)
                    for (int lp = 0; lp < n; ++lp) xv(j * n + l, j * n + lp) = B(l, lp);
            return xv;
        };

        // u_2 factor (acts on z_0 by the adjoint action).
        std::vector<std::pair<std::string, Mat>> u2;
        u2.emplace_back("u2:iE11", unit_mat(2, 0, 0, I));
        u2.emplace_back("u2:iE22", unit_mat(2, 1, 1, I));
        u2.emplace_back("u2:E12-E21", unit_mat(2, 0, 1, Scalar(1)) + unit_mat(2, 1, 0, Scalar(-1)));
        u2.emplace_back("u2:i(E12+E21)", unit_mat(2, 0, 1, I) + unit_mat(2, 1, 0, I));
        for (std::size_t k = 0; k < u2.size(); ++k) {
            LieGenerator g;
            g.name = u2[k].first;
            g.Xv = vmat_from_u2(u2[k].second);
            g.Xz = adjoint_on_z(p.z_basis_h, p.z_gram, u2[k].second);
            g.torus = (k < 2);
            p.generators.push_back(std::move(g));
        }
        // su_n factor (trivial on z_0).
        for (int j = 0; j + 1 < n; ++j) {
            LieGenerator g;
            g.name = "sun:i(E" + std::to_string(j + 1) + std::to_string(j + 1) + "-E" +
                     std::to_string(j + 2) + std::to_string(j + 2) + ")";
            g.Xv = vmat_from_sun(unit_mat(n, j, j, I) + unit_mat(n, j + 1, j + 1, -I));
            g.Xz = zero_mat(3, 3);
            g.torus = true;
            p.generators.push_back(std::move(g));
        }
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                LieGenerator a;
                a.name = "sun:E" + std::to_string(j + 1) + std::to_string(k + 1) + "-E" +
                         std::to_string(k + 1) + std::to_string(j + 1);
                a.Xv = vmat_from_sun(unit_mat(n, j, k, Scalar(1)) + unit_mat(n, k, j, Scalar(-1)));
                a.Xz = zero_mat(3, 3);
                p.generators.push_back(std::move(a));
                LieGenerator b;
                b.name = "sun:i(E" + std::to_string(j + 1) + std::to_string(k + 1) + "+E" +
                         std::to_string(k + 1) + std::to_string(j + 1) + ")";
                b.Xv = vmat_from_sun(unit_mat(n, j, k, I) + unit_mat(n, k, j, I));
                b.Xz = zero_mat(3, 3);
                p.generators.push_back(std::move(b));
            }
        p.w_of_z = weight_coordinates_of_z(p.z_basis_h, 2);
    }

    p.layout = VarLayout::group(p.kappa, p.nu1);
    p.z_of_w = inverse(p.w_of_z);
    return p;
}

PairDescriptor pair_from_id(const std::string& id) {
    for (const std::string& s : supported_pair_ids())
        if (s == id) {
            int line = id[1] - '0';
            int n = id.back() - '0';
            return make_pair(line, n);
        }
    throw std::invalid_argument("pair_from_id: unknown pair id \"" + id + "\"");
}

MultiPoly act(const LieGenerator& X, const MultiPoly& p) {
    const VarLayout& l = p.layout();
    const int kv = l.count(Var::v);
    const int nz = l.count(Var::z);
    MultiPoly out(l);
    // -(Xv v).d_v
    for (int j = 0; j < kv; ++j) {
        MultiPoly dj = p.derivative(l.index(Var::v, j));
        if (dj.is_zero()) continue;
        for (int k = 0; k < kv; ++k) {
            Scalar c = X.Xv(j, k);
            if (c.is_zero()) continue;
            out += (dj * (-c)).mul_var(l.index(Var::v, k));
        }
    }
    // -(conj(Xv) vbar).d_vbar
    for (int j = 0; j < kv; ++j) {
        MultiPoly dj = p.derivative(l.index(Var::vbar, j));
        if (dj.is_zero()) continue;
        for (int k = 0; k < kv; ++k) {
            Scalar c = X.Xv(j, k).conj();
            if (c.is_zero()) continue;
            out += (dj * (-c)).mul_var(l.index(Var::vbar, k));
        }
    }
    // -(Xz z).d_z
    for (int j = 0; j < nz; ++j) {
        MultiPoly dj = p.derivative(l.index(Var::z, j));
        if (dj.is_zero()) continue;
        for (int k = 0; k < nz; ++k) {
            Scalar c = X.Xz(j, k);
            if (c.is_zero()) continue;
            out += (dj * (-c)).mul_var(l.index(Var::z, k));
        }
    }
    return out;
}

bool is_invariant(const PairDescriptor& pair, const MultiPoly& p) {
    for (const auto& g : pair.generators)
        if (!act(g, p).is_zero()) return false;
    return true;
}

namespace {

// Derivation of an internal generator applied to a single monomial in the
// (v, vbar, w) coordinates; emits (exponent, coefficient) pairs.
void apply_internal_generator(const VarLayout& l, const InternalGenerator& g, const Exp& e,
                              std::vector<std::pair<Exp, Scalar>>& out) {
    out.clear();
    const int kv = l.count(Var::v);
    const int nz = l.count(Var::z);
    auto emit = [&](int from, int to, const Scalar& m) {
        Exp f = e;
        Scalar c = Scalar(Rat(-e[from])) * m;
        f[from] -= 1;
        f[to] += 1;
        out.emplace_back(std::move(f), std::move(c));
    };
    for (int j = 0; j < kv; ++j) {
        int vj = l.index(Var::v, j);
        if (e[vj])
            for (int k = 0; k < kv; ++k)
                if (!g.Xv(j, k).is_zero()) emit(vj, l.index(Var::v, k), g.Xv(j, k));
        int bj = l.index(Var::vbar, j);
        if (e[bj])
            for (int k = 0; k < kv; ++k)
                if (!g.Xv(j, k).is_zero()) emit(bj, l.index(Var::vbar, k), g.Xv(j, k).conj());
    }
    for (int j = 0; j < nz; ++j) {
        int zj = l.index(Var::z, j);
        if (e[zj])
            for (int k = 0; k < nz; ++k)
                if (!g.Xw(j, k).is_zero()) emit(zj, l.index(Var::z, k), g.Xw(j, k));
    }
}

struct MultidegreeKey {
    std::string pair;
    std::array<int, kNumBlocks> deg;
    auto operator<=>(const MultidegreeKey&) const = default;
};

MemoCache<MultidegreeKey, SubspaceBasis>& invariant_cache() {
    static MemoCache<MultidegreeKey, SubspaceBasis> cache;
    return cache;
}

}  // namespace

SubspaceBasis invariant_subspace(const PairDescriptor& pair, const Multidegree& d) {
    if (d[Var::xi] != 0) throw std::invalid_argument("invariant_subspace: xi degree unsupported");
    MultidegreeKey key{pair.id(), d.deg};
    return invariant_cache().get_or_compute(key, [&]() -> SubspaceBasis {
        const VarLayout& l = pair.layout;
        const auto& gens = weight_generators(pair);

        // Monomials of the requested multidegree, in (v, vbar, w) coordinates.
        std::vector<Exp> vex = exponents_of_degree(pair.kappa, d[Var::v]);
        std::vector<Exp> bex = exponents_of_degree(pair.kappa, d[Var::vbar]);
        std::vector<Exp> zex = exponents_of_degree(pair.nu1, d[Var::z]);
        std::vector<Exp> monos;
        for (const Exp& a : vex)
            for (const Exp& b : bex)
                for (const Exp& c : zex) {
                    Exp e(l.total(), 0);
                    for (int i = 0; i < pair.kappa; ++i) e[l.index(Var::v, i)] = a[i];
                    for (int i = 0; i < pair.kappa; ++i) e[l.index(Var::vbar, i)] = b[i];
                    for (int i = 0; i < pair.nu1; ++i) e[l.index(Var::z, i)] = c[i];
                    monos.push_back(std::move(e));
                }

        // Keep only torus-weight-zero monomials: the torus generators act
        // diagonally in these coordinates, so their joint kernel is exact.
        std::vector<Exp> filtered;
        for (const Exp& e : monos) {
            bool zero_weight = true;
            for (const auto& g : gens) {
                if (!g.torus) continue;
                Scalar w(0);
                for (int j = 0; j < pair.kappa; ++j) {
                    w += Scalar(Rat(-e[l.index(Var::v, j)])) * g.Xv(j, j);
                    w += Scalar(Rat(-e[l.index(Var::vbar, j)])) * g.Xv(j, j).conj();
                }
                for (int j = 0; j < pair.nu1; ++j)
                    w += Scalar(Rat(-e[l.index(Var::z, j)])) * g.Xw(j, j);
                if (!w.is_zero()) { zero_weight = false; break; }
            }
            if (zero_weight) filtered.push_back(e);
        }

        SubspaceBasis basis;
        basis.space = d;
        if (filtered.empty()) return basis;

        // Stack the non-torus generator actions and take the joint kernel.
        std::map<Exp, int> row_of;
        std::vector<std::vector<std::pair<int, Scalar>>> cols(filtered.size());
        std::vector<std::pair<Exp, Scalar>> buf;
        int nrows = 0;
        int gen_index = 0;
        for (const auto& g : gens) {
            if (g.torus) { ++gen_index; continue; }
            for (std::size_t c = 0; c < filtered.size(); ++c) {
                apply_internal_generator(l, g, filtered[c], buf);
                std::map<Exp, Scalar> acc;
                for (auto& [e, s] : buf) {
                    auto [it, fresh] = acc.emplace(std::move(e), s);
                    if (!fresh) it->second += s;
                }
                for (auto& [e, s] : acc) {
                    if (s.is_zero()) continue;
                    Exp tagged = e;
                    tagged.push_back(gen_index);  // rows are per-generator
                    auto [it, fresh] = row_of.emplace(std::move(tagged), nrows);
                    if (fresh) ++nrows;
                    cols[c].emplace_back(it->second, s);
                }
            }
            ++gen_index;
        }

        Mat A = Mat::Zero(nrows, static_cast<Eigen::Index>(filtered.size()));
        for (std::size_t c = 0; c < filtered.size(); ++c)
            for (auto& [r, s] : cols[c]) A(r, static_cast<Eigen::Index>(c)) = s;
        Mat K = kernel_basis(std::move(A));

        for (Eigen::Index col = 0; col < K.cols(); ++col) {
            MultiPoly w(l);
            for (std::size_t i = 0; i < filtered.size(); ++i)
                if (!K(static_cast<Eigen::Index>(i), col).is_zero())
                    w.add_term(filtered[i], K(static_cast<Eigen::Index>(i), col));
            // Back to real z coordinates, then attach the t power.
            MultiPoly zpoly = d[Var::z] > 0 ? w.substitute_block_linear(Var::z, pair.w_of_z) : w;
            if (d[Var::t] > 0) zpoly = zpoly.mul_var(l.index(Var::t, 0), d[Var::t]);
            basis.vectors.push_back(std::move(zpoly));
        }

        for (const MultiPoly& v : basis.vectors)
            if (!is_invariant(pair, v))
                throw std::logic_error("invariant_subspace: candidate fails full generator check");
        return basis;
    });
}

std::vector<MultiPoly> v_only_invariants(const PairDescriptor& pair) {
    const VarLayout& l = pair.layout;
    std::vector<MultiPoly> r;
    // r_1 = |v|^2 on both lines.
    MultiPoly r1(l);
    for (int j = 0; j < pair.kappa; ++j) {
        Exp e(l.total(), 0);
        e[l.index(Var::v, j)] = 1;
        e[l.index(Var::vbar, j)] = 1;
        r1.add_term(std::move(e), Scalar(1));
    }
    r.push_back(std::move(r1));
    if (pair.line == 8) {
        // r_2 = tr((vv*)^2) with (vv*)_{jk} = sum_l v_{jl} vbar_{kl}.
        const int n = pair.n;
        auto entry = [&](int j, int k) {
            MultiPoly e(l);
            for (int a = 0; a < n; ++a) {
                Exp ex(l.total(), 0);
                ex[l.index(Var::v, j * n + a)] += 1;
                ex[l.index(Var::vbar, k * n + a)] += 1;
                e.add_term(std::move(ex), Scalar(1));
            }
            return e;
        };
        MultiPoly r2(l);
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) r2 += entry(j, k) * entry(k, j);
        r.push_back(std::move(r2));
    }
    return r;
}

namespace {

// Coordinates of a v-bidegree-(m,m) polynomial over the (m,m) monomial basis.
struct BidegreeSpace {
    VarLayout layout;
    std::vector<Exp> monos;       // exponents (full layout, z/t zero)
    std::map<Exp, int> index;     // restricted to the v/vbar part
    std::vector<Rat> factorials;  // Fischer weight per monomial

    Exp key_of(const Exp& full) const {
        Exp k(layout.count(Var::v) * 2);
        for (int i = 0; i < layout.count(Var::v); ++i) {
            k[i] = full[layout.index(Var::v, i)];
            k[layout.count(Var::v) + i] = full[layout.index(Var::vbar, i)];
        }
        return k;
    }
};

BidegreeSpace bidegree_space(const PairDescriptor& pair, int m) {
    BidegreeSpace sp;
    sp.layout = pair.layout;
    std::vector<Exp> vex = exponents_of_degree(pair.kappa, m);
    for (const Exp& a : vex)
        for (const Exp& b : vex) {
            Exp e(sp.layout.total(), 0);
            for (int i = 0; i < pair.kappa; ++i) e[sp.layout.index(Var::v, i)] = a[i];
            for (int i = 0; i < pair.kappa; ++i) e[sp.layout.index(Var::vbar, i)] = b[i];
            Rat f(1);
            for (int x : e) f *= Rat(factorial(x));
            sp.index.emplace(sp.key_of(e), static_cast<int>(sp.monos.size()));
            sp.monos.push_back(std::move(e));
            sp.factorials.push_back(std::move(f));
        }
    return sp;
}

// The non-harmonic part sum_{1<=d<=m} r^gamma P^{m-d,m-d} of P^{m,m}(v):
// an independent spanning set (as coordinate columns) plus the inverse Gram.
struct HarmonicComplement {
    BidegreeSpace space;
    Mat u;         // columns: independent spanning vectors
    Mat gram_inv;  // inverse of G(i,j) = <u_j, u_i>
};

MemoCache<std::pair<std::string, int>, HarmonicComplement>& complement_cache() {
    static MemoCache<std::pair<std::string, int>, HarmonicComplement> cache;
    return cache;
}

const HarmonicComplement& harmonic_complement(const PairDescriptor& pair, int m) {
    return complement_cache().get_or_compute({pair.id(), m}, [&]() -> HarmonicComplement {
        HarmonicComplement hc;
        hc.space = bidegree_space(pair, m);
        std::vector<MultiPoly> rs = v_only_invariants(pair);
        std::vector<int> rdeg;
        for (const MultiPoly& r : rs) rdeg.push_back(r.multidegree()->operator[](Var::v));

        // r^gamma monomials with v-degree between 1 and m.
        std::vector<MultiPoly> spanning;
        std::vector<Exp> gammas;
        Exp g(rs.size(), 0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int deg) {
            if (deg > m) return;
            if (i == rs.size()) {
                if (deg >= 1) gammas.push_back(g);
                return;
            }
            for (int e = 0;; ++e) {
                g[i] = e;
                if (deg + e * rdeg[i] > m) break;
                rec(i + 1, deg + e * rdeg[i]);
            }
            g[i] = 0;
        };
        rec(0, 0);
        for (const Exp& gamma : gammas) {
            MultiPoly rg = MultiPoly::constant(pair.layout, Scalar(1));
            int dg = 0;
            for (std::size_t i = 0; i < rs.size(); ++i)
                for (int e = 0; e < gamma[i]; ++e) { rg = rg * rs[i]; dg += rdeg[i]; }
            std::vector<Exp> vex = exponents_of_degree(pair.kappa, m - dg);
            for (const Exp& a : vex)
                for (const Exp& b : vex) {
                    Exp e(pair.layout.total(), 0);
                    for (int i = 0; i < pair.kappa; ++i) e[pair.layout.index(Var::v, i)] = a[i];
                    for (int i = 0; i < pair.kappa; ++i) e[pair.layout.index(Var::vbar, i)] = b[i];
                    spanning.push_back(rg * MultiPoly::monomial(pair.layout, std::move(e), Scalar(1)));
                }
        }

        Mat cols = Mat::Zero(static_cast<Eigen::Index>(hc.space.monos.size()),
                             static_cast<Eigen::Index>(spanning.size()));
        for (std::size_t j = 0; j < spanning.size(); ++j)
            for (const auto& [e, c] : spanning[j].terms())
                cols(hc.space.index.at(hc.space.key_of(e)), static_cast<Eigen::Index>(j)) = c;
        std::vector<int> keep = greedy_independent_columns(cols);
        hc.u = Mat::Zero(cols.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) hc.u.col(static_cast<Eigen::Index>(j)) = cols.col(keep[j]);

        const Eigen::Index nu = hc.u.cols();
        Mat gram = Mat::Zero(nu, nu);
        for (Eigen::Index i = 0; i < nu; ++i)
            for (Eigen::Index j = 0; j < nu; ++j) {
                Scalar s(0);
                for (Eigen::Index r = 0; r < hc.u.rows(); ++r)
                    if (!hc.u(r, j).is_zero() && !hc.u(r, i).is_zero())
                        s += hc.u(r, j) * hc.u(r, i).conj() * Scalar(hc.space.factorials[r]);
                gram(i, j) = s;
            }
        hc.gram_inv = nu > 0 ? inverse(gram) : Mat(0, 0);
        return hc;
    });
}

}  // namespace

MultiPoly harmonic_projection(const PairDescriptor& pair, const MultiPoly& p, int m) {
    if (p.is_zero()) return p;
    const VarLayout& l = pair.layout;
    for (const auto& [e, c] : p.terms()) {
        Multidegree d = MultiPoly::multidegree_of(l, e);
        if (d[Var::v] != m || d[Var::vbar] != m)
            throw std::invalid_argument("harmonic_projection: v-bidegree mismatch");
    }
    if (m == 0) return p;
    const HarmonicComplement& hc = harmonic_complement(pair, m);
    const Eigen::Index nu = hc.u.cols();
    if (nu == 0) return p;

    // Slice by the z/t part and project each v-coefficient.
    std::map<Exp, Vec> slices;
    for (const auto& [e, c] : p.terms()) {
        Exp zt = e;
        for (int i = 0; i < pair.kappa; ++i) {
            zt[l.index(Var::v, i)] = 0;
            zt[l.index(Var::vbar, i)] = 0;
        }
        auto it = slices.find(zt);
        if (it == slices.end())
            it = slices.emplace(zt, Vec::Zero(static_cast<Eigen::Index>(hc.space.monos.size()))).first;
        it->second(hc.space.index.at(hc.space.key_of(e))) += c;
    }

    MultiPoly out(l);
    for (const auto& [zt, h] : slices) {
        Vec rhs(nu);
        for (Eigen::Index i = 0; i < nu; ++i) {
            Scalar s(0);
            for (Eigen::Index r = 0; r < hc.u.rows(); ++r)
                if (!h(r).is_zero() && !hc.u(r, i).is_zero())
                    s += h(r) * hc.u(r, i).conj() * Scalar(hc.space.factorials[r]);
            rhs(i) = s;
        }
        Vec x = hc.gram_inv * rhs;
        Vec proj = h - hc.u * x;
        for (Eigen::Index r = 0; r < proj.size(); ++r) {
            if (proj(r).is_zero()) continue;
            Exp e = zt;
            for (int i = 0; i < l.total(); ++i) e[i] += hc.space.monos[r][i];
            out.add_term(std::move(e), proj(r));
        }
    }
    return out;
}

int harmonic_invariant_dimension(const PairDescriptor& pair, int m, int k) {
    // dim (P^{m,m} (x) P^k)^K = sum_d (#r-monomials of bidegree d) dimH(m-d, k),
    // a direct sum by free generation, so dimH follows by recursion.
    std::vector<MultiPoly> rs = v_only_invariants(pair);
    std::vector<int> rdeg;
    for (const MultiPoly& r : rs) rdeg.push_back(r.multidegree()->operator[](Var::v));
    auto count_r = [&](int d) {
        int cnt = 0;
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
            if (i == rs.size()) {
                if (left == 0) ++cnt;
                return;
            }
            for (int e = 0; e * rdeg[i] <= left; ++e) rec(i + 1, left - e * rdeg[i]);
        };
        rec(0, d);
        return cnt;
    };
    std::vector<int> dimH(m + 1, 0);
    for (int mm = 0; mm <= m; ++mm) {
        int inv = invariant_subspace(pair, Multidegree(mm, mm, k)).dim();
        int lower = 0;
        for (int d = 1; d <= mm; ++d) lower += count_r(d) * dimH[mm - d];
        dimH[mm] = inv - lower;
        if (dimH[mm] < 0) throw std::logic_error("harmonic_invariant_dimension: negative dimension");
    }
    return dimH[m];
}

int hom_dimension(const SubspaceBasis& A, const SubspaceBasis& B, const PairDescriptor& pair) {
    auto action_matrix = [&](const SubspaceBasis& S, const LieGenerator& g) -> Mat {
        // Matrix of act(g, .) on span(S.vectors) in that basis; throws when the
        // span is not stable.
        std::map<Exp, int> row_of;
        for (const MultiPoly& v : S.vectors)
            for (const auto& [e, c] : v.terms())
                row_of.emplace(e, static_cast<int>(row_of.size()));
        auto images = std::vector<MultiPoly>();
        for (const MultiPoly& v : S.vectors) images.push_back(act(g, v));
        for (const MultiPoly& im : images)
            for (const auto& [e, c] : im.terms())
                row_of.emplace(e, static_cast<int>(row_of.size()));
        Mat basis = Mat::Zero(static_cast<Eigen::Index>(row_of.size()),
                              static_cast<Eigen::Index>(S.vectors.size()));
        for (std::size_t j = 0; j < S.vectors.size(); ++j)
            for (const auto& [e, c] : S.vectors[j].terms()) basis(row_of.at(e), static_cast<Eigen::Index>(j)) = c;
        Mat m = Mat::Zero(basis.cols(), basis.cols());
        for (std::size_t j = 0; j < images.size(); ++j) {
            Vec b = Vec::Zero(basis.rows());
            for (const auto& [e, c] : images[j].terms()) b(row_of.at(e)) = c;
            auto x = solve(basis, b);
            if (!x) throw std::invalid_argument("hom_dimension: input basis is not k-stable");
            m.col(static_cast<Eigen::Index>(j)) = *x;
        }
        return m;
    };

    const int da = A.dim();
    const int db = B.dim();
    if (da == 0 || db == 0) return 0;
    std::vector<Mat> stacked;
    for (const auto& g : pair.generators) {
        Mat ma = action_matrix(A, g);
        Mat mb = action_matrix(B, g);
        // Action on conj(A) (x) B: conj(ma) (x) I + I (x) mb.
        Mat t = Mat::Zero(da * db, da * db);
        for (int i = 0; i < da; ++i)
            for (int j = 0; j < da; ++j) {
                Scalar cij = ma(i, j).conj();
                if (cij.is_zero()) continue;
                for (int k = 0; k < db; ++k) t(i * db + k, j * db + k) += cij;
            }
        for (int i = 0; i < db; ++i)
            for (int j = 0; j < db; ++j) {
                if (mb(i, j).is_zero()) continue;
                for (int k = 0; k < da; ++k) t(k * db + i, k * db + j) += mb(i, j);
            }
        stacked.push_back(std::move(t));
    }
    Mat all = Mat::Zero(static_cast<Eigen::Index>(stacked.size()) * da * db, da * db);
    for (std::size_t i = 0; i < stacked.size(); ++i)
        all.middleRows(static_cast<Eigen::Index>(i) * da * db, da * db) = stacked[i];
    return da * db - rank(std::move(all));
}

namespace {

MemoCache<std::pair<std::string, int>, std::vector<SubspaceBasis>>& isotypic_cache() {
    static MemoCache<std::pair<std::string, int>, std::vector<SubspaceBasis>> cache;
    return cache;
}

}  // namespace

std::vector<SubspaceBasis> isotypic_components(const PairDescriptor& pair, int s) {
    if (pair.line != 8) throw std::invalid_argument("isotypic_components: line 8 only");
    if (s > 8) throw std::invalid_argument("isotypic_components: s exceeds supported cap");
    return isotypic_cache().get_or_compute({pair.id(), s}, [&]() -> std::vector<SubspaceBasis> {
    const VarLayout& l = pair.layout;
    const int n = pair.n;
    std::vector<Exp> monos = exponents_of_degree(pair.kappa, s);
    std::map<Exp, int> index;
    for (const Exp& e : monos) index.emplace(e, static_cast<int>(index.size()));
    const Eigen::Index dim = static_cast<Eigen::Index>(monos.size());

    // SU_2-factor Casimir sum_j dsigma(-i sigma_j (x) I_n)^2 with eigenvalue
    // -i(i+2) on the S^i component.
    const Scalar I = Scalar::I();
    std::vector<Mat> su2 = {unit_mat(2, 0, 1, -I) + unit_mat(2, 1, 0, -I),
                            unit_mat(2, 0, 1, Scalar(-1)) + unit_mat(2, 1, 0, Scalar(1)),
                            unit_mat(2, 0, 0, -I) + unit_mat(2, 1, 1, I)};
    auto dsigma = [&](const Mat& A) {
        Mat m = Mat::Zero(dim, dim);
        for (const auto& [e, col] : index) {
            for (int j = 0; j < 2; ++j)
                for (int a = 0; a < n; ++a) {
                    int var = j * n + a;
                    if (!e[var]) continue;
                    for (int k = 0; k < 2; ++k) {
                        Scalar c = A(j, k);
                        if (c.is_zero()) continue;
                        Exp f = e;
                        f[var] -= 1;
                        f[k * n + a] += 1;
                        m(index.at(f), col) += Scalar(Rat(-e[var])) * c;
                    }
                }
        }
        return m;
    };
    Mat cas = Mat::Zero(dim, dim);
    for (const Mat& A : su2) {
        Mat m = dsigma(A);
        cas += m * m;
    }

    std::vector<SubspaceBasis> comps;
    Eigen::Index total = 0;
    for (int i = s; i >= 0; i -= 2) {
        Mat shifted = cas + Scalar(Rat(i * (i + 2))) * Mat::Identity(dim, dim);
        Mat K = kernel_basis(std::move(shifted));
        if (K.cols() == 0) continue;
        SubspaceBasis sb;
        sb.space = Multidegree(s, 0, 0);
        sb.label = "s=" + std::to_string(s) + ",i=" + std::to_string(i);
        for (Eigen::Index col = 0; col < K.cols(); ++col) {
            MultiPoly v(l);
            for (Eigen::Index r = 0; r < dim; ++r) {
                if (K(r, col).is_zero()) continue;
                Exp e(l.total(), 0);
                for (int x = 0; x < pair.kappa; ++x) e[l.index(Var::v, x)] = monos[r][x];
                v.add_term(std::move(e), K(r, col));
            }
            sb.vectors.push_back(std::move(v));
        }
        total += sb.dim();
        comps.push_back(std::move(sb));
    }
    if (total != dim)
        throw std::logic_error("isotypic_components: Casimir eigenvalues not of the expected form");
    return comps;
    });
}

void clear_pair_caches() {
    weight_gen_cache().clear();
    invariant_cache().clear();
    complement_cache().clear();
    isotypic_cache().clear();
}

}  // namespace ngp
