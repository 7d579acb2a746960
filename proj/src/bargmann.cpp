#include "ngp/bargmann.hpp"

#include "ngp/memo.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace ngp {

namespace {

Rat falling(int n, int k) {
    Rat f(1);
    for (int j = 0; j < k; ++j) f *= Rat(n - j);
    return f;
}

std::vector<int> spectral_weights(const PairDescriptor& pair) {
    return pair.line == 6 ? std::vector<int>{1, 1} : std::vector<int>{1, 2, 1};
}

std::vector<Exp> weighted_monomials(const std::vector<int>& w, int deg) {
    std::vector<Exp> out;
    Exp cur(w.size(), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i == w.size()) {
            if (left == 0) out.push_back(cur);
            return;
        }
        for (int e = 0; e * w[i] <= left; ++e) {
            cur[i] = e;
            rec(i + 1, left - e * w[i]);
        }
        cur[i] = 0;
    };
    rec(0, deg);
    return out;
}

Scalar evaluate_spectral(const MultiPoly& p, const std::vector<Scalar>& xi) {
    MultiPoly r = p.substitute_block_values(Var::xi, xi);
    return r.coeff(Exp(p.layout().total(), 0));
}

struct WordKey {
    std::string pair;
    Exp word;
    auto operator<=>(const WordKey&) const = default;
};

MemoCache<WordKey, DiffOp>& word_cache() {
    static MemoCache<WordKey, DiffOp> cache;
    return cache;
}

MemoCache<std::string, std::vector<DiffOp>>& gen_cache() {
    static MemoCache<std::string, std::vector<DiffOp>> cache;
    return cache;
}

struct UmKey {
    std::string pair;
    int m;
    int cap;
    auto operator<=>(const UmKey&) const = default;
};

MemoCache<UmKey, UmResult>& um_result_cache() {
    static MemoCache<UmKey, UmResult> cache;
    return cache;
}

}  // namespace

FockBasis FockBasis::layer(int kappa, int s) { return layers(kappa, {s}); }

FockBasis FockBasis::layers(int kappa, std::vector<int> degrees) {
    FockBasis b;
    b.kappa = kappa;
    std::sort(degrees.begin(), degrees.end());
    degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
    b.degrees = degrees;
    for (int s : degrees) {
        if (s < 0) continue;
        for (Exp& e : exponents_of_degree(kappa, s)) {
            b.index.emplace(e, static_cast<int>(b.monomials.size()));
            b.monomials.push_back(std::move(e));
        }
    }
    return b;
}

DiffOp pbw_word_coordinates(const PairDescriptor& pair, const Exp& word) {
    WordKey key{pair.id(), word};
    return word_cache().get_or_compute(key, [&]() -> DiffOp {
        const VarLayout l = heisenberg_layout(pair.kappa);
        VectorFields vf = vector_fields(pair);
        DiffOp out = DiffOp::identity(l);
        // rightmost factor first: T^c, then Zbar^b, then Z^a on the left
        for (int c = 0; c < word[l.index(Var::t, 0)]; ++c) out = compose(vf.T, out);
        for (int j = pair.kappa - 1; j >= 0; --j)
            for (int c = 0; c < word[l.index(Var::vbar, j)]; ++c) out = compose(vf.Zbar[j], out);
        for (int j = pair.kappa - 1; j >= 0; --j)
            for (int c = 0; c < word[l.index(Var::v, j)]; ++c) out = compose(vf.Z[j], out);
        return out;
    });
}

PbwOp to_pbw(const PairDescriptor& pair, const DiffOp& d) {
    const VarLayout l = heisenberg_layout(pair.kappa);
    if (d.layout() != l) throw std::invalid_argument("to_pbw: operator layout mismatch");
    PbwOp op;
    op.kappa = pair.kappa;
    DiffOp rest = d;
    const Exp zero_exp(l.total(), 0);
    while (!rest.is_zero()) {
        int top = -1;
        for (const auto& [deriv, coeff] : rest.terms()) {
            Multidegree md = MultiPoly::multidegree_of(l, deriv);
            top = std::max(top, md[Var::v] + md[Var::vbar]);
        }
        bool progressed = false;
        std::vector<std::pair<Exp, Scalar>> peeled;
        for (const auto& [deriv, coeff] : rest.terms()) {
            Multidegree md = MultiPoly::multidegree_of(l, deriv);
            if (md[Var::v] + md[Var::vbar] != top) continue;
            if (coeff.term_count() != 1 || coeff.terms().begin()->first != zero_exp)
                throw std::invalid_argument(
                    "to_pbw: operator is not a combination of Z/Zbar/T words");
            peeled.emplace_back(deriv, coeff.terms().begin()->second);
        }
        for (auto& [word, c] : peeled) {
            op.terms[word] += c;
            if (op.terms[word].is_zero()) op.terms.erase(word);
            rest -= pbw_word_coordinates(pair, word) * c;
            progressed = true;
        }
        if (!progressed) throw std::logic_error("to_pbw: no progress");
    }
    return op;
}

std::string pbw_str(const PbwOp& op) {
    if (op.terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, c] : op.terms) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.str() << ")";
        for (int j = 0; j < op.kappa; ++j) {
            if (w[j]) {
                os << " Z" << (j + 1);
                if (w[j] > 1) os << "^" << w[j];
            }
        }
        for (int j = 0; j < op.kappa; ++j) {
            if (w[op.kappa + j]) {
                os << " Zb" << (j + 1);
                if (w[op.kappa + j] > 1) os << "^" << w[op.kappa + j];
            }
        }
        if (w[2 * op.kappa]) {
            os << " T";
            if (w[2 * op.kappa] > 1) os << "^" << w[2 * op.kappa];
        }
    }
    return os.str();
}

GradedMatrix dpi_matrix(const PairDescriptor& pair, const PbwOp& op, const Rat& lambda, int s) {
    if (lambda == 0) throw std::invalid_argument("dpi_matrix: lambda must be nonzero");
    if (s < 0 || s > 10) throw std::invalid_argument("dpi_matrix: degree out of range");
    const int kv = pair.kappa;
    const bool pos = lambda > 0;

    std::vector<int> degs;
    for (const auto& [w, c] : op.terms) {
        int na = 0, nb = 0;
        for (int j = 0; j < kv; ++j) { na += w[j]; nb += w[kv + j]; }
        int st = pos ? s + nb - na : s + na - nb;
        if (st >= 0) degs.push_back(st);
    }
    if (degs.empty()) degs.push_back(s);

    GradedMatrix gm;
    gm.source = FockBasis::layer(kv, s);
    gm.target = FockBasis::layers(kv, degs);
    gm.m = Mat::Zero(gm.target.dim(), gm.source.dim());

    const Scalar ilam(Rat(0), lambda);
    const Scalar half_lam(lambda / 2);
    for (const auto& [w, c] : op.terms) {
        int na = 0, nb = 0;
        for (int j = 0; j < kv; ++j) { na += w[j]; nb += w[kv + j]; }
        int tc = w[2 * kv];
        Scalar base = c * rat_pow(ilam, tc);
        if (pos)
            base *= rat_pow(Scalar(0) - half_lam, nb);
        else
            base *= rat_pow(half_lam, na);
        for (int col = 0; col < gm.source.dim(); ++col) {
            const Exp& e = gm.source.monomials[col];
            Exp f(kv);
            Rat ff(1);
            bool dead = false;
            for (int j = 0; j < kv && !dead; ++j) {
                if (pos) {
                    int up = e[j] + w[kv + j];
                    if (up < w[j]) { dead = true; break; }
                    ff *= falling(up, w[j]);
                    f[j] = up - w[j];
                } else {
                    if (e[j] < w[kv + j]) { dead = true; break; }
                    ff *= falling(e[j], w[kv + j]);
                    f[j] = e[j] - w[kv + j] + w[j];
                }
            }
            if (dead || ff == 0) continue;
            gm.m(gm.target.index.at(f), col) += base * Scalar(ff);
        }
    }
    return gm;
}

GradedMatrix dpi_matrix(const PairDescriptor& pair, const DiffOp& d, const Rat& lambda, int s) {
    return dpi_matrix(pair, to_pbw(pair, d), lambda, s);
}

Mat dsigma_geom(int kappa, const Mat& X, const FockBasis& basis) {
    Mat m = Mat::Zero(basis.dim(), basis.dim());
    for (int col = 0; col < basis.dim(); ++col) {
        const Exp& e = basis.monomials[col];
        for (int j = 0; j < kappa; ++j) {
            if (!e[j]) continue;
            for (int k = 0; k < kappa; ++k) {
                if (X(j, k).is_zero()) continue;
                Exp f = e;
                f[j] -= 1;
                f[k] += 1;
                m(basis.index.at(f), col) += Scalar(Rat(-e[j])) * X(j, k);
            }
        }
    }
    return m;
}

Mat dsigma_met(int kappa, const Mat& X, const FockBasis& basis) {
    Scalar tr(0);
    for (int i = 0; i < kappa; ++i) tr += X(i, i);
    Mat m = dsigma_geom(kappa, X, basis);
    Scalar shift = tr * Scalar(Rat(-1, 2));
    for (int i = 0; i < basis.dim(); ++i) m(i, i) += shift;
    return m;
}

Rat fock_weight(const Exp& e, const Rat& lambda) {
    Rat abs_lam = lambda > 0 ? lambda : Rat(-lambda);
    Rat w(1);
    for (int x : e) {
        w *= Rat(factorial(x));
        for (int k = 0; k < x; ++k) w *= Rat(2) / abs_lam;
    }
    return w;
}

const std::vector<DiffOp>& spectral_generators(const PairDescriptor& pair) {
    return gen_cache().get_or_compute(pair.id(), [&]() -> std::vector<DiffOp> {
        const VarLayout l = heisenberg_layout(pair.kappa);
        std::vector<DiffOp> gens;
        MultiPoly vsq(l);
        for (int j = 0; j < pair.kappa; ++j) {
            Exp e(l.total(), 0);
            e[l.index(Var::v, j)] = 1;
            e[l.index(Var::vbar, j)] = 1;
            vsq.add_term(std::move(e), Scalar(1));
        }
        gens.push_back(symmetrize(pair, vsq) * Scalar(-4));
        if (pair.line == 8) {
            // tr((vv*)^2) restricted to the Heisenberg layout
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
            gens.push_back(symmetrize(pair, r2) * Scalar(16));
        }
        gens.push_back(DiffOp::partial(l, Var::t, 0) * (Scalar(0) - Scalar::I()));
        return gens;
    });
}

std::string SpectralLabel::str() const {
    std::string r = "s=" + std::to_string(s);
    if (i >= 0) r += ",i=" + std::to_string(i);
    return r;
}

namespace {

// Coordinate columns of the V_{s,i} isotypic block over the layer basis.
Mat block_columns(const PairDescriptor& pair, const FockBasis& layer, int s, int i) {
    auto comps = isotypic_components(pair, s);
    for (const SubspaceBasis& sb : comps) {
        if (sb.label != "s=" + std::to_string(s) + ",i=" + std::to_string(i)) continue;
        Mat b = Mat::Zero(layer.dim(), sb.dim());
        const VarLayout& gl = pair.layout;
        for (int col = 0; col < sb.dim(); ++col)
            for (const auto& [e, c] : sb.vectors[col].terms()) {
                Exp f(pair.kappa);
                for (int x = 0; x < pair.kappa; ++x) f[x] = e[gl.index(Var::v, x)];
                b(layer.index.at(f), col) = c;
            }
        return b;
    }
    throw std::invalid_argument("spectral_eigenvalue: no isotypic block with label i=" +
                                std::to_string(i));
}

// Verifies the layer-s block of gm is scalar and everything off-layer is zero.
Scalar layer_scalar(const GradedMatrix& gm, int s) {
    const FockBasis& src = gm.source;
    const FockBasis& tgt = gm.target;
    Scalar xi(0);
    bool found = false;
    for (int col = 0; col < src.dim(); ++col) {
        for (int row = 0; row < tgt.dim(); ++row) {
            const Scalar& v = gm.m(row, col);
            if (v.is_zero()) continue;
            if (tgt.monomials[row] != src.monomials[col])
                throw std::domain_error("spectral_eigenvalue: non-scalar restriction");
            if (!found) { xi = v; found = true; }
            else if (v != xi)
                throw std::domain_error("spectral_eigenvalue: non-scalar restriction");
        }
    }
    (void)s;
    if (!found) return Scalar(0);
    // scalar candidates must hit every diagonal entry
    for (int col = 0; col < src.dim(); ++col) {
        auto it = tgt.index.find(src.monomials[col]);
        if (it == tgt.index.end() || gm.m(it->second, col) != xi)
            throw std::domain_error("spectral_eigenvalue: non-scalar restriction");
    }
    return xi;
}

}  // namespace

Scalar spectral_eigenvalue(const PairDescriptor& pair, const DiffOp& d, const Rat& lambda,
                           const SpectralLabel& label) {
    GradedMatrix gm = dpi_matrix(pair, d, lambda, label.s);
    if (label.i < 0) return layer_scalar(gm, label.s);
    if (pair.line != 8) throw std::invalid_argument("spectral_eigenvalue: i label needs line 8");
    // restrict to the isotypic block
    if (!gm.target.single_layer() || gm.target.degrees[0] != label.s)
        throw std::domain_error("spectral_eigenvalue: operator leaves the layer");
    Mat b = block_columns(pair, gm.source, label.s, label.i);
    Mat mb = gm.m * b;
    Scalar xi(0);
    bool found = false;
    for (int c = 0; c < b.cols() && !found; ++c)
        for (int r = 0; r < b.rows() && !found; ++r)
            if (!b(r, c).is_zero()) {
                xi = mb(r, c) / b(r, c);
                found = true;
            }
    if (!found) throw std::logic_error("spectral_eigenvalue: empty block");
    if (!is_zero_matrix(mb - xi * b))
        throw std::domain_error("spectral_eigenvalue: non-scalar restriction");
    return xi;
}

MetaplecticReport check_metaplectic(const PairDescriptor& pair, const Mat& C, const Rat& lambda,
                                    int max_s) {
    if (lambda <= 0) throw std::invalid_argument("check_metaplectic: lambda must be positive");
    if (C.rows() != pair.kappa || C.cols() != pair.kappa)
        throw std::invalid_argument("check_metaplectic: wrong matrix size");
    if (!is_zero_matrix(C - conj_transpose(C)))
        throw std::invalid_argument("check_metaplectic: C is not hermitian");

    const VarLayout l = heisenberg_layout(pair.kappa);
    MultiPoly lc(l);
    for (int j = 0; j < pair.kappa; ++j)
        for (int k = 0; k < pair.kappa; ++k) {
            if (C(j, k).is_zero()) continue;
            Exp e(l.total(), 0);
            e[l.index(Var::v, j)] += 1;
            e[l.index(Var::vbar, k)] += 1;
            lc.add_term(std::move(e), C(j, k));
        }
    DiffOp iLC = symmetrize(pair, lc) * Scalar::I();
    Mat iC = Scalar::I() * C;

    MetaplecticReport rep;
    rep.pass = true;
    for (int s = 0; s <= max_s; ++s) {
        GradedMatrix lhs = dpi_matrix(pair, iLC, lambda, s);
        FockBasis basis = FockBasis::layer(pair.kappa, s);
        if (!lhs.target.single_layer() || lhs.target.degrees[0] != s)
            throw std::logic_error("check_metaplectic: L_C left the layer");
        Mat rhs = Scalar(lambda / 2) * dsigma_met(pair.kappa, iC, basis);
        for (int r = 0; r < basis.dim(); ++r)
            for (int c = 0; c < basis.dim(); ++c)
                if (lhs.m(r, c) != rhs(r, c)) {
                    rep.pass = false;
                    std::ostringstream os;
                    os << "s=" << s << " entry(" << r << "," << c << "): dpi=" << lhs.m(r, c).str()
                       << " vs (lambda/2)dsigma_met=" << rhs(r, c).str();
                    rep.witness = os.str();
                    return rep;
                }
    }
    return rep;
}

MmActionReport Mm_action(const PairDescriptor& pair, int m, const Rat& lambda, int s) {
    if (m < 1 || m > 3) throw std::invalid_argument("Mm_action: unsupported m");
    EquivariantOperator mm = build_Mm(pair, m);
    MmActionReport rep;
    for (const DiffOp& a : mm.components) {
        GradedMatrix gm = dpi_matrix(pair, a, lambda, s);
        if (!gm.target.single_layer() || gm.target.degrees[0] != s)
            throw std::logic_error("Mm_action: component leaves the layer");
        rep.components.push_back(std::move(gm));
    }
    const int dim = rep.components.front().source.dim();
    const int nc = static_cast<int>(rep.components.size());

    auto joint_rank = [&](const Mat& block) {
        Mat stacked(static_cast<Eigen::Index>(nc) * block.rows(), block.cols());
        for (int j = 0; j < nc; ++j)
            stacked.middleRows(static_cast<Eigen::Index>(j) * block.rows(), block.rows()) =
                rep.components[j].m * block;
        return rank(std::move(stacked));
    };

    if (pair.line == 6) {
        MmBlockReport br;
        br.label = "s=" + std::to_string(s);
        br.admissible = s >= m;
        br.maps_into_block = true;
        br.joint_rank = joint_rank(Mat::Identity(dim, dim));
        rep.blocks.push_back(br);
    } else {
        for (const SubspaceBasis& sb : isotypic_components(pair, s)) {
            int i = std::stoi(sb.label.substr(sb.label.find("i=") + 2));
            Mat b = block_columns(pair, rep.components.front().source, s, i);
            MmBlockReport br;
            br.label = sb.label;
            br.admissible = i >= m;
            br.joint_rank = joint_rank(b);
            // intertwining: images must stay inside the same block
            EchelonSpan span(b.rows());
            for (int c = 0; c < b.cols(); ++c) span.add(b.col(c));
            br.maps_into_block = true;
            for (int j = 0; j < nc && br.maps_into_block; ++j) {
                Mat img = rep.components[j].m * b;
                for (int c = 0; c < img.cols(); ++c)
                    if (!span.contains(img.col(c))) { br.maps_into_block = false; break; }
            }
            rep.blocks.push_back(std::move(br));
        }
    }
    rep.pass = true;
    for (const MmBlockReport& br : rep.blocks)
        if (!br.maps_into_block || (br.joint_rank > 0) != br.admissible) rep.pass = false;
    return rep;
}

namespace {

std::vector<SpectralLabel> labels_of_layer(const PairDescriptor& pair, int s) {
    if (pair.line == 6) return {SpectralLabel{s, -1}};
    std::vector<SpectralLabel> out;
    for (const SubspaceBasis& sb : isotypic_components(pair, s)) {
        int i = std::stoi(sb.label.substr(sb.label.find("i=") + 2));
        out.push_back(SpectralLabel{s, i});
    }
    return out;
}

std::vector<Scalar> xi_of(const PairDescriptor& pair, const Rat& lambda, const SpectralLabel& lab) {
    const std::vector<DiffOp>& gens = spectral_generators(pair);
    std::vector<Scalar> xi;
    xi.push_back(spectral_eigenvalue(pair, gens[0], lambda, SpectralLabel{lab.s, -1}));
    if (pair.line == 8) xi.push_back(spectral_eigenvalue(pair, gens[1], lambda, lab));
    xi.push_back(Scalar(lambda));
    return xi;
}

}  // namespace

UmResult compute_um(const PairDescriptor& pair, int m, int sample_cap) {
    if (m < 1 || m > 2) throw std::invalid_argument("compute_um: unsupported m");
    if (sample_cap < m + 3) throw std::invalid_argument("compute_um: sample cap below m+3");
    UmKey key{pair.id(), m, sample_cap};
    return um_result_cache().get_or_compute(key, [&]() -> UmResult {
        const int d0 = pair.d0;
        const VarLayout xl = VarLayout::spectral(d0);
        DiffOp um_op = build_Um(pair, m);

        const std::vector<Rat> train_l = {Rat(1), Rat(3), Rat(1, 2), Rat(-1)};
        const std::vector<Rat> holdout_l = {Rat(2), Rat(-2)};

        struct Sample {
            std::vector<Scalar> xi;
            Scalar e;
        };
        std::vector<Sample> train, holdout;
        for (int s = 0; s <= sample_cap; ++s) {
            for (const SpectralLabel& lab : labels_of_layer(pair, s)) {
                for (const Rat& lam : train_l) {
                    Sample smp{xi_of(pair, lam, lab),
                               spectral_eigenvalue(pair, um_op, lam, lab)};
                    (s < sample_cap ? train : holdout).push_back(std::move(smp));
                }
                for (const Rat& lam : holdout_l)
                    holdout.push_back(
                        Sample{xi_of(pair, lam, lab), spectral_eigenvalue(pair, um_op, lam, lab)});
            }
        }

        std::vector<Exp> monos = weighted_monomials(spectral_weights(pair), 2 * m);
        Mat A(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(monos.size()));
        Vec b(static_cast<Eigen::Index>(train.size()));
        for (std::size_t r = 0; r < train.size(); ++r) {
            for (std::size_t c = 0; c < monos.size(); ++c) {
                Scalar val(1);
                for (int x = 0; x < d0; ++x) val *= rat_pow(train[r].xi[x], monos[c][x]);
                A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = val;
            }
            b(static_cast<Eigen::Index>(r)) = train[r].e;
        }
        if (rank(A) != static_cast<int>(monos.size()))
            throw std::domain_error("compute_um: interpolation system is underdetermined");
        auto x = solve(A, b);
        if (!x) throw std::domain_error("compute_um: interpolation inconsistent");

        UmResult res;
        res.um_raw = MultiPoly(xl);
        for (std::size_t c = 0; c < monos.size(); ++c) {
            Exp e(xl.total(), 0);
            for (int i = 0; i < d0; ++i) e[xl.index(Var::xi, i)] = monos[c][i];
            res.um_raw.add_term(std::move(e), (*x)(static_cast<Eigen::Index>(c)));
        }
        if (res.um_raw.is_zero()) throw std::domain_error("compute_um: vanishing interpolation");

        res.holdout_ok = true;
        for (const Sample& h : holdout)
            if (evaluate_spectral(res.um_raw, h.xi) != h.e) { res.holdout_ok = false; break; }
        if (!res.holdout_ok) throw std::domain_error("compute_um: held-out samples disagree");

        // normalize on the lex-leading spectral monomial (xi_1^{2m} when present)
        res.scale = res.um_raw.terms().rbegin()->second;
        res.um = res.um_raw * (Scalar(1) / res.scale);

        if (pair.line == 6) {
            MultiPoly prod = MultiPoly::constant(xl, Scalar(1));
            for (int sp = 0; sp < m; ++sp) {
                MultiPoly f(xl);
                Exp e1(xl.total(), 0);
                e1[xl.index(Var::xi, 0)] = 2;
                f.add_term(e1, Scalar(1));
                Exp e2(xl.total(), 0);
                e2[xl.index(Var::xi, 1)] = 2;
                int c = 2 * sp + pair.kappa;
                f.add_term(e2, Scalar(Rat(-c * c)));
                prod = prod * f;
            }
            res.product_form_ok = (res.um == prod);
        } else {
            auto coeff_of = [&](std::initializer_list<int> exps) {
                Exp e(xl.total(), 0);
                int i = 0;
                for (int v : exps) e[xl.index(Var::xi, i++)] = v;
                return res.um.coeff(e);
            };
            res.coeff_xi1sq = coeff_of({2, 0, 0});
            res.coeff_xi2 = coeff_of({0, 1, 0});
            res.coeff_xi1lam = coeff_of({1, 0, 1});
            res.coeff_lamsq = coeff_of({0, 0, 2});
        }
        return res;
    });
}

std::vector<SpectrumPoint> spectrum_points(const PairDescriptor& pair, const std::vector<Rat>& lambdas,
                                           int max_s, std::optional<int> m) {
    for (const Rat& lam : lambdas)
        if (lam == 0) throw std::invalid_argument("spectrum_points: lambda must be nonzero");
    std::optional<UmResult> um;
    if (m) um = compute_um(pair, *m, *m + 3);
    std::vector<SpectrumPoint> out;
    for (const Rat& lam : lambdas)
        for (int s = 0; s <= max_s; ++s)
            for (const SpectralLabel& lab : labels_of_layer(pair, s)) {
                SpectrumPoint pt;
                pt.lambda = lam;
                pt.s = lab.s;
                pt.i = lab.i;
                pt.xi = xi_of(pair, lam, lab);
                if (um) pt.in_Sm = evaluate_spectral(um->um, pt.xi).is_zero();
                out.push_back(std::move(pt));
            }
    return out;
}

namespace {

// Dense univariate polynomials in the layer parameter s, used by the branch
// certification below.
struct Poly1 {
    std::vector<Scalar> c;  // c[k] s^k

    static Poly1 constant(Scalar v) { return Poly1{{std::move(v)}}; }
    bool is_zero() const {
        for (const Scalar& x : c)
            if (!x.is_zero()) return false;
        return true;
    }
    Poly1 operator*(const Poly1& o) const {
        if (c.empty() || o.c.empty()) return Poly1{};
        Poly1 r;
        r.c.assign(c.size() + o.c.size() - 1, Scalar(0));
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
        return r;
    }
    Poly1& operator+=(const Poly1& o) {
        if (o.c.size() > c.size()) c.resize(o.c.size(), Scalar(0));
        for (std::size_t i = 0; i < o.c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    Scalar eval(const Scalar& s) const {
        Scalar acc(0);
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * s + c[i];
        return acc;
    }
};

Poly1 poly1_pow(const Poly1& p, int e) {
    Poly1 r = Poly1::constant(Scalar(1));
    for (int k = 0; k < e; ++k) r = r * p;
    return r;
}

// xi_2(sigma Lambda, s, i) = Lambda^2 Q(s) on the branch i: fit Q of degree <= 2
// on the available layers and certify the fit on the spare ones.
Poly1 branch_xi2_model(const PairDescriptor& pair, int i, int sigma) {
    const std::vector<DiffOp>& gens = spectral_generators(pair);
    std::vector<int> ss;
    for (int s = i; s <= 8; s += 2) ss.push_back(s);
    if (ss.size() < 4) throw std::logic_error("branch_xi2_model: not enough layers");
    std::vector<Scalar> vals;
    for (int s : ss)
        vals.push_back(spectral_eigenvalue(pair, gens[1], Rat(sigma), SpectralLabel{s, i}));
    // fit on the first three samples
    Mat A(3, 3);
    Vec b(3);
    for (int r = 0; r < 3; ++r) {
        Scalar s(Rat(ss[r]));
        A(r, 0) = Scalar(1);
        A(r, 1) = s;
        A(r, 2) = s * s;
        b(r) = vals[r];
    }
    auto x = solve(A, b);
    if (!x) throw std::logic_error("branch_xi2_model: quadratic fit failed");
    Poly1 q{{(*x)(0), (*x)(1), (*x)(2)}};
    for (std::size_t r = 3; r < ss.size(); ++r)
        if (q.eval(Scalar(Rat(ss[r]))) != vals[r])
            throw std::logic_error("branch_xi2_model: fit does not certify on spare layers");
    return q;
}

// Checks that p vanishes identically on the branch (s free, Lambda free):
// xi_1 = (2s+kappa) Lambda, xi_2 = Q(s) Lambda^2, lambda = sigma Lambda.
bool vanishes_on_branch(const PairDescriptor& pair, const MultiPoly& p, const Poly1* q2, int sigma,
                        std::optional<int> fixed_s) {
    const VarLayout& xl = p.layout();
    const int d0 = pair.d0;
    std::map<int, Poly1> by_lambda_power;  // Lambda degree -> polynomial in s
    Poly1 xi1{{Scalar(Rat(pair.kappa)), Scalar(2)}};  // 2s + kappa
    for (const auto& [e, c] : p.terms()) {
        int e1 = e[xl.index(Var::xi, 0)];
        int e2 = d0 == 3 ? e[xl.index(Var::xi, 1)] : 0;
        int el = e[xl.index(Var::xi, d0 - 1)];
        int lam_deg = e1 + 2 * e2 + el;
        Scalar coeff = c * Scalar(Rat(sigma == -1 && (el % 2) ? -1 : 1));
        Poly1 term = Poly1::constant(coeff) * poly1_pow(xi1, e1);
        if (e2) {
            if (!q2) return false;
            term = term * poly1_pow(*q2, e2);
        }
        auto it = by_lambda_power.find(lam_deg);
        if (it == by_lambda_power.end())
            by_lambda_power.emplace(lam_deg, term);
        else
            it->second += term;
    }
    for (auto& [deg, poly] : by_lambda_power) {
        if (fixed_s) {
            if (!poly.eval(Scalar(Rat(*fixed_s))).is_zero()) return false;
        } else if (!poly.is_zero()) {
            return false;
        }
    }
    return true;
}

// Division of p by a divisor whose unique term of maximal degree in the given
// spectral variable is var^deg with coefficient 1.
MultiPoly divide_monic(const MultiPoly& p, const MultiPoly& u, int var_index, int lead_deg,
                       MultiPoly* remainder) {
    MultiPoly q(p.layout());
    MultiPoly r = p;
    while (true) {
        const auto* top = static_cast<const std::pair<const Exp, Scalar>*>(nullptr);
        for (const auto& term : r.terms())
            if (term.first[var_index] >= lead_deg &&
                (!top || term.first > top->first))
                top = &term;
        if (!top) break;
        Exp qe = top->first;
        qe[var_index] -= lead_deg;
        MultiPoly qt = MultiPoly::monomial(p.layout(), std::move(qe), top->second);
        q += qt;
        r -= u * qt;
    }
    *remainder = std::move(r);
    return q;
}

}  // namespace

MultiPoly divide_by_um(const PairDescriptor& pair, int m, const MultiPoly& p) {
    if (m < 1 || m > 2) throw std::invalid_argument("divide_by_um: unsupported m");
    const VarLayout xl = VarLayout::spectral(pair.d0);
    if (p.layout() != xl) throw std::invalid_argument("divide_by_um: wrong variable layout");
    UmResult um = compute_um(pair, m, m + 3);
    if (p.is_zero()) return p;

    // Vanishing on S_m, checked branch by branch with a symbolic Lambda.
    if (pair.line == 6) {
        for (int s = 0; s < m; ++s)
            for (int sigma : {1, -1})
                if (!vanishes_on_branch(pair, p, nullptr, sigma, s))
                    throw std::invalid_argument("divide_by_um: input does not vanish on S_m");
    } else {
        for (int i = 0; i < m; ++i)
            for (int sigma : {1, -1}) {
                Poly1 q2 = branch_xi2_model(pair, i, sigma);
                if (!vanishes_on_branch(pair, p, &q2, sigma, std::nullopt))
                    throw std::invalid_argument("divide_by_um: input does not vanish on S_m");
            }
    }

    MultiPoly quotient(xl);
    MultiPoly remainder(xl);
    if (pair.line == 6) {
        quotient = divide_monic(p, um.um, xl.index(Var::xi, 0), 2 * m, &remainder);
        if (!remainder.is_zero()) throw std::domain_error("divide_by_um: division leaves remainder");
    } else {
        // division along the xi_2 graph(s)
        const int xi2 = xl.index(Var::xi, 1);
        if (m == 1) {
            Scalar a2 = um.coeff_xi2;
            if (a2.is_zero()) throw std::domain_error("divide_by_um: xi_2 coefficient vanishes");
            MultiPoly graph = um.um * (Scalar(1) / a2);
            MultiPoly q1 = divide_monic(p, graph, xi2, 1, &remainder);
            if (!remainder.is_zero())
                throw std::domain_error("divide_by_um: division leaves remainder");
            quotient = q1 * (Scalar(1) / a2);
        } else {
            // u_2 = c * u~_0 u~_1 with each u~_i monic in xi_2
            UmResult u1 = compute_um(pair, 1, 4);
            MultiPoly graph0 = u1.um * (Scalar(1) / u1.coeff_xi2);
            // u~_1 from the branch-1 graph: xi_2 + c1 xi_1^2 + d lam^2
            Poly1 q2 = branch_xi2_model(pair, 1, 1);
            // xi_2(1,s,1) = -c1 (2s+kappa)^2 - d: solve from two layers, verify on the rest
            Mat A(2, 2);
            Vec b(2);
            for (int r = 0; r < 2; ++r) {
                int s = 1 + 2 * r;
                Scalar x1(Rat(2 * s + pair.kappa));
                A(r, 0) = x1 * x1;
                A(r, 1) = Scalar(1);
                b(r) = Scalar(0) - q2.eval(Scalar(Rat(s)));
            }
            auto cd = solve(A, b);
            if (!cd) throw std::logic_error("divide_by_um: branch-1 graph fit failed");
            MultiPoly graph1(xl);
            Exp e2(xl.total(), 0);
            e2[xi2] = 1;
            graph1.add_term(e2, Scalar(1));
            Exp e1(xl.total(), 0);
            e1[xl.index(Var::xi, 0)] = 2;
            graph1.add_term(e1, (*cd)(0));
            Exp el(xl.total(), 0);
            el[xl.index(Var::xi, 2)] = 2;
            graph1.add_term(el, (*cd)(1));
            for (int s = 1; s <= 7; s += 2) {
                std::vector<Scalar> xi = {Scalar(Rat(2 * s + pair.kappa)),
                                          q2.eval(Scalar(Rat(s))), Scalar(1)};
                if (!evaluate_spectral(graph1, xi).is_zero())
                    throw std::logic_error("divide_by_um: branch-1 graph fails certification");
            }
            // u_2 must be proportional to graph0 * graph1
            MultiPoly prod = graph0 * graph1;
            Scalar lead = prod.terms().rbegin()->second;
            MultiPoly prod_n = prod * (Scalar(1) / lead);
            if (prod_n != um.um)
                throw std::domain_error("divide_by_um: u_2 is not the branch product");
            MultiPoly qa = divide_monic(p, graph0, xi2, 1, &remainder);
            if (!remainder.is_zero())
                throw std::domain_error("divide_by_um: division leaves remainder");
            MultiPoly qb = divide_monic(qa, graph1, xi2, 1, &remainder);
            if (!remainder.is_zero())
                throw std::domain_error("divide_by_um: division leaves remainder");
            quotient = qb * lead;
        }
    }
    if (p != um.um * quotient) throw std::domain_error("divide_by_um: roundtrip check failed");
    return quotient;
}

void clear_bargmann_caches() {
    word_cache().clear();
    gen_cache().clear();
    um_result_cache().clear();
}

}  // namespace ngp
