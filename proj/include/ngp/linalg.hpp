#pragma once

#include "ngp/scalar.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace ngp {

using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline Mat conj_transpose(const Mat& a) {
    Mat r(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) r(j, i) = a(i, j).conj();
    return r;
}

// In-place reduced row echelon form over the exact field. Pivots are chosen as
// the first row with a nonzero entry, scanning columns left to right, so the
// result (and everything derived from it) is deterministic.
template <typename Matrix>
std::vector<int> rref(Matrix& a) {
    std::vector<int> pivot_cols;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < a.cols() && row < a.rows(); ++col) {
        Eigen::Index piv = -1;
        for (Eigen::Index r = row; r < a.rows(); ++r)
            if (!a(r, col).is_zero()) { piv = r; break; }
        if (piv < 0) continue;
        if (piv != row) a.row(piv).swap(a.row(row));
        Scalar inv = Scalar(1) / a(row, col);
        for (Eigen::Index c = col; c < a.cols(); ++c) a(row, c) *= inv;
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            if (r == row || a(r, col).is_zero()) continue;
            Scalar f = a(r, col);
            for (Eigen::Index c = col; c < a.cols(); ++c) a(r, c) -= f * a(row, c);
        }
        pivot_cols.push_back(static_cast<int>(col));
        ++row;
    }
    return pivot_cols;
}

inline int rank(Mat a) { return static_cast<int>(rref(a).size()); }

// Columns form a deterministic basis of { x : a x = 0 }.
inline Mat kernel_basis(Mat a) {
    const Eigen::Index n = a.cols();
    std::vector<int> pivots = rref(a);
    std::vector<bool> is_pivot(n, false);
    for (int p : pivots) is_pivot[p] = true;
    Eigen::Index nfree = n - static_cast<Eigen::Index>(pivots.size());
    Mat k = Mat::Zero(n, nfree);
    Eigen::Index col = 0;
    for (Eigen::Index f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        k(f, col) = Scalar(1);
        for (std::size_t i = 0; i < pivots.size(); ++i) k(pivots[i], col) = -a(i, f);
        ++col;
    }
    return k;
}

// Exact solve of a x = b; empty when the system is inconsistent.
inline std::optional<Vec> solve(const Mat& a, const Vec& b) {
    Mat aug(a.rows(), a.cols() + 1);
    aug.leftCols(a.cols()) = a;
    aug.col(a.cols()) = b;
    std::vector<int> pivots = rref(aug);
    if (!pivots.empty() && pivots.back() == static_cast<int>(a.cols()))
        return std::nullopt;  // pivot in the rhs column
    Vec x = Vec::Zero(a.cols());
    for (std::size_t i = 0; i < pivots.size(); ++i) x(pivots[i]) = aug(i, a.cols());
    // A solution of the reduced system; verify against the full one so that
    // underdetermined-but-consistent inputs pass through exactly.
    Vec r = a * x - b;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        if (!r(i).is_zero()) return std::nullopt;
    return x;
}

inline Mat inverse(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("inverse: non-square matrix");
    Mat aug(a.rows(), 2 * a.cols());
    aug.leftCols(a.cols()) = a;
    aug.rightCols(a.cols()) = Mat::Identity(a.rows(), a.cols());
    std::vector<int> pivots = rref(aug);
    if (static_cast<Eigen::Index>(pivots.size()) != a.rows() ||
        pivots.back() >= static_cast<int>(a.cols()))
        throw std::domain_error("inverse: singular matrix");
    return aug.rightCols(a.cols());
}

// Incrementally maintained echelon span: supports membership tests and greedy
// independent-subset selection without re-eliminating from scratch.
class EchelonSpan {
  public:
    explicit EchelonSpan(Eigen::Index dim) : dim_(dim) {}

    // Reduces v against the stored rows; returns the residual.
    Vec reduce(Vec v) const {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const Scalar& c = v(pivots_[i]);
            if (!c.is_zero()) v -= c * rows_[i];
        }
        return v;
    }

    bool contains(const Vec& v) const {
        Vec r = reduce(v);
        for (Eigen::Index i = 0; i < r.size(); ++i)
            if (!r(i).is_zero()) return false;
        return true;
    }

    // Adds v if it enlarges the span; returns true when it did.
    bool add(const Vec& v) {
        Vec r = reduce(v);
        Eigen::Index p = -1;
        for (Eigen::Index i = 0; i < r.size(); ++i)
            if (!r(i).is_zero()) { p = i; break; }
        if (p < 0) return false;
        r /= r(p);
        rows_.push_back(std::move(r));
        pivots_.push_back(p);
        return true;
    }

    int dim() const { return static_cast<int>(rows_.size()); }

  private:
    Eigen::Index dim_;
    std::vector<Vec> rows_;
    std::vector<Eigen::Index> pivots_;
};

// Indices of a maximal linearly independent subset of the given columns,
// scanned in order (earlier columns win), so chosen representatives are the
// original vectors rather than recombinations.
inline std::vector<int> greedy_independent_columns(const Mat& cols) {
    std::vector<int> kept;
    EchelonSpan span(cols.rows());
    for (Eigen::Index j = 0; j < cols.cols(); ++j)
        if (span.add(cols.col(j))) kept.push_back(static_cast<int>(j));
    return kept;
}

inline bool is_zero_matrix(const Mat& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (!a(i, j).is_zero()) return false;
    return true;
}

}  // namespace ngp
