#ifndef QCUT_MATRIX_HPP
#define QCUT_MATRIX_HPP

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcut/rational.hpp"

namespace qcut {

/// Dense square matrix of exact rationals, row-major. Immutable by
/// convention once built; every operation returns a fresh value.
class QMatrix {
public:
    QMatrix() : n_(0) {}
    explicit QMatrix(int n) : n_(n), e_(static_cast<std::size_t>(n) * n, Rat(0)) {}
    QMatrix(int n, std::vector<Rat> entries);

    static QMatrix identity(int n);
    static QMatrix zero(int n) { return QMatrix(n); }

    int dim() const { return n_; }
    const Rat& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * n_ + j]; }
    Rat& at(int i, int j) { return e_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<Rat>& entries() const { return e_; }

    QMatrix transpose() const;
    bool is_identity() const;
    bool is_zero() const;

    friend bool operator==(const QMatrix& a, const QMatrix& b) {
        return a.n_ == b.n_ && a.e_ == b.e_;
    }
    friend bool operator!=(const QMatrix& a, const QMatrix& b) { return !(a == b); }

    // Total order on (dim, entries); used for deterministic sets of matrices.
    friend bool operator<(const QMatrix& a, const QMatrix& b);

    std::string to_string() const;

private:
    int n_;
    std::vector<Rat> e_;
};

class QVector {
public:
    QVector() = default;
    explicit QVector(int n) : e_(static_cast<std::size_t>(n), Rat(0)) {}
    explicit QVector(std::vector<Rat> entries) : e_(std::move(entries)) {}

    int dim() const { return static_cast<int>(e_.size()); }
    const Rat& at(int i) const { return e_[static_cast<std::size_t>(i)]; }
    Rat& at(int i) { return e_[static_cast<std::size_t>(i)]; }
    const std::vector<Rat>& entries() const { return e_; }

    Rat norm_sq() const;

    friend bool operator==(const QVector& a, const QVector& b) { return a.e_ == b.e_; }

private:
    std::vector<Rat> e_;
};

QMatrix mat_mul(const QMatrix& a, const QMatrix& b);
QVector vec_mat_mul(const QVector& v, const QMatrix& m);  // row vector times matrix
QMatrix mat_pow(const QMatrix& a, unsigned k);

/// Block-diagonal sum of the given square blocks; off-block entries are zero.
QMatrix direct_sum(std::span<const QMatrix> blocks);
QMatrix direct_sum(std::initializer_list<QMatrix> blocks);

/// Extracts the square diagonal block starting at `offset` with size `d`.
QMatrix diagonal_block(const QMatrix& m, int offset, int d);

/// True iff A A^T = I exactly.
bool is_orthogonal(const QMatrix& a);

/// Bijection on the index pairs {0..n-1}^2, flattened row-major:
/// image[i*n+j] = (i', j').
class IndexPerm {
public:
    IndexPerm(int n, std::vector<std::pair<int, int>> image);

    static IndexPerm identity(int n);
    static IndexPerm transpose(int n);

    int dim() const { return n_; }
    std::pair<int, int> apply(int i, int j) const { return image_[static_cast<std::size_t>(i) * n_ + j]; }
    IndexPerm inverse() const;

private:
    int n_;
    std::vector<std::pair<int, int>> image_;
};

/// Entry renaming: result(i,j) = a(pi(i,j)).
QMatrix entry_rename(const IndexPerm& pi, const QMatrix& a);

}  // namespace qcut

#endif
