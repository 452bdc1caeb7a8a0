#include "qcut/matrix.hpp"

#include <sstream>
#include <stdexcept>

namespace qcut {

QMatrix::QMatrix(int n, std::vector<Rat> entries) : n_(n), e_(std::move(entries)) {
    if (n < 0 || e_.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("matrix entry count does not match dimension");
}

QMatrix QMatrix::identity(int n) {
    QMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

QMatrix QMatrix::transpose() const {
    QMatrix t(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) t.at(j, i) = at(i, j);
    return t;
}

bool QMatrix::is_identity() const {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (at(i, j) != (i == j ? 1 : 0)) return false;
    return true;
}

bool QMatrix::is_zero() const {
    for (const Rat& x : e_)
        if (x != 0) return false;
    return true;
}

bool operator<(const QMatrix& a, const QMatrix& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    for (std::size_t i = 0; i < a.e_.size(); ++i) {
        int c = cmp(a.e_[i], b.e_[i]);
        if (c != 0) return c < 0;
    }
    return false;
}

std::string QMatrix::to_string() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < n_; ++i) {
        os << (i ? " [" : "[");
        for (int j = 0; j < n_; ++j) os << (j ? " " : "") << rat_to_string(at(i, j));
        os << "]";
    }
    os << "]";
    return os.str();
}

Rat QVector::norm_sq() const {
    Rat s(0);
    for (const Rat& x : e_) s += x * x;
    return s;
}

QMatrix mat_mul(const QMatrix& a, const QMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("matrix dimension mismatch in product");
    const int n = a.dim();
    QMatrix c(n);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < n; ++t) {
            const Rat& ait = a.at(i, t);
            if (ait == 0) continue;
            for (int j = 0; j < n; ++j) c.at(i, j) += ait * b.at(t, j);
        }
    return c;
}

QVector vec_mat_mul(const QVector& v, const QMatrix& m) {
    if (v.dim() != m.dim()) throw std::invalid_argument("vector/matrix dimension mismatch");
    const int n = v.dim();
    QVector r(n);
    for (int i = 0; i < n; ++i) {
        const Rat& vi = v.at(i);
        if (vi == 0) continue;
        for (int j = 0; j < n; ++j) r.at(j) += vi * m.at(i, j);
    }
    return r;
}

QMatrix mat_pow(const QMatrix& a, unsigned k) {
    QMatrix acc = QMatrix::identity(a.dim());
    QMatrix base = a;
    while (k) {
        if (k & 1u) acc = mat_mul(acc, base);
        k >>= 1u;
        if (k) base = mat_mul(base, base);
    }
    return acc;
}

QMatrix direct_sum(std::span<const QMatrix> blocks) {
    if (blocks.empty()) throw std::invalid_argument("direct_sum of empty block list");
    int total = 0;
    for (const auto& b : blocks) total += b.dim();
    QMatrix m(total);
    int off = 0;
    for (const auto& b : blocks) {
        for (int i = 0; i < b.dim(); ++i)
            for (int j = 0; j < b.dim(); ++j) m.at(off + i, off + j) = b.at(i, j);
        off += b.dim();
    }
    return m;
}

QMatrix direct_sum(std::initializer_list<QMatrix> blocks) {
    std::vector<QMatrix> v(blocks);
    return direct_sum(std::span<const QMatrix>(v));
}

QMatrix diagonal_block(const QMatrix& m, int offset, int d) {
    QMatrix b(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b.at(i, j) = m.at(offset + i, offset + j);
    return b;
}

bool is_orthogonal(const QMatrix& a) {
    const int n = a.dim();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Rat s(0);
            for (int t = 0; t < n; ++t) s += a.at(i, t) * a.at(j, t);
            if (s != (i == j ? 1 : 0)) return false;
        }
    return true;
}

IndexPerm::IndexPerm(int n, std::vector<std::pair<int, int>> image)
    : n_(n), image_(std::move(image)) {
    if (image_.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("index permutation has wrong size");
    std::vector<char> seen(image_.size(), 0);
    for (const auto& [i, j] : image_) {
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::invalid_argument("index permutation target out of range");
        std::size_t flat = static_cast<std::size_t>(i) * n + j;
        if (seen[flat]) throw std::invalid_argument("index permutation is not a bijection");
        seen[flat] = 1;
    }
}

IndexPerm IndexPerm::identity(int n) {
    std::vector<std::pair<int, int>> img;
    img.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) img.emplace_back(i, j);
    return IndexPerm(n, std::move(img));
}

IndexPerm IndexPerm::transpose(int n) {
    std::vector<std::pair<int, int>> img;
    img.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) img.emplace_back(j, i);
    return IndexPerm(n, std::move(img));
}

IndexPerm IndexPerm::inverse() const {
    std::vector<std::pair<int, int>> img(image_.size());
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            auto [pi, pj] = apply(i, j);
            img[static_cast<std::size_t>(pi) * n_ + pj] = {i, j};
        }
    return IndexPerm(n_, std::move(img));
}

QMatrix entry_rename(const IndexPerm& pi, const QMatrix& a) {
    if (pi.dim() != a.dim()) throw std::invalid_argument("permutation/matrix dimension mismatch");
    const int n = a.dim();
    QMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto [pi_, pj_] = pi.apply(i, j);
            r.at(i, j) = a.at(pi_, pj_);
        }
    return r;
}

}  // namespace qcut
