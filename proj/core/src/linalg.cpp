#include "qcut/linalg.hpp"

namespace qcut {

std::vector<int> rref(RatMatrix& m, int cols) {
    std::vector<int> pivots;
    int row = 0;
    const int rows = static_cast<int>(m.size());
    for (int col = 0; col < cols && row < rows; ++col) {
        int p = -1;
        for (int r = row; r < rows; ++r)
            if (m[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] != 0) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(m[static_cast<std::size_t>(p)], m[static_cast<std::size_t>(row)]);
        Rat inv = Rat(1) / m[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
        for (int c = col; c < cols; ++c) m[static_cast<std::size_t>(row)][static_cast<std::size_t>(c)] *= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == row) continue;
            const Rat& f = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            if (f == 0) continue;
            Rat factor = f;
            for (int c = col; c < cols; ++c)
                m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
                    factor * m[static_cast<std::size_t>(row)][static_cast<std::size_t>(c)];
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

std::vector<std::vector<Rat>> nullspace(const RatMatrix& m_in, int cols) {
    RatMatrix m = m_in;
    std::vector<int> pivots = rref(m, cols);
    std::vector<char> is_pivot(static_cast<std::size_t>(cols), 0);
    for (int p : pivots) is_pivot[static_cast<std::size_t>(p)] = 1;

    std::vector<std::vector<Rat>> basis;
    for (int free = 0; free < cols; ++free) {
        if (is_pivot[static_cast<std::size_t>(free)]) continue;
        std::vector<Rat> v(static_cast<std::size_t>(cols), Rat(0));
        v[static_cast<std::size_t>(free)] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r)
            v[static_cast<std::size_t>(pivots[r])] =
                -m[r][static_cast<std::size_t>(free)];
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace qcut
