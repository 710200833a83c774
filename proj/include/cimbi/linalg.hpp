#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cimbi {

using Vec = std::vector<double>;

// Dense square matrix, row-major.
class SquareMat {
public:
    SquareMat() = default;
    explicit SquareMat(int n, double fill = 0.0) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}

    static SquareMat identity(int n) {
        SquareMat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static SquareMat diag(const Vec& d) {
        SquareMat m(static_cast<int>(d.size()));
        for (int i = 0; i < m.n(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return m;
    }

    static SquareMat from_rows(int n, const std::vector<double>& row_major) {
        if (row_major.size() != static_cast<std::size_t>(n) * n)
            throw std::invalid_argument("SquareMat::from_rows: need n*n entries");
        SquareMat m(n);
        m.a_ = row_major;
        return m;
    }

    int n() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<double>& data() const { return a_; }

    bool is_diagonal() const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (i != j && (*this)(i, j) != 0.0) return false;
        return true;
    }

    friend bool operator==(const SquareMat& a, const SquareMat& b) { return a.n_ == b.n_ && a.a_ == b.a_; }

private:
    int n_ = 0;
    std::vector<double> a_;
};

inline SquareMat symmetrize(const SquareMat& m) {
    SquareMat s(m.n());
    for (int i = 0; i < m.n(); ++i)
        for (int j = 0; j < m.n(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

inline SquareMat negate(const SquareMat& m) {
    SquareMat s(m.n());
    for (int i = 0; i < m.n(); ++i)
        for (int j = 0; j < m.n(); ++j) s(i, j) = -m(i, j);
    return s;
}

inline Vec mat_vec(const SquareMat& m, const Vec& x) {
    Vec y(static_cast<std::size_t>(m.n()), 0.0);
    for (int i = 0; i < m.n(); ++i) {
        double s = 0.0;
        for (int j = 0; j < m.n(); ++j) s += m(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

// x^T M x
inline double quad_form(const SquareMat& m, const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < m.n(); ++i)
        for (int j = 0; j < m.n(); ++j) s += m(i, j) * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
    return s;
}

inline double max_abs(const SquareMat& m) {
    double v = 0.0;
    for (double a : m.data()) v = std::max(v, std::abs(a));
    return v;
}

inline double max_asymmetry(const SquareMat& m) {
    double v = 0.0;
    for (int i = 0; i < m.n(); ++i)
        for (int j = i + 1; j < m.n(); ++j) v = std::max(v, std::abs(m(i, j) - m(j, i)));
    return v;
}

struct EigenSym {
    Vec values;         // ascending
    SquareMat vectors;  // columns, matching order
};

// Cyclic Jacobi iteration for symmetric matrices. Small n only.
inline EigenSym eigen_sym(const SquareMat& m_in) {
    const int n = m_in.n();
    SquareMat a = symmetrize(m_in);
    SquareMat v = SquareMat::identity(n);
    if (n == 1) return {{a(0, 0)}, v};

    auto off_norm = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };

    const double scale = 1.0 + max_abs(a);
    const int max_sweeps = 100;
    int sweep = 0;
    while (off_norm() > 1e-14 * scale) {
        if (++sweep > max_sweeps) throw std::runtime_error("eigen_sym: Jacobi iteration did not converge");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < n - 1; ++i)
        for (int j = i + 1; j < n; ++j)
            if (a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]) <
                a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]))
                std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);

    EigenSym out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = SquareMat(n);
    for (int c = 0; c < n; ++c) {
        int src = order[static_cast<std::size_t>(c)];
        out.values[static_cast<std::size_t>(c)] = a(src, src);
        for (int r = 0; r < n; ++r) out.vectors(r, c) = v(r, src);
    }
    return out;
}

}  // namespace cimbi
