#include "ncdp/linalg/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace ncdp::linalg {

Rational to_rational(double x) {
    if (!std::isfinite(x)) throw std::domain_error("to_rational: non-finite value");
    Rational r(x);
    r.canonicalize();
    return r;
}

RVec to_rational(const std::vector<double>& x) {
    RVec out;
    out.reserve(x.size());
    for (double v : x) out.push_back(to_rational(v));
    return out;
}

std::vector<double> to_double(const RVec& x) {
    std::vector<double> out;
    out.reserve(x.size());
    for (const auto& v : x) out.push_back(v.get_d());
    return out;
}

namespace {

// Dense simplex tableau for: maximize w.y subject to T y = rhs, y >= 0.
class Tableau {
public:
    Tableau(RMat rows, RVec rhs, std::vector<std::size_t> basis)
        : t_(std::move(rows)), rhs_(std::move(rhs)), basis_(std::move(basis)) {}

    // Returns false if unbounded. `allowed` masks columns that may enter.
    bool optimize(const RVec& w, const std::vector<bool>& allowed) {
        const std::size_t m = t_.size();
        const std::size_t n = w.size();
        for (;;) {
            // Bland: smallest-index column with positive reduced cost.
            std::size_t enter = n;
            for (std::size_t j = 0; j < n && enter == n; ++j) {
                if (!allowed[j]) continue;
                Rational r = w[j];
                for (std::size_t i = 0; i < m; ++i) {
                    if (sgn(t_[i][j]) != 0) r -= w[basis_[i]] * t_[i][j];
                }
                if (sgn(r) > 0) enter = j;
            }
            if (enter == n) return true;
            std::size_t leave = m;
            Rational best;
            for (std::size_t i = 0; i < m; ++i) {
                if (sgn(t_[i][enter]) <= 0) continue;
                Rational ratio = rhs_[i] / t_[i][enter];
                if (leave == m || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == m) return false;
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        const Rational p = t_[r][c];
        for (auto& v : t_[r]) v /= p;
        rhs_[r] /= p;
        for (std::size_t i = 0; i < t_.size(); ++i) {
            if (i == r || sgn(t_[i][c]) == 0) continue;
            const Rational f = t_[i][c];
            for (std::size_t j = 0; j < t_[i].size(); ++j) {
                if (sgn(t_[r][j]) != 0) t_[i][j] -= f * t_[r][j];
            }
            rhs_[i] -= f * rhs_[r];
        }
        basis_[r] = c;
    }

    void drop_row(std::size_t r) {
        t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r));
        rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    }

    [[nodiscard]] RVec solution(std::size_t n) const {
        RVec y(n);
        for (std::size_t i = 0; i < basis_.size(); ++i) y[basis_[i]] = rhs_[i];
        return y;
    }

    RMat t_;
    RVec rhs_;
    std::vector<std::size_t> basis_;
};

}  // namespace

LpResult maximize(const LinearProgram& lp, const RVec& c) {
    const std::size_t n = lp.dim;
    const std::size_t m = lp.rows.size();
    if (c.size() != n) throw std::invalid_argument("maximize: objective dimension mismatch");
    std::size_t slacks = 0;
    for (const auto& r : lp.rows) {
        if (r.a.size() != n) throw std::invalid_argument("maximize: row dimension mismatch");
        if (r.rel != Relation::Equal) ++slacks;
    }
    const std::size_t n_struct = 2 * n;
    const std::size_t art0 = n_struct + slacks;
    const std::size_t total = art0 + m;

    RMat rows(m, RVec(total));
    RVec rhs(m);
    std::vector<std::size_t> basis(m);
    std::size_t s = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = lp.rows[i];
        for (std::size_t j = 0; j < n; ++j) {
            rows[i][2 * j] = r.a[j];
            rows[i][2 * j + 1] = -r.a[j];
        }
        if (r.rel == Relation::LessEq) rows[i][n_struct + s++] = 1;
        if (r.rel == Relation::GreaterEq) rows[i][n_struct + s++] = -1;
        rhs[i] = r.b;
        if (sgn(rhs[i]) < 0) {
            for (auto& v : rows[i]) v = -v;
            rhs[i] = -rhs[i];
        }
        rows[i][art0 + i] = 1;
        basis[i] = art0 + i;
    }

    Tableau tab(std::move(rows), std::move(rhs), std::move(basis));

    // Phase I: maximize -(sum of artificials).
    RVec w1(total);
    for (std::size_t i = 0; i < m; ++i) w1[art0 + i] = -1;
    std::vector<bool> all(total, true);
    tab.optimize(w1, all);
    Rational infeas;
    for (std::size_t i = 0; i < tab.basis_.size(); ++i) {
        if (tab.basis_[i] >= art0) infeas += tab.rhs_[i];
    }
    LpResult res;
    if (sgn(infeas) > 0) {
        res.status = LpStatus::Infeasible;
        return res;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for (std::size_t i = 0; i < tab.basis_.size();) {
        if (tab.basis_[i] < art0) {
            ++i;
            continue;
        }
        std::size_t col = art0;
        for (std::size_t j = 0; j < art0; ++j) {
            if (sgn(tab.t_[i][j]) != 0) {
                col = j;
                break;
            }
        }
        if (col == art0) {
            tab.drop_row(i);
        } else {
            tab.pivot(i, col);
            ++i;
        }
    }

    RVec w2(total);
    for (std::size_t j = 0; j < n; ++j) {
        w2[2 * j] = c[j];
        w2[2 * j + 1] = -c[j];
    }
    std::vector<bool> allowed(total, true);
    for (std::size_t j = art0; j < total; ++j) allowed[j] = false;
    const bool bounded = tab.optimize(w2, allowed);

    const RVec y = tab.solution(total);
    res.x.assign(n, Rational(0));
    for (std::size_t j = 0; j < n; ++j) res.x[j] = y[2 * j] - y[2 * j + 1];
    res.status = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
    for (std::size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
    return res;
}

std::optional<RVec> find_feasible(const LinearProgram& lp) {
    LpResult r = maximize(lp, RVec(lp.dim));
    if (r.status == LpStatus::Infeasible) return std::nullopt;
    return r.x;
}

std::vector<std::size_t> rref(RMat& A, std::size_t cols) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t c = 0; c < cols && row < A.size(); ++c) {
        std::size_t p = row;
        while (p < A.size() && sgn(A[p][c]) == 0) ++p;
        if (p == A.size()) continue;
        std::swap(A[p], A[row]);
        const Rational inv = 1 / A[row][c];
        for (auto& v : A[row]) v *= inv;
        for (std::size_t i = 0; i < A.size(); ++i) {
            if (i == row || sgn(A[i][c]) == 0) continue;
            const Rational f = A[i][c];
            for (std::size_t j = 0; j < cols; ++j) A[i][j] -= f * A[row][j];
        }
        pivots.push_back(c);
        ++row;
    }
    return pivots;
}

RMat null_space(const RMat& A, std::size_t cols) {
    RMat R = A;
    for (const auto& r : R) {
        if (r.size() != cols) throw std::invalid_argument("null_space: ragged matrix");
    }
    const auto piv = rref(R, cols);
    std::vector<bool> is_pivot(cols, false);
    for (auto p : piv) is_pivot[p] = true;
    RMat basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        RVec v(cols);
        v[f] = 1;
        for (std::size_t k = 0; k < piv.size(); ++k) v[piv[k]] = -R[k][f];
        for (const auto& x : v) {
            if (sgn(x) == 0) continue;
            if (sgn(x) < 0) {
                for (auto& y : v) y = -y;
            }
            break;
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace ncdp::linalg
