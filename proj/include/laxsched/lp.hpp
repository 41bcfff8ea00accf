#ifndef LAXSCHED_LP_HPP
#define LAXSCHED_LP_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace laxsched::lp {

/// maximize c.x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  x >= 0,
/// with b_eq >= 0 and b_le >= 0. Rows are dense.
struct Problem {
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    long pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's rule. Meant for the few
/// hundred variables the schedulability oracle produces.
class Simplex {
public:
    explicit Simplex(const Problem& p, double eps = 1e-10) : eps_(eps) {
        n_ = p.objective.size();
        m_eq_ = p.eq_rows.size();
        m_le_ = p.le_rows.size();
        m_ = m_eq_ + m_le_;
        cols_ = n_ + m_le_ + m_eq_;  // original | slacks | artificials
        width_ = cols_ + 1;
        t_.assign((m_ + 1) * width_, 0.0);
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_le_; ++i) {
            check_row(p.le_rows[i], p.le_rhs[i]);
            for (std::size_t j = 0; j < n_; ++j) at(i, j) = p.le_rows[i][j];
            at(i, n_ + i) = 1.0;
            at(i, cols_) = p.le_rhs[i];
            basis_[i] = n_ + i;
        }
        for (std::size_t e = 0; e < m_eq_; ++e) {
            const std::size_t i = m_le_ + e;
            check_row(p.eq_rows[e], p.eq_rhs[e]);
            for (std::size_t j = 0; j < n_; ++j) at(i, j) = p.eq_rows[e][j];
            at(i, n_ + m_le_ + e) = 1.0;
            at(i, cols_) = p.eq_rhs[e];
            basis_[i] = n_ + m_le_ + e;
        }
        objective_ = p.objective;
    }

    Solution solve() {
        Solution sol;
        // phase 1: maximize -sum(artificials)
        std::fill(obj_row(), obj_row() + width_, 0.0);
        for (std::size_t e = 0; e < m_eq_; ++e) obj(n_ + m_le_ + e) = 1.0;
        for (std::size_t i = m_le_; i < m_; ++i) subtract_row_from_obj(i, 1.0);
        if (!iterate(cols_, sol.pivots)) {
            throw std::logic_error("simplex: phase 1 cannot be unbounded");
        }
        if (obj(cols_) < -1e-9) {
            sol.status = Status::Infeasible;
            return sol;
        }
        drive_out_artificials(sol.pivots);

        // phase 2
        std::fill(obj_row(), obj_row() + width_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) obj(j) = -objective_[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const double coef = obj(basis_[i]);
            if (coef != 0.0) subtract_row_from_obj(i, coef);
        }
        if (!iterate(n_ + m_le_, sol.pivots)) {
            sol.status = Status::Unbounded;
            return sol;
        }
        sol.status = Status::Optimal;
        sol.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) sol.x[basis_[i]] = std::max(0.0, at(i, cols_));
        }
        sol.objective = 0.0;
        for (std::size_t j = 0; j < n_; ++j) sol.objective += objective_[j] * sol.x[j];
        return sol;
    }

private:
    void check_row(const std::vector<double>& row, double rhs) const {
        if (row.size() != n_) throw std::invalid_argument("simplex: row width mismatch");
        if (rhs < 0.0) throw std::invalid_argument("simplex: rhs must be >= 0");
    }

    double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
    double* obj_row() { return &t_[m_ * width_]; }
    double& obj(std::size_t c) { return t_[m_ * width_ + c]; }

    void subtract_row_from_obj(std::size_t r, double factor) {
        for (std::size_t c = 0; c < width_; ++c) obj(c) -= factor * at(r, c);
    }

    void pivot(std::size_t r, std::size_t c) {
        const double p = at(r, c);
        for (std::size_t j = 0; j < width_; ++j) at(r, j) /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = t_[i * width_ + c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) t_[i * width_ + j] -= f * at(r, j);
            t_[i * width_ + c] = 0.0;
        }
        basis_[r] = c;
    }

    /// Returns false if unbounded. Only columns < `allowed` may enter.
    bool iterate(std::size_t allowed, long& pivots) {
        for (;;) {
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (obj(j) < -eps_) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) return true;
            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a <= eps_) continue;
                const double ratio = at(i, cols_) / a;
                if (leave == m_ || ratio < best - 1e-12) {
                    best = ratio;
                    leave = i;
                } else if (ratio <= best + 1e-12 && basis_[i] < basis_[leave]) {
                    leave = i;
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
            if (++pivots > 1000000) throw std::runtime_error("simplex: pivot limit exceeded");
        }
    }

    void drive_out_artificials(long& pivots) {
        const std::size_t first_art = n_ + m_le_;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < first_art) continue;
            for (std::size_t j = 0; j < first_art; ++j) {
                if (std::abs(at(i, j)) > 1e-9) {
                    pivot(i, j);
                    ++pivots;
                    break;
                }
            }
            // a row with no eligible column is redundant; its artificial stays at 0
        }
    }

    double eps_;
    std::size_t n_ = 0, m_eq_ = 0, m_le_ = 0, m_ = 0, cols_ = 0, width_ = 0;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<double> objective_;
};

inline Solution solve(const Problem& p) { return Simplex(p).solve(); }

}  // namespace laxsched::lp

#endif
