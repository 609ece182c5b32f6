#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "robustqs/errors.hpp"
#include "robustqs/numeric.hpp"

namespace rqs {

/// Dense linear program over the backend type T.
///
/// Variables carry optional bounds: a finite lower bound is shifted away,
/// an upper bound becomes an internal row, a variable free below is split.
/// The kernel runs in the same arithmetic as the model data so the duality
/// statements downstream can be asserted exactly.
template <class T>
struct LinearProgram {
    enum class Sense { minimize, maximize };
    enum class Rel { le, ge, eq };

    struct Row {
        std::vector<T> coeffs;  // dense, one per variable
        Rel rel;
        T rhs;
    };

    Sense sense = Sense::minimize;
    std::size_t num_vars = 0;
    std::vector<T> objective;
    std::vector<std::optional<T>> lower;  // nullopt = free below
    std::vector<std::optional<T>> upper;  // nullopt = free above
    std::vector<Row> rows;

    std::size_t add_var(std::optional<T> lo = std::nullopt, std::optional<T> hi = std::nullopt,
                        T cost = T(0)) {
        lower.push_back(std::move(lo));
        upper.push_back(std::move(hi));
        objective.push_back(std::move(cost));
        return num_vars++;
    }

    void add_row(std::vector<T> coeffs, Rel rel, T rhs) {
        rows.push_back(Row{std::move(coeffs), rel, std::move(rhs)});
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        default: return "unbounded";
    }
}

template <class T>
struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    T value{};
    std::vector<T> x;          // one per original variable
    std::vector<T> row_duals;  // one per original row, equality-form sign convention
};

namespace lp_detail {

/// Full dense tableau. The rc row holds reduced costs; obj holds the
/// negated objective value of the current basis (classic -z row).
template <class T>
struct Tableau {
    std::vector<std::vector<T>> a;
    std::vector<T> b;
    std::vector<T> rc;
    T obj{};
    std::vector<std::size_t> basis;
    T eps{};

    bool pos(const T& x) const { return x > eps; }
    bool neg(const T& x) const { return x < -eps; }

    void pivot(std::size_t pr, std::size_t pc) {
        const T inv = T(1) / a[pr][pc];
        for (auto& v : a[pr]) v *= inv;
        b[pr] *= inv;
        a[pr][pc] = T(1);  // kill residual rounding on the float path
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == pr) continue;
            const T f = a[i][pc];
            if (f == T(0)) continue;
            for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] -= f * a[pr][j];
            a[i][pc] = T(0);
            b[i] -= f * b[pr];
        }
        const T f = rc[pc];
        if (f != T(0)) {
            for (std::size_t j = 0; j < rc.size(); ++j) rc[j] -= f * a[pr][j];
            rc[pc] = T(0);
            obj -= f * b[pr];
        }
        basis[pr] = pc;
    }

    enum class Step { moved, optimal, unbounded };

    /// Bland's rule: lowest-index entering column, ratio ties broken by the
    /// lowest basic column index. Guarantees termination in exact mode.
    Step step(const std::vector<char>& enterable) {
        std::size_t enter = rc.size();
        for (std::size_t j = 0; j < rc.size(); ++j) {
            if (enterable[j] && neg(rc[j])) {
                enter = j;
                break;
            }
        }
        if (enter == rc.size()) return Step::optimal;

        std::size_t leave = a.size();
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!pos(a[i][enter])) continue;
            if (leave == a.size()) {
                leave = i;
                continue;
            }
            // b[i]/a[i][enter] vs b[leave]/a[leave][enter], cross-multiplied
            // over positive denominators.
            const T lhs = b[i] * a[leave][enter];
            const T rhs = b[leave] * a[i][enter];
            if (lhs < rhs || (lhs == rhs && basis[i] < basis[leave])) leave = i;
        }
        if (leave == a.size()) return Step::unbounded;
        pivot(leave, enter);
        return Step::moved;
    }
};

} // namespace lp_detail

/// Two-phase primal simplex. Exact with T = Rational (eps = 0, every optimum
/// cross-checked against a zero-gap dual certificate); tolerance-based with
/// T = double.
template <class T>
class SimplexSolver {
public:
    explicit SimplexSolver(T eps = default_eps()) : eps_(std::move(eps)) {}

    static T default_eps() {
        if constexpr (num<T>::exact)
            return T(0);
        else
            return num<T>::lp_tol;
    }

    LpSolution<T> solve(const LinearProgram<T>& lp) const;

private:
    T eps_;
};

template <class T>
LpSolution<T> SimplexSolver<T>::solve(const LinearProgram<T>& lp) const {
    using Rel = typename LinearProgram<T>::Rel;
    const std::size_t n = lp.num_vars;
    if (lp.objective.size() != n || lp.lower.size() != n || lp.upper.size() != n)
        throw validation_error("linear program arrays out of sync");
    for (const auto& row : lp.rows)
        if (row.coeffs.size() != n) throw validation_error("linear program row width mismatch");
    for (std::size_t j = 0; j < n; ++j)
        if (lp.lower[j] && lp.upper[j] && *lp.upper[j] < *lp.lower[j])
            return {LpStatus::infeasible, T(0), {}, {}};

    // Column layout per variable: shifted single column when a lower bound
    // exists, a split pair otherwise.
    struct VarMap {
        std::size_t col;
        std::size_t neg_col;  // valid when split
        bool split;
        T shift;
    };
    std::vector<VarMap> vmap(n);
    std::size_t ncols = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (lp.lower[j]) {
            vmap[j] = {ncols, 0, false, *lp.lower[j]};
            ncols += 1;
        } else {
            vmap[j] = {ncols, ncols + 1, true, T(0)};
            ncols += 2;
        }
    }

    const bool maximize = lp.sense == LinearProgram<T>::Sense::maximize;
    std::vector<T> cost(ncols, T(0));
    T cost_constant(0);
    for (std::size_t j = 0; j < n; ++j) {
        T c = lp.objective[j];
        if (maximize) c = -c;
        cost[vmap[j].col] += c;
        if (vmap[j].split) cost[vmap[j].neg_col] -= c;
        cost_constant += c * vmap[j].shift;
    }

    struct StdRow {
        std::vector<T> a;  // over std columns, pre-flip orientation
        T b;
        Rel rel;
        bool flipped = false;
        long origin;  // >= 0: original row index, -1: bound row
    };
    std::vector<StdRow> std_rows;
    auto expand = [&](const std::vector<T>& coeffs, Rel rel, const T& rhs, long origin) {
        StdRow r;
        r.a.assign(ncols, T(0));
        T b = rhs;
        for (std::size_t j = 0; j < n; ++j) {
            const T& c = coeffs[j];
            if (c == T(0)) continue;
            r.a[vmap[j].col] += c;
            if (vmap[j].split) r.a[vmap[j].neg_col] -= c;
            b -= c * vmap[j].shift;
        }
        r.b = std::move(b);
        r.rel = rel;
        r.origin = origin;
        std_rows.push_back(std::move(r));
    };
    for (std::size_t i = 0; i < lp.rows.size(); ++i)
        expand(lp.rows[i].coeffs, lp.rows[i].rel, lp.rows[i].rhs, static_cast<long>(i));
    for (std::size_t j = 0; j < n; ++j) {
        if (!lp.upper[j]) continue;
        std::vector<T> coeffs(n, T(0));
        coeffs[j] = T(1);
        expand(coeffs, Rel::le, *lp.upper[j], -1);
    }

    const std::size_t m = std_rows.size();
    std::size_t nslack = 0;
    for (const auto& r : std_rows)
        if (r.rel != Rel::eq) ++nslack;
    const std::size_t total = ncols + nslack + m;  // [vars | slacks | artificials]

    lp_detail::Tableau<T> tab;
    tab.eps = eps_;
    tab.a.assign(m, std::vector<T>(total, T(0)));
    tab.b.assign(m, T(0));
    tab.basis.assign(m, 0);

    std::size_t slack_at = ncols;
    for (std::size_t i = 0; i < m; ++i) {
        auto& r = std_rows[i];
        for (std::size_t j = 0; j < ncols; ++j) tab.a[i][j] = r.a[j];
        if (r.rel == Rel::le)
            tab.a[i][slack_at++] = T(1);
        else if (r.rel == Rel::ge)
            tab.a[i][slack_at++] = T(-1);
        tab.b[i] = r.b;
        if (tab.b[i] < T(0)) {
            for (auto& v : tab.a[i]) v = -v;
            tab.b[i] = -tab.b[i];
            r.flipped = true;
        }
        tab.a[i][ncols + nslack + i] = T(1);
        tab.basis[i] = ncols + nslack + i;
    }

    const std::size_t max_pivots = 1000 + 50 * (m + total);
    std::vector<char> enterable(total, 1);
    auto run = [&](const char* phase) {
        for (std::size_t k = 0;; ++k) {
            if (k > max_pivots)
                throw contract_error(std::string("simplex failed to terminate in ") + phase);
            auto s = tab.step(enterable);
            if (s == lp_detail::Tableau<T>::Step::optimal) return true;
            if (s == lp_detail::Tableau<T>::Step::unbounded) return false;
        }
    };

    // Phase 1: minimize the artificial mass. Bounded below by zero, so an
    // unbounded report here is a kernel defect.
    tab.rc.assign(total, T(0));
    tab.obj = T(0);
    for (std::size_t j = 0; j < total; ++j) {
        T s(0);
        for (std::size_t i = 0; i < m; ++i) s += tab.a[i][j];
        tab.rc[j] = (j >= ncols + nslack ? T(1) : T(0)) - s;
    }
    for (std::size_t i = 0; i < m; ++i) tab.obj -= tab.b[i];

    if (!run("phase 1")) throw contract_error("phase-1 objective unbounded");
    if (-tab.obj > eps_) return {LpStatus::infeasible, T(0), {}, {}};

    // Drive leftover artificials out of the basis; they sit at level zero,
    // so any nonzero real entry is a valid (degenerate) pivot. A row with
    // none is redundant and keeps its artificial pinned at zero.
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basis[i] < ncols + nslack) continue;
        for (std::size_t j = 0; j < ncols + nslack; ++j) {
            if (tab.pos(tab.a[i][j]) || tab.neg(tab.a[i][j])) {
                tab.pivot(i, j);
                break;
            }
        }
    }

    // Phase 2: real objective, artificial columns barred from entering.
    for (std::size_t j = ncols + nslack; j < total; ++j) enterable[j] = 0;
    {
        std::vector<T> cb(m, T(0));
        for (std::size_t i = 0; i < m; ++i)
            if (tab.basis[i] < ncols) cb[i] = cost[tab.basis[i]];
        tab.rc.assign(total, T(0));
        tab.obj = T(0);
        for (std::size_t j = 0; j < total; ++j) {
            T s(0);
            for (std::size_t i = 0; i < m; ++i)
                if (cb[i] != T(0)) s += cb[i] * tab.a[i][j];
            tab.rc[j] = (j < ncols ? cost[j] : T(0)) - s;
        }
        for (std::size_t i = 0; i < m; ++i) tab.obj -= cb[i] * tab.b[i];
    }

    if (!run("phase 2")) return {LpStatus::unbounded, T(0), {}, {}};

    const T std_value = -tab.obj;

    std::vector<T> z(total, T(0));
    for (std::size_t i = 0; i < m; ++i) z[tab.basis[i]] = tab.b[i];
    LpSolution<T> sol;
    sol.status = LpStatus::optimal;
    sol.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        T v = z[vmap[j].col];
        if (vmap[j].split) v -= z[vmap[j].neg_col];
        sol.x[j] = v + vmap[j].shift;
    }
    const T min_value = std_value + cost_constant;
    sol.value = maximize ? T(-min_value) : min_value;

    // Duals of the original rows, read off the artificial reduced costs
    // (phase-2 cost 0, so rc = -y for each equality row of the tableau).
    sol.row_duals.assign(lp.rows.size(), T(0));
    for (std::size_t i = 0; i < m; ++i) {
        if (std_rows[i].origin < 0) continue;
        T y = -tab.rc[ncols + nslack + i];
        if (std_rows[i].flipped) y = -y;
        if (maximize) y = -y;
        sol.row_duals[static_cast<std::size_t>(std_rows[i].origin)] = y;
    }

    if constexpr (num<T>::exact) {
        // Zero-gap certificate, recomputed against the pre-pivot rows so it
        // is independent of the tableau history. Any failure is a defect.
        std::vector<T> y(m, T(0));
        for (std::size_t i = 0; i < m; ++i) y[i] = -tab.rc[ncols + nslack + i];
        std::vector<std::vector<T>> a0(m, std::vector<T>(ncols + nslack, T(0)));
        std::vector<T> b0(m, T(0));
        std::size_t sl = ncols;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& r = std_rows[i];
            const T sgn = r.flipped ? T(-1) : T(1);
            for (std::size_t j = 0; j < ncols; ++j) a0[i][j] = sgn * r.a[j];
            if (r.rel != Rel::eq) a0[i][sl++] = sgn * (r.rel == Rel::le ? T(1) : T(-1));
            b0[i] = sgn * r.b;
        }
        T dual_value(0);
        for (std::size_t i = 0; i < m; ++i) dual_value += y[i] * b0[i];
        if (dual_value != std_value)
            throw contract_error("simplex certificate: nonzero duality gap");
        for (std::size_t j = 0; j < ncols + nslack; ++j) {
            T yta(0);
            for (std::size_t i = 0; i < m; ++i)
                if (y[i] != T(0)) yta += y[i] * a0[i][j];
            const T cj = j < ncols ? cost[j] : T(0);
            if (yta > cj) throw contract_error("simplex certificate: dual infeasibility");
        }
    }
    return sol;
}

/// Convenience wrapper with the backend default tolerance.
template <class T>
LpSolution<T> lp_solve(const LinearProgram<T>& lp) {
    return SimplexSolver<T>().solve(lp);
}

} // namespace rqs
