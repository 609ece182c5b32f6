#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "robustqs/family.hpp"
#include "robustqs/lp.hpp"
#include "robustqs/market.hpp"
#include "robustqs/qs_vector.hpp"

namespace rqs {

/// Hard bound on the number of charged outcomes for exhaustive vertex work.
inline constexpr std::size_t vertex_outcome_cap = 12;

namespace pricing_detail {

/// One linear-program variable per (period, asset, information block); the
/// dense matrix g maps hedge variables to per-outcome terminal gains.
template <class T>
struct HedgeGrid {
    struct Var {
        std::size_t period;  // position held over (period, period+1]
        std::size_t asset;
        std::size_t block;
    };
    std::vector<Var> vars;
    std::vector<std::vector<T>> g;  // n x vars.size()

    static HedgeGrid build(const MarketModel<T>& model) {
        HedgeGrid grid;
        const std::size_t n = model.space->size();
        for (std::size_t k = 0; k < model.periods(); ++k)
            for (std::size_t j = 0; j < model.assets(); ++j)
                for (std::size_t b = 0; b < model.filtration.partitions[k].size(); ++b)
                    grid.vars.push_back({k, j, b});
        grid.g.assign(n, std::vector<T>(grid.vars.size(), T(0)));
        for (std::size_t v = 0; v < grid.vars.size(); ++v) {
            const auto& [k, j, b] = grid.vars[v];
            for (std::size_t i : model.filtration.partitions[k][b].indices())
                grid.g[i][v] = model.prices[k + 1][j][i] - model.prices[k][j][i];
        }
        return grid;
    }

    Strategy<T> to_strategy(const MarketModel<T>& model, const std::vector<T>& h) const {
        Strategy<T> s = Strategy<T>::zero(model.periods(), model.assets(), model.space->size());
        for (std::size_t v = 0; v < vars.size(); ++v) {
            const auto& [k, j, b] = vars[v];
            for (std::size_t i : model.filtration.partitions[k][b].indices())
                s.holdings[k][j][i] = h[v];
        }
        return s;
    }
};

template <class T>
void ensure_same_space(const MarketModel<T>& model, const PriorFamily<T>& family) {
    if (!(family.space() == *model.space))
        throw validation_error("prior family and market model live on different sample spaces");
}

template <class T>
bool strictly_positive(const T& v) {
    if constexpr (num<T>::exact)
        return v > T(0);
    else
        return v > num<T>::lp_tol;
}

} // namespace pricing_detail

template <class T>
struct ConeMembership {
    bool member = false;
    std::optional<Strategy<T>> witness;
};

/// Decides X <= gains(H) on the q.s. support for some predictable H via one
/// feasibility linear program; a member comes with a witnessing strategy.
template <class T>
ConeMembership<T> cone_membership(const MarketModel<T>& model, const PriorFamily<T>& family,
                                  const QsVector<T>& x) {
    ensure_valid(model);
    pricing_detail::ensure_same_space(model, family);
    auto grid = pricing_detail::HedgeGrid<T>::build(model);

    LinearProgram<T> lp;
    for (std::size_t v = 0; v < grid.vars.size(); ++v) lp.add_var();
    for (std::size_t i : family.qs_support().indices())
        lp.add_row(grid.g[i], LinearProgram<T>::Rel::ge, x.values()[i]);

    auto sol = lp_solve(lp);
    if (sol.status != LpStatus::optimal) return {};
    return {true, grid.to_strategy(model, sol.x)};
}

template <class T>
struct NaResult {
    bool arbitrage = false;
    std::optional<Strategy<T>> strategy;     // certificate on arbitrage
    std::optional<std::size_t> outcome;      // charged outcome with positive gain
};

/// No-arbitrage test. For each charged outcome w the cone is probed with
/// the normalized program {gains >= 0 on support, gains(w) >= 1}; any
/// feasible probe is an arbitrage certificate.
template <class T>
NaResult<T> na_check(const MarketModel<T>& model, const PriorFamily<T>& family) {
    ensure_valid(model);
    pricing_detail::ensure_same_space(model, family);
    auto grid = pricing_detail::HedgeGrid<T>::build(model);
    const auto& support = family.qs_support().indices();

    for (std::size_t target : support) {
        LinearProgram<T> lp;
        for (std::size_t v = 0; v < grid.vars.size(); ++v) lp.add_var();
        for (std::size_t i : support)
            lp.add_row(grid.g[i], LinearProgram<T>::Rel::ge, i == target ? T(1) : T(0));
        auto sol = lp_solve(lp);
        if (sol.status == LpStatus::optimal)
            return {true, grid.to_strategy(model, sol.x), target};
    }
    return {};
}

/// The set of martingale measures dominated by the capacity, as an exact
/// linear system over the charged outcomes: Q >= 0, total mass 1, and one
/// mass-weighted increment equality per (period, asset, information block).
/// Rows that vanish identically (including every block with no charged
/// outcome) are dropped.
template <class T>
struct MartingalePolytope {
    SpacePtr space;
    std::vector<std::size_t> columns;        // column -> outcome index
    std::vector<std::vector<T>> rows;        // equality coefficients over columns
    std::vector<T> rhs;
    bool empty = true;
    std::optional<std::vector<MeasureVector<T>>> vertices;

    /// Base feasibility program: Q >= 0 with all equality rows.
    LinearProgram<T> lp() const {
        LinearProgram<T> p;
        for (std::size_t c = 0; c < columns.size(); ++c) p.add_var(T(0));
        for (std::size_t r = 0; r < rows.size(); ++r)
            p.add_row(rows[r], LinearProgram<T>::Rel::eq, rhs[r]);
        return p;
    }

    MeasureVector<T> to_measure(const std::vector<T>& q) const {
        std::vector<T> masses(space->size(), T(0));
        for (std::size_t c = 0; c < columns.size(); ++c) masses[columns[c]] = q[c];
        return MeasureVector<T>(space, std::move(masses));
    }

    struct Opt {
        T value;
        MeasureVector<T> q;
    };

    /// Optimizes a per-outcome linear objective over the polytope. The
    /// polytope is bounded, so a nonempty instance always has an optimum.
    Opt extremal_expectation(const std::vector<T>& objective, bool maximize) const {
        LinearProgram<T> p = lp();
        p.sense = maximize ? LinearProgram<T>::Sense::maximize : LinearProgram<T>::Sense::minimize;
        for (std::size_t c = 0; c < columns.size(); ++c) p.objective[c] = objective.at(columns[c]);
        auto sol = SimplexSolver<T>().solve(p);
        if (sol.status != LpStatus::optimal)
            throw contract_error("martingale polytope optimization failed: " +
                                 std::string(to_string(sol.status)));
        return {sol.value, to_measure(sol.x)};
    }
};

namespace pricing_detail {

/// Row-reduces the augmented system in place, returning the rank; appends
/// to `inconsistent` when a zero row meets a nonzero right side.
template <class T>
std::size_t rref(std::vector<std::vector<T>>& a, std::vector<T>& b, const T& eps,
                 bool& inconsistent) {
    const std::size_t m = a.size();
    const std::size_t k = m == 0 ? 0 : a[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < k && rank < m; ++col) {
        std::size_t piv = m;
        T best(0);
        for (std::size_t i = rank; i < m; ++i) {
            T mag = num<T>::abs(a[i][col]);
            if (mag > eps && (piv == m || mag > best)) {
                piv = i;
                best = mag;
            }
        }
        if (piv == m) continue;
        std::swap(a[piv], a[rank]);
        std::swap(b[piv], b[rank]);
        const T inv = T(1) / a[rank][col];
        for (auto& v : a[rank]) v *= inv;
        b[rank] *= inv;
        a[rank][col] = T(1);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == rank) continue;
            const T f = a[i][col];
            if (f == T(0)) continue;
            for (std::size_t j = 0; j < k; ++j) a[i][j] -= f * a[rank][j];
            a[i][col] = T(0);
            b[i] -= f * b[rank];
        }
        ++rank;
    }
    inconsistent = false;
    for (std::size_t i = rank; i < m; ++i)
        if (num<T>::abs(b[i]) > eps) inconsistent = true;
    return rank;
}

/// Solves the square system a x = b by Gaussian elimination; nullopt when
/// the basis matrix is singular.
template <class T>
std::optional<std::vector<T>> solve_square(std::vector<std::vector<T>> a, std::vector<T> b,
                                           const T& eps) {
    const std::size_t r = a.size();
    for (std::size_t col = 0; col < r; ++col) {
        std::size_t piv = r;
        T best(0);
        for (std::size_t i = col; i < r; ++i) {
            T mag = num<T>::abs(a[i][col]);
            if (mag > eps && (piv == r || mag > best)) {
                piv = i;
                best = mag;
            }
        }
        if (piv == r) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        const T inv = T(1) / a[col][col];
        for (auto& v : a[col]) v *= inv;
        b[col] *= inv;
        for (std::size_t i = 0; i < r; ++i) {
            if (i == col) continue;
            const T f = a[i][col];
            if (f == T(0)) continue;
            for (std::size_t j = col; j < r; ++j) a[i][j] -= f * a[col][j];
            b[i] -= f * b[col];
        }
    }
    return b;
}

} // namespace pricing_detail

template <class T>
MartingalePolytope<T> martingale_polytope(const MarketModel<T>& model,
                                          const PriorFamily<T>& family,
                                          bool enumerate_vertices) {
    ensure_valid(model);
    pricing_detail::ensure_same_space(model, family);

    MartingalePolytope<T> poly;
    poly.space = model.space;
    poly.columns = family.qs_support().indices();
    const std::size_t k = poly.columns.size();

    std::vector<std::size_t> col_of(model.space->size(), k);
    for (std::size_t c = 0; c < k; ++c) col_of[poly.columns[c]] = c;

    poly.rows.push_back(std::vector<T>(k, T(1)));
    poly.rhs.push_back(T(1));
    for (std::size_t t = 0; t < model.periods(); ++t) {
        for (std::size_t j = 0; j < model.assets(); ++j) {
            for (const EventSet& block : model.filtration.partitions[t]) {
                std::vector<T> row(k, T(0));
                bool nonzero = false;
                for (std::size_t i : block.indices()) {
                    if (col_of[i] == k) continue;
                    const T d = model.prices[t + 1][j][i] - model.prices[t][j][i];
                    if (d == T(0)) continue;
                    row[col_of[i]] = d;
                    nonzero = true;
                }
                if (nonzero) {
                    poly.rows.push_back(std::move(row));
                    poly.rhs.push_back(T(0));
                }
            }
        }
    }

    poly.empty = lp_solve(poly.lp()).status != LpStatus::optimal;

    if (!enumerate_vertices) return poly;
    if (k > vertex_outcome_cap)
        throw size_error("vertex enumeration refused: " + std::to_string(k) +
                         " charged outcomes exceed the cap of " +
                         std::to_string(vertex_outcome_cap));

    std::vector<MeasureVector<T>> verts;
    if (!poly.empty) {
        const T eps = SimplexSolver<T>::default_eps();
        auto a = poly.rows;
        auto b = poly.rhs;
        bool inconsistent = false;
        const std::size_t rank = pricing_detail::rref(a, b, eps, inconsistent);
        if (inconsistent)
            throw contract_error("martingale system inconsistent after a feasible LP");
        a.resize(rank);
        b.resize(rank);

        std::vector<std::vector<T>> points;
        for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcountll(mask)) != rank) continue;
            std::vector<std::size_t> cols;
            for (std::size_t c = 0; c < k; ++c)
                if (mask & (std::size_t{1} << c)) cols.push_back(c);
            std::vector<std::vector<T>> ab(rank, std::vector<T>(rank));
            for (std::size_t i = 0; i < rank; ++i)
                for (std::size_t j = 0; j < rank; ++j) ab[i][j] = a[i][cols[j]];
            auto xb = pricing_detail::solve_square(ab, b, eps);
            if (!xb) continue;
            bool feasible = true;
            for (const T& v : *xb)
                if (v < -eps) {
                    feasible = false;
                    break;
                }
            if (!feasible) continue;
            std::vector<T> q(k, T(0));
            for (std::size_t j = 0; j < rank; ++j) q[cols[j]] = (*xb)[j] < T(0) ? T(0) : (*xb)[j];
            points.push_back(std::move(q));
        }
        std::sort(points.begin(), points.end());
        auto near = [&](const std::vector<T>& u, const std::vector<T>& v) {
            for (std::size_t c = 0; c < k; ++c)
                if (num<T>::abs(u[c] - v[c]) > eps) return false;
            return true;
        };
        points.erase(std::unique(points.begin(), points.end(), near), points.end());
        if (points.empty())
            throw contract_error("nonempty bounded polytope produced no basic feasible point");
        for (auto& q : points) verts.push_back(poly.to_measure(q));
    }
    poly.vertices = std::move(verts);
    return poly;
}

template <class T>
struct FtapReport {
    NaResult<T> na;
    bool polytope_equivalent = false;  // every charged outcome is charged by some member Q
    bool agree = false;                // no-arbitrage <=> equivalence; false is a defect
};

/// Runs the arbitrage test and, independently, the measure-side criterion:
/// the polytope is nonempty and max Q(w) > 0 for every charged outcome.
/// The two verdicts must agree; the flag is returned rather than asserted
/// so batch drivers can surface a defect loudly themselves.
template <class T>
FtapReport<T> ftap_check(const MarketModel<T>& model, const PriorFamily<T>& family) {
    FtapReport<T> report;
    report.na = na_check(model, family);

    auto poly = martingale_polytope(model, family, false);
    bool equivalent = !poly.empty;
    if (equivalent) {
        std::vector<T> indicator(model.space->size(), T(0));
        for (std::size_t i : family.qs_support().indices()) {
            std::fill(indicator.begin(), indicator.end(), T(0));
            indicator[i] = T(1);
            auto opt = poly.extremal_expectation(indicator, true);
            if (!pricing_detail::strictly_positive(opt.value)) {
                equivalent = false;
                break;
            }
        }
    }
    report.polytope_equivalent = equivalent;
    report.agree = (!report.na.arbitrage) == equivalent;
    return report;
}

template <class T>
struct SuperhedgeResult {
    T price{};                 // pi(X), the primal minimum
    Strategy<T> strategy;      // optimal hedge
    MeasureVector<T> dual;     // maximizing martingale measure
    T gap{};                   // primal - dual; exactly 0 in rational mode
    T lower_price{};           // -pi(-X); [lower_price, price] is the price interval
};

namespace pricing_detail {

/// min x over (x, H predictable) with x + gains(H) >= X on the support.
template <class T>
LpSolution<T> superhedge_primal(const MarketModel<T>& model, const PriorFamily<T>& family,
                                const HedgeGrid<T>& grid, const std::vector<T>& x_values) {
    LinearProgram<T> lp;
    lp.add_var(std::nullopt, std::nullopt, T(1));
    for (std::size_t v = 0; v < grid.vars.size(); ++v) lp.add_var();
    for (std::size_t i : family.qs_support().indices()) {
        std::vector<T> row;
        row.reserve(grid.vars.size() + 1);
        row.push_back(T(1));
        for (const T& c : grid.g[i]) row.push_back(c);
        lp.add_row(std::move(row), LinearProgram<T>::Rel::ge, x_values[i]);
    }
    auto sol = lp_solve(lp);
    if (sol.status != LpStatus::optimal)
        throw contract_error("superhedging primal " + std::string(to_string(sol.status)) +
                             " despite no-arbitrage");
    return sol;
}

} // namespace pricing_detail

/// Superhedging price with its exact dual. Primal: least initial capital
/// whose reachable wealth dominates X quasi-surely. Dual: largest E_Q[X]
/// over the martingale polytope. In rational mode a nonzero gap on either
/// X or -X is an internal defect and throws.
template <class T>
SuperhedgeResult<T> superhedge(const MarketModel<T>& model, const PriorFamily<T>& family,
                               const QsVector<T>& x) {
    ensure_valid(model);
    pricing_detail::ensure_same_space(model, family);
    auto na = na_check(model, family);
    if (na.arbitrage)
        throw arbitrage_error("superhedging price undefined: the model admits arbitrage at outcome " +
                              model.space->label(*na.outcome));

    auto grid = pricing_detail::HedgeGrid<T>::build(model);
    auto poly = martingale_polytope(model, family, false);
    if (poly.empty)
        throw contract_error("no martingale measure despite no-arbitrage");

    auto primal = pricing_detail::superhedge_primal(model, family, grid, x.values());
    auto dual = poly.extremal_expectation(x.values(), true);

    SuperhedgeResult<T> result{
        primal.value,
        grid.to_strategy(model, std::vector<T>(primal.x.begin() + 1, primal.x.end())),
        std::move(dual.q), T(0), T(0)};
    result.gap = primal.value - dual.value;
    if constexpr (num<T>::exact) {
        if (result.gap != T(0)) throw contract_error("nonzero superhedging duality gap");
    }

    std::vector<T> neg(x.values());
    for (auto& v : neg) v = -v;
    auto primal_neg = pricing_detail::superhedge_primal(model, family, grid, neg);
    result.lower_price = -primal_neg.value;
    if constexpr (num<T>::exact) {
        auto dual_min = poly.extremal_expectation(x.values(), false);
        if (result.lower_price != dual_min.value)
            throw contract_error("nonzero superhedging duality gap");
    }
    return result;
}

template <class T>
struct BipolarReport {
    bool member = false;           // X lies in the hedging cone
    T max_expectation{};           // max over polytope vertices of E_Q[X]
    bool dual_nonpositive = false; // max_expectation <= 0
    bool agree = false;
};

/// Finite-space bipolar identity: membership in the hedging cone must
/// coincide with E_Q[X] <= 0 at every martingale vertex.
template <class T>
BipolarReport<T> bipolar_check(const MarketModel<T>& model, const PriorFamily<T>& family,
                               const QsVector<T>& x) {
    auto na = na_check(model, family);
    if (na.arbitrage)
        throw arbitrage_error("bipolar identity undefined: the model admits arbitrage at outcome " +
                              model.space->label(*na.outcome));
    auto poly = martingale_polytope(model, family, true);
    if (poly.empty || !poly.vertices || poly.vertices->empty())
        throw contract_error("no martingale measure despite no-arbitrage");

    BipolarReport<T> report;
    report.member = cone_membership(model, family, x).member;
    bool first = true;
    for (const auto& q : *poly.vertices) {
        T e = q.integrate(x.values());
        if (first || e > report.max_expectation) report.max_expectation = e;
        first = false;
    }
    if constexpr (num<T>::exact)
        report.dual_nonpositive = report.max_expectation <= T(0);
    else
        report.dual_nonpositive = report.max_expectation <= num<T>::lp_tol;
    report.agree = report.member == report.dual_nonpositive;
    return report;
}

} // namespace rqs
