#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustqs/extended.hpp"
#include "robustqs/lp.hpp"
#include "robustqs/risk.hpp"

namespace rqs {

template <class T>
struct PenaltyValue {
    MeasureVector<T> measure;
    ExtReal<T> value;  // sup of integral minus functional over the declared search set
};

template <class T>
struct ConjugateOptions {
    std::optional<T> box;        // payoff sup-norm radius M; default 8
    std::optional<T> grid_step;  // h; default 1/16, doubled until the grid fits eval_cap
    std::size_t eval_cap = 200000;
    std::vector<std::vector<T>> probe_payoffs;  // evaluated on top of the grid
};

namespace duality_detail {

/// Compositions of `mesh` into k nonnegative parts, i.e. C(mesh+k-1, k-1),
/// clamped at cap + 1 to avoid overflow.
inline std::size_t composition_count(std::size_t k, std::size_t mesh, std::size_t cap) {
    std::size_t count = 1;
    for (std::size_t i = 1; i < k; ++i) {
        count = count * (mesh + i) / i;  // exact: product of i consecutive over i!
        if (count > cap) return cap + 1;
    }
    return count;
}

template <class Emit>
void walk_compositions(std::size_t k, std::size_t mesh, std::vector<std::size_t>& parts,
                       std::size_t at, std::size_t left, Emit&& emit) {
    if (at + 1 == k) {
        parts[at] = left;
        emit(parts);
        return;
    }
    for (std::size_t take = 0; take <= left; ++take) {
        parts[at] = take;
        walk_compositions(k, mesh, parts, at + 1, left - take, emit);
    }
}

/// Barycentric grid on the simplex over the given outcomes, scaled to the
/// requested total mass. The mesh is halved until the point count fits.
template <class T>
std::vector<std::vector<T>> simplex_grid(std::size_t space_size,
                                         const std::vector<std::size_t>& outcomes,
                                         std::size_t mesh, std::size_t point_cap,
                                         const T& total_mass) {
    const std::size_t k = outcomes.size();
    while (mesh > 1 && composition_count(k, mesh, point_cap) > point_cap) mesh /= 2;
    std::vector<std::vector<T>> points;
    std::vector<std::size_t> parts(k, 0);
    walk_compositions(k, mesh, parts, 0, mesh, [&](const std::vector<std::size_t>& p) {
        std::vector<T> masses(space_size, T(0));
        for (std::size_t c = 0; c < k; ++c)
            masses[outcomes[c]] = total_mass * T(static_cast<long>(p[c])) /
                                  T(static_cast<long>(mesh));
        points.push_back(std::move(masses));
    });
    return points;
}

/// Membership of mu in the convex hull of the priors, decided exactly (up
/// to the float tolerance on the float path) by one feasibility program.
template <class T>
bool in_prior_hull(const std::vector<Prior<T>>& priors, const MeasureVector<T>& mu,
                   const std::vector<std::size_t>& support) {
    LinearProgram<T> lp;
    for (std::size_t i = 0; i < priors.size(); ++i) lp.add_var(T(0));
    {
        std::vector<T> row(priors.size(), T(1));
        lp.add_row(std::move(row), LinearProgram<T>::Rel::eq, T(1));
    }
    for (std::size_t i : support) {
        std::vector<T> row(priors.size());
        for (std::size_t p = 0; p < priors.size(); ++p) row[p] = priors[p].weight(i);
        lp.add_row(std::move(row), LinearProgram<T>::Rel::eq, mu.mass(i));
    }
    return lp_solve(lp).status == LpStatus::optimal;
}

} // namespace duality_detail

/// Convex conjugate sup_Y {integral of Y dmu - f(Y)} over the box grid
/// {-M, -M+h, ..., M}^support plus any probe payoffs: a certified lower
/// bound of the true conjugate. Sup-of-expectations functionals bypass the
/// grid entirely: their conjugate is 0 on the prior hull and +inf off it.
template <class T>
PenaltyValue<T> conjugate(const RiskFunctional<T>& f, const MeasureVector<T>& mu,
                          const ConjugateOptions<T>& opts = {}) {
    if (!f.family) throw validation_error("risk functional has no prior family");
    if (!mu.nonnegative()) throw validation_error("conjugate requires a nonnegative measure");
    if (!mu.dominated_by(*f.family))
        throw validation_error("measure charges a polar outcome");

    const auto& support = f.family->qs_support().indices();

    if (f.sup_of_expectations) {
        const bool member =
            duality_detail::in_prior_hull(*f.sup_of_expectations, mu, support);
        return {mu, member ? ExtReal<T>(T(0)) : ExtReal<T>::pos_inf()};
    }

    const T box = opts.box.value_or(T(8));
    T h = opts.grid_step.value_or(T(1) / T(16));
    if (!(box > T(0)) || !(h > T(0))) throw validation_error("box and grid step must be positive");

    auto axis_count = [&](const T& step) {
        std::size_t c = 1;
        T v = -box + step;
        while (!(v > box)) {
            ++c;
            v += step;
            if (c > opts.eval_cap) break;
        }
        return c;
    };
    auto total_points = [&](std::size_t per_axis) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (total > opts.eval_cap / per_axis + 1) return opts.eval_cap + 1;
            total *= per_axis;
        }
        return total;
    };
    while (total_points(axis_count(h)) > opts.eval_cap) h += h;

    bool any = false;
    T best(0);
    auto consider = [&](const std::vector<T>& y) {
        ExtReal<T> fy = f.evaluate(QsVector<T>(f.family, y));
        if (!fy.finite()) return;
        T g = mu.integrate(y) - fy.value();
        if (!any || g > best) best = g;
        any = true;
    };

    const std::size_t per_axis = axis_count(h);
    std::vector<std::size_t> odo(support.size(), 0);
    std::vector<T> y(f.family->space().size(), T(0));
    for (;;) {
        for (std::size_t c = 0; c < support.size(); ++c)
            y[support[c]] = -box + h * T(static_cast<long>(odo[c]));
        consider(y);
        std::size_t c = 0;
        while (c < odo.size() && ++odo[c] == per_axis) odo[c++] = 0;
        if (c == odo.size()) break;
    }
    for (const auto& probe : opts.probe_payoffs) consider(probe);

    if (!any) throw contract_error("conjugate search box contained no finite value");
    return {mu, ExtReal<T>(best)};
}

template <class T>
struct BidualOptions {
    std::size_t mesh = 16;        // barycentric resolution K; halved to fit point_cap
    std::size_t point_cap = 4096;
    std::optional<T> box;        // forwarded to the conjugate
    std::optional<T> grid_step;
    std::size_t eval_cap = 200000;
};

namespace duality_detail {

/// Search measures for the bidual suprema: barycentric grid (one copy per
/// mass level), outcome vertices, family priors, reduction priors, and the
/// functional's own suggested probes. Deduplicated.
template <class T>
std::vector<MeasureVector<T>> bidual_search_measures(const RiskFunctional<T>& f,
                                                     const QsVector<T>& x,
                                                     const BidualOptions<T>& opts,
                                                     bool probability_only) {
    const auto& support = f.family->qs_support().indices();
    const std::size_t n = f.family->space().size();

    std::vector<T> mass_levels{T(1)};
    if (!probability_only) {
        mass_levels = {T(0), T(1) / T(2), T(1), T(3) / T(2), T(2)};
    }
    std::vector<std::vector<T>> raw;
    for (const T& mass : mass_levels) {
        if (mass == T(0)) {
            raw.emplace_back(n, T(0));
            continue;
        }
        auto grid = simplex_grid(n, support, opts.mesh, opts.point_cap, mass);
        for (auto& g : grid) raw.push_back(std::move(g));
    }
    for (std::size_t i : support) {
        std::vector<T> v(n, T(0));
        v[i] = T(1);
        raw.push_back(std::move(v));
    }
    for (const auto& p : f.family->priors()) raw.push_back(p.weights());
    if (f.reduction_family)
        for (const auto& p : *f.reduction_family) raw.push_back(p.weights());
    if (f.probe_measures)
        for (const auto& m : f.probe_measures(x)) raw.push_back(m.masses());

    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

    std::vector<MeasureVector<T>> out;
    out.reserve(raw.size());
    for (auto& v : raw) out.emplace_back(f.family->space_ptr(), std::move(v));
    return out;
}

} // namespace duality_detail

/// Bidual of a convex monotone functional: max over the discretized measure
/// search space of integral minus conjugate. The payoff itself is always a
/// conjugate probe, which pins the result at or below f(X) (weak duality)
/// regardless of grid resolution; sup-of-expectations functionals recover
/// f(X) exactly because the family priors are search points and their
/// conjugate is the exact closed form.
template <class T>
T bidual_convex(const RiskFunctional<T>& f, const QsVector<T>& x,
                const BidualOptions<T>& opts = {}) {
    if (f.kind != RiskFunctional<T>::Kind::convex)
        throw contract_error("convex bidual applied to a functional not marked convex");

    ConjugateOptions<T> copts;
    copts.box = opts.box ? *opts.box : T(8) * std::max(T(1), qs_norm(x));
    copts.grid_step = opts.grid_step;
    copts.eval_cap = opts.eval_cap;
    copts.probe_payoffs = {x.values()};

    bool any = false;
    T best(0);
    for (const auto& mu :
         duality_detail::bidual_search_measures(f, x, opts, f.cash_additive)) {
        PenaltyValue<T> pv = conjugate(f, mu, copts);
        if (!pv.value.finite()) continue;
        T candidate = mu.integrate(x.values()) - pv.value.value();
        if (!any || candidate > best) best = candidate;
        any = true;
    }
    if (!any) throw contract_error("conjugate infinite on the whole search space");
    return best;
}

template <class T>
struct QuasiDualValue {
    T level;
    MeasureVector<T> measure;
    ExtReal<T> value;  // +inf marks an infeasible slice
};

template <class T>
struct QuasiROptions {
    std::optional<T> box;                 // M; default 8 * max(1, |t|+1, anchor norms+1)
    std::vector<T> eps_schedule;          // default {1, 1/2, ..., 2^-10}
    std::vector<std::vector<T>> anchors;  // payoffs shifted onto each slice (fallback path)
    std::size_t probe_budget = 32;
    std::uint64_t seed = 0;
};

namespace duality_detail {

/// Exact inner problem for sup-of-expectations f: minimize the envelope
/// max_P E_P[Y] over the box slice, as a linear program in (Y, s).
template <class T>
ExtReal<T> inner_slice_lp(const RiskFunctional<T>& f, const MeasureVector<T>& mu,
                          const T& level, const T& box) {
    const auto& support = f.family->qs_support().indices();
    const auto& priors = *f.sup_of_expectations;
    LinearProgram<T> lp;
    for (std::size_t c = 0; c < support.size(); ++c) lp.add_var(T(-box), box);
    const std::size_t s_var = lp.add_var(std::nullopt, std::nullopt, T(1));
    for (const auto& p : priors) {
        std::vector<T> row(lp.num_vars, T(0));
        for (std::size_t c = 0; c < support.size(); ++c) row[c] = p.weight(support[c]);
        row[s_var] = T(-1);
        lp.add_row(std::move(row), LinearProgram<T>::Rel::le, T(0));
    }
    {
        std::vector<T> row(lp.num_vars, T(0));
        for (std::size_t c = 0; c < support.size(); ++c) row[c] = mu.mass(support[c]);
        lp.add_row(std::move(row), LinearProgram<T>::Rel::eq, level);
    }
    auto sol = lp_solve(lp);
    if (sol.status == LpStatus::infeasible) return ExtReal<T>::pos_inf();
    if (sol.status != LpStatus::optimal)
        throw contract_error("bounded slice program reported unbounded");
    return ExtReal<T>(sol.value);
}

/// Fallback inner problem: minimum of f over slice probes (constants,
/// shifted anchors, randomized directions recentred onto the slice). An
/// upper bound of the true infimum, capped by every supplied anchor.
template <class T>
ExtReal<T> inner_slice_probes(const RiskFunctional<T>& f, const MeasureVector<T>& mu,
                              const T& level, const T& box, const QuasiROptions<T>& opts,
                              ProbeRng& rng) {
    const auto& support = f.family->qs_support().indices();
    const std::size_t n = f.family->space().size();
    std::vector<std::vector<T>> candidates;

    if (!(num<T>::abs(level) > box)) {
        std::vector<T> c(n, T(0));
        for (std::size_t i : support) c[i] = level;
        candidates.push_back(std::move(c));
    }
    auto recentre = [&](std::vector<T> y) {
        T integral(0);
        for (std::size_t i : support) integral += mu.mass(i) * y[i];
        const T shift = level - integral;
        for (std::size_t i : support) y[i] += shift;
        for (std::size_t i : support)
            if (num<T>::abs(y[i]) > box) return;  // outside the box: not a witness
        candidates.push_back(std::move(y));
    };
    for (const auto& anchor : opts.anchors) recentre(anchor);
    for (std::size_t k = 0; k < opts.probe_budget; ++k) {
        std::vector<T> y(n, T(0));
        for (std::size_t i : support) y[i] = T(static_cast<long>(rng.integer(8))) / T(2);
        recentre(std::move(y));
    }

    bool any = false;
    T best(0);
    for (const auto& y : candidates) {
        ExtReal<T> v = f.evaluate(QsVector<T>(f.family, y));
        if (!v.finite()) continue;
        if (!any || v.value() < best) best = v.value();
        any = true;
    }
    return any ? ExtReal<T>(best) : ExtReal<T>::pos_inf();
}

} // namespace duality_detail

/// Quasiconvex dual function R(t, mu) = sup over t' < t of the infimum of f
/// on the slice {integral of Y dmu = t', sup-norm <= M}. The outer sup runs
/// over the decreasing epsilon schedule; when the inner problem is solved
/// exactly (sup-of-expectations path) the final two samples are
/// extrapolated affinely, which lands between the sweep maximum and the
/// true left limit for convex inner values.
template <class T>
QuasiDualValue<T> quasi_R(const RiskFunctional<T>& f, const T& t, const MeasureVector<T>& mu,
                          const QuasiROptions<T>& opts = {}) {
    if (!f.family) throw validation_error("risk functional has no prior family");
    if (!mu.nonnegative()) throw validation_error("quasiconvex dual requires a nonnegative measure");
    if (!mu.dominated_by(*f.family)) throw validation_error("measure charges a polar outcome");
    {
        const T mass = mu.total_mass();
        if constexpr (num<T>::exact) {
            if (mass != T(1)) throw validation_error("measure must be normalized");
        } else {
            if (num<T>::abs(mass - T(1)) > num<T>::mass_tol)
                throw validation_error("measure must be normalized");
        }
    }

    T box;
    if (opts.box) {
        box = *opts.box;
    } else {
        box = std::max(T(1), num<T>::abs(t) + T(1));
        for (const auto& anchor : opts.anchors)
            for (const T& v : anchor) box = std::max(box, num<T>::abs(v) + T(1));
        box = T(8) * box;
    }

    std::vector<T> schedule = opts.eps_schedule;
    if (schedule.empty()) {
        T eps(1);
        for (int k = 0; k <= 10; ++k) {
            schedule.push_back(eps);
            eps /= T(2);
        }
    }

    const bool exact_inner = f.sup_of_expectations.has_value();
    ProbeRng rng(opts.seed);
    std::vector<ExtReal<T>> sweep;
    sweep.reserve(schedule.size());
    for (const T& eps : schedule) {
        const T level = t - eps;
        sweep.push_back(exact_inner
                            ? duality_detail::inner_slice_lp(f, mu, level, box)
                            : duality_detail::inner_slice_probes(f, mu, level, box, opts, rng));
    }

    QuasiDualValue<T> out{t, mu, ExtReal<T>::pos_inf()};
    bool any = false;
    T best(0);
    for (const auto& v : sweep) {
        if (!v.finite()) continue;
        if (!any || v.value() > best) best = v.value();
        any = true;
    }
    if (!any) return out;  // every slice missed the box: inf over empty set

    if (exact_inner && sweep.size() >= 2) {
        const auto& last = sweep[sweep.size() - 1];
        const auto& prev = sweep[sweep.size() - 2];
        if (last.finite() && prev.finite()) {
            const T extrapolated = last.value() + (last.value() - prev.value());
            if (extrapolated > best) best = extrapolated;
        }
    }
    out.value = ExtReal<T>(best);
    return out;
}

/// Quasiconvex bidual sup_P R(E_P[X], P) over the discretized probability
/// simplex. The payoff is passed down as the slice anchor, which keeps
/// every branch weakly below f(X).
template <class T>
T bidual_quasiconvex(const RiskFunctional<T>& f, const QsVector<T>& x,
                     const BidualOptions<T>& opts = {}, const QuasiROptions<T>& ropts_in = {}) {
    if (!f.monotone)
        throw contract_error("quasiconvex bidual requires a monotone functional");
    if (!f.reduction_family)
        throw contract_error("quasiconvex bidual requires a declared reduction family");

    QuasiROptions<T> ropts = ropts_in;
    ropts.anchors.push_back(x.values());
    if (!ropts.box) {
        ropts.box = T(8) * std::max(T(1), qs_norm(x) + T(1));
    }

    bool any = false;
    T best(0);
    for (const auto& mu : duality_detail::bidual_search_measures(f, x, opts, true)) {
        if (!num<T>::is_zero(mu.total_mass() - T(1))) continue;  // probability measures only
        const T level = mu.integrate(x.values());
        auto r = quasi_R(f, level, mu, ropts);
        if (!r.value.finite()) continue;
        if (!any || r.value.value() > best) best = r.value.value();
        any = true;
    }
    if (!any) throw contract_error("quasiconvex dual infeasible on the whole search space");
    return best;
}

} // namespace rqs
