#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robustqs/extended.hpp"
#include "robustqs/family.hpp"
#include "robustqs/lp.hpp"
#include "robustqs/qs_vector.hpp"

namespace rqs {

/// A risk functional on payoff classes. evaluate respects polar equivalence
/// by construction (QsVector inputs are canonical). The optional structural
/// fields unlock exact paths downstream: sup_of_expectations marks
/// f(X) = max_P E_P[X] over the listed priors (closed-form conjugate),
/// probe_measures suggests likely dual maximizers for a given payoff.
template <class T>
struct RiskFunctional {
    enum class Kind { convex, quasiconvex };

    FamilyPtr<T> family;
    std::function<ExtReal<T>(const QsVector<T>&)> evaluate;
    Kind kind = Kind::convex;
    bool cash_additive = false;
    bool monotone = false;
    std::optional<std::vector<Prior<T>>> reduction_family;
    std::optional<std::vector<Prior<T>>> sup_of_expectations;
    std::function<std::vector<MeasureVector<T>>(const QsVector<T>&)> probe_measures;
};

/// Per-prior building block: receives the prior and the payoff restricted
/// to that prior's support (ascending outcome order).
template <class T>
using PerPrior = std::function<T(const Prior<T>&, const std::vector<T>&)>;

/// f(X) = max over the reduction priors Q of f_Q(restriction of X to Q).
/// Functionals of this shape decide membership prior-by-prior, which is
/// exactly what sensitivity_check certifies.
template <class T>
RiskFunctional<T> build_sup_functional(FamilyPtr<T> family, std::vector<Prior<T>> priors,
                                       std::vector<PerPrior<T>> per_prior,
                                       typename RiskFunctional<T>::Kind kind,
                                       bool cash_additive, bool monotone) {
    if (!family) throw validation_error("sup functional needs a prior family");
    if (priors.empty()) throw validation_error("sup functional needs at least one prior");
    if (per_prior.size() != priors.size())
        throw validation_error("one per-prior functional is required per prior");
    for (const auto& q : priors) {
        if (!(q.space() == family->space()))
            throw validation_error("reduction prior lives on a different sample space");
        const EventSet q_supp = q.support();
        for (std::size_t i : q_supp.indices())
            if (!family->charged(i))
                throw domination_error("reduction prior charges the polar outcome '" +
                                       family->space().label(i) + "'");
    }

    RiskFunctional<T> f;
    f.family = family;
    f.kind = kind;
    f.cash_additive = cash_additive;
    f.monotone = monotone;
    f.reduction_family = priors;
    f.evaluate = [family, priors, per_prior](const QsVector<T>& x) -> ExtReal<T> {
        QsVector<T> canon(family, x.values());
        bool first = true;
        T best(0);
        for (std::size_t i = 0; i < priors.size(); ++i) {
            T v = per_prior[i](priors[i], restrict_to_prior(canon, priors[i]));
            if (first || v > best) best = v;
            first = false;
        }
        return ExtReal<T>(best);
    };
    return f;
}

namespace risk_detail {

template <class T>
PerPrior<T> expectation_block() {
    return [](const Prior<T>& p, const std::vector<T>& restricted) {
        const auto idx = p.support().indices();
        T e(0);
        for (std::size_t k = 0; k < idx.size(); ++k) e += p.weight(idx[k]) * restricted[k];
        return e;
    };
}

} // namespace risk_detail

/// Worst-case expectation over the whole family: the sublinear upper
/// envelope max_P E_P[X]. Exact in both arithmetic modes.
template <class T>
RiskFunctional<T> make_worst_case(FamilyPtr<T> family) {
    std::vector<Prior<T>> priors = family->priors();
    std::vector<PerPrior<T>> blocks(priors.size(), risk_detail::expectation_block<T>());
    auto f = build_sup_functional(family, priors, blocks, RiskFunctional<T>::Kind::convex, true, true);
    f.sup_of_expectations = std::move(priors);
    return f;
}

/// Plain expectation under the family's first prior.
template <class T>
RiskFunctional<T> make_expectation(FamilyPtr<T> family) {
    std::vector<Prior<T>> priors{family->priors().front()};
    std::vector<PerPrior<T>> blocks{risk_detail::expectation_block<T>()};
    auto f = build_sup_functional(family, priors, blocks, RiskFunctional<T>::Kind::convex, true, true);
    f.sup_of_expectations = std::move(priors);
    return f;
}

/// Robust entropic functional max_P log E_P[exp X]. Transcendental, so it
/// exists only on the float path; suggested dual probes are the per-prior
/// Gibbs tilts dmu/dP = exp(X)/E_P[exp X], the exact maximizers of the
/// bidual representation.
template <class T>
RiskFunctional<T> make_entropic(FamilyPtr<T> family) {
    if constexpr (num<T>::exact) {
        throw validation_error("the entropic functional is transcendental; use float mode");
    } else {
        std::vector<Prior<T>> priors = family->priors();
        std::vector<PerPrior<T>> blocks(
            priors.size(), [](const Prior<T>& p, const std::vector<T>& restricted) {
                const auto idx = p.support().indices();
                T acc(0);
                for (std::size_t k = 0; k < idx.size(); ++k)
                    acc += p.weight(idx[k]) * std::exp(restricted[k]);
                return std::log(acc);
            });
        auto f = build_sup_functional(family, priors, blocks, RiskFunctional<T>::Kind::convex,
                                      true, true);
        f.probe_measures = [family](const QsVector<T>& x) {
            std::vector<MeasureVector<T>> probes;
            for (const auto& p : family->priors()) {
                std::vector<T> masses(family->space().size(), T(0));
                T z(0);
                const EventSet p_supp = p.support();
                for (std::size_t i : p_supp.indices()) {
                    masses[i] = p.weight(i) * std::exp(x.values()[i]);
                    z += masses[i];
                }
                for (auto& m : masses) m /= z;
                probes.emplace_back(family->space_ptr(), std::move(masses));
            }
            return probes;
        };
        return f;
    }
}

/// Robust average value-at-risk at level alpha in (0, 1]: per prior, the
/// mass-weighted average of the upper alpha-tail of X (the Rockafellar-
/// Uryasev minimum over cash levels), then the worst case over priors.
/// alpha = 1 degenerates to the plain expectation.
template <class T>
RiskFunctional<T> make_avar(FamilyPtr<T> family, const T& alpha) {
    if (!(alpha > T(0)) || alpha > T(1))
        throw validation_error("average value-at-risk level must lie in (0, 1]");
    std::vector<Prior<T>> priors = family->priors();
    std::vector<PerPrior<T>> blocks(
        priors.size(), [alpha](const Prior<T>& p, const std::vector<T>& restricted) {
            const auto idx = p.support().indices();
            std::vector<std::size_t> order(idx.size());
            for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return restricted[b] < restricted[a];
            });
            T taken(0), acc(0);
            for (std::size_t k : order) {
                T slice = p.weight(idx[k]);
                if (taken + slice > alpha) slice = alpha - taken;
                acc += slice * restricted[k];
                taken += slice;
                if (!(taken < alpha)) break;
            }
            return acc / alpha;
        });
    return build_sup_functional(family, priors, blocks, RiskFunctional<T>::Kind::convex, true, true);
}

/// Named zoo used by the command layer.
template <class T>
RiskFunctional<T> make_functional(const std::string& name, FamilyPtr<T> family) {
    if (name == "worst_case") return make_worst_case(family);
    if (name == "expectation") return make_expectation(family);
    if (name == "entropic") return make_entropic(family);
    if (name == "avar") return make_avar(family, T(1) / T(2));
    throw usage_error("unknown risk functional '" + name +
                      "'; available: worst_case, expectation, entropic, avar");
}

enum class ContinuityMode { fatou, monotone };

struct ContinuityVerdict {
    bool pass = true;
    std::optional<std::size_t> witness;  // index of the failing element
    std::string detail;
};

/// Finite-space continuity checks against a declared q.s. limit.
///
/// fatou: distances to the limit must be nonincreasing (the convergence
/// certificate); then f(limit) may exceed the tail minimum of f(X_n) by at
/// most tol plus the residual tail distance. monotone: the sequence must be
/// q.s. nondecreasing and capped by the limit; f values must be
/// nondecreasing and land within tol plus the final residual of f(limit).
/// The residual compensation vanishes for sequences that reach the limit,
/// which is what convergence means on a finite support.
template <class T>
ContinuityVerdict continuity_checks(const RiskFunctional<T>& f,
                                    const std::vector<QsVector<T>>& sequence,
                                    const QsVector<T>& limit, ContinuityMode mode,
                                    T tol = default_tol<T>(),
                                    std::optional<T> bound = std::nullopt) {
    if (sequence.empty()) throw validation_error("continuity check needs a nonempty sequence");
    const std::size_t n = sequence.size();
    if (bound) {
        for (std::size_t i = 0; i < n; ++i)
            if (qs_norm(sequence[i]) > *bound)
                throw validation_error("sequence element " + std::to_string(i) +
                                       " exceeds the declared norm bound");
    }

    std::vector<T> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = qs_norm(sequence[i] - limit);

    if (mode == ContinuityMode::fatou) {
        for (std::size_t i = 1; i < n; ++i)
            if (dist[i] > dist[i - 1])
                throw validation_error(
                    "sequence does not converge to the declared limit: distance rises at index " +
                    std::to_string(i));
        const std::size_t tail = n / 2;
        T fx = f.evaluate(limit).value();
        bool first = true;
        T tail_min(0);
        std::size_t argmin = tail;
        for (std::size_t i = tail; i < n; ++i) {
            T v = f.evaluate(sequence[i]).value();
            if (first || v < tail_min) {
                tail_min = v;
                argmin = i;
            }
            first = false;
        }
        T residual(0);
        for (std::size_t i = tail; i < n; ++i)
            if (dist[i] > residual) residual = dist[i];
        if (fx > tail_min + tol + residual)
            return {false, argmin,
                    "limit value " + num<T>::str(fx) + " exceeds tail minimum " +
                        num<T>::str(tail_min) + " beyond tolerance"};
        return {};
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n && qs_compare(sequence[i], sequence[i + 1]) != Order::leq &&
            qs_compare(sequence[i], sequence[i + 1]) != Order::eq)
            throw validation_error("sequence is not q.s. nondecreasing at index " +
                                   std::to_string(i));
        auto cmp = qs_compare(sequence[i], limit);
        if (cmp != Order::leq && cmp != Order::eq)
            throw validation_error("sequence element " + std::to_string(i) +
                                   " is not dominated by the declared limit");
    }
    T prev(0);
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
        T v = f.evaluate(sequence[i]).value();
        if (!first && v + tol < prev)
            return {false, i, "functional values decrease along a nondecreasing sequence"};
        prev = v;
        first = false;
    }
    T fx = f.evaluate(limit).value();
    if (num<T>::abs(fx - prev) > tol + dist[n - 1])
        return {false, n - 1,
                "final value " + num<T>::str(prev) + " does not meet the limit value " +
                    num<T>::str(fx)};
    return {};
}

/// Membership oracle for sensitivity checking. The polytope form (every
/// inequality normal . X <= offset on the support) enables certification
/// and exact per-prior feasibility subproblems; without it only randomized
/// probing is possible.
template <class T>
struct MembershipOracle {
    std::function<bool(const QsVector<T>&)> contains;
    std::optional<std::vector<std::pair<std::vector<T>, T>>> half_spaces;  // (normal, offset)
};

template <class T>
MembershipOracle<T> polytope_oracle(FamilyPtr<T> family,
                                    std::vector<std::pair<std::vector<T>, T>> half_spaces) {
    MembershipOracle<T> oracle;
    auto shared = std::make_shared<std::vector<std::pair<std::vector<T>, T>>>(half_spaces);
    oracle.contains = [family, shared](const QsVector<T>& x) {
        QsVector<T> canon(family, x.values());
        for (const auto& [normal, offset] : *shared) {
            T dot(0);
            for (std::size_t i = 0; i < normal.size(); ++i) dot += normal[i] * canon.values()[i];
            if constexpr (num<T>::exact) {
                if (dot > offset) return false;
            } else {
                if (dot > offset + num<T>::lp_tol) return false;
            }
        }
        return true;
    };
    oracle.half_spaces = std::move(half_spaces);
    return oracle;
}

/// The zero level set {X : max_P E_P[X] <= 0} of a sup-of-expectations
/// functional, in polytope form.
template <class T>
MembershipOracle<T> level_set_oracle(const RiskFunctional<T>& f) {
    if (!f.sup_of_expectations)
        throw validation_error("level-set oracle requires a sup-of-expectations functional");
    std::vector<std::pair<std::vector<T>, T>> hs;
    for (const auto& p : *f.sup_of_expectations) hs.emplace_back(p.weights(), T(0));
    return polytope_oracle(f.family, std::move(hs));
}

enum class SensitivityVerdict { certified_ok, violation, no_violation_found };

inline const char* to_string(SensitivityVerdict v) {
    switch (v) {
        case SensitivityVerdict::certified_ok: return "certified_ok";
        case SensitivityVerdict::violation: return "violation";
        default: return "no_violation_found";
    }
}

template <class T>
struct SensitivityReport {
    SensitivityVerdict verdict = SensitivityVerdict::no_violation_found;
    std::optional<QsVector<T>> witness;
    std::string detail;
};

namespace risk_detail {

/// Is there Y in the polytope with Y = x on the prior's support? One
/// feasibility program per prior; Y ranges over the whole space with the
/// off-support coordinates pinned to the canonical zero.
template <class T>
bool patch_exists(const PriorFamily<T>& family,
                  const std::vector<std::pair<std::vector<T>, T>>& half_spaces,
                  const Prior<T>& q, const std::vector<T>& x) {
    const std::size_t n = family.space().size();
    LinearProgram<T> lp;
    for (std::size_t i = 0; i < n; ++i) lp.add_var();
    for (const auto& [normal, offset] : half_spaces)
        lp.add_row(normal, LinearProgram<T>::Rel::le, offset);
    for (std::size_t i = 0; i < n; ++i) {
        const bool pin_to_x = q.support().contains(i);
        if (!pin_to_x && family.charged(i)) continue;  // free coordinate
        std::vector<T> row(n, T(0));
        row[i] = T(1);
        lp.add_row(std::move(row), LinearProgram<T>::Rel::eq, pin_to_x ? x[i] : T(0));
    }
    return lp_solve(lp).status == LpStatus::optimal;
}

} // namespace risk_detail

/// Tests whether membership in A is decided prior-by-prior over the
/// reduction list: searches for X outside A that agrees, prior by prior,
/// with some member of A. certified_ok is the sufficient entailment
/// condition: every inequality's normal is supported inside a single
/// reduction prior's support. Without the polytope form the verdict can
/// never be stronger than no_violation_found.
template <class T>
SensitivityReport<T> sensitivity_check(FamilyPtr<T> family, const MembershipOracle<T>& oracle,
                                       const std::vector<Prior<T>>& reduction,
                                       std::size_t probe_budget = 64, std::uint64_t seed = 0) {
    if (reduction.empty()) throw validation_error("sensitivity check needs a reduction family");
    for (const auto& q : reduction) {
        const EventSet q_supp = q.support();
        for (std::size_t i : q_supp.indices())
            if (!family->charged(i))
                throw domination_error("reduction prior charges the polar outcome '" +
                                       family->space().label(i) + "'");
    }

    const std::size_t n = family->space().size();

    if (oracle.half_spaces) {
        bool all_entailed = true;
        for (const auto& [normal, offset] : *oracle.half_spaces) {
            (void)offset;
            bool entailed = false;
            for (const auto& q : reduction) {
                bool inside = true;
                for (std::size_t i = 0; i < n; ++i)
                    if (family->charged(i) && !num<T>::is_zero(normal[i]) &&
                        !q.support().contains(i)) {
                        inside = false;
                        break;
                    }
                if (inside) {
                    entailed = true;
                    break;
                }
            }
            if (!entailed) {
                all_entailed = false;
                break;
            }
        }
        if (all_entailed)
            return {SensitivityVerdict::certified_ok, std::nullopt,
                    "every inequality is decided inside one reduction prior's support"};
    }

    // Candidate payoffs: directions that violate one inequality, then
    // randomized probes on the support.
    std::vector<std::vector<T>> candidates;
    if (oracle.half_spaces) {
        for (const auto& [normal, offset] : *oracle.half_spaces) {
            T norm2(0);
            for (std::size_t i = 0; i < n; ++i)
                if (family->charged(i)) norm2 += normal[i] * normal[i];
            if (num<T>::is_zero(norm2)) continue;
            const T scale = (offset + T(1)) / norm2;
            std::vector<T> x(n, T(0));
            for (std::size_t i = 0; i < n; ++i)
                if (family->charged(i)) x[i] = scale * normal[i];
            candidates.push_back(std::move(x));
        }
    }
    ProbeRng rng(seed);
    for (std::size_t k = 0; k < probe_budget; ++k) {
        std::vector<T> x(n, T(0));
        for (std::size_t i = 0; i < n; ++i)
            if (family->charged(i))
                x[i] = T(static_cast<long>(rng.integer(8))) / T(4);
        candidates.push_back(std::move(x));
    }

    for (const auto& values : candidates) {
        QsVector<T> x(family, values);
        if (oracle.contains(x)) continue;
        bool patchable_everywhere = true;
        for (const auto& q : reduction) {
            bool found;
            if (oracle.half_spaces) {
                found = risk_detail::patch_exists(*family, *oracle.half_spaces, q, x.values());
            } else {
                found = false;
                for (std::size_t k = 0; k < probe_budget && !found; ++k) {
                    std::vector<T> y(n, T(0));
                    for (std::size_t i = 0; i < n; ++i) {
                        if (!family->charged(i)) continue;
                        y[i] = q.support().contains(i)
                                   ? x.values()[i]
                                   : T(static_cast<long>(rng.integer(8))) / T(4);
                    }
                    found = oracle.contains(QsVector<T>(family, std::move(y)));
                }
            }
            if (!found) {
                patchable_everywhere = false;
                break;
            }
        }
        if (patchable_everywhere)
            return {SensitivityVerdict::violation, x,
                    "payoff agrees with a member prior-by-prior yet lies outside the set"};
    }
    return {SensitivityVerdict::no_violation_found, std::nullopt,
            "probe budget exhausted without a counterexample"};
}

} // namespace rqs
