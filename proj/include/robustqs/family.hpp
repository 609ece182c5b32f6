#pragma once

#include <memory>
#include <string>
#include <vector>

#include "robustqs/numeric.hpp"
#include "robustqs/space.hpp"

namespace rqs {

/// A probability vector over the outcomes of a finite sample space.
template <class T>
class Prior {
public:
    Prior(SpacePtr space, std::vector<T> weights)
        : space_(std::move(space)), weights_(std::move(weights)) {
        if (!space_) throw validation_error("prior needs a sample space");
        if (weights_.size() != space_->size())
            throw validation_error("prior has " + std::to_string(weights_.size()) +
                                   " weights for " + std::to_string(space_->size()) + " outcomes");
        T sum(0);
        for (const T& w : weights_) {
            if (w < T(0)) throw validation_error("negative prior weight");
            sum += w;
        }
        if constexpr (num<T>::exact) {
            if (sum != T(1)) throw validation_error("prior weights must sum to 1, got " + num<T>::str(sum));
        } else {
            if (num<T>::abs(sum - T(1)) > num<T>::mass_tol)
                throw validation_error("prior weights must sum to 1, got " + num<T>::str(sum));
        }
    }

    const SampleSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const std::vector<T>& weights() const { return weights_; }
    const T& weight(std::size_t i) const { return weights_.at(i); }

    /// Outcomes carrying non-zero mass (mode-dependent zero test).
    EventSet support() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < weights_.size(); ++i)
            if (!num<T>::is_zero(weights_[i])) idx.push_back(i);
        return EventSet::of_indices(std::move(idx), space_->size());
    }

    T probability(const EventSet& event) const {
        T p(0);
        for (auto i : event.indices()) p += weights_.at(i);
        return p;
    }

    /// E_P[f] for a pointwise-given f.
    T expectation(const std::vector<T>& values) const {
        if (values.size() != weights_.size()) throw validation_error("dimension mismatch in expectation");
        T e(0);
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!num<T>::is_zero(weights_[i])) e += weights_[i] * values[i];
        return e;
    }

    bool operator==(const Prior& o) const { return weights_ == o.weights_; }

private:
    SpacePtr space_;
    std::vector<T> weights_;
};

/// A nonempty family of priors over one sample space. The family fixes
/// the quasi-sure structure: an event is polar iff no member charges it,
/// and the q.s. support is the union of the member supports.
template <class T>
class PriorFamily {
public:
    PriorFamily(SpacePtr space, std::vector<Prior<T>> priors)
        : space_(std::move(space)), priors_(std::move(priors)) {
        if (!space_) throw validation_error("prior family needs a sample space");
        if (priors_.empty()) throw validation_error("prior family must contain at least one prior");
        support_mask_.assign(space_->size(), 0);
        for (const auto& p : priors_) {
            if (!(p.space() == *space_))
                throw validation_error("prior defined on a different sample space");
            for (std::size_t i = 0; i < space_->size(); ++i)
                if (!num<T>::is_zero(p.weight(i))) support_mask_[i] = 1;
        }
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < support_mask_.size(); ++i)
            if (support_mask_[i]) idx.push_back(i);
        qs_support_ = EventSet::of_indices(std::move(idx), space_->size());
    }

    const SampleSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const std::vector<Prior<T>>& priors() const { return priors_; }
    std::size_t size() const { return priors_.size(); }

    const EventSet& qs_support() const { return qs_support_; }
    bool charged(std::size_t outcome) const { return support_mask_.at(outcome) != 0; }

    EventSet polar_atoms() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < support_mask_.size(); ++i)
            if (!support_mask_[i]) idx.push_back(i);
        return EventSet::of_indices(std::move(idx), space_->size());
    }

    bool is_polar(const EventSet& event) const { return event.intersect(qs_support_).empty(); }

private:
    SpacePtr space_;
    std::vector<Prior<T>> priors_;
    EventSet qs_support_;
    std::vector<char> support_mask_;
};

template <class T>
using FamilyPtr = std::shared_ptr<const PriorFamily<T>>;

/// c(A) = max_P P(A). Zero exactly on polar events.
template <class T>
T capacity(const PriorFamily<T>& family, const EventSet& event) {
    if (!event.empty() && event.indices().back() >= family.space().size())
        throw validation_error("event refers to an outcome outside the space");
    T best(0);
    for (const auto& p : family.priors()) {
        T v = p.probability(event);
        if (v > best) best = v;
    }
    return best;
}

template <class T>
struct PolarSplit {
    EventSet qs_support;
    EventSet polar_atoms;
};

template <class T>
PolarSplit<T> polar_analysis(const PriorFamily<T>& family) {
    return {family.qs_support(), family.polar_atoms()};
}

/// Dominance between families reduces to support inclusion on a finite
/// space: F2 << F1 iff every F1-polar event is F2-polar iff supp(F2) is
/// contained in supp(F1).
enum class FamilyOrder {
    equivalent,
    second_dominated,  // F2 << F1 strictly
    first_dominated,   // F1 << F2 strictly
    neither,
};

inline const char* to_string(FamilyOrder o) {
    switch (o) {
        case FamilyOrder::equivalent: return "equivalent";
        case FamilyOrder::second_dominated: return "second_dominated_by_first";
        case FamilyOrder::first_dominated: return "first_dominated_by_second";
        default: return "neither";
    }
}

template <class T>
FamilyOrder family_dominance(const PriorFamily<T>& f1, const PriorFamily<T>& f2) {
    if (!(f1.space() == f2.space())) throw validation_error("families live on different sample spaces");
    const bool two_below = f2.qs_support().subset_of(f1.qs_support());
    const bool one_below = f1.qs_support().subset_of(f2.qs_support());
    if (two_below && one_below) return FamilyOrder::equivalent;
    if (two_below) return FamilyOrder::second_dominated;
    if (one_below) return FamilyOrder::first_dominated;
    return FamilyOrder::neither;
}

template <class T>
struct ReducedFamily {
    PriorFamily<T> family;
    std::vector<std::size_t> picked;  // indices into the original prior list, ascending
};

/// Equivalent sub-family by greedy cover: repeatedly take the prior that
/// charges the most not-yet-covered support outcomes, ties broken by the
/// lowest prior index. At most |qs_support| priors survive.
template <class T>
ReducedFamily<T> reduce_family(const PriorFamily<T>& family) {
    const std::size_t n = family.space().size();
    std::vector<char> uncovered(n, 0);
    for (auto i : family.qs_support().indices()) uncovered[i] = 1;
    std::size_t left = family.qs_support().size();

    std::vector<EventSet> supports;
    supports.reserve(family.size());
    for (const auto& p : family.priors()) supports.push_back(p.support());

    std::vector<std::size_t> picked;
    while (left > 0) {
        std::size_t best = 0, best_count = 0;
        for (std::size_t i = 0; i < supports.size(); ++i) {
            std::size_t count = 0;
            for (auto w : supports[i].indices())
                if (uncovered[w]) ++count;
            if (count > best_count) {
                best_count = count;
                best = i;
            }
        }
        picked.push_back(best);
        for (auto w : supports[best].indices()) {
            if (uncovered[w]) {
                uncovered[w] = 0;
                --left;
            }
        }
    }
    std::sort(picked.begin(), picked.end());

    std::vector<Prior<T>> kept;
    kept.reserve(picked.size());
    for (auto i : picked) kept.push_back(family.priors()[i]);
    return {PriorFamily<T>(family.space_ptr(), std::move(kept)), std::move(picked)};
}

template <class T>
struct CapacityChainReport {
    std::vector<T> capacities;  // one per chain element, in order
    T limit;                    // terminal value, always 0 on a finite space
    bool monotone;              // capacities nonincreasing along the chain
};

/// Capacity along a decreasing chain of events ending at the empty set.
/// On a finite space the terminal value is always 0; the operation exists
/// as a continuity diagnostic and validates user-supplied chains.
template <class T>
CapacityChainReport<T> capacity_continuity(const PriorFamily<T>& family,
                                           const std::vector<EventSet>& chain) {
    if (chain.empty()) throw validation_error("empty chain");
    if (!chain.back().empty()) throw validation_error("chain must end at the empty set");
    for (std::size_t k = 0; k + 1 < chain.size(); ++k)
        if (!chain[k + 1].strict_subset_of(chain[k]))
            throw validation_error("chain is not strictly decreasing at step " + std::to_string(k + 1));

    CapacityChainReport<T> report;
    report.monotone = true;
    for (const auto& event : chain) {
        T c = capacity(family, event);
        if (!report.capacities.empty() && c > report.capacities.back()) report.monotone = false;
        report.capacities.push_back(std::move(c));
    }
    report.limit = report.capacities.back();
    if (!num<T>::is_zero(report.limit))
        throw contract_error("capacity did not vanish at the empty set");
    return report;
}

} // namespace rqs
