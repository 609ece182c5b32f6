#pragma once

#include <vector>

#include "robustqs/family.hpp"

namespace rqs {

/// A random variable over the outcomes, identified up to polar sets of
/// its prior family. Construction canonicalizes: values at polar
/// outcomes are overwritten with 0, so equality of equivalence classes
/// is plain vector equality.
template <class T>
class QsVector {
public:
    QsVector(FamilyPtr<T> family, std::vector<T> values)
        : family_(std::move(family)), values_(std::move(values)) {
        if (!family_) throw validation_error("qs vector needs a prior family");
        if (values_.size() != family_->space().size())
            throw validation_error("qs vector has " + std::to_string(values_.size()) +
                                   " entries for " + std::to_string(family_->space().size()) +
                                   " outcomes");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!family_->charged(i)) values_[i] = T(0);
    }

    static QsVector constant(FamilyPtr<T> family, const T& k) {
        std::vector<T> v(family->space().size(), k);
        return QsVector(std::move(family), std::move(v));
    }

    static QsVector indicator(FamilyPtr<T> family, const EventSet& event) {
        std::vector<T> v(family->space().size(), T(0));
        for (auto i : event.indices()) v.at(i) = T(1);
        return QsVector(std::move(family), std::move(v));
    }

    const std::vector<T>& values() const { return values_; }
    const T& operator[](std::size_t i) const { return values_.at(i); }
    const PriorFamily<T>& family() const { return *family_; }
    const FamilyPtr<T>& family_ptr() const { return family_; }

    QsVector with_values(std::vector<T> values) const { return QsVector(family_, std::move(values)); }

    QsVector operator+(const QsVector& o) const {
        check_same(o);
        std::vector<T> v(values_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
        return with_values(std::move(v));
    }
    QsVector operator-(const QsVector& o) const {
        check_same(o);
        std::vector<T> v(values_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
        return with_values(std::move(v));
    }
    QsVector operator-() const {
        std::vector<T> v(values_);
        for (auto& x : v) x = -x;
        return with_values(std::move(v));
    }
    QsVector scaled(const T& k) const {
        std::vector<T> v(values_);
        for (auto& x : v) x = k * x;
        return with_values(std::move(v));
    }
    QsVector shifted(const T& k) const {
        std::vector<T> v(values_);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (family_->charged(i)) v[i] += k;
        return with_values(std::move(v));
    }
    QsVector abs() const {
        std::vector<T> v(values_);
        for (auto& x : v) x = num<T>::abs(x);
        return with_values(std::move(v));
    }

    /// Equality modulo polar sets; both sides are canonical.
    bool operator==(const QsVector& o) const {
        return family_->qs_support() == o.family_->qs_support() && values_ == o.values_;
    }

    void check_same(const QsVector& o) const {
        if (values_.size() != o.values_.size() ||
            !(family_->qs_support() == o.family_->qs_support()))
            throw validation_error("qs vectors built over different quasi-sure structures");
    }

private:
    FamilyPtr<T> family_;
    std::vector<T> values_;
};

/// A signed measure as a mass vector over outcomes.
template <class T>
class MeasureVector {
public:
    MeasureVector(SpacePtr space, std::vector<T> masses)
        : space_(std::move(space)), masses_(std::move(masses)) {
        if (!space_) throw validation_error("measure needs a sample space");
        if (masses_.size() != space_->size()) throw validation_error("measure dimension mismatch");
    }

    static MeasureVector from_prior(const Prior<T>& p) {
        return MeasureVector(p.space_ptr(), p.weights());
    }

    const SampleSpace& space() const { return *space_; }
    const std::vector<T>& masses() const { return masses_; }
    const T& mass(std::size_t i) const { return masses_.at(i); }

    /// Finite analogue of mu << c: no mass off the quasi-sure support.
    bool dominated_by(const PriorFamily<T>& family) const {
        for (std::size_t i = 0; i < masses_.size(); ++i)
            if (!family.charged(i) && !num<T>::is_zero(masses_[i])) return false;
        return true;
    }

    bool nonnegative() const {
        for (const auto& m : masses_)
            if (m < T(0) && !num<T>::is_zero(m)) return false;
        return true;
    }

    T total_variation() const {
        T tv(0);
        for (const auto& m : masses_) tv += num<T>::abs(m);
        return tv;
    }

    T total_mass() const {
        T s(0);
        for (const auto& m : masses_) s += m;
        return s;
    }

    EventSet support() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < masses_.size(); ++i)
            if (!num<T>::is_zero(masses_[i])) idx.push_back(i);
        return EventSet::of_indices(std::move(idx), space_->size());
    }

    /// Integral of a pointwise-given f against the measure.
    T integrate(const std::vector<T>& values) const {
        if (values.size() != masses_.size()) throw validation_error("dimension mismatch in integral");
        T s(0);
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!num<T>::is_zero(masses_[i])) s += masses_[i] * values[i];
        return s;
    }

private:
    SpacePtr space_;
    std::vector<T> masses_;
};

/// c(f) = max_P E_P[f]. Coincides with the capacity on indicators,
/// positively homogeneous and subadditive.
template <class T>
T sublinear_expectation(const PriorFamily<T>& family, const QsVector<T>& f) {
    if (f.values().size() != family.space().size())
        throw validation_error("dimension mismatch in sublinear expectation");
    bool first = true;
    T best(0);
    for (const auto& p : family.priors()) {
        T v = p.expectation(f.values());
        if (first || v > best) best = v;
        first = false;
    }
    return best;
}

enum class Order { leq, geq, eq, incomparable };

inline const char* to_string(Order o) {
    switch (o) {
        case Order::leq: return "leq";
        case Order::geq: return "geq";
        case Order::eq: return "eq";
        default: return "incomparable";
    }
}

/// Quasi-sure comparison: only values on the q.s. support count.
template <class T>
Order qs_compare(const QsVector<T>& x, const QsVector<T>& y) {
    x.check_same(y);
    bool le = true, ge = true;
    for (auto i : x.family().qs_support().indices()) {
        if (x[i] < y[i]) ge = false;
        if (x[i] > y[i]) le = false;
    }
    if (le && ge) return Order::eq;
    if (le) return Order::leq;
    if (ge) return Order::geq;
    return Order::incomparable;
}

template <class T>
bool qs_leq(const QsVector<T>& x, const QsVector<T>& y) {
    Order o = qs_compare(x, y);
    return o == Order::leq || o == Order::eq;
}

/// The smallest bound valid under every prior: max of |X| over the
/// q.s. support.
template <class T>
T qs_norm(const QsVector<T>& x) {
    T best(0);
    for (auto i : x.family().qs_support().indices()) {
        T a = num<T>::abs(x[i]);
        if (a > best) best = a;
    }
    return best;
}

/// Least upper bound in the q.s. order: pointwise maximum over the
/// support, 0 at polar outcomes (the canonical representative).
template <class T>
QsVector<T> ess_sup(const PriorFamily<T>& family, const std::vector<QsVector<T>>& set) {
    if (set.empty()) throw validation_error("essential supremum of an empty set");
    std::vector<T> out(family.space().size(), T(0));
    for (auto i : family.qs_support().indices()) {
        out[i] = set.front()[i];
        for (const auto& y : set)
            if (y[i] > out[i]) out[i] = y[i];
    }
    return QsVector<T>(set.front().family_ptr(), std::move(out));
}

/// Restriction map onto a single dominated prior: X's values on
/// support(Q), ordered by outcome index. Two vectors restrict equally
/// iff they agree Q-almost surely.
template <class T>
std::vector<T> restrict_to_prior(const QsVector<T>& x, const Prior<T>& q) {
    EventSet supp = q.support();
    for (auto i : supp.indices())
        if (!x.family().charged(i))
            throw domination_error("prior charges polar outcome '" + x.family().space().label(i) + "'");
    std::vector<T> out;
    out.reserve(supp.size());
    for (auto i : supp.indices()) out.push_back(x[i]);
    return out;
}

} // namespace rqs
