#pragma once

#include <string>

#include "robustqs/errors.hpp"
#include "robustqs/numeric.hpp"

namespace rqs {

/// Extended real: a finite value of the backend type, +inf, or -inf.
/// +inf is a first-class citizen (conjugate values, infima over empty
/// feasible sets); inf + finite = inf, inf - inf is a contract error.
template <class T>
class ExtReal {
public:
    ExtReal() : value_(), tag_(Tag::finite) {}
    ExtReal(T v) : value_(std::move(v)), tag_(Tag::finite) {}

    static ExtReal pos_inf() { return ExtReal(Tag::pos_inf); }
    static ExtReal neg_inf() { return ExtReal(Tag::neg_inf); }

    bool finite() const { return tag_ == Tag::finite; }
    bool is_pos_inf() const { return tag_ == Tag::pos_inf; }
    bool is_neg_inf() const { return tag_ == Tag::neg_inf; }

    const T& value() const {
        if (!finite()) throw contract_error("extended real is not finite");
        return value_;
    }

    ExtReal operator+(const ExtReal& o) const {
        if (finite() && o.finite()) return ExtReal(value_ + o.value_);
        if (is_pos_inf() && o.is_neg_inf()) throw contract_error("inf - inf");
        if (is_neg_inf() && o.is_pos_inf()) throw contract_error("inf - inf");
        return finite() ? o : *this;
    }
    ExtReal operator-() const {
        if (is_pos_inf()) return neg_inf();
        if (is_neg_inf()) return pos_inf();
        return ExtReal(-value_);
    }
    ExtReal operator-(const ExtReal& o) const { return *this + (-o); }

    bool operator==(const ExtReal& o) const {
        if (tag_ != o.tag_) return false;
        return !finite() || value_ == o.value_;
    }
    bool operator<(const ExtReal& o) const {
        if (is_neg_inf()) return !o.is_neg_inf();
        if (is_pos_inf()) return false;
        if (o.is_pos_inf()) return true;
        if (o.is_neg_inf()) return false;
        return value_ < o.value_;
    }
    bool operator<=(const ExtReal& o) const { return *this < o || *this == o; }
    bool operator>(const ExtReal& o) const { return o < *this; }
    bool operator>=(const ExtReal& o) const { return o <= *this; }

    std::string str() const {
        if (is_pos_inf()) return "inf";
        if (is_neg_inf()) return "-inf";
        return num<T>::str(value_);
    }

private:
    enum class Tag { finite, pos_inf, neg_inf };
    explicit ExtReal(Tag t) : value_(), tag_(t) {}

    T value_;
    Tag tag_;
};

template <class T>
ExtReal<T> ext_max(const ExtReal<T>& a, const ExtReal<T>& b) {
    return a < b ? b : a;
}

template <class T>
ExtReal<T> ext_min(const ExtReal<T>& a, const ExtReal<T>& b) {
    return b < a ? b : a;
}

} // namespace rqs
