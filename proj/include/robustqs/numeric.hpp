#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>

#include "robustqs/errors.hpp"

namespace rqs {

/// Exact arithmetic backend. Arbitrary precision so LP pivoting never
/// overflows; all duality assertions run on this type.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Backend traits for the two numeric modes. A mass counts as zero only
/// if it is exactly zero in rational mode, and if |x| <= 1e-12 in float
/// mode; polar-set logic routes every zero test through here.
template <class T>
struct num;

template <>
struct num<Rational> {
    static constexpr bool exact = true;

    static bool is_zero(const Rational& x) { return x == 0; }
    static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
    static double to_double(const Rational& x) { return x.template convert_to<double>(); }
    static Rational from_int(long v) { return Rational(v); }

    /// "p/q" when the denominator is not 1, plain integer otherwise.
    static std::string str(const Rational& x) {
        const BigInt n = numerator(x);
        const BigInt d = denominator(x);
        if (d == 1) return n.str();
        return n.str() + "/" + d.str();
    }
};

template <>
struct num<double> {
    static constexpr bool exact = false;
    /// Mass-zero threshold for polar-set logic in float mode.
    static constexpr double mass_tol = 1e-12;
    /// Default pivot / feasibility tolerance of the float LP path.
    static constexpr double lp_tol = 1e-9;

    static bool is_zero(double x) { return std::fabs(x) <= mass_tol; }
    static double abs(double x) { return std::fabs(x); }
    static double to_double(double x) { return x; }
    static double from_int(long v) { return static_cast<double>(v); }

    /// 12 significant digits, the report formatting rule.
    static std::string str(double x) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", x);
        return buf;
    }
};

namespace detail {

inline bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

/// Exact value of a decimal literal with optional exponent, as a rational.
inline Rational decimal_to_rational(const std::string& text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    std::string digits;
    long exp10 = 0;
    bool any = false;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
        digits += text[i++];
        any = true;
    }
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
            digits += text[i++];
            --exp10;
            any = true;
        }
    }
    if (!any) throw validation_error("not a number: '" + text + "'");
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
            eneg = text[i] == '-';
            ++i;
        }
        std::string edigits;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') edigits += text[i++];
        if (edigits.empty() || edigits.size() > 6)
            throw validation_error("bad exponent in number: '" + text + "'");
        exp10 += (eneg ? -1 : 1) * std::stol(edigits);
    }
    if (i != text.size()) throw validation_error("trailing characters in number: '" + text + "'");

    BigInt mantissa(digits);
    BigInt n = mantissa, d = 1;
    BigInt ten = 10;
    for (long k = 0; k < exp10; ++k) n *= ten;
    for (long k = 0; k > exp10; --k) d *= ten;
    Rational r(n, d);
    return neg ? Rational(-r) : r;
}

} // namespace detail

/// Parse a numeric literal: a decimal ("0.25", "-3", "1e-2") or an exact
/// fraction string "p/q". Exact in rational mode; strtod semantics in
/// float mode.
template <class T>
T parse_number(const std::string& text);

template <>
inline Rational parse_number<Rational>(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        std::string ns = text.substr(0, slash);
        std::string ds = text.substr(slash + 1);
        bool neg = false;
        if (!ns.empty() && (ns[0] == '+' || ns[0] == '-')) {
            neg = ns[0] == '-';
            ns = ns.substr(1);
        }
        if (!detail::all_digits(ns) || !detail::all_digits(ds))
            throw validation_error("bad fraction literal: '" + text + "'");
        BigInt n(ns), d(ds);
        if (d == 0) throw validation_error("zero denominator: '" + text + "'");
        Rational r(n, d);
        return neg ? Rational(-r) : r;
    }
    return detail::decimal_to_rational(text);
}

template <>
inline double parse_number<double>(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos)
        return num<Rational>::to_double(parse_number<Rational>(text));
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw validation_error("not a number: '" + text + "'");
    }
    if (pos != text.size()) throw validation_error("trailing characters in number: '" + text + "'");
    return v;
}

/// Deterministic 64-bit generator for randomized probes. splitmix64:
/// fully specified output stream, so fixed seeds give identical probe
/// sequences on every platform.
/// Zero in exact mode, the float tolerance otherwise.
template <class T>
T default_tol() {
    if constexpr (num<T>::exact)
        return T(0);
    else
        return num<T>::lp_tol;
}

class ProbeRng {
public:
    explicit ProbeRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound).
    std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

    /// Small signed integer in [-range, range].
    long integer(long range) {
        return static_cast<long>(below(static_cast<std::uint64_t>(2 * range + 1))) - range;
    }

private:
    std::uint64_t state_;
};

} // namespace rqs
