#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "marketpred/errors.hpp"

namespace mkt {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline int sgn(const Rat& r) { return r.sign(); }
inline int sgn(long v) { return (v > 0) - (v < 0); }

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

/// True when r has an exact finite decimal expansion (denominator 2^a * 5^b).
inline bool has_finite_decimal(const Rat& r) {
    Int d = rat_den(r);
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    return d == 1;
}

/// Exact textual form: an integer, a finite decimal, or "p/q".
/// Always re-parseable by parse_rational with no loss.
inline std::string format_rational(const Rat& r) {
    Int num = rat_num(r), den = rat_den(r);
    if (den == 1) return num.str();
    if (has_finite_decimal(r)) {
        bool neg = num < 0;
        if (neg) num = -num;
        // Scale so the denominator becomes a power of ten.
        Int d = den;
        int twos = 0, fives = 0;
        while (d % 2 == 0) { d /= 2; ++twos; }
        while (d % 5 == 0) { d /= 5; ++fives; }
        int digits = twos > fives ? twos : fives;
        for (int i = twos; i < digits; ++i) num *= 2;
        for (int i = fives; i < digits; ++i) num *= 5;
        std::string s = num.str();
        if ((long)s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
        s.insert(s.size() - digits, ".");
        if (neg) s.insert(0, "-");
        return s;
    }
    return num.str() + "/" + den.str();
}

/// Parses "3", "-0.25", or "1/4".  Throws parse_error on anything else.
inline Rat parse_rational(std::string_view text) {
    std::string s(text);
    // trim
    while (!s.empty() && std::isspace((unsigned char)s.front())) s.erase(s.begin());
    while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
    if (s.empty()) throw parse_error(0, "empty rational literal");
    auto bad = [&] { throw parse_error(0, "malformed rational literal: '" + s + "'"); };
    std::size_t slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            Int num(s.substr(0, slash));
            Int den(s.substr(slash + 1));
            if (den == 0) bad();
            return Rat(num, den);
        }
        std::size_t dot = s.find('.');
        if (dot == std::string::npos) return Rat(Int(s));
        std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
        if (frac.empty()) bad();
        for (char c : frac)
            if (!std::isdigit((unsigned char)c)) bad();
        bool neg = !whole.empty() && whole[0] == '-';
        if (whole == "-" || whole == "+" || whole.empty()) whole += "0";
        Int w(whole);
        if (neg) w = -w;
        Int scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        Rat r = Rat(w) + Rat(Int(frac), scale);
        return neg ? -r : r;
    } catch (const std::runtime_error&) {
        bad();
    }
    return Rat(); // unreachable
}

} // namespace mkt
