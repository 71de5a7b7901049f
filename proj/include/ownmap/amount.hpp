#pragma once

/**
 * Exact signed token amounts.
 *
 * Raw token units are integers at ingestion. Fractions only appear through
 * proportional splits, and they are carried exactly so that a partition of
 * a balance always sums back to the balance. Nothing in ledger state is
 * ever a float; doubles come out only at the reporting edge.
 */

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "error.hpp"

namespace ownmap {

class Amount {
public:
    Amount() = default;
    Amount(long long v) : v_(static_cast<long>(v)) {}  // NOLINT: implicit from integers is intended
    Amount(long v) : v_(v) {}         // NOLINT
    Amount(int v) : v_(static_cast<long>(v)) {}        // NOLINT
    explicit Amount(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }
    explicit Amount(const mpz_class& v) : v_(v) {}
    Amount(const mpz_class& num, const mpz_class& den) {
        if (den == 0) throw ZeroDenominator();
        v_ = mpq_class(num, den);
        v_.canonicalize();
    }

    // Accepts "123", "-45", "7/3". Rejects decimals, exponents, whitespace.
    static Amount parse(std::string_view text) {
        if (text.empty()) throw std::invalid_argument("empty amount");
        const auto slash = text.find('/');
        auto parse_int = [](std::string_view s, bool allow_sign) {
            std::size_t i = 0;
            if (allow_sign && !s.empty() && s[0] == '-') i = 1;
            if (i == s.size()) throw std::invalid_argument("bad integer '" + std::string(s) + "'");
            for (std::size_t k = i; k < s.size(); ++k)
                if (s[k] < '0' || s[k] > '9')
                    throw std::invalid_argument("bad integer '" + std::string(s) + "'");
            return mpz_class(std::string(s), 10);
        };
        if (slash == std::string_view::npos) return Amount(parse_int(text, true));
        return Amount(parse_int(text.substr(0, slash), true), parse_int(text.substr(slash + 1), false));
    }

    // Parses a human amount such as "12.5" at `decimals` places into raw units.
    static Amount from_units(std::string_view text, int decimals) {
        if (decimals < 0 || decimals > 18) throw std::invalid_argument("decimals out of range");
        bool negative = false;
        if (!text.empty() && text[0] == '-') {
            negative = true;
            text.remove_prefix(1);
        }
        const auto dot = text.find('.');
        std::string whole(dot == std::string_view::npos ? text : text.substr(0, dot));
        std::string frac(dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1));
        if (whole.empty() && frac.empty()) throw std::invalid_argument("empty amount");
        if (static_cast<int>(frac.size()) > decimals)
            throw std::invalid_argument("more fractional digits than token decimals");
        frac.append(static_cast<std::size_t>(decimals) - frac.size(), '0');
        std::string digits = (whole.empty() ? "0" : whole) + frac;
        for (char c : digits)
            if (c < '0' || c > '9') throw std::invalid_argument("bad decimal amount");
        mpz_class raw(digits, 10);
        if (negative) raw = -raw;
        return Amount(raw);
    }

    static Amount from_double(double d) { return Amount(mpq_class(d)); }

    const mpq_class& value() const noexcept { return v_; }
    mpz_class numerator() const { return v_.get_num(); }
    mpz_class denominator() const { return v_.get_den(); }

    bool is_zero() const noexcept { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const noexcept { return sgn(v_); }
    Amount abs() const { return Amount(mpq_class(::abs(v_))); }
    double to_double() const { return v_.get_d(); }

    // Exact canonical text: "p" or "p/q".
    std::string str() const { return v_.get_str(10); }

    // Decimal rendering rounded half-even to `places` fractional digits.
    std::string to_fixed(int places) const {
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(places));
        const mpq_class scaled = v_ * scale;
        const bool negative = sgn(scaled) < 0;
        mpz_class num = ::abs(scaled.get_num());
        const mpz_class& den = scaled.get_den();
        mpz_class q, r;
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        const int cmp_half = cmp(mpz_class(r * 2), den);
        if (cmp_half > 0 || (cmp_half == 0 && mpz_odd_p(q.get_mpz_t()))) q += 1;
        std::string digits = q.get_str(10);
        if (places > 0) {
            if (static_cast<int>(digits.size()) <= places)
                digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
            digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
        }
        if (negative && q != 0) digits.insert(0, "-");
        return digits;
    }

    // Renders raw units at token `decimals`; exact for integer raw values.
    std::string to_units(int decimals) const {
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(decimals));
        std::string s = Amount(mpq_class(v_ / scale)).to_fixed(decimals);
        if (decimals > 0) {
            while (s.back() == '0') s.pop_back();
            if (s.back() == '.') s.pop_back();
        }
        return s;
    }

    Amount& operator+=(const Amount& o) { v_ += o.v_; return *this; }
    Amount& operator-=(const Amount& o) { v_ -= o.v_; return *this; }
    Amount& operator*=(const Amount& o) { v_ *= o.v_; return *this; }
    Amount& operator/=(const Amount& o) {
        if (o.is_zero()) throw ZeroDenominator();
        v_ /= o.v_;
        return *this;
    }

    friend Amount operator+(Amount a, const Amount& b) { return a += b; }
    friend Amount operator-(Amount a, const Amount& b) { return a -= b; }
    friend Amount operator*(Amount a, const Amount& b) { return a *= b; }
    friend Amount operator/(Amount a, const Amount& b) { return a /= b; }
    friend std::ostream& operator<<(std::ostream& os, const Amount& a) { return os << a.str(); }
    friend Amount operator-(const Amount& a) { return Amount(mpq_class(-a.v_)); }

    friend bool operator==(const Amount& a, const Amount& b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(const Amount& a, const Amount& b) {
        const int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    mpq_class v_;
};

inline Amount amount_add(const Amount& a, const Amount& b) { return a + b; }

// total * share_num / share_den, exact.
inline Amount amount_prorate(const Amount& total, const Amount& share_num, const Amount& share_den) {
    if (share_den.is_zero()) throw ZeroDenominator();
    if (share_den.sign() < 0 || share_num.sign() < 0 || share_num > share_den)
        throw std::invalid_argument("prorate share out of range");
    return total * share_num / share_den;
}

}  // namespace ownmap
