#pragma once

// Exact rationals: an inline int64 fraction, promoted to GMP when a result leaves that range.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace dmpva {

class Rational {
public:
    Rational() = default;
    Rational(int v) : n_(v) {}
    Rational(long v) : n_(v) {
        if (v == INT64_MIN) set_big(mpq_class(mpz_class(v)));
    }
    Rational(long long v) : Rational(long(v)) {}
    Rational(long n, long d) { *this = from_i128(n, d); }
    explicit Rational(const mpq_class& q) { set_big(q); }
    /// Parses "p" or "p/q" with optional sign; throws on malformed text or zero denominator.
    explicit Rational(const std::string& s) {
        std::size_t slash = s.find('/');
        auto valid_int = [](const std::string& t) {
            std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
            if (i >= t.size()) return false;
            for (; i < t.size(); ++i)
                if (t[i] < '0' || t[i] > '9') return false;
            return true;
        };
        std::string num = s.substr(0, slash), den = slash == std::string::npos ? "1" : s.substr(slash + 1);
        if (!valid_int(num) || !valid_int(den)) throw std::invalid_argument("malformed rational '" + s + "'");
        if (num[0] == '+') num = num.substr(1);
        if (den[0] == '+') den = den.substr(1);
        mpz_class N(num), D(den);
        if (D == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        mpq_class q(N, D);
        q.canonicalize();
        set_big(q);
    }

    Rational(const Rational& o) : n_(o.n_), d_(o.d_), big_(o.big_ ? new mpq_class(*o.big_) : nullptr) {}
    Rational(Rational&& o) noexcept : n_(o.n_), d_(o.d_), big_(o.big_) { o.big_ = nullptr; }
    Rational& operator=(const Rational& o) {
        if (this != &o) {
            Rational t(o);
            swap(t);
        }
        return *this;
    }
    Rational& operator=(Rational&& o) noexcept {
        swap(o);
        return *this;
    }
    ~Rational() { delete big_; }

    void swap(Rational& o) noexcept {
        std::swap(n_, o.n_);
        std::swap(d_, o.d_);
        std::swap(big_, o.big_);
    }

    bool is_small() const { return big_ == nullptr; }
    int sign() const {
        if (big_) return sgn(*big_);
        return (n_ > 0) - (n_ < 0);
    }
    mpq_class to_mpq() const {
        if (big_) return *big_;
        return mpq_class(mpz_class(long(n_)), mpz_class(long(d_)));
    }
    std::string str() const {
        if (big_) return big_->get_str();
        return d_ == 1 ? std::to_string(n_) : std::to_string(n_) + "/" + std::to_string(d_);
    }
    Rational numerator() const { return big_ ? Rational(mpq_class(big_->get_num())) : Rational(long(n_)); }
    Rational denominator() const { return big_ ? Rational(mpq_class(big_->get_den())) : Rational(long(d_)); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (a.big_ || b.big_) return Rational(a.to_mpq() + b.to_mpq());
        if (a.d_ == 1 && b.d_ == 1) {
            std::int64_t r;
            if (!__builtin_add_overflow(a.n_, b.n_, &r)) return Rational(long(r));
        }
        __int128 num = __int128(a.n_) * b.d_ + __int128(b.n_) * a.d_;
        __int128 den = __int128(a.d_) * b.d_;
        return from_i128(num, den);
    }
    friend Rational operator-(const Rational& a) {
        if (a.big_) return Rational(mpq_class(-*a.big_));
        Rational r;
        r.n_ = -a.n_;
        r.d_ = a.d_;
        return r;
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        if (a.big_ || b.big_) return Rational(a.to_mpq() * b.to_mpq());
        if (a.d_ == 1 && b.d_ == 1) {
            std::int64_t r;
            if (!__builtin_mul_overflow(a.n_, b.n_, &r)) return Rational(long(r));
        }
        return from_i128(__int128(a.n_) * b.n_, __int128(a.d_) * b.d_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.sign() == 0) throw std::domain_error("division by zero");
        if (a.big_ || b.big_) return Rational(a.to_mpq() / b.to_mpq());
        return from_i128(__int128(a.n_) * b.d_, __int128(a.d_) * b.n_);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        if (a.big_ || b.big_) return a.big_ && b.big_ && *a.big_ == *b.big_;
        return a.n_ == b.n_ && a.d_ == b.d_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        if (a.big_ || b.big_) {
            int c = cmp(a.to_mpq(), b.to_mpq());
            return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
        }
        return __int128(a.n_) * b.d_ <=> __int128(b.n_) * a.d_;
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& q) { return os << q.str(); }

private:
    static unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
        while (b != 0) {
            unsigned __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }
    static mpz_class to_mpz(__int128 v) {
        bool neg = v < 0;
        unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1 : (unsigned __int128)v;
        mpz_class hi(static_cast<unsigned long>(u >> 64)), lo(static_cast<unsigned long>(u));
        mpz_class r = (hi << 64) + lo;
        return neg ? mpz_class(-r) : r;
    }
    static Rational from_i128(__int128 num, __int128 den) {
        if (den == 0) throw std::domain_error("zero denominator");
        if (den < 0) num = -num, den = -den;
        unsigned __int128 un = num < 0 ? (unsigned __int128)(-(num + 1)) + 1 : (unsigned __int128)num;
        unsigned __int128 g = gcd128(un, (unsigned __int128)den);
        if (g > 1) {
            num /= (__int128)g;
            den /= (__int128)g;
        }
        if (num == 0) den = 1;
        Rational r;
        if (num > INT64_MIN && num <= INT64_MAX && den <= INT64_MAX) {
            r.n_ = std::int64_t(num);
            r.d_ = std::int64_t(den);
            return r;
        }
        mpq_class q(to_mpz(num), to_mpz(den));
        q.canonicalize();
        r.set_big(q);
        return r;
    }
    void set_big(const mpq_class& q) {
        delete big_;
        big_ = nullptr;
        const mpz_class& N = q.get_num();
        const mpz_class& D = q.get_den();
        if (N.fits_slong_p() && D.fits_slong_p() && N.get_si() != INT64_MIN) {
            n_ = N.get_si();
            d_ = D.get_si();
            return;
        }
        n_ = 0;
        d_ = 1;
        big_ = new mpq_class(q);
    }

    std::int64_t n_ = 0, d_ = 1;
    mpq_class* big_ = nullptr;
};

}  // namespace dmpva
