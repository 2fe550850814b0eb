#pragma once

#include <gmpxx.h>

#include <string>
#include <variant>

namespace spinlab {

// A non-negative-friendly scalar that is either an exact rational or a double.
// Arithmetic between two rationals stays rational; anything touching a double
// becomes a double.
class Num {
public:
    Num() : v_(mpq_class(0)) {}
    Num(int x) : v_(mpq_class(x)) {}
    Num(long x) : v_(mpq_class(x)) {}
    Num(const mpq_class& x) : v_(x) {}
    Num(const mpz_class& x) : v_(mpq_class(x)) {}
    Num(double x) : v_(x) {}

    // Accepts "p/q", integers and decimals. With exact=true a decimal string
    // is converted to the rational it denotes; otherwise everything is a double.
    static Num parse(const std::string& s, bool exact);

    bool exact() const { return std::holds_alternative<mpq_class>(v_); }
    const mpq_class& q() const;
    double d() const;

    Num to_float() const { return Num(d()); }

    bool is_zero() const;
    int sign() const;

    Num operator+(const Num& o) const;
    Num operator-(const Num& o) const;
    Num operator*(const Num& o) const;
    Num operator/(const Num& o) const;
    Num& operator+=(const Num& o) { return *this = *this + o; }
    Num& operator-=(const Num& o) { return *this = *this - o; }
    Num& operator*=(const Num& o) { return *this = *this * o; }
    Num& operator/=(const Num& o) { return *this = *this / o; }

    // Integer power; n may be negative for non-zero values.
    Num pow(long n) const;

    // Natural logarithm; -inf for zero.
    double log() const;

    // Exact comparison when both sides are rational.
    int cmp(const Num& o) const;
    bool operator==(const Num& o) const { return cmp(o) == 0; }
    bool operator!=(const Num& o) const { return cmp(o) != 0; }
    bool operator<(const Num& o) const { return cmp(o) < 0; }
    bool operator<=(const Num& o) const { return cmp(o) <= 0; }
    bool operator>(const Num& o) const { return cmp(o) > 0; }
    bool operator>=(const Num& o) const { return cmp(o) >= 0; }

    // "p/q" (or "p" for integers) when exact, shortest round-trip decimal otherwise.
    std::string str() const;

private:
    std::variant<mpq_class, double> v_;
};

// Equality with a relative tolerance when either side is a double.
bool near_equal(const Num& a, const Num& b, double rel_tol = 1e-12);

// Natural log of a positive rational without overflow for huge operands.
double log_q(const mpq_class& x);
double log_z(const mpz_class& x);

// Best rational approximation with denominator at most max_den.
mpq_class rationalize(double x, unsigned long max_den);

}  // namespace spinlab
