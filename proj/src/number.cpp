#include "spinlab/number.hpp"

#include "spinlab/error.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace spinlab {

namespace {

mpq_class parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        mpz_class p, q;
        if (p.set_str(s.substr(0, slash), 10) != 0 || q.set_str(s.substr(slash + 1), 10) != 0)
            throw Error("SchemaError", "malformed rational '" + s + "'");
        if (q == 0) throw Error("SchemaError", "zero denominator in '" + s + "'");
        mpq_class r(p, q);
        r.canonicalize();
        return r;
    }
    // Decimal such as "0.25" or "1e-3": convert exactly from its text.
    std::string mant = s;
    long exp10 = 0;
    auto e = s.find_first_of("eE");
    if (e != std::string::npos) {
        mant = s.substr(0, e);
        try {
            exp10 = std::stol(s.substr(e + 1));
        } catch (...) {
            throw Error("SchemaError", "malformed number '" + s + "'");
        }
    }
    bool neg = !mant.empty() && (mant[0] == '-' || mant[0] == '+');
    bool minus = !mant.empty() && mant[0] == '-';
    if (neg) mant = mant.substr(1);
    auto dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
        digits = mant.substr(0, dot) + mant.substr(dot + 1);
        exp10 -= static_cast<long>(mant.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw Error("SchemaError", "malformed number '" + s + "'");
    mpz_class m(digits, 10);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    mpq_class r = exp10 >= 0 ? mpq_class(m * p10) : mpq_class(m, p10);
    r.canonicalize();
    return minus ? mpq_class(-r) : r;
}

}  // namespace

Num Num::parse(const std::string& s, bool exact) {
    if (s.empty()) throw Error("SchemaError", "empty number");
    if (exact) return Num(parse_rational(s));
    if (s.find('/') != std::string::npos) return Num(parse_rational(s).get_d());
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error("SchemaError", "malformed number '" + s + "'");
    return Num(v);
}

const mpq_class& Num::q() const {
    if (!exact()) throw std::logic_error("Num::q on a floating value");
    return std::get<mpq_class>(v_);
}

double Num::d() const {
    if (exact()) return std::get<mpq_class>(v_).get_d();
    return std::get<double>(v_);
}

bool Num::is_zero() const { return sign() == 0; }

int Num::sign() const {
    if (exact()) return sgn(std::get<mpq_class>(v_));
    double x = std::get<double>(v_);
    return (x > 0) - (x < 0);
}

Num Num::operator+(const Num& o) const {
    if (exact() && o.exact()) return Num(mpq_class(q() + o.q()));
    return Num(d() + o.d());
}

Num Num::operator-(const Num& o) const {
    if (exact() && o.exact()) return Num(mpq_class(q() - o.q()));
    return Num(d() - o.d());
}

Num Num::operator*(const Num& o) const {
    if (exact() && o.exact()) return Num(mpq_class(q() * o.q()));
    return Num(d() * o.d());
}

Num Num::operator/(const Num& o) const {
    if (o.is_zero()) throw std::domain_error("division by zero");
    if (exact() && o.exact()) return Num(mpq_class(q() / o.q()));
    return Num(d() / o.d());
}

Num Num::pow(long n) const {
    if (!exact()) return Num(std::pow(d(), static_cast<double>(n)));
    const mpq_class& x = q();
    if (n < 0) {
        if (x == 0) throw std::domain_error("negative power of zero");
        return Num(mpq_class(1) / x).pow(-n);
    }
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), x.get_num_mpz_t(), static_cast<unsigned long>(n));
    mpz_pow_ui(den.get_mpz_t(), x.get_den_mpz_t(), static_cast<unsigned long>(n));
    return Num(mpq_class(num, den));
}

double log_z(const mpz_class& x) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    long e = 0;
    double m = mpz_get_d_2exp(&e, x.get_mpz_t());
    return std::log(m) + static_cast<double>(e) * std::log(2.0);
}

double log_q(const mpq_class& x) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    return log_z(x.get_num()) - log_z(x.get_den());
}

double Num::log() const {
    if (exact()) return log_q(q());
    double x = d();
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    return std::log(x);
}

int Num::cmp(const Num& o) const {
    if (exact() && o.exact()) return ::cmp(q(), o.q());
    double a = d(), b = o.d();
    return (a > b) - (a < b);
}

std::string Num::str() const {
    if (exact()) return q().get_str();
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d());
    return std::string(buf, ptr);
}

bool near_equal(const Num& a, const Num& b, double rel_tol) {
    if (a.exact() && b.exact()) return a.q() == b.q();
    double x = a.d(), y = b.d();
    double scale = std::max(std::fabs(x), std::fabs(y));
    return std::fabs(x - y) <= rel_tol * scale;
}

mpq_class rationalize(double x, unsigned long max_den) {
    if (!std::isfinite(x)) throw std::domain_error("cannot rationalize a non-finite value");
    bool neg = x < 0;
    mpq_class target(std::fabs(x));  // exact binary value of the double
    // Continued-fraction convergents of the exact value, stopping at max_den.
    mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    mpq_class rem = target;
    while (true) {
        mpz_class a = rem.get_num() / rem.get_den();
        mpz_class p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den) {
            // Best semiconvergent within the bound.
            mpz_class k = (mpz_class(max_den) - q0) / q1;
            mpz_class ps = k * p1 + p0, qs = k * q1 + q0;
            mpq_class c1(p1, q1), cs(ps, qs);
            mpq_class e1 = abs(c1 - target), es = abs(cs - target);
            mpq_class best = (qs > 0 && es < e1) ? cs : c1;
            best.canonicalize();
            return neg ? mpq_class(-best) : best;
        }
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        mpq_class frac = rem - mpq_class(a);
        if (frac == 0) break;
        rem = 1 / frac;
    }
    mpq_class r(p1, q1);
    r.canonicalize();
    return neg ? mpq_class(-r) : r;
}

}  // namespace spinlab
