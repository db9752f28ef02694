#include "sqavg/rational.hpp"

#include <cctype>
#include <limits>
#include <numeric>

namespace sqavg {

Limits& limits()
{
    static Limits l;
    return l;
}

std::string to_string(const Rat& r)
{
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_string(const BigInt& z) { return z.get_str(); }

static bool all_digits(std::string_view s)
{
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

BigInt parse_bigint(std::string_view s)
{
    std::string_view body = s;
    bool neg = false;
    if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
        neg = body[0] == '-';
        body.remove_prefix(1);
    }
    if (!all_digits(body)) throw ConfigError("not an integer: '" + std::string(s) + "'");
    BigInt z(std::string(body), 10);
    return neg ? BigInt(-z) : z;
}

Rat parse_rational(std::string_view s)
{
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        BigInt n = parse_bigint(s.substr(0, slash));
        BigInt d = parse_bigint(s.substr(slash + 1));
        if (d == 0) throw ConfigError("zero denominator: '" + std::string(s) + "'");
        Rat r(n, d);
        r.canonicalize();
        return r;
    }
    auto dot = s.find('.');
    if (dot != std::string_view::npos) {
        std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
        bool neg = !ip.empty() && ip[0] == '-';
        if (neg || (!ip.empty() && ip[0] == '+')) ip.remove_prefix(1);
        if ((!ip.empty() && !all_digits(ip)) || !all_digits(fp))
            throw ConfigError("not a number: '" + std::string(s) + "'");
        BigInt n(std::string(ip.empty() ? "0" : ip) + std::string(fp), 10);
        BigInt d;
        mpz_ui_pow_ui(d.get_mpz_t(), 10, fp.size());
        Rat r(neg ? BigInt(-n) : n, d);
        r.canonicalize();
        return r;
    }
    return Rat(parse_bigint(s));
}

Rat make_rat(std::int64_t num, std::int64_t den)
{
    Rat r(big(num), big(den));
    r.canonicalize();
    return r;
}

BigInt big(std::int64_t v) { return BigInt(static_cast<long>(v)); }

bool fits_int64(const BigInt& z) { return z.fits_slong_p(); }

std::int64_t to_int64(const BigInt& z)
{
    if (!z.fits_slong_p()) throw ScaleError("integer exceeds 64 bits: " + z.get_str());
    return z.get_si();
}

double to_double(const Rat& r) { return r.get_d(); }

BigInt floor_of(const Rat& r)
{
    BigInt q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

BigInt ceil_of(const Rat& r)
{
    BigInt q;
    mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

Rat pow2(int e)
{
    BigInt p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rat(BigInt(1), p) : Rat(p);
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b)
{
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw ScaleError("64-bit overflow in product");
    return r;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::int64_t checked_lcm(std::int64_t a, std::int64_t b)
{
    return checked_mul(a / std::gcd(a, b), b);
}

std::int64_t mod_floor(std::int64_t a, std::int64_t m)
{
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace sqavg
