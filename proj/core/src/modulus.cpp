#include "sqavg/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sqavg {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m)
{
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

bool is_prime(std::uint64_t n)
{
    if (n < 2) return false;
    for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // first 12 primes are a deterministic witness set below 3.3e24
    for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t next_prime(std::uint64_t n)
{
    if (n <= 2) return 2;
    if ((n & 1) == 0) ++n;
    while (!is_prime(n)) n += 2;
    return n;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n)
{
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

SquareFreeModulus SquareFreeModulus::from_primes(std::vector<std::uint64_t> primes)
{
    std::sort(primes.begin(), primes.end());
    SquareFreeModulus m;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        std::uint64_t p = primes[i];
        if (p == 2 || !is_prime(p))
            throw ConfigError("modulus factor " + std::to_string(p) + " is not an odd prime");
        if (i > 0 && primes[i - 1] == p)
            throw ConfigError("modulus factor " + std::to_string(p) + " repeated");
        m.q_ *= BigInt(static_cast<unsigned long>(p));
    }
    m.primes_ = std::move(primes);
    return m;
}

SquareFreeModulus SquareFreeModulus::from_value(std::uint64_t q)
{
    if (q < 3 || (q & 1) == 0) throw ConfigError("modulus must be odd and > 1");
    auto ps = prime_factors(q);
    std::uint64_t prod = 1;
    for (auto p : ps) prod *= p;
    if (prod != q) throw ConfigError("modulus " + std::to_string(q) + " is not square-free");
    return from_primes(std::move(ps));
}

std::int64_t SquareFreeModulus::q64() const { return to_int64(q_); }

bool SquareFreeModulus::coprime_to(std::uint64_t n) const
{
    for (auto p : primes_)
        if (n % p == 0) return false;
    return true;
}

static bool square_mod_prime(std::uint64_t r, std::uint64_t p)
{
    return r == 0 || powmod(r, (p - 1) / 2, p) == 1;
}

int epsilon(std::int64_t n, const SquareFreeModulus& q)
{
    for (auto p : q.primes()) {
        auto r = static_cast<std::uint64_t>(mod_floor(n, static_cast<std::int64_t>(p)));
        if (!square_mod_prime(r, p)) return 0;
    }
    return 1;
}

int epsilon(const BigInt& n, const SquareFreeModulus& q)
{
    for (auto p : q.primes()) {
        BigInt r;
        mpz_fdiv_r_ui(r.get_mpz_t(), n.get_mpz_t(), p);
        if (!square_mod_prime(r.get_ui(), p)) return 0;
    }
    return 1;
}

BigInt sigma(const SquareFreeModulus& q)
{
    BigInt s = 1;
    for (auto p : q.primes()) s *= BigInt(static_cast<unsigned long>((p + 1) / 2));
    return s;
}

BigInt sigma_prime(const SquareFreeModulus& q)
{
    BigInt s = 1;
    for (auto p : q.primes()) s *= BigInt(static_cast<unsigned long>((p - 1) / 2));
    return s;
}

std::vector<std::uint8_t> square_table(const SquareFreeModulus& q, bool primed)
{
    const std::int64_t n = q.q64();
    if (n > limits().scan_cap) throw ScaleError("modulus exceeds the scan cap");
    std::vector<std::vector<std::uint8_t>> per;
    for (auto p : q.primes()) {
        std::vector<std::uint8_t> t(p, 0);
        for (std::uint64_t k = 0; k < p; ++k) t[k * k % p] = 1;
        if (primed) t[0] = 0;
        per.push_back(std::move(t));
    }
    std::vector<std::uint8_t> out(static_cast<std::size_t>(n));
    std::vector<std::uint64_t> r(per.size(), 0);
    const auto& ps = q.primes();
    for (std::int64_t i = 0; i < n; ++i) {
        std::uint8_t v = 1;
        for (std::size_t j = 0; j < per.size(); ++j) {
            v &= per[j][r[j]];
            if (++r[j] == ps[j]) r[j] = 0;
        }
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

static ResidueSet collect(const SquareFreeModulus& q, bool primed)
{
    auto t = square_table(q, primed);
    ResidueSet rs{q, {}};
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i]) rs.residues.push_back(static_cast<std::int64_t>(i));
    return rs;
}

ResidueSet lambda0(const SquareFreeModulus& q) { return collect(q, false); }
ResidueSet lambda0_prime(const SquareFreeModulus& q) { return collect(q, true); }

static void check_odd_prime(std::uint64_t tau)
{
    if (tau == 2 || !is_prime(tau))
        throw ContractError("legendre: " + std::to_string(tau) + " is not an odd prime");
}

int legendre(std::int64_t n, std::uint64_t tau)
{
    check_odd_prime(tau);
    auto r = static_cast<std::uint64_t>(mod_floor(n, static_cast<std::int64_t>(tau)));
    if (r == 0) return 0;
    return powmod(r, (tau - 1) / 2, tau) == 1 ? 1 : -1;
}

int legendre(const BigInt& n, std::uint64_t tau)
{
    check_odd_prime(tau);
    BigInt r;
    mpz_fdiv_r_ui(r.get_mpz_t(), n.get_mpz_t(), tau);
    if (r == 0) return 0;
    return powmod(r.get_ui(), (tau - 1) / 2, tau) == 1 ? 1 : -1;
}

std::int64_t polya_vinogradov_bound(std::uint64_t tau)
{
    double t = static_cast<double>(tau);
    return static_cast<std::int64_t>(std::ceil(6.0 * std::sqrt(t) * std::log(t)));
}

namespace {

// Prefix sums of the Legendre symbol over one period, cached per thread for
// the last modulus seen.
const std::vector<std::int32_t>& legendre_prefix(std::uint64_t tau)
{
    thread_local std::uint64_t cached = 0;
    thread_local std::vector<std::int32_t> pre;
    if (cached != tau) {
        pre.assign(tau + 1, 0);
        std::vector<std::int8_t> chi(tau, -1);
        chi[0] = 0;
        for (std::uint64_t k = 1; k <= tau / 2; ++k) chi[mulmod(k, k, tau)] = 1;
        for (std::uint64_t j = 0; j < tau; ++j) pre[j + 1] = pre[j] + chi[j];
        cached = tau;
    }
    return pre;
}

constexpr std::uint64_t kPrefixCap = std::uint64_t{1} << 24;

}  // namespace

std::int64_t char_interval_sum(std::int64_t n, std::int64_t l, std::uint64_t tau)
{
    check_odd_prime(tau);
    if (l < 1) throw ContractError("char_interval_sum: l must be positive");
    const auto t = static_cast<std::int64_t>(tau);
    // complete periods contribute nothing
    const std::int64_t rem = l % t;
    const std::int64_t start = mod_floor(n, t);
    std::int64_t s = 0;
    if (tau <= kPrefixCap) {
        const auto& pre = legendre_prefix(tau);
        const std::int64_t end = start + rem;
        s = end <= t ? pre[static_cast<std::size_t>(end)] - pre[static_cast<std::size_t>(start)]
                     : pre[tau] - pre[static_cast<std::size_t>(start)] + pre[static_cast<std::size_t>(end - t)];
    } else {
        for (std::int64_t j = 0; j < rem; ++j) {
            std::int64_t r = start + j;
            if (r >= t) r -= t;
            if (r == 0) continue;
            s += powmod(static_cast<std::uint64_t>(r), (tau - 1) / 2, tau) == 1 ? 1 : -1;
        }
    }
    if ((s < 0 ? -s : s) > polya_vinogradov_bound(tau))
        throw ContractError("Polya-Vinogradov bound violated at tau=" + std::to_string(tau));
    return s;
}

}  // namespace sqavg
