#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sqavg {

using Rat = mpq_class;
using BigInt = mpz_class;

// A computation would exceed a configured desk-scale cap.
class ScaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input (scenario fields, parameters out of range).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Limits {
    std::int64_t period_cap = std::int64_t{1} << 40;   // cells after rebasing
    std::int64_t scan_cap = std::int64_t{1} << 31;     // q for full scans
    std::int64_t gap_cap = 10'000'000;                 // sigma' for gap enumeration
    std::int64_t materialize_cap = std::int64_t{1} << 26;
};

Limits& limits();

std::string to_string(const Rat& r);      // always "num/den"
std::string to_string(const BigInt& z);
Rat parse_rational(std::string_view s);   // "a/b", "a", or a finite decimal
BigInt parse_bigint(std::string_view s);

Rat make_rat(std::int64_t num, std::int64_t den = 1);
BigInt big(std::int64_t v);
bool fits_int64(const BigInt& z);
std::int64_t to_int64(const BigInt& z);   // throws ScaleError
double to_double(const Rat& r);

BigInt floor_of(const Rat& r);
BigInt ceil_of(const Rat& r);
Rat pow2(int e);

std::int64_t checked_mul(std::int64_t a, std::int64_t b);
std::int64_t checked_lcm(std::int64_t a, std::int64_t b);
std::int64_t gcd64(std::int64_t a, std::int64_t b);
std::int64_t mod_floor(std::int64_t a, std::int64_t m);

}  // namespace sqavg
