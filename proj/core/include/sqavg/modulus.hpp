#pragma once

#include "sqavg/rational.hpp"

#include <cstdint>
#include <vector>

namespace sqavg {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m);

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t n);
// Smallest prime >= n.
std::uint64_t next_prime(std::uint64_t n);
// Trial division; fine for the desk-scale numbers this library factors.
std::vector<std::uint64_t> prime_factors(std::uint64_t n);

class SquareFreeModulus {
public:
    SquareFreeModulus() = default;
    // Distinct odd primes in any order; stored ascending.
    static SquareFreeModulus from_primes(std::vector<std::uint64_t> primes);
    // Factors q and checks that it is odd and square-free.
    static SquareFreeModulus from_value(std::uint64_t q);

    const std::vector<std::uint64_t>& primes() const { return primes_; }
    const BigInt& q() const { return q_; }
    std::int64_t q64() const;
    int kappa() const { return static_cast<int>(primes_.size()); }
    bool coprime_to(std::uint64_t n) const;

    bool operator==(const SquareFreeModulus& o) const { return primes_ == o.primes_; }

private:
    std::vector<std::uint64_t> primes_;
    BigInt q_{1};
};

struct ResidueSet {
    SquareFreeModulus modulus;
    std::vector<std::int64_t> residues;   // sorted, in [0,q)
};

// 1 iff n is congruent to a square mod q (0 counts as a square).
int epsilon(std::int64_t n, const SquareFreeModulus& q);
int epsilon(const BigInt& n, const SquareFreeModulus& q);

BigInt sigma(const SquareFreeModulus& q);         // prod (p+1)/2
BigInt sigma_prime(const SquareFreeModulus& q);   // prod (p-1)/2, nonzero coprime squares

ResidueSet lambda0(const SquareFreeModulus& q);
ResidueSet lambda0_prime(const SquareFreeModulus& q);

// Table t[n] = epsilon(n,q) for n in [0,q), optionally restricted to units.
std::vector<std::uint8_t> square_table(const SquareFreeModulus& q, bool primed);

// Legendre symbol; tau must be an odd prime.
int legendre(std::int64_t n, std::uint64_t tau);
int legendre(const BigInt& n, std::uint64_t tau);

// ceil(6 sqrt(tau) ln tau)
std::int64_t polya_vinogradov_bound(std::uint64_t tau);

// Sum of legendre(j,tau) for j in [n, n+l). Throws ContractError if the
// Polya-Vinogradov bound is ever violated.
std::int64_t char_interval_sum(std::int64_t n, std::int64_t l, std::uint64_t tau);

}  // namespace sqavg
