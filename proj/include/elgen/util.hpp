#pragma once
// Small exact-integer utilities shared across the library: error codes,
// a portable deterministic RNG, and GMP helpers.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace elgen {

using Z = mpz_class;
using Q = mpq_class;
using Vec = std::vector<Z>;  // coordinate vector in the power basis
using IMat = std::vector<Vec>;  // row-major integer matrix

enum class Err {
  NotIrreducible,
  NotMonic,
  ZeroModulus,
  NotAUnitModulo,
  NoInfiniteUnits,
  SearchExhausted,
  NotCoprime,
  NotDeterminantOne,
  NotInW,
  NotAField,
  NotInVas,
  BadIdealPair,
  NotAUnit,
  NotCongruent,
  NotDivisible,
  NotUnimodular,
  ImproperIdeal,
  DimensionTooSmall,
  LevelTooLow,
  InvalidWitness,
  BudgetExceeded,
  DegenerateEntry,
  ParseError,
  Internal,
};

const char* err_name(Err e);

struct Error : std::runtime_error {
  Err code;
  Error(Err c, const std::string& msg)
      : std::runtime_error(std::string(err_name(c)) + ": " + msg), code(c) {}
};

// ---- integer helpers ------------------------------------------------------

Z factorial(unsigned n);
Z isqrt_floor(const Z& n);                 // n >= 0
bool is_square(const Z& n, Z* root = nullptr);
bool probably_prime(const Z& n);           // BPSW-style, |n| tested as positive
Z gcd(const Z& a, const Z& b);
Z lcm(const Z& a, const Z& b);
// g = a*x + b*y
Z ext_gcd(const Z& a, const Z& b, Z& x, Z& y);
// trial division; sorted (prime, exponent) pairs of |n|, n != 0
std::vector<std::pair<Z, int>> factorize(Z n);
// Euler phi of |n| via factorize
Z euler_phi(const Z& n);
// exponent (Carmichael-style lcm of unit orders) is computed by enumeration
// elsewhere; this file keeps only generic arithmetic.

// floored division helpers
inline Z fdiv_q(const Z& a, const Z& b) {
  Z q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}
inline Z fdiv_r(const Z& a, const Z& b) {
  Z r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}
// centered remainder in (-|b|/2, |b|/2]
Z cdiv_r(const Z& a, const Z& b);

// ---- deterministic RNG ----------------------------------------------------

// splitmix64: identical stream on every platform; all randomness in the
// library flows through a seeded instance of this.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) {  // uniform in [0, n)
    if (n == 0) return 0;
    uint64_t lim = ~uint64_t(0) - (~uint64_t(0) % n);
    uint64_t v;
    do {
      v = next();
    } while (v >= lim);
    return v % n;
  }
  long range(long lo, long hi) {  // inclusive both ends
    return lo + (long)below((uint64_t)(hi - lo + 1));
  }
};

// ---- integer lattices (row convention: a lattice is the row span) ---------

// Echelonize rows over Z (HNF): pivots positive, entries above pivots reduced
// into [0, pivot). Returns the nonzero rows; if transform != nullptr it
// receives a square unimodular U with U * input = [result; 0].
IMat hnf(IMat rows, IMat* transform = nullptr);
// determinant of an upper-triangular square matrix
Z det_upper(const IMat& h);
// canonical representative of v modulo the full-rank HNF lattice h
Vec lattice_reduce(const IMat& h, Vec v);
bool lattice_contains(const IMat& h, const Vec& v);
// integer coefficients c with sum c_i * rows_i = target, if any
bool solve_in_rowspan(const IMat& rows, const Vec& target, Vec* coeffs = nullptr);
// basis of { v : v * m = 0 }
IMat kernel_rows(const IMat& m);
// { v : v * m  in rowspan(h) } for square m with det != 0; full-rank result
IMat lattice_preimage(const IMat& m, const IMat& h);
// exact determinant of a square integer matrix (Bareiss)
Z det_int(IMat m);

}  // namespace elgen
