#pragma once
// Ring-property witnesses: SR1 brute force over finite quotients, GEN(t,1)
// via coprime shift + prime search, EXP(2(8k)!,2) by the two-instance recipe,
// norm-image counts, the M-set / CONJ machinery, six-prime decompositions,
// and Serre level ideals.  Every witness revalidates from scratch.

#include "elgen/matgroup.hpp"

#include <array>

namespace elgen {

Z eight_k_factorial(int k);  // (8k)!, exact

// ---- SR1 over a finite quotient ---------------------------------------------

// exhaustive: every unimodular pair (a0,a1) admits t with a0 + t*a1 a unit
bool check_sr1(const FiniteQuotient& fq, const Z& budget = Z(1000000));

// ---- GEN(t,1) -----------------------------------------------------------------

struct GenWitness {
  const LocalizedRing* R = nullptr;
  RingElement a, b, h;  // h = a mod bA, B/hB a finite field (or trivial)
  Z t;
  Z unit_count;  // |U(hA)|
  Z exponent;    // e(hA)
  Vec coset_gen;  // residue whose class generates U(hA)/U(hA)^t
};

// errors: SearchExhausted (also NotCoprime from the shift)
GenWitness gen_witness(const LocalizedRing& A, const RingElement& a,
                       const RingElement& b, const Z& t);
// independent recheck: congruence + exhaustive cyclicity of the t-quotient
bool validate_gen_witness(const GenWitness& w);

// ---- Lemma 4.3 searches --------------------------------------------------------

// f' = f mod gA with gcd(e(f'A), n) | (8k)! and f'A + hA = A.
// Direct zigzag search over f + j*g (skipping zero and units); the quotient
// exponent is computed exactly per candidate.  errors: SearchExhausted
RingElement f_prime_search(const LocalizedRing& A, const RingElement& f,
                           const RingElement& g, const Z& n,
                           const RingElement& h, const Z& budget = Z(20000));

// cardinality of the image of Norm: U(p^r O) -> U(p^r Z), by enumeration
Z norm_image_size(const Z& p, unsigned r, const OrderRing& O,
                  const Z& budget = Z(1000000));

// ---- EXP(2(8k)!, 2) -------------------------------------------------------------

struct ExpWitness {
  const LocalizedRing* R = nullptr;
  RingElement q, a, b;  // instance (a,b) in W(qA)
  Z t;                  // 2*(8k)!
  RingElement ap, c, d;  // a' and the completion [[a',b],[c,d]]
  // per i = 1..2 (indexed 0,1 here)
  std::array<RingElement, 2> u, f, g, bp, dp;
  // construction side data (zeroed on the easy paths)
  RingElement b0;      // b / qtilde
  RingElement bprime;  // output of the f-prime search
  Z alpha1, alpha2, t1, t2;  // alpha1*t1 + alpha2*t2 = (8k)!
};

// errors: NotInW, SearchExhausted
ExpWitness exp_witness(const LocalizedRing& A, const RingElement& q,
                       const RingElement& a, const RingElement& b);
// the six conditions, checked with exact arithmetic only
bool validate_exp_witness(const ExpWitness& w);

// ---- UNIT support ----------------------------------------------------------------

// unit u = u0^{e(qA)} with u = 1 mod qA and u^4 != 1; errors: NoInfiniteUnits
RingElement unit_prop_unit(const LocalizedRing& A, const RingElement& q);

// ---- M-set / CONJ machinery -------------------------------------------------------

struct ConjMWitness {
  const LocalizedRing* R = nullptr;
  RingElement q, y, z, u1, u2;  // 1 + y*z*u1^2 = u2^2, z = +-1 mod qA
};

// bounded search over z in +-1 + qA and monoid units; errors: SearchExhausted
ConjMWitness mset_membership(const LocalizedRing& A, const RingElement& q,
                             const RingElement& y, const Z& budget = Z(100000));
bool validate_mset_witness(const ConjMWitness& w);

struct ConjData {
  const LocalizedRing* R = nullptr;
  RingElement q;  // the caller's level
  Z qhat;         // enlarged rational modulus (multiple of q in A)
  Z e;            // exponent of U(qhat Z), divisible by k!
  Z t, a;         // t^e - 1 = a*qhat mod qhat^2, gcd(a, qhat) = 1
  std::vector<RingElement> D;  // <= k+1 elements; Z-span contains q'B
  RingElement b;               // t^(e-1) * a * prod(a + qhat*d0)
  RingElement u, y;            // unit u = 1 mod qhat^2 b A, y = u^2 - 1
  RingElement qp;              // q' = t^(e-1) * qhat
  RingElement qpp;             // q'' = qhat * y / u^2
  Z ny, n0, n1;                // |Norm(y)| = n0*n1, n1 carrying the qhat primes
  Z r, m;                      // progression class; m = 2|Norm(y)|, gcd(r,m)=1
};

// errors: NoInfiniteUnits, SearchExhausted
ConjData build_conj_data(const LocalizedRing& A, const RingElement& q);
bool validate_conj_data(const ConjData& cd);

struct SixPrimeDecomposition {
  Z t, r, m;
  std::array<Z, 6> p;  // t = p0+p1+p2-p3-p4-p5, each prime = r mod m
};

// errors: SearchExhausted
SixPrimeDecomposition six_prime_decompose(const Z& t, const Z& r, const Z& m,
                                          const Z& budget = Z(1000000));
bool validate_six_prime(const SixPrimeDecomposition& d);

// target (in q'm q''A) written as a sum of <= bound M-set elements via the
// claim recipe: basis expansion over D, six-prime sums, sign and s^-2 closure.
// errors: SearchExhausted, NotDivisible
std::vector<ConjMWitness> mset_sum_decompose(const LocalizedRing& A,
                                             const RingElement& q,
                                             const RingElement& target,
                                             int bound, const ConjData& cd);

// ---- Serre level ideal ---------------------------------------------------------

struct SerreLevel {
  const LocalizedRing* R = nullptr;
  RingElement u;      // unit with u^2 = 1 mod cA
  RingElement level;  // generator of (u^4 - 1)A; zero element = zero ideal
};

// errors: DegenerateEntry (lower-left entry c = 0)
SerreLevel serre_level(const LocalizedRing& A, const SquareMatrix& T);

}  // namespace elgen
