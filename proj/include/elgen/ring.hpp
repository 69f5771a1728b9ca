#pragma once
// Exact arithmetic in monogenic orders B = Z[theta] and localizations
// A = B_S at finitely many inverted generators, plus finite quotients A/qA
// and the bounded searches (units, primes in progressions, coprime shifts).

#include "elgen/util.hpp"

#include <optional>

namespace elgen {

// ---- order B = Z[theta] ----------------------------------------------------

struct OrderRing {
  Vec f;        // monic integer polynomial, f[0..k], f[k] = 1
  int k = 1;    // degree
  Z disc;       // disc(f)
  Z gamma;      // conductor witness: gamma * O_K  contained in  Z[theta]
  Z index;      // [O_K : Z[theta]] for k <= 2 (1 when maximal); 0 = unknown
  IMat theta_pow;  // rows: coords of theta^k .. theta^(2k-2)
};

// errors: NotMonic, NotIrreducible
OrderRing make_order(const Vec& poly);

// product in B (coordinate vectors mod f)
Vec mul_basis(const OrderRing& B, const Vec& a, const Vec& b);
// multiplication matrix: row i = coords(theta^i * a)
IMat mult_matrix(const OrderRing& B, const Vec& a);
// field norm of a basis vector (integer for B-elements)
Z norm_basis(const OrderRing& B, const Vec& a);

// ---- localization A = B_S --------------------------------------------------

struct LocalizedRing {
  OrderRing B;
  std::vector<Vec> s;       // inverted generators (nonzero elements of B)
  std::vector<IMat> s_adj;  // adjugate of mult_matrix(s_i)
  std::vector<Z> s_det;     // det mult_matrix(s_i) = Norm(s_i)
  std::string descriptor;   // canonical one-line descriptor
  int k() const { return B.k; }
};

LocalizedRing make_ring(const Vec& poly, std::vector<Vec> s_gens);
// "order: x^2-2; invert: [2,3]"; tuple generators like (1,-1) allowed
LocalizedRing parse_ring(const std::string& descriptor);
std::string ring_descriptor(const LocalizedRing& r);

// ---- elements --------------------------------------------------------------

struct RingElement {
  const LocalizedRing* R = nullptr;
  Vec num;                    // size k
  std::vector<unsigned> den;  // exponent of each s_i in the denominator

  bool is_zero() const;
  RingElement operator+(const RingElement& o) const;
  RingElement operator-(const RingElement& o) const;
  RingElement operator*(const RingElement& o) const;
  RingElement operator-() const;
  bool operator==(const RingElement& o) const;  // cross-multiplication
  bool operator!=(const RingElement& o) const { return !(*this == o); }
};

RingElement elem_zero(const LocalizedRing& R);
RingElement elem_one(const LocalizedRing& R);
RingElement elem_int(const LocalizedRing& R, const Z& n);
RingElement elem_vec(const LocalizedRing& R, Vec v);  // element of B
// canonical form: strip s-factors greedily, clear den when num = 0
RingElement normalize(RingElement a);

Q norm(const RingElement& a);
// exact rational coordinates of a in K = Q(theta)
std::vector<Q> rational_coords(const RingElement& a);
// membership test for a rational coordinate vector; normalized element
std::optional<RingElement> try_from_rational(const LocalizedRing& R,
                                             const std::vector<Q>& c);
// a / b when it exists in A (errors NotDivisible, ZeroModulus)
RingElement divide_exact(const RingElement& a, const RingElement& b);
bool divides(const RingElement& b, const RingElement& a);  // a in bA
bool is_unit(const RingElement& a);
RingElement unit_inverse(const RingElement& a);  // errors NotAUnit
RingElement pow(const RingElement& a, const Z& e);  // e < 0 needs a unit

std::string elem_str(const RingElement& a);  // "num=[..]; den={i:e,..}"
RingElement parse_elem(const LocalizedRing& R, const std::string& text);

// ---- finite quotients A/qA -------------------------------------------------

struct FiniteQuotient {
  const LocalizedRing* R = nullptr;
  RingElement q;            // modulus
  Vec qt;                   // numerator of q (generator of the same A-ideal)
  IMat H;                   // HNF of the contraction of qA to B
  Z size;                   // |A/qA| = det H
  std::vector<Vec> s_inv;   // residues inverting each s_i

  Vec reduce(Vec v) const;
  Vec zero() const { return Vec(H.size(), 0); }
  Vec one() const;
  Vec add(const Vec& a, const Vec& b) const;
  Vec sub(const Vec& a, const Vec& b) const;
  Vec neg(const Vec& a) const;
  Vec mul(const Vec& a, const Vec& b) const;
  Vec pow(Vec b, Z e) const;  // e < 0 requires invertible base
  bool is_zero(const Vec& a) const;
  std::optional<Vec> inverse(const Vec& a) const;
  bool is_unit_residue(const Vec& a) const { return inverse(a).has_value(); }
  Vec from_element(const RingElement& a) const;
  RingElement lift(const Vec& r) const;  // canonical B-lift
  // deterministic enumeration of all residues (mixed radix over the HNF box)
  std::vector<Vec> residues(const Z& budget) const;  // errors BudgetExceeded
};

// errors: ZeroModulus
FiniteQuotient finite_quotient(const LocalizedRing& A, const RingElement& q);

struct UnitGroupData {
  const FiniteQuotient* quotient;
  std::vector<Vec> units;
  Z exponent;                  // e(qA): lcm of element orders
  std::vector<Vec> generators; // greedy small generating set
};

UnitGroupData unit_group(const FiniteQuotient& fq, const Z& budget = Z(1000000));
// exponent only: enumeration with a running-lcm early exit, no unit storage
Z quotient_exponent(const FiniteQuotient& fq, const Z& budget = Z(1000000));
Z residue_order(const FiniteQuotient& fq, const Vec& r);  // NotAUnitModulo
// least m >= 1 with a^m = 1 mod bA (errors ZeroModulus, NotAUnitModulo)
Z element_order_mod(const RingElement& a, const RingElement& b);

// x = r1 mod m1, x = r2 mod m2 for coprime A-ideals m1, m2; x given in B
RingElement crt_pair(const RingElement& r1, const RingElement& m1,
                     const RingElement& r2, const RingElement& m2);

// ---- searches ---------------------------------------------------------------

// unit of infinite multiplicative order (errors NoInfiniteUnits)
RingElement fundamental_unit_search(const LocalizedRing& A);
bool is_root_of_unity(const RingElement& u);
// bounded list of units for search loops: +-(prod s_i^e) * u0^j, deterministic
std::vector<RingElement> unit_monoid(const LocalizedRing& A, int radius);

// h = a + t*b with hO maximal and Norm(h) > 0 (errors SearchExhausted)
RingElement prime_in_progression(const RingElement& a, const RingElement& b,
                                 const Z& budget = Z(1000000));
// a0 = a mod bA with a0*B + b*gamma^2*B = B (errors NotCoprime, ZeroModulus)
RingElement coprime_shift(const LocalizedRing& A, const RingElement& a,
                          const RingElement& b);

// generators of the A-ideal spanned by list, collapsed to one generator when
// a Euclidean gcd pass converges (k = 1 always does)
struct IdealDescription {
  std::optional<RingElement> principal;  // set when collapsed
  std::vector<RingElement> gens;         // always populated (maybe empty = 0)
};
IdealDescription ideal_from_generators(const LocalizedRing& A,
                                       std::vector<RingElement> gens);

}  // namespace elgen
