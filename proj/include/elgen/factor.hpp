#pragma once
// Constructive factorizations: Gaussian elimination over field quotients,
// Vaserstein's Lemma-1 reduction, the A1-A4 identities, the five-elementary
// unit-conjugation factorization, and Steinberg rewriting for n >= 3.

#include "elgen/props.hpp"

namespace elgen {

// ---- matrices over a finite quotient ------------------------------------------

struct QuotMatrix {
  const FiniteQuotient* F = nullptr;
  int n = 0;
  std::vector<std::vector<Vec>> e;  // row-major residues
};

QuotMatrix qmat_identity(const FiniteQuotient& F, int n);
QuotMatrix qmat_from_matrix(const FiniteQuotient& F, const SquareMatrix& m);
QuotMatrix qmat_mul(const QuotMatrix& x, const QuotMatrix& y);
Vec qmat_det(const QuotMatrix& m);  // Laplace expansion, n <= 6
bool qmat_eq(const QuotMatrix& x, const QuotMatrix& y);
// evaluate a word whose letter values are B-lifts, reduced into F
QuotMatrix qmat_from_word(const FiniteQuotient& F, int n,
                          const ElementaryWord& w);

// size 1, a prime count, or exhaustive invertibility of nonzero residues
bool quotient_is_field(const FiniteQuotient& F, const Z& budget = Z(1000000));

// row reduction by elementary matrices; letters carry canonical lifts and
// evaluate_word over A reduces to T.  errors: NotAField, NotDeterminantOne
ElementaryWord field_factorize(const FiniteQuotient& F, const QuotMatrix& T);

// first t in residue-enumeration order with a + t*b a unit
// errors: NotUnimodular
Vec sr1_witness(const FiniteQuotient& F, const Vec& a, const Vec& b);

// ---- Vaserstein's Lemma 1 -------------------------------------------------------

// T in Vas(2,A;q) (diag = 1 mod q^2, offdiag = 0 mod q); word w over
// LU(2,qA) with T*eval(w) = Id mod q'A.  errors: NotInVas, BadIdealPair
ElementaryWord vaserstein_reduce(const SquareMatrix& T, const RingElement& q,
                                 const RingElement& qp);

// ---- Whitehead H(u) and the A-identities ----------------------------------------

SquareMatrix h_matrix(const LocalizedRing& A, const RingElement& u);
// H(u) = E12(u) E21(-1/u) E12(u) E12(-1) E21(1) E12(-1), six letters
ElementaryWord h_word(const LocalizedRing& A, const RingElement& u);

// A1: u = 1 mod q^2 A gives H(u) = E12(x) E21(y) E12(-x/u) E21(-u y) with
// x = qtilde, y = (u-1)/x, both in qA.  errors: NotAUnit, NotCongruent
ElementaryWord whitehead_h_factor(const LocalizedRing& A, const RingElement& u,
                                  const RingElement& q);

// A2: E12(1) H(u) E12(1 - 1/u^2) E12(-1) = H(u), checked by evaluation
bool a2_identity_check(const LocalizedRing& A, const RingElement& u);

// A3: H(u)^{-1} E21(x) H(u) = E21(x u^2).  errors: NotAUnit
ElementaryGenerator a3_conjugation(const LocalizedRing& A, const RingElement& u,
                                   const RingElement& x);

// A4: M(y,z) H(u)^{-1} E12(c) M(y,z)^{-1} H(u) = E21(-w y) where
// (1+yz) w = u^2 - 1 and c = w(1 - z + yz).  errors: NotAUnit, NotDivisible
struct A4Conjugation {
  RingElement w, c;
  ElementaryWord word;            // the expanded 21-letter left-hand side
  ElementaryGenerator certified;  // E21(-w y)
};
A4Conjugation a4_conjugation(const LocalizedRing& A, const RingElement& y,
                             const RingElement& z, const RingElement& u);

// ---- five-factor unit conjugation (UNIT(r,5)) -------------------------------------

struct UnitConjFactorization {
  const LocalizedRing* R = nullptr;
  RingElement q, u0;  // u0 = u^{(8k)!} for the fundamental-search unit u
  SquareMatrix T;
  std::array<ElementaryGenerator, 5> factors;
  // side data: H(u0)^{-1} T H(u0) = F1 * T * F2 * F3 * F4 * F5
  RingElement ap;        // a' = a + z b^2
  RingElement z, w2;     // w2 = u^{2 t' e2}
  RingElement x, y;      // u^{2 t e1} = a x + 1, u^{-2 t e1} = a y + 1
  RingElement xp, yp;    // same for a', t'
  Z t, tp, e1, e2;       // Bezout: t e1 + t' e2 = (8k)!
};

// errors: NoInfiniteUnits, ImproperIdeal, NotCongruent, SearchExhausted
UnitConjFactorization unit_conj_factorize(const LocalizedRing& A,
                                          const RingElement& q,
                                          const SquareMatrix& T);
bool validate_unit_conj(const UnitConjFactorization& fz);

// ---- Steinberg rewriting ------------------------------------------------------------

// word over LU(n, qA) evaluating to g^{-1} x g for x in LU(n, q^2 A);
// closed rewriting over rank-one tokens plus spawned honest letters.
// errors: DimensionTooSmall, LevelTooLow
ElementaryWord steinberg_rewrite(const LocalizedRing& A,
                                 const ElementaryWord& g,
                                 const ElementaryGenerator& x,
                                 const RingElement& q, int n);

}  // namespace elgen
