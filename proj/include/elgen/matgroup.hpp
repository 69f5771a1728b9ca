#pragma once
// Matrices over a localized ring, elementary generators/words, congruence
// checks, W(q) pairs with their SL2 completions, and level ideals.

#include "elgen/ring.hpp"

namespace elgen {

struct SquareMatrix {
  const LocalizedRing* R = nullptr;
  int n = 0;
  std::vector<std::vector<RingElement>> e;  // row-major
};

SquareMatrix mat_identity(const LocalizedRing& R, int n);
SquareMatrix mat_mul(const SquareMatrix& x, const SquareMatrix& y);
SquareMatrix mat_add(const SquareMatrix& x, const SquareMatrix& y);
SquareMatrix mat_scale(const RingElement& c, const SquareMatrix& x);
RingElement mat_det(const SquareMatrix& m);  // Laplace expansion, n <= 6
bool mat_eq(const SquareMatrix& x, const SquareMatrix& y);
std::string mat_str(const SquareMatrix& m);

// one-based indices, i != j; E_{i,j}(v) = Id + v * (unit at row i, col j)
struct ElementaryGenerator {
  int i = 1, j = 2;
  RingElement v;
};

struct ElementaryWord {
  int n = 2;
  std::vector<ElementaryGenerator> letters;
};

size_t word_length(const ElementaryWord& w);
// formal inverse: reversed letters with negated values
ElementaryWord word_inverse(const ElementaryWord& w);
ElementaryWord word_concat(const ElementaryWord& a, const ElementaryWord& b);
SquareMatrix evaluate_word(const LocalizedRing& R, const ElementaryWord& w);
// drop zero letters and merge adjacent letters in the same position
ElementaryWord word_simplify(ElementaryWord w);

// conjugated letters g^{-1} E g with g elementary words (the LU◁ generators)
struct ConjugatedLetter {
  ElementaryWord conj;
  ElementaryGenerator gen;
};
struct ConjugatedWord {
  int n = 2;
  std::vector<ConjugatedLetter> letters;
};
SquareMatrix evaluate_conjugated(const LocalizedRing& R, const ConjugatedWord& w);

// T = Id mod qA entrywise (errors NotDeterminantOne)
bool is_congruence(const SquareMatrix& t, const RingElement& q);

// (a, b) = (1, 0) mod q with aA + bA = A
struct WPair {
  const LocalizedRing* R = nullptr;
  RingElement q, a, b;
};
// validates the membership conditions (errors NotInW)
WPair make_wpair(const LocalizedRing& A, const RingElement& q,
                 const RingElement& a, const RingElement& b);
// [[a,b],[c,d]] in SL(2,A;qA): Bezout, CRT correction, |Norm(c)| tie-break
SquareMatrix complete_to_sl2(const WPair& p);

// ideal generated by off-diagonal entries and within-matrix differences of
// diagonal entries; zero ideal for scalar-only input
IdealDescription level_ideal(const LocalizedRing& A,
                             const std::vector<SquareMatrix>& x);

}  // namespace elgen
