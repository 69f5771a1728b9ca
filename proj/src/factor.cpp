// Constructive factorizations over quotients and localized rings.

#include "elgen/factor.hpp"

#include <algorithm>

namespace elgen {

// ---- quotient matrices -------------------------------------------------------

QuotMatrix qmat_identity(const FiniteQuotient& F, int n) {
  QuotMatrix m;
  m.F = &F;
  m.n = n;
  m.e.assign(n, std::vector<Vec>(n, F.zero()));
  for (int i = 0; i < n; ++i) m.e[i][i] = F.one();
  return m;
}

QuotMatrix qmat_from_matrix(const FiniteQuotient& F, const SquareMatrix& m) {
  QuotMatrix out;
  out.F = &F;
  out.n = m.n;
  out.e.assign(m.n, std::vector<Vec>(m.n, F.zero()));
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out.e[i][j] = F.from_element(m.e[i][j]);
  return out;
}

QuotMatrix qmat_mul(const QuotMatrix& x, const QuotMatrix& y) {
  const FiniteQuotient& F = *x.F;
  QuotMatrix out;
  out.F = x.F;
  out.n = x.n;
  out.e.assign(x.n, std::vector<Vec>(x.n, F.zero()));
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      Vec acc = F.zero();
      for (int t = 0; t < x.n; ++t)
        acc = F.add(acc, F.mul(x.e[i][t], y.e[t][j]));
      out.e[i][j] = acc;
    }
  return out;
}

Vec qmat_det(const QuotMatrix& m) {
  const FiniteQuotient& F = *m.F;
  if (m.n == 1) return m.e[0][0];
  Vec acc = F.zero();
  for (int c = 0; c < m.n; ++c) {
    QuotMatrix minor;
    minor.F = m.F;
    minor.n = m.n - 1;
    minor.e.assign(minor.n, std::vector<Vec>(minor.n, F.zero()));
    for (int i = 1; i < m.n; ++i)
      for (int j = 0, t = 0; j < m.n; ++j) {
        if (j == c) continue;
        minor.e[i - 1][t++] = m.e[i][j];
      }
    Vec term = F.mul(m.e[0][c], qmat_det(minor));
    acc = (c % 2 == 0) ? F.add(acc, term) : F.sub(acc, term);
  }
  return acc;
}

bool qmat_eq(const QuotMatrix& x, const QuotMatrix& y) {
  if (x.n != y.n) return false;
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j)
      if (x.e[i][j] != y.e[i][j]) return false;
  return true;
}

QuotMatrix qmat_from_word(const FiniteQuotient& F, int n,
                          const ElementaryWord& w) {
  QuotMatrix acc = qmat_identity(F, n);
  for (const ElementaryGenerator& g : w.letters) {
    QuotMatrix L = qmat_identity(F, n);
    L.e[g.i - 1][g.j - 1] = F.from_element(g.v);
    acc = qmat_mul(acc, L);
  }
  return acc;
}

bool quotient_is_field(const FiniteQuotient& F, const Z& budget) {
  if (F.size == 1) return false;
  if (probably_prime(F.size)) return true;  // a ring of prime order
  for (const Vec& r : F.residues(budget))
    if (!F.is_zero(r) && !F.is_unit_residue(r)) return false;
  return true;
}

// ---- Gaussian elimination over a field quotient --------------------------------

ElementaryWord field_factorize(const FiniteQuotient& F, const QuotMatrix& T) {
  if (!quotient_is_field(F))
    throw Error(Err::NotAField, "field_factorize: quotient is not a field");
  if (qmat_det(T) != F.one())
    throw Error(Err::NotDeterminantOne, "field_factorize: det != 1");
  int n = T.n;
  QuotMatrix M = T;
  ElementaryWord w;
  w.n = n;
  // row_r += lambda * row_c, recording the inverse letter
  auto apply = [&](int r, int c, const Vec& lam) {
    if (F.is_zero(lam)) return;
    for (int t = 0; t < n; ++t)
      M.e[r][t] = F.add(M.e[r][t], F.mul(lam, M.e[c][t]));
    ElementaryGenerator g;
    g.i = r + 1;
    g.j = c + 1;
    g.v = F.lift(F.neg(lam));
    w.letters.push_back(g);
  };
  for (int c = 0; c < n; ++c) {
    if (M.e[c][c] != F.one()) {
      int r = -1;
      for (int i = c + 1; i < n; ++i)
        if (!F.is_zero(M.e[i][c])) {
          r = i;
          break;
        }
      if (r < 0) {
        if (c + 1 >= n)
          throw Error(Err::Internal, "field_factorize: last pivot not 1");
        apply(c + 1, c, F.one());  // pivot repair: the diagonal is nonzero
        r = c + 1;
      }
      Vec inv = *F.inverse(M.e[r][c]);
      apply(c, r, F.mul(F.sub(F.one(), M.e[c][c]), inv));
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || F.is_zero(M.e[r][c])) continue;
      apply(r, c, F.neg(M.e[r][c]));
    }
  }
  if (!qmat_eq(M, qmat_identity(F, n)))
    throw Error(Err::Internal, "field_factorize: reduction failed");
  if (!qmat_eq(qmat_from_word(F, n, w), T))
    throw Error(Err::Internal, "field_factorize: word does not reconstruct");
  return w;
}

Vec sr1_witness(const FiniteQuotient& F, const Vec& a, const Vec& b) {
  for (const Vec& t : F.residues(Z(1000000)))
    if (F.is_unit_residue(F.add(a, F.mul(t, b)))) return t;
  throw Error(Err::NotUnimodular, "sr1_witness: no unit shift exists");
}

// ---- Vaserstein's Lemma 1 -------------------------------------------------------

ElementaryWord vaserstein_reduce(const SquareMatrix& T, const RingElement& q,
                                 const RingElement& qp) {
  const LocalizedRing& A = *T.R;
  RingElement one = elem_one(A);
  RingElement q2 = q * q;
  if (!(mat_det(T) == one) || !divides(q2, T.e[0][0] - one) ||
      !divides(q2, T.e[1][1] - one) || !divides(q, T.e[0][1]) ||
      !divides(q, T.e[1][0]))
    throw Error(Err::NotInVas, "vaserstein_reduce: T not in Vas(2,A;q)");
  if (qp.is_zero() || !divides(q2, qp))
    throw Error(Err::BadIdealPair, "vaserstein_reduce: q' not inside q^2");
  FiniteQuotient F = finite_quotient(A, qp);
  SquareMatrix M = T;
  ElementaryWord w;
  w.n = 2;
  auto push = [&](int i, int j, const RingElement& v) {
    if (v.is_zero()) return;
    ElementaryGenerator g;
    g.i = i;
    g.j = j;
    g.v = v;
    ElementaryWord one_letter;
    one_letter.n = 2;
    one_letter.letters.push_back(g);
    M = mat_mul(M, evaluate_word(A, one_letter));
    w.letters.push_back(g);
  };
  // pivot: make the top-left entry a unit mod q' using an E21 (value in qA)
  if (!F.is_unit_residue(F.from_element(M.e[0][0]))) {
    Vec t = sr1_witness(F, F.from_element(M.e[0][0]),
                        F.from_element(q * M.e[0][1]));
    push(2, 1, q * F.lift(t));
  }
  RingElement a1 = M.e[0][0];
  RingElement s = F.lift(*F.inverse(F.from_element(a1)));
  if (divides(qp, a1 - one)) {
    // a is already 1 mod q': a single letter clears b
    push(1, 2, -(s * M.e[0][1]));
  } else {
    // 1 - a = x*y with x = qtilde, y in qA; three letters per the row action
    RingElement x = q;
    RingElement y = divide_exact(one - a1, q);
    push(1, 2, s * (x - M.e[0][1]));
    push(2, 1, y);
    push(1, 2, -x);
  }
  // bottom-left cleanup; the determinant forces d = 1 mod q' already
  if (!divides(qp, M.e[1][0])) {
    RingElement dinv = F.lift(*F.inverse(F.from_element(M.e[1][1])));
    push(2, 1, -(M.e[1][0] * dinv));
  }
  for (const ElementaryGenerator& g : w.letters)
    if (!divides(q, g.v))
      throw Error(Err::Internal, "vaserstein_reduce: letter outside qA");
  if (!is_congruence(M, qp))
    throw Error(Err::Internal, "vaserstein_reduce: residual not in SL(2,A;q')");
  return w;
}

// ---- H(u) and the A-identities ------------------------------------------------

SquareMatrix h_matrix(const LocalizedRing& A, const RingElement& u) {
  SquareMatrix m = mat_identity(A, 2);
  m.e[0][0] = u;
  m.e[1][1] = unit_inverse(u);
  return m;
}

ElementaryWord h_word(const LocalizedRing& A, const RingElement& u) {
  RingElement one = elem_one(A);
  ElementaryWord w;
  w.n = 2;
  auto push = [&](int i, int j, const RingElement& v) {
    ElementaryGenerator g;
    g.i = i;
    g.j = j;
    g.v = v;
    w.letters.push_back(g);
  };
  push(1, 2, u);
  push(2, 1, -unit_inverse(u));
  push(1, 2, u);
  push(1, 2, -one);
  push(2, 1, one);
  push(1, 2, -one);
  return w;
}

ElementaryWord whitehead_h_factor(const LocalizedRing& A, const RingElement& u,
                                  const RingElement& q) {
  if (!is_unit(u)) throw Error(Err::NotAUnit, "whitehead_h_factor");
  RingElement one = elem_one(A);
  RingElement x = elem_zero(A), y = elem_zero(A);
  if (!(u == one)) {
    x = q;
    y = divide_exact(u - one, q);  // NotDivisible when u != 1 mod qA
    if (!divides(q, y))
      throw Error(Err::NotCongruent, "whitehead_h_factor: u != 1 mod q^2 A");
  }
  ElementaryWord w;
  w.n = 2;
  auto push = [&](int i, int j, const RingElement& v) {
    ElementaryGenerator g;
    g.i = i;
    g.j = j;
    g.v = v;
    w.letters.push_back(g);
  };
  push(1, 2, x);
  push(2, 1, y);
  push(1, 2, -(unit_inverse(u) * x));
  push(2, 1, -(u * y));
  if (!mat_eq(evaluate_word(A, w), h_matrix(A, u)))
    throw Error(Err::Internal, "whitehead_h_factor: word does not evaluate to H(u)");
  return w;
}

bool a2_identity_check(const LocalizedRing& A, const RingElement& u) {
  if (!is_unit(u)) throw Error(Err::NotAUnit, "a2_identity_check");
  RingElement one = elem_one(A);
  RingElement ui = unit_inverse(u);
  ElementaryWord w;
  w.n = 2;
  auto push = [&](int i, int j, const RingElement& v) {
    ElementaryGenerator g;
    g.i = i;
    g.j = j;
    g.v = v;
    w.letters.push_back(g);
  };
  push(1, 2, one);
  for (const ElementaryGenerator& g : h_word(A, u).letters) w.letters.push_back(g);
  push(1, 2, one - ui * ui);
  push(1, 2, -one);
  return mat_eq(evaluate_word(A, w), h_matrix(A, u));
}

ElementaryGenerator a3_conjugation(const LocalizedRing& A, const RingElement& u,
                                   const RingElement& x) {
  if (!is_unit(u)) throw Error(Err::NotAUnit, "a3_conjugation");
  ElementaryGenerator out;
  out.i = 2;
  out.j = 1;
  out.v = x * u * u;
  SquareMatrix e21 = mat_identity(A, 2);
  e21.e[1][0] = x;
  SquareMatrix h = h_matrix(A, u);
  SquareMatrix hinv = h_matrix(A, unit_inverse(u));
  SquareMatrix lhs = mat_mul(mat_mul(hinv, e21), h);
  SquareMatrix rhs = mat_identity(A, 2);
  rhs.e[1][0] = out.v;
  if (!mat_eq(lhs, rhs))
    throw Error(Err::Internal, "a3_conjugation: identity failed");
  return out;
}

A4Conjugation a4_conjugation(const LocalizedRing& A, const RingElement& y,
                             const RingElement& z, const RingElement& u) {
  if (!is_unit(u)) throw Error(Err::NotAUnit, "a4_conjugation");
  RingElement one = elem_one(A);
  RingElement den = one + y * z;
  A4Conjugation out;
  if (den.is_zero()) {
    if (!(u * u == one))
      throw Error(Err::NotDivisible, "a4_conjugation: 1 + yz = 0 and u^2 != 1");
    out.w = elem_zero(A);
  } else {
    out.w = divide_exact(u * u - one, den);
  }
  out.c = out.w * (one - z + y * z);
  ElementaryWord w;
  w.n = 2;
  auto push = [&](int i, int j, const RingElement& v) {
    ElementaryGenerator g;
    g.i = i;
    g.j = j;
    g.v = v;
    w.letters.push_back(g);
  };
  // M(y,z) = E12(z-1) E12(1) E21(y) E12(-1)
  push(1, 2, z - one);
  push(1, 2, one);
  push(2, 1, y);
  push(1, 2, -one);
  for (const ElementaryGenerator& g : h_word(A, unit_inverse(u)).letters)
    w.letters.push_back(g);
  push(1, 2, out.c);
  // M(y,z)^{-1}
  push(1, 2, one);
  push(2, 1, -y);
  push(1, 2, -one);
  push(1, 2, one - z);
  for (const ElementaryGenerator& g : h_word(A, u).letters) w.letters.push_back(g);
  out.word = w;
  out.certified.i = 2;
  out.certified.j = 1;
  out.certified.v = -(out.w * y);
  SquareMatrix target = mat_identity(A, 2);
  target.e[1][0] = out.certified.v;
  if (!mat_eq(evaluate_word(A, w), target))
    throw Error(Err::Internal, "a4_conjugation: identity failed");
  return out;
}

// ---- five-factor unit conjugation ----------------------------------------------

UnitConjFactorization unit_conj_factorize(const LocalizedRing& A,
                                          const RingElement& q,
                                          const SquareMatrix& T) {
  if (q.is_zero() || is_unit(q))
    throw Error(Err::ImproperIdeal, "unit_conj_factorize: q must be proper nonzero");
  RingElement one = elem_one(A);
  if (!(mat_det(T) == one) || !is_congruence(T, q))
    throw Error(Err::NotCongruent, "unit_conj_factorize: T not in SL(2,A;q)");
  RingElement u = fundamental_unit_search(A);  // NoInfiniteUnits
  Z K = eight_k_factorial(A.k());
  UnitConjFactorization fz;
  fz.R = &A;
  fz.q = q;
  fz.T = T;
  fz.u0 = pow(u, K);
  RingElement a = T.e[0][0], b = T.e[0][1], c = T.e[1][0], d = T.e[1][1];
  fz.e1 = quotient_exponent(finite_quotient(A, a));
  fz.ap = f_prime_search(A, a, b * b, fz.e1, one);
  fz.z = b.is_zero() ? elem_zero(A) : divide_exact(fz.ap - a, b * b);
  fz.e2 = quotient_exponent(finite_quotient(A, fz.ap));
  Z x0, y0;
  Z g0 = ext_gcd(fz.e1, fz.e2, x0, y0);
  if (K % g0 != 0)
    throw Error(Err::Internal, "unit_conj_factorize: gcd(e1,e2) does not divide (8k)!");
  Z t = cdiv_r(x0 * (K / g0), fz.e2 / g0);  // centered to keep powers small
  Z tp = (K - t * fz.e1) / fz.e2;
  fz.t = t;
  fz.tp = tp;
  fz.x = divide_exact(pow(u, 2 * t * fz.e1) - one, a);
  fz.y = divide_exact(pow(u, -2 * t * fz.e1) - one, a);
  fz.w2 = pow(u, 2 * tp * fz.e2);
  fz.xp = divide_exact(fz.w2 - one, fz.ap);
  fz.yp = divide_exact(pow(u, -2 * tp * fz.e2) - one, fz.ap);
  RingElement cp = c + d * fz.z * b;
  auto g21 = [](const RingElement& v) {
    ElementaryGenerator g;
    g.i = 2;
    g.j = 1;
    g.v = v;
    return g;
  };
  auto g12 = [](const RingElement& v) {
    ElementaryGenerator g;
    g.i = 1;
    g.j = 2;
    g.v = v;
    return g;
  };
  fz.factors[0] = g21(fz.x * c * fz.w2 + fz.xp * cp);
  fz.factors[1] = g21(fz.z * b);
  fz.factors[2] = g12(fz.yp * b);
  fz.factors[3] = g21(-(fz.z * b * fz.w2));
  fz.factors[4] = g12(fz.y * b * unit_inverse(fz.w2));
  if (!validate_unit_conj(fz))
    throw Error(Err::Internal, "unit_conj_factorize: validation failed");
  return fz;
}

bool validate_unit_conj(const UnitConjFactorization& fz) {
  const LocalizedRing& A = *fz.R;
  RingElement one = elem_one(A);
  Z K = eight_k_factorial(A.k());
  if (!(mat_det(fz.T) == one) || !is_congruence(fz.T, fz.q)) return false;
  RingElement a = fz.T.e[0][0], b = fz.T.e[0][1];
  // proof side data
  if (!(fz.ap == a + fz.z * b * b)) return false;
  if (K % gcd(fz.e1, fz.e2) != 0) return false;
  if (fz.t * fz.e1 + fz.tp * fz.e2 != K) return false;
  RingElement u2te = fz.x * a + one;   // u^{2 t e1}
  RingElement u2tei = fz.y * a + one;  // u^{-2 t e1}
  if (!(u2te * u2tei == one)) return false;
  if (!(fz.w2 == fz.xp * fz.ap + one)) return false;
  if (!((fz.yp * fz.ap + one) * fz.w2 == one)) return false;
  for (const ElementaryGenerator& g : fz.factors)
    if (!divides(fz.q, g.v)) return false;
  // H(u0)^{-1} T H(u0) = F1 T F2 F3 F4 F5
  SquareMatrix lhs =
      mat_mul(mat_mul(h_matrix(A, unit_inverse(fz.u0)), fz.T), h_matrix(A, fz.u0));
  auto gen_mat = [&](const ElementaryGenerator& g) {
    SquareMatrix m = mat_identity(A, 2);
    m.e[g.i - 1][g.j - 1] = g.v;
    return m;
  };
  SquareMatrix rhs = mat_mul(gen_mat(fz.factors[0]), fz.T);
  for (int i = 1; i < 5; ++i) rhs = mat_mul(rhs, gen_mat(fz.factors[i]));
  return mat_eq(lhs, rhs);
}

// ---- Steinberg rewriting ---------------------------------------------------------

namespace {

// rank-one symbol I + v * u * w^T with u = a1 e_i + a2 e_j (column) and
// w = b1 e_j + b2 e_i (row); the invariant a1 b2 + a2 b1 = 0 makes it
// closed under in-pair conjugations, and out-of-pair updates split off
// exactly-commuting honest letters (which are the a=(1,0), b=(1,0) case).
struct STok {
  int i, j;
  RingElement v;
  RingElement a1, a2, b1, b2;
};

}  // namespace

ElementaryWord steinberg_rewrite(const LocalizedRing& A,
                                 const ElementaryWord& g,
                                 const ElementaryGenerator& x,
                                 const RingElement& q, int n) {
  if (n < 3) throw Error(Err::DimensionTooSmall, "steinberg_rewrite: n < 3");
  if (!divides(q * q, x.v))
    throw Error(Err::LevelTooLow, "steinberg_rewrite: x not at level q^2");
  if (x.i < 1 || x.i > n || x.j < 1 || x.j > n)
    throw Error(Err::DimensionTooSmall, "steinberg_rewrite: index out of range");
  RingElement one = elem_one(A);
  RingElement zero = elem_zero(A);
  std::vector<STok> toks;
  toks.push_back({x.i, x.j, x.v, one, zero, one, zero});
  for (const ElementaryGenerator& L : g.letters) {
    int k = L.i, l = L.j;
    const RingElement& c = L.v;
    std::vector<STok> next;
    for (const STok& t : toks) {
      bool kin = (k == t.i || k == t.j), lin = (l == t.i || l == t.j);
      if (!kin && !lin) {
        next.push_back(t);
        continue;
      }
      if (kin && lin) {
        // in-pair update; the orthogonality a1 b2 + a2 b1 = 0 is preserved
        STok s = t;
        if (k == t.i) {  // (k,l) = (i,j)
          s.a1 = t.a1 - c * t.a2;
          s.b1 = t.b1 + c * t.b2;
        } else {  // (k,l) = (j,i)
          s.a2 = t.a2 - c * t.a1;
          s.b2 = t.b2 + c * t.b1;
        }
        next.push_back(s);
        continue;
      }
      next.push_back(t);
      if (lin && !kin) {
        // u gains a component on e_k: split it off as two honest letters
        RingElement ul = (l == t.i) ? t.a1 : t.a2;
        RingElement s1 = -(c * ul * t.v * t.b1);  // at (k, j)
        RingElement s2 = -(c * ul * t.v * t.b2);  // at (k, i)
        if (!s1.is_zero()) next.push_back({k, t.j, s1, one, zero, one, zero});
        if (!s2.is_zero()) next.push_back({k, t.i, s2, one, zero, one, zero});
      } else {
        // w gains a component on e_l
        RingElement wk = (k == t.i) ? t.b2 : t.b1;
        RingElement s1 = c * wk * t.v * t.a1;  // at (i, l)
        RingElement s2 = c * wk * t.v * t.a2;  // at (j, l)
        if (!s1.is_zero()) next.push_back({t.i, l, s1, one, zero, one, zero});
        if (!s2.is_zero()) next.push_back({t.j, l, s2, one, zero, one, zero});
      }
    }
    toks = std::move(next);
  }
  // expand each token as the commutator [P, Q] with P = I + a u e_m^T and
  // Q = I + b e_m w^T for the third index m: eight letters, all at level q
  ElementaryWord out;
  out.n = n;
  auto push = [&](int i, int j, const RingElement& v) {
    if (v.is_zero()) return;
    ElementaryGenerator gg;
    gg.i = i;
    gg.j = j;
    gg.v = v;
    out.letters.push_back(gg);
  };
  for (const STok& t : toks) {
    if (t.v.is_zero()) continue;
    int m = 1;
    while (m == t.i || m == t.j) ++m;
    RingElement a = q;
    RingElement b = divide_exact(t.v, q);
    push(t.i, m, a * t.a1);
    push(t.j, m, a * t.a2);
    push(m, t.j, b * t.b1);
    push(m, t.i, b * t.b2);
    push(t.j, m, -(a * t.a2));
    push(t.i, m, -(a * t.a1));
    push(m, t.i, -(b * t.b2));
    push(m, t.j, -(b * t.b1));
  }
  out = word_simplify(out);
  for (const ElementaryGenerator& gg : out.letters)
    if (!divides(q, gg.v))
      throw Error(Err::Internal, "steinberg_rewrite: letter outside qA");
  SquareMatrix xmat = mat_identity(A, n);
  xmat.e[x.i - 1][x.j - 1] = x.v;
  SquareMatrix target = mat_mul(
      mat_mul(evaluate_word(A, word_inverse(g)), xmat), evaluate_word(A, g));
  if (!mat_eq(evaluate_word(A, out), target))
    throw Error(Err::Internal, "steinberg_rewrite: evaluation mismatch");
  return out;
}

}  // namespace elgen
