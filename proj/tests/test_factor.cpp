#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "elgen/factor.hpp"

#include <deque>
#include <map>
#include <sstream>

using namespace elgen;

static RingElement ei(const LocalizedRing& A, long v) { return elem_int(A, v); }

static SquareMatrix mk2(const LocalizedRing& A, long a, long b, long c, long d) {
  SquareMatrix m = mat_identity(A, 2);
  m.e[0][0] = ei(A, a);
  m.e[0][1] = ei(A, b);
  m.e[1][0] = ei(A, c);
  m.e[1][1] = ei(A, d);
  return m;
}

static std::string qkey(const QuotMatrix& m) {
  std::ostringstream os;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      for (const Z& c : m.e[i][j]) os << c.get_str() << ",";
  return os.str();
}

// minimal elementary word lengths over the full quotient group by BFS
static std::map<std::string, int> bfs_lengths(const FiniteQuotient& F, int n) {
  std::vector<QuotMatrix> gens;
  for (const Vec& v : F.residues(Z(100000))) {
    if (F.is_zero(v)) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) {
          QuotMatrix g = qmat_identity(F, n);
          g.e[i][j] = v;
          gens.push_back(g);
        }
  }
  std::map<std::string, int> dist;
  std::deque<QuotMatrix> queue;
  QuotMatrix id = qmat_identity(F, n);
  dist[qkey(id)] = 0;
  queue.push_back(id);
  while (!queue.empty()) {
    QuotMatrix cur = queue.front();
    queue.pop_front();
    int d = dist[qkey(cur)];
    for (const QuotMatrix& g : gens) {
      QuotMatrix nxt = qmat_mul(cur, g);
      if (dist.emplace(qkey(nxt), d + 1).second) queue.push_back(nxt);
    }
  }
  return dist;
}

TEST_CASE("quotient_is_field") {
  LocalizedRing Zr = parse_ring("order: x");
  for (long p : {2, 3, 5, 7})
    CHECK(quotient_is_field(finite_quotient(Zr, ei(Zr, p))));
  CHECK_FALSE(quotient_is_field(finite_quotient(Zr, ei(Zr, 4))));
  CHECK_FALSE(quotient_is_field(finite_quotient(Zr, ei(Zr, 6))));
  CHECK_FALSE(quotient_is_field(finite_quotient(Zr, ei(Zr, 1))));

  LocalizedRing Gi = parse_ring("order: x^2+1");
  CHECK(quotient_is_field(finite_quotient(Gi, ei(Gi, 3))));       // F_9
  CHECK_FALSE(quotient_is_field(finite_quotient(Gi, ei(Gi, 5))));  // splits
}

TEST_CASE("field_factorize frozen examples") {
  LocalizedRing Zr = parse_ring("order: x");
  FiniteQuotient F2 = finite_quotient(Zr, ei(Zr, 2));
  // identity: empty word
  CHECK(field_factorize(F2, qmat_identity(F2, 2)).letters.empty());

  QuotMatrix swap2 = qmat_from_matrix(F2, mk2(Zr, 0, 1, 1, 0));
  ElementaryWord w = field_factorize(F2, swap2);
  REQUIRE(w.letters.size() == 3);
  CHECK(w.letters[0].i == 1);
  CHECK(w.letters[0].j == 2);
  CHECK(w.letters[0].v == ei(Zr, 1));
  CHECK(w.letters[1].i == 2);
  CHECK(w.letters[1].j == 1);
  CHECK(w.letters[1].v == ei(Zr, 1));
  CHECK(w.letters[2].i == 1);
  CHECK(w.letters[2].j == 2);
  CHECK(w.letters[2].v == ei(Zr, 1));

  FiniteQuotient F5 = finite_quotient(Zr, ei(Zr, 5));
  ElementaryWord w5 = field_factorize(F5, qmat_from_matrix(F5, mk2(Zr, 2, 0, 0, 3)));
  CHECK(w5.letters.size() == 4);

  // not a field / bad determinant
  FiniteQuotient F6 = finite_quotient(Zr, ei(Zr, 6));
  CHECK_THROWS_AS(field_factorize(F6, qmat_identity(F6, 2)), Error);
  QuotMatrix bad = qmat_identity(F5, 2);
  bad.e[0][0] = F5.from_element(ei(Zr, 2));
  CHECK_THROWS_AS(field_factorize(F5, bad), Error);
}

TEST_CASE("field_factorize exhaustive vs BFS oracle") {
  LocalizedRing Zr = parse_ring("order: x");
  for (long p : {2, 5}) {
    FiniteQuotient F = finite_quotient(Zr, ei(Zr, p));
    auto oracle = bfs_lengths(F, 2);
    long count = 0;
    for (const auto& [key, minlen] : oracle) ++count;
    CHECK(count == p * (p * p - 1));  // |SL(2,F_p)|
    // reconstruct every element exactly, within 2x the minimal length
    std::deque<QuotMatrix> queue;
    std::map<std::string, bool> seen;
    queue.push_back(qmat_identity(F, 2));
    seen[qkey(queue.front())] = true;
    std::vector<QuotMatrix> gens;
    for (const Vec& v : F.residues(Z(1000))) {
      if (F.is_zero(v)) continue;
      for (int pos = 0; pos < 2; ++pos) {
        QuotMatrix g = qmat_identity(F, 2);
        g.e[pos][1 - pos] = v;
        gens.push_back(g);
      }
    }
    while (!queue.empty()) {
      QuotMatrix t = queue.front();
      queue.pop_front();
      ElementaryWord w = field_factorize(F, t);
      CHECK(qmat_eq(qmat_from_word(F, 2, w), t));
      int minlen = oracle.at(qkey(t));
      CHECK((int)w.letters.size() <= 2 * minlen);
      for (const QuotMatrix& g : gens) {
        QuotMatrix nxt = qmat_mul(t, g);
        if (!seen[qkey(nxt)]) {
          seen[qkey(nxt)] = true;
          queue.push_back(nxt);
        }
      }
    }
  }
}

TEST_CASE("field_factorize on SL(3, F_2) samples") {
  LocalizedRing Zr = parse_ring("order: x");
  FiniteQuotient F = finite_quotient(Zr, ei(Zr, 2));
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    QuotMatrix t = qmat_identity(F, 3);
    for (int l = 0; l < 12; ++l) {
      int i = (int)rng.below(3), j;
      do {
        j = (int)rng.below(3);
      } while (j == i);
      QuotMatrix g = qmat_identity(F, 3);
      g.e[i][j] = F.from_element(ei(Zr, 1));
      t = qmat_mul(t, g);
    }
    ElementaryWord w = field_factorize(F, t);
    CHECK(qmat_eq(qmat_from_word(F, 3, w), t));
  }
}

TEST_CASE("sr1_witness") {
  LocalizedRing Zr = parse_ring("order: x");
  FiniteQuotient F6 = finite_quotient(Zr, ei(Zr, 6));
  auto r = [&](const FiniteQuotient& F, long a, long b) {
    return F.lift(sr1_witness(F, F.from_element(ei(Zr, a)),
                              F.from_element(ei(Zr, b))));
  };
  CHECK(r(F6, 1, 5) == ei(Zr, 0));
  CHECK(r(F6, 2, 3) == ei(Zr, 1));
  FiniteQuotient F5 = finite_quotient(Zr, ei(Zr, 5));
  CHECK(r(F5, 0, 2) == ei(Zr, 1));
  CHECK_THROWS_AS(sr1_witness(F6, F6.from_element(ei(Zr, 2)),
                              F6.from_element(ei(Zr, 4))),
                  Error);
}

TEST_CASE("vaserstein_reduce") {
  LocalizedRing Zr = parse_ring("order: x");
  RingElement q = ei(Zr, 2), qp = ei(Zr, 16);

  CHECK(vaserstein_reduce(mat_identity(Zr, 2), q, qp).letters.empty());

  SquareMatrix t = mk2(Zr, 5, 2, 2, 1);
  ElementaryWord w = vaserstein_reduce(t, q, qp);
  for (const ElementaryGenerator& g : w.letters) CHECK(divides(q, g.v));
  CHECK(is_congruence(mat_mul(t, evaluate_word(Zr, w)), qp));

  CHECK_THROWS_AS(vaserstein_reduce(mk2(Zr, 3, 2, 4, 3), q, qp), Error);
  CHECK_THROWS_AS(vaserstein_reduce(mat_identity(Zr, 2), q, ei(Zr, 2)), Error);
  CHECK_THROWS_AS(vaserstein_reduce(mat_identity(Zr, 2), q, ei(Zr, 0)), Error);

  // randomized members of Vas(2,Z;2) from level-2 elementary products
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    SquareMatrix m = mat_identity(Zr, 2);
    for (int l = 0; l < 4; ++l) {
      int i = 1 + (int)rng.below(2);
      ElementaryWord step;
      step.n = 2;
      step.letters = {{i, 3 - i, ei(Zr, 2 * rng.range(-3, 3))}};
      m = mat_mul(m, evaluate_word(Zr, step));
    }
    ElementaryWord rw = vaserstein_reduce(m, q, qp);
    for (const ElementaryGenerator& g : rw.letters) CHECK(divides(q, g.v));
    CHECK(is_congruence(mat_mul(m, evaluate_word(Zr, rw)), qp));
  }

  // Gaussian case
  LocalizedRing Gi = parse_ring("order: x^2+1");
  RingElement qg = elem_vec(Gi, {Z(1), Z(1)});
  SquareMatrix tg = mat_identity(Gi, 2);
  ElementaryWord seed;
  seed.n = 2;
  seed.letters = {{1, 2, qg * ei(Gi, 3)}, {2, 1, qg * elem_vec(Gi, {Z(0), Z(1)})}};
  tg = evaluate_word(Gi, seed);
  RingElement qpg = qg * qg * qg;
  ElementaryWord wg = vaserstein_reduce(tg, qg, qpg);
  for (const ElementaryGenerator& g : wg.letters) CHECK(divides(qg, g.v));
  CHECK(is_congruence(mat_mul(tg, evaluate_word(Gi, wg)), qpg));
}

TEST_CASE("whitehead_h_factor frozen") {
  LocalizedRing Zt = parse_ring("order: x; invert: [3]");
  RingElement u = ei(Zt, 9), q = ei(Zt, 2);
  ElementaryWord w = whitehead_h_factor(Zt, u, q);
  REQUIRE(w.letters.size() == 4);
  CHECK(w.letters[0].v == ei(Zt, 2));
  CHECK(w.letters[1].v == ei(Zt, 4));
  CHECK(w.letters[2].v == parse_elem(Zt, "num=[-2]; den={0:2}"));
  CHECK(w.letters[3].v == ei(Zt, -36));
  CHECK(mat_eq(evaluate_word(Zt, w), h_matrix(Zt, u)));
  for (const ElementaryGenerator& g : w.letters) CHECK(divides(q, g.v));

  // u = 1: all-zero letters evaluating to the identity
  ElementaryWord w1 = whitehead_h_factor(Zt, ei(Zt, 1), q);
  CHECK(mat_eq(evaluate_word(Zt, w1), mat_identity(Zt, 2)));

  LocalizedRing Zr = parse_ring("order: x");
  CHECK_THROWS_AS(whitehead_h_factor(Zr, ei(Zr, 5), ei(Zr, 2)), Error);
  // u = 3 is a unit here but 3 - 1 is not in 4A, so A1 does not apply
  CHECK_THROWS_AS(whitehead_h_factor(Zt, ei(Zt, 3), q), Error);
  // with q itself a unit the congruence is vacuous and the identity holds
  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  ElementaryWord wu = whitehead_h_factor(Zh, ei(Zh, 2), ei(Zh, 2));
  CHECK(mat_eq(evaluate_word(Zh, wu), h_matrix(Zh, ei(Zh, 2))));
}

TEST_CASE("a2, a3, a4 identities") {
  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  CHECK(a2_identity_check(Zh, ei(Zh, 1)));
  CHECK(a2_identity_check(Zh, ei(Zh, 2)));
  CHECK(a2_identity_check(Zh, ei(Zh, -4)));
  CHECK_THROWS_AS(a2_identity_check(Zh, ei(Zh, 3)), Error);

  ElementaryGenerator g3 = a3_conjugation(Zh, ei(Zh, 2), ei(Zh, 3));
  CHECK(g3.i == 2);
  CHECK(g3.j == 1);
  CHECK(g3.v == ei(Zh, 12));
  CHECK(a3_conjugation(Zh, ei(Zh, 1), ei(Zh, 5)).v == ei(Zh, 5));
  CHECK(a3_conjugation(Zh, ei(Zh, -1), ei(Zh, 7)).v == ei(Zh, 7));

  A4Conjugation c = a4_conjugation(Zh, ei(Zh, 3), ei(Zh, 1), ei(Zh, 2));
  CHECK(c.w == parse_elem(Zh, "num=[3]; den={0:2}"));
  CHECK(c.certified.i == 2);
  CHECK(c.certified.j == 1);
  CHECK(c.certified.v == parse_elem(Zh, "num=[-9]; den={0:2}"));
  CHECK(c.word.letters.size() == 21);
  CHECK(mat_eq(evaluate_word(Zh, c.word),
               evaluate_word(Zh, ElementaryWord{2, {c.certified}})));

  // u = 1 and u = -1 make w vanish
  CHECK(a4_conjugation(Zh, ei(Zh, 3), ei(Zh, 1), ei(Zh, 1)).w.is_zero());
  CHECK(a4_conjugation(Zh, ei(Zh, 1), ei(Zh, 1), ei(Zh, -1)).w.is_zero());
  // 1 + yz = 0 with u^2 != 1
  CHECK_THROWS_AS(a4_conjugation(Zh, ei(Zh, 1), ei(Zh, -1), ei(Zh, 2)), Error);
}

TEST_CASE("unit_conj_factorize") {
  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  RingElement q = ei(Zh, 3);
  SquareMatrix t = mk2(Zh, 4, 3, 9, 7);
  UnitConjFactorization fz = unit_conj_factorize(Zh, q, t);
  CHECK(fz.e1 == Z(1));
  CHECK(fz.e2 == Z(12));
  CHECK(fz.t == Z(0));
  CHECK(fz.tp == Z(3360));
  for (const ElementaryGenerator& g : fz.factors) CHECK(divides(q, g.v));
  CHECK(validate_unit_conj(fz));

  UnitConjFactorization fid = unit_conj_factorize(Zh, q, mat_identity(Zh, 2));
  for (const ElementaryGenerator& g : fid.factors) CHECK(g.v.is_zero());
  CHECK(validate_unit_conj(fid));

  LocalizedRing Zr = parse_ring("order: x");
  CHECK_THROWS_AS(unit_conj_factorize(Zr, ei(Zr, 3), mk2(Zr, 4, 3, 9, 7)), Error);
  CHECK_THROWS_AS(unit_conj_factorize(Zh, ei(Zh, 0), t), Error);
  CHECK_THROWS_AS(unit_conj_factorize(Zh, ei(Zh, 2), t), Error);  // unit ideal
  CHECK_THROWS_AS(unit_conj_factorize(Zh, q, mk2(Zh, 2, 1, 1, 1)), Error);
}

TEST_CASE("steinberg_rewrite") {
  LocalizedRing Zr = parse_ring("order: x");
  RingElement q = ei(Zr, 2);
  ElementaryGenerator x{1, 2, ei(Zr, 4)};

  // empty conjugator: the level-q split of x itself
  ElementaryWord none;
  none.n = 3;
  ElementaryWord w0 = steinberg_rewrite(Zr, none, x, q, 3);
  SquareMatrix xm = mat_identity(Zr, 3);
  xm.e[0][1] = x.v;
  CHECK(mat_eq(evaluate_word(Zr, w0), xm));
  for (const ElementaryGenerator& g : w0.letters) CHECK(divides(q, g.v));

  // commuting conjugator
  ElementaryWord gc;
  gc.n = 3;
  gc.letters = {{1, 3, ei(Zr, 1)}};
  ElementaryWord wc = steinberg_rewrite(Zr, gc, x, q, 3);
  CHECK(mat_eq(evaluate_word(Zr, wc), xm));

  // the hard case E21(1)
  ElementaryWord gh;
  gh.n = 3;
  gh.letters = {{2, 1, ei(Zr, 1)}};
  ElementaryWord wh = steinberg_rewrite(Zr, gh, x, q, 3);
  SquareMatrix target = mat_mul(
      mat_mul(evaluate_word(Zr, word_inverse(gh)), xm), evaluate_word(Zr, gh));
  CHECK(mat_eq(evaluate_word(Zr, wh), target));
  for (const ElementaryGenerator& g : wh.letters) CHECK(divides(q, g.v));

  CHECK_THROWS_AS(steinberg_rewrite(Zr, none, x, q, 2), Error);
  ElementaryGenerator low{1, 2, ei(Zr, 2)};
  CHECK_THROWS_AS(steinberg_rewrite(Zr, none, low, q, 3), Error);

  // randomized conjugators at n = 3 and n = 4
  Rng rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 3 + (int)rng.below(2);
    ElementaryWord g;
    g.n = n;
    int len = (int)rng.below(4);
    for (int l = 0; l < len; ++l) {
      int i = 1 + (int)rng.below(n), j;
      do {
        j = 1 + (int)rng.below(n);
      } while (j == i);
      g.letters.push_back({i, j, ei(Zr, rng.range(-2, 2))});
    }
    int xi = 1 + (int)rng.below(n), xj;
    do {
      xj = 1 + (int)rng.below(n);
    } while (xj == xi);
    long xv = 4 * rng.range(1, 3);
    ElementaryGenerator xr{xi, xj, ei(Zr, xv)};
    ElementaryWord w = steinberg_rewrite(Zr, g, xr, q, n);
    SquareMatrix xm2 = mat_identity(Zr, n);
    xm2.e[xi - 1][xj - 1] = xr.v;
    SquareMatrix tgt = mat_mul(
        mat_mul(evaluate_word(Zr, word_inverse(g)), xm2), evaluate_word(Zr, g));
    CHECK(mat_eq(evaluate_word(Zr, w), tgt));
    for (const ElementaryGenerator& gl : w.letters) CHECK(divides(q, gl.v));
  }

  // a localized ring with a non-rational level
  LocalizedRing Gi = parse_ring("order: x^2+1");
  RingElement qg = elem_vec(Gi, {Z(1), Z(1)});
  ElementaryWord gg;
  gg.n = 3;
  gg.letters = {{2, 1, elem_vec(Gi, {Z(0), Z(1)})}};
  ElementaryGenerator xg{1, 2, qg * qg * ei(Gi, 1)};
  ElementaryWord wg = steinberg_rewrite(Gi, gg, xg, qg, 3);
  SquareMatrix xmg = mat_identity(Gi, 3);
  xmg.e[0][1] = xg.v;
  SquareMatrix tgtg = mat_mul(
      mat_mul(evaluate_word(Gi, word_inverse(gg)), xmg), evaluate_word(Gi, gg));
  CHECK(mat_eq(evaluate_word(Gi, wg), tgtg));
  for (const ElementaryGenerator& gl : wg.letters) CHECK(divides(qg, gl.v));
}
