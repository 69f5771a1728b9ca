#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "elgen/ring.hpp"

#include <map>

using namespace elgen;

// ---- independent oracles ----------------------------------------------------

// Norm oracle: N(g(theta)) = Res(f, g) for monic f, computed by rational
// Gaussian elimination on the Sylvester matrix (independent of the library's
// Bareiss code path).
static Q resultant_oracle(const Vec& f, const Vec& g_in) {
  Vec g = g_in;
  while (g.size() > 1 && g.back() == 0) g.pop_back();
  int df = (int)f.size() - 1, dg = (int)g.size() - 1;
  int n = df + dg;
  if (n == 0) return Q(1);
  std::vector<std::vector<Q>> s(n, std::vector<Q>(n, Q(0)));
  for (int i = 0; i < dg; ++i)
    for (int j = 0; j <= df; ++j) s[i][i + j] = Q(f[df - j]);
  for (int i = 0; i < df; ++i)
    for (int j = 0; j <= dg; ++j) s[dg + i][i + j] = Q(g[dg - j]);
  Q det(1);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (s[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return Q(0);
    if (piv != c) {
      std::swap(s[piv], s[c]);
      det = -det;
    }
    det *= s[c][c];
    for (int r = c + 1; r < n; ++r) {
      if (s[r][c] == 0) continue;
      Q m = s[r][c] / s[c][c];
      for (int j = c; j < n; ++j) s[r][j] -= m * s[c][j];
    }
  }
  det.canonicalize();
  return det;
}

static Q norm_oracle(const LocalizedRing& A, const RingElement& a) {
  Q n = resultant_oracle(A.B.f, a.num);
  for (size_t i = 0; i < a.den.size(); ++i) {
    Q sd = resultant_oracle(A.B.f, A.s[i]);
    for (unsigned j = 0; j < a.den[i]; ++j) n /= sd;
  }
  n.canonicalize();
  return n;
}

// brute-force size of B/L for an HNF lattice by counting box points
static Z box_count(const IMat& h) {
  Z n = 1;
  for (size_t i = 0; i < h.size(); ++i) n *= h[i][i];
  return n;
}

// ---- orders -----------------------------------------------------------------

TEST_CASE("make_order basics and discriminants") {
  OrderRing zz = make_order({Z(0), Z(1)});  // x
  CHECK(zz.k == 1);
  CHECK(zz.disc == 1);
  CHECK(zz.gamma == 1);

  OrderRing gauss = make_order({Z(1), Z(0), Z(1)});  // x^2+1
  CHECK(gauss.disc == -4);
  CHECK(gauss.index == 1);
  CHECK(gauss.gamma == 1);

  OrderRing sqrt2 = make_order({Z(-2), Z(0), Z(1)});  // x^2-2
  CHECK(sqrt2.disc == 8);
  CHECK(sqrt2.gamma == 1);

  OrderRing sqrt5 = make_order({Z(-5), Z(0), Z(1)});  // x^2-5: index 2 order
  CHECK(sqrt5.disc == 20);
  CHECK(sqrt5.index == 2);
  CHECK(sqrt5.gamma == 2);

  OrderRing golden = make_order({Z(-1), Z(-1), Z(1)});  // x^2-x-1
  CHECK(golden.disc == 5);
  CHECK(golden.gamma == 1);

  OrderRing cub = make_order({Z(-2), Z(0), Z(0), Z(1)});  // x^3-2
  CHECK(cub.disc == -108);
  CHECK(cub.gamma == 108);

  CHECK_THROWS_AS(make_order({Z(1), Z(2)}), Error);             // not monic
  CHECK_THROWS_AS(make_order({Z(-4), Z(0), Z(1)}), Error);      // (x-2)(x+2)
  CHECK_THROWS_AS(make_order({Z(0), Z(0), Z(1)}), Error);       // x^2
  CHECK_THROWS_AS(make_order({Z(1), Z(2), Z(1)}), Error);       // (x+1)^2
  CHECK_NOTHROW(make_order({Z(1), Z(0), Z(0), Z(0), Z(1)}));    // x^4+1
  CHECK_THROWS_AS(make_order({Z(1), Z(2), Z(3), Z(2), Z(1)}), Error);
}

TEST_CASE("basis multiplication against schoolbook identities") {
  OrderRing g = make_order({Z(1), Z(0), Z(1)});  // i^2 = -1
  Vec i = {Z(0), Z(1)};
  CHECK(mul_basis(g, i, i) == Vec{Z(-1), Z(0)});
  // (1+2i)(3-i) = 3 - i + 6i + 2 = 5 + 5i
  CHECK(mul_basis(g, {Z(1), Z(2)}, {Z(3), Z(-1)}) == Vec{Z(5), Z(5)});

  OrderRing c = make_order({Z(-2), Z(0), Z(0), Z(1)});  // t^3 = 2
  Vec t = {Z(0), Z(1), Z(0)};
  Vec t2 = mul_basis(c, t, t);
  CHECK(t2 == Vec{Z(0), Z(0), Z(1)});
  CHECK(mul_basis(c, t2, t) == Vec{Z(2), Z(0), Z(0)});
}

TEST_CASE("norms match the resultant oracle") {
  Rng rng(7);
  std::vector<Vec> polys = {{Z(0), Z(1)},
                            {Z(1), Z(0), Z(1)},
                            {Z(-2), Z(0), Z(1)},
                            {Z(-1), Z(-1), Z(1)},
                            {Z(-2), Z(0), Z(0), Z(1)}};
  for (auto& f : polys) {
    LocalizedRing A = make_ring(f, {});
    for (int trial = 0; trial < 40; ++trial) {
      Vec v(A.k());
      for (auto& c : v) c = Z(rng.range(-9, 9));
      RingElement a = elem_vec(A, v);
      CHECK(norm(a) == norm_oracle(A, a));
      CHECK(norm(a) == Q(norm_basis(A.B, v)));
    }
  }
  // with denominators
  LocalizedRing A = make_ring({Z(-2), Z(0), Z(1)}, {{Z(2)}});
  RingElement half = parse_elem(A, "num=[1]; den={0:1}");
  CHECK(norm(half) == Q(1, 4));
  CHECK(norm(half) == norm_oracle(A, half));
}

// ---- ring descriptors ---------------------------------------------------------

TEST_CASE("descriptor round trip") {
  LocalizedRing A = make_ring({Z(-2), Z(0), Z(1)}, {{Z(2)}, {Z(3)}});
  CHECK(ring_descriptor(A) == "order: x^2-2; invert: [2,3]");
  LocalizedRing B = parse_ring(ring_descriptor(A));
  CHECK(ring_descriptor(B) == ring_descriptor(A));

  LocalizedRing C = parse_ring("order: x; invert: [2]");
  CHECK(C.k() == 1);
  CHECK(C.s.size() == 1);

  LocalizedRing D = parse_ring("order: x^2+1; invert: [(1,1)]");
  CHECK(D.s[0] == Vec{Z(1), Z(1)});
  CHECK(ring_descriptor(D) == "order: x^2+1; invert: [(1,1)]");

  LocalizedRing E = parse_ring("order: x^2 - x - 1");
  CHECK(E.s.empty());
  CHECK(ring_descriptor(E) == "order: x^2-x-1; invert: []");

  CHECK_THROWS_AS(parse_ring("order: x^2-4; invert: []"), Error);
  CHECK_THROWS_AS(parse_ring("nope"), Error);
  CHECK_THROWS_AS(parse_ring("order: x^2+1; invert: [0]"), Error);
}

// ---- element arithmetic ---------------------------------------------------------

TEST_CASE("localized arithmetic and canonical forms") {
  LocalizedRing A = parse_ring("order: x; invert: [2,3]");  // Z[1/6]
  RingElement half = parse_elem(A, "num=[1]; den={0:1}");
  RingElement third = parse_elem(A, "num=[1]; den={1:1}");
  CHECK(elem_str(half + third) == "num=[5]; den={0:1,1:1}");
  CHECK(elem_str(half * third) == "num=[1]; den={0:1,1:1}");
  CHECK(half + half == elem_one(A));
  CHECK(elem_str(half + half) == "num=[1]; den={}");  // normalization strips
  CHECK(half - half == elem_zero(A));
  CHECK(elem_str(half - half) == "num=[0]; den={}");
  // 6/6 == 1 via cross multiplication even before normalization
  RingElement six_over_six = parse_elem(A, "num=[6]; den={0:1,1:1}");
  CHECK(six_over_six == elem_one(A));
  CHECK(elem_str(six_over_six) == "num=[1]; den={}");

  // equality must not depend on the normal form being unique
  LocalizedRing M = parse_ring("order: x^2+5; invert: [2,(1,-1)]");
  // (1+theta)/2 = 3/(1-theta): cross multiply (1+theta)(1-theta) = 6
  RingElement lhs = parse_elem(M, "num=[1,1]; den={0:1}");
  RingElement rhs = parse_elem(M, "num=[3]; den={1:1}");
  CHECK(lhs == rhs);
  CHECK(norm(lhs) == norm(rhs));
}

TEST_CASE("rational coordinates and membership") {
  LocalizedRing A = parse_ring("order: x^2+5; invert: [(1,-1)]");
  // (1+theta)/2 = 3/(1-theta) lies in A although 2 is not inverted
  auto e = try_from_rational(A, {Q(1, 2), Q(1, 2)});
  REQUIRE(e.has_value());
  CHECK(*e == parse_elem(A, "num=[3]; den={0:1}"));
  CHECK(rational_coords(*e) == std::vector<Q>{Q(1, 2), Q(1, 2)});
  // (1-theta) = p2 p3 with p2^2 = (2), so 1/2 = -(2+theta)/(1-theta)^2 is in A
  auto half = try_from_rational(A, {Q(1, 2), Q(0)});
  REQUIRE(half.has_value());
  CHECK(*half + *half == elem_one(A));
  CHECK(elem_str(*half) == "num=[-2,-1]; den={0:2}");
  // (1+theta)/4 = (-6-3theta)/(1-theta)^3 is in A as well
  auto q4 = try_from_rational(A, {Q(1, 4), Q(1, 4)});
  REQUIRE(q4.has_value());
  CHECK(*q4 == parse_elem(A, "num=[-6,-3]; den={0:3}"));
  // denominators away from the inverted primes are rejected
  CHECK_FALSE(try_from_rational(A, {Q(1, 7), Q(0)}).has_value());
  CHECK_FALSE(try_from_rational(A, {Q(0), Q(1, 5)}).has_value());

  LocalizedRing Zr = parse_ring("order: x");
  CHECK_FALSE(try_from_rational(Zr, {Q(1, 2)}).has_value());
  CHECK(try_from_rational(Zr, {Q(7)}).has_value());

  LocalizedRing H = parse_ring("order: x; invert: [2]");
  auto q = try_from_rational(H, {Q(3, 8)});
  REQUIRE(q.has_value());
  CHECK(elem_str(*q) == "num=[3]; den={0:3}");
  CHECK_FALSE(try_from_rational(H, {Q(1, 6)}).has_value());

  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Vec v(2);
    std::vector<unsigned> den{(unsigned)rng.below(4)};
    for (auto& c : v) c = Z(rng.range(-20, 20));
    RingElement a = normalize({&A, v, den});
    auto back = try_from_rational(A, rational_coords(a));
    REQUIRE(back.has_value());
    CHECK(*back == a);
  }
}

TEST_CASE("division and units") {
  LocalizedRing A = parse_ring("order: x; invert: [2]");
  CHECK(is_unit(parse_elem(A, "2")));
  CHECK(is_unit(parse_elem(A, "-8")));
  CHECK_FALSE(is_unit(parse_elem(A, "3")));
  CHECK_FALSE(is_unit(elem_zero(A)));
  CHECK(unit_inverse(parse_elem(A, "2")) == parse_elem(A, "num=[1]; den={0:1}"));
  CHECK_THROWS_AS(unit_inverse(parse_elem(A, "3")), Error);
  CHECK(divide_exact(parse_elem(A, "6"), parse_elem(A, "4")) ==
        parse_elem(A, "num=[3]; den={0:1}"));
  CHECK_THROWS_AS(divide_exact(parse_elem(A, "5"), parse_elem(A, "3")), Error);
  CHECK_THROWS_AS(divide_exact(parse_elem(A, "5"), elem_zero(A)), Error);
  CHECK(divides(parse_elem(A, "3"), parse_elem(A, "12")));
  CHECK(divides(parse_elem(A, "3"), parse_elem(A, "num=[3]; den={0:2}")));
  CHECK_FALSE(divides(parse_elem(A, "5"), parse_elem(A, "3")));

  LocalizedRing G = parse_ring("order: x^2+1");
  RingElement i = elem_vec(G, {Z(0), Z(1)});
  CHECK(is_unit(i));
  CHECK(unit_inverse(i) == -i);
  CHECK(pow(i, Z(-3)) == i);
  CHECK(pow(i, Z(4)) == elem_one(G));
  // (5+5i)/(3-i) = 1+2i
  CHECK(divide_exact(elem_vec(G, {Z(5), Z(5)}), elem_vec(G, {Z(3), Z(-1)})) ==
        elem_vec(G, {Z(1), Z(2)}));
}

TEST_CASE("element parse and print round trip") {
  LocalizedRing A = parse_ring("order: x^2-2; invert: [2,3]");
  for (const char* s : {"num=[1,-2]; den={0:1}", "num=[0,5]; den={}",
                        "num=[-7,0]; den={0:2,1:1}"}) {
    RingElement e = parse_elem(A, s);
    CHECK(elem_str(e) == s);
    CHECK(parse_elem(A, elem_str(e)) == e);
  }
  CHECK(parse_elem(A, "5") == elem_int(A, 5));
  CHECK(parse_elem(A, "-3") == elem_int(A, -3));
  CHECK_THROWS_AS(parse_elem(A, "num=[1,2,3]; den={}"), Error);
  CHECK_THROWS_AS(parse_elem(A, "garbage"), Error);
  CHECK_THROWS_AS(parse_elem(A, "num=[1]; den={5:1}"), Error);
}

// ---- finite quotients -------------------------------------------------------------

TEST_CASE("finite quotient sizes with localization") {
  LocalizedRing Z6 = parse_ring("order: x; invert: [2,3]");
  CHECK(finite_quotient(Z6, elem_int(Z6, 5)).size == 5);
  CHECK(finite_quotient(Z6, elem_int(Z6, 12)).size == 1);
  CHECK(finite_quotient(Z6, elem_int(Z6, 35)).size == 35);
  CHECK(finite_quotient(Z6, elem_int(Z6, 30)).size == 5);

  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  FiniteQuotient fq = finite_quotient(Zh, elem_int(Zh, 12));
  CHECK(fq.size == 3);
  // 1/2 = 2^{-1} = 2 mod 3
  CHECK(fq.from_element(parse_elem(Zh, "num=[1]; den={0:1}")) == Vec{Z(2)});

  LocalizedRing G = parse_ring("order: x^2+1");
  CHECK(finite_quotient(G, elem_vec(G, {Z(1), Z(1)})).size == 2);
  CHECK(finite_quotient(G, elem_int(G, 3)).size == 9);
  CHECK(finite_quotient(G, elem_vec(G, {Z(2), Z(1)})).size == 5);

  // inverting 1+i kills the even part: |Z[i][1/(1+i)] / 2| = 1
  LocalizedRing Gi = parse_ring("order: x^2+1; invert: [(1,1)]");
  CHECK(finite_quotient(Gi, elem_int(Gi, 2)).size == 1);
  CHECK(finite_quotient(Gi, elem_int(Gi, 6)).size == 9);

  CHECK_THROWS_AS(finite_quotient(G, elem_zero(G)), Error);

  // modulus with denominator generates the same ideal as its numerator
  FiniteQuotient f32 = finite_quotient(Zh, parse_elem(Zh, "num=[3]; den={0:1}"));
  CHECK(f32.size == 3);
}

TEST_CASE("quotient ring structure") {
  LocalizedRing G = parse_ring("order: x^2+1");
  FiniteQuotient fq = finite_quotient(G, elem_int(G, 3));
  auto rs = fq.residues(Z(100));
  CHECK(rs.size() == 9);
  // all residues reduce to themselves
  for (auto& r : rs) CHECK(fq.reduce(r) == r);
  // field of 9 elements: every nonzero residue invertible
  int units = 0;
  for (auto& r : rs)
    if (fq.is_unit_residue(r)) ++units;
  CHECK(units == 8);
  // inverse really inverts
  for (auto& r : rs) {
    auto inv = fq.inverse(r);
    if (!inv) continue;
    CHECK(fq.mul(r, *inv) == fq.one());
  }
  // lift/from_element round trip
  for (auto& r : rs) CHECK(fq.from_element(fq.lift(r)) == r);
  CHECK_THROWS_AS(fq.residues(Z(5)), Error);

  // associativity/distributivity spot checks
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    Vec a = rs[rng.below(rs.size())], b = rs[rng.below(rs.size())],
        c = rs[rng.below(rs.size())];
    CHECK(fq.mul(a, fq.mul(b, c)) == fq.mul(fq.mul(a, b), c));
    CHECK(fq.mul(a, fq.add(b, c)) == fq.add(fq.mul(a, b), fq.mul(a, c)));
  }
}

TEST_CASE("unit groups of quotients") {
  LocalizedRing Zr = parse_ring("order: x");
  // phi and lambda of small integers
  std::map<int, std::pair<int, int>> table = {
      {5, {4, 4}}, {8, {4, 2}}, {9, {6, 6}}, {12, {4, 2}}, {15, {8, 4}}};
  for (auto& [n, pe] : table) {
    FiniteQuotient fq = finite_quotient(Zr, elem_int(Zr, n));
    UnitGroupData u = unit_group(fq);
    CHECK((int)u.units.size() == pe.first);
    CHECK(u.exponent == pe.second);
    CHECK(quotient_exponent(fq) == pe.second);
    // generators generate: product of generator orders >= group order and the
    // greedy span construction guarantees coverage, so just sanity check count
    CHECK(!u.generators.empty());
  }
  // Z/9: single generator of order 6
  FiniteQuotient f9 = finite_quotient(Zr, elem_int(Zr, 9));
  UnitGroupData u9 = unit_group(f9);
  CHECK(u9.generators.size() == 1);
  CHECK(residue_order(f9, u9.generators[0]) == 6);
  CHECK_THROWS_AS(residue_order(f9, Vec{Z(3)}), Error);

  // Z[i]/3: cyclic of order 8
  LocalizedRing G = parse_ring("order: x^2+1");
  FiniteQuotient f3 = finite_quotient(G, elem_int(G, 3));
  UnitGroupData ug = unit_group(f3);
  CHECK(ug.units.size() == 8);
  CHECK(ug.exponent == 8);
  CHECK(quotient_exponent(f3) == 8);

  // large modulus fast path agrees with the generic path on overlap
  FiniteQuotient f100 = finite_quotient(Zr, elem_int(Zr, 100));
  CHECK(quotient_exponent(f100) == 20);  // lambda(100)
}

TEST_CASE("element orders and crt") {
  LocalizedRing Zr = parse_ring("order: x");
  CHECK(element_order_mod(elem_int(Zr, 2), elem_int(Zr, 9)) == 6);
  CHECK(element_order_mod(elem_int(Zr, 4), elem_int(Zr, 9)) == 3);
  CHECK_THROWS_AS(element_order_mod(elem_int(Zr, 3), elem_int(Zr, 9)), Error);
  CHECK_THROWS_AS(element_order_mod(elem_int(Zr, 2), elem_zero(Zr)), Error);

  RingElement x = crt_pair(elem_int(Zr, 2), elem_int(Zr, 5),
                           elem_int(Zr, 3), elem_int(Zr, 7));
  CHECK(fdiv_r(x.num[0], 5) == 2);
  CHECK(fdiv_r(x.num[0], 7) == 3);
  CHECK_THROWS_AS(crt_pair(elem_int(Zr, 1), elem_int(Zr, 4), elem_int(Zr, 2),
                           elem_int(Zr, 6)),
                  Error);

  LocalizedRing G = parse_ring("order: x^2+1");
  RingElement i = elem_vec(G, {Z(0), Z(1)});
  RingElement y = crt_pair(i, elem_int(G, 3), elem_one(G), elem_vec(G, {Z(2), Z(1)}));
  FiniteQuotient a = finite_quotient(G, elem_int(G, 3));
  FiniteQuotient b = finite_quotient(G, elem_vec(G, {Z(2), Z(1)}));
  CHECK(a.from_element(y) == a.from_element(i));
  CHECK(b.from_element(y) == b.from_element(elem_one(G)));
}

// ---- unit searches ------------------------------------------------------------------

TEST_CASE("roots of unity and fundamental units") {
  LocalizedRing G = parse_ring("order: x^2+1");
  CHECK(is_root_of_unity(elem_vec(G, {Z(0), Z(1)})));
  CHECK(is_root_of_unity(elem_int(G, -1)));
  CHECK_FALSE(is_root_of_unity(elem_int(G, 2)));
  CHECK_THROWS_AS(fundamental_unit_search(G), Error);  // imaginary quadratic

  LocalizedRing Zr = parse_ring("order: x");
  CHECK_THROWS_AS(fundamental_unit_search(Zr), Error);

  LocalizedRing S2 = parse_ring("order: x^2-2");
  RingElement u = fundamental_unit_search(S2);
  CHECK(u == elem_vec(S2, {Z(1), Z(1)}));  // 1 + sqrt(2)
  CHECK(is_unit(u));
  CHECK_FALSE(is_root_of_unity(u));

  LocalizedRing S5 = parse_ring("order: x^2-5");
  RingElement v = fundamental_unit_search(S5);
  CHECK(v == elem_vec(S5, {Z(2), Z(1)}));  // 2 + sqrt(5), unit of the order
  CHECK(norm(v) == Q(-1));

  // an inverted generator of infinite order is found first
  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  CHECK(fundamental_unit_search(Zh) == elem_int(Zh, 2));

  LocalizedRing golden = parse_ring("order: x^2-x-1");
  RingElement w = fundamental_unit_search(golden);
  CHECK(is_unit(w));
  CHECK_FALSE(is_root_of_unity(w));
  CHECK((norm(w) == Q(1) || norm(w) == Q(-1)));
}

TEST_CASE("unit monoid is deterministic and correct") {
  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  auto m1 = unit_monoid(Zh, 2);
  auto m2 = unit_monoid(Zh, 2);
  REQUIRE(m1.size() == m2.size());
  for (size_t i = 0; i < m1.size(); ++i) CHECK(m1[i] == m2[i]);
  bool has_quarter = false, has_four = false;
  for (auto& u : m1) {
    CHECK(is_unit(u));
    if (u == parse_elem(Zh, "num=[1]; den={0:2}")) has_quarter = true;
    if (u == parse_elem(Zh, "4")) has_four = true;
  }
  CHECK(has_quarter);
  CHECK(has_four);

  LocalizedRing G = parse_ring("order: x^2+1");
  auto mg = unit_monoid(G, 1);
  CHECK(mg.size() == 4);  // 1, -1, i, -i
}

// ---- prime search and coprime shifts ---------------------------------------------------

TEST_CASE("prime_in_progression") {
  LocalizedRing Zr = parse_ring("order: x");
  RingElement h1 = prime_in_progression(elem_int(Zr, 1), elem_int(Zr, 4));
  CHECK(h1 == elem_int(Zr, 5));
  RingElement h2 = prime_in_progression(elem_int(Zr, 3), elem_int(Zr, 4));
  CHECK(h2 == elem_int(Zr, 3));  // t = 0 already works

  LocalizedRing G = parse_ring("order: x^2+1");
  RingElement hg = prime_in_progression(elem_one(G), elem_int(G, 3));
  // frozen from this enumeration order: first hit is -2-3i with norm 13
  CHECK(hg == elem_vec(G, {Z(-2), Z(-3)}));
  CHECK(norm(hg) == Q(13));
  // postconditions: h = 1 mod 3, norm positive, hB maximal (prime norm)
  FiniteQuotient f3 = finite_quotient(G, elem_int(G, 3));
  CHECK(f3.from_element(hg) == f3.from_element(elem_one(G)));

  // inert-prime acceptance: progression 3 + 4t over Z[i] embedded as scalars
  RingElement hi = prime_in_progression(elem_int(G, 3), elem_int(G, 4));
  CHECK(norm(hi) > 0);
  FiniteQuotient fhi = finite_quotient(G, hi);
  // residue ring is a field
  for (auto& r : fhi.residues(Z(200)))
    if (!fhi.is_zero(r)) CHECK(fhi.is_unit_residue(r));

  // progression 4 + 2t still contains the prime 2 itself
  CHECK(prime_in_progression(elem_int(Zr, 4), elem_int(Zr, 2)) == elem_int(Zr, 2));
  // but 4(1 + t) is never prime: budget exhaustion
  CHECK_THROWS_AS(prime_in_progression(elem_int(Zr, 4), elem_int(Zr, 4), Z(50)),
                  Error);
  // order elements required
  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  CHECK_THROWS_AS(
      prime_in_progression(parse_elem(Zh, "num=[1]; den={0:1}"), elem_int(Zh, 3)),
      Error);
}

TEST_CASE("coprime_shift") {
  LocalizedRing Zr = parse_ring("order: x");
  CHECK(coprime_shift(Zr, elem_int(Zr, 3), elem_int(Zr, 4)) == elem_int(Zr, 3));
  CHECK_THROWS_AS(coprime_shift(Zr, elem_int(Zr, 2), elem_int(Zr, 4)), Error);
  CHECK_THROWS_AS(coprime_shift(Zr, elem_int(Zr, 3), elem_zero(Zr)), Error);

  LocalizedRing Zh = parse_ring("order: x; invert: [2]");
  RingElement a0 = coprime_shift(Zh, parse_elem(Zh, "num=[1]; den={0:1}"),
                                 elem_int(Zh, 3));
  CHECK(a0 == elem_int(Zh, 2));  // 1/2 = 2 mod 3 and gcd(2, 3*1) = 1

  // non-maximal order: gamma = 2 for Z[sqrt(5)]
  LocalizedRing S5 = parse_ring("order: x^2-5");
  RingElement theta = elem_vec(S5, {Z(0), Z(1)});
  RingElement a1 = coprime_shift(S5, elem_one(S5), theta);
  CHECK(a1 == elem_one(S5));
  // postcondition: a1*B + theta*gamma^2*B = B
  IMat rows = mult_matrix(S5.B, a1.num);
  Vec tg = {Z(0), Z(4)};
  for (auto& row : mult_matrix(S5.B, tg)) rows.push_back(row);
  CHECK(det_upper(hnf(rows)) == 1);

  // shift actually needed: a = 5, b = 3 over Z -> 5 works; a = 3, b = 5 -> 3;
  // a = 10, b = 3: 10 coprime 3 already -> 10... all t=0. force one:
  LocalizedRing Z6 = parse_ring("order: x; invert: [2,3]");
  RingElement s = coprime_shift(Z6, parse_elem(Z6, "num=[5]; den={0:1}"),
                                elem_int(Z6, 7));
  // 5/2 = 6 mod 7; 6 coprime to 7
  CHECK(s == elem_int(Z6, 6));
  FiniteQuotient f7 = finite_quotient(Z6, elem_int(Z6, 7));
  CHECK(f7.from_element(s) ==
        f7.from_element(parse_elem(Z6, "num=[5]; den={0:1}")));
}

TEST_CASE("ideal_from_generators") {
  LocalizedRing Zr = parse_ring("order: x");
  auto d = ideal_from_generators(Zr, {elem_int(Zr, 12), elem_int(Zr, 18)});
  REQUIRE(d.principal.has_value());
  CHECK(*d.principal == elem_int(Zr, 6));
  auto z = ideal_from_generators(Zr, {elem_zero(Zr)});
  REQUIRE(z.principal.has_value());
  CHECK(z.principal->is_zero());

  LocalizedRing G = parse_ring("order: x^2+1");
  auto g = ideal_from_generators(
      G, {elem_vec(G, {Z(5), Z(5)}), elem_vec(G, {Z(0), Z(10)})});
  REQUIRE(g.principal.has_value());
  // gcd((5+5i), 10i) = 5(1+i) up to units
  CHECK(norm(*g.principal) == Q(50));

  // Z[sqrt(-5)]: (2, 1+theta) is not principal
  LocalizedRing M = parse_ring("order: x^2+5");
  auto np = ideal_from_generators(
      M, {elem_int(M, 2), elem_vec(M, {Z(1), Z(1)})});
  CHECK_FALSE(np.principal.has_value());
  CHECK(np.gens.size() == 2);
}

// ---- lattice layer ------------------------------------------------------------

TEST_CASE("hnf and lattice helpers") {
  IMat rows = {{Z(2), Z(4)}, {Z(6), Z(8)}};
  IMat t;
  IMat h = hnf(rows, &t);
  REQUIRE(h.size() == 2);
  CHECK(h[0][0] > 0);
  CHECK(h[1][1] > 0);
  CHECK(h[1][0] == 0);
  CHECK(det_upper(h) == 8);  // |det| of the input
  CHECK(h[0][1] >= 0);
  CHECK(h[0][1] < h[1][1]);
  // transform rows reproduce the hnf
  for (size_t i = 0; i < h.size(); ++i) {
    Vec acc(2, 0);
    for (size_t j = 0; j < rows.size(); ++j)
      for (int c = 0; c < 2; ++c) acc[c] += t[i][j] * rows[j][c];
    CHECK(acc == h[i]);
  }

  CHECK(box_count(h) == 8);
  CHECK(lattice_contains(h, {Z(2), Z(4)}));
  CHECK_FALSE(lattice_contains(h, {Z(1), Z(1)}));
  CHECK(lattice_reduce(h, {Z(2), Z(4)}) == Vec{Z(0), Z(0)});

  Vec coeffs;
  CHECK(solve_in_rowspan(rows, {Z(8), Z(12)}, &coeffs));
  CHECK(coeffs.size() == 2);
  CHECK(coeffs[0] * 2 + coeffs[1] * 6 == 8);
  CHECK(coeffs[0] * 4 + coeffs[1] * 8 == 12);
  CHECK_FALSE(solve_in_rowspan(rows, {Z(1), Z(0)}, nullptr));

  IMat sing = {{Z(1), Z(2)}, {Z(2), Z(4)}, {Z(3), Z(6)}};
  IMat ker = kernel_rows(sing);
  CHECK(!ker.empty());
  for (auto& kv : ker) {
    Vec acc(2, 0);
    for (size_t j = 0; j < sing.size(); ++j)
      for (int c = 0; c < 2; ++c) acc[c] += kv[j] * sing[j][c];
    CHECK(acc == Vec{Z(0), Z(0)});
  }

  // preimage: {v : 2v in 12Z} = 6Z
  IMat pre = lattice_preimage({{Z(2)}}, {{Z(12)}});
  CHECK(pre == IMat{{Z(6)}});

  CHECK(det_int({{Z(1), Z(2)}, {Z(3), Z(4)}}) == -2);
  CHECK(det_int({{Z(2), Z(0), Z(1)}, {Z(1), Z(1), Z(0)}, {Z(0), Z(3), Z(1)}}) == 5);
}

TEST_CASE("rng stability") {
  Rng r(0);
  CHECK(r.next() == 16294208416658607535ull);
  CHECK(r.next() == 7960286522194355700ull);
  Rng s(42);
  uint64_t a = s.below(100);
  Rng s2(42);
  CHECK(s2.below(100) == a);
}
