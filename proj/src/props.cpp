// Ring-property witnesses and their independent validators.

#include "elgen/props.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace elgen {

namespace {

// key for visited/coverage sets
std::string vec_key(const Vec& v) {
  std::string s;
  for (const Z& x : v) {
    s += x.get_str();
    s += ',';
  }
  return s;
}

// shifts t = f + <shift> * g are enumerated over integer coordinate tuples;
// each coordinate walks 0, +1, -1, +2, -2, ... and tuples come out in
// max-index shells so the k = 1 order is exactly 0, 1, -1, 2, -2, ...
Z idx_value(long i) {
  if (i == 0) return Z(0);
  long Half = (i + 1) / 2;
  return (i % 2 == 1) ? Z(Half) : Z(-Half);
}

template <typename Fn>
bool enumerate_shifts(int k, long max_index, Fn&& visit) {
  std::vector<long> idx(k, 0);
  for (long shell = 0; shell <= max_index; ++shell) {
    // all tuples with max coordinate index == shell, lexicographic
    std::vector<long> cur(k, 0);
    while (true) {
      long mx = *std::max_element(cur.begin(), cur.end());
      if (mx == shell) {
        Vec t(k);
        for (int i = 0; i < k; ++i) t[i] = idx_value(cur[i]);
        if (!visit(t)) return false;  // stop requested
      }
      int pos = k - 1;
      while (pos >= 0 && cur[pos] == shell) cur[pos--] = 0;
      if (pos < 0) break;
      ++cur[pos];
    }
  }
  return true;
}

Z carmichael_z(const Z& m) {
  Z lam = 1;
  for (auto& [p, e] : factorize(m)) {
    Z part;
    if (p == 2) {
      if (e == 1) part = 1;
      else if (e == 2) part = 2;
      else {
        part = 1;
        for (int i = 0; i < e - 2; ++i) part *= 2;
      }
    } else {
      part = p - 1;
      for (int i = 0; i < e - 1; ++i) part *= p;
    }
    lam = lcm(lam, part);
  }
  return lam;
}

// x = r1 mod m1, x = r2 mod m2 for coprime positive moduli; result in [0, m1 m2)
Z crt_z(const Z& r1, const Z& m1, const Z& r2, const Z& m2) {
  Z x, y;
  Z g = ext_gcd(m1, m2, x, y);
  if (g != 1) throw Error(Err::Internal, "crt_z: moduli not coprime");
  Z mm = m1 * m2;
  Z res = fdiv_r(r1 + m1 * fdiv_r(x * (r2 - r1), m2), mm);
  return res;
}

Z powmod_z(Z b, Z e, const Z& m) {
  Z r;
  mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  return r;
}

Z order_mod_z(const Z& g, const Z& m, const Z& lam) {
  if (powmod_z(g, lam, m) != 1) return 0;  // not a unit of full profile
  Z ord = lam;
  for (auto& [p, e] : factorize(lam)) {
    for (int i = 0; i < e; ++i) {
      if (powmod_z(g, ord / p, m) == 1) ord /= p;
      else break;
    }
  }
  return ord;
}

}  // namespace

Z eight_k_factorial(int k) { return factorial(unsigned(8 * k)); }

// ---- SR1 ------------------------------------------------------------------------

namespace {

// (a,b) generates the whole quotient: the lattice spanned by a*B, b*B and
// the modulus contraction is all of Z^k (s is already invertible mod H)
bool fq_unimodular(const FiniteQuotient& fq, const Vec& a, const Vec& b) {
  const OrderRing& B = fq.R->B;
  IMat rows;
  for (auto& r : mult_matrix(B, a)) rows.push_back(r);
  for (auto& r : mult_matrix(B, b)) rows.push_back(r);
  for (auto& r : fq.H) rows.push_back(r);
  IMat h = hnf(rows);
  if ((int)h.size() < fq.R->k()) return false;
  return det_upper(h) == 1;
}

}  // namespace

bool check_sr1(const FiniteQuotient& fq, const Z& budget) {
  if (fq.size * fq.size > budget)
    throw Error(Err::BudgetExceeded, "quotient too large for pair scan");
  std::vector<Vec> res = fq.residues(budget);
  std::set<std::string> unit_keys;
  for (const Vec& r : res)
    if (fq.is_unit_residue(r)) unit_keys.insert(vec_key(r));
  for (const Vec& a : res) {
    for (const Vec& b : res) {
      if (!fq_unimodular(fq, a, b)) continue;
      bool found = false;
      for (const Vec& t : res) {
        if (unit_keys.count(vec_key(fq.add(a, fq.mul(t, b))))) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

// ---- GEN(t,1) ----------------------------------------------------------------------

namespace {

// does the class of g generate U/U^t?  The quotient is cyclic exactly when
// some coset has order |U| / |U^t|, which is what we test.
bool covers_quotient(const FiniteQuotient& fq, const std::vector<Vec>& units,
                     const Z& t, const Vec& g) {
  std::set<std::string> pow_t;
  for (const Vec& u : units) pow_t.insert(vec_key(fq.pow(u, t)));
  Z ncosets = Z(units.size()) / Z(pow_t.size());
  Vec cur = g;
  for (Z j = 1; j <= Z(units.size()); ++j) {
    if (pow_t.count(vec_key(cur))) return j == ncosets;
    cur = fq.mul(cur, g);
  }
  return false;
}

}  // namespace

GenWitness gen_witness(const LocalizedRing& A, const RingElement& a,
                       const RingElement& b, const Z& t) {
  RingElement h;
  if (is_unit(b)) {
    // vacuous congruence: smallest rational prime with a covering coset works
    bool got = false;
    for (Z p = 2; p < 1000 && !got; ++p) {
      if (!probably_prime(p)) continue;
      h = elem_int(A, p);
      FiniteQuotient fq = finite_quotient(A, h);
      if (fq.size == 1) {
        got = true;
        break;
      }
      UnitGroupData ug = unit_group(fq);
      for (const Vec& g : ug.units)
        if (covers_quotient(fq, ug.units, t, g)) {
          got = true;
          break;
        }
    }
    if (!got) throw Error(Err::SearchExhausted, "no prime for a unit modulus");
  } else {
    RingElement a0 = coprime_shift(A, a, b);
    RingElement g2 = elem_int(A, A.B.gamma * A.B.gamma);
    h = prime_in_progression(a0, b * g2);
  }
  GenWitness w;
  w.R = &A;
  w.a = a;
  w.b = b;
  w.h = h;
  w.t = t;
  FiniteQuotient fq = finite_quotient(A, h);
  if (fq.size == 1) {
    w.unit_count = 1;
    w.exponent = 1;
    w.coset_gen = fq.zero();
    return w;
  }
  UnitGroupData ug = unit_group(fq);
  w.unit_count = Z(ug.units.size());
  w.exponent = ug.exponent;
  for (const Vec& g : ug.units) {
    if (covers_quotient(fq, ug.units, t, g)) {
      w.coset_gen = g;
      return w;
    }
  }
  throw Error(Err::SearchExhausted, "no cyclic generator for U(hA)/U(hA)^t");
}

bool validate_gen_witness(const GenWitness& w) {
  const LocalizedRing& A = *w.R;
  if (!w.b.is_zero() && !divides(w.b, w.h - w.a)) return false;
  if (w.b.is_zero() && !(w.h == w.a)) return false;
  FiniteQuotient fq = finite_quotient(A, w.h);
  if (fq.size == 1) return true;
  UnitGroupData ug = unit_group(fq);
  if (Z(ug.units.size()) != w.unit_count) return false;
  return covers_quotient(fq, ug.units, w.t, w.coset_gen);
}

// ---- Lemma 4.3 searches ---------------------------------------------------------------

RingElement f_prime_search(const LocalizedRing& A, const RingElement& f,
                           const RingElement& g, const Z& n,
                           const RingElement& h, const Z& budget) {
  if (h.is_zero()) throw Error(Err::ZeroModulus, "f_prime_search: h = 0");
  if (n < 1) throw Error(Err::Internal, "f_prime_search: n < 1");
  Z K = eight_k_factorial(A.k());
  long cap = budget.get_si();
  long tried = 0;
  RingElement found = elem_zero(A);
  bool ok = false;
  bool g_zero = g.is_zero();
  enumerate_shifts(A.k(), g_zero ? 0 : cap, [&](const Vec& tv) {
    if (tried++ > cap) return false;
    RingElement fp = f + elem_vec(A, tv) * g;
    if (fp.is_zero()) return true;  // keep searching
    if (is_unit(fp)) {
      if (!g_zero) return true;  // skipped: trivial quotients hide nothing
      found = fp;                // only candidate on the g = 0 path
      ok = true;
      return false;
    }
    FiniteQuotient fq = finite_quotient(A, fp);
    if (fq.size > Z(1000000)) return true;
    Z e = quotient_exponent(fq);
    if (K % gcd(e, n) != 0) return true;
    if (!fq.is_unit_residue(fq.from_element(h))) return true;
    found = fp;
    ok = true;
    return false;
  });
  if (!ok) throw Error(Err::SearchExhausted, "f_prime_search budget exhausted");
  return found;
}

Z norm_image_size(const Z& p, unsigned r, const OrderRing& O, const Z& budget) {
  Z m = 1;
  for (unsigned i = 0; i < r; ++i) m *= p;
  Z total = 1;
  for (int i = 0; i < O.k; ++i) {
    total *= m;
    if (total > budget) throw Error(Err::BudgetExceeded, "norm_image_size");
  }
  std::set<Z> image;
  Vec v(O.k, 0);
  while (true) {
    Z nv = norm_basis(O, v);
    if (fdiv_r(nv, p) != 0) image.insert(fdiv_r(nv, m));
    int pos = 0;
    while (pos < O.k && v[pos] == m - 1) v[pos++] = 0;
    if (pos == O.k) break;
    v[pos] += 1;
  }
  return Z(image.size());
}

// ---- EXP(2(8k)!, 2) ----------------------------------------------------------------------

namespace {

struct LinPair {
  RingElement f, g;  // f*Id + g*M
};

LinPair pair_mul(const LinPair& x, const LinPair& y, const RingElement& tr) {
  // (f1 + g1 M)(f2 + g2 M) with M^2 = tr*M - Id (det M = 1)
  LinPair r;
  r.f = x.f * y.f - x.g * y.g;
  r.g = x.f * y.g + x.g * y.f + tr * (x.g * y.g);
  return r;
}

// M^m = f*Id + g*M for a det-1 matrix with trace tr; m may be negative
LinPair pow_pair(const LocalizedRing& A, const RingElement& tr, Z m) {
  LinPair base;
  if (m < 0) {
    base.f = tr;  // M^{-1} = tr*Id - M
    base.g = -elem_one(A);
    m = -m;
  } else {
    base.f = elem_zero(A);
    base.g = elem_one(A);
  }
  LinPair acc{elem_one(A), elem_zero(A)};
  while (m > 0) {
    if (fdiv_r(m, 2) == 1) acc = pair_mul(acc, base, tr);
    base = pair_mul(base, base, tr);
    m = fdiv_q(m, 2);
  }
  return acc;
}

bool in_sl2_level(const LocalizedRing& A, const SquareMatrix& M,
                  const RingElement& q) {
  if (!(mat_det(M) == elem_one(A))) return false;
  return is_congruence(M, q);
}

SquareMatrix mat2(const LocalizedRing& A, const RingElement& a,
                  const RingElement& b, const RingElement& c,
                  const RingElement& d) {
  SquareMatrix m = mat_identity(A, 2);
  m.e[0][0] = a;
  m.e[0][1] = b;
  m.e[1][0] = c;
  m.e[1][1] = d;
  return m;
}

bool congruent_mod(const RingElement& modulus, const RingElement& lhs,
                   const RingElement& rhs) {
  if (modulus.is_zero()) return lhs == rhs;
  return divides(modulus, lhs - rhs);
}

}  // namespace

ExpWitness exp_witness(const LocalizedRing& A, const RingElement& q,
                       const RingElement& a, const RingElement& b) {
  WPair pr = make_wpair(A, q, a, b);  // NotInW on bad input
  Z K = eight_k_factorial(A.k());
  ExpWitness w;
  w.R = &A;
  w.q = q;
  w.a = a;
  w.b = b;
  w.t = 2 * K;
  SquareMatrix M = complete_to_sl2(pr);
  w.ap = a;
  w.c = M.e[1][0];
  w.d = M.e[1][1];
  w.b0 = elem_zero(A);
  w.bprime = elem_zero(A);
  w.alpha1 = w.alpha2 = 0;
  w.t1 = w.t2 = 0;
  RingElement one = elem_one(A);
  if (b.is_zero()) {
    // a is a unit: (M^{t/2})_{11} = a^{t/2} exactly, second instance trivial
    LinPair p1 = pow_pair(A, a + w.d, K);
    w.u = {pow(a, K), one};
    w.f = {p1.f, one};
    w.g = {p1.g, elem_zero(A)};
    w.bp = {b, b};
    w.dp = {w.d, w.d};
  } else if (a.is_zero()) {
    // q is a unit ideal and b is a unit; both congruences are vacuous
    LinPair p1 = pow_pair(A, a + w.d, K);
    w.u = {one, one};
    w.f = {p1.f, one};
    w.g = {p1.g, elem_zero(A)};
    w.bp = {b, b};
    w.dp = {w.d, w.d};
  } else {
    w.b0 = divide_exact(b, q);
    w.alpha1 = element_order_mod(a, b);
    w.bprime = f_prime_search(A, w.b0, a, w.alpha1, q);
    w.alpha2 = quotient_exponent(finite_quotient(A, w.bprime));
    Z x, y;
    Z g0 = ext_gcd(w.alpha1, w.alpha2, x, y);
    if (K % g0 != 0)
      throw Error(Err::Internal, "exp_witness: gcd(alpha1,alpha2) does not divide (8k)!");
    Z scale = K / g0;
    Z t1 = x * scale;
    Z step = w.alpha2 / g0;
    t1 = cdiv_r(t1, step);  // center to keep the matrix powers small
    Z t2 = (K - w.alpha1 * t1) / w.alpha2;
    w.t1 = t1;
    w.t2 = t2;
    RingElement b2 = w.bprime * q;
    RingElement delta = divide_exact(w.bprime - w.b0, a);
    RingElement d2 = w.d + q * delta * w.c;
    LinPair p1 = pow_pair(A, a + w.d, w.alpha1 * t1);
    LinPair p2 = pow_pair(A, a + d2, w.alpha2 * t2);
    w.u = {one, one};
    w.f = {p1.f, p2.f};
    w.g = {p1.g, p2.g};
    w.bp = {b, b2};
    w.dp = {w.d, d2};
  }
  if (!validate_exp_witness(w))
    throw Error(Err::Internal, "exp_witness: constructed witness failed validation");
  return w;
}

bool validate_exp_witness(const ExpWitness& w) {
  const LocalizedRing& A = *w.R;
  try {
    make_wpair(A, w.q, w.a, w.b);
  } catch (const Error&) {
    return false;
  }
  if (w.t != 2 * eight_k_factorial(A.k())) return false;
  // (1) a' = a mod bA
  if (!congruent_mod(w.b, w.ap, w.a)) return false;
  // (2) [[a',b],[c,d]] in SL(2,A;qA)
  if (!in_sl2_level(A, mat2(A, w.ap, w.b, w.c, w.d), w.q)) return false;
  RingElement prod = elem_one(A);
  for (int i = 0; i < 2; ++i) {
    // (3) [[a',b_i'],[c,d_i']] in SL(2,A;qA)
    SquareMatrix Mi = mat2(A, w.ap, w.bp[i], w.c, w.dp[i]);
    if (!in_sl2_level(A, Mi, w.q)) return false;
    // (4) f_i Id + g_i M_i in SL(2,A;qA)
    SquareMatrix Ni = mat_add(mat_scale(w.f[i], mat_identity(A, 2)),
                              mat_scale(w.g[i], Mi));
    if (!in_sl2_level(A, Ni, w.q)) return false;
    // (6) f_i + g_i a' = u_i mod b_i'A, u_i a unit
    if (!is_unit(w.u[i])) return false;
    RingElement xi = w.f[i] + w.g[i] * w.ap;
    if (!congruent_mod(w.bp[i], xi, w.u[i])) return false;
    prod = prod * xi * xi;
  }
  // (5) prod (f_i + g_i a')^2 = (a')^t mod cA
  return congruent_mod(w.c, prod, pow(w.ap, w.t));
}

// ---- UNIT support ---------------------------------------------------------------------------

RingElement unit_prop_unit(const LocalizedRing& A, const RingElement& q) {
  RingElement u0 = fundamental_unit_search(A);  // NoInfiniteUnits
  Z e = quotient_exponent(finite_quotient(A, q));
  RingElement u = pow(u0, e);
  if (!divides(q, u - elem_one(A)))
    throw Error(Err::Internal, "unit_prop_unit: congruence failed");
  return u;
}

// ---- M-set membership --------------------------------------------------------------------------

ConjMWitness mset_membership(const LocalizedRing& A, const RingElement& q,
                             const RingElement& y, const Z& budget) {
  ConjMWitness w;
  w.R = &A;
  w.q = q;
  w.y = y;
  RingElement one = elem_one(A);
  if (!y.is_zero() && !divides(q, y))
    throw Error(Err::NotCongruent, "mset_membership: y not in qA");
  if (y.is_zero()) {
    w.z = one;
    w.u1 = one;
    w.u2 = one;
    return w;
  }
  std::vector<RingElement> mon = unit_monoid(A, 8);
  long cap = budget.get_si();
  long tried = 0;
  for (long j = 0;; ++j) {
    Z jz = idx_value(j);
    if (tried > cap) break;
    bool in_range = false;
    for (int eta = 0; eta < 2; ++eta) {
      RingElement z = (eta == 0 ? one : -one) + q * elem_int(A, jz);
      if (z.is_zero()) continue;
      in_range = true;
      for (const RingElement& u1 : mon) {
        if (tried++ > cap) break;
        RingElement cand = one + y * z * u1 * u1;
        if (!is_unit(cand)) continue;
        for (const RingElement& u2 : mon) {
          if (u2 * u2 == cand) {
            w.z = z;
            w.u1 = u1;
            w.u2 = u2;
            return w;
          }
        }
      }
    }
    if (!in_range && j > 2 * cap) break;
  }
  throw Error(Err::SearchExhausted, "mset_membership budget exhausted");
}

bool validate_mset_witness(const ConjMWitness& w) {
  const LocalizedRing& A = *w.R;
  RingElement one = elem_one(A);
  if (!w.y.is_zero() && !divides(w.q, w.y)) return false;
  if (!(divides(w.q, w.z - one) || divides(w.q, w.z + one))) return false;
  if (!is_unit(w.u1) || !is_unit(w.u2)) return false;
  return one + w.y * w.z * w.u1 * w.u1 == w.u2 * w.u2;
}

// ---- CONJ data (Claim of the 7k theorem) ----------------------------------------------------------

ConjData build_conj_data(const LocalizedRing& A, const RingElement& q) {
  RingElement u0f = fundamental_unit_search(A);  // NoInfiniteUnits
  const OrderRing& B = A.B;
  ConjData cd;
  cd.R = &A;
  cd.q = q;

  // rational multiple of q absorbing the index and the discriminant
  FiniteQuotient fq0 = finite_quotient(A, q);
  Z qhat = abs(norm_basis(B, fq0.qt));
  if (qhat == 0) throw Error(Err::ZeroModulus, "build_conj_data: q = 0");
  if (B.index > 1) qhat *= B.index;
  Z dq = abs(B.disc);
  if (dq > 1) qhat *= dq / gcd(qhat, dq);
  Z kfact = factorial(unsigned(A.k()));
  if (carmichael_z(qhat) % kfact != 0) qhat *= 4;  // forces an even exponent

  // bump exponents until no p_i^{e_i} divides phi(p_j^{e_j}); terminates since
  // the p_i-valuation of p_j - 1 is fixed while e_i keeps growing
  for (bool changed = true; changed;) {
    changed = false;
    auto fac = factorize(qhat);
    for (size_t i = 0; i < fac.size() && !changed; ++i) {
      Z piei = 1;
      for (int c = 0; c < fac[i].second; ++c) piei *= fac[i].first;
      for (size_t j = 0; j < fac.size(); ++j) {
        if (i == j) continue;
        Z pjej = 1;
        for (int c = 0; c < fac[j].second; ++c) pjej *= fac[j].first;
        if (euler_phi(pjej) % piei == 0) {
          qhat *= fac[i].first;
          changed = true;
          break;
        }
      }
    }
  }
  cd.qhat = qhat;
  cd.e = carmichael_z(qhat);
  if (cd.e % kfact != 0)
    throw Error(Err::SearchExhausted, "build_conj_data: exponent not divisible by k!");

  // t: maximal order in each U(p^{e+2}) glued by CRT
  Z tmod = 1, tval = 0;
  for (auto& [p, e] : factorize(qhat)) {
    Z pe2 = 1;
    for (int i = 0; i < e + 2; ++i) pe2 *= p;
    Z lam = carmichael_z(pe2);
    Z gen = 0;
    for (Z g = 2; g < pe2; ++g) {
      if (gcd(g, pe2) != 1) continue;
      if (order_mod_z(g, pe2, lam) == lam) {
        gen = g;
        break;
      }
    }
    if (gen == 0)
      throw Error(Err::SearchExhausted, "build_conj_data: no maximal-order element");
    tval = (tmod == 1) ? gen : crt_z(tval, tmod, gen, pe2);
    tmod *= pe2;
  }
  cd.t = tval;
  Z q2 = qhat * qhat;
  Z tv = fdiv_r(powmod_z(cd.t, cd.e, q2) - 1, q2);
  if (fdiv_r(tv, qhat) != 0)
    throw Error(Err::SearchExhausted, "build_conj_data: t^e - 1 not divisible by qhat");
  cd.a = fdiv_q(tv, qhat);
  if (gcd(cd.a, qhat) != 1)
    throw Error(Err::SearchExhausted, "build_conj_data: gcd(a, qhat) != 1");

  // D and b from a Z-basis of B
  Z te1 = 1;
  {
    Z ecount = cd.e - 1;
    for (Z i = 0; i < ecount; ++i) te1 *= cd.t;
  }
  RingElement prod = elem_one(A);
  cd.D.clear();
  for (int i = 0; i < A.k(); ++i) {
    Vec d0(A.k(), 0);
    d0[i] = 1;
    RingElement term = elem_int(A, cd.a) + elem_int(A, qhat) * elem_vec(A, d0);
    cd.D.push_back(elem_int(A, te1) * term);
    prod = prod * term;
  }
  cd.D.push_back(elem_int(A, te1 * cd.a));  // the d0 = 0 element
  cd.b = elem_int(A, te1 * cd.a) * prod;
  cd.qp = elem_int(A, te1 * qhat);

  // unit u = 1 mod qhat^2 b A with integral coordinates, u^2 != 1
  RingElement q2b = elem_int(A, q2) * cd.b;
  RingElement found = elem_zero(A);
  RingElement upow = elem_one(A);
  RingElement uinv = elem_one(A);
  RingElement u0i = unit_inverse(u0f);
  auto integral = [](const RingElement& x) {
    RingElement n = normalize(x);
    return n.den.empty() ||
           std::all_of(n.den.begin(), n.den.end(), [](unsigned e) { return e == 0; });
  };
  for (int j = 1; j <= 400 && found.is_zero(); ++j) {
    upow = upow * u0f;
    uinv = uinv * u0i;
    for (const RingElement& base : {upow, uinv}) {
      if (!integral(base)) continue;
      for (int sgn = 0; sgn < 2 && found.is_zero(); ++sgn) {
        RingElement cand = sgn == 0 ? base : -base;
        if (divides(q2b, cand - elem_one(A))) found = cand;
      }
      if (!found.is_zero()) break;
    }
  }
  if (found.is_zero())
    throw Error(Err::SearchExhausted, "build_conj_data: no unit = 1 mod qhat^2 b");
  cd.u = found;
  cd.y = cd.u * cd.u - elem_one(A);

  // Norm(y) split as n0 * n1 with n1 carrying exactly the primes of qhat
  Q ny = norm(cd.y);
  if (ny.get_den() != 1)
    throw Error(Err::Internal, "build_conj_data: y not integral");
  cd.ny = abs(ny.get_num());
  cd.n1 = 1;
  Z rest = cd.ny;
  for (auto& [p, e] : factorize(qhat)) {
    (void)e;
    while (fdiv_r(rest, p) == 0) {
      rest = fdiv_q(rest, p);
      cd.n1 *= p;
    }
  }
  cd.n0 = rest;
  cd.qpp = elem_int(A, qhat) * cd.y * pow(unit_inverse(cd.u), Z(2));

  // progression class r mod m, m = 2|Norm(y)|
  cd.m = 2 * cd.ny;
  Z r = fdiv_r(cd.t, q2);
  Z rmod = q2;
  if (cd.n0 > 1) {
    r = crt_z(r, rmod, Z(1), cd.n0);
    rmod *= cd.n0;
  }
  if (fdiv_r(rmod, 2) != 0) {
    r = crt_z(r, rmod, Z(1), Z(2));
    rmod *= 2;
  }
  cd.r = r;
  if (gcd(cd.r, cd.m) != 1)
    throw Error(Err::SearchExhausted, "build_conj_data: gcd(r, m) != 1");
  if (!validate_conj_data(cd))
    throw Error(Err::Internal, "build_conj_data: validation failed");
  return cd;
}

bool validate_conj_data(const ConjData& cd) {
  const LocalizedRing& A = *cd.R;
  RingElement one = elem_one(A);
  if (!divides(cd.q, elem_int(A, cd.qhat))) return false;
  if (cd.e % factorial(unsigned(A.k())) != 0) return false;
  Z q2 = cd.qhat * cd.qhat;
  if (fdiv_r(powmod_z(cd.t, cd.e, q2) - 1 - cd.a * cd.qhat, q2) != 0) return false;
  if (gcd(cd.a, cd.qhat) != 1) return false;
  if ((int)cd.D.size() > A.k() + 1) return false;
  // Z-span of D contains q'B
  IMat rows;
  for (const RingElement& d : cd.D) {
    if (!d.den.empty() &&
        std::any_of(d.den.begin(), d.den.end(), [](unsigned x) { return x > 0; }))
      return false;
    rows.push_back(d.num);
  }
  IMat h = hnf(rows);
  Vec v(A.k(), 0);
  std::vector<Q> qc = rational_coords(cd.qp);
  for (int j = 0; j < A.k(); ++j) {
    if (qc[j].get_den() != 1) return false;
    v[j] = qc[j].get_num();
  }
  for (int i = 0; i < A.k(); ++i) {
    // q' * theta^i coordinates must lie in the span
    Vec ti(A.k(), 0);
    ti[i] = 1;
    if (!lattice_contains(h, mul_basis(A.B, v, ti))) return false;
  }
  if (!is_unit(cd.u)) return false;
  if (!divides(elem_int(A, q2) * cd.b, cd.u - one)) return false;
  if (!(cd.y == cd.u * cd.u - one)) return false;
  if (cd.u * cd.u == one) return false;
  Q ny = norm(cd.y);
  if (ny.get_den() != 1 || abs(ny.get_num()) != cd.ny) return false;
  if (cd.n0 * cd.n1 != cd.ny) return false;
  if (gcd(cd.n0, cd.qhat) != 1) return false;
  for (auto& [p, e] : factorize(cd.n1)) {
    (void)e;
    if (fdiv_r(cd.qhat, p) != 0) return false;
  }
  if (!(cd.qpp * cd.u * cd.u == elem_int(A, cd.qhat) * cd.y)) return false;
  if (cd.m != 2 * cd.ny) return false;
  if (gcd(cd.r, cd.m) != 1) return false;
  if (fdiv_r(cd.r - cd.t, q2) != 0) return false;
  if (cd.n0 > 1 && fdiv_r(cd.r - 1, cd.n0) != 0) return false;
  return true;
}

// ---- six-prime decompositions ------------------------------------------------------------------------

namespace {

std::vector<Z> primes_in_class(const Z& r, const Z& m, const Z& value_cap,
                               size_t count_cap) {
  std::vector<Z> out;
  Z p = fdiv_r(r, m);
  if (p == 0) p = m;  // r = 0 mod m only with m = 1
  for (; p <= value_cap && out.size() < count_cap; p += m)
    if (p > 1 && probably_prime(p)) out.push_back(p);
  return out;
}

}  // namespace

SixPrimeDecomposition six_prime_decompose(const Z& t, const Z& r, const Z& m,
                                          const Z& budget) {
  if (gcd(r, m) != 1)
    throw Error(Err::Internal, "six_prime_decompose: gcd(r,m) != 1");
  if (fdiv_r(t, m) != 0)
    throw Error(Err::Internal, "six_prime_decompose: t not in mZ");
  Z cap = abs(t) + 120 * m + 1000;
  std::vector<Z> L = primes_in_class(r, m, cap, 400);
  if (L.size() < 1) throw Error(Err::SearchExhausted, "no primes in class");
  // minus-side sums: lexicographically first index triple per value
  std::map<Z, std::array<size_t, 3>> minus;
  long pairs = 0;
  for (size_t i = 0; i < L.size(); ++i)
    for (size_t j = i; j < L.size(); ++j)
      for (size_t k = j; k < L.size(); ++k) {
        if (++pairs > budget.get_si())
          throw Error(Err::SearchExhausted, "six_prime_decompose budget");
        Z s = L[i] + L[j] + L[k];
        if (!minus.count(s)) minus[s] = {i, j, k};
      }
  for (size_t i = 0; i < L.size(); ++i)
    for (size_t j = i; j < L.size(); ++j)
      for (size_t k = j; k < L.size(); ++k) {
        Z s = L[i] + L[j] + L[k] - t;
        auto it = minus.find(s);
        if (it == minus.end()) continue;
        SixPrimeDecomposition d;
        d.t = t;
        d.r = r;
        d.m = m;
        d.p = {L[i], L[j], L[k], L[it->second[0]], L[it->second[1]],
               L[it->second[2]]};
        return d;
      }
  throw Error(Err::SearchExhausted, "six_prime_decompose: no representation");
}

bool validate_six_prime(const SixPrimeDecomposition& d) {
  if (gcd(d.r, d.m) != 1) return false;
  Z s = 0;
  for (int i = 0; i < 6; ++i) {
    if (!probably_prime(d.p[i])) return false;
    if (fdiv_r(d.p[i] - d.r, d.m) != 0) return false;
    s += (i < 3) ? d.p[i] : -d.p[i];
  }
  return s == d.t;
}

// ---- M-set sum decomposition -----------------------------------------------------------------------------

namespace {

// t written as a signed sum of at most six primes = r mod m, minimal count;
// returns (prime, sign) pairs.  Deterministic lexicographic enumeration.
std::vector<std::pair<Z, int>> signed_prime_sum(const Z& t, const Z& r,
                                                const Z& m) {
  Z cap = abs(t) + 120 * m + 1000;
  std::vector<Z> L = primes_in_class(r, m, cap, 400);
  if (t == 0) return {};
  // count 1
  for (const Z& p : L) {
    if (p == t) return {{p, +1}};
    if (-p == t) return {{p, -1}};
  }
  // count 2
  for (size_t i = 0; i < L.size(); ++i)
    for (size_t j = i; j < L.size(); ++j) {
      if (L[i] + L[j] == t) return {{L[i], +1}, {L[j], +1}};
      if (-L[i] - L[j] == t) return {{L[i], -1}, {L[j], -1}};
      if (L[i] - L[j] == t) return {{L[i], +1}, {L[j], -1}};
      if (L[j] - L[i] == t) return {{L[j], +1}, {L[i], -1}};
    }
  // count 3: all eight sign patterns per sorted triple
  static const int pat3[8][3] = {{1, 1, 1},   {1, 1, -1},  {1, -1, 1},
                                 {-1, 1, 1},  {1, -1, -1}, {-1, 1, -1},
                                 {-1, -1, 1}, {-1, -1, -1}};
  for (size_t i = 0; i < L.size(); ++i)
    for (size_t j = i; j < L.size(); ++j)
      for (size_t k = j; k < L.size(); ++k)
        for (auto& sg : pat3) {
          if (sg[0] * L[i] + sg[1] * L[j] + sg[2] * L[k] != t) continue;
          return {{L[i], sg[0]}, {L[j], sg[1]}, {L[k], sg[2]}};
        }
  // fall back to the full six-prime corollary
  SixPrimeDecomposition d = six_prime_decompose(t, r, m);
  std::vector<std::pair<Z, int>> out;
  for (int i = 0; i < 6; ++i) out.push_back({d.p[i], i < 3 ? +1 : -1});
  return out;
}

}  // namespace

std::vector<ConjMWitness> mset_sum_decompose(const LocalizedRing& A,
                                             const RingElement& q,
                                             const RingElement& target,
                                             int bound, const ConjData& cd) {
  std::vector<ConjMWitness> out;
  if (target.is_zero()) return out;
  // a single M-set element needs no machinery
  try {
    out.push_back(mset_membership(A, q, target, Z(20000)));
    return out;
  } catch (const Error& e) {
    if (e.code != Err::SearchExhausted) throw;
    out.clear();
  }
  RingElement denom = cd.qp * elem_int(A, cd.m) * cd.qpp;
  RingElement rho = divide_exact(target, denom);  // NotDivisible when misused
  // clear the localized denominator with an even power of each generator
  RingElement sigma = elem_one(A);
  RingElement nrho = normalize(rho);
  for (size_t i = 0; i < nrho.den.size(); ++i) {
    unsigned half = (nrho.den[i] + 1) / 2;
    RingElement si = elem_vec(A, A.s[i]);
    for (unsigned c = 0; c < half; ++c) sigma = sigma * si;
  }
  RingElement bb = nrho * sigma * sigma;
  bb = normalize(bb);
  if (!bb.den.empty() &&
      std::any_of(bb.den.begin(), bb.den.end(), [](unsigned x) { return x > 0; }))
    throw Error(Err::Internal, "mset_sum_decompose: denominator not cleared");
  // integer combination q' bb = sum n_i D_i
  RingElement qpbb = cd.qp * bb;
  qpbb = normalize(qpbb);
  IMat rows;
  for (const RingElement& d : cd.D) rows.push_back(d.num);
  Vec coeffs;
  if (!solve_in_rowspan(rows, qpbb.num, &coeffs))
    throw Error(Err::SearchExhausted, "mset_sum_decompose: span expansion failed");
  RingElement su2 = unit_inverse(sigma) * unit_inverse(sigma);
  RingElement check = elem_zero(A);
  for (size_t i = 0; i < cd.D.size(); ++i) {
    if (coeffs[i] == 0) continue;
    Z ti = coeffs[i] * cd.m;
    for (auto& [p, sgn] : signed_prime_sum(ti, cd.r, cd.m)) {
      // (1+y)^{p^e - 1} = 1 + p d q'' ztilde exactly, u2 = u^{p^e - 1}
      Z pe = 1;
      for (Z c = 0; c < cd.e; ++c) pe *= p;
      RingElement u2 = pow(cd.u, pe - 1);
      RingElement core = elem_int(A, p) * cd.D[i] * cd.qpp;
      RingElement zt = divide_exact(u2 * u2 - elem_one(A), core);
      ConjMWitness w;
      w.R = &A;
      w.q = q;
      w.y = (sgn > 0 ? core : -core) * su2;
      w.z = sgn > 0 ? zt : -zt;
      w.u1 = sigma;
      w.u2 = u2;
      if (!validate_mset_witness(w))
        throw Error(Err::Internal, "mset_sum_decompose: bad term witness");
      check = check + w.y;
      out.push_back(w);
    }
  }
  if (!(check == target))
    throw Error(Err::Internal, "mset_sum_decompose: sum mismatch");
  if ((int)out.size() > bound)
    throw Error(Err::SearchExhausted, "mset_sum_decompose: bound exceeded");
  return out;
}

// ---- Serre level ideal -----------------------------------------------------------------------------------

SerreLevel serre_level(const LocalizedRing& A, const SquareMatrix& T) {
  if (T.n != 2 || !(mat_det(T) == elem_one(A)))
    throw Error(Err::NotDeterminantOne, "serre_level: T not in SL(2,A)");
  RingElement c = T.e[1][0];
  if (c.is_zero())
    throw Error(Err::DegenerateEntry, "serre_level: lower-left entry is zero");
  SerreLevel out;
  out.R = &A;
  try {
    RingElement u0 = fundamental_unit_search(A);
    Z ord = element_order_mod(u0, c);
    Z mexp = (fdiv_r(ord, 2) == 0) ? ord / 2 : ord;
    RingElement u = pow(u0, mexp);
    out.u = u;
    out.level = pow(u, Z(4)) - elem_one(A);
    return out;
  } catch (const Error& e) {
    if (e.code != Err::NoInfiniteUnits) throw;
  }
  // torsion-only rings: scan small roots of unity for u^2 = 1 mod cA, u^4 != 1
  RingElement one = elem_one(A);
  std::vector<Vec> box;
  Vec v(A.k(), -1);
  while (true) {
    box.push_back(v);
    int pos = 0;
    while (pos < A.k() && v[pos] == 1) v[pos++] = -1;
    if (pos == A.k()) break;
    v[pos] += 1;
  }
  for (const Vec& cand : box) {
    RingElement u = elem_vec(A, cand);
    if (u.is_zero() || !is_unit(u) || !is_root_of_unity(u)) continue;
    if (!divides(c, u * u - one)) continue;
    if (pow(u, Z(4)) == one) continue;
    out.u = u;
    out.level = pow(u, Z(4)) - one;
    return out;
  }
  out.u = one;
  out.level = elem_zero(A);
  return out;
}

}  // namespace elgen
