// Mennicke-symbol trace calculus: rules, validator, certificate searches.

#include "elgen/mennicke.hpp"

#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace elgen {

namespace {

// aA + bA = A, zero slots allowed
bool pair_coprime(const LocalizedRing& A, const RingElement& a,
                  const RingElement& b) {
  if (a.is_zero()) return is_unit(b);
  if (b.is_zero()) return is_unit(a);
  if (is_unit(a) || is_unit(b)) return true;
  FiniteQuotient F = finite_quotient(A, a);
  return F.is_unit_residue(F.from_element(b));
}

bool wpair_ok(const LocalizedRing& A, const RingElement& q,
              const RingElement& a, const RingElement& b) {
  return divides(q, a - elem_one(A)) && divides(q, b) && pair_coprime(A, a, b);
}

std::string factor_key(const SymbolFactor& f) {
  std::ostringstream os;
  os << elem_str(f.a) << " | " << elem_str(f.b) << " ^ " << f.e.get_str();
  return os.str();
}

// canonical multiset of nonzero-exponent factors
std::multiset<std::string> product_key(const MennickeProduct& p) {
  std::multiset<std::string> out;
  for (const SymbolFactor& f : p.factors)
    if (f.e != 0) out.insert(factor_key(f));
  return out;
}

}  // namespace

MennickeProduct symbol_product(const LocalizedRing& A, const RingElement& q,
                               std::vector<SymbolFactor> fs) {
  for (const SymbolFactor& f : fs) make_wpair(A, q, f.a, f.b);  // NotInW
  MennickeProduct p;
  p.R = &A;
  p.q = q;
  p.factors = std::move(fs);
  return p;
}

const char* rule_name(MRule r) {
  switch (r) {
    case MRule::MS1a: return "MS1a";
    case MRule::MS1b: return "MS1b";
    case MRule::B1A: return "B1A";
    case MRule::UnitTerm: return "UNIT-TERM";
    case MRule::Inv: return "INV";
    case MRule::Sq: return "SQ";
    case MRule::MS2aSplit: return "MS2a-split";
    case MRule::MS2aMerge: return "MS2a-merge";
    case MRule::MS2bSplit: return "MS2b-split";
    case MRule::MS2bMerge: return "MS2b-merge";
    case MRule::MS2bPower: return "MS2b-power";
    case MRule::MS2bUnpower: return "MS2b-unpower";
    case MRule::ProdInv: return "PRODINV";
  }
  return "?";
}

TraceReport validate_trace(const DerivationTrace& tr) {
  TraceReport rep;
  const LocalizedRing& A = *tr.start.R;
  const RingElement& q = tr.start.q;
  RingElement one = elem_one(A);
  auto fail = [&](int step, const std::string& msg) {
    rep.ok = false;
    rep.failed_step = step;
    rep.message = msg;
    return rep;
  };
  std::vector<SymbolFactor> cur = tr.start.factors;
  for (const SymbolFactor& f : cur)
    if (!wpair_ok(A, q, f.a, f.b)) return fail(-1, "start factor not in W(qA)");
  auto sl2q = [&](const RingElement& a, const RingElement& b,
                  const RingElement& c, const RingElement& d) {
    SquareMatrix m = mat_identity(A, 2);
    m.e[0][0] = a;
    m.e[0][1] = b;
    m.e[1][0] = c;
    m.e[1][1] = d;
    return mat_det(m) == one && is_congruence(m, q);
  };
  for (size_t si = 0; si < tr.steps.size(); ++si) {
    const DerivationStep& st = tr.steps[si];
    int i = st.idx;
    if (i < 0 || i >= (int)cur.size()) return fail((int)si, "factor index out of range");
    SymbolFactor& f = cur[i];
    const std::vector<RingElement>& P = st.params;
    switch (st.rule) {
      case MRule::MS1a: {
        if (P.size() != 1) return fail((int)si, "MS1a wants {t}");
        if (!divides(q, P[0])) return fail((int)si, "MS1a: t not in qA");
        f.b = f.b + P[0] * f.a;
        break;
      }
      case MRule::MS1b: {
        if (P.size() != 1) return fail((int)si, "MS1b wants {t}");
        f.a = f.a + P[0] * f.b;
        break;
      }
      case MRule::B1A: {
        if (!P.empty()) return fail((int)si, "B1A wants no params");
        f.b = f.b * (one - f.a);
        break;
      }
      case MRule::UnitTerm: {
        if (P.size() != 1) return fail((int)si, "UNIT-TERM wants {u}");
        const RingElement& u = P[0];
        if (!is_unit(u)) return fail((int)si, "UNIT-TERM: u not a unit");
        if (!divides(f.b, f.a - u) && !divides(f.a, f.b - u))
          return fail((int)si, "UNIT-TERM: no congruence to u");
        cur.erase(cur.begin() + i);
        break;
      }
      case MRule::Inv: {
        if (P.size() != 2) return fail((int)si, "INV wants {c,d}");
        if (!sl2q(f.a, f.b, P[0], P[1]))
          return fail((int)si, "INV: completion not in SL(2,A;qA)");
        f.b = P[0];
        f.e = -f.e;
        break;
      }
      case MRule::Sq: {
        if (P.size() != 7) return fail((int)si, "SQ wants {ma,mb,mc,md,f,g,newb}");
        const RingElement &ma = P[0], &mb = P[1], &mc = P[2], &md = P[3],
                          &ff = P[4], &gg = P[5], &nb = P[6];
        if (f.e % 2 != 0) return fail((int)si, "SQ: exponent not even");
        if (!(ma * md - mb * mc == one)) return fail((int)si, "SQ: det M != 1");
        if (!sl2q(ff + gg * ma, gg * mb, gg * mc, ff + gg * md))
          return fail((int)si, "SQ: f*Id + g*M not in SL(2,A;qA)");
        if (!(f.a == ff + gg * ma)) return fail((int)si, "SQ: a != f + g*ma");
        bool ins = (f.b == mb) && (nb == mb * gg);
        bool drop = (f.b == mb * gg) && (nb == mb);
        if (!ins && !drop) return fail((int)si, "SQ: b/newb not {mb, g*mb}");
        f.b = nb;
        break;
      }
      case MRule::MS2aSplit: {
        if (P.size() != 2) return fail((int)si, "MS2a-split wants {b1,b2}");
        if (!(P[0] * P[1] == f.b)) return fail((int)si, "MS2a-split: b1*b2 != b");
        SymbolFactor g{f.a, P[1], f.e};
        f.b = P[0];
        cur.insert(cur.begin() + i + 1, g);
        break;
      }
      case MRule::MS2aMerge: {
        if (st.idx2 != i + 1 || st.idx2 >= (int)cur.size())
          return fail((int)si, "MS2a-merge wants adjacent idx2");
        SymbolFactor& g = cur[st.idx2];
        if (!(g.a == f.a) || g.e != f.e)
          return fail((int)si, "MS2a-merge: a or e mismatch");
        f.b = f.b * g.b;
        cur.erase(cur.begin() + st.idx2);
        break;
      }
      case MRule::MS2bSplit: {
        if (P.size() != 2) return fail((int)si, "MS2b-split wants {a1,a2}");
        if (!(P[0] * P[1] == f.a)) return fail((int)si, "MS2b-split: a1*a2 != a");
        SymbolFactor g{P[1], f.b, f.e};
        f.a = P[0];
        cur.insert(cur.begin() + i + 1, g);
        break;
      }
      case MRule::MS2bMerge: {
        if (st.idx2 != i + 1 || st.idx2 >= (int)cur.size())
          return fail((int)si, "MS2b-merge wants adjacent idx2");
        SymbolFactor& g = cur[st.idx2];
        if (!(g.b == f.b) || g.e != f.e)
          return fail((int)si, "MS2b-merge: b or e mismatch");
        f.a = f.a * g.a;
        cur.erase(cur.begin() + st.idx2);
        break;
      }
      case MRule::MS2bPower: {
        if (st.m < 1) return fail((int)si, "MS2b-power: m < 1");
        if (f.e % st.m != 0) return fail((int)si, "MS2b-power: m does not divide e");
        f.a = pow(f.a, st.m);
        f.e = f.e / st.m;
        break;
      }
      case MRule::MS2bUnpower: {
        if (P.size() != 1) return fail((int)si, "MS2b-unpower wants {root}");
        if (st.m < 1) return fail((int)si, "MS2b-unpower: m < 1");
        if (!(pow(P[0], st.m) == f.a))
          return fail((int)si, "MS2b-unpower: root^m != a");
        f.a = P[0];
        f.e = f.e * st.m;
        break;
      }
      case MRule::ProdInv: {
        if (P.size() != 4) return fail((int)si, "PRODINV wants {a1,a2,c,d}");
        if (st.idx2 != i + 1 || st.idx2 >= (int)cur.size())
          return fail((int)si, "PRODINV wants adjacent idx2");
        SymbolFactor& g = cur[st.idx2];
        const RingElement &a1 = P[0], &a2 = P[1], &cc = P[2], &dd = P[3];
        if (!(f.a == a1 * a2) || !(g.a == a2) || !(f.b == g.b) || g.e != -f.e)
          return fail((int)si, "PRODINV: factor shape mismatch");
        if (!sl2q(a2, f.b, cc, dd))
          return fail((int)si, "PRODINV: completion of (a2,b) not in SL(2,A;qA)");
        RingElement b = f.b;
        f.a = one + a2 * dd * (a1 - one);
        f.b = a2 * b * (one - a1);
        cur.erase(cur.begin() + st.idx2);
        break;
      }
    }
    for (const SymbolFactor& fc : cur)
      if (!wpair_ok(A, q, fc.a, fc.b))
        return fail((int)si, "intermediate factor not in W(qA)");
  }
  if (product_key(MennickeProduct{&A, q, cur}) != product_key(tr.end))
    return fail(-1, "endpoint mismatch");
  rep.ok = true;
  rep.failed_step = -1;
  rep.message = "ok";
  return rep;
}

// ---- certificate search ----------------------------------------------------------

namespace {

// the closing UNIT-TERM parameter, if the pair is already terminal
bool terminal_unit(const LocalizedRing& A, const RingElement& a,
                   const RingElement& b, RingElement& u) {
  RingElement one = elem_one(A);
  if (b.is_zero() && is_unit(a)) { u = a; return true; }
  if (is_unit(a)) { u = a; return true; }
  if (is_unit(b)) { u = b; return true; }
  if (!b.is_zero() && divides(b, a - one)) { u = one; return true; }
  if (!b.is_zero() && divides(b, a + one)) { u = -one; return true; }
  if (!a.is_zero() && divides(a, b - one)) { u = one; return true; }
  if (!a.is_zero() && divides(a, b + one)) { u = -one; return true; }
  return false;
}

Z round_q(const Q& x) {  // nearest integer, half away from zero is fine here
  Z n = x.get_num(), d = x.get_den();
  Z two_n = 2 * n;
  if (n >= 0) return (two_n + d) / (2 * d);
  Z r = ((-two_n) + d) / (2 * d);
  return -r;
}

}  // namespace

DerivationTrace certify_trivial(const WPair& inst, const Z& budget) {
  const LocalizedRing& A = *inst.R;
  const RingElement& q = inst.q;
  DerivationTrace tr;
  tr.start = symbol_product(A, q, {{inst.a, inst.b, Z(1)}});
  tr.end = MennickeProduct{&A, q, {}};
  RingElement a = inst.a, b = inst.b, u = elem_one(A);
  std::vector<DerivationStep> steps;
  auto push1 = [&](MRule r, const RingElement& t) {
    DerivationStep s;
    s.rule = r;
    s.idx = 0;
    s.params = {t};
    steps.push_back(s);
  };
  bool done = terminal_unit(A, a, b, u);
  if (!done && A.k() == 1) {
    // Euclidean descent on the rational line: MS1b is free, MS1a moves by q*a
    for (int iter = 0; iter < 256 && !done; ++iter) {
      bool progress = false;
      if (!b.is_zero()) {
        Z t = -round_q(rational_coords(a)[0] / rational_coords(b)[0]);
        if (t != 0) {
          RingElement te = elem_int(A, t);
          a = a + te * b;
          push1(MRule::MS1b, te);
          progress = true;
        }
      }
      done = terminal_unit(A, a, b, u);
      if (done) break;
      if (!a.is_zero()) {
        Z s = -round_q(rational_coords(b)[0] / rational_coords(q * a)[0]);
        if (s != 0) {
          RingElement se = elem_int(A, s) * q;
          b = b + se * a;
          push1(MRule::MS1a, se);
          progress = true;
        }
      }
      done = terminal_unit(A, a, b, u);
      if (!progress) break;
    }
  }
  if (!done) {
    // BFS over small moves
    struct Node {
      RingElement a, b;
      int parent;
      DerivationStep step;
    };
    std::vector<Node> nodes;
    std::set<std::string> seen;
    auto key = [](const RingElement& x, const RingElement& y) {
      return elem_str(x) + "|" + elem_str(y);
    };
    DerivationStep root;
    nodes.push_back({a, b, -1, root});
    seen.insert(key(a, b));
    std::deque<int> queue{0};
    int found = -1;
    Z expanded = 0;
    RingElement one = elem_one(A);
    while (!queue.empty() && found < 0) {
      int ni = queue.front();
      queue.pop_front();
      if (++expanded > budget)
        throw Error(Err::SearchExhausted, "certify_trivial: BFS budget");
      RingElement na = nodes[ni].a, nb = nodes[ni].b;
      if (terminal_unit(A, na, nb, u)) {
        found = ni;
        break;
      }
      auto try_push = [&](const RingElement& xa, const RingElement& xb,
                          MRule r, std::vector<RingElement> ps) {
        std::string k = key(xa, xb);
        if (seen.count(k)) return;
        seen.insert(k);
        DerivationStep s;
        s.rule = r;
        s.idx = 0;
        s.params = std::move(ps);
        nodes.push_back({xa, xb, ni, s});
        queue.push_back((int)nodes.size() - 1);
      };
      for (int t : {1, -1, 2, -2}) {
        RingElement te = elem_int(A, Z(t));
        if (!nb.is_zero()) try_push(na + te * nb, nb, MRule::MS1b, {te});
        if (!na.is_zero()) try_push(na, nb + te * q * na, MRule::MS1a, {te * q});
      }
      try_push(na, nb * (one - na), MRule::B1A, {});
    }
    if (found < 0)
      throw Error(Err::SearchExhausted, "certify_trivial: no terminal state");
    std::vector<DerivationStep> path;
    for (int ni = found; nodes[ni].parent >= 0; ni = nodes[ni].parent)
      path.push_back(nodes[ni].step);
    for (auto it = path.rbegin(); it != path.rend(); ++it) steps.push_back(*it);
    a = nodes[found].a;
    b = nodes[found].b;
    terminal_unit(A, a, b, u);
  }
  push1(MRule::UnitTerm, u);
  tr.steps = std::move(steps);
  TraceReport rep = validate_trace(tr);
  if (!rep.ok)
    throw Error(Err::Internal, "certify_trivial: trace rejected: " + rep.message);
  return tr;
}

// ---- Step 1.7: the exponent chain -------------------------------------------------

DerivationTrace exponent_kill(const RingElement& q, const RingElement& a,
                              const RingElement& b, const ExpWitness& w) {
  const LocalizedRing& A = *w.R;
  if (!(w.q == q) || !(w.a == a) || !(w.b == b) || !validate_exp_witness(w))
    throw Error(Err::InvalidWitness, "exponent_kill: witness does not check");
  RingElement one = elem_one(A);
  DerivationTrace tr;
  tr.start = symbol_product(A, q, {{a, b, -w.t}});
  tr.end = MennickeProduct{&A, q, {}};
  auto step = [&](MRule r, std::vector<RingElement> ps, Z m = Z(1)) {
    DerivationStep s;
    s.rule = r;
    s.idx = 0;
    s.m = m;
    s.params = std::move(ps);
    tr.steps.push_back(s);
  };
  if (b.is_zero() || a.is_zero()) {
    // [0 over a] with a a unit, or [b over 0] with b a unit
    step(MRule::UnitTerm, {b.is_zero() ? a : b});
  } else {
    if (!(w.ap == a)) step(MRule::MS1b, {divide_exact(w.ap - a, b)});
    step(MRule::Inv, {w.c, w.d});
    step(MRule::MS2bPower, {}, w.t);
    std::array<RingElement, 2> x{w.f[0] + w.g[0] * w.ap, w.f[1] + w.g[1] * w.ap};
    RingElement X = x[0] * x[0] * x[1] * x[1];
    if (!w.c.is_zero()) {
      RingElement tt = divide_exact(X - pow(w.ap, w.t), w.c);
      if (!tt.is_zero()) step(MRule::MS1b, {tt});
    }
    step(MRule::MS2bSplit, {x[0] * x[0], x[1] * x[1]});
    for (int i = 0; i < 2; ++i) {
      step(MRule::MS2bUnpower, {x[i]}, Z(2));
      step(MRule::Sq,
           {w.ap, w.c, w.bp[i], w.dp[i], w.f[i], w.g[i], w.c * w.g[i]});
      step(MRule::Inv, {w.bp[i] * w.g[i], w.f[i] + w.g[i] * w.dp[i]});
      step(MRule::Sq,
           {w.ap, w.bp[i], w.c, w.dp[i], w.f[i], w.g[i], w.bp[i]});
      RingElement tt = divide_exact(w.u[i] - x[i], w.bp[i]);
      if (!tt.is_zero()) step(MRule::MS1b, {tt});
      step(MRule::UnitTerm, {w.u[i]});
    }
  }
  TraceReport rep = validate_trace(tr);
  if (!rep.ok)
    throw Error(Err::Internal, "exponent_kill: trace rejected: " + rep.message);
  return tr;
}

// ---- Step 1.6: rank certificate ---------------------------------------------------

RankCertificate rank_witness(const LocalizedRing& A, const RingElement& q,
                             const std::vector<WPair>& instances, const Z& p,
                             const Z& t, const Z& r) {
  if (instances.empty() || Z(instances.size()) != r + 1)
    throw Error(Err::SearchExhausted, "rank_witness: wants r+1 instances");
  RingElement one = elem_one(A);
  RankCertificate c;
  c.R = &A;
  c.q = q;
  c.instances = instances;
  c.p = p;
  c.t = t;
  c.r = r;
  // pairwise-coprime shifts a'_i = a_i + t_i b_i (zigzag over t_i)
  for (const WPair& inst : instances) {
    RingElement ap = inst.a;
    bool found = false;
    for (int j = 0; j < 2000 && !found; ++j) {
      Z tz = (j % 2 == 0) ? Z(j / 2) : Z(-(j / 2 + 1));
      ap = inst.a + elem_int(A, tz) * inst.b;
      if (ap.is_zero()) continue;
      found = true;
      for (const RingElement& prev : c.aprime)
        if (!pair_coprime(A, prev, ap)) {
          found = false;
          break;
        }
    }
    if (!found)
      throw Error(Err::SearchExhausted, "rank_witness: no coprime shift");
    c.aprime.push_back(ap);
  }
  // CRT: y = b_i mod a'_i, y = 1 mod qA
  RingElement y = elem_zero(A), mod = elem_one(A);
  for (size_t i = 0; i < c.aprime.size(); ++i) {
    y = crt_pair(y, mod, instances[i].b, c.aprime[i]);
    mod = mod * c.aprime[i];
  }
  y = crt_pair(y, mod, one, q);
  c.y = y;
  // prime h = y mod q * prod a'_i, with the GEN(t,1) data at h
  c.hwit = gen_witness(A, y, q * mod, t);
  c.h = c.hwit.h;
  // brute-force exponents: beta^p = prod (a'_i)^{e_i} mod h qA
  FiniteQuotient F = finite_quotient(A, c.h);
  std::vector<Vec> ares;
  for (const RingElement& ap : c.aprime) ares.push_back(F.from_element(ap));
  Z E = c.hwit.exponent;
  if (E < 1) E = 1;
  size_t n = c.aprime.size();
  std::vector<Z> e(n, Z(0));
  std::vector<Vec> residues = F.residues(Z(1000000));
  Z scanned = 0;
  while (true) {
    bool allp = true;
    for (const Z& ei : e)
      if (ei % p != 0) {
        allp = false;
        break;
      }
    if (!allp) {
      Vec x = F.one();
      for (size_t i = 0; i < n; ++i) x = F.mul(x, F.pow(ares[i], e[i]));
      for (const Vec& al : residues) {
        if (!F.is_unit_residue(al)) continue;
        if (F.pow(al, p) == x) {
          c.e = e;
          c.alpha = F.lift(al);
          c.beta = crt_pair(c.alpha, c.h, one, q);
          if (!validate_rank_witness(c))
            throw Error(Err::Internal, "rank_witness: certificate rejected");
          return c;
        }
      }
    }
    if (++scanned > 200000)
      throw Error(Err::SearchExhausted, "rank_witness: tuple budget");
    // lexicographic increment over [0, E)^n
    size_t pos = n;
    while (pos > 0) {
      --pos;
      e[pos] += 1;
      if (e[pos] < E) break;
      e[pos] = 0;
      if (pos == 0)
        throw Error(Err::SearchExhausted, "rank_witness: exponent space done");
    }
  }
}

bool validate_rank_witness(const RankCertificate& c) {
  const LocalizedRing& A = *c.R;
  RingElement one = elem_one(A);
  if (c.instances.size() != c.aprime.size() || c.e.size() != c.aprime.size())
    return false;
  if (Z(c.instances.size()) != c.r + 1) return false;
  RingElement mod = one;
  for (size_t i = 0; i < c.aprime.size(); ++i) {
    const WPair& inst = c.instances[i];
    if (!wpair_ok(A, c.q, inst.a, inst.b)) return false;
    // a'_i = a_i mod b_i A, and the shifts are pairwise coprime
    if (inst.b.is_zero()) {
      if (!(c.aprime[i] == inst.a)) return false;
    } else if (!divides(inst.b, c.aprime[i] - inst.a)) {
      return false;
    }
    for (size_t j = 0; j < i; ++j)
      if (!pair_coprime(A, c.aprime[j], c.aprime[i])) return false;
    // y = b_i mod a'_i
    if (!c.aprime[i].is_zero() && !divides(c.aprime[i], c.y - inst.b))
      return false;
    mod = mod * c.aprime[i];
  }
  if (!divides(c.q, c.y - one)) return false;
  // h = y mod (q prod a'_i) A, with valid GEN data at h
  if (!(c.hwit.h == c.h)) return false;
  if (!divides(c.q * mod, c.h - c.y)) return false;
  if (!validate_gen_witness(c.hwit)) return false;
  // some e_i nonzero mod p
  bool some = false;
  for (const Z& ei : c.e)
    if (ei % c.p != 0) some = true;
  if (!some) return false;
  // beta^p = prod (a'_i)^{e_i} mod h qA, beta = 1 mod qA
  if (!divides(c.q, c.beta - one)) return false;
  RingElement prod = one;
  for (size_t i = 0; i < c.aprime.size(); ++i)
    prod = prod * pow(c.aprime[i], c.e[i]);
  return divides(c.h * c.q, pow(c.beta, c.p) - prod);
}

}  // namespace elgen
