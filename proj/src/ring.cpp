#include "elgen/ring.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace elgen {

// ---- polynomial helpers -----------------------------------------------------

static Vec poly_trim(Vec p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
  return p;
}

static Z poly_eval(const Vec& p, const Z& x) {
  Z r = 0;
  for (size_t i = p.size(); i-- > 0;) r = r * x + p[i];
  return r;
}

// remainder of monic division f / g (both monic not required for f)
static bool divides_poly(const Vec& g, Vec f) {
  // g monic
  int dg = (int)g.size() - 1;
  while ((int)f.size() - 1 >= dg) {
    if (f.back() == 0) {
      f.pop_back();
      continue;
    }
    Z c = f.back();
    int shift = (int)f.size() - 1 - dg;
    for (int i = 0; i <= dg; ++i) f[shift + i] -= c * g[i];
    f = poly_trim(f);
    if ((int)f.size() == 1 && f[0] == 0) break;
  }
  for (auto& c : f)
    if (c != 0) return false;
  return true;
}

static std::vector<Z> divisors_of(const Z& n) {
  std::vector<Z> out{1};
  for (auto& [p, e] : factorize(n)) {
    size_t base = out.size();
    Z pe = 1;
    for (int i = 0; i < e; ++i) {
      pe *= p;
      for (size_t j = 0; j < base; ++j) out.push_back(out[j] * pe);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

static bool has_integer_root(const Vec& f) {
  if (f[0] == 0) return true;  // x divides
  for (auto& d : divisors_of(f[0])) {
    if (poly_eval(f, d) == 0 || poly_eval(f, -d) == 0) return true;
  }
  return false;
}

static Z binom(int n, int k) {
  Z r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

// complete irreducibility test over Q for monic integer f (Mignotte-bounded
// factor enumeration for degree >= 4)
static bool poly_irreducible(const Vec& f) {
  int k = (int)f.size() - 1;
  if (k == 1) return true;
  if (has_integer_root(f)) return false;
  if (k <= 3) return true;
  Z rho = 1;
  for (int i = 0; i < k; ++i) rho = std::max(rho, Z(abs(f[i])));
  rho += 1;  // Cauchy bound on |roots|
  Z budget = 2000000;
  for (int d = 2; 2 * d <= k; ++d) {
    // candidate monic divisor g of degree d; |g_{d-j}| <= C(d,j) rho^j
    std::vector<Z> bound(d);
    Z rj = 1;
    for (int j = 1; j <= d; ++j) {
      rj *= rho;
      bound[d - j] = binom(d, j) * rj;
    }
    Vec g(d + 1, 0);
    g[d] = 1;
    std::function<bool(int)> rec = [&](int pos) -> bool {
      if (pos == d) return divides_poly(g, f);
      for (Z c = -bound[pos]; c <= bound[pos]; ++c) {
        if (--budget < 0)
          throw Error(Err::BudgetExceeded, "irreducibility factor enumeration");
        g[pos] = c;
        if (rec(pos + 1)) return true;
      }
      g[pos] = 0;
      return false;
    };
    if (rec(0)) return false;
  }
  return true;
}

static Z resultant(const Vec& f, const Vec& g) {
  int df = (int)f.size() - 1, dg = (int)g.size() - 1;
  int n = df + dg;
  if (n == 0) return 1;
  IMat s(n, Vec(n, 0));
  for (int i = 0; i < dg; ++i)
    for (int j = 0; j <= df; ++j) s[i][i + j] = f[df - j];
  for (int i = 0; i < df; ++i)
    for (int j = 0; j <= dg; ++j) s[dg + i][i + j] = g[dg - j];
  return det_int(s);
}

static Z poly_disc(const Vec& f) {
  int k = (int)f.size() - 1;
  if (k == 1) return 1;
  Vec fp(k);
  for (int i = 1; i <= k; ++i) fp[i - 1] = f[i] * i;
  fp = poly_trim(fp);
  Z res = resultant(f, fp);
  return ((k * (k - 1) / 2) % 2 == 0) ? res : -res;
}

OrderRing make_order(const Vec& poly) {
  Vec f = poly_trim(poly);
  int k = (int)f.size() - 1;
  if (k < 1 || f[k] != 1) throw Error(Err::NotMonic, "need a monic polynomial of degree >= 1");
  if (!poly_irreducible(f)) throw Error(Err::NotIrreducible, "polynomial factors over Q");
  OrderRing B;
  B.f = f;
  B.k = k;
  B.disc = poly_disc(f);
  if (k == 1) {
    B.index = 1;
    B.gamma = 1;
  } else if (k == 2) {
    // disc = index^2 * disc_K with disc_K = 0,1 mod 4
    Z m = 1;
    for (auto& [p, e] : factorize(B.disc))
      for (int i = 0; i < e / 2; ++i) m *= p;
    Z d0 = B.disc / (m * m);
    if (fdiv_r(d0, 4) != 0 && fdiv_r(d0, 4) != 1) m /= 2;
    B.index = m;
    B.gamma = m;
  } else {
    B.index = 0;  // not computed; |disc| is always a valid conductor witness
    B.gamma = abs(B.disc);
  }
  // powers theta^k .. theta^(2k-2)
  Vec tk(k);
  for (int i = 0; i < k; ++i) tk[i] = -f[i];
  B.theta_pow.push_back(tk);
  for (int i = 1; i <= k - 2; ++i) {
    const Vec& prev = B.theta_pow.back();
    Vec next(k, 0);
    for (int j = 0; j + 1 < k; ++j) next[j + 1] = prev[j];
    for (int j = 0; j < k; ++j) next[j] += prev[k - 1] * tk[j];
    B.theta_pow.push_back(next);
  }
  return B;
}

Vec mul_basis(const OrderRing& B, const Vec& a, const Vec& b) {
  int k = B.k;
  Vec conv(2 * k - 1, 0);
  for (int i = 0; i < k; ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j < k; ++j) conv[i + j] += a[i] * b[j];
  }
  Vec r(conv.begin(), conv.begin() + k);
  for (int i = k; i < 2 * k - 1; ++i) {
    if (conv[i] == 0) continue;
    const Vec& row = B.theta_pow[i - k];
    for (int j = 0; j < k; ++j) r[j] += conv[i] * row[j];
  }
  return r;
}

IMat mult_matrix(const OrderRing& B, const Vec& a) {
  int k = B.k;
  IMat m;
  m.push_back(a);
  for (int i = 1; i < k; ++i) {
    const Vec& prev = m.back();
    Vec next(k, 0);
    for (int j = 0; j + 1 < k; ++j) next[j + 1] = prev[j];
    if (prev[k - 1] != 0)
      for (int j = 0; j < k; ++j) next[j] += prev[k - 1] * B.theta_pow[0][j];
    m.push_back(next);
  }
  return m;
}

Z norm_basis(const OrderRing& B, const Vec& a) { return det_int(mult_matrix(B, a)); }

static IMat adjugate(const IMat& m) {
  int n = (int)m.size();
  if (n == 1) return {{Z(1)}};
  IMat adj(n, Vec(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      IMat minor;
      for (int r = 0; r < n; ++r) {
        if (r == i) continue;
        Vec row;
        for (int c = 0; c < n; ++c)
          if (c != j) row.push_back(m[r][c]);
        minor.push_back(row);
      }
      Z cof = det_int(minor);
      if ((i + j) % 2) cof = -cof;
      adj[j][i] = cof;  // transpose of cofactors
    }
  return adj;
}

// ---- ring construction ------------------------------------------------------

static std::string poly_str(const Vec& f) {
  std::ostringstream o;
  bool first = true;
  for (int i = (int)f.size() - 1; i >= 0; --i) {
    if (f[i] == 0 && !(i == 0 && first)) continue;
    Z c = f[i];
    if (first) {
      if (c < 0) o << "-";
      first = false;
    } else {
      o << (c < 0 ? "-" : "+");
    }
    Z a = abs(c);
    if (i == 0 || a != 1) o << a.get_str();
    if (i >= 1) {
      o << "x";
      if (i >= 2) o << "^" << i;
    }
  }
  return o.str();
}

static std::string gen_str(const Vec& g) {
  bool scalar = true;
  for (size_t i = 1; i < g.size(); ++i)
    if (g[i] != 0) scalar = false;
  if (scalar) return g[0].get_str();
  std::string s = "(";
  for (size_t i = 0; i < g.size(); ++i) {
    if (i) s += ",";
    s += g[i].get_str();
  }
  return s + ")";
}

LocalizedRing make_ring(const Vec& poly, std::vector<Vec> s_gens) {
  LocalizedRing R;
  R.B = make_order(poly);
  for (auto& g : s_gens) {
    Vec v = g;
    v.resize(R.B.k, 0);
    if (norm_basis(R.B, v) == 0)
      throw Error(Err::ZeroModulus, "inverted generator is zero");
    R.s.push_back(v);
  }
  for (auto& g : R.s) {
    IMat m = mult_matrix(R.B, g);
    R.s_adj.push_back(adjugate(m));
    R.s_det.push_back(det_int(m));
  }
  std::string d = "order: " + poly_str(R.B.f);
  d += "; invert: [";
  for (size_t i = 0; i < R.s.size(); ++i) {
    if (i) d += ",";
    d += gen_str(R.s[i]);
  }
  d += "]";
  R.descriptor = d;
  return R;
}

std::string ring_descriptor(const LocalizedRing& r) { return r.descriptor; }

// ---- parsing ----------------------------------------------------------------

static void skip_ws(const std::string& s, size_t& i) {
  while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
}

static Z parse_int(const std::string& s, size_t& i) {
  skip_ws(s, i);
  size_t start = i;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  size_t digits = i;
  while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
  if (i == digits) throw Error(Err::ParseError, "expected integer in '" + s + "'");
  return Z(s.substr(start, i - start));
}

static Vec parse_poly(const std::string& text) {
  std::map<long, Z> coef;
  size_t i = 0;
  bool first = true;
  while (true) {
    skip_ws(text, i);
    if (i >= text.size()) break;
    int sign = 1;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
    } else if (!first) {
      throw Error(Err::ParseError, "expected +/- in polynomial");
    }
    skip_ws(text, i);
    Z c = 1;
    bool saw_coef = false;
    if (i < text.size() && std::isdigit((unsigned char)text[i])) {
      size_t st = i;
      while (i < text.size() && std::isdigit((unsigned char)text[i])) ++i;
      c = Z(text.substr(st, i - st));
      saw_coef = true;
    }
    skip_ws(text, i);
    long e = 0;
    if (i < text.size() && (text[i] == 'x' || text[i] == 'X')) {
      ++i;
      e = 1;
      skip_ws(text, i);
      if (i < text.size() && text[i] == '^') {
        ++i;
        Z ez = parse_int(text, i);
        e = ez.get_si();
        if (e < 0) throw Error(Err::ParseError, "negative exponent");
      }
    } else if (!saw_coef) {
      throw Error(Err::ParseError, "empty term in polynomial");
    }
    coef[e] += sign * c;
    first = false;
  }
  if (coef.empty()) throw Error(Err::ParseError, "empty polynomial");
  long deg = coef.rbegin()->first;
  Vec f(deg + 1, 0);
  for (auto& [e, c] : coef) f[e] = c;
  return f;
}

LocalizedRing parse_ring(const std::string& descriptor) {
  auto pos = descriptor.find("order:");
  if (pos == std::string::npos)
    throw Error(Err::ParseError, "ring descriptor needs 'order:'");
  size_t start = pos + 6;
  size_t semi = descriptor.find(';', start);
  std::string ptext = descriptor.substr(start, semi == std::string::npos
                                                   ? std::string::npos
                                                   : semi - start);
  Vec f = parse_poly(ptext);
  std::vector<Vec> gens;
  auto ipos = descriptor.find("invert:");
  if (ipos != std::string::npos) {
    size_t i = ipos + 7;
    skip_ws(descriptor, i);
    if (i >= descriptor.size() || descriptor[i] != '[')
      throw Error(Err::ParseError, "invert list must be bracketed");
    ++i;
    skip_ws(descriptor, i);
    if (i < descriptor.size() && descriptor[i] == ']') {
      // empty list
    } else {
      while (true) {
        skip_ws(descriptor, i);
        Vec g;
        if (i < descriptor.size() && descriptor[i] == '(') {
          ++i;
          while (true) {
            g.push_back(parse_int(descriptor, i));
            skip_ws(descriptor, i);
            if (i < descriptor.size() && descriptor[i] == ',') {
              ++i;
              continue;
            }
            break;
          }
          skip_ws(descriptor, i);
          if (i >= descriptor.size() || descriptor[i] != ')')
            throw Error(Err::ParseError, "unterminated tuple generator");
          ++i;
        } else {
          g.push_back(parse_int(descriptor, i));
        }
        gens.push_back(g);
        skip_ws(descriptor, i);
        if (i < descriptor.size() && descriptor[i] == ',') {
          ++i;
          continue;
        }
        break;
      }
      skip_ws(descriptor, i);
      if (i >= descriptor.size() || descriptor[i] != ']')
        throw Error(Err::ParseError, "unterminated invert list");
    }
  }
  try {
    return make_ring(f, gens);
  } catch (const Error& e) {
    if (e.code == Err::NotMonic || e.code == Err::NotIrreducible) throw;
    throw Error(Err::ParseError, std::string("bad ring descriptor: ") + e.what());
  }
}

// ---- elements ----------------------------------------------------------------

static void check_same_ring(const RingElement& a, const RingElement& b) {
  if (a.R != b.R) throw Error(Err::Internal, "elements from different rings");
}

bool RingElement::is_zero() const {
  for (auto& c : num)
    if (c != 0) return false;
  return true;
}

RingElement elem_zero(const LocalizedRing& R) {
  return {&R, Vec(R.k(), 0), std::vector<unsigned>(R.s.size(), 0)};
}

RingElement elem_one(const LocalizedRing& R) {
  RingElement e = elem_zero(R);
  e.num[0] = 1;
  return e;
}

RingElement elem_int(const LocalizedRing& R, const Z& n) {
  RingElement e = elem_zero(R);
  e.num[0] = n;
  return e;
}

RingElement elem_vec(const LocalizedRing& R, Vec v) {
  v.resize(R.k(), 0);
  return normalize({&R, v, std::vector<unsigned>(R.s.size(), 0)});
}

// exact division of a basis vector by s_i, if integral
static Z z_pow(const Z& b, unsigned long e) {
  Z r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

static IMat imat_mul(int k, const IMat& x, const IMat& y) {
  IMat r((size_t)k, Vec((size_t)k, Z(0)));
  for (int i = 0; i < k; ++i)
    for (int m = 0; m < k; ++m) {
      if (x[i][m] == 0) continue;
      for (int j = 0; j < k; ++j) r[i][j] += x[i][m] * y[m][j];
    }
  return r;
}

static IMat imat_pow(int k, IMat m, unsigned long e) {
  IMat r((size_t)k, Vec((size_t)k, Z(0)));
  for (int i = 0; i < k; ++i) r[i][i] = 1;
  while (e > 0) {
    if (e & 1) r = imat_mul(k, r, m);
    e >>= 1;
    if (e > 0) m = imat_mul(k, m, m);
  }
  return r;
}

// v / s_i^c in B via the adjugate power; false when not exact
static bool div_by_gen_pow(const LocalizedRing& R, const Vec& v, size_t i,
                           unsigned c, Vec* out) {
  int k = R.k();
  IMat m = c == 1 ? R.s_adj[i] : imat_pow(k, R.s_adj[i], c);
  Z dp = c == 1 ? R.s_det[i] : z_pow(R.s_det[i], c);
  Vec w(k, 0);
  for (int r = 0; r < k; ++r) {
    if (v[r] == 0) continue;
    for (int col = 0; col < k; ++col) w[col] += v[r] * m[r][col];
  }
  for (int col = 0; col < k; ++col) {
    if (w[col] % dp != 0) return false;
    w[col] /= dp;
  }
  *out = w;
  return true;
}

static bool div_by_gen(const LocalizedRing& R, const Vec& v, size_t i, Vec* out) {
  return div_by_gen_pow(R, v, i, 1, out);
}

RingElement normalize(RingElement a) {
  if (a.is_zero()) {
    std::fill(a.den.begin(), a.den.end(), 0u);
    return a;
  }
  for (size_t i = 0; i < a.den.size(); ++i) {
    // strip in halving chunks; one power at a time is quadratic in the
    // exponent once the chain constructions stack up den entries
    while (a.den[i] > 0) {
      unsigned c = a.den[i];
      Vec w;
      while (c > 0 && !div_by_gen_pow(*a.R, a.num, i, c, &w)) c /= 2;
      if (c == 0) break;
      a.num = std::move(w);
      a.den[i] -= c;
    }
  }
  return a;
}

// product of s_i^{e_i} in B
static Vec s_power(const LocalizedRing& R, const std::vector<unsigned>& e) {
  Vec r(R.k(), 0);
  r[0] = 1;
  for (size_t i = 0; i < e.size(); ++i)
    for (unsigned j = 0; j < e[i]; ++j) r = mul_basis(R.B, r, R.s[i]);
  return r;
}

RingElement RingElement::operator+(const RingElement& o) const {
  check_same_ring(*this, o);
  std::vector<unsigned> d(den.size());
  std::vector<unsigned> ea(den.size()), eb(den.size());
  for (size_t i = 0; i < den.size(); ++i) {
    d[i] = std::max(den[i], o.den[i]);
    ea[i] = d[i] - den[i];
    eb[i] = d[i] - o.den[i];
  }
  Vec na = mul_basis(R->B, num, s_power(*R, ea));
  Vec nb = mul_basis(R->B, o.num, s_power(*R, eb));
  for (int i = 0; i < R->k(); ++i) na[i] += nb[i];
  return normalize({R, na, d});
}

RingElement RingElement::operator-() const {
  RingElement r = *this;
  for (auto& c : r.num) c = -c;
  return r;
}

RingElement RingElement::operator-(const RingElement& o) const { return *this + (-o); }

RingElement RingElement::operator*(const RingElement& o) const {
  check_same_ring(*this, o);
  std::vector<unsigned> d(den.size());
  for (size_t i = 0; i < den.size(); ++i) d[i] = den[i] + o.den[i];
  return normalize({R, mul_basis(R->B, num, o.num), d});
}

bool RingElement::operator==(const RingElement& o) const {
  check_same_ring(*this, o);
  Vec lhs = mul_basis(R->B, num, s_power(*R, o.den));
  Vec rhs = mul_basis(R->B, o.num, s_power(*R, den));
  return lhs == rhs;
}

Q norm(const RingElement& a) {
  Q n(norm_basis(a.R->B, a.num));
  for (size_t i = 0; i < a.den.size(); ++i)
    if (a.den[i] > 0) n /= Q(z_pow(a.R->s_det[i], a.den[i]));
  return n;
}

std::vector<Q> rational_coords(const RingElement& a) {
  int k = a.R->k();
  std::vector<Q> v(k);
  for (int i = 0; i < k; ++i) v[i] = Q(a.num[i]);
  for (size_t g = 0; g < a.den.size(); ++g) {
    if (a.den[g] == 0) continue;
    // one pass with adj(s_g)^e / det(s_g)^e; the per-power loop is quadratic
    // in the exponent and chokes on the exponent-chain element sizes
    IMat m = imat_pow(k, a.R->s_adj[g], a.den[g]);
    Q dp(z_pow(a.R->s_det[g], a.den[g]));
    std::vector<Q> w(k, Q(0));
    for (int r = 0; r < k; ++r) {
      if (v[r] == 0) continue;
      for (int c = 0; c < k; ++c) w[c] += v[r] * Q(m[r][c]);
    }
    for (int c = 0; c < k; ++c) {
      w[c] /= dp;
      w[c].canonicalize();
    }
    v = w;
  }
  return v;
}

static std::vector<Q> mul_rational(const OrderRing& B, const std::vector<Q>& a,
                                   const std::vector<Q>& b);

std::optional<RingElement> try_from_rational(const LocalizedRing& R,
                                             const std::vector<Q>& c) {
  int k = R.k();
  Z d = 1;
  for (auto& x : c) d = lcm(d, x.get_den());
  if (d == 1) {
    Vec v(k);
    for (int i = 0; i < k; ++i) v[i] = c[i].get_num();
    return elem_vec(R, v);
  }
  if (R.s.empty()) return std::nullopt;
  // z = d*c in B/dB; find least m with s^m * z = 0, s = product of all gens
  Vec s(k, 0);
  s[0] = 1;
  for (auto& g : R.s) s = mul_basis(R.B, s, g);
  Vec z(k);
  for (int i = 0; i < k; ++i) {
    Q t = c[i] * Q(d);
    z[i] = fdiv_r(t.get_num(), d);  // t is integral
  }
  long mstar = (long)k * (long)(mpz_sizeinbase(d.get_mpz_t(), 2) + 1);
  auto all_zero = [&](const Vec& v) {
    for (auto& x : v)
      if (x != 0) return false;
    return true;
  };
  auto red = [&](Vec v) {
    for (auto& x : v) x = fdiv_r(x, d);
    return v;
  };
  auto killed = [&](long e) {  // s^e * z = 0 in B/dB
    Vec acc = z, base = red(s);
    while (e > 0) {
      if (e & 1) acc = red(mul_basis(R.B, acc, base));
      e >>= 1;
      if (e > 0) base = red(mul_basis(R.B, base, base));
    }
    return all_zero(acc);
  };
  // the predicate is monotone in e; bisect for the least such exponent
  long m = 0;
  if (!all_zero(z)) {
    if (!killed(mstar)) return std::nullopt;
    long lo = 0, hi = mstar;
    while (hi - lo > 1) {
      long mid = lo + (hi - lo) / 2;
      (killed(mid) ? hi : lo) = mid;
    }
    m = hi;
  }
  // exact: s^m * c is integral for the minimal such m
  std::vector<Q> v = c;
  if (m > 0) {
    Vec sp(k, Z(0));
    sp[0] = 1;
    Vec base = s;
    long e = m;
    while (e > 0) {
      if (e & 1) sp = mul_basis(R.B, sp, base);
      e >>= 1;
      if (e > 0) base = mul_basis(R.B, base, base);
    }
    std::vector<Q> sq(k);
    for (int i = 0; i < k; ++i) sq[i] = Q(sp[i]);
    v = mul_rational(R.B, v, sq);
  }
  Vec num(k);
  for (int i = 0; i < k; ++i) {
    if (v[i].get_den() != 1) return std::nullopt;
    num[i] = v[i].get_num();
  }
  std::vector<unsigned> den(R.s.size(), (unsigned)m);
  return normalize({&R, num, den});
}

// ---- division, units ----------------------------------------------------------

static std::vector<Q> mul_rational(const OrderRing& B, const std::vector<Q>& a,
                                   const std::vector<Q>& b) {
  int k = B.k;
  std::vector<Q> conv(2 * k - 1, Q(0));
  for (int i = 0; i < k; ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j < k; ++j) conv[i + j] += a[i] * b[j];
  }
  std::vector<Q> r(conv.begin(), conv.begin() + k);
  for (int i = k; i < 2 * k - 1; ++i) {
    if (conv[i] == 0) continue;
    for (int j = 0; j < k; ++j) r[j] += conv[i] * Q(B.theta_pow[i - k][j]);
  }
  for (auto& x : r) x.canonicalize();
  return r;
}

// coords of 1/b in K for a nonzero rational vector b
static std::vector<Q> invert_rational(const OrderRing& B, const std::vector<Q>& b) {
  int k = B.k;
  Z d = 1;
  for (auto& x : b) d = lcm(d, x.get_den());
  Vec w(k);
  for (int i = 0; i < k; ++i) {
    Q t = b[i] * Q(d);
    w[i] = t.get_num();
  }
  IMat m = mult_matrix(B, w);
  Z det = det_int(m);
  if (det == 0) throw Error(Err::ZeroModulus, "division by zero");
  IMat adj = adjugate(m);
  // x * M_w = e0  =>  x = e0 * M_w^{-1} = row 0 of adj / det; then scale by d
  std::vector<Q> inv(k);
  for (int c = 0; c < k; ++c) {
    inv[c] = Q(adj[0][c] * d) / Q(det);
    inv[c].canonicalize();
  }
  return inv;
}

RingElement divide_exact(const RingElement& a, const RingElement& b) {
  check_same_ring(a, b);
  if (b.is_zero()) throw Error(Err::ZeroModulus, "division by zero element");
  if (a.is_zero()) return elem_zero(*a.R);
  std::vector<Q> q =
      mul_rational(a.R->B, rational_coords(a), invert_rational(a.R->B, rational_coords(b)));
  auto r = try_from_rational(*a.R, q);
  if (!r) throw Error(Err::NotDivisible, "quotient is not in the ring");
  return *r;
}

bool divides(const RingElement& b, const RingElement& a) {
  if (b.is_zero()) return a.is_zero();
  if (a.is_zero()) return true;
  std::vector<Q> q =
      mul_rational(a.R->B, rational_coords(a), invert_rational(a.R->B, rational_coords(b)));
  return try_from_rational(*a.R, q).has_value();
}

bool is_unit(const RingElement& a) {
  if (a.is_zero()) return false;
  std::vector<Q> inv = invert_rational(a.R->B, rational_coords(a));
  return try_from_rational(*a.R, inv).has_value();
}

RingElement unit_inverse(const RingElement& a) {
  if (a.is_zero()) throw Error(Err::NotAUnit, "zero is not a unit");
  std::vector<Q> inv = invert_rational(a.R->B, rational_coords(a));
  auto r = try_from_rational(*a.R, inv);
  if (!r) throw Error(Err::NotAUnit, "element has no inverse in the ring");
  return *r;
}

RingElement pow(const RingElement& a, const Z& e) {
  if (e < 0) return pow(unit_inverse(a), -e);
  RingElement base = a;
  RingElement r = elem_one(*a.R);
  Z n = e;
  while (n > 0) {
    if (fdiv_r(n, 2) == 1) r = r * base;
    n = fdiv_q(n, 2);
    if (n > 0) base = base * base;
  }
  return r;
}

// ---- element text form ---------------------------------------------------------

std::string elem_str(const RingElement& a) {
  std::ostringstream o;
  o << "num=[";
  for (int i = 0; i < a.R->k(); ++i) {
    if (i) o << ",";
    o << a.num[i].get_str();
  }
  o << "]; den={";
  bool first = true;
  for (size_t i = 0; i < a.den.size(); ++i) {
    if (a.den[i] == 0) continue;
    if (!first) o << ",";
    o << i << ":" << a.den[i];
    first = false;
  }
  o << "}";
  return o.str();
}

RingElement parse_elem(const LocalizedRing& R, const std::string& text) {
  size_t i = 0;
  skip_ws(text, i);
  // integer shorthand
  if (i < text.size() && (std::isdigit((unsigned char)text[i]) || text[i] == '-' ||
                          text[i] == '+')) {
    Z n = parse_int(text, i);
    skip_ws(text, i);
    if (i == text.size()) return elem_int(R, n);
    throw Error(Err::ParseError, "trailing characters in element '" + text + "'");
  }
  auto npos = text.find("num=");
  if (npos == std::string::npos)
    throw Error(Err::ParseError, "element needs num=[...]: '" + text + "'");
  i = npos + 4;
  skip_ws(text, i);
  if (i >= text.size() || text[i] != '[') throw Error(Err::ParseError, "num wants [");
  ++i;
  Vec v;
  skip_ws(text, i);
  if (i < text.size() && text[i] == ']') {
    ++i;
  } else {
    while (true) {
      v.push_back(parse_int(text, i));
      skip_ws(text, i);
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    if (i >= text.size() || text[i] != ']') throw Error(Err::ParseError, "num wants ]");
    ++i;
  }
  if ((int)v.size() > R.k())
    throw Error(Err::ParseError, "too many coordinates for this ring");
  v.resize(R.k(), 0);
  std::vector<unsigned> den(R.s.size(), 0);
  auto dpos = text.find("den=", i);
  if (dpos != std::string::npos) {
    i = dpos + 4;
    skip_ws(text, i);
    if (i >= text.size() || text[i] != '{') throw Error(Err::ParseError, "den wants {");
    ++i;
    skip_ws(text, i);
    if (i < text.size() && text[i] == '}') {
      ++i;
    } else {
      while (true) {
        Z idx = parse_int(text, i);
        skip_ws(text, i);
        if (i >= text.size() || text[i] != ':') throw Error(Err::ParseError, "den wants :");
        ++i;
        Z e = parse_int(text, i);
        if (idx < 0 || idx >= (long)R.s.size() || e < 0)
          throw Error(Err::ParseError, "bad denominator index/exponent");
        den[idx.get_ui()] = (unsigned)e.get_ui();
        skip_ws(text, i);
        if (i < text.size() && text[i] == ',') {
          ++i;
          continue;
        }
        break;
      }
      if (i >= text.size() || text[i] != '}') throw Error(Err::ParseError, "den wants }");
      ++i;
    }
  }
  return normalize({&R, v, den});
}

// ---- finite quotients -----------------------------------------------------------

Vec FiniteQuotient::reduce(Vec v) const { return lattice_reduce(H, std::move(v)); }

Vec FiniteQuotient::one() const {
  Vec v = zero();
  v[0] = 1;
  return reduce(std::move(v));
}

Vec FiniteQuotient::add(const Vec& a, const Vec& b) const {
  Vec v = a;
  for (size_t i = 0; i < v.size(); ++i) v[i] += b[i];
  return reduce(std::move(v));
}

Vec FiniteQuotient::sub(const Vec& a, const Vec& b) const {
  Vec v = a;
  for (size_t i = 0; i < v.size(); ++i) v[i] -= b[i];
  return reduce(std::move(v));
}

Vec FiniteQuotient::neg(const Vec& a) const {
  Vec v = a;
  for (auto& x : v) x = -x;
  return reduce(std::move(v));
}

Vec FiniteQuotient::mul(const Vec& a, const Vec& b) const {
  return reduce(mul_basis(R->B, a, b));
}

bool FiniteQuotient::is_zero(const Vec& a) const {
  for (auto& x : a)
    if (x != 0) return false;
  return true;
}

std::optional<Vec> FiniteQuotient::inverse(const Vec& a) const {
  IMat rows = mult_matrix(R->B, a);
  for (auto& row : H) rows.push_back(row);
  Vec e0(R->k(), 0);
  e0[0] = 1;
  Vec coeffs;
  if (!solve_in_rowspan(rows, e0, &coeffs)) return std::nullopt;
  Vec x(coeffs.begin(), coeffs.begin() + R->k());
  return reduce(std::move(x));
}

Vec FiniteQuotient::pow(Vec b, Z e) const {
  if (e < 0) {
    auto inv = inverse(b);
    if (!inv) throw Error(Err::NotAUnitModulo, "negative power of a non-unit residue");
    return pow(*inv, -e);
  }
  Vec r = one();
  b = reduce(std::move(b));
  while (e > 0) {
    if (fdiv_r(e, 2) == 1) r = mul(r, b);
    e = fdiv_q(e, 2);
    if (e > 0) b = mul(b, b);
  }
  return r;
}

Vec FiniteQuotient::from_element(const RingElement& a) const {
  Vec v = reduce(a.num);
  for (size_t i = 0; i < a.den.size(); ++i)
    if (a.den[i] > 0) v = mul(v, pow(s_inv[i], Z(a.den[i])));
  return v;
}

RingElement FiniteQuotient::lift(const Vec& r) const { return elem_vec(*R, r); }

std::vector<Vec> FiniteQuotient::residues(const Z& budget) const {
  if (size > budget)
    throw Error(Err::BudgetExceeded, "quotient of size " + size.get_str());
  std::vector<Vec> out;
  int k = R->k();
  Vec counter(k, 0);
  while (true) {
    out.push_back(counter);
    int i = 0;
    while (i < k) {
      counter[i] += 1;
      if (counter[i] < H[i][i]) break;
      counter[i] = 0;
      ++i;
    }
    if (i == k) break;
  }
  return out;
}

FiniteQuotient finite_quotient(const LocalizedRing& A, const RingElement& q) {
  if (q.is_zero()) throw Error(Err::ZeroModulus, "finite quotient needs q != 0");
  FiniteQuotient fq;
  fq.R = &A;
  fq.q = q;
  fq.qt = q.num;
  IMat L = hnf(mult_matrix(A.B, fq.qt));
  // localize: saturate with respect to every inverted generator; double the
  // multiplier while it still moves the lattice so deep powers strip in
  // logarithmically many preimage passes
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& g : A.s) {
      Vec m = g;
      while (true) {
        IMat L2 = lattice_preimage(mult_matrix(A.B, m), L);
        if (L2 == L) break;
        L = std::move(L2);
        changed = true;
        m = mul_basis(A.B, m, m);
      }
    }
  }
  fq.H = L;
  fq.size = det_upper(L);
  for (auto& g : A.s) {
    IMat rows = mult_matrix(A.B, g);
    for (auto& row : fq.H) rows.push_back(row);
    Vec e0(A.k(), 0);
    e0[0] = 1;
    Vec coeffs;
    if (!solve_in_rowspan(rows, e0, &coeffs))
      throw Error(Err::Internal, "inverted generator not invertible after localization");
    Vec x(coeffs.begin(), coeffs.begin() + A.k());
    fq.s_inv.push_back(fq.reduce(std::move(x)));
  }
  return fq;
}

// ---- unit groups ------------------------------------------------------------------

Z residue_order(const FiniteQuotient& fq, const Vec& r) {
  if (!fq.is_unit_residue(r)) throw Error(Err::NotAUnitModulo, "residue is not a unit");
  Vec one = fq.one();
  Vec v = fq.reduce(r);
  Z m = 1;
  while (v != one) {
    v = fq.mul(v, r);
    ++m;
  }
  return m;
}

static std::string vec_key(const Vec& v) {
  std::string s;
  for (auto& x : v) {
    s += x.get_str();
    s += ',';
  }
  return s;
}

UnitGroupData unit_group(const FiniteQuotient& fq, const Z& budget) {
  UnitGroupData u;
  u.quotient = &fq;
  u.exponent = 1;
  Vec one = fq.one();
  for (auto& r : fq.residues(budget)) {
    if (!fq.is_unit_residue(r)) continue;
    u.units.push_back(r);
    if (fq.pow(r, u.exponent) != one) u.exponent = lcm(u.exponent, residue_order(fq, r));
  }
  // greedy generators; for abelian groups <H, r> = H * <r>
  std::set<std::string> span{vec_key(one)};
  std::vector<Vec> span_list{one};
  for (auto& r : u.units) {
    if (span.count(vec_key(r))) continue;
    u.generators.push_back(r);
    Z d = residue_order(fq, r);
    std::vector<Vec> host = span_list;
    Vec rp = one;
    for (Z j = 1; j < d; ++j) {
      rp = fq.mul(rp, r);
      for (auto& x : host) {
        Vec y = fq.mul(x, rp);
        if (span.insert(vec_key(y)).second) span_list.push_back(y);
      }
    }
  }
  return u;
}

// fast path for k = 1 with small modulus
static Z exponent_u64(uint64_t n) {
  auto mulmod = [n](uint64_t a, uint64_t b) {
    return (uint64_t)((unsigned __int128)a * b % n);
  };
  auto powmod = [&](uint64_t b, uint64_t e) {
    uint64_t r = 1 % n;
    while (e) {
      if (e & 1) r = mulmod(r, b);
      b = mulmod(b, b);
      e >>= 1;
    }
    return r;
  };
  uint64_t L = 1;
  for (uint64_t r = 1; r < n; ++r) {
    if (std::gcd(r, n) != 1) continue;
    if (powmod(r, L) == 1 % n) continue;
    uint64_t v = r % n, m = 1;
    while (v != 1 % n) {
      v = mulmod(v, r);
      ++m;
    }
    L = (uint64_t)(L / std::gcd(L, m) * m);
  }
  return Z((unsigned long)L);
}

Z quotient_exponent(const FiniteQuotient& fq, const Z& budget) {
  if (fq.size > budget)
    throw Error(Err::BudgetExceeded, "unit exponent of quotient of size " + fq.size.get_str());
  if (fq.size == 1) return 1;
  if (fq.R->k() == 1 && fq.H[0][0].fits_ulong_p())
    return exponent_u64(fq.H[0][0].get_ui());
  Z L = 1;
  Vec one = fq.one();
  for (auto& r : fq.residues(budget)) {
    if (!fq.is_unit_residue(r)) continue;
    if (fq.pow(r, L) == one) continue;
    L = lcm(L, residue_order(fq, r));
  }
  return L;
}

Z element_order_mod(const RingElement& a, const RingElement& b) {
  if (b.is_zero()) throw Error(Err::ZeroModulus, "element_order_mod with b = 0");
  FiniteQuotient fq = finite_quotient(*a.R, b);
  Vec r = fq.from_element(a);
  if (!fq.is_unit_residue(r)) throw Error(Err::NotAUnitModulo, "a is not a unit mod bA");
  return residue_order(fq, r);
}

RingElement crt_pair(const RingElement& r1, const RingElement& m1,
                     const RingElement& r2, const RingElement& m2) {
  FiniteQuotient fq = finite_quotient(*r1.R, m2);
  auto inv = fq.inverse(fq.from_element(m1));
  if (!inv) throw Error(Err::NotCoprime, "crt moduli are not coprime");
  Vec t = fq.mul(*inv, fq.from_element(r2 - r1));
  return normalize(r1 + m1 * fq.lift(t));
}

// ---- searches ----------------------------------------------------------------------

bool is_root_of_unity(const RingElement& u) {
  if (u.is_zero()) return false;
  int k = u.R->k();
  Z m = 1;
  for (long n = 1; n <= 4L * k * k + 4; ++n) {
    // phi(n) <= k ?
    Z phi = euler_phi(Z(n));
    if (phi <= k) m = lcm(m, Z(n));
  }
  return pow(u, m) == elem_one(*u.R);
}

RingElement fundamental_unit_search(const LocalizedRing& A) {
  for (auto& g : A.s) {
    RingElement u = elem_vec(A, g);
    if (is_unit(u) && !is_root_of_unity(u)) return u;
  }
  if (A.k() == 2 && A.B.disc > 0) {
    // Pell-style search: N(x + y*theta) = x^2 - f1*x*y + f0*y^2 = +-1
    const Z& f1 = A.B.f[1];
    for (long y = 1; y <= 100000; ++y) {
      for (int eps : {1, -1}) {
        Z d = A.B.disc * y * y + 4 * eps;
        Z root;
        if (!is_square(d, &root)) continue;
        for (int sgn : {1, -1}) {
          Z twox = f1 * y + sgn * root;
          if (fdiv_r(twox, 2) != 0) continue;
          Z x = twox / 2;
          RingElement u = elem_vec(A, {x, Z(y)});
          if (is_unit(u) && !is_root_of_unity(u)) return u;
        }
      }
    }
  }
  throw Error(Err::NoInfiniteUnits, "no unit of infinite order found");
}

std::vector<RingElement> unit_monoid(const LocalizedRing& A, int radius) {
  std::vector<RingElement> base;
  // small-box units (roots of unity and similar)
  {
    int k = A.k();
    Vec v(k, 0);
    std::function<void(int)> rec = [&](int pos) {
      if (pos == k) {
        RingElement e = elem_vec(A, v);
        if (!e.is_zero() && is_unit(e)) base.push_back(e);
        return;
      }
      for (long c = -1; c <= 1; ++c) {
        v[pos] = c;
        rec(pos + 1);
      }
    };
    rec(0);
  }
  std::optional<RingElement> fund;
  try {
    fund = fundamental_unit_search(A);
  } catch (const Error&) {
  }
  std::vector<RingElement> out;
  std::set<std::string> seen;
  auto push = [&](const RingElement& u) {
    RingElement n = normalize(u);
    std::string key = elem_str(n);
    if (seen.insert(key).second) out.push_back(n);
  };
  // monomials in the inverted generators with L1 exponent budget
  std::vector<RingElement> monos;
  size_t g = A.s.size();
  std::function<void(size_t, int, const RingElement&)> rec =
      [&](size_t pos, int left, const RingElement& acc) {
        if (pos == g) {
          monos.push_back(acc);
          return;
        }
        for (long ei = -left; ei <= left; ++ei)
          rec(pos + 1, left - (int)std::abs(ei),
              acc * pow(elem_vec(A, A.s[pos]), Z(ei)));
      };
  rec(0, radius, elem_one(A));
  int jr = fund ? radius : 0;
  for (auto& m : monos) {
    for (int j = -jr; j <= jr; ++j) {
      RingElement u = fund ? m * pow(*fund, Z(j)) : m;
      for (auto& b : base) push(b * u);
    }
  }
  return out;
}

RingElement prime_in_progression(const RingElement& a, const RingElement& b,
                                 const Z& budget) {
  const LocalizedRing& A = *a.R;
  RingElement an = normalize(a), bn = normalize(b);
  for (auto e : an.den)
    if (e) throw Error(Err::ImproperIdeal, "prime_in_progression wants order elements");
  for (auto e : bn.den)
    if (e) throw Error(Err::ImproperIdeal, "prime_in_progression wants order elements");
  if (an.is_zero() || bn.is_zero())
    throw Error(Err::ImproperIdeal, "prime_in_progression wants nonzero a, b");
  int k = A.k();
  Z spent = 0;
  // f irreducible mod p <=> the order quotient B/pB is the field F_{p^2}
  auto f_irred_mod = [&](const Z& p) {
    if (p == 2) return fdiv_r(A.B.f[1], 2) == 1 && fdiv_r(A.B.f[0], 2) == 1;
    Z dm = fdiv_r(A.B.disc, p);
    return dm != 0 && mpz_legendre(dm.get_mpz_t(), p.get_mpz_t()) == -1;
  };
  auto try_h = [&](const Vec& t) -> std::optional<RingElement> {
    if (++spent > budget)
      throw Error(Err::SearchExhausted,
                  "prime_in_progression budget " + budget.get_str());
    RingElement h = an + elem_vec(A, t) * bn;
    if (h.is_zero()) return std::nullopt;
    Z nb = norm_basis(A.B, h.num);
    if (nb <= 1) return std::nullopt;  // want positive norm; 1 = unit of B
    FiniteQuotient fq = finite_quotient(A, h);
    const Z& n = fq.size;  // |O/hO| after inverting S
    if (n == 1) return std::nullopt;
    if (probably_prime(n)) return h;
    if (k == 2) {
      Z p;
      if (is_square(n, &p) && probably_prime(p) && fq.H[0][0] == p &&
          fq.H[1][1] == p && fq.H[0][1] == 0 && f_irred_mod(p))
        return h;  // h is p times a unit and p stays prime in the order
    }
    return std::nullopt;
  };
  // shells of linf-radius r; inside a shell: tuples grouped by the first
  // position attaining |c| = r, lexicographic within each group
  for (long r = 0;; ++r) {
    std::optional<RingElement> got;
    if (r == 0) {
      got = try_h(Vec(k, 0));
      if (got) return *got;
      continue;
    }
    Vec t(k, 0);
    for (int j = 0; j < k && !got; ++j) {
      std::function<std::optional<RingElement>(int)> rec =
          [&](int pos) -> std::optional<RingElement> {
        if (pos == k) return try_h(t);
        long lo = pos < j ? -(r - 1) : -r;
        long hi = pos < j ? r - 1 : r;
        long step = pos == j ? 2 * r : 1;  // position j takes only -r and r
        for (long c = lo; c <= hi; c += step) {
          t[pos] = c;
          auto res = rec(pos + 1);
          if (res) return res;
        }
        return std::nullopt;
      };
      got = rec(0);
      if (got) return *got;
      // reset the prefix for the next group
      std::fill(t.begin(), t.end(), Z(0));
    }
  }
}

RingElement coprime_shift(const LocalizedRing& A, const RingElement& a,
                          const RingElement& b) {
  if (b.is_zero()) throw Error(Err::ZeroModulus, "coprime_shift with b = 0");
  FiniteQuotient fq = finite_quotient(A, b);
  if (!fq.is_unit_residue(fq.from_element(a)))
    throw Error(Err::NotCoprime, "aA + bA is not the unit ideal");
  RingElement a1 = fq.lift(fq.from_element(a));  // B-lift with a1 = a mod bA
  Vec bt = normalize(b).num;                     // numerator generates b over A
  Z g2 = A.B.gamma * A.B.gamma;
  Vec btg2 = bt;
  for (auto& c : btg2) c *= g2;
  // enumerate t in a residue box for B/gamma^2 B
  int k = A.k();
  Vec t(k, 0);
  IMat target_rows_base = mult_matrix(A.B, btg2);
  std::function<std::optional<RingElement>(int)> rec =
      [&](int pos) -> std::optional<RingElement> {
    if (pos == k) {
      Vec cand = a1.num;
      Vec tb = mul_basis(A.B, t, bt);
      for (int i = 0; i < k; ++i) cand[i] += tb[i];
      IMat rows = mult_matrix(A.B, cand);
      for (auto& row : target_rows_base) rows.push_back(row);
      IMat h = hnf(rows);
      if ((int)h.size() == k && det_upper(h) == 1) return elem_vec(A, cand);
      return std::nullopt;
    }
    for (Z c = 0; c < g2; ++c) {
      t[pos] = c;
      auto got = rec(pos + 1);
      if (got) return got;
    }
    return std::nullopt;
  };
  auto got = rec(0);
  if (!got) throw Error(Err::NotCoprime, "no coprime shift exists in B");
  return *got;
}

IdealDescription ideal_from_generators(const LocalizedRing& A,
                                       std::vector<RingElement> gens) {
  IdealDescription out;
  std::vector<RingElement> nz;
  for (auto& g : gens) {
    RingElement n = normalize(g);
    if (!n.is_zero()) nz.push_back(elem_vec(A, n.num));  // denominators are units
  }
  out.gens = nz;
  if (nz.empty()) {
    out.principal = elem_zero(A);
    return out;
  }
  // rounding Euclid; sound in general via the final divisibility check
  auto round_div = [&](const RingElement& x, const RingElement& y) {
    std::vector<Q> q = mul_rational(A.B, rational_coords(x),
                                    invert_rational(A.B, rational_coords(y)));
    Vec r(A.k());
    for (int i = 0; i < A.k(); ++i) {
      Z num = q[i].get_num(), den = q[i].get_den();
      r[i] = fdiv_q(2 * num + den, 2 * den);  // nearest integer
    }
    return elem_vec(A, r);
  };
  RingElement g = nz[0];
  for (size_t i = 1; i < nz.size(); ++i) {
    RingElement x = nz[i];
    int guard = 0;
    while (!x.is_zero() && !g.is_zero()) {
      if (++guard > 64) break;
      RingElement r = g - x * round_div(g, x);
      g = x;
      x = r;
    }
    if (!x.is_zero()) {
      // no convergence; keep generator list only
      out.principal = std::nullopt;
      return out;
    }
    g = normalize(g);
  }
  for (auto& x : nz)
    if (!divides(g, x)) {
      out.principal = std::nullopt;
      return out;
    }
  // canonical sign
  Vec v = g.num;
  int last = -1;
  for (int i = 0; i < A.k(); ++i)
    if (v[i] != 0) last = i;
  if (last >= 0 && v[last] < 0)
    for (auto& c : v) c = -c;
  out.principal = elem_vec(A, v);
  return out;
}

}  // namespace elgen
