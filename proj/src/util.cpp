#include "elgen/util.hpp"

#include <algorithm>
#include <cstdlib>

namespace elgen {

const char* err_name(Err e) {
  switch (e) {
    case Err::NotIrreducible: return "NotIrreducible";
    case Err::NotMonic: return "NotMonic";
    case Err::ZeroModulus: return "ZeroModulus";
    case Err::NotAUnitModulo: return "NotAUnitModulo";
    case Err::NoInfiniteUnits: return "NoInfiniteUnits";
    case Err::SearchExhausted: return "SearchExhausted";
    case Err::NotCoprime: return "NotCoprime";
    case Err::NotDeterminantOne: return "NotDeterminantOne";
    case Err::NotInW: return "NotInW";
    case Err::NotAField: return "NotAField";
    case Err::NotInVas: return "NotInVas";
    case Err::BadIdealPair: return "BadIdealPair";
    case Err::NotAUnit: return "NotAUnit";
    case Err::NotCongruent: return "NotCongruent";
    case Err::NotDivisible: return "NotDivisible";
    case Err::NotUnimodular: return "NotUnimodular";
    case Err::ImproperIdeal: return "ImproperIdeal";
    case Err::DimensionTooSmall: return "DimensionTooSmall";
    case Err::LevelTooLow: return "LevelTooLow";
    case Err::InvalidWitness: return "InvalidWitness";
    case Err::BudgetExceeded: return "BudgetExceeded";
    case Err::DegenerateEntry: return "DegenerateEntry";
    case Err::ParseError: return "ParseError";
    case Err::Internal: return "Internal";
  }
  return "Unknown";
}

Z factorial(unsigned n) {
  Z r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

Z isqrt_floor(const Z& n) {
  Z r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

bool is_square(const Z& n, Z* root) {
  if (n < 0) return false;
  Z r = isqrt_floor(n);
  if (r * r == n) {
    if (root) *root = r;
    return true;
  }
  return false;
}

bool probably_prime(const Z& n) {
  Z m = abs(n);
  return mpz_probab_prime_p(m.get_mpz_t(), 40) > 0;
}

Z gcd(const Z& a, const Z& b) {
  Z r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

Z lcm(const Z& a, const Z& b) {
  Z r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

Z ext_gcd(const Z& a, const Z& b, Z& x, Z& y) {
  Z g;
  mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a.get_mpz_t(),
             b.get_mpz_t());
  return g;
}

std::vector<std::pair<Z, int>> factorize(Z n) {
  if (n == 0) throw Error(Err::ZeroModulus, "factorize(0)");
  n = abs(n);
  std::vector<std::pair<Z, int>> out;
  auto strip = [&](const Z& p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(p, e);
  };
  strip(2);
  strip(3);
  Z p = 5;
  while (p * p <= n) {
    strip(p);
    strip(p + 2);
    p += 6;
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

Z euler_phi(const Z& n) {
  Z r = 1;
  for (auto& [p, e] : factorize(n)) {
    Z pe = 1;
    for (int i = 1; i < e; ++i) pe *= p;
    r *= pe * (p - 1);
  }
  return r;
}

Z cdiv_r(const Z& a, const Z& b) {
  Z r = fdiv_r(a, abs(b));
  if (2 * r > abs(b)) r -= abs(b);
  return r;
}

// ---- lattices ---------------------------------------------------------------

static void row_sub(Vec& a, const Vec& b, const Z& q) {
  for (size_t i = 0; i < a.size(); ++i) a[i] -= q * b[i];
}

static void row_neg(Vec& a) {
  for (auto& x : a) x = -x;
}

IMat hnf(IMat rows, IMat* transform) {
  size_t nr = rows.size();
  size_t nc = nr ? rows[0].size() : 0;
  IMat u;
  if (transform) {
    u.assign(nr, Vec(nr, 0));
    for (size_t i = 0; i < nr; ++i) u[i][i] = 1;
  }
  size_t r = 0;
  for (size_t c = 0; c < nc && r < nr; ++c) {
    // eliminate below r with one unimodular 2x2 combine per row; entry-wise
    // floored division is the schoolbook Euclid and goes quadratic on the
    // wide entries the witness chains produce
    size_t piv = nr;
    for (size_t i = r; i < nr; ++i)
      if (rows[i][c] != 0) {
        piv = i;
        break;
      }
    if (piv == nr) continue;  // column is zero below r
    std::swap(rows[piv], rows[r]);
    if (transform) std::swap(u[piv], u[r]);
    for (size_t i = r + 1; i < nr; ++i) {
      if (rows[i][c] == 0) continue;
      Z g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(),
                 rows[r][c].get_mpz_t(), rows[i][c].get_mpz_t());
      Z ar = rows[r][c] / g, ai = rows[i][c] / g;
      auto combine = [&](Vec& x, Vec& y) {
        for (size_t j = 0; j < x.size(); ++j) {
          Z nx = s * x[j] + t * y[j];
          y[j] = ar * y[j] - ai * x[j];
          x[j] = nx;
        }
      };
      combine(rows[r], rows[i]);
      if (transform) combine(u[r], u[i]);
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0) {
      row_neg(rows[r]);
      if (transform) row_neg(u[r]);
    }
    for (size_t i = 0; i < r; ++i) {
      Z q = fdiv_q(rows[i][c], rows[r][c]);
      if (q != 0) {
        row_sub(rows[i], rows[r], q);
        if (transform) row_sub(u[i], u[r], q);
      }
    }
    ++r;
  }
  if (transform) *transform = u;
  rows.resize(r);
  return rows;
}

Z det_upper(const IMat& h) {
  Z d = 1;
  for (size_t i = 0; i < h.size(); ++i) d *= h[i][i];
  return d;
}

Vec lattice_reduce(const IMat& h, Vec v) {
  // h is full-rank upper-triangular HNF; reduce coordinates left to right
  for (size_t i = 0; i < h.size(); ++i) {
    Z q = fdiv_q(v[i], h[i][i]);
    if (q != 0) row_sub(v, h[i], q);
  }
  return v;
}

bool lattice_contains(const IMat& h, const Vec& v) {
  Vec r = lattice_reduce(h, v);
  for (auto& x : r)
    if (x != 0) return false;
  return true;
}

bool solve_in_rowspan(const IMat& rows, const Vec& target, Vec* coeffs) {
  IMat u;
  IMat h = hnf(rows, &u);
  Vec v = target;
  Vec c(h.size(), 0);
  size_t nc = v.size();
  for (size_t j = 0; j < h.size(); ++j) {
    size_t p = 0;
    while (p < nc && h[j][p] == 0) ++p;
    if (p == nc) continue;
    if (v[p] % h[j][p] != 0) {
      // pivot does not divide: no integer solution via echelon; but entries
      // left of p are already zero, so this is conclusive
      return false;
    }
    c[j] = v[p] / h[j][p];
    row_sub(v, h[j], c[j]);
  }
  for (auto& x : v)
    if (x != 0) return false;
  if (coeffs) {
    Vec out(rows.size(), 0);
    for (size_t j = 0; j < h.size(); ++j)
      for (size_t i = 0; i < rows.size(); ++i) out[i] += c[j] * u[j][i];
    *coeffs = out;
  }
  return true;
}

IMat kernel_rows(const IMat& m) {
  IMat u;
  IMat h = hnf(m, &u);
  IMat out;
  for (size_t i = h.size(); i < m.size(); ++i) out.push_back(u[i]);
  return out;
}

IMat lattice_preimage(const IMat& m, const IMat& h) {
  size_t k = m.size();
  IMat stack = m;
  for (auto& row : h) stack.push_back(row);
  IMat ker = kernel_rows(stack);
  IMat proj;
  for (auto& row : ker) proj.push_back(Vec(row.begin(), row.begin() + k));
  return hnf(proj);
}

Z det_int(IMat m) {
  size_t n = m.size();
  if (n == 0) return 1;
  Z sign = 1, prev = 1;
  for (size_t i = 0; i + 1 < n; ++i) {
    if (m[i][i] == 0) {
      size_t p = i + 1;
      while (p < n && m[p][i] == 0) ++p;
      if (p == n) return 0;
      std::swap(m[i], m[p]);
      sign = -sign;
    }
    for (size_t r = i + 1; r < n; ++r) {
      for (size_t c = i + 1; c < n; ++c) {
        Z t = m[r][c] * m[i][i] - m[r][i] * m[i][c];
        m[r][c] = t / prev;  // Bareiss: division is exact
      }
      m[r][i] = 0;
    }
    prev = m[i][i];
  }
  return sign * m[n - 1][n - 1];
}

}  // namespace elgen
