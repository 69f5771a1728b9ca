#include "elgen/matgroup.hpp"

#include <sstream>

namespace elgen {

SquareMatrix mat_identity(const LocalizedRing& R, int n) {
  SquareMatrix m;
  m.R = &R;
  m.n = n;
  m.e.assign(n, std::vector<RingElement>(n, elem_zero(R)));
  for (int i = 0; i < n; ++i) m.e[i][i] = elem_one(R);
  return m;
}

SquareMatrix mat_mul(const SquareMatrix& x, const SquareMatrix& y) {
  if (x.R != y.R || x.n != y.n) throw Error(Err::Internal, "matrix shape mismatch");
  SquareMatrix m;
  m.R = x.R;
  m.n = x.n;
  m.e.assign(x.n, std::vector<RingElement>(x.n, elem_zero(*x.R)));
  for (int i = 0; i < x.n; ++i)
    for (int k = 0; k < x.n; ++k) {
      if (x.e[i][k].is_zero()) continue;
      for (int j = 0; j < x.n; ++j) {
        if (y.e[k][j].is_zero()) continue;
        m.e[i][j] = m.e[i][j] + x.e[i][k] * y.e[k][j];
      }
    }
  return m;
}

SquareMatrix mat_add(const SquareMatrix& x, const SquareMatrix& y) {
  if (x.R != y.R || x.n != y.n) throw Error(Err::Internal, "matrix shape mismatch");
  SquareMatrix m = x;
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) m.e[i][j] = x.e[i][j] + y.e[i][j];
  return m;
}

SquareMatrix mat_scale(const RingElement& c, const SquareMatrix& x) {
  SquareMatrix m = x;
  for (auto& row : m.e)
    for (auto& v : row) v = c * v;
  return m;
}

RingElement mat_det(const SquareMatrix& m) {
  int n = m.n;
  if (n == 1) return m.e[0][0];
  if (n == 2) return m.e[0][0] * m.e[1][1] - m.e[0][1] * m.e[1][0];
  // Laplace along the first row; n <= 6 at desk scale
  RingElement det = elem_zero(*m.R);
  for (int j = 0; j < n; ++j) {
    if (m.e[0][j].is_zero()) continue;
    SquareMatrix minor;
    minor.R = m.R;
    minor.n = n - 1;
    minor.e.assign(n - 1, std::vector<RingElement>(n - 1, elem_zero(*m.R)));
    for (int r = 1; r < n; ++r) {
      int cc = 0;
      for (int c = 0; c < n; ++c) {
        if (c == j) continue;
        minor.e[r - 1][cc++] = m.e[r][c];
      }
    }
    RingElement term = m.e[0][j] * mat_det(minor);
    det = (j % 2 == 0) ? det + term : det - term;
  }
  return det;
}

bool mat_eq(const SquareMatrix& x, const SquareMatrix& y) {
  if (x.R != y.R || x.n != y.n) return false;
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j)
      if (x.e[i][j] != y.e[i][j]) return false;
  return true;
}

std::string mat_str(const SquareMatrix& m) {
  std::ostringstream o;
  o << "[";
  for (int i = 0; i < m.n; ++i) {
    if (i) o << ",";
    o << "[";
    for (int j = 0; j < m.n; ++j) {
      if (j) o << ",";
      o << '"' << elem_str(m.e[i][j]) << '"';
    }
    o << "]";
  }
  o << "]";
  return o.str();
}

size_t word_length(const ElementaryWord& w) { return w.letters.size(); }

ElementaryWord word_inverse(const ElementaryWord& w) {
  ElementaryWord r;
  r.n = w.n;
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
    r.letters.push_back({it->i, it->j, -it->v});
  return r;
}

ElementaryWord word_concat(const ElementaryWord& a, const ElementaryWord& b) {
  if (a.n != b.n) throw Error(Err::Internal, "word dimension mismatch");
  ElementaryWord r = a;
  r.letters.insert(r.letters.end(), b.letters.begin(), b.letters.end());
  return r;
}

SquareMatrix evaluate_word(const LocalizedRing& R, const ElementaryWord& w) {
  SquareMatrix m = mat_identity(R, w.n);
  for (auto& l : w.letters) {
    if (l.i == l.j || l.i < 1 || l.j < 1 || l.i > w.n || l.j > w.n)
      throw Error(Err::Internal, "bad elementary letter indices");
    // right-multiply by E_{i,j}(v): col_j += col_i * v
    for (int r = 0; r < w.n; ++r)
      m.e[r][l.j - 1] = m.e[r][l.j - 1] + m.e[r][l.i - 1] * l.v;
  }
  return m;
}

ElementaryWord word_simplify(ElementaryWord w) {
  ElementaryWord r;
  r.n = w.n;
  for (auto& l : w.letters) {
    if (!r.letters.empty() && r.letters.back().i == l.i && r.letters.back().j == l.j) {
      r.letters.back().v = r.letters.back().v + l.v;
      if (r.letters.back().v.is_zero()) r.letters.pop_back();
      continue;
    }
    if (l.v.is_zero()) continue;
    r.letters.push_back(l);
  }
  return r;
}

SquareMatrix evaluate_conjugated(const LocalizedRing& R, const ConjugatedWord& w) {
  SquareMatrix m = mat_identity(R, w.n);
  for (auto& l : w.letters) {
    ElementaryWord one;
    one.n = w.n;
    one.letters = {l.gen};
    SquareMatrix g = evaluate_word(R, l.conj);
    SquareMatrix ginv = evaluate_word(R, word_inverse(l.conj));
    m = mat_mul(m, mat_mul(ginv, mat_mul(evaluate_word(R, one), g)));
  }
  return m;
}

bool is_congruence(const SquareMatrix& t, const RingElement& q) {
  if (mat_det(t) != elem_one(*t.R))
    throw Error(Err::NotDeterminantOne, "congruence test needs det 1");
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j) {
      RingElement d = i == j ? t.e[i][j] - elem_one(*t.R) : t.e[i][j];
      if (q.is_zero()) {
        if (!d.is_zero()) return false;
      } else if (!divides(q, d)) {
        return false;
      }
    }
  return true;
}

WPair make_wpair(const LocalizedRing& A, const RingElement& q,
                 const RingElement& a, const RingElement& b) {
  RingElement am1 = a - elem_one(A);
  if (q.is_zero() ? !am1.is_zero() : !divides(q, am1))
    throw Error(Err::NotInW, "a != 1 mod qA");
  if (q.is_zero() ? !b.is_zero() : !divides(q, b))
    throw Error(Err::NotInW, "b not in qA");
  bool coprime;
  if (b.is_zero()) {
    coprime = is_unit(a);
  } else {
    FiniteQuotient fq = finite_quotient(A, b);
    coprime = fq.is_unit_residue(fq.from_element(a));
  }
  if (!coprime) throw Error(Err::NotInW, "aA + bA is not the unit ideal");
  return {&A, normalize(q), normalize(a), normalize(b)};
}

SquareMatrix complete_to_sl2(const WPair& p) {
  const LocalizedRing& A = *p.R;
  SquareMatrix m = mat_identity(A, 2);
  m.e[0][0] = p.a;
  m.e[0][1] = p.b;
  if (p.b.is_zero()) {
    // a is a unit; diag(a, a^{-1}) is already in SL(2,A;qA)
    m.e[1][0] = elem_zero(A);
    m.e[1][1] = unit_inverse(p.a);
  } else {
    FiniteQuotient fb = finite_quotient(A, p.b);
    auto ainv = fb.inverse(fb.from_element(p.a));
    if (!ainv) throw Error(Err::NotInW, "aA + bA is not the unit ideal");
    RingElement x = fb.lift(*ainv);
    RingElement y = divide_exact(elem_one(A) - p.a * x, p.b);
    RingElement c = -y, d = x;  // det = ax + by = 1
    // CRT correction: c + t*a = 0 mod qA (then d + t*b = 1 mod qA follows)
    FiniteQuotient fqq = finite_quotient(A, p.q);
    auto aq = fqq.inverse(fqq.from_element(p.a));
    if (!aq) throw Error(Err::Internal, "a = 1 mod q must be invertible mod q");
    RingElement t0 = fqq.lift(fqq.mul(fqq.neg(fqq.from_element(c)), *aq));
    RingElement qt = elem_vec(A, fqq.qt);
    bool have = false;
    Q best_norm;
    std::string best_key;
    RingElement bc = c, bd = d;
    for (int delta = -2; delta <= 2; ++delta) {
      RingElement t = t0 + elem_int(A, delta) * qt;
      RingElement cc = c + t * p.a;
      RingElement dd = d + t * p.b;
      Q nn = norm(cc);
      if (nn < 0) nn = -nn;
      std::string key = elem_str(cc) + "|" + elem_str(dd);
      if (!have || nn < best_norm || (nn == best_norm && key < best_key)) {
        have = true;
        best_norm = nn;
        best_key = key;
        bc = cc;
        bd = dd;
      }
    }
    m.e[1][0] = bc;
    m.e[1][1] = bd;
  }
  if (mat_det(m) != elem_one(A)) throw Error(Err::Internal, "completion det != 1");
  if (!is_congruence(m, p.q)) throw Error(Err::Internal, "completion not level q");
  return m;
}

IdealDescription level_ideal(const LocalizedRing& A,
                             const std::vector<SquareMatrix>& x) {
  std::vector<RingElement> gens;
  for (auto& t : x) {
    for (int i = 0; i < t.n; ++i)
      for (int j = 0; j < t.n; ++j)
        if (i != j) gens.push_back(t.e[i][j]);
    for (int i = 0; i < t.n; ++i)
      for (int j = i + 1; j < t.n; ++j) gens.push_back(t.e[i][i] - t.e[j][j]);
  }
  return ideal_from_generators(A, gens);
}

}  // namespace elgen
