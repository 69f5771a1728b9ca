// CLI dispatch: parse arguments, run library operations, emit JSON reports.

#include "elgen/cli.hpp"

#include "elgen/factor.hpp"
#include "elgen/mennicke.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace elgen {

namespace {

using nlohmann::json;

std::string zs(const Z& z) { return z.get_str(); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (const Z& x : v) a.push_back(zs(x));
  return a;
}

json word_json(const ElementaryWord& w) {
  json letters = json::array();
  for (const ElementaryGenerator& g : w.letters)
    letters.push_back(json{{"i", g.i}, {"j", g.j}, {"v", elem_str(g.v)}});
  return json{{"n", w.n}, {"length", (int)w.letters.size()}, {"letters", letters}};
}

SquareMatrix parse_matrix_json(const LocalizedRing& A, const std::string& text) {
  json j = json::parse(text);
  if (!j.is_array() || j.empty())
    throw Error(Err::ParseError, "matrix wants a JSON array of rows");
  int n = (int)j.size();
  SquareMatrix m = mat_identity(A, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || (int)j[i].size() != n)
      throw Error(Err::ParseError, "matrix rows must have equal length");
    for (int c = 0; c < n; ++c) {
      const json& e = j[i][c];
      if (e.is_string())
        m.e[i][c] = parse_elem(A, e.get<std::string>());
      else if (e.is_number_integer())
        m.e[i][c] = elem_int(A, Z((long)e.get<long long>()));
      else
        throw Error(Err::ParseError, "matrix entries are strings or integers");
    }
  }
  return m;
}

ElementaryGenerator parse_letter_json(const LocalizedRing& A, const json& j) {
  if (!j.is_object() || !j.contains("i") || !j.contains("j") || !j.contains("v"))
    throw Error(Err::ParseError, "letter wants {i, j, v}");
  ElementaryGenerator g;
  g.i = j["i"].get<int>();
  g.j = j["j"].get<int>();
  if (j["v"].is_string())
    g.v = parse_elem(A, j["v"].get<std::string>());
  else
    g.v = elem_int(A, Z((long)j["v"].get<long long>()));
  if (g.i == g.j || g.i < 1 || g.j < 1)
    throw Error(Err::ParseError, "letter indices must be distinct and positive");
  return g;
}

ElementaryWord parse_word_json(const LocalizedRing& A, const std::string& text,
                               int n) {
  json j = json::parse(text);
  if (!j.is_array()) throw Error(Err::ParseError, "word wants a JSON array");
  ElementaryWord w;
  w.n = n;
  for (const json& el : j) {
    ElementaryGenerator g = parse_letter_json(A, el);
    if (g.i > n || g.j > n)
      throw Error(Err::ParseError, "letter index exceeds dimension");
    w.letters.push_back(g);
  }
  return w;
}

json product_json(const MennickeProduct& p) {
  json fs = json::array();
  for (const SymbolFactor& f : p.factors)
    fs.push_back(json{{"a", elem_str(f.a)}, {"b", elem_str(f.b)}, {"e", zs(f.e)}});
  return json{{"q", elem_str(p.q)}, {"factors", fs}};
}

json trace_json(const DerivationTrace& tr) {
  json steps = json::array();
  for (const DerivationStep& s : tr.steps) {
    json ps = json::array();
    for (const RingElement& e : s.params) ps.push_back(elem_str(e));
    steps.push_back(json{{"rule", rule_name(s.rule)},
                         {"idx", s.idx},
                         {"idx2", s.idx2},
                         {"m", zs(s.m)},
                         {"params", ps}});
  }
  return json{{"start", product_json(tr.start)},
              {"steps", steps},
              {"end", product_json(tr.end)}};
}

MennickeProduct parse_product_json(const LocalizedRing& A, const json& j) {
  if (!j.is_object() || !j.contains("q") || !j.contains("factors"))
    throw Error(Err::ParseError, "product wants {q, factors}");
  RingElement q = parse_elem(A, j["q"].get<std::string>());
  std::vector<SymbolFactor> fs;
  for (const json& f : j["factors"]) {
    SymbolFactor sf{parse_elem(A, f["a"].get<std::string>()),
                    parse_elem(A, f["b"].get<std::string>()),
                    Z(f["e"].get<std::string>())};
    fs.push_back(sf);
  }
  MennickeProduct p;
  p.R = &A;
  p.q = q;
  p.factors = std::move(fs);
  return p;
}

DerivationTrace parse_trace_json(const LocalizedRing& A, const std::string& text) {
  static const std::map<std::string, MRule> rules = {
      {"MS1a", MRule::MS1a},           {"MS1b", MRule::MS1b},
      {"B1A", MRule::B1A},             {"UNIT-TERM", MRule::UnitTerm},
      {"INV", MRule::Inv},             {"SQ", MRule::Sq},
      {"MS2a-split", MRule::MS2aSplit}, {"MS2a-merge", MRule::MS2aMerge},
      {"MS2b-split", MRule::MS2bSplit}, {"MS2b-merge", MRule::MS2bMerge},
      {"MS2b-power", MRule::MS2bPower}, {"MS2b-unpower", MRule::MS2bUnpower},
      {"PRODINV", MRule::ProdInv}};
  json j = json::parse(text);
  if (j.is_object() && j.contains("trace")) j = j.at("trace");  // whole certify report is fine too
  DerivationTrace tr;
  tr.start = parse_product_json(A, j.at("start"));
  tr.end = parse_product_json(A, j.at("end"));
  for (const json& s : j.at("steps")) {
    DerivationStep st;
    auto it = rules.find(s.at("rule").get<std::string>());
    if (it == rules.end()) throw Error(Err::ParseError, "unknown rule name");
    st.rule = it->second;
    st.idx = s.value("idx", 0);
    st.idx2 = s.value("idx2", -1);
    st.m = Z(s.value("m", std::string("1")));
    if (s.contains("params"))
      for (const json& p : s["params"])
        st.params.push_back(parse_elem(A, p.get<std::string>()));
    tr.steps.push_back(st);
  }
  return tr;
}

void table_lines(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      table_lines(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(),
                  os);
  } else if (j.is_array()) {
    int i = 0;
    for (const json& el : j) table_lines(el, prefix + "[" + std::to_string(i++) + "]", os);
  } else {
    os << prefix << " = " << (j.is_string() ? j.get<std::string>() : j.dump())
       << "\n";
  }
}

struct Options {
  std::string ring = "order: x; invert: []";
  std::string q, qp, level = "1", u, y, a, b, matrix, g, x, trace, file;
  std::string budget;
  std::string t = "2";
  uint64_t seed = 0;
  int trials = 100, n = 2, dim = 3, radius = -1;
  bool table = false, timings = false;
  bool has_y = false;
};

Z opt_budget(const Options& o, long dflt) {
  return o.budget.empty() ? Z(dflt) : Z(o.budget);
}

RingElement sample_elem(const LocalizedRing& A, Rng& rng, int radius) {
  Vec v((size_t)A.k(), Z(0));
  for (int i = 0; i < A.k(); ++i) v[i] = Z(rng.range(-radius, radius));
  return elem_vec(A, v);
}

// ---- subcommand bodies -------------------------------------------------------

json cmd_ring_check(const Options& o, bool& verified) {
  LocalizedRing A = parse_ring(o.ring);
  json j;
  j["command"] = "ring check";
  j["ring"] = ring_descriptor(A);
  j["k"] = A.k();
  j["disc"] = zs(A.B.disc);
  j["gamma"] = zs(A.B.gamma);
  j["index"] = zs(A.B.index);
  json inv = json::array();
  for (const Vec& s : A.s) inv.push_back(vec_json(s));
  j["inverted"] = inv;
  try {
    j["fundamental_unit"] = elem_str(fundamental_unit_search(A));
  } catch (const Error& e) {
    if (e.code != Err::NoInfiniteUnits) throw;
    j["fundamental_unit"] = nullptr;
  }
  verified = true;
  return j;
}

json cmd_factor(const Options& o, const std::string& mode, bool& verified) {
  LocalizedRing A = parse_ring(o.ring);
  json j;
  j["command"] = "factor";
  j["mode"] = mode;
  j["ring"] = ring_descriptor(A);
  if (mode == "field") {
    if (o.q.empty() || o.matrix.empty())
      throw Error(Err::ParseError, "field mode wants --q and --matrix");
    RingElement q = parse_elem(A, o.q);
    FiniteQuotient F = finite_quotient(A, q);
    SquareMatrix m = parse_matrix_json(A, o.matrix);
    QuotMatrix T = qmat_from_matrix(F, m);
    ElementaryWord w = field_factorize(F, T);
    j["q"] = elem_str(q);
    j["word"] = word_json(w);
    verified = qmat_eq(qmat_from_word(F, T.n, w), T);
  } else if (mode == "vaserstein") {
    if (o.q.empty() || o.qp.empty() || o.matrix.empty())
      throw Error(Err::ParseError, "vaserstein mode wants --q, --qp, --matrix");
    RingElement q = parse_elem(A, o.q), qp = parse_elem(A, o.qp);
    SquareMatrix T = parse_matrix_json(A, o.matrix);
    ElementaryWord w = vaserstein_reduce(T, q, qp);
    j["q"] = elem_str(q);
    j["qp"] = elem_str(qp);
    j["word"] = word_json(w);
    verified = is_congruence(mat_mul(T, evaluate_word(A, w)), qp);
    for (const ElementaryGenerator& g : w.letters)
      if (!divides(q, g.v)) verified = false;
  } else if (mode == "whitehead") {
    if (o.q.empty() || o.u.empty())
      throw Error(Err::ParseError, "whitehead mode wants --q and --u");
    RingElement q = parse_elem(A, o.q), u = parse_elem(A, o.u);
    ElementaryWord w = whitehead_h_factor(A, u, q);
    j["q"] = elem_str(q);
    j["u"] = elem_str(u);
    j["word"] = word_json(w);
    verified = mat_eq(evaluate_word(A, w), h_matrix(A, u));
    for (const ElementaryGenerator& g : w.letters)
      if (!divides(q, g.v)) verified = false;
  } else if (mode == "unitconj") {
    if (o.q.empty() || o.matrix.empty())
      throw Error(Err::ParseError, "unitconj mode wants --q and --matrix");
    RingElement q = parse_elem(A, o.q);
    SquareMatrix T = parse_matrix_json(A, o.matrix);
    UnitConjFactorization fz = unit_conj_factorize(A, q, T);
    j["q"] = elem_str(q);
    j["u0"] = elem_str(fz.u0);
    json fs = json::array();
    for (const ElementaryGenerator& g : fz.factors)
      fs.push_back(json{{"i", g.i}, {"j", g.j}, {"v", elem_str(g.v)}});
    j["factors"] = fs;
    j["ap"] = elem_str(fz.ap);
    j["e1"] = zs(fz.e1);
    j["e2"] = zs(fz.e2);
    j["t"] = zs(fz.t);
    j["tp"] = zs(fz.tp);
    verified = validate_unit_conj(fz);
  } else if (mode == "steinberg") {
    if (o.q.empty() || o.x.empty())
      throw Error(Err::ParseError, "steinberg mode wants --q and --x");
    RingElement q = parse_elem(A, o.q);
    ElementaryGenerator x = parse_letter_json(A, json::parse(o.x));
    ElementaryWord g = o.g.empty() ? ElementaryWord{o.dim, {}}
                                   : parse_word_json(A, o.g, o.dim);
    ElementaryWord w = steinberg_rewrite(A, g, x, q, o.dim);
    j["q"] = elem_str(q);
    j["n"] = o.dim;
    j["word"] = word_json(w);
    SquareMatrix xm = mat_identity(A, o.dim);
    xm.e[x.i - 1][x.j - 1] = x.v;
    SquareMatrix target =
        mat_mul(mat_mul(evaluate_word(A, word_inverse(g)), xm),
                evaluate_word(A, g));
    verified = mat_eq(evaluate_word(A, w), target);
    for (const ElementaryGenerator& gg : w.letters)
      if (!divides(q, gg.v)) verified = false;
  } else {
    throw Error(Err::ParseError, "unknown factor mode '" + mode + "'");
  }
  return j;
}

json cmd_identities(const Options& o, bool& verified) {
  LocalizedRing A = parse_ring(o.ring);
  RingElement one = elem_one(A);
  Rng rng(o.seed);
  std::vector<RingElement> units = unit_monoid(A, 4);
  // A1 pool: (u, q) with u = 1 mod q^2 A
  std::vector<std::pair<RingElement, RingElement>> a1pool;
  for (long qi : {2, 3, 5}) {
    RingElement q = elem_int(A, Z(qi));
    for (const RingElement& u : units)
      if (divides(q * q, u - one)) a1pool.push_back({u, q});
  }
  int a1 = 0, a2 = 0, a3 = 0, a4 = 0;
  for (int trial = 0; trial < o.trials; ++trial) {
    // A1
    auto& [u1, q1] = a1pool[rng.below(a1pool.size())];
    ElementaryWord w1 = whitehead_h_factor(A, u1, q1);
    if (w1.letters.size() == 4 && mat_eq(evaluate_word(A, w1), h_matrix(A, u1)))
      ++a1;
    // A2
    if (a2_identity_check(A, units[rng.below(units.size())])) ++a2;
    // A3
    RingElement u3 = units[rng.below(units.size())];
    RingElement x3 = sample_elem(A, rng, 9);
    ElementaryGenerator g3 = a3_conjugation(A, u3, x3);
    if (g3.v == x3 * u3 * u3) ++a3;
    // A4
    RingElement u4 = units[rng.below(units.size())];
    RingElement y4 = elem_int(A, Z(rng.range(-6, 6)));
    if (y4.is_zero()) y4 = one;
    std::vector<RingElement> zcands;
    for (long zc = -6; zc <= 6; ++zc) {
      RingElement z = elem_int(A, Z(zc));
      RingElement den = one + y4 * z;
      if (den.is_zero()) {
        if (u4 * u4 == one) zcands.push_back(z);
      } else if (divides(den, u4 * u4 - one)) {
        zcands.push_back(z);
      }
    }
    RingElement z4 = zcands[rng.below(zcands.size())];
    A4Conjugation c4 = a4_conjugation(A, y4, z4, u4);
    if (c4.certified.v == -(c4.w * y4) && c4.word.letters.size() == 21) ++a4;
  }
  json j;
  j["command"] = "identities";
  j["ring"] = ring_descriptor(A);
  j["trials"] = o.trials;
  j["seed"] = zs(Z((unsigned long)o.seed));
  j["a1_pass"] = a1;
  j["a2_pass"] = a2;
  j["a3_pass"] = a3;
  j["a4_pass"] = a4;
  verified = (a1 == o.trials && a2 == o.trials && a3 == o.trials && a4 == o.trials);
  return j;
}

json cmd_mennicke_certify(const Options& o, bool& verified) {
  LocalizedRing A = parse_ring(o.ring);
  if (o.q.empty() || o.a.empty() || o.b.empty())
    throw Error(Err::ParseError, "certify wants --q, --a, --b");
  RingElement q = parse_elem(A, o.q);
  WPair inst = make_wpair(A, q, parse_elem(A, o.a), parse_elem(A, o.b));
  DerivationTrace tr = certify_trivial(inst, opt_budget(o, 100000));
  TraceReport rep = validate_trace(tr);
  json j;
  j["command"] = "mennicke certify";
  j["ring"] = ring_descriptor(A);
  j["q"] = elem_str(q);
  j["trace"] = trace_json(tr);
  j["steps"] = (int)tr.steps.size();
  j["validator"] = rep.message;
  verified = rep.ok;
  return j;
}

json cmd_mennicke_validate(const Options& o, bool& verified) {
  LocalizedRing A = parse_ring(o.ring);
  std::string text = o.trace;
  if (!o.file.empty()) {
    std::ifstream in(o.file);
    if (!in) throw Error(Err::ParseError, "cannot read file '" + o.file + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  if (text.empty())
    throw Error(Err::ParseError, "validate wants --trace or --file");
  DerivationTrace tr = parse_trace_json(A, text);
  TraceReport rep = validate_trace(tr);
  json j;
  j["command"] = "mennicke validate";
  j["ring"] = ring_descriptor(A);
  j["failed_step"] = rep.failed_step;
  j["message"] = rep.message;
  verified = rep.ok;
  return j;
}

json cmd_witness(const Options& o, const std::string& kind, bool& verified) {
  LocalizedRing A = parse_ring(o.ring);
  json j;
  j["command"] = "witness " + kind;
  j["ring"] = ring_descriptor(A);
  if (kind == "gen") {
    if (o.a.empty() || o.b.empty())
      throw Error(Err::ParseError, "gen wants --a and --b");
    GenWitness w = gen_witness(A, parse_elem(A, o.a), parse_elem(A, o.b), Z(o.t));
    j["a"] = elem_str(w.a);
    j["b"] = elem_str(w.b);
    j["h"] = elem_str(w.h);
    j["t"] = zs(w.t);
    j["unit_count"] = zs(w.unit_count);
    j["exponent"] = zs(w.exponent);
    j["coset_gen"] = vec_json(w.coset_gen);
    verified = validate_gen_witness(w);
  } else if (kind == "exp") {
    if (o.q.empty() || o.a.empty() || o.b.empty())
      throw Error(Err::ParseError, "exp wants --q, --a, --b");
    RingElement q = parse_elem(A, o.q);
    ExpWitness w = exp_witness(A, q, parse_elem(A, o.a), parse_elem(A, o.b));
    j["q"] = elem_str(q);
    j["a"] = elem_str(w.a);
    j["b"] = elem_str(w.b);
    j["t"] = zs(w.t);
    j["ap"] = elem_str(w.ap);
    j["c"] = elem_str(w.c);
    j["d"] = elem_str(w.d);
    for (int i = 0; i < 2; ++i) {
      json wi;
      wi["u"] = elem_str(w.u[i]);
      wi["f"] = elem_str(w.f[i]);
      wi["g"] = elem_str(w.g[i]);
      wi["bp"] = elem_str(w.bp[i]);
      wi["dp"] = elem_str(w.dp[i]);
      j["instance" + std::to_string(i + 1)] = wi;
    }
    j["alpha1"] = zs(w.alpha1);
    j["alpha2"] = zs(w.alpha2);
    j["t1"] = zs(w.t1);
    j["t2"] = zs(w.t2);
    verified = validate_exp_witness(w);
  } else if (kind == "unit") {
    if (o.q.empty()) throw Error(Err::ParseError, "unit wants --q");
    RingElement q = parse_elem(A, o.q);
    RingElement u = unit_prop_unit(A, q);
    j["q"] = elem_str(q);
    j["u"] = elem_str(u);
    verified = is_unit(u) && divides(q, u - elem_one(A)) &&
               !(pow(u, Z(4)) == elem_one(A));
  } else if (kind == "conj") {
    if (o.q.empty()) throw Error(Err::ParseError, "conj wants --q");
    RingElement q = parse_elem(A, o.q);
    j["q"] = elem_str(q);
    if (o.has_y) {
      ConjMWitness w = mset_membership(A, q, parse_elem(A, o.y),
                                       opt_budget(o, 100000));
      j["y"] = elem_str(w.y);
      j["z"] = elem_str(w.z);
      j["u1"] = elem_str(w.u1);
      j["u2"] = elem_str(w.u2);
      verified = validate_mset_witness(w);
    } else {
      ConjData cd = build_conj_data(A, q);
      j["qhat"] = zs(cd.qhat);
      j["e"] = zs(cd.e);
      j["t"] = zs(cd.t);
      j["a"] = zs(cd.a);
      json D = json::array();
      for (const RingElement& d : cd.D) D.push_back(elem_str(d));
      j["D"] = D;
      j["b"] = elem_str(cd.b);
      j["u"] = elem_str(cd.u);
      j["y"] = elem_str(cd.y);
      j["qp"] = elem_str(cd.qp);
      j["qpp"] = elem_str(cd.qpp);
      j["ny"] = zs(cd.ny);
      j["n0"] = zs(cd.n0);
      j["n1"] = zs(cd.n1);
      j["r"] = zs(cd.r);
      j["m"] = zs(cd.m);
      verified = validate_conj_data(cd);
    }
  } else if (kind == "serre") {
    if (o.matrix.empty()) throw Error(Err::ParseError, "serre wants --matrix");
    SquareMatrix T = parse_matrix_json(A, o.matrix);
    SerreLevel s = serre_level(A, T);
    j["u"] = elem_str(s.u);
    j["level"] = elem_str(s.level);
    RingElement one = elem_one(A);
    verified = is_unit(s.u) && divides(T.e[1][0], s.u * s.u - one) &&
               (s.level == pow(s.u, Z(4)) - one);
  } else {
    throw Error(Err::ParseError, "unknown witness kind '" + kind + "'");
  }
  return j;
}

json cmd_survey(const Options& o, bool& verified) {
  LocalizedRing A = parse_ring(o.ring);
  if (o.q.empty()) throw Error(Err::ParseError, "survey wants --q");
  RingElement q = parse_elem(A, o.q);
  RingElement level = parse_elem(A, o.level);
  FiniteQuotient F = finite_quotient(A, q);
  Z budget = opt_budget(o, 1000000);
  // letter values: nonzero multiples of `level` in the quotient
  std::set<std::vector<std::string>> seen_vals;
  std::vector<Vec> vals;
  Vec lred = F.from_element(level);
  for (const Vec& r : F.residues(budget)) {
    Vec v = F.mul(lred, r);
    if (F.is_zero(v)) continue;
    std::vector<std::string> key;
    for (const Z& x : v) key.push_back(x.get_str());
    if (seen_vals.insert(key).second) vals.push_back(v);
  }
  struct Gen {
    int i, j;
    Vec v;
  };
  std::vector<Gen> gens;
  for (int i = 0; i < o.n; ++i)
    for (int jj = 0; jj < o.n; ++jj)
      if (i != jj)
        for (const Vec& v : vals) gens.push_back({i, jj, v});
  auto mkey = [&](const QuotMatrix& m) {
    std::ostringstream os;
    for (int i = 0; i < m.n; ++i)
      for (int c = 0; c < m.n; ++c)
        for (const Z& x : m.e[i][c]) os << x.get_str() << ",";
    return os.str();
  };
  std::map<std::string, int> dist;
  std::deque<QuotMatrix> frontier;
  QuotMatrix id = qmat_identity(F, o.n);
  dist[mkey(id)] = 0;
  frontier.push_back(id);
  std::map<int, long> histogram;
  histogram[0] = 1;
  int maxlen = 0;
  while (!frontier.empty()) {
    QuotMatrix cur = frontier.front();
    frontier.pop_front();
    int d = dist[mkey(cur)];
    if (o.radius >= 0 && d >= o.radius) continue;
    for (const Gen& g : gens) {
      QuotMatrix L = qmat_identity(F, o.n);
      L.e[g.i][g.j] = g.v;
      QuotMatrix nxt = qmat_mul(cur, L);
      std::string k = mkey(nxt);
      if (dist.count(k)) continue;
      if (Z(dist.size()) >= budget)
        throw Error(Err::BudgetExceeded, "survey: state budget");
      dist[k] = d + 1;
      ++histogram[d + 1];
      maxlen = std::max(maxlen, d + 1);
      frontier.push_back(nxt);
    }
  }
  json h;
  for (const auto& [len, count] : histogram) h[std::to_string(len)] = count;
  json j;
  j["command"] = "survey";
  j["ring"] = ring_descriptor(A);
  j["q"] = elem_str(q);
  j["level"] = elem_str(level);
  j["n"] = o.n;
  j["radius"] = o.radius;
  j["reached"] = (long)dist.size();
  j["max_length"] = maxlen;
  j["histogram"] = h;
  verified = true;
  return j;
}

std::string render(const json& j, bool table) {
  if (table) {
    std::ostringstream os;
    table_lines(j, "", os);
    return os.str();
  }
  return j.dump(2) + "\n";
}

}  // namespace

CliResult run_cli(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"exact elementary-generation toolkit"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* s) {
    s->add_option("--ring", o.ring, "ring descriptor");
    s->add_option("--seed", o.seed, "RNG seed");
    s->add_option("--budget", o.budget, "search budget");
    s->add_flag("--table", o.table, "table output");
    s->add_flag("--json", "JSON output (default)");
    s->add_flag("--timings", o.timings, "include timings");
  };

  CLI::App* ring = app.add_subcommand("ring", "ring data");
  CLI::App* ring_check = ring->add_subcommand("check", "parse and report");
  add_common(ring_check);

  std::string mode;
  CLI::App* factor = app.add_subcommand("factor", "factorizations");
  add_common(factor);
  factor->add_option("--mode", mode, "field|vaserstein|whitehead|unitconj|steinberg")
      ->required();
  factor->add_option("--q", o.q, "level element");
  factor->add_option("--qp", o.qp, "target level");
  factor->add_option("--u", o.u, "unit");
  factor->add_option("--matrix", o.matrix, "matrix (JSON)");
  factor->add_option("--g", o.g, "conjugator word (JSON)");
  factor->add_option("--x", o.x, "letter (JSON)");
  factor->add_option("--n", o.dim, "dimension");

  CLI::App* idents = app.add_subcommand("identities", "A1-A4 suite");
  add_common(idents);
  idents->add_option("--trials", o.trials, "trial count");

  CLI::App* mennicke = app.add_subcommand("mennicke", "symbol calculus");
  CLI::App* certify = mennicke->add_subcommand("certify", "trace to 1");
  add_common(certify);
  certify->add_option("--q", o.q, "level element");
  certify->add_option("--a", o.a, "bottom entry");
  certify->add_option("--b", o.b, "top entry");
  CLI::App* validate = mennicke->add_subcommand("validate", "replay a trace");
  add_common(validate);
  validate->add_option("--trace", o.trace, "trace JSON");
  validate->add_option("--file", o.file, "trace JSON file");

  CLI::App* witness = app.add_subcommand("witness", "property witnesses");
  std::vector<std::string> kinds = {"gen", "exp", "unit", "conj", "serre"};
  std::map<std::string, CLI::App*> wsub;
  for (const std::string& k : kinds) {
    CLI::App* s = witness->add_subcommand(k, k + " witness");
    add_common(s);
    s->add_option("--q", o.q, "level element");
    s->add_option("--a", o.a, "element a");
    s->add_option("--b", o.b, "element b");
    s->add_option("--t", o.t, "exponent t");
    s->add_option("--matrix", o.matrix, "matrix (JSON)");
    s->add_option("--y", o.y, "target y");
    wsub[k] = s;
  }

  CLI::App* survey = app.add_subcommand("survey", "word-length histogram");
  add_common(survey);
  survey->add_option("--q", o.q, "quotient modulus")->required();
  survey->add_option("--level", o.level, "letter level");
  survey->add_option("--n", o.n, "dimension");
  survey->add_option("--radius", o.radius, "BFS depth cap");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return {0, app.help()};
  } catch (const CLI::ParseError& e) {
    json j{{"error", std::string(e.what())}, {"exit", 2}};
    return {2, j.dump(2) + "\n"};
  }

  auto started = std::chrono::steady_clock::now();
  try {
    bool verified = false;
    json j;
    if (app.got_subcommand(ring)) {
      if (!ring->got_subcommand(ring_check))
        throw Error(Err::ParseError, "ring wants the 'check' subcommand");
      j = cmd_ring_check(o, verified);
    } else if (app.got_subcommand(factor)) {
      j = cmd_factor(o, mode, verified);
    } else if (app.got_subcommand(idents)) {
      j = cmd_identities(o, verified);
    } else if (app.got_subcommand(mennicke)) {
      if (mennicke->got_subcommand(certify))
        j = cmd_mennicke_certify(o, verified);
      else if (mennicke->got_subcommand(validate))
        j = cmd_mennicke_validate(o, verified);
      else
        throw Error(Err::ParseError, "mennicke wants certify or validate");
    } else if (app.got_subcommand(witness)) {
      std::string kind;
      for (const std::string& k : kinds)
        if (witness->got_subcommand(wsub[k])) kind = k;
      if (kind.empty())
        throw Error(Err::ParseError, "witness wants gen|exp|unit|conj|serre");
      o.has_y = wsub[kind]->count("--y") > 0;
      j = cmd_witness(o, kind, verified);
    } else if (app.got_subcommand(survey)) {
      j = cmd_survey(o, verified);
    } else {
      throw Error(Err::ParseError, "no subcommand");
    }
    j["verified"] = verified;
    if (o.timings) {
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count();
      j["timings"] = json{{"total_ms", (long)ms}};
    }
    return {verified ? 0 : 3, render(j, o.table)};
  } catch (const Error& e) {
    int code = 3;
    if (e.code == Err::ParseError) code = 2;
    if (e.code == Err::SearchExhausted || e.code == Err::BudgetExceeded) code = 4;
    json j{{"error", std::string(e.what())},
           {"error_kind", err_name(e.code)},
           {"exit", code}};
    return {code, j.dump(2) + "\n"};
  } catch (const nlohmann::json::exception& e) {
    json j{{"error", std::string(e.what())}, {"exit", 2}};
    return {2, j.dump(2) + "\n"};
  }
}

}  // namespace elgen
