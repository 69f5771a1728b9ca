#pragma once
// Proof-producing Mennicke-symbol calculus: formal products of symbol powers,
// relation moves with decidable side conditions, an independent validator,
// certificate search, and the exponent/rank derivations.

#include "elgen/props.hpp"

namespace elgen {

// one factor [b over a]^e at a fixed level q
struct SymbolFactor {
  RingElement a, b;
  Z e;
};

struct MennickeProduct {
  const LocalizedRing* R = nullptr;
  RingElement q;
  std::vector<SymbolFactor> factors;  // formal product, read as abelian
};

MennickeProduct symbol_product(const LocalizedRing& A, const RingElement& q,
                               std::vector<SymbolFactor> fs);

enum class MRule {
  MS1a,        // params {t}, t in qA:            b -> b + t a
  MS1b,        // params {t}:                     a -> a + t b
  B1A,         // params {}:                      b -> b (1 - a)
  UnitTerm,    // params {u}: drop factor; a = u mod bA or b = u mod aA
  Inv,         // params {c,d}: [[a,b],[c,d]] in SL(2,A;qA); (a,b,e)->(a,c,-e)
  Sq,          // params {ma,mb,mc,md,f,g,newb}: AddlMen(2), e even
  MS2aSplit,   // params {b1,b2}, b1 b2 = b: one factor -> two (same a, e)
  MS2aMerge,   // idx, idx2 adjacent, same a and e: b's multiply
  MS2bSplit,   // params {a1,a2}, a1 a2 = a: one factor -> two (same b, e)
  MS2bMerge,   // idx, idx2 adjacent, same b and e: a's multiply
  MS2bPower,   // m >= 1 dividing e: (a,b,e) -> (a^m, b, e/m)
  MS2bUnpower, // params {root}, root^m = a:  (a,b,e) -> (root, b, e*m)
  ProdInv,     // params {a1,a2,c,d}: MenMultInv on adjacent (a1 a2,b,e),(a2,b,-e)
};
const char* rule_name(MRule r);

struct DerivationStep {
  MRule rule = MRule::MS1b;
  int idx = 0;   // factor index acted on
  int idx2 = -1; // second factor for merge rules
  Z m = 1;       // multiplicity for the power rules
  std::vector<RingElement> params;
};

struct DerivationTrace {
  MennickeProduct start;
  std::vector<DerivationStep> steps;
  MennickeProduct end;
};

struct TraceReport {
  bool ok = false;
  int failed_step = -1;  // -1: endpoint mismatch (or success when ok)
  std::string message;
};

// replays the trace, checking every side condition and that each
// intermediate factor is a valid W(qA) pair; end compared as a multiset
TraceReport validate_trace(const DerivationTrace& tr);

// trace from [b over a] to the empty product: unit checks + Euclidean
// reduction (MS1b free, MS1a in qA), BFS over small moves as a fallback;
// validated before return.  errors: SearchExhausted
DerivationTrace certify_trivial(const WPair& inst, const Z& budget = Z(100000));

// Step 1.7: the displayed chain proving [b over a]^{-t} = 1 from a
// validated EXP witness.  errors: InvalidWitness
DerivationTrace exponent_kill(const RingElement& q, const RingElement& a,
                              const RingElement& b, const ExpWitness& w);

// Step 1.6 data: pairwise-coprime shifts, CRT target y, GEN-searched h,
// and the brute-forced p-th-power relation beta^p = prod (a'_i)^{e_i}
struct RankCertificate {
  const LocalizedRing* R = nullptr;
  RingElement q;
  std::vector<WPair> instances;       // r+1 of them
  std::vector<RingElement> aprime;    // pairwise coprime shifts
  RingElement y, h, alpha, beta;
  std::vector<Z> e;                   // some e_i nonzero mod p
  Z p, t, r;
  GenWitness hwit;
};

// errors: SearchExhausted
RankCertificate rank_witness(const LocalizedRing& A, const RingElement& q,
                             const std::vector<WPair>& instances, const Z& p,
                             const Z& t, const Z& r);
bool validate_rank_witness(const RankCertificate& c);

}  // namespace elgen
