#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rstar/family.hpp"
#include "rstar/stepfn.hpp"

namespace rstar {

// Two sets inside the block [t 2^n, (t+1) 2^n), each periodic by pi_i on the
// block shrunk by theta1 on the left and theta2 on the right.
struct IndependenceInstance {
  int n = 0;
  Index t = 0;
  PeriodicSet X1, X2;  // same period, at least (t+1) 2^n
  Index pi1 = 1, pi2 = 1;
  Index theta1 = 0, theta2 = 0;

  Index lo() const { return t << n; }
  Index hi() const { return (t + 1) << n; }
};

struct IndependenceReport {
  Rational lhs;  // |X1 ∩ X2| on the block
  Rational rhs;  // 2 |X1| |X2| / 2^n
  Rational L1, L2;
  std::optional<Rational> lhs_crt;  // residue-pair count, when pi1*pi2 is small
  bool degenerate = false;          // one of the sets is empty or the whole block
  bool pass = false;                // lhs < rhs
};

// Per-period density of X on the window; throws if it depends on the period index.
Rational density_profile(const PeriodicSet& X, Index pi, Index lo, Index hi);
IndependenceReport check_independence(const IndependenceInstance& inst);

// Randomized instances: coprime periods in [2, max_pi], 2^n >= block_factor*pi1*pi2,
// each set one residue interval per period plus arbitrary content in its margin.
struct CampaignOptions {
  std::uint64_t seed = 1;
  int trials = 1000;
  Index max_pi = 64;
  Index block_factor = 1024;
};

struct CampaignSummary {
  CampaignOptions options;
  int trials = 0, degenerate = 0, passed = 0, crt_checked = 0, crt_equal = 0;
  double max_ratio = 0;  // max lhs/rhs over non-degenerate instances
  bool pass() const { return passed == trials - degenerate && crt_equal == crt_checked; }
  std::string json() const;
};

IndependenceInstance random_instance(std::uint64_t& state, const CampaignOptions& opt);
CampaignSummary independence_campaign(const CampaignOptions& opt);

struct AuditOptions {
  unsigned threads = 1;
};

// Re-derives the intermediate sets of the construction from the family's
// functions and checks every finite inequality about them exactly.
std::vector<CheckRecord> audit_trace(const Family& fam, const AuditOptions& opt = {});

}  // namespace rstar
