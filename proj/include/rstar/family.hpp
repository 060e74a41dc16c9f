#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rstar/maximal.hpp"
#include "rstar/primes.hpp"
#include "rstar/stepfn.hpp"
#include "rstar/supports.hpp"

namespace rstar {

// Every "sufficiently large" of the construction, made explicit.
struct Slack {
  int level_offset = 10;                    // k_j' - k_{j-1}
  Rational k1_factor = 2;                   // k_1 >= k1_factor * alpha (s = 1)
  Rational prime_factor = 2;                // s=1: threshold >= f*2^{k_M+1}; s>=2: >= f*2^{k_M}*p_{M,s-1}
  Rational window_factor = ratio(3, 2);     // s=1: threshold >= f / (density window width)
  Rational block_factor = 2;                // 2^{n_s} >= f * max prime
  Rational rebase_factor = 8;               // primes >= f * p_{j,s-1}
  int max_log2_period = kDefaultLog2Cap;    // periods are powers of two up to this cap
  Index max_runs = Index{1} << 25;          // memory budget: total runs over all assembled functions
};

struct FamilyParams {
  Rational rho = ratio(3, 5);
  Rational eps = ratio(1, 20);
  int M = 2;
  int alpha = 1;
  int s = 1;
  Slack slack;

  void validate() const;
  // Flat "key = value" lines, '#' comments.
  static FamilyParams parse(const std::string& text);
  std::string str() const;
};

struct CheckRecord {
  std::string check_id;
  std::string eq_ref;  // short name of the inequality being checked
  Rational lhs;
  std::string relation;  // "<", ">", "<=", ">=", "=="
  Rational rhs;
  bool pass = false;
};

CheckRecord make_check(std::string id, std::string ref, const Rational& lhs, const std::string& rel, const Rational& rhs);
std::string to_json_line(const CheckRecord& c);

struct LevelRecord {
  int j = 0;
  int k = 0;        // k_j
  int k_prime = 0;  // k_j' (s = 1) / alpha_j (s >= 2)
  int alpha = 0;
  int omega = 0;
  Index sub_period = 0;  // p_{j,s-1}; 0 for s = 1
  int sub_n = 0;         // n_{j,s-1}
};

// Per-offset-block psi density record (s = 1).
struct BlockRecord {
  Index t = 0;  // offset block [(t-1)2^n+1, t2^n+1)
  int j = 0;
  Index prime = 0;
  Index r = 0;  // support residues [0, r) mod prime
  Index count = 0;
};

struct SubFamilySummary {
  int j = 0;
  int alpha = 0;
  int omega = 0;
  Index period = 0;
  int n = 0;
  Rational phi_mean, psi_mean, measure;
  std::vector<Rational> psi_k_means;  // mean of psi_k, k = alpha..omega
};

struct ConstructionTrace {
  int s = 1;
  int n = 0;
  std::vector<int> levels;
  std::vector<LevelRecord> level_records;
  PrimeAssignment primes;
  std::vector<BlockRecord> blocks;
  std::vector<SubFamilySummary> subs;
  std::vector<CheckRecord> checks;
  bool early_exit = false;
  Index rebased_from = 0;
  bool empty() const { return levels.empty(); }
  SupportHierarchy hierarchy() const { return SupportHierarchy(n, levels, 62); }
};

struct Family {
  FamilyParams params;
  int n = 0;  // n_s: phis are φ_1..φ_n
  Index period = 1;
  int alpha = 1, omega = 1;
  std::vector<PeriodicStepFn> phis;
  std::map<int, PeriodicStepFn> psis;
  ConstructionTrace trace;
};

struct VerifyOptions {
  Strategy strategy = Strategy::spike_indexed;
  unsigned threads = 1;
  std::uint64_t samples = 200000;
  std::uint64_t seed = 1;
};

struct VerificationReport {
  Rational measure, bound;
  double half_width = 0;
  bool ineq1 = false;
  Rational phi_sum, phi_lo, phi_hi;
  bool ineq2 = false;
  Rational psi_sum, psi_lo, psi_hi;
  bool ineq3 = false;
  bool non_negative = false;
  bool period_ok = false;
  Strategy strategy = Strategy::spike_indexed;
  Index period = 0;
  int s = 1;
  double elapsed = 0;  // not serialized
  bool pass() const { return ineq1 && ineq2 && ineq3 && non_negative && period_ok; }
  std::string json() const;
};

// s-level lower bound min{eps, s(M-1)eps 2^{-M}/2048}.
Rational measure_bound(const FamilyParams& p);

Family construct_s1(const FamilyParams& params);
using SubBuilder = std::function<Family(int alpha)>;
Family construct_step(const FamilyParams& params, const SubBuilder& sub, const VerifyOptions& vopt = {});
// Dispatches on params.s, recursing through construct_step with a memoizing sub-builder.
Family construct(const FamilyParams& params, const VerifyOptions& vopt = {});

Family rebase_family(const Family& fam, Index p_new);
VerificationReport verify_family(const Family& fam, const VerifyOptions& opt = {});

struct ResolvedParams {
  std::vector<int> levels;  // k_0..k_M
  std::vector<int> k_prime; // index j: k_j' (j >= 1), k_prime[0] unused
  int omega = 0;
  Index threshold = 0;
  int n = 0;
  PrimeAssignment primes;
  std::vector<BlockRecord> blocks;
};
// STEP-1 parameter resolution: level chain, prime table and the minimal feasible n.
ResolvedParams resolve_parameters(const FamilyParams& params);

SuperlevelQuery family_query(const Family& fam);

void save_family(const Family& fam, const std::string& dir);
Family load_family(const std::string& dir);
std::string trace_jsonl(const ConstructionTrace& t);

}  // namespace rstar
