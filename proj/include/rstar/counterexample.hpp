#pragma once

#include <string>
#include <vector>

#include "rstar/family.hpp"

namespace rstar {

// Closed rational interval known to contain an irrational constant.
struct Enclosure {
  Rational lo, hi;
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
};

// pi from Machin's formula, alternating-series remainders bound both ends.
Enclosure pi_enclosure(int terms = 60);
// kappa = pi^2/6 - 1.
Enclosure kappa_enclosure();

// F = phi_scale * Σφ, G = psi_scale * Σψ; the scales are 1/mean, generally not dyadic,
// so the sums are kept raw and the scales applied to thresholds.
struct NormalizedPair {
  PeriodicStepFn phi_sum, psi_sum;
  Rational phi_scale, psi_scale;
  Index period = 1;
  int s = 1, M = 2;
  Rational eps;
  const Family* source = nullptr;  // non-owning

  Rational F(Index x) const { return phi_scale * phi_sum.eval(x).to_rational(); }
  Rational G(Index x) const { return psi_scale * psi_sum.eval(x).to_rational(); }
  Rational F_mean() const { return phi_scale * phi_sum.mean_integral(); }
  Rational G_mean() const { return psi_scale * psi_sum.mean_integral(); }
  // Threshold on Σφ·Σψ equivalent to tau on F·G.
  Rational raw_threshold(const Rational& tau) const { return tau / (phi_scale * psi_scale); }
  SuperlevelQuery query(const Rational& tau, const VerifyOptions& opt = {}) const;
};

NormalizedPair normalize(const Family& fam);

enum class FactorMode { desk, full };

struct FactorReport {
  FactorMode mode = FactorMode::desk;
  Rational threshold, measure, eps;
  double half_width = 0;
  bool precondition = false;  // full mode: s(M-1)2^{-M}/2048 >= 1
  bool pass = false;          // measure > eps
  std::string json() const;
};

// desk: 1/(eps s 2^{-M+1}); full: (M-1)/(4*2048 eps).
Rational factor_threshold(const NormalizedPair& pair, FactorMode mode);
FactorReport factor_check(const NormalizedPair& pair, FactorMode mode = FactorMode::desk, const VerifyOptions& opt = {});
// Exact measure of {x : max_{l<=p} F(x+l)G(x+2l)/l >= tau}.
SuperlevelResult pair_superlevel(const NormalizedPair& pair, const Rational& tau, const VerifyOptions& opt = {});

// beta_j = kappa^{-2} (j+1)^{-4}; thresholds C beta_j (M_j - 1), C = 1/(8192 eps).
// Quantities of the form q * kappa^{-2} are carried by their rational part q.
struct ScheduleEntry {
  int j = 0;
  Index M = 0;
  BigInt s;
  Rational beta_q;       // (j+1)^{-4}
  Rational threshold_q;  // C (M-1) (j+1)^{-4}
  Enclosure beta, threshold;
  bool s_bound = false;  // s <= 2*2048*2^M/(M-1)
};

constexpr Index kMaxScheduleM = Index{1} << 22;

BigInt schedule_s(Index M);
ScheduleEntry schedule_entry(int j, Index M, const Rational& eps);
// M_j = (j+1)^5, j = 1..j_max.
std::vector<ScheduleEntry> schedule(int j_max, const Rational& eps);
// Reduced-parameter demonstration: M_j supplied by the caller.
std::vector<ScheduleEntry> schedule_desk(const std::vector<Index>& Ms, const Rational& eps);
std::string schedule_csv(const std::vector<ScheduleEntry>& entries, bool desk);

// Σ_{j=1}^J sqrt(beta_j) = kappa^{-1} Σ_{m=2}^{J+1} m^{-2}; the full series is exactly 1.
struct SqrtBetaSum {
  int J = 0;
  Rational partial;  // Σ_{m=2}^{J+1} m^{-2}
  Enclosure sum;     // encloses Σ_{j<=J} sqrt(beta_j)
  Enclosure tail;    // encloses 1 - sum
  bool tail_bound = false;  // kappa^{-1}/(J+2) < tail < kappa^{-1}/(J+1), certified
};
SqrtBetaSum sqrt_beta_sum(int J);

// max_j λ̄{beta_j sup_l F G / l >= z}: a certified lower bound (beta_j only enclosed).
Rational product_lower_bound(const std::vector<ScheduleEntry>& entries, const std::vector<NormalizedPair>& pairs,
                             const Rational& z, const VerifyOptions& opt = {});
// Same with z = q * kappa^{-2}; then z / beta_j is rational and the bound exact.
Rational product_lower_bound_scaled(const std::vector<ScheduleEntry>& entries, const std::vector<NormalizedPair>& pairs,
                                    const Rational& q, const VerifyOptions& opt = {});

std::string decimal(const Rational& x, int digits, bool round_up = false);

}  // namespace rstar
