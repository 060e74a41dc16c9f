#pragma once

#include <vector>

#include "rstar/stepfn.hpp"

namespace rstar {

// Nested dyadic supports ispt_{k_0} ⊂ ... ⊂ ispt_{k_M} of a spike function.
// Level-j blocks have length 2^{n+k_j}; the period is 2^{n+k_M}.
class SupportHierarchy {
public:
  SupportHierarchy(int n, std::vector<int> levels, int log2_cap = kDefaultLog2Cap);

  int n() const { return n_; }
  int M() const { return static_cast<int>(k_.size()) - 1; }
  int k(int j) const { return k_.at(static_cast<std::size_t>(j)); }
  const std::vector<int>& levels() const { return k_; }
  Index period() const { return Index{1} << (n_ + k_.back()); }
  Index block(int j) const { return Index{1} << (n_ + k(j)); }

  const PeriodicSet& kept(int j) const { return kept_.at(static_cast<std::size_t>(j)); }
  bool in_level(Index x, int j) const;
  // Level j (1..M) minus level j-1; for j = 1 this is ispt_{k_1} \ ispt_{k_0}.
  PeriodicSet annulus(int j) const;
  // 1 + index of the level-j ring containing x (0 if x is in level 0).
  int ring_of(Index x) const;
  Interval component_of(Index x, int j) const;
  // X(1/2,3/4,j) split by parity of t: [(t+1/2)B, (t+3/4)B), B = 2^{n+k_{j-1}}.
  PeriodicSet half_quarter_set(int j, bool even) const;

private:
  int n_;
  std::vector<int> k_;
  std::vector<PeriodicSet> kept_;
};

// 2^n at the left endpoint of each kept level-0 block; mean 2^{-M}.
PeriodicStepFn spike_function(const SupportHierarchy& h);

// Fraction, in units of 2^n-blocks, of annulus-j blocks [t0 2^n, (t0+1)2^n) such that
// [t0 2^n - lead, (t0+1)2^n + 2^{n+kp+1} + 2^n) stays inside the level-j component.
// Independent of n. For j = M the component is the whole line and the ratio is 1.
Rational margin_ratio(int M, const std::vector<int>& levels, int j, int kp, int lead_blocks);

}  // namespace rstar
