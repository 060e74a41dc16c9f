#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rstar/stepfn.hpp"

namespace rstar {

enum class Strategy { exhaustive, spike_indexed, sampled };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);  // "exhaustive" | "spike" | "sampled"

// {x : max_k max_{1<=l<=l_max} Σ_i φ_i(x+l) ψ_k(x+2l) / l >= threshold}. Non-owning.
struct SuperlevelQuery {
  std::vector<const PeriodicStepFn*> phis;
  std::vector<std::pair<int, const PeriodicStepFn*>> psis;
  Rational threshold = 1;
  Index l_max = 0;  // 0 means the period
  Strategy strategy = Strategy::spike_indexed;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  const PeriodicSet* restrict_to = nullptr;  // count only x in this set
  bool keep_witness = true;
  unsigned threads = 1;
};

struct SuperlevelResult {
  Rational measure;  // exact; for sampled an unbiased estimate
  double half_width = 0;
  std::optional<PeriodicSet> witness;
  Strategy strategy = Strategy::spike_indexed;
  Index count = 0;
  std::uint64_t pairs = 0;  // candidate (support point, ψ run) pairs visited
};

SuperlevelResult superlevel(const SuperlevelQuery& q);
// Membership of a single x by scanning candidate l with Σφ_i(x+l) != 0.
bool is_member(const SuperlevelQuery& q, Index x);

Rational tail_term(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, Index l);
Rational rstar_tail_sup(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, Index l_max);
// Mean of f(x+n)g(x+2n) over n = 0..N.
Rational furstenberg_average(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, Index N);
// "N,average_num/den,average" lines for the given increasing checkpoints.
std::string orbit_csv(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, const std::vector<Index>& checkpoints);

}  // namespace rstar
