#include "rstar/supports.hpp"

#include "rstar/error.hpp"

namespace rstar {

static Index floordiv(Index a, Index b) {
  Index q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

SupportHierarchy::SupportHierarchy(int n, std::vector<int> levels, int log2_cap)
    : n_(n), k_(std::move(levels)) {
  require(k_.size() >= 2, "hierarchy needs at least levels k_0 < k_1");
  require(k_[0] == 0, "hierarchy: k_0 must be 0");
  for (std::size_t j = 1; j < k_.size(); ++j) require(k_[j] > k_[j - 1], "hierarchy: levels must be strictly increasing");
  require(n_ >= 0, "hierarchy: n must be non-negative");
  if (n_ + k_.back() > std::min(log2_cap, 62))
    fail("hierarchy: period 2^" + std::to_string(n_ + k_.back()) + " exceeds cap 2^" + std::to_string(log2_cap));

  const int M = this->M();
  kept_.assign(static_cast<std::size_t>(M + 1), PeriodicSet(period()));
  kept_[static_cast<std::size_t>(M)] = PeriodicSet::full(period());
  for (int j = M; j >= 1; --j) {
    Index B = block(j - 1);
    std::vector<Interval> out;
    for (const auto& iv : kept(j).intervals())
      for (Index a = iv.start; a < iv.end(); a += B)
        if ((a / B) % 2 == 1) out.push_back({a, B});
    kept_[static_cast<std::size_t>(j - 1)] = PeriodicSet::from_sorted(period(), std::move(out));
  }
}

bool SupportHierarchy::in_level(Index x, int j) const {
  require(j >= 0 && j <= M(), "level out of range");
  x = mod(x, period());
  for (int i = j; i < M(); ++i)
    if ((x / block(i)) % 2 == 0) return false;
  return true;
}

int SupportHierarchy::ring_of(Index x) const {
  for (int j = 0; j <= M(); ++j)
    if (in_level(x, j)) return j;
  return M();
}

PeriodicSet SupportHierarchy::annulus(int j) const {
  if (j < 1 || j > M()) fail("annulus index " + std::to_string(j) + " out of range 1.." + std::to_string(M()));
  return subtract(kept(j), kept(j - 1));
}

Interval SupportHierarchy::component_of(Index x, int j) const {
  require(j >= 0 && j <= M(), "level out of range");
  if (!in_level(x, j)) fail("component_of: x=" + std::to_string(x) + " is not in level " + std::to_string(j));
  Index B = block(j);
  return {floordiv(x, B) * B, B};
}

PeriodicSet SupportHierarchy::half_quarter_set(int j, bool even) const {
  require(j >= 1 && j <= M(), "half_quarter_set: level out of range");
  Index B = block(j - 1);
  require(B % 4 == 0, "half_quarter_set: block too short for quarter points");
  std::vector<Interval> out;
  for (Index t = even ? 0 : 1; t * B < period(); t += 2) out.push_back({t * B + B / 2, B / 4});
  return PeriodicSet::from_sorted(period(), std::move(out));
}

PeriodicStepFn spike_function(const SupportHierarchy& h) {
  StepFnBuilder b(h.period());
  Dyadic v = Dyadic::pow2(h.n());
  for (const auto& iv : h.kept(0).intervals())
    for (Index a = iv.start; a < iv.end(); a += h.block(0)) b.push(a, 1, v);
  return b.finish();
}

Rational margin_ratio(int M, const std::vector<int>& levels, int j, int kp, int lead_blocks) {
  require(j >= 1 && j <= M && static_cast<int>(levels.size()) == M + 1, "margin_ratio: bad level");
  if (j == M) return 1;
  // One level-j component in units of 2^n: [0, 2^{k_j}); annulus = even level-(j-1) sub-blocks.
  Index E = Index{1} << levels[static_cast<std::size_t>(j)];
  Index S = Index{1} << levels[static_cast<std::size_t>(j - 1)];
  auto annulus_upto = [&](Index b) {  // annulus blocks in [0, b)
    if (b <= 0) return Index{0};
    Index full = b / (2 * S), rest = b % (2 * S);
    return full * S + std::min(rest, S);
  };
  Index total = annulus_upto(E);
  Index lo = lead_blocks;
  __int128 reach = (static_cast<__int128>(1) << (kp + 1)) + 2;
  Index hi = reach > E ? 0 : E - static_cast<Index>(reach) + 1;  // b <= E - 2 - 2^{k'+1}
  Index good = hi > lo ? annulus_upto(hi) - annulus_upto(lo) : 0;
  Rational q(BigInt(static_cast<long>(good)), BigInt(static_cast<long>(total)));
  q.canonicalize();
  return q;
}

}  // namespace rstar
