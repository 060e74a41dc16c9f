#include <numeric>
#include <random>

#include <json.hpp>

#include "rstar/analysis.hpp"
#include "rstar/error.hpp"

namespace rstar {

Rational density_profile(const PeriodicSet& X, Index pi, Index lo, Index hi) {
  require(pi >= 1, "density_profile: period must be positive");
  Index k0 = (lo + pi - 1) / pi, k1 = hi / pi;  // aligned periods [k pi, (k+1) pi) inside [lo, hi)
  if (k0 >= k1) fail("density_profile: window shorter than one aligned period");
  Index c0 = X.count_in(k0 * pi, (k0 + 1) * pi);
  for (Index k = k0 + 1; k < k1; ++k)
    if (X.count_in(k * pi, (k + 1) * pi) != c0)
      fail("density_profile: density differs between periods " + std::to_string(k0) + " and " + std::to_string(k) +
           " (hypothesis violation)");
  return ratio(c0, pi);
}

IndependenceReport check_independence(const IndependenceInstance& in) {
  require(in.n >= 0 && in.n < 62, "independence: n out of range");
  require(in.pi1 >= 1 && in.pi2 >= 1, "independence: periods must be positive");
  if (std::gcd(in.pi1, in.pi2) != 1)
    fail("independence: periods " + std::to_string(in.pi1) + " and " + std::to_string(in.pi2) + " are not coprime");
  require(in.X1.period() == in.X2.period(), "independence: sets need a common period");
  require(in.X1.period() >= in.hi(), "independence: block exceeds the set period");
  const Index lo = in.lo(), hi = in.hi(), w0 = lo + in.theta1, w1 = hi - in.theta2;
  require(w0 < w1, "independence: margins cover the block");

  IndependenceReport r;
  Index c1 = in.X1.count_in(lo, hi), c2 = in.X2.count_in(lo, hi);
  Index both = intersect(in.X1, in.X2).count_in(lo, hi);
  r.lhs = Rational(BigInt(static_cast<long>(both)));
  r.rhs = Rational(BigInt(2) * static_cast<long>(c1) * static_cast<long>(c2)) / Rational(BigInt(1) << in.n);
  r.rhs.canonicalize();
  r.degenerate = c1 == 0 || c2 == 0 || c1 == hi - lo || c2 == hi - lo;
  r.pass = r.lhs < r.rhs;
  r.L1 = density_profile(in.X1, in.pi1, w0, w1);
  r.L2 = density_profile(in.X2, in.pi2, w0, w1);

  // Residue-pair path: on the window x is determined by (x mod pi1, x mod pi2).
  if (in.pi1 * in.pi2 <= (Index{1} << 20)) {
    const Index P = in.pi1 * in.pi2;
    std::vector<char> m1(static_cast<std::size_t>(in.pi1)), m2(static_cast<std::size_t>(in.pi2));
    // residue patterns read off the first full aligned period in the window
    Index a1 = (w0 + in.pi1 - 1) / in.pi1 * in.pi1, a2 = (w0 + in.pi2 - 1) / in.pi2 * in.pi2;
    for (Index i = 0; i < in.pi1; ++i) m1[static_cast<std::size_t>(i)] = in.X1.contains(a1 + i);
    for (Index i = 0; i < in.pi2; ++i) m2[static_cast<std::size_t>(i)] = in.X2.contains(a2 + i);
    Index n1 = std::count(m1.begin(), m1.end(), 1), n2 = std::count(m2.begin(), m2.end(), 1);
    // every full run of P consecutive integers meets each residue pair once
    Index len = w1 - w0, full = len / P;
    Index cnt = full * n1 * n2;
    for (Index x = w0 + full * P; x < w1; ++x) cnt += m1[static_cast<std::size_t>(x % in.pi1)] && m2[static_cast<std::size_t>(x % in.pi2)];
    // margins are counted directly
    PeriodicSet both_set = intersect(in.X1, in.X2);
    cnt += both_set.count_in(lo, w0) + both_set.count_in(w1, hi);
    r.lhs_crt = Rational(BigInt(static_cast<long>(cnt)));
  }
  return r;
}

namespace {

PeriodicSet residue_interval(Index period, Index pi, Index a, Index r, Index lo, Index hi) {
  std::vector<Interval> iv;
  for (Index c = lo / pi - 1; c * pi < hi; ++c) {
    Index s = std::max(lo, c * pi + a), e = std::min(hi, c * pi + a + r);
    if (s < e) iv.push_back({s, e - s});
  }
  return PeriodicSet::from_intervals(period, iv);
}

}  // namespace

IndependenceInstance random_instance(std::uint64_t& state, const CampaignOptions& opt) {
  require(opt.max_pi >= 3, "campaign: max_pi must be at least 3");
  require(opt.block_factor >= 1, "campaign: block_factor must be positive");
  std::mt19937_64 rng(state);
  auto uni = [&](Index lo, Index hi) { return lo + static_cast<Index>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
  IndependenceInstance in;
  do {
    in.pi1 = uni(2, opt.max_pi);
    in.pi2 = uni(2, opt.max_pi);
  } while (std::gcd(in.pi1, in.pi2) != 1);
  in.n = 0;
  while ((Index{1} << in.n) < opt.block_factor * in.pi1 * in.pi2) ++in.n;
  in.t = uni(0, 3);
  const Index lo = in.lo(), hi = in.hi(), P = (in.t + 2) << in.n;
  in.theta1 = uni(0, 64);
  in.theta2 = uni(0, 64);
  const Index w0 = lo + in.theta1, w1 = hi - in.theta2;
  auto make = [&](Index pi) {
    PeriodicSet core = residue_interval(P, pi, uni(0, pi - 1), uni(1, pi - 1), w0, w1);
    // margins: an arbitrary sub-interval on each side
    Index a = uni(lo, w0), b = uni(w1, hi);
    return unite(core, unite(PeriodicSet::from_intervals(P, {{lo, a - lo}}), PeriodicSet::from_intervals(P, {{b, hi - b}})));
  };
  in.X1 = make(in.pi1);
  in.X2 = make(in.pi2);
  state = rng();
  return in;
}

CampaignSummary independence_campaign(const CampaignOptions& opt) {
  require(opt.trials >= 1, "campaign: trials must be positive");
  CampaignSummary s;
  s.options = opt;
  std::uint64_t state = opt.seed;
  for (int i = 0; i < opt.trials; ++i) {
    IndependenceReport r = check_independence(random_instance(state, opt));
    ++s.trials;
    if (r.lhs_crt) {
      ++s.crt_checked;
      s.crt_equal += *r.lhs_crt == r.lhs;
    }
    if (r.degenerate) {
      ++s.degenerate;
      continue;
    }
    s.passed += r.pass;
    s.max_ratio = std::max(s.max_ratio, Rational(r.lhs / r.rhs).get_d());
  }
  return s;
}

std::string CampaignSummary::json() const {
  nlohmann::ordered_json j;
  j["seed"] = options.seed;
  j["trials"] = trials;
  j["max_pi"] = options.max_pi;
  j["block_factor"] = options.block_factor;
  j["degenerate"] = degenerate;
  j["passed"] = passed;
  j["crt_checked"] = crt_checked;
  j["crt_equal"] = crt_equal;
  j["max_ratio"] = max_ratio;
  j["pass"] = pass();
  return j.dump();
}

}  // namespace rstar
