// STEP 2: an s-family from (s-1)-families embedded into the level hierarchy.
#include <algorithm>

#include "rstar/error.hpp"
#include "rstar/family.hpp"

namespace rstar {

namespace {

int ceil_log2(Index v) {
  int e = 0;
  while ((Index{1} << e) < v) ++e;
  return e;
}

Index ceil_index(const Rational& q) {
  BigInt r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!r.fits_slong_p()) infeasible("prime threshold does not fit in 63 bits");
  return static_cast<Index>(r.get_si());
}

Rational phi_mean(const Family& f) {
  Rational a = 0;
  for (const auto& g : f.phis) a += g.mean_integral();
  return a;
}

Rational psi_mean(const Family& f) {
  Rational a = 0;
  for (const auto& [k, g] : f.psis)
    if (k >= f.alpha && k <= f.omega) a += g.mean_integral();
  return a;
}

std::vector<Rational> psi_k_means(const Family& f) {
  std::vector<Rational> out;
  for (int k = f.alpha; k <= f.omega; ++k) {
    auto it = f.psis.find(k);
    out.push_back(it == f.psis.end() ? Rational(0) : it->second.mean_integral());
  }
  return out;
}

Rational exact_measure(const Family& f, unsigned threads) {
  SuperlevelQuery q = family_query(f);
  q.strategy = Strategy::spike_indexed;
  q.threads = threads;
  return superlevel(q).measure;
}

// Value of tile_truncate(f, pi) at x.
Dyadic rebased_at(const PeriodicStepFn& f, Index pi, Index x) {
  Index p = f.period(), L = (pi / p) * p, off = mod(x, pi);
  return off < L ? f.eval(off) : Dyadic();
}

// Pushes tile_truncate(f, pi) on [lo, hi) without materializing it.
void emit_rebased(StepFnBuilder& b, const PeriodicStepFn& f, Index pi, Index lo, Index hi) {
  Index p = f.period(), L = (pi / p) * p;
  Index x = lo;
  while (x < hi) {
    Index base = x - mod(x, pi), off = x - base;
    if (off < L) {
      Index e = std::min(hi, base + L);
      emit_range(b, f, off, off + (e - x), x);
      x = e;
    } else {
      x = std::min(hi, base + pi);
    }
  }
}

// SUBSTEP 2a branch: the (s-1)-family alone already beats eps.
Family early_exit(const FamilyParams& prm, const Family& f1) {
  const int M = prm.M;
  std::vector<int> levels(static_cast<std::size_t>(M + 1));
  for (int j = 0; j <= M; ++j) levels[static_cast<std::size_t>(j)] = j;
  int n = std::max({f1.n + 1, 2, ceil_log2(f1.period) - M});
  if (n + M > prm.slack.max_log2_period)
    infeasible("early exit: spike period 2^" + std::to_string(n + M) + " exceeds the period cap");
  SupportHierarchy h(n, levels, prm.slack.max_log2_period);
  Family out = rebase_family(f1, h.period());
  out.trace = {};
  out.params = prm;
  out.n = n;
  out.phis.resize(static_cast<std::size_t>(n - 1), PeriodicStepFn(h.period()));
  out.phis.push_back(spike_function(h));
  auto& tr = out.trace;
  tr.s = prm.s;
  tr.n = n;
  tr.levels = levels;
  tr.early_exit = true;
  tr.subs.push_back({1, f1.alpha, f1.omega, f1.period, f1.n, phi_mean(f1), psi_mean(f1), Rational(0), psi_k_means(f1)});
  return out;
}

}  // namespace

Family construct_step(const FamilyParams& prm, const SubBuilder& sub, const VerifyOptions& vopt) {
  prm.validate();
  require(prm.s >= 2, "construct_step needs s >= 2");
  const int M = prm.M, g = prm.slack.level_offset, cap = prm.slack.max_log2_period;
  const unsigned threads = std::max(1u, vopt.threads);

  std::vector<Family> F;  // F[j-1] is the (s-1)-family embedded in level j
  F.push_back(sub(prm.alpha));
  Rational mu1 = exact_measure(F[0], threads);
  if (mu1 > prm.eps) {
    Family out = early_exit(prm, F[0]);
    out.trace.subs[0].measure = mu1;
    out.trace.checks.push_back(make_check("early_exit_measure", "sub-family measure above eps", mu1, ">", prm.eps));
    return out;
  }

  std::vector<int> k(static_cast<std::size_t>(M + 1), 0), al(static_cast<std::size_t>(M + 1), 0),
      om(static_cast<std::size_t>(M + 1), 0);
  k[1] = 3;
  al[1] = prm.alpha;
  om[1] = F[0].omega;
  for (int j = 2; j <= M; ++j) {
    auto J = static_cast<std::size_t>(j);
    al[J] = k[J - 1] + g;
    F.push_back(sub(al[J]));
    om[J] = F.back().omega;
    if (j == M) {
      k[J] = om[J] + 1;
    } else {
      for (k[J] = om[J] + 1;; ++k[J]) {
        if (k[J] + 2 > cap) infeasible("level " + std::to_string(j) + ": no k_j with margin ratio > 1/2 under the period cap");
        if (margin_ratio(M, k, j, om[J], 1) > ratio(1, 2)) break;
      }
    }
  }
  const int kM = k.back();
  if (kM + 2 > cap) infeasible("level " + std::to_string(M) + ": k_M = " + std::to_string(kM) + " exceeds the period cap");

  // prime inner periods for the annuli j >= 2
  Index pmax = 0;
  for (int j = 2; j <= M; ++j) pmax = std::max(pmax, F[static_cast<std::size_t>(j - 1)].period);
  Index thr = std::max<Index>(3, ceil_index(prm.slack.rebase_factor * Rational(BigInt(static_cast<long>(pmax)))));
  thr = std::max(thr, ceil_index(prm.slack.prime_factor * pow2q(kM) *
                                 Rational(BigInt(static_cast<long>(F.back().period)))));
  std::vector<int> lv;
  for (int j = 2; j <= M; ++j) lv.push_back(j);
  std::vector<Index> residues;
  for (Index t = 1; t <= (Index{1} << kM); ++t) residues.push_back(t);
  PrimeAssignment primes = PrimeAssignment::assign_residues(kM, lv, residues, thr);
  const Index pistar = primes.max_prime();

  // n_s
  int n = 2;
  for (const auto& f : F) n = std::max(n, f.n + 1);
  n = std::max(n, ceil_log2(ceil_index(prm.slack.block_factor * Rational(BigInt(static_cast<long>(pistar))))));
  n = std::max(n, ceil_log2(F[0].period) - k[1]);
  if (n + kM > cap)
    infeasible("n_s = " + std::to_string(n) + " with k_M = " + std::to_string(kM) + " exceeds the period cap 2^" +
               std::to_string(cap) + " (binding: prime " + std::to_string(pistar) + ")");

  SupportHierarchy h(n, k, cap);
  const Index p = h.period(), B0 = h.block(0), nb = p / B0;
  int alpha = prm.alpha, omega = *std::max_element(om.begin() + 1, om.end());

  std::vector<int> ring(static_cast<std::size_t>(nb));
  for (Index b = 0; b < nb; ++b) ring[static_cast<std::size_t>(b)] = std::max(1, h.ring_of(b * B0));

  // size estimate before anything is built
  {
    double runs = 0;
    for (Index b = 0; b < nb; ++b) {
      int j = ring[static_cast<std::size_t>(b)];
      const Family& fj = F[static_cast<std::size_t>(j - 1)];
      double reps = j == 1 ? static_cast<double>(B0) / static_cast<double>(fj.period) + 1
                           : static_cast<double>(B0) / static_cast<double>(primes.prime(b + 1, j)) + 2;
      double per = 0;
      for (const auto& f : fj.phis) per += static_cast<double>(f.run_count());
      for (const auto& [kk, f] : fj.psis) per += static_cast<double>(f.run_count());
      runs += reps * per;
    }
    if (runs > static_cast<double>(prm.slack.max_runs))
      infeasible("assembled family needs ~" + std::to_string(static_cast<long long>(runs)) + " runs at period 2^" +
                 std::to_string(n + kM) + ", over the max_runs budget " + std::to_string(prm.slack.max_runs));
  }

  // get(j) returns the function of F_j to embed, or nullptr for zero
  auto assemble = [&](auto get) {
    StepFnBuilder out(p);
    for (Index b = 0; b < nb; ++b) {
      int j = ring[static_cast<std::size_t>(b)];
      const PeriodicStepFn* f = get(j);
      if (!f) continue;
      Index lo = b * B0, hi = lo + B0;
      if (j == 1) {
        emit_range(out, *f, lo, hi, lo);
        continue;
      }
      Index t0 = b == 0 ? nb : b;
      Dyadic v = rebased_at(*f, primes.prime(t0, j), lo);
      if (!v.is_zero()) out.push(lo, 1, v);
      emit_rebased(out, *f, primes.prime(b + 1, j), lo + 1, hi);
    }
    return out.finish();
  };

  Family fam;
  fam.params = prm;
  fam.n = n;
  fam.period = p;
  fam.alpha = alpha;
  fam.omega = omega;
  for (int i = 1; i < n; ++i) {
    fam.phis.push_back(assemble([&](int j) -> const PeriodicStepFn* {
      const auto& fj = F[static_cast<std::size_t>(j - 1)];
      return i <= fj.n ? &fj.phis[static_cast<std::size_t>(i - 1)] : nullptr;
    }));
  }
  fam.phis.push_back(spike_function(h));
  for (int kk = alpha; kk <= omega; ++kk) {
    fam.psis.emplace(kk, assemble([&](int j) -> const PeriodicStepFn* {
      const auto& fj = F[static_cast<std::size_t>(j - 1)];
      if (kk < fj.alpha || kk > fj.omega) return nullptr;
      auto it = fj.psis.find(kk);
      return it == fj.psis.end() ? nullptr : &it->second;
    }));
  }

  // trace
  auto& tr = fam.trace;
  tr.s = prm.s;
  tr.n = n;
  tr.levels = k;
  tr.primes = primes;
  for (int j = 1; j <= M; ++j) {
    auto J = static_cast<std::size_t>(j);
    const auto& fj = F[J - 1];
    tr.level_records.push_back({j, k[J], al[J], al[J], om[J], fj.period, fj.n});
    Rational mu = j == 1 ? mu1 : exact_measure(fj, threads);
    tr.subs.push_back({j, fj.alpha, fj.omega, fj.period, fj.n, phi_mean(fj), psi_mean(fj), mu, psi_k_means(fj)});
  }

  // relative bounds per region: level 1 (= ispt_{k_1}) and each annulus j >= 2
  const Rational s1 = prm.s - 1;
  for (int j = 1; j <= M; ++j) {
    PeriodicSet A = j == 1 ? h.kept(1) : h.annulus(j);
    Rational lam = A.measure(), ph = 0, ps = 0;
    for (int i = 0; i + 1 < n; ++i) ph += fam.phis[static_cast<std::size_t>(i)].integral_on(A);
    for (const auto& [kk, f] : fam.psis) ps += f.integral_on(A);
    ph /= Rational(BigInt(static_cast<long>(p)));
    ps /= Rational(BigInt(static_cast<long>(p)));
    std::string reg = j == 1 ? "level1" : "annulus" + std::to_string(j);
    tr.checks.push_back(make_check(reg + "_phi_lower", "embedded phi mass, lower", s1 * pow2q(-M - 1) * lam, "<", ph));
    tr.checks.push_back(make_check(reg + "_phi_upper", "embedded phi mass, upper", ph, "<", s1 * pow2q(-M + 1) * lam));
    tr.checks.push_back(make_check(reg + "_psi_lower", "embedded psi mass, lower", prm.rho * prm.eps * lam, "<", ps));
    tr.checks.push_back(make_check(reg + "_psi_upper", "embedded psi mass, upper", ps, "<", prm.eps * lam));
  }
  // rebasing keeps every sub-family sandwich strict
  for (int j = 2; j <= M; ++j) {
    const auto& fj = F[static_cast<std::size_t>(j - 1)];
    Rational fac = 1;
    for (const auto& [key, pi] : primes.table())
      if (key.first == j) {
        Rational f = Rational(BigInt(static_cast<long>((pi / fj.period) * fj.period))) / Rational(BigInt(static_cast<long>(pi)));
        fac = std::min(fac, f);
      }
    std::string id = "rebase" + std::to_string(j);
    tr.checks.push_back(make_check(id + "_phi", "rebased phi mean, lower", s1 * pow2q(-M - 1), "<", fac * phi_mean(fj)));
    tr.checks.push_back(make_check(id + "_psi", "rebased psi mean, lower", prm.rho * prm.eps, "<", fac * psi_mean(fj)));
  }
  return fam;
}

}  // namespace rstar
