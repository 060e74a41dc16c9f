#include "rstar/counterexample.hpp"

#include <sstream>

#include <json.hpp>

#include "rstar/error.hpp"

namespace rstar {

namespace {

// arctan(1/x): partial sums of the alternating series straddle the limit.
Enclosure arctan_inv(long x, int terms) {
  Rational s = 0, last = 0;
  BigInt pw = x;  // x^{2k+1}
  for (int k = 0; k < terms; ++k) {
    last = ratio(BigInt(1), BigInt(2 * k + 1) * pw);
    s += k % 2 == 0 ? last : Rational(-last);
    pw *= x * x;
  }
  Rational next = ratio(BigInt(1), BigInt(2 * terms + 1) * pw);
  Enclosure e{s, s};
  // the next term has sign (-1)^terms
  if (terms % 2 == 0) e.hi = s + next;
  else e.lo = s - next;
  return e;
}

Rational inv_pow4(int j) {
  BigInt m = j + 1;
  return ratio(BigInt(1), m * m * m * m);
}

}  // namespace

Enclosure pi_enclosure(int terms) {
  require(terms >= 1, "pi_enclosure: need at least one term");
  Enclosure a = arctan_inv(5, terms), b = arctan_inv(239, terms);
  return {16 * a.lo - 4 * b.hi, 16 * a.hi - 4 * b.lo};
}

Enclosure kappa_enclosure() {
  static const Enclosure k = [] {
    Enclosure p = pi_enclosure();
    return Enclosure{Rational(p.lo * p.lo / 6 - 1), Rational(p.hi * p.hi / 6 - 1)};
  }();
  return k;
}

std::string decimal(const Rational& x, int digits, bool round_up) {
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational y = x * scale;
  BigInt q;
  if (round_up) mpz_cdiv_q(q.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
  else mpz_fdiv_q(q.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
  bool neg = sgn(q) < 0;
  std::string d = BigInt(abs(q)).get_str();
  if (static_cast<int>(d.size()) <= digits) d = std::string(static_cast<std::size_t>(digits) - d.size() + 1, '0') + d;
  if (digits > 0) d.insert(d.size() - static_cast<std::size_t>(digits), ".");
  return (neg ? "-" : "") + d;
}

// ---- normalization and the factor inequality ----

NormalizedPair normalize(const Family& fam) {
  NormalizedPair p;
  p.period = fam.period;
  p.s = fam.params.s;
  p.M = fam.params.M;
  p.eps = fam.params.eps;
  p.source = &fam;
  std::vector<const PeriodicStepFn*> fs, gs;
  for (const auto& f : fam.phis) fs.push_back(&f);
  for (const auto& [k, g] : fam.psis)
    if (k >= fam.alpha && k <= fam.omega) gs.push_back(&g);
  p.phi_sum = sum(fs, fam.period);
  p.psi_sum = sum(gs, fam.period);
  Rational mf = p.phi_sum.mean_integral(), mg = p.psi_sum.mean_integral();
  require(sgn(mf) != 0, "normalize: sum of phis has zero mean");
  require(sgn(mg) != 0, "normalize: sum of psis has zero mean");
  p.phi_scale = 1 / mf;
  p.psi_scale = 1 / mg;
  return p;
}

SuperlevelQuery NormalizedPair::query(const Rational& tau, const VerifyOptions& opt) const {
  SuperlevelQuery q;
  q.phis = {&phi_sum};
  q.psis = {{0, &psi_sum}};
  q.threshold = raw_threshold(tau);
  q.l_max = period;
  q.strategy = opt.strategy;
  q.threads = opt.threads;
  q.samples = opt.samples;
  q.seed = opt.seed;
  q.keep_witness = false;
  return q;
}

SuperlevelResult pair_superlevel(const NormalizedPair& pair, const Rational& tau, const VerifyOptions& opt) {
  return superlevel(pair.query(tau, opt));
}

Rational factor_threshold(const NormalizedPair& pair, FactorMode mode) {
  if (mode == FactorMode::desk) return 1 / (pair.eps * pair.s * pow2q(-pair.M + 1));
  return Rational(pair.M - 1) / (8192 * pair.eps);
}

FactorReport factor_check(const NormalizedPair& pair, FactorMode mode, const VerifyOptions& opt) {
  FactorReport r;
  r.mode = mode;
  r.eps = pair.eps;
  r.threshold = factor_threshold(pair, mode);
  r.precondition = mode == FactorMode::desk || Rational(pair.s * (pair.M - 1)) * pow2q(-pair.M) / 2048 >= 1;
  SuperlevelResult res = pair_superlevel(pair, r.threshold, opt);
  r.measure = res.measure;
  r.half_width = res.half_width;
  if (opt.strategy == Strategy::sampled)
    r.pass = res.measure.get_d() - res.half_width > r.eps.get_d();
  else
    r.pass = r.measure > r.eps;
  return r;
}

std::string FactorReport::json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode == FactorMode::desk ? "desk" : "full";
  j["threshold_num"] = threshold.get_num().get_str();
  j["threshold_den"] = threshold.get_den().get_str();
  j["measure_num"] = measure.get_num().get_str();
  j["measure_den"] = measure.get_den().get_str();
  j["eps_num"] = eps.get_num().get_str();
  j["eps_den"] = eps.get_den().get_str();
  if (half_width > 0) j["half_width"] = half_width;
  j["relation"] = ">";
  j["precondition"] = precondition;
  j["pass"] = pass;
  return j.dump();
}

// ---- schedule ----

BigInt schedule_s(Index M) {
  require(M >= 2, "schedule: M must be at least 2");
  require(M <= kMaxScheduleM, "schedule: M = " + std::to_string(M) + " too large for exact evaluation");
  BigInt num = BigInt(2048) << static_cast<mp_bitcnt_t>(M);
  BigInt q;
  mpz_fdiv_q_ui(q.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(M - 1));
  return q + 1;
}

ScheduleEntry schedule_entry(int j, Index M, const Rational& eps) {
  require(j >= 1, "schedule: j starts at 1");
  require(sgn(eps) > 0, "schedule: eps must be positive");
  ScheduleEntry e;
  e.j = j;
  e.M = M;
  e.s = schedule_s(M);
  e.beta_q = inv_pow4(j);
  e.threshold_q = e.beta_q * Rational(BigInt(static_cast<long>(M - 1))) / (8192 * eps);
  Enclosure k = kappa_enclosure();
  Rational lo2 = k.lo * k.lo, hi2 = k.hi * k.hi;
  e.beta = {e.beta_q / hi2, e.beta_q / lo2};
  e.threshold = {e.threshold_q / hi2, e.threshold_q / lo2};
  // s (M-1) <= 4096 2^M
  e.s_bound = e.s * static_cast<long>(M - 1) <= BigInt(4096) << static_cast<mp_bitcnt_t>(M);
  return e;
}

std::vector<ScheduleEntry> schedule(int j_max, const Rational& eps) {
  require(j_max >= 1, "schedule: j_max must be at least 1");
  std::vector<ScheduleEntry> out;
  for (int j = 1; j <= j_max; ++j) {
    Index m = j + 1;
    out.push_back(schedule_entry(j, m * m * m * m * m, eps));
  }
  return out;
}

std::vector<ScheduleEntry> schedule_desk(const std::vector<Index>& Ms, const Rational& eps) {
  require(!Ms.empty(), "schedule: empty M sequence");
  std::vector<ScheduleEntry> out;
  for (std::size_t i = 0; i < Ms.size(); ++i) out.push_back(schedule_entry(static_cast<int>(i) + 1, Ms[i], eps));
  return out;
}

std::string schedule_csv(const std::vector<ScheduleEntry>& entries, bool desk) {
  std::ostringstream os;
  if (desk) os << "# desk mode: reduced M sequence, a demonstration of the formulas only\n";
  os << "j,M_j,s_j,beta_num,beta_den,threshold_lo,threshold_hi\n";
  for (const auto& e : entries)
    os << e.j << ',' << e.M << ',' << e.s.get_str() << ',' << e.beta_q.get_num().get_str() << ','
       << e.beta_q.get_den().get_str() << ',' << decimal(e.threshold.lo, 12) << ','
       << decimal(e.threshold.hi, 12, true) << '\n';
  return os.str();
}

SqrtBetaSum sqrt_beta_sum(int J) {
  require(J >= 1, "sqrt_beta_sum: J must be at least 1");
  SqrtBetaSum r;
  r.J = J;
  r.partial = 0;
  for (long m = 2; m <= J + 1; ++m) r.partial += ratio(1, m * m);
  Enclosure k = kappa_enclosure();
  r.sum = {r.partial / k.hi, r.partial / k.lo};
  // 1 - sum = (kappa - partial) / kappa
  Rational t_lo = k.lo - r.partial, t_hi = k.hi - r.partial;
  require(sgn(t_lo) > 0, "sqrt_beta_sum: kappa enclosure too coarse");
  r.tail = {t_lo / k.hi, t_hi / k.lo};
  r.tail_bound = t_lo > ratio(1, J + 2) && t_hi < ratio(1, J + 1);
  return r;
}

Rational product_lower_bound(const std::vector<ScheduleEntry>& entries, const std::vector<NormalizedPair>& pairs,
                             const Rational& z, const VerifyOptions& opt) {
  require(entries.size() == pairs.size(), "product_lower_bound: one pair per schedule entry");
  Rational best = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    // beta_j >= beta.lo, so thresholding at z / beta.lo undercounts
    Rational m = pair_superlevel(pairs[i], z / entries[i].beta.lo, opt).measure;
    if (m > best) best = m;
  }
  return best;
}

Rational product_lower_bound_scaled(const std::vector<ScheduleEntry>& entries, const std::vector<NormalizedPair>& pairs,
                                    const Rational& q, const VerifyOptions& opt) {
  require(entries.size() == pairs.size(), "product_lower_bound: one pair per schedule entry");
  Rational best = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Rational m = pair_superlevel(pairs[i], q / entries[i].beta_q, opt).measure;
    if (m > best) best = m;
  }
  return best;
}

}  // namespace rstar
