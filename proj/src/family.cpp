#include "rstar/family.hpp"

#include <chrono>
#include <sstream>

#include <json.hpp>

#include "rstar/error.hpp"

namespace rstar {

using json = nlohmann::ordered_json;

// ------------------------------------------------------------------- params

void FamilyParams::validate() const {
  require(rho > ratio(1, 2) && rho < 1, "rho must lie in (1/2, 1)");
  require(eps > 0 && eps < ratio(1, 10), "eps must lie in (0, 1/10)");
  require(M >= 2, "M must be at least 2");
  require(alpha >= 1, "alpha must be at least 1");
  require(s >= 1, "s must be at least 1");
  require(slack.level_offset >= 1, "level_offset must be positive");
  require(slack.k1_factor >= 0 && slack.prime_factor >= 0 && slack.window_factor >= 0 && slack.block_factor >= 0 &&
              slack.rebase_factor >= 0,
          "slack factors must be non-negative");
  require(slack.max_runs >= 1, "max_runs must be positive");
  require(slack.max_log2_period >= 4 && slack.max_log2_period <= 62, "max_log2_period must lie in [4, 62]");
}

static std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

static int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail("params: '" + key + "' expects an integer, got '" + v + "'");
  }
}

FamilyParams FamilyParams::parse(const std::string& text) {
  FamilyParams p;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("params line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key == "rho") p.rho = parse_rational(val);
    else if (key == "eps") p.eps = parse_rational(val);
    else if (key == "M") p.M = parse_int(key, val);
    else if (key == "alpha") p.alpha = parse_int(key, val);
    else if (key == "s") p.s = parse_int(key, val);
    else if (key == "level_offset") p.slack.level_offset = parse_int(key, val);
    else if (key == "k1_factor") p.slack.k1_factor = parse_rational(val);
    else if (key == "prime_factor") p.slack.prime_factor = parse_rational(val);
    else if (key == "window_factor") p.slack.window_factor = parse_rational(val);
    else if (key == "block_factor") p.slack.block_factor = parse_rational(val);
    else if (key == "rebase_factor") p.slack.rebase_factor = parse_rational(val);
    else if (key == "max_log2_period") p.slack.max_log2_period = parse_int(key, val);
    else if (key == "max_runs") p.slack.max_runs = parse_int(key, val);
    else fail("params line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  p.validate();
  return p;
}

std::string FamilyParams::str() const {
  std::ostringstream os;
  os << "rho = " << rho.get_str() << '\n'
     << "eps = " << eps.get_str() << '\n'
     << "M = " << M << '\n'
     << "alpha = " << alpha << '\n'
     << "s = " << s << '\n'
     << "level_offset = " << slack.level_offset << '\n'
     << "k1_factor = " << slack.k1_factor.get_str() << '\n'
     << "prime_factor = " << slack.prime_factor.get_str() << '\n'
     << "window_factor = " << slack.window_factor.get_str() << '\n'
     << "block_factor = " << slack.block_factor.get_str() << '\n'
     << "rebase_factor = " << slack.rebase_factor.get_str() << '\n'
     << "max_log2_period = " << slack.max_log2_period << '\n'
     << "max_runs = " << slack.max_runs << '\n';
  return os.str();
}

// ------------------------------------------------------------------- checks

CheckRecord make_check(std::string id, std::string ref, const Rational& lhs, const std::string& rel, const Rational& rhs) {
  CheckRecord c{std::move(id), std::move(ref), lhs, rel, rhs, false};
  if (rel == "<") c.pass = lhs < rhs;
  else if (rel == ">") c.pass = lhs > rhs;
  else if (rel == "<=") c.pass = lhs <= rhs;
  else if (rel == ">=") c.pass = lhs >= rhs;
  else if (rel == "==") c.pass = lhs == rhs;
  else throw Error(Errc::internal, "unknown relation " + rel);
  return c;
}

std::string to_json_line(const CheckRecord& c) {
  json j;
  j["check_id"] = c.check_id;
  j["eq_ref"] = c.eq_ref;
  j["lhs_num"] = c.lhs.get_num().get_str();
  j["lhs_den"] = c.lhs.get_den().get_str();
  j["relation"] = c.relation;
  j["rhs_num"] = c.rhs.get_num().get_str();
  j["rhs_den"] = c.rhs.get_den().get_str();
  j["pass"] = c.pass;
  return j.dump();
}

// ------------------------------------------------------------------- helpers

static BigInt ceil_q(const Rational& q) {
  BigInt r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

static BigInt floor_q(const Rational& q) {
  BigInt r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

static int ceil_log2(const BigInt& v) {
  if (v <= 1) return 0;
  BigInt w = v - 1;
  return static_cast<int>(mpz_sizeinbase(w.get_mpz_t(), 2));
}

static Index to_index(const BigInt& v, const std::string& what) {
  if (!v.fits_slong_p()) infeasible(what + " does not fit in 63 bits");
  return static_cast<Index>(v.get_si());
}

Rational measure_bound(const FamilyParams& p) {
  Rational b = Rational(p.s * (p.M - 1)) * p.eps * pow2q(-p.M) / 2048;
  return b < p.eps ? b : p.eps;
}

// x in [0, N) with x mod pi < r
static Index residue_count(Index N, Index pi, Index r) { return (N / pi) * r + std::min(N % pi, r); }

// ------------------------------------------------------------ STEP 1 resolve

namespace {

struct Placement {
  bool ok = false;
  std::string why;
  std::vector<BlockRecord> blocks;
};

Placement place_blocks(const SupportHierarchy& h, const std::vector<int>& kp, const PrimeAssignment& primes,
                       const FamilyParams& prm) {
  Placement out;
  const int n = h.n();
  const Index B0 = h.block(0);
  const Index nblocks = h.period() / B0;
  Rational lowf = (1 + prm.rho) / 2 * prm.eps, highf = prm.eps;
  for (Index t = 1; t <= nblocks; ++t) {
    Index start = (t - 1) * B0;
    int lvl = std::max(1, h.ring_of(start));
    int lvl_next = std::max(1, h.ring_of(t * B0));
    Index lo = start + 1, hi = t * B0 + (lvl_next == lvl ? 1 : 0);
    int k = kp[static_cast<std::size_t>(lvl)];
    Rational A = lowf * pow2q(n - k), Bq = highf * pow2q(n - k);
    BigInt need_min = floor_q(A) + 1, need_max = ceil_q(Bq) - 1;
    Index pi = primes.prime(t, 1);
    auto count = [&](Index r) { return residue_count(hi, pi, r) - residue_count(lo, pi, r); };
    if (need_min > need_max || BigInt(static_cast<long>(count(pi))) < need_min) {
      out.why = "level " + std::to_string(lvl) + " window (" + A.get_str() + ", " + Bq.get_str() +
                ") contains no attainable count at block t=" + std::to_string(t);
      return out;
    }
    Index nm = static_cast<Index>(need_min.get_si());
    Index a = 0, b = pi;  // smallest r with count(r) >= nm
    while (a < b) {
      Index mid = a + (b - a) / 2;
      if (count(mid) >= nm)
        b = mid;
      else
        a = mid + 1;
    }
    Index c = count(a);
    if (BigInt(static_cast<long>(c)) > need_max) {
      out.why = "level " + std::to_string(lvl) + " window (" + A.get_str() + ", " + Bq.get_str() +
                ") jumped over by residue step at block t=" + std::to_string(t);
      return out;
    }
    out.blocks.push_back({t, lvl, pi, a, c});
  }
  out.ok = true;
  return out;
}

}  // namespace

ResolvedParams resolve_parameters(const FamilyParams& prm) {
  prm.validate();
  const int M = prm.M, g = prm.slack.level_offset, cap = prm.slack.max_log2_period;
  ResolvedParams R;
  R.levels.assign(static_cast<std::size_t>(M + 1), 0);
  R.k_prime.assign(static_cast<std::size_t>(M + 1), 0);
  auto& k = R.levels;
  auto& kp = R.k_prime;
  k[1] = std::max(3, static_cast<int>(ceil_q(prm.slack.k1_factor * prm.alpha).get_si()));
  kp[1] = prm.alpha;
  for (int j = 2; j <= M; ++j) {
    auto J = static_cast<std::size_t>(j);
    kp[J] = k[J - 1] + g;
    if (j == M) {
      k[J] = kp[J] + 1;
    } else {
      for (k[J] = kp[J] + 1;; ++k[J]) {
        if (k[J] + 2 > cap) infeasible("level " + std::to_string(j) + ": no k_j with margin ratio > 1/2 under the period cap");
        if (margin_ratio(M, k, j, kp[J], 0) > ratio(1, 2)) break;
      }
    }
  }
  const int kM = k.back();
  if (kM + 2 > cap) infeasible("level chain needs k_M = " + std::to_string(kM) + " beyond period cap 2^" + std::to_string(cap));
  R.omega = *std::max_element(kp.begin() + 1, kp.end());

  int kmax = R.omega;
  Rational width = (1 - prm.rho) / 2 * prm.eps * pow2q(-kmax);
  BigInt thr = 3;
  thr = std::max(thr, ceil_q(prm.slack.prime_factor * pow2q(kM + 1)));
  if (sgn(width) > 0) thr = std::max(thr, ceil_q(prm.slack.window_factor / width));
  R.threshold = to_index(thr, "prime threshold");
  std::vector<Index> residues;
  for (Index t = 1; t <= (Index{1} << kM); ++t) residues.push_back(t);
  R.primes = PrimeAssignment::assign_residues(kM, {1}, residues, R.threshold);

  BigInt need = ceil_q(prm.slack.block_factor * Rational(BigInt(static_cast<long>(R.primes.max_prime()))));
  int n0 = std::max(2, ceil_log2(need));
  std::string why = "2^n >= block_factor * max prime needs n >= " + std::to_string(n0) + " with k_M = " + std::to_string(kM);
  for (int n = n0; n + kM <= cap; ++n) {
    SupportHierarchy h(n, k, cap);
    Placement pl = place_blocks(h, kp, R.primes, prm);
    if (pl.ok) {
      R.n = n;
      R.blocks = std::move(pl.blocks);
      return R;
    }
    why = pl.why;
  }
  infeasible("no feasible n up to period cap 2^" + std::to_string(cap) + "; last binding constraint: " + why);
}

// ---------------------------------------------------------------- STEP 1 build

Family construct_s1(const FamilyParams& prm) {
  require(prm.s == 1, "construct_s1 needs s = 1");
  ResolvedParams R = resolve_parameters(prm);
  SupportHierarchy h(R.n, R.levels, prm.slack.max_log2_period);
  const Index p = h.period();
  const int M = prm.M;

  std::vector<std::vector<Interval>> supp(static_cast<std::size_t>(M + 1));
  for (const auto& b : R.blocks) {
    Index lo = (b.t - 1) * h.block(0) + 1;
    Index hi_end = b.t * h.block(0) + (std::max(1, h.ring_of(b.t * h.block(0))) == b.j ? 1 : 0);
    for (Index c = lo / b.prime; c * b.prime < hi_end; ++c) {
      Index a = std::max(lo, c * b.prime), e = std::min(hi_end, c * b.prime + b.r);
      if (a < e) supp[static_cast<std::size_t>(b.j)].push_back({a, e - a});
    }
  }

  Family fam;
  fam.params = prm;
  fam.n = R.n;
  fam.period = p;
  fam.alpha = prm.alpha;
  fam.omega = R.omega;
  fam.phis.assign(static_cast<std::size_t>(R.n - 1), PeriodicStepFn(p));
  fam.phis.push_back(spike_function(h));
  for (int k = fam.alpha; k <= fam.omega; ++k) fam.psis.emplace(k, PeriodicStepFn(p));
  for (int j = 1; j <= M; ++j) {
    int kp = R.k_prime[static_cast<std::size_t>(j)];
    PeriodicSet s = PeriodicSet::from_intervals(p, std::move(supp[static_cast<std::size_t>(j)]));
    PeriodicStepFn f = PeriodicStepFn::indicator(s, Dyadic::pow2(kp));
    auto& slot = fam.psis.at(kp);
    slot = slot.is_zero() ? f : add(slot, f);
  }

  auto& tr = fam.trace;
  tr.s = 1;
  tr.n = R.n;
  tr.levels = R.levels;
  tr.primes = R.primes;
  tr.blocks = R.blocks;
  for (int j = 1; j <= M; ++j) {
    int kp = R.k_prime[static_cast<std::size_t>(j)];
    tr.level_records.push_back({j, R.levels[static_cast<std::size_t>(j)], kp, kp, kp, 0, 0});
  }
  return fam;
}

// ------------------------------------------------------------- rebase / verify

Family rebase_family(const Family& fam, Index p_new) {
  if (p_new < fam.period)
    fail("rebase: new period " + std::to_string(p_new) + " is smaller than " + std::to_string(fam.period));
  Family out = fam;
  out.period = p_new;
  for (auto& f : out.phis) f = tile_truncate(f, p_new);
  for (auto& [k, g] : out.psis) g = tile_truncate(g, p_new);
  if (p_new != fam.period) out.trace.rebased_from = fam.period;
  return out;
}

SuperlevelQuery family_query(const Family& fam) {
  SuperlevelQuery q;
  for (const auto& f : fam.phis) q.phis.push_back(&f);
  for (const auto& [k, g] : fam.psis)
    if (k >= fam.alpha && k <= fam.omega) q.psis.push_back({k, &g});
  q.threshold = 1;
  q.l_max = fam.period;
  q.keep_witness = false;
  return q;
}

VerificationReport verify_family(const Family& fam, const VerifyOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  const FamilyParams& prm = fam.params;
  VerificationReport r;
  r.strategy = opt.strategy;
  r.period = fam.period;
  r.s = prm.s;

  SuperlevelQuery q = family_query(fam);
  q.strategy = opt.strategy;
  q.threads = opt.threads;
  q.samples = opt.samples;
  q.seed = opt.seed;
  SuperlevelResult res = superlevel(q);
  r.measure = res.measure;
  r.half_width = res.half_width;
  r.bound = measure_bound(prm);
  if (opt.strategy == Strategy::sampled)
    r.ineq1 = res.measure.get_d() - res.half_width > r.bound.get_d();
  else
    r.ineq1 = r.measure > r.bound;

  r.phi_sum = 0;
  for (const auto& f : fam.phis) r.phi_sum += f.mean_integral();
  r.phi_lo = Rational(prm.s) * pow2q(-prm.M - 1);
  r.phi_hi = Rational(prm.s) * pow2q(-prm.M + 1);
  r.ineq2 = r.phi_lo < r.phi_sum && r.phi_sum < r.phi_hi;

  r.psi_sum = 0;
  for (const auto& [k, g] : fam.psis)
    if (k >= fam.alpha && k <= fam.omega) r.psi_sum += g.mean_integral();
  r.psi_lo = prm.rho * prm.eps;
  r.psi_hi = prm.eps;
  r.ineq3 = r.psi_lo < r.psi_sum && r.psi_sum < r.psi_hi;

  r.non_negative = true;
  for (const auto& f : fam.phis) r.non_negative = r.non_negative && f.non_negative() && f.period() == fam.period;
  for (const auto& [k, g] : fam.psis) r.non_negative = r.non_negative && g.non_negative() && g.period() == fam.period;
  r.period_ok = fam.period >= fam.omega;
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

static json qjson(const Rational& q, const std::string& name) {
  json j;
  j[name + "_num"] = q.get_num().get_str();
  j[name + "_den"] = q.get_den().get_str();
  return j;
}

std::string VerificationReport::json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["s"] = s;
  j["period"] = std::to_string(period);
  j["strategy"] = to_string(strategy);
  ordered_json i1 = qjson(measure, "measure");
  i1.update(qjson(bound, "bound"));
  i1["relation"] = "measure > bound";
  if (strategy == Strategy::sampled) i1["half_width"] = half_width;
  i1["pass"] = ineq1;
  j["ineq1"] = i1;
  auto sandwich = [](const Rational& lo, const Rational& v, const Rational& hi, bool pass) {
    ordered_json o = qjson(lo, "lower");
    o.update(qjson(v, "value"));
    o.update(qjson(hi, "upper"));
    o["relation"] = "lower < value < upper";
    o["pass"] = pass;
    return o;
  };
  j["ineq2"] = sandwich(phi_lo, phi_sum, phi_hi, ineq2);
  j["ineq3"] = sandwich(psi_lo, psi_sum, psi_hi, ineq3);
  j["non_negative"] = non_negative;
  j["period_ge_omega"] = period_ok;
  j["pass"] = pass();
  return j.dump(2) + "\n";
}

// ------------------------------------------------------------------ dispatch

Family construct(const FamilyParams& prm, const VerifyOptions& vopt) {
  prm.validate();
  if (prm.s == 1) return construct_s1(prm);
  auto memo = std::make_shared<std::map<int, Family>>();
  SubBuilder sub = [prm, vopt, memo](int a) {
    auto it = memo->find(a);
    if (it != memo->end()) return it->second;
    FamilyParams q = prm;
    q.s = prm.s - 1;
    q.alpha = a;
    Family f = construct(q, vopt);
    memo->emplace(a, f);
    return f;
  };
  return construct_step(prm, sub, vopt);
}

}  // namespace rstar
