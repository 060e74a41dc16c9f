// Re-derivation of the construction's intermediate sets (T_1, X_{t0,t1}, I(j), X-bar(j), ...)
// from the family's functions, with exact checks of every finite inequality about them.
#include <algorithm>
#include <cmath>
#include <functional>

#include "rstar/analysis.hpp"
#include "rstar/error.hpp"

namespace rstar {

namespace {

using Pieces = std::vector<Interval>;  // sorted, disjoint, lifted coordinates

Rational qi(Index v) { return Rational(BigInt(static_cast<long>(v))); }

// s ∩ [lo, hi), lifted
Pieces pieces_in(const PeriodicSet& s, Index lo, Index hi) {
  Pieces out;
  const auto& iv = s.intervals();
  if (iv.empty() || lo >= hi) return out;
  const Index p = s.period();
  Index base = lo - mod(lo, p), r = lo - base;
  auto it = std::upper_bound(iv.begin(), iv.end(), r, [](Index v, const Interval& i) { return v < i.end(); });
  std::size_t i = static_cast<std::size_t>(it - iv.begin());
  for (;;) {
    if (i == iv.size()) {
      i = 0;
      base += p;
    }
    Index a = base + iv[i].start, b = base + iv[i].end();
    if (a >= hi) break;
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (a < b) out.push_back({a, b - a});
    ++i;
  }
  return out;
}

// {c - z : z in s ∩ [zlo, zhi)}
Pieces reflect(const Pieces& z, Index c) {
  Pieces out;
  for (auto it = z.rbegin(); it != z.rend(); ++it) out.push_back({c - it->end() + 1, it->length});
  return out;
}

Index total(const Pieces& a) {
  Index t = 0;
  for (const auto& i : a) t += i.length;
  return t;
}

Index inter_count(const Pieces& a, const Pieces& b) {
  Index c = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    Index lo = std::max(a[i].start, b[j].start), hi = std::min(a[i].end(), b[j].end());
    if (lo < hi) c += hi - lo;
    if (a[i].end() < b[j].end())
      ++i;
    else
      ++j;
  }
  return c;
}

double margin_of(const Rational& lhs, const std::string& rel, const Rational& rhs) {
  if (rel == "==") return lhs == rhs ? 0.0 : -1.0;
  Rational d = rel[0] == '<' ? rhs - lhs : lhs - rhs;
  Rational a = abs(rhs);
  return sgn(a) == 0 ? d.get_d() : Rational(d / a).get_d();
}

// Aggregates many instances of one inequality into its worst instance.
class Agg {
public:
  Agg(std::string id, std::string ref, std::string rel) : id_(std::move(id)), ref_(std::move(ref)), rel_(std::move(rel)) {}

  // make() builds the exact (lhs, rhs) pair; called only for a new worst instance
  template <class Make, class Where>
  void add(bool pass, double margin, Make&& make, Where&& where) {
    ++count_;
    if (!pass) ++fails_;
    if (worst_ && margin >= margin_) return;
    auto [l, r] = make();
    worst_ = make_check(id_, ref_, l, rel_, r);
    margin_ = margin;
    where_ = where();
  }
  // k instances known to pass with the best possible margin
  template <class Make, class Where>
  void pass_many(std::size_t k, Make&& make, Where&& where) {
    if (k == 0) return;
    count_ += k;
    if (worst_) return;
    auto [l, r] = make();
    worst_ = make_check(id_, ref_, l, rel_, r);
    margin_ = 1.0;
    where_ = where();
  }
  // integer lhs against a fixed threshold
  void add_int(Index lhs, const Rational& rhs, double rhs_d, const std::string& where) {
    bool pass;
    if (rel_ == ">")
      pass = Rational(qi(lhs)) > rhs;
    else if (rel_ == "<")
      pass = Rational(qi(lhs)) < rhs;
    else
      pass = Rational(qi(lhs)) == rhs;
    double l = static_cast<double>(lhs);
    double m = rel_ == "==" ? (pass ? 0.0 : -1.0) : (rel_ == ">" ? l - rhs_d : rhs_d - l) / (rhs_d != 0 ? std::abs(rhs_d) : 1.0);
    add(pass, m, [&] { return std::make_pair(qi(lhs), rhs); }, [&] { return where; });
  }
  void add(const Rational& lhs, const Rational& rhs, const std::string& where) {
    bool pass = make_check(id_, ref_, lhs, rel_, rhs).pass;
    add(pass, margin_of(lhs, rel_, rhs), [&] { return std::make_pair(lhs, rhs); }, [&] { return where; });
  }
  // lhs > num/den (or <) with integers, exact
  template <class Where>
  void add_frac(Index lhs, Index num, Index den, Where&& where) {
    __int128 L = static_cast<__int128>(lhs) * den, R = num;
    bool pass = rel_ == ">" ? L > R : rel_ == "<" ? L < R : L == R;
    double rd = static_cast<double>(num) / static_cast<double>(den), l = static_cast<double>(lhs);
    double m = (rel_ == ">" ? l - rd : rd - l) / (rd != 0 ? rd : 1.0);
    if (rel_ == "==") m = pass ? 0.0 : -1.0;
    add(pass, m, [&] { return std::make_pair(qi(lhs), ratio(num, den)); }, where);
  }
  void flush(std::vector<CheckRecord>& out) const {
    if (!worst_) return;
    CheckRecord c = *worst_;
    c.check_id = id_ + " [" + std::to_string(count_) + " instances, " + std::to_string(fails_) + " failing, worst at " +
                 where_ + "]";
    c.pass = fails_ == 0;
    out.push_back(std::move(c));
  }

private:
  std::string id_, ref_, rel_;
  std::size_t count_ = 0, fails_ = 0;
  std::optional<CheckRecord> worst_;
  double margin_ = 0;
  std::string where_;
};

struct XSet {
  int k = 0;
  Index t1 = 0;
  Rational mean;  // s >= 2: mean of the rebased sub-family psi_k feeding this set
  Pieces pcs;
  Index size = 0;
};

struct Sweep {
  Index uni = 0;
  std::vector<Index> excl;      // points of X_i in no other X
  std::vector<Index> excl_old;  // ... and not in the old set
  std::vector<Index> old_ov;    // points of X_i in the old set
  std::map<std::pair<std::size_t, std::size_t>, Index> pairs;
  std::map<int, Pieces> fresh;  // X'_{t0,k}
  Pieces uni_pcs;
};

Sweep sweep(const std::vector<XSet>& xs, const Pieces& old) {
  struct Ev {
    Index pos;
    int delta;
    std::size_t id;  // xs.size() marks the old set
  };
  const std::size_t N = xs.size();
  std::vector<Ev> ev;
  for (std::size_t i = 0; i < N; ++i)
    for (const auto& p : xs[i].pcs) {
      ev.push_back({p.start, +1, i});
      ev.push_back({p.end(), -1, i});
    }
  for (const auto& p : old) {
    ev.push_back({p.start, +1, N});
    ev.push_back({p.end(), -1, N});
  }
  std::sort(ev.begin(), ev.end(), [](const Ev& a, const Ev& b) { return a.pos < b.pos || (a.pos == b.pos && a.delta < b.delta); });
  Sweep s;
  s.excl.assign(N, 0);
  s.excl_old.assign(N, 0);
  s.old_ov.assign(N, 0);
  std::vector<std::size_t> act;
  bool in_old = false;
  auto credit = [](Pieces& v, Index a, Index b) {
    if (!v.empty() && v.back().end() == a)
      v.back().length += b - a;
    else
      v.push_back({a, b - a});
  };
  for (std::size_t e = 0; e < ev.size();) {
    Index pos = ev[e].pos;
    for (; e < ev.size() && ev[e].pos == pos; ++e) {
      if (ev[e].id == N) {
        in_old = ev[e].delta > 0;
      } else if (ev[e].delta > 0) {
        act.push_back(ev[e].id);
      } else {
        act.erase(std::find(act.begin(), act.end(), ev[e].id));
      }
    }
    if (e == ev.size()) break;
    Index len = ev[e].pos - pos;
    if (act.empty()) continue;
    s.uni += len;
    credit(s.uni_pcs, pos, pos + len);
    if (in_old)
      for (auto i : act) s.old_ov[i] += len;
    if (act.size() == 1) {
      s.excl[act[0]] += len;
      if (!in_old) {
        s.excl_old[act[0]] += len;
        credit(s.fresh[xs[act[0]].k], pos, pos + len);
      }
    } else {
      for (std::size_t a = 0; a < act.size(); ++a)
        for (std::size_t b = 0; b < act.size(); ++b)
          if (a != b) s.pairs[{act[a], act[b]}] += len;
    }
  }
  return s;
}

}  // namespace

std::vector<CheckRecord> audit_trace(const Family& fam, const AuditOptions& opt) {
  const ConstructionTrace& tr = fam.trace;
  if (tr.empty()) fail("audit: family carries no construction trace");
  if (tr.rebased_from != 0) fail("audit: family was rebased; audit the family it was rebased from");
  const FamilyParams& prm = fam.params;
  const int M = prm.M, s = tr.s;
  SupportHierarchy h = tr.hierarchy();
  require(h.period() == fam.period, "audit: hierarchy period does not match the family");
  const int n = h.n();
  const Index B0 = h.block(0), p = fam.period;
  const PeriodicStepFn& spike = fam.phis.back();

  std::vector<CheckRecord> out = tr.checks;
  {
    PeriodicStepFn ref = spike_function(h);
    out.push_back(make_check("spike function matches the hierarchy", "phi_n is 2^n on kept level-0 block starts",
                             spike == ref ? 1 : 0, "==", 1));
    out.push_back(make_check("spike mean", "mean of phi_n is 2^-M", spike.mean_integral(), "==", pow2q(-M)));
  }
  if (tr.early_exit) return out;

  const Rational eps = prm.eps, rho = prm.rho;
  if (s == 1 && !tr.blocks.empty()) {
    // psi mass of every recorded offset block, recounted from the function
    Agg lo_a("psi block window lower", "((1+rho)/2) eps 2^{-k'} 2^n < psi_{k'} mass of the offset block", ">");
    Agg hi_a("psi block window upper", "psi_{k'} mass of the offset block < eps 2^{-k'} 2^n", "<");
    Agg rec_a("psi block recorded count", "recount equals the construction record", "==");
    std::map<int, PeriodicSet> supp1;
    for (const BlockRecord& b : tr.blocks) {
      const int kp = tr.level_records.at(static_cast<std::size_t>(b.j - 1)).k_prime;
      auto it = supp1.find(kp);
      if (it == supp1.end()) it = supp1.emplace(kp, fam.psis.at(kp).support()).first;
      Index c = it->second.count_in((b.t - 1) * B0 + 1, b.t * B0 + 1);
      Rational hi = eps * pow2q(n - kp), lo = (1 + rho) / 2 * hi;
      std::string w = "t=" + std::to_string(b.t) + " j=" + std::to_string(b.j);
      lo_a.add_int(c, lo, lo.get_d(), w);
      hi_a.add_int(c, hi, hi.get_d(), w);
      rec_a.add_int(c, qi(b.count), static_cast<double>(b.count), w);
    }
    lo_a.flush(out);
    hi_a.flush(out);
    rec_a.flush(out);
  }
  std::vector<PeriodicSet> xbar, olds;
  Rational xbar_total = 0;

  for (int j = 2; j <= M; ++j) {
    const LevelRecord& lr = tr.level_records.at(static_cast<std::size_t>(j - 1));
    std::vector<int> ks;
    if (s == 1)
      ks.push_back(lr.k_prime);
    else
      for (int k = lr.alpha; k <= lr.omega; ++k) ks.push_back(k);
    const int kmax = ks.back(), kprev = h.k(j - 1);
    const Index Bm = h.block(j - 1);
    const std::string J = "j=" + std::to_string(j) + " ";

    // qualifying blocks: inside X'(j) and the even (1/2,3/4) quarters
    std::vector<Index> T0;
    PeriodicSet ann = h.annulus(j);
    for (const auto& iv : ann.intervals())
      for (Index a = iv.start; a < iv.end(); a += Bm) {
        Interval comp = h.component_of(a, j);
        for (Index t0 = (a + Bm / 2) / B0; t0 < (a + 3 * Bm / 4) / B0; ++t0) {
          Index x0 = t0 * B0, xl = x0 + B0 - 1;
          bool ok = j == M || xl + 2 * (B0 << kmax) + B0 <= comp.end();
          if (s >= 2 && j < M) ok = ok && x0 - B0 >= comp.start;
          if (ok) T0.push_back(t0);
        }
      }
    std::vector<Interval> Iiv;
    for (Index t0 : T0) Iiv.push_back({t0 * B0, B0});
    PeriodicSet I = PeriodicSet::from_intervals(p, Iiv);
    out.push_back(make_check(J + "qualifying blocks I(j)", "I(j) measure vs 1/16 of level-j support", I.measure(), ">",
                             pow2q(-M + j) / 16));

    std::map<int, PeriodicSet> supp;
    for (int k : ks) supp.emplace(k, fam.psis.at(k).support());

    // old points (s >= 2): superlevel of the embedded (s-1)-functions, l <= pi*
    PeriodicSet old(p);
    if (s >= 2) {
      SuperlevelQuery q;
      for (std::size_t i = 0; i + 1 < fam.phis.size(); ++i) q.phis.push_back(&fam.phis[i]);
      for (int k : ks) q.psis.push_back({k, &fam.psis.at(k)});
      q.threshold = 1;
      q.l_max = tr.primes.max_prime();
      q.restrict_to = &I;
      q.keep_witness = true;
      q.threads = opt.threads;
      old = *superlevel(q).witness;
    }
    olds.push_back(old);

    const SubFamilySummary* sub = s >= 2 ? &tr.subs.at(static_cast<std::size_t>(j - 1)) : nullptr;
    const Index nblocks = p / B0;
    auto rebased_mean = [&](Index t, int k) -> Rational {
      Index pi = tr.primes.prime(mod(t - 1, nblocks) + 1, j);  // offset blocks are numbered 1..nblocks
      Rational fac = qi((pi / sub->period) * sub->period) / qi(pi);
      return fac * sub->psi_k_means.at(static_cast<std::size_t>(k - sub->alpha));
    };

    Agg a_tstar(J + "T* count", "number of kept quarter intervals in the window = 2^{k'-k_{j-1}-2}", "==");
    Agg a_t1(J + "T_1 count", "#T_1(t0) = (1/2)^j 2^{k'-3}", "==");
    Agg a_xlo(J + "X_{t0,t1} lower", s == 1 ? "((1+rho)/2) eps 2^{-k'} 2^n < |X_{t0,t1}|" : "(1/4) mean(psi) 2^{-k'} 2^n < |X_{t0,t1,k'}|", ">");
    Agg a_xhi(J + "X_{t0,t1} upper", s == 1 ? "|X_{t0,t1}| < eps 2^{-k'} 2^n" : "|X_{t0,t1,k'}| < 2 mean(psi) 2^{-k'} 2^n", "<");
    Agg a_lemma(J + "pairwise independence", "|X ∩ X'| < 2 |X| |X'| / 2^n", "<");
    Agg a_pair(J + "pairwise bound", s == 1 ? "|X ∩ X'| < 2 eps 2^{-k'} |X|" : "|X ∩ X'| < 4 2^{-k''} mean(psi'') |X|", "<");
    Agg a_excl(J + "exclusive part", s == 1 ? "|X minus others| > |X|/2" : "|X minus others| > 3|X|/4", ">");
    Agg a_union(J + "union lower bound", "|X_{t0}| > (eps/32)(1/2)^j 2^n", ">");
    Agg a_oldsz(J + "old points", "|X_{t0,s-1}| < 2^n/8", "<");
    Agg a_oldov(J + "old-set overlap", "|X ∩ X_{t0,s-1}| < |X|/4", "<");
    Agg a_new(J + "new contribution per set", "|X minus (old ∪ others)| > |X|/2", ">");
    Agg a_fdis(J + "X'_{t0,k'} disjointness", "X'_{t0,k'} ∩ X'_{t0,k''} empty", "==");
    Agg a_fnew(J + "new contribution", "|X'_{t0}| > (eps/128)(1/2)^j 2^n", ">");
    Agg a_fold(J + "new points avoid old points", "X'_{t0} ∩ X_{t0,s-1} empty", "==");

    // per-k thresholds, s = 1
    std::map<int, std::pair<Rational, Rational>> win;
    for (int k : ks) win[k] = {(1 + rho) / 2 * eps * pow2q(n - k), eps * pow2q(n - k)};
    const Rational union_bd = eps / 32 * pow2q(n - j), fresh_bd = eps / 128 * pow2q(n - j), old_bd = pow2q(n - 3);

    Pieces newpts;  // union of X_{t0} (s=1) or X'_{t0} (s>=2)
    Index sweep_union = 0;
    for (Index t0 : T0) {
      const Index x0 = t0 * B0;
      auto at = [t0] { return "t0=" + std::to_string(t0); };
      std::vector<XSet> xs;
      for (int k : ks) {
        Index wlo = x0 + (B0 << (k - 1)), whi = x0 + (B0 << k);
        Index ts_lo = (wlo - Bm / 2 + Bm - 1) / Bm, nstar = 0;
        std::vector<Index> T1;
        for (Index ts = ts_lo; ts * Bm + 3 * Bm / 4 <= whi; ++ts) {
          Index qlo = ts * Bm + Bm / 2;
          if (qlo < wlo || !h.in_level(qlo, j - 1)) continue;
          ++nstar;
          for (Index b = qlo / B0; b < (qlo + Bm / 4) / B0; ++b)
            if (spike.eval(b * B0) == Dyadic::pow2(n)) T1.push_back(b);
        }
        const std::string wk = at() + " k'=" + std::to_string(k);
        a_tstar.add(qi(nstar), pow2q(k - kprev - 2), wk);
        a_t1.add(qi(static_cast<Index>(T1.size())), pow2q(k - 3 - j), wk);
        for (Index t1 : T1) {
          Index zlo = (2 * t1 - t0 - 1) * B0 + 1, zhi = (2 * t1 - t0) * B0 + 1;
          XSet x;
          x.k = k;
          x.t1 = t1;
          x.pcs = reflect(pieces_in(supp.at(k), zlo, zhi), 2 * t1 * B0);
          x.size = total(x.pcs);
          const std::string w = wk + " t1=" + std::to_string(t1);
          if (s == 1) {
            const auto& [lo, hi] = win.at(k);
            a_xlo.add_int(x.size, lo, lo.get_d(), w);
            a_xhi.add_int(x.size, hi, hi.get_d(), w);
          } else {
            x.mean = rebased_mean(2 * t1 - t0, k);
            a_xlo.add(qi(x.size), x.mean * pow2q(n - k) / 4, w);
            a_xhi.add(qi(x.size), 2 * x.mean * pow2q(n - k), w);
          }
          xs.push_back(std::move(x));
        }
      }
      Pieces oldp = s >= 2 ? pieces_in(old, x0, x0 + B0) : Pieces{};
      Sweep sw = sweep(xs, oldp);

      // pairwise: only intersecting pairs (or empty sets) need exact arithmetic
      const std::size_t N = xs.size();
      bool fast = true;
      for (const auto& x : xs) fast = fast && x.size > 0 && (s == 1 || sgn(x.mean) > 0);
      auto pair_check = [&](std::size_t u, std::size_t v, Index c) {
        const std::string w = at() + " t1=" + std::to_string(xs[u].t1) + "," + std::to_string(xs[v].t1);
        a_lemma.add(qi(c), 2 * qi(xs[u].size) * qi(xs[v].size) * pow2q(-n), w);
        for (int dir = 0; dir < 2; ++dir) {
          const XSet& A = dir == 0 ? xs[u] : xs[v];
          const XSet& B = dir == 0 ? xs[v] : xs[u];
          a_pair.add(qi(c), s == 1 ? 2 * eps * pow2q(-A.k) * qi(A.size) : 4 * pow2q(-B.k) * B.mean * qi(A.size), w);
        }
      };
      if (fast) {
        std::size_t hit = 0;
        for (const auto& [uv, c] : sw.pairs)
          if (uv.first < uv.second) {
            pair_check(uv.first, uv.second, c);
            ++hit;
          }
        std::size_t quiet = N * (N - 1) / 2 - hit;
        if (quiet > 0) {
          // some disjoint pair, for the record
          std::size_t qu = 0, qv = 1;
          for (std::size_t u = 0; u < N && quiet; ++u)
            for (std::size_t v = u + 1; v < N; ++v)
              if (!sw.pairs.count({u, v})) {
                qu = u, qv = v;
                u = N;
                break;
              }
          auto w = [&] { return at() + " t1=" + std::to_string(xs[qu].t1) + "," + std::to_string(xs[qv].t1); };
          a_lemma.pass_many(quiet, [&] { return std::make_pair(Rational(0), 2 * qi(xs[qu].size) * qi(xs[qv].size) * pow2q(-n)); }, w);
          a_pair.pass_many(2 * quiet, [&] {
            return std::make_pair(Rational(0), s == 1 ? 2 * eps * pow2q(-xs[qu].k) * qi(xs[qu].size)
                                                      : 4 * pow2q(-xs[qv].k) * xs[qv].mean * qi(xs[qu].size));
          }, w);
        }
      } else {
        for (std::size_t u = 0; u < N; ++u)
          for (std::size_t v = u + 1; v < N; ++v) {
            auto it = sw.pairs.find({u, v});
            pair_check(u, v, it == sw.pairs.end() ? 0 : it->second);
          }
      }
      for (std::size_t u = 0; u < N; ++u) {
        auto w = [&] { return at() + " t1=" + std::to_string(xs[u].t1) + " k'=" + std::to_string(xs[u].k); };
        Index c = xs[u].size;
        if (s == 1) {
          a_excl.add_frac(sw.excl[u], c, 2, w);
        } else {
          a_excl.add_frac(sw.excl[u], 3 * c, 4, w);
          a_oldov.add_frac(sw.old_ov[u], c, 4, w);
          a_new.add_frac(sw.excl_old[u], c, 2, w);
        }
      }
      if (s == 1) {
        a_union.add_int(sw.uni, union_bd, union_bd.get_d(), at());
        newpts.insert(newpts.end(), sw.uni_pcs.begin(), sw.uni_pcs.end());
        sweep_union += sw.uni;
      } else {
        a_oldsz.add_int(total(oldp), old_bd, old_bd.get_d(), at());
        Index ov = 0, fresh = 0;
        Pieces all;
        for (auto a = sw.fresh.begin(); a != sw.fresh.end(); ++a) {
          fresh += total(a->second);
          for (auto b = std::next(a); b != sw.fresh.end(); ++b) ov += inter_count(a->second, b->second);
          all.insert(all.end(), a->second.begin(), a->second.end());
        }
        std::sort(all.begin(), all.end(), [](const Interval& x, const Interval& y) { return x.start < y.start; });
        a_fdis.add_int(ov, 0, 0, at());
        a_fnew.add_int(fresh, fresh_bd, fresh_bd.get_d(), at());
        a_fold.add_int(inter_count(all, oldp), 0, 0, at());
        newpts.insert(newpts.end(), all.begin(), all.end());
        sweep_union += fresh;
      }
    }
    for (const Agg* a : {&a_tstar, &a_t1, &a_xlo, &a_xhi, &a_lemma, &a_pair, &a_excl}) a->flush(out);
    if (s == 1)
      a_union.flush(out);
    else
      for (const Agg* a : {&a_oldsz, &a_oldov, &a_new, &a_fdis, &a_fnew, &a_fold}) a->flush(out);

    // recount of the new points through set operations
    PeriodicSet newset = PeriodicSet::from_intervals(p, newpts);
    out.push_back(make_check(J + "recount of new points", "sweep count equals set-operation count", qi(newset.count()),
                             "==", qi(sweep_union)));

    // X-bar(j) from the superlevel routine, restricted to the annulus (minus old points)
    PeriodicSet dom = s == 1 ? ann : subtract(ann, old);
    SuperlevelQuery q;
    q.phis.push_back(&spike);
    for (int k : ks) q.psis.push_back({k, &fam.psis.at(k)});
    q.threshold = 1;
    q.l_max = s == 1 ? p : std::min(p, B0 << lr.omega);
    q.restrict_to = &dom;
    q.keep_witness = true;
    q.threads = opt.threads;
    SuperlevelResult xb = superlevel(q);
    out.push_back(make_check(J + "X-bar(j) measure", s == 1 ? "X-bar(j) > (eps/512) 2^-M" : "X-bar(j) > (eps/2048) 2^-M",
                             xb.measure, ">", eps / (s == 1 ? 512 : 2048) * pow2q(-M)));
    out.push_back(make_check(J + "new points inside X-bar(j)", "new points satisfy the maximal inequality",
                             qi(subtract(newset, *xb.witness).count()), "==", 0));
    xbar_total += xb.measure;
    xbar.push_back(*xb.witness);
  }

  for (std::size_t a = 0; a < xbar.size(); ++a) {
    for (std::size_t b = a + 1; b < xbar.size(); ++b)
      out.push_back(make_check("X-bar disjointness j=" + std::to_string(a + 2) + "," + std::to_string(b + 2),
                               "X-bar(j) ∩ X-bar(j') empty", qi(intersect(xbar[a], xbar[b]).count()), "==", 0));
    if (s >= 2)
      for (std::size_t b = 0; b < olds.size(); ++b)
        out.push_back(make_check("X-bar/old disjointness j=" + std::to_string(a + 2) + "," + std::to_string(b + 2),
                                 "X-bar(j) ∩ old points empty", qi(intersect(xbar[a], olds[b]).count()), "==", 0));
  }
  if (s == 1)
    out.push_back(make_check("X-bar total", "sum of X-bar(j) > (M-1)(eps/512) 2^-M", xbar_total, ">",
                             Rational(M - 1) * eps / 512 * pow2q(-M)));
  return out;
}

}  // namespace rstar
