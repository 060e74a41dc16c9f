#include "rstar/maximal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "rstar/error.hpp"

namespace rstar {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::exhaustive: return "exhaustive";
    case Strategy::spike_indexed: return "spike";
    case Strategy::sampled: return "sampled";
  }
  return "?";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "exhaustive") return Strategy::exhaustive;
  if (s == "spike" || s == "spike_indexed") return Strategy::spike_indexed;
  if (s == "sampled") return Strategy::sampled;
  fail("unknown strategy '" + s + "' (expected exhaustive|spike|sampled)");
}

namespace {

struct NzRun {
  Index start, end;
  std::uint32_t id;
};

std::vector<NzRun> nonzero_runs(const PeriodicStepFn& f) {
  std::vector<NzRun> out;
  for (std::size_t i = 0; i < f.run_count(); ++i)
    if (!f.value(f.run_id(i)).is_zero()) out.push_back({f.run(i).start, f.run_end(i), f.run_id(i)});
  return out;
}

// Calls cb(lo, hi, id) for every nonzero run piece inside the lifted range [lo, hi].
template <class F>
void for_runs(const std::vector<NzRun>& runs, Index p, Index lo, Index hi, F&& cb) {
  if (runs.empty() || hi < lo) return;
  Index base = lo - mod(lo, p);
  Index r = lo - base;
  auto it = std::upper_bound(runs.begin(), runs.end(), r, [](Index v, const NzRun& u) { return v < u.end; });
  std::size_t i = static_cast<std::size_t>(it - runs.begin());
  while (true) {
    if (i == runs.size()) {
      i = 0;
      base += p;
      if (base > hi) return;
    }
    Index a = base + runs[i].start, b = base + runs[i].end - 1;
    if (a > hi) return;
    cb(std::max(a, lo), std::min(b, hi), runs[i].id);
    ++i;
  }
}

// Largest l with v*w >= tau*l, clamped to [0, l_max].
Index cap_of(const Dyadic& v, const Dyadic& w, const Rational& tau, Index l_max) {
  Rational q = (v * w).to_rational() / tau;
  if (sgn(q) <= 0) return 0;
  BigInt f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (f >= l_max) return l_max;
  return static_cast<Index>(f.get_si());
}

struct Prepared {
  Index p = 1;
  Index l_max = 1;
  Rational tau;
  PeriodicStepFn phi;
  std::vector<NzRun> phi_runs;
  std::vector<const PeriodicStepFn*> psi;
  std::vector<std::vector<NzRun>> psi_runs;
  // cap[k][a * nb_k + b]
  std::vector<std::vector<Index>> cap;
  std::vector<std::size_t> nb;
  std::vector<Index> lwin;  // per Φ value id: max cap over all k, b
  Index lwin_max = 0;
};

Prepared prepare(const SuperlevelQuery& q) {
  Prepared P;
  require(!q.phis.empty() || !q.psis.empty(), "superlevel: empty query");
  P.p = !q.phis.empty() ? q.phis.front()->period() : q.psis.front().second->period();
  for (auto* f : q.phis) require(f->period() == P.p, "superlevel: period mismatch among phis");
  for (auto& [k, g] : q.psis) require(g->period() == P.p, "superlevel: period mismatch among psis");
  if (q.restrict_to) require(q.restrict_to->period() == P.p, "superlevel: restriction period mismatch");
  P.l_max = q.l_max == 0 ? P.p : q.l_max;
  require(P.l_max >= 1 && P.l_max <= P.p, "superlevel: l_max must be in [1, p]");
  P.tau = q.threshold;
  if (sgn(P.tau) <= 0) return P;  // handled by the caller without caps
  P.phi = sum(q.phis, P.p);
  P.phi_runs = nonzero_runs(P.phi);
  const auto& pa = P.phi.palette();
  P.lwin.assign(pa.size(), 0);
  for (auto& [k, g] : q.psis) {
    P.psi.push_back(g);
    P.psi_runs.push_back(nonzero_runs(*g));
    const auto& pb = g->palette();
    std::vector<Index> c(pa.size() * pb.size(), 0);
    for (std::size_t a = 0; a < pa.size(); ++a)
      for (std::size_t b = 0; b < pb.size(); ++b) {
        Index v = cap_of(pa[a], pb[b], P.tau, P.l_max);
        c[a * pb.size() + b] = v;
        P.lwin[a] = std::max(P.lwin[a], v);
      }
    P.cap.push_back(std::move(c));
    P.nb.push_back(pb.size());
  }
  for (Index v : P.lwin) P.lwin_max = std::max(P.lwin_max, v);
  return P;
}

struct Chunk {
  std::vector<Interval> iv;
  std::uint64_t pairs = 0;
};

// Spike-major enumeration: for every support point y of Σφ and every ψ_k run meeting
// (y, y+L], the witnesses are x = 2y - z.
void scan_pairs(const Prepared& P, Index X0, Index X1, Chunk& out) {
  if (P.lwin_max == 0) return;
  for_runs(P.phi_runs, P.p, X0 + 1, X1 - 1 + P.lwin_max, [&](Index ya, Index yb, std::uint32_t a) {
    Index lw = P.lwin[a];
    if (lw == 0) return;
    for (Index y = ya; y <= yb; ++y) {
      Index xlo = std::max(X0, y - lw), xhi = std::min(X1, y);  // x in [xlo, xhi)
      if (xlo >= xhi) continue;
      Index zlo = 2 * y - (xhi - 1), zhi = 2 * y - xlo;
      for (std::size_t k = 0; k < P.psi.size(); ++k) {
        const auto& cap = P.cap[k];
        std::size_t nb = P.nb[k];
        for_runs(P.psi_runs[k], P.p, zlo, zhi, [&](Index za, Index zb, std::uint32_t b) {
          ++out.pairs;
          Index L = cap[a * nb + b];
          Index top = std::min(zb, y + L);
          if (top < za) return;
          out.iv.push_back({2 * y - top, top - za + 1});
        });
      }
    }
  });
}

void scan_exhaustive(const Prepared& P, const std::vector<std::uint32_t>& phi_id,
                     const std::vector<std::vector<std::uint32_t>>& psi_id, Index X0, Index X1, Chunk& out) {
  const auto& pa = P.phi.palette();
  std::vector<char> zero(pa.size());
  for (std::size_t a = 0; a < pa.size(); ++a) zero[a] = pa[a].is_zero();
  Index run_start = -1;
  for (Index x = X0; x < X1; ++x) {
    bool member = false;
    for (Index l = 1; l <= P.l_max && !member; ++l) {
      std::uint32_t a = phi_id[static_cast<std::size_t>((x + l) % P.p)];
      for (std::size_t k = 0; k < P.psi.size() && !member; ++k) {
        std::uint32_t b = psi_id[k][static_cast<std::size_t>((x + 2 * l) % P.p)];
        ++out.pairs;
        if (!zero[a] && P.cap[k][a * P.nb[k] + b] >= l) member = true;
      }
    }
    if (member && run_start < 0) run_start = x;
    if (!member && run_start >= 0) {
      out.iv.push_back({run_start, x - run_start});
      run_start = -1;
    }
  }
  if (run_start >= 0) out.iv.push_back({run_start, X1 - run_start});
}

std::vector<std::uint32_t> dense_ids(const PeriodicStepFn& f) {
  std::vector<std::uint32_t> v(static_cast<std::size_t>(f.period()));
  for (std::size_t i = 0; i < f.run_count(); ++i)
    std::fill(v.begin() + f.run(i).start, v.begin() + f.run_end(i), f.run_id(i));
  return v;
}

bool member_at(const Prepared& P, Index x) {
  bool found = false;
  for_runs(P.phi_runs, P.p, x + 1, x + P.lwin_max, [&](Index ya, Index yb, std::uint32_t a) {
    if (found) return;
    for (Index y = ya; y <= yb && !found; ++y) {
      Index l = y - x;
      if (l > P.lwin[a]) break;
      for (std::size_t k = 0; k < P.psi.size(); ++k) {
        std::size_t i = P.psi[k]->run_index(x + 2 * l);
        std::uint32_t b = P.psi[k]->run_id(i);
        if (P.cap[k][a * P.nb[k] + b] >= l) {
          found = true;
          break;
        }
      }
    }
  });
  return found;
}

template <class Body>
void run_chunks(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex m;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(m);
        if (!err) err = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

SuperlevelResult superlevel(const SuperlevelQuery& q) {
  Prepared P = prepare(q);
  SuperlevelResult res;
  res.strategy = q.strategy;

  if (sgn(P.tau) <= 0) {
    for (auto* f : q.phis) require(f->non_negative(), "superlevel: non-positive threshold needs non-negative functions");
    for (auto& [k, g] : q.psis) require(g->non_negative(), "superlevel: non-positive threshold needs non-negative functions");
    PeriodicSet w = q.psis.empty() ? PeriodicSet(P.p) : PeriodicSet::full(P.p);
    if (q.restrict_to) w = intersect(w, *q.restrict_to);
    res.count = w.count();
    res.measure = w.measure();
    if (q.keep_witness && q.strategy != Strategy::sampled) res.witness = std::move(w);
    return res;
  }

  if (q.strategy == Strategy::sampled) {
    require(q.samples > 0, "sampled strategy needs a positive sample count");
    std::mt19937_64 rng(q.seed);
    std::uniform_int_distribution<Index> dist(0, P.p - 1);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < q.samples; ++i) {
      Index x = dist(rng);
      if (q.restrict_to && !q.restrict_to->contains(x)) continue;
      if (member_at(P, x)) ++hits;
    }
    double ph = static_cast<double>(hits) / static_cast<double>(q.samples);
    res.measure = ratio(BigInt(static_cast<unsigned long>(hits)), BigInt(static_cast<unsigned long>(q.samples)));
    res.half_width = 1.96 * std::sqrt(ph * (1 - ph) / static_cast<double>(q.samples));
    return res;
  }

  // Chunk layout depends on p only, so the merged result is thread-count independent.
  Index chunk_len = std::max<Index>(Index{1} << 14, P.p / 4096);
  std::size_t nchunks = static_cast<std::size_t>((P.p + chunk_len - 1) / chunk_len);
  std::vector<Chunk> chunks(nchunks);

  std::vector<std::uint32_t> phi_id;
  std::vector<std::vector<std::uint32_t>> psi_id;
  if (q.strategy == Strategy::exhaustive) {
    require(P.p <= (Index{1} << 28), "exhaustive strategy limited to periods <= 2^28");
    phi_id = dense_ids(P.phi);
    for (auto* g : P.psi) psi_id.push_back(dense_ids(*g));
  }

  run_chunks(nchunks, q.threads, [&](std::size_t c) {
    Index X0 = static_cast<Index>(c) * chunk_len, X1 = std::min(P.p, X0 + chunk_len);
    Chunk& ch = chunks[c];
    if (q.strategy == Strategy::exhaustive)
      scan_exhaustive(P, phi_id, psi_id, X0, X1, ch);
    else
      scan_pairs(P, X0, X1, ch);
    std::sort(ch.iv.begin(), ch.iv.end(), [](const Interval& u, const Interval& v) { return u.start < v.start; });
    PeriodicSet s = PeriodicSet::from_sorted(P.p, std::move(ch.iv));
    if (q.restrict_to) s = intersect(s, *q.restrict_to);
    ch.iv = s.intervals();
  });

  std::vector<Interval> all;
  for (auto& ch : chunks) {
    res.pairs += ch.pairs;
    for (const auto& i : ch.iv) res.count += i.length;
    if (q.keep_witness) all.insert(all.end(), ch.iv.begin(), ch.iv.end());
  }
  res.measure = ratio(BigInt(static_cast<long>(res.count)), BigInt(static_cast<long>(P.p)));
  if (q.keep_witness) {
    // chunks are disjoint and ordered, so intervals touch only at chunk seams
    res.witness = PeriodicSet::from_sorted(P.p, std::move(all));
    res.count = res.witness->count();
  }
  return res;
}

bool is_member(const SuperlevelQuery& q, Index x) {
  Prepared P = prepare(q);
  if (sgn(P.tau) <= 0) return !q.psis.empty();
  return member_at(P, mod(x, P.p));
}

Rational tail_term(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, Index l) {
  require(f.period() == g.period(), "tail_term: period mismatch");
  require(l > 0, "tail_term: l must be positive");
  return (f.eval(x + l) * g.eval(x + 2 * l)).to_rational() / Rational(BigInt(static_cast<long>(l)));
}

Rational rstar_tail_sup(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, Index l_max) {
  require(l_max >= 1, "rstar_tail_sup: l_max must be positive");
  Rational best = tail_term(f, g, x, 1);
  for (Index l = 2; l <= l_max; ++l) best = std::max(best, tail_term(f, g, x, l));
  return best;
}

Rational furstenberg_average(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, Index N) {
  require(f.period() == g.period(), "furstenberg_average: period mismatch");
  require(N >= 1, "furstenberg_average: N must be at least 1");
  Dyadic s;
  for (Index n = 0; n <= N; ++n) s += f.eval(x + n) * g.eval(x + 2 * n);
  return s.to_rational() / Rational(BigInt(static_cast<long>(N + 1)));
}

std::string orbit_csv(const PeriodicStepFn& f, const PeriodicStepFn& g, Index x, const std::vector<Index>& checkpoints) {
  require(f.period() == g.period(), "orbit: period mismatch");
  std::ostringstream os;
  os << "N,average_exact,average\n";
  Dyadic s;
  Index n = 0;
  for (Index N : checkpoints) {
    require(N >= 1, "orbit: checkpoints must be >= 1");
    for (; n <= N; ++n) s += f.eval(x + n) * g.eval(x + 2 * n);
    Rational avg = s.to_rational() / Rational(BigInt(static_cast<long>(N + 1)));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", avg.get_d());
    os << N << ',' << avg.get_str() << ',' << buf << '\n';
  }
  return os.str();
}

}  // namespace rstar
