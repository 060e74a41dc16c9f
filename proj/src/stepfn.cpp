#include "rstar/stepfn.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rstar/error.hpp"

namespace rstar {

Index lcm_capped(Index a, Index b, int log2_cap) {
  require(a > 0 && b > 0, "lcm of non-positive periods");
  Index g = std::gcd(a, b);
  __int128 l = static_cast<__int128>(a / g) * b;
  if (l > (static_cast<__int128>(1) << log2_cap))
    fail("lcm " + std::to_string(a) + "," + std::to_string(b) + " exceeds period cap 2^" + std::to_string(log2_cap));
  return static_cast<Index>(l);
}

// ---------------------------------------------------------------- PeriodicSet

PeriodicSet::PeriodicSet(Index period) : period_(period) {
  require(period > 0, "period must be positive");
  index();
}

void PeriodicSet::index() {
  cum_.resize(iv_.size() + 1);
  cum_[0] = 0;
  for (std::size_t i = 0; i < iv_.size(); ++i) cum_[i + 1] = cum_[i] + iv_[i].length;
}

PeriodicSet PeriodicSet::full(Index period) {
  PeriodicSet s(period);
  s.iv_.push_back({0, period});
  s.index();
  return s;
}

PeriodicSet PeriodicSet::from_sorted(Index period, std::vector<Interval> iv) {
  PeriodicSet s(period);
  s.iv_.reserve(iv.size());
  for (const auto& i : iv) {
    if (i.length <= 0) continue;
    if (!s.iv_.empty() && i.start <= s.iv_.back().end()) {
      Index e = std::max(s.iv_.back().end(), i.end());
      s.iv_.back().length = e - s.iv_.back().start;
    } else {
      s.iv_.push_back(i);
    }
  }
  s.index();
  return s;
}

PeriodicSet PeriodicSet::from_intervals(Index period, std::vector<Interval> iv) {
  std::vector<Interval> out;
  out.reserve(iv.size() + 1);
  for (const auto& i : iv) {
    if (i.length <= 0) continue;
    if (i.length >= period) return full(period);
    Index a = mod(i.start, period);
    if (a + i.length <= period) {
      out.push_back({a, i.length});
    } else {
      out.push_back({a, period - a});
      out.push_back({0, a + i.length - period});
    }
  }
  std::sort(out.begin(), out.end(), [](const Interval& x, const Interval& y) { return x.start < y.start; });
  return from_sorted(period, std::move(out));
}

Index PeriodicSet::count() const { return cum_.back(); }

Rational PeriodicSet::measure() const {
  Rational q(BigInt(static_cast<long>(count())), BigInt(static_cast<long>(period_)));
  q.canonicalize();
  return q;
}

bool PeriodicSet::contains(Index x) const {
  x = mod(x, period_);
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x, [](Index v, const Interval& i) { return v < i.start; });
  if (it == iv_.begin()) return false;
  --it;
  return x < it->end();
}

Index PeriodicSet::prefix(Index r) const {
  auto it = std::lower_bound(iv_.begin(), iv_.end(), r, [](const Interval& i, Index v) { return i.start < v; });
  std::size_t k = static_cast<std::size_t>(it - iv_.begin());
  if (k == 0) return 0;
  const Interval& last = iv_[k - 1];
  return cum_[k - 1] + std::min(last.length, r - last.start);
}

Index PeriodicSet::count_in(Index lo, Index hi) const {
  if (hi <= lo) return 0;
  auto upto = [&](Index n) {
    Index q = n / period_, r = n % period_;
    if (r < 0) {
      r += period_;
      --q;
    }
    return q * count() + prefix(r);
  };
  return upto(hi) - upto(lo);
}

PeriodicSet PeriodicSet::complement() const {
  std::vector<Interval> out;
  Index cur = 0;
  for (const auto& i : iv_) {
    if (i.start > cur) out.push_back({cur, i.start - cur});
    cur = i.end();
  }
  if (cur < period_) out.push_back({cur, period_ - cur});
  return from_sorted(period_, std::move(out));
}

PeriodicSet PeriodicSet::shift(Index d) const {
  std::vector<Interval> out = iv_;
  for (auto& i : out) i.start += d;
  return from_intervals(period_, std::move(out));
}

PeriodicSet PeriodicSet::retile(Index new_period) const {
  require(new_period % period_ == 0, "retile: new period must be a multiple of the old one");
  std::vector<Interval> out;
  out.reserve(iv_.size() * static_cast<std::size_t>(new_period / period_));
  for (Index c = 0; c < new_period; c += period_)
    for (const auto& i : iv_) out.push_back({i.start + c, i.length});
  return from_sorted(new_period, std::move(out));
}

static void check_same(const PeriodicSet& a, const PeriodicSet& b) {
  if (a.period() != b.period())
    fail("set operation on mismatched periods " + std::to_string(a.period()) + " and " + std::to_string(b.period()));
}

PeriodicSet intersect(const PeriodicSet& a, const PeriodicSet& b) {
  check_same(a, b);
  const auto& x = a.intervals();
  const auto& y = b.intervals();
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    Index lo = std::max(x[i].start, y[j].start);
    Index hi = std::min(x[i].end(), y[j].end());
    if (lo < hi) out.push_back({lo, hi - lo});
    if (x[i].end() < y[j].end())
      ++i;
    else
      ++j;
  }
  return PeriodicSet::from_sorted(a.period(), std::move(out));
}

PeriodicSet unite(const PeriodicSet& a, const PeriodicSet& b) {
  check_same(a, b);
  std::vector<Interval> out;
  out.reserve(a.intervals().size() + b.intervals().size());
  std::merge(a.intervals().begin(), a.intervals().end(), b.intervals().begin(), b.intervals().end(),
             std::back_inserter(out), [](const Interval& u, const Interval& v) { return u.start < v.start; });
  return PeriodicSet::from_sorted(a.period(), std::move(out));
}

PeriodicSet subtract(const PeriodicSet& a, const PeriodicSet& b) {
  check_same(a, b);
  return intersect(a, b.complement());
}

std::pair<PeriodicSet, PeriodicSet> align(const PeriodicSet& a, const PeriodicSet& b, int log2_cap) {
  Index l = lcm_capped(a.period(), b.period(), log2_cap);
  return {a.retile(l), b.retile(l)};
}

// ------------------------------------------------------------- PeriodicStepFn

PeriodicStepFn::PeriodicStepFn(Index period) : period_(period) {
  require(period > 0, "period must be positive");
  starts_ = {0};
  ids_ = {0};
  palette_ = {Dyadic()};
}

PeriodicStepFn PeriodicStepFn::constant(Index period, const Dyadic& v) {
  PeriodicStepFn f(period);
  f.palette_[0] = v;
  return f;
}

PeriodicStepFn PeriodicStepFn::indicator(const PeriodicSet& s, const Dyadic& v) {
  StepFnBuilder b(s.period());
  for (const auto& i : s.intervals()) b.push(i.start, i.length, v);
  return b.finish();
}

Run PeriodicStepFn::run(std::size_t i) const { return {starts_[i], run_end(i) - starts_[i], ids_[i]}; }

std::size_t PeriodicStepFn::run_index(Index x) const {
  x = mod(x, period_);
  auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
  return static_cast<std::size_t>(it - starts_.begin()) - 1;
}

bool PeriodicStepFn::is_zero() const {
  return std::all_of(ids_.begin(), ids_.end(), [&](std::uint32_t id) { return palette_[id].is_zero(); });
}

bool PeriodicStepFn::non_negative() const {
  return std::all_of(palette_.begin(), palette_.end(), [](const Dyadic& v) { return v.sign() >= 0; });
}

Rational PeriodicStepFn::integral() const {
  std::vector<Index> len(palette_.size(), 0);
  for (std::size_t i = 0; i < starts_.size(); ++i) len[ids_[i]] += run_end(i) - starts_[i];
  Dyadic acc;
  for (std::size_t v = 0; v < palette_.size(); ++v)
    if (len[v] != 0) acc += palette_[v] * Dyadic(static_cast<long>(len[v]));
  return acc.to_rational();
}

Rational PeriodicStepFn::mean_integral() const {
  Rational q = integral() / Rational(BigInt(static_cast<long>(period_)));
  q.canonicalize();
  return q;
}

Rational PeriodicStepFn::integral_over(Index lo, Index hi) const {
  if (hi <= lo) return 0;
  Rational acc = 0;
  Index span = hi - lo;
  if (span >= period_) {
    acc += integral() * Rational(BigInt(static_cast<long>(span / period_)));
    lo += (span / period_) * period_;
  }
  if (lo == hi) return acc;
  Dyadic part;
  std::size_t i = run_index(lo);
  Index base = lo - mod(lo, period_);
  Index x = lo;
  while (x < hi) {
    Index e = base + run_end(i);
    Index stop = std::min(e, hi);
    const Dyadic& v = palette_[ids_[i]];
    if (!v.is_zero()) part += v * Dyadic(static_cast<long>(stop - x));
    x = stop;
    if (++i == starts_.size()) {
      i = 0;
      base += period_;
    }
  }
  return acc + part.to_rational();
}

Rational PeriodicStepFn::integral_on(const PeriodicSet& a) const {
  require(a.period() == period_, "integral_on: period mismatch");
  Rational acc = 0;
  for (const auto& i : a.intervals()) acc += integral_over(i.start, i.end());
  return acc;
}

PeriodicSet PeriodicStepFn::support() const {
  std::vector<Interval> out;
  for (std::size_t i = 0; i < starts_.size(); ++i)
    if (!palette_[ids_[i]].is_zero()) out.push_back({starts_[i], run_end(i) - starts_[i]});
  return PeriodicSet::from_sorted(period_, std::move(out));
}

PeriodicStepFn PeriodicStepFn::scaled(const Dyadic& c) const {
  if (c.is_zero()) return PeriodicStepFn(period_);
  PeriodicStepFn f = *this;
  for (auto& v : f.palette_) v = v * c;
  return f;
}

PeriodicStepFn PeriodicStepFn::restricted(const PeriodicSet& a) const {
  require(a.period() == period_, "restricted: period mismatch");
  StepFnBuilder b(period_);
  for (const auto& i : a.intervals()) emit_range(b, *this, i.start, i.end(), i.start);
  return b.finish();
}

PeriodicStepFn PeriodicStepFn::retile(Index new_period) const {
  require(new_period % period_ == 0, "retile: new period must be a multiple of the old one");
  return tile_truncate(*this, new_period);
}

bool operator==(const PeriodicStepFn& a, const PeriodicStepFn& b) {
  if (a.period_ != b.period_ || a.starts_ != b.starts_) return false;
  for (std::size_t i = 0; i < a.ids_.size(); ++i)
    if (!(a.palette_[a.ids_[i]] == b.palette_[b.ids_[i]])) return false;
  return true;
}

// -------------------------------------------------------------------- builder

StepFnBuilder::StepFnBuilder(Index period) : f_(period) {
  f_.starts_.clear();
  f_.ids_.clear();
  f_.palette_.clear();
}

std::uint32_t StepFnBuilder::intern(const Dyadic& v) {
  auto [it, fresh] = index_.try_emplace(v, static_cast<std::uint32_t>(f_.palette_.size()));
  if (fresh) f_.palette_.push_back(v);
  return it->second;
}

void StepFnBuilder::append(Index start, Index length, std::uint32_t id) {
  if (!f_.ids_.empty() && f_.ids_.back() == id) {
    cursor_ = start + length;
    return;
  }
  f_.starts_.push_back(start);
  f_.ids_.push_back(id);
  cursor_ = start + length;
}

void StepFnBuilder::push(Index start, Index length, const Dyadic& v) {
  if (length <= 0) return;
  if (start < cursor_ || start + length > f_.period_)
    fail("builder: piece [" + std::to_string(start) + "," + std::to_string(start + length) + ") out of order");
  if (start > cursor_) append(cursor_, start - cursor_, intern(Dyadic()));
  append(start, length, intern(v));
}

PeriodicStepFn StepFnBuilder::finish() {
  if (cursor_ < f_.period_) append(cursor_, f_.period_ - cursor_, intern(Dyadic()));
  PeriodicStepFn out = std::move(f_);
  f_ = PeriodicStepFn(out.period_);
  f_.starts_.clear();
  f_.ids_.clear();
  f_.palette_.clear();
  cursor_ = 0;
  index_.clear();
  return out;
}

void emit_range(StepFnBuilder& b, const PeriodicStepFn& g, Index lo, Index hi, Index at) {
  if (hi <= lo) return;
  Index p = g.period();
  std::size_t i = g.run_index(lo);
  Index base = lo - mod(lo, p);
  Index x = lo;
  while (x < hi) {
    Index stop = std::min(base + g.run_end(i), hi);
    b.push(at + (x - lo), stop - x, g.value(g.run_id(i)));
    x = stop;
    if (++i == g.run_count()) {
      i = 0;
      base += p;
    }
  }
}

PeriodicStepFn tile_truncate(const PeriodicStepFn& f, Index p_new) {
  Index p = f.period();
  if (p_new < p) fail("tile_truncate: new period " + std::to_string(p_new) + " < old period " + std::to_string(p));
  if (p_new == p) return f;
  StepFnBuilder b(p_new);
  Index copies = p_new / p;
  for (Index c = 0; c < copies; ++c) emit_range(b, f, 0, p, c * p);
  return b.finish();
}

PeriodicStepFn add(const PeriodicStepFn& a, const PeriodicStepFn& b) {
  require(a.period() == b.period(), "add: period mismatch");
  StepFnBuilder out(a.period());
  std::size_t i = 0, j = 0;
  Index x = 0;
  while (x < a.period()) {
    Index e = std::min(a.run_end(i), b.run_end(j));
    out.push(x, e - x, a.value(a.run_id(i)) + b.value(b.run_id(j)));
    x = e;
    if (a.run_end(i) == e) ++i;
    if (b.run_end(j) == e) ++j;
  }
  return out.finish();
}

PeriodicStepFn sum(std::span<const PeriodicStepFn* const> fs, Index period) {
  PeriodicStepFn acc(period);
  for (const auto* f : fs) {
    if (f->is_zero()) continue;
    acc = acc.is_zero() ? *f : add(acc, *f);
  }
  return acc;
}

// ------------------------------------------------------------------------ I/O

static Index read_header(std::istream& is) {
  std::string word;
  Index p = 0;
  if (!(is >> word >> p) || word != "period" || p <= 0) fail("expected header 'period p'");
  return p;
}

void write_fn(std::ostream& os, const PeriodicStepFn& f) {
  os << "period " << f.period() << '\n';
  for (std::size_t i = 0; i < f.run_count(); ++i) {
    Run r = f.run(i);
    const Dyadic& v = f.value(r.id);
    os << r.start << ' ' << r.length << ' ' << v.mantissa().get_str() << ' ' << v.exponent() << '\n';
  }
}

PeriodicStepFn read_fn(std::istream& is) {
  Index p = read_header(is);
  StepFnBuilder b(p);
  Index start, length;
  std::string mant;
  std::int64_t e;
  Index expect = 0;
  while (is >> start >> length >> mant >> e) {
    if (start != expect || length <= 0) fail("function dump: runs must partition [0,p) in order");
    b.push(start, length, Dyadic(BigInt(mant), e));
    expect = start + length;
  }
  if (expect != p) fail("function dump: runs do not cover the period");
  return b.finish();
}

void write_set(std::ostream& os, const PeriodicSet& s) {
  os << "period " << s.period() << '\n';
  for (const auto& i : s.intervals()) os << i.start << ' ' << i.length << '\n';
}

PeriodicSet read_set(std::istream& is) {
  Index p = read_header(is);
  std::vector<Interval> iv;
  Index start, length;
  while (is >> start >> length) {
    if (start < 0 || length <= 0 || start + length > p) fail("set dump: interval outside [0,p)");
    iv.push_back({start, length});
  }
  return PeriodicSet::from_intervals(p, std::move(iv));
}

}  // namespace rstar
