#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rstar/error.hpp"
#include "rstar/family.hpp"

namespace rstar {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

static std::string qs(const Rational& q) { return q.get_str(); }

static Rational parse_q(const json& v) {
  Rational q(v.get<std::string>());
  q.canonicalize();
  return q;
}

std::string trace_jsonl(const ConstructionTrace& t) {
  std::ostringstream os;
  json meta;
  meta["kind"] = "meta";
  meta["s"] = t.s;
  meta["n"] = t.n;
  meta["levels"] = t.levels;
  meta["early_exit"] = t.early_exit;
  meta["rebased_from"] = std::to_string(t.rebased_from);
  meta["prime_k_M"] = t.primes.k_M();
  meta["prime_threshold"] = std::to_string(t.primes.threshold());
  os << meta.dump() << '\n';
  for (const auto& l : t.level_records) {
    json j{{"kind", "level"}, {"j", l.j},         {"k", l.k}, {"k_prime", l.k_prime}, {"alpha", l.alpha},
           {"omega", l.omega}, {"sub_period", std::to_string(l.sub_period)}, {"sub_n", l.sub_n}};
    os << j.dump() << '\n';
  }
  for (const auto& b : t.blocks) {
    json j{{"kind", "block"}, {"t", b.t}, {"j", b.j}, {"prime", b.prime}, {"r", b.r}, {"count", b.count}};
    os << j.dump() << '\n';
  }
  for (const auto& s : t.subs) {
    json j{{"kind", "sub"},           {"j", s.j},
           {"alpha", s.alpha},        {"omega", s.omega},
           {"period", std::to_string(s.period)}, {"n", s.n},
           {"phi_mean", qs(s.phi_mean)}, {"psi_mean", qs(s.psi_mean)},
           {"measure", qs(s.measure)}};
    std::vector<std::string> km;
    for (const auto& q : s.psi_k_means) km.push_back(qs(q));
    j["psi_k_means"] = km;
    os << j.dump() << '\n';
  }
  for (const auto& c : t.checks) {
    json j = json::parse(to_json_line(c));
    json out{{"kind", "check"}};
    out.update(j);
    os << out.dump() << '\n';
  }
  return os.str();
}

static void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) fail("cannot write " + p.string());
  os << content;
  if (!os) fail("write failed: " + p.string());
}

static std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) fail("cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Written to a sibling temp dir, then renamed into place.
void save_family(const Family& fam, const std::string& dir) {
  fs::path target(dir);
  fs::path tmp = target;
  tmp += ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);
  write_file(tmp / "params.txt", fam.params.str());
  {
    std::ostringstream os;
    os << "n " << fam.n << '\n' << "period " << fam.period << '\n' << "alpha " << fam.alpha << '\n'
       << "omega " << fam.omega << '\n';
    write_file(tmp / "family.txt", os.str());
  }
  for (std::size_t i = 0; i < fam.phis.size(); ++i) {
    std::ostringstream os;
    write_fn(os, fam.phis[i]);
    write_file(tmp / ("phi_" + std::to_string(i + 1) + ".txt"), os.str());
  }
  for (const auto& [k, g] : fam.psis) {
    std::ostringstream os;
    write_fn(os, g);
    write_file(tmp / ("psi_" + std::to_string(k) + ".txt"), os.str());
  }
  {
    std::ostringstream os;
    fam.trace.primes.write(os);
    write_file(tmp / "primes.txt", os.str());
  }
  write_file(tmp / "trace.jsonl", trace_jsonl(fam.trace));
  fs::remove_all(target, ec);
  fs::rename(tmp, target);
}

Family load_family(const std::string& dir) {
  fs::path d(dir);
  if (!fs::is_directory(d)) fail("not a family directory: " + dir);
  Family fam;
  fam.params = FamilyParams::parse(read_file(d / "params.txt"));
  {
    std::istringstream is(read_file(d / "family.txt"));
    std::string key;
    long long v;
    while (is >> key >> v) {
      if (key == "n") fam.n = static_cast<int>(v);
      else if (key == "period") fam.period = v;
      else if (key == "alpha") fam.alpha = static_cast<int>(v);
      else if (key == "omega") fam.omega = static_cast<int>(v);
      else fail("family.txt: unknown key " + key);
    }
  }
  for (int i = 1; i <= fam.n; ++i) {
    std::istringstream is(read_file(d / ("phi_" + std::to_string(i) + ".txt")));
    fam.phis.push_back(read_fn(is));
  }
  for (int k = fam.alpha; k <= fam.omega; ++k) {
    fs::path p = d / ("psi_" + std::to_string(k) + ".txt");
    if (!fs::exists(p)) {
      fam.psis.emplace(k, PeriodicStepFn(fam.period));
      continue;
    }
    std::istringstream is(read_file(p));
    fam.psis.emplace(k, read_fn(is));
  }

  auto& tr = fam.trace;
  int kM = 0;
  Index thr = 3;
  std::istringstream ts(read_file(d / "trace.jsonl"));
  std::string line;
  while (std::getline(ts, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    std::string kind = j.at("kind");
    if (kind == "meta") {
      tr.s = j.at("s");
      tr.n = j.at("n");
      tr.levels = j.at("levels").get<std::vector<int>>();
      tr.early_exit = j.at("early_exit");
      tr.rebased_from = std::stoll(j.at("rebased_from").get<std::string>());
      kM = j.at("prime_k_M");
      thr = std::stoll(j.at("prime_threshold").get<std::string>());
    } else if (kind == "level") {
      tr.level_records.push_back({j.at("j"), j.at("k"), j.at("k_prime"), j.at("alpha"), j.at("omega"),
                                  std::stoll(j.at("sub_period").get<std::string>()), j.at("sub_n")});
    } else if (kind == "block") {
      tr.blocks.push_back({j.at("t"), j.at("j"), j.at("prime"), j.at("r"), j.at("count")});
    } else if (kind == "sub") {
      tr.subs.push_back({j.at("j"), j.at("alpha"), j.at("omega"), std::stoll(j.at("period").get<std::string>()),
                         j.at("n"), parse_q(j.at("phi_mean")), parse_q(j.at("psi_mean")), parse_q(j.at("measure")), {}});
      for (const auto& q : j.at("psi_k_means")) tr.subs.back().psi_k_means.push_back(parse_q(q));
    } else if (kind == "check") {
      CheckRecord c;
      c.check_id = j.at("check_id");
      c.eq_ref = j.at("eq_ref");
      c.lhs = Rational(BigInt(j.at("lhs_num").get<std::string>()), BigInt(j.at("lhs_den").get<std::string>()));
      c.lhs.canonicalize();
      c.relation = j.at("relation");
      c.rhs = Rational(BigInt(j.at("rhs_num").get<std::string>()), BigInt(j.at("rhs_den").get<std::string>()));
      c.rhs.canonicalize();
      c.pass = j.at("pass");
      tr.checks.push_back(std::move(c));
    } else {
      fail("trace.jsonl: unknown record kind " + kind);
    }
  }
  std::istringstream ps(read_file(d / "primes.txt"));
  tr.primes = PrimeAssignment::read(ps, kM, thr);
  for (const auto& f : fam.phis)
    if (f.period() != fam.period) fail("phi period mismatch in " + dir);
  for (const auto& [k, g] : fam.psis)
    if (g.period() != fam.period) fail("psi period mismatch in " + dir);
  return fam;
}

}  // namespace rstar
