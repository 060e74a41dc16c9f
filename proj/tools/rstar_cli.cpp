// rstar: batch front end over the C API.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rstar/rstar.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
  rstar_status code;
};

// One JSON error record on stderr per failure.
[[noreturn]] void die(rstar_status code, const std::string& msg) {
  nlohmann::ordered_json j;
  j["error"] = msg;
  j["exit_code"] = static_cast<int>(code);
  std::cerr << j.dump() << "\n";
  throw Failure{code};
}

void check(rstar_status s) {
  if (s != RSTAR_OK) die(s, rstar_last_error());
}

struct Owned {
  char* p = nullptr;
  Owned() = default;
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  ~Owned() { rstar_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct FamilyHandle {
  rstar_family* f = nullptr;
  FamilyHandle() = default;
  FamilyHandle(FamilyHandle&& o) noexcept : f(std::exchange(o.f, nullptr)) {}
  FamilyHandle(const FamilyHandle&) = delete;
  FamilyHandle& operator=(const FamilyHandle&) = delete;
  ~FamilyHandle() { rstar_family_free(f); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) die(RSTAR_E_USAGE, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whole-file replace through a sibling temporary.
void write_atomic(const std::string& path, const std::string& text) {
  fs::path p(path), tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) die(RSTAR_E_USAGE, "cannot write " + tmp.string());
    out << text;
    if (!out.flush()) die(RSTAR_E_INTERNAL, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) die(RSTAR_E_INTERNAL, "rename failed: " + ec.message());
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_atomic(out, text);
}

struct Common {
  std::string strategy = "spike";
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::uint64_t samples = 200000;
  std::string out;

  rstar_options options() const {
    rstar_options o = rstar_default_options();
    check(rstar_parse_strategy(strategy.c_str(), &o.strategy));
    o.threads = threads;
    o.seed = seed;
    o.samples = samples;
    return o;
  }
};

void add_exec_flags(CLI::App* c, Common& cm) {
  c->add_option("--strategy", cm.strategy, "exhaustive | spike | sampled")
      ->check(CLI::IsMember({"exhaustive", "spike", "sampled"}));
  c->add_option("--threads", cm.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  c->add_option("--seed", cm.seed, "seed (sampled strategy)");
  c->add_option("--samples", cm.samples, "sample count (sampled strategy)")->check(CLI::PositiveNumber);
}

FamilyHandle load(const std::string& dir) {
  FamilyHandle h;
  check(rstar_family_load(dir.c_str(), &h.f));
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact construction and verification of bilinear maximal counterexample families"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rstar_version()));

  Common cm;
  std::string params_path, family_dir;
  int period_cap = 0;

  auto* construct = app.add_subcommand("construct", "build a family and write it to a directory");
  construct->add_option("--params", params_path, "key = value parameter file (defaults if omitted)")
      ->check(CLI::ExistingFile);
  construct->add_option("--period-cap", period_cap, "periods may not exceed 2^N")->check(CLI::Range(4, 62));
  construct->add_option("--out", cm.out, "output directory")->required();
  add_exec_flags(construct, cm);

  auto* verify = app.add_subcommand("verify", "check the three defining inequalities of a family");
  verify->add_option("family", family_dir, "family directory")->required()->check(CLI::ExistingDirectory);
  verify->add_option("--out", cm.out, "report file (stdout if omitted)");
  add_exec_flags(verify, cm);

  auto* audit = app.add_subcommand("audit", "re-derive and check the construction's intermediate sets");
  audit->add_option("family", family_dir, "family directory")->required()->check(CLI::ExistingDirectory);
  audit->add_option("--out", cm.out, "JSON-lines output (stdout if omitted)");
  audit->add_option("--threads", cm.threads, "worker threads")->check(CLI::Range(1u, 1024u));

  int trials = 1000;
  std::int64_t max_pi = 64, block_factor = 1024;
  auto* indep = app.add_subcommand("indep", "randomized campaign for the coprime-period independence estimate");
  indep->add_option("--seed", cm.seed, "campaign seed");
  indep->add_option("--trials", trials, "instances")->check(CLI::Range(1, 10000000));
  indep->add_option("--max-pi", max_pi, "largest period")->check(CLI::Range(3, 4096));
  indep->add_option("--block-factor", block_factor, "2^n >= factor * pi1 * pi2")->check(CLI::Range(1, 1 << 20));
  indep->add_option("--out", cm.out, "summary file (stdout if omitted)");

  int j_max = 3;
  std::string eps = "1/20", factor_mode = "desk";
  std::vector<std::int64_t> desk_M;
  std::vector<std::string> factor_families;
  auto* schedule = app.add_subcommand("schedule", "schedule CSV and per-factor checks");
  schedule->add_option("--jmax", j_max, "entries j = 1..jmax with M_j = (j+1)^5")->check(CLI::Range(1, 26));
  schedule->add_option("--eps", eps, "epsilon as a rational");
  schedule->add_option("--desk-M", desk_M, "reduced M sequence (desk mode)")->delimiter(',');
  schedule->add_option("--family", factor_families, "family directories to factor-check")
      ->check(CLI::ExistingDirectory);
  schedule->add_option("--mode", factor_mode, "threshold form: desk | full")->check(CLI::IsMember({"desk", "full"}));
  schedule->add_option("--out", cm.out, "output directory (stdout if omitted)");
  add_exec_flags(schedule, cm);

  std::int64_t x = 0;
  std::vector<std::int64_t> checkpoints;
  auto* orbit = app.add_subcommand("orbit", "CSV of Furstenberg averages along one orbit");
  orbit->add_option("family", family_dir, "family directory")->required()->check(CLI::ExistingDirectory);
  orbit->add_option("--x", x, "starting point");
  orbit->add_option("--N", checkpoints, "increasing checkpoints (default: powers of two up to the period)")
      ->delimiter(',');
  orbit->add_option("--out", cm.out, "CSV file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : RSTAR_E_USAGE;
  }

  try {
    if (*construct) {
      rstar_options o = cm.options();
      rstar_params* raw = nullptr;
      if (params_path.empty())
        check(rstar_params_default(&raw));
      else
        check(rstar_params_parse(read_file(params_path).c_str(), &raw));
      std::unique_ptr<rstar_params, void (*)(rstar_params*)> p(raw, rstar_params_free);
      if (period_cap) check(rstar_params_set_log2_cap(p.get(), period_cap));
      FamilyHandle h;
      check(rstar_construct(p.get(), &o, &h.f));
      check(rstar_family_save(h.f, cm.out.c_str()));
      rstar_family_info info;
      check(rstar_family_info_get(h.f, &info));
      std::cerr << "wrote " << cm.out << ": s=" << info.s << " M=" << info.M << " n=" << info.n
                << " period=" << info.period << " psi=[" << info.alpha << "," << info.omega << "]\n";
      return 0;
    }
    if (*verify) {
      rstar_options o = cm.options();
      FamilyHandle h = load(family_dir);
      Owned rep;
      rstar_status s = rstar_verify(h.f, &o, &rep.p);
      if (s != RSTAR_OK && s != RSTAR_E_VERIFY) check(s);
      emit(cm.out, rep.str() + "\n");
      return s;
    }
    if (*audit) {
      FamilyHandle h = load(family_dir);
      Owned rec;
      std::size_t failed = 0;
      rstar_status s = rstar_audit(h.f, cm.threads, &rec.p, &failed);
      if (s != RSTAR_OK && s != RSTAR_E_VERIFY) check(s);
      emit(cm.out, rec.str());
      if (failed) std::cerr << failed << " audit records failed\n";
      return s;
    }
    if (*indep) {
      Owned sum;
      rstar_status s = rstar_indep_campaign(cm.seed, trials, max_pi, block_factor, &sum.p);
      if (s != RSTAR_OK && s != RSTAR_E_VERIFY) check(s);
      emit(cm.out, sum.str() + "\n");
      return s;
    }
    if (*schedule) {
      rstar_options o = cm.options();
      Owned csv;
      check(rstar_schedule_csv(j_max, eps.c_str(), desk_M.empty() ? nullptr : desk_M.data(), desk_M.size(), &csv.p));
      std::string factors;
      rstar_status worst = RSTAR_OK;
      for (const auto& dir : factor_families) {
        FamilyHandle h = load(dir);
        Owned rep;
        rstar_status s =
            rstar_factor_check(h.f, factor_mode == "full" ? RSTAR_FACTOR_FULL : RSTAR_FACTOR_DESK, &o, &rep.p);
        if (s != RSTAR_OK && s != RSTAR_E_VERIFY) check(s);
        if (s != RSTAR_OK) worst = s;
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(rep.str());
        j["family"] = dir;
        factors += j.dump() + "\n";
      }
      if (cm.out.empty() || cm.out == "-") {
        std::cout << csv.str();
        std::istringstream fl(factors);
        for (std::string line; std::getline(fl, line);) std::cout << "# factor " << line << "\n";
      } else {
        fs::create_directories(cm.out);
        write_atomic((fs::path(cm.out) / "schedule.csv").string(), csv.str());
        if (!factor_families.empty()) write_atomic((fs::path(cm.out) / "factors.jsonl").string(), factors);
      }
      return worst;
    }
    if (*orbit) {
      FamilyHandle h = load(family_dir);
      if (checkpoints.empty()) {
        rstar_family_info info;
        check(rstar_family_info_get(h.f, &info));
        for (std::int64_t n = 1; n <= info.period; n *= 2) checkpoints.push_back(n);
      }
      Owned csv;
      check(rstar_orbit_csv(h.f, x, checkpoints.data(), checkpoints.size(), &csv.p));
      emit(cm.out, csv.str());
      return 0;
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    try {
      die(RSTAR_E_INTERNAL, e.what());
    } catch (const Failure& f) {
      return f.code;
    }
  }
  return RSTAR_E_INTERNAL;
}
