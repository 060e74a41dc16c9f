#define RSTAR_BUILD
#include "rstar/rstar.h"

#include <cstring>
#include <new>

#include <json.hpp>

#include "rstar/analysis.hpp"
#include "rstar/counterexample.hpp"
#include "rstar/error.hpp"

struct rstar_params {
  rstar::FamilyParams p;
};
struct rstar_family {
  rstar::Family f;
};

namespace {

thread_local std::string g_error;

rstar_status set_error(rstar_status s, const std::string& msg) {
  g_error = msg;
  return s;
}

template <class F>
rstar_status guard(F&& body) {
  g_error.clear();
  try {
    return body();
  } catch (const rstar::Error& e) {
    switch (e.code()) {
      case rstar::Errc::invalid_argument: return set_error(RSTAR_E_USAGE, e.what());
      case rstar::Errc::verification: return set_error(RSTAR_E_VERIFY, e.what());
      case rstar::Errc::infeasible: return set_error(RSTAR_E_INFEASIBLE, e.what());
      default: return set_error(RSTAR_E_INTERNAL, e.what());
    }
  } catch (const std::bad_alloc&) {
    return set_error(RSTAR_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RSTAR_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(RSTAR_E_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rstar::Strategy strategy_of(rstar_strategy s) {
  switch (s) {
    case RSTAR_EXHAUSTIVE: return rstar::Strategy::exhaustive;
    case RSTAR_SPIKE: return rstar::Strategy::spike_indexed;
    case RSTAR_SAMPLED: return rstar::Strategy::sampled;
  }
  rstar::fail("unknown strategy");
}

rstar::VerifyOptions options_of(const rstar_options* opt) {
  rstar::VerifyOptions v;
  if (!opt) return v;
  rstar::require(opt->threads >= 1, "threads must be at least 1");
  v.strategy = strategy_of(opt->strategy);
  v.threads = opt->threads;
  v.samples = opt->samples;
  v.seed = opt->seed;
  return v;
}

void need(const void* p, const char* what) { rstar::require(p != nullptr, std::string(what) + " must not be null"); }

}  // namespace

extern "C" {

const char* rstar_version(void) { return "1.0.0"; }
const char* rstar_last_error(void) { return g_error.c_str(); }
void rstar_string_free(char* s) { std::free(s); }

rstar_options rstar_default_options(void) {
  rstar_options o;
  o.strategy = RSTAR_SPIKE;
  o.threads = 1;
  o.samples = 200000;
  o.seed = 1;
  return o;
}

rstar_status rstar_parse_strategy(const char* name, rstar_strategy* out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    switch (rstar::parse_strategy(name)) {
      case rstar::Strategy::exhaustive: *out = RSTAR_EXHAUSTIVE; break;
      case rstar::Strategy::spike_indexed: *out = RSTAR_SPIKE; break;
      case rstar::Strategy::sampled: *out = RSTAR_SAMPLED; break;
    }
    return RSTAR_OK;
  });
}

rstar_status rstar_params_default(rstar_params** out) {
  return guard([&] {
    need(out, "out");
    *out = new rstar_params{};
    return RSTAR_OK;
  });
}

rstar_status rstar_params_parse(const char* text, rstar_params** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    rstar::FamilyParams p = rstar::FamilyParams::parse(text);
    p.validate();
    *out = new rstar_params{p};
    return RSTAR_OK;
  });
}

rstar_status rstar_params_set_log2_cap(rstar_params* p, int log2_cap) {
  return guard([&] {
    need(p, "params");
    rstar::FamilyParams q = p->p;
    q.slack.max_log2_period = log2_cap;
    q.validate();
    p->p = q;
    return RSTAR_OK;
  });
}

rstar_status rstar_params_str(const rstar_params* p, char** out) {
  return guard([&] {
    need(p, "params");
    need(out, "out");
    *out = dup(p->p.str());
    return RSTAR_OK;
  });
}

void rstar_params_free(rstar_params* p) { delete p; }

rstar_status rstar_construct(const rstar_params* p, const rstar_options* opt, rstar_family** out) {
  return guard([&] {
    need(p, "params");
    need(out, "out");
    rstar::VerifyOptions v = options_of(opt);
    *out = new rstar_family{rstar::construct(p->p, v)};
    return RSTAR_OK;
  });
}

rstar_status rstar_family_load(const char* dir, rstar_family** out) {
  return guard([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new rstar_family{rstar::load_family(dir)};
    return RSTAR_OK;
  });
}

rstar_status rstar_family_save(const rstar_family* f, const char* dir) {
  return guard([&] {
    need(f, "family");
    need(dir, "dir");
    rstar::save_family(f->f, dir);
    return RSTAR_OK;
  });
}

rstar_status rstar_family_info_get(const rstar_family* f, rstar_family_info* out) {
  return guard([&] {
    need(f, "family");
    need(out, "out");
    out->s = f->f.params.s;
    out->M = f->f.params.M;
    out->n = f->f.n;
    out->alpha = f->f.alpha;
    out->omega = f->f.omega;
    out->period = f->f.period;
    out->phi_count = f->f.phis.size();
    out->psi_count = f->f.psis.size();
    return RSTAR_OK;
  });
}

void rstar_family_free(rstar_family* f) { delete f; }

rstar_status rstar_verify(const rstar_family* f, const rstar_options* opt, char** report_json) {
  return guard([&] {
    need(f, "family");
    need(report_json, "out");
    rstar::VerificationReport r = rstar::verify_family(f->f, options_of(opt));
    *report_json = dup(r.json());
    return r.pass() ? RSTAR_OK : set_error(RSTAR_E_VERIFY, "verification failed");
  });
}

rstar_status rstar_audit(const rstar_family* f, unsigned threads, char** records_jsonl, size_t* failed) {
  return guard([&] {
    need(f, "family");
    need(records_jsonl, "out");
    rstar::require(threads >= 1, "threads must be at least 1");
    rstar::AuditOptions o;
    o.threads = threads;
    std::string out;
    std::size_t bad = 0;
    for (const auto& c : rstar::audit_trace(f->f, o)) {
      out += rstar::to_json_line(c) + "\n";
      bad += !c.pass;
    }
    *records_jsonl = dup(out);
    if (failed) *failed = bad;
    return bad == 0 ? RSTAR_OK : set_error(RSTAR_E_VERIFY, std::to_string(bad) + " audit records failed");
  });
}

rstar_status rstar_factor_check(const rstar_family* f, rstar_factor_mode mode, const rstar_options* opt,
                                char** report_json) {
  return guard([&] {
    need(f, "family");
    need(report_json, "out");
    rstar::NormalizedPair np = rstar::normalize(f->f);
    rstar::FactorReport r = rstar::factor_check(
        np, mode == RSTAR_FACTOR_FULL ? rstar::FactorMode::full : rstar::FactorMode::desk, options_of(opt));
    *report_json = dup(r.json());
    return r.pass ? RSTAR_OK : set_error(RSTAR_E_VERIFY, "factor inequality failed");
  });
}

rstar_status rstar_indep_campaign(uint64_t seed, int trials, int64_t max_pi, int64_t block_factor,
                                  char** summary_json) {
  return guard([&] {
    need(summary_json, "out");
    rstar::CampaignOptions o;
    o.seed = seed;
    o.trials = trials;
    o.max_pi = max_pi;
    o.block_factor = block_factor;
    rstar::CampaignSummary s = rstar::independence_campaign(o);
    *summary_json = dup(s.json());
    return s.pass() ? RSTAR_OK : set_error(RSTAR_E_VERIFY, "independence campaign had failures");
  });
}

rstar_status rstar_schedule_csv(int j_max, const char* eps, const int64_t* desk_M, size_t desk_count, char** csv) {
  return guard([&] {
    need(eps, "eps");
    need(csv, "out");
    rstar::Rational e = rstar::parse_rational(eps);
    if (desk_M) {
      std::vector<rstar::Index> Ms(desk_M, desk_M + desk_count);
      *csv = dup(rstar::schedule_csv(rstar::schedule_desk(Ms, e), true));
    } else {
      *csv = dup(rstar::schedule_csv(rstar::schedule(j_max, e), false));
    }
    return RSTAR_OK;
  });
}

rstar_status rstar_sqrt_beta_sum(int J, char** json) {
  return guard([&] {
    need(json, "out");
    rstar::SqrtBetaSum r = rstar::sqrt_beta_sum(J);
    nlohmann::ordered_json j;
    j["J"] = J;
    j["sum_lo"] = rstar::decimal(r.sum.lo, 15);
    j["sum_hi"] = rstar::decimal(r.sum.hi, 15, true);
    j["tail_lo"] = rstar::decimal(r.tail.lo, 15);
    j["tail_hi"] = rstar::decimal(r.tail.hi, 15, true);
    j["tail_bound"] = r.tail_bound;
    *json = dup(j.dump());
    return RSTAR_OK;
  });
}

rstar_status rstar_orbit_csv(const rstar_family* f, int64_t x, const int64_t* checkpoints, size_t count, char** csv) {
  return guard([&] {
    need(f, "family");
    need(checkpoints, "checkpoints");
    need(csv, "out");
    rstar::NormalizedPair np = rstar::normalize(f->f);
    std::vector<rstar::Index> cp(checkpoints, checkpoints + count);
    for (std::size_t i = 0; i < cp.size(); ++i)
      rstar::require(cp[i] >= 0 && (i == 0 || cp[i] > cp[i - 1]), "checkpoints must be increasing and non-negative");
    *csv = dup(rstar::orbit_csv(np.phi_sum, np.psi_sum, x, cp));
    return RSTAR_OK;
  });
}

}  // extern "C"
