#include "mcflab/mcflab.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "mcflab/curvature.hpp"
#include "mcflab/diagnostics.hpp"
#include "mcflab/lab.hpp"
#include "mcflab/run.hpp"
#include "mcflab/singularity.hpp"

struct mcf_config {
  mcflab::LabConfig c;
};
struct mcf_surface {
  mcflab::Hypersurface s;
};
struct mcf_run {
  mcflab::RunResult r;
  std::string header;
};

namespace {

thread_local std::string last_error;

template <class F>
mcf_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return MCF_OK;
  } catch (const mcflab::Error& e) {
    last_error = e.what();
    return static_cast<mcf_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    last_error = e.what();
    return MCF_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return MCF_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) mcflab::fail(mcflab::ErrorCode::invalid_argument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mcflab::CommandOptions options(int quiet, int seed_set, uint64_t seed) {
  mcflab::CommandOptions o;
  o.quiet = quiet != 0;
  o.seed_set = seed_set != 0;
  o.seed = seed;
  return o;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

extern "C" {

const char* mcf_last_error(void) { return last_error.c_str(); }
const char* mcf_version(void) { return "1.0.0"; }
void mcf_string_free(char* s) { std::free(s); }

mcf_status mcf_config_default(mcf_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new mcf_config{};
  });
}

mcf_status mcf_config_parse_text(const char* text, mcf_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new mcf_config{mcflab::parse_config_text(text)};
  });
}

mcf_status mcf_config_parse_file(const char* path, mcf_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new mcf_config{mcflab::parse_config(path)};
  });
}

mcf_status mcf_config_set(mcf_config* cfg, const char* section, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(section, "section");
    need(key, "key");
    need(value, "value");
    mcflab::LabConfig next = cfg->c;
    mcflab::set_config_value(next, section, key, value);
    mcflab::validate_config(next);
    cfg->c = next;
  });
}

mcf_status mcf_config_serialize(const mcf_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup(mcflab::serialize_config(cfg->c));
  });
}

mcf_status mcf_config_hash(const mcf_config* cfg, char* out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    const std::string h = mcflab::config_hash(cfg->c);
    std::memcpy(out, h.c_str(), h.size() + 1);
  });
}

void mcf_config_free(mcf_config* cfg) { delete cfg; }

mcf_status mcf_surface_build(const mcf_config* cfg, mcf_surface** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = new mcf_surface{mcflab::build_scenario(cfg->c.scenario)};
  });
}

mcf_status mcf_surface_node_count(const mcf_surface* s, size_t* out) {
  return guard([&] {
    need(s, "surface");
    need(out, "out");
    *out = s->s.node_count();
  });
}

mcf_status mcf_surface_dimension(const mcf_surface* s, int* out) {
  return guard([&] {
    need(s, "surface");
    need(out, "out");
    *out = s->s.dimension();
  });
}

mcf_status mcf_surface_area(const mcf_surface* s, double* out) {
  return guard([&] {
    need(s, "surface");
    need(out, "out");
    double a = 0;
    for (double w : s->s.weights()) a += w;
    *out = a;
  });
}

mcf_status mcf_surface_curvature(const mcf_surface* s, int m_max, double* mean_curvature, double* norm_A_sq) {
  return guard([&] {
    need(s, "surface");
    const auto f = mcflab::curvature_field(s->s, m_max);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (mean_curvature) mean_curvature[i] = f.mean_curvature[i];
      if (norm_A_sq) norm_A_sq[i] = f.norm_A_sq[i];
    }
  });
}

mcf_status mcf_surface_int_traceless_sq(const mcf_surface* s, double* out) {
  return guard([&] {
    need(s, "surface");
    need(out, "out");
    const auto f = mcflab::curvature_field(s->s, 0);
    const auto& w = s->s.weights();
    double sum = 0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * f.norm_Ao_sq[i];
    *out = sum;
  });
}

void mcf_surface_free(mcf_surface* s) { delete s; }

mcf_status mcf_run_flow(const mcf_config* cfg, mcf_progress_fn progress, void* user, mcf_run** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    mcflab::ProgressFn fn;
    if (progress)
      fn = [progress, user](const mcflab::DiagnosticsRecord& r) {
        return progress(r.step, r.t, r.sup_A * r.sup_A, user) != 0;
      };
    auto run = std::make_unique<mcf_run>();
    run->r = mcflab::run_flow(mcflab::build_scenario(cfg->c.scenario), cfg->c.flow, fn);
    run->header = mcflab::series_csv_header();
    while (!run->header.empty() && (run->header.back() == '\n' || run->header.back() == '\r')) run->header.pop_back();
    *out = run.release();
  });
}

const char* mcf_run_cause(const mcf_run* run) { return run ? mcflab::to_string(run->r.cause) : ""; }

size_t mcf_run_record_count(const mcf_run* run) { return run ? run->r.series.size() : 0; }

mcf_status mcf_run_series_value(const mcf_run* run, size_t index, const char* key, double* out) {
  return guard([&] {
    need(run, "run");
    need(key, "key");
    need(out, "out");
    mcflab::require(index < run->r.series.size(), mcflab::ErrorCode::invalid_argument, "record index out of range");
    const auto cols = split_csv(run->header);
    std::size_t k = 0;
    while (k < cols.size() && cols[k] != key) ++k;
    mcflab::require(k < cols.size(), mcflab::ErrorCode::invalid_argument, std::string("unknown column '") + key + "'");
    std::string row = mcflab::series_csv_row(run->r.series[index]);
    while (!row.empty() && (row.back() == '\n' || row.back() == '\r')) row.pop_back();
    const auto cells = split_csv(row);
    *out = k < cells.size() && !cells[k].empty() ? std::strtod(cells[k].c_str(), nullptr)
                                                 : std::numeric_limits<double>::quiet_NaN();
  });
}

mcf_status mcf_run_singular_time(const mcf_run* run, double* T_est, int* determined) {
  return guard([&] {
    need(run, "run");
    need(T_est, "T_est");
    const auto e = mcflab::estimate_singular_time(run->r.series, run->r.cause);
    *T_est = e.T_est;
    if (determined) *determined = e.determined ? 1 : 0;
  });
}

mcf_status mcf_run_final_surface(const mcf_run* run, mcf_surface** out) {
  return guard([&] {
    need(run, "run");
    need(out, "out");
    *out = new mcf_surface{run->r.final_state.surface};
  });
}

void mcf_run_free(mcf_run* run) { delete run; }

int mcf_cmd_run(const char* config_path, const char* out_dir, int quiet, int seed_set, uint64_t seed) {
  if (!config_path || !out_dir) {
    std::cerr << "error: config path and output directory are required\n";
    return 1;
  }
  return mcflab::cmd_run(config_path, out_dir, options(quiet, seed_set, seed), std::cerr);
}

int mcf_cmd_sweep(const char* config_path, const char* key, const double* values, size_t count, const char* out_dir,
                  int quiet, int seed_set, uint64_t seed) {
  if (!config_path || !key || !out_dir || (count > 0 && !values)) {
    std::cerr << "error: config path, sweep key and output directory are required\n";
    return 1;
  }
  std::vector<double> v(values, values + count);
  return mcflab::cmd_sweep(config_path, key, v, out_dir, options(quiet, seed_set, seed), std::cerr);
}

int mcf_cmd_check(const char* config_path, const char* out_dir, int quiet) {
  return mcflab::cmd_check(config_path ? std::filesystem::path(config_path) : std::filesystem::path(),
                           out_dir ? std::filesystem::path(out_dir) : std::filesystem::path(), options(quiet, 0, 0),
                           std::cout);
}

int mcf_cmd_export(const char* run_dir, const char* format) {
  if (!run_dir || !format) {
    std::cerr << "error: run directory and format are required\n";
    return 1;
  }
  return mcflab::cmd_export(run_dir, format, std::cerr);
}

}  // extern "C"
