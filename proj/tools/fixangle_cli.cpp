// Command-line front end over the fixangle C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "fixangle/fixangle.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(fa_status s) {
  switch (s) {
    case FA_OK: return 0;
    case FA_ERR_NO_CONTRACTION:
    case FA_ERR_NOT_CONVERGED:
    case FA_ERR_ORACLE_FAILURE: return 3;
    case FA_ERR_IO:
    case FA_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

void check(fa_status s, const char* what) {
  if (s != FA_OK) throw Failure{exit_code_for(s), std::string(what) + ": " + fa_status_name(s) + ": " + fa_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  fa_string_free(s);
  return out;
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<fa_config, Deleter<fa_config, fa_config_free>>;
using Field = std::unique_ptr<fa_field, Deleter<fa_field, fa_field_free>>;
using Dataset = std::unique_ptr<fa_dataset, Deleter<fa_dataset, fa_dataset_free>>;
using Forward = std::unique_ptr<fa_forward_result, Deleter<fa_forward_result, fa_forward_free>>;
using Recon = std::unique_ptr<fa_recon, Deleter<fa_recon, fa_recon_free>>;

class Run {
 public:
  Run(fs::path out, bool verbose) : out_(std::move(out)), verbose_(verbose) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) throw Failure{1, "cannot create output directory " + out_.string() + ": " + ec.message()};
  }

  void log(const std::string& msg) const {
    if (verbose_) std::cerr << "[fixangle] " << msg << "\n";
  }

  fs::path path(const std::string& name) const { return out_ / name; }

  void text(const std::string& name, const std::string& content) {
    std::ofstream f(path(name), std::ios::binary);
    f << content;
    if (!f) throw Failure{1, "cannot write " + path(name).string()};
    record(name);
  }

  void field(const fa_field* f, const std::string& stem) {
    check(fa_field_write(f, path(stem).c_str()), "writing field");
    record(stem + ".bin");
    record(stem + ".json");
  }

  void dataset(const fa_dataset* d, const std::string& stem) {
    check(fa_dataset_write(d, path(stem).c_str()), "writing dataset");
    record(stem + ".json");
    record(stem + ".csv");
  }

  void manifest(const std::string& config_json, const std::string& command, int exit_code,
                const std::string& message) const {
    json m;
    m["command"] = command;
    m["config"] = json::parse(config_json);
    m["outputs"] = json::array();
    for (const auto& name : outputs_) {
      char hex[65];
      check(fa_sha256_file(path(name).c_str(), hex), "hashing output");
      m["outputs"].push_back({{"path", name}, {"sha256", std::string(hex)}});
    }
    char* versions = nullptr;
    check(fa_versions_json(&versions), "collecting versions");
    m["versions"] = json::parse(take(versions));
    m["status"] = {{"ok", exit_code == 0}, {"exit_code", exit_code}, {"message", message}};
    std::ofstream f(path("manifest.json"), std::ios::binary);
    f << m.dump(2) << "\n";
    if (!f) throw Failure{1, "cannot write manifest.json"};
  }

 private:
  void record(const std::string& name) {
    for (const auto& n : outputs_)
      if (n == name) return;
    outputs_.push_back(name);
  }

  fs::path out_;
  bool verbose_;
  std::vector<std::string> outputs_;
};

struct Context {
  Config cfg;
  json resolved;
  Run* run;
};

Field potential(const Context& c) {
  fa_field* f = nullptr;
  check(fa_field_potential(c.cfg.get(), &f), "building potential");
  return Field(f);
}

Field maybe_potential(const Context& c) {
  if (!fa_config_has_potential(c.cfg.get())) return nullptr;
  return potential(c);
}

Dataset load_dataset(const std::string& path) {
  fa_dataset* d = nullptr;
  check(fa_dataset_read(path.c_str(), &d), ("reading dataset " + path).c_str());
  return Dataset(d);
}

bool dataset_backed(const Context& c) { return c.resolved["oracle"]["backing"] == "dataset"; }

// Field and dataset handles the oracle needs for born / reconstruct.
std::pair<Field, Dataset> oracle_inputs(const Context& c) {
  if (dataset_backed(c)) {
    const json& p = c.resolved["dataset"]["path"];
    if (!p.is_string())
      throw Failure{2, "config field 'dataset.path': required when oracle.backing = dataset"};
    return {maybe_potential(c), load_dataset(p.get<std::string>())};
  }
  if (!fa_config_has_potential(c.cfg.get()))
    throw Failure{2, "config field 'potential': required when oracle.backing = synthetic"};
  return {potential(c), nullptr};
}

void cmd_forward(Context& c) {
  Field q = potential(c);
  fa_forward_result* raw = nullptr;
  const fa_status s = fa_forward(c.cfg.get(), q.get(), &raw);
  check(s, "forward solve");
  Forward r(raw);
  fa_field* us = nullptr;
  check(fa_forward_scattered(r.get(), &us), "scattered field");
  c.run->field(Field(us).get(), "scattered");
  char* csv = nullptr;
  check(fa_forward_far_field_csv(r.get(), &csv), "far field");
  c.run->text("far_field.csv", take(csv));
  char* summary = nullptr;
  check(fa_forward_summary_json(r.get(), &summary), "summary");
  c.run->text("forward.json", take(summary) + "\n");
}

void cmd_dataset(Context& c) {
  Field q = potential(c);
  fa_dataset* d = nullptr;
  check(fa_dataset_generate(c.cfg.get(), q.get(), 0.0, &d), "dataset generation");
  Dataset ds(d);
  c.run->log("tabulated " + std::to_string(fa_dataset_size(ds.get())) + " samples");
  c.run->dataset(ds.get(), "dataset");
}

void cmd_born(Context& c) {
  auto [q, ds] = oracle_inputs(c);
  fa_field* f = nullptr;
  char* summary = nullptr;
  check(fa_born(c.cfg.get(), q.get(), ds.get(), &f, &summary), "Born approximation");
  c.run->field(Field(f).get(), "born");
  c.run->text("born_summary.json", take(summary) + "\n");
}

// Returns the worst status among the runs; all outputs are written regardless.
fa_status cmd_reconstruct(Context& c) {
  auto [q, ds] = oracle_inputs(c);
  const fa_field* truth = q.get();

  std::vector<int> ms(64);
  size_t count = 0;
  check(fa_config_recon_ms(c.cfg.get(), ms.data(), ms.size(), &count), "reading recon.ms");
  ms.resize(count);
  const bool sweep = !ms.empty();
  if (!sweep) ms.push_back(c.resolved["recon"]["m"].get<int>());

  fa_status worst = FA_OK;
  std::vector<Recon> runs;
  json summaries = json::array();
  for (int m : ms) {
    fa_config* raw_cfg = nullptr;
    check(fa_config_with_m(c.cfg.get(), m, &raw_cfg), "recon.m");
    Config cfg_m(raw_cfg);
    c.run->log("reconstructing with m = " + std::to_string(m));
    fa_recon* r = nullptr;
    const fa_status s = fa_reconstruct(cfg_m.get(), q.get(), ds.get(), truth, &r);
    if (s != FA_OK && s != FA_ERR_NOT_CONVERGED) check(s, "reconstruction");
    if (s != FA_OK) {
      worst = s;
      std::cerr << "fixangle: m = " << m << ": " << fa_status_name(s) << ": " << fa_last_error() << "\n";
    }
    Recon rec(r);
    const std::string tag = sweep ? "_m" + std::to_string(m) : "";
    fa_field* f = nullptr;
    check(fa_recon_field(rec.get(), &f), "reconstruction field");
    c.run->field(Field(f).get(), "q_recon" + tag);
    char* trace = nullptr;
    check(fa_recon_trace_jsonl(rec.get(), &trace), "trace");
    c.run->text("trace" + tag + ".jsonl", take(trace));
    char* summary = nullptr;
    check(fa_recon_summary_json(rec.get(), &summary), "summary");
    summaries.push_back(json::parse(take(summary)));
    runs.push_back(std::move(rec));
  }
  if (!runs.empty()) {
    fa_field* born = nullptr;
    check(fa_recon_born_field(runs.front().get(), &born), "Born iterate");
    c.run->field(Field(born).get(), "born");
  }
  c.run->text("recon.json", summaries.dump(2) + "\n");
  if (sweep && truth) {
    std::vector<const fa_recon*> handles;
    for (const auto& r : runs) handles.push_back(r.get());
    char* report = nullptr;
    check(fa_convergence_report(c.cfg.get(), handles.data(), handles.size(), truth, &report),
          "convergence report");
    c.run->text("convergence.json", take(report) + "\n");
  }
  return worst;
}

fa_status cmd_uniqueness(Context& c) {
  std::vector<std::string> paths;
  for (const auto& p : c.resolved["dataset"]["paths"]) paths.push_back(p.get<std::string>());
  if (paths.empty() && c.resolved["dataset"]["path"].is_string())
    paths.push_back(c.resolved["dataset"]["path"].get<std::string>());
  if (paths.size() > 2) throw Failure{2, "config field 'dataset.paths': at most two datasets"};

  std::vector<Dataset> sets;
  for (const auto& p : paths) sets.push_back(load_dataset(p));
  if (sets.empty()) {
    if (!fa_config_has_potential(c.cfg.get()))
      throw Failure{2, "config field 'dataset.paths': no datasets given and no potential to tabulate"};
    Field q = potential(c);
    fa_dataset* d = nullptr;
    check(fa_dataset_generate(c.cfg.get(), q.get(), 0.0, &d), "dataset generation");
    sets.emplace_back(d);
    c.run->dataset(d, "dataset");
  }
  char* report = nullptr;
  const fa_status s =
      fa_uniqueness(c.cfg.get(), sets[0].get(), sets.size() > 1 ? sets[1].get() : nullptr, &report);
  if (s != FA_OK && s != FA_ERR_NOT_CONVERGED) check(s, "uniqueness check");
  c.run->text("uniqueness.json", take(report) + "\n");
  return s;
}

void cmd_pw_demo(Context& c) {
  char* csv = nullptr;
  char* report = nullptr;
  check(fa_pw_scan(c.cfg.get(), nullptr, &csv, &report), "Paley-Wiener scan");
  c.run->text("pw_scan.csv", take(csv));
  c.run->text("pw_scan.json", take(report) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-angle inverse scattering: forward solves, datasets, Born and iterative reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  bool verbose = false;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--verbose", verbose, "Progress and warnings on stderr");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"forward", "Solve one scattering problem and sample its far field"},
      {"dataset", "Tabulate far-field data at both incident directions"},
      {"born", "Born approximation from a dataset or synthetic oracle"},
      {"reconstruct", "Iterative reconstruction with the Born series"},
      {"uniqueness", "Determinism and data-to-reconstruction uniqueness check"},
      {"pw-demo", "Complex-frequency growth scan of a compactly supported field"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  fa_set_threads(threads);
  int code = 0;
  std::string message;
  std::unique_ptr<Run> run;
  Context ctx;
  try {
    fa_config* raw = nullptr;
    check(fa_config_load(config_path.c_str(), &raw), "loading config");
    ctx.cfg.reset(raw);
    char* resolved = nullptr;
    check(fa_config_to_json(ctx.cfg.get(), &resolved), "resolving config");
    ctx.resolved = json::parse(take(resolved));
    if (verbose) {
      char* warnings = nullptr;
      check(fa_config_warnings(ctx.cfg.get(), &warnings), "config warnings");
      const std::string w = take(warnings);
      if (!w.empty()) std::cerr << "[fixangle] warning: " << w;
    }
    run = std::make_unique<Run>(out_dir, verbose);
    ctx.run = run.get();
    run->log(command + " -> " + out_dir);

    fa_status soft = FA_OK;
    if (command == "forward") cmd_forward(ctx);
    else if (command == "dataset") cmd_dataset(ctx);
    else if (command == "born") cmd_born(ctx);
    else if (command == "reconstruct") soft = cmd_reconstruct(ctx);
    else if (command == "uniqueness") soft = cmd_uniqueness(ctx);
    else if (command == "pw-demo") cmd_pw_demo(ctx);
    if (soft != FA_OK) {
      code = exit_code_for(soft);
      message = fa_status_name(soft);
    }
  } catch (const Failure& f) {
    code = f.exit_code;
    message = f.message;
    std::cerr << "fixangle: " << f.message << "\n";
  } catch (const std::exception& e) {
    code = 1;
    message = e.what();
    std::cerr << "fixangle: " << e.what() << "\n";
  }

  if (run && ctx.cfg) {
    try {
      run->manifest(ctx.resolved.dump(), command, code, message);
    } catch (const Failure& f) {
      std::cerr << "fixangle: " << f.message << "\n";
      if (code == 0) code = f.exit_code;
    }
  }
  return code;
}
