#include "simuda/cli/grid.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <iostream>
#include <map>
#include <set>

#include "simuda/cli/experiment.hpp"
#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"
#include "simuda/trainer/manifest.hpp"

extern char** environ;

namespace simuda::cli {

namespace fs = std::filesystem;

namespace {

std::vector<Value> axis(const KeyValueDoc& doc, const std::string& key) {
  const Value* v = doc.find(key);
  if (!v) return {};
  if (!v->is_array()) return {*v};
  const auto& items = v->as_array(key);
  if (items.empty()) throw ConfigError("grid axis '" + key + "' is empty");
  return items;
}

std::string lr_text(double lr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lr);
  return buf;
}

std::string fmt2(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

KeyValueDoc ch_stage_doc(const KeyValueDoc& base, std::uint64_t seed, const std::string& name) {
  KeyValueDoc d;
  for (const auto& [k, v] : base.entries()) {
    if (k.rfind("optim.", 0) == 0 || k.rfind("uda.", 0) == 0 || k == "train.init_checkpoint") continue;
    d.set(k, v);
  }
  const auto ch = trainer::TrainConfig::from_doc([&] {
    KeyValueDoc probe = d;
    probe.set("run.scheme", Value::string("CH"));
    return probe;
  }());
  d.set("run.scheme", Value::string("CH"));
  d.set("run.name", Value::string(name));
  d.set("run.seed", Value::integer(static_cast<std::int64_t>(seed)));
  d.set("optim.lr", Value::real(ch.ch.lr));
  d.set("train.epochs", Value::integer(ch.ch.epochs));
  return d;
}

struct Job {
  std::vector<std::string> argv;
  fs::path log;
};

// Runs jobs with at most `parallel` children alive; returns exit codes in job order.
std::vector<int> run_jobs(const std::vector<Job>& jobs, int parallel, bool quiet) {
  std::vector<int> codes(jobs.size(), -1);
  std::map<pid_t, std::size_t> running;
  std::size_t next = 0;
  auto reap_one = [&] {
    int status = 0;
    const pid_t pid = ::waitpid(-1, &status, 0);
    if (pid <= 0) throw StateError("waitpid failed");
    const auto it = running.find(pid);
    if (it == running.end()) return;
    codes[it->second] = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    if (!quiet) std::cerr << "[grid] finished " << jobs[it->second].log.parent_path().filename().string() << " (exit "
                          << codes[it->second] << ")\n";
    running.erase(it);
  };
  while (next < jobs.size() || !running.empty()) {
    while (next < jobs.size() && static_cast<int>(running.size()) < std::max(1, parallel)) {
      const Job& job = jobs[next];
      fs::create_directories(job.log.parent_path());
      posix_spawn_file_actions_t actions;
      posix_spawn_file_actions_init(&actions);
      posix_spawn_file_actions_addopen(&actions, 1, job.log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      posix_spawn_file_actions_adddup2(&actions, 1, 2);
      std::vector<char*> argv;
      for (const auto& a : job.argv) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      pid_t pid = 0;
      const int rc = ::posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
      posix_spawn_file_actions_destroy(&actions);
      if (rc != 0) throw DependencyError("cannot start '" + job.argv[0] + "'");
      running[pid] = next;
      ++next;
    }
    if (!running.empty()) reap_one();
  }
  return codes;
}

}  // namespace

GridSpec GridSpec::parse(const KeyValueDoc& doc) {
  GridSpec g;
  static const std::set<std::string> grid_keys = {"grid.name",        "grid.max_cells",       "grid.lr",
                                                  "grid.augmentation", "grid.scheme",         "grid.uda_method",
                                                  "grid.init_checkpoint", "grid.seed"};
  for (const auto& [k, v] : doc.entries()) {
    if (k.rfind("grid.", 0) == 0) {
      if (!grid_keys.count(k)) throw ConfigError("unknown grid key '" + k + "'");
      continue;
    }
    g.base.set(k, v);
  }
  if (const Value* v = doc.find("grid.name")) g.name = v->as_string("grid.name");
  if (const Value* v = doc.find("grid.max_cells")) g.max_cells = static_cast<int>(v->as_integer("grid.max_cells"));
  for (const auto& v : axis(doc, "grid.lr")) g.lrs.push_back(v.as_real("grid.lr"));
  for (const auto& v : axis(doc, "grid.augmentation")) g.augmentations.push_back(v.as_string("grid.augmentation"));
  for (const auto& v : axis(doc, "grid.scheme")) g.schemes.push_back(v.as_string("grid.scheme"));
  for (const auto& v : axis(doc, "grid.uda_method")) g.uda_methods.push_back(v.as_string("grid.uda_method"));
  for (const auto& v : axis(doc, "grid.init_checkpoint")) {
    const auto& s = v.as_string("grid.init_checkpoint");
    if (s != "hub" && s != "CH") throw ConfigError("invalid grid.init_checkpoint '" + s + "' (valid: hub, CH)");
    g.inits.push_back(s);
  }
  for (const auto& v : axis(doc, "grid.seed")) {
    const auto s = v.as_integer("grid.seed");
    if (s < 0) throw ConfigError("grid.seed values must be non-negative");
    g.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  // Enum values are checked up front so a typo fails before any run starts.
  for (const auto& s : g.schemes) trainer::parse_scheme(s);
  for (const auto& m : g.uda_methods) adapt::parse_uda_method(m);
  for (const auto& a : g.augmentations) datakit::parse_augment_kind(a);
  return g;
}

GridSpec GridSpec::load(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("gridspec '" + path.string() + "' not found");
  return parse(KeyValueDoc::load(path));
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "cell",  "Model",  "Pre-training", "train scheme", "transform",    "lr",           "Acc@1",
      "uda_method", "init", "seed", "status", "best_epoch", "target_macro", "target_micro", "val_top1", "run_dir"};
  return cols;
}

GridPlan expand_grid(const GridSpec& spec, const fs::path& out_dir) {
  auto base_value = [&](const std::string& key, const std::string& fallback) {
    const Value* v = spec.base.find(key);
    return v ? v->as_string(key) : fallback;
  };
  const std::vector<std::string> schemes =
      spec.schemes.empty() ? std::vector<std::string>{base_value("run.scheme", "FT")} : spec.schemes;
  const std::vector<std::string> inits = spec.inits.empty() ? std::vector<std::string>{"hub"} : spec.inits;
  const std::vector<std::string> methods =
      spec.uda_methods.empty() ? std::vector<std::string>{base_value("uda.method", "cdan_mcc")} : spec.uda_methods;
  const std::vector<std::string> augs = spec.augmentations.empty() ? std::vector<std::string>{""} : spec.augmentations;
  const std::vector<double> lrs = spec.lrs.empty() ? std::vector<double>{0.0} : spec.lrs;
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (seeds.empty()) {
    const Value* v = spec.base.find("run.seed");
    seeds.push_back(v ? static_cast<std::uint64_t>(v->as_integer("run.seed")) : 42);
  }

  const std::size_t total = schemes.size() * inits.size() * methods.size() * augs.size() * lrs.size() * seeds.size();
  if (total > static_cast<std::size_t>(spec.max_cells)) {
    throw ConfigError("grid expands to " + std::to_string(total) + " cells, above grid.max_cells = " +
                      std::to_string(spec.max_cells));
  }

  GridPlan plan;
  plan.expanded = total;
  std::map<std::string, std::string> seen;  // rendered config (sans name) -> cell id
  std::set<std::uint64_t> ch_seeds;
  for (const auto& scheme_name : schemes) {
    const auto scheme = trainer::parse_scheme(scheme_name);
    for (const auto& init_axis : inits) {
      for (const auto& method : methods) {
        for (const auto& aug : augs) {
          for (double lr : lrs) {
            for (std::uint64_t seed : seeds) {
              GridCell cell;
              cell.seed = seed;
              cell.init = scheme == trainer::Scheme::UDA ? init_axis
                          : scheme == trainer::Scheme::CH_FT ? "CH"
                                                             : "";
              KeyValueDoc d = spec.base;
              d.set("run.scheme", Value::string(scheme_name));
              d.set("run.seed", Value::integer(static_cast<std::int64_t>(seed)));
              d.set("uda.method", Value::string(scheme == trainer::Scheme::UDA ? method : "none"));
              if (!aug.empty()) d.set("train.augmentation", Value::string(aug));
              if (!spec.lrs.empty()) d.set("optim.lr", Value::real(lr));
              const fs::path ch_dir = out_dir / ("ch-stage-seed" + std::to_string(seed));
              if (cell.init == "CH") d.set("train.init_checkpoint", Value::string(ch_dir.string()));
              else d.erase("train.init_checkpoint");
              if (scheme == trainer::Scheme::CH) {
                for (const char* k : {"optim.kind", "optim.scheduler", "optim.warmup_epochs", "optim.weight_decay"}) {
                  d.erase(k);
                }
              }
              d.set("run.name", Value::string(""));
              const std::string key = d.render();
              if (const auto it = seen.find(key); it != seen.end()) {
                plan.warnings.push_back("duplicate cell (scheme " + scheme_name + ", init " + init_axis + ", method " +
                                        method + ") merged into " + it->second);
                continue;
              }
              char id[32];
              std::snprintf(id, sizeof id, "cell-%03zu", plan.cells.size() + 1);
              cell.id = id;
              seen[key] = cell.id;
              d.set("run.name", Value::string(cell.id));
              cell.config = trainer::TrainConfig::from_doc(d);
              cell.doc = std::move(d);
              cell.run_dir = out_dir / "cells" / cell.id;
              if (cell.init == "CH") ch_seeds.insert(seed);
              plan.cells.push_back(std::move(cell));
            }
          }
        }
      }
    }
  }
  for (std::uint64_t seed : ch_seeds) {
    ChStage st;
    st.seed = seed;
    st.run_dir = out_dir / ("ch-stage-seed" + std::to_string(seed));
    st.doc = ch_stage_doc(spec.base, seed, st.run_dir.filename().string());
    trainer::TrainConfig::from_doc(st.doc);  // validate
    plan.ch_stages.push_back(std::move(st));
  }
  return plan;
}

fs::path grid(const GridOptions& options) {
  GridSpec spec = GridSpec::load(options.gridspec);
  if (options.seed) spec.seeds = {*options.seed};
  if (options.deterministic) spec.base.set("run.deterministic", Value::boolean(*options.deterministic));
  const GridPlan plan = expand_grid(spec, options.out);
  for (const auto& w : plan.warnings) std::cerr << "[grid] warning: " << w << "\n";
  if (!options.quiet) {
    std::cerr << "[grid] " << plan.cells.size() << " cells (" << plan.expanded << " expanded), "
              << plan.ch_stages.size() << " CH stages, parallel " << options.parallel << "\n";
  }
  fs::create_directories(options.out);
  const std::string exe = options.executable.string();

  auto job_for = [&](const KeyValueDoc& doc, const fs::path& dir) {
    fs::create_directories(dir);
    const auto cfg = dir / "cell.toml";
    write_text_atomic(cfg, doc.render());
    return Job{{exe, "run", "--config", cfg.string(), "--out", dir.string()}, dir / "log.txt"};
  };

  std::vector<Job> ch_jobs;
  for (const auto& st : plan.ch_stages) ch_jobs.push_back(job_for(st.doc, st.run_dir));
  const auto ch_codes = run_jobs(ch_jobs, options.parallel, options.quiet);
  std::map<std::uint64_t, int> ch_status;
  for (std::size_t i = 0; i < plan.ch_stages.size(); ++i) ch_status[plan.ch_stages[i].seed] = ch_codes[i];

  std::vector<Job> jobs;
  std::vector<std::size_t> job_cell;
  std::map<std::size_t, std::string> skipped;
  for (std::size_t i = 0; i < plan.cells.size(); ++i) {
    const auto& cell = plan.cells[i];
    if (cell.init == "CH" && ch_status[cell.seed] != 0) {
      skipped[i] = "ch-stage-failed";
      continue;
    }
    jobs.push_back(job_for(cell.doc, cell.run_dir));
    job_cell.push_back(i);
  }
  const auto codes = run_jobs(jobs, options.parallel, options.quiet);
  std::map<std::size_t, int> exit_codes;
  for (std::size_t j = 0; j < jobs.size(); ++j) exit_codes[job_cell[j]] = codes[j];

  std::string csv;
  for (std::size_t i = 0; i < summary_columns().size(); ++i) csv += (i ? "," : "") + summary_columns()[i];
  csv += "\n";
  for (std::size_t i = 0; i < plan.cells.size(); ++i) {
    const auto& cell = plan.cells[i];
    const auto& c = cell.config;
    std::string status;
    std::string best_epoch = "", macro = "n/a", micro = "n/a", val = "n/a";
    if (skipped.count(i)) {
      status = skipped[i];
    } else {
      try {
        const auto m = trainer::RunManifest::load(cell.run_dir);
        status = m.status;
        if (m.best_epoch) {
          const auto& b = m.epochs.at(static_cast<std::size_t>(*m.best_epoch - 1));
          best_epoch = std::to_string(b.epoch);
          if (b.target.count("macro")) macro = fmt2(b.target.at("macro"));
          if (b.target.count("micro")) micro = fmt2(b.target.at("micro"));
          if (b.val.count("top1")) val = fmt2(b.val.at("top1"));
        }
      } catch (const Error&) {
        status = "failed (exit " + std::to_string(exit_codes[i]) + ")";
      }
      if (exit_codes[i] != 0 && status.rfind("failed", 0) != 0) status = "failed (exit " + std::to_string(exit_codes[i]) + ")";
    }
    const std::string model = c.model.source == backbone::BackboneSource::compact
                                  ? "compact-" + std::to_string(c.model.feature_dim)
                                  : c.model.hub_id;
    const std::string pretraining = c.model.source == backbone::BackboneSource::compact ? "random init" : "hub";
    const std::vector<std::string> row = {cell.id,
                                          model,
                                          pretraining,
                                          c.method_label(),
                                          std::string(datakit::to_string(c.augmentation)),
                                          lr_text(c.optim.lr),
                                          micro,
                                          c.uda.method ? std::string(adapt::to_string(*c.uda.method)) : "",
                                          cell.init,
                                          std::to_string(c.seed),
                                          status,
                                          best_epoch,
                                          macro,
                                          micro,
                                          val,
                                          cell.run_dir.string()};
    for (std::size_t k = 0; k < row.size(); ++k) csv += (k ? "," : "") + csv_field(row[k]);
    csv += "\n";
  }
  const auto summary = options.out / "summary.csv";
  write_text_atomic(summary, csv);
  std::cout << "grid summary: " << summary.string() << " (" << plan.cells.size() << " cells)" << std::endl;
  return summary;
}

}  // namespace simuda::cli
