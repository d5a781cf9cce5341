// Command-line front end: instance generation, training, solving,
// diversity and Pareto studies, exact oracles. Every run that writes
// artifacts also writes a manifest sufficient to reproduce it.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "pbnco/baselines.hpp"
#include "pbnco/config.hpp"
#include "pbnco/search.hpp"
#include "pbnco/trace.hpp"
#include "pbnco/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pbnco;

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<fs::path> list_instances(const std::string& where) {
  std::vector<fs::path> files;
  const fs::path p(where);
  if (fs::is_regular_file(p)) {
    files.push_back(p);
  } else if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p))
      if (entry.is_regular_file() && entry.path().extension() == ".txt")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else {
    throw std::runtime_error("no such file or directory: " + where);
  }
  if (files.empty())
    throw std::runtime_error("no .txt instances under " + where);
  return files;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_manifest(const fs::path& path, const json& m) {
  write_text(path, m.dump(2) + "\n");
}

json checkpoint_entry(const std::string& path) {
  return json{{"path", path}, {"fnv1a64", file_digest_hex(path)}};
}

/// name -> reference objective, from a CSV of `instance,value` lines.
std::map<std::string, double> load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference file " + path);
  std::map<std::string, double> refs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("reference file " + path + ":" +
                               std::to_string(lineno) + ": expected name,value");
    const std::string name = line.substr(0, comma);
    try {
      refs[name] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header row
      throw std::runtime_error("reference file " + path + ":" +
                               std::to_string(lineno) + ": bad value");
    }
  }
  return refs;
}

struct NPat {
  // "auto" = |V| per instance, "inf" = never restart, else a fixed count.
  enum class Kind { Auto, Infinite, Fixed } kind = Kind::Fixed;
  std::int64_t value = 500;

  static NPat parse(const std::string& s) {
    if (s == "auto") return {Kind::Auto, 0};
    if (s == "inf" || s == "none") return {Kind::Infinite, -1};
    try {
      const long long v = std::stoll(s);
      if (v < 0) return {Kind::Infinite, -1};
      return {Kind::Fixed, v};
    } catch (const std::exception&) {
      throw CLI::ValidationError("--n-pat", "expected integer, 'auto' or 'inf'");
    }
  }

  std::int64_t resolve(int node_count) const {
    switch (kind) {
      case Kind::Auto: return node_count;
      case Kind::Infinite: return -1;
      default: return value;
    }
  }
};

AnytimeTrace single_point_trace(const Solution& s) {
  AnytimeTrace t;
  t.points.push_back({0, 0.0, s.objective, s.objective, 0.0});
  return t;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string family = "er";
  int count = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string prefix;
  int nodes = 30;
  double er_p = 0.15;
  int rb_groups = 5;
  int rb_group_size = 6;
  double rb_tightness = 0.6;
  double rb_constraint = 0.7;
};

int run_gen(const GenArgs& a) {
  fs::create_directories(a.out);
  const std::string prefix = a.prefix.empty() ? a.family : a.prefix;
  json files = json::array();
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    GraphInstance g;
    if (a.family == "er") {
      g = generate_er(a.nodes, a.er_p, seed);
    } else if (a.family == "rb") {
      g = generate_rb(a.rb_groups, a.rb_group_size, a.rb_tightness,
                      a.rb_constraint, seed);
    } else {
      throw std::runtime_error("unknown family: " + a.family);
    }
    std::ostringstream name;
    name << prefix << "_";
    name.width(4);
    name.fill('0');
    name << i;
    const fs::path path = fs::path(a.out) / (name.str() + ".txt");
    save_instance(g, path.string());
    files.push_back({{"file", path.filename().string()},
                     {"nodes", g.node_count},
                     {"edges", g.edge_count()},
                     {"seed", seed}});
    std::cout << path.string() << " nodes=" << g.node_count
              << " edges=" << g.edge_count() << "\n";
  }
  json manifest{{"tool", "pbnco"},
                {"version", kVersion},
                {"command", "gen"},
                {"config",
                 {{"family", a.family},
                  {"count", a.count},
                  {"seed", a.seed},
                  {"nodes", a.nodes},
                  {"er_p", a.er_p},
                  {"rb_groups", a.rb_groups},
                  {"rb_group_size", a.rb_group_size},
                  {"rb_tightness", a.rb_tightness},
                  {"rb_constraint", a.rb_constraint}}},
                {"files", files}};
  write_manifest(fs::path(a.out) / "manifest.json", manifest);
  return 0;
}

// -------------------------------------------------------------- train

struct TrainArgs {
  std::string which;  // cni | cnc
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::string out;
  std::string metrics;
  std::optional<std::uint64_t> seed;
};

TrainConfig train_config_from(const Config& c) {
  TrainConfig t;
  t.problem = parse_problem(c.get("problem", "mc"));
  t.layers = static_cast<int>(c.get_int("layers", t.layers));
  t.dim = static_cast<int>(c.get_int("dim", t.dim));
  t.heads = static_cast<int>(c.get_int("heads", t.heads));
  t.ff_dim = static_cast<int>(c.get_int("ff_dim", t.ff_dim));
  t.dense_attention = c.get_bool("dense_attention", t.dense_attention);
  t.episodes = static_cast<int>(c.get_int("episodes", t.episodes));
  t.lr = c.get_real("lr", t.lr);
  t.gamma = c.get_real("gamma", t.gamma);
  t.w_rep = c.get_real("w_rep", t.w_rep);
  t.normalized_reward = c.get_bool("normalized_reward", t.normalized_reward);
  t.natural_log_scale = c.get_bool("natural_log_scale", t.natural_log_scale);
  t.population = static_cast<int>(c.get_int("population", t.population));
  t.t_train = static_cast<int>(c.get_int("t_train", t.t_train));
  t.n_min = static_cast<int>(c.get_int("n_min", t.n_min));
  t.n_max = static_cast<int>(c.get_int("n_max", t.n_max));
  t.er_p = c.get_real("er_p", t.er_p);
  t.g_candidates = static_cast<int>(c.get_int("g_candidates", t.g_candidates));
  t.k_max = static_cast<int>(c.get_int("k_max", t.k_max));
  t.knn_k = static_cast<int>(c.get_int("knn_k", t.knn_k));
  t.omega_alpha = c.get_real("omega_alpha", t.omega_alpha);
  t.omega_beta = c.get_real("omega_beta", t.omega_beta);
  t.entropy_coef = c.get_real("entropy_coef", t.entropy_coef);
  t.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  t.validation_every =
      static_cast<int>(c.get_int("validation_every", t.validation_every));
  t.validation_instances = static_cast<int>(
      c.get_int("validation_instances", t.validation_instances));
  t.metrics_path = c.get("metrics_path", "");
  return t;
}

int run_train(const TrainArgs& a) {
  Config c = a.config_path.empty() ? Config() : Config::from_file(a.config_path);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got " + kv);
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) c.set("seed", std::to_string(*a.seed));
  if (!a.metrics.empty()) c.set("metrics_path", a.metrics);

  TrainConfig t = train_config_from(c);
  const std::string out =
      a.out.empty() ? a.which + ".ckpt" : a.out;

  std::cout << "training " << a.which << ": episodes=" << t.episodes
            << " dim=" << t.dim << " seed=" << t.seed << "\n";
  TrainResult r = a.which == "cni" ? train_cni(t) : train_cnc(t);
  save_checkpoint(out, r.checkpoint);

  if (!r.metrics.empty()) {
    const auto& last = r.metrics.back();
    std::cout << "final: loss=" << format_double(last.loss)
              << " mean_reward=" << format_double(last.mean_reward);
    if (last.validation)
      std::cout << " validation=" << format_double(*last.validation);
    std::cout << "\n";
  }

  // The resolved config (defaults filled in) is what reproduces the run.
  Config resolved;
  resolved.set("problem", problem_name(t.problem));
  resolved.set("layers", std::to_string(t.layers));
  resolved.set("dim", std::to_string(t.dim));
  resolved.set("heads", std::to_string(t.heads));
  resolved.set("ff_dim", std::to_string(t.ff_dim));
  resolved.set("dense_attention", t.dense_attention ? "true" : "false");
  resolved.set("episodes", std::to_string(t.episodes));
  resolved.set("lr", format_double(t.lr));
  resolved.set("gamma", format_double(t.gamma));
  resolved.set("w_rep", format_double(t.w_rep));
  resolved.set("normalized_reward", t.normalized_reward ? "true" : "false");
  resolved.set("natural_log_scale", t.natural_log_scale ? "true" : "false");
  resolved.set("population", std::to_string(t.population));
  resolved.set("t_train", std::to_string(t.t_train));
  resolved.set("n_min", std::to_string(t.n_min));
  resolved.set("n_max", std::to_string(t.n_max));
  resolved.set("er_p", format_double(t.er_p));
  resolved.set("g_candidates", std::to_string(t.g_candidates));
  resolved.set("k_max", std::to_string(t.k_max));
  resolved.set("knn_k", std::to_string(t.knn_k));
  resolved.set("omega_alpha", format_double(t.omega_alpha));
  resolved.set("omega_beta", format_double(t.omega_beta));
  resolved.set("entropy_coef", format_double(t.entropy_coef));
  resolved.set("seed", std::to_string(t.seed));
  resolved.set("validation_every", std::to_string(t.validation_every));
  resolved.set("validation_instances", std::to_string(t.validation_instances));
  resolved.set("metrics_path", t.metrics_path);

  json manifest{{"tool", "pbnco"},
                {"version", kVersion},
                {"command", "train " + a.which},
                {"config", json(resolved.entries())},
                {"checkpoint", checkpoint_entry(out)}};
  write_manifest(out + ".manifest.json", manifest);
  std::cout << "checkpoint: " << out << "\n";
  return 0;
}

// -------------------------------------------------------------- solve

struct SolveArgs {
  std::string problem = "mc";
  std::string method = "pbnco";
  std::string instances;
  std::string out;
  std::string cni_path, cnc_path;
  std::int64_t budget_steps = -1;
  double budget_seconds = -1.0;
  int population = 20;
  std::string n_pat = "500";
  double omega_start = 1.0;
  double phi = 1.0;
  std::string select_k = "last";
  int select_last_k = kDefaultKMax;
  int knn_k = kDefaultKnnK;
  std::size_t memory_capacity = kDefaultMemoryCapacity;
  std::string init = "random";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string reference;
  bool record_wall_clock = false;
  int ga_population = 20;
  int pso_swarm = 20;
};

struct InstanceOutcome {
  std::string name;
  double objective = 0.0;
  std::optional<double> ratio;
  std::int64_t steps = 0;
  std::int64_t restarts = 0;
  double seconds = 0.0;
};

bool is_run_mode(const std::string& method) {
  return method == "pbnco" || method == "cni_only" || method == "level1_mem" ||
         method == "random_restarts" || method == "cnc_pop" ||
         method == "uniform_walk";
}

int run_solve(const SolveArgs& a) {
  const Problem problem = parse_problem(a.problem);
  const auto files = list_instances(a.instances);
  fs::create_directories(a.out);

  std::map<std::string, double> refs;
  if (!a.reference.empty()) refs = load_reference(a.reference);

  std::optional<Checkpoint> cni, cnc;
  if (!a.cni_path.empty()) cni = load_checkpoint(a.cni_path);
  if (!a.cnc_path.empty()) cnc = load_checkpoint(a.cnc_path);

  const NPat n_pat = NPat::parse(a.n_pat);
  const bool ga = a.method == "ga";
  const bool pso = a.method == "pso";
  const bool greedy = a.method == "greedy";
  const bool cnc_greedy = a.method == "cnc_greedy";
  if (!is_run_mode(a.method) && !ga && !pso && !greedy && !cnc_greedy)
    throw std::runtime_error("unknown method: " + a.method);
  if ((ga || pso) && a.budget_steps < 0)
    throw std::runtime_error(a.method + " needs --budget-steps (generations)");
  if (cnc_greedy && !cnc)
    throw std::runtime_error("cnc_greedy needs --cnc");

  std::vector<InstanceOutcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mu;

  auto run_one = [&](std::size_t idx) {
    const auto& file = files[idx];
    const GraphInstance g = load_instance(file.string());
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(idx);
    const auto started = std::chrono::steady_clock::now();

    Solution best;
    AnytimeTrace trace;
    std::int64_t steps = 0, restarts = 0;

    if (is_run_mode(a.method)) {
      SearchConfig sc;
      sc.problem = problem;
      sc.mode = parse_run_mode(a.method);
      sc.init = a.init == "constructive" ? InitMode::Constructive
                                         : InitMode::Random;
      sc.population = a.population;
      sc.n_pat = n_pat.resolve(g.node_count);
      sc.omega_start = a.omega_start;
      sc.phi = a.phi;
      sc.select_strategy = parse_select_k(a.select_k);
      sc.select_last_k = a.select_last_k;
      sc.knn_k = a.knn_k;
      sc.memory_capacity = a.memory_capacity;
      sc.budget.max_steps = a.budget_steps;
      sc.budget.wall_clock_seconds = a.budget_seconds;
      sc.record_wall_clock = a.record_wall_clock;
      Rng rng(seed);
      SearchResult r = pbnco_run(g, cni ? &*cni : nullptr,
                                 cnc ? &*cnc : nullptr, sc, rng);
      best = std::move(r.best);
      trace = std::move(r.trace);
      steps = r.steps;
      for (auto c : r.restarts) restarts += c;
    } else if (greedy) {
      best = greedy_baseline(g, problem);
      trace = single_point_trace(best);
    } else if (ga) {
      GaConfig gc;
      gc.population = a.ga_population;
      BaselineResult r =
          ga_run(g, problem, gc, static_cast<int>(a.budget_steps), seed);
      best = std::move(r.best);
      trace = std::move(r.trace);
      steps = a.budget_steps;
    } else if (pso) {
      PsoConfig pc;
      pc.swarm = a.pso_swarm;
      BaselineResult r =
          pso_run(g, problem, pc, static_cast<int>(a.budget_steps), seed);
      best = std::move(r.best);
      trace = std::move(r.trace);
      steps = a.budget_steps;
    } else {  // cnc_greedy
      EvalContext ctx;
      Adjacency adj(g);
      Rng rng(seed);
      auto con = cnc_construct(ctx, cnc->params, g, adj, problem, {},
                               /*omega=*/0.0, cnc->meta.k_max, rng,
                               /*greedy=*/true);
      best = std::move(con.solution);
      trace = single_point_trace(best);
    }

    InstanceOutcome& o = outcomes[idx];
    o.name = file.filename().string();
    o.objective = best.objective;
    o.steps = steps;
    o.restarts = restarts;
    if (a.record_wall_clock)
      o.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    if (auto it = refs.find(o.name); it != refs.end() && it->second != 0.0)
      o.ratio = o.objective / it->second;

    std::optional<double> ref;
    if (auto it = refs.find(o.name); it != refs.end()) ref = it->second;
    const fs::path trace_path =
        fs::path(a.out) / (file.stem().string() + ".trace.csv");
    write_trace_csv(trace_path.string(), trace, ref);
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= files.size() || failed.load()) return;
      try {
        run_one(idx);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!failed.exchange(true))
          first_error = files[idx].string() + ": " + e.what();
        return;
      }
    }
  };

  const int workers = std::max(1, a.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(first_error);

  std::ostringstream csv;
  csv << "instance,objective,ratio,steps,restarts,seconds\n";
  double obj_sum = 0.0, ratio_sum = 0.0, sec_sum = 0.0;
  std::int64_t step_sum = 0, restart_sum = 0;
  int ratio_count = 0;
  for (const auto& o : outcomes) {
    csv << o.name << "," << format_double(o.objective) << ",";
    if (o.ratio) csv << format_double(*o.ratio);
    csv << "," << o.steps << "," << o.restarts << ","
        << format_double(o.seconds) << "\n";
    obj_sum += o.objective;
    sec_sum += o.seconds;
    step_sum += o.steps;
    restart_sum += o.restarts;
    if (o.ratio) {
      ratio_sum += *o.ratio;
      ++ratio_count;
    }
  }
  const double m = static_cast<double>(outcomes.size());
  csv << "__mean__," << format_double(obj_sum / m) << ",";
  if (ratio_count > 0) csv << format_double(ratio_sum / ratio_count);
  csv << "," << format_double(static_cast<double>(step_sum) / m) << ","
      << format_double(static_cast<double>(restart_sum) / m) << ","
      << format_double(sec_sum / m) << "\n";
  write_text(fs::path(a.out) / "summary.csv", csv.str());

  json config{{"problem", a.problem},
              {"method", a.method},
              {"instances", a.instances},
              {"budget_steps", a.budget_steps},
              {"budget_seconds", a.budget_seconds},
              {"population", a.population},
              {"n_pat", a.n_pat},
              {"omega_start", a.omega_start},
              {"phi", a.phi},
              {"select_k", a.select_k},
              {"select_last_k", a.select_last_k},
              {"knn_k", a.knn_k},
              {"memory_capacity", a.memory_capacity},
              {"init", a.init},
              {"seed", a.seed},
              {"workers", a.workers},
              {"record_wall_clock", a.record_wall_clock},
              {"ga_population", a.ga_population},
              {"pso_swarm", a.pso_swarm}};
  json manifest{{"tool", "pbnco"},
                {"version", kVersion},
                {"command", "solve"},
                {"config", config},
                {"instance_files", json::array()}};
  for (const auto& f : files)
    manifest["instance_files"].push_back(f.filename().string());
  if (cni) manifest["checkpoints"]["cni"] = checkpoint_entry(a.cni_path);
  if (cnc) manifest["checkpoints"]["cnc"] = checkpoint_entry(a.cnc_path);
  if (!a.reference.empty()) manifest["reference"] = a.reference;
  write_manifest(fs::path(a.out) / "manifest.json", manifest);

  std::cout << "solved " << outcomes.size() << " instances, mean objective "
            << format_double(obj_sum / m) << "\n";
  return 0;
}

// ---------------------------------------------------------- diversity

struct DiversityArgs {
  std::string cnc_path;
  std::string instances;
  std::vector<double> omegas{0.1, 0.9};
  int count = 100;
  int init_pop = 20;
  bool with_zeroed = false;
  std::uint64_t seed = 0;
  std::string out;
};

int run_diversity(const DiversityArgs& a) {
  const Checkpoint cnc = load_checkpoint(a.cnc_path);
  const auto files = list_instances(a.instances);

  std::ostringstream csv;
  csv << "instance,omega,zeroed,index,diversity\n";
  auto emit = [&](const std::string& name, double omega, bool zeroed,
                  const std::vector<double>& curve) {
    for (std::size_t i = 0; i < curve.size(); ++i)
      csv << name << "," << format_double(omega) << "," << (zeroed ? 1 : 0)
          << "," << i << "," << format_double(curve[i]) << "\n";
  };

  for (std::size_t idx = 0; idx < files.size(); ++idx) {
    const GraphInstance g = load_instance(files[idx].string());
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(idx);
    const std::string name = files[idx].filename().string();
    for (double omega : a.omegas) {
      emit(name, omega, false,
           diversity_protocol(g, cnc, omega, a.count, a.init_pop,
                              /*zero_conditioning=*/false, seed));
      if (a.with_zeroed)
        emit(name, omega, true,
             diversity_protocol(g, cnc, omega, a.count, a.init_pop,
                                /*zero_conditioning=*/true, seed));
    }
  }
  write_text(a.out, csv.str());

  json manifest{{"tool", "pbnco"},
                {"version", kVersion},
                {"command", "diversity"},
                {"config",
                 {{"instances", a.instances},
                  {"omegas", a.omegas},
                  {"count", a.count},
                  {"init_pop", a.init_pop},
                  {"with_zeroed", a.with_zeroed},
                  {"seed", a.seed}}},
                {"checkpoints", {{"cnc", checkpoint_entry(a.cnc_path)}}}};
  write_manifest(a.out + ".manifest.json", manifest);
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------- pareto

struct ParetoArgs {
  std::string cnc_path;
  std::string instances;
  std::vector<double> omegas{0.0, 0.25, 0.5, 0.75, 1.0};
  int refs = 10;
  int samples = 50;
  std::uint64_t seed = 0;
  std::string out;
};

int run_pareto(const ParetoArgs& a) {
  const Checkpoint cnc = load_checkpoint(a.cnc_path);
  const auto files = list_instances(a.instances);

  std::ostringstream csv;
  csv << "instance,omega,mean_quality,mean_diversity\n";
  std::vector<double> q_sum(a.omegas.size(), 0.0), d_sum(a.omegas.size(), 0.0);
  for (std::size_t idx = 0; idx < files.size(); ++idx) {
    const GraphInstance g = load_instance(files[idx].string());
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(idx);
    const std::string name = files[idx].filename().string();
    for (std::size_t oi = 0; oi < a.omegas.size(); ++oi) {
      const ParetoPoint p =
          pareto_point(g, cnc, a.omegas[oi], a.refs, a.samples, seed);
      csv << name << "," << format_double(p.omega) << ","
          << format_double(p.mean_quality) << ","
          << format_double(p.mean_diversity) << "\n";
      q_sum[oi] += p.mean_quality;
      d_sum[oi] += p.mean_diversity;
    }
  }
  const double m = static_cast<double>(files.size());
  for (std::size_t oi = 0; oi < a.omegas.size(); ++oi)
    csv << "__mean__," << format_double(a.omegas[oi]) << ","
        << format_double(q_sum[oi] / m) << "," << format_double(d_sum[oi] / m)
        << "\n";
  write_text(a.out, csv.str());

  json manifest{{"tool", "pbnco"},
                {"version", kVersion},
                {"command", "pareto"},
                {"config",
                 {{"instances", a.instances},
                  {"omegas", a.omegas},
                  {"refs", a.refs},
                  {"samples", a.samples},
                  {"seed", a.seed}}},
                {"checkpoints", {{"cnc", checkpoint_entry(a.cnc_path)}}}};
  write_manifest(a.out + ".manifest.json", manifest);
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------- oracle

struct OracleArgs {
  std::string problem = "mc";
  std::string instances;
  std::string out;  // empty = stdout
};

int run_oracle(const OracleArgs& a) {
  const Problem problem = parse_problem(a.problem);
  const auto files = list_instances(a.instances);
  std::ostringstream lines;
  for (const auto& f : files) {
    const GraphInstance g = load_instance(f.string());
    const BruteForceResult r = brute_force(g, problem);
    lines << f.filename().string() << " " << format_double(r.optimum) << "\n";
  }
  if (a.out.empty()) {
    std::cout << lines.str();
  } else {
    write_text(a.out, lines.str());
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"population-based neural solver for Max-Cut and MIS"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate instance files");
  cmd_gen->add_option("--family", gen.family, "er or rb")
      ->check(CLI::IsMember({"er", "rb"}));
  cmd_gen->add_option("--count", gen.count, "number of instances");
  cmd_gen->add_option("--seed", gen.seed, "base seed; instance i uses seed+i");
  cmd_gen->add_option("--out", gen.out, "output directory")->required();
  cmd_gen->add_option("--prefix", gen.prefix, "file name prefix");
  cmd_gen->add_option("--nodes", gen.nodes, "ER node count");
  cmd_gen->add_option("--er-p", gen.er_p, "ER edge probability");
  cmd_gen->add_option("--rb-groups", gen.rb_groups, "RB clique count");
  cmd_gen->add_option("--rb-group-size", gen.rb_group_size, "RB clique size");
  cmd_gen->add_option("--rb-tightness", gen.rb_tightness,
                      "RB cross-edge density p");
  cmd_gen->add_option("--rb-constraint", gen.rb_constraint,
                      "RB round multiplier a");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "train a policy");
  cmd_train->add_option("which", train.which, "cni or cnc")
      ->required()
      ->check(CLI::IsMember({"cni", "cnc"}));
  cmd_train->add_option("--config", train.config_path,
                        "key=value config file");
  cmd_train->add_option("--set", train.overrides,
                        "override config entries (key=value)");
  cmd_train->add_option("--out", train.out, "checkpoint path");
  cmd_train->add_option("--metrics", train.metrics, "metrics JSONL path");
  std::int64_t train_seed = -1;
  cmd_train->add_option("--seed", train_seed, "seed override");

  SolveArgs solve;
  auto* cmd_solve = app.add_subcommand("solve", "run a solver on instances");
  cmd_solve->add_option("--problem", solve.problem, "mc or mis");
  cmd_solve
      ->add_option("--method", solve.method,
                   "pbnco, cni_only, level1_mem, random_restarts, cnc_pop, "
                   "uniform_walk, greedy, ga, pso, cnc_greedy")
      ->required();
  cmd_solve->add_option("--instances", solve.instances, "file or directory")
      ->required();
  cmd_solve->add_option("--out", solve.out, "output directory")->required();
  cmd_solve->add_option("--cni", solve.cni_path, "improvement checkpoint");
  cmd_solve->add_option("--cnc", solve.cnc_path, "constructive checkpoint");
  cmd_solve->add_option("--budget-steps", solve.budget_steps,
                        "population steps (GA/PSO: generations)");
  cmd_solve->add_option("--budget-seconds", solve.budget_seconds,
                        "wall-clock budget");
  cmd_solve->add_option("--population", solve.population, "population size");
  cmd_solve->add_option("--n-pat", solve.n_pat,
                        "patience: integer, 'auto' (=|V|) or 'inf'");
  cmd_solve->add_option("--omega-start", solve.omega_start,
                        "restart schedule start");
  cmd_solve->add_option("--phi", solve.phi, "restart schedule exponent");
  cmd_solve->add_option("--select-k", solve.select_k,
                        "last, best_global or best_current");
  cmd_solve->add_option("--select-last-k", solve.select_last_k,
                        "k for the last strategy");
  cmd_solve->add_option("--knn-k", solve.knn_k, "memory descriptor k");
  cmd_solve->add_option("--memory-capacity", solve.memory_capacity,
                        "shared memory capacity");
  cmd_solve->add_option("--init", solve.init, "random or constructive")
      ->check(CLI::IsMember({"random", "constructive"}));
  cmd_solve->add_option("--seed", solve.seed,
                        "base seed; instance i uses seed+i");
  cmd_solve->add_option("--workers", solve.workers,
                        "instance-level parallelism");
  cmd_solve->add_option("--reference", solve.reference,
                        "CSV instance,reference for the ratio column");
  cmd_solve->add_flag("--record-wall-clock", solve.record_wall_clock,
                      "record real elapsed seconds (traces stop being "
                      "byte-reproducible)");
  cmd_solve->add_option("--ga-population", solve.ga_population,
                        "GA population size");
  cmd_solve->add_option("--pso-swarm", solve.pso_swarm, "PSO swarm size");

  DiversityArgs diversity;
  auto* cmd_div =
      app.add_subcommand("diversity", "diversity-growth study curves");
  cmd_div->add_option("--cnc", diversity.cnc_path, "constructive checkpoint")
      ->required();
  cmd_div->add_option("--instances", diversity.instances, "file or directory")
      ->required();
  cmd_div->add_option("--omega", diversity.omegas, "omega values")
      ->delimiter(',');
  cmd_div->add_option("--count", diversity.count, "solutions to generate");
  cmd_div->add_option("--init-pop", diversity.init_pop,
                      "random conditioning population");
  cmd_div->add_flag("--with-zeroed", diversity.with_zeroed,
                    "also run with conditioning channels zeroed");
  cmd_div->add_option("--seed", diversity.seed, "base seed");
  cmd_div->add_option("--out", diversity.out, "output CSV")->required();

  ParetoArgs pareto;
  auto* cmd_par =
      app.add_subcommand("pareto", "quality/diversity trade-off sweep");
  cmd_par->add_option("--cnc", pareto.cnc_path, "constructive checkpoint")
      ->required();
  cmd_par->add_option("--instances", pareto.instances, "file or directory")
      ->required();
  cmd_par->add_option("--omegas", pareto.omegas, "omega grid")->delimiter(',');
  cmd_par->add_option("--refs", pareto.refs, "conditioning set size");
  cmd_par->add_option("--samples", pareto.samples, "constructions per omega");
  cmd_par->add_option("--seed", pareto.seed, "base seed");
  cmd_par->add_option("--out", pareto.out, "output CSV")->required();

  OracleArgs oracle;
  auto* cmd_orc =
      app.add_subcommand("oracle", "exact optima for small instances");
  cmd_orc->add_option("--problem", oracle.problem, "mc or mis");
  cmd_orc->add_option("--instances", oracle.instances, "file or directory")
      ->required();
  cmd_orc->add_option("--out", oracle.out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_gen) return run_gen(gen);
    if (*cmd_train) {
      if (train_seed >= 0)
        train.seed = static_cast<std::uint64_t>(train_seed);
      return run_train(train);
    }
    if (*cmd_solve) return run_solve(solve);
    if (*cmd_div) return run_diversity(diversity);
    if (*cmd_par) return run_pareto(pareto);
    if (*cmd_orc) return run_oracle(oracle);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
