#include "ram/experiments.hpp"

#include "ram/proposal.hpp"
#include "ram/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef RAM_DEFAULT_DATA_DIR
#define RAM_DEFAULT_DATA_DIR "data"
#endif

namespace ram {

using nlohmann::json;

namespace {

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class E>
struct NamedEnum {
  E value;
  const char* name;
};

constexpr NamedEnum<ExampleKind> kExamples[] = {
    {ExampleKind::mixture20, "mixture20"}, {ExampleKind::cube_mixture, "cube_mixture"}, {ExampleKind::sensor, "sensor"}};
constexpr NamedEnum<KernelKind> kKernels[] = {{KernelKind::ram, "ram"},
                                              {KernelKind::metropolis, "metropolis"},
                                              {KernelKind::pt, "pt"},
                                              {KernelKind::tempered, "tempered"}};
constexpr NamedEnum<BudgetRule> kBudgets[] = {{BudgetRule::none, "none"}, {BudgetRule::by_evals, "by_evals"}};
constexpr NamedEnum<RefreshPolicy> kRefresh[] = {{RefreshPolicy::reevaluate_on_change, "reevaluate_on_change"},
                                                 {RefreshPolicy::joint_cache, "joint_cache"}};
constexpr NamedEnum<MixtureCase> kCases[] = {{MixtureCase::a, "a"}, {MixtureCase::b, "b"}};

template <class E, std::size_t N>
const char* name_of(const NamedEnum<E> (&table)[N], E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

template <class E, std::size_t N>
E parse_name(const NamedEnum<E> (&table)[N], const std::string& s, const char* what) {
  for (const auto& e : table) {
    if (s == e.name) return e.value;
  }
  throw std::invalid_argument(std::string("config: unknown ") + what + " '" + s + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.length == 0) throw std::invalid_argument("config: length must be positive");
  if (c.burnin >= c.length) throw std::invalid_argument("config: burn-in must be below the chain length");
  if (c.replicates == 0) throw std::invalid_argument("config: replicates must be at least 1");
  if (!(c.sigma > 0.0)) throw std::invalid_argument("config: sigma must be positive");
  if (c.example == ExampleKind::cube_mixture && c.dim < 3) throw std::invalid_argument("config: dim must be >= 3");
  if (c.kernel == KernelKind::tempered && c.example != ExampleKind::sensor) {
    throw std::invalid_argument("config: tempered transitions are only wired up for the sensor example");
  }
  if (c.kernel == KernelKind::pt && c.example == ExampleKind::sensor) {
    throw std::invalid_argument("config: parallel tempering is not available inside the Gibbs sampler");
  }
  if (c.reference_n_pi && !(*c.reference_n_pi > 0.0)) {
    throw std::invalid_argument("config: reference_n_pi must be positive");
  }
  if (c.tune_grid.empty()) throw std::invalid_argument("config: tune_grid must not be empty");
}

std::filesystem::path mode_file(const ExperimentConfig& c) {
  return c.data_file.empty() ? default_mode_file() : c.data_file;
}

StepRecord record(bool accepted, std::uint64_t nd, std::uint64_t nu, std::uint64_t nz, std::uint64_t evals,
                  std::uint64_t refresh = 0) {
  return StepRecord{accepted, static_cast<std::uint32_t>(nd), static_cast<std::uint32_t>(nu),
                    static_cast<std::uint32_t>(nz), static_cast<std::uint32_t>(evals),
                    static_cast<std::uint32_t>(refresh)};
}

// One unblocked chain. With `adapt`, the jumping rule is reset once from the
// burn-in draws and frozen for the rest of the run.
ChainTrace drive(const ExperimentConfig& cfg, const LogTarget& target, const GaussianProposal& initial,
                 const Vector& x0, std::size_t length, std::size_t burnin, bool adapt, Rng& rng,
                 EvalCounter& counter) {
  ChainTrace trace;
  trace.dim = target.dim();
  trace.burnin = burnin;
  trace.coords.reserve(length * trace.dim);
  trace.steps.reserve(length);
  OneTimeAdaptation rule(initial);

  auto adapt_here = [&](std::size_t i) {
    if (i != burnin) return false;
    if (adapt && burnin > 0) {
      std::vector<Vector> draws;
      draws.reserve(burnin);
      for (std::size_t k = 0; k < burnin; ++k) draws.emplace_back(trace.point(k));
      rule.adapt(draws);
    }
    rule.freeze();
    return true;
  };

  switch (cfg.kernel) {
    case KernelKind::ram: {
      RamState s = init_ram_state(x0, target, counter);
      for (std::size_t i = 0; i < length; ++i) {
        adapt_here(i);
        const auto r = ram_step(s, rule.proposal(), target, rng, counter, cfg.max_tries);
        const StepRecord rec = record(r.accepted, r.n_down, r.n_up, r.n_aux, r.evals);
        trace.append(s.x, std::span(&rec, 1));
      }
      break;
    }
    case KernelKind::metropolis: {
      MetropolisState s = init_metropolis_state(x0, target, counter);
      for (std::size_t i = 0; i < length; ++i) {
        adapt_here(i);
        const bool acc = metropolis_step(s, rule.proposal(), target, rng, counter);
        const StepRecord rec = record(acc, 0, 0, 0, 1);
        trace.append(s.x, std::span(&rec, 1));
      }
      break;
    }
    case KernelKind::pt: {
      auto ladder = TemperatureLadder::shared(cfg.pt_temps, rule.proposal());
      PtEnsemble e = init_pt_ensemble(x0, ladder, target, counter);
      for (std::size_t i = 0; i < length; ++i) {
        if (adapt_here(i)) ladder = TemperatureLadder::shared(cfg.pt_temps, rule.proposal());
        const auto r = pt_step(e, ladder, target, rng, counter, cfg.swaps);
        const StepRecord rec = record(r.rung_accepted[0], 0, 0, 0, r.evals);
        trace.append(e.states[0], std::span(&rec, 1));
      }
      break;
    }
    case KernelKind::tempered:
      throw std::invalid_argument("drive: tempered transitions run through the Gibbs sampler");
  }
  return trace;
}

double mean_n_pi(const RunResult& run) {
  double acc = 0.0;
  for (const auto& c : run.chains) acc += c.summary.n_pi;
  return acc / static_cast<double>(run.chains.size());
}

// Length and burn-in after applying the matched-budget rule.
std::pair<std::size_t, std::size_t> budgeted(const ExperimentConfig& cfg, RunResult& run, bool scale_burnin) {
  if (cfg.budget == BudgetRule::none || cfg.kernel == KernelKind::ram) return {cfg.length, cfg.burnin};
  double ref = 0.0;
  if (cfg.reference_n_pi) {
    ref = *cfg.reference_n_pi;
  } else {
    ExperimentConfig rc = cfg;
    rc.kernel = KernelKind::ram;
    rc.budget = BudgetRule::none;
    ref = mean_n_pi(run_experiment(rc));
  }
  run.reference_n_pi = ref;
  const double cost = kernel_cost(cfg);
  const std::size_t length = matched_length(cfg.length, ref, cost);
  const std::size_t burnin = scale_burnin ? matched_length(cfg.burnin, ref, cost) : cfg.burnin;
  if (burnin >= length) throw std::invalid_argument("config: matched burn-in is not below the matched length");
  return {length, burnin};
}

}  // namespace

std::filesystem::path default_mode_file() {
  if (const char* env = std::getenv("RAM_DATA_DIR")) return std::filesystem::path(env) / "mixture20_modes.txt";
  return std::filesystem::path(RAM_DEFAULT_DATA_DIR) / "mixture20_modes.txt";
}

// ---------------------------------------------------------------------------
// Config

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

  static const std::vector<std::string> known = {
      "example", "kernel",        "case",     "dim",         "sigma",   "length",         "burnin",
      "replicates", "seed",       "threads",  "budget",      "reference_n_pi", "prerun_length", "pt_temps",
      "swap_proposals", "swap_probability", "sensor_seed", "refresh", "max_tries", "acf_lag", "acf_coordinate",
      "tune_grid", "data_file",   "output_dir", "rng"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  ExperimentConfig c;
  try {
    if (j.contains("example")) c.example = parse_name(kExamples, j["example"].get<std::string>(), "example");
    if (j.contains("kernel")) c.kernel = parse_name(kKernels, j["kernel"].get<std::string>(), "kernel");
    if (j.contains("case")) c.mixture_case = parse_name(kCases, j["case"].get<std::string>(), "case");
    if (j.contains("budget")) c.budget = parse_name(kBudgets, j["budget"].get<std::string>(), "budget");
    if (j.contains("refresh")) c.refresh = parse_name(kRefresh, j["refresh"].get<std::string>(), "refresh");

    switch (c.example) {
      case ExampleKind::mixture20: c.sigma = c.mixture_case == MixtureCase::a ? 4.0 : 3.5; break;
      case ExampleKind::cube_mixture: c.sigma = 1.0; break;
      case ExampleKind::sensor: c.sigma = 1.08; break;
    }
    if (c.example == ExampleKind::sensor) {
      c.length = 50000;
      c.burnin = 20000;
    }
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::remove_reference_t<decltype(field)>>();
    };
    get("dim", c.dim);
    get("sigma", c.sigma);
    get("length", c.length);
    get("burnin", c.burnin);
    get("replicates", c.replicates);
    get("seed", c.seed);
    get("threads", c.threads);
    get("prerun_length", c.prerun_length);
    get("pt_temps", c.pt_temps);
    get("swap_proposals", c.swaps.proposals);
    get("swap_probability", c.swaps.probability);
    get("sensor_seed", c.sensor_seed);
    get("max_tries", c.max_tries);
    get("acf_lag", c.acf_lag);
    get("acf_coordinate", c.acf_coordinate);
    get("tune_grid", c.tune_grid);
    if (j.contains("reference_n_pi") && !j["reference_n_pi"].is_null()) {
      c.reference_n_pi = j["reference_n_pi"].get<double>();
    }
    if (j.contains("data_file")) c.data_file = j["data_file"].get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["example"] = name_of(kExamples, c.example);
  j["kernel"] = name_of(kKernels, c.kernel);
  j["case"] = name_of(kCases, c.mixture_case);
  j["dim"] = c.dim;
  j["sigma"] = c.sigma;
  j["length"] = c.length;
  j["burnin"] = c.burnin;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["budget"] = name_of(kBudgets, c.budget);
  j["reference_n_pi"] = c.reference_n_pi ? json(*c.reference_n_pi) : json(nullptr);
  j["prerun_length"] = c.prerun_length;
  j["pt_temps"] = c.pt_temps;
  j["swap_proposals"] = c.swaps.proposals;
  j["swap_probability"] = c.swaps.probability;
  j["sensor_seed"] = c.sensor_seed;
  j["refresh"] = name_of(kRefresh, c.refresh);
  j["max_tries"] = c.max_tries;
  j["acf_lag"] = c.acf_lag;
  j["acf_coordinate"] = c.acf_coordinate;
  j["tune_grid"] = c.tune_grid;
  j["data_file"] = c.data_file.string();
  j["output_dir"] = c.output_dir.string();
  j["rng"] = std::string(Rng::kAlgorithm);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Runners

SummaryOptions summary_options(const ExperimentConfig& cfg) {
  SummaryOptions o;
  o.acf_lag = cfg.acf_lag;
  o.acf_coordinate = cfg.acf_coordinate;
  switch (cfg.example) {
    case ExampleKind::mixture20:
      o.modes = load_modes(mode_file(cfg));
      for (std::size_t j = 0; j < o.modes.size(); ++j) o.unknown.push_back(j);
      break;
    case ExampleKind::cube_mixture:
      o.modes = cube_mixture_means(cfg.dim);
      for (std::size_t j = 2; j < o.modes.size(); ++j) o.unknown.push_back(j);
      break;
    case ExampleKind::sensor: break;
  }
  return o;
}

double kernel_cost(const ExperimentConfig& cfg) {
  const std::size_t blocks = cfg.example == ExampleKind::sensor ? SensorNetwork::kUnknown : 1;
  switch (cfg.kernel) {
    case KernelKind::metropolis: return evaluation_accounting(MetropolisSchedule{blocks});
    case KernelKind::pt: return evaluation_accounting(PtSchedule{cfg.pt_temps.size(), cfg.swaps, 2.0});
    case KernelKind::tempered:
      return evaluation_accounting(TtSchedule{sensor_tt_ladder().top(), blocks});
    case KernelKind::ram: break;
  }
  throw std::invalid_argument("kernel_cost: RAM's cost is measured, not closed-form");
}

RunResult run_example1(const ExperimentConfig& cfg) {
  validate(cfg);
  RunResult run{cfg, {}, std::nullopt, {}};
  const auto [length, burnin] = budgeted(cfg, run, false);
  run.config.length = length;
  run.config.burnin = burnin;
  run.config.budget = BudgetRule::none;  // the echo reruns as-is
  run.options = summary_options(cfg);

  const GaussianMixture mixture = load_mixture20(mode_file(cfg), cfg.mixture_case);
  const LogTarget target = mixture.as_target("mixture20");
  const auto proposal = GaussianProposal::isotropic(2, cfg.sigma);

  run.chains.resize(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r);
    Vector x0(2);
    x0[0] = rng.uniform();
    x0[1] = rng.uniform();
    ChainResult& c = run.chains[r];
    c.replicate = r;
    c.trace = drive(cfg, target, proposal, x0, length, burnin, false, rng, c.counter);
    c.summary = summarize(c.trace, run.options);
  });
  return run;
}

RunResult run_example2(const ExperimentConfig& cfg) {
  validate(cfg);
  RunResult run{cfg, {}, std::nullopt, {}};
  const auto [length, burnin] = budgeted(cfg, run, true);
  run.config.length = length;
  run.config.burnin = burnin;
  run.config.budget = BudgetRule::none;  // the echo reruns as-is
  run.options = summary_options(cfg);

  const GaussianMixture mixture = make_cube_mixture(cfg.dim);
  const LogTarget target = mixture.as_target("cube_mixture");
  const std::vector<Vector> means = cube_mixture_means(cfg.dim);
  const auto preset = GaussianProposal::scaled_identity_preset(cfg.dim);

  run.chains.resize(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r);
    // Pilot chains from the two known modes; their evaluations are shared by
    // every kernel and not charged to the main chain.
    std::vector<Vector> pooled;
    pooled.reserve(2 * cfg.prerun_length);
    EvalCounter pilot_counter;
    for (std::size_t m = 0; m < 2; ++m) {
      MetropolisState s = init_metropolis_state(means[m], target, pilot_counter);
      for (std::size_t i = 0; i < cfg.prerun_length; ++i) {
        metropolis_step(s, preset, target, rng, pilot_counter);
        pooled.push_back(s.x);
      }
    }
    const GaussianProposal pilot = adapt_from_sample(pooled);
    ChainResult& c = run.chains[r];
    c.replicate = r;
    c.trace = drive(cfg, target, pilot, means[0], length, burnin, true, rng, c.counter);
    c.summary = summarize(c.trace, run.options);
  });
  return run;
}

RunResult run_example3(const ExperimentConfig& cfg) {
  validate(cfg);
  RunResult run{cfg, {}, std::nullopt, {}};
  const auto [length, burnin] = budgeted(cfg, run, false);
  run.config.length = length;
  run.config.burnin = burnin;
  run.config.budget = BudgetRule::none;  // the echo reruns as-is
  run.options = summary_options(cfg);

  const SensorNetwork net = simulate_sensor_data(SensorNetwork::default_locations(), cfg.sensor_seed);
  std::vector<BlockSpec> blocks;
  for (std::size_t k = 0; k < SensorNetwork::kUnknown; ++k) {
    BlockSpec b{"loc" + std::to_string(k + 1), {2 * k, 2 * k + 1}, BlockKernel::ram,
                GaussianProposal::isotropic(2, cfg.sigma), std::nullopt};
    if (cfg.kernel == KernelKind::metropolis) b.kernel = BlockKernel::metropolis;
    if (cfg.kernel == KernelKind::tempered) {
      b.kernel = BlockKernel::tempered;
      b.ladder = sensor_tt_ladder();
    }
    blocks.push_back(std::move(b));
  }
  const GibbsSampler sampler(net.as_target(), std::move(blocks), cfg.refresh, cfg.max_tries);

  run.chains.resize(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r);
    Vector x0(2 * SensorNetwork::kUnknown);
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = rng.uniform();
    ChainResult& c = run.chains[r];
    c.replicate = r;
    c.trace.dim = static_cast<std::size_t>(x0.size());
    c.trace.burnin = burnin;
    c.trace.block_names.clear();
    for (const auto& b : sampler.blocks()) c.trace.block_names.push_back(b.name);
    c.trace.coords.reserve(length * c.trace.dim);

    GibbsState state = sampler.init(x0, c.counter);
    std::vector<EvalCounter> counters(sampler.blocks().size());
    std::vector<StepRecord> recs(sampler.blocks().size());
    for (std::size_t i = 0; i < length; ++i) {
      const auto reps = sampler.sweep(state, rng, counters);
      for (std::size_t k = 0; k < reps.size(); ++k) {
        const auto& b = reps[k];
        recs[k] = record(b.accepted, b.n_down, b.n_up, b.n_aux, b.step_evals, b.refresh_evals);
      }
      c.trace.append(state.x, recs);
    }
    for (const auto& k : counters) c.counter += k;
    c.summary = summarize(c.trace, run.options);
  });
  return run;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.example) {
    case ExampleKind::mixture20: return run_example1(cfg);
    case ExampleKind::cube_mixture: return run_example2(cfg);
    case ExampleKind::sensor: return run_example3(cfg);
  }
  throw std::invalid_argument("run_experiment: unknown example");
}

// ---------------------------------------------------------------------------
// Persistence

void write_samples_csv(std::ostream& out, const ChainTrace& trace) {
  std::string line = "iter,kept";
  for (const auto& b : trace.block_names) {
    for (const char* f : {"acc", "nd", "nu", "nz", "evals", "refresh"}) line += "," + b + "_" + f;
  }
  for (std::size_t k = 0; k < trace.dim; ++k) line += ",x" + std::to_string(k + 1);
  out << line << '\n';

  char buf[64];
  for (std::size_t i = 0; i < trace.iterations(); ++i) {
    line = std::to_string(i) + (i >= trace.burnin ? ",1" : ",0");
    for (std::size_t b = 0; b < trace.blocks(); ++b) {
      const auto& r = trace.step(i, b);
      std::snprintf(buf, sizeof buf, ",%d,%u,%u,%u,%u,%u", r.accepted ? 1 : 0, r.n_down, r.n_up, r.n_aux, r.evals,
                    r.refresh);
      line += buf;
    }
    const auto x = trace.point(i);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", x[k]);
      line += buf;
    }
    out << line << '\n';
  }
}

namespace {

template <class T>
T parse_field(std::string_view s, std::size_t row) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("samples file: bad field '" + std::string(s) + "' on row " + std::to_string(row));
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

ChainTrace read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("samples file: missing header");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "iter" || header[1] != "kept") {
    throw std::runtime_error("samples file: unexpected header");
  }
  ChainTrace t;
  t.block_names.clear();
  std::size_t col = 2;
  while (col < header.size() && header[col].ends_with("_acc")) {
    t.block_names.emplace_back(header[col].substr(0, header[col].size() - 4));
    col += 6;
  }
  t.dim = header.size() - col;
  if (t.block_names.empty() || col > header.size() || t.dim == 0) {
    throw std::runtime_error("samples file: malformed header");
  }

  bool seen_kept = false;
  std::size_t row = 0;
  std::vector<StepRecord> recs(t.blocks());
  Vector x(static_cast<Eigen::Index>(t.dim));
  while (std::getline(in, line)) {
    const auto f = split(line);
    if (f.size() != header.size()) throw std::runtime_error("samples file: ragged row " + std::to_string(row));
    if (parse_field<std::size_t>(f[0], row) != row) throw std::runtime_error("samples file: rows out of order");
    const int kept = parse_field<int>(f[1], row);
    if (kept == 1 && !seen_kept) {
      seen_kept = true;
      t.burnin = row;
    } else if (kept == 0 && seen_kept) {
      throw std::runtime_error("samples file: burn-in row after a kept row");
    }
    std::size_t c = 2;
    for (auto& r : recs) {
      r.accepted = parse_field<int>(f[c], row) != 0;
      r.n_down = parse_field<std::uint32_t>(f[c + 1], row);
      r.n_up = parse_field<std::uint32_t>(f[c + 2], row);
      r.n_aux = parse_field<std::uint32_t>(f[c + 3], row);
      r.evals = parse_field<std::uint32_t>(f[c + 4], row);
      r.refresh = parse_field<std::uint32_t>(f[c + 5], row);
      c += 6;
    }
    for (std::size_t k = 0; k < t.dim; ++k) x[static_cast<Eigen::Index>(k)] = parse_field<double>(f[c + k], row);
    t.append(x, recs);
    ++row;
  }
  if (!seen_kept) t.burnin = row;
  return t;
}

namespace {

json summary_to_json(const ChainSummary& s) {
  json j;
  j["iterations"] = s.iterations;
  j["n_kept"] = s.n_kept;
  j["acceptance_rate"] = s.acceptance_rate;
  j["n_pi"] = s.n_pi;
  j["n_pi_raw"] = s.n_pi_raw;
  j["blocks"] = json::array();
  for (const auto& b : s.blocks) {
    j["blocks"].push_back({{"name", b.name},
                           {"acceptance_rate", b.acceptance_rate},
                           {"n_down", b.n_down},
                           {"n_up", b.n_up},
                           {"n_aux", b.n_aux},
                           {"n_pi", b.n_pi},
                           {"n_pi_raw", b.n_pi_raw}});
  }
  j["mean"] = std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size());
  j["second_moment"] = std::vector<double>(s.second_moment.data(), s.second_moment.data() + s.second_moment.size());
  j["acf"] = s.acf;
  j["mode_freq"] = s.mode_freq;
  j["modes_visited"] = s.modes_visited;
  j["modes_discovered"] = s.modes_discovered;
  return j;
}

struct MeanSd {
  double mean = 0.0, sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) m.sd += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(m.sd / static_cast<double>(v.size() - 1));
  }
  return m;
}

json across(const RunResult& run, auto&& get) {
  std::vector<double> v;
  for (const auto& c : run.chains) v.push_back(get(c));
  const auto m = mean_sd(v);
  return {{"mean", m.mean}, {"sd", m.sd}};
}

}  // namespace

std::string chain_summary_json(const ChainSummary& summary) { return summary_to_json(summary).dump(2); }

std::string run_summary_json(const RunResult& run) {
  json j;
  j["example"] = name_of(kExamples, run.config.example);
  j["kernel"] = name_of(kKernels, run.config.kernel);
  j["length"] = run.config.length;
  j["burnin"] = run.config.burnin;
  j["reference_n_pi"] = run.reference_n_pi ? json(*run.reference_n_pi) : json(nullptr);
  j["chains"] = json::array();
  for (const auto& c : run.chains) {
    json e;
    e["replicate"] = c.replicate;
    e["samples"] = "samples_" + std::to_string(c.replicate) + ".csv";
    e["summary"] = summary_to_json(c.summary);
    e["eval_counts"] = {{"downhill", c.counter.count(Phase::downhill)},
                        {"uphill", c.counter.count(Phase::uphill)},
                        {"aux_downhill", c.counter.count(Phase::aux_downhill)},
                        {"other", c.counter.count(Phase::other)},
                        {"total", c.counter.total()}};
    j["chains"].push_back(std::move(e));
  }
  if (run.chains.empty()) return j.dump(2) + "\n";

  json agg;
  agg["acceptance_rate"] = across(run, [](const ChainResult& c) { return c.summary.acceptance_rate; });
  agg["n_pi"] = across(run, [](const ChainResult& c) { return c.summary.n_pi; });
  agg["n_pi_raw"] = across(run, [](const ChainResult& c) { return c.summary.n_pi_raw; });
  const std::size_t nb = run.chains.front().summary.blocks.size();
  agg["blocks"] = json::array();
  for (std::size_t b = 0; b < nb; ++b) {
    auto field = [&](auto member) {
      return across(run, [&](const ChainResult& c) { return c.summary.blocks[b].*member; });
    };
    agg["blocks"].push_back({{"name", run.chains.front().summary.blocks[b].name},
                             {"acceptance_rate", field(&BlockSummary::acceptance_rate)},
                             {"n_down", field(&BlockSummary::n_down)},
                             {"n_up", field(&BlockSummary::n_up)},
                             {"n_aux", field(&BlockSummary::n_aux)},
                             {"n_pi", field(&BlockSummary::n_pi)}});
  }

  switch (run.config.example) {
    case ExampleKind::mixture20: {
      const auto mix = load_mixture20(mode_file(run.config), run.config.mixture_case);
      const Vector m1 = mix.mean(), m2 = mix.second_moment();
      const std::array<double, 4> truth{m1[0], m1[1], m2[0], m2[1]};
      const auto published = mixture20_truth(run.config.mixture_case);
      const char* names[] = {"E[x1]", "E[x2]", "E[x1^2]", "E[x2^2]"};
      json moments = json::object();
      for (int m = 0; m < 4; ++m) {
        std::vector<double> est;
        for (const auto& c : run.chains) {
          est.push_back(m < 2 ? c.summary.mean[m] : c.summary.second_moment[m - 2]);
        }
        const auto ms = mean_sd(est);
        moments[names[m]] = {{"mean", ms.mean}, {"sd", ms.sd}, {"truth", truth[m]},
                           {"published", published[m]}, {"mse", mse(est, truth[m])}};
      }
      agg["moments"] = moments;
      agg["modes_visited"] = across(run, [](const ChainResult& c) { return double(c.summary.modes_visited); });
      break;
    }
    case ExampleKind::cube_mixture: {
      std::vector<std::vector<double>> freqs;
      for (const auto& c : run.chains) freqs.push_back(c.summary.mode_freq);
      const std::vector<double> p(8, 1.0 / 8.0);
      agg["n_dis"] = across(run, [](const ChainResult& c) { return double(c.summary.modes_discovered); });
      agg["f_err"] = frequency_error_rate(freqs, p);
      json per = json::array();
      for (const auto& f : freqs) per.push_back(frequency_error_rate({f}, p));
      agg["f_err_per_chain"] = per;
      break;
    }
    case ExampleKind::sensor: {
      json clusters = json::array();
      for (const auto& c : run.chains) {
        std::vector<Eigen::Vector2d> loc1;
        for (std::size_t i = c.trace.burnin; i < c.trace.iterations(); ++i) {
          const auto x = c.trace.point(i);
          loc1.emplace_back(x[0], x[1]);
        }
        clusters.push_back(count_clusters(loc1));
      }
      agg["loc1_clusters"] = clusters;
      break;
    }
  }
  j["aggregate"] = std::move(agg);
  return j.dump(2) + "\n";
}

void write_run(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "config.json");
    out << config_to_json(run.config);
  }
  for (const auto& c : run.chains) {
    std::ofstream out(dir / ("samples_" + std::to_string(c.replicate) + ".csv"));
    write_samples_csv(out, c.trace);
    if (!out) throw std::runtime_error("failed writing samples to " + dir.string());
  }
  std::ofstream out(dir / "summary.json");
  out << run_summary_json(run);
  if (!out) throw std::runtime_error("failed writing summary to " + dir.string());
}

std::vector<std::string> recheck_run(const std::filesystem::path& dir) {
  const ExperimentConfig cfg = load_config(dir / "config.json");
  const SummaryOptions options = summary_options(cfg);
  std::ifstream sin(dir / "summary.json");
  if (!sin) throw std::runtime_error("missing summary.json in " + dir.string());
  const json summary = json::parse(sin);
  std::vector<std::string> bad;
  for (const auto& chain : summary.at("chains")) {
    const std::string file = chain.at("samples").get<std::string>();
    std::ifstream in(dir / file);
    if (!in) {
      bad.push_back(file);
      continue;
    }
    const ChainSummary recomputed = summarize(read_samples_csv(in), options);
    if (summary_to_json(recomputed).dump() != chain.at("summary").dump()) bad.push_back(file);
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Tuning

TuneResult tune_sigma(const ExperimentConfig& cfg) {
  validate(cfg);
  TuneResult result;
  result.pilots.resize(cfg.tune_grid.size());
  const std::size_t n_modes = summary_options(cfg).modes.size();
  parallel_for(cfg.tune_grid.size(), cfg.threads, [&](std::size_t g) {
    ExperimentConfig pc = cfg;
    pc.sigma = cfg.tune_grid[g];
    pc.replicates = 1;
    pc.threads = 1;
    pc.budget = BudgetRule::none;
    const RunResult run = run_experiment(pc);
    const ChainSummary& s = run.chains.front().summary;
    result.pilots[g] = TunePilot{pc.sigma, s.modes_visited,
                                 s.acf.empty() ? std::numeric_limits<double>::infinity() : summed_abs_acf(s.acf),
                                 s.acceptance_rate};
  });

  const TunePilot* best = nullptr;
  for (const auto& p : result.pilots) {
    if (!best || p.modes_visited > best->modes_visited ||
        (p.modes_visited == best->modes_visited && p.summed_acf < best->summed_acf)) {
      best = &p;
    }
  }
  result.sigma = best->sigma;
  result.all_modes_visited = n_modes > 0 && best->modes_visited == n_modes;
  return result;
}

}  // namespace ram
