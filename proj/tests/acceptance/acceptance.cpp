// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "ram/experiments.hpp"
#include "ram/kernels.hpp"
#include "ram/oracle.hpp"
#include "scripted_rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace ram;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  std::printf("%s C%d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig config(const std::string& file) { return load_config(std::filesystem::path(RAM_CONFIG_DIR) / file); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void c1_oracle_invariance() {
  const auto t0 = std::chrono::steady_clock::now();
  Vector bimodal(5);
  bimodal << 4, 1, 0.01, 1, 4;
  const std::vector<std::pair<Vector, Matrix>> cases{{Eigen::Vector3d(1, 2, 4), oracle::uniform_other_states(3)},
                                                     {bimodal, oracle::nearest_neighbour(5)}};
  double stat = 0.0, db = 0.0, marg = 0.0;
  for (const auto& [pi, q] : cases) {
    const auto m = oracle::build_ram_joint_matrix(pi, q);
    const Vector t = oracle::ram_joint_target(pi, q);
    stat = std::max(stat, oracle::check_stationarity(m, t));
    db = std::max(db, oracle::detailed_balance_residual(m, t));
    const Vector s = oracle::stationary_distribution(m.P);
    marg = std::max(marg, (oracle::x_marginal(s, static_cast<std::size_t>(pi.size())) - pi / pi.sum())
                              .cwiseAbs()
                              .maxCoeff());
  }
  const double secs = seconds_since(t0);
  report(1, "oracle invariance", stat < 1e-10 && db < 1e-10 && marg < 1e-10 && secs < 5.0,
         fmt("stationarity %.2e, detailed balance %.2e, x-marginal %.2e (< 1e-10), %.2f s (< 5)", stat, db, marg,
             secs));
}

void c2_oracle_simulation() {
  const auto t0 = std::chrono::steady_clock::now();
  const Vector pi = Eigen::Vector3d(1, 2, 4);
  const Matrix q = oracle::uniform_other_states(3);
  const auto m = oracle::build_ram_joint_matrix(pi, q);
  const oracle::DiscreteProposal prop(q);
  const LogTarget target = oracle::discrete_log_target(pi);
  Rng rng(20240601);
  EvalCounter counter;
  const std::size_t total = 1'000'000, rows = 9;
  double worst = 0.0;
  bool impossible_hit = false;
  for (std::size_t row = 0; row < rows; ++row) {
    const std::size_t n = total / rows + (row < total % rows ? 1 : 0);
    const std::size_t x0 = row / 3, z0 = row % 3;
    std::vector<double> counts(rows, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      RamState s{Vector::Constant(1, static_cast<double>(x0)), Vector::Constant(1, static_cast<double>(z0)),
                 std::log(pi[x0]), std::log(pi[z0])};
      ram_step(s, prop, target, rng, counter);
      counts[static_cast<std::size_t>(s.x[0]) * 3 + static_cast<std::size_t>(s.z[0])] += 1.0;
    }
    for (std::size_t j = 0; j < rows; ++j) {
      const double p = m.P(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
      const double freq = counts[j] / static_cast<double>(n);
      if (p == 0.0) {
        impossible_hit = impossible_hit || counts[j] > 0.0;
        continue;
      }
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      worst = std::max(worst, std::abs(freq - p) / se);
    }
  }
  const double secs = seconds_since(t0);
  report(2, "oracle-simulation agreement", worst <= 4.0 && !impossible_hit && secs < 30.0,
         fmt("1e6 transitions over 9 start states, max |freq - P| = %.2f SE (<= 4), %.1f s (< 30)", worst, secs));
}

void c3_reduction_identity() {
  Rng rng(3);
  std::size_t mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const double lx = -100.0 * rng.uniform();
    const double lxs = -100.0 * rng.uniform();
    const double lz = lx - 50.0 * rng.uniform();
    const double lzs = lxs - 50.0 * rng.uniform();
    if (log_joint_acceptance(lx, lz, lxs, lzs) != log_metropolis_acceptance(lx, lxs)) ++mismatches;
  }
  report(3, "reduction identity", mismatches == 0, fmt("%zu of 10000 tuples differ from the Metropolis ratio", mismatches));
}

void c4_example1_case_a() {
  auto c = config("example1_case_a.json");
  c.replicates = 3;
  const auto r = run_experiment(c);
  bool ok = true;
  std::string detail;
  for (const auto& ch : r.chains) {
    const auto& s = ch.summary;
    const auto& b = s.blocks[0];
    const bool pass = s.modes_visited == 20 && s.acceptance_rate >= 0.030 && s.acceptance_rate <= 0.070 &&
                      s.n_pi >= 5.5 && s.n_pi <= 9.0 && b.n_up >= 3.5 && b.n_up <= 6.0 &&
                      std::abs(s.mean[0] - 4.478) <= 0.28;
    ok = ok && pass;
    detail += fmt("[rep %zu: modes %zu/20, acc %.3f, N_pi %.2f, N_u %.2f, E(x1) %.3f] ", ch.replicate,
                  s.modes_visited, s.acceptance_rate, s.n_pi, b.n_up, s.mean[0]);
  }
  report(4, "example 1 case (a)", ok,
         detail + "bounds: acc [0.030,0.070], N_pi [5.5,9.0], N_u [3.5,6.0], |E(x1)-4.478| <= 0.28");
}

void c5_example1_case_b() {
  auto c = config("example1_case_b.json");
  c.replicates = 3;
  const auto r = run_experiment(c);
  bool ok = true;
  std::string detail;
  for (const auto& ch : r.chains) {
    const auto& s = ch.summary;
    const bool pass = s.acceptance_rate >= 0.16 && s.acceptance_rate <= 0.30 && s.n_pi >= 4.0 && s.n_pi <= 6.0 &&
                      std::abs(s.mean[0] - 4.688) <= 0.08;
    ok = ok && pass;
    detail += fmt("[rep %zu: acc %.3f, N_pi %.2f, E(x1) %.3f] ", ch.replicate, s.acceptance_rate, s.n_pi, s.mean[0]);
  }
  report(5, "example 1 case (b)", ok, detail + "bounds: acc [0.16,0.30], N_pi [4.0,6.0], |E(x1)-4.688| <= 0.08");
}

double f_err(const ChainSummary& s) {
  const std::vector<double> p(8, 1.0 / 8.0);
  return frequency_error_rate({s.mode_freq}, p);
}

void c6_example2() {
  const auto ram = run_experiment(config("example2_d3_ram.json"));
  double n_dis = 0.0;
  bool each_low = true;
  for (const auto& ch : ram.chains) {
    n_dis += static_cast<double>(ch.summary.modes_discovered);
    each_low = each_low && f_err(ch.summary) < 0.05;
  }
  n_dis /= static_cast<double>(ram.chains.size());

  double ref = 0.0;
  for (const auto& ch : ram.chains) ref += ch.summary.n_pi;
  ref /= static_cast<double>(ram.chains.size());
  auto mc = config("example2_d3_metropolis.json");
  mc.reference_n_pi = ref;
  const auto met = run_experiment(mc);

  std::size_t wins = 0;
  std::string detail;
  for (std::size_t k = 0; k < ram.chains.size(); ++k) {
    const double a = f_err(ram.chains[k].summary), b = f_err(met.chains[k].summary);
    if (a <= b) ++wins;
    detail += fmt("[rep %zu: RAM F_err %.4f, Metropolis F_err %.4f] ", k, a, b);
  }
  report(6, "example 2 (d=3)", n_dis == 6.0 && each_low && wins >= 2,
         fmt("RAM N_dis %.2f (= 6), matched Metropolis length %zu at N_pi %.3f, RAM wins %zu/3 (>= 2) ", n_dis,
             met.config.length, ref, wins) +
             detail);
}

void c7_accounting() {
  std::string detail;
  bool ok = true;
  {
    auto c = parse_config(R"({"example": "mixture20", "kernel": "metropolis", "length": 2000, "burnin": 100})");
    const double v = run_experiment(c).chains[0].summary.n_pi;
    ok = ok && v == 1.0;
    detail += fmt("Metropolis %.6g (1), ", v);
  }
  {
    auto c = parse_config(
        R"({"example": "cube_mixture", "kernel": "pt", "length": 2000, "burnin": 500, "prerun_length": 500})");
    const double v = run_experiment(c).chains[0].summary.n_pi;
    ok = ok && v == 7.0;
    detail += fmt("PT %.6g (7), ", v);
  }
  {
    auto c = parse_config(R"({"example": "sensor", "kernel": "tempered", "length": 500, "burnin": 100})");
    const auto s = run_experiment(c).chains[0].summary;
    bool per_block = true;
    for (const auto& b : s.blocks) per_block = per_block && b.n_pi == 6.0;
    ok = ok && per_block && s.n_pi == 24.0;
    detail += fmt("TT %.6g per sweep (24), 6 per location: %s, ", s.n_pi, per_block ? "yes" : "no");
  }
  const double ee = evaluation_accounting(staged_ee_schedule());
  const double pt = evaluation_accounting(sparse_swap_pt_schedule());
  ok = ok && ee == 16.0 && pt == 5.8;
  detail += fmt("EE schedule %.17g (16.0), PT schedule %.17g (5.8)", ee, pt);
  report(7, "evaluation accounting", ok, detail);
}

void c8_example3() {
  const auto ram = run_experiment(config("example3_ram.json"));
  const auto met = run_experiment(config("example3_metropolis.json"));
  const auto& rs = ram.chains[0].summary;
  const auto& ms = met.chains[0].summary;
  bool ratio_ok = true;
  std::string detail;
  for (std::size_t k = 0; k < rs.blocks.size(); ++k) {
    const double ra = rs.blocks[k].acceptance_rate, ma = ms.blocks[k].acceptance_rate;
    ratio_ok = ratio_ok && ra >= 2.0 * ma;
    detail += fmt("%s %.4f vs %.4f (x%.1f), ", rs.blocks[k].name.c_str(), ra, ma, ma > 0 ? ra / ma : INFINITY);
  }
  auto loc1 = [](const ChainTrace& t) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& x : t.kept()) pts.emplace_back(x[0], x[1]);
    return count_clusters(pts);
  };
  const std::size_t rc = loc1(ram.chains[0].trace), mcl = loc1(met.chains[0].trace);
  report(8, "example 3 sensor network", ratio_ok && rc >= 2 && mcl <= rc,
         detail + fmt("x1 clusters RAM %zu (>= 2), Metropolis %zu (<= RAM)", rc, mcl));
}

void c9_tempering() {
  const LogTarget target(1, [](const Vector& x) { return -0.5 * x[0] * x[0]; });
  const auto ladder = TemperatureLadder::shared({1, 2, 4, 8}, GaussianProposal::isotropic(1, 1.0));
  EvalCounter c;
  MetropolisState s = init_metropolis_state(Vector::Constant(1, 0.3), target, c);
  ScriptedRng rng;
  rng.normals.assign(6, 4.0);
  rng.uniforms.assign(6, 0.99);
  rng.uniforms.push_back(0.999999);
  const auto rep = tempered_transition_step(s, ladder, target, rng, c);
  const bool identity = rep.log_alpha == 0.0 && rep.accepted && rep.moves_up + rep.moves_down == 0;

  const Vector pi = Eigen::Vector3d(1, 2, 4);
  const std::vector<double> tt_temps{1.0, 2.0, 4.0};
  const auto tt = oracle::build_tt_matrix(pi, std::vector<Matrix>(3, oracle::uniform_other_states(3)), tt_temps);
  const double tt_res = oracle::check_stationarity(tt, pi / pi.sum());
  const std::vector<double> pt_temps{1.0, 2.0, 4.0};
  const auto pt = oracle::build_pt_matrix(pi, std::vector<Matrix>(3, oracle::uniform_other_states(3)), pt_temps);
  const double pt_res = oracle::check_stationarity(pt, oracle::pt_product_target(pi, pt_temps));
  report(9, "tempering checks", identity && tt_res < 1e-10 && pt_res < 1e-10,
         fmt("all-rejected TT acceptance exp(%.17g) = 1: %s, TT residual %.2e, PT residual %.2e (< 1e-10)",
             rep.log_alpha, identity ? "yes" : "no", tt_res, pt_res));
}

void c10_determinism() {
  const auto base = std::filesystem::temp_directory_path() / "ram_acceptance_determinism";
  std::filesystem::remove_all(base);
  const std::vector<std::string> configs{
      R"({"example": "mixture20", "length": 5000, "burnin": 1000, "replicates": 2, "seed": 7})",
      R"({"example": "cube_mixture", "kernel": "pt", "length": 3000, "burnin": 1000, "prerun_length": 1000, "seed": 7})",
      R"({"example": "sensor", "kernel": "tempered", "length": 1000, "burnin": 200, "seed": 7})"};
  bool ok = true;
  std::size_t files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (int rep = 0; rep < 2; ++rep) {
      auto c = parse_config(configs[i]);
      c.threads = rep == 0 ? 1 : 0;
      write_run(run_experiment(c), base / std::to_string(i) / std::to_string(rep));
    }
    for (const auto& e : std::filesystem::directory_iterator(base / std::to_string(i) / "0")) {
      // config.json echoes the differing thread count
      if (e.path().filename() == "config.json") continue;
      const auto other = base / std::to_string(i) / "1" / e.path().filename();
      ok = ok && std::filesystem::exists(other) && slurp(e.path()) == slurp(other);
      ++files;
    }
  }
  std::filesystem::remove_all(base);
  report(10, "determinism", ok && files > 0, fmt("%zu sample and summary files byte-identical across reruns with 1 and all threads", files));
}

}  // namespace

int main() {
  int id = 0;
  for (auto fn : {c1_oracle_invariance, c2_oracle_simulation, c3_reduction_identity, c4_example1_case_a,
                  c5_example1_case_b, c6_example2, c7_accounting, c8_example3, c9_tempering, c10_determinism}) {
    ++id;
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "threw", false, e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
