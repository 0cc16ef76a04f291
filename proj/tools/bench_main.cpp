// Benchmarks the OpenMP kernels against their serial reference
// implementations and checks that both produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "gseq/parallel.hpp"
#include "gseq/permutation.hpp"
#include "gseq/simulate.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

gseq::TrialData synthetic_trial(int k, std::int64_t n0, std::uint64_t seed) {
  gseq::TrialData data;
  data.stages.resize(static_cast<std::size_t>(k));
  const gseq::DistSpec normal = gseq::DistSpec::normal(0.0, 1.0);
  for (int s = 0; s < k; ++s) {
    gseq::RngStream t_rng(gseq::stream_key({seed, static_cast<std::uint64_t>(s), 0}));
    gseq::RngStream c_rng(gseq::stream_key({seed, static_cast<std::uint64_t>(s), 1}));
    auto& blk = data.stages[static_cast<std::size_t>(s)];
    blk.treatment.resize(static_cast<std::size_t>(n0));
    blk.control.resize(static_cast<std::size_t>(n0));
    for (auto& x : blk.treatment) x = normal.draw(t_rng);
    for (auto& x : blk.control) x = normal.draw(c_rng);
  }
  return data;
}

bool identical(const gseq::ReplicatePaths& a, const gseq::ReplicatePaths& b) {
  if (a.replicate_count != b.replicate_count || a.looks != b.looks) return false;
  for (std::size_t i = 0; i < a.s.size(); ++i) {
    const bool nan_a = std::isnan(a.s[i]);
    const bool nan_b = std::isnan(b.s[i]);
    if (nan_a != nan_b) return false;
    if (!nan_a && a.s[i] != b.s[i]) return false;
  }
  return a.degenerate == b.degenerate;
}

bool identical(const gseq::OperatingCharacteristics& a,
               const gseq::OperatingCharacteristics& b) {
  if (a.per_method.size() != b.per_method.size()) return false;
  for (std::size_t i = 0; i < a.per_method.size(); ++i) {
    const auto& x = a.per_method[i];
    const auto& y = b.per_method[i];
    if (x.reject_count != y.reject_count || x.stop_stage_sum != y.stop_stage_sum ||
        x.degenerate_count != y.degenerate_count ||
        x.first_rejection_at != y.first_rejection_at) {
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP kernel benchmark"};
  std::int64_t b = 20000;
  std::int64_t r = 400;
  std::int64_t n0 = 40;
  int k = 3;
  int workers = 0;
  app.add_option("--b", b, "Permutation replicates (default 20000)");
  app.add_option("--r", r, "Simulated trials (default 400)");
  app.add_option("--n0", n0, "Per-stage arm size (default 40)");
  app.add_option("--k", k, "Stages (default 3)");
  app.add_option("--workers", workers, "Parallel worker threads (default: all)");
  CLI11_PARSE(app, argc, argv);

  const int effective = gseq::resolve_workers(workers);
  std::printf("workers: %d\n\n", effective);

  {
    const gseq::TrialData data = synthetic_trial(k, n0, 42);
    gseq::PermutationOptions opts;
    opts.replicates = b;
    opts.seed = 7;
    opts.workers = workers;

    auto t0 = std::chrono::steady_clock::now();
    const auto serial = gseq::replicate_paths_serial(data, k, opts);
    const double ts = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto parallel = gseq::replicate_paths(data, k, opts);
    const double tp = seconds_since(t0);

    std::printf("replicate_paths  (B=%lld, K=%d, n0=%lld)\n", static_cast<long long>(b), k,
                static_cast<long long>(n0));
    std::printf("  serial    %8.3f s\n", ts);
    std::printf("  parallel  %8.3f s   speedup %.2fx   results %s\n\n", tp,
                tp > 0 ? ts / tp : 0.0, identical(serial, parallel) ? "identical" : "DIFFER");
    if (!identical(serial, parallel)) return 1;
  }

  {
    gseq::ScenarioConfig cfg;
    cfg.id = "bench";
    cfg.design = gseq::DesignSpec::balanced(2, gseq::Ratio{1, 1}, 0.025,
                                            gseq::Sidedness::one_sided,
                                            gseq::SpendingFunction::pocock(0.025), 20);
    cfg.f1 = gseq::DistSpec::normal(0.0, 1.0);
    cfg.f2 = gseq::DistSpec::normal(0.0, 1.0);
    cfg.n0 = 20;
    cfg.permutation_replicates = 500;
    cfg.simulations = r;
    cfg.seed = 11;

    auto t0 = std::chrono::steady_clock::now();
    const auto serial = gseq::run_scenario_serial(cfg);
    const double ts = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto parallel = gseq::run_scenario(cfg, workers);
    const double tp = seconds_since(t0);

    std::printf("run_scenario     (R=%lld, B=500, K=2, n0=20, all methods)\n",
                static_cast<long long>(r));
    std::printf("  serial    %8.3f s\n", ts);
    std::printf("  parallel  %8.3f s   speedup %.2fx   results %s\n", tp,
                tp > 0 ? ts / tp : 0.0, identical(serial, parallel) ? "identical" : "DIFFER");
    if (!identical(serial, parallel)) return 1;
  }

  return 0;
}
