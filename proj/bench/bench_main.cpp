// Timing comparison of the parallel kernels against single-threaded runs
// and against the brute-force oracle. The parallel kernels use a fixed
// block decomposition, so results must match the serial runs bit for bit;
// that equality is asserted here as well.

#include <chrono>
#include <cstdio>
#include <string>

#include "causim/engine.hpp"
#include "causim/library.hpp"
#include "causim/meta_trainer.hpp"
#include "causim/oracle.hpp"
#include "causim/simulator.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace causim;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

template <typename F>
double timed(F&& f) {
  const double t0 = now_seconds();
  f();
  return now_seconds() - t0;
}

void report(const std::string& name, double serial, double parallel,
            int threads, bool identical) {
  std::printf("%-38s serial %8.3fs  %2d threads %8.3fs  speedup %5.2fx  %s\n",
              name.c_str(), serial, threads, parallel,
              parallel > 0 ? serial / parallel : 0.0,
              identical ? "results identical" : "RESULTS DIFFER");
}

}  // namespace

int main() {
  const int threads = hardware_threads();
  std::printf("causim benchmark (max threads: %d)\n\n", threads);

  {
    const CausalProcess bandit = build_bandit(7);  // joint size 5 * 10^7
    Distribution serial_result, parallel_result;
    set_threads(1);
    const double t_serial = timed([&] {
      serial_result = query(bandit, "Theta",
                            {{13, 1, Mode::Intervene}, {14, 1, Mode::Condition}});
    });
    set_threads(threads);
    const double t_parallel = timed([&] {
      parallel_result = query(bandit, "Theta",
                              {{13, 1, Mode::Intervene}, {14, 1, Mode::Condition}});
    });
    report("enumeration query (bandit, 7 rounds)", t_serial, t_parallel,
           threads, serial_result.p == parallel_result.p);

    // The oracle is the clarity-first reference; it caps at 2^20, so
    // compare on a five-round process instead.
    const CausalProcess small = build_bandit(5);
    set_threads(threads);
    double t_engine = 0, t_oracle = 0;
    Distribution engine_result, oracle_result;
    t_engine = timed([&] {
      engine_result =
          query(small, "Theta",
                {{9, 1, Mode::Intervene}, {10, 1, Mode::Condition}});
    });
    t_oracle = timed([&] {
      oracle_result = oracle::oracle_query(
          small, 0, {{9, 1, Mode::Intervene}, {10, 1, Mode::Condition}});
    });
    std::printf("%-38s oracle %8.3fs  engine %10.6fs  (5-round bandit)\n\n",
                "engine vs serial oracle", t_oracle, t_engine);
    if (max_abs_diff(engine_result, oracle_result) > 1e-12) {
      std::printf("WARNING: engine and oracle disagree\n");
      return 1;
    }
  }

  {
    const CausalProcess bandit = build_bandit(20);
    std::vector<EpisodeRecord> serial_records, parallel_records;
    set_threads(1);
    const double t_serial = timed([&] {
      serial_records = run_episode_batch(bandit, PolicyKind::Interventional,
                                         nullptr, 20, 20000, 7);
    });
    set_threads(threads);
    const double t_parallel = timed([&] {
      parallel_records = run_episode_batch(bandit, PolicyKind::Interventional,
                                           nullptr, 20, 20000, 7);
    });
    bool identical = serial_records.size() == parallel_records.size();
    for (std::size_t i = 0; identical && i < serial_records.size(); ++i) {
      identical = serial_records[i].theta == parallel_records[i].theta &&
                  serial_records[i].steps.size() ==
                      parallel_records[i].steps.size();
      for (std::size_t t = 0; identical && t < serial_records[i].steps.size();
           ++t) {
        identical =
            serial_records[i].steps[t].action ==
                parallel_records[i].steps[t].action &&
            serial_records[i].steps[t].observation ==
                parallel_records[i].steps[t].observation;
      }
    }
    report("episode batch (20k episodes, h=20)", t_serial, t_parallel, threads,
           identical);
  }

  {
    const CausalProcess bandit = build_bandit(2);
    LearnerTable serial_table, parallel_table;
    set_threads(1);
    const double t_serial = timed([&] {
      serial_table = run_training(bandit, 2, 200000, 1.0, 3,
                                  TrainingVariant::Frozen);
    });
    set_threads(threads);
    const double t_parallel = timed([&] {
      parallel_table = run_training(bandit, 2, 200000, 1.0, 3,
                                    TrainingVariant::Frozen);
    });
    const bool identical =
        serial_table.action_counts() == parallel_table.action_counts() &&
        serial_table.observation_counts() ==
            parallel_table.observation_counts();
    report("frozen training (200k episodes, h=2)", t_serial, t_parallel,
           threads, identical);
  }

  return 0;
}
