// Command-line front end: exact queries, policy simulations, batch
// experiments, meta-training and the offline-imitation comparison.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causim/constants.hpp"
#include "causim/engine.hpp"
#include "causim/io.hpp"
#include "causim/library.hpp"
#include "causim/meta_trainer.hpp"
#include "causim/policies.hpp"
#include "causim/simulator.hpp"
#include "causim/spec_format.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace causim;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct ProcessSource {
  std::string builtin;
  std::string spec_file;
  int rounds = 0;  // 0 = derive from the run horizon (bandit only)

  CausalProcess resolve(int run_horizon = -1) const {
    if (!spec_file.empty()) {
      return parse_process_spec(read_file(spec_file));
    }
    int r = rounds;
    if (r <= 0) r = run_horizon > 0 ? run_horizon : 2;
    return build_builtin(builtin, r);
  }
};

// Evidence mini-grammar: comma-separated `Var=value` (condition) and
// `do(Var=value)` (intervention) terms.
std::vector<EvidenceItem> parse_evidence(const std::string& text,
                                         const CausalProcess& process) {
  std::vector<EvidenceItem> evidence;
  std::istringstream in(text);
  std::string term;
  while (std::getline(in, term, ',')) {
    const std::size_t first = term.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const std::size_t last = term.find_last_not_of(" \t");
    std::string body = term.substr(first, last - first + 1);

    Mode mode = Mode::Condition;
    if (body.rfind("do(", 0) == 0) {
      if (body.back() != ')') {
        throw ValidationError("malformed evidence term '" + body + "'");
      }
      mode = Mode::Intervene;
      body = body.substr(3, body.size() - 4);
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == body.size()) {
      throw ValidationError("malformed evidence term '" + term +
                            "' (expected Var=value or do(Var=value))");
    }
    int value = 0;
    try {
      std::size_t pos = 0;
      value = std::stoi(body.substr(eq + 1), &pos);
      if (pos != body.size() - eq - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ValidationError("malformed evidence value in '" + term + "'");
    }
    evidence.push_back({process.variable_id(body.substr(0, eq)), value, mode});
  }
  return evidence;
}

std::string default_out_dir() {
  const char* env = std::getenv("CAUSIM_OUT_DIR");
  return env ? env : ".";
}

void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void set_workers(int workers) {
  if (workers < 1) throw ValidationError("--workers must be at least 1");
#ifdef _OPENMP
  omp_set_num_threads(workers);
#endif
}

std::string format_distribution(const Distribution& d) {
  char buf[32];
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", d.p[i]);
    if (i) out += ' ';
    out += buf;
  }
  return out;
}

using Params = std::vector<std::pair<std::string, std::string>>;

int cmd_query(const ProcessSource& source, const std::string& target,
              const std::string& evidence_text) {
  const CausalProcess process = source.resolve();
  const std::vector<EvidenceItem> evidence =
      parse_evidence(evidence_text, process);
  const Distribution result = query(process, target, evidence);
  std::cout << format_distribution(result) << "\n";
  return 0;
}

int cmd_print_process(const ProcessSource& source) {
  std::cout << serialize_process_spec(source.resolve());
  return 0;
}

LearnerTable load_table(const std::string& path, const CausalProcess& process) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return LearnerTable::load(in, process);
}

int cmd_simulate(const ProcessSource& source, const std::string& policy_name,
                 const std::string& table_path, int horizon,
                 std::uint64_t episodes, std::uint64_t seed, int workers,
                 const std::string& out_dir) {
  set_workers(workers);
  const CausalProcess process = source.resolve(horizon);
  const PolicyKind kind = policy_kind_from_name(policy_name);
  LearnerTable table;
  const LearnerTable* learned = nullptr;
  if (kind == PolicyKind::Learned) {
    if (table_path.empty()) {
      throw ValidationError("--table is required for the learned policy");
    }
    table = load_table(table_path, process);
    learned = &table;
  }

  const std::vector<EpisodeRecord> records =
      run_episode_batch(process, kind, learned, horizon, episodes, seed);
  ensure_dir(out_dir);
  write_file(join_path(out_dir, "episodes.jsonl"), episodes_to_jsonl(records));
  const ExperimentSummary summary = summarize(records, horizon);
  write_file(join_path(out_dir, "summary.csv"),
             summary_csv_header() + "\n" + summary_csv_row(summary) + "\n");
  write_file(join_path(out_dir, "run_config.json"),
             config_echo_json("simulate",
                              Params{{"process", process.name()},
                                     {"policy", policy_name},
                                     {"table", table_path},
                                     {"horizon", std::to_string(horizon)},
                                     {"episodes", std::to_string(episodes)},
                                     {"seed", std::to_string(seed)},
                                     {"workers", std::to_string(workers)}}));

  std::cout << policy_kind_name(kind) << ": episodes=" << episodes
            << " mean_reward=" << summary.mean_reward_per_step
            << " repeat_rate=" << summary.repeat_rate
            << " best_arm_rate=" << summary.final_best_arm_rate
            << " aborted=" << summary.aborted << "\n";
  return 0;
}

int cmd_experiment(const ProcessSource& source, const std::string& policy_name,
                   const std::string& table_path, int horizon,
                   std::uint64_t episodes, std::uint64_t seed, int workers,
                   bool logs, const std::string& out_dir) {
  set_workers(workers);
  const CausalProcess process = source.resolve(horizon);

  std::vector<PolicyKind> kinds;
  if (policy_name == "both") {
    kinds = {PolicyKind::Conditional, PolicyKind::Interventional};
  } else {
    kinds = {policy_kind_from_name(policy_name)};
  }
  LearnerTable table;
  const LearnerTable* learned = nullptr;
  for (PolicyKind k : kinds) {
    if (k == PolicyKind::Learned) {
      if (table_path.empty()) {
        throw ValidationError("--table is required for the learned policy");
      }
      table = load_table(table_path, process);
      learned = &table;
    }
  }

  ensure_dir(out_dir);
  std::string csv = summary_csv_header() + "\n";
  std::vector<ExperimentSummary> summaries;
  for (PolicyKind k : kinds) {
    const std::vector<EpisodeRecord> records =
        run_episode_batch(process, k, learned, horizon, episodes, seed);
    if (logs) {
      write_file(join_path(out_dir, std::string("episodes_") +
                                        policy_kind_name(k) + ".jsonl"),
                 episodes_to_jsonl(records));
    }
    const ExperimentSummary summary = summarize(records, horizon);
    summaries.push_back(summary);
    csv += summary_csv_row(summary) + "\n";
  }
  write_file(join_path(out_dir, "summary.csv"), csv);
  write_file(join_path(out_dir, "run_config.json"),
             config_echo_json("experiment",
                              Params{{"process", process.name()},
                                     {"policy", policy_name},
                                     {"table", table_path},
                                     {"horizon", std::to_string(horizon)},
                                     {"episodes", std::to_string(episodes)},
                                     {"seed", std::to_string(seed)},
                                     {"workers", std::to_string(workers)},
                                     {"logs", logs ? "true" : "false"}}));

  for (const ExperimentSummary& s : summaries) {
    std::cout << policy_kind_name(s.policy)
              << ": repeat_rate=" << s.repeat_rate << " (se "
              << s.se_repeat_rate << ")"
              << " best_arm_rate=" << s.final_best_arm_rate << " (se "
              << s.se_final_best_arm_rate << ")"
              << " mean_reward=" << s.mean_reward_per_step << " aborted="
              << s.aborted << "\n";
  }
  if (summaries.size() == 2) {
    std::cout << "delta: best_arm(interventional - conditional)="
              << summaries[1].final_best_arm_rate -
                     summaries[0].final_best_arm_rate
              << " repeat(conditional - interventional)="
              << summaries[0].repeat_rate - summaries[1].repeat_rate << "\n";
  }
  return 0;
}

int cmd_metatrain(const ProcessSource& source, int horizon,
                  std::uint64_t episodes, double alpha, std::uint64_t seed,
                  bool interleaved, int workers, const std::string& out_dir) {
  set_workers(workers);
  const CausalProcess process = source.resolve(horizon);
  const LearnerTable table = run_training(
      process, horizon, episodes, alpha, seed,
      interleaved ? TrainingVariant::Interleaved : TrainingVariant::Frozen);

  ensure_dir(out_dir);
  std::ostringstream table_text;
  table.save(table_text, process);
  write_file(join_path(out_dir, "learner_table.txt"), table_text.str());

  const std::vector<TableEvaluationRow> rows =
      evaluate_against_targets(process, table);
  write_file(join_path(out_dir, "table_evaluation.csv"),
             table_evaluation_csv(rows, process));
  write_file(join_path(out_dir, "run_config.json"),
             config_echo_json(
                 "metatrain",
                 Params{{"process", process.name()},
                        {"horizon", std::to_string(horizon)},
                        {"episodes", std::to_string(episodes)},
                        {"alpha", std::to_string(alpha)},
                        {"seed", std::to_string(seed)},
                        {"variant", interleaved ? "interleaved" : "frozen"},
                        {"workers", std::to_string(workers)}}));

  double max_action_tv = 0.0, max_obs_tv = 0.0;
  for (const TableEvaluationRow& row : rows) {
    std::cout << (row.action_table ? "action" : "obs  ") << " "
              << history_to_string(row.key, process)
              << " samples=" << row.samples
              << " tv_to_intervened=" << row.tv_to_intervened
              << " tv_to_conditioned=" << row.tv_to_conditioned << "\n";
    (row.action_table ? max_action_tv : max_obs_tv) =
        std::max(row.action_table ? max_action_tv : max_obs_tv,
                 row.tv_to_intervened);
  }
  std::cout << "max TV to intervened targets: action=" << max_action_tv
            << " observation=" << max_obs_tv << "\n";
  return 0;
}

int cmd_offline(const ProcessSource& source, int horizon,
                std::uint64_t trajectories, std::uint64_t deploy_episodes,
                std::uint64_t seed, int workers, const std::string& out_dir) {
  set_workers(workers);
  const CausalProcess process = source.resolve(horizon);
  const OfflineReport report =
      offline_demo(process, horizon, trajectories, seed, deploy_episodes);

  ensure_dir(out_dir);
  write_file(join_path(out_dir, "offline_report.csv"),
             offline_report_csv(report, process));
  write_file(join_path(out_dir, "run_config.json"),
             config_echo_json(
                 "offline",
                 Params{{"process", process.name()},
                        {"horizon", std::to_string(horizon)},
                        {"trajectories", std::to_string(trajectories)},
                        {"deploy_episodes", std::to_string(deploy_episodes)},
                        {"seed", std::to_string(seed)},
                        {"workers", std::to_string(workers)}}));

  double max_tv_cond = 0.0, min_tv_int = 1.0;
  for (const OfflineKeyRow& row : report.rows) {
    if (row.past_actions.empty()) continue;
    max_tv_cond = std::max(max_tv_cond, row.tv_fitted_conditioned);
    min_tv_int = std::min(min_tv_int, row.tv_fitted_intervened);
  }
  std::cout << "trajectories=" << trajectories
            << " max TV(fitted, conditioned)=" << max_tv_cond
            << " min TV(fitted, intervened)=" << min_tv_int
            << " deployed_repeat_rate=" << report.deployed_repeat_rate << "\n"
            << "the fitted table tracks the conditioned law, not the "
               "intervened one\n";
  return 0;
}

int cmd_mint(const std::string& out_path) {
  const std::string text = reference_constants_text();
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causim: exact causal-sequence inference and simulation"};
  app.require_subcommand(1);

  ProcessSource source;
  const auto add_process_opts = [&](CLI::App* cmd) {
    cmd->add_option("--process", source.builtin, "built-in process name");
    cmd->add_option("--spec-file", source.spec_file,
                    "path to a process spec file");
    cmd->add_option("--rounds", source.rounds,
                    "bandit round count when building the bandit process");
  };

  std::string target, evidence_text, policy = "interventional";
  std::string table_path, out_dir = default_out_dir(), mint_out;
  int horizon = 2, workers = 1;
  std::uint64_t episodes = 1, seed = 0, trajectories = 10000,
                deploy_episodes = 2000;
  double alpha = 1.0;
  bool logs = false, interleaved = false;

  CLI::App* q = app.add_subcommand("query", "print P(target | evidence)");
  add_process_opts(q);
  q->add_option("--target", target, "target variable name")->required();
  q->add_option("--evidence", evidence_text,
                "comma-separated terms: Var=v or do(Var=v)");

  CLI::App* pp = app.add_subcommand("print-process",
                                    "emit the canonical process spec text");
  add_process_opts(pp);

  CLI::App* sim = app.add_subcommand("simulate", "run seeded episodes");
  add_process_opts(sim);
  sim->add_option("--policy", policy, "conditional|interventional|learned");
  sim->add_option("--table", table_path, "learner table for --policy learned");
  sim->add_option("--horizon", horizon, "rounds to play");
  sim->add_option("--episodes", episodes, "episode count")
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "root seed");
  sim->add_option("--workers", workers, "parallel episode workers");
  sim->add_option("--out-dir", out_dir, "output directory");

  CLI::App* exp = app.add_subcommand("experiment",
                                     "batch comparison with summaries");
  add_process_opts(exp);
  exp->add_option("--policy", policy,
                  "both|conditional|interventional|learned");
  exp->add_option("--table", table_path, "learner table for learned policy");
  exp->add_option("--horizon", horizon, "rounds to play");
  exp->add_option("--episodes", episodes, "episodes per policy")
      ->check(CLI::PositiveNumber);
  exp->add_option("--seed", seed, "root seed");
  exp->add_option("--workers", workers, "parallel episode workers");
  exp->add_flag("--logs", logs, "also write per-episode JSONL logs");
  exp->add_option("--out-dir", out_dir, "output directory");

  CLI::App* mt = app.add_subcommand(
      "metatrain", "counterfactual-teaching training of the tabular learner");
  add_process_opts(mt);
  mt->add_option("--horizon", horizon, "rounds per episode");
  mt->add_option("--episodes", episodes, "training episodes")
      ->check(CLI::PositiveNumber);
  mt->add_option("--alpha", alpha, "smoothing pseudo-count");
  mt->add_option("--seed", seed, "root seed");
  mt->add_flag("--interleaved", interleaved,
               "behavior follows the current table instead of the frozen "
               "uniform policy");
  mt->add_option("--workers", workers,
                 "parallel episode workers (frozen variant only)");
  mt->add_option("--out-dir", out_dir, "output directory");

  CLI::App* off = app.add_subcommand(
      "offline", "fit on expert demonstrations and compare to both targets");
  add_process_opts(off);
  off->add_option("--horizon", horizon, "rounds per trajectory");
  off->add_option("--trajectories", trajectories, "dataset size")
      ->check(CLI::PositiveNumber);
  off->add_option("--deploy-episodes", deploy_episodes,
                  "autoregressive rollout count");
  off->add_option("--seed", seed, "root seed");
  off->add_option("--workers", workers, "parallel workers");
  off->add_option("--out-dir", out_dir, "output directory");

  CLI::App* mint = app.add_subcommand(
      "mint", "print oracle-computed reference constants");
  mint->add_option("--out", mint_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (source.builtin.empty() && source.spec_file.empty()) {
      source.builtin = "bandit";
    }
    if (q->parsed()) return cmd_query(source, target, evidence_text);
    if (pp->parsed()) return cmd_print_process(source);
    if (sim->parsed()) {
      return cmd_simulate(source, policy, table_path, horizon, episodes, seed,
                          workers, out_dir);
    }
    if (exp->parsed()) {
      return cmd_experiment(source, policy, table_path, horizon, episodes,
                            seed, workers, logs, out_dir);
    }
    if (mt->parsed()) {
      return cmd_metatrain(source, horizon, episodes, alpha, seed, interleaved,
                           workers, out_dir);
    }
    if (off->parsed()) {
      return cmd_offline(source, horizon, trajectories, deploy_episodes, seed,
                         workers, out_dir);
    }
    if (mint->parsed()) return cmd_mint(mint_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidAssignmentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DuplicateEvidenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
