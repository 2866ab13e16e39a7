#include "causim/meta_trainer.hpp"

#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "causim/engine.hpp"
#include "causim/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace causim {

HistoryKey encode_history(const TaggedHistory& history) {
  HistoryKey key;
  key.reserve(history.items.size() * 3);
  for (const EvidenceItem& e : history.items) {
    key.push_back(e.variable);
    key.push_back(e.mode == Mode::Intervene ? 1 : 0);
    key.push_back(e.value);
  }
  return key;
}

TaggedHistory decode_history(const HistoryKey& key) {
  if (key.size() % 3 != 0) {
    throw ValidationError("malformed history key");
  }
  TaggedHistory history;
  for (std::size_t i = 0; i < key.size(); i += 3) {
    history.push(key[i], key[i + 2],
                 key[i + 1] ? Mode::Intervene : Mode::Condition);
  }
  return history;
}

Distribution smoothed_predictive(const std::vector<std::uint64_t>& counts,
                                 double alpha) {
  double total = 0.0;
  for (std::uint64_t c : counts) total += static_cast<double>(c);
  const double denom = total + alpha * static_cast<double>(counts.size());
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = (static_cast<double>(counts[i]) + alpha) / denom;
  }
  return Distribution(std::move(p));
}

LearnerTable::LearnerTable(int action_domain, int observation_domain,
                           double alpha)
    : action_domain_(action_domain),
      observation_domain_(observation_domain),
      alpha_(alpha) {
  if (action_domain < 1 || observation_domain < 1) {
    throw ValidationError("learner domains must be positive");
  }
  if (!(alpha > 0.0)) {
    throw ValidationError("smoothing pseudo-count must be positive");
  }
}

Distribution LearnerTable::predict_action(const TaggedHistory& history) const {
  const auto it = action_counts_.find(encode_history(history));
  if (it == action_counts_.end()) {
    return smoothed_predictive(
        std::vector<std::uint64_t>(static_cast<std::size_t>(action_domain_), 0),
        alpha_);
  }
  return smoothed_predictive(it->second, alpha_);
}

Distribution LearnerTable::predict_observation(
    const TaggedHistory& history) const {
  const auto it = observation_counts_.find(encode_history(history));
  if (it == observation_counts_.end()) {
    return smoothed_predictive(
        std::vector<std::uint64_t>(
            static_cast<std::size_t>(observation_domain_), 0),
        alpha_);
  }
  return smoothed_predictive(it->second, alpha_);
}

void LearnerTable::record_action_target(const TaggedHistory& history,
                                        int expert_action) {
  auto& counts = action_counts_[encode_history(history)];
  if (counts.empty()) {
    counts.assign(static_cast<std::size_t>(action_domain_), 0);
  }
  counts.at(static_cast<std::size_t>(expert_action)) += 1;
}

void LearnerTable::record_observation(const TaggedHistory& history,
                                      int observation) {
  auto& counts = observation_counts_[encode_history(history)];
  if (counts.empty()) {
    counts.assign(static_cast<std::size_t>(observation_domain_), 0);
  }
  counts.at(static_cast<std::size_t>(observation)) += 1;
}

void LearnerTable::merge(const LearnerTable& other) {
  if (other.action_domain_ != action_domain_ ||
      other.observation_domain_ != observation_domain_) {
    throw ValidationError("cannot merge tables over different alphabets");
  }
  for (const auto& [key, counts] : other.action_counts_) {
    auto& mine = action_counts_[key];
    if (mine.empty()) mine.assign(counts.size(), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) mine[i] += counts[i];
  }
  for (const auto& [key, counts] : other.observation_counts_) {
    auto& mine = observation_counts_[key];
    if (mine.empty()) mine.assign(counts.size(), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) mine[i] += counts[i];
  }
}

std::string history_to_string(const TaggedHistory& history,
                              const CausalProcess& process) {
  if (history.items.empty()) return "()";
  std::string out;
  for (const EvidenceItem& e : history.items) {
    if (!out.empty()) out += ' ';
    const std::string& name = process.variable(e.variable).name;
    if (e.mode == Mode::Intervene) {
      out += "do(" + name + "=" + std::to_string(e.value) + ")";
    } else {
      out += name + "=" + std::to_string(e.value);
    }
  }
  return out;
}

TaggedHistory history_from_string(const std::string& text,
                                  const CausalProcess& process) {
  TaggedHistory history;
  if (text == "()") return history;
  std::istringstream iss(text);
  std::string token;
  while (iss >> token) {
    bool intervene = false;
    std::string body = token;
    if (body.rfind("do(", 0) == 0 && body.back() == ')') {
      intervene = true;
      body = body.substr(3, body.size() - 4);
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("malformed history token '" + token + "'");
    }
    const int var = process.variable_id(body.substr(0, eq));
    int value = 0;
    try {
      value = std::stoi(body.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("malformed history token '" + token + "'");
    }
    history.push(var, value, intervene ? Mode::Intervene : Mode::Condition);
  }
  return history;
}

namespace {

void save_section(std::ostream& out, const char* header,
                  const std::map<HistoryKey, std::vector<std::uint64_t>>& section,
                  const CausalProcess& process) {
  out << header << '\n';
  for (const auto& [key, counts] : section) {
    out << history_to_string(decode_history(key), process) << " :";
    for (std::uint64_t c : counts) out << ' ' << c;
    out << '\n';
  }
}

}  // namespace

void LearnerTable::save(std::ostream& out, const CausalProcess& process) const {
  out << "causim-table 1\n";
  char alpha_buf[32];
  std::snprintf(alpha_buf, sizeof(alpha_buf), "%.17g", alpha_);
  out << "alpha " << alpha_buf << '\n';
  out << "action-domain " << action_domain_ << '\n';
  out << "observation-domain " << observation_domain_ << '\n';
  save_section(out, "[actions]", action_counts_, process);
  save_section(out, "[observations]", observation_counts_, process);
}

LearnerTable LearnerTable::load(std::istream& in, const CausalProcess& process) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line() || line != "causim-table 1") {
    throw ValidationError("not a causim learner table");
  }
  double alpha = 0.0;
  int action_domain = 0, observation_domain = 0;
  for (int i = 0; i < 3; ++i) {
    if (!next_line()) throw ValidationError("truncated learner table header");
    std::istringstream iss(line);
    std::string field;
    iss >> field;
    if (field == "alpha") {
      iss >> alpha;
    } else if (field == "action-domain") {
      iss >> action_domain;
    } else if (field == "observation-domain") {
      iss >> observation_domain;
    } else {
      throw ValidationError("unknown table header field '" + field + "'");
    }
  }
  LearnerTable table(action_domain, observation_domain, alpha);

  bool in_actions = true;
  bool saw_section = false;
  while (next_line()) {
    if (line == "[actions]") {
      in_actions = true;
      saw_section = true;
      continue;
    }
    if (line == "[observations]") {
      in_actions = false;
      saw_section = true;
      continue;
    }
    if (!saw_section) throw ValidationError("counts before a section header");
    const std::size_t sep = line.rfind(" :");
    if (sep == std::string::npos) {
      throw ValidationError("malformed table row '" + line + "'");
    }
    const HistoryKey key =
        encode_history(history_from_string(line.substr(0, sep), process));
    std::istringstream counts_in(line.substr(sep + 2));
    std::vector<std::uint64_t> counts;
    std::uint64_t c;
    while (counts_in >> c) counts.push_back(c);
    const std::size_t expect = static_cast<std::size_t>(
        in_actions ? action_domain : observation_domain);
    if (counts.size() != expect) {
      throw ValidationError("row has " + std::to_string(counts.size()) +
                            " counts, expected " + std::to_string(expect));
    }
    if (in_actions) {
      table.action_counts_[key] = std::move(counts);
    } else {
      table.observation_counts_[key] = std::move(counts);
    }
  }
  return table;
}

RoundLayout single_latent_layout(const CausalProcess& process) {
  const auto& vars = process.variables();
  if (vars.empty() || vars[0].role != Role::Latent) {
    throw ValidationError("process must start with a single latent variable");
  }
  if ((vars.size() - 1) % 2 != 0) {
    throw ValidationError("process must have action/observation rounds");
  }
  RoundLayout layout;
  layout.rounds = static_cast<int>((vars.size() - 1) / 2);
  for (int t = 1; t <= layout.rounds; ++t) {
    if (vars[static_cast<std::size_t>(layout.action_id(t))].role !=
            Role::Action ||
        vars[static_cast<std::size_t>(layout.observation_id(t))].role !=
            Role::Observation) {
      throw ValidationError("process must have action/observation rounds");
    }
  }
  return layout;
}

double braided_probability(const CausalProcess& process,
                           const LearnerTable* learner,
                           const BraidedEpisode& episode) {
  const RoundLayout layout = single_latent_layout(process);
  const int horizon = static_cast<int>(episode.agent_actions.size());
  if (horizon > layout.rounds ||
      episode.expert_actions.size() != episode.agent_actions.size() ||
      episode.observations.size() != episode.agent_actions.size()) {
    throw ValidationError("episode dimensions do not match the process");
  }

  std::vector<int> assignment(process.variables().size(), 0);
  assignment[0] = episode.theta;
  double p = process.mechanism_prob(0, assignment, episode.theta);

  TaggedHistory visible;
  for (int t = 1; t <= horizon; ++t) {
    const int a_id = layout.action_id(t);
    const int o_id = layout.observation_id(t);
    const int a = episode.agent_actions[static_cast<std::size_t>(t - 1)];
    const int abar = episode.expert_actions[static_cast<std::size_t>(t - 1)];
    const int o = episode.observations[static_cast<std::size_t>(t - 1)];

    const Distribution agent =
        learner ? learner->predict_action(visible)
                : uniform_distribution(static_cast<std::size_t>(
                      process.variable(a_id).domain_size));
    p *= agent.p[static_cast<std::size_t>(a)];
    p *= process.mechanism_prob(a_id, assignment, abar);
    assignment[static_cast<std::size_t>(a_id)] = a;
    p *= process.mechanism_prob(o_id, assignment, o);
    assignment[static_cast<std::size_t>(o_id)] = o;

    visible.push(a_id, a, Mode::Intervene);
    visible.push(o_id, o, Mode::Condition);
  }
  return p;
}

BraidedEpisode generate_braided_episode(const CausalProcess& process,
                                        const LearnerTable* policy,
                                        int horizon, std::uint64_t seed,
                                        bool with_expert) {
  const RoundLayout layout = single_latent_layout(process);
  if (horizon < 1 || horizon > layout.rounds) {
    throw ValidationError("horizon exceeds the process round count");
  }

  RandomStream env(derive_seed(seed, 0));
  RandomStream expert(derive_seed(seed, 1));

  std::vector<int> assignment(process.variables().size(), 0);
  BraidedEpisode episode;
  episode.theta = env.sample(process.mechanism_row(0, assignment));
  assignment[0] = episode.theta;

  TaggedHistory visible;
  for (int t = 1; t <= horizon; ++t) {
    const int a_id = layout.action_id(t);
    const int o_id = layout.observation_id(t);

    const Distribution prediction =
        policy ? policy->predict_action(visible)
               : uniform_distribution(static_cast<std::size_t>(
                     process.variable(a_id).domain_size));
    const int a = env.sample(prediction);
    episode.agent_actions.push_back(a);

    if (with_expert) {
      const int abar = expert.sample(process.mechanism_row(a_id, assignment));
      episode.expert_actions.push_back(abar);
      episode.action_losses.push_back(
          -std::log(prediction.p[static_cast<std::size_t>(abar)]));
    }

    visible.push(a_id, a, Mode::Intervene);
    assignment[static_cast<std::size_t>(a_id)] = a;

    const Distribution obs_prediction =
        policy ? policy->predict_observation(visible)
               : uniform_distribution(static_cast<std::size_t>(
                     process.variable(o_id).domain_size));
    const int o = env.sample(process.mechanism_row(o_id, assignment));
    episode.observations.push_back(o);
    episode.obs_losses.push_back(
        -std::log(obs_prediction.p[static_cast<std::size_t>(o)]));

    visible.push(o_id, o, Mode::Condition);
    assignment[static_cast<std::size_t>(o_id)] = o;
  }
  return episode;
}

void record_episode(LearnerTable& table, const CausalProcess& process,
                    const BraidedEpisode& episode) {
  const RoundLayout layout = single_latent_layout(process);
  if (episode.expert_actions.size() != episode.agent_actions.size()) {
    throw ValidationError("cannot record an episode without expert actions");
  }
  TaggedHistory visible;
  for (std::size_t i = 0; i < episode.agent_actions.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    table.record_action_target(visible, episode.expert_actions[i]);
    visible.push(layout.action_id(t), episode.agent_actions[i],
                 Mode::Intervene);
    table.record_observation(visible, episode.observations[i]);
    visible.push(layout.observation_id(t), episode.observations[i],
                 Mode::Condition);
  }
}

LearnerTable run_training(const CausalProcess& process, int horizon,
                          std::uint64_t episodes, double alpha,
                          std::uint64_t root_seed, TrainingVariant variant) {
  if (episodes < 1) {
    throw ValidationError("episode count must be at least 1");
  }
  const RoundLayout layout = single_latent_layout(process);
  const int action_domain = process.variable(layout.action_id(1)).domain_size;
  const int obs_domain = process.variable(layout.observation_id(1)).domain_size;
  LearnerTable table(action_domain, obs_domain, alpha);

  if (variant == TrainingVariant::Frozen) {
    std::atomic<bool> failed{false};
    std::exception_ptr error;
#pragma omp parallel
    {
      LearnerTable local(action_domain, obs_domain, alpha);
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(episodes); ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
          const BraidedEpisode ep = generate_braided_episode(
              process, nullptr, horizon,
              derive_seed(root_seed, static_cast<std::uint64_t>(i)));
          record_episode(local, process, ep);
        } catch (...) {
#pragma omp critical
          {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      }
#pragma omp critical
      table.merge(local);
    }
    if (failed.load()) std::rethrow_exception(error);
  } else {
    // Interleaved: each episode is generated by the current table, so
    // the loop is sequential by contract.
    for (std::uint64_t i = 0; i < episodes; ++i) {
      const BraidedEpisode ep =
          generate_braided_episode(process, &table, horizon,
                                   derive_seed(root_seed, i));
      record_episode(table, process, ep);
    }
  }
  return table;
}

LossReport loss_report(const CausalProcess& process, const LearnerTable& learner,
                       const std::vector<BraidedEpisode>& episodes) {
  if (episodes.empty()) {
    throw ValidationError("loss report needs at least one episode");
  }
  const RoundLayout layout = single_latent_layout(process);
  const std::size_t horizon = episodes.front().agent_actions.size();
  LossReport report;
  report.mean_action_loss.assign(horizon, 0.0);
  report.mean_obs_loss.assign(horizon, 0.0);

  for (const BraidedEpisode& ep : episodes) {
    if (ep.agent_actions.size() != horizon ||
        ep.expert_actions.size() != horizon) {
      throw ValidationError("episodes have inconsistent horizons");
    }
    TaggedHistory visible;
    for (std::size_t i = 0; i < horizon; ++i) {
      const int t = static_cast<int>(i) + 1;
      const Distribution pa = learner.predict_action(visible);
      report.mean_action_loss[i] -=
          std::log(pa.p[static_cast<std::size_t>(ep.expert_actions[i])]);
      visible.push(layout.action_id(t), ep.agent_actions[i], Mode::Intervene);
      const Distribution po = learner.predict_observation(visible);
      report.mean_obs_loss[i] -=
          std::log(po.p[static_cast<std::size_t>(ep.observations[i])]);
      visible.push(layout.observation_id(t), ep.observations[i],
                   Mode::Condition);
    }
  }
  const double n = static_cast<double>(episodes.size());
  for (double& x : report.mean_action_loss) x /= n;
  for (double& x : report.mean_obs_loss) x /= n;
  return report;
}

std::vector<TableEvaluationRow> evaluate_against_targets(
    const CausalProcess& process, const LearnerTable& learner) {
  std::vector<TableEvaluationRow> rows;
  auto evaluate_section =
      [&](const std::map<HistoryKey, std::vector<std::uint64_t>>& counts,
          bool actions) {
        for (const auto& [key, row_counts] : counts) {
          TableEvaluationRow row;
          row.action_table = actions;
          row.key = decode_history(key);
          for (std::uint64_t c : row_counts) row.samples += c;
          row.learned = actions ? learner.predict_action(row.key)
                                : learner.predict_observation(row.key);

          const int target = row.key.items.empty()
                                 ? 1
                                 : row.key.items.back().variable + 1;
          if (target >= process.variable_count()) continue;

          std::vector<EvidenceItem> conditioned = row.key.items;
          for (EvidenceItem& e : conditioned) e.mode = Mode::Condition;
          row.intervened_target = query(process, target, row.key.items);
          row.tv_to_intervened = tv_distance(row.learned, row.intervened_target);
          try {
            row.conditioned_target = query(process, target, conditioned);
            row.tv_to_conditioned =
                tv_distance(row.learned, row.conditioned_target);
          } catch (const ZeroProbabilityError&) {
            // This history cannot arise under pure conditioning; leave
            // the deluded column empty.
            row.tv_to_conditioned = std::nan("");
          }
          rows.push_back(std::move(row));
        }
      };
  evaluate_section(learner.action_counts(), true);
  evaluate_section(learner.observation_counts(), false);
  return rows;
}

bool minimizer_check(const LearnerTable& learner) {
  const double alpha = learner.alpha();
  auto check_section =
      [&](const std::map<HistoryKey, std::vector<std::uint64_t>>& counts,
          bool actions) {
        for (const auto& [key, row] : counts) {
          const TaggedHistory history = decode_history(key);
          const Distribution predicted =
              actions ? learner.predict_action(history)
                      : learner.predict_observation(history);
          double total = 0.0;
          for (std::uint64_t c : row) total += static_cast<double>(c);
          const double denom =
              total + alpha * static_cast<double>(row.size());
          double sum = 0.0;
          for (std::size_t i = 0; i < row.size(); ++i) {
            const double expected =
                (static_cast<double>(row[i]) + alpha) / denom;
            if (std::abs(predicted.p[i] - expected) > 1e-15) return false;
            sum += predicted.p[i];
          }
          if (std::abs(sum - 1.0) > 1e-12) return false;
        }
        return true;
      };
  return check_section(learner.action_counts(), true) &&
         check_section(learner.observation_counts(), false);
}

}  // namespace causim
