#include "causim/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace causim {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string episode_to_json(const EpisodeRecord& record) {
  nlohmann::ordered_json j;
  j["seed"] = record.seed;
  j["policy"] = policy_kind_name(record.policy);
  j["theta"] = record.theta;
  j["aborted"] = record.aborted;
  const char* mode =
      record.policy == PolicyKind::Conditional ? "cond" : "do";
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const EpisodeStep& s : record.steps) {
    steps.push_back({{"a", s.action},
                     {"mode", mode},
                     {"o", s.observation},
                     {"r", s.reward}});
  }
  j["steps"] = std::move(steps);
  return j.dump();
}

std::string episodes_to_jsonl(const std::vector<EpisodeRecord>& records) {
  std::string out;
  for (const EpisodeRecord& r : records) {
    out += episode_to_json(r);
    out += '\n';
  }
  return out;
}

std::string summary_csv_header() {
  return "policy,horizon,episodes,aborted,mean_reward_per_step,"
         "se_mean_reward,final_best_arm_rate,se_final_best_arm_rate,"
         "repeat_rate,se_repeat_rate";
}

std::string summary_csv_row(const ExperimentSummary& s) {
  std::ostringstream out;
  out << policy_kind_name(s.policy) << ',' << s.horizon << ',' << s.episodes
      << ',' << s.aborted << ',' << fmt(s.mean_reward_per_step) << ','
      << fmt(s.se_mean_reward) << ',' << fmt(s.final_best_arm_rate) << ','
      << fmt(s.se_final_best_arm_rate) << ',' << fmt(s.repeat_rate) << ','
      << fmt(s.se_repeat_rate);
  return out.str();
}

namespace {

std::string dist_field(const Distribution& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += ' ';
    out += fmt(d.p[i]);
  }
  return out;
}

}  // namespace

std::string offline_report_csv(const OfflineReport& report,
                               const CausalProcess& process) {
  const RoundLayout layout = single_latent_layout(process);
  std::ostringstream out;
  out << "t,history,samples,fitted,conditioned_target,intervened_target,"
         "tv_fitted_conditioned,tv_fitted_intervened,se_tv_fitted_intervened\n";
  for (const OfflineKeyRow& row : report.rows) {
    TaggedHistory h;
    for (std::size_t i = 0; i < row.past_actions.size(); ++i) {
      const int t = static_cast<int>(i) + 1;
      h.push(layout.action_id(t), row.past_actions[i], Mode::Condition);
      h.push(layout.observation_id(t), row.past_obs[i], Mode::Condition);
    }
    out << row.past_actions.size() + 1 << ',' << history_to_string(h, process)
        << ',' << row.key_count << ',' << dist_field(row.fitted) << ','
        << dist_field(row.conditioned_target) << ','
        << dist_field(row.intervened_target) << ','
        << fmt(row.tv_fitted_conditioned) << ','
        << fmt(row.tv_fitted_intervened) << ','
        << fmt(row.se_tv_fitted_intervened) << '\n';
  }
  return out.str();
}

std::string table_evaluation_csv(const std::vector<TableEvaluationRow>& rows,
                                 const CausalProcess& process) {
  std::ostringstream out;
  out << "table,key,samples,learned,intervened_target,conditioned_target,"
         "tv_to_intervened,tv_to_conditioned\n";
  for (const TableEvaluationRow& row : rows) {
    out << (row.action_table ? "action" : "observation") << ','
        << history_to_string(row.key, process) << ',' << row.samples << ','
        << dist_field(row.learned) << ',' << dist_field(row.intervened_target)
        << ',' << dist_field(row.conditioned_target) << ','
        << fmt(row.tv_to_intervened) << ',' << fmt(row.tv_to_conditioned)
        << '\n';
  }
  return out.str();
}

std::string config_echo_json(
    const std::string& command,
    const std::vector<std::pair<std::string, std::string>>& parameters) {
  nlohmann::ordered_json j;
  j["tool"] = "causim";
  j["version"] = kArtifactVersion;
  j["command"] = command;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : parameters) params[k] = v;
  j["parameters"] = std::move(params);
  const auto now = std::chrono::system_clock::now();
  j["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace causim
