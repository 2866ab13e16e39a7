#pragma once

#include <string>
#include <vector>

#include "causim/meta_trainer.hpp"
#include "causim/simulator.hpp"

namespace causim {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Episode logs: one JSON object per line. Every step carries the mode
// tag under which the policy incorporated its own action.
std::string episode_to_json(const EpisodeRecord& record);
std::string episodes_to_jsonl(const std::vector<EpisodeRecord>& records);

// Experiment summaries: fixed column order.
std::string summary_csv_header();
std::string summary_csv_row(const ExperimentSummary& summary);

std::string offline_report_csv(const OfflineReport& report,
                               const CausalProcess& process);

std::string table_evaluation_csv(const std::vector<TableEvaluationRow>& rows,
                                 const CausalProcess& process);

// Config echo written alongside every run's outputs: all parameters,
// the seed, and the artifact version. Re-running with these parameters
// reproduces the outputs byte-identically; only the timestamp differs.
std::string config_echo_json(
    const std::string& command,
    const std::vector<std::pair<std::string, std::string>>& parameters);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace causim
