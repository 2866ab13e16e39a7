#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "causim/distribution.hpp"
#include "causim/errors.hpp"

namespace causim {

enum class Role { Latent, Action, Observation, Goal };

enum class Mode { Condition, Intervene };

const char* role_name(Role r);
Role role_from_name(const std::string& s);  // throws ValidationError

// One random variable of a causal process. Variables are kept in
// topological (causal) order; `id` is the position in that order.
struct VariableSpec {
  int id = 0;
  std::string name;
  Role role = Role::Latent;
  int domain_size = 0;  // symbols are 0 .. domain_size-1
};

// Conditional probability table of one variable given its parents.
// Rows are stored flat, one row per parent assignment, in odometer
// order with the last parent cycling fastest. Root variables have a
// single row.
struct Mechanism {
  int variable = 0;
  std::vector<int> parents;   // ids, each < variable
  std::vector<double> table;  // row_count() x domain_size, row-major

  std::size_t row_count(const std::vector<VariableSpec>& vars) const;
  // Index of the row selected by a full assignment of the process.
  std::size_t row_index(std::span<const int> assignment,
                        const std::vector<VariableSpec>& vars) const;
};

// A finite discrete causal process: an ordered list of variables plus
// one mechanism per variable. Acyclicity is guaranteed by the ordering
// (parents always precede children). Immutable after construction;
// safe to query concurrently.
class CausalProcess {
 public:
  CausalProcess(std::string name, std::vector<VariableSpec> variables,
                std::vector<Mechanism> mechanisms);

  const std::string& name() const { return name_; }
  const std::vector<VariableSpec>& variables() const { return variables_; }
  const std::vector<Mechanism>& mechanisms() const { return mechanisms_; }
  const VariableSpec& variable(int id) const { return variables_.at(id); }
  const Mechanism& mechanism(int id) const { return mechanisms_.at(id); }
  int variable_count() const { return static_cast<int>(variables_.size()); }

  // Resolves a variable name; throws ValidationError listing the valid
  // names when absent.
  int variable_id(const std::string& name) const;
  bool has_variable(const std::string& name) const;

  // Probability of `value` for variable `id` under a (partially filled)
  // assignment that must cover the variable's parents.
  double mechanism_prob(int id, std::span<const int> assignment,
                        int value) const;

  // One row of a mechanism as a Distribution.
  Distribution mechanism_row(int id, std::span<const int> assignment) const;

  // Number of joint assignments (product of domain sizes).
  std::uint64_t joint_size() const;

  void check_assignment(std::span<const int> assignment) const;

 private:
  void validate() const;

  std::string name_;
  std::vector<VariableSpec> variables_;
  std::vector<Mechanism> mechanisms_;
};

// Symbol evidence for a single variable, tagged with how it entered the
// history: conditioned (observed) or intervened (self-generated).
struct EvidenceItem {
  int variable = 0;
  int value = 0;
  Mode mode = Mode::Condition;
};

// Checks arity/range for one evidence item; throws InvalidAssignmentError.
void check_evidence_item(const CausalProcess& process, const EvidenceItem& e);

// Rejects duplicate variables (including condition+intervene pairs on the
// same variable, which are treated as distinct symbols and never mixed).
void check_evidence_distinct(const std::vector<EvidenceItem>& evidence);

}  // namespace causim
