#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pspin::accept {

enum class Level { quick, full };

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string details;
  double seconds = 0.0;
};

/// Identifiers of all verification criteria, in report order.
std::vector<std::string> criterion_ids();

/// Runs one criterion by id ("A1".."A11").
CriterionResult run_criterion(const std::string& id, Level level);

/// Runs all criteria (or the given subset), invoking on_each as results land.
std::vector<CriterionResult> run_acceptance(
    Level level, const std::vector<std::string>& only = {},
    const std::function<void(const CriterionResult&)>& on_each = nullptr);

}  // namespace pspin::accept
