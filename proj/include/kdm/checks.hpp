#pragma once

#include "kdm/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace kdm {

struct CheckOptions {
  double tol = kDefaultTol;
  std::uint64_t seed = 7;
};

// Result of evaluating one identity, possibly over several instances.
struct Outcome {
  double deviation = 0;
  bool sampled = false;
  bool skipped = false;
  bool precondition_failed = false;
  std::string detail;

  void merge(const Comparison& c);
  void merge(const Outcome& o);
  void note(const std::string& s);
};

using Rng = std::mt19937_64;

// Identities between holonomies. `kind` is one of
//   decomposition, non-overlap, reversal, left-right, right-left, left-left, right-right,
//   left-joint, right-joint, middle-joint, ribbon-commutators, fusion-blocks, twisted-bulk
// The hypothesis is checked first; a violated hypothesis sets precondition_failed.
Outcome holonomy_identity(const Model& M, const std::string& kind, const std::vector<ThickPath>& paths,
                          const CheckOptions& opt, Rng& rng);

// transport operators
Outcome fusion_identity(const Model& M, const ThickPath& rho, const CheckOptions& opt, Rng& rng);
Outcome associativity_identity(const Model& M, const ThickPath& rho, const ThickPath& gamma, const CheckOptions& opt,
                               Rng& rng);
Outcome braiding_identity(const Model& M, const ThickPath& rho, const CheckOptions& opt, Rng& rng);

// site actions
Outcome module_law(const Model& M, const CheckOptions& opt, Rng& rng);
Outcome pair_module_law(const Model& M, const CheckOptions& opt, Rng& rng);
Outcome disjoint_commutation(const Model& M, const CheckOptions& opt, Rng& rng);

// transparent defects
Outcome removal_intertwiner(const Model& M, std::size_t d, const CheckOptions& opt, Rng& rng);
// max over basis h of |∫(λ_(2) h) S(λ_(1)) - h| with the normalized integrals of H and H*
double haar_removal_deviation(const HopfAlgebra<cd>& H);

// ---------------------------------------------------------------- suites and reports

struct CheckResult {
  std::string check_id, anchor, status, detail;
  double max_deviation = 0;
  double wall_time_ms = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kReportSchema = "kdm-verify-report/1";

// suite names accepted by run_suite, "all" last
const std::vector<std::string>& suite_names();
bool suite_needs_model(const std::string& suite);

// Throws UsageError for an unknown suite. Model suites build the model once;
// construction errors propagate.
std::vector<CheckResult> run_suite(const ModelSpec& spec, const std::string& suite, const CheckOptions& opt);
bool all_passed(const std::vector<CheckResult>& results);

// `timings` off writes wall_time_ms as 0 so reports are byte-identical across runs.
nlohmann::json report_json(const ModelSpec& spec, const std::string& suite, const CheckOptions& opt,
                           std::vector<CheckResult> results, bool timings);

// parse the pinned instances of one kind
std::vector<std::vector<ThickPath>> pinned_instances(const Model& M, const std::string& kind);

}  // namespace kdm
