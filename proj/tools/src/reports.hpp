#pragma once

// Artifact writers shared by the eonplan commands. Every artifact starts with
// the resolved inputs and configuration so a run can be reproduced from it.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eon/gpsa.hpp"
#include "eon/heuristic.hpp"
#include "eon/model.hpp"
#include "eon/validate.hpp"

namespace eon::cli {

struct RunContext {
  std::string command;
  std::filesystem::path topology;
  std::filesystem::path traffic;
  std::optional<std::filesystem::path> constants;
  std::optional<std::filesystem::path> config;
  PhysicsConstants physics;
  ScenarioConfig scenario;
};

/// `key = value` lines of the inputs, constants and scenario configuration.
std::vector<std::string> context_lines(const RunContext& ctx);
/// The context lines as `# ` comments.
void write_context_comment(std::ostream& out, const RunContext& ctx);
nlohmann::ordered_json context_json(const RunContext& ctx);

/// Shortest round-trip-safe decimal form used in every CSV.
std::string num(double v);

nlohmann::ordered_json report_json(const validate::ValidationReport& r);
nlohmann::ordered_json trace_json(const heuristic::HeuristicTrace& t);

void write_allocation_csv(std::ostream& out, const RunContext& ctx, const NetworkInstance& inst,
                          const heuristic::RunResult& run, const validate::ValidationReport& report);
void write_sizes_csv(std::ostream& out, const RunContext* ctx, const std::vector<gpsa::SizeReport>& sizes);
void write_counts_csv(std::ostream& out, const std::vector<gpsa::FormulationCount>& counts);

/// Cross-channel kernel: exact, order-1 and order-3 forms with signed
/// relative errors over x = step, 2 step, ..., max.
void write_curves_csv(std::ostream& out, double step, double max);
/// Required-OSNR fits against the table at every tabulated efficiency.
void write_fits_csv(std::ostream& out);
/// The fits over a dense efficiency grid in [2, 12].
void write_fit_curves_csv(std::ostream& out, double step);

}  // namespace eon::cli
