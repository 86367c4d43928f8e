#pragma once

#include "carnot/grid.hpp"
#include "carnot/group.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

/// One JSON scenario file:
///
///   { "group": "heisenberg:1" | {inline spec},
///     "domain": {"intervals": [[-1, 1], ...], "nodes": [21, ...]},
///     "operator": {"op": "trace_minus_u", "c": 1},
///     "u": "x1^2", "v": "0",
///     "delta": 0.1, "epsilon": 0.05, "epsilons": [0.1, 0.05], "mode": "sup",
///     "tol": 1e-6, "seed": 0, "samples": 200,
///     "outputs": {"dir": "out", "formats": ["json", "csv"]} }
///
/// Only the keys a subcommand needs must be present.
struct ScenarioConfig {
    nlohmann::json raw;
    CarnotGroup group = CarnotGroup::euclidean(1);
    std::optional<GridDomain> domain;
    std::optional<nlohmann::json> op;
    std::optional<std::string> u, v;
    double delta = 0.1;
    double epsilon = 0.05;
    std::vector<double> epsilons;
    std::string mode = "sup";
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::size_t samples = 200;
    std::string out_dir;
    std::vector<std::string> formats{"json", "csv"};

    static ScenarioConfig from_json(const nlohmann::json& j);
    static ScenarioConfig from_file(const std::string& path);

    const GridDomain& require_domain() const;
    const std::string& require_field(const std::optional<std::string>& f, const char* key) const;
    bool wants(const std::string& format) const;
};

struct CommandResult {
    int exit_code = 0;
    nlohmann::json report;
    /// File name → contents, written under the output directory.
    std::map<std::string, std::string> artifacts;
};

CommandResult cmd_group_check(const CarnotGroup& g, std::size_t samples, std::uint64_t seed);
CommandResult cmd_convolve(const ScenarioConfig& cfg);
CommandResult cmd_perturb(const ScenarioConfig& cfg);
CommandResult cmd_structure_check(const ScenarioConfig& cfg);
CommandResult cmd_compare(const ScenarioConfig& cfg);

/// Stable text form of a report: sorted keys, two-space indent, trailing newline.
std::string dump_report(const nlohmann::json& report);

void write_artifacts(const CommandResult& result, const std::string& dir);

} // namespace carnot
