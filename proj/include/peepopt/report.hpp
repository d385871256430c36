#pragma once

// Run configuration and report records shared by the pipeline and its I/O.

#include "peepopt/expander.hpp"
#include "peepopt/noise.hpp"
#include "peepopt/recombiner.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace peepopt {

struct ExpanderSettings {
    double d_keep = 0.3;
    OptimizerBudget budget;
};

struct RunConfig {
    std::vector<std::filesystem::path> circuits;
    std::size_t k = 4;
    NoiseModel noise;
    ExpanderSettings expander;
    RecombinerSettings recombiner;
    std::optional<std::uint64_t> recombiner_seed; ///< overrides the seed derived from `seed`
    std::vector<Configuration> configs{all_configurations.begin(), all_configurations.end()};
    std::uint64_t shots_per_circuit = 1024;
    std::uint64_t ideal_shots = 8192;
    bool exact_ideal = true;
    std::uint64_t baseline_shots = 0; ///< 0 means c * shots_per_circuit
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const
    {
        if (k < 2 || k > max_block_width) { throw ConfigError{"k must be in [2, 5]"}; }
        if (shots_per_circuit < 1 || ideal_shots < 1) { throw ConfigError{"shot counts must be at least 1"}; }
        if (!(expander.d_keep >= 0.0 && expander.d_keep <= 1.0)) { throw ConfigError{"d_keep must be in [0, 1]"}; }
        if (expander.budget.restarts < 1) { throw ConfigError{"expander restarts must be at least 1"}; }
        if (recombiner.c < 1) { throw ConfigError{"c must be at least 1"}; }
        if (configs.empty()) { throw ConfigError{"no recombiner configuration selected"}; }
        ObjectiveConfig{recombiner.epsilon, recombiner.w}.validate();
        recombiner.annealer.validate();
        noise.validate();
    }

    [[nodiscard]] auto effective_baseline_shots() const -> std::uint64_t
    {
        return baseline_shots > 0 ? baseline_shots : recombiner.c * shots_per_circuit;
    }
};

struct DistanceSummary {
    double tvd = 0.0;
    double jsd = 0.0;
    double tvd_exact = 0.0; ///< infinite-shot value, free of sampling noise
    double jsd_exact = 0.0;
};

struct ConfigReport {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<Solution> solutions;
    std::vector<std::string> qasm;
    DistanceSummary distance;
    double cnot_reduction_pct = 0.0;
    Counts counts;
    double seconds = 0.0; ///< wall time; kept out of report.json so reruns compare equal
};

struct BaselineReport {
    std::uint64_t shots = 0;
    DistanceSummary distance;
    Counts counts;
};

struct CircuitReport {
    std::string name;
    std::size_t num_qubits = 0;
    std::size_t num_blocks = 0;
    std::size_t original_cnots = 0;
    std::vector<std::size_t> candidates_per_block;
    OutcomeDistribution ideal;
    std::optional<BaselineReport> baseline;
    std::vector<ConfigReport> configs;
};

struct RunReport {
    std::uint64_t seed = 0;
    std::vector<CircuitReport> circuits;
    std::optional<std::string> failed_stage;
    std::optional<std::string> error;
};

/// Percentage by which `value` improves on `baseline` (positive = better).
[[nodiscard]] inline auto improvement_pct(double baseline, double value) -> double
{
    return baseline > 0.0 ? 100.0 * (baseline - value) / baseline : 0.0;
}

} // namespace peepopt
