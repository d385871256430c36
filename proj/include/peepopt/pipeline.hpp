#pragma once

// End-to-end run: parse, partition, expand, score, recombine, evaluate.

#include "peepopt/metrics.hpp"
#include "peepopt/qasm.hpp"
#include "peepopt/report.hpp"
#include "peepopt/serialize.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>

namespace peepopt {

/// Everything about one input circuit that does not depend on the
/// recombiner configuration.
struct PreparedCircuit {
    std::string name;
    Circuit circuit{1};
    std::vector<PartitionBlock> blocks;
    PartitionGraph graph;
    ApproximationSet approx;
    OutcomeDistribution ideal;
};

namespace detail {

template <class Fn>
auto staged(std::string const& stage, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (PipelineError const&) {
        throw;
    } catch (std::exception const& e) {
        throw PipelineError{stage, e.what()};
    }
}

inline auto config_index(Configuration c) -> std::uint64_t { return static_cast<std::uint64_t>(c); }

} // namespace detail

/// Partitions, expands and (when any error-aware configuration is requested)
/// scores the candidates of `circuit`. The ideal reference is exact unless
/// `exact_ideal` is off, in which case it is sampled with `ideal_shots`.
[[nodiscard]] inline auto prepare_circuit(std::string name, Circuit circuit, RunConfig const& cfg,
                                          std::uint64_t seed) -> PreparedCircuit
{
    PreparedCircuit p;
    p.name = std::move(name);
    p.blocks = detail::staged("partition", [&] { return scan_partition(circuit, cfg.k); });
    p.graph = build_partition_graph(p.blocks);
    p.approx = detail::staged("expand", [&] {
        return expand_all(p.blocks, circuit.num_qubits(), cfg.expander.d_keep, derive_seed(seed, {1}),
                          cfg.expander.budget, cfg.threads);
    });
    if (std::any_of(cfg.configs.begin(), cfg.configs.end(), needs_fidelity)) {
        detail::staged("score", [&] { score_candidates(p.approx, p.blocks, cfg.noise, cfg.threads); });
    }
    p.ideal = detail::staged("ideal", [&] {
        auto exact = ideal_distribution(circuit);
        if (cfg.exact_ideal) { return exact; }
        return counts_to_distribution(sample_counts(exact, cfg.ideal_shots, derive_seed(seed, {2})), exact.size());
    });
    p.circuit = std::move(circuit);
    return p;
}

/// The unmodified circuit under noise, sampled with the baseline shot count.
[[nodiscard]] inline auto evaluate_baseline(PreparedCircuit const& p, RunConfig const& cfg, std::uint64_t seed)
    -> BaselineReport
{
    return detail::staged("baseline", [&] {
        BaselineReport b;
        b.shots = cfg.effective_baseline_shots();
        auto const exact = noisy_distribution(p.circuit, cfg.noise);
        b.counts = sample_counts(exact, b.shots, derive_seed(seed, {3}));
        auto const sampled = counts_to_distribution(b.counts, exact.size());
        b.distance = {tvd(sampled, p.ideal), jsd(sampled, p.ideal), tvd(exact, p.ideal), jsd(exact, p.ideal)};
        return b;
    });
}

[[nodiscard]] inline auto recombiner_seed(RunConfig const& cfg, std::uint64_t seed, Configuration c) -> std::uint64_t
{
    auto const base = cfg.recombiner_seed ? *cfg.recombiner_seed : derive_seed(seed, {4});
    return derive_seed(base, {detail::config_index(c)});
}

[[nodiscard]] inline auto run_configuration(PreparedCircuit const& p, Configuration config, RunConfig const& cfg,
                                            std::uint64_t seed) -> ConfigReport
{
    auto const name = std::string{traits(config).name};
    auto const start = std::chrono::steady_clock::now();
    ConfigReport r;
    r.name = name;
    r.seed = recombiner_seed(cfg, seed, config);
    r.solutions = detail::staged("recombine:" + name, [&] {
        auto settings = cfg.recombiner;
        settings.annealer.seed = r.seed;
        return recombine(config, p.approx, p.graph, settings, cfg.threads);
    });
    detail::staged("evaluate:" + name, [&] {
        for (auto const& s : r.solutions) { r.qasm.push_back(emit_qasm(assemble(s, p.approx))); }
        auto const sample_seed = derive_seed(seed, {5, detail::config_index(config)});
        r.counts = ensemble_counts(r.solutions, p.approx, cfg.noise, cfg.shots_per_circuit, sample_seed);
        auto const sampled = counts_to_distribution(r.counts, p.ideal.size());
        auto const exact = ensemble_exact(r.solutions, p.approx, cfg.noise);
        r.distance = {tvd(sampled, p.ideal), jsd(sampled, p.ideal), tvd(exact, p.ideal), jsd(exact, p.ideal)};
        r.cnot_reduction_pct = cnot_reduction(r.solutions, p.approx, p.circuit);
    });
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

[[nodiscard]] inline auto circuit_report_header(PreparedCircuit const& p) -> CircuitReport
{
    CircuitReport c;
    c.name = p.name;
    c.num_qubits = p.circuit.num_qubits();
    c.num_blocks = p.blocks.size();
    c.original_cnots = cnot_count(p.circuit);
    c.candidates_per_block = p.approx.bounds();
    c.ideal = p.ideal;
    return c;
}

/// Runs every circuit and configuration of `cfg`. When `out_dir` is set the
/// report is written there, including a partial one if a stage fails; the
/// failure is then rethrown as a PipelineError naming the stage.
[[nodiscard]] inline auto run_pipeline(RunConfig const& cfg) -> RunReport
{
    RunReport report;
    report.seed = cfg.seed;
    auto flush = [&] {
        if (!cfg.out_dir.empty()) { write_report(report, cfg.out_dir); }
    };
    try {
        detail::staged("config", [&] { cfg.validate(); });
        if (cfg.circuits.empty()) { throw PipelineError{"config", "no input circuits"}; }
        for (std::size_t i = 0; i < cfg.circuits.size(); ++i) {
            auto const& path = cfg.circuits[i];
            auto const seed = derive_seed(cfg.seed, {i});
            auto circuit = detail::staged("parse", [&] { return parse_qasm(read_text(path)); });
            auto const p = prepare_circuit(path.stem().string(), std::move(circuit), cfg, seed);
            report.circuits.push_back(circuit_report_header(p));
            report.circuits.back().baseline = evaluate_baseline(p, cfg, seed);
            for (auto config : cfg.configs) {
                report.circuits.back().configs.push_back(run_configuration(p, config, cfg, seed));
            }
        }
    } catch (PipelineError const& e) {
        report.failed_stage = e.stage();
        report.error = e.what();
        try {
            flush();
        } catch (...) {
        }
        throw;
    }
    detail::staged("report", flush);
    return report;
}

} // namespace peepopt
