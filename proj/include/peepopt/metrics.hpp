#pragma once

#include "peepopt/noise.hpp"
#include "peepopt/recombiner.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace peepopt {

namespace detail {
inline void check_same_length(OutcomeDistribution const& p, OutcomeDistribution const& q)
{
    if (p.size() != q.size()) {
        throw DimensionError{"distribution lengths differ: " + std::to_string(p.size()) + " vs "
                             + std::to_string(q.size())};
    }
}
} // namespace detail

[[nodiscard]] inline auto tvd(OutcomeDistribution const& p, OutcomeDistribution const& q) -> double
{
    detail::check_same_length(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) { s += std::abs(p[i] - q[i]); }
    return std::min(1.0, 0.5 * s);
}

/// Jensen-Shannon divergence in bits.
[[nodiscard]] inline auto jsd(OutcomeDistribution const& p, OutcomeDistribution const& q) -> double
{
    detail::check_same_length(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double const m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) { s += 0.5 * p[i] * std::log2(p[i] / m); }
        if (q[i] > 0.0) { s += 0.5 * q[i] * std::log2(q[i] / m); }
    }
    return std::clamp(s, 0.0, 1.0);
}

/// Exact noisy outcome distribution of a full circuit, readout included.
[[nodiscard]] inline auto noisy_distribution(Circuit const& circuit, NoiseModel const& noise) -> OutcomeDistribution
{
    return measure_distribution(simulate_density(circuit, noise), noise.readout);
}

[[nodiscard]] inline auto ideal_distribution(Circuit const& circuit) -> OutcomeDistribution
{
    return measure_distribution(simulate_density(circuit, NoiseModel::ideal()));
}

/// Counts of all result circuits pooled together; circuit i samples `shots`
/// outcomes with seed derive_seed(seed, {i}). Repeated solutions reuse one
/// simulation but still draw their own samples.
[[nodiscard]] inline auto ensemble_counts(std::vector<Solution> const& solutions, ApproximationSet const& approx,
                                          NoiseModel const& noise, std::uint64_t shots, std::uint64_t seed) -> Counts
{
    if (solutions.empty()) { throw ConfigError{"ensemble needs at least one solution"}; }
    std::map<Solution, OutcomeDistribution> cache;
    Counts pooled;
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        auto it = cache.find(solutions[i]);
        if (it == cache.end()) {
            it = cache.emplace(solutions[i], noisy_distribution(assemble(solutions[i], approx), noise)).first;
        }
        for (auto const& [k, v] : sample_counts(it->second, shots, derive_seed(seed, {i}))) { pooled[k] += v; }
    }
    return pooled;
}

[[nodiscard]] inline auto ensemble_distribution(std::vector<Solution> const& solutions, ApproximationSet const& approx,
                                                NoiseModel const& noise, std::uint64_t shots, std::uint64_t seed)
    -> OutcomeDistribution
{
    return counts_to_distribution(ensemble_counts(solutions, approx, noise, shots, seed),
                                  std::size_t{1} << approx.num_qubits);
}

/// Mean of the exact noisy distributions, i.e. the infinite-shot ensemble.
[[nodiscard]] inline auto ensemble_exact(std::vector<Solution> const& solutions, ApproximationSet const& approx,
                                         NoiseModel const& noise) -> OutcomeDistribution
{
    if (solutions.empty()) { throw ConfigError{"ensemble needs at least one solution"}; }
    OutcomeDistribution out;
    out.probs.assign(std::size_t{1} << approx.num_qubits, 0.0);
    std::map<Solution, OutcomeDistribution> cache;
    for (auto const& s : solutions) {
        auto it = cache.find(s);
        if (it == cache.end()) { it = cache.emplace(s, noisy_distribution(assemble(s, approx), noise)).first; }
        for (std::size_t i = 0; i < out.size(); ++i) { out.probs[i] += it->second[i]; }
    }
    for (auto& p : out.probs) { p /= static_cast<double>(solutions.size()); }
    return out;
}

/// Mean percentage of CNOTs removed relative to `original`; 0 when the
/// original has none.
[[nodiscard]] inline auto cnot_reduction(std::vector<Solution> const& solutions, ApproximationSet const& approx,
                                         Circuit const& original) -> double
{
    auto const base = cnot_count(original);
    if (base == 0 || solutions.empty()) { return 0.0; }
    double sum = 0.0;
    for (auto const& s : solutions) {
        sum += 100.0 * (1.0 - static_cast<double>(cnot_count(assemble(s, approx))) / static_cast<double>(base));
    }
    return sum / static_cast<double>(solutions.size());
}

} // namespace peepopt
