#pragma once

// Density-matrix simulation under a per-gate depolarizing noise model.

#include "peepopt/circuit.hpp"
#include "peepopt/expander.hpp"
#include "peepopt/parallel.hpp"
#include "peepopt/partition.hpp"
#include "peepopt/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace peepopt {

inline constexpr std::size_t max_density_qubits = 12;

struct QubitNoise {
    std::optional<double> p1;
    std::optional<double> p2;

    friend auto operator==(QubitNoise const&, QubitNoise const&) -> bool = default;
};

/// Depolarizing probability per single- and two-qubit gate, optional
/// per-qubit readout bit-flip probabilities and per-qubit overrides. A gate
/// uses the largest effective probability among the qubits it touches.
struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;
    std::optional<std::vector<double>> readout;
    std::map<qubit_t, QubitNoise> overrides;

    [[nodiscard]] static auto ideal() -> NoiseModel { return {}; }

    void validate() const
    {
        auto check = [](double p, char const* what) {
            if (!(p >= 0.0 && p <= 1.0)) { throw ConfigError{std::string{what} + " must be in [0, 1]"}; }
        };
        check(p1, "p1");
        check(p2, "p2");
        if (readout) {
            for (auto r : *readout) { check(r, "readout probability"); }
        }
        for (auto const& [q, o] : overrides) {
            if (o.p1) { check(*o.p1, "override p1"); }
            if (o.p2) { check(*o.p2, "override p2"); }
        }
    }

    [[nodiscard]] auto gate_probability(Gate const& g) const -> double
    {
        bool const two = arity(g.kind) == 2;
        double p = two ? p2 : p1;
        for (auto q : g.targets()) {
            if (auto it = overrides.find(q); it != overrides.end()) {
                auto const& o = two ? it->second.p2 : it->second.p1;
                if (o) { p = std::max(p, *o); }
            }
        }
        return p;
    }

    /// Model seen by a subcircuit whose local qubit i is global `qubits[i]`.
    [[nodiscard]] auto restricted(QubitMap const& qubits) const -> NoiseModel
    {
        NoiseModel local{p1, p2, std::nullopt, {}};
        for (std::size_t i = 0; i < qubits.size(); ++i) {
            if (auto it = overrides.find(qubits[i]); it != overrides.end()) {
                local.overrides[static_cast<qubit_t>(i)] = it->second;
            }
        }
        if (readout) {
            local.readout.emplace();
            for (auto q : qubits) { local.readout->push_back(q < readout->size() ? (*readout)[q] : 0.0); }
        }
        return local;
    }

    [[nodiscard]] auto without_readout() const -> NoiseModel
    {
        auto m = *this;
        m.readout.reset();
        return m;
    }
};

class DensityMatrix {
  public:
    DensityMatrix() = default;
    explicit DensityMatrix(Eigen::MatrixXcd rho) : rho_{std::move(rho)}
    {
        if (rho_.rows() != rho_.cols()) { throw DimensionError{"density matrix must be square"}; }
    }

    /// |0...0><0...0| on `n` qubits.
    [[nodiscard]] static auto ground(std::size_t n) -> DensityMatrix
    {
        auto const dim = Eigen::Index{1} << n;
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
        rho(0, 0) = 1.0;
        return DensityMatrix{std::move(rho)};
    }

    [[nodiscard]] auto matrix() const noexcept -> Eigen::MatrixXcd const& { return rho_; }
    [[nodiscard]] auto matrix() noexcept -> Eigen::MatrixXcd& { return rho_; }
    [[nodiscard]] auto dim() const noexcept -> Eigen::Index { return rho_.rows(); }
    [[nodiscard]] auto trace() const -> complex_t { return rho_.trace(); }

  private:
    Eigen::MatrixXcd rho_;
};

/// Dense probability vector over 2^m outcomes, indexed by basis state.
struct OutcomeDistribution {
    std::vector<double> probs;

    [[nodiscard]] auto size() const noexcept -> std::size_t { return probs.size(); }
    [[nodiscard]] auto operator[](std::size_t i) const -> double { return probs[i]; }
    friend auto operator==(OutcomeDistribution const&, OutcomeDistribution const&) -> bool = default;
};

/// Outcome index -> number of shots. Only observed outcomes are present.
using Counts = std::map<std::uint64_t, std::uint64_t>;

/// rho <- (1-p) rho + p Tr_S(rho) (x) I/2^|S| on the qubits of `g`.
inline void depolarize(Eigen::MatrixXcd& rho, Gate const& g, double p)
{
    if (p <= 0.0) { return; }
    Eigen::Index mask = 0;
    std::vector<Eigen::Index> offsets{0};
    for (auto q : g.targets()) {
        auto const bit = Eigen::Index{1} << q;
        mask |= bit;
        auto const n = offsets.size();
        for (std::size_t i = 0; i < n; ++i) { offsets.push_back(offsets[i] | bit); }
    }
    double const mixed = p / static_cast<double>(offsets.size());
    auto const dim = rho.rows();
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & mask) { continue; }
        for (Eigen::Index j = 0; j < dim; ++j) {
            if (j & mask) { continue; }
            complex_t partial = 0.0;
            for (auto c : offsets) { partial += rho(i | c, j | c); }
            for (auto c1 : offsets) {
                for (auto c2 : offsets) { rho(i | c1, j | c2) *= (1.0 - p); }
                rho(i | c1, j | c1) += mixed * partial;
            }
        }
    }
}

/// Evolves |0...0><0...0| through `circuit`; every gate is followed by a
/// depolarizing channel on its own qubits.
[[nodiscard]] inline auto simulate_density(Circuit const& circuit, NoiseModel const& noise) -> DensityMatrix
{
    if (circuit.num_qubits() > max_density_qubits) {
        throw DimensionError{"density simulation limited to " + std::to_string(max_density_qubits) + " qubits, got "
                             + std::to_string(circuit.num_qubits())};
    }
    auto state = DensityMatrix::ground(circuit.num_qubits());
    auto& rho = state.matrix();
    for (auto const& g : circuit.gates()) {
        if (g.kind == GateKind::CX) {
            apply_cx_left(rho, g.qubits[0], g.qubits[1]);
            apply_cx_right(rho, g.qubits[0], g.qubits[1]);
        } else {
            Matrix2 const u = single_qubit_matrix(g);
            apply_left(rho, u, g.qubits[0]);
            apply_right(rho, u.adjoint(), g.qubits[0]);
        }
        depolarize(rho, g, noise.gate_probability(g));
    }
    return state;
}

/// Diagonal of rho, optionally pushed through independent per-qubit bit flips.
[[nodiscard]] inline auto measure_distribution(DensityMatrix const& rho,
                                               std::optional<std::vector<double>> const& readout = std::nullopt)
    -> OutcomeDistribution
{
    auto const dim = static_cast<std::size_t>(rho.dim());
    OutcomeDistribution out;
    out.probs.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        out.probs[i] = std::max(0.0, rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
    }
    if (readout) {
        for (std::size_t q = 0; q < readout->size() && (std::size_t{1} << q) < dim; ++q) {
            double const f = (*readout)[q];
            if (f == 0.0) { continue; }
            auto const bit = std::size_t{1} << q;
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & bit) { continue; }
                double const a = out.probs[i], b = out.probs[i | bit];
                out.probs[i] = (1 - f) * a + f * b;
                out.probs[i | bit] = f * a + (1 - f) * b;
            }
        }
    }
    return out;
}

/// Multinomial draw of `shots` outcomes via sequential conditional binomials.
[[nodiscard]] inline auto sample_counts(OutcomeDistribution const& dist, std::uint64_t shots, std::uint64_t seed)
    -> Counts
{
    if (shots == 0) { throw ConfigError{"shots must be at least 1"}; }
    rng_t rng{seed};
    double total = 0;
    for (auto p : dist.probs) { total += p; }
    Counts counts;
    std::uint64_t remaining = shots;
    double mass = total;
    for (std::size_t i = 0; i < dist.size() && remaining > 0; ++i) {
        double const p = dist.probs[i];
        if (p <= 0.0) { continue; }
        std::uint64_t k = remaining;
        double const cond = mass > 0 ? std::clamp(p / mass, 0.0, 1.0) : 1.0;
        if (cond < 1.0) {
            std::binomial_distribution<std::uint64_t> draw{remaining, cond};
            k = draw(rng);
        }
        if (k > 0) { counts[i] = k; }
        remaining -= k;
        mass -= p;
    }
    if (remaining > 0) {
        // Rounding left shots over; give them to the last supported outcome.
        for (std::size_t i = dist.size(); i-- > 0;) {
            if (dist.probs[i] > 0.0) {
                counts[i] += remaining;
                break;
            }
        }
    }
    return counts;
}

[[nodiscard]] inline auto counts_to_distribution(Counts const& counts, std::size_t dim) -> OutcomeDistribution
{
    OutcomeDistribution out;
    out.probs.assign(dim, 0.0);
    std::uint64_t total = 0;
    for (auto const& [k, v] : counts) {
        if (k >= dim) { throw DimensionError{"counts outcome outside distribution"}; }
        total += v;
    }
    if (total == 0) { return out; }
    for (auto const& [k, v] : counts) { out.probs[k] = static_cast<double>(v) / static_cast<double>(total); }
    return out;
}

[[nodiscard]] inline auto frobenius_distance(DensityMatrix const& a, DensityMatrix const& b) -> double
{
    if (a.dim() != b.dim()) {
        throw DimensionError{"frobenius_distance: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim())};
    }
    return (a.matrix() - b.matrix()).norm();
}

/// Frobenius distance between the block's noiseless output state and the
/// candidate's output state under `noise` (readout disabled), both from |0...0>.
[[nodiscard]] inline auto block_fidelity_score(Candidate const& candidate, PartitionBlock const& block,
                                               NoiseModel const& noise) -> double
{
    if (candidate.local_circuit.num_qubits() != block.local_circuit.num_qubits()) {
        throw DimensionError{"candidate and block widths differ"};
    }
    auto const ideal = simulate_density(block.local_circuit, NoiseModel::ideal());
    auto const local = noise.restricted(block.qubits).without_readout();
    return frobenius_distance(ideal, simulate_density(candidate.local_circuit, local));
}

/// Fills `fidelity_score` of every candidate. Blocks are independent.
inline void score_candidates(ApproximationSet& approx, std::vector<PartitionBlock> const& blocks,
                             NoiseModel const& noise, std::size_t threads = 1)
{
    if (approx.num_blocks() != blocks.size()) { throw DimensionError{"approximation set / partition mismatch"}; }
    parallel_for(blocks.size(), threads, [&](std::size_t b) {
        auto const ideal = simulate_density(blocks[b].local_circuit, NoiseModel::ideal());
        auto const local = noise.restricted(blocks[b].qubits).without_readout();
        for (auto& cand : approx.candidates[b]) {
            cand.fidelity_score = frobenius_distance(ideal, simulate_density(cand.local_circuit, local));
        }
    });
}

} // namespace peepopt
