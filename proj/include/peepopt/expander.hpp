#pragma once

// Approximation generator: fits layered CX/U3 templates with fewer CNOTs to
// each partition block and keeps the fits that land close enough.

#include "peepopt/circuit.hpp"
#include "peepopt/hs_distance.hpp"
#include "peepopt/partition.hpp"
#include "peepopt/parallel.hpp"
#include "peepopt/random.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace peepopt {

/// Layered template over a linear chain: a U3 on every qubit, then `m`
/// layers of one CX on chain pair (l mod (q-1), l mod (q-1) + 1) followed by
/// U3s on the two touched qubits. Parameters are consumed in gate order.
class Ansatz {
  public:
    Ansatz(std::size_t num_cnots, std::size_t num_qubits) : cnots_{num_cnots}, qubits_{num_qubits}
    {
        if (num_qubits == 0 || num_qubits > max_block_width) {
            throw ConfigError{"ansatz width must be in [1, 5]"};
        }
        if (num_qubits == 1 && num_cnots > 0) { throw ConfigError{"a 1-qubit ansatz cannot hold CNOTs"}; }
        for (qubit_t q = 0; q < num_qubits; ++q) { skeleton_.push_back(Gate::u3(q, 0, 0, 0)); }
        for (std::size_t layer = 0; layer < num_cnots; ++layer) {
            auto const a = static_cast<qubit_t>(layer % (num_qubits - 1));
            skeleton_.push_back(Gate::cx(a, a + 1));
            skeleton_.push_back(Gate::u3(a, 0, 0, 0));
            skeleton_.push_back(Gate::u3(a + 1, 0, 0, 0));
        }
    }

    [[nodiscard]] auto num_qubits() const noexcept -> std::size_t { return qubits_; }
    [[nodiscard]] auto num_cnots() const noexcept -> std::size_t { return cnots_; }
    [[nodiscard]] auto num_params() const noexcept -> std::size_t { return 3 * qubits_ + 6 * cnots_; }
    [[nodiscard]] auto skeleton() const noexcept -> std::vector<Gate> const& { return skeleton_; }

    /// Gate list with `params` substituted into the U3 slots.
    [[nodiscard]] auto gates(std::span<double const> params) const -> std::vector<Gate>
    {
        if (params.size() != num_params()) { throw DimensionError{"ansatz parameter count mismatch"}; }
        std::vector<Gate> out = skeleton_;
        std::size_t p = 0;
        for (auto& g : out) {
            if (g.kind == GateKind::U3) {
                g.params = {params[p], params[p + 1], params[p + 2]};
                p += 3;
            }
        }
        return out;
    }

    [[nodiscard]] auto instantiate(std::span<double const> params) const -> Circuit
    {
        return Circuit{qubits_, gates(params)};
    }

  private:
    std::size_t cnots_;
    std::size_t qubits_;
    std::vector<Gate> skeleton_;
};

[[nodiscard]] inline auto ansatz(std::size_t m, std::size_t q) -> Ansatz { return Ansatz{m, q}; }

struct OptimizerBudget {
    std::size_t restarts = 8;
    std::size_t max_iterations = 200;
    double fd_step = 1e-6;
};

struct FitResult {
    std::vector<double> params;
    double hs_distance = 1.0;
};

namespace detail {

/// hs_distance(template(theta), target) and its forward-difference gradient.
///
/// Perturbing one angle of gate k only changes G_k, and
/// Tr(V^dagger U) = Tr(G_k E_k) with E_k = P_k V^dagger S_k (P_k, S_k the
/// products before and after gate k). Each difference quotient is therefore
/// evaluated by contracting the perturbed 2x2 gate against the reduced 2x2
/// block of E_k instead of rebuilding the full unitary.
class TemplateFit {
  public:
    TemplateFit(Ansatz const& ansatz, UnitaryMatrix const& target, double fd_step)
        : ansatz_{ansatz}, target_{target}, target_adj_{target.adjoint()}, h_{fd_step},
          dim_{static_cast<double>(target.rows())}
    {
        if (target.rows() != (Eigen::Index{1} << ansatz.num_qubits()) || target.rows() != target.cols()) {
            throw DimensionError{"template width does not match target dimension"};
        }
    }

    [[nodiscard]] auto value(std::span<double const> params) const -> double
    {
        auto const u = unitary_of(ansatz_.instantiate(params));
        return 1.0 - std::abs(target_.conjugate().cwiseProduct(u).sum()) / dim_;
    }

    auto value_and_gradient(std::span<double const> params, std::span<double> grad) const -> double
    {
        auto const gates = ansatz_.gates(params);
        auto const n = static_cast<Eigen::Index>(target_.rows());
        std::vector<UnitaryMatrix> prefix;
        prefix.reserve(gates.size() + 1);
        prefix.emplace_back(UnitaryMatrix::Identity(n, n));
        for (auto const& g : gates) {
            prefix.push_back(prefix.back());
            apply_left(prefix.back(), g);
        }
        double const f = 1.0 - std::abs(target_.conjugate().cwiseProduct(prefix.back()).sum()) / dim_;

        UnitaryMatrix back = target_adj_;
        std::size_t p = ansatz_.num_params();
        for (std::size_t k = gates.size(); k-- > 0;) {
            auto const& g = gates[k];
            if (g.kind != GateKind::CX) {
                p -= 3;
                auto const r = reduced(prefix[k], back, g.qubits[0]);
                auto const mat = single_qubit_matrix(g);
                double const fk = 1.0 - std::abs(contract(mat, r)) / dim_;
                auto angles = g.params;
                for (std::size_t a = 0; a < 3; ++a) {
                    auto shifted = angles;
                    shifted[a] += h_;
                    double const fs =
                        1.0 - std::abs(contract(single_qubit_matrix(GateKind::U3, shifted), r)) / dim_;
                    grad[p + a] = (fs - fk) / h_;
                }
            }
            apply_right(back, g);
        }
        return f;
    }

  private:
    // R(b, a) = sum_rest E[(rest,b), (rest,a)] with E = P * B, bit `q` selecting a/b.
    static auto reduced(UnitaryMatrix const& pm, UnitaryMatrix const& bm, qubit_t q) -> Matrix2
    {
        auto const bit = Eigen::Index{1} << q;
        Matrix2 r = Matrix2::Zero();
        for (Eigen::Index i0 = 0; i0 < pm.rows(); ++i0) {
            if (i0 & bit) { continue; }
            auto const i1 = i0 | bit;
            r(0, 0) += (pm.row(i0) * bm.col(i0)).value();
            r(0, 1) += (pm.row(i0) * bm.col(i1)).value();
            r(1, 0) += (pm.row(i1) * bm.col(i0)).value();
            r(1, 1) += (pm.row(i1) * bm.col(i1)).value();
        }
        return r;
    }

    // Tr(G R) = sum_ab G(a,b) R(b,a)
    static auto contract(Matrix2 const& g, Matrix2 const& r) -> complex_t
    {
        return g(0, 0) * r(0, 0) + g(0, 1) * r(1, 0) + g(1, 0) * r(0, 1) + g(1, 1) * r(1, 1);
    }

    Ansatz const& ansatz_;
    UnitaryMatrix target_;
    UnitaryMatrix target_adj_;
    double h_;
    double dim_;
};

} // namespace detail

/// Multi-start local search over the template parameters. Each start draws
/// angles uniformly from [-pi, pi) and descends along the finite-difference
/// gradient with a halving backtracking line search. Returns the best start.
[[nodiscard]] inline auto optimize_params(Ansatz const& tmpl, UnitaryMatrix const& target,
                                          OptimizerBudget const& budget, std::uint64_t seed) -> FitResult
{
    detail::TemplateFit const fit{tmpl, target, budget.fd_step};
    auto const n = tmpl.num_params();
    FitResult best;
    best.params.assign(n, 0.0);
    best.hs_distance = fit.value(best.params);

    std::vector<double> x(n), grad(n), trial(n);
    for (std::size_t start = 0; start < std::max<std::size_t>(budget.restarts, 1); ++start) {
        rng_t rng{derive_seed(seed, {start})};
        std::uniform_real_distribution<double> angle{-std::numbers::pi, std::numbers::pi};
        for (auto& v : x) { v = angle(rng); }

        double f = fit.value_and_gradient(x, grad);
        double step = 1.0;
        for (std::size_t it = 0; it < budget.max_iterations && f > 1e-15; ++it) {
            double g2 = 0;
            for (auto gi : grad) { g2 += gi * gi; }
            if (g2 < 1e-24) { break; }

            bool accepted = false;
            step *= 2.0;
            for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
                for (std::size_t i = 0; i < n; ++i) { trial[i] = x[i] - step * grad[i]; }
                double const ft = fit.value(trial);
                if (ft <= f - 1e-4 * step * g2) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) { break; }
            x.swap(trial);
            f = fit.value_and_gradient(x, grad);
        }
        if (f < best.hs_distance) {
            best.hs_distance = f;
            best.params = x;
        }
    }
    return best;
}

struct Candidate {
    Circuit local_circuit;
    UnitaryMatrix unitary;
    double hs_distance = 0.0; ///< against the block's exact unitary
    std::size_t cnots = 0;
    std::optional<double> fidelity_score; ///< filled by the noise model for error-aware objectives
};

/// Per-block candidate lists plus the qubit placement of each block, enough
/// to reassemble any choice into a full circuit. Candidate 0 of each block is
/// the exact original.
struct ApproximationSet {
    std::size_t num_qubits = 0;
    std::vector<QubitMap> block_qubits;
    std::vector<std::vector<Candidate>> candidates;

    [[nodiscard]] auto num_blocks() const noexcept -> std::size_t { return candidates.size(); }
    [[nodiscard]] auto count(std::size_t b) const -> std::size_t { return candidates.at(b).size(); }
    [[nodiscard]] auto bounds() const -> std::vector<std::size_t>
    {
        std::vector<std::size_t> out;
        for (auto const& c : candidates) { out.push_back(c.size()); }
        return out;
    }
    [[nodiscard]] auto original_cnots() const -> std::size_t
    {
        std::size_t n = 0;
        for (auto const& c : candidates) { n += c.front().cnots; }
        return n;
    }
};

[[nodiscard]] inline auto make_candidate(Circuit circuit, UnitaryMatrix const& exact) -> Candidate
{
    Candidate c;
    c.unitary = unitary_of(circuit);
    c.hs_distance = hs_distance(c.unitary, exact);
    c.cnots = cnot_count(circuit);
    c.local_circuit = std::move(circuit);
    return c;
}

/// [exact original] followed by fitted templates for m = 0 .. cnots-1 whose
/// distance to the block is at most `d_keep`, in ascending m.
[[nodiscard]] inline auto expand_block(PartitionBlock const& block, double d_keep, std::uint64_t seed,
                                       OptimizerBudget const& budget = {}) -> std::vector<Candidate>
{
    auto const exact = unitary_of(block.local_circuit);
    std::vector<Candidate> out;
    out.push_back(make_candidate(block.local_circuit, exact));
    auto const q = block.local_circuit.num_qubits();
    auto const cnots = cnot_count(block.local_circuit);
    for (std::size_t m = 0; m < cnots; ++m) {
        Ansatz const tmpl{m, q};
        auto const fit = optimize_params(tmpl, exact, budget, derive_seed(seed, {m}));
        // Cache the distance of the circuit actually emitted, not the optimizer's running value.
        auto cand = make_candidate(tmpl.instantiate(fit.params), exact);
        if (cand.hs_distance <= d_keep) { out.push_back(std::move(cand)); }
    }
    return out;
}

/// Expands every block; block b uses seed derive_seed(seed, {b}). Blocks are
/// independent, so up to `threads` of them run concurrently.
[[nodiscard]] inline auto expand_all(std::vector<PartitionBlock> const& blocks, std::size_t num_qubits,
                                     double d_keep, std::uint64_t seed, OptimizerBudget const& budget = {},
                                     std::size_t threads = 1) -> ApproximationSet
{
    ApproximationSet approx;
    approx.num_qubits = num_qubits;
    approx.candidates.resize(blocks.size());
    for (auto const& b : blocks) { approx.block_qubits.push_back(b.qubits); }
    parallel_for(blocks.size(), threads, [&](std::size_t b) {
        approx.candidates[b] = expand_block(blocks[b], d_keep, derive_seed(seed, {b}), budget);
    });
    return approx;
}

} // namespace peepopt
