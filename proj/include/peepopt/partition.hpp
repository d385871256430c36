#pragma once

// Greedy scan partitioner and the qubit-flow graph between its blocks.

#include "peepopt/circuit.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace peepopt {

inline constexpr std::size_t max_block_width = 5;

struct PartitionBlock {
    std::size_t id = 0;
    QubitMap qubits;       ///< ascending global indices; local qubit i is qubits[i]
    Circuit local_circuit; ///< over qubits.size() qubits
    std::vector<std::size_t> gate_span; ///< indices of the original gates it owns
};

struct PartitionEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    std::size_t weight = 0;       ///< number of qubits flowing directly from `from` to `to`
    std::vector<qubit_t> qubits;  ///< those qubits, ascending

    friend auto operator==(PartitionEdge const&, PartitionEdge const&) -> bool = default;
};

struct PartitionGraph {
    std::size_t num_nodes = 0;
    std::vector<PartitionEdge> edges; ///< sorted by (from, to)

    /// Indices into `edges` of every edge touching `block`.
    [[nodiscard]] auto incident(std::size_t block) const -> std::vector<std::size_t>
    {
        std::vector<std::size_t> out;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (edges[e].from == block || edges[e].to == block) { out.push_back(e); }
        }
        return out;
    }

    [[nodiscard]] auto find(std::size_t from, std::size_t to) const -> std::optional<std::size_t>
    {
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (edges[e].from == from && edges[e].to == to) { return e; }
        }
        return std::nullopt;
    }
};

namespace detail {

inline auto make_block(std::size_t id, Circuit const& circuit, std::vector<qubit_t> active,
                       std::vector<std::size_t> span) -> PartitionBlock
{
    std::sort(active.begin(), active.end());
    std::vector<qubit_t> to_local(circuit.num_qubits(), 0);
    for (std::size_t i = 0; i < active.size(); ++i) { to_local[active[i]] = static_cast<qubit_t>(i); }
    Circuit local{active.size()};
    for (auto idx : span) {
        auto g = circuit.gates()[idx];
        for (std::size_t i = 0; i < arity(g.kind); ++i) { g.qubits[i] = to_local[g.qubits[i]]; }
        local.push(g);
    }
    return PartitionBlock{id, std::move(active), std::move(local), std::move(span)};
}

} // namespace detail

/// Left-to-right greedy scan: a gate joins the open block when its qubits fit
/// in the active set (growing it up to `k`); otherwise the block is closed and
/// a new one is seeded with that gate. Blocks come out in closure order.
[[nodiscard]] inline auto scan_partition(Circuit const& circuit, std::size_t k) -> std::vector<PartitionBlock>
{
    if (k < 1 || k > max_block_width) {
        throw PartitionError{"partition width k=" + std::to_string(k) + " outside [1, 5]"};
    }
    std::vector<PartitionBlock> blocks;
    std::vector<qubit_t> active;
    std::vector<std::size_t> span;
    auto close = [&] {
        if (!span.empty()) {
            blocks.push_back(detail::make_block(blocks.size(), circuit, std::move(active), std::move(span)));
        }
        active.clear();
        span.clear();
    };

    auto const& gates = circuit.gates();
    for (std::size_t idx = 0; idx < gates.size(); ++idx) {
        auto const qs = gates[idx].targets();
        if (qs.size() > k) {
            throw PartitionError{"gate " + std::to_string(idx) + " acts on " + std::to_string(qs.size())
                                 + " qubits, more than k=" + std::to_string(k)};
        }
        // Missing qubits in ascending order, so growth is deterministic.
        std::vector<qubit_t> missing;
        for (auto q : qs) {
            if (std::find(active.begin(), active.end(), q) == active.end()) { missing.push_back(q); }
        }
        std::sort(missing.begin(), missing.end());
        if (active.size() + missing.size() > k) {
            close();
            missing.assign(qs.begin(), qs.end());
            std::sort(missing.begin(), missing.end());
        }
        active.insert(active.end(), missing.begin(), missing.end());
        span.push_back(idx);
    }
    close();
    return blocks;
}

/// Connects, per qubit, each block to the next block acting on that qubit.
[[nodiscard]] inline auto build_partition_graph(std::vector<PartitionBlock> const& blocks) -> PartitionGraph
{
    PartitionGraph graph;
    graph.num_nodes = blocks.size();
    std::map<qubit_t, std::size_t> last_on_qubit;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<qubit_t>> flow;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (auto q : blocks[b].qubits) {
            if (auto it = last_on_qubit.find(q); it != last_on_qubit.end()) {
                flow[{it->second, b}].push_back(q);
            }
            last_on_qubit[q] = b;
        }
    }
    for (auto& [key, qs] : flow) {
        std::sort(qs.begin(), qs.end());
        graph.edges.push_back(PartitionEdge{key.first, key.second, qs.size(), qs});
    }
    return graph;
}

/// Qubit bookkeeping for running two blocks back to back over the union of
/// their qubit sets.
struct PairLayout {
    QubitMap union_qubits; ///< union-local index -> global qubit, ascending
    QubitMap first_local;  ///< block i local -> union-local
    QubitMap second_local; ///< block j local -> union-local
};

[[nodiscard]] inline auto pair_layout(QubitMap const& first, QubitMap const& second) -> PairLayout
{
    PairLayout layout;
    std::set_union(first.begin(), first.end(), second.begin(), second.end(),
                   std::back_inserter(layout.union_qubits));
    auto local_of = [&](qubit_t q) {
        return static_cast<qubit_t>(
            std::lower_bound(layout.union_qubits.begin(), layout.union_qubits.end(), q) - layout.union_qubits.begin());
    };
    for (auto q : first) { layout.first_local.push_back(local_of(q)); }
    for (auto q : second) { layout.second_local.push_back(local_of(q)); }
    return layout;
}

/// Circuit of `first` followed by `second` over the union layout.
[[nodiscard]] inline auto pair_circuit(PairLayout const& layout, Circuit const& first, Circuit const& second) -> Circuit
{
    Circuit out{layout.union_qubits.size()};
    append_embedded(out, first, layout.first_local);
    append_embedded(out, second, layout.second_local);
    return out;
}

/// Block `i` followed by block `j` over the union of their qubits, with the
/// union-local to global qubit map. `(i -> j)` must be a graph edge.
[[nodiscard]] inline auto pair_subcircuit(std::vector<PartitionBlock> const& blocks, std::size_t i, std::size_t j)
    -> std::pair<Circuit, QubitMap>
{
    if (i >= blocks.size() || j >= blocks.size() || i >= j) {
        throw PartitionError{"pair_subcircuit: blocks " + std::to_string(i) + "," + std::to_string(j)
                             + " are not an ordered pair"};
    }
    bool adjacent = false;
    for (auto q : blocks[i].qubits) {
        if (!std::binary_search(blocks[j].qubits.begin(), blocks[j].qubits.end(), q)) { continue; }
        bool intervening = false;
        for (std::size_t m = i + 1; m < j && !intervening; ++m) {
            intervening = std::binary_search(blocks[m].qubits.begin(), blocks[m].qubits.end(), q);
        }
        adjacent = adjacent || !intervening;
    }
    if (!adjacent) {
        throw PartitionError{"pair_subcircuit: blocks " + std::to_string(i) + " and " + std::to_string(j)
                             + " are not adjacent"};
    }
    auto const layout = pair_layout(blocks[i].qubits, blocks[j].qubits);
    return {pair_circuit(layout, blocks[i].local_circuit, blocks[j].local_circuit), layout.union_qubits};
}

/// Reassembles per-block local circuits into an `n`-qubit circuit.
[[nodiscard]] inline auto reassemble(std::vector<PartitionBlock> const& blocks, std::span<Circuit const> locals,
                                     std::size_t n) -> Circuit
{
    std::vector<QubitMap> maps;
    maps.reserve(blocks.size());
    for (auto const& b : blocks) { maps.push_back(b.qubits); }
    return compose(locals, maps, n);
}

} // namespace peepopt
