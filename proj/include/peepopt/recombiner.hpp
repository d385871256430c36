#pragma once

// Recombination: pick one candidate per block to form a set of result
// circuits. Objective, error estimators, and two dual-annealing engines.

#include "peepopt/circuit.hpp"
#include "peepopt/expander.hpp"
#include "peepopt/hs_distance.hpp"
#include "peepopt/parallel.hpp"
#include "peepopt/partition.hpp"
#include "peepopt/random.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace peepopt {

struct Solution {
    std::vector<std::size_t> choice;

    friend auto operator==(Solution const&, Solution const&) -> bool = default;
    friend auto operator<=>(Solution const&, Solution const&) = default;
};

inline void check_solution(Solution const& sol, ApproximationSet const& approx)
{
    if (sol.choice.size() != approx.num_blocks()) {
        throw DimensionError{"solution has " + std::to_string(sol.choice.size()) + " choices for "
                             + std::to_string(approx.num_blocks()) + " blocks"};
    }
    for (std::size_t b = 0; b < sol.choice.size(); ++b) {
        if (sol.choice[b] >= approx.count(b)) {
            throw DimensionError{"choice " + std::to_string(sol.choice[b]) + " out of range for block "
                                 + std::to_string(b)};
        }
    }
}

/// Full circuit with candidate sol.choice[b] in place of block b.
[[nodiscard]] inline auto assemble(Solution const& sol, ApproximationSet const& approx) -> Circuit
{
    check_solution(sol, approx);
    std::vector<Circuit> locals;
    locals.reserve(sol.choice.size());
    for (std::size_t b = 0; b < sol.choice.size(); ++b) {
        locals.push_back(approx.candidates[b][sol.choice[b]].local_circuit);
    }
    return compose(locals, approx.block_qubits, approx.num_qubits);
}

[[nodiscard]] inline auto original_solution(ApproximationSet const& approx) -> Solution
{
    return Solution{std::vector<std::size_t>(approx.num_blocks(), 0)};
}

// ---------------------------------------------------------------------------
// Error estimators

[[nodiscard]] inline auto circuit_error_basic(Solution const& sol, ApproximationSet const& approx) -> double
{
    double e = 0.0;
    for (std::size_t b = 0; b < sol.choice.size(); ++b) { e += approx.candidates[b][sol.choice[b]].hs_distance; }
    return e;
}

/// Lazily filled table of hs_distance between two candidates of the same
/// block. Entries are idempotent, so concurrent fills are harmless.
class PairDistanceMemo {
  public:
    explicit PairDistanceMemo(ApproximationSet const& approx) : approx_{&approx}
    {
        for (std::size_t b = 0; b < approx.num_blocks(); ++b) {
            auto const a = approx.count(b);
            auto table = std::make_unique<std::atomic<double>[]>(a * a);
            for (std::size_t i = 0; i < a * a; ++i) { table[i].store(unset, std::memory_order_relaxed); }
            tables_.push_back(std::move(table));
        }
    }

    [[nodiscard]] auto operator()(std::size_t block, std::size_t i, std::size_t j) const -> double
    {
        if (i == j) { return 0.0; }
        if (i > j) { std::swap(i, j); }
        auto& slot = tables_[block][i * approx_->count(block) + j];
        double v = slot.load(std::memory_order_relaxed);
        if (v == unset) {
            auto const& c = approx_->candidates[block];
            v = hs_distance(c[i].unitary, c[j].unitary);
            slot.store(v, std::memory_order_relaxed);
        }
        return v;
    }

    [[nodiscard]] auto filled() const -> std::size_t
    {
        std::size_t n = 0;
        for (std::size_t b = 0; b < tables_.size(); ++b) {
            auto const a = approx_->count(b);
            for (std::size_t k = 0; k < a * a; ++k) { n += tables_[b][k].load(std::memory_order_relaxed) != unset; }
        }
        return n;
    }

  private:
    static constexpr double unset = -1.0;
    ApproximationSet const* approx_;
    std::vector<std::unique_ptr<std::atomic<double>[]>> tables_;
};

/// Existing result circuits plus the distance memo shared by their lookups.
struct ExistingSet {
    std::span<Solution const> solutions;
    PairDistanceMemo const& memo;
};

/// Local unitary `u` acting on union-local qubits `map` of an n-qubit space.
[[nodiscard]] inline auto embed_unitary(UnitaryMatrix const& u, QubitMap const& map, std::size_t n) -> UnitaryMatrix
{
    auto const dim = Eigen::Index{1} << n;
    Eigen::Index mask = 0;
    for (auto q : map) { mask |= Eigen::Index{1} << q; }
    auto local_index = [&](Eigen::Index x) {
        Eigen::Index l = 0;
        for (std::size_t i = 0; i < map.size(); ++i) { l |= ((x >> map[i]) & 1) << i; }
        return l;
    };
    std::vector<Eigen::Index> loc(static_cast<std::size_t>(dim));
    for (Eigen::Index x = 0; x < dim; ++x) { loc[static_cast<std::size_t>(x)] = local_index(x); }
    UnitaryMatrix out = UnitaryMatrix::Zero(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < dim; ++r) {
            if ((r & ~mask) == (c & ~mask)) {
                out(r, c) = u(loc[static_cast<std::size_t>(r)], loc[static_cast<std::size_t>(c)]);
            }
        }
    }
    return out;
}

/// For every edge (i -> j), hs_distance of U_j[cj] * U_i[ci] against the
/// original pair, for all candidate pairs. Built once per approximation set.
class CascadeTable {
  public:
    CascadeTable(ApproximationSet const& approx, PartitionGraph const& graph, std::size_t threads = 1)
        : graph_{graph}, counts_{approx.bounds()}, fallback_(approx.num_blocks())
    {
        if (graph.num_nodes != approx.num_blocks()) { throw DimensionError{"graph / approximation set mismatch"}; }
        for (std::size_t b = 0; b < approx.num_blocks(); ++b) {
            for (auto const& c : approx.candidates[b]) { fallback_[b].push_back(c.hs_distance); }
            incident_.push_back(graph.incident(b));
        }
        tables_.resize(graph.edges.size());
        parallel_for(graph.edges.size(), threads, [&](std::size_t e) { tables_[e] = build_edge(approx, graph.edges[e]); });
    }

    [[nodiscard]] static auto build_edge(ApproximationSet const& approx, PartitionEdge const& edge) -> std::vector<double>
    {
        auto const layout = pair_layout(approx.block_qubits[edge.from], approx.block_qubits[edge.to]);
        auto const n = layout.union_qubits.size();
        std::vector<UnitaryMatrix> first, second;
        for (auto const& c : approx.candidates[edge.from]) { first.push_back(embed_unitary(c.unitary, layout.first_local, n)); }
        for (auto const& c : approx.candidates[edge.to]) { second.push_back(embed_unitary(c.unitary, layout.second_local, n)); }
        UnitaryMatrix const original = second.front() * first.front();
        std::vector<double> table(first.size() * second.size());
        UnitaryMatrix pair;
        for (std::size_t ci = 0; ci < first.size(); ++ci) {
            for (std::size_t cj = 0; cj < second.size(); ++cj) {
                pair.noalias() = second[cj] * first[ci];
                table[ci * second.size() + cj] = hs_distance(pair, original);
            }
        }
        return table;
    }

    [[nodiscard]] auto pair_distance(std::size_t edge, std::size_t ci, std::size_t cj) const -> double
    {
        return tables_[edge][ci * counts_[graph_.edges[edge].to] + cj];
    }

    [[nodiscard]] auto block_score(Solution const& sol, std::size_t b) const -> double
    {
        if (incident_[b].empty()) { return fallback_[b][sol.choice[b]]; }
        double num = 0.0, den = 0.0;
        for (auto e : incident_[b]) {
            auto const& edge = graph_.edges[e];
            auto const w = static_cast<double>(edge.weight);
            num += w * pair_distance(e, sol.choice[edge.from], sol.choice[edge.to]);
            den += w;
        }
        return num / den;
    }

    [[nodiscard]] auto error(Solution const& sol) const -> double
    {
        double total = 0.0;
        for (std::size_t b = 0; b < counts_.size(); ++b) { total += block_score(sol, b); }
        return total;
    }

  private:
    PartitionGraph graph_;
    std::vector<std::size_t> counts_;
    std::vector<std::vector<double>> fallback_;
    std::vector<std::vector<std::size_t>> incident_;
    std::vector<std::vector<double>> tables_;
};

[[nodiscard]] inline auto circuit_error_cascade(Solution const& sol, ApproximationSet const& approx,
                                                PartitionGraph const& graph) -> double
{
    return CascadeTable{approx, graph}.error(sol);
}

/// Fraction of existing solutions s that sit within max(E(sol), E(s)) of sol,
/// where distance sums per-block candidate distances. 0 when there are none.
[[nodiscard]] inline auto differentiation(Solution const& sol, ExistingSet const& others, ApproximationSet const& approx)
    -> double
{
    if (others.solutions.empty()) { return 0.0; }
    double const e_sol = circuit_error_basic(sol, approx);
    std::size_t close = 0;
    for (auto const& s : others.solutions) {
        double d = 0.0;
        for (std::size_t b = 0; b < sol.choice.size(); ++b) { d += others.memo(b, sol.choice[b], s.choice[b]); }
        close += d <= std::max(e_sol, circuit_error_basic(s, approx));
    }
    return static_cast<double>(close) / static_cast<double>(others.solutions.size());
}

// ---------------------------------------------------------------------------
// Objective

enum class ObjectiveMode { Quest, Basic, BasicErr, Cascade };

struct ObjectiveConfig {
    double epsilon = 0.1;
    double w = 0.5;
    ObjectiveMode mode = ObjectiveMode::Basic;
    bool allow_duplicates = false;

    void validate() const
    {
        if (!(epsilon > 0.0)) { throw ConfigError{"epsilon must be positive"}; }
        if (!(w >= 0.0 && w <= 1.0)) { throw ConfigError{"w must be in [0, 1]"}; }
    }
};

inline constexpr double duplicate_penalty = 2.2;
inline constexpr double quest_threshold_penalty = 2.0;
inline constexpr double threshold_offset = 1.1;

/// Objective bound to one approximation set. Precomputes whatever the mode
/// needs (cascade pair table), then evaluates without mutation apart from the
/// distance memo.
class Objective {
  public:
    Objective(ApproximationSet const& approx, PartitionGraph const& graph, ObjectiveConfig cfg, std::size_t threads = 1)
        : approx_{&approx}, cfg_{cfg}, memo_{std::make_unique<PairDistanceMemo>(approx)},
          original_cnots_{approx.original_cnots()}
    {
        cfg_.validate();
        if (cfg_.mode == ObjectiveMode::Cascade) { cascade_.emplace(approx, graph, threads); }
        if (cfg_.mode == ObjectiveMode::BasicErr) {
            for (auto const& block : approx.candidates) {
                for (auto const& c : block) {
                    if (!c.fidelity_score) { throw ConfigError{"error-aware objective needs fidelity scores"}; }
                }
            }
        }
    }

    [[nodiscard]] auto config() const noexcept -> ObjectiveConfig const& { return cfg_; }
    [[nodiscard]] auto memo() const noexcept -> PairDistanceMemo const& { return *memo_; }

    [[nodiscard]] auto error(Solution const& sol) const -> double
    {
        return cascade_ ? cascade_->error(sol) : circuit_error_basic(sol, *approx_);
    }

    /// Complexity term: CNOT ratio, or mean candidate fidelity score when
    /// error-aware. A CNOT-free original has nothing to reduce, so the ratio is 1.
    [[nodiscard]] auto complexity(Solution const& sol) const -> double
    {
        auto const& cands = approx_->candidates;
        if (cfg_.mode == ObjectiveMode::BasicErr) {
            double sum = 0.0;
            for (std::size_t b = 0; b < sol.choice.size(); ++b) { sum += *cands[b][sol.choice[b]].fidelity_score; }
            return sol.choice.empty() ? 0.0 : sum / static_cast<double>(sol.choice.size());
        }
        if (original_cnots_ == 0) { return 1.0; }
        std::size_t n = 0;
        for (std::size_t b = 0; b < sol.choice.size(); ++b) { n += cands[b][sol.choice[b]].cnots; }
        return static_cast<double>(n) / static_cast<double>(original_cnots_);
    }

    [[nodiscard]] auto operator()(Solution const& sol, std::span<Solution const> others) const -> double
    {
        if (!cfg_.allow_duplicates && std::find(others.begin(), others.end(), sol) != others.end()) {
            return duplicate_penalty;
        }
        if (cfg_.mode != ObjectiveMode::BasicErr) {
            double const e = error(sol);
            if (e > cfg_.epsilon) {
                return cfg_.mode == ObjectiveMode::Quest ? quest_threshold_penalty : e - cfg_.epsilon + threshold_offset;
            }
        }
        double const t = differentiation(sol, ExistingSet{others, *memo_}, *approx_);
        return cfg_.w * complexity(sol) + (1.0 - cfg_.w) * t;
    }

  private:
    ApproximationSet const* approx_;
    ObjectiveConfig cfg_;
    std::unique_ptr<PairDistanceMemo> memo_;
    std::optional<CascadeTable> cascade_;
    std::size_t original_cnots_;
};

[[nodiscard]] inline auto objective(Solution const& sol, std::span<Solution const> others,
                                    ApproximationSet const& approx, PartitionGraph const& graph,
                                    ObjectiveConfig const& cfg) -> double
{
    return Objective{approx, graph, cfg}(sol, others);
}

// ---------------------------------------------------------------------------
// Annealer

struct AnnealerConfig {
    std::size_t max_iterations = 0; ///< 0 means 1000 per block
    double initial_temperature = 5230.0;
    double q_v = 2.62;
    double q_a = -5.0;
    double restart_temperature_ratio = 2e-5;
    bool reanneal = true; ///< restart from the best point at the floor; otherwise stop there
    std::uint64_t seed = 0;

    void validate() const
    {
        if (!(q_v > 1.0 && q_v < 3.0)) { throw ConfigError{"q_v must be in (1, 3)"}; }
        if (!(q_a < 1.0)) { throw ConfigError{"q_a must be below 1"}; }
        if (!(initial_temperature > 0.0)) { throw ConfigError{"initial_temperature must be positive"}; }
        if (!(restart_temperature_ratio > 0.0 && restart_temperature_ratio < 1.0)) {
            throw ConfigError{"restart_temperature_ratio must be in (0, 1)"};
        }
    }

    [[nodiscard]] auto iterations_for(std::size_t blocks) const -> std::size_t
    {
        return max_iterations > 0 ? max_iterations : 1000 * std::max<std::size_t>(blocks, 1);
    }
};

struct AnnealResult {
    Solution solution;
    double value = 0.0;
};

namespace detail {

/// Tsallis visiting distribution over the box Π[0, a_b).
class Visitor {
  public:
    Visitor(double q_v, std::vector<double> range) : qv_{q_v}, range_{std::move(range)}
    {
        using std::numbers::pi;
        double const f2 = std::exp((4.0 - qv_) * std::log(qv_ - 1.0));
        double const f3 = std::exp((2.0 - qv_) * std::log(2.0) / (qv_ - 1.0));
        f4p_ = std::sqrt(pi) * f2 / (f3 * (3.0 - qv_));
        double const f5 = 1.0 / (qv_ - 1.0) - 0.5;
        f6_ = pi * (1.0 - f5) / std::sin(pi * (1.0 - f5)) / std::exp(std::lgamma(2.0 - f5));
    }

    /// Steps < dim move every coordinate; later steps move coordinate step-dim.
    auto visit(std::vector<double> const& x, std::size_t step, double temperature, rng_t& rng) const
        -> std::vector<double>
    {
        auto out = x;
        auto const dim = x.size();
        std::uniform_real_distribution<double> uniform{0.0, 1.0};
        if (step < dim) {
            std::vector<double> v(dim);
            for (auto& s : v) { s = draw(temperature, rng); }
            double const upper = uniform(rng), lower = uniform(rng);
            for (std::size_t i = 0; i < dim; ++i) {
                if (v[i] > tail_limit) {
                    v[i] = tail_limit * upper;
                } else if (v[i] < -tail_limit) {
                    v[i] = -tail_limit * lower;
                }
                out[i] = wrap(x[i] + v[i], i);
            }
        } else {
            auto const i = step - dim;
            double v = draw(temperature, rng);
            if (v > tail_limit) {
                v = tail_limit * uniform(rng);
            } else if (v < -tail_limit) {
                v = -tail_limit * uniform(rng);
            }
            out[i] = wrap(x[i] + v, i);
        }
        return out;
    }

  private:
    static constexpr double tail_limit = 1e8;
    static constexpr double min_visit_bound = 1e-10;

    auto draw(double temperature, rng_t& rng) const -> double
    {
        std::normal_distribution<double> normal{0.0, 1.0};
        double const x = normal(rng), y = normal(rng);
        double const f4 = f4p_ * std::exp(std::log(temperature) / (qv_ - 1.0));
        double const sigma = std::exp(-(qv_ - 1.0) * std::log(f6_ / f4) / (3.0 - qv_));
        double const den = std::exp((qv_ - 1.0) * std::log(std::abs(y)) / (3.0 - qv_));
        return sigma * x / den;
    }

    auto wrap(double v, std::size_t i) const -> double
    {
        double const r = range_[i];
        double out = std::fmod(std::fmod(v, r) + r, r);
        if (!std::isfinite(out)) { out = 0.0; }
        if (std::abs(out) < min_visit_bound) { out += min_visit_bound; }
        return out;
    }

    double qv_;
    std::vector<double> range_;
    double f4p_ = 0.0;
    double f6_ = 0.0;
};

inline auto decode(std::vector<double> const& x, std::span<std::size_t const> bounds) -> Solution
{
    Solution s;
    s.choice.resize(x.size());
    for (std::size_t b = 0; b < x.size(); ++b) {
        auto const top = static_cast<double>(bounds[b] - 1);
        s.choice[b] = static_cast<std::size_t>(std::clamp(std::floor(x[b]), 0.0, top));
    }
    return s;
}

} // namespace detail

/// Starting point and private random stream of one population member.
struct PopulationMember {
    std::vector<double> x;
    std::uint64_t seed = 0;
};

struct PopulationTrace {
    /// Called before each evaluation of `member` at timestep `step`, with the
    /// members whose decoded points make up its `others`.
    std::function<void(std::size_t step, std::size_t member, std::span<std::size_t const> others)> on_evaluate;
    /// Called after each timestep with every member's best value so far.
    std::function<void(std::size_t step, std::span<double const> best)> on_step;
};

struct PopulationResult {
    std::vector<Solution> solutions;
    std::vector<double> values;
};

/// Uniform starting points; member m draws from derive_seed(seed, {m}).
[[nodiscard]] inline auto initial_population(std::span<std::size_t const> bounds, std::size_t c, std::uint64_t seed)
    -> std::vector<PopulationMember>
{
    std::vector<PopulationMember> members(c);
    for (std::size_t m = 0; m < c; ++m) {
        members[m].seed = derive_seed(seed, {m});
        rng_t rng{derive_seed(members[m].seed, {0})};
        for (auto a : bounds) {
            members[m].x.push_back(std::uniform_real_distribution<double>{0.0, static_cast<double>(a)}(rng));
        }
    }
    return members;
}

using MemberObjective = std::function<double(Solution const&, std::span<Solution const> others)>;

/// Anneals every member in lockstep. Within a timestep each member runs its
/// visiting chain against a frozen snapshot of the other members, so results
/// do not depend on member order. Temperature and reannealing are shared.
[[nodiscard]] inline auto anneal_population(MemberObjective const& fn, std::span<std::size_t const> bounds,
                                            AnnealerConfig const& cfg, std::vector<PopulationMember> members,
                                            PopulationTrace const& trace = {}) -> PopulationResult
{
    cfg.validate();
    if (bounds.empty()) { throw ConfigError{"annealing needs at least one block"}; }
    for (auto a : bounds) {
        if (a == 0) { throw ConfigError{"every block needs at least one candidate"}; }
    }
    auto const c = members.size();
    if (c == 0) { throw ConfigError{"population size must be at least 1"}; }
    auto const dim = bounds.size();

    std::vector<double> range;
    for (auto a : bounds) { range.push_back(static_cast<double>(a)); }
    for (auto const& m : members) {
        if (m.x.size() != dim) { throw DimensionError{"member dimension does not match bounds"}; }
    }
    detail::Visitor const visitor{cfg.q_v, range};

    std::vector<rng_t> rngs;
    std::vector<std::vector<double>> x(c), best_x(c);
    std::vector<double> energy(c), best(c);
    for (std::size_t m = 0; m < c; ++m) {
        rngs.emplace_back(members[m].seed);
        x[m] = std::move(members[m].x);
    }

    std::vector<Solution> snapshot(c);
    auto refresh = [&] {
        for (std::size_t m = 0; m < c; ++m) { snapshot[m] = detail::decode(x[m], bounds); }
    };
    std::vector<std::vector<std::size_t>> other_ids(c);
    for (std::size_t m = 0; m < c; ++m) {
        for (std::size_t o = 0; o < c; ++o) {
            if (o != m) { other_ids[m].push_back(o); }
        }
    }
    auto evaluate = [&](std::size_t step, std::size_t m, Solution const& sol, std::vector<Solution> const& others) {
        if (trace.on_evaluate) { trace.on_evaluate(step, m, other_ids[m]); }
        return fn(sol, others);
    };
    auto others_of = [&](std::size_t m) {
        std::vector<Solution> out;
        out.reserve(c - 1);
        for (auto o : other_ids[m]) { out.push_back(snapshot[o]); }
        return out;
    };

    refresh();
    for (std::size_t m = 0; m < c; ++m) {
        energy[m] = evaluate(0, m, snapshot[m], others_of(m));
        best[m] = energy[m];
        best_x[m] = x[m];
    }

    bool const trivial = std::all_of(bounds.begin(), bounds.end(), [](auto a) { return a == 1; });

    double const t0 = cfg.initial_temperature;
    double const qv1 = cfg.q_v - 1.0;
    double const t1 = std::exp(qv1 * std::log(2.0)) - 1.0;
    double const floor_t = t0 * cfg.restart_temperature_ratio;
    auto const max_iter = trivial ? 0 : cfg.iterations_for(dim);

    std::size_t iteration = 0;
    bool running = true;
    while (running && iteration < max_iter) {
        for (std::size_t i = 0;; ++i) {
            double const temperature = t0 * t1 / (std::exp(qv1 * std::log(static_cast<double>(i) + 2.0)) - 1.0);
            if (iteration >= max_iter) {
                running = false;
                break;
            }
            if (temperature < floor_t) {
                if (!cfg.reanneal) {
                    running = false;
                    break;
                }
                for (std::size_t m = 0; m < c; ++m) {
                    x[m] = best_x[m];
                    energy[m] = best[m];
                }
                refresh();
                break;
            }
            double const step_temperature = temperature / static_cast<double>(i + 1);
            refresh();
            for (std::size_t m = 0; m < c; ++m) {
                auto const others = others_of(m);
                auto& rng = rngs[m];
                for (std::size_t j = 0; j < 2 * dim; ++j) {
                    auto candidate = visitor.visit(x[m], j, temperature, rng);
                    double const e = evaluate(iteration + 1, m, detail::decode(candidate, bounds), others);
                    if (e < energy[m]) {
                        energy[m] = e;
                        x[m] = std::move(candidate);
                        if (e < best[m]) {
                            best[m] = e;
                            best_x[m] = x[m];
                        }
                    } else {
                        double const r = std::uniform_real_distribution<double>{0.0, 1.0}(rng);
                        double const base = 1.0 - (1.0 - cfg.q_a) * (e - energy[m]) / step_temperature;
                        double const p = base <= 0.0 ? 0.0 : std::exp(std::log(base) / (1.0 - cfg.q_a));
                        if (r <= p) {
                            energy[m] = e;
                            x[m] = std::move(candidate);
                        }
                    }
                }
            }
            ++iteration;
            if (trace.on_step) { trace.on_step(iteration, best); }
        }
    }

    PopulationResult result;
    for (std::size_t m = 0; m < c; ++m) {
        result.solutions.push_back(detail::decode(best_x[m], bounds));
        result.values.push_back(best[m]);
    }
    return result;
}

/// Single-point dual annealing of a discrete choice vector, without a local
/// search phase.
[[nodiscard]] inline auto dual_anneal(std::function<double(Solution const&)> const& fn,
                                      std::span<std::size_t const> bounds, AnnealerConfig const& cfg) -> AnnealResult
{
    auto wrapped = [&](Solution const& s, std::span<Solution const>) { return fn(s); };
    auto res = anneal_population(wrapped, bounds, cfg, initial_population(bounds, 1, cfg.seed));
    return AnnealResult{std::move(res.solutions.front()), res.values.front()};
}

/// One annealing run per result; run r sees results 0..r-1 and uses seed
/// derive_seed(seed, {r}). Stops early once the best value exceeds 1, i.e.
/// only penalised choices remain.
[[nodiscard]] inline auto recombine_iterative(Objective const& obj, ApproximationSet const& approx,
                                              AnnealerConfig const& cfg, std::size_t c) -> std::vector<Solution>
{
    if (c < 1) { throw ConfigError{"c must be at least 1"}; }
    auto const bounds = approx.bounds();
    std::vector<Solution> results;
    for (std::size_t r = 0; r < c; ++r) {
        auto run_cfg = cfg;
        run_cfg.seed = derive_seed(cfg.seed, {r});
        auto res = dual_anneal([&](Solution const& s) { return obj(s, results); }, bounds, run_cfg);
        if (res.value > 1.0) { break; }
        results.push_back(std::move(res.solution));
    }
    return results;
}

[[nodiscard]] inline auto recombine_iterative(ApproximationSet const& approx, PartitionGraph const& graph,
                                              ObjectiveConfig const& obj_cfg, AnnealerConfig const& ann_cfg,
                                              std::size_t c) -> std::vector<Solution>
{
    return recombine_iterative(Objective{approx, graph, obj_cfg}, approx, ann_cfg, c);
}

/// c members annealed together; duplicates are always allowed here.
[[nodiscard]] inline auto recombine_population(Objective const& obj, ApproximationSet const& approx,
                                               AnnealerConfig const& cfg, std::size_t c,
                                               PopulationTrace const& trace = {}) -> std::vector<Solution>
{
    if (c < 1) { throw ConfigError{"c must be at least 1"}; }
    if (!obj.config().allow_duplicates) { throw ConfigError{"population engine requires allow_duplicates"}; }
    auto const bounds = approx.bounds();
    auto fn = [&](Solution const& s, std::span<Solution const> others) { return obj(s, others); };
    return anneal_population(fn, bounds, cfg, initial_population(bounds, c, cfg.seed), trace).solutions;
}

[[nodiscard]] inline auto recombine_population(ApproximationSet const& approx, PartitionGraph const& graph,
                                               ObjectiveConfig obj_cfg, AnnealerConfig const& ann_cfg, std::size_t c,
                                               PopulationTrace const& trace = {}) -> std::vector<Solution>
{
    obj_cfg.allow_duplicates = true;
    return recombine_population(Objective{approx, graph, obj_cfg}, approx, ann_cfg, c, trace);
}

// ---------------------------------------------------------------------------
// Named configurations

enum class Engine { Iterative, Population };
enum class Configuration { Quest, Basic, BasicErr, Pop, PopErr, Cascade };

inline constexpr std::array all_configurations{Configuration::Quest, Configuration::Basic,  Configuration::BasicErr,
                                               Configuration::Pop,   Configuration::PopErr, Configuration::Cascade};

struct ConfigurationTraits {
    Engine engine;
    ObjectiveMode mode;
    bool allow_duplicates;
    std::string_view name;
};

[[nodiscard]] constexpr auto traits(Configuration c) -> ConfigurationTraits
{
    switch (c) {
    case Configuration::Quest: return {Engine::Iterative, ObjectiveMode::Quest, false, "quest"};
    case Configuration::Basic: return {Engine::Iterative, ObjectiveMode::Basic, false, "basic"};
    case Configuration::BasicErr: return {Engine::Iterative, ObjectiveMode::BasicErr, false, "basic-err"};
    case Configuration::Pop: return {Engine::Population, ObjectiveMode::Basic, true, "pop"};
    case Configuration::PopErr: return {Engine::Population, ObjectiveMode::BasicErr, true, "pop-err"};
    case Configuration::Cascade: return {Engine::Iterative, ObjectiveMode::Cascade, false, "cascade"};
    }
    return {Engine::Iterative, ObjectiveMode::Basic, false, "basic"};
}

[[nodiscard]] inline auto parse_configuration(std::string_view name) -> Configuration
{
    for (auto c : all_configurations) {
        if (traits(c).name == name) { return c; }
    }
    throw ConfigError{"unknown recombiner configuration '" + std::string{name} + "'"};
}

[[nodiscard]] constexpr auto needs_fidelity(Configuration c) -> bool
{
    return traits(c).mode == ObjectiveMode::BasicErr;
}

/// Tunables shared by all configurations.
struct RecombinerSettings {
    double epsilon = 0.1;
    double w = 0.5;
    std::size_t c = 8;
    AnnealerConfig annealer;
};

[[nodiscard]] inline auto recombine(Configuration config, ApproximationSet const& approx, PartitionGraph const& graph,
                                    RecombinerSettings const& settings, std::size_t threads = 1)
    -> std::vector<Solution>
{
    auto const t = traits(config);
    ObjectiveConfig const obj_cfg{settings.epsilon, settings.w, t.mode, t.allow_duplicates};
    Objective const obj{approx, graph, obj_cfg, threads};
    if (t.engine == Engine::Population) { return recombine_population(obj, approx, settings.annealer, settings.c); }
    return recombine_iterative(obj, approx, settings.annealer, settings.c);
}

} // namespace peepopt
