#pragma once

// JSON and CSV encodings for configs, noise models, counts, candidate caches
// and reports.

#include "peepopt/metrics.hpp"
#include "peepopt/qasm.hpp"
#include "peepopt/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace peepopt {

using json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown(json const& j, std::set<std::string> const& allowed, std::string const& where)
{
    if (!j.is_object()) { throw ConfigError{where + " must be a JSON object"}; }
    for (auto const& [key, _] : j.items()) {
        if (!allowed.contains(key)) { throw ConfigError{"unknown key '" + key + "' in " + where}; }
    }
}

template <class T>
void read_if(json const& j, char const* key, T& out)
{
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (json::exception const& e) {
            throw ConfigError{std::string{"bad value for '"} + key + "': " + e.what()};
        }
    }
}

} // namespace detail

[[nodiscard]] inline auto read_text(std::filesystem::path const& path) -> std::string
{
    std::ifstream in{path, std::ios::binary};
    if (!in) { throw ConfigError{"cannot read " + path.string()}; }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(std::filesystem::path const& path, std::string const& text)
{
    if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
    std::ofstream out{path, std::ios::binary};
    out << text;
    if (!out) { throw ConfigError{"cannot write " + path.string()}; }
}

[[nodiscard]] inline auto parse_json(std::string const& text, std::string const& where) -> json
{
    try {
        return json::parse(text);
    } catch (json::parse_error const& e) {
        throw ConfigError{where + ": " + e.what()};
    }
}

// ---------------------------------------------------------------------------
// Counts: {"bitstring": count}, qubit 0 rightmost.

[[nodiscard]] inline auto bitstring(std::uint64_t index, std::size_t n) -> std::string
{
    std::string s(n, '0');
    for (std::size_t q = 0; q < n; ++q) {
        if ((index >> q) & 1U) { s[n - 1 - q] = '1'; }
    }
    return s;
}

[[nodiscard]] inline auto counts_to_json(Counts const& counts, std::size_t n) -> json
{
    json j = json::object();
    for (auto const& [k, v] : counts) { j[bitstring(k, n)] = v; }
    return j;
}

/// Returns the counts and the register width implied by the keys.
[[nodiscard]] inline auto counts_from_json(json const& j) -> std::pair<Counts, std::size_t>
{
    if (!j.is_object()) { throw ConfigError{"counts must be a JSON object"}; }
    Counts counts;
    std::optional<std::size_t> width;
    for (auto const& [key, value] : j.items()) {
        if (key.empty() || key.size() > 63 || key.find_first_not_of("01") != std::string::npos) {
            throw ConfigError{"bad counts key '" + key + "'"};
        }
        if (width && *width != key.size()) { throw ConfigError{"counts keys have mixed widths"}; }
        width = key.size();
        if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
            throw ConfigError{"count for '" + key + "' must be a non-negative integer"};
        }
        std::uint64_t idx = 0;
        for (char ch : key) { idx = (idx << 1U) | static_cast<std::uint64_t>(ch == '1'); }
        counts[idx] += value.get<std::uint64_t>();
    }
    if (!width) { throw ConfigError{"counts are empty"}; }
    return {counts, *width};
}

// ---------------------------------------------------------------------------
// Noise model

[[nodiscard]] inline auto noise_from_json(json const& j) -> NoiseModel
{
    detail::reject_unknown(j, {"p1", "p2", "readout", "overrides"}, "noise model");
    NoiseModel m;
    detail::read_if(j, "p1", m.p1);
    detail::read_if(j, "p2", m.p2);
    if (auto it = j.find("readout"); it != j.end() && !it->is_null()) {
        std::vector<double> r;
        detail::read_if(j, "readout", r);
        m.readout = std::move(r);
    }
    if (auto it = j.find("overrides"); it != j.end()) {
        if (!it->is_object()) { throw ConfigError{"overrides must map qubit index to {p1, p2}"}; }
        for (auto const& [key, value] : it->items()) {
            detail::reject_unknown(value, {"p1", "p2"}, "override for qubit " + key);
            qubit_t q = 0;
            try {
                std::size_t pos = 0;
                q = static_cast<qubit_t>(std::stoul(key, &pos));
                if (pos != key.size()) { throw std::invalid_argument{key}; }
            } catch (std::exception const&) {
                throw ConfigError{"override key '" + key + "' is not a qubit index"};
            }
            QubitNoise o;
            if (value.contains("p1")) { o.p1 = value["p1"].get<double>(); }
            if (value.contains("p2")) { o.p2 = value["p2"].get<double>(); }
            m.overrides[q] = o;
        }
    }
    m.validate();
    return m;
}

[[nodiscard]] inline auto noise_to_json(NoiseModel const& m) -> json
{
    json j{{"p1", m.p1}, {"p2", m.p2}};
    if (m.readout) { j["readout"] = *m.readout; }
    if (!m.overrides.empty()) {
        json o = json::object();
        for (auto const& [q, n] : m.overrides) {
            json e = json::object();
            if (n.p1) { e["p1"] = *n.p1; }
            if (n.p2) { e["p2"] = *n.p2; }
            o[std::to_string(q)] = e;
        }
        j["overrides"] = o;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Run configuration file

/// Applies a config file on top of `cfg`. `config_name` in the recombiner
/// block narrows the run to that single configuration.
inline void apply_config_json(json const& j, RunConfig& cfg)
{
    detail::reject_unknown(j,
                           {"k", "seed", "shots_per_circuit", "ideal_shots", "exact_ideal", "baseline_shots",
                            "expander", "recombiner"},
                           "config");
    detail::read_if(j, "k", cfg.k);
    detail::read_if(j, "seed", cfg.seed);
    detail::read_if(j, "shots_per_circuit", cfg.shots_per_circuit);
    detail::read_if(j, "ideal_shots", cfg.ideal_shots);
    detail::read_if(j, "exact_ideal", cfg.exact_ideal);
    detail::read_if(j, "baseline_shots", cfg.baseline_shots);
    if (auto it = j.find("expander"); it != j.end()) {
        detail::reject_unknown(*it, {"d_keep", "restarts", "max_iterations"}, "expander");
        detail::read_if(*it, "d_keep", cfg.expander.d_keep);
        detail::read_if(*it, "restarts", cfg.expander.budget.restarts);
        detail::read_if(*it, "max_iterations", cfg.expander.budget.max_iterations);
    }
    if (auto it = j.find("recombiner"); it != j.end()) {
        auto const& r = *it;
        detail::reject_unknown(r,
                               {"config_name", "epsilon", "w", "c", "seed", "max_iterations", "q_v", "q_a",
                                "initial_temperature"},
                               "recombiner");
        auto& s = cfg.recombiner;
        detail::read_if(r, "epsilon", s.epsilon);
        detail::read_if(r, "w", s.w);
        detail::read_if(r, "c", s.c);
        detail::read_if(r, "max_iterations", s.annealer.max_iterations);
        detail::read_if(r, "q_v", s.annealer.q_v);
        detail::read_if(r, "q_a", s.annealer.q_a);
        detail::read_if(r, "initial_temperature", s.annealer.initial_temperature);
        if (r.contains("seed")) {
            std::uint64_t seed = 0;
            detail::read_if(r, "seed", seed);
            cfg.recombiner_seed = seed;
        }
        if (r.contains("config_name")) {
            std::string name;
            detail::read_if(r, "config_name", name);
            cfg.configs = {parse_configuration(name)};
        }
    }
}

[[nodiscard]] inline auto parse_configurations(std::string const& list) -> std::vector<Configuration>
{
    std::vector<Configuration> out;
    std::stringstream ss{list};
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) { continue; }
        auto const c = parse_configuration(item);
        if (std::find(out.begin(), out.end(), c) == out.end()) { out.push_back(c); }
    }
    if (out.empty()) { throw ConfigError{"empty configuration list"}; }
    return out;
}

// ---------------------------------------------------------------------------
// Partition dump

[[nodiscard]] inline auto partition_to_json(std::vector<PartitionBlock> const& blocks, PartitionGraph const& graph)
    -> json
{
    json jb = json::array();
    for (auto const& b : blocks) {
        jb.push_back({{"id", b.id},
                      {"qubits", b.qubits},
                      {"gate_span", b.gate_span},
                      {"cnots", cnot_count(b.local_circuit)},
                      {"qasm", emit_qasm(b.local_circuit)}});
    }
    json je = json::array();
    for (auto const& e : graph.edges) {
        je.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}, {"qubits", e.qubits}});
    }
    return json{{"num_blocks", blocks.size()}, {"blocks", jb}, {"edges", je}};
}

// ---------------------------------------------------------------------------
// Candidate cache

[[nodiscard]] inline auto approximation_to_json(Circuit const& circuit, std::size_t k,
                                                std::vector<PartitionBlock> const& blocks,
                                                ApproximationSet const& approx) -> json
{
    json jb = json::array();
    for (std::size_t b = 0; b < approx.num_blocks(); ++b) {
        json cands = json::array();
        for (auto const& c : approx.candidates[b]) {
            json jc{{"qasm", emit_qasm(c.local_circuit)}, {"hs_distance", c.hs_distance}, {"cnots", c.cnots}};
            if (c.fidelity_score) { jc["fidelity_score"] = *c.fidelity_score; }
            cands.push_back(std::move(jc));
        }
        jb.push_back({{"id", b},
                      {"qubits", approx.block_qubits[b]},
                      {"gate_span", blocks.at(b).gate_span},
                      {"candidates", std::move(cands)}});
    }
    return json{{"num_qubits", approx.num_qubits}, {"k", k}, {"circuit", emit_qasm(circuit)}, {"blocks", jb}};
}

struct CachedExpansion {
    Circuit circuit{1};
    std::size_t k = 4;
    std::vector<PartitionBlock> blocks;
    ApproximationSet approx;
};

/// Rebuilds the partition from the stored circuit and recomputes candidate
/// unitaries and distances from their QASM. Stored fidelity scores are kept.
[[nodiscard]] inline auto approximation_from_json(json const& j) -> CachedExpansion
{
    detail::reject_unknown(j, {"num_qubits", "k", "circuit", "blocks"}, "candidate cache");
    CachedExpansion out;
    try {
        out.circuit = parse_qasm(j.at("circuit").get<std::string>());
        out.k = j.at("k").get<std::size_t>();
        out.blocks = scan_partition(out.circuit, out.k);
        auto const& jb = j.at("blocks");
        if (!jb.is_array() || jb.size() != out.blocks.size()) {
            throw ConfigError{"cache blocks do not match the partition of its circuit"};
        }
        out.approx.num_qubits = out.circuit.num_qubits();
        for (std::size_t b = 0; b < out.blocks.size(); ++b) {
            auto const& entry = jb[b];
            if (entry.at("qubits").get<QubitMap>() != out.blocks[b].qubits) {
                throw ConfigError{"cache block " + std::to_string(b) + " qubits do not match the partition"};
            }
            auto const exact = unitary_of(out.blocks[b].local_circuit);
            std::vector<Candidate> cands;
            for (auto const& jc : entry.at("candidates")) {
                auto local = parse_qasm(jc.at("qasm").get<std::string>());
                if (local.num_qubits() != out.blocks[b].qubits.size()) {
                    throw ConfigError{"cache candidate width mismatch in block " + std::to_string(b)};
                }
                auto cand = make_candidate(std::move(local), exact);
                if (jc.contains("fidelity_score")) { cand.fidelity_score = jc["fidelity_score"].get<double>(); }
                cands.push_back(std::move(cand));
            }
            if (cands.empty() || cands.front().local_circuit != out.blocks[b].local_circuit) {
                throw ConfigError{"cache block " + std::to_string(b) + " must start with the exact block"};
            }
            out.approx.block_qubits.push_back(out.blocks[b].qubits);
            out.approx.candidates.push_back(std::move(cands));
        }
    } catch (json::exception const& e) {
        throw ConfigError{std::string{"malformed candidate cache: "} + e.what()};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

[[nodiscard]] inline auto distance_to_json(DistanceSummary const& d) -> json
{
    return json{{"tvd", d.tvd}, {"jsd", d.jsd}, {"tvd_exact", d.tvd_exact}, {"jsd_exact", d.jsd_exact}};
}

[[nodiscard]] inline auto report_to_json(RunReport const& report) -> json
{
    json circuits = json::array();
    for (auto const& c : report.circuits) {
        json jc{{"name", c.name},
                {"num_qubits", c.num_qubits},
                {"num_blocks", c.num_blocks},
                {"original_cnots", c.original_cnots},
                {"candidates_per_block", c.candidates_per_block},
                {"ideal", c.ideal.probs}};
        if (c.baseline) {
            jc["baseline"] = {{"shots", c.baseline->shots},
                              {"distance", distance_to_json(c.baseline->distance)},
                              {"counts", counts_to_json(c.baseline->counts, c.num_qubits)}};
        }
        json configs = json::array();
        for (auto const& r : c.configs) {
            json sols = json::array();
            for (auto const& s : r.solutions) { sols.push_back(s.choice); }
            json jr{{"name", r.name},
                    {"seed", r.seed},
                    {"num_results", r.solutions.size()},
                    {"distance", distance_to_json(r.distance)},
                    {"cnot_reduction_pct", r.cnot_reduction_pct}};
            if (c.baseline) {
                jr["tvd_improvement_pct"] = improvement_pct(c.baseline->distance.tvd, r.distance.tvd);
                jr["jsd_improvement_pct"] = improvement_pct(c.baseline->distance.jsd, r.distance.jsd);
            }
            jr["solutions"] = std::move(sols);
            jr["circuits"] = r.qasm;
            jr["counts"] = counts_to_json(r.counts, c.num_qubits);
            configs.push_back(std::move(jr));
        }
        jc["configs"] = std::move(configs);
        circuits.push_back(std::move(jc));
    }
    json j{{"seed", report.seed}, {"status", report.error ? "failed" : "ok"}};
    if (report.error) { j["error"] = {{"stage", report.failed_stage.value_or("")}, {"message", *report.error}}; }
    j["circuits"] = std::move(circuits);
    return j;
}

[[nodiscard]] inline auto format_double(double v) -> std::string
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

[[nodiscard]] inline auto summary_csv(RunReport const& report) -> std::string
{
    std::string out = "circuit,config,tvd,jsd,cnot_reduction_pct,num_results,seconds\n";
    for (auto const& c : report.circuits) {
        if (c.baseline) {
            out += c.name + ",baseline," + format_double(c.baseline->distance.tvd) + ","
                   + format_double(c.baseline->distance.jsd) + ",0,1,0\n";
        }
        for (auto const& r : c.configs) {
            out += c.name + "," + r.name + "," + format_double(r.distance.tvd) + "," + format_double(r.distance.jsd)
                   + "," + format_double(r.cnot_reduction_pct) + "," + std::to_string(r.solutions.size()) + ","
                   + format_double(r.seconds) + "\n";
        }
    }
    return out;
}

inline void write_report(RunReport const& report, std::filesystem::path const& dir)
{
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", report_to_json(report).dump(2) + "\n");
    write_text(dir / "summary.csv", summary_csv(report));
}

} // namespace peepopt
