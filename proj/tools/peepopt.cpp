// peepopt command-line front end.
//
//   peepopt run --circuit c.qasm --config cfg.json --noise noise.json --out dir
//   peepopt partition --circuit c.qasm [--k 4]
//   peepopt expand --circuit c.qasm --out cache.json [--config cfg.json] [--noise noise.json]
//   peepopt recombine --cache cache.json --noise noise.json --out dir [--config cfg.json]
//   peepopt metrics --a counts_a.json --b counts_b.json
//
// Exit codes: 0 success, 1 input error, 2 pipeline error.

#include "peepopt/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace peepopt;

constexpr int exit_input = 1;
constexpr int exit_pipeline = 2;

struct CommonOptions {
    std::string config_path;
    std::string noise_path;
    std::optional<std::uint64_t> seed;
    std::string configs;
};

auto load_config(CommonOptions const& o) -> RunConfig
{
    RunConfig cfg;
    if (!o.config_path.empty()) { apply_config_json(parse_json(read_text(o.config_path), o.config_path), cfg); }
    if (!o.noise_path.empty()) { cfg.noise = noise_from_json(parse_json(read_text(o.noise_path), o.noise_path)); }
    if (o.seed) { cfg.seed = *o.seed; }
    if (!o.configs.empty()) { cfg.configs = parse_configurations(o.configs); }
    cfg.threads = default_thread_count();
    return cfg;
}

auto is_input_stage(std::string const& stage) -> bool
{
    return stage == "config" || stage == "parse";
}

void print_summary(RunReport const& report)
{
    for (auto const& c : report.circuits) {
        std::cout << c.name << ": " << c.num_qubits << " qubits, " << c.num_blocks << " blocks, "
                  << c.original_cnots << " CNOTs\n";
        if (c.baseline) {
            std::cout << "  baseline   tvd " << format_double(c.baseline->distance.tvd) << "  jsd "
                      << format_double(c.baseline->distance.jsd) << "\n";
        }
        for (auto const& r : c.configs) {
            std::cout << "  " << r.name << std::string(11 - std::min<std::size_t>(r.name.size(), 10), ' ') << "tvd "
                      << format_double(r.distance.tvd) << "  jsd " << format_double(r.distance.jsd) << "  cnot -"
                      << format_double(r.cnot_reduction_pct) << "%  results " << r.solutions.size() << "\n";
        }
    }
}

auto cmd_run(std::vector<std::string> const& circuits, std::string const& out, CommonOptions const& o) -> int
{
    RunConfig cfg = load_config(o);
    for (auto const& c : circuits) { cfg.circuits.emplace_back(c); }
    cfg.out_dir = out;
    auto const report = run_pipeline(cfg);
    print_summary(report);
    return 0;
}

auto cmd_partition(std::string const& circuit_path, std::size_t k, std::string const& out) -> int
{
    auto const circuit = parse_qasm(read_text(circuit_path));
    auto const blocks = scan_partition(circuit, k);
    auto const text = partition_to_json(blocks, build_partition_graph(blocks)).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return 0;
}

auto cmd_expand(std::string const& circuit_path, std::string const& out, CommonOptions const& o) -> int
{
    auto const cfg = load_config(o);
    cfg.validate();
    auto circuit = parse_qasm(read_text(circuit_path));
    // Same seed path as the first circuit of `run`, so expand + recombine reproduces it.
    auto const seed = derive_seed(cfg.seed, {0});
    auto const blocks = detail::staged("partition", [&] { return scan_partition(circuit, cfg.k); });
    auto approx = detail::staged("expand", [&] {
        return expand_all(blocks, circuit.num_qubits(), cfg.expander.d_keep, derive_seed(seed, {1}),
                          cfg.expander.budget, cfg.threads);
    });
    if (!o.noise_path.empty()) {
        detail::staged("score", [&] { score_candidates(approx, blocks, cfg.noise, cfg.threads); });
    }
    write_text(out, approximation_to_json(circuit, cfg.k, blocks, approx).dump(2) + "\n");
    std::cout << "cached " << blocks.size() << " blocks to " << out << "\n";
    return 0;
}

auto cmd_recombine(std::string const& cache_path, std::string const& out, CommonOptions const& o) -> int
{
    auto cfg = load_config(o);
    cfg.validate();
    auto cached = approximation_from_json(parse_json(read_text(cache_path), cache_path));
    auto const seed = derive_seed(cfg.seed, {0});
    PreparedCircuit p;
    p.name = std::filesystem::path{cache_path}.stem().string();
    p.blocks = std::move(cached.blocks);
    p.graph = build_partition_graph(p.blocks);
    p.approx = std::move(cached.approx);
    if (std::any_of(cfg.configs.begin(), cfg.configs.end(), needs_fidelity)) {
        detail::staged("score", [&] { score_candidates(p.approx, p.blocks, cfg.noise, cfg.threads); });
    }
    p.ideal = ideal_distribution(cached.circuit);
    if (!cfg.exact_ideal) {
        p.ideal = counts_to_distribution(sample_counts(p.ideal, cfg.ideal_shots, derive_seed(seed, {2})), p.ideal.size());
    }
    p.circuit = std::move(cached.circuit);

    RunReport report;
    report.seed = cfg.seed;
    report.circuits.push_back(circuit_report_header(p));
    try {
        report.circuits.back().baseline = evaluate_baseline(p, cfg, seed);
        for (auto config : cfg.configs) { report.circuits.back().configs.push_back(run_configuration(p, config, cfg, seed)); }
    } catch (PipelineError const& e) {
        report.failed_stage = e.stage();
        report.error = e.what();
        write_report(report, out);
        throw;
    }
    write_report(report, out);
    print_summary(report);
    return 0;
}

auto cmd_metrics(std::string const& a_path, std::string const& b_path) -> int
{
    auto [a, na] = counts_from_json(parse_json(read_text(a_path), a_path));
    auto [b, nb] = counts_from_json(parse_json(read_text(b_path), b_path));
    if (na != nb) { throw ConfigError{"counts files have different register widths"}; }
    auto const dim = std::size_t{1} << na;
    auto const p = counts_to_distribution(a, dim);
    auto const q = counts_to_distribution(b, dim);
    std::cout << json{{"tvd", tvd(p, q)}, {"jsd", jsd(p, q)}}.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Peephole approximate synthesis: partition, expand, recombine"};
    app.require_subcommand(1);

    CommonOptions opts;
    auto add_common = [&](CLI::App* sub, bool noise_required) {
        sub->add_option("--config", opts.config_path, "run configuration JSON")->check(CLI::ExistingFile);
        auto* noise = sub->add_option("--noise", opts.noise_path, "noise model JSON")->check(CLI::ExistingFile);
        if (noise_required) { noise->required(); }
        sub->add_option("--seed", opts.seed, "global seed");
        sub->add_option("--configs", opts.configs, "comma list of quest,basic,basic-err,pop,pop-err,cascade");
    };

    std::vector<std::string> circuits;
    std::string out, cache, a_path, b_path, circuit;
    std::size_t k = 4;

    auto* run = app.add_subcommand("run", "full pipeline");
    run->add_option("--circuit", circuits, "input OpenQASM 2 file (repeatable)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory")->required();
    add_common(run, true);

    auto* part = app.add_subcommand("partition", "dump the partition and its graph as JSON");
    part->add_option("--circuit", circuit)->required()->check(CLI::ExistingFile);
    part->add_option("--k", k, "block width")->check(CLI::Range(1, 5));
    part->add_option("--out", out, "output file (default stdout)");

    auto* expand = app.add_subcommand("expand", "expand every block and cache the candidates");
    expand->add_option("--circuit", circuit)->required()->check(CLI::ExistingFile);
    expand->add_option("--out", out, "cache file")->required();
    add_common(expand, false);

    auto* recomb = app.add_subcommand("recombine", "recombine from a candidate cache");
    recomb->add_option("--cache", cache)->required()->check(CLI::ExistingFile);
    recomb->add_option("--out", out, "output directory")->required();
    add_common(recomb, true);

    auto* metrics = app.add_subcommand("metrics", "TVD and JSD between two counts files");
    metrics->add_option("--a", a_path)->required()->check(CLI::ExistingFile);
    metrics->add_option("--b", b_path)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        return app.exit(e) == 0 ? 0 : exit_input;
    }

    try {
        if (*run) { return cmd_run(circuits, out, opts); }
        if (*part) { return cmd_partition(circuit, k, out); }
        if (*expand) { return cmd_expand(circuit, out, opts); }
        if (*recomb) { return cmd_recombine(cache, out, opts); }
        if (*metrics) { return cmd_metrics(a_path, b_path); }
    } catch (PipelineError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_input_stage(e.stage()) ? exit_input : exit_pipeline;
    } catch (ConfigError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (QasmError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (CircuitError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (PartitionError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_pipeline;
    }
    return 0;
}
