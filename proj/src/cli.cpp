#include "ssiter/cli.hpp"

#include "ssiter/async_engine.hpp"
#include "ssiter/csv.hpp"
#include "ssiter/error.hpp"
#include "ssiter/inputs.hpp"
#include "ssiter/sync_engine.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace ssiter::cli {

namespace fs = std::filesystem;

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Sections may be given as a bare string ("zero") or an object with "kind".
json as_object(const json& node) {
    if (node.is_string()) return json{{"kind", node.get<std::string>()}};
    if (node.is_object()) return node;
    throw ConfigError("expected a string or an object, got " + node.dump());
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("invalid value for '") + key + "': " + obj.at(key).dump());
    }
}

std::optional<std::uint64_t> optional_seed(const json& obj) {
    if (!obj.is_object() || !obj.contains("seed")) return std::nullopt;
    return get_or<std::uint64_t>(obj, "seed", 0);
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(std::string("'") + key + "' must be a nonnegative integer, got " + v.dump());
    }
    return v.get<std::size_t>();
}

std::vector<double> get_reals(const json& node, const char* what) {
    if (!node.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const json& x : node) {
        if (!x.is_number()) throw ConfigError(std::string(what) + " must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Vector to_vector(const std::vector<double>& xs) {
    Vector v(idx(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v(idx(i)) = xs[i];
    return v;
}

Vector uniform_vector(std::size_t n, double range, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-range, range);
    Vector v(idx(n));
    for (std::size_t i = 0; i < n; ++i) v(idx(i)) = dist(rng);
    return v;
}

fs::path output_path(const fs::path& out_dir, const std::string& name) {
    const fs::path p(name);
    return p.is_absolute() ? p : out_dir / p;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    return out;
}

const json& section(const json& config, const char* name) {
    static const json empty = json::object();
    if (!config.contains(name)) return empty;
    const json& s = config.at(name);
    if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
    return s;
}

template <typename T>
std::vector<T> axis(const json& node, const char* what, bool integral) {
    std::vector<T> out;
    if (node.is_array()) {
        for (const json& x : node) {
            if (integral ? !x.is_number_integer() : !x.is_number()) {
                throw ConfigError(std::string(what) + " entries must be numbers");
            }
            out.push_back(x.get<T>());
        }
    } else if (node.is_object()) {
        const double lo = get_or<double>(node, "min", 0.0);
        const double hi = get_or<double>(node, "max", 0.0);
        const std::size_t count = get_count(node, "count", 0);
        if constexpr (std::is_integral_v<T>) {
            if (lo < 0.0 || hi < lo) throw ConfigError(std::string(what) + " needs 0 <= min <= max");
            out = log_space_counts(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi), count);
        } else {
            out = log_space(lo, hi, count);
        }
    } else {
        throw ConfigError(std::string(what) + " must be a list or {min, max, count}");
    }
    if (out.empty()) throw ConfigError(std::string(what) + " must not be empty");
    return out;
}

std::string fmt(double x) { return csv::real(x); }

}  // namespace

void apply_override(json& config, std::string_view key, std::string_view value) {
    if (key.empty()) throw ConfigError("empty override key");
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = key.find('.', start);
        const std::string part(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (part.empty()) throw ConfigError("malformed override key '" + std::string(key) + "'");
        if (!node->is_object()) *node = json::object();
        node = &(*node)[part];
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    json parsed = json::parse(value, nullptr, false);
    *node = parsed.is_discarded() ? json(std::string(value)) : std::move(parsed);
}

std::uint64_t component_seed(const json& config, std::string_view component,
                             const std::optional<std::uint64_t>& explicit_seed) {
    if (explicit_seed) return *explicit_seed;
    const auto base = get_or<std::uint64_t>(config, "seed", 0);
    return splitmix64(base ^ splitmix64(fnv1a(component)));
}

TopologySpec parse_topology(const json& config) {
    const json& t = section(config, "topology");
    TopologySpec spec;
    spec.kind = parse_topology_kind(get_or<std::string>(t, "kind", "circle"));
    spec.n = get_count(t, "n", spec.n);
    spec.self_weight = get_or<double>(t, "self_weight", spec.self_weight);
    spec.neighbor_budget = get_or<double>(t, "neighbor_budget", spec.neighbor_budget);
    spec.plane_side = get_or<double>(t, "plane_side", spec.plane_side);
    spec.connect_radius = get_or<double>(t, "connect_radius", spec.connect_radius);
    spec.random_signs = get_or<bool>(t, "random_signs", spec.random_signs);
    spec.require_connected = get_or<bool>(t, "require_connected", spec.require_connected);
    spec.path = get_or<std::string>(t, "path", "");
    spec.seed = component_seed(config, "topology", optional_seed(t));
    validate(spec);
    return spec;
}

RunConfig parse_run_config(const json& config) {
    const json& r = section(config, "run");
    RunConfig rc;
    rc.topology = parse_topology(config);

    const auto model = get_or<std::string>(r, "model", "sync");
    if (model == "sync") {
        rc.model = ExecutionModel::sync;
    } else if (model == "async") {
        rc.model = ExecutionModel::async;
    } else {
        throw ConfigError("run.model must be 'sync' or 'async', got '" + model + "'");
    }

    rc.delta = get_or<double>(r, "delta", 0.0);
    if (!(rc.delta >= 0.0) || !std::isfinite(rc.delta)) throw ConfigError("run.delta must be finite and >= 0");

    rc.length = get_count(r, "length", rc.model == ExecutionModel::sync ? 200 : 20000);
    rc.thinning = get_count(r, "thinning", 1);
    if (rc.thinning == 0) throw ConfigError("run.thinning must be >= 1");

    if (r.contains("center") && r.at("center").is_array()) {
        rc.center_kind = CenterKind::explicit_vector;
        rc.center = get_reals(r.at("center"), "run.center");
    } else {
        const json c = r.contains("center") ? as_object(r.at("center")) : json::object();
        const auto kind = get_or<std::string>(c, "kind", "uniform");
        if (kind != "uniform") throw ConfigError("run.center.kind must be 'uniform' or an explicit array");
        rc.center_kind = CenterKind::uniform;
        rc.center_range = get_or<double>(c, "range", 1.0);
        rc.center_seed = component_seed(config, "run.center", optional_seed(c));
    }

    if (r.contains("initial") && r.at("initial").is_array()) {
        rc.initial_kind = InitialKind::explicit_vector;
        rc.initial = get_reals(r.at("initial"), "run.initial");
    } else {
        const json c = r.contains("initial") ? as_object(r.at("initial")) : json::object();
        const auto kind = get_or<std::string>(c, "kind", "random");
        if (kind == "zero") {
            rc.initial_kind = InitialKind::zero;
        } else if (kind == "fixed_point" || kind == "fixed-point") {
            rc.initial_kind = InitialKind::fixed_point;
        } else if (kind == "random") {
            rc.initial_kind = InitialKind::random;
        } else {
            throw ConfigError("run.initial.kind must be zero, fixed_point or random, got '" + kind + "'");
        }
        rc.initial_range = get_or<double>(c, "range", 10.0);
        rc.initial_seed = component_seed(config, "run.initial", optional_seed(c));
    }

    {
        const json c = r.contains("input") ? as_object(r.at("input")) : json::object();
        const auto kind = get_or<std::string>(c, "kind", "uniform");
        if (kind == "uniform") {
            rc.input_kind = InputKind::uniform;
        } else if (kind == "corner") {
            rc.input_kind = InputKind::corner;
        } else if (kind == "constant") {
            rc.input_kind = InputKind::constant;
        } else if (kind == "csv") {
            rc.input_kind = InputKind::csv;
            rc.input_path = get_or<std::string>(c, "path", "");
            if (rc.input_path.empty()) throw ConfigError("run.input.path is required for csv input");
        } else {
            throw ConfigError("run.input.kind must be uniform, corner, constant or csv, got '" + kind + "'");
        }
        rc.input_seed = component_seed(config, "run.input", optional_seed(c));
    }

    {
        const json c = r.contains("scheduler") ? as_object(r.at("scheduler")) : json::object();
        const auto kind = get_or<std::string>(c, "kind", "round_robin");
        if (kind == "round_robin" || kind == "round-robin") {
            rc.scheduler = SchedulerKind::round_robin;
        } else if (kind == "random") {
            rc.scheduler = SchedulerKind::random;
        } else {
            throw ConfigError("run.scheduler.kind must be round_robin or random, got '" + kind + "'");
        }
        rc.fairness_window = get_count(c, "fairness_window", 0);
        rc.scheduler_seed = component_seed(config, "run.scheduler", optional_seed(c));
    }

    rc.trajectory_file = get_or<std::string>(r, "trajectory", rc.trajectory_file);
    rc.report_file = get_or<std::string>(r, "report", rc.report_file);
    return rc;
}

HeatmapConfig parse_heatmap_config(const json& config) {
    const json& h = section(config, "heatmap");
    HeatmapConfig hc;
    hc.topology = parse_topology(config);
    hc.delta_values = axis<double>(h.contains("delta_values") ? h.at("delta_values")
                                                              : json{{"min", 1e-3}, {"max", 10.0}, {"count", 9}},
                                   "heatmap.delta_values", false);
    hc.iteration_counts = axis<std::size_t>(h.contains("iteration_counts")
                                                ? h.at("iteration_counts")
                                                : json{{"min", 1}, {"max", 1000}, {"count", 10}},
                                            "heatmap.iteration_counts", true);
    hc.trials = get_count(h, "trials", 32);
    hc.seed = component_seed(config, "heatmap", optional_seed(h));
    hc.options.center_range = get_or<double>(h, "center_range", hc.options.center_range);
    hc.options.initial_range = get_or<double>(h, "initial_range", hc.options.initial_range);
    hc.options.threads = get_count(h, "threads", 0);
    hc.output_file = get_or<std::string>(h, "output", hc.output_file);
    return hc;
}

int cmd_gen_topology(const json& config, const fs::path& out_dir, std::ostream& log) {
    const TopologySpec spec = parse_topology(config);
    const AlgorithmWeights weights = build_weights(spec);
    const IterationPair pair = derive_iteration_pair(to_weight_matrix(weights));

    const auto name = get_or<std::string>(section(config, "gen_topology"), "output", "topology.txt");
    const fs::path path = output_path(out_dir, name);
    {
        std::ofstream out = open_output(path);
        write_edge_text(out, weights);
        if (!out) throw ConfigError("failed writing '" + path.string() + "'");
    }
    log << "topology " << to_string(spec.kind) << " n=" << weights.size() << '\n'
        << "a_norm " << fmt(pair.a_norm()) << '\n'
        << "b_norm " << fmt(pair.b_norm()) << '\n'
        << "wrote " << path.string() << '\n';
    return ExitCode::ok;
}

int cmd_run(const json& config, const fs::path& out_dir, std::ostream& log) {
    const RunConfig rc = parse_run_config(config);
    const WeightMatrix w = build_topology(rc.topology);
    // Refuse non-contracting systems before simulating anything.
    const IterationPair pair = derive_iteration_pair(w);
    const std::size_t n = w.size();

    InputSequence csv_inputs;
    Vector center;
    double delta = rc.delta;
    if (rc.input_kind == InputKind::csv) {
        csv_inputs = load_input_csv(rc.input_path);
        if (csv_inputs.dimension() != n || csv_inputs.size() == 0) {
            throw ConfigError("input csv must have " + std::to_string(n) + " columns and at least one row");
        }
        center = csv_inputs.center;
        delta = csv_inputs.delta;
    } else if (rc.center_kind == CenterKind::explicit_vector) {
        if (rc.center.size() != n) throw ConfigError("run.center must have " + std::to_string(n) + " entries");
        center = to_vector(rc.center);
    } else {
        center = uniform_vector(n, rc.center_range, rc.center_seed);
    }

    const std::size_t input_len =
        rc.model == ExecutionModel::sync ? rc.length : std::clamp<std::size_t>(rc.length, 1, 4096);
    InputSequence seq;
    switch (rc.input_kind) {
        case InputKind::uniform:
            seq = bounded_random_sequence(center, delta, input_len, rc.input_seed);
            break;
        case InputKind::corner:
            seq = corner_sequence(center, delta, input_len, rc.input_seed);
            break;
        case InputKind::constant:
            seq = constant_sequence(center, input_len);
            seq.delta = delta;
            break;
        case InputKind::csv:
            seq = csv_inputs;
            seq.vectors.clear();
            for (std::size_t k = 0; k < input_len; ++k) seq.vectors.push_back(csv_inputs[k % csv_inputs.size()]);
            break;
    }

    const DirectSolver solver(w);
    Vector initial;
    switch (rc.initial_kind) {
        case InitialKind::zero:
            initial = Vector::Zero(idx(n));
            break;
        case InitialKind::fixed_point:
            initial = solver.solve(center);
            break;
        case InitialKind::explicit_vector:
            if (rc.initial.size() != n) throw ConfigError("run.initial must have " + std::to_string(n) + " entries");
            initial = to_vector(rc.initial);
            break;
        case InitialKind::random:
            initial = uniform_vector(n, rc.initial_range, rc.initial_seed);
            break;
    }

    ConvergenceReport report;
    const fs::path traj_path = output_path(out_dir, rc.trajectory_file);
    if (rc.model == ExecutionModel::sync) {
        const SyncTrajectory traj = run_sync(pair, seq, SyncConfiguration{initial, 0}, SyncRunOptions{rc.thinning});
        report = check_trajectory(traj, seq, w);
        std::ofstream out = open_output(traj_path);
        write_sync_csv(out, traj);
        if (!out) throw ConfigError("failed writing '" + traj_path.string() + "'");
    } else {
        const AsyncNetwork network(to_algorithm_weights(w));
        const AsyncState start = rc.initial_kind == InitialKind::random
                                     ? make_corrupted_state(network, Vector::Zero(idx(n)), rc.initial_range,
                                                            rc.initial_seed)
                                     : make_clean_state(network, initial);
        Schedule schedule = rc.scheduler == SchedulerKind::round_robin
                                ? make_round_robin_schedule(n)
                                : make_random_fair_schedule(n, rc.fairness_window ? rc.fairness_window : 10 * n,
                                                            rc.scheduler_seed);
        const AsyncTrajectory traj = run_async(network, cyclic_inputs(seq), start, schedule, rc.length);
        report = check_trajectory(traj, network, seq, w, RoundRule::published);
        std::ofstream out = open_output(traj_path);
        write_async_csv(out, traj, RoundRule::published, rc.thinning);
        if (!out) throw ConfigError("failed writing '" + traj_path.string() + "'");
    }

    const fs::path report_path = output_path(out_dir, rc.report_file);
    {
        std::ofstream out = open_output(report_path);
        out << to_json(report).dump() << '\n';
        if (!out) throw ConfigError("failed writing '" + report_path.string() + "'");
    }

    log << "model " << (rc.model == ExecutionModel::sync ? "sync" : "async") << '\n'
        << "n " << n << '\n'
        << "a_norm " << fmt(report.a_norm) << '\n'
        << "b_norm " << fmt(report.b_norm) << '\n'
        << "delta " << fmt(report.delta) << '\n'
        << "initial_error " << fmt(report.initial_error) << '\n'
        << "final_error " << fmt(report.per_step_error.back()) << '\n'
        << "final_envelope " << fmt(report.per_step_envelope.back()) << '\n'
        << "violations " << report.violations.size() << '\n'
        << "wrote " << traj_path.string() << '\n'
        << "wrote " << report_path.string() << '\n';
    return report.ok() ? ExitCode::ok : ExitCode::violations;
}

int cmd_heatmap(const json& config, const fs::path& out_dir, std::ostream& log) {
    const HeatmapConfig hc = parse_heatmap_config(config);
    const HeatmapGrid grid =
        heatmap_experiment(hc.topology, hc.delta_values, hc.iteration_counts, hc.trials, hc.seed, hc.options);
    const fs::path path = output_path(out_dir, hc.output_file);
    {
        std::ofstream out = open_output(path);
        write_heatmap_csv(out, grid);
        if (!out) throw ConfigError("failed writing '" + path.string() + "'");
    }
    log << "a_norm " << fmt(grid.a_norm) << '\n'
        << "b_norm " << fmt(grid.b_norm) << '\n'
        << "cells " << grid.delta_values.size() * grid.iteration_counts.size() << '\n'
        << "trials " << grid.trials << '\n'
        << "wrote " << path.string() << '\n';
    return ExitCode::ok;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    // Pull dotted overrides (--a.b value or --a.b=value) out before CLI11 sees them.
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> rest;
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        if (arg.size() > 2 && arg.substr(0, 2) == "--") {
            const std::string_view body = arg.substr(2);
            const std::size_t eq = body.find('=');
            const std::string_view key = body.substr(0, eq);
            if (key.find('.') != std::string_view::npos) {
                if (eq != std::string_view::npos) {
                    overrides.emplace_back(std::string(key), std::string(body.substr(eq + 1)));
                } else if (i + 1 < argc) {
                    overrides.emplace_back(std::string(key), argv[++i]);
                } else {
                    err << "error: override --" << key << " needs a value\n";
                    return ExitCode::config_error;
                }
                continue;
            }
        }
        rest.emplace_back(arg);
    }

    CLI::App app{"Self-stabilizing iterative solver simulator"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "master seed for every random component");
    app.add_option("--out", out_dir, "output directory");
    auto* gen = app.add_subcommand("gen-topology", "write the configured topology as an edge file");
    auto* run = app.add_subcommand("run", "simulate one run and check it against its envelope");
    auto* heat = app.add_subcommand("heatmap", "mean final error over a (delta, iterations) grid");
    for (auto* sub : {gen, run, heat}) sub->fallthrough();

    std::vector<std::string> args(rest.rbegin(), rest.rend());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ExitCode::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::config_error;
    }

    try {
        json config = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw ConfigError("cannot read config '" + config_path + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            try {
                config = json::parse(buf.str(), nullptr, true, true);
            } catch (const json::parse_error& e) {
                throw ConfigError("config '" + config_path + "' is not valid JSON: " + e.what());
            }
            if (!config.is_object()) throw ConfigError("config must be a JSON object");
        }
        for (const auto& [key, value] : overrides) apply_override(config, key, value);
        if (seed) config["seed"] = *seed;

        if (gen->parsed()) return cmd_gen_topology(config, out_dir, out);
        if (run->parsed()) return cmd_run(config, out_dir, out);
        return cmd_heatmap(config, out_dir, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
    }
    return ExitCode::config_error;
}

}  // namespace ssiter::cli
