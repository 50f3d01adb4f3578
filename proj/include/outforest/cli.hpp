#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <complex>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "outforest/analysis.hpp"
#include "outforest/dynamics.hpp"
#include "outforest/eigenprojection.hpp"
#include "outforest/forest.hpp"
#include "outforest/render.hpp"

namespace outforest {

inline constexpr int kJsonSchemaVersion = 1;

// One invocation's worth of settings, shared across subcommands.
struct RunConfig {
    std::string input_path;
    std::string command;
    bool json_output = false;
    bool exact = true;
    double tolerance = kDefaultConvergenceTol;
    int cap = kDefaultEnumerationCap;
};

namespace cli_detail {

// Initial-state list: comma-separated rationals, '*' marks a free entry that
// is substituted with zero.
struct ParsedState {
    RationalVector values;
    std::vector<int> free_positions;  // 0-based
};

inline ParsedState parse_state_list(const std::string& text) {
    ParsedState state;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        const auto first = token.find_first_not_of(" \t");
        const auto last = token.find_last_not_of(" \t");
        if (first == std::string::npos) throw std::invalid_argument("empty entry in state list");
        token = token.substr(first, last - first + 1);
        if (token == "*") {
            state.free_positions.push_back(static_cast<int>(state.values.size()));
            state.values.push_back(Rational(0));
        } else {
            state.values.push_back(rational_from_string(token));
        }
    }
    if (state.values.empty()) throw std::invalid_argument("empty state list");
    return state;
}

inline ParsedState read_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open state file: " + path);
    ParsedState state;
    std::string token;
    while (in >> token) {
        if (token == "*") {
            state.free_positions.push_back(static_cast<int>(state.values.size()));
            state.values.push_back(Rational(0));
        } else {
            state.values.push_back(rational_from_string(token));
        }
    }
    if (state.values.empty()) throw std::runtime_error("state file is empty: " + path);
    return state;
}

inline ParsedState resolve_state(const std::string& inline_text, const std::string& file_path) {
    if (!inline_text.empty() && !file_path.empty())
        throw std::runtime_error("give the initial state inline or as a file, not both");
    if (inline_text.empty() && file_path.empty())
        throw std::runtime_error("an initial state is required (--x0 or --x0-file)");
    return inline_text.empty() ? read_state_file(file_path) : parse_state_list(inline_text);
}

// Warns about free entries; they are harmless exactly when their forest-matrix
// columns vanish, i.e. when the vertex lies outside every basic bicomponent.
inline void note_free_entries(const ParsedState& state, const WeightedDigraph& g,
                              std::ostream& err) {
    if (state.free_positions.empty()) return;
    const BicomponentDecomposition decomposition = bicomponents(g);
    std::ostringstream positions;
    for (std::size_t k = 0; k < state.free_positions.size(); ++k) {
        if (k) positions << ",";
        positions << state.free_positions[k] + 1;
    }
    err << "note: free entries (*) at vertices " << positions.str()
        << " set to 0; entries at vertices outside every basic bicomponent do not affect the "
           "limiting state\n";
    for (int v : state.free_positions)
        if (decomposition.vertex_in_basic(v))
            err << "warning: vertex " << v + 1
                << " lies in a basic bicomponent; its initial value does affect the limit\n";
}

inline std::vector<std::pair<Rational, int>> parse_rational_roots(const std::string& text) {
    std::vector<std::pair<Rational, int>> roots;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        if (token.empty()) continue;
        const auto colon = token.find(':');
        int index = 1;
        std::string value = token;
        if (colon != std::string::npos) {
            value = token.substr(0, colon);
            index = std::stoi(token.substr(colon + 1));
        }
        roots.emplace_back(rational_from_string(value), index);
    }
    if (roots.empty()) throw std::invalid_argument("empty root list");
    return roots;
}

inline std::vector<double> parse_alpha_schedule(const std::string& text) {
    std::vector<double> alphas;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        if (token.empty()) continue;
        alphas.push_back(std::stod(token));
    }
    return alphas;
}

inline void emit_json(std::ostream& out, json j) {
    j["schema"] = kJsonSchemaVersion;
    out << j.dump(2) << "\n";
}

inline int cmd_laplacian(const RunConfig& config, const WeightedDigraph& g, std::ostream& out) {
    const LaplacianMatrix l = laplacian(g);
    if (config.json_output) {
        emit_json(out, {{"command", "laplacian"},
                        {"n", g.vertex_count()},
                        {"entries", json_matrix(l.entries())}});
    } else {
        out << render_matrix(l.entries());
    }
    return 0;
}

inline int cmd_forests(const RunConfig& config, const WeightedDigraph& g, std::ostream& out) {
    const std::vector<OutForest> forests = enumerate_max_forests(g, config.cap);
    const int d = max_forest_dimension(g);
    Rational total = 0;
    for (const auto& f : forests) total += f.weight;
    if (config.json_output) {
        json list = json::array();
        for (std::size_t k = 0; k < forests.size(); ++k) {
            json f = json_forest(forests[k]);
            f["index"] = k + 1;
            list.push_back(std::move(f));
        }
        emit_json(out, {{"command", "forests"},
                        {"count", forests.size()},
                        {"d", d},
                        {"max_arc_count", g.vertex_count() - d},
                        {"f", json_rational(total)},
                        {"forests", std::move(list)}});
    } else {
        out << format_forest_listing(forests);
        out << "count=" << forests.size() << ", d=" << d << ", f=" << to_string(total) << "\n";
    }
    return 0;
}

inline void render_projection_text(std::ostream& out, const ProjectionEstimate& estimate) {
    out << "method=" << to_string(estimate.method)
        << " exact=" << (estimate.exact_entries ? "true" : "false") << "\n";
    if (estimate.exact_entries)
        out << render_matrix(*estimate.exact_entries);
    else
        out << render_matrix(estimate.entries);
    out << "residuals: max_row_sum_error=" << format_double(estimate.residuals.max_row_sum_error)
        << " annihilation=" << format_double(estimate.residuals.annihilation)
        << " idempotency=" << format_double(estimate.residuals.idempotency) << "\n";
    for (const auto& [alpha, diff] : estimate.convergence)
        out << "alpha=" << format_double(alpha) << " step_diff=" << format_double(diff) << "\n";
    for (const auto& note : estimate.notes) out << note << "\n";
}

inline int cmd_eigenprojection(const RunConfig& config, const WeightedDigraph& g,
                               const std::string& method, const std::string& roots_text,
                               const std::string& alphas_text, std::ostream& out,
                               std::ostream& err) {
    const LaplacianMatrix l = laplacian(g);
    ProjectionEstimate estimate;
    if (method == "forest") {
        const ForestMatrix fm = forest_matrix(g, config.cap);
        estimate.method = ProjectionMethod::forest;
        estimate.residuals = compute_residuals_exact(l.entries(), fm.entries());
        estimate.entries = fm.to_double();
        estimate.exact_entries = fm.entries();
    } else if (method == "recursive") {
        estimate = eigenprojection_recursive(l, max_forest_dimension(g), config.exact);
    } else if (method == "resolvent") {
        if (config.exact)
            err << "note: the resolvent route is floating-point; --exact has no effect here\n";
        std::vector<double> schedule =
            alphas_text.empty() ? default_alpha_schedule() : parse_alpha_schedule(alphas_text);
        estimate = eigenprojection_resolvent(l, schedule);
    } else if (method == "polynomial") {
        if (roots_text.empty())
            throw CLI::ValidationError("--method polynomial requires --roots");
        const auto roots = parse_rational_roots(roots_text);
        if (config.exact) {
            estimate = eigenprojection_polynomial_exact(l, roots);
        } else {
            std::vector<std::pair<std::complex<double>, int>> froots;
            froots.reserve(roots.size());
            for (const auto& [value, index] : roots)
                froots.emplace_back(std::complex<double>(to_double(value), 0.0), index);
            estimate = eigenprojection_polynomial(l, froots);
        }
    } else {
        throw CLI::ValidationError("unknown method '" + method +
                                   "' (expected recursive|resolvent|polynomial|forest)");
    }
    if (config.json_output) {
        json j = json_projection(estimate);
        j["command"] = "eigenprojection";
        emit_json(out, std::move(j));
    } else {
        render_projection_text(out, estimate);
    }
    return 0;
}

inline json json_trajectory(const TrajectoryReport& report) {
    json samples = json::array();
    for (const auto& [time, state] : report.samples)
        samples.push_back({{"t", time}, {"state", json_vector(state)}});
    return {{"mode", to_string(report.mode)},
            {"samples", std::move(samples)},
            {"limit_estimate", json_vector(report.limit_estimate)},
            {"predicted_limit", json_vector(report.predicted_limit)},
            {"max_deviation", report.max_deviation},
            {"last_step_delta", report.last_step_delta},
            {"converged", report.converged}};
}

inline void render_trajectory_text(std::ostream& out, const TrajectoryReport& report,
                                   const RationalVector& predicted_exact) {
    write_trajectory_csv(out, report);
    out << "# mode=" << to_string(report.mode) << " converged=" << (report.converged ? "true" : "false")
        << " limit=" << render_vector(report.limit_estimate)
        << " predicted=" << render_vector(predicted_exact)
        << " max_deviation=" << format_double(report.max_deviation) << "\n";
}

inline int cmd_simulate(const RunConfig& config, const WeightedDigraph& g, bool discrete,
                        bool cesaro, const std::string& tau_text, const std::string& x0_text,
                        const std::string& x0_file, double horizon, int samples, int steps,
                        std::ostream& out, std::ostream& err) {
    const LaplacianMatrix l = laplacian(g);
    const ParsedState state = resolve_state(x0_text, x0_file);
    note_free_entries(state, g, err);
    const StateVector x0 = to_double(state.values);

    TrajectoryReport report;
    std::optional<PerronMatrix> p;
    if (discrete) {
        if (tau_text.empty()) throw CLI::ValidationError("discrete mode requires --tau");
        p = perron(l, rational_from_string(tau_text));
        report = cesaro ? cesaro_limit(*p, x0, steps, config.tolerance)
                        : degroot_iterate(*p, x0, steps, config.tolerance);
    } else {
        report = simulate_continuous(l, x0, horizon, samples, config.tolerance);
    }
    // exact rational J x(0); the report's float copy drives the deviation
    const RationalVector predicted_exact = exact_eigenprojection(l) * state.values;
    if (discrete && !cesaro && !report.converged)
        err << "note: power iteration did not converge within the step budget; the running "
               "average (--cesaro) converges for every admissible tau\n";

    if (config.json_output) {
        json j = json_trajectory(report);
        j["command"] = config.command;
        j["predicted_limit_exact"] = json_vector(predicted_exact);
        if (p) {
            j["tau"] = json_rational(p->tau());
            j["tau_strictness"] = to_string(p->strictness());
        }
        emit_json(out, std::move(j));
    } else {
        if (p)
            out << "# tau=" << to_string(p->tau()) << " strictness=" << to_string(p->strictness())
                << "\n";
        render_trajectory_text(out, report, predicted_exact);
    }
    return 0;
}

inline int cmd_analyze(const RunConfig& config, const WeightedDigraph& g,
                       const std::string& x0_text, const std::string& x0_file, std::ostream& out,
                       std::ostream& err) {
    const LaplacianMatrix l = laplacian(g);
    const BicomponentDecomposition decomposition = bicomponents(g);
    const ForestMatrix fm = forest_matrix(g, config.cap);

    std::optional<cli_detail::ParsedState> state;
    if (!x0_text.empty() || !x0_file.empty()) {
        state = resolve_state(x0_text, x0_file);
        note_free_entries(*state, g, err);
    }

    const ConsensusVerdict verdict =
        state ? consensus_verdict(g, fm, state->values) : consensus_verdict(g, fm);

    std::optional<LimitStructureReport> structure;
    std::optional<TimeShiftReport> time_shift;
    std::optional<RationalVector> limit;
    if (state) {
        limit = limiting_state(fm, state->values);
        structure = check_limit_structure(g, fm, state->values);
        time_shift = check_time_shift(l, fm, to_double(state->values), {0.0, 1.0, 5.0});
    }

    if (config.json_output) {
        json j = json_verdict(verdict, decomposition);
        j["command"] = "analyze";
        j["n"] = g.vertex_count();
        if (limit) j["limit"] = json_vector(*limit);
        if (structure)
            j["limit_structure"] = {{"shared_value", json_clause(structure->shared_value)},
                                     {"betweenness", json_clause(structure->betweenness)},
                                     {"free_vertices", json_clause(structure->free_vertices)}};
        if (time_shift) {
            json residuals = json::array();
            for (const auto& [t, r] : time_shift->residuals)
                residuals.push_back({{"t", t}, {"residual", r}});
            j["time_shift"] = {{"pass", time_shift->pass}, {"residuals", std::move(residuals)}};
        }
        emit_json(out, std::move(j));
        return 0;
    }

    out << "components:";
    for (std::size_t k = 0; k < decomposition.components.size(); ++k) {
        out << " " << outforest::detail::vertex_list(decomposition.components[k]);
        if (decomposition.is_basic[k]) out << "*";
    }
    out << "  (* = basic bicomponent)\n";
    out << "d=" << verdict.dimension << " spanning_diverging_tree="
        << (verdict.has_spanning_diverging_tree ? "true" : "false") << "\n";
    if (verdict.left_eigenvector)
        out << "left_eigenvector=" << render_vector(*verdict.left_eigenvector) << "\n";
    if (limit) {
        out << "limit=" << render_vector(*limit) << "\n";
        for (const auto& [vertices, value] : verdict.per_bicomponent_values)
            out << "bicomponent " << outforest::detail::vertex_list(vertices) << " value "
                << to_string(value) << "\n";
        out << "consensus_reached=" << (*verdict.consensus_reached ? "true" : "false") << "\n";
        if (verdict.consensus_value)
            out << "consensus_value=" << to_string(*verdict.consensus_value) << "\n";
        else
            out << "note: quasi-consensus via projection onto the consensus subspace is not "
                   "computed by this tool\n";
        out << "shared_value=" << (structure->shared_value.pass ? "pass" : "FAIL")
            << " betweenness=" << (structure->betweenness.pass ? "pass" : "FAIL")
            << " free_vertices=" << (structure->free_vertices.pass ? "pass" : "FAIL") << "\n";
        out << "time_shift=" << (time_shift->pass ? "pass" : "FAIL") << "\n";
    }
    return 0;
}

}  // namespace cli_detail

// Parses and runs one CLI invocation. Results go to `out`, diagnostics to
// `err`; the return value is the process exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"consensus limits, forest matrices and Laplacian eigenprojections of weighted "
                 "communication digraphs"};
    app.name("outforest");
    app.fallthrough();
    app.require_subcommand(1);

    RunConfig config;
    app.add_option("--input", config.input_path, "digraph input file")->required();
    app.add_flag("--json", config.json_output, "emit JSON instead of text");
    app.add_flag("--exact,!--no-exact", config.exact,
                 "use exact rational arithmetic where the method allows (default on)");
    app.add_option("--tol", config.tolerance, "convergence/consensus tolerance")
        ->check(CLI::PositiveNumber);
    app.add_option("--cap", config.cap, "vertex-count cap for forest enumeration")
        ->check(CLI::PositiveNumber);

    CLI::App* sub_laplacian = app.add_subcommand("laplacian", "print the Laplacian matrix");
    CLI::App* sub_forests =
        app.add_subcommand("forests", "list all maximum out-forests with the census");

    std::string method = "recursive", roots_text, alphas_text;
    CLI::App* sub_projection =
        app.add_subcommand("eigenprojection", "compute the eigenprojection of the Laplacian");
    sub_projection->add_option("--method", method,
                               "route: recursive|resolvent|polynomial|forest (default recursive)");
    sub_projection->add_option("--roots", roots_text,
                               "nonzero minimal-polynomial roots as value:index,... "
                               "(polynomial route)");
    sub_projection->add_option("--alphas", alphas_text,
                               "increasing alpha schedule for the resolvent route");

    std::string sim_x0, sim_x0_file, sim_tau;
    double horizon = 50.0;
    int samples = 201, sim_steps = 10000;
    bool discrete = false, sim_cesaro = false;
    CLI::App* sub_simulate = app.add_subcommand(
        "simulate", "integrate the consensus flow (or its discretization) and report the limit");
    sub_simulate->add_option("--x0", sim_x0, "initial state, comma separated; '*' = free entry");
    sub_simulate->add_option("--x0-file", sim_x0_file, "initial state file");
    sub_simulate->add_option("--horizon", horizon, "end time (continuous mode)")
        ->check(CLI::PositiveNumber);
    sub_simulate->add_option("--samples", samples, "sample count (continuous mode)")
        ->check(CLI::Range(2, 1 << 24));
    auto* opt_discrete = sub_simulate->add_flag("--discrete", discrete, "iterate y(k) = P y(k-1)");
    auto* opt_tau = sub_simulate->add_option("--tau", sim_tau, "Perron step (discrete mode)");
    auto* opt_cesaro = sub_simulate->add_flag("--cesaro", sim_cesaro,
                                              "report running averages instead of raw iterates");
    sub_simulate->add_option("--steps", sim_steps, "iteration count (discrete mode)")
        ->check(CLI::PositiveNumber);
    opt_discrete->needs(opt_tau);
    opt_tau->needs(opt_discrete);
    opt_cesaro->needs(opt_discrete);

    std::string dg_x0, dg_x0_file, dg_tau;
    int dg_steps = 10000;
    bool dg_cesaro = false;
    CLI::App* sub_degroot =
        app.add_subcommand("degroot", "iterative pooling y(k) = P y(k-1) with P = I - tau L");
    sub_degroot->add_option("--x0", dg_x0, "initial state, comma separated; '*' = free entry");
    sub_degroot->add_option("--x0-file", dg_x0_file, "initial state file");
    sub_degroot->add_option("--tau", dg_tau, "Perron step")->required();
    sub_degroot->add_option("--steps", dg_steps, "iteration count")->check(CLI::PositiveNumber);
    sub_degroot->add_flag("--cesaro", dg_cesaro, "report running averages instead of raw iterates");

    std::string an_x0, an_x0_file;
    CLI::App* sub_analyze = app.add_subcommand(
        "analyze", "bicomponent structure, consensus verdict and limit-structure checks");
    sub_analyze->add_option("--x0", an_x0, "initial state, comma separated; '*' = free entry");
    sub_analyze->add_option("--x0-file", an_x0_file, "initial state file");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        const WeightedDigraph g = parse_digraph_file(config.input_path);
        if (sub_laplacian->parsed()) {
            config.command = "laplacian";
            return cli_detail::cmd_laplacian(config, g, out);
        }
        if (sub_forests->parsed()) {
            config.command = "forests";
            return cli_detail::cmd_forests(config, g, out);
        }
        if (sub_projection->parsed()) {
            config.command = "eigenprojection";
            return cli_detail::cmd_eigenprojection(config, g, method, roots_text, alphas_text, out,
                                                   err);
        }
        if (sub_simulate->parsed()) {
            config.command = "simulate";
            return cli_detail::cmd_simulate(config, g, discrete, sim_cesaro, sim_tau, sim_x0,
                                            sim_x0_file, horizon, samples, sim_steps, out, err);
        }
        if (sub_degroot->parsed()) {
            config.command = "degroot";
            return cli_detail::cmd_simulate(config, g, /*discrete=*/true, dg_cesaro, dg_tau, dg_x0,
                                            dg_x0_file, horizon, samples, dg_steps, out, err);
        }
        if (sub_analyze->parsed()) {
            config.command = "analyze";
            return cli_detail::cmd_analyze(config, g, an_x0, an_x0_file, out, err);
        }
        err << "error: no command selected\n";
        return 1;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace outforest
