#ifndef TSIRELSON_CLI_HPP
#define TSIRELSON_CLI_HPP

// Command-line front end. run_cli is the whole program; tools/tsirelson.cpp
// only forwards argv to it.
//
// Exit codes: 0 success, 1 validation error (bad arguments, bad input
// files, failed verification), 2 numerical failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "tsirelson/io.hpp"
#include "tsirelson/pef.hpp"
#include "tsirelson/polytope.hpp"
#include "tsirelson/scenarios.hpp"

namespace tsirelson::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Environment variable naming the directory for outputs whose path was
/// not given explicitly.
inline constexpr const char* kOutputDirEnv = "TSIRELSON_OUTPUT_DIR";

inline std::filesystem::path default_output_dir()
{
    const char* dir = std::getenv(kOutputDirEnv);
    return dir && *dir ? std::filesystem::path(dir) : std::filesystem::path(".");
}

inline std::filesystem::path resolve_output(const std::string& given, const std::string& fallback_name)
{
    return given.empty() ? default_output_dir() / fallback_name : std::filesystem::path(given);
}

/**
 * Grid specifications:
 *   "0.1,0.2,0.5"     explicit list
 *   "1.90:2.10:0.01"  lo to hi inclusive in steps
 *   "0.001:0.1#100"   count equally spaced values, endpoints included
 */
inline std::vector<double> parse_grid(const std::string& spec)
{
    auto number = [&](const std::string& text) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() || !std::isfinite(v))
            throw InvalidArgument("bad number '" + text + "' in grid '" + spec + "'");
        return v;
    };

    if (spec.empty())
        throw InvalidArgument("empty grid specification");
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        std::vector<double> out;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(number(item));
        return out;
    }

    const double lo = number(spec.substr(0, colon));
    const std::string rest = spec.substr(colon + 1);
    if (const auto hash = rest.find('#'); hash != std::string::npos) {
        const double hi = number(rest.substr(0, hash));
        const double count = number(rest.substr(hash + 1));
        if (count < 1 || count != std::floor(count) || hi < lo)
            throw InvalidArgument("grid '" + spec + "' needs hi >= lo and a positive integer count");
        return linspace(lo, hi, static_cast<std::size_t>(count));
    }
    const auto colon2 = rest.find(':');
    if (colon2 == std::string::npos)
        throw InvalidArgument("grid '" + spec + "' must be lo:hi:step or lo:hi#count");
    const double hi = number(rest.substr(0, colon2));
    const double step = number(rest.substr(colon2 + 1));
    if (!(step > 0.0) || hi < lo)
        throw InvalidArgument("grid '" + spec + "' needs hi >= lo and a positive step");
    // Steps that do not divide the range stop at the last point below hi.
    const double intervals = (hi - lo) / step;
    const double rounded = std::round(intervals);
    if (std::abs(intervals - rounded) <= 1e-9 * std::max(1.0, rounded))
        return linspace(lo, hi, static_cast<std::size_t>(rounded) + 1);
    const auto count = static_cast<std::size_t>(std::floor(intervals)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo + step * static_cast<double>(i);
    return out;
}

struct BuildOptions
{
    std::string variant = "double";
    std::string bell = "chsh";
    std::optional<double> alpha;
    std::optional<double> bound;

    io::json to_json() const
    {
        io::json j = {{"variant", variant}, {"bell", bell}};
        if (alpha)
            j["alpha"] = *alpha;
        if (bound)
            j["bound"] = *bound;
        return j;
    }
};

inline PolytopeModel build_model(const BuildOptions& b)
{
    const Construction kind = construction_from_string(b.variant);
    switch (kind) {
    case Construction::single_bound: {
        if (b.bell == "chsh") {
            if (b.alpha)
                throw InvalidArgument("--alpha applies to --bell tilted only");
            const TsirelsonConstraint def = chsh_tsirelson_constraint();
            return single_bound_extremes({def.name(), def.functional(), b.bound.value_or(def.bound())});
        }
        if (b.bell == "tilted") {
            if (!b.alpha)
                throw InvalidArgument("--bell tilted requires --alpha");
            if (!(*b.alpha > 1.0))
                throw InvalidArgument("--alpha must exceed 1");
            const TsirelsonConstraint def = tilted_tsirelson_constraint(*b.alpha);
            return single_bound_extremes({def.name(), def.functional(), b.bound.value_or(def.bound())});
        }
        throw InvalidArgument("--bell must be chsh or tilted");
    }
    case Construction::eight_chsh:
        if (b.alpha || b.bound)
            throw InvalidArgument("eight-chsh takes neither --alpha nor --bound");
        return eight_chsh_polytope();
    case Construction::double_bound:
        if (!b.alpha)
            throw InvalidArgument("double variant requires --alpha");
        if (b.bound)
            throw InvalidArgument("double variant uses the Tsirelson bounds; --bound is not accepted");
        return double_bound_extremes(*b.alpha);
    case Construction::custom:
        break;
    }
    throw InvalidArgument("--variant must be single, eight-chsh or double");
}

inline void add_build_options(CLI::App* cmd, BuildOptions& b)
{
    cmd->add_option("--variant", b.variant, "single | eight-chsh | double")
        ->check(CLI::IsMember({"single", "eight-chsh", "double"}));
    cmd->add_option("--bell", b.bell, "functional of the single variant: chsh | tilted")
        ->check(CLI::IsMember({"chsh", "tilted"}));
    cmd->add_option("--alpha", b.alpha, "tilt parameter (> 1)");
    cmd->add_option("--bound", b.bound, "TB* of the single variant (default: the Tsirelson bound)");
}

inline void print_saturation(std::ostream& out, const PolytopeModel& model)
{
    out << "points: " << model.size() << '\n';
    for (const TsirelsonConstraint& c : model.constraints) {
        std::size_t saturating = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (const LabeledPoint& pt : model.points) {
            const double e = c.excess(pt.behavior);
            worst = std::max(worst, e);
            if (std::abs(e) <= kStructuralTolerance)
                ++saturating;
        }
        out << "constraint " << c.name() << " <= " << io::format_number(c.bound())
            << ": saturated by " << saturating << ", max excess " << io::format_number(worst) << '\n';
    }
}

struct CertifyOptions
{
    double epsilon = 1e-6;
    std::uint64_t trials = 10000;
    std::string beta_grid = "0.001:0.1#100";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

    CertificationConfig config() const { return {epsilon, trials}; }

    io::json to_json() const
    {
        return {{"epsilon", epsilon}, {"trials", trials}, {"beta_grid", beta_grid}, {"jobs", jobs}};
    }
};

inline void add_certify_options(CLI::App* cmd, CertifyOptions& c)
{
    cmd->add_option("--epsilon", c.epsilon, "error bound epsilon in (0, 1)");
    cmd->add_option("--trials", c.trials, "number of trials n");
    cmd->add_option("--beta-grid", c.beta_grid, "beta grid: list, lo:hi:step or lo:hi#count");
    cmd->add_option("--jobs", c.jobs, "worker threads");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr)
{
    CLI::App app{"Tsirelson polytopes and probability estimation factors", "tsirelson"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::kToolVersion));

    // polytope build / verify
    CLI::App* poly = app.add_subcommand("polytope", "build or verify polytope models");
    poly->require_subcommand(1);

    BuildOptions build_opts;
    std::string build_out;
    CLI::App* build = poly->add_subcommand("build", "construct a polytope model and write it as JSON");
    add_build_options(build, build_opts);
    build->add_option("-o,--output", build_out, "output file");

    std::string verify_in, verify_out;
    CLI::App* verify = poly->add_subcommand("verify", "audit and extremality-check a model file");
    verify->add_option("-i,--input", verify_in, "model file")->required();
    verify->add_option("-o,--output", verify_out, "report file");

    // certify
    BuildOptions cert_build;
    CertifyOptions cert_opts;
    std::string cert_model, cert_scenario = "tilted:alpha=2", cert_csv, cert_summary, cert_solver_trace;
    CLI::App* certify = app.add_subcommand("certify", "optimize PEFs over a beta grid");
    certify->add_option("-m,--model", cert_model, "model file (instead of --variant ...)");
    add_build_options(certify, cert_build);
    certify->add_option("--scenario", cert_scenario, "trial behavior, e.g. tilted:alpha=2, chsh-max");
    add_certify_options(certify, cert_opts);
    certify->add_option("--csv", cert_csv, "per-beta trace CSV");
    certify->add_option("--summary", cert_summary, "summary JSON");
    certify->add_option("--solver-trace", cert_solver_trace,
                        "write the barrier iterates of the best-beta solve to this CSV");

    // sweep-alpha
    CertifyOptions sweep_opts;
    std::string alpha_grid = "1.90:2.10:0.01", sweep_csv_path, sweep_summary;
    double trial_alpha = 2.0;
    CLI::App* sweep = app.add_subcommand("sweep-alpha", "best bits of the double-bound model per alpha");
    sweep->add_option("--alpha-grid", alpha_grid, "alpha grid: list, lo:hi:step or lo:hi#count");
    sweep->add_option("--trial-alpha", trial_alpha, "alpha of the trial behavior");
    add_certify_options(sweep, sweep_opts);
    sweep->add_option("-o,--csv", sweep_csv_path, "per-alpha CSV");
    sweep->add_option("--summary", sweep_summary, "summary JSON");

    // scenario dump
    CLI::App* scen = app.add_subcommand("scenario", "named reference behaviors");
    scen->require_subcommand(1);
    std::string dump_name = "chsh-max", dump_out;
    CLI::App* dump = scen->add_subcommand("dump", "print a named behavior as JSON");
    dump->add_option("name,--scenario", dump_name, "scenario name");
    dump->add_option("-o,--output", dump_out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return kExitOk;
    } catch (const CLI::Success&) {
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (*build) {
            const PolytopeModel model = build_model(build_opts);
            const auto path = resolve_output(build_out, "polytope-" + build_opts.variant + ".json");
            io::atomic_write(path, io::to_json(model, io::header_json(build_opts.to_json())).dump(2) + "\n");
            print_saturation(out, model);
            out << "wrote " << path.string() << '\n';
            return kExitOk;
        }

        if (*verify) {
            const io::RawModel raw = io::raw_model_from_json(io::read_json_file(verify_in));
            io::json points = io::json::array();
            std::vector<std::size_t> audited;
            bool all_passed = true;
            for (std::size_t i = 0; i < raw.points.size(); ++i) {
                const PointAudit a = audit_point(raw.points[i].values, raw.constraints);
                io::json p = {{"label", raw.points[i].label},
                              {"audit",
                               {{"nonnegative", a.nonnegative},
                                {"normalized", a.normalized},
                                {"no_signaling", a.no_signaling},
                                {"within_constraints", a.within_constraints}}}};
                if (a.passed())
                    audited.push_back(i);
                else
                    all_passed = false;
                p["passed"] = a.passed();
                points.push_back(std::move(p));
            }

            // Extremality among the points that passed the audit.
            io::RawModel good;
            good.constraints = raw.constraints;
            good.provenance = raw.provenance;
            for (std::size_t i : audited)
                good.points.push_back(raw.points[i]);
            const ExtremalityReport ext = verify_extremality(io::model_from_raw(good));
            for (std::size_t k = 0; k < audited.size(); ++k) {
                io::json& p = points[audited[k]];
                p["extremality_margin"] = ext.points[k].margin;
                p["passed"] = ext.points[k].passed;
                all_passed = all_passed && ext.points[k].passed;
            }

            std::size_t failed = 0;
            for (const io::json& p : points) {
                if (!p["passed"].get<bool>()) {
                    ++failed;
                    out << "FAIL " << p["label"].get<std::string>()
                        << (p.contains("extremality_margin") ? " (not extreme)" : " (audit)") << '\n';
                }
            }
            out << "points: " << raw.points.size() << ", failed: " << failed << '\n';
            if (!verify_out.empty()) {
                const io::json report = {
                    {"header", io::header_json({{"input", verify_in}})},
                    {"all_passed", all_passed},
                    {"points", points}};
                io::atomic_write(verify_out, report.dump(2) + "\n");
                out << "wrote " << verify_out << '\n';
            }
            return all_passed ? kExitOk : kExitValidation;
        }

        if (*certify) {
            const CertificationConfig cfg = cert_opts.config();
            cfg.validate();
            const std::vector<double> grid = parse_grid(cert_opts.beta_grid);
            PolytopeModel model;
            io::json config = cert_opts.to_json();
            config["scenario"] = cert_scenario;
            if (!cert_model.empty()) {
                model = io::model_from_json(io::read_json_file(cert_model));
                config["model_file"] = cert_model;
            } else {
                model = build_model(cert_build);
                config["model"] = cert_build.to_json();
            }
            const TrialDistribution trial{scenario_by_name(cert_scenario), SettingsDistribution::uniform()};
            const CertificationReport report = sweep_beta(model, trial, cfg, grid, cert_opts.jobs);

            std::vector<io::SweepCsvRow> rows;
            for (const BetaTracePoint& pt : report.trace)
                rows.push_back({std::nullopt, pt});
            const auto csv_path = resolve_output(cert_csv, "certify-trace.csv");
            const auto summary_path = resolve_output(cert_summary, "certify-summary.json");
            io::json summary = io::to_json(report, cfg);
            summary["header"] = io::header_json(config);
            summary["points"] = model.size();
            io::atomic_write(csv_path, io::sweep_csv(rows, config));
            io::atomic_write(summary_path, summary.dump(2) + "\n");

            out << "points: " << model.size() << '\n';
            if (report.failures > 0)
                err << "warning: " << report.failures << " grid point(s) failed; see the trace\n";
            if (!report.found) {
                err << "error: no grid point produced a PEF\n";
                return kExitNumerical;
            }
            out << "best beta: " << io::format_number(report.beta) << '\n'
                << "expected ln F: " << io::format_number(report.expected_log) << '\n'
                << "bits: " << io::format_number(report.bits) << '\n'
                << "wrote " << csv_path.string() << ", " << summary_path.string() << '\n';

            if (!cert_solver_trace.empty()) {
                std::ostringstream trace;
                solver::ConcaveOptions opts;
                opts.trace = &trace;
                optimize_pef(model, trial, report.beta, opts);
                io::atomic_write(cert_solver_trace, trace.str());
            }
            return kExitOk;
        }

        if (*sweep) {
            const CertificationConfig cfg = sweep_opts.config();
            cfg.validate();
            const std::vector<double> alphas = parse_grid(alpha_grid);
            const std::vector<double> betas = parse_grid(sweep_opts.beta_grid);
            const std::vector<AlphaRow> table = sweep_alpha(alphas, trial_alpha, cfg, betas, sweep_opts.jobs);

            io::json config = sweep_opts.to_json();
            config["alpha_grid"] = alpha_grid;
            config["trial_alpha"] = trial_alpha;
            std::vector<io::SweepCsvRow> rows;
            const AlphaRow* best = nullptr;
            for (const AlphaRow& r : table) {
                BetaTracePoint pt;
                pt.beta = r.report.beta;
                pt.expected_log = r.report.expected_log;
                pt.bits = r.report.bits;
                pt.ok = r.report.found;
                pt.status = r.report.found ? (r.report.failures ? "partial" : "converged") : "failed";
                rows.push_back({r.alpha, pt});
                if (r.report.found && (!best || r.report.bits > best->report.bits))
                    best = &r;
            }
            const auto csv_path = resolve_output(sweep_csv_path, "sweep-alpha.csv");
            io::atomic_write(csv_path, io::sweep_csv(rows, config));
            if (!best) {
                err << "error: no alpha produced a PEF\n";
                return kExitNumerical;
            }
            io::json summary = {{"header", io::header_json(config)},
                                {"argmax_alpha", best->alpha},
                                {"best", io::to_json(best->report, cfg)["best"]}};
            const auto summary_path = resolve_output(sweep_summary, "sweep-alpha-summary.json");
            io::atomic_write(summary_path, summary.dump(2) + "\n");
            for (const io::SweepCsvRow& r : rows)
                out << "alpha " << io::format_number(*r.alpha) << ": "
                    << io::format_number(r.point.bits) << " bits at beta "
                    << io::format_number(r.point.beta) << '\n';
            out << "argmax alpha: " << io::format_number(best->alpha) << '\n'
                << "wrote " << csv_path.string() << ", " << summary_path.string() << '\n';
            return kExitOk;
        }

        if (*dump) {
            const Behavior p = scenario_by_name(dump_name);
            io::json j = io::to_json(p);
            j["name"] = dump_name;
            j["header"] = io::header_json({{"scenario", dump_name}});
            if (dump_out.empty()) {
                out << j.dump(2) << '\n';
            } else {
                io::atomic_write(dump_out, j.dump(2) + "\n");
                out << "wrote " << dump_out << '\n';
            }
            return kExitOk;
        }
    } catch (const SolverError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const io::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

} // namespace tsirelson::cli

#endif
