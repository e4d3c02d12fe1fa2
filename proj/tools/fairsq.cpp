// fairsq: group-fairness verifier for piecewise-linear decision programs.
//
//   fairsq verify FILE [--epsilon F] [--budget N] [--gap F] [--mc-check N] ...
//   fairsq check-certificate CERT SOURCE
//   fairsq fmt FILE

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairsq/fairsq.hpp"

namespace {

enum Exit : int { ExitFair = 0, ExitUnfair = 1, ExitUnknown = 2, ExitError = 3 };

std::optional<std::string> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        return std::nullopt;
    return ss.str();
}

double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

struct VerifyArgs {
    std::string file;
    std::optional<double> epsilon;
    std::size_t budget = 200000;
    double gap = 1e-4;
    double truncation_sigmas = 10.0;
    std::uint64_t mc_samples = 0;
    std::uint64_t seed = 42;
    std::string certificate_path;
    bool dump_paths = false;
    bool human = false;
    unsigned workers = 1;
};

// Parses and validates; prints diagnostics and returns nullopt on failure.
std::optional<fairsq::dsl::ValidatedTask> load_task(const std::string& file, const std::string& text,
    std::vector<std::string>& warnings)
{
    fairsq::dsl::VerificationTask parsed;
    try {
        parsed = fairsq::dsl::parse_source(text);
    } catch (const fairsq::dsl::SyntaxError& e) {
        std::cerr << file << ":" << e.what() << "\n";
        return std::nullopt;
    }
    auto result = fairsq::dsl::validate(parsed);
    for (const auto& d : result.diagnostics) {
        std::cerr << file << ":" << d.to_string() << "\n";
        if (d.severity == fairsq::dsl::Severity::Warning)
            warnings.push_back(d.to_string());
    }
    if (!result.ok())
        return std::nullopt;
    return std::move(*result.task);
}

void print_human(std::ostream& out, const fairsq::Verdict& v, const std::optional<fairsq::McEstimate>& mc)
{
    char line[256];
    out << "verdict: " << fairsq::to_string(v.outcome) << "\n";
    auto ext = [](double x) { return std::isinf(x) ? std::string("inf") : fairsq::dsl::format_number(x); };
    out << "ratio:   [" << ext(v.ratio.lower) << ", " << ext(v.ratio.upper) << "]  threshold "
        << fairsq::dsl::format_number(1.0 - v.epsilon) << "\n\n";
    std::snprintf(line, sizeof line, "%-28s %-14s %-14s %-10s %s\n", "event", "lower", "upper", "splits",
        mc ? "mc estimate" : "");
    out << line;
    for (auto e : fairsq::all_events) {
        const auto& b = v.at(e);
        std::string mc_col;
        if (mc)
            mc_col = fairsq::dsl::format_number(mc->at(e).estimate);
        std::snprintf(line, sizeof line, "%-28s %-14.10f %-14.10f %-10zu %s\n", std::string(fairsq::event_name(e)).c_str(),
            b.lower, b.upper, b.splits_used, mc_col.c_str());
        out << line;
    }
    if (mc) {
        out << "\nmc: " << mc->samples << " samples, seed " << mc->seed << ", " << mc->generator
            << ", consistent: " << (fairsq::mc_consistent(v, *mc) ? "yes" : "no") << "\n";
    }
}

int cmd_verify(const VerifyArgs& args)
{
    const auto t_parse = std::chrono::steady_clock::now();
    const auto text = read_file(args.file);
    if (!text) {
        std::cerr << "fairsq: cannot read " << args.file << "\n";
        return ExitError;
    }
    std::vector<std::string> warnings;
    auto task = load_task(args.file, *text, warnings);
    if (!task)
        return ExitError;
    fairsq::PhaseTimes times;
    times.parse = elapsed_ms(t_parse);

    try {
        const auto t_sym = std::chrono::steady_clock::now();
        const fairsq::PathSet paths = fairsq::enumerate_paths(*task);
        times.symexec = elapsed_ms(t_sym);
        if (args.dump_paths) {
            for (const auto& p : paths.paths)
                std::cerr << fairsq::format_path(p, paths) << "\n";
        }

        fairsq::FairnessOptions opts;
        opts.budget.max_splits = args.budget;
        opts.budget.gap_target = args.gap;
        opts.volume.truncation_sigmas = args.truncation_sigmas;
        opts.volume.workers = args.workers;
        opts.volume.record_boxes = !args.certificate_path.empty();
        const double epsilon = args.epsilon.value_or(task->task.spec.epsilon);

        const auto t_vol = std::chrono::steady_clock::now();
        const fairsq::Verdict verdict = fairsq::check_fairness(paths, epsilon, opts);
        times.volume = elapsed_ms(t_vol);

        std::optional<fairsq::McEstimate> mc;
        if (args.mc_samples > 0) {
            const auto t_mc = std::chrono::steady_clock::now();
            mc = fairsq::mc_estimate(*task, args.mc_samples, args.seed, args.workers);
            times.mc = elapsed_ms(t_mc);
        }

        if (!args.certificate_path.empty()) {
            if (verdict.outcome == fairsq::Outcome::Unknown) {
                std::cerr << "fairsq: verdict unknown, no certificate written\n";
            } else {
                std::ofstream out(args.certificate_path, std::ios::binary);
                out << fairsq::to_json(fairsq::emit_certificate(verdict, *text)).dump() << "\n";
                if (!out) {
                    std::cerr << "fairsq: cannot write " << args.certificate_path << "\n";
                    return ExitError;
                }
            }
        }

        if (args.human) {
            print_human(std::cout, verdict, mc);
        } else {
            fairsq::ReportConfig config{epsilon, args.truncation_sigmas, args.budget, args.gap, args.seed, args.workers};
            std::cout << fairsq::make_report(args.file, verdict, paths, config, times, mc, warnings).dump(2) << "\n";
        }
        switch (verdict.outcome) {
        case fairsq::Outcome::Fair: return ExitFair;
        case fairsq::Outcome::Unfair: return ExitUnfair;
        case fairsq::Outcome::Unknown: return ExitUnknown;
        }
    } catch (const std::exception& e) {
        std::cerr << "fairsq: " << e.what() << "\n";
        return ExitError;
    }
    return ExitError;
}

int cmd_check_certificate(const std::string& cert_path, const std::string& source_path)
{
    const auto cert_text = read_file(cert_path);
    const auto source = read_file(source_path);
    if (!cert_text || !source) {
        std::cerr << "fairsq: cannot read " << (!cert_text ? cert_path : source_path) << "\n";
        return ExitError;
    }
    fairsq::Certificate cert;
    try {
        cert = fairsq::certificate_from_json(nlohmann::json::parse(*cert_text));
    } catch (const std::exception& e) {
        std::cerr << "fairsq: cannot parse certificate " << cert_path << ": " << e.what() << "\n";
        return ExitError;
    }
    const auto result = fairsq::verify_certificate(cert, *source);
    if (!result.accepted()) {
        std::cerr << "rejected: " << fairsq::to_string(result.reason) << ": " << result.detail << "\n";
        return 1;
    }
    std::cout << "accepted: " << fairsq::to_string(cert.verdict) << "\n";
    return 0;
}

int cmd_fmt(const std::string& file)
{
    const auto text = read_file(file);
    if (!text) {
        std::cerr << "fairsq: cannot read " << file << "\n";
        return ExitError;
    }
    try {
        std::cout << fairsq::dsl::pretty_print(fairsq::dsl::parse_source(*text));
    } catch (const fairsq::dsl::SyntaxError& e) {
        std::cerr << file << ":" << e.what() << "\n";
        return ExitError;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"fairsq: group-fairness verifier for piecewise-linear decision programs"};
    app.set_version_flag("--version", FAIRSQ_VERSION);
    app.require_subcommand(1);

    VerifyArgs v;
    auto* verify = app.add_subcommand("verify", "Decide group fairness of the program in FILE");
    verify->add_option("file", v.file, "Input file (model, program and spec)")->required();
    verify->add_option("--epsilon", v.epsilon, "Fairness tolerance; overrides the spec block")->check(CLI::Range(0.0, 1.0));
    verify->add_option("--budget", v.budget, "Maximum splits per event region")->capture_default_str();
    verify->add_option("--gap", v.gap, "Stop refining a region once upper - lower <= gap")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    verify->add_option("--truncation-sigmas", v.truncation_sigmas, "Root box half-width in standard deviations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    verify->add_option("--mc-check", v.mc_samples, "Cross-check with N Monte Carlo samples");
    verify->add_option("--seed", v.seed, "Monte Carlo seed")->capture_default_str();
    verify->add_option("--emit-certificate", v.certificate_path, "Write a certificate for a decided verdict");
    verify->add_flag("--dump-paths", v.dump_paths, "Print path conditions to standard error");
    verify->add_flag("--human", v.human, "Print a table instead of the JSON report");
    verify->add_flag("--json{false}", v.human, "Print the JSON report (default)");
    verify->add_option("--workers", v.workers, "Worker threads for refinement and sampling")
        ->check(CLI::Range(1U, 256U))
        ->capture_default_str();

    std::string cert_path, source_path;
    auto* check = app.add_subcommand("check-certificate", "Re-verify a certificate against its source");
    check->add_option("certificate", cert_path, "Certificate JSON")->required();
    check->add_option("source", source_path, "Original input file")->required();

    std::string fmt_file;
    auto* fmt = app.add_subcommand("fmt", "Print FILE in canonical layout");
    fmt->add_option("file", fmt_file, "Input file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ExitError;
    }

    if (*verify)
        return cmd_verify(v);
    if (*check)
        return cmd_check_certificate(cert_path, source_path);
    if (*fmt)
        return cmd_fmt(fmt_file);
    return ExitError;
}
