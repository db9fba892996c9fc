#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clickwitness/config.hpp"
#include "clickwitness/estimation.hpp"
#include "clickwitness/formats.hpp"
#include "clickwitness/scan.hpp"

namespace {

using namespace clickwitness;

// Exit codes: 0 success / nonclassical verdict, 1 consistent-with-classical,
// 2 parse or validation failure, 3 truncation failure, 4 anything else.
constexpr int kExitNonclassical = 0;
constexpr int kExitClassical = 1;
constexpr int kExitParse = 2;
constexpr int kExitTruncation = 3;
constexpr int kExitOther = 4;

struct Cli {
    std::string config_path;
    std::string out_path;
    std::string input_path;
    std::string columns_spec;
    std::int64_t seed = 0;
    std::int64_t shots = 0;
    int bootstrap = 1000;
    double confidence = 0.95;
    double tail_tol = kDefaultTailTolerance;
    int outcome_bound = 0;

    // Every subcommand registers its own --seed/--shots/... option bound to
    // the fields above; only the parsed subcommand can have a nonzero count.
    std::vector<CLI::Option*> seed_opts;
    std::vector<CLI::Option*> shots_opts;
    std::vector<CLI::Option*> bootstrap_opts;
    std::vector<CLI::Option*> confidence_opts;
    std::vector<CLI::Option*> tail_opts;
};

bool option_given(const std::vector<CLI::Option*>& options) {
    for (const CLI::Option* option : options) {
        if (option->count() > 0) return true;
    }
    return false;
}

void add_common_options(CLI::App* cmd, Cli& cli, bool with_config) {
    if (with_config) {
        cmd->add_option("--config", cli.config_path, "Experiment config file")->required();
    }
    cmd->add_option("--out", cli.out_path, "Output path (default: stdout)");
    cli.seed_opts.push_back(cmd->add_option("--seed", cli.seed, "Override estimation.seed"));
    cli.shots_opts.push_back(
        cmd->add_option("--shots", cli.shots, "Override estimation.shots"));
    cli.bootstrap_opts.push_back(
        cmd->add_option("--bootstrap", cli.bootstrap, "Override estimation.bootstrap"));
    cli.confidence_opts.push_back(
        cmd->add_option("--confidence", cli.confidence, "Override estimation.confidence"));
    cli.tail_opts.push_back(
        cmd->add_option("--tail-tol", cli.tail_tol, "Override truncation.tail_tol"));
}

ExperimentConfig load_config(const Cli& cli) {
    ExperimentConfig config = parse_config_file(cli.config_path);
    if (option_given(cli.seed_opts)) config.estimation.seed = cli.seed;
    if (option_given(cli.shots_opts)) config.estimation.shots = cli.shots;
    if (option_given(cli.bootstrap_opts)) config.estimation.bootstrap = cli.bootstrap;
    if (option_given(cli.confidence_opts)) config.estimation.confidence = cli.confidence;
    if (option_given(cli.tail_opts)) config.truncation.tail_tol = cli.tail_tol;
    return config;
}

template <typename Fn>
void write_output(const std::string& out_path, Fn&& fn) {
    if (out_path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ParseError("cannot open output `" + out_path + "`");
    fn(out);
}

int run_simulate(const Cli& cli) {
    auto stats = simulate_config(load_config(cli));
    write_output(cli.out_path, [&](std::ostream& out) { write_statistics(out, stats); });
    return 0;
}

int run_sample(const Cli& cli) {
    auto config = load_config(cli);
    if (config.estimation.shots < 1) {
        throw ValidationError("sample: estimation.shots must be >= 1 (set --shots)");
    }
    auto stats = simulate_config(config);
    auto records = sample_records(stats, config.estimation.shots, config.estimation.seed);
    write_output(cli.out_path, [&](std::ostream& out) { write_records(out, records); });
    return 0;
}

int run_witness(const Cli& cli) {
    int exit_code = 0;
    if (detect_input_kind_file(cli.input_path) == InputKind::statistics) {
        auto stats = read_statistics_file(cli.input_path);
        auto moments = statistics_moments(stats);
        auto report =
            build_witness_matrix(moments.means, moments.covariances, stats.detector_count());
        write_output(cli.out_path, [&](std::ostream& out) {
            write_report(out, report, stats.detector_count());
        });
        exit_code =
            report.verdict == Verdict::nonclassical ? kExitNonclassical : kExitClassical;
    } else {
        auto records = read_records_file(cli.input_path);
        std::optional<std::int64_t> seed;
        if (option_given(cli.seed_opts)) seed = cli.seed;
        auto estimate = estimate_witness(records, cli.bootstrap, cli.confidence, seed);
        write_output(cli.out_path, [&](std::ostream& out) {
            write_report(out, estimate.report, records.detector_count(), &estimate);
        });
        exit_code = estimate.report.verdict == Verdict::nonclassical ? kExitNonclassical
                                                                     : kExitClassical;
    }
    return exit_code;
}

int run_herald_scan(const Cli& cli) {
    auto config = load_config(cli);
    auto points = herald_scan(config);
    write_output(cli.out_path,
                 [&](std::ostream& out) { write_herald_scan(out, config, points); });
    return 0;
}

int run_power_scan(const Cli& cli) {
    auto config = load_config(cli);
    auto points = power_scan(config);
    write_output(cli.out_path,
                 [&](std::ostream& out) { write_power_scan(out, config, points); });
    return 0;
}

std::vector<std::size_t> parse_columns(const std::string& spec) {
    std::string spaced = spec;
    for (char& c : spaced) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(spaced);
    std::vector<std::size_t> columns;
    long long column = 0;
    while (in >> column) {
        if (column < 1) throw ParseError("ingest: column indices are 1-based");
        columns.push_back(static_cast<std::size_t>(column - 1));
    }
    if (!in.eof() || columns.empty()) {
        throw ParseError("ingest: cannot parse --columns `" + spec + "`");
    }
    return columns;
}

int run_ingest(const Cli& cli) {
    if (cli.outcome_bound < 1 || cli.outcome_bound > 255) {
        throw ValidationError("ingest: --k must lie in 1..255");
    }
    int outcome_count = cli.outcome_bound + 1;

    std::ifstream in(cli.input_path);
    if (!in) throw ParseError("cannot open `" + cli.input_path + "`");

    std::optional<std::vector<std::size_t>> columns;
    if (!cli.columns_spec.empty()) columns = parse_columns(cli.columns_spec);

    std::vector<std::uint8_t> outcomes;
    std::vector<std::string> bad_rows;
    std::size_t line_number = 0;
    int detector_count = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_number;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::vector<std::string> row;
        std::string token;
        while (tokens >> token) row.push_back(std::move(token));
        if (row.empty()) continue;

        if (!columns) {
            // Default mapping: every column is a detector.
            columns = std::vector<std::size_t>(row.size());
            for (std::size_t i = 0; i < row.size(); ++i) (*columns)[i] = i;
        }
        if (detector_count == 0) detector_count = static_cast<int>(columns->size());

        std::ostringstream complaint;
        std::vector<std::uint8_t> shot;
        for (std::size_t column : *columns) {
            if (column >= row.size()) {
                complaint << "line " << line_number << ": needs column " << column + 1
                          << " but has " << row.size();
                break;
            }
            long long outcome = 0;
            std::istringstream value(row[column]);
            value >> outcome;
            if (!value || !value.eof()) {
                complaint << "line " << line_number << ": bad outcome `" << row[column] << "`";
                break;
            }
            if (outcome < 0 || outcome > cli.outcome_bound) {
                complaint << "line " << line_number << ": outcome " << outcome
                          << " outside 0.." << cli.outcome_bound;
                break;
            }
            shot.push_back(static_cast<std::uint8_t>(outcome));
        }
        if (!complaint.str().empty()) {
            bad_rows.push_back(complaint.str());
            continue;
        }
        outcomes.insert(outcomes.end(), shot.begin(), shot.end());
    }

    if (!bad_rows.empty()) {
        for (const auto& row : bad_rows) std::cerr << "error: " << row << '\n';
        std::ostringstream msg;
        msg << "ingest: rejected " << bad_rows.size() << " row(s) of `" << cli.input_path
            << "`";
        throw ParseError(msg.str());
    }
    if (outcomes.empty()) throw ParseError("ingest: no shots in `" + cli.input_path + "`");

    ShotRecords records(detector_count, outcome_count, std::move(outcomes), std::nullopt);
    write_output(cli.out_path, [&](std::ostream& out) { write_records(out, records); });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certifies nonclassical light from multiplexed click-counting data"};
    app.require_subcommand(1);
    Cli cli;

    auto* simulate =
        app.add_subcommand("simulate", "Write the exact click statistics of a configuration");
    add_common_options(simulate, cli, true);

    auto* sample = app.add_subcommand("sample", "Sample a records file from a configuration");
    add_common_options(sample, cli, true);

    auto* witness = app.add_subcommand(
        "witness", "Witness matrix, spectrum, and verdict from statistics or records");
    witness->add_option("input", cli.input_path, "Statistics or records file")->required();
    add_common_options(witness, cli, false);

    auto* herald = app.add_subcommand(
        "herald-scan", "Minimal eigenvalue per heralding bin at fixed pump parameter");
    add_common_options(herald, cli, true);

    auto* power = app.add_subcommand(
        "power-scan", "Minimal eigenvalue over a pump-parameter grid per heralding bin");
    add_common_options(power, cli, true);

    auto* ingest =
        app.add_subcommand("ingest", "Normalize a raw per-shot outcome file into records");
    ingest->add_option("input", cli.input_path, "Raw per-shot outcome file")->required();
    ingest->add_option("--out", cli.out_path, "Output path (default: stdout)");
    ingest->add_option("--k", cli.outcome_bound, "Largest legal outcome bin K")->required();
    ingest->add_option("--columns", cli.columns_spec,
                       "1-based columns holding detector outcomes (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try {
        if (app.got_subcommand(simulate)) return run_simulate(cli);
        if (app.got_subcommand(sample)) return run_sample(cli);
        if (app.got_subcommand(witness)) return run_witness(cli);
        if (app.got_subcommand(herald)) return run_herald_scan(cli);
        if (app.got_subcommand(power)) return run_power_scan(cli);
        if (app.got_subcommand(ingest)) return run_ingest(cli);
        std::cerr << "error: no subcommand selected\n";
        return kExitParse;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const TruncationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTruncation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
}
