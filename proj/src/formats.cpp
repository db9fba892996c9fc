#include "clickwitness/formats.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace clickwitness {

namespace {

constexpr const char* kStatisticsStamp = "# clickwitness statistics v1";
constexpr const char* kReportStamp = "# clickwitness report v1";

[[noreturn]] void parse_fail(std::size_t line_number, const std::string& what) {
    std::ostringstream msg;
    msg << "line " << line_number << ": " << what;
    throw ParseError(msg.str());
}

bool parse_int(const std::string& token, long long& value) {
    std::istringstream in(token);
    in >> value;
    return static_cast<bool>(in) && in.eof();
}

bool parse_real(const std::string& token, double& value) {
    std::istringstream in(token);
    in >> value;
    return static_cast<bool>(in) && in.eof();
}

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> tokens;
    std::string token;
    while (in >> token) tokens.push_back(std::move(token));
    return tokens;
}

// Parses `key=<int>` returning the integer; `allow_none` admits `key=none`.
long long parse_keyed_int(const std::string& token, const std::string& key,
                          std::size_t line_number, bool* is_none = nullptr) {
    std::string prefix = key + "=";
    if (token.rfind(prefix, 0) != 0) {
        parse_fail(line_number, "expected `" + prefix + "...`, got `" + token + "`");
    }
    std::string payload = token.substr(prefix.size());
    if (is_none != nullptr && payload == "none") {
        *is_none = true;
        return 0;
    }
    long long value = 0;
    if (!parse_int(payload, value)) {
        parse_fail(line_number, "cannot parse integer in `" + token + "`");
    }
    if (is_none != nullptr) *is_none = false;
    return value;
}

struct HeaderNK {
    int n_detectors;
    int outcome_count;
};

HeaderNK parse_nk(const std::vector<std::string>& tokens, std::size_t line_number) {
    if (tokens.size() < 2) parse_fail(line_number, "expected `N=<int> K=<int>` header");
    long long n = parse_keyed_int(tokens[0], "N", line_number);
    long long k = parse_keyed_int(tokens[1], "K", line_number);
    if (n < 2 || n > 64) parse_fail(line_number, "detector count N out of range");
    if (k < 1 || k > 255) parse_fail(line_number, "outcome bound K out of range");
    return {static_cast<int>(n), static_cast<int>(k) + 1};
}

} // namespace

std::string format_double(double value) {
    if (value == 0.0) value = 0.0; // normalize -0
    std::ostringstream out;
    out << std::setprecision(12) << value;
    return out.str();
}

void write_statistics(std::ostream& out, const ClickStatistics& stats) {
    out << kStatisticsStamp << '\n';
    out << "N=" << stats.detector_count() << " K=" << stats.outcome_count() - 1 << '\n';
    for (const auto& [config, prob] : stats.table()) {
        for (int count : config.counts) out << count << ' ';
        out << format_double(prob) << '\n';
    }
}

ClickStatistics read_statistics(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kStatisticsStamp) {
        parse_fail(1, "missing statistics stamp");
    }
    if (!std::getline(in, line)) parse_fail(2, "missing `N= K=` header");
    auto header = parse_nk(tokenize(line), 2);

    ClickStatistics::Table table;
    std::size_t line_number = 2;
    while (std::getline(in, line)) {
        ++line_number;
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() != static_cast<std::size_t>(header.outcome_count) + 1) {
            parse_fail(line_number, "expected K+1 counts and a probability");
        }
        ClickConfiguration config;
        config.counts.reserve(static_cast<std::size_t>(header.outcome_count));
        for (int k = 0; k < header.outcome_count; ++k) {
            long long count = 0;
            if (!parse_int(tokens[static_cast<std::size_t>(k)], count) || count < 0) {
                parse_fail(line_number, "bad configuration count `" +
                                            tokens[static_cast<std::size_t>(k)] + "`");
            }
            config.counts.push_back(static_cast<int>(count));
        }
        double prob = 0.0;
        if (!parse_real(tokens.back(), prob)) {
            parse_fail(line_number, "bad probability `" + tokens.back() + "`");
        }
        if (!table.emplace(std::move(config), prob).second) {
            parse_fail(line_number, "duplicate configuration");
        }
    }
    return ClickStatistics(header.n_detectors, header.outcome_count, std::move(table));
}

void write_records(std::ostream& out, const ShotRecords& records) {
    out << "N=" << records.detector_count() << " K=" << records.outcome_count() - 1 << " seed=";
    if (records.seed()) {
        out << *records.seed();
    } else {
        out << "none";
    }
    out << '\n';
    for (std::int64_t i = 0; i < records.shot_count(); ++i) {
        auto shot = records.shot(i);
        for (int d = 0; d < records.detector_count(); ++d) {
            if (d > 0) out << ' ';
            out << static_cast<int>(shot[static_cast<std::size_t>(d)]);
        }
        out << '\n';
    }
}

ShotRecords read_records(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) parse_fail(1, "empty records file");
    auto tokens = tokenize(line);
    if (tokens.size() != 3) parse_fail(1, "expected `N=<int> K=<int> seed=<int|none>` header");
    auto header = parse_nk(tokens, 1);
    bool seed_none = false;
    long long seed = parse_keyed_int(tokens[2], "seed", 1, &seed_none);

    std::vector<std::uint8_t> outcomes;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        auto shot_tokens = tokenize(line);
        if (shot_tokens.empty()) continue;
        if (shot_tokens.size() != static_cast<std::size_t>(header.n_detectors)) {
            parse_fail(line_number, "expected one outcome per detector");
        }
        for (const auto& token : shot_tokens) {
            long long outcome = 0;
            if (!parse_int(token, outcome)) {
                parse_fail(line_number, "bad outcome `" + token + "`");
            }
            if (outcome < 0 || outcome >= header.outcome_count) {
                std::ostringstream msg;
                msg << "outcome " << outcome << " outside 0.." << header.outcome_count - 1;
                parse_fail(line_number, msg.str());
            }
            outcomes.push_back(static_cast<std::uint8_t>(outcome));
        }
    }
    if (outcomes.empty()) parse_fail(line_number + 1, "records file has no shots");
    return ShotRecords(header.n_detectors, header.outcome_count, std::move(outcomes),
                       seed_none ? std::nullopt : std::optional<std::int64_t>(seed));
}

void write_report(std::ostream& out, const WitnessReport& report, int detector_count,
                  const EstimatedWitness* estimate) {
    int outcome_count = static_cast<int>(report.matrix_m.rows());
    out << kReportStamp << '\n';
    out << "N=" << detector_count << " K=" << outcome_count - 1 << '\n';
    if (estimate != nullptr) {
        out << "shots " << estimate->shot_count << '\n';
        out << "bootstrap_resamples " << estimate->bootstrap_resamples << '\n';
        out << "confidence " << format_double(estimate->confidence) << '\n';
    }
    out << "matrix\n";
    for (int r = 0; r < outcome_count; ++r) {
        for (int c = 0; c < outcome_count; ++c) {
            if (c > 0) out << ' ';
            out << format_double(report.matrix_m(r, c));
        }
        out << '\n';
    }
    out << "eigenvalues";
    for (int i = 0; i < report.eigenvalues.size(); ++i) {
        out << ' ' << format_double(report.eigenvalues(i));
    }
    out << '\n';
    out << "min_eigenvalue " << format_double(report.min_eigenvalue) << '\n';
    if (report.min_eigenvalue_stderr) {
        out << "min_eigenvalue_stderr " << format_double(*report.min_eigenvalue_stderr) << '\n';
    }
    if (estimate != nullptr) {
        out << "ci_low " << format_double(estimate->ci_low) << '\n';
        out << "ci_high " << format_double(estimate->ci_high) << '\n';
        if (estimate->systematic_shift) {
            out << "systematic_shift " << format_double(*estimate->systematic_shift) << '\n';
        }
    }
    out << "verdict " << to_string(report.verdict) << '\n';
}

DetectorResponse read_detector_response(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_number = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_number;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        std::vector<double> row;
        row.reserve(tokens.size());
        for (const auto& token : tokens) {
            double value = 0.0;
            if (!parse_real(token, value)) {
                parse_fail(line_number, "bad response entry `" + token + "`");
            }
            row.push_back(value);
        }
        if (width == 0) {
            width = row.size();
        } else if (row.size() != width) {
            parse_fail(line_number, "ragged response matrix");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("response matrix file has no rows");
    Eigen::MatrixXd response(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            response(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return DetectorResponse(std::move(response));
}

InputKind detect_input_kind(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input file");
    if (line == kStatisticsStamp) return InputKind::statistics;
    if (line.rfind("N=", 0) == 0) return InputKind::records;
    throw ParseError("unrecognized input header: `" + line + "`");
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open `" + path + "`");
    return in;
}

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
    auto in = open_or_throw(path);
    try {
        return fn(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace

ClickStatistics read_statistics_file(const std::string& path) {
    return with_path(path, [](std::istream& in) { return read_statistics(in); });
}

ShotRecords read_records_file(const std::string& path) {
    return with_path(path, [](std::istream& in) { return read_records(in); });
}

DetectorResponse read_detector_response_file(const std::string& path) {
    return with_path(path, [](std::istream& in) { return read_detector_response(in); });
}

InputKind detect_input_kind_file(const std::string& path) {
    return with_path(path, [](std::istream& in) { return detect_input_kind(in); });
}

} // namespace clickwitness
