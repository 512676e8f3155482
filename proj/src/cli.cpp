#include "fastcox/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fastcox/bench.hpp"
#include "fastcox/concordance.hpp"
#include "fastcox/csv.hpp"
#include "fastcox/dataset.hpp"
#include "fastcox/errors.hpp"
#include "fastcox/loss.hpp"
#include "fastcox/model.hpp"

namespace fastcox::cli {
namespace {

using json = nlohmann::ordered_json;

// Thrown for flag values that parse but are out of range; maps to exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string render_scalar(const json& v) {
    if (v.is_null()) return "NA";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return csv::format_number(v.get<double>());
    return v.dump();
}

void render(std::ostream& os, const json& obj, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (const auto& [key, value] : obj.items()) {
        if (value.is_object()) {
            os << pad << key << ":\n";
            render(os, value, indent + 2);
        } else if (value.is_array() && !value.empty() && value.front().is_object()) {
            // Table: one column per key of the first row.
            std::vector<std::string> cols;
            for (const auto& [k, _] : value.front().items()) cols.push_back(k);
            std::vector<std::vector<std::string>> cells;
            std::vector<std::size_t> width;
            for (const auto& c : cols) width.push_back(c.size());
            for (const auto& row : value) {
                std::vector<std::string> line;
                for (std::size_t c = 0; c < cols.size(); ++c) {
                    line.push_back(row.contains(cols[c]) ? render_scalar(row[cols[c]]) : "");
                    width[c] = std::max(width[c], line.back().size());
                }
                cells.push_back(std::move(line));
            }
            os << pad << key << ":\n";
            auto emit = [&](const std::vector<std::string>& line) {
                os << pad << "  ";
                for (std::size_t c = 0; c < line.size(); ++c) {
                    if (c + 1 < line.size()) {
                        os << std::left << std::setw(static_cast<int>(width[c])) << line[c] << "  ";
                    } else {
                        os << line[c];
                    }
                }
                os << '\n';
            };
            emit(cols);
            for (const auto& line : cells) emit(line);
        } else if (value.is_array()) {
            os << pad << key << ":";
            for (const auto& v : value) os << ' ' << render_scalar(v);
            os << '\n';
        } else {
            os << pad << key << ": " << render_scalar(value) << '\n';
        }
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

struct DataFlags {
    std::string path;
    std::string time_col;
    std::string event_col;
    std::string features;  // comma-separated; empty = all remaining columns

    void add_to(CLI::App* app, bool with_features) {
        app->add_option("--data", path, "Input CSV file")->required();
        app->add_option("--time", time_col, "Duration column")->required();
        app->add_option("--event", event_col, "Event indicator column (1 = event observed)")->required();
        if (with_features) {
            app->add_option("--features", features, "Comma-separated feature columns (default: all others)");
        }
    }

    LoadOptions load_options() const {
        LoadOptions opts{time_col, event_col, std::nullopt};
        if (!features.empty()) opts.feature_columns = split_list(features);
        return opts;
    }

    void echo(json& params) const {
        params["data"] = path;
        params["time"] = time_col;
        params["event"] = event_col;
        if (!features.empty()) params["features"] = split_list(features);
    }
};

LoadResult load(const DataFlags& flags, RunReport& report, const LoadOptions& opts) {
    LoadResult loaded = load_csv(flags.path, opts);
    if (loaded.dropped_rows > 0) {
        report.warnings.push_back("dropped " + std::to_string(loaded.dropped_rows) +
                                  " rows with missing values");
    }
    return loaded;
}

TieMethod parse_ties(const std::string& name) {
    if (name == "breslow") return TieMethod::Breslow;
    if (name == "efron") return TieMethod::Efron;
    throw UsageError("--ties must be breslow or efron");
}

json coefficient_table(const std::vector<std::string>& names, const Eigen::VectorXd& beta) {
    json rows = json::array();
    for (std::size_t j = 0; j < names.size(); ++j) {
        rows.push_back({{"feature", names[j]}, {"beta", beta(static_cast<Eigen::Index>(j))}});
    }
    return rows;
}

// Scores come from a column of the data file if the name matches one,
// otherwise from a file with one number per line (optional header line).
std::vector<double> load_scores(const DataFlags& data, const std::string& scores, RunReport& report,
                                SurvivalDataset& ds) {
    const csv::Table header_probe = csv::read_file(data.path);
    if (header_probe.column(scores)) {
        LoadOptions opts{data.time_col, data.event_col, std::vector<std::string>{scores}};
        LoadResult loaded = load(data, report, opts);
        if (loaded.data.num_features() != 1) {
            throw InvalidInput("score column '" + scores + "' is not numeric");
        }
        ds = std::move(loaded.data);
        const auto& col = ds.features.col(0);
        return std::vector<double>(col.data(), col.data() + col.size());
    }

    LoadOptions opts{data.time_col, data.event_col, std::vector<std::string>{}};
    LoadResult loaded = load(data, report, opts);
    if (loaded.dropped_rows > 0) {
        throw InvalidInput("rows were dropped from the data file; cannot align an external score file");
    }
    ds = std::move(loaded.data);

    std::ifstream in(scores);
    if (!in) throw IoError("'" + scores + "' is neither a column of the data file nor a readable file");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto v = csv::parse_number(line);
        if (!v) {
            if (line_no == 1) continue;  // header
            throw ParseError("cannot parse score '" + line + "'", line_no);
        }
        values.push_back(*v);
    }
    if (values.size() != ds.size()) {
        throw InvalidInput("score file has " + std::to_string(values.size()) + " values for " +
                           std::to_string(ds.size()) + " samples");
    }
    return values;
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
}

struct OutputFlags {
    std::string out_path;
    bool json_stdout = false;

    void add_to(CLI::App* app) {
        app->add_option("--out", out_path, "Write the JSON report to this file");
        app->add_flag("--json", json_stdout, "Print the JSON report instead of text");
    }
};

}  // namespace

json RunReport::to_json() const {
    json doc;
    doc["command"] = command;
    doc["parameters"] = parameters;
    doc["results"] = results;
    doc["warnings"] = warnings;
    doc["wall_time_ms"] = wall_time_ms;
    return doc;
}

std::string RunReport::to_text() const {
    std::ostringstream os;
    os << "command: " << command << '\n';
    render(os, results, 0);
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cox proportional-hazards toolkit: loss, concordance, lasso paths, benchmarks"};
    app.name(args.empty() ? "fastcox" : args.front());
    app.require_subcommand(1);

    RunReport report;
    OutputFlags output;
    std::function<void()> action;
    // Bench writes its own report file; for it --out is not the RunReport.
    bool out_is_report = true;

    // fit
    DataFlags fit_data;
    double fit_lambda = 0.0;
    std::string fit_ties = "efron";
    bool fit_no_standardize = false;
    int fit_max_iters = FitOptions{}.max_iters;
    auto* fit_cmd = app.add_subcommand("fit", "Fit an L1-penalized linear Cox model at one lambda");
    fit_data.add_to(fit_cmd, true);
    fit_cmd->add_option("--lambda", fit_lambda, "L1 penalty strength (>= 0)")->required();
    fit_cmd->add_option("--ties", fit_ties, "Tie handling: breslow or efron");
    fit_cmd->add_flag("--no-standardize", fit_no_standardize, "Penalize raw rather than standardized coefficients");
    fit_cmd->add_option("--max-iters", fit_max_iters, "Iteration cap");
    output.add_to(fit_cmd);
    fit_cmd->callback([&] {
        action = [&] {
            if (!(fit_lambda >= 0.0) || !std::isfinite(fit_lambda)) throw UsageError("--lambda must be >= 0");
            if (fit_max_iters < 1) throw UsageError("--max-iters must be at least 1");
            FitOptions fopts;
            fopts.tie_method = parse_ties(fit_ties);
            fopts.standardize = !fit_no_standardize;
            fopts.max_iters = fit_max_iters;
            fit_data.echo(report.parameters);
            report.parameters["lambda"] = fit_lambda;
            report.parameters["ties"] = fit_ties;
            report.parameters["standardize"] = fopts.standardize;

            const SurvivalDataset ds = load(fit_data, report, fit_data.load_options()).data;
            const FitResult r = fit(ds.features, ds.durations, ds.events, fit_lambda, fopts);
            if (!r.converged) {
                report.warnings.push_back("fit did not converge within " + std::to_string(fopts.max_iters) +
                                          " iterations (KKT violation " + csv::format_number(r.kkt_violation) + ")");
            }
            report.results["n"] = ds.size();
            report.results["events"] = ds.event_count();
            report.results["lambda"] = fit_lambda;
            report.results["tie_method"] = to_string(fopts.tie_method);
            report.results["training_nll"] = r.nll;
            report.results["objective"] = r.objective;
            report.results["n_selected"] = static_cast<std::size_t>((r.beta.array() != 0.0).count());
            report.results["iterations"] = r.iterations;
            report.results["converged"] = r.converged;
            report.results["kkt_violation"] = r.kkt_violation;
            report.results["coefficients"] = coefficient_table(ds.feature_names, r.beta);
        };
    });

    // path
    DataFlags path_data;
    std::string path_ties = "efron";
    bool path_no_standardize = false;
    std::string path_lambda_start = "auto";
    double path_multiplier = PathOptions{}.path_multiplier;
    int path_cv = PathOptions{}.cv_folds;
    std::uint64_t path_seed = 0;
    std::size_t path_max_steps = PathOptions{}.max_steps;
    auto* path_cmd = app.add_subcommand("path", "Traverse a geometric lambda path with cross-validation");
    path_data.add_to(path_cmd, true);
    path_cmd->add_option("--ties", path_ties, "Tie handling: breslow or efron");
    path_cmd->add_flag("--no-standardize", path_no_standardize, "Penalize raw rather than standardized coefficients");
    path_cmd->add_option("--lambda-start", path_lambda_start, "First lambda, or 'auto' (lambda_max / 10)");
    path_cmd->add_option("--multiplier", path_multiplier, "Geometric step between lambdas (> 1)");
    path_cmd->add_option("--cv", path_cv, "Cross-validation folds (<= 1 disables)");
    path_cmd->add_option("--seed", path_seed, "Seed for fold assignment");
    path_cmd->add_option("--max-steps", path_max_steps, "Maximum path length");
    output.add_to(path_cmd);
    path_cmd->callback([&] {
        action = [&] {
            if (!(path_multiplier > 1.0) || !std::isfinite(path_multiplier)) {
                throw UsageError("--multiplier must exceed 1");
            }
            if (path_max_steps < 1) throw UsageError("--max-steps must be at least 1");
            PathOptions popts;
            popts.path_multiplier = path_multiplier;
            popts.cv_folds = path_cv;
            popts.seed = path_seed;
            popts.max_steps = path_max_steps;
            if (path_lambda_start != "auto") {
                const auto v = csv::parse_number(path_lambda_start);
                if (!v || *v <= 0.0) throw UsageError("--lambda-start must be a positive number or 'auto'");
                popts.lambda_start = *v;
            }
            FitOptions fopts;
            fopts.tie_method = parse_ties(path_ties);
            fopts.standardize = !path_no_standardize;

            path_data.echo(report.parameters);
            report.parameters["ties"] = path_ties;
            report.parameters["standardize"] = fopts.standardize;
            report.parameters["lambda_start"] = path_lambda_start;
            report.parameters["multiplier"] = path_multiplier;
            report.parameters["cv"] = path_cv;
            report.parameters["seed"] = path_seed;

            const SurvivalDataset ds = load(path_data, report, path_data.load_options()).data;
            const PathResult path = lasso_path(ds, popts, fopts);
            std::size_t unconverged = 0;
            json steps = json::array();
            for (std::size_t k = 0; k < path.steps.size(); ++k) {
                const auto& s = path.steps[k];
                unconverged += s.converged ? 0 : 1;
                steps.push_back({{"step", k},
                                 {"lambda", s.lambda},
                                 {"n_selected", s.n_selected},
                                 {"cv_cindex", number(s.cv_cindex)},
                                 {"cv_cindex_sd", number(s.cv_cindex_sd)},
                                 {"best", k == path.best_index}});
            }
            if (unconverged > 0) {
                report.warnings.push_back(std::to_string(unconverged) + " path steps did not converge");
            }
            if (!path.completed) {
                report.warnings.push_back("path stopped at max steps before all coefficients reached zero");
            }
            report.results["n"] = ds.size();
            report.results["events"] = ds.event_count();
            report.results["lambda_max"] = path.lambda_max;
            report.results["lambda_start"] = path.lambda_start;
            report.results["completed"] = path.completed;
            report.results["steps"] = std::move(steps);
            report.results["best_index"] = path.best_index;
            report.results["best_lambda"] = path.best_lambda;
            report.results["best_cv_cindex"] = number(path.steps[path.best_index].cv_cindex);
            report.results["best_coefficients"] = coefficient_table(ds.feature_names, path.best_beta);
        };
    });

    // eval
    DataFlags eval_data;
    std::string eval_scores;
    double eval_credit = 0.0;
    auto* eval_cmd = app.add_subcommand("eval", "Harrell's concordance index of risk scores");
    eval_data.add_to(eval_cmd, false);
    eval_cmd->add_option("--scores", eval_scores, "Score column of the data file, or a file with one score per line")
        ->required();
    eval_cmd->add_option("--tied-score-credit", eval_credit, "Credit for tied scores: 0 or 0.5");
    output.add_to(eval_cmd);
    eval_cmd->callback([&] {
        action = [&] {
            if (eval_credit != 0.0 && eval_credit != 0.5) throw UsageError("--tied-score-credit must be 0 or 0.5");
            eval_data.echo(report.parameters);
            report.parameters["scores"] = eval_scores;
            report.parameters["tied_score_credit"] = eval_credit;
            SurvivalDataset ds;
            const std::vector<double> scores = load_scores(eval_data, eval_scores, report, ds);
            const ConcordanceCounts counts = concordance_counts_fast(ds.durations, ds.events, scores);
            const double c = counts.value({eval_credit});
            report.results["n"] = ds.size();
            report.results["c_index"] = c;
            report.results["concordant"] = counts.concordant;
            report.results["tied_score"] = counts.tied_score;
            report.results["comparable"] = counts.comparable;
        };
    });

    // loss
    DataFlags loss_data;
    std::string loss_scores;
    std::string loss_ties = "efron";
    auto* loss_cmd = app.add_subcommand("loss", "Negative log partial likelihood of given risk scores");
    loss_data.add_to(loss_cmd, false);
    loss_cmd->add_option("--scores", loss_scores, "Score column of the data file, or a file with one score per line")
        ->required();
    loss_cmd->add_option("--ties", loss_ties, "Tie handling: breslow or efron");
    output.add_to(loss_cmd);
    loss_cmd->callback([&] {
        action = [&] {
            const TieMethod method = parse_ties(loss_ties);
            loss_data.echo(report.parameters);
            report.parameters["scores"] = loss_scores;
            report.parameters["ties"] = loss_ties;
            SurvivalDataset ds;
            const std::vector<double> scores = load_scores(loss_data, loss_scores, report, ds);
            const RiskOrder order(ds.durations, ds.events);
            if (order.event_count() == 0) {
                report.warnings.push_back("all observations are censored; the loss is identically 0");
            }
            const LossValue v = nll(order, scores, method);
            report.results["n"] = ds.size();
            report.results["events"] = order.event_count();
            report.results["tie_groups"] = order.groups().size();
            report.results["tie_method"] = to_string(method);
            report.results["nll"] = v.nll;
        };
    });

    // split
    DataFlags split_data;
    double split_fraction = 0.8;
    std::uint64_t split_seed = 0;
    std::string split_train;
    std::string split_test;
    auto* split_cmd = app.add_subcommand("split", "Stratified train/test split on the event indicator");
    split_data.add_to(split_cmd, true);
    split_cmd->add_option("--fraction", split_fraction, "Training fraction in (0, 1)")->required();
    split_cmd->add_option("--seed", split_seed, "Shuffle seed")->required();
    split_cmd->add_option("--out-train", split_train, "Training CSV to write")->required();
    split_cmd->add_option("--out-test", split_test, "Test CSV to write")->required();
    output.add_to(split_cmd);
    split_cmd->callback([&] {
        action = [&] {
            if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw UsageError("--fraction must lie in (0, 1)");
            split_data.echo(report.parameters);
            report.parameters["fraction"] = split_fraction;
            report.parameters["seed"] = split_seed;
            report.parameters["out_train"] = split_train;
            report.parameters["out_test"] = split_test;
            const SurvivalDataset ds = load(split_data, report, split_data.load_options()).data;
            const auto [train, test] = stratified_split(ds, split_fraction, split_seed);
            write_csv(train, split_train);
            write_csv(test, split_test);
            auto counts = [](const SurvivalDataset& part) {
                const std::size_t events = part.event_count();
                return json{{"n", part.size()}, {"events", events}, {"censored", part.size() - events}};
            };
            report.results["train"] = counts(train);
            report.results["test"] = counts(test);
        };
    });

    // bench
    std::string bench_sizes;
    int bench_reps = 5;
    std::string bench_format = "csv";
    std::uint64_t bench_seed = 0;
    auto* bench_cmd = app.add_subcommand("bench", "Time linear-time vs quadratic loss evaluation");
    bench_cmd->add_option("--sizes", bench_sizes, "Comma-separated sample sizes (default 64..16384, powers of 2)");
    bench_cmd->add_option("--reps", bench_reps, "Timed repetitions per size and method (>= 3)");
    bench_cmd->add_option("--format", bench_format, "Report format: csv or json");
    bench_cmd->add_option("--seed", bench_seed, "Seed for the generated scores");
    bench_cmd->add_option("--out", output.out_path, "Write the report here instead of standard output");
    bench_cmd->callback([&] {
        out_is_report = false;
        action = [&] {
            if (bench_reps < 3) throw UsageError("--reps must be at least 3");
            if (bench_format != "csv" && bench_format != "json") throw UsageError("--format must be csv or json");
            std::vector<std::size_t> sizes = default_bench_sizes();
            if (!bench_sizes.empty()) {
                sizes.clear();
                for (const auto& tok : split_list(bench_sizes)) {
                    const auto v = csv::parse_number(tok);
                    if (!v || *v < 1 || *v != std::floor(*v)) throw UsageError("--sizes must list positive integers");
                    sizes.push_back(static_cast<std::size_t>(*v));
                }
                if (!std::is_sorted(sizes.begin(), sizes.end())) throw UsageError("--sizes must be ascending");
            }
            report.parameters["sizes"] = sizes;
            report.parameters["reps"] = bench_reps;
            report.parameters["format"] = bench_format;
            report.parameters["seed"] = bench_seed;
            const BenchReport bench = run_scaling_bench(sizes, bench_reps, bench_seed);
            const ReportFormat format = parse_report_format(bench_format);
            if (output.out_path.empty()) {
                emit_report(bench, out, format);
                return;
            }
            emit_report(bench, output.out_path, format);
            json rows = json::array();
            for (const auto& r : bench.rows) {
                rows.push_back({{"n", r.n}, {"method", to_string(r.method)}, {"median_ns", r.median_ns}, {"reps", r.reps}});
            }
            report.results["rows"] = std::move(rows);
            report.results["report"] = output.out_path;
        };
    });

    // synth
    SynthOptions synth_opts;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic survival CSV with planted signal");
    synth_cmd->add_option("--n", synth_opts.n, "Samples")->required();
    synth_cmd->add_option("--p", synth_opts.p, "Features")->required();
    synth_cmd->add_option("--informative", synth_opts.n_informative, "Leading features with effect +/-1");
    synth_cmd->add_option("--censor-rate", synth_opts.censor_rate, "Probability of censoring, in [0, 1)");
    synth_cmd->add_option("--tie-granularity", synth_opts.tie_granularity, "Round durations up to this step (0 = none)");
    synth_cmd->add_option("--seed", synth_opts.seed, "Generator seed");
    synth_cmd->add_option("--out-data", synth_out, "CSV file to write")->required();
    output.add_to(synth_cmd);
    synth_cmd->callback([&] {
        action = [&] {
            if (synth_opts.n < 1) throw UsageError("--n must be at least 1");
            if (synth_opts.n_informative > synth_opts.p) throw UsageError("--informative cannot exceed --p");
            if (!(synth_opts.censor_rate >= 0.0 && synth_opts.censor_rate < 1.0)) {
                throw UsageError("--censor-rate must lie in [0, 1)");
            }
            if (!(synth_opts.tie_granularity >= 0.0)) throw UsageError("--tie-granularity must be >= 0");
            report.parameters["n"] = synth_opts.n;
            report.parameters["p"] = synth_opts.p;
            report.parameters["informative"] = synth_opts.n_informative;
            report.parameters["censor_rate"] = synth_opts.censor_rate;
            report.parameters["tie_granularity"] = synth_opts.tie_granularity;
            report.parameters["seed"] = synth_opts.seed;
            const SurvivalDataset ds = synth(synth_opts);
            write_csv(ds, synth_out);
            report.results["n"] = ds.size();
            report.results["p"] = ds.num_features();
            report.results["events"] = ds.event_count();
            report.results["path"] = synth_out;
        };
    });

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("fastcox");

    auto usage = [&]() -> std::string {
        for (auto* sub : app.get_subcommands()) return sub->help();
        return app.help();
    };

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << usage();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << usage();
        return kExitUsage;
    }

    report.command = app.get_subcommands().front()->get_name();
    const auto start = std::chrono::steady_clock::now();
    try {
        action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << usage();
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    if (report.results.empty()) return kExitOk;  // bench streamed its report

    try {
        if (out_is_report && !output.out_path.empty()) write_json(output.out_path, report.to_json());
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    if (output.json_stdout) {
        out << report.to_json().dump(2) << '\n';
    } else {
        out << report.to_text();
    }
    return kExitOk;
}

}  // namespace fastcox::cli
