// chasm: detection on CSV streams, synthetic data sets, benchmark sweeps and
// estimator-bias experiments.
//
// Exit codes: 0 ok, 2 usage or input error, 3 numerical failure.

#include "io.hpp"

#include <chasm/chasm.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace chasm;
using io::json;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_numerical = 3;

struct Options {
    std::string input, output, config, grid, dataset = "gaussian", variant = "arl1";
    std::uint64_t seed = 1;
    std::size_t reps = 1000;
    unsigned jobs = 0;
    std::int64_t margin_left = 0, margin_right = 50;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json manifest_head(const std::string& subcommand, const Options& o) {
    json m;
    m["subcommand"] = subcommand;
    m["tool_version"] = version;
    m["seed"] = o.seed;
    m["input"] = o.input.empty() ? json(nullptr) : json(o.input);
    m["output"] = o.output;
    return m;
}

void require_output_dir(const std::string& out) {
    if (out.empty()) throw InvalidArgument("--output is required");
    fs::create_directories(out);
}

// --- detect ---------------------------------------------------------------

int cmd_detect(const Options& o) {
    if (o.input.empty()) throw InvalidArgument("--input is required");
    const DetectorConfig cfg = o.config.empty() ? DetectorConfig{} : io::detector_config(io::read_json(o.config));

    std::ofstream file;
    if (!o.output.empty()) {
        file.open(o.output);
        if (!file) throw InvalidArgument("cannot write " + o.output);
    }
    std::ostream& out = o.output.empty() ? std::cout : file;

    io::CsvReader reader(o.input);
    std::optional<Detector> det;
    auto log = [](const std::string& msg) { std::cerr << "chasm detect: " << msg << '\n'; };
    while (auto x = reader.next()) {
        if (!det) det.emplace(cfg, x->size(), log);
        DetectionRecord rec;
        try {
            rec = det->step(*x);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(o.input + ":" + std::to_string(reader.line()) + ": " + e.what());
        }
        out << io::record_line(rec, cfg.threshold) << '\n';
    }
    if (!det) throw InvalidArgument(o.input + ": no observations");
    return exit_ok;
}

// --- simulate -------------------------------------------------------------

std::string replication_file(std::size_t rep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep_%05zu.csv", rep);
    return buf;
}

int cmd_simulate(const Options& o) {
    const auto t0 = Clock::now();
    const DatasetKind kind = parse_dataset(o.dataset);
    const Variant variant = parse_variant(o.variant);
    if (o.reps < 1) throw InvalidArgument("--reps must be positive");
    require_output_dir(o.output);

    std::vector<json> entries(o.reps);
    parallel_for(o.reps, resolve_jobs(o.jobs), [&](std::size_t rep) {
        const Replication r = make_replication(kind, variant, rep, o.reps, o.seed);
        io::write_stream(fs::path(o.output) / replication_file(rep), r.stream);
        json e;
        e["file"] = replication_file(rep);
        e["dim"] = r.model.dim;
        e["T"] = r.model.length;
        e["tau"] = r.model.tau ? json(*r.model.tau) : json(nullptr);
        e["bin"] = r.bin ? json(*r.bin) : json(nullptr);
        e["theta0"] = io::matrix_json(r.model.theta0);
        e["theta1"] = io::matrix_json(r.model.theta1);
        e["noise"] = io::noise_json(r.model.noise);
        entries[rep] = std::move(e);
    });

    json m = manifest_head("simulate", o);
    m["config"] = {{"dataset", to_string(kind)}, {"variant", to_string(variant)}, {"n_reps", o.reps}};
    m["replications"] = entries;
    m["duration_seconds"] = seconds_since(t0);
    io::write_json(fs::path(o.output) / "manifest.json", m);
    return exit_ok;
}

// --- benchmark --------------------------------------------------------------

struct ConfigScore {
    OutcomeCounts counts;
    std::optional<Prf> prf;
    std::optional<ArlEstimate> arl0, arl1;
};

std::string opt(const std::optional<double>& v) { return v && std::isfinite(*v) ? io::fmt(*v) : "NA"; }

int cmd_benchmark(const Options& o) {
    const auto t0 = Clock::now();
    if (o.input.empty()) throw InvalidArgument("--input (a simulate output directory) is required");
    const fs::path dir(o.input);
    if (!fs::exists(dir / "manifest.json")) throw InvalidArgument(o.input + ": missing manifest.json");
    const json manifest = io::read_json(dir / "manifest.json");
    if (!manifest.contains("replications") || !manifest["replications"].is_array() ||
        manifest["replications"].empty())
        throw InvalidArgument(o.input + ": manifest lists no replications");

    const std::vector<DetectorConfig> grid =
        o.grid.empty() ? synthetic_grid() : io::detector_grid(io::read_json(o.grid));
    EvalConfig ec;
    ec.margin_left = o.margin_left;
    ec.margin_right = o.margin_right;
    ec.validate();

    struct Rep {
        std::vector<Eigen::VectorXd> stream;
        std::optional<std::int64_t> tau;
    };
    std::vector<Rep> reps;
    for (const auto& e : manifest["replications"]) {
        Rep r;
        r.stream = io::read_stream(dir / e.at("file").get<std::string>());
        if (!e.at("tau").is_null()) r.tau = e.at("tau").get<std::int64_t>();
        reps.push_back(std::move(r));
    }
    const bool has_change = reps.front().tau.has_value();
    for (const auto& r : reps)
        if (r.tau.has_value() != has_change) throw InvalidArgument(o.input + ": mixes H0 and H1 replications");
    const std::int64_t length = static_cast<std::int64_t>(reps.front().stream.size());
    ec.censor_at = length;
    for (const auto& c : grid) c.validate(reps.front().stream.front().size());

    // One slot per (config, replication); the reduction is in index order.
    std::vector<std::optional<std::int64_t>> first(grid.size() * reps.size());
    std::vector<std::string> numeric_failures(first.size());
    parallel_for(first.size(), resolve_jobs(o.jobs), [&](std::size_t k) {
        const auto& cfg = grid[k / reps.size()];
        const auto& rep = reps[k % reps.size()];
        try {
            first[k] = first_alarm(cfg, rep.stream);
        } catch (const NumericalError& e) {
            numeric_failures[k] = e.what();
        }
    });
    for (const auto& f : numeric_failures)
        if (!f.empty()) throw NumericalError(f);

    std::vector<ConfigScore> scores(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        std::vector<RunLength> runs;
        std::vector<Outcome> outcomes;
        for (std::size_t r = 0; r < reps.size(); ++r) {
            const auto fa = first[c * reps.size() + r];
            runs.push_back({fa, reps[r].tau});
            if (has_change) {
                outcomes.push_back(classify_single(*reps[r].tau, fa, ec));
                scores[c].counts.add(outcomes.back());
            }
        }
        if (has_change) {
            scores[c].prf = prf_single(outcomes, reps.size());
            scores[c].arl1 = arl(runs, ArlMode::delay, ec);
        } else {
            scores[c].arl0 = arl(runs, ArlMode::in_control, ec);
        }
    }

    require_output_dir(o.output);
    const std::string header =
        "config,rho,rank,alpha,threshold,lag,grace,burn_in,n_reps,tp,fp,fn_late,fn_none,precision,recall,f1,"
        "arl0,arl0_censored_fraction,arl1,arl1_runs";
    auto row = [&](std::size_t c) {
        const auto& g = grid[c];
        const auto& s = scores[c];
        std::string line = std::to_string(c) + "," + io::fmt(g.rho) + "," + std::to_string(g.rank) + "," +
                           io::fmt(g.alpha) + "," + io::fmt(g.threshold) + "," + std::to_string(g.lag) + "," +
                           std::to_string(g.grace) + "," + std::to_string(g.burn_in) + "," +
                           std::to_string(reps.size()) + ",";
        if (has_change) {
            line += std::to_string(s.counts.tp) + "," + std::to_string(s.counts.fp) + "," +
                    std::to_string(s.counts.fn_late) + "," + std::to_string(s.counts.fn_none) + ",";
            line += io::fmt(s.prf->precision) + "," + io::fmt(s.prf->recall) + "," + io::fmt(s.prf->f1) + ",";
            line += "NA,NA," + opt(s.arl1->value) + "," + std::to_string(s.arl1->used);
        } else {
            line += "NA,NA,NA,NA,NA,NA,NA,";
            line += io::fmt(s.arl0->value) + "," + io::fmt(s.arl0->censored_fraction) + ",NA,NA";
        }
        return line;
    };

    {
        std::ofstream out(fs::path(o.output) / "metrics.csv");
        out << header << '\n';
        for (std::size_t c = 0; c < grid.size(); ++c) out << row(c) << '\n';
    }
    // Best row: highest F1 on change data, longest ARL0 without; first wins ties.
    std::size_t best = 0;
    for (std::size_t c = 1; c < grid.size(); ++c) {
        const bool better = has_change ? scores[c].prf->f1 > scores[best].prf->f1
                                       : scores[c].arl0->value > scores[best].arl0->value;
        if (better) best = c;
    }
    {
        std::ofstream out(fs::path(o.output) / "best.csv");
        out << header << '\n' << row(best) << '\n';
    }

    json m = manifest_head("benchmark", o);
    json cfgs = json::array();
    for (const auto& g : grid) cfgs.push_back(io::to_json(g));
    m["config"] = {{"grid", cfgs},
                   {"margin_left", ec.margin_left},
                   {"margin_right", ec.margin_right},
                   {"censor_at", ec.censor_at},
                   {"dataset_manifest", manifest.value("config", json::object())},
                   {"arl1_policy", "mean delay over true-positive runs only"},
                   {"arl0_policy", "silent runs counted at censor_at; see arl0_censored_fraction"},
                   {"best_criterion", has_change ? "max f1" : "max arl0"}};
    m["duration_seconds"] = seconds_since(t0);
    io::write_json(fs::path(o.output) / "manifest.json", m);
    return exit_ok;
}

// --- bias -----------------------------------------------------------------

int cmd_bias(const Options& o, bool seed_given) {
    const auto t0 = Clock::now();
    BiasExperiment exp = o.config.empty() ? BiasExperiment{} : io::bias_experiment(io::read_json(o.config));
    if (seed_given || o.config.empty()) exp.seed = o.seed;
    exp.validate();
    require_output_dir(o.output);
    const auto table = run_bias(exp, o.jobs);
    {
        std::ofstream out(fs::path(o.output) / "bias.csv");
        out << "rho,n,bias_norm,stderr\n";
        for (const auto& p : table)
            out << io::fmt(p.rho) << ',' << p.n << ',' << io::fmt(p.bias_norm) << ',' << io::fmt(p.std_error) << '\n';
    }
    Options shown = o;
    shown.seed = exp.seed;
    json m = manifest_head("bias", shown);
    m["config"] = io::to_json(exp);
    m["duration_seconds"] = seconds_since(t0);
    io::write_json(fs::path(o.output) / "manifest.json", m);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CHASM streaming changepoint detection"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    Options o;

    auto* detect = app.add_subcommand("detect", "run the detector over a CSV stream, one JSON record per row");
    detect->add_option("--input", o.input, "CSV stream (one observation per row, optional header)")->required();
    detect->add_option("--output", o.output, "JSONL output (default: stdout)");
    detect->add_option("--config", o.config, "detector config JSON");

    auto* simulate = app.add_subcommand("simulate", "write a synthetic benchmark data set");
    simulate->add_option("--dataset", o.dataset, "gaussian, student_t, laplace, huber, sparse or fullrank");
    simulate->add_option("--variant", o.variant, "arl1 (one change, T=400) or arl0 (no change, T=10000)");
    simulate->add_option("--reps", o.reps, "replications")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", o.seed, "master seed");
    simulate->add_option("--output", o.output, "output directory")->required();
    simulate->add_option("--jobs", o.jobs, "worker threads (default: $CHASM_JOBS or all cores)");

    auto* bench = app.add_subcommand("benchmark", "sweep a parameter grid over a simulated data set");
    bench->add_option("--input", o.input, "directory written by simulate")->required();
    bench->add_option("--grid", o.grid, "JSON array of detector configs (default: the synthetic grid)");
    bench->add_option("--output", o.output, "output directory")->required();
    bench->add_option("--jobs", o.jobs, "worker threads (default: $CHASM_JOBS or all cores)");
    bench->add_option("--margin-left", o.margin_left, "detections allowed this many steps before the change");
    bench->add_option("--margin-right", o.margin_right, "and this many after");

    auto* bias = app.add_subcommand("bias", "Monte Carlo bias of the operator estimate");
    bias->add_option("--config", o.config, "bias experiment JSON");
    auto* seed_opt = bias->add_option("--seed", o.seed, "master seed (overrides the config)");
    bias->add_option("--output", o.output, "output directory")->required();
    bias->add_option("--jobs", o.jobs, "worker threads (default: $CHASM_JOBS or all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input;
    }

    try {
        if (*detect) return cmd_detect(o);
        if (*simulate) return cmd_simulate(o);
        if (*bench) return cmd_benchmark(o);
        if (*bias) return cmd_bias(o, seed_opt->count() > 0);
    } catch (const NumericalError& e) {
        std::cerr << "chasm: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "chasm: " << e.what() << '\n';
        return exit_input;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "chasm: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "chasm: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_input;
}
