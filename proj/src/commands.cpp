#include "idcwh/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fmt.hpp"
#include "idcwh/checkpoint.hpp"
#include "idcwh/dataset.hpp"
#include "idcwh/errors.hpp"
#include "idcwh/presets.hpp"
#include "idcwh/retrieval.hpp"
#include "idcwh/trainer.hpp"

namespace idcwh::cli {

namespace {

namespace fs = std::filesystem;

struct DataArgs {
    std::string preset;
    std::string data;
};

// Dataset from --preset or --data (binary, or CSV by extension); exactly one
// source must be given. Returns the preset when one was named so callers can
// pick up its protocol.
std::pair<Dataset, const Preset*> resolve_dataset(const DataArgs& a) {
    if (a.preset.empty() == a.data.empty())
        throw ConfigError("exactly one of --preset and --data is required");
    if (!a.preset.empty()) {
        const Preset& p = get_preset(a.preset);
        return {build_preset_dataset(p), &p};
    }
    fs::path path(a.data);
    Dataset ds = path.extension() == ".csv" ? load_csv(path) : load_features(path);
    return {std::move(ds), nullptr};
}

TrainConfig resolve_config(const Preset* preset, const std::string& config_path,
                           const std::vector<std::string>& overrides) {
    TrainConfig cfg = preset ? preset->cfg : TrainConfig{};
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got \"" + kv + "\"");
        set_config_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    validate_config(cfg);
    return cfg;
}

std::vector<std::uint32_t> pool_ids(const Dataset& ds, const std::string& split) {
    if (split == "train") return ds.split_indices(Split::Train);
    if (split == "query") return ds.split_indices(Split::Query);
    if (split == "database") return ds.split_indices(Split::Database);
    if (split == "db") {  // retrieval pool with the train split included
        std::vector<std::uint32_t> ids;
        for (std::uint32_t i = 0; i < ds.sample_count(); ++i)
            if (ds.splits[i] != Split::Query) ids.push_back(i);
        return ids;
    }
    throw ConfigError("unknown split \"" + split + "\" (expected train, query, database, db)");
}

const char* method_name(const TrainConfig& cfg) {
    return cfg.gamma == 0.0 ? "IDCWH-Single" : "IDCWH";
}

struct TrainCmdArgs {
    DataArgs data;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
};

int cmd_train(const TrainCmdArgs& a, std::ostream& out) {
    auto [ds, preset] = resolve_dataset(a.data);
    TrainConfig cfg = resolve_config(preset, a.config_path, a.overrides);
    fs::create_directories(a.out_dir);
    fs::path log_path = fs::path(a.out_dir) / "train_log.tsv";
    fs::path ckpt_path = fs::path(a.out_dir) / "checkpoint.idcp";
    fs::path cfg_path = fs::path(a.out_dir) / "config.txt";

    std::ofstream log(log_path);
    if (!log) throw DataError("cannot open " + log_path.string() + " for writing");
    log << "# method=" << method_name(cfg) << "\n";
    TrainState state = train(ds, cfg, &log);
    log.close();

    save_checkpoint(state.encoder, state.centers, ckpt_path);
    std::ofstream cfg_out(cfg_path);
    cfg_out << config_to_string(cfg);

    out << "method=" << method_name(cfg) << "\n";
    if (!state.history.empty()) {
        const LossBreakdown& last = state.history.back();
        out << "final epoch " << state.epoch << ": l1=" << fmt::shortest(last.l1)
            << " l2=" << fmt::shortest(last.l2) << " quant=" << fmt::shortest(last.quant)
            << " total=" << fmt::shortest(last.total) << "\n";
    }
    out << "checkpoint: " << ckpt_path.string() << "\n";
    out << "log: " << log_path.string() << "\n";
    return 0;
}

struct EncodeCmdArgs {
    std::string checkpoint;
    DataArgs data;
    std::string split = "db";
    std::string out_path;
};

int cmd_encode(const EncodeCmdArgs& a, std::ostream& out) {
    Checkpoint ckpt = load_checkpoint(a.checkpoint);
    auto [ds, preset] = resolve_dataset(a.data);
    (void)preset;
    if (ds.dim() != ckpt.encoder.input_dim())
        throw DataError("dimension mismatch: checkpoint expects " +
                        std::to_string(ckpt.encoder.input_dim()) + " features, dataset has " +
                        std::to_string(ds.dim()));
    std::vector<std::uint32_t> ids = pool_ids(ds, a.split);
    Mat x = ds.gather(ids);
    std::vector<BinaryCode> codes =
        ids.empty() ? std::vector<BinaryCode>{} : encode_binary(ckpt.encoder, x);
    LabelMatrix labels = ds.labels.slice(ids);
    save_codes(codes, labels, a.out_path, ckpt.encoder.code_length());
    out << "encoded " << codes.size() << " samples (split " << a.split << ", "
        << ckpt.encoder.code_length() << " bits) to " << a.out_path << "\n";
    return 0;
}

std::vector<std::uint32_t> default_n_grid(std::uint32_t effective) {
    std::vector<std::uint32_t> grid;
    for (std::uint32_t n : {1u, 5u, 10u, 50u, 100u, 500u, 1000u, 5000u})
        if (n <= effective) grid.push_back(n);
    return grid;
}

struct EvalCmdArgs {
    std::string query_path;
    std::string db_path;
    std::string out_prefix;
    bool exclude_self = false;
    std::vector<std::uint32_t> n_grid;
    std::optional<std::uint32_t> map_k;
};

int cmd_eval(const EvalCmdArgs& a, std::ostream& out) {
    auto [qcodes, qlabels] = load_codes(a.query_path);
    auto [dcodes, dlabels] = load_codes(a.db_path);
    RetrievalIndex index = make_index(std::move(dcodes), std::move(dlabels));
    QuerySet queries{std::move(qcodes), std::move(qlabels)};
    std::uint32_t effective = index.size() - (a.exclude_self ? 1 : 0);
    std::vector<std::uint32_t> grid = a.n_grid.empty() ? default_n_grid(effective) : a.n_grid;
    MetricsReport report = evaluate(queries, index, grid, a.map_k, a.exclude_self);
    export_json(report, a.out_prefix + ".json");
    export_csv(report, a.out_prefix + ".csv");
    out << "map=" << fmt::shortest(report.map) << " p_at_h2=" << fmt::shortest(report.p_at_h2)
        << " r_at_h2=" << fmt::shortest(report.r_at_h2) << " dwdb="
        << (report.dwdb ? fmt::shortest(*report.dwdb) : "n/a") << "\n";
    out << "report: " << a.out_prefix << ".json, " << a.out_prefix << ".csv\n";
    return 0;
}

struct SweepCmdArgs {
    DataArgs data;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::vector<double> sigma_grid;
    std::vector<double> beta_grid;
    std::vector<double> gamma_grid;
    std::vector<std::uint32_t> lengths;
    std::vector<std::int64_t> seeds;
    bool train_in_db = false;   // --data runs only; presets carry their own
    bool exclude_self = false;
};

struct SweepPointResult {
    bool ok = false;
    std::string error;
    double map = 0.0, p_at_h2 = 0.0, r_at_h2 = 0.0;
    std::optional<double> dwdb;
    double final_total = 0.0;
};

SweepPointResult run_sweep_point(const Dataset& ds, const TrainConfig& cfg, Split query_split,
                                 bool train_in_db, bool exclude_self) {
    SweepPointResult r;
    try {
        TrainState state = train(ds, cfg);
        std::vector<std::uint32_t> qids = ds.split_indices(query_split);
        std::vector<std::uint32_t> dbids;
        for (std::uint32_t i = 0; i < ds.sample_count(); ++i)
            if (ds.splits[i] == Split::Database || (train_in_db && ds.splits[i] == Split::Train))
                dbids.push_back(i);
        if (qids.empty() || dbids.empty())
            throw DataError("sweep needs nonempty query and database pools");
        QuerySet queries{encode_binary(state.encoder, ds.gather(qids)), ds.labels.slice(qids)};
        RetrievalIndex index =
            make_index(encode_binary(state.encoder, ds.gather(dbids)), ds.labels.slice(dbids));
        std::uint32_t effective = index.size() - (exclude_self ? 1 : 0);
        MetricsReport rep = evaluate(queries, index, default_n_grid(effective), std::nullopt,
                                     exclude_self);
        r.map = rep.map;
        r.p_at_h2 = rep.p_at_h2;
        r.r_at_h2 = rep.r_at_h2;
        r.dwdb = rep.dwdb;
        r.final_total = state.history.empty() ? 0.0 : state.history.back().total;
        r.ok = true;
    } catch (const Error& e) {
        r.error = e.what();
    }
    return r;
}

std::uint32_t sweep_thread_count(std::size_t points) {
    std::uint32_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("IDCWH_THREADS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v >= 1) hw = std::min<std::uint32_t>(hw, v);
    }
    return static_cast<std::uint32_t>(std::min<std::size_t>(hw, std::max<std::size_t>(points, 1)));
}

int cmd_sweep(const SweepCmdArgs& a, std::ostream& out) {
    auto [ds, preset] = resolve_dataset(a.data);
    TrainConfig base = resolve_config(preset, a.config_path, a.overrides);
    Split query_split = Split::Query;
    bool train_in_db = a.train_in_db, exclude_self = a.exclude_self;
    if (preset) {
        query_split = preset->query_per_class > 0 ? Split::Query : Split::Train;
        train_in_db = preset->train_in_db;
        exclude_self = preset->exclude_self;
    }

    auto one = [](auto v) { return std::vector<decltype(v)>{v}; };
    std::vector<double> sigmas = a.sigma_grid.empty() ? one(base.sigma_sq) : a.sigma_grid;
    std::vector<double> betas = a.beta_grid.empty() ? one(base.beta) : a.beta_grid;
    std::vector<double> gammas = a.gamma_grid.empty() ? one(base.gamma) : a.gamma_grid;
    std::vector<std::uint32_t> lengths = a.lengths.empty() ? one(base.code_length) : a.lengths;
    std::vector<std::int64_t> seeds = a.seeds.empty() ? one(base.seed) : a.seeds;

    struct Point {
        TrainConfig cfg;
    };
    std::vector<Point> points;
    for (double s : sigmas)
        for (double b : betas)
            for (double g : gammas)
                for (std::uint32_t l : lengths)
                    for (std::int64_t seed : seeds) {
                        TrainConfig cfg = base;
                        cfg.sigma_sq = s;
                        cfg.beta = b;
                        cfg.gamma = g;
                        cfg.code_length = l;
                        cfg.seed = seed;
                        points.push_back({cfg});
                    }
    if (points.empty()) throw ConfigError("sweep grid is empty");

    std::vector<SweepPointResult> results(points.size());
    std::atomic<std::size_t> next{0};
    std::uint32_t threads = sweep_thread_count(points.size());
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            results[i] = run_sweep_point(ds, points[i].cfg, query_split, train_in_db,
                                         exclude_self);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    fs::create_directories(a.out_dir);
    fs::path csv_path = fs::path(a.out_dir) / "sweep.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw DataError("cannot open " + csv_path.string() + " for writing");
    csv << "sigma_sq,beta,gamma,code_length,seed,status,map,p_at_h2,r_at_h2,dwdb,final_total\n";
    std::size_t ok_count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const TrainConfig& cfg = points[i].cfg;
        const SweepPointResult& r = results[i];
        csv << fmt::shortest(cfg.sigma_sq) << ',' << fmt::shortest(cfg.beta) << ','
            << fmt::shortest(cfg.gamma) << ',' << cfg.code_length << ',' << cfg.seed << ',';
        if (r.ok) {
            ++ok_count;
            csv << "ok," << fmt::shortest(r.map) << ',' << fmt::shortest(r.p_at_h2) << ','
                << fmt::shortest(r.r_at_h2) << ','
                << (r.dwdb ? fmt::shortest(*r.dwdb) : std::string()) << ','
                << fmt::shortest(r.final_total) << '\n';
        } else {
            std::string msg = r.error;
            for (char& c : msg)
                if (c == ',' || c == '\n') c = ';';
            csv << "error:" << msg << ",,,,,\n";
        }
    }
    if (!csv) throw DataError("write failed for " + csv_path.string());
    out << "sweep: " << points.size() << " points, " << ok_count << " ok, results in "
        << csv_path.string() << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Classwise-center deep hashing: training, encoding, and retrieval evaluation"};
    app.name("idcwh");
    app.require_subcommand(1);

    TrainCmdArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train an encoder and class centers");
    train_cmd->add_option("--preset", train_args.data.preset, "Bundled experiment preset");
    train_cmd->add_option("--data", train_args.data.data, "Dataset file (binary or .csv)");
    train_cmd->add_option("--config", train_args.config_path, "key=value config file");
    train_cmd->add_option("--set", train_args.overrides, "Config override key=value")
        ->allow_extra_args(false);
    train_cmd->add_option("--out", train_args.out_dir, "Output directory")->required();

    EncodeCmdArgs encode_args;
    auto* encode_cmd = app.add_subcommand("encode", "Encode a dataset split to binary codes");
    encode_cmd->add_option("--checkpoint", encode_args.checkpoint, "Checkpoint file")
        ->required();
    encode_cmd->add_option("--preset", encode_args.data.preset, "Bundled experiment preset");
    encode_cmd->add_option("--data", encode_args.data.data, "Dataset file (binary or .csv)");
    encode_cmd->add_option("--split", encode_args.split,
                           "train, query, database, or db (database plus train)");
    encode_cmd->add_option("--out", encode_args.out_path, "Codes file to write")->required();

    EvalCmdArgs eval_args;
    std::int64_t map_k_raw = -1;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate query codes against database codes");
    eval_cmd->add_option("--query", eval_args.query_path, "Query codes file")->required();
    eval_cmd->add_option("--db", eval_args.db_path, "Database codes file")->required();
    eval_cmd->add_option("--out", eval_args.out_prefix, "Report path prefix")->required();
    eval_cmd->add_flag("--exclude-self", eval_args.exclude_self,
                       "Drop database row i from query i's ranking");
    eval_cmd->add_option("--n-grid", eval_args.n_grid, "Top-N cutoffs")->delimiter(',');
    eval_cmd->add_option("--map-k", map_k_raw, "Truncate MAP to the top k");

    SweepCmdArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate over a hyperparameter grid");
    sweep_cmd->add_option("--preset", sweep_args.data.preset, "Bundled experiment preset");
    sweep_cmd->add_option("--data", sweep_args.data.data, "Dataset file (binary or .csv)");
    sweep_cmd->add_option("--config", sweep_args.config_path, "key=value config file");
    sweep_cmd->add_option("--set", sweep_args.overrides, "Config override key=value")
        ->allow_extra_args(false);
    sweep_cmd->add_option("--out", sweep_args.out_dir, "Output directory")->required();
    sweep_cmd->add_option("--sigma-grid", sweep_args.sigma_grid, "sigma_sq values")
        ->delimiter(',');
    sweep_cmd->add_option("--beta-grid", sweep_args.beta_grid, "beta values")->delimiter(',');
    sweep_cmd->add_option("--gamma-grid", sweep_args.gamma_grid, "gamma values")->delimiter(',');
    sweep_cmd->add_option("--lengths", sweep_args.lengths, "code lengths")->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep_args.seeds, "training seeds")->delimiter(',');
    sweep_cmd->add_flag("--train-in-db", sweep_args.train_in_db,
                        "Include the train split in the database pool (--data runs)");
    sweep_cmd->add_flag("--exclude-self", sweep_args.exclude_self,
                        "Self-retrieval protocol (--data runs)");

    std::vector<const char*> argv;
    argv.push_back("idcwh");
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*train_cmd) return cmd_train(train_args, out);
        if (*encode_cmd) return cmd_encode(encode_args, out);
        if (*eval_cmd) {
            if (map_k_raw >= 0) {
                if (map_k_raw == 0) throw ConfigError("--map-k must be positive");
                eval_args.map_k = static_cast<std::uint32_t>(map_k_raw);
            }
            return cmd_eval(eval_args, out);
        }
        if (*sweep_cmd) return cmd_sweep(sweep_args, out);
        throw ConfigError("no subcommand selected");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace idcwh::cli
