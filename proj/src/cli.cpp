#include "ddc/cli.hpp"

#include "ddc/errors.hpp"
#include "ddc/metrics.hpp"
#include "ddc/network.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#ifndef DDC_VERSION
#define DDC_VERSION "0.0.0"
#endif

namespace ddc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt9(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string hex64(std::uint64_t value) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << value;
    return out.str();
}

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path.string());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

void write_labels(const fs::path& path, const Labels& labels) {
    auto out = open_out(path);
    out << "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

void write_indicators(const fs::path& path, const Matrix& indicators) {
    auto out = open_out(path);
    out << "index";
    for (Eigen::Index h = 0; h < indicators.cols(); ++h) out << ",i" << h;
    out << '\n';
    for (Eigen::Index i = 0; i < indicators.rows(); ++i) {
        out << i;
        for (Eigen::Index h = 0; h < indicators.cols(); ++h) out << ',' << fmt9(indicators(i, h));
        out << '\n';
    }
}

void write_history(const fs::path& path, const std::vector<EpochStats>& history) {
    auto out = open_out(path);
    out << "epoch,epsilon,loss,seconds\n";
    for (const auto& s : history) {
        out << s.epoch << ',' << fmt9(s.epsilon) << ',' << fmt9(s.loss) << ',' << fmt9(s.seconds) << '\n';
    }
}

json label_metrics(const Labels& pred, const Labels& truth) {
    return {{"nmi", nmi(pred, truth)}, {"ari", ari(pred, truth)}, {"acc", acc(pred, truth)}};
}

json dataset_json(const DatasetSource& source, const Dataset& data) {
    return {{"source", to_json(source)},
            {"n", data.size()},
            {"d", data.dim()},
            {"fingerprint", hex64(fingerprint(data))}};
}

json seeds_json(std::uint64_t seed) {
    const RunSeeds seeds = run_seeds(seed);
    return {{"run", seed}, {"init", seeds.init}, {"shuffle", seeds.shuffle}, {"spectral", seeds.spectral}};
}

int verbosity() {
    const char* value = std::getenv("DDC_VERBOSE");
    if (value == nullptr || *value == '\0') return 1;
    return std::atoi(value);
}

/// Result files of one training run, shared by train and each sweep candidate.
json write_run(const fs::path& dir, const Dataset& data, const ClusteringResult& result) {
    fs::create_directories(dir);
    write_labels(dir / "labels.csv", result.labels);
    write_indicators(dir / "indicators.csv", result.indicators);
    write_history(dir / "history.csv", result.history);
    save_checkpoint(result.params, dir / "checkpoint.json");

    json metrics = {{"n", data.size()},
                    {"k", result.indicators.cols()},
                    {"epochs", result.history.size()},
                    {"converged", result.converged},
                    {"final_epsilon", result.final_epsilon},
                    {"first_epsilon", result.history.front().epsilon},
                    {"nonempty_clusters", result.nonempty_clusters},
                    {"near_binary_fraction", near_binary_pair_fraction(result.indicators)},
                    {"warnings", result.warnings}};
    if (data.labels) metrics.update(label_metrics(result.labels, *data.labels));
    write_json(dir / "metrics.json", metrics);
    return metrics;
}

// Command-line state before it is resolved against config files.
struct Flags {
    std::string data;
    bool csv_labels = false;
    bool csv_header = false;
    std::string blobs;
    std::string idx_images;
    std::string idx_labels;
    bool standardize = false;
    std::string config_path;

    int k = 0;
    int batch_size = 0;
    double lr = 0.0;
    double epsilon = 0.0;
    int max_epochs = 0;
    std::uint64_t seed = 0;
    std::string out;

    std::vector<int> candidates;
    std::string labels_a;
    std::string labels_b;
    std::string checkpoint;
};

struct DatasetOptions {
    CLI::Option* data = nullptr;
    CLI::Option* blobs = nullptr;
    CLI::Option* idx_images = nullptr;
    CLI::Option* idx_labels = nullptr;
    CLI::Option* standardize = nullptr;
};

struct TrainOptions {
    CLI::Option* k = nullptr;
    CLI::Option* batch_size = nullptr;
    CLI::Option* lr = nullptr;
    CLI::Option* epsilon = nullptr;
    CLI::Option* max_epochs = nullptr;
    CLI::Option* seed = nullptr;
};

DatasetOptions add_dataset_flags(CLI::App& cmd, Flags& f) {
    DatasetOptions o;
    o.data = cmd.add_option("--data", f.data, "CSV file of numeric features");
    cmd.add_flag("--csv-labels", f.csv_labels, "last CSV column is a ground-truth label");
    cmd.add_flag("--csv-header", f.csv_header, "skip the first CSV line");
    o.blobs = cmd.add_option("--blobs", f.blobs, "synthetic blobs, e.g. k=4,n=500,dim=16,sep=6[,seed=S]");
    o.idx_images = cmd.add_option("--idx-images", f.idx_images, "IDX image file");
    o.idx_labels = cmd.add_option("--idx-labels", f.idx_labels, "IDX label file")->needs(o.idx_images);
    o.standardize = cmd.add_flag("--standardize", f.standardize, "zero-mean, unit-variance features");
    o.data->excludes(o.blobs)->excludes(o.idx_images);
    o.blobs->excludes(o.idx_images);
    return o;
}

TrainOptions add_train_flags(CLI::App& cmd, Flags& f) {
    TrainOptions o;
    cmd.add_option("--config", f.config_path, "JSON config or a previous manifest.json");
    cmd.add_option("--manifest", f.config_path, "rerun from a manifest.json (same as --config)");
    o.k = cmd.add_option("--k", f.k, "indicator dimension");
    o.batch_size = cmd.add_option("--batch-size", f.batch_size, "patterns per mini-batch");
    o.lr = cmd.add_option("--lr", f.lr, "RMSProp learning rate");
    o.epsilon = cmd.add_option("--epsilon", f.epsilon, "stop when the epoch-mean per-pair constraint error drops below this");
    o.max_epochs = cmd.add_option("--max-epochs", f.max_epochs, "epoch cap");
    o.seed = cmd.add_option("--seed", f.seed, "run seed");
    cmd.add_option("--out", f.out, "output directory")->required();
    return o;
}

struct Resolved {
    TrainConfig config;
    DatasetSource source;
};

/// defaults < config file < flags.
Resolved resolve(const Flags& f, const DatasetOptions& d, const TrainOptions& t) {
    Resolved r;
    if (!f.config_path.empty()) {
        require_file(f.config_path, "config file");
        json doc;
        try {
            std::ifstream in(f.config_path);
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError("config file " + f.config_path + ": " + e.what());
        }
        if (!doc.is_object()) throw UsageError("config file " + f.config_path + ": expected a JSON object");
        if (doc.contains("config")) {
            r.config = config_from_json(doc["config"], r.config);
            if (doc.contains("dataset")) {
                const json& ds = doc["dataset"];
                r.source = source_from_json(ds.contains("source") ? ds["source"] : ds);
            }
        } else {
            r.config = config_from_json(doc, r.config);
        }
    }

    if (t.k->count()) r.config.indicator_dim = f.k;
    if (t.batch_size->count()) r.config.batch_size = f.batch_size;
    if (t.lr->count()) r.config.learning_rate = f.lr;
    if (t.epsilon->count()) r.config.epsilon_threshold = f.epsilon;
    if (t.max_epochs->count()) r.config.max_epochs = f.max_epochs;
    if (t.seed->count()) r.config.seed = f.seed;

    if (d.data->count()) {
        r.source = {};
        r.source.kind = DatasetSource::Kind::csv;
        r.source.path = fs::absolute(f.data);
        r.source.csv = {f.csv_labels, f.csv_header};
    } else if (d.blobs->count()) {
        r.source = {};
        r.source.kind = DatasetSource::Kind::blobs;
        r.source.blobs = f.blobs;
    } else if (d.idx_images->count()) {
        r.source = {};
        r.source.kind = DatasetSource::Kind::idx;
        r.source.idx_images = fs::absolute(f.idx_images);
        if (d.idx_labels->count()) r.source.idx_labels = fs::absolute(f.idx_labels);
    }
    if (d.standardize->count()) r.source.standardize = true;
    if (r.source.kind == DatasetSource::Kind::none) {
        throw UsageError("no dataset: pass --data, --blobs or --idx-images (or a manifest)");
    }
    if (r.source.kind == DatasetSource::Kind::blobs) {
        // Pin the blob seed so a manifest rerun with another --seed keeps the data.
        const BlobSpec spec = parse_blob_spec(r.source.blobs, r.config.seed);
        r.source.blobs = "k=" + std::to_string(spec.clusters) + ",n=" +
                         std::to_string(spec.clusters * spec.points_per_cluster) + ",dim=" + std::to_string(spec.dim) +
                         ",sep=" + fmt9(spec.center_separation) + ",seed=" + std::to_string(spec.seed);
    }
    validate(r.config);
    return r;
}

json manifest(const std::string& command, const Resolved& r, const Dataset& data, const std::string& started) {
    return {{"tool", "ddc"},
            {"version", DDC_VERSION},
            {"command", command},
            {"config", to_json(r.config)},
            {"dataset", dataset_json(r.source, data)},
            {"seeds", seeds_json(r.config.seed)},
            {"started_at", started}};
}

int cmd_train(const Flags& f, const DatasetOptions& d, const TrainOptions& t, std::ostream& out, std::ostream& err) {
    const std::string started = utc_now();
    const Resolved r = resolve(f, d, t);
    const Dataset data = load_dataset(r.source, r.config.seed);
    const fs::path dir = f.out;
    fs::create_directories(dir);

    json doc = manifest("train", r, data, started);
    write_json(dir / "manifest.json", doc);

    const int verbose = verbosity();
    const ClusteringResult result = train(data, r.config, [&](const EpochStats& s) {
        if (verbose >= 2) err << "epoch " << s.epoch << " epsilon " << fmt9(s.epsilon) << " loss " << fmt9(s.loss) << '\n';
    });
    const json metrics = write_run(dir, data, result);

    doc["finished_at"] = utc_now();
    write_json(dir / "manifest.json", doc);

    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    if (!result.converged) {
        err << "warning: not converged after " << result.history.size() << " epochs (final epsilon "
            << fmt9(result.final_epsilon) << ")\n";
    }
    if (verbose >= 1) out << metrics.dump() << '\n';
    return kExitOk;
}

int cmd_sweep(const Flags& f, const DatasetOptions& d, const TrainOptions& t, std::ostream& out, std::ostream& err) {
    const std::string started = utc_now();
    if (f.candidates.size() < 2) throw UsageError("--candidates needs at least two values");
    const Resolved r = resolve(f, d, t);
    const Dataset data = load_dataset(r.source, r.config.seed);
    const fs::path dir = f.out;
    fs::create_directories(dir);

    json doc = manifest("sweep-k", r, data, started);
    doc["candidates"] = f.candidates;
    write_json(dir / "manifest.json", doc);

    const int verbose = verbosity();
    const SweepResult sweep =
        estimate_cluster_count(data, f.candidates, r.config, [&](const SweepEntry& e, const ClusteringResult* result) {
            if (result != nullptr) write_run(dir / ("k" + std::to_string(e.k)), data, *result);
            if (verbose >= 2) {
                err << "k=" << e.k << (e.error ? " failed: " + *e.error : " final epsilon " + fmt9(e.final_epsilon))
                    << '\n';
            }
        });

    auto csv = open_out(dir / "sweep.csv");
    csv << "k,final_epsilon,converged,epochs,nonempty_clusters,acc,nmi,error\n";
    if (verbose >= 1) out << "    k  final_epsilon  converged  clusters\n";
    json table = json::array();
    for (const auto& e : sweep.entries) {
        std::string acc_s, nmi_s;
        json row = {{"k", e.k}};
        if (e.error) {
            row["error"] = *e.error;
        } else {
            row["final_epsilon"] = e.final_epsilon;
            row["converged"] = e.converged;
            row["nonempty_clusters"] = e.nonempty_clusters;
            if (data.labels) {
                const double a = acc(e.labels, *data.labels);
                const double m = nmi(e.labels, *data.labels);
                acc_s = fmt9(a);
                nmi_s = fmt9(m);
                row["acc"] = a;
                row["nmi"] = m;
            }
        }
        table.push_back(row);

        std::string error = e.error.value_or("");
        for (char& c : error) {
            if (c == ',' || c == '\n') c = ' ';
        }
        csv << e.k << ',' << (e.error ? "" : fmt9(e.final_epsilon)) << ',' << (e.error ? "" : e.converged ? "1" : "0")
            << ',' << e.history.size() << ',' << (e.error ? "" : std::to_string(e.nonempty_clusters)) << ',' << acc_s
            << ',' << nmi_s << ',' << error << '\n';
        if (verbose >= 1) {
            char line[96];
            if (e.error) {
                std::snprintf(line, sizeof line, "%5d  %s\n", e.k, "failed");
            } else {
                std::snprintf(line, sizeof line, "%5d  %13.6g  %9s  %8d\n", e.k, e.final_epsilon,
                              e.converged ? "yes" : "no", e.nonempty_clusters);
            }
            out << line;
        }
    }
    csv.close();

    write_json(dir / "best_k.json", {{"best_k", sweep.best_k}, {"candidates", table}});
    doc["finished_at"] = utc_now();
    write_json(dir / "manifest.json", doc);

    if (sweep.best_k == 0) {
        err << "error: every candidate failed\n";
        return kExitRuntime;
    }
    if (verbose >= 1) out << "best k: " << sweep.best_k << '\n';
    return kExitOk;
}

int cmd_eval(const Flags& f, const DatasetOptions& d, std::ostream& out) {
    Labels pred;
    Labels truth;
    if (!f.labels_a.empty() || !f.labels_b.empty()) {
        if (f.labels_a.empty() || f.labels_b.empty()) throw UsageError("--labels-a and --labels-b go together");
        require_file(f.labels_a, "label file");
        require_file(f.labels_b, "label file");
        pred = read_label_file(f.labels_a);
        truth = read_label_file(f.labels_b);
        if (pred.size() != truth.size()) {
            throw std::runtime_error("label files differ in length: " + std::to_string(pred.size()) + " vs " +
                                     std::to_string(truth.size()));
        }
    } else {
        if (f.checkpoint.empty()) throw UsageError("eval needs --labels-a/--labels-b or --checkpoint with a dataset");
        require_file(f.checkpoint, "checkpoint");
        DatasetSource source;
        if (d.data->count()) {
            source.kind = DatasetSource::Kind::csv;
            source.path = f.data;
            source.csv = {f.csv_labels, f.csv_header};
        } else if (d.blobs->count()) {
            source.kind = DatasetSource::Kind::blobs;
            source.blobs = f.blobs;
        } else if (d.idx_images->count()) {
            source.kind = DatasetSource::Kind::idx;
            source.idx_images = f.idx_images;
            if (d.idx_labels->count()) source.idx_labels = f.idx_labels;
        } else {
            throw UsageError("eval --checkpoint needs a dataset (--data, --blobs or --idx-images)");
        }
        source.standardize = f.standardize;
        const Dataset data = load_dataset(source, 0);
        const NetworkParams params = load_checkpoint(f.checkpoint);
        if (params.input_dim() != data.dim()) {
            throw UsageError("checkpoint expects " + std::to_string(params.input_dim()) + " features, dataset has " +
                             std::to_string(data.dim()));
        }
        pred = assign_labels(params, data.features);
        if (!f.out.empty()) {
            fs::create_directories(f.out);
            write_labels(fs::path(f.out) / "labels.csv", pred);
        }
        if (!data.labels) {
            out << json{{"n", pred.size()}, {"nonempty_clusters", count_nonempty(pred)}}.dump() << '\n';
            return kExitOk;
        }
        truth = *data.labels;
    }
    json result = {{"n", pred.size()}};
    result.update(label_metrics(pred, truth));
    out << result.dump() << '\n';
    return kExitOk;
}

int parse_int(const std::string& text, const std::string& what) {
    int value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw UsageError("bad " + what + " '" + text + "'");
    return value;
}

} // namespace

BlobSpec parse_blob_spec(const std::string& text, std::uint64_t default_seed) {
    BlobSpec spec;
    spec.seed = default_seed;
    int n = spec.clusters * spec.points_per_cluster;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--blobs: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "k") {
            spec.clusters = parse_int(value, "blob k");
        } else if (key == "n") {
            n = parse_int(value, "blob n");
        } else if (key == "dim") {
            spec.dim = parse_int(value, "blob dim");
        } else if (key == "sep") {
            try {
                std::size_t used = 0;
                spec.center_separation = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw UsageError("bad blob sep '" + value + "'");
            }
        } else if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_int(value, "blob seed"));
        } else {
            throw UsageError("--blobs: unknown key '" + key + "'");
        }
    }
    if (spec.clusters < 1 || spec.dim < 1 || n < 1) throw UsageError("--blobs: k, n and dim must be positive");
    if (!(spec.center_separation >= 0.0)) throw UsageError("--blobs: sep must be >= 0");
    if (n % spec.clusters != 0) {
        throw UsageError("--blobs: n=" + std::to_string(n) + " is not a multiple of k=" + std::to_string(spec.clusters));
    }
    spec.points_per_cluster = n / spec.clusters;
    return spec;
}

Dataset load_dataset(const DatasetSource& source, std::uint64_t run_seed) {
    Dataset data;
    switch (source.kind) {
    case DatasetSource::Kind::none: throw UsageError("no dataset given");
    case DatasetSource::Kind::csv:
        require_file(source.path, "dataset");
        data = load_csv(source.path, source.csv);
        break;
    case DatasetSource::Kind::blobs: data = make_blobs(parse_blob_spec(source.blobs, run_seed)); break;
    case DatasetSource::Kind::idx:
        require_file(source.idx_images, "IDX image file");
        if (source.idx_labels) require_file(*source.idx_labels, "IDX label file");
        data = load_idx(source.idx_images, source.idx_labels);
        break;
    }
    if (source.standardize) standardize(data);
    return data;
}

json to_json(const TrainConfig& c) {
    return {{"k", c.indicator_dim},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"rmsprop_decay", c.rmsprop_decay},
            {"rmsprop_epsilon", c.rmsprop_epsilon},
            {"epsilon_threshold", c.epsilon_threshold},
            {"max_epochs", c.max_epochs},
            {"seed", c.seed},
            {"hidden", c.hidden},
            {"positive_weight", c.positive_weight},
            {"output_init_scale", c.output_init_scale},
            {"check_relations", c.check_relations}};
}

TrainConfig config_from_json(const json& doc, TrainConfig c) {
    if (!doc.is_object()) throw UsageError("config: expected a JSON object");
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "k") c.indicator_dim = value.get<int>();
            else if (key == "batch_size") c.batch_size = value.get<int>();
            else if (key == "learning_rate") c.learning_rate = value.get<double>();
            else if (key == "rmsprop_decay") c.rmsprop_decay = value.get<double>();
            else if (key == "rmsprop_epsilon") c.rmsprop_epsilon = value.get<double>();
            else if (key == "epsilon_threshold") c.epsilon_threshold = value.get<double>();
            else if (key == "max_epochs") c.max_epochs = value.get<int>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "hidden") c.hidden = value.get<std::vector<int>>();
            else if (key == "positive_weight") c.positive_weight = value.get<double>();
            else if (key == "output_init_scale") c.output_init_scale = value.get<double>();
            else if (key == "check_relations") c.check_relations = value.get<bool>();
            else throw UsageError("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    return c;
}

json to_json(const DatasetSource& s) {
    json doc = {{"standardize", s.standardize}};
    switch (s.kind) {
    case DatasetSource::Kind::none: doc["kind"] = "none"; break;
    case DatasetSource::Kind::csv:
        doc["kind"] = "csv";
        doc["path"] = s.path.string();
        doc["label_column"] = s.csv.label_column;
        doc["skip_header"] = s.csv.skip_header;
        break;
    case DatasetSource::Kind::blobs:
        doc["kind"] = "blobs";
        doc["spec"] = s.blobs;
        break;
    case DatasetSource::Kind::idx:
        doc["kind"] = "idx";
        doc["images"] = s.idx_images.string();
        if (s.idx_labels) doc["labels"] = s.idx_labels->string();
        break;
    }
    return doc;
}

DatasetSource source_from_json(const json& doc) {
    DatasetSource s;
    try {
        const std::string kind = doc.at("kind").get<std::string>();
        s.standardize = doc.value("standardize", false);
        if (kind == "csv") {
            s.kind = DatasetSource::Kind::csv;
            s.path = doc.at("path").get<std::string>();
            s.csv.label_column = doc.value("label_column", false);
            s.csv.skip_header = doc.value("skip_header", false);
        } else if (kind == "blobs") {
            s.kind = DatasetSource::Kind::blobs;
            s.blobs = doc.at("spec").get<std::string>();
        } else if (kind == "idx") {
            s.kind = DatasetSource::Kind::idx;
            s.idx_images = doc.at("images").get<std::string>();
            if (doc.contains("labels")) s.idx_labels = doc.at("labels").get<std::string>();
        } else if (kind != "none") {
            throw UsageError("dataset: unknown kind '" + kind + "'");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("dataset: ") + e.what());
    }
    return s;
}

Labels read_label_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open label file " + path.string());
    Labels labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
        int value = 0;
        const char* end = field.data() + field.size();
        auto [ptr, ec] = std::from_chars(field.data(), end, value);
        if (ec != std::errc() || ptr != end) {
            if (line_no == 1) continue; // header
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad label '" + field + "'", line_no);
        }
        labels.push_back(value);
    }
    return labels;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neural relation-based clustering: train, k-sweep and evaluate", "ddc"};
    app.set_version_flag("--version", DDC_VERSION);
    app.require_subcommand(1);

    Flags f;
    CLI::App* train_cmd = app.add_subcommand("train", "train one model and label the dataset");
    const DatasetOptions train_data = add_dataset_flags(*train_cmd, f);
    const TrainOptions train_opts = add_train_flags(*train_cmd, f);

    CLI::App* sweep_cmd = app.add_subcommand("sweep-k", "train one model per candidate k, pick the lowest final epsilon");
    const DatasetOptions sweep_data = add_dataset_flags(*sweep_cmd, f);
    const TrainOptions sweep_opts = add_train_flags(*sweep_cmd, f);
    sweep_cmd->add_option("--candidates", f.candidates, "comma-separated k values")->delimiter(',')->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "score labels: two label files, or a checkpoint on a dataset");
    const DatasetOptions eval_data = add_dataset_flags(*eval_cmd, f);
    eval_cmd->add_option("--labels-a", f.labels_a, "predicted labels");
    eval_cmd->add_option("--labels-b", f.labels_b, "reference labels");
    eval_cmd->add_option("--checkpoint", f.checkpoint, "checkpoint.json of a trained model");
    eval_cmd->add_option("--out", f.out, "write the checkpoint's labels.csv here");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(f, train_data, train_opts, out, err);
        if (sweep_cmd->parsed()) return cmd_sweep(f, sweep_data, sweep_opts, out, err);
        return cmd_eval(f, eval_data, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const TrainingDivergence& e) {
        err << "error: training diverged in epoch " << e.epoch() << ": " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace ddc::cli
