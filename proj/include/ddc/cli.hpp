#pragma once

#include "ddc/data.hpp"
#include "ddc/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, unreadable inputs, invalid configuration. Maps to exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Where a dataset comes from. Exactly one of csv / blobs / idx is used.
struct DatasetSource {
    enum class Kind { none, csv, blobs, idx };
    Kind kind = Kind::none;
    std::filesystem::path path; // csv
    CsvOptions csv;
    std::string blobs; // "k=4,n=500,dim=16,sep=6[,seed=S]"
    std::filesystem::path idx_images;
    std::optional<std::filesystem::path> idx_labels;
    bool standardize = false;
};

/// Parses "k=4,n=500,dim=16,sep=6[,seed=S]". n must be a multiple of k.
/// Without seed= the blobs use `default_seed`.
BlobSpec parse_blob_spec(const std::string& text, std::uint64_t default_seed);

/// Loads (and optionally standardises) the dataset. Missing files raise
/// UsageError naming the path.
Dataset load_dataset(const DatasetSource& source, std::uint64_t run_seed);

nlohmann::json to_json(const TrainConfig& config);
/// Overlays the keys present in `doc` onto `base`. Unknown keys are a
/// UsageError so typos do not silently fall back to defaults.
TrainConfig config_from_json(const nlohmann::json& doc, TrainConfig base);

nlohmann::json to_json(const DatasetSource& source);
DatasetSource source_from_json(const nlohmann::json& doc);

/// Reads a label column: one integer per line, or the last field of an
/// "index,label" CSV. A non-numeric first line is treated as a header.
Labels read_label_file(const std::filesystem::path& path);

/// Entry point shared by the `ddc` binary and the tests. `argv[0]` is the
/// program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ddc::cli
