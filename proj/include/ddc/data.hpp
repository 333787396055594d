#pragma once

#include "ddc/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ddc {

struct Dataset {
    Matrix features;              // n x d
    std::optional<Labels> labels; // ground truth, evaluation only
    std::string name;

    std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

struct CsvOptions {
    bool label_column = false; // last column holds an integer class label
    bool skip_header = false;
};

/// Comma-separated numeric rows, '.' decimal point. Throws ParseError naming
/// the 1-based line of the first bad row, InvalidArgument for an empty file.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {}, const std::string& name = "csv");

/// IDX images (magic 0x00000803, u8, n x rows x cols) and optional labels
/// (magic 0x00000801, u8, n). Pixels are flattened row-major and divided by
/// 255. Throws FormatError on a bad magic or a header/payload size mismatch.
Dataset load_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels = {});

struct BlobSpec {
    int clusters = 4;
    int points_per_cluster = 125;
    int dim = 16;
    double center_separation = 6.0; // in units of the within-cluster std
    std::uint64_t seed = 0;
};

/// Isotropic unit-variance Gaussian blobs whose centres are pairwise at least
/// `center_separation` apart. Points are grouped by cluster.
Dataset make_blobs(const BlobSpec& spec);

/// Centres used by make_blobs for a given spec.
Matrix blob_centers(const BlobSpec& spec);

/// Seeded shuffle of [0, n) cut into floor(n/m) batches of m indices; the
/// remainder is dropped. When m > n a single batch holds all n patterns.
std::vector<std::vector<std::size_t>> batch_iter(std::size_t n, std::size_t m, std::uint64_t epoch_seed);

/// Per-feature zero mean, unit variance. Constant features are only centred.
void standardize(Dataset& dataset);

/// Gathers the given rows.
Matrix gather_rows(const Matrix& features, const std::vector<std::size_t>& rows);

/// FNV-1a over dimensions, feature bytes and labels.
std::uint64_t fingerprint(const Dataset& dataset);

} // namespace ddc
