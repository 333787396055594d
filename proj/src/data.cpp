#include "ddc/data.hpp"

#include "ddc/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace ddc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    double value = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "' as a number",
                         line);
    }
    return value;
}

int parse_label(std::string_view field, std::size_t line) {
    field = trim(field);
    int value = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc() || ptr != end || value < 0) {
        throw ParseError("line " + std::to_string(line) + ": label '" + std::string(field) +
                             "' is not a non-negative integer",
                         line);
    }
    return value;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 3]));
}

struct IdxHeader {
    std::vector<std::size_t> dims;
    std::size_t payload_offset = 0;
};

IdxHeader read_idx_header(const std::string& bytes, std::uint32_t magic, std::size_t ndims, const std::string& what) {
    if (bytes.size() < 4 + 4 * ndims) throw FormatError(what + ": file too short for IDX header");
    const std::uint32_t found = read_be32(bytes, 0);
    if (found != magic) {
        std::ostringstream msg;
        msg << what << ": bad magic 0x" << std::hex << found << ", expected 0x" << magic;
        throw FormatError(msg.str());
    }
    IdxHeader header;
    std::size_t expected = 1;
    for (std::size_t i = 0; i < ndims; ++i) {
        header.dims.push_back(read_be32(bytes, 4 + 4 * i));
        expected *= header.dims.back();
    }
    header.payload_offset = 4 + 4 * ndims;
    const std::size_t payload = bytes.size() - header.payload_offset;
    if (payload != expected) {
        throw FormatError(what + ": header promises " + std::to_string(expected) + " bytes, payload has " +
                          std::to_string(payload));
    }
    return header;
}

} // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options, const std::string& name) {
    std::vector<double> values;
    Labels labels;
    std::size_t cols = 0;
    std::size_t rows = 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (options.skip_header && line_no == 1) continue;
        if (line.empty()) continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        const std::size_t feature_count = fields.size() - (options.label_column ? 1 : 0);
        if (feature_count == 0) throw ParseError("line " + std::to_string(line_no) + ": no feature columns", line_no);
        if (rows == 0) {
            cols = feature_count;
        } else if (feature_count != cols) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                                 " feature columns, found " + std::to_string(feature_count),
                             line_no);
        }
        for (std::size_t c = 0; c < feature_count; ++c) values.push_back(parse_double(fields[c], line_no));
        if (options.label_column) labels.push_back(parse_label(fields.back(), line_no));
        ++rows;
    }
    if (rows == 0) throw InvalidArgument(name + ": no data rows");

    Dataset dataset;
    dataset.name = name;
    dataset.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(rows),
                                                static_cast<Eigen::Index>(cols));
    if (options.label_column) dataset.labels = std::move(labels);
    return dataset;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    return parse_csv(read_file(path), options, path.filename().string());
}

Dataset load_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels) {
    const std::string image_bytes = read_file(images);
    const IdxHeader header = read_idx_header(image_bytes, 0x00000803u, 3, images.string());
    const std::size_t n = header.dims[0];
    const std::size_t d = header.dims[1] * header.dims[2];

    Dataset dataset;
    dataset.name = images.filename().string();
    dataset.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const auto* pixels = reinterpret_cast<const unsigned char*>(image_bytes.data() + header.payload_offset);
    for (std::size_t i = 0; i < n * d; ++i) dataset.features.data()[i] = static_cast<double>(pixels[i]) / 255.0;

    if (labels) {
        const std::string label_bytes = read_file(*labels);
        const IdxHeader lh = read_idx_header(label_bytes, 0x00000801u, 1, labels->string());
        if (lh.dims[0] != n) {
            throw FormatError(labels->string() + ": " + std::to_string(lh.dims[0]) + " labels for " +
                              std::to_string(n) + " images");
        }
        Labels out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<unsigned char>(label_bytes[lh.payload_offset + i]);
        dataset.labels = std::move(out);
    }
    return dataset;
}

Matrix blob_centers(const BlobSpec& spec) {
    if (spec.clusters < 1 || spec.points_per_cluster < 1 || spec.dim < 1 || !(spec.center_separation > 0.0)) {
        throw InvalidArgument("make_blobs: counts must be >= 1 and separation > 0");
    }
    std::mt19937_64 rng(derive_seed(spec.seed, 0xb10b));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int k = spec.clusters;
    Matrix centers = Matrix::Zero(k, spec.dim);

    if (k <= spec.dim) {
        // Scaled simplex corners sep/sqrt(2) * e_i, then a random rotation.
        for (int c = 0; c < k; ++c) centers(c, c) = spec.center_separation / std::sqrt(2.0);
        Matrix g(spec.dim, spec.dim);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
        const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
        centers = centers * q.transpose();
    } else {
        // Rejection sampling in a ball that grows until all centres fit.
        double radius = spec.center_separation * std::pow(static_cast<double>(k), 1.0 / spec.dim);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int placed = 0;
        int attempts = 0;
        while (placed < k) {
            Vector dir(spec.dim);
            for (auto& x : dir) x = gauss(rng);
            const Vector candidate = dir.normalized() * radius * std::pow(unit(rng), 1.0 / spec.dim);
            bool ok = true;
            for (int c = 0; c < placed && ok; ++c) {
                ok = (centers.row(c).transpose() - candidate).norm() >= spec.center_separation;
            }
            if (ok) {
                centers.row(placed++) = candidate.transpose();
                attempts = 0;
            } else if (++attempts > 1000) {
                radius *= 1.25;
                attempts = 0;
            }
        }
    }
    return centers;
}

Dataset make_blobs(const BlobSpec& spec) {
    const Matrix centers = blob_centers(spec);
    std::mt19937_64 rng(derive_seed(spec.seed, 0xda7a));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const Eigen::Index n = static_cast<Eigen::Index>(spec.clusters) * spec.points_per_cluster;
    Dataset dataset;
    dataset.name = "blobs";
    dataset.features.resize(n, spec.dim);
    Labels labels(static_cast<std::size_t>(n));
    Eigen::Index row = 0;
    for (int c = 0; c < spec.clusters; ++c) {
        for (int p = 0; p < spec.points_per_cluster; ++p, ++row) {
            for (int j = 0; j < spec.dim; ++j) dataset.features(row, j) = centers(c, j) + gauss(rng);
            labels[static_cast<std::size_t>(row)] = c;
        }
    }
    dataset.labels = std::move(labels);
    return dataset;
}

std::vector<std::vector<std::size_t>> batch_iter(std::size_t n, std::size_t m, std::uint64_t epoch_seed) {
    if (m == 0) throw InvalidArgument("batch_iter: batch size must be >= 1");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(epoch_seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::vector<std::size_t>> batches;
    if (n == 0) return batches;
    if (m > n) {
        batches.push_back(std::move(order));
        return batches;
    }
    for (std::size_t start = 0; start + m <= n; start += m) {
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(start + m));
    }
    return batches;
}

void standardize(Dataset& dataset) {
    auto& x = dataset.features;
    if (x.rows() == 0) return;
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::RowVectorXd stddev = (x.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (stddev[j] > 0.0) x.col(j) /= stddev[j];
    }
}

Matrix gather_rows(const Matrix& features, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

std::uint64_t fingerprint(const Dataset& dataset) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&hash](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            hash ^= p[i];
            hash *= 0x100000001b3ULL;
        }
    };
    const std::array<std::int64_t, 2> dims{dataset.features.rows(), dataset.features.cols()};
    mix(dims.data(), sizeof(dims));
    mix(dataset.features.data(), sizeof(double) * static_cast<std::size_t>(dataset.features.size()));
    if (dataset.labels) mix(dataset.labels->data(), sizeof(int) * dataset.labels->size());
    return hash;
}

} // namespace ddc
