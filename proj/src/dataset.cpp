#include "triclust/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "triclust/rng.hpp"
#include "triclust/util.hpp"

namespace triclust {

namespace {

constexpr std::size_t kCifarRecordBytes = 3073;
constexpr int kCifarPixels = 3072;
constexpr int kCifarClasses = 10;

void validate_blob_spec(const BlobSpec& spec) {
    if (spec.k <= 0 || spec.per_class <= 0 || spec.dim <= 0)
        throw std::invalid_argument("BlobSpec: counts must be positive");
    if (!(spec.center_separation > 0.0) || !(spec.cluster_std > 0.0))
        throw std::invalid_argument("BlobSpec: separation and std must be positive");
}

}  // namespace

Mat blob_centers(const BlobSpec& spec) {
    validate_blob_spec(spec);
    Rng rng(seed_mix(spec.seed, 0xCE17ULL));
    const double side = 2.0 * spec.center_separation * std::pow(static_cast<double>(spec.k), 1.0 / spec.dim);
    for (int round = 0; round < 1000; ++round) {
        Mat centers(spec.k, spec.dim);
        for (int c = 0; c < spec.k; ++c)
            for (int d = 0; d < spec.dim; ++d) centers(c, d) = rng.uniform(0.0, side);
        double min_dist = std::numeric_limits<double>::infinity();
        for (int a = 0; a < spec.k; ++a)
            for (int b = a + 1; b < spec.k; ++b)
                min_dist = std::min(min_dist, (centers.row(a) - centers.row(b)).norm());
        if (spec.k == 1 || min_dist >= spec.center_separation) return centers;
    }
    throw std::runtime_error("generate_blobs: could not place " + std::to_string(spec.k) +
                             " centers at separation " + format_double(spec.center_separation) +
                             " within 1000 rejection rounds");
}

Dataset generate_blobs(const BlobSpec& spec, Split split) {
    const Mat centers = blob_centers(spec);
    Rng rng(seed_mix(spec.seed, split == Split::train ? 0x7121ULL : 0x7E57ULL));

    Dataset ds;
    ds.class_count = spec.k;
    ds.split = split;
    ds.features.resize(static_cast<Eigen::Index>(spec.k) * spec.per_class, spec.dim);
    ds.labels.resize(static_cast<std::size_t>(spec.k) * spec.per_class);
    Eigen::Index row = 0;
    for (int c = 0; c < spec.k; ++c) {
        for (int s = 0; s < spec.per_class; ++s, ++row) {
            for (int d = 0; d < spec.dim; ++d)
                ds.features(row, d) = centers(c, d) + spec.cluster_std * rng.normal();
            ds.labels[row] = c;
        }
    }
    return ds;
}

Dataset load_cifar10(const std::vector<std::string>& paths, Split split) {
    if (paths.empty()) throw std::invalid_argument("load_cifar10: no paths given");

    std::vector<std::vector<unsigned char>> files;
    std::size_t total_records = 0;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("load_cifar10: cannot open " + path);
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0)
            throw FormatError("load_cifar10: " + path + " has " + std::to_string(bytes.size()) +
                              " bytes, expected a positive multiple of " + std::to_string(kCifarRecordBytes));
        total_records += bytes.size() / kCifarRecordBytes;
        files.push_back(std::move(bytes));
    }

    Dataset ds;
    ds.class_count = kCifarClasses;
    ds.split = split;
    ds.features.resize(static_cast<Eigen::Index>(total_records), kCifarPixels);
    ds.labels.resize(total_records);
    std::size_t row = 0;
    for (std::size_t f = 0; f < files.size(); ++f) {
        const auto& bytes = files[f];
        for (std::size_t off = 0; off < bytes.size(); off += kCifarRecordBytes, ++row) {
            const unsigned char label = bytes[off];
            if (label > 9)
                throw CorruptRecordError("load_cifar10: " + paths[f] + " record " +
                                         std::to_string(off / kCifarRecordBytes) + " has label byte " +
                                         std::to_string(label));
            ds.labels[row] = label;
            for (int px = 0; px < kCifarPixels; ++px)
                ds.features(static_cast<Eigen::Index>(row), px) = bytes[off + 1 + px] / 255.0;
        }
    }
    return ds;
}

void save_cifar10(const Dataset& ds, const std::string& path) {
    if (ds.dim() != kCifarPixels) throw std::invalid_argument("save_cifar10: dataset is not 3072-dimensional");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_cifar10: cannot open " + path);
    for (int i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] < 0 || ds.labels[i] > 9) throw std::invalid_argument("save_cifar10: label out of range");
        out.put(static_cast<char>(ds.labels[i]));
        for (int px = 0; px < kCifarPixels; ++px) {
            const long v = std::lround(ds.features(i, px) * 255.0);
            if (v < 0 || v > 255) throw std::invalid_argument("save_cifar10: pixel outside [0,1]");
            out.put(static_cast<char>(static_cast<unsigned char>(v)));
        }
    }
}

Mat pca_project(const Mat& features, int out_dim) {
    const Eigen::Index n = features.rows();
    const Eigen::Index dim = features.cols();
    if (n < 2) throw std::invalid_argument("pca_project: need at least 2 samples");
    if (out_dim <= 0 || out_dim > dim) throw std::invalid_argument("pca_project: bad output dimension");

    const Mat centered = features.rowwise() - features.colwise().mean();
    const double total_var = centered.squaredNorm() / static_cast<double>(n);
    if (total_var <= 0.0)
        throw std::runtime_error("pca_project: degenerate projection, data has zero variance");

    constexpr int kMaxIters = 1000;
    constexpr double kTol = 1e-9;

    // covariance-vector products via the data matrix; deflation removes the
    // components already extracted
    std::vector<Vec> components;
    std::vector<double> eigenvalues;
    Rng rng(0x9CA0ULL);
    auto apply = [&](const Vec& v) {
        Vec w = centered.transpose() * (centered * v) / static_cast<double>(n);
        for (std::size_t j = 0; j < components.size(); ++j)
            w -= eigenvalues[j] * components[j] * components[j].dot(v);
        return w;
    };

    for (int comp = 0; comp < out_dim; ++comp) {
        Vec v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal();
        for (const auto& prev : components) v -= prev * prev.dot(v);
        v.normalize();

        double lambda = 0.0;
        for (int it = 0; it < kMaxIters; ++it) {
            Vec w = apply(v);
            lambda = w.norm();
            if (lambda <= 1e-12 * total_var) break;  // no variance left in this direction
            w /= lambda;
            const double drift = std::min((w - v).norm(), (w + v).norm());
            v = std::move(w);
            if (drift < kTol) break;
        }

        if (lambda <= 1e-12 * total_var) {
            // flat direction: any unit vector orthogonal to what we have
            for (Eigen::Index basis = 0; basis < dim; ++basis) {
                Vec e = Vec::Unit(dim, basis);
                for (const auto& prev : components) e -= prev * prev.dot(e);
                if (e.norm() > 0.5) {
                    v = e.normalized();
                    break;
                }
            }
            lambda = 0.0;
        }
        // deterministic sign: largest-magnitude entry positive
        Eigen::Index arg_max = 0;
        v.cwiseAbs().maxCoeff(&arg_max);
        if (v(arg_max) < 0.0) v = -v;
        components.push_back(v);
        eigenvalues.push_back(lambda);
    }

    Mat projections(n, out_dim);
    for (int comp = 0; comp < out_dim; ++comp) projections.col(comp) = centered * components[comp];
    return projections;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
    out << "label";
    for (int d = 0; d < ds.dim(); ++d) out << ",f" << d;
    out << '\n';
    for (int i = 0; i < ds.size(); ++i) {
        out << ds.labels[i];
        for (int d = 0; d < ds.dim(); ++d) out << ',' << format_double(ds.features(i, d));
        out << '\n';
    }
}

Dataset load_dataset_csv(const std::string& path, Split split) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("load_dataset_csv: empty file " + path);
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "label")
        throw FormatError("load_dataset_csv: expected 'label,f0,...' header in " + path);
    const int dim = static_cast<int>(header.size()) - 1;
    if (dim <= 0) throw FormatError("load_dataset_csv: no feature columns in " + path);

    std::vector<int> labels;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != dim + 1)
            throw FormatError("load_dataset_csv: row with " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(dim + 1));
        labels.push_back(static_cast<int>(parse_long(cells[0])));
        for (int d = 0; d < dim; ++d) values.push_back(parse_double(cells[d + 1]));
    }
    if (labels.empty()) throw FormatError("load_dataset_csv: no data rows in " + path);

    Dataset ds;
    ds.split = split;
    ds.labels = std::move(labels);
    ds.class_count = 1 + *std::max_element(ds.labels.begin(), ds.labels.end());
    ds.features.resize(static_cast<Eigen::Index>(ds.labels.size()), dim);
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        for (int d = 0; d < dim; ++d) ds.features(static_cast<Eigen::Index>(i), d) = values[i * dim + d];
    return ds;
}

}  // namespace triclust
