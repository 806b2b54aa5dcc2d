#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "triclust/net.hpp"

namespace triclust {

enum class Split { train, test };

struct Dataset {
    Mat features;  // n x D
    std::vector<int> labels;
    int class_count = 0;
    Split split = Split::train;

    int size() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

// Synthetic Gaussian blobs: k centers drawn uniformly in a hypercube,
// rejection-resampled until the minimum pairwise center distance reaches
// center_separation; isotropic Gaussian points around each center.
struct BlobSpec {
    int k = 10;
    int per_class = 100;
    int dim = 16;
    double center_separation = 10.0;
    double cluster_std = 1.0;
    std::uint64_t seed = 1;
};

// Centers depend on the seed alone, so train and test splits of the same
// spec share centers but draw disjoint point sets.
Dataset generate_blobs(const BlobSpec& spec, Split split = Split::train);
Mat blob_centers(const BlobSpec& spec);

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CorruptRecordError : FormatError {
    using FormatError::FormatError;
};

// CIFAR-10 binary batches: 3073-byte records, one label byte (0..9) then
// 3072 pixel bytes; pixels scaled to [0, 1]. File length must be a positive
// multiple of the record size.
Dataset load_cifar10(const std::vector<std::string>& paths, Split split = Split::train);
// exact inverse of load_cifar10 for a single batch
void save_cifar10(const Dataset& ds, const std::string& path);

// Top principal directions by power iteration with deflation; returns the
// n x out_dim projections of the centered data.
Mat pca_project(const Mat& features, int out_dim = 2);

// CSV schema: header "label,f0,f1,...", one row per sample
void save_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path, Split split = Split::train);

}  // namespace triclust
