#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "triclust/calibration.hpp"
#include "triclust/dataset.hpp"
#include "triclust/kmeans.hpp"
#include "triclust/losses.hpp"
#include "triclust/metrics.hpp"
#include "triclust/multicut.hpp"
#include "triclust/net.hpp"
#include "triclust/sampling.hpp"

namespace triclust {

enum class Method { multicut, kmeans };

Method method_from_string(const std::string& token);
std::string to_string(Method method);

struct DatasetSpec {
    enum class Kind { blobs, cifar10 };
    Kind kind = Kind::blobs;
    BlobSpec blobs;
    std::string cifar_dir;  // holds data_batch_[1-5].bin and test_batch.bin
};

struct ExperimentConfig {
    DatasetSpec dataset;
    std::vector<LossKind> losses{LossKind::triplet3};
    double alpha = 0.8;
    double beta = 0.4;
    std::vector<double> pos_rates{0.0};
    std::vector<double> neg_rates{0.0};
    bool neg_random = false;
    int epochs = 20;
    int batch_size = 100;
    double learning_rate = 1e-3;
    std::vector<int> embedding_dims{64, 32};  // hidden sizes then output dim
    std::vector<Method> methods{Method::multicut, Method::kmeans};
    int kmeans_k = 0;  // required when kmeans is among the methods
    int kmeans_restarts = 10;
    CalibrationMode calibration = CalibrationMode::analytic;
    int calibration_pairs = 5000;
    double ramp_scale = 0.0;  // 0 selects tau / 8
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string output_dir = "out";
    int jobs = 0;  // worker threads for the grid, 0 = hardware concurrency

    TripletMargins margins() const { return TripletMargins(alpha, beta); }
    void validate() const;
};

// the blobs configuration used throughout the tests: 10 balanced classes,
// 100 samples per class and split, 16 input dims, separation 10
ExperimentConfig desk_config();

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

struct DatasetPair {
    Dataset train;
    Dataset test;
};
DatasetPair load_experiment_datasets(const ExperimentConfig& config);

struct TrainResult {
    EmbeddingNet net;
    std::vector<double> epoch_mean_loss;
};

// epochs x (n / batch_size) batches of sampled triplets through the selected
// loss, Adam updates; fully deterministic per seed
TrainResult train(const ExperimentConfig& config, const Dataset& trainset, const NoiseSpec& noise,
                  LossKind loss, std::uint64_t seed);

using CalibrationModel = std::variant<LogisticModel, ThresholdModel>;

// analytic: threshold model from the margins (losses 2/3 only);
// regression: logistic fit on random train-split pairs
CalibrationModel build_calibration(const EmbeddingNet& net, const Dataset& trainset, LossKind loss,
                                   const ExperimentConfig& config, std::uint64_t seed);

struct ClusterOutcome {
    std::vector<int> cluster_ids;
    int n_clusters = 0;
    ClusterEval eval;
};

ClusterOutcome cluster_and_score(const EmbeddingNet& net, const Dataset& evalset, Method method,
                                 const CalibrationModel& calibration, const ExperimentConfig& config,
                                 std::uint64_t seed);

struct NegLevel {
    double rate = 0.0;
    bool random = false;
};
std::vector<NegLevel> neg_levels(const ExperimentConfig& config);

struct GridRow {
    double pos_noise = 0.0;
    double neg_noise = 0.0;
    bool neg_random = false;
    LossKind loss = LossKind::triplet1;
    Method method = Method::multicut;
    std::uint64_t seed = 0;
    double acc = 0.0;
    int n_clusters = 0;
    double runtime_s = 0.0;
    std::string error;  // empty on success
};

// embeddings of the reference cell (first noise coordinates, first seed),
// kept for the distance-stats and projection reports
struct LossArtifacts {
    LossKind loss = LossKind::triplet1;
    Mat embeddings;
    std::vector<int> labels;
    std::vector<int> cluster_ids;
};

struct GridResult {
    std::vector<GridRow> rows;
    std::vector<LossArtifacts> artifacts;
};

// one cell = one training; emits one row per clustering method
std::vector<GridRow> run_grid_cell(const ExperimentConfig& config, const Dataset& trainset,
                                   const Dataset& testset, int pos_index, int neg_index,
                                   int loss_index, std::uint64_t seed, std::uint64_t global_seed,
                                   LossArtifacts* artifacts_out = nullptr);

GridResult run_grid(const ExperimentConfig& config, std::uint64_t global_seed = 0);

// raw CSV schema: pos_noise, neg_noise, loss, method, seed, acc, n_clusters,
// runtime_s, error ("random" in neg_noise for label-free negatives)
void write_raw_csv(const std::vector<GridRow>& rows, const std::string& path);
std::vector<GridRow> read_raw_csv(const std::string& path);

// Writes raw.csv, per-method aggregate tables, noise-vs-accuracy curves and,
// when artifacts are present, distance-stats and 2-D projection CSVs. Axes
// are derived from the rows, so a re-read raw.csv regenerates every report.
void emit_reports(const GridResult& result, const std::string& out_dir);

}  // namespace triclust
