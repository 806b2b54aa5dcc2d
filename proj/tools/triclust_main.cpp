// Command line front end: data generation, training, clustering, evaluation,
// the noise grid and report regeneration.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "triclust/experiment.hpp"
#include "triclust/util.hpp"

namespace fs = std::filesystem;
using namespace triclust;

namespace {

struct CommonTrainArgs {
    std::string config_path;
    std::string train_csv;
    std::string loss = "triplet3";
    double alpha = 0.8, beta = 0.4;
    int epochs = 20, batch_size = 100;
    double learning_rate = 1e-3;
    std::vector<int> dims{64, 32};
    double pos_noise = 0.0, neg_noise = 0.0;
    bool neg_random = false;
    std::uint64_t seed = 1;
};

ExperimentConfig config_for(const CommonTrainArgs& args) {
    ExperimentConfig config = args.config_path.empty() ? desk_config() : load_config(args.config_path);
    if (args.config_path.empty()) {
        config.alpha = args.alpha;
        config.beta = args.beta;
        config.epochs = args.epochs;
        config.batch_size = args.batch_size;
        config.learning_rate = args.learning_rate;
        config.embedding_dims = args.dims;
    }
    config.losses = {loss_kind_from_string(args.loss)};
    return config;
}

Dataset dataset_for(const CommonTrainArgs& args, const ExperimentConfig& config, Split split) {
    if (!args.train_csv.empty()) return load_dataset_csv(args.train_csv, split);
    const DatasetPair pair = load_experiment_datasets(config);
    return split == Split::train ? pair.train : pair.test;
}

int cmd_gen_data(const BlobSpec& spec, const std::string& out_dir) {
    fs::create_directories(out_dir);
    save_dataset_csv(generate_blobs(spec, Split::train), out_dir + "/train.csv");
    save_dataset_csv(generate_blobs(spec, Split::test), out_dir + "/test.csv");
    std::cout << "wrote " << out_dir << "/train.csv and " << out_dir << "/test.csv ("
              << spec.k * spec.per_class << " samples each, dim " << spec.dim << ")\n";
    return 0;
}

int cmd_train(const CommonTrainArgs& args, const std::string& model_out) {
    const ExperimentConfig config = config_for(args);
    const Dataset trainset = dataset_for(args, config, Split::train);
    const NoiseSpec noise(args.pos_noise, args.neg_noise, args.neg_random);

    const TrainResult result = train(config, trainset, noise, config.losses[0], args.seed);
    for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
        std::cout << "epoch " << e + 1 << " mean loss " << result.epoch_mean_loss[e] << '\n';
    result.net.save(model_out);
    std::cout << "saved model to " << model_out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"triplet-loss embeddings, multicut and k-means clustering under label noise"};
    app.require_subcommand(1);

    // gen-data
    BlobSpec blob_spec;
    std::string gen_out = "data";
    auto* gen = app.add_subcommand("gen-data", "generate synthetic blob train/test CSVs");
    gen->add_option("--k", blob_spec.k, "number of classes");
    gen->add_option("--per-class", blob_spec.per_class, "samples per class and split");
    gen->add_option("--dim", blob_spec.dim, "feature dimension");
    gen->add_option("--separation", blob_spec.center_separation, "minimum center distance");
    gen->add_option("--std", blob_spec.cluster_std, "per-cluster standard deviation");
    gen->add_option("--seed", blob_spec.seed, "dataset seed");
    gen->add_option("--out", gen_out, "output directory");

    // train
    CommonTrainArgs train_args;
    std::string model_out = "model.json";
    auto* tr = app.add_subcommand("train", "train an embedding net with a triplet loss");
    tr->add_option("--config", train_args.config_path, "experiment config JSON");
    tr->add_option("--train-csv", train_args.train_csv, "training data CSV (overrides config dataset)");
    tr->add_option("--loss", train_args.loss, "triplet1|triplet2|triplet3");
    tr->add_option("--alpha", train_args.alpha, "margin alpha");
    tr->add_option("--beta", train_args.beta, "margin beta");
    tr->add_option("--epochs", train_args.epochs, "training epochs");
    tr->add_option("--batch-size", train_args.batch_size, "triplets per batch");
    tr->add_option("--lr", train_args.learning_rate, "Adam learning rate");
    tr->add_option("--dims", train_args.dims, "hidden and output layer sizes");
    tr->add_option("--pos-noise", train_args.pos_noise, "positive label noise rate");
    tr->add_option("--neg-noise", train_args.neg_noise, "negative label noise rate");
    tr->add_flag("--neg-random", train_args.neg_random, "draw negatives ignoring labels");
    tr->add_option("--seed", train_args.seed, "training seed");
    tr->add_option("--out", model_out, "model checkpoint path");

    // cluster
    std::string cl_model, cl_data, cl_method = "multicut", cl_calibration = "analytic";
    std::string cl_train_csv, cl_partition_out = "partition.txt", cl_graph_out, cl_stats_out;
    double cl_alpha = 0.8, cl_beta = 0.4, cl_scale = 0.0;
    int cl_k = 0;
    int cl_restarts = 10;
    std::uint64_t cl_seed = 1;
    auto* cl = app.add_subcommand("cluster", "embed a dataset and cluster it");
    cl->add_option("--model", cl_model, "model checkpoint")->required();
    cl->add_option("--data", cl_data, "labeled data CSV to cluster")->required();
    cl->add_option("--method", cl_method, "multicut|kmeans");
    cl->add_option("--calibration", cl_calibration, "regression|analytic (multicut)");
    cl->add_option("--train-csv", cl_train_csv, "training CSV for regression calibration");
    cl->add_option("--alpha", cl_alpha, "margin alpha for the analytic threshold");
    cl->add_option("--beta", cl_beta, "margin beta for the analytic threshold");
    cl->add_option("--scale", cl_scale, "probability ramp scale (default tau/8)");
    cl->add_option("--k", cl_k, "cluster count, required for kmeans");
    cl->add_option("--restarts", cl_restarts, "kmeans restarts");
    cl->add_option("--seed", cl_seed, "clustering seed");
    cl->add_option("--out", cl_partition_out, "partition output file");
    cl->add_option("--graph-out", cl_graph_out, "also dump the cost graph edge list");
    cl->add_option("--stats-out", cl_stats_out, "also dump distance stats CSV");

    // eval
    std::string ev_pred, ev_data;
    auto* ev = app.add_subcommand("eval", "score a partition file against true labels");
    ev->add_option("--pred", ev_pred, "partition file (node component)")->required();
    ev->add_option("--data", ev_data, "labeled data CSV")->required();

    // grid
    std::string grid_config;
    std::uint64_t grid_seed = 0;
    int grid_jobs = 0;
    auto* gr = app.add_subcommand("grid", "run the full noise grid and write reports");
    gr->add_option("--config", grid_config, "experiment config JSON")->required();
    gr->add_option("--seed", grid_seed, "global seed mixed into every cell");
    gr->add_option("--jobs", grid_jobs, "worker threads (0 = hardware)");

    // report
    std::string rep_raw, rep_out = "report";
    auto* rep = app.add_subcommand("report", "regenerate aggregate reports from a raw CSV");
    rep->add_option("--raw", rep_raw, "raw.csv from a grid run")->required();
    rep->add_option("--out", rep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(blob_spec, gen_out);
        if (tr->parsed()) return cmd_train(train_args, model_out);

        if (cl->parsed()) {
            const EmbeddingNet net = EmbeddingNet::load(cl_model);
            const Dataset data = load_dataset_csv(cl_data, Split::test);
            const Method method = method_from_string(cl_method);

            ExperimentConfig config = desk_config();
            config.alpha = cl_alpha;
            config.beta = cl_beta;
            config.ramp_scale = cl_scale;
            config.kmeans_k = cl_k;
            config.kmeans_restarts = cl_restarts;
            config.calibration = calibration_mode_from_string(cl_calibration);
            config.methods = {method};

            if (method == Method::kmeans && cl_k <= 0) {
                std::cerr << "kmeans needs the number of clusters up front: pass --k\n";
                return 2;
            }

            CalibrationModel calibration = ThresholdModel{1.0, 1.0};
            if (method == Method::multicut) {
                if (config.calibration == CalibrationMode::analytic) {
                    calibration = make_threshold_model(config.margins(), config.ramp_scale);
                } else {
                    if (cl_train_csv.empty()) {
                        std::cerr << "regression calibration needs --train-csv\n";
                        return 2;
                    }
                    const Dataset trainset = load_dataset_csv(cl_train_csv, Split::train);
                    calibration = build_calibration(net, trainset, LossKind::triplet1, config,
                                                    seed_mix(cl_seed, 0xCA1BULL));
                }
            }

            const ClusterOutcome outcome =
                cluster_and_score(net, data, method, calibration, config, seed_mix(cl_seed, 0x111ULL));
            write_partition(Partition(outcome.cluster_ids), cl_partition_out);
            std::cout << "clusters: " << outcome.n_clusters << "  ACC: " << outcome.eval.acc << '\n';
            std::cout << "wrote partition to " << cl_partition_out << '\n';

            if (!cl_graph_out.empty() && method == Method::multicut) {
                const Mat embeddings = net.forward_batch(data.features);
                const Mat dist = pairwise_distances(embeddings);
                CostGraph g = CostGraph::complete(data.size());
                for (int u = 0; u < data.size(); ++u)
                    for (int v = u + 1; v < data.size(); ++v) {
                        const double p = std::visit(
                            [&](const auto& m) { return cut_probability(m, dist(u, v)); }, calibration);
                        g.set_cost(u, v, edge_cost(p));
                    }
                write_cost_graph(g, cl_graph_out);
                std::cout << "wrote cost graph to " << cl_graph_out << '\n';
            }
            if (!cl_stats_out.empty()) {
                const Mat embeddings = net.forward_batch(data.features);
                write_distance_stats_csv(distance_stats(embeddings, data.labels), cl_stats_out);
                std::cout << "wrote distance stats to " << cl_stats_out << '\n';
            }
            return 0;
        }

        if (ev->parsed()) {
            const Dataset data = load_dataset_csv(ev_data, Split::test);
            const Partition pred = read_partition(ev_pred);
            if (pred.size() != data.size()) {
                std::cerr << "partition covers " << pred.size() << " nodes, data has " << data.size() << '\n';
                return 2;
            }
            const ClusterEval eval = accuracy(pred.labels, data.labels);
            std::cout << "ACC: " << eval.acc << "  predicted clusters: " << eval.n_pred_clusters << '\n';
            return 0;
        }

        if (gr->parsed()) {
            ExperimentConfig config = load_config(grid_config);
            if (grid_jobs > 0) config.jobs = grid_jobs;
            const GridResult result = run_grid(config, grid_seed);
            emit_reports(result, config.output_dir);
            int failed = 0;
            for (const auto& row : result.rows)
                if (!row.error.empty()) ++failed;
            std::cout << "grid complete: " << result.rows.size() << " rows (" << failed
                      << " failed) -> " << config.output_dir << '\n';
            return failed == 0 ? 0 : 1;
        }

        if (rep->parsed()) {
            GridResult result;
            result.rows = read_raw_csv(rep_raw);
            emit_reports(result, rep_out);
            std::cout << "reports regenerated in " << rep_out << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
