#include "triclust/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "triclust/util.hpp"

namespace triclust {

namespace fs = std::filesystem;
using json = nlohmann::json;

Method method_from_string(const std::string& token) {
    if (token == "multicut") return Method::multicut;
    if (token == "kmeans") return Method::kmeans;
    throw std::invalid_argument("unknown method '" + token + "' (expected multicut|kmeans)");
}

std::string to_string(Method method) {
    return method == Method::multicut ? "multicut" : "kmeans";
}

void ExperimentConfig::validate() const {
    margins();  // throws unless 0 < beta < alpha
    if (losses.empty()) throw std::invalid_argument("config: losses must be non-empty");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
    if (pos_rates.empty() || neg_rates.empty())
        throw std::invalid_argument("config: noise grids must be non-empty (use [0] for no noise)");
    for (double r : pos_rates)
        if (r < 0.0 || r > 1.0) throw std::invalid_argument("config: pos rate outside [0,1]");
    for (double r : neg_rates)
        if (r < 0.0 || r > 1.0) throw std::invalid_argument("config: neg rate outside [0,1]");
    if (epochs < 0) throw std::invalid_argument("config: epochs must be non-negative");
    if (batch_size <= 0) throw std::invalid_argument("config: batch_size must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be positive");
    if (embedding_dims.empty()) throw std::invalid_argument("config: embedding_dims must be non-empty");
    for (int d : embedding_dims)
        if (d <= 0) throw std::invalid_argument("config: embedding dims must be positive");
    if (std::find(methods.begin(), methods.end(), Method::kmeans) != methods.end() && kmeans_k <= 0)
        throw std::invalid_argument("config: kmeans requires the number of clusters, set kmeans_k");
    if (kmeans_restarts <= 0) throw std::invalid_argument("config: kmeans_restarts must be positive");
    if (calibration_pairs <= 1) throw std::invalid_argument("config: calibration_pairs must exceed 1");
    if (calibration == CalibrationMode::analytic) {
        const bool any_thresholdable =
            std::any_of(losses.begin(), losses.end(), [](LossKind l) { return l != LossKind::triplet1; });
        if (!any_thresholdable)
            throw std::invalid_argument(
                "config: analytic calibration requires triplet2 or triplet3; triplet1 only supports regression");
    }
}

ExperimentConfig desk_config() {
    ExperimentConfig c;
    c.dataset.kind = DatasetSpec::Kind::blobs;
    c.dataset.blobs = BlobSpec{10, 100, 16, 10.0, 1.0, 1};
    c.losses = {LossKind::triplet3};
    c.kmeans_k = 10;
    return c;
}

ExperimentConfig config_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig c;

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        const std::string type = d.value("type", "blobs");
        if (type == "blobs") {
            c.dataset.kind = DatasetSpec::Kind::blobs;
            BlobSpec& b = c.dataset.blobs;
            b.k = d.value("k", b.k);
            b.per_class = d.value("per_class", b.per_class);
            b.dim = d.value("dim", b.dim);
            b.center_separation = d.value("center_separation", b.center_separation);
            b.cluster_std = d.value("cluster_std", b.cluster_std);
            b.seed = d.value("seed", b.seed);
        } else if (type == "cifar10") {
            c.dataset.kind = DatasetSpec::Kind::cifar10;
            c.dataset.cifar_dir = d.at("dir").get<std::string>();
        } else {
            throw std::invalid_argument("config: unknown dataset type '" + type + "'");
        }
    }

    if (j.contains("losses")) {
        c.losses.clear();
        for (const auto& t : j.at("losses")) c.losses.push_back(loss_kind_from_string(t.get<std::string>()));
    } else if (j.contains("loss")) {
        c.losses = {loss_kind_from_string(j.at("loss").get<std::string>())};
    }
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    if (j.contains("pos_rates")) c.pos_rates = j.at("pos_rates").get<std::vector<double>>();
    if (j.contains("neg_rates")) c.neg_rates = j.at("neg_rates").get<std::vector<double>>();
    c.neg_random = j.value("neg_random", c.neg_random);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (j.contains("embedding_dims")) c.embedding_dims = j.at("embedding_dims").get<std::vector<int>>();
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& t : j.at("methods")) c.methods.push_back(method_from_string(t.get<std::string>()));
    }
    c.kmeans_k = j.value("kmeans_k", c.kmeans_k);
    c.kmeans_restarts = j.value("kmeans_restarts", c.kmeans_restarts);
    if (j.contains("calibration")) c.calibration = calibration_mode_from_string(j.at("calibration").get<std::string>());
    c.calibration_pairs = j.value("calibration_pairs", c.calibration_pairs);
    c.ramp_scale = j.value("ramp_scale", c.ramp_scale);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.jobs = j.value("jobs", c.jobs);

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str());
}

DatasetPair load_experiment_datasets(const ExperimentConfig& config) {
    if (config.dataset.kind == DatasetSpec::Kind::blobs) {
        return {generate_blobs(config.dataset.blobs, Split::train),
                generate_blobs(config.dataset.blobs, Split::test)};
    }
    std::vector<std::string> train_paths;
    for (int b = 1; b <= 5; ++b)
        train_paths.push_back(config.dataset.cifar_dir + "/data_batch_" + std::to_string(b) + ".bin");
    return {load_cifar10(train_paths, Split::train),
            load_cifar10({config.dataset.cifar_dir + "/test_batch.bin"}, Split::test)};
}

TrainResult train(const ExperimentConfig& config, const Dataset& trainset, const NoiseSpec& noise,
                  LossKind loss, std::uint64_t seed) {
    std::vector<int> dims;
    dims.push_back(trainset.dim());
    dims.insert(dims.end(), config.embedding_dims.begin(), config.embedding_dims.end());

    TrainResult result{EmbeddingNet(dims, seed_mix(seed, 0x12EE7ULL)), {}};
    AdamState adam(result.net, AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
    TripletSampler sampler(trainset.labels);
    Rng rng(seed_mix(seed, 0x5A3BULL));
    const TripletMargins margins = config.margins();

    const int batches = trainset.size() / config.batch_size;
    const double inv_batch = 1.0 / static_cast<double>(config.batch_size);
    EmbeddingNet::Gradients grads = result.net.zero_gradients();
    EmbeddingNet::Trace trace_a, trace_p, trace_n;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int b = 0; b < batches; ++b) {
            const auto batch = sampler.sample_batch(config.batch_size, noise, rng);
            grads.set_zero();
            double batch_loss = 0.0;
            for (const Triplet& t : batch) {
                const Vec fa = result.net.forward(trainset.features.row(t.anchor).transpose(), trace_a);
                const Vec fp = result.net.forward(trainset.features.row(t.positive).transpose(), trace_p);
                const Vec fn = result.net.forward(trainset.features.row(t.negative).transpose(), trace_n);
                const TripletLossResult lr = triplet_loss(loss, fa, fp, fn, margins);
                batch_loss += lr.value;
                // batch mean: scale each upstream gradient by 1/batch
                result.net.backward(trace_a, inv_batch * lr.grad_anchor, grads);
                result.net.backward(trace_p, inv_batch * lr.grad_positive, grads);
                result.net.backward(trace_n, inv_batch * lr.grad_negative, grads);
            }
            adam.step(result.net, grads);
            epoch_loss += batch_loss * inv_batch;
        }
        result.epoch_mean_loss.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    }
    return result;
}

CalibrationModel build_calibration(const EmbeddingNet& net, const Dataset& trainset, LossKind loss,
                                   const ExperimentConfig& config, std::uint64_t seed) {
    // the relative-only loss admits no analytic threshold; it always gets the
    // learned regression, whatever the configured mode
    const CalibrationMode mode = loss == LossKind::triplet1 ? CalibrationMode::regression : config.calibration;
    if (mode == CalibrationMode::analytic) return make_threshold_model(config.margins(), config.ramp_scale);

    const Mat embeddings = net.forward_batch(trainset.features);
    Rng rng(seed);
    const int n = trainset.size();
    std::vector<double> distances;
    std::vector<int> labels;
    distances.reserve(config.calibration_pairs);
    labels.reserve(config.calibration_pairs);
    for (int p = 0; p < config.calibration_pairs; ++p) {
        const int i = rng.index(n);
        int j = rng.index(n);
        while (j == i) j = rng.index(n);
        distances.push_back((embeddings.row(i) - embeddings.row(j)).norm());
        labels.push_back(trainset.labels[i] == trainset.labels[j] ? 0 : 1);
    }
    return fit_logistic(distances, labels);
}

ClusterOutcome cluster_and_score(const EmbeddingNet& net, const Dataset& evalset, Method method,
                                 const CalibrationModel& calibration, const ExperimentConfig& config,
                                 std::uint64_t seed) {
    const Mat embeddings = net.forward_batch(evalset.features);
    ClusterOutcome outcome;

    if (method == Method::kmeans) {
        if (config.kmeans_k <= 0)
            throw std::invalid_argument("cluster_and_score: kmeans needs kmeans_k set beforehand");
        Rng rng(seed);
        const KMeansResult km = kmeans(embeddings, config.kmeans_k, config.kmeans_restarts, rng);
        outcome.cluster_ids = km.assignment;
    } else {
        const int n = evalset.size();
        const Mat dist = pairwise_distances(embeddings);
        CostGraph g = CostGraph::complete(n);
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) {
                const double p_cut = std::visit([&](const auto& m) { return cut_probability(m, dist(u, v)); },
                                                calibration);
                g.set_cost(u, v, edge_cost(p_cut));
            }
        const Partition p = kl_refine(g, gaec(g));
        outcome.cluster_ids = p.labels;
    }

    outcome.eval = accuracy(outcome.cluster_ids, evalset.labels);
    outcome.n_clusters = outcome.eval.n_pred_clusters;
    return outcome;
}

std::vector<NegLevel> neg_levels(const ExperimentConfig& config) {
    std::vector<NegLevel> levels;
    for (double r : config.neg_rates) levels.push_back({r, false});
    if (config.neg_random) levels.push_back({0.0, true});
    return levels;
}

std::vector<GridRow> run_grid_cell(const ExperimentConfig& config, const Dataset& trainset,
                                   const Dataset& testset, int pos_index, int neg_index,
                                   int loss_index, std::uint64_t seed, std::uint64_t global_seed,
                                   LossArtifacts* artifacts_out) {
    const auto levels = neg_levels(config);
    const NegLevel level = levels.at(neg_index);
    const double pos_rate = config.pos_rates.at(pos_index);
    const LossKind loss = config.losses.at(loss_index);
    const NoiseSpec noise(pos_rate, level.rate, level.random);
    const std::uint64_t cell_seed = seed_mix(global_seed, seed, pos_index, neg_index, loss_index);

    using clock = std::chrono::steady_clock;
    const auto t_train0 = clock::now();
    const TrainResult trained = train(config, trainset, noise, loss, seed_mix(cell_seed, 0x7EA1ULL));
    const double train_s = std::chrono::duration<double>(clock::now() - t_train0).count();

    const bool needs_calibration =
        std::find(config.methods.begin(), config.methods.end(), Method::multicut) != config.methods.end();
    CalibrationModel calibration = ThresholdModel{1.0, 1.0};
    if (needs_calibration)
        calibration = build_calibration(trained.net, trainset, loss, config, seed_mix(cell_seed, 0xCA1BULL));

    std::vector<GridRow> rows;
    for (const Method method : config.methods) {
        const auto t0 = clock::now();
        const ClusterOutcome outcome = cluster_and_score(
            trained.net, testset, method, calibration, config,
            seed_mix(cell_seed, method == Method::multicut ? 0x111ULL : 0x222ULL));
        GridRow row;
        row.pos_noise = pos_rate;
        row.neg_noise = level.rate;
        row.neg_random = level.random;
        row.loss = loss;
        row.method = method;
        row.seed = seed;
        row.acc = outcome.eval.acc;
        row.n_clusters = outcome.n_clusters;
        row.runtime_s = train_s + std::chrono::duration<double>(clock::now() - t0).count();
        rows.push_back(std::move(row));

        if (artifacts_out && (method == Method::multicut || artifacts_out->cluster_ids.empty())) {
            artifacts_out->loss = loss;
            artifacts_out->cluster_ids = outcome.cluster_ids;
        }
    }
    if (artifacts_out) {
        artifacts_out->loss = loss;
        artifacts_out->embeddings = trained.net.forward_batch(testset.features);
        artifacts_out->labels = testset.labels;
    }
    return rows;
}

GridResult run_grid(const ExperimentConfig& config, std::uint64_t global_seed) {
    config.validate();
    const DatasetPair data = load_experiment_datasets(config);
    const auto levels = neg_levels(config);

    struct Task {
        int pos_index, neg_index, loss_index, seed_index;
    };
    std::vector<Task> tasks;
    for (int p = 0; p < static_cast<int>(config.pos_rates.size()); ++p)
        for (int g = 0; g < static_cast<int>(levels.size()); ++g)
            for (int l = 0; l < static_cast<int>(config.losses.size()); ++l)
                for (int s = 0; s < static_cast<int>(config.seeds.size()); ++s) tasks.push_back({p, g, l, s});

    const std::size_t methods_per_task = config.methods.size();
    std::vector<GridRow> rows(tasks.size() * methods_per_task);
    std::vector<LossArtifacts> artifacts(config.losses.size());

    unsigned workers = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));

    std::atomic<std::size_t> next{0};
    auto worker_loop = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) return;
            const Task& task = tasks[idx];
            const std::uint64_t seed = config.seeds[task.seed_index];
            const bool is_reference = task.pos_index == 0 && task.neg_index == 0 && task.seed_index == 0;
            LossArtifacts* art = is_reference ? &artifacts[task.loss_index] : nullptr;
            try {
                auto cell_rows =
                    run_grid_cell(config, data.train, data.test, task.pos_index, task.neg_index,
                                  task.loss_index, seed, global_seed, art);
                for (std::size_t m = 0; m < cell_rows.size(); ++m)
                    rows[idx * methods_per_task + m] = std::move(cell_rows[m]);
            } catch (const std::exception& e) {
                for (std::size_t m = 0; m < methods_per_task; ++m) {
                    GridRow row;
                    row.pos_noise = config.pos_rates[task.pos_index];
                    row.neg_noise = levels[task.neg_index].rate;
                    row.neg_random = levels[task.neg_index].random;
                    row.loss = config.losses[task.loss_index];
                    row.method = config.methods[m];
                    row.seed = seed;
                    row.acc = std::numeric_limits<double>::quiet_NaN();
                    row.error = e.what();
                    rows[idx * methods_per_task + m] = std::move(row);
                }
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker_loop);
    worker_loop();
    for (auto& t : pool) t.join();

    GridResult result;
    result.rows = std::move(rows);
    for (auto& art : artifacts)
        if (art.embeddings.size() > 0) result.artifacts.push_back(std::move(art));
    return result;
}

namespace {

std::string sanitize_error(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

std::string neg_token(const GridRow& row) {
    return row.neg_random ? "random" : format_double(row.neg_noise);
}

}  // namespace

void write_raw_csv(const std::vector<GridRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_raw_csv: cannot open " + path);
    out << "pos_noise,neg_noise,loss,method,seed,acc,n_clusters,runtime_s,error\n";
    for (const auto& r : rows) {
        out << format_double(r.pos_noise) << ',' << neg_token(r) << ',' << to_string(r.loss) << ','
            << to_string(r.method) << ',' << r.seed << ',' << format_double(r.acc) << ',' << r.n_clusters
            << ',' << format_double(r.runtime_s) << ',' << sanitize_error(r.error) << '\n';
    }
}

std::vector<GridRow> read_raw_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_raw_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_raw_csv: empty file " + path);
    std::vector<GridRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) throw std::runtime_error("read_raw_csv: bad row '" + line + "'");
        GridRow r;
        r.pos_noise = parse_double(cells[0]);
        if (cells[1] == "random") {
            r.neg_random = true;
        } else {
            r.neg_noise = parse_double(cells[1]);
        }
        r.loss = loss_kind_from_string(cells[2]);
        r.method = method_from_string(cells[3]);
        r.seed = static_cast<std::uint64_t>(parse_long(cells[4]));
        r.acc = parse_double(cells[5]);
        r.n_clusters = static_cast<int>(parse_long(cells[6]));
        r.runtime_s = parse_double(cells[7]);
        r.error = cells[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

struct CellKey {
    double pos;
    double neg;
    bool neg_random;
    int loss;
    int method;
    auto operator<=>(const CellKey&) const = default;
};

struct CellAgg {
    std::vector<double> accs;

    double mean() const {
        double s = 0.0;
        for (double a : accs) s += a;
        return s / static_cast<double>(accs.size());
    }
    // population convention (divide by n), matching error bars over a fixed seed set
    double stddev() const {
        const double m = mean();
        double s = 0.0;
        for (double a : accs) s += (a - m) * (a - m);
        return std::sqrt(s / static_cast<double>(accs.size()));
    }
};

template <typename T>
std::vector<T> unique_in_order(const std::vector<T>& values) {
    std::vector<T> out;
    for (const T& v : values)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

std::string fixed4(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

void emit_reports(const GridResult& result, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_raw_csv(result.rows, out_dir + "/raw.csv");

    std::map<CellKey, CellAgg> cells;
    std::vector<double> pos_axis;
    std::vector<std::string> neg_axis_tokens;
    std::vector<std::pair<double, bool>> neg_axis;
    std::vector<int> losses, methods;
    for (const auto& r : result.rows) {
        pos_axis.push_back(r.pos_noise);
        neg_axis.emplace_back(r.neg_noise, r.neg_random);
        losses.push_back(static_cast<int>(r.loss));
        methods.push_back(static_cast<int>(r.method));
        if (!r.error.empty() || std::isnan(r.acc)) continue;
        cells[{r.pos_noise, r.neg_noise, r.neg_random, static_cast<int>(r.loss), static_cast<int>(r.method)}]
            .accs.push_back(r.acc);
    }
    pos_axis = unique_in_order(pos_axis);
    neg_axis = unique_in_order(neg_axis);
    losses = unique_in_order(losses);
    methods = unique_in_order(methods);

    auto cell_of = [&](double pos, std::pair<double, bool> neg, int loss, int method) -> const CellAgg* {
        const auto it = cells.find({pos, neg.first, neg.second, loss, method});
        return it == cells.end() ? nullptr : &it->second;
    };
    auto neg_label = [](const std::pair<double, bool>& neg) {
        return neg.second ? std::string("random") : format_double(neg.first);
    };

    // Noise tables, one per method: rows are positive-noise rates, column
    // blocks one loss x negative-level each.
    for (int method : methods) {
        std::ofstream out(out_dir + "/table_" + to_string(static_cast<Method>(method)) + ".csv");
        out << "# mean ACC over seeds\n";
        out << "pos_noise";
        for (int loss : losses)
            for (const auto& neg : neg_axis)
                out << ',' << to_string(static_cast<LossKind>(loss)) << ":neg=" << neg_label(neg);
        out << '\n';
        for (double pos : pos_axis) {
            out << format_double(pos);
            for (int loss : losses)
                for (const auto& neg : neg_axis) {
                    const CellAgg* agg = cell_of(pos, neg, loss, method);
                    out << ',' << (agg ? fixed4(agg->mean()) : "");
                }
            out << '\n';
        }
    }

    // Noise-vs-accuracy curves: positive-only, negative-only and the equal
    // noise diagonal.
    {
        std::ofstream out(out_dir + "/curves.csv");
        out << "# std: population (divide by n) over the seed set\n";
        out << "axis,loss,method,noise,acc_mean,acc_std,n_seeds\n";
        auto emit = [&](const std::string& axis, int loss, int method, const std::string& noise,
                        const CellAgg* agg) {
            if (!agg) return;
            out << axis << ',' << to_string(static_cast<LossKind>(loss)) << ','
                << to_string(static_cast<Method>(method)) << ',' << noise << ','
                << format_double(agg->mean()) << ',' << format_double(agg->stddev()) << ','
                << agg->accs.size() << '\n';
        };
        const std::pair<double, bool> neg_zero{0.0, false};
        for (int loss : losses)
            for (int method : methods) {
                for (double pos : pos_axis)
                    emit("pos", loss, method, format_double(pos), cell_of(pos, neg_zero, loss, method));
                for (const auto& neg : neg_axis)
                    emit("neg", loss, method, neg_label(neg), cell_of(0.0, neg, loss, method));
                for (double pos : pos_axis)
                    emit("both", loss, method, format_double(pos),
                         cell_of(pos, {pos, false}, loss, method));
            }
    }

    // Reference-cell reports per loss: distance bands and a 2-D projection.
    for (const auto& art : result.artifacts) {
        const std::string tag = to_string(art.loss);
        write_distance_stats_csv(distance_stats(art.embeddings, art.labels), out_dir + "/stats_" + tag + ".csv");

        const Mat proj = pca_project(art.embeddings, 2);
        std::ofstream out(out_dir + "/pca_" + tag + ".csv");
        out << "x,y,cluster,label\n";
        for (Eigen::Index i = 0; i < proj.rows(); ++i)
            out << format_double(proj(i, 0)) << ',' << format_double(proj(i, 1)) << ','
                << art.cluster_ids[i] << ',' << art.labels[i] << '\n';
    }
}

}  // namespace triclust
