// stylemem: train and probe a classifier-autoencoder whose output layer
// carries a softmax class vector plus a 16-unit style memory.
//
// Subcommands: train, eval, reconstruct, correct, neighbors, interpolate,
// transfer. Every command is deterministic given (seed, config, checkpoint,
// dataset) and writes plain CSV metrics plus PGM/PNG grids.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stylemem/checkpoint.hpp"
#include "stylemem/dataset.hpp"
#include "stylemem/eval.hpp"
#include "stylemem/experiments.hpp"
#include "stylemem/image_io.hpp"
#include "stylemem/metrics_io.hpp"
#include "stylemem/model.hpp"
#include "stylemem/train.hpp"

namespace fs = std::filesystem;
using namespace stylemem;

namespace {

struct CommonOpts {
    std::string dataset = "mnist";
    std::string data_dir;
    std::string checkpoint;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::string format = "pgm";
    unsigned threads = 0;
};

struct TrainOpts {
    std::string preset = "desk";
    std::optional<double> alpha, lr, sigma;
    std::optional<std::size_t> epochs, batch_size;
    std::string precision = "f32";
    std::size_t checkpoint_every = 1;
    bool resume = false;
};

ImageFormat format_of(const CommonOpts& c) { return image_format_from_name(c.format); }

TrainConfig build_train_config(const TrainOpts& t, std::uint64_t seed) {
    TrainConfig cfg = t.preset == "paper" ? TrainConfig::paper_preset() : TrainConfig::desk_preset();
    if (t.alpha) cfg.alpha = *t.alpha;
    if (t.lr) cfg.learning_rate = *t.lr;
    if (t.epochs) cfg.epochs = *t.epochs;
    if (t.batch_size) cfg.batch_size = *t.batch_size;
    if (t.sigma) cfg.sigma = *t.sigma;
    cfg.seed = seed;
    cfg.precision = t.precision == "f64" ? Precision::f64 : Precision::f32;
    cfg.validate();
    return cfg;
}

std::vector<std::size_t> parse_index_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(std::stoull(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

template <typename T>
Checkpoint<T> load_checkpoint_matching(const CommonOpts& common, const Dataset<T>& ds) {
    auto ck = load_checkpoint<T>(common.checkpoint);
    if (ck.params.arch.num_classes != ds.num_classes)
        fail(ErrorCode::bad_argument,
             "checkpoint was trained for " + std::to_string(ck.params.arch.num_classes) +
                 " classes but dataset '" + common.dataset + "' has " + std::to_string(ds.num_classes));
    if (!ck.dataset_id.empty() && ck.dataset_id != common.dataset)
        fail(ErrorCode::bad_argument, "checkpoint was trained on '" + ck.dataset_id +
                                          "', command requested '" + common.dataset + "'");
    return ck;
}

template <typename T>
Tensor<T> image_tile(const Dataset<T>& ds, std::size_t index) {
    const std::size_t side = ds.images.extent(2);
    Tensor<T> tile({side, side});
    std::copy(ds.image(index), ds.image(index) + side * side, tile.begin());
    return tile;
}

template <typename T>
Tensor<T> flat_tile(const Tensor<T>& image) {
    const std::size_t side = image.shape().back();
    Tensor<T> tile({side, side});
    std::copy(image.begin(), image.end(), tile.begin());
    return tile;
}

// ---------------- train ----------------

template <typename T>
int run_train(const CommonOpts& common, const TrainOpts& topts) {
    DatasetKind kind = dataset_kind_from_name(common.dataset);
    auto train_set = load_dataset<T>(kind, common.data_dir, "train");
    auto test_set = load_dataset<T>(kind, common.data_dir, "test");
    fs::create_directories(common.out_dir);

    std::unique_ptr<Trainer<T>> trainer;
    TrainConfig cfg;
    if (topts.resume) {
        auto ck = load_checkpoint_matching<T>(common, train_set);
        cfg = ck.config;
        // a resumed run keeps the checkpoint's configuration; --epochs may
        // extend the target
        if (topts.epochs) cfg.epochs = *topts.epochs;
        trainer = std::make_unique<Trainer<T>>(std::move(ck.params), std::move(ck.optimizer), cfg,
                                               ck.epochs_completed);
        std::printf("resuming '%s' after %llu epochs\n", common.checkpoint.c_str(),
                    static_cast<unsigned long long>(trainer->epochs_completed()));
    } else {
        cfg = build_train_config(topts, common.seed);
        trainer = std::make_unique<Trainer<T>>(ArchConfig::standard(train_set.num_classes), cfg);
    }

    char run_header[256];
    std::snprintf(run_header, sizeof run_header,
                  "dataset=%s preset=%s alpha=%g lr=%g epochs=%zu batch_size=%zu sigma=%g seed=%llu "
                  "precision=%s",
                  common.dataset.c_str(), topts.preset.c_str(), cfg.alpha, cfg.learning_rate, cfg.epochs,
                  cfg.batch_size, cfg.sigma, static_cast<unsigned long long>(cfg.seed),
                  precision_name(cfg.precision));
    CsvWriter log(fs::path(common.out_dir) / "train_metrics.csv",
                  {"epoch", "loss_class", "loss_recon", "loss_joint", "train_accuracy", "test_accuracy"},
                  run_header);

    auto save = [&]() {
        Checkpoint<T> ck;
        ck.dataset_id = common.dataset;
        ck.config = cfg;
        ck.epochs_completed = trainer->epochs_completed();
        ck.params = trainer->params();
        ck.optimizer = trainer->optimizer();
        save_checkpoint(ck, common.checkpoint);
    };

    while (trainer->epochs_completed() < cfg.epochs) {
        EpochMetrics em = trainer->run_epoch(train_set);
        auto eval_result = evaluate(trainer->params(), test_set);
        log.write_row({std::to_string(em.epoch + 1), csv_num(em.loss_class), csv_num(em.loss_recon),
                       csv_num(em.loss_joint), csv_num(em.train_accuracy), csv_num(eval_result.accuracy)});
        std::printf("epoch %llu/%zu  loss_joint=%.5f  train_acc=%.4f  test_acc=%.4f  mean_Lr=%.4f\n",
                    static_cast<unsigned long long>(em.epoch + 1), cfg.epochs, em.loss_joint,
                    em.train_accuracy, eval_result.accuracy, eval_result.mean_recon_error);
        std::fflush(stdout);
        if (trainer->epochs_completed() % topts.checkpoint_every == 0 ||
            trainer->epochs_completed() == cfg.epochs)
            save();
    }
    std::printf("checkpoint -> %s\n", common.checkpoint.c_str());
    return 0;
}

// ---------------- eval ----------------

template <typename T>
int run_eval(const CommonOpts& common) {
    DatasetKind kind = dataset_kind_from_name(common.dataset);
    auto test_set = load_dataset<T>(kind, common.data_dir, "test");
    auto ck = load_checkpoint_matching<T>(common, test_set);
    fs::create_directories(common.out_dir);

    auto result = evaluate(ck.params, test_set);

    CsvWriter per_sample(fs::path(common.out_dir) / "eval_metrics.csv",
                         {"index", "label", "prediction", "confidence", "recon_error"});
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& r = result.records[i];
        per_sample.write_row({std::to_string(i), std::to_string(r.label), std::to_string(r.prediction),
                              csv_num(r.confidence), csv_num(r.recon_error)});
    }

    auto report = misclassification_detector(result.records);
    char partition[220];
    if (report.has_misclassified)
        std::snprintf(partition, sizeof partition,
                      "correct=%zu misclassified=%zu mean_recon_correct=%.9g mean_recon_misclassified=%.9g",
                      report.correct_count, report.misclassified_count, report.mean_recon_correct,
                      report.mean_recon_misclassified);
    else
        std::snprintf(partition, sizeof partition,
                      "correct=%zu misclassified=0 mean_recon_correct=%.9g mean_recon_misclassified=absent",
                      report.correct_count, report.mean_recon_correct);
    CsvWriter sweep(fs::path(common.out_dir) / "misclassification.csv", {"threshold", "precision", "recall"},
                    partition);
    for (const auto& row : report.sweep)
        sweep.write_row({csv_num(row.threshold), csv_num(row.precision), csv_num(row.recall)});

    std::printf("accuracy=%.4f mean_recon_error=%.5f samples=%zu\n", result.accuracy,
                result.mean_recon_error, result.records.size());
    if (report.has_misclassified)
        std::printf("mean recon error: correct=%.5f misclassified=%.5f ratio=%.3f\n",
                    report.mean_recon_correct, report.mean_recon_misclassified,
                    report.mean_recon_misclassified / report.mean_recon_correct);
    else
        std::printf("no misclassified samples; detector partition is degenerate\n");
    return 0;
}

// ---------------- reconstruct ----------------

template <typename T>
int run_reconstruct(const CommonOpts& common, const std::string& indices_csv, std::size_t count) {
    DatasetKind kind = dataset_kind_from_name(common.dataset);
    auto test_set = load_dataset<T>(kind, common.data_dir, "test");
    auto ck = load_checkpoint_matching<T>(common, test_set);
    fs::create_directories(common.out_dir);

    std::vector<std::size_t> indices;
    if (!indices_csv.empty())
        indices = parse_index_list(indices_csv);
    else
        for (std::size_t i = 0; i < std::min(count, test_set.size()); ++i) indices.push_back(i);

    auto samples = reconstruct_samples(ck.params, test_set, indices);

    std::vector<Tensor<T>> tiles;
    for (const auto& s : samples) tiles.push_back(flat_tile(s.original));
    for (const auto& s : samples) tiles.push_back(flat_tile(s.reconstruction));
    write_grid(tiles, 2, samples.size(),
               fs::path(common.out_dir) /
                   (std::string("reconstruct_grid") + image_format_extension(format_of(common))),
               format_of(common));

    CsvWriter csv(fs::path(common.out_dir) / "reconstruct_metrics.csv",
                  {"index", "label", "prediction", "confidence", "recon_error"});
    for (const auto& s : samples)
        csv.write_row({std::to_string(s.index), std::to_string(s.label), std::to_string(s.prediction),
                       csv_num(s.confidence), csv_num(s.recon_error)});
    std::printf("reconstructed %zu samples -> %s\n", samples.size(), common.out_dir.c_str());
    return 0;
}

// ---------------- correct ----------------

template <typename T>
int run_correct(const CommonOpts& common, const std::string& indices_csv, std::size_t count) {
    DatasetKind kind = dataset_kind_from_name(common.dataset);
    auto test_set = load_dataset<T>(kind, common.data_dir, "test");
    auto ck = load_checkpoint_matching<T>(common, test_set);
    fs::create_directories(common.out_dir);

    // default selection: leading misclassified samples, the case one-hot
    // substitution is about
    std::vector<std::size_t> indices;
    if (!indices_csv.empty()) {
        indices = parse_index_list(indices_csv);
    } else {
        auto result = evaluate(ck.params, test_set);
        for (std::size_t i = 0; i < result.records.size() && indices.size() < count; ++i)
            if (result.records[i].prediction != result.records[i].label) indices.push_back(i);
        if (indices.empty()) {
            std::printf("no misclassified samples in the test set; nothing to correct\n");
            CsvWriter csv(fs::path(common.out_dir) / "correct_metrics.csv",
                          {"index", "label", "prediction", "confidence"});
            return 0;
        }
    }

    std::vector<Tensor<T>> top, middle, bottom;
    CsvWriter csv(fs::path(common.out_dir) / "correct_metrics.csv",
                  {"index", "label", "prediction", "confidence"});
    for (std::size_t idx : indices) {
        if (idx >= test_set.size())
            fail(ErrorCode::bad_argument, "correct: index " + std::to_string(idx) + " outside dataset");
        Tensor<T> x({1, ck.params.arch.input_side, ck.params.arch.input_side});
        std::copy(test_set.image(idx), test_set.image(idx) + x.size(), x.begin());
        auto r = correct_and_reconstruct(ck.params, x, static_cast<std::size_t>(test_set.labels[idx]));
        top.push_back(image_tile(test_set, idx));
        middle.push_back(flat_tile(r.predicted_recon));
        bottom.push_back(flat_tile(r.corrected_recon));
        csv.write_row({std::to_string(idx), std::to_string(test_set.labels[idx]),
                       std::to_string(r.prediction), csv_num(r.confidence)});
    }

    std::vector<Tensor<T>> tiles;
    tiles.insert(tiles.end(), top.begin(), top.end());
    tiles.insert(tiles.end(), middle.begin(), middle.end());
    tiles.insert(tiles.end(), bottom.begin(), bottom.end());
    write_grid(tiles, 3, top.size(),
               fs::path(common.out_dir) /
                   (std::string("correct_grid") + image_format_extension(format_of(common))),
               format_of(common));
    std::printf("corrected %zu samples -> %s\n", top.size(), common.out_dir.c_str());
    return 0;
}

// ---------------- neighbors ----------------

template <typename T>
int run_neighbors(const CommonOpts& common, const std::string& queries_csv, std::size_t k,
                  std::size_t query_count) {
    DatasetKind kind = dataset_kind_from_name(common.dataset);
    auto test_set = load_dataset<T>(kind, common.data_dir, "test");
    auto ck = load_checkpoint_matching<T>(common, test_set);
    fs::create_directories(common.out_dir);

    auto result = evaluate(ck.params, test_set);
    std::vector<std::vector<T>> styles(result.records.size());
    for (std::size_t i = 0; i < result.records.size(); ++i) styles[i] = result.records[i].style;

    std::vector<std::size_t> queries;
    if (!queries_csv.empty()) {
        queries = parse_index_list(queries_csv);
    } else {
        Pcg32 rng(mix_seed({common.seed, 0x4E454947ULL}));
        for (std::size_t i = 0; i < query_count; ++i)
            queries.push_back(rng.next_below(static_cast<std::uint32_t>(test_set.size())));
    }

    CsvWriter detail(fs::path(common.out_dir) / "neighbors_metrics.csv",
                     {"query", "space", "rank", "index", "label", "image_distance", "style_distance"});
    std::vector<std::string> summary_header{"query", "query_label", "space", "mean_image_distance",
                                            "mean_style_distance"};
    for (std::size_t c = 0; c < test_set.num_classes; ++c)
        summary_header.push_back("count_class_" + std::to_string(c));
    CsvWriter summary(fs::path(common.out_dir) / "neighbors_summary.csv", summary_header);

    for (std::size_t q : queries) {
        for (auto space : {NeighborSpace::image, NeighborSpace::style}) {
            auto report = nearest_neighbors(test_set, styles, q, space, k);

            // 98-tile grid: query top-left, neighbours across rows in
            // ascending distance
            std::vector<Tensor<T>> tiles;
            tiles.push_back(image_tile(test_set, q));
            for (const auto& e : report.neighbors) tiles.push_back(image_tile(test_set, e.index));
            char name[96];
            std::snprintf(name, sizeof name, "neighbors_q%zu_%s%s", q, neighbor_space_name(space),
                          image_format_extension(format_of(common)));
            const std::size_t cols = 14;
            const std::size_t rows = (tiles.size() + cols - 1) / cols;
            write_grid(tiles, rows, cols, fs::path(common.out_dir) / name, format_of(common));

            for (std::size_t rank = 0; rank < report.neighbors.size(); ++rank) {
                const auto& e = report.neighbors[rank];
                detail.write_row({std::to_string(q), neighbor_space_name(space), std::to_string(rank + 1),
                                  std::to_string(e.index), std::to_string(e.label),
                                  csv_num(e.image_distance), csv_num(e.style_distance)});
            }
            std::vector<std::string> row{std::to_string(q), std::to_string(test_set.labels[q]),
                                         neighbor_space_name(space), csv_num(report.mean_image_distance),
                                         csv_num(report.mean_style_distance)};
            for (std::size_t c = 0; c < test_set.num_classes; ++c)
                row.push_back(std::to_string(report.class_histogram[c]));
            summary.write_row(row);

            std::printf("query %zu (%s space): mean image dist %.3f, mean style dist %.3f\n", q,
                        neighbor_space_name(space), report.mean_image_distance, report.mean_style_distance);
        }
    }
    return 0;
}

// ---------------- interpolate ----------------

template <typename T>
int run_interpolate(const CommonOpts& common, int class_label, const std::string& endpoints_csv) {
    DatasetKind kind = dataset_kind_from_name(common.dataset);
    auto test_set = load_dataset<T>(kind, common.data_dir, "test");
    auto ck = load_checkpoint_matching<T>(common, test_set);
    fs::create_directories(common.out_dir);

    std::size_t ia = 0, ib = 0;
    if (!endpoints_csv.empty()) {
        auto idx = parse_index_list(endpoints_csv);
        if (idx.size() != 2) fail(ErrorCode::bad_argument, "interpolate: --endpoints wants two indices");
        ia = idx[0];
        ib = idx[1];
        if (ia >= test_set.size() || ib >= test_set.size())
            fail(ErrorCode::bad_argument, "interpolate: endpoint index outside dataset");
        if (class_label < 0) class_label = test_set.labels[ia];
    } else {
        if (class_label < 0) class_label = 0;
        std::vector<std::size_t> of_class;
        for (std::size_t i = 0; i < test_set.size() && of_class.size() < 2; ++i)
            if (test_set.labels[i] == class_label) of_class.push_back(i);
        if (of_class.size() < 2)
            fail(ErrorCode::bad_argument, "interpolate: fewer than two samples of class " +
                                              std::to_string(class_label) + " in the test set");
        ia = of_class[0];
        ib = of_class[1];
    }

    auto style_of = [&](std::size_t idx) {
        Tensor<T> x({1, ck.params.arch.input_side, ck.params.arch.input_side});
        std::copy(test_set.image(idx), test_set.image(idx) + x.size(), x.begin());
        return encode(ck.params, x).code.style;
    };
    Tensor<T> m1 = style_of(ia), m2 = style_of(ib);

    auto track =
        interpolate_styles(ck.params, static_cast<std::size_t>(class_label), m1, m2, default_lambda_grid());

    CsvWriter csv(fs::path(common.out_dir) / "interpolate_metrics.csv",
                  {"frame", "lambda", "class", "endpoint_a", "endpoint_b"});
    std::vector<Tensor<T>> tiles;
    for (std::size_t f = 0; f < track.frames.size(); ++f) {
        char name[64];
        std::snprintf(name, sizeof name, "interpolate_frame_%02zu%s", f + 1,
                      image_format_extension(format_of(common)));
        write_grid(std::vector<Tensor<T>>{flat_tile(track.frames[f].image)}, 1, 1,
                   fs::path(common.out_dir) / name, format_of(common));
        tiles.push_back(flat_tile(track.frames[f].image));
        csv.write_row({std::to_string(f + 1), csv_num(track.frames[f].lambda), std::to_string(class_label),
                       std::to_string(ia), std::to_string(ib)});
    }
    write_grid(tiles, 1, tiles.size(),
               fs::path(common.out_dir) /
                   (std::string("interpolate_strip") + image_format_extension(format_of(common))),
               format_of(common));
    std::printf("interpolated class %d between samples %zu and %zu (%zu frames)\n", class_label, ia, ib,
                track.frames.size());
    return 0;
}

// ---------------- transfer ----------------

template <typename T>
int run_transfer(const CommonOpts& common, std::size_t source_index, const std::string& targets_csv) {
    DatasetKind kind = dataset_kind_from_name(common.dataset);
    auto test_set = load_dataset<T>(kind, common.data_dir, "test");
    auto ck = load_checkpoint_matching<T>(common, test_set);
    fs::create_directories(common.out_dir);
    if (source_index >= test_set.size())
        fail(ErrorCode::bad_argument, "transfer: source index outside dataset");

    std::vector<std::size_t> targets;
    if (!targets_csv.empty())
        targets = parse_index_list(targets_csv);
    else
        for (std::size_t c = 0; c < test_set.num_classes; ++c) targets.push_back(c);

    Tensor<T> x({1, ck.params.arch.input_side, ck.params.arch.input_side});
    std::copy(test_set.image(source_index), test_set.image(source_index) + x.size(), x.begin());
    Tensor<T> style = encode(ck.params, x).code.style;

    std::vector<Tensor<T>> tiles{image_tile(test_set, source_index)};
    CsvWriter csv(fs::path(common.out_dir) / "transfer_metrics.csv",
                  {"source_index", "source_label", "target_class"});
    for (std::size_t target : targets) {
        tiles.push_back(flat_tile(transfer_style(ck.params, target, style)));
        csv.write_row({std::to_string(source_index), std::to_string(test_set.labels[source_index]),
                       std::to_string(target)});
    }
    write_grid(tiles, 1, tiles.size(),
               fs::path(common.out_dir) /
                   (std::string("transfer_grid") + image_format_extension(format_of(common))),
               format_of(common));
    std::printf("transferred style of sample %zu onto %zu classes\n", source_index, targets.size());
    return 0;
}

// dispatch an experiment command on the checkpoint's stored precision
template <typename Fn32, typename Fn64>
int with_checkpoint_precision(const std::string& path, Fn32&& f32, Fn64&& f64) {
    auto bytes = read_file_bytes(path);
    return peek_checkpoint_precision(bytes) == Precision::f32 ? f32() : f64();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"classifier-autoencoder with a style memory in the output layer"};
    app.require_subcommand(1);

    CommonOpts common;
    TrainOpts topts;
    std::string indices_csv, queries_csv, endpoints_csv, targets_csv;
    std::size_t k = 97, count = 10, query_count = 2, source_index = 0;
    int class_label = -1;
    double opt_alpha = -1.0, opt_lr = -1.0, opt_sigma = -1.0;
    long long opt_epochs = -1, opt_batch = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--dataset", common.dataset, "mnist or emnist-letters");
        cmd->add_option("--data-dir", common.data_dir, "directory holding the IDX files")->required();
        cmd->add_option("--checkpoint", common.checkpoint, "checkpoint file path")->required();
        cmd->add_option("--out", common.out_dir, "output directory for artifacts");
        cmd->add_option("--seed", common.seed, "seed for every stochastic choice");
        cmd->add_option("--format", common.format, "grid image format: pgm or png")
            ->check(CLI::IsMember({"pgm", "png"}));
        cmd->add_option("--threads", common.threads, "worker threads (default: hardware)");
    };

    CLI::App* train = app.add_subcommand("train", "train a model and write checkpoints");
    add_common(train);
    train->add_option("--preset", topts.preset, "paper (lr 1e-5, 250 epochs) or desk (lr 1e-3, 10 epochs)")
        ->check(CLI::IsMember({"paper", "desk"}));
    train->add_option("--alpha", opt_alpha, "reconstruction loss weight");
    train->add_option("--lr", opt_lr, "Adam learning rate");
    train->add_option("--epochs", opt_epochs, "training epochs");
    train->add_option("--batch-size", opt_batch, "minibatch size");
    train->add_option("--sigma", opt_sigma, "input noise standard deviation");
    train->add_option("--precision", topts.precision, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}));
    train->add_option("--checkpoint-every", topts.checkpoint_every, "save every N epochs");
    train->add_flag("--resume", topts.resume, "continue from the checkpoint file");

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval_cmd);

    CLI::App* reconstruct = app.add_subcommand("reconstruct", "autoencode test samples into a 2-row grid");
    add_common(reconstruct);
    reconstruct->add_option("--indices", indices_csv, "comma-separated test indices");
    reconstruct->add_option("--count", count, "how many leading samples when --indices is absent");

    CLI::App* correct = app.add_subcommand("correct", "one-hot label correction on misclassified samples");
    add_common(correct);
    correct->add_option("--indices", indices_csv, "explicit test indices (default: misclassified)");
    correct->add_option("--count", count, "how many misclassified samples to show");

    CLI::App* neighbors = app.add_subcommand("neighbors", "k nearest neighbours in image and style space");
    add_common(neighbors);
    neighbors->add_option("--queries", queries_csv, "comma-separated query indices");
    neighbors->add_option("--query-count", query_count, "random queries when --queries is absent");
    neighbors->add_option("-k,--k", k, "neighbours per query");

    CLI::App* interpolate =
        app.add_subcommand("interpolate", "decode convex combinations of two style memories");
    add_common(interpolate);
    interpolate->add_option("--class", class_label, "class label (default: class of the first endpoint)");
    interpolate->add_option("--endpoints", endpoints_csv, "two test indices of the same class");

    CLI::App* transfer =
        app.add_subcommand("transfer", "decode one sample's style under other class labels");
    add_common(transfer);
    transfer->add_option("--source", source_index, "test index donating the style memory");
    transfer->add_option("--targets", targets_csv, "comma-separated class labels (default: all)");

    try {
        app.parse(argc, argv);
        if (common.threads > 0) set_thread_count(common.threads);

        if (train->count("--alpha")) topts.alpha = opt_alpha;
        if (train->count("--lr")) topts.lr = opt_lr;
        if (train->count("--epochs")) topts.epochs = static_cast<std::size_t>(opt_epochs);
        if (train->count("--batch-size")) topts.batch_size = static_cast<std::size_t>(opt_batch);
        if (train->count("--sigma")) topts.sigma = opt_sigma;

        if (train->parsed()) {
            if (topts.resume)
                return with_checkpoint_precision(
                    common.checkpoint, [&] { return run_train<float>(common, topts); },
                    [&] { return run_train<double>(common, topts); });
            return topts.precision == "f64" ? run_train<double>(common, topts)
                                            : run_train<float>(common, topts);
        }

        auto dispatch = [&](auto&& fn32, auto&& fn64) {
            return with_checkpoint_precision(common.checkpoint, fn32, fn64);
        };
        if (eval_cmd->parsed())
            return dispatch([&] { return run_eval<float>(common); },
                            [&] { return run_eval<double>(common); });
        if (reconstruct->parsed())
            return dispatch([&] { return run_reconstruct<float>(common, indices_csv, count); },
                            [&] { return run_reconstruct<double>(common, indices_csv, count); });
        if (correct->parsed())
            return dispatch([&] { return run_correct<float>(common, indices_csv, count); },
                            [&] { return run_correct<double>(common, indices_csv, count); });
        if (neighbors->parsed())
            return dispatch([&] { return run_neighbors<float>(common, queries_csv, k, query_count); },
                            [&] { return run_neighbors<double>(common, queries_csv, k, query_count); });
        if (interpolate->parsed())
            return dispatch([&] { return run_interpolate<float>(common, class_label, endpoints_csv); },
                            [&] { return run_interpolate<double>(common, class_label, endpoints_csv); });
        if (transfer->parsed())
            return dispatch([&] { return run_transfer<float>(common, source_index, targets_csv); },
                            [&] { return run_transfer<double>(common, source_index, targets_csv); });
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::fprintf(stderr, "error [usage]: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", e.code_name(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [internal]: %s\n", e.what());
        return 1;
    }
}
