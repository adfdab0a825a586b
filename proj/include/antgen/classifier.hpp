#pragma once

#include "antgen/dataset.hpp"
#include "antgen/raster.hpp"
#include "antgen/scoring.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace antgen {

/// Layer layout of the score network: `conv_channels.size()` stages of
/// 3x3 convolution + ReLU + 2x2 max-pool, a flattened feature map, and two
/// independent fully connected heads (score, and optionally S11 response).
struct NetworkShape {
    int in_height = 0;
    int in_width = 0;
    std::vector<int> conv_channels{8, 16, 32, 32};
    int hidden = 32;
    int response_size = 0;  ///< 0 disables the response head

    int feature_size() const;
    friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct NetworkParams {
    NetworkShape shape;
    std::vector<std::vector<float>> tensors;

    std::size_t parameter_count() const;
    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

struct TrainConfig {
    std::vector<int> conv_channels{8, 16, 32, 32};
    int hidden = 32;
    int max_epochs = 60;
    int batch_size = 16;
    double learning_rate = 2e-3;
    double weight_decay = 1e-4;
    double dropout = 0.2;
    int plateau_patience = 4;
    double plateau_factor = 0.5;
    double min_learning_rate = 1e-5;
    int early_stop_patience = 12;
    double validation_fraction = 0.1;
    bool response_head = false;
    double response_weight = 0.1;
    std::size_t min_records = 50;
    std::uint64_t seed = 1;
    int iteration = 0;  ///< generator iteration this model is trained for (metadata only)
};

struct EpochLog {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double learning_rate = 0.0;
};

struct TrainingMetadata {
    int epochs = 0;
    std::size_t data_size = 0;
    std::size_t validation_size = 0;
    int iteration = 0;
    bool zero_variance_labels = false;
    std::vector<EpochLog> log;
};

struct ClassifierState {
    NetworkParams network;
    double label_mean = 0.0;
    double label_scale = 1.0;
    double response_scale = 10.0;
    /// Decision threshold in dB; +inf disables the filter.
    double threshold = std::numeric_limits<double>::infinity();
    TrainingMetadata meta;
};

/// Fits the score head (and the response head when enabled) by minibatch
/// AdamW with dropout, plateau learning-rate decay and early stopping. The
/// validation split is carved from the records by id, so it does not depend on
/// record order. Deterministic for a given seed.
ClassifierState train(std::span<const DatasetRecord> records, const TrainConfig& cfg);

/// Fresh randomly initialized network; mostly useful for tests.
NetworkParams init_network(const NetworkShape& shape, std::uint64_t seed);

Score predict_score(const ClassifierState& state, const GeometryImage& img);
/// Predicted S11 (dB) on the training grid; requires the response head.
std::vector<double> predict_response(const ClassifierState& state, const GeometryImage& img);

/// Positive iff predicted score <= threshold (lower scores are better).
inline bool classify_score(double predicted, double threshold) { return predicted <= threshold; }
bool classify(const ClassifierState& state, const GeometryImage& img);

struct Evaluation {
    double mse = 0.0;
    std::optional<double> tp_rate;  ///< undefined when there are no actual positives
    std::optional<double> fp_rate;  ///< undefined when there are no actual negatives
    std::size_t actual_positive = 0;
    std::size_t actual_negative = 0;
};

Evaluation evaluate(const ClassifierState& state, std::span<const DatasetRecord> records);
/// Same rates from precomputed predictions and labels.
Evaluation evaluate_predictions(std::span<const double> predicted, std::span<const double> actual,
                                double threshold);

/// Single binary file: magic, version, JSON header, raw float parameters.
void save_checkpoint(const ClassifierState& state, const std::string& path);
ClassifierState load_checkpoint(const std::string& path);

/// CSV "epoch,train_mse,val_mse,lr".
void write_training_log(const ClassifierState& state, const std::string& path);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace antgen
