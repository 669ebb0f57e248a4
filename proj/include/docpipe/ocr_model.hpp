#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "docpipe/features.hpp"

namespace docpipe {

struct Hyperparams {
    double learning_rate = 0.5;
    int iterations = 400;
    double l2_lambda = 0.1;
};

// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// X with a leading column of ones.
Matrix design_matrix(const std::vector<FeatureVector>& X);

struct CostGrad {
    double cost = 0.0;
    std::vector<double> grad;
};

double sigmoid(double z);

// Regularized logistic cost and gradient; the bias (index 0) is not
// penalized and h is clamped to [1e-12, 1-1e-12] inside the logarithms.
CostGrad logreg_cost_grad(std::span<const double> theta, const Matrix& X, std::span<const double> y,
                          double lambda);

enum class ModelKind { LogReg, Centroid };

struct OcrModel {
    ModelKind kind = ModelKind::LogReg;
    std::string alphabet;
    // LogReg: one row of bias + weights per letter. Centroid: one mean per letter.
    std::vector<std::vector<double>> rows;

    std::size_t feature_dim() const;

    friend bool operator==(const OcrModel&, const OcrModel&) = default;
};

struct Prediction {
    char label = '?';
    std::size_t index = 0;
    std::vector<double> scores;
};

// Index of the largest value; the first one wins ties.
std::size_t argmax(std::span<const double> values);

// One-vs-all batch gradient descent from theta = 0, exactly hp.iterations
// steps per letter. Letters train in parallel; the result does not depend on
// thread scheduling.
OcrModel train_logreg(const TrainingSet& ts, const Hyperparams& hp = {});
OcrModel train_centroid(const TrainingSet& ts);

Prediction predict(const OcrModel& model, std::span<const double> fv);

struct OcrEvaluation {
    double accuracy = 0.0;
    // Set when the evaluation set was empty (accuracy is then 0).
    bool empty_set = false;
};

OcrEvaluation evaluate_ocr(const OcrModel& model, const TrainingSet& ts);

nlohmann::json model_to_json(const OcrModel& model);
OcrModel model_from_json(const nlohmann::json& j);
void save_model(const OcrModel& model, const std::filesystem::path& path);
OcrModel load_model(const std::filesystem::path& path);

}  // namespace docpipe
