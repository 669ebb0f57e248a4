#include "docpipe/ocr_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

constexpr double kProbFloor = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    // Four accumulators in a fixed order.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

// Writes the gradient into grad and returns the cost when want_cost is set.
double cost_and_gradient(std::span<const double> theta, const Matrix& X, std::span<const double> y,
                         double lambda, std::vector<double>& grad, bool want_cost) {
    const std::size_t m = X.rows;
    const std::size_t n = X.cols;
    grad.assign(n, 0.0);
    double log_loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto xi = X.row(i);
        const double h = sigmoid(dot(xi, theta));
        if (want_cost) {
            const double hc = std::clamp(h, kProbFloor, 1.0 - kProbFloor);
            log_loss += y[i] * std::log(hc) + (1.0 - y[i]) * std::log(1.0 - hc);
        }
        const double r = h - y[i];
        for (std::size_t j = 0; j < n; ++j) grad[j] += r * xi[j];
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    double penalty = 0.0;
    grad[0] *= inv_m;
    for (std::size_t j = 1; j < n; ++j) {
        grad[j] = grad[j] * inv_m + lambda * inv_m * theta[j];
        penalty += theta[j] * theta[j];
    }
    if (!want_cost) return 0.0;
    return -log_loss * inv_m + lambda / (2.0 * static_cast<double>(m)) * penalty;
}

std::vector<int> class_counts(const TrainingSet& ts) {
    if (ts.alphabet.empty()) throw Error(ErrorKind::InvalidArgument, "training set has an empty alphabet");
    if (ts.X.size() != ts.y.size())
        throw Error(ErrorKind::DimensionMismatch, "training set has mismatched X and y");
    std::vector<int> counts(ts.alphabet.size(), 0);
    for (int label : ts.y) {
        if (label < 0 || label >= static_cast<int>(counts.size()))
            throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(label) + " outside the alphabet");
        ++counts[label];
    }
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw Error(ErrorKind::EmptyClass, std::string("no training samples for '") + ts.alphabet[c] + "'");
    const std::size_t dim = ts.X.front().size();
    for (const auto& row : ts.X)
        if (row.size() != dim) throw Error(ErrorKind::DimensionMismatch, "feature rows differ in length");
    return counts;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Matrix design_matrix(const std::vector<FeatureVector>& X) {
    const std::size_t dim = X.empty() ? 0 : X.front().size();
    Matrix out(X.size(), dim + 1);
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != dim) throw Error(ErrorKind::DimensionMismatch, "feature rows differ in length");
        out(i, 0) = 1.0;
        std::copy(X[i].begin(), X[i].end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols + 1));
    }
    return out;
}

CostGrad logreg_cost_grad(std::span<const double> theta, const Matrix& X, std::span<const double> y,
                          double lambda) {
    if (X.rows == 0) throw Error(ErrorKind::DimensionMismatch, "need at least one sample");
    if (theta.size() != X.cols || y.size() != X.rows)
        throw Error(ErrorKind::DimensionMismatch, "theta/X/y dimensions disagree");
    CostGrad out;
    out.cost = cost_and_gradient(theta, X, y, lambda, out.grad, true);
    return out;
}

std::size_t OcrModel::feature_dim() const {
    if (rows.empty()) return 0;
    return kind == ModelKind::LogReg ? rows.front().size() - 1 : rows.front().size();
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

OcrModel train_logreg(const TrainingSet& ts, const Hyperparams& hp) {
    if (ts.empty()) throw Error(ErrorKind::EmptyClass, "training set is empty");
    if (!(hp.learning_rate > 0) || hp.iterations < 1 || hp.l2_lambda < 0)
        throw Error(ErrorKind::InvalidArgument, "invalid hyperparameters");
    class_counts(ts);

    const Matrix X = design_matrix(ts.X);
    OcrModel model{ModelKind::LogReg, ts.alphabet, std::vector<std::vector<double>>(ts.alphabet.size())};

    parallel_for(ts.alphabet.size(), [&](std::size_t c) {
        std::vector<double> y(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) y[i] = ts.y[i] == static_cast<int>(c) ? 1.0 : 0.0;
        std::vector<double> theta(X.cols, 0.0);
        std::vector<double> grad;
        for (int it = 0; it < hp.iterations; ++it) {
            cost_and_gradient(theta, X, y, hp.l2_lambda, grad, false);
            for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= hp.learning_rate * grad[j];
        }
        model.rows[c] = std::move(theta);
    });
    return model;
}

OcrModel train_centroid(const TrainingSet& ts) {
    if (ts.empty()) throw Error(ErrorKind::EmptyClass, "training set is empty");
    const auto counts = class_counts(ts);
    const std::size_t dim = ts.X.front().size();
    OcrModel model{ModelKind::Centroid, ts.alphabet,
                   std::vector<std::vector<double>>(ts.alphabet.size(), std::vector<double>(dim, 0.0))};
    for (std::size_t i = 0; i < ts.size(); ++i) {
        auto& row = model.rows[ts.y[i]];
        for (std::size_t j = 0; j < dim; ++j) row[j] += ts.X[i][j];
    }
    for (std::size_t c = 0; c < model.rows.size(); ++c)
        for (auto& v : model.rows[c]) v /= counts[c];
    return model;
}

Prediction predict(const OcrModel& model, std::span<const double> fv) {
    if (model.rows.empty()) throw Error(ErrorKind::DimensionMismatch, "model has no classes");
    if (fv.size() != model.feature_dim())
        throw Error(ErrorKind::DimensionMismatch, "feature vector has " + std::to_string(fv.size()) +
                                                      " values, model expects " +
                                                      std::to_string(model.feature_dim()));
    Prediction p;
    p.scores.reserve(model.rows.size());
    for (const auto& row : model.rows) {
        if (model.kind == ModelKind::LogReg) {
            const std::span<const double> w(row);
            p.scores.push_back(sigmoid(row[0] + dot(w.subspan(1), fv)));
        } else {
            double d2 = 0.0;
            for (std::size_t j = 0; j < fv.size(); ++j) d2 += (fv[j] - row[j]) * (fv[j] - row[j]);
            p.scores.push_back(-std::sqrt(d2));
        }
    }
    p.index = argmax(p.scores);
    p.label = model.alphabet[p.index];
    return p;
}

OcrEvaluation evaluate_ocr(const OcrModel& model, const TrainingSet& ts) {
    if (ts.empty()) return {0.0, true};
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (static_cast<int>(predict(model, ts.X[i]).index) == ts.y[i]) ++correct;
    return {static_cast<double>(correct) / static_cast<double>(ts.size()), false};
}

nlohmann::json model_to_json(const OcrModel& model) {
    for (const auto& row : model.rows)
        for (double v : row)
            if (!std::isfinite(v)) throw Error(ErrorKind::FormatError, "model contains non-finite values");
    return {{"kind", model.kind == ModelKind::LogReg ? "logreg" : "centroid"},
            {"alphabet", model.alphabet},
            {"rows", model.rows}};
}

OcrModel model_from_json(const nlohmann::json& j) {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::FormatError, "model: " + what); };
    if (!j.is_object() || !j.contains("kind") || !j.contains("alphabet") || !j.contains("rows"))
        fail("expected an object with kind, alphabet and rows");
    OcrModel model;
    const auto& kind = j.at("kind");
    if (kind == "logreg")
        model.kind = ModelKind::LogReg;
    else if (kind == "centroid")
        model.kind = ModelKind::Centroid;
    else
        fail("unknown kind " + kind.dump());
    if (!j.at("alphabet").is_string()) fail("alphabet must be a string");
    model.alphabet = j.at("alphabet").get<std::string>();
    const auto& rows = j.at("rows");
    if (!rows.is_array()) fail("rows must be an array");
    for (const auto& row : rows) {
        if (!row.is_array()) fail("each row must be an array");
        std::vector<double> values;
        values.reserve(row.size());
        for (const auto& v : row) {
            if (!v.is_number()) fail("row values must be numbers");
            values.push_back(v.get<double>());
            if (!std::isfinite(values.back())) fail("row values must be finite");
        }
        model.rows.push_back(std::move(values));
    }
    if (model.rows.size() != model.alphabet.size()) fail("row count differs from alphabet length");
    for (const auto& row : model.rows)
        if (row.size() != model.rows.front().size()) fail("rows differ in length");
    if (model.kind == ModelKind::LogReg && !model.rows.empty() && model.rows.front().empty())
        fail("logreg rows need a bias term");
    return model;
}

void save_model(const OcrModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << model_to_json(model).dump() << '\n';
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

OcrModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileNotFound, "no such file: " + path.string());
    try {
        return model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
    }
}

}  // namespace docpipe
