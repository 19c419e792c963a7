#pragma once

#include "citeeval/rating.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace citeeval {

// Dense row-major matrix, just enough for small regression problems.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct OlsFit {
    std::vector<double> coefficients;
    double intercept = 0.0;
    bool ridge_fallback = false;  // normal equations were singular

    double predict(std::span<const double> x) const;
};

inline constexpr double kRidgeEpsilon = 1e-8;

// Least squares with an intercept, via the normal equations and a Cholesky
// solve. Singular systems get kRidgeEpsilon added to the diagonal. Requires
// more rows than coefficients plus intercept.
OlsFit fit_ols(const Matrix& x, std::span<const double> y);

struct DevRow {
    ActionFeatureVector features;
    double human_likert = 0.0;  // 1-5, possibly a mean of passes
};

struct EditDistFit {
    EditDistModel model;
    OlsFit ols;
};

EditDistFit fit_edit_distances(std::span<const DevRow> dev);

struct EnsembleDevPoint {
    double itercoe = 0.0;
    double editdist = 0.0;
    double human = 0.0;
};

inline constexpr double kLambdaGridStep = 0.01;

// Grid search over lambda in [0,1] maximizing dev Pearson of the blend; ties
// go to the lambda closest to 0.5.
EnsembleModel fit_ensemble_lambda(std::span<const EnsembleDevPoint> dev);

// Plain-text "name value" model files.
std::string format_editdist_model(const EditDistModel& model);
std::string format_ensemble_model(const EnsembleModel& model);
EditDistModel parse_editdist_model(const std::string& text);
EnsembleModel parse_ensemble_model(const std::string& text);
EditDistModel load_editdist_model(const std::filesystem::path& path);
EnsembleModel load_ensemble_model(const std::filesystem::path& path);

}  // namespace citeeval
