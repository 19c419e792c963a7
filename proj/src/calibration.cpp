#include "citeeval/calibration.hpp"

#include "citeeval/errors.hpp"
#include "citeeval/metaeval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace citeeval {

namespace {

// In-place Cholesky factorization A = L L^T (lower triangle). Returns false
// when a pivot is not safely positive.
bool cholesky(std::vector<double>& a, std::size_t p) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, std::abs(a[i * p + i]));
    const double tol = 1e-12 * std::max(1.0, max_diag);
    for (std::size_t j = 0; j < p; ++j) {
        double d = a[j * p + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * p + k] * a[j * p + k];
        if (!(d > tol)) return false;
        const double l = std::sqrt(d);
        a[j * p + j] = l;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
            a[i * p + j] = s / l;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t p, std::vector<double> b) {
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l[i * p + k] * b[k];
        b[i] /= l[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        for (std::size_t k = i + 1; k < p; ++k) b[i] -= l[k * p + i] * b[k];
        b[i] /= l[i * p + i];
    }
    return b;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::map<std::string, double> parse_key_values(const std::string& text) {
    std::map<std::string, double> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string key;
        if (!(fields >> key)) continue;
        double value = 0.0;
        std::string extra;
        if (!(fields >> value) || (fields >> extra)) {
            throw ConfigError("model file line " + std::to_string(lineno) + ": expected '<name> <value>'");
        }
        if (!std::isfinite(value)) throw ConfigError("model file line " + std::to_string(lineno) + ": non-finite value");
        out[key] = value;
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

double OlsFit::predict(std::span<const double> x) const {
    double r = intercept;
    for (std::size_t j = 0; j < coefficients.size() && j < x.size(); ++j) r += coefficients[j] * x[j];
    return r;
}

OlsFit fit_ols(const Matrix& x, std::span<const double> y) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (y.size() != n) throw AlignmentError("fit_ols: X has " + std::to_string(n) + " rows, y has " + std::to_string(y.size()));
    if (n <= p + 1) {
        throw UnderdeterminedError("fit_ols: " + std::to_string(n) + " rows for " + std::to_string(p) +
                                   " coefficients plus intercept");
    }

    // Centering folds the intercept column out of the system; the fitted
    // intercept is recovered from the means.
    std::vector<double> mean_x(p, 0.0);
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) mean_x[j] += x(i, j);
        mean_y += y[i];
    }
    for (auto& m : mean_x) m /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    std::vector<double> gram(p * p, 0.0);
    std::vector<double> rhs(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double yc = y[i] - mean_y;
        for (std::size_t j = 0; j < p; ++j) {
            const double xj = x(i, j) - mean_x[j];
            rhs[j] += xj * yc;
            for (std::size_t k = 0; k <= j; ++k) gram[j * p + k] += xj * (x(i, k) - mean_x[k]);
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < j; ++k) gram[k * p + j] = gram[j * p + k];
    }

    OlsFit fit;
    auto system = gram;
    auto factor = system;
    if (!cholesky(factor, p)) {
        fit.ridge_fallback = true;
        for (std::size_t j = 0; j < p; ++j) system[j * p + j] += kRidgeEpsilon;
        factor = system;
        if (!cholesky(factor, p)) throw UnderdeterminedError("fit_ols: system is singular even with ridge");
    }
    auto w = cholesky_solve(factor, p, rhs);

    // One step of iterative refinement against the (possibly regularized) system.
    std::vector<double> resid(p);
    for (std::size_t j = 0; j < p; ++j) {
        double s = rhs[j];
        for (std::size_t k = 0; k < p; ++k) s -= system[j * p + k] * w[k];
        resid[j] = s;
    }
    const auto delta = cholesky_solve(factor, p, resid);
    for (std::size_t j = 0; j < p; ++j) w[j] += delta[j];

    fit.intercept = mean_y;
    for (std::size_t j = 0; j < p; ++j) fit.intercept -= w[j] * mean_x[j];
    fit.coefficients = std::move(w);
    return fit;
}

EditDistFit fit_edit_distances(std::span<const DevRow> dev) {
    if (dev.empty()) throw InsufficientDataError("fit_edit_distances: empty dev set");
    // Sorting rows makes the fit independent of input order down to the last bit.
    std::vector<const DevRow*> rows;
    rows.reserve(dev.size());
    for (const auto& r : dev) {
        if (!(r.human_likert >= 1.0 && r.human_likert <= 5.0)) {
            throw DomainError("fit_edit_distances: human likert outside [1,5]");
        }
        rows.push_back(&r);
    }
    std::sort(rows.begin(), rows.end(), [](const DevRow* a, const DevRow* b) {
        if (a->features.freq != b->features.freq) return a->features.freq < b->features.freq;
        return a->human_likert < b->human_likert;
    });

    Matrix x(rows.size(), kActionKinds);
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < kActionKinds; ++k) x(i, k) = rows[i]->features.freq[k];
        y[i] = rows[i]->human_likert;
    }
    EditDistFit out;
    out.ols = fit_ols(x, y);
    for (std::size_t k = 0; k < kActionKinds; ++k) out.model.distance[k] = out.ols.coefficients[k];
    out.model.bias = out.ols.intercept;
    return out;
}

EnsembleModel fit_ensemble_lambda(std::span<const EnsembleDevPoint> dev) {
    if (dev.size() < 3) throw InsufficientDataError("fit_ensemble_lambda: needs at least 3 dev points");
    std::vector<double> human;
    human.reserve(dev.size());
    for (const auto& p : dev) human.push_back(p.human);

    constexpr int kSteps = 100;
    constexpr double kTieTolerance = 1e-12;
    std::optional<double> best_lambda;
    double best_r = 0.0;
    std::vector<double> blend(dev.size());
    for (int i = 0; i <= kSteps; ++i) {
        const double lambda = static_cast<double>(i) / kSteps;
        for (std::size_t k = 0; k < dev.size(); ++k) {
            blend[k] = lambda * dev[k].itercoe + (1.0 - lambda) * dev[k].editdist;
        }
        double r = 0.0;
        try {
            r = stats::pearson(blend, human);
        } catch (const UndefinedCorrelationError&) {
            continue;
        }
        if (!best_lambda || r > best_r + kTieTolerance) {
            best_lambda = lambda;
            best_r = r;
        } else if (std::abs(r - best_r) <= kTieTolerance && std::abs(lambda - 0.5) < std::abs(*best_lambda - 0.5)) {
            best_lambda = lambda;
            best_r = std::max(r, best_r);
        }
    }
    if (!best_lambda) throw InsufficientDataError("fit_ensemble_lambda: no blend has a defined correlation");
    return EnsembleModel::make(*best_lambda);
}

std::string format_editdist_model(const EditDistModel& model) {
    std::string out = "# edit-distance model: rating = sum(distance * action frequency) + bias\n";
    for (std::size_t k = 0; k < kActionKinds; ++k) {
        out += std::string(to_string(static_cast<ActionKind>(k))) + ' ' + fmt17(model.distance[k]) + '\n';
    }
    out += "bias " + fmt17(model.bias) + '\n';
    return out;
}

std::string format_ensemble_model(const EnsembleModel& model) {
    return "# ensemble: lambda * itercoe + (1 - lambda) * editdist\nlambda " + fmt17(model.lambda) + '\n';
}

EditDistModel parse_editdist_model(const std::string& text) {
    const auto kv = parse_key_values(text);
    EditDistModel model;
    std::size_t seen = 0;
    for (const auto& [key, value] : kv) {
        if (key == "bias") {
            model.bias = value;
        } else if (const auto kind = action_kind_from_string(key)) {
            model.distance[static_cast<std::size_t>(*kind)] = value;
        } else {
            throw ConfigError("unknown key in edit-distance model: " + key);
        }
        ++seen;
    }
    if (seen != kActionKinds + 1) throw ConfigError("edit-distance model needs 7 action distances and a bias");
    return model;
}

EnsembleModel parse_ensemble_model(const std::string& text) {
    const auto kv = parse_key_values(text);
    const auto it = kv.find("lambda");
    if (it == kv.end() || kv.size() != 1) throw ConfigError("ensemble model needs exactly one 'lambda' entry");
    try {
        return EnsembleModel::make(it->second);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

EditDistModel load_editdist_model(const std::filesystem::path& path) { return parse_editdist_model(read_file(path)); }

EnsembleModel load_ensemble_model(const std::filesystem::path& path) { return parse_ensemble_model(read_file(path)); }

}  // namespace citeeval
