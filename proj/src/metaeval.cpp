#include "citeeval/metaeval.hpp"

#include "citeeval/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>

namespace citeeval::stats {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
    if (x.size() != y.size()) {
        throw AlignmentError(std::string(what) + ": length mismatch " + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()));
    }
    if (x.size() < 2) throw UndefinedCorrelationError(std::string(what) + ": needs at least 2 points");
}

// Number of tied pairs, sum over tie groups of t(t-1)/2, for sorted input.
std::int64_t tied_pairs_sorted(std::span<const double> sorted) {
    std::int64_t total = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto t = static_cast<std::int64_t>(j - i);
        total += t * (t - 1) / 2;
        i = j;
    }
    return total;
}

// Merge sort counting inversions (strictly decreasing pairs).
std::int64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const auto mid = lo + (hi - lo) / 2;
    std::int64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<std::int64_t>(mid - i);
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, "pearson");
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("pearson: constant input vector");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        // Positions i..j-1 (0-based) share rank mean((i+1)..j).
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, "spearman");
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    return pearson(rx, ry);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, "kendall_tau");
    const auto n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
    }
    const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const std::int64_t n1 = tied_pairs_sorted(xs);

    // Pairs tied in both x and y.
    std::int64_t n3 = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
        const auto t = static_cast<std::int64_t>(j - i);
        n3 += t * (t - 1) / 2;
        i = j;
    }

    std::vector<double> buf(n);
    const std::int64_t swaps = sort_count_swaps(ys, buf, 0, n);
    const std::int64_t n2 = tied_pairs_sorted(ys);

    if (n0 == n1 || n0 == n2) throw UndefinedCorrelationError("kendall_tau: every pair is tied in one input");
    // concordant - discordant
    const std::int64_t diff = n0 - n1 - n2 + n3 - 2 * swaps;
    return static_cast<double>(diff) /
           std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

double krippendorff_alpha(const std::vector<std::vector<std::optional<double>>>& ratings, AlphaLevel level) {
    if (ratings.size() < 2) throw DomainError("krippendorff_alpha: needs at least 2 raters");
    std::size_t items = 0;
    for (const auto& row : ratings) items = std::max(items, row.size());
    if (items == 0) throw DomainError("krippendorff_alpha: needs at least 1 item");

    // Pairable values: those in items with at least two judgements.
    std::vector<std::vector<double>> units;
    for (std::size_t u = 0; u < items; ++u) {
        std::vector<double> values;
        for (const auto& row : ratings) {
            if (u < row.size() && row[u]) values.push_back(*row[u]);
        }
        if (values.size() >= 2) units.push_back(std::move(values));
    }
    double n = 0.0;
    for (const auto& v : units) n += static_cast<double>(v.size());
    if (n < 2.0) throw UndefinedCorrelationError("krippendorff_alpha: no pairable values");

    // Sum over ordered pairs i != j of delta(v_i, v_j), in closed form per level.
    auto pair_disagreement = [level](const std::vector<double>& values) {
        const auto m = static_cast<double>(values.size());
        if (level == AlphaLevel::Nominal) {
            std::map<double, double> counts;
            for (double v : values) counts[v] += 1.0;
            double same = 0.0;
            for (const auto& [_, c] : counts) same += c * c;
            return m * m - same;
        }
        double s = 0.0;
        double s2 = 0.0;
        for (double v : values) {
            s += v;
            s2 += v * v;
        }
        return std::max(0.0, 2.0 * m * s2 - 2.0 * s * s);
    };

    double observed = 0.0;
    std::vector<double> all;
    for (const auto& v : units) {
        observed += pair_disagreement(v) / (static_cast<double>(v.size()) - 1.0);
        all.insert(all.end(), v.begin(), v.end());
    }
    observed /= n;
    const double expected = pair_disagreement(all) / (n * (n - 1.0));
    if (observed == 0.0) return 1.0;
    if (expected == 0.0) throw UndefinedCorrelationError("krippendorff_alpha: no expected disagreement");
    return 1.0 - observed / expected;
}

std::string_view to_string(MetaLevel level) { return level == MetaLevel::Statement ? "statement" : "response"; }

CorrelationTable meta_evaluate(std::span<const std::optional<double>> metric,
                               std::span<const std::optional<double>> human, MetaLevel level, Scenario scenario,
                               std::string metric_name) {
    if (metric.size() != human.size()) {
        throw AlignmentError("meta_evaluate: " + std::to_string(metric.size()) + " metric scores vs " +
                             std::to_string(human.size()) + " human scores");
    }
    CorrelationTable t;
    t.metric = std::move(metric_name);
    t.level = level;
    t.scenario = scenario;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < metric.size(); ++i) {
        if (metric[i] && human[i]) {
            xs.push_back(*metric[i]);
            ys.push_back(*human[i]);
        } else if (metric[i].has_value() != human[i].has_value()) {
            ++t.mask_disagreements;
        }
    }
    t.pairs = static_cast<int>(xs.size());
    if (xs.empty()) throw EmptyComparisonError("meta_evaluate: no paired values for " + t.metric);
    t.pearson = pearson(xs, ys);
    t.spearman = spearman(xs, ys);
    t.kendall = kendall_tau(xs, ys);
    return t;
}

std::string format_tables_tsv(std::span<const CorrelationTable> tables) {
    std::string out = "metric\tlevel\tscenario\tpearson\tspearman\tkendall_tau\tpairs\tmask_disagreements\n";
    for (const auto& t : tables) {
        out += t.metric + '\t' + std::string(to_string(t.level)) + '\t' + std::string(to_string(t.scenario)) + '\t' +
               fmt(t.pearson) + '\t' + fmt(t.spearman) + '\t' + fmt(t.kendall) + '\t' + std::to_string(t.pairs) +
               '\t' + std::to_string(t.mask_disagreements) + '\n';
    }
    return out;
}

std::string format_tables_jsonl(std::span<const CorrelationTable> tables) {
    std::string out;
    for (const auto& t : tables) {
        nlohmann::json j = {{"metric", t.metric},
                            {"level", to_string(t.level)},
                            {"scenario", to_string(t.scenario)},
                            {"pearson", t.pearson},
                            {"spearman", t.spearman},
                            {"kendall_tau", t.kendall},
                            {"pairs", t.pairs},
                            {"mask_disagreements", t.mask_disagreements},
                            {"statement_pooling", "pooled"}};
        out += j.dump() + '\n';
    }
    return out;
}

}  // namespace citeeval::stats
