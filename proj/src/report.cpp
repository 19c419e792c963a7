#include "citeeval/report.hpp"

#include "citeeval/errors.hpp"
#include "citeeval/metaeval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>

namespace citeeval::report {

namespace {

struct Acc {
    int n = 0;
    double length = 0.0;
    double missing = 0.0;
    double full = 0.0;
    int n_full = 0;
    double cited = 0.0;
    int n_cited = 0;

    void add(const ReportRow& r) {
        ++n;
        length += r.length;
        missing += r.missing_ratio;
        if (r.full) {
            full += *r.full;
            ++n_full;
        }
        if (r.cited) {
            cited += *r.cited;
            ++n_cited;
        }
    }
};

std::optional<double> safe_pearson(std::span<const double> x, std::span<const double> y) {
    try {
        return stats::pearson(x, y);
    } catch (const UndefinedCorrelationError&) {
        return std::nullopt;
    }
}

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "n/a"; }

}  // namespace

CorpusReport corpus_report(std::span<const ReportRow> rows, std::uint64_t seed, int bootstrap_samples) {
    CorpusReport rep;
    std::map<std::string, Acc> per_model;
    std::map<std::pair<std::string, std::string>, Acc> per_group;
    Acc total;
    for (const auto& r : rows) {
        total.add(r);
        per_model[r.model].add(r);
        per_group[{r.model, r.dataset}].add(r);
    }
    rep.responses = total.n;
    if (total.n > 0) {
        rep.mean_length = total.length / total.n;
        rep.mean_missing = total.missing / total.n;
    }
    for (const auto& [model, a] : per_model) {
        ModelSummary m;
        m.model = model;
        m.responses = a.n;
        m.mean_length = a.length / a.n;
        m.mean_missing = a.missing / a.n;
        if (a.n_full > 0) m.mean_full = a.full / a.n_full;
        if (a.n_cited > 0) m.mean_cited = a.cited / a.n_cited;
        rep.models.push_back(std::move(m));
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [key, a] : per_group) {
        GroupPoint g{key.first, key.second, a.n, a.length / a.n, a.missing / a.n};
        xs.push_back(g.mean_length);
        ys.push_back(g.mean_missing);
        rep.groups.push_back(std::move(g));
    }
    rep.length_missing_pearson = safe_pearson(xs, ys);

    if (rep.length_missing_pearson && xs.size() >= 3 && bootstrap_samples > 0) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
        std::vector<double> draws;
        std::vector<double> bx(xs.size());
        std::vector<double> by(xs.size());
        for (int b = 0; b < bootstrap_samples; ++b) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const auto k = pick(rng);
                bx[i] = xs[k];
                by[i] = ys[k];
            }
            if (auto r = safe_pearson(bx, by)) draws.push_back(*r);
        }
        if (!draws.empty()) {
            std::sort(draws.begin(), draws.end());
            auto at = [&](double q) {
                const auto i = static_cast<std::size_t>(q * static_cast<double>(draws.size() - 1) + 0.5);
                return draws[std::min(i, draws.size() - 1)];
            };
            rep.pearson_ci = std::make_pair(at(0.025), at(0.975));
        }
    }
    return rep;
}

std::string format_report(const CorpusReport& rep) {
    std::string out;
    out += "responses\t" + std::to_string(rep.responses) + "\n";
    out += "mean_statements\t" + fmt(rep.mean_length) + "\n";
    out += "mean_missing_ratio\t" + fmt(rep.mean_missing) + "\n\n";
    out += "model\tresponses\tfull\tcited\tstatements\tmissing_ratio\n";
    for (const auto& m : rep.models) {
        out += m.model + "\t" + std::to_string(m.responses) + "\t" + fmt_opt(m.mean_full) + "\t" +
               fmt_opt(m.mean_cited) + "\t" + fmt(m.mean_length) + "\t" + fmt(m.mean_missing) + "\n";
    }
    out += "\nmodel\tdataset\tresponses\tstatements\tmissing_ratio\n";
    for (const auto& g : rep.groups) {
        out += g.model + "\t" + g.dataset + "\t" + std::to_string(g.responses) + "\t" + fmt(g.mean_length) + "\t" +
               fmt(g.mean_missing) + "\n";
    }
    out += "\npearson(statements, missing_ratio) over " + std::to_string(rep.groups.size()) + " groups\t";
    out += rep.length_missing_pearson ? fmt(*rep.length_missing_pearson, "%.12f") : std::string("n/a");
    out += "\n";
    if (rep.pearson_ci) {
        out += "bootstrap 95% interval\t" + fmt(rep.pearson_ci->first) + "\t" + fmt(rep.pearson_ci->second) + "\n";
    }
    return out;
}

std::string report_to_json(const CorpusReport& rep) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json models = json::array();
    for (const auto& m : rep.models) {
        models.push_back({{"model", m.model},
                          {"responses", m.responses},
                          {"mean_full", opt(m.mean_full)},
                          {"mean_cited", opt(m.mean_cited)},
                          {"mean_statements", m.mean_length},
                          {"mean_missing_ratio", m.mean_missing}});
    }
    json groups = json::array();
    for (const auto& g : rep.groups) {
        groups.push_back({{"model", g.model},
                          {"dataset", g.dataset},
                          {"responses", g.responses},
                          {"mean_statements", g.mean_length},
                          {"mean_missing_ratio", g.mean_missing}});
    }
    json j = {{"responses", rep.responses},
              {"mean_statements", rep.mean_length},
              {"mean_missing_ratio", rep.mean_missing},
              {"models", models},
              {"groups", groups},
              {"pearson_statements_missing", opt(rep.length_missing_pearson)}};
    if (rep.pearson_ci) j["pearson_ci"] = {rep.pearson_ci->first, rep.pearson_ci->second};
    return j.dump(2);
}

}  // namespace citeeval::report
