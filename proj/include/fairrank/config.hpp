#pragma once
// Evaluation configuration: which metrics to compute and with which parameters.
// Loaded from a JSON document; every key is optional.
//
//   {
//     "protected": "g1", "unknown": "unknown", "unlabeled": "exclude",
//     "gamma": 0.5, "distance": "ND", "target": "catalog", "threshold": 0.5,
//     "step": 10, "n_negatives": 10000, "seed": 42,
//     "metrics": ["AWRF", "AWRF_equal", {"kind": "AWRF", "name": "AWRF_kl", "distance": "KL"}]
//   }
//
// Top-level parameters are defaults for every metric; a metric object may
// override any of them.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairrank/core.hpp"
#include "fairrank/distance.hpp"
#include "fairrank/exposure.hpp"
#include "fairrank/ingest.hpp"
#include "fairrank/metrics_multi.hpp"
#include "fairrank/metrics_single.hpp"
#include "fairrank/opportunity.hpp"

namespace fairrank {

enum class MetricKind { AWRF, AWRF_equal, prefD, FAIR, logDP, EED, logEUR, logRUR, IAA, EEL, EER, IntraAcc, InterAcc };

inline constexpr std::array<std::pair<MetricKind, std::string_view>, 13> kMetricNames{{
    {MetricKind::AWRF, "AWRF"},
    {MetricKind::AWRF_equal, "AWRF_equal"},
    {MetricKind::prefD, "prefD"},
    {MetricKind::FAIR, "FAIR"},
    {MetricKind::logDP, "logDP"},
    {MetricKind::EED, "EED"},
    {MetricKind::logEUR, "logEUR"},
    {MetricKind::logRUR, "logRUR"},
    {MetricKind::IAA, "IAA"},
    {MetricKind::EEL, "EEL"},
    {MetricKind::EER, "EER"},
    {MetricKind::IntraAcc, "IntraAcc"},
    {MetricKind::InterAcc, "InterAcc"},
}};

inline std::string_view to_string(MetricKind k) {
    for (const auto& [kind, name] : kMetricNames)
        if (kind == k) return name;
    return "?";
}

inline std::optional<MetricKind> metric_kind(std::string_view name) {
    for (const auto& [kind, n] : kMetricNames)
        if (n == name) return kind;
    return std::nullopt;
}

// Where a metric's target distribution comes from.
enum class TargetMode {
    Catalog,  // alignment-mass mean over every labeled document
    Equal,    // uniform over known groups
    Custom,   // target_probs
    List,     // composition of the evaluated list itself (prefD only)
};

struct MetricSpec {
    std::string name;  // output label; defaults to the kind's name
    MetricKind kind = MetricKind::AWRF;
    WeightModel weights;
    DistanceKind dist = DistanceKind::ND;
    TargetMode target = TargetMode::Catalog;
    std::vector<double> target_probs;
    double threshold = 0.5;
    std::size_t step = 10;
    std::size_t n_negatives = 10000;
    std::uint64_t seed = 42;
    FairCdf fair_cdf = FairCdf::Full;
    CandidatePool pool = CandidatePool::Judged;
    EedMode eed_mode = EedMode::Parity;
};

struct EvalConfig {
    std::vector<MetricSpec> metrics;
    std::optional<std::string> protected_label;  // default: first alignment group
    std::optional<std::string> unknown_label;
    UnlabeledPolicy unlabeled = UnlabeledPolicy::Exclude;
    bool signed_correlation = false;  // correlate signed values instead of magnitudes
};

// Metrics computed when the configuration names none.
inline std::vector<MetricKind> default_metric_kinds() {
    return {MetricKind::AWRF,   MetricKind::AWRF_equal, MetricKind::FAIR, MetricKind::logDP,
            MetricKind::EED,    MetricKind::logEUR,     MetricKind::logRUR, MetricKind::IAA,
            MetricKind::EEL,    MetricKind::EER,        MetricKind::IntraAcc, MetricKind::InterAcc};
}

namespace detail {

using json = nlohmann::json;

inline Error config_error(Errc code, const std::string& path, const std::string& what) {
    return Error(code, (path.empty() ? std::string("/") : path) + ": " + what);
}

inline double get_real(const json& v, const std::string& path) {
    if (!v.is_number()) throw config_error(Errc::Parse, path, "expected a number");
    return v.get<double>();
}

inline std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw config_error(Errc::Parse, path, "expected a string");
    return v.get<std::string>();
}

inline std::size_t get_count(const json& v, const std::string& path, std::size_t min_value) {
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min_value))
        throw config_error(Errc::ParameterOutOfDomain, path,
                           "expected an integer >= " + std::to_string(min_value));
    return static_cast<std::size_t>(v.get<long long>());
}

template <typename Enum, std::size_t N>
Enum get_choice(const json& v, const std::string& path, const std::array<std::pair<std::string_view, Enum>, N>& table) {
    const std::string s = get_string(v, path);
    for (const auto& [name, value] : table)
        if (name == s) return value;
    std::string allowed;
    for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    throw config_error(Errc::ParameterOutOfDomain, path, "'" + s + "' is not one of " + allowed);
}

inline constexpr std::array<std::pair<std::string_view, WeightKind>, 4> kWeightNames{{
    {"geometric", WeightKind::Geometric},
    {"logarithmic", WeightKind::Logarithmic},
    {"rbp", WeightKind::RBP},
    {"cascade", WeightKind::Cascade},
}};
inline constexpr std::array<std::pair<std::string_view, DistanceKind>, 3> kDistanceNames{{
    {"ND", DistanceKind::ND}, {"RD", DistanceKind::RD}, {"KL", DistanceKind::KL}}};
inline constexpr std::array<std::pair<std::string_view, TargetMode>, 4> kTargetNames{{
    {"catalog", TargetMode::Catalog}, {"equal", TargetMode::Equal}, {"custom", TargetMode::Custom}, {"list", TargetMode::List}}};
inline constexpr std::array<std::pair<std::string_view, FairCdf>, 2> kFairCdfNames{{
    {"full", FairCdf::Full}, {"from_one", FairCdf::FromOne}}};
inline constexpr std::array<std::pair<std::string_view, CandidatePool>, 3> kPoolNames{{
    {"judged", CandidatePool::Judged},
    {"retrieved", CandidatePool::Retrieved},
    {"judged_and_retrieved", CandidatePool::JudgedAndRetrieved}}};
inline constexpr std::array<std::pair<std::string_view, EedMode>, 2> kEedNames{{
    {"parity", EedMode::Parity}, {"raw", EedMode::Raw}}};
inline constexpr std::array<std::pair<std::string_view, UnlabeledPolicy>, 3> kUnlabeledNames{{
    {"exclude", UnlabeledPolicy::Exclude}, {"unknown", UnlabeledPolicy::MapToUnknown}, {"error", UnlabeledPolicy::Error}}};

// Parameters that may appear at top level or inside a metric object.
struct ParamOverrides {
    std::optional<WeightKind> weight_model;
    std::optional<double> gamma;
    std::optional<bool> rbp_unanchored;
    std::optional<DistanceKind> dist;
    std::optional<TargetMode> target;
    std::optional<std::vector<double>> target_probs;
    std::optional<double> threshold;
    std::optional<std::size_t> step;
    std::optional<std::size_t> n_negatives;
    std::optional<std::uint64_t> seed;
    std::optional<FairCdf> fair_cdf;
    std::optional<CandidatePool> pool;
    std::optional<EedMode> eed_mode;

    void merge_over(const ParamOverrides& base) {
        auto fill = [](auto& mine, const auto& theirs) {
            if (!mine) mine = theirs;
        };
        fill(weight_model, base.weight_model);
        fill(gamma, base.gamma);
        fill(rbp_unanchored, base.rbp_unanchored);
        fill(dist, base.dist);
        fill(target, base.target);
        fill(target_probs, base.target_probs);
        fill(threshold, base.threshold);
        fill(step, base.step);
        fill(n_negatives, base.n_negatives);
        fill(seed, base.seed);
        fill(fair_cdf, base.fair_cdf);
        fill(pool, base.pool);
        fill(eed_mode, base.eed_mode);
    }
};

// Reads one parameter key; returns false when `key` is not a parameter.
inline bool read_param(ParamOverrides& p, const std::string& key, const json& v, const std::string& path) {
    if (key == "weight_model") p.weight_model = get_choice(v, path, kWeightNames);
    else if (key == "gamma") p.gamma = get_real(v, path);
    else if (key == "rbp_unanchored") {
        if (!v.is_boolean()) throw config_error(Errc::Parse, path, "expected a boolean");
        p.rbp_unanchored = v.get<bool>();
    } else if (key == "distance") p.dist = get_choice(v, path, kDistanceNames);
    else if (key == "target") p.target = get_choice(v, path, kTargetNames);
    else if (key == "target_probs") {
        if (!v.is_array() || v.empty()) throw config_error(Errc::Parse, path, "expected a non-empty array");
        std::vector<double> probs;
        for (std::size_t i = 0; i < v.size(); ++i) probs.push_back(get_real(v[i], path + "/" + std::to_string(i)));
        try {
            TargetDistribution check(probs);
        } catch (const Error& e) {
            throw config_error(Errc::ParameterOutOfDomain, path, e.what());
        }
        p.target_probs = std::move(probs);
    } else if (key == "threshold") {
        const double t = get_real(v, path);
        if (!(t > 0.0 && t <= 1.0)) throw config_error(Errc::ParameterOutOfDomain, path, "must lie in (0,1]");
        p.threshold = t;
    } else if (key == "step") p.step = get_count(v, path, 2);
    else if (key == "n_negatives") p.n_negatives = get_count(v, path, 1);
    else if (key == "seed") p.seed = static_cast<std::uint64_t>(get_count(v, path, 0));
    else if (key == "fair_cdf") p.fair_cdf = get_choice(v, path, kFairCdfNames);
    else if (key == "pool") p.pool = get_choice(v, path, kPoolNames);
    else if (key == "eed_mode") p.eed_mode = get_choice(v, path, kEedNames);
    else return false;
    return true;
}

inline WeightKind default_weight_kind(MetricKind k) {
    switch (k) {
        case MetricKind::logDP:
        case MetricKind::logEUR:
        case MetricKind::logRUR: return WeightKind::Logarithmic;
        case MetricKind::EED:
        case MetricKind::EEL:
        case MetricKind::EER: return WeightKind::RBP;
        default: return WeightKind::Geometric;
    }
}

inline MetricSpec resolve_metric(MetricKind kind, std::string name, ParamOverrides p, bool target_explicit,
                                 const std::string& path) {
    MetricSpec m;
    m.kind = kind;
    m.name = std::move(name);
    const WeightKind wk = p.weight_model.value_or(default_weight_kind(kind));
    const double gamma = p.gamma.value_or(0.5);
    if (wk != WeightKind::Logarithmic && !WeightModel::gamma_in_domain(wk, gamma))
        throw config_error(Errc::ParameterOutOfDomain, path + "/gamma",
                           "gamma = " + detail::format_real(gamma) + " is outside the weight model's domain");
    switch (wk) {
        case WeightKind::Geometric: m.weights = WeightModel::geometric(gamma); break;
        case WeightKind::Logarithmic: m.weights = WeightModel::logarithmic(); break;
        case WeightKind::RBP: m.weights = WeightModel::rbp(gamma, p.rbp_unanchored.value_or(false)); break;
        case WeightKind::Cascade: m.weights = WeightModel::cascade(gamma); break;
    }
    m.dist = p.dist.value_or(DistanceKind::ND);
    if (kind == MetricKind::AWRF_equal) m.target = TargetMode::Equal;
    else if (kind == MetricKind::prefD && !target_explicit) m.target = TargetMode::List;
    else m.target = p.target.value_or(TargetMode::Catalog);
    if (m.target == TargetMode::List && kind != MetricKind::prefD)
        throw config_error(Errc::ParameterOutOfDomain, path + "/target", "'list' applies to prefD only");
    if (m.target == TargetMode::Custom) {
        if (!p.target_probs)
            throw config_error(Errc::ParameterOutOfDomain, path + "/target_probs", "required for a custom target");
        m.target_probs = *p.target_probs;
    }
    m.threshold = p.threshold.value_or(0.5);
    m.step = p.step.value_or(10);
    m.n_negatives = p.n_negatives.value_or(10000);
    m.seed = p.seed.value_or(42);
    m.fair_cdf = p.fair_cdf.value_or(FairCdf::Full);
    const bool ee = kind == MetricKind::EEL || kind == MetricKind::EER;
    m.pool = p.pool.value_or(ee ? CandidatePool::JudgedAndRetrieved : CandidatePool::Judged);
    m.eed_mode = p.eed_mode.value_or(EedMode::Parity);
    return m;
}

}  // namespace detail

inline EvalConfig parse_config(const nlohmann::json& doc) {
    using detail::config_error;
    EvalConfig cfg;
    if (doc.is_null()) {
        for (auto k : default_metric_kinds())
            cfg.metrics.push_back(detail::resolve_metric(k, std::string(to_string(k)), {}, false, ""));
        return cfg;
    }
    if (!doc.is_object()) throw config_error(Errc::Parse, "", "configuration must be a JSON object");

    detail::ParamOverrides global;
    const nlohmann::json* metrics = nullptr;
    for (const auto& [key, v] : doc.items()) {
        const std::string path = "/" + key;
        if (detail::read_param(global, key, v, path)) continue;
        if (key == "protected") cfg.protected_label = detail::get_string(v, path);
        else if (key == "unknown") cfg.unknown_label = detail::get_string(v, path);
        else if (key == "unlabeled") cfg.unlabeled = detail::get_choice(v, path, detail::kUnlabeledNames);
        else if (key == "signed_correlation") {
            if (!v.is_boolean()) throw config_error(Errc::Parse, path, "expected a boolean");
            cfg.signed_correlation = v.get<bool>();
        } else if (key == "metrics") {
            if (!v.is_array()) throw config_error(Errc::Parse, path, "expected an array");
            metrics = &v;
        } else {
            throw config_error(Errc::Parse, path, "unknown key");
        }
    }
    // Validate the global gamma even when no metric consumes it.
    if (global.gamma && !(*global.gamma > 0.0 && *global.gamma <= 1.0))
        throw config_error(Errc::ParameterOutOfDomain, "/gamma", "must lie in (0,1]");
    const bool global_target = global.target.has_value();

    if (!metrics) {
        for (auto k : default_metric_kinds())
            cfg.metrics.push_back(detail::resolve_metric(k, std::string(to_string(k)), global, global_target, ""));
        return cfg;
    }
    for (std::size_t i = 0; i < metrics->size(); ++i) {
        const auto& entry = (*metrics)[i];
        const std::string path = "/metrics/" + std::to_string(i);
        if (entry.is_string()) {
            const auto name = entry.get<std::string>();
            const auto kind = metric_kind(name);
            if (!kind) throw config_error(Errc::UnknownMetric, path, "unknown metric '" + name + "'");
            cfg.metrics.push_back(detail::resolve_metric(*kind, name, global, global_target, path));
            continue;
        }
        if (!entry.is_object()) throw config_error(Errc::Parse, path, "expected a metric name or object");
        if (!entry.contains("kind")) throw config_error(Errc::Parse, path + "/kind", "missing");
        const auto kind_name = detail::get_string(entry["kind"], path + "/kind");
        const auto kind = metric_kind(kind_name);
        if (!kind) throw config_error(Errc::UnknownMetric, path + "/kind", "unknown metric '" + kind_name + "'");
        std::string name = kind_name;
        detail::ParamOverrides local;
        for (const auto& [key, v] : entry.items()) {
            const std::string kpath = path + "/" + key;
            if (key == "kind") continue;
            if (key == "name") name = detail::get_string(v, kpath);
            else if (!detail::read_param(local, key, v, kpath)) throw config_error(Errc::Parse, kpath, "unknown key");
        }
        const bool target_explicit = global_target || local.target.has_value();
        local.merge_over(global);
        cfg.metrics.push_back(detail::resolve_metric(*kind, std::move(name), local, target_explicit, path));
    }
    for (std::size_t i = 0; i < cfg.metrics.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (cfg.metrics[i].name == cfg.metrics[j].name)
                throw config_error(Errc::Parse, "/metrics/" + std::to_string(i), "duplicate metric name '" +
                                                                                    cfg.metrics[i].name + "'");
    return cfg;
}

inline EvalConfig load_config(std::istream& in, std::string_view source = "<config>") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::Parse, std::string(source) + ": " + e.what());
    }
    return parse_config(doc);
}

inline EvalConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (detail::trim(text).empty()) return parse_config(nlohmann::json());
    std::istringstream s(text);
    return load_config(s, path);
}

// Catalog target: the alignment-mass mean over every labeled document.
inline TargetDistribution catalog_target(const AlignmentMatrix& alignment, const GroupSpace& groups) {
    if (alignment.size() == 0) throw Error(Errc::NoLabeledDocs, "catalog has no labeled documents");
    std::vector<std::pair<DocumentId, const std::vector<double>*>> rows;
    rows.reserve(alignment.size());
    for (const auto& [d, r] : alignment.rows()) rows.emplace_back(d, &r);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> probs(groups.size());
    std::vector<double> column(rows.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = (*rows[i].second)[g];
        probs[g] = detail::pairwise_sum(column) / static_cast<double>(rows.size());
    }
    double sum = 0.0;
    for (double p : probs) sum += p;
    for (double& p : probs) p /= sum;
    return TargetDistribution(std::move(probs));
}

}  // namespace fairrank
