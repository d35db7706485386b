#pragma once
// Loads a corpus and system runs from disk and evaluates every configured
// metric for one system.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairrank/config.hpp"
#include "fairrank/core.hpp"
#include "fairrank/distance.hpp"
#include "fairrank/exposure.hpp"
#include "fairrank/ingest.hpp"
#include "fairrank/metrics_multi.hpp"
#include "fairrank/metrics_single.hpp"
#include "fairrank/opportunity.hpp"
#include "fairrank/pairwise.hpp"
#include "fairrank/report.hpp"

namespace fairrank {

// Inputs shared by every system.
struct Corpus {
    RelevanceTable relevance;
    AlignmentMatrix alignment;
    GroupSpace groups;
};

struct SystemInput {
    std::string name;
    RankingSequence sequence;
    std::optional<ScoreTable> scores;
};

struct SystemEvaluation {
    std::vector<MetricResult> results;
    std::vector<std::string> log;             // human-readable notes, one per line
    std::vector<std::string> all_degenerate;  // metrics with no usable value
};

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
    return in;
}

// Loads qrels and alignment; the protected group defaults to the first column.
inline Corpus load_corpus(const std::filesystem::path& qrels, const std::filesystem::path& alignment,
                          const EvalConfig& config, Warnings* warnings = nullptr) {
    Corpus c;
    {
        auto in = open_input(qrels);
        c.relevance = parse_qrels(in, qrels.string(), warnings);
    }
    auto in = open_input(alignment);
    auto table = parse_alignment(in, config.protected_label, config.unknown_label, alignment.string(), warnings);
    c.alignment = std::move(table.alignment);
    c.groups = table.groups.protected_index()
                   ? std::move(table.groups)
                   : GroupSpace(table.groups.names(), 0, table.groups.unknown_index());
    return c;
}

// Every document named by the qrels or any of the sequences.
inline std::vector<DocumentId> document_universe(const RelevanceTable& relevance,
                                                 const std::vector<const RankingSequence*>& sequences) {
    std::vector<DocumentId> docs;
    for (const auto& [q, judged] : relevance.entries())
        for (const auto& [d, y] : judged) docs.push_back(d);
    for (const auto* seq : sequences)
        for (const auto& r : seq->draws())
            for (const auto& d : r->docs()) docs.push_back(d);
    std::sort(docs.begin(), docs.end());
    docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
    return docs;
}

inline SystemInput load_system(const std::filesystem::path& run_path,
                               const std::optional<std::filesystem::path>& sequence_path,
                               const std::optional<std::filesystem::path>& scores_path,
                               Warnings* warnings = nullptr) {
    SystemInput s;
    RunFile run;
    {
        auto in = open_input(run_path);
        run = parse_run(in, run_path.string());
    }
    s.name = run.tag().empty() ? run_path.stem().string() : run.tag();
    if (sequence_path) {
        auto in = open_input(*sequence_path);
        s.sequence = build_sequence(run, parse_sequence_rows(in, sequence_path->string()));
    } else {
        s.sequence = build_sequence(run, std::nullopt);
    }
    if (scores_path) {
        auto in = open_input(*scores_path);
        s.scores = parse_scores(in, scores_path->string(), warnings);
    }
    return s;
}

namespace detail {

// Errors that make a metric undefined for the data rather than the call invalid.
inline bool is_degenerate_code(Errc c) {
    switch (c) {
        case Errc::NoLabeledDocs:
        case Errc::ShortList:
        case Errc::UndefinedNormalizer:
        case Errc::DegenerateDenominator:
        case Errc::DegenerateUtility:
        case Errc::EmptyGroup:
        case Errc::NoExposure:
        case Errc::NoPairs:
        case Errc::NoRelevant:
        case Errc::AllDegenerate:
        case Errc::Undefined: return true;
        default: return false;
    }
}

class SystemEvaluator {
public:
    SystemEvaluator(const SystemInput& system, const Corpus& corpus) : sys_(system), corpus_(corpus) {}

    SystemEvaluation run(const EvalConfig& config) {
        for (const auto& spec : config.metrics) evaluate(spec);
        return std::move(out_);
    }

private:
    void evaluate(const MetricSpec& spec) {
        const Direction dir = direction_of(spec.kind);
        const std::size_t n_requests = sys_.sequence.requests().size();
        const bool needs_scores = spec.kind == MetricKind::IAA || spec.kind == MetricKind::IntraAcc ||
                                  spec.kind == MetricKind::InterAcc;
        if (needs_scores && !sys_.scores) {
            out_.log.push_back(spec.name + ": skipped, no scores supplied");
            return;
        }
        try {
            switch (spec.kind) {
                case MetricKind::AWRF:
                case MetricKind::AWRF_equal:
                case MetricKind::prefD:
                case MetricKind::FAIR: out_.results.push_back(per_list(spec, dir)); break;
                default: {
                    std::size_t skipped = 0;
                    const double v = system_level(spec, skipped);
                    out_.results.push_back({spec.name, sys_.name, v, n_requests, skipped, dir});
                    if (skipped > 0)
                        out_.log.push_back(spec.name + ": " + std::to_string(skipped) + " of " +
                                           std::to_string(n_requests) + " requests degenerate");
                }
            }
        } catch (const Error& e) {
            if (!is_degenerate_code(e.code())) throw;
            out_.results.push_back(
                {spec.name, sys_.name, std::numeric_limits<double>::quiet_NaN(), n_requests, n_requests, dir});
            out_.all_degenerate.push_back(spec.name);
            out_.log.push_back(spec.name + ": degenerate (" + e.what() + ")");
        }
    }

    std::optional<TargetDistribution> target(const MetricSpec& spec) {
        switch (spec.target) {
            case TargetMode::Catalog:
                if (!catalog_) catalog_ = catalog_target(corpus_.alignment, corpus_.groups);
                return catalog_;
            case TargetMode::Equal: return TargetDistribution::uniform(corpus_.groups);
            case TargetMode::Custom:
                if (spec.target_probs.size() != corpus_.groups.size())
                    throw Error(Errc::ParameterOutOfDomain, spec.name + ": target_probs has " +
                                                                std::to_string(spec.target_probs.size()) +
                                                                " entries for " +
                                                                std::to_string(corpus_.groups.size()) + " groups");
                return TargetDistribution(spec.target_probs);
            case TargetMode::List: return std::nullopt;
        }
        return std::nullopt;
    }

    // Single-list metrics: mean over a request's draws, then over requests.
    MetricResult per_list(const MetricSpec& spec, Direction dir) {
        const auto tgt = target(spec);
        std::optional<double> p_hat;
        if (spec.kind == MetricKind::FAIR) {
            p_hat = tgt->protected_share(corpus_.groups);
            if (!(*p_hat > 0.0 && *p_hat < 1.0))
                throw Error(Errc::EmptyGroup, "FAIR target share " + format_value(*p_hat) + " is not in (0,1)");
        }
        std::map<RequestId, std::optional<double>> per_request;
        std::map<Errc, std::size_t> flags;
        for (const auto& [q, draws] : sys_.sequence.by_request()) {
            std::vector<double> values;
            for (const Ranking* r : draws) {
                SingleListResult res;
                switch (spec.kind) {
                    case MetricKind::prefD: {
                        PrefOptions opts;
                        opts.dist = spec.dist;
                        opts.step = spec.step;
                        opts.threshold = spec.threshold;
                        opts.target = tgt;
                        res = pref_fairness(*r, corpus_.alignment, corpus_.groups, opts);
                        break;
                    }
                    case MetricKind::FAIR:
                        res = fair_score(*r, corpus_.alignment, corpus_.groups, *p_hat, spec.threshold, spec.fair_cdf);
                        break;
                    default:
                        res = awrf(*r, corpus_.alignment, corpus_.groups, spec.weights, *tgt, spec.dist,
                                   &corpus_.relevance);
                }
                if (res.degenerate) ++flags[*res.degenerate];
                if (std::isfinite(res.value)) values.push_back(res.value);
            }
            if (values.empty()) per_request.emplace(q, std::nullopt);
            else per_request.emplace(q, detail::pairwise_sum(values) / static_cast<double>(values.size()));
        }
        for (const auto& [code, n] : flags)
            out_.log.push_back(spec.name + ": " + std::to_string(n) + " lists flagged " + std::string(to_string(code)));
        auto result = aggregate(spec.name, sys_.name, dir, per_request);
        if (result.n_degenerate > 0)
            out_.log.push_back(spec.name + ": " + std::to_string(result.n_degenerate) + " of " +
                               std::to_string(result.n_requests) + " requests degenerate");
        return result;
    }

    static std::string weight_key(const WeightModel& w) {
        return std::to_string(static_cast<int>(w.kind)) + ":" + format_value(w.gamma) + ":" +
               (w.rbp_unanchored ? "u" : "a");
    }

    const ExposureVector& system_eps(const WeightModel& w) {
        const auto key = weight_key(w);
        auto it = eps_cache_.find(key);
        if (it != eps_cache_.end()) return it->second;
        std::map<RequestId, ExposureVector> per_request;
        for (const auto& q : sys_.sequence.requests())
            per_request.emplace(q, request_exposure(sys_.sequence, q, corpus_.alignment, corpus_.groups, w,
                                                    &corpus_.relevance)
                                       .eps);
        return eps_cache_.emplace(key, system_exposure(per_request, sys_.sequence.request_weights())).first->second;
    }

    const AccuracyTable& accuracy(const MetricSpec& spec) {
        const auto key = std::to_string(spec.n_negatives) + ":" + std::to_string(spec.seed) + ":" +
                         format_value(spec.threshold);
        auto it = acc_cache_.find(key);
        if (it != acc_cache_.end()) return it->second;
        return acc_cache_
            .emplace(key, sampled_accuracy(corpus_.relevance, *sys_.scores, corpus_.alignment, corpus_.groups,
                                           spec.n_negatives, spec.seed, spec.threshold))
            .first->second;
    }

    double system_level(const MetricSpec& spec, std::size_t& skipped) {
        switch (spec.kind) {
            case MetricKind::logDP: return demographic_parity(system_eps(spec.weights), corpus_.groups).log2_ratio;
            case MetricKind::EED: return eed(system_eps(spec.weights), spec.eed_mode);
            case MetricKind::logEUR: {
                const auto ups = group_utility(sys_.sequence, corpus_.relevance, corpus_.alignment, corpus_.groups,
                                               spec.threshold, spec.pool);
                return eur(system_eps(spec.weights), ups, corpus_.groups).log2_ratio;
            }
            case MetricKind::logRUR: {
                const auto ups = group_utility(sys_.sequence, corpus_.relevance, corpus_.alignment, corpus_.groups,
                                               spec.threshold, spec.pool);
                const auto disc = discounted_group_utility(sys_.sequence, corpus_.relevance, corpus_.alignment,
                                                           corpus_.groups, spec.weights, spec.threshold);
                return rur(disc, ups).log2_ratio;
            }
            case MetricKind::IAA: {
                const auto util = expected_utility(sys_.sequence, *sys_.scores, corpus_.alignment, corpus_.groups);
                return iaa(system_eps(spec.weights), util);
            }
            case MetricKind::EEL:
            case MetricKind::EER: {
                const auto ee = expected_exposure(sys_.sequence, corpus_.relevance, corpus_.alignment, corpus_.groups,
                                                  spec.weights, spec.pool);
                skipped = ee.n_skipped;
                return spec.kind == MetricKind::EEL ? ee.eel : ee.eer;
            }
            case MetricKind::IntraAcc: return intra_inter(accuracy(spec)).intra;
            case MetricKind::InterAcc: return intra_inter(accuracy(spec)).inter;
            default: break;
        }
        throw Error(Errc::InvalidArgument, "not a system-level metric");
    }

    const SystemInput& sys_;
    const Corpus& corpus_;
    SystemEvaluation out_;
    std::optional<TargetDistribution> catalog_;
    std::map<std::string, ExposureVector> eps_cache_;
    std::map<std::string, AccuracyTable> acc_cache_;
};

}  // namespace detail

// Degenerate metrics yield a missing value and are listed in all_degenerate;
// other errors propagate.
inline SystemEvaluation evaluate_system(const SystemInput& system, const Corpus& corpus, const EvalConfig& config) {
    corpus.groups.require_protected();
    return detail::SystemEvaluator(system, corpus).run(config);
}

}  // namespace fairrank
