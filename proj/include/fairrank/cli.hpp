#pragma once
// Command implementations behind the `fairrank` executable. Each returns the
// process exit status; diagnostics go to the supplied log stream.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "fairrank/config.hpp"
#include "fairrank/pipeline.hpp"
#include "fairrank/report.hpp"
#include "fairrank/synth.hpp"

namespace fairrank::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,     // parse, configuration or input I/O error
    kAllDegenerate = 3,  // some configured metric had no usable value
    kTooFewSystems = 4,
};

struct EvaluateOptions {
    std::vector<std::filesystem::path> runs;
    std::vector<std::filesystem::path> scores;  // empty, or one per run
    std::filesystem::path qrels;
    std::filesystem::path alignment;
    std::optional<std::filesystem::path> sequence;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
};

struct CompareOptions {
    std::filesystem::path results;
    std::optional<std::filesystem::path> out;
    bool signed_values = false;
};

// FAIRRANK_THREADS caps the worker count.
inline std::size_t worker_count(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FAIRRANK_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) n = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs fn(i) for i in [0, n) on a bounded pool; rethrows the first failure by index.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t k = worker_count(n);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::string file_safe(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    return out;
}

inline void log_line(std::ostream& log, const std::string& msg) { log << "fairrank: " << msg << '\n'; }

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& log) {
    if (opt.runs.empty()) {
        log_line(log, "error: at least one --run is required");
        return kInputError;
    }
    if (!opt.scores.empty() && opt.scores.size() != opt.runs.size()) {
        log_line(log, "error: give one --scores per --run, or none");
        return kInputError;
    }
    EvalConfig config;
    Corpus corpus;
    std::vector<SystemEvaluation> evals(opt.runs.size());
    std::vector<std::string> names(opt.runs.size());
    try {
        config = opt.config ? load_config_file(opt.config->string()) : parse_config(nlohmann::json());
        Warnings warnings;
        corpus = load_corpus(opt.qrels, opt.alignment, config, &warnings);
        for (const auto& w : warnings) log_line(log, "warning: " + w);
        if (opt.scores.empty()) {
            for (const auto& m : config.metrics)
                if (m.kind == MetricKind::IAA || m.kind == MetricKind::IntraAcc || m.kind == MetricKind::InterAcc)
                    log_line(log, "warning: " + m.name + " skipped, no --scores given");
        }

        auto load = [&](std::size_t i, Warnings* w) {
            std::optional<std::filesystem::path> scores;
            if (!opt.scores.empty()) scores = opt.scores[i];
            return load_system(opt.runs[i], opt.sequence, scores, w);
        };
        std::mutex log_mutex;
        auto flush_warnings = [&](const Warnings& w) {
            std::lock_guard lock(log_mutex);
            for (const auto& s : w) log_line(log, "warning: " + s);
        };

        if (config.unlabeled == UnlabeledPolicy::Exclude) {
            parallel_for(opt.runs.size(), [&](std::size_t i) {
                Warnings w;
                const auto sys = load(i, &w);
                flush_warnings(w);
                names[i] = sys.name;
                evals[i] = evaluate_system(sys, corpus, config);
            });
        } else {
            // The unlabeled policy needs every document before evaluation starts.
            std::vector<SystemInput> systems(opt.runs.size());
            parallel_for(opt.runs.size(), [&](std::size_t i) {
                Warnings w;
                systems[i] = load(i, &w);
                flush_warnings(w);
            });
            std::vector<const RankingSequence*> seqs;
            for (const auto& s : systems) seqs.push_back(&s.sequence);
            const auto universe = document_universe(corpus.relevance, seqs);
            auto resolved = apply_unlabeled_policy(corpus.alignment, corpus.groups, config.unlabeled, universe);
            corpus.alignment = std::move(resolved.alignment);
            corpus.groups = std::move(resolved.groups);
            parallel_for(systems.size(), [&](std::size_t i) {
                names[i] = systems[i].name;
                evals[i] = evaluate_system(systems[i], corpus, config);
            });
        }
    } catch (const Error& e) {
        log_line(log, std::string("error: ") + e.what());
        return kInputError;
    }

    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (names[i] == names[j]) {
                log_line(log, "error: runs " + opt.runs[j].string() + " and " + opt.runs[i].string() +
                                  " share the system tag '" + names[i] + "'");
                return kInputError;
            }

    int status = kOk;
    std::vector<MetricResult> all;
    try {
        std::error_code ec;
        std::filesystem::create_directories(opt.out, ec);
        if (ec) throw Error(Errc::Io, "cannot create '" + opt.out.string() + "': " + ec.message());
        std::vector<std::size_t> order(names.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
        for (std::size_t i : order) {
            for (const auto& line : evals[i].log) log_line(log, names[i] + ": " + line);
            for (const auto& m : evals[i].all_degenerate) {
                log_line(log, "error: " + names[i] + ": " + m + " is degenerate for every request");
                status = kAllDegenerate;
            }
            write_file(opt.out / (file_safe(names[i]) + ".metrics.csv"),
                       [&](std::ostream& o) { write_metric_table(o, evals[i].results); });
            all.insert(all.end(), evals[i].results.begin(), evals[i].results.end());
        }
        write_file(opt.out / "metrics.csv", [&](std::ostream& o) { write_metric_table(o, all); });
    } catch (const Error& e) {
        log_line(log, std::string("error: ") + e.what());
        return kFailure;
    }
    log_line(log, "evaluated " + std::to_string(names.size()) + " system(s) into " + opt.out.string());
    return status;
}

inline int cmd_compare(const CompareOptions& opt, std::ostream& log) {
    std::vector<MetricResult> all;
    try {
        if (!std::filesystem::is_directory(opt.results))
            throw Error(Errc::Io, "'" + opt.results.string() + "' is not a directory");
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(opt.results)) {
            const auto name = entry.path().filename().string();
            if (entry.is_regular_file() && name.size() > 12 && name.ends_with(".metrics.csv"))
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto in = open_input(f);
            auto rows = read_metric_table(in, f.string());
            all.insert(all.end(), rows.begin(), rows.end());
        }
    } catch (const Error& e) {
        log_line(log, std::string("error: ") + e.what());
        return kInputError;
    }
    std::vector<std::string> systems;
    for (const auto& r : all) systems.push_back(r.system);
    std::sort(systems.begin(), systems.end());
    systems.erase(std::unique(systems.begin(), systems.end()), systems.end());
    if (systems.size() < 2) {
        log_line(log, "error: comparison needs at least 2 systems, found " + std::to_string(systems.size()));
        return kTooFewSystems;
    }
    const auto cm = correlation_matrix(index_results(all), opt.signed_values);
    for (std::size_t a = 0; a < cm.metrics.size(); ++a)
        for (std::size_t b = a + 1; b < cm.metrics.size(); ++b)
            if (!cm.taus[a][b])
                log_line(log, "warning: no correlation for " + cm.metrics[a] + " / " + cm.metrics[b] + " (" +
                                  std::to_string(cm.n_systems[a][b]) + " shared systems)");
    try {
        emit_tables(all, cm, opt.out.value_or(opt.results));
    } catch (const Error& e) {
        log_line(log, std::string("error: ") + e.what());
        return kFailure;
    }
    log_line(log, "compared " + std::to_string(systems.size()) + " systems over " +
                      std::to_string(cm.metrics.size()) + " metrics");
    return kOk;
}

inline int cmd_synth(const SynthParams& params, const std::filesystem::path& out, std::ostream& log) {
    try {
        const auto summary = write_synthetic(params, out);
        log_line(log, "wrote " + std::to_string(summary.systems.size()) + " systems, " +
                          std::to_string(summary.requests.size()) + " requests to " + out.string());
    } catch (const Error& e) {
        log_line(log, std::string("error: ") + e.what());
        return e.code() == Errc::Io ? kFailure : kInputError;
    }
    return kOk;
}

}  // namespace fairrank::cli
