#pragma once
// System-level aggregation, metric directionality, Kendall τ-c between system
// orderings, and the CSV tables the tool emits.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "fairrank/config.hpp"
#include "fairrank/core.hpp"
#include "fairrank/exposure.hpp"
#include "fairrank/ingest.hpp"

namespace fairrank {

struct MetricResult {
    std::string metric;
    std::string system;
    double value = 0.0;  // NaN when every request was degenerate
    std::size_t n_requests = 0;
    std::size_t n_degenerate = 0;
    Direction direction = Direction::ZeroIsFair;

    bool missing() const { return !std::isfinite(value); }
};

inline Direction direction_of(MetricKind kind) {
    switch (kind) {
        case MetricKind::FAIR: return Direction::OneIsFair;
        case MetricKind::EER: return Direction::HigherIsBetter;
        default: return Direction::ZeroIsFair;
    }
}

inline std::optional<Direction> parse_direction(std::string_view s) {
    for (auto d : {Direction::ZeroIsFair, Direction::OneIsFair, Direction::HigherIsBetter})
        if (to_string(d) == s) return d;
    return std::nullopt;
}

// Mean over non-degenerate requests. A request is degenerate when its value is
// absent or not finite.
inline MetricResult aggregate(std::string metric, std::string system, Direction direction,
                              const std::map<RequestId, std::optional<double>>& per_request) {
    MetricResult r{std::move(metric), std::move(system), 0.0, per_request.size(), 0, direction};
    std::vector<double> values;
    values.reserve(per_request.size());
    for (const auto& [q, v] : per_request) {
        if (v && std::isfinite(*v)) values.push_back(*v);
        else ++r.n_degenerate;
    }
    if (values.empty())
        throw Error(Errc::AllDegenerate, r.metric + " is degenerate for every request of " + r.system);
    r.value = detail::pairwise_sum(values) / static_cast<double>(values.size());
    return r;
}

// Maps a value so that larger is fairer. Magnitudes are used for zero-centred
// metrics unless `signed_values` is set.
inline double oriented(double value, Direction direction, bool signed_values = false) {
    switch (direction) {
        case Direction::ZeroIsFair: return signed_values ? -value : -std::abs(value);
        case Direction::OneIsFair: return -std::abs(value - 1.0);
        case Direction::HigherIsBetter: return value;
    }
    return value;
}

// Stuart's τ-c: 2(C − D) / (n² (m − 1) / m), m = min(distinct x, distinct y).
// Pairs tied in either list are neither concordant nor discordant.
inline double kendall_tau_c(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(Errc::InvalidArgument, "value lists differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw Error(Errc::InvalidArgument, "τ-c needs at least two systems");
    auto distinct = [](std::span<const double> v) {
        std::vector<double> s(v.begin(), v.end());
        std::sort(s.begin(), s.end());
        return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
    };
    const std::size_t m = std::min(distinct(x), distinct(y));
    if (m < 2) throw Error(Errc::Undefined, "τ-c is undefined for a constant list");
    long long c = 0, d = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = (x[i] - x[j]) * (y[i] - y[j]);
            if (s > 0) ++c;
            else if (s < 0) ++d;
        }
    const double nn = static_cast<double>(n);
    const double md = static_cast<double>(m);
    return 2.0 * static_cast<double>(c - d) / (nn * nn * (md - 1.0) / md);
}

inline double kendall_tau_c(std::span<const double> x, Direction dx, std::span<const double> y, Direction dy,
                            bool signed_values = false) {
    std::vector<double> ox, oy;
    for (double v : x) ox.push_back(oriented(v, dx, signed_values));
    for (double v : y) oy.push_back(oriented(v, dy, signed_values));
    return kendall_tau_c(ox, oy);
}

struct CorrelationMatrix {
    std::vector<std::string> metrics;
    std::vector<std::vector<std::optional<double>>> taus;  // nullopt = missing
    std::vector<std::vector<std::size_t>> n_systems;       // systems shared by each pair
};

using ResultsByMetric = std::map<std::string, std::map<std::string, MetricResult>>;

inline ResultsByMetric index_results(std::span<const MetricResult> results) {
    ResultsByMetric out;
    for (const auto& r : results) out[r.metric].insert_or_assign(r.system, r);
    return out;
}

// τ-c for every metric pair over the systems both metrics scored. Pairs with
// fewer than two shared systems, or a constant list, are missing.
inline CorrelationMatrix correlation_matrix(const ResultsByMetric& results, bool signed_values = false) {
    CorrelationMatrix cm;
    for (const auto& [m, systems] : results) cm.metrics.push_back(m);
    const std::size_t k = cm.metrics.size();
    cm.taus.assign(k, std::vector<std::optional<double>>(k));
    cm.n_systems.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t a = 0; a < k; ++a) {
        const auto& ra = results.at(cm.metrics[a]);
        for (std::size_t b = a; b < k; ++b) {
            const auto& rb = results.at(cm.metrics[b]);
            std::vector<double> x, y;
            Direction dx = Direction::ZeroIsFair, dy = Direction::ZeroIsFair;
            for (const auto& [system, r] : ra) {
                if (r.missing()) continue;
                auto it = rb.find(system);
                if (it == rb.end() || it->second.missing()) continue;
                x.push_back(r.value);
                y.push_back(it->second.value);
                dx = r.direction;
                dy = it->second.direction;
            }
            cm.n_systems[a][b] = cm.n_systems[b][a] = x.size();
            if (x.size() < 2) continue;
            try {
                const double t = kendall_tau_c(x, dx, y, dy, signed_values);
                cm.taus[a][b] = cm.taus[b][a] = t;
            } catch (const Error& e) {
                if (e.code() != Errc::Undefined) throw;
            }
        }
    }
    return cm;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

inline constexpr std::string_view kMetricTableHeader = "system,metric,value,n_requests,n_degenerate,direction";
inline constexpr std::string_view kMissing = "NA";

inline std::string format_value(double v) {
    if (!std::isfinite(v)) return std::string(kMissing);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_metric_table(std::ostream& out, std::vector<MetricResult> results) {
    std::sort(results.begin(), results.end(), [](const MetricResult& a, const MetricResult& b) {
        return std::tie(a.system, a.metric) < std::tie(b.system, b.metric);
    });
    out << kMetricTableHeader << '\n';
    for (const auto& r : results)
        out << r.system << ',' << r.metric << ',' << format_value(r.value) << ',' << r.n_requests << ','
            << r.n_degenerate << ',' << to_string(r.direction) << '\n';
}

inline std::vector<MetricResult> read_metric_table(std::istream& in, std::string_view source = "<metrics>") {
    std::vector<MetricResult> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        if (!header) {
            if (detail::trim(line) != kMetricTableHeader)
                throw Error(Errc::Parse, detail::where(source, lineno) + ": unexpected header");
            header = true;
            continue;
        }
        const auto f = detail::split_csv(line);
        if (f.size() != 6) throw Error(Errc::Parse, detail::where(source, lineno) + ": expected 6 fields");
        MetricResult r;
        r.system = std::string(f[0]);
        r.metric = std::string(f[1]);
        r.value = f[2] == kMissing ? std::numeric_limits<double>::quiet_NaN()
                                   : detail::parse_real(f[2], "value", source, lineno);
        r.n_requests = detail::parse_int<std::size_t>(f[3], "n_requests", source, lineno);
        r.n_degenerate = detail::parse_int<std::size_t>(f[4], "n_degenerate", source, lineno);
        const auto dir = parse_direction(f[5]);
        if (!dir) throw Error(Errc::Parse, detail::where(source, lineno) + ": unknown direction");
        r.direction = *dir;
        out.push_back(std::move(r));
    }
    return out;
}

// Square matrix with a `metric` header row and column.
inline void write_correlation(std::ostream& out, const CorrelationMatrix& cm) {
    out << "metric";
    for (const auto& m : cm.metrics) out << ',' << m;
    out << '\n';
    for (std::size_t a = 0; a < cm.metrics.size(); ++a) {
        out << cm.metrics[a];
        for (std::size_t b = 0; b < cm.metrics.size(); ++b)
            out << ',' << (cm.taus[a][b] ? format_value(*cm.taus[a][b]) : std::string(kMissing));
        out << '\n';
    }
}

// Plot-ready long format: one row per ordered metric pair.
inline void write_correlation_long(std::ostream& out, const CorrelationMatrix& cm) {
    out << "metric_a,metric_b,tau_c,n_systems\n";
    for (std::size_t a = 0; a < cm.metrics.size(); ++a)
        for (std::size_t b = 0; b < cm.metrics.size(); ++b)
            out << cm.metrics[a] << ',' << cm.metrics[b] << ','
                << (cm.taus[a][b] ? format_value(*cm.taus[a][b]) : std::string(kMissing)) << ','
                << cm.n_systems[a][b] << '\n';
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw Error(Errc::Io, "write to '" + path.string() + "' failed");
}

struct TablePaths {
    std::filesystem::path metrics;
    std::filesystem::path correlation;
    std::filesystem::path correlation_long;
};

inline TablePaths emit_tables(const std::vector<MetricResult>& results, const CorrelationMatrix& cm,
                              const std::filesystem::path& dir) {
    if (results.empty()) throw Error(Errc::InvalidArgument, "no results to emit");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create '" + dir.string() + "': " + ec.message());
    TablePaths paths{dir / "metrics.csv", dir / "correlation.csv", dir / "correlation_long.csv"};
    write_file(paths.metrics, [&](std::ostream& o) { write_metric_table(o, results); });
    write_file(paths.correlation, [&](std::ostream& o) { write_correlation(o, cm); });
    write_file(paths.correlation_long, [&](std::ostream& o) { write_correlation_long(o, cm); });
    return paths;
}

}  // namespace fairrank
