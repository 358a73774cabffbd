#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "popdescent/individual.hpp"

namespace popdescent {

// Final numbers for one (method, seed) run. Failed runs keep their error
// message and are excluded from aggregates.
struct MethodSeedResult {
    std::string method;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double test_loss = 0.0;
    double train_loss = 0.0;
    std::uint64_t gradient_steps = 0;
    HyperParams chosen_hyperparams;
    std::vector<std::pair<std::uint64_t, double>> cv_trace;  // (cumulative steps, cv loss)
};

struct Aggregate {
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    std::size_t count = 0;
};

inline Aggregate aggregate(std::vector<double> values) {
    Aggregate a;
    a.count = values.size();
    if (values.empty()) return a;
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.sd = values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    a.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return a;
}

struct MethodAggregate {
    std::string method;
    Aggregate test_loss;
    Aggregate train_loss;
    Aggregate gradient_steps;
    std::size_t failures = 0;
};

struct TrialReport {
    std::vector<MethodSeedResult> results;

    std::vector<std::string> methods() const {
        std::vector<std::string> names;
        for (const auto& r : results)
            if (std::find(names.begin(), names.end(), r.method) == names.end())
                names.push_back(r.method);
        return names;
    }

    MethodAggregate aggregate_for(const std::string& method) const {
        MethodAggregate agg;
        agg.method = method;
        std::vector<double> test, train, steps;
        for (const auto& r : results) {
            if (r.method != method) continue;
            if (r.failed) {
                ++agg.failures;
                continue;
            }
            test.push_back(r.test_loss);
            train.push_back(r.train_loss);
            steps.push_back(static_cast<double>(r.gradient_steps));
        }
        agg.test_loss = aggregate(std::move(test));
        agg.train_loss = aggregate(std::move(train));
        agg.gradient_steps = aggregate(std::move(steps));
        return agg;
    }
};

// ema(0) = x(0); ema(t) = lambda * x(t) + (1 - lambda) * ema(t-1).
inline std::vector<double> exponential_moving_average(const std::vector<double>& x, double lambda) {
    if (!(lambda > 0.0) || lambda > 1.0)
        throw std::invalid_argument("ema: lambda must lie in (0,1]");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = i == 0 ? x[0] : lambda * x[i] + (1.0 - lambda) * out[i - 1];
    return out;
}

namespace detail {

// Shortest round-trip formatting keeps CSV output byte-stable.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace detail

// One record per (seed, method); deterministic field formatting.
inline void write_csv(const TrialReport& report, const std::filesystem::path& path) {
    if (report.results.empty()) throw std::invalid_argument("write_csv: empty report");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "seed,method,status,test_loss,train_loss,gradient_steps,learning_rate,regularization_rate\n";
    for (const auto& r : report.results) {
        auto hyper = [&](const char* name) {
            auto it = r.chosen_hyperparams.find(name);
            return it == r.chosen_hyperparams.end() ? std::string()
                                                    : detail::format_double(it->second);
        };
        out << r.seed << ',' << r.method << ',' << (r.failed ? "failed" : "ok") << ','
            << (r.failed ? "" : detail::format_double(r.test_loss)) << ','
            << (r.failed ? "" : detail::format_double(r.train_loss)) << ',' << r.gradient_steps
            << ',' << hyper(hp::learning_rate) << ',' << hyper(hp::regularization_rate) << '\n';
    }
}

// Aggregate table: Test Loss +/- sd, Train Loss +/- sd, Gradient Steps.
inline void write_markdown(const TrialReport& report, const std::filesystem::path& path) {
    if (report.results.empty()) throw std::invalid_argument("write_markdown: empty report");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "| Algorithm | Test Loss ± σ | Train Loss ± σ | Gradient Steps |\n";
    out << "|---|---|---|---|\n";
    for (const auto& method : report.methods()) {
        const auto agg = report.aggregate_for(method);
        out << "| " << method << " | ";
        if (agg.test_loss.count == 0) {
            out << "failed | failed | - |";
        } else {
            out << detail::format_fixed(agg.test_loss.mean, 3) << " ± "
                << detail::format_fixed(agg.test_loss.sd, 3) << " | "
                << detail::format_fixed(agg.train_loss.mean, 3) << " ± "
                << detail::format_fixed(agg.train_loss.sd, 3) << " | "
                << static_cast<std::uint64_t>(agg.gradient_steps.mean + 0.5) << " |";
        }
        if (agg.failures > 0) out << " <!-- " << agg.failures << " failed seed(s) -->";
        out << '\n';
    }
}

namespace detail {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

}  // namespace detail

// Line chart of smoothed cross-validation loss against cumulative gradient
// steps, one polyline per method (mean EMA across seeds).
inline void write_svg(const TrialReport& report, const std::filesystem::path& path,
                      double ema_lambda) {
    if (report.results.empty()) throw std::invalid_argument("write_svg: empty report");

    std::vector<detail::SvgSeries> series;
    for (const auto& method : report.methods()) {
        // Average the per-seed EMA traces pointwise over the steps axis of the
        // first non-failed seed (traces share cadence within a method).
        std::vector<std::vector<double>> smoothed;
        std::vector<std::uint64_t> steps_axis;
        for (const auto& r : report.results) {
            if (r.method != method || r.failed || r.cv_trace.empty()) continue;
            std::vector<double> losses;
            losses.reserve(r.cv_trace.size());
            for (const auto& [s, v] : r.cv_trace) losses.push_back(v);
            smoothed.push_back(exponential_moving_average(losses, ema_lambda));
            if (steps_axis.empty())
                for (const auto& [s, v] : r.cv_trace) steps_axis.push_back(s);
        }
        if (smoothed.empty()) continue;
        detail::SvgSeries s;
        s.label = method;
        const std::size_t len = steps_axis.size();
        for (std::size_t i = 0; i < len; ++i) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& trace : smoothed) {
                if (i < trace.size()) {
                    sum += trace[i];
                    ++count;
                }
            }
            if (count > 0)
                s.points.emplace_back(static_cast<double>(steps_axis[i]),
                                      sum / static_cast<double>(count));
        }
        if (!s.points.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) throw std::invalid_argument("write_svg: no traces to plot");

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;

    const double width = 860, height = 520, margin = 70;
    auto px = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto py = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - margin / 3
        << "\" text-anchor=\"middle\" font-size=\"14\">gradient steps</text>\n";
    out << "<text x=\"" << margin / 3 << "\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 " << margin / 3 << " "
        << height / 2 << ")\">cross-validation loss (EMA)</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 4.0;
        const double yv = ymin + (ymax - ymin) * t / 4.0;
        out << "<text x=\"" << px(xv) << "\" y=\"" << height - margin + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">"
            << static_cast<std::uint64_t>(xv + 0.5) << "</text>\n";
        out << "<text x=\"" << margin - 8 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << detail::format_fixed(yv, 3)
            << "</text>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << "<polyline fill=\"none\" stroke=\"" << detail::series_color(i)
            << "\" stroke-width=\"1.8\" points=\"";
        for (const auto& [x, y] : series[i].points)
            out << detail::format_fixed(px(x), 2) << ',' << detail::format_fixed(py(y), 2) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << width - margin + 6 << "\" y=\"" << margin + 18.0 * double(i)
            << "\" font-size=\"12\" fill=\"" << detail::series_color(i) << "\">" << series[i].label
            << "</text>\n";
    }
    out << "</svg>\n";
}

enum class ReportFormat { csv, markdown, svg };

inline std::vector<std::filesystem::path> write_report(const TrialReport& report,
                                                       const std::set<ReportFormat>& formats,
                                                       const std::filesystem::path& out_dir,
                                                       const std::string& stem,
                                                       double ema_lambda = 0.1) {
    if (report.results.empty()) throw std::invalid_argument("write_report: empty report");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    if (formats.count(ReportFormat::csv)) {
        auto p = out_dir / (stem + ".csv");
        write_csv(report, p);
        written.push_back(p);
    }
    if (formats.count(ReportFormat::markdown)) {
        auto p = out_dir / (stem + ".md");
        write_markdown(report, p);
        written.push_back(p);
    }
    if (formats.count(ReportFormat::svg)) {
        auto p = out_dir / (stem + ".svg");
        write_svg(report, p, ema_lambda);
        written.push_back(p);
    }
    return written;
}

}  // namespace popdescent
