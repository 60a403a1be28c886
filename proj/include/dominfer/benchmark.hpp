#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "dominfer/util.hpp"

namespace dominfer {

struct BenchRow {
    std::string engine;
    double scale = 1.0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double median_seconds = 0.0;
    bool censored = false;  // run exceeded the timeout
};

// Median wall time over `repetitions` runs of fn(); graph loading and setup
// belong outside fn.
inline BenchRow time_engine(const std::string& engine, double scale, std::size_t nodes,
                            std::size_t edges, const std::function<void()>& fn,
                            unsigned repetitions = 3, double timeout_seconds = 600.0) {
    BenchRow row{engine, scale, nodes, edges, 0.0, false};
    std::vector<double> times;
    for (unsigned r = 0; r < repetitions; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        times.push_back(secs);
        if (secs > timeout_seconds) {
            row.censored = true;
            break;
        }
    }
    std::sort(times.begin(), times.end());
    row.median_seconds = times[times.size() / 2];
    return row;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string csv = "engine,scale,nodes,edges,median_seconds\n";
    for (const auto& r : rows) {
        csv += r.engine + "," + format_double(r.scale) + "," + std::to_string(r.nodes) + "," +
               std::to_string(r.edges) + ",";
        csv += r.censored ? "censored" : format_double(r.median_seconds);
        csv += "\n";
    }
    return csv;
}

// Least-squares R^2 of y against x; used for the linear-runtime trend check.
inline double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InputError("need matched samples for a linear fit");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = double(n) * sxx - sx * sx;
    if (denom == 0) return 0.0;
    double slope = (double(n) * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / double(n);
    double ss_res = 0, ss_tot = 0, mean = sy / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        double fit = slope * x[i] + intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot == 0) return 1.0;
    return 1.0 - ss_res / ss_tot;
}

}  // namespace dominfer
