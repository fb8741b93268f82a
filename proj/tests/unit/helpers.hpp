#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cellcast/ingest.hpp"
#include "cellcast/nn/layers.hpp"
#include "cellcast/rng.hpp"

namespace testing {

inline std::vector<double> random_vector(cellcast::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline cellcast::nn::NdArray random_array(cellcast::Rng& rng, cellcast::nn::Shape shape, double scale = 1.0) {
    cellcast::nn::NdArray a(std::move(shape));
    for (auto& x : a.data()) x = rng.uniform(-scale, scale);
    return a;
}

inline void randomize(const cellcast::nn::ParameterList& params, cellcast::Rng& rng, double scale = 0.5) {
    for (auto* p : params)
        for (auto& x : p->value.data()) x = rng.uniform(-scale, scale);
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("cellcast_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline cellcast::ingest::HourlyCellSeries make_series(std::int64_t cell, std::int64_t start,
                                                     std::vector<double> values) {
    return {cell, start, std::move(values)};
}

/// Two-pass textbook correlation, written independently of the library.
inline double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

}  // namespace testing
