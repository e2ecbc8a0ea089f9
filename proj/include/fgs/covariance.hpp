#pragma once

#include "fgs/dataset.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace fgs {

/// Centered copy of a dataset with precomputed means and MLE variances.
/// Pairwise covariances are never stored; they are computed on demand from
/// the centered columns, so memory stays linear in the data size.
class CovarianceSource {
public:
    explicit CovarianceSource(const Dataset& data) {
        data.validate();
        n_ = data.n;
        p_ = data.var_count();
        names_ = data.names;
        centered_.resize(p_ * n_);
        means_.resize(p_);
        variances_.resize(p_);
        for (std::size_t j = 0; j < p_; ++j) {
            const auto& col = data.columns[j];
            double sum = 0.0;
            for (double v : col) sum += v;
            const double mean = sum / static_cast<double>(n_);
            double* out = centered_.data() + j * n_;
            double sq = 0.0;
            for (std::size_t t = 0; t < n_; ++t) {
                out[t] = col[t] - mean;
                sq += out[t] * out[t];
            }
            means_[j] = mean;
            variances_[j] = sq / static_cast<double>(n_);
        }
    }

    std::size_t sample_count() const { return n_; }
    std::size_t var_count() const { return p_; }
    const std::vector<std::string>& names() const { return names_; }
    double mean(int j) const { return means_[static_cast<std::size_t>(j)]; }
    double variance(int j) const { return variances_[static_cast<std::size_t>(j)]; }

    /// (1/n) sum_t (x_ti - mean_i)(x_tj - mean_j); symmetric by construction.
    double covariance(int i, int j) const {
        if (i == j) return variances_[static_cast<std::size_t>(i)];
        const double* a = centered_.data() + static_cast<std::size_t>(i) * n_;
        const double* b = centered_.data() + static_cast<std::size_t>(j) * n_;
        double dot = 0.0;
        for (std::size_t t = 0; t < n_; ++t) dot += a[t] * b[t];
        return dot / static_cast<double>(n_);
    }

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::vector<std::string> names_;
    std::vector<double> centered_; // column-major, p_ * n_
    std::vector<double> means_;
    std::vector<double> variances_;
};

} // namespace fgs
