#pragma once

#include "fgs/covariance.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fgs {

/// Penalized Gaussian BIC configuration. The score of a variable given p
/// parents is -n ln s - c (2p + 1) ln n, residual variance s, additive
/// constant dropped.
struct ScoreConfig {
    double penalty_discount = 2.0;

    void validate() const {
        if (!(penalty_discount > 0.0))
            throw std::invalid_argument("penalty discount must be positive");
    }
};

namespace detail {

// Relative floor under which a residual variance is treated as an exact
// linear dependency.
inline constexpr double kSingularRel = 1e-12;
// Absolute pivot floor for the parent-submatrix Cholesky.
inline constexpr double kPivotFloor = 1e-12;

/// In-place Cholesky solve of the k x k SPD system A w = b. Returns b' A^-1 b,
/// or nullopt when a pivot falls below the floor.
inline std::optional<double> spd_quadratic_form(std::vector<double>& a, std::vector<double>& b,
                                                std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
        double d = a[j * k + j];
        for (std::size_t r = 0; r < j; ++r) d -= a[j * k + r] * a[j * k + r];
        if (!(d > kPivotFloor)) return std::nullopt;
        const double root = std::sqrt(d);
        a[j * k + j] = root;
        for (std::size_t i = j + 1; i < k; ++i) {
            double v = a[i * k + j];
            for (std::size_t r = 0; r < j; ++r) v -= a[i * k + r] * a[j * k + r];
            a[i * k + j] = v / root;
        }
    }
    // forward substitution L z = b, then the form is z'z
    double out = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double v = b[i];
        for (std::size_t r = 0; r < i; ++r) v -= a[i * k + r] * b[r];
        b[i] = v / a[i * k + i];
        out += b[i] * b[i];
    }
    return out;
}

} // namespace detail

/// Decomposable SEM BIC score over an immutable covariance source. Pure and
/// safe to call concurrently from any number of workers.
class SemBicScore {
public:
    SemBicScore(const CovarianceSource& cov, ScoreConfig cfg) : cov_(&cov), cfg_(cfg) {
        cfg_.validate();
        n_ = static_cast<double>(cov.sample_count());
        log_n_ = std::log(n_);
    }

    const CovarianceSource& covariance_source() const { return *cov_; }
    double penalty_discount() const { return cfg_.penalty_discount; }

    /// Score of y given the parent set. nullopt signals a numerically singular
    /// candidate (collinear parents or zero residual variance); callers treat
    /// such candidates as invalid.
    std::optional<double> local_score(int y, std::span<const int> parents) const {
        const double var_y = cov_->variance(y);
        double s = var_y;
        const std::size_t k = parents.size();
        if (k > 0) {
            std::vector<double> a(k * k);
            std::vector<double> b(k);
            for (std::size_t i = 0; i < k; ++i) {
                if (parents[i] == y) throw std::invalid_argument("y cannot be its own parent");
                for (std::size_t j = 0; j <= i; ++j) {
                    const double c = cov_->covariance(parents[i], parents[j]);
                    a[i * k + j] = c;
                    a[j * k + i] = c;
                }
                b[i] = cov_->covariance(parents[i], y);
            }
            const auto explained = detail::spd_quadratic_form(a, b, k);
            if (!explained) return std::nullopt;
            s = var_y - *explained;
        }
        if (!(s > detail::kSingularRel * var_y) || !(s > 0.0)) return std::nullopt;
        const double dof = 2.0 * static_cast<double>(k) + 1.0;
        return -n_ * std::log(s) - cfg_.penalty_discount * dof * log_n_;
    }

    /// Score bump of adding x as a parent of y on top of `parents`:
    /// local_score(y, parents + x) - local_score(y, parents).
    std::optional<double> score_diff(int x, int y, std::span<const int> parents) const {
        if (x == y) throw std::invalid_argument("score_diff: x == y");
        const auto base = local_score(y, parents);
        if (!base) return std::nullopt;
        std::vector<int> extended(parents.begin(), parents.end());
        extended.push_back(x);
        const auto with_x = local_score(y, extended);
        if (!with_x) return std::nullopt;
        return *with_x - *base;
    }

private:
    const CovarianceSource* cov_;
    ScoreConfig cfg_;
    double n_ = 0.0;
    double log_n_ = 0.0;
};

} // namespace fgs
