#include "wsnrl/random_field.hpp"

#include <cmath>

#include "wsnrl/errors.hpp"

namespace wsnrl {

void cholesky_in_place(std::vector<double>& a, int n) {
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<std::size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) {
            double v = a[static_cast<std::size_t>(j) * n + k];
            d -= v * v;
        }
        if (!(d > 0.0))
            throw NumericalError("covariance matrix not positive-definite after jitter (pivot " +
                                 std::to_string(j) + ")");
        double dj = std::sqrt(d);
        a[static_cast<std::size_t>(j) * n + j] = dj;
        for (int i = j + 1; i < n; ++i) {
            double s = a[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= a[static_cast<std::size_t>(i) * n + k] * a[static_cast<std::size_t>(j) * n + k];
            a[static_cast<std::size_t>(i) * n + j] = s / dj;
        }
        for (int k = j + 1; k < n; ++k) a[static_cast<std::size_t>(j) * n + k] = 0.0;
    }
}

FieldSampler::FieldSampler(int rows, int cols, double sigma, double l0)
    : rows_(rows), cols_(cols), sigma_(sigma), l0_(l0) {
    if (rows < 1 || cols < 1) throw ConfigError("field grid must be at least 1x1");
    if (sigma < 0.0) throw ConfigError("field sigma must be >= 0");
    if (l0 <= 0.0) throw ConfigError("field length scale must be positive");
    if (sigma_ == 0.0) return;  // degenerate field, no factorization needed

    const int n = rows * cols;
    const double var = sigma * sigma;
    chol_.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        int ri = i / cols, ci = i % cols;
        for (int j = 0; j <= i; ++j) {
            int rj = j / cols, cj = j % cols;
            double dr = ri - rj, dc = ci - cj;
            double d = std::sqrt(dr * dr + dc * dc);
            double v = var * std::exp(-d / l0);
            chol_[static_cast<std::size_t>(i) * n + j] = v;
            chol_[static_cast<std::size_t>(j) * n + i] = v;
        }
        chol_[static_cast<std::size_t>(i) * n + i] = var * (1.0 + 1e-10);
    }
    cholesky_in_place(chol_, n);
}

RandomFieldSample FieldSampler::sample(std::mt19937_64& rng) const {
    RandomFieldSample out;
    out.rows = rows_;
    out.cols = cols_;
    out.sigma = sigma_;
    out.l0 = l0_;
    const int n = rows_ * cols_;
    out.values.assign(static_cast<std::size_t>(n), 0.0);
    if (sigma_ == 0.0) return out;

    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = normal(rng);
    // y = L z, L lower triangular
    for (int i = 0; i < n; ++i) {
        const double* row = chol_.data() + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int k = 0; k <= i; ++k) acc += row[k] * z[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

}  // namespace wsnrl
