#pragma once

#include <random>
#include <vector>

namespace wsnrl {

// One realization of the zero-mean Gaussian field on the deck grid.
struct RandomFieldSample {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major, rows*cols
    double sigma = 0.0;
    double l0 = 0.0;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at_cell(int cell) const { return values[static_cast<std::size_t>(cell)]; }
};

// Samples stationary zero-mean Gaussian fields with covariance
// C(d) = sigma^2 * exp(-d / l0), d = Euclidean distance in grid-cell units.
// The covariance matrix is Cholesky-factorized once (with a 1e-10 relative
// diagonal jitter) and reused for every draw.
class FieldSampler {
  public:
    FieldSampler(int rows, int cols, double sigma, double l0);

    RandomFieldSample sample(std::mt19937_64& rng) const;

    int rows() const { return rows_; }
    int cols() const { return cols_; }

  private:
    int rows_;
    int cols_;
    double sigma_;
    double l0_;
    std::vector<double> chol_;  // lower-triangular factor, n x n row-major
};

// In-place lower Cholesky of a symmetric matrix (row-major n x n).
// Throws NumericalError if a pivot is not positive.
void cholesky_in_place(std::vector<double>& a, int n);

}  // namespace wsnrl
