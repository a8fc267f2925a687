#pragma once

#include <span>
#include <vector>

namespace wsnrl {

// One extracted charge/discharge excursion: depth is the state-of-charge
// range as a fraction of capacity, count is 1.0 for closed cycles and 0.5
// for residual half-cycles.
struct Cycle {
    double depth = 0.0;
    double count = 1.0;
};
using CycleSet = std::vector<Cycle>;

// Turning points of a trace: first point, interior reversals, last point.
// Consecutive duplicates are dropped.
std::vector<double> turning_points(std::span<const double> trace);

// Four-point rainflow with residual half-cycle counting. Deterministic.
CycleSet rainflow(std::span<const double> trace);

// Miner's-rule damage: sum over cycles of count / (A * depth^B) * 100 (%).
double damage(const CycleSet& cycles, double a, double b);

// Incremental rainflow damage. value() equals damage(rainflow(prefix)) for
// the exact samples pushed so far: closed cycles accumulate permanently,
// and the query finalizes a copy of the residual stack (including the
// provisional last extremum) through the same reduction code.
class OnlineDegradation {
  public:
    OnlineDegradation(double a, double b) : a_(a), b_(b) {}

    void push(double soc);
    double value() const;
    void reset();

  private:
    double a_;
    double b_;
    double closed_damage_ = 0.0;
    std::vector<double> stack_;  // confirmed turning points, already reduced
    double pending_ = 0.0;       // provisional last extremum
    bool has_pending_ = false;
    int direction_ = 0;  // 0 until two distinct samples seen
};

}  // namespace wsnrl
