#include "wsnrl/degradation.hpp"

#include <cmath>

namespace wsnrl {
namespace {

// Reduce the top of the turning-point stack: whenever the inner range of the
// last four points is the smallest, the inner pair forms a closed cycle and
// is removed. Extracted cycles are appended to *out.
void four_point_reduce(std::vector<double>& s, CycleSet* out) {
    while (s.size() >= 4) {
        std::size_t n = s.size();
        double r1 = std::abs(s[n - 4] - s[n - 3]);
        double r2 = std::abs(s[n - 3] - s[n - 2]);
        double r3 = std::abs(s[n - 2] - s[n - 1]);
        if (r2 <= r1 && r2 <= r3) {
            out->push_back({r2, 1.0});
            s.erase(s.begin() + static_cast<std::ptrdiff_t>(n - 3),
                    s.begin() + static_cast<std::ptrdiff_t>(n - 1));
        } else {
            break;
        }
    }
}

void residual_halves(const std::vector<double>& s, CycleSet* out) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        out->push_back({std::abs(s[i + 1] - s[i]), 0.5});
}

}  // namespace

std::vector<double> turning_points(std::span<const double> trace) {
    std::vector<double> tp;
    for (double x : trace) {
        if (!tp.empty() && x == tp.back()) continue;
        if (tp.size() >= 2) {
            double a = tp[tp.size() - 2];
            double b = tp.back();
            if ((b - a > 0.0) == (x - b > 0.0)) {
                tp.back() = x;  // same direction, extend the leg
                continue;
            }
        }
        tp.push_back(x);
    }
    return tp;
}

CycleSet rainflow(std::span<const double> trace) {
    CycleSet cycles;
    std::vector<double> stack;
    for (double tp : turning_points(trace)) {
        stack.push_back(tp);
        four_point_reduce(stack, &cycles);
    }
    residual_halves(stack, &cycles);
    return cycles;
}

double damage(const CycleSet& cycles, double a, double b) {
    double total = 0.0;
    for (const Cycle& c : cycles) {
        if (c.depth <= 0.0) continue;
        total += c.count / (a * std::pow(c.depth, b)) * 100.0;
    }
    return total;
}

void OnlineDegradation::reset() {
    closed_damage_ = 0.0;
    stack_.clear();
    has_pending_ = false;
    direction_ = 0;
}

void OnlineDegradation::push(double soc) {
    if (!has_pending_) {
        pending_ = soc;
        has_pending_ = true;
        return;
    }
    if (soc == pending_) return;
    int d = soc > pending_ ? 1 : -1;
    if (direction_ == 0) {
        stack_.push_back(pending_);  // the trace's first point is a turning point
        direction_ = d;
        pending_ = soc;
        return;
    }
    if (d == direction_) {
        pending_ = soc;
        return;
    }
    // reversal: the pending extremum is confirmed
    stack_.push_back(pending_);
    CycleSet closed;
    four_point_reduce(stack_, &closed);
    closed_damage_ += damage(closed, a_, b_);
    direction_ = d;
    pending_ = soc;
}

double OnlineDegradation::value() const {
    if (stack_.empty() && !has_pending_) return closed_damage_;
    std::vector<double> tail = stack_;
    if (has_pending_ && direction_ != 0) tail.push_back(pending_);
    CycleSet rest;
    four_point_reduce(tail, &rest);
    residual_halves(tail, &rest);
    return closed_damage_ + damage(rest, a_, b_);
}

}  // namespace wsnrl
