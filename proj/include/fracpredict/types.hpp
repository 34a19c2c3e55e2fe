#ifndef FRACPREDICT_TYPES_HPP
#define FRACPREDICT_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fracpredict/errors.hpp"

namespace fracpredict {

/// Hurst index H in the open interval (0,1).
class HurstIndex {
  public:
    explicit HurstIndex(double value) : value_(value) {
        if (!(value > 0.0 && value < 1.0))
            throw DomainError("Hurst index must lie in (0,1)");
    }
    double value() const { return value_; }

  private:
    double value_;
};

/// Strictly increasing grid of non-negative times.
class TimeGrid {
  public:
    explicit TimeGrid(std::vector<double> points);

    /// Equally spaced grid {0, end/n, ..., end} with n intervals.
    static TimeGrid regular(double end, std::size_t n_intervals);

    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double front() const { return points_.front(); }
    double last() const { return points_.back(); }
    bool origin_included() const { return origin_included_; }
    std::span<const double> points() const { return points_; }

    /// Index of an exact grid member (tolerance one rounding unit); throws DomainError otherwise.
    std::size_t index_of(double t) const;
    bool contains(double t) const;

    /// True when spacing is uniform to ~1e-9 relative; fills `step` when given.
    bool is_regular(double* step = nullptr) const;

  private:
    std::vector<double> points_;
    bool origin_included_ = false;
};

inline TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw DomainError("TimeGrid: empty point set");
    if (points_.front() < 0.0) throw DomainError("TimeGrid: negative time");
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (!(points_[i] > points_[i - 1]))
            throw DomainError("TimeGrid: points must be strictly increasing");
    origin_included_ = (points_.front() == 0.0);
}

inline TimeGrid TimeGrid::regular(double end, std::size_t n_intervals) {
    if (!(end > 0.0) || n_intervals == 0)
        throw DomainError("TimeGrid::regular: end must be > 0 and n_intervals >= 1");
    std::vector<double> pts(n_intervals + 1);
    const double step = end / static_cast<double>(n_intervals);
    for (std::size_t i = 0; i <= n_intervals; ++i) pts[i] = static_cast<double>(i) * step;
    pts.back() = end;
    return TimeGrid(std::move(pts));
}

inline std::size_t TimeGrid::index_of(double t) const {
    // binary search then exact-ish match
    std::size_t lo = 0, hi = points_.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (points_[mid] < t)
            lo = mid + 1;
        else
            hi = mid;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    for (std::size_t i = (lo > 0 ? lo - 1 : 0); i < points_.size() && i <= lo + 1; ++i)
        if (std::abs(points_[i] - t) <= tol) return i;
    throw DomainError("TimeGrid: requested time not on grid");
}

inline bool TimeGrid::contains(double t) const {
    try {
        (void)index_of(t);
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

inline bool TimeGrid::is_regular(double* step) const {
    if (points_.size() < 2) return false;
    const double h = (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (std::abs((points_[i] - points_[i - 1]) - h) > 1e-9 * h) return false;
    if (step) *step = h;
    return true;
}

}  // namespace fracpredict

#endif
