#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ebsde::stats {

// Streaming mean/variance (Welford).  Merge order of chunks is fixed by the
// caller, so results are reproducible independent of thread count.
class RunningMoments {
  public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const RunningMoments& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double d = o.mean_ - mean_;
        mean_ += d * nb / (na + nb);
        m2_ += o.m2_ + d * d * na * nb / (na + nb);
        n_ += o.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double std_error() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }
    // Half-width of the normal-approximation 95% confidence interval.
    double half_width_95() const { return 1.959963984540054 * std_error(); }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares y ~ intercept + slope * x.
inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
    LineFit out;
    out.n = x.size() < y.size() ? x.size() : y.size();
    if (out.n < 2) return out;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < out.n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(out.n);
    my /= static_cast<double>(out.n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < out.n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) return out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return out;
}

}  // namespace ebsde::stats
