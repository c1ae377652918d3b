// System parameters and initial configurations.
//
// The collision parameter p in [0,1] splits each pair local time between
// the two colliding particles: the upper one is pushed up with weight p,
// the lower one down with weight q = 1-p.  Infinite sequences (drifts,
// initial positions) are stored as a finite prefix plus an explicit tail
// rule; consumers may only ever request finitely many entries.

#ifndef CBP_PARAMS_HPP
#define CBP_PARAMS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cbp {

struct SystemParams {
    double p = 0.5;
    double q = 0.5;                   // q = 1 - p, kept explicit
    std::vector<double> drift_prefix; // g_1, g_2, ..., empty means all-tail
    double drift_tail = 0.0;          // constant value of g_j past the prefix

    static SystemParams make(double p, std::vector<double> drift_prefix = {},
                             double drift_tail = 0.0) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("SystemParams: p must be in [0,1]");
        SystemParams sp;
        sp.p = p;
        sp.q = 1.0 - p;
        sp.drift_prefix = std::move(drift_prefix);
        sp.drift_tail = drift_tail;
        return sp;
    }

    // r = p/q, the geometric weight used by the weighted-path bounds.
    double r() const {
        if (q == 0.0) throw std::domain_error("SystemParams: r undefined at q=0");
        return p / q;
    }

    // sigma = q/p, the contraction ratio of the local-time series when p > q.
    double sigma() const {
        if (p == 0.0) throw std::domain_error("SystemParams: sigma undefined at p=0");
        return q / p;
    }

    double drift(std::size_t j) const { // 1-based particle index
        if (j == 0) throw std::invalid_argument("drift: index is 1-based");
        return j <= drift_prefix.size() ? drift_prefix[j - 1] : drift_tail;
    }

    // sup_j |g_j|; finite for any constant-tail rule.
    double drift_sup_norm() const {
        double m = std::fabs(drift_tail);
        for (double g : drift_prefix) m = std::max(m, std::fabs(g));
        return m;
    }

    // sum_j g_j^2; infinite unless the tail is identically zero.
    double drift_sq_sum() const {
        if (drift_tail != 0.0) return std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (double g : drift_prefix) s += g * g;
        return s;
    }
};

// Non-decreasing initial positions x_1 <= x_2 <= ...; prefix + tail rule.
class InitialConfig {
public:
    enum class Tail { Constant, Power }; // Power: x_k = a * k^chi + b

    static InitialConfig constant(double value, std::vector<double> prefix = {}) {
        return InitialConfig(std::move(prefix), Tail::Constant, 0.0, 0.0, value);
    }

    static InitialConfig power(double a, double chi, double b = 0.0,
                               std::vector<double> prefix = {}) {
        return InitialConfig(std::move(prefix), Tail::Power, a, chi, b);
    }

    double x(std::size_t k) const { // 1-based
        if (k == 0) throw std::invalid_argument("InitialConfig: index is 1-based");
        if (k <= prefix_.size()) return prefix_[k - 1];
        return tail_value(k);
    }

    std::vector<double> first(std::size_t n) const {
        std::vector<double> out(n);
        for (std::size_t k = 1; k <= n; ++k) out[k - 1] = x(k);
        return out;
    }

    Tail tail_kind() const { return tail_; }
    double tail_a() const { return a_; }
    double tail_chi() const { return chi_; }
    double tail_b() const { return b_; }

    // True when the tail grows at least like k^chi with chi > 1/2, the
    // growth needed for the variational solution of the fully asymmetric
    // system to localise its infimum.
    bool admissible_tail() const { return tail_ == Tail::Power && a_ > 0.0 && chi_ > 0.5; }

private:
    InitialConfig(std::vector<double> prefix, Tail tail, double a, double chi, double b)
        : prefix_(std::move(prefix)), tail_(tail), a_(a), chi_(chi), b_(b) {
        for (std::size_t k = 0; k + 1 < prefix_.size(); ++k)
            if (prefix_[k] > prefix_[k + 1])
                throw std::invalid_argument("InitialConfig: prefix must be non-decreasing");
        if (tail_ == Tail::Power && a_ < 0.0)
            throw std::invalid_argument("InitialConfig: power tail must be non-decreasing (a >= 0)");
        if (!prefix_.empty() && prefix_.back() > tail_value(prefix_.size() + 1))
            throw std::invalid_argument("InitialConfig: tail must continue non-decreasingly");
    }

    double tail_value(std::size_t k) const {
        if (tail_ == Tail::Constant) return b_;
        return a_ * std::pow(static_cast<double>(k), chi_) + b_;
    }

    std::vector<double> prefix_;
    Tail tail_;
    double a_ = 0.0, chi_ = 0.0, b_ = 0.0;
};

} // namespace cbp

#endif // CBP_PARAMS_HPP
