// Time grid shared by all path objects.  All optimisation, reflection and
// local-time bookkeeping in this library happens at grid points; paths are
// understood as piecewise linear between them.

#ifndef CBP_GRID_HPP
#define CBP_GRID_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbp {

class TimeGrid {
public:
    TimeGrid() = default;

    // Arbitrary strictly increasing grid with t_0 = 0.
    explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
        if (times_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two points");
        if (times_.front() != 0.0) throw std::invalid_argument("TimeGrid: t_0 must be 0");
        for (std::size_t k = 0; k + 1 < times_.size(); ++k)
            if (!(times_[k] < times_[k + 1]))
                throw std::invalid_argument("TimeGrid: times must be strictly increasing");
    }

    static TimeGrid uniform(double horizon, std::size_t n_steps) {
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
        if (n_steps == 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
        std::vector<double> t(n_steps + 1);
        for (std::size_t k = 0; k <= n_steps; ++k)
            t[k] = (horizon * static_cast<double>(k)) / static_cast<double>(n_steps);
        t[n_steps] = horizon;
        return TimeGrid(std::move(t));
    }

    std::size_t n_steps() const { return times_.size() - 1; }
    std::size_t n_points() const { return times_.size(); }
    double horizon() const { return times_.back(); }
    double time(std::size_t k) const { return times_[k]; }
    double dt(std::size_t k) const { return times_[k + 1] - times_[k]; }
    const std::vector<double>& times() const { return times_; }

    // Exact-match lookup; no interpolation is ever performed.  The match
    // tolerance absorbs only last-bit noise from reconstructing grid times.
    std::size_t index_of(double t) const {
        const double tol = 1e-12 * std::max(1.0, horizon());
        // grid sizes are small; linear scan keeps the matching rule obvious
        for (std::size_t k = 0; k < times_.size(); ++k)
            if (std::fabs(times_[k] - t) <= tol) return k;
        throw std::invalid_argument("TimeGrid: t=" + std::to_string(t) + " is not a grid point");
    }

    bool contains(double t) const {
        const double tol = 1e-12 * std::max(1.0, horizon());
        for (double tk : times_)
            if (std::fabs(tk - t) <= tol) return true;
        return false;
    }

    // Suffix grid starting at grid index a, re-anchored to start at 0.
    TimeGrid suffix_from(std::size_t a) const {
        if (a + 2 > times_.size())
            throw std::invalid_argument("TimeGrid: suffix would have fewer than two points");
        std::vector<double> t(times_.size() - a);
        for (std::size_t k = a; k < times_.size(); ++k) t[k - a] = times_[k] - times_[a];
        t[0] = 0.0;
        return TimeGrid(std::move(t));
    }

private:
    std::vector<double> times_;
};

} // namespace cbp

#endif // CBP_GRID_HPP
