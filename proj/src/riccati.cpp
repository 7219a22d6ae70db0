#include "hdl/riccati.hpp"

#include <algorithm>
#include <cmath>

#include "hdl/errors.hpp"

namespace hdl::riccati {

double rhs(Sign sign, double s, double m, double W) {
    if (sign == Sign::Plus) return s * m * m - s - 2.0 * m + (1.0 + m * m) * W;
    return 2.0 * m - s * m * m + s - (1.0 + m * m) * W;
}

namespace {

struct Stepper {
    const std::function<double(double)>& W;
    Sign sign;

    double f(double t, double m) const {
        double s = std::exp(t);
        return rhs(sign, s, m, W(s));
    }

    double rk4(double t, double m, double h) const {
        double k1 = f(t, m);
        double k2 = f(t + 0.5 * h, m + 0.5 * h * k1);
        double k3 = f(t + 0.5 * h, m + 0.5 * h * k2);
        double k4 = f(t + h, m + h * k3);
        return m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

} // namespace

Trace integrate(const std::function<double(double)>& W, Sign sign, double s0, double m0,
                double s_end, const Options& opt) {
    if (!(s0 > 0.0) || !(s_end > s0)) throw DomainError("riccati: need 0 < s0 < s_end");
    Stepper st{W, sign};

    std::vector<double> stops;
    for (double b : opt.breakpoints)
        if (b > s0 && b < s_end) stops.push_back(std::log(b));
    std::sort(stops.begin(), stops.end());
    stops.push_back(std::log(s_end));

    Trace tr;
    double t = std::log(s0), m = m0;
    tr.s.push_back(s0);
    tr.m.push_back(m0);
    tr.max_m = m0;
    double h = opt.max_dt;
    double seg_start = t;

    for (double stop : stops) {
        double seg_cap = std::min(opt.max_dt, (stop - seg_start) / 4.0);
        h = std::min(h, seg_cap);
        while (t < stop) {
            double hh = std::min({h, seg_cap, stop - t});
            double full = st.rk4(t, m, hh);
            double half = st.rk4(t, m, 0.5 * hh);
            half = st.rk4(t + 0.5 * hh, half, 0.5 * hh);
            double err = std::abs(half - full) / 15.0;
            double scale = std::max(1.0, std::abs(half));
            bool finite = std::isfinite(half) && std::isfinite(full);
            if (finite && err <= opt.tol * scale) {
                t = (stop - t <= hh) ? stop : t + hh;
                m = half + (half - full) / 15.0;
                tr.s.push_back(std::exp(t));
                tr.m.push_back(m);
                tr.max_m = std::max(tr.max_m, m);
                if (std::abs(m) > opt.cap) {
                    tr.blew_up = true;
                    tr.escape_radius = std::exp(t);
                    return tr;
                }
                double fac = err > 0.0 ? 0.9 * std::pow(opt.tol * scale / err, 0.2) : 5.0;
                h = hh * std::clamp(fac, 0.2, 5.0);
            } else {
                double fac = (finite && err > 0.0) ? 0.9 * std::pow(opt.tol * scale / err, 0.2) : 0.1;
                h = hh * std::clamp(fac, 0.05, 0.5);
                if (h < 1e-15 * std::max(1.0, std::abs(t))) {
                    // step size collapsed: the solution leaves every bound here
                    tr.blew_up = true;
                    tr.escape_radius = std::exp(t);
                    return tr;
                }
            }
        }
        seg_start = stop;
        h = opt.max_dt;
    }
    return tr;
}

} // namespace hdl::riccati
