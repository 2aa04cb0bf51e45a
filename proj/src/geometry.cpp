#include "gravjet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gravjet {

WallCurve WallCurve::analytic(double H, double Hi, int sign) {
    WallCurve w;
    w.analytic_ = true;
    w.y_lo_ = H;
    w.hi_ = Hi;
    w.sign_ = sign;
    return w;
}

WallCurve WallCurve::from_samples(std::vector<double> y, std::vector<double> x) {
    if (y.size() < 3 || y.size() != x.size())
        throw DomainError("wall samples: need at least 3 (y, x) pairs");
    for (std::size_t k = 1; k < y.size(); ++k)
        if (!(y[k] > y[k - 1]))
            throw DomainError("wall samples: y must be strictly increasing");
    WallCurve w;
    w.analytic_ = false;
    w.y_lo_ = y.front();
    w.hi_ = y.back();
    w.ys_ = std::move(y);
    w.xs_ = std::move(x);
    // Fritsch-Carlson slopes: start from three-point estimates, then limit so
    // the interpolant is monotone on monotone data segments.
    const std::size_t n = w.ys_.size();
    std::vector<double> d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
        d[k] = (w.xs_[k + 1] - w.xs_[k]) / (w.ys_[k + 1] - w.ys_[k]);
    w.ds_.assign(n, 0.0);
    w.ds_[0] = d[0];
    w.ds_[n - 1] = d[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] * d[k] <= 0.0)
            w.ds_[k] = 0.0;
        else {
            const double w1 = 2.0 * (w.ys_[k + 1] - w.ys_[k]) + (w.ys_[k] - w.ys_[k - 1]);
            const double w2 = (w.ys_[k + 1] - w.ys_[k]) + 2.0 * (w.ys_[k] - w.ys_[k - 1]);
            w.ds_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (d[k] == 0.0) {
            w.ds_[k] = w.ds_[k + 1] = 0.0;
        } else {
            const double a = w.ds_[k] / d[k], b = w.ds_[k + 1] / d[k];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double t = 3.0 / std::sqrt(s);
                w.ds_[k] = t * a * d[k];
                w.ds_[k + 1] = t * b * d[k];
            }
        }
    }
    return w;
}

double WallCurve::segment_eval(std::size_t k, double y) const {
    const double h = ys_[k + 1] - ys_[k];
    const double t = (y - ys_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return xs_[k] * (2 * t3 - 3 * t2 + 1) + h * ds_[k] * (t3 - 2 * t2 + t) +
           xs_[k + 1] * (-2 * t3 + 3 * t2) + h * ds_[k + 1] * (t3 - t2);
}

double WallCurve::x_at(double y) const {
    if (analytic_) {
        if (y >= hi_)
            throw DomainError("wall evaluated at or above its end height");
        const double d = y - y_lo_;
        return static_cast<double>(sign_) - d * d / (hi_ - y);
    }
    if (y < ys_.front() - 1e-12 || y > ys_.back() + 1e-12)
        throw DomainError("wall evaluated outside sample range");
    const double yc = std::clamp(y, ys_.front(), ys_.back());
    auto it = std::upper_bound(ys_.begin(), ys_.end(), yc);
    std::size_t k = (it == ys_.begin()) ? 0 : static_cast<std::size_t>(it - ys_.begin()) - 1;
    if (k + 1 >= ys_.size()) k = ys_.size() - 2;
    return segment_eval(k, yc);
}

double WallCurve::y_max() const { return hi_; }

double WallCurve::y_at_x(double x_target) const {
    if (analytic_) {
        // x(y) strictly decreasing on (H, Hi); bracket near the open end.
        double lo = y_lo_, hi = hi_ - 1e-9 * (hi_ - y_lo_);
        while (x_at(hi) > x_target) {
            const double gap = hi_ - hi;
            if (gap < 1e-300)
                throw TruncationTooSmall("wall does not reach the truncation line");
            hi = hi_ - 0.5 * gap;
        }
        if (x_at(lo) < x_target)
            throw TruncationTooSmall("truncation line left of the wall start");
        for (int it = 0; it < 200 && hi - lo > 1e-14 * (hi_ - y_lo_); ++it) {
            const double mid = 0.5 * (lo + hi);
            (x_at(mid) > x_target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    // Scan segments from the top for the highest crossing.
    for (std::size_t k = ys_.size() - 1; k-- > 0;) {
        const double xa = xs_[k], xb = xs_[k + 1];
        if ((xa - x_target) * (xb - x_target) > 0.0)
            continue;
        double lo = ys_[k], hi = ys_[k + 1];
        // Hermite segment is monotone on monotone data; bisect on it.
        const bool decreasing = xa > xb;
        for (int it = 0; it < 200 && hi - lo > 1e-14 * (ys_.back() - ys_.front()); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double xm = segment_eval(k, mid);
            if ((decreasing && xm > x_target) || (!decreasing && xm < x_target))
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
    throw TruncationTooSmall("wall samples do not reach the truncation line");
}

std::vector<std::pair<double, double>> WallCurve::polyline(double y_hi, double max_step) const {
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(x_at(y_lo_), y_lo_);
    double y = y_lo_;
    while (y < y_hi - 1e-14) {
        double step = max_step;
        double yn, xn;
        // Halve the parameter step until the x jump is also bounded.
        for (;;) {
            yn = std::min(y + step, y_hi);
            xn = x_at(std::min(yn, y_max() - 1e-12 * (y_max() - y_lo_)));
            if (std::abs(xn - pts.back().first) <= max_step || step < 1e-9 * max_step)
                break;
            step *= 0.5;
        }
        pts.emplace_back(xn, yn);
        y = yn;
    }
    return pts;
}

namespace {

void validate_nozzle(const NozzleGeometry& g) {
    if (!(0.0 < g.H && g.H < g.H1 && g.H1 < g.H2))
        throw GeometryOrderViolation("nozzle heights must satisfy 0 < H < H1 < H2");
    if (std::abs(g.g1.x_at(g.H) + 1.0) > 1e-12)
        throw NormalizationError("g1(H) must equal -1");
    if (std::abs(g.g2.x_at(g.H) - 1.0) > 1e-12)
        throw NormalizationError("g2(H) must equal +1");
    // Walls must not touch where both are defined.
    const double top = std::min(g.g1.y_max(), g.g2.y_max());
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
        const double y = g.H + (top - g.H) * (k + 0.5) / (n + 1);
        if (y >= g.g1.y_max() || y >= g.g2.y_max()) break;
        if (g.g1.x_at(y) >= g.g2.x_at(y))
            throw CrossingWalls("g1 >= g2 at y = " + std::to_string(y));
    }
}

} // namespace

NozzleGeometry build_nozzle(double H, double H1, double H2) {
    NozzleGeometry g{WallCurve::analytic(H, H1, -1), WallCurve::analytic(H, H2, +1), H, H1, H2};
    validate_nozzle(g);
    return g;
}

NozzleGeometry build_nozzle(std::vector<double> y1, std::vector<double> x1,
                            std::vector<double> y2, std::vector<double> x2,
                            double H, double H1, double H2) {
    NozzleGeometry g{WallCurve::from_samples(std::move(y1), std::move(x1)),
                     WallCurve::from_samples(std::move(y2), std::move(x2)), H, H1, H2};
    if (std::abs(g.g1.y_min() - H) > 1e-12 || std::abs(g.g2.y_min() - H) > 1e-12)
        throw NormalizationError("wall samples must start at y = H");
    validate_nozzle(g);
    return g;
}

const char* segment_name(SegmentId s) {
    switch (s) {
        case SegmentId::Wall1: return "N1mu";
        case SegmentId::Wall2: return "N2mu";
        case SegmentId::Lid1: return "L1mu";
        case SegmentId::Lid2: return "L2mu";
        case SegmentId::Sigma1: return "sigma1mu";
        case SegmentId::Sigma2: return "sigma2mu";
        case SegmentId::SigmaIn: return "sigmamu";
        case SegmentId::Ground: return "Nmu";
        default: return "none";
    }
}

double TruncatedDomain::left_bound(double y) const {
    return (y <= H1mu) ? geom.g1.x_at(y) : -mu;
}

double TruncatedDomain::right_bound(double y) const {
    return std::min(geom.g2.x_at(y), mu);
}

bool TruncatedDomain::inside_closed(double x, double y) const {
    if (y < 0.0 || x < -mu || x > mu) return false;
    if (y <= geom.H) return true;
    if (y > H2mu) return false;
    return left_bound(y) <= x && x <= right_bound(y);
}

bool TruncatedDomain::inside_open(double x, double y) const {
    if (y <= 0.0 || x <= -mu || x >= mu) return false;
    if (y < geom.H) return true;
    if (y == geom.H) return -1.0 < x && x < 1.0;
    if (y >= H2mu) return false;
    return left_bound(y) < x && x < right_bound(y);
}

std::vector<std::pair<SegmentId, std::vector<std::pair<double, double>>>>
TruncatedDomain::boundary_polylines(double max_step) const {
    using Poly = std::vector<std::pair<double, double>>;
    auto seg = [](double xa, double ya, double xb, double yb) {
        return Poly{{xa, ya}, {xb, yb}};
    };
    std::vector<std::pair<SegmentId, Poly>> out;
    out.emplace_back(SegmentId::Ground, seg(-mu, 0.0, mu, 0.0));
    out.emplace_back(SegmentId::Sigma2, seg(mu, 0.0, mu, geom.H));
    out.emplace_back(SegmentId::Lid2, seg(mu, geom.H, 1.0, geom.H));
    auto w2 = geom.g2.polyline(H2mu, max_step);
    out.emplace_back(SegmentId::Wall2, std::move(w2));
    out.emplace_back(SegmentId::SigmaIn, seg(-mu, H2mu, -mu, H1mu));
    auto w1 = geom.g1.polyline(H1mu, max_step);
    std::reverse(w1.begin(), w1.end());
    out.emplace_back(SegmentId::Wall1, std::move(w1));
    out.emplace_back(SegmentId::Lid1, seg(-1.0, geom.H, -mu, geom.H));
    out.emplace_back(SegmentId::Sigma1, seg(-mu, geom.H, -mu, 0.0));
    return out;
}

TruncatedDomain truncate(const NozzleGeometry& geom, double mu) {
    if (!(mu > 1.0))
        throw TruncationTooSmall("mu must exceed 1");
    TruncatedDomain d;
    d.geom = geom;
    d.mu = mu;
    d.H1mu = geom.g1.y_at_x(-mu);
    double lo = d.H1mu;
    // min{y > H1mu : g2(y) = -mu}: for the monotone walls used here this is
    // the unique crossing; sampled walls scan upward from H1mu.
    if (geom.g2.analytic_form()) {
        d.H2mu = geom.g2.y_at_x(-mu);
    } else {
        d.H2mu = std::numeric_limits<double>::quiet_NaN();
        const double span = geom.g2.y_max() - geom.g2.y_min();
        const int n = 4000;
        double yp = lo, xp = geom.g2.x_at(lo);
        for (int k = 1; k <= n; ++k) {
            const double y = lo + (geom.g2.y_max() - lo) * k / (n + 1.0);
            const double x = geom.g2.x_at(y);
            if ((xp + mu) * (x + mu) <= 0.0) {
                double a = yp, b = y;
                for (int it = 0; it < 200 && b - a > 1e-14 * span; ++it) {
                    const double m = 0.5 * (a + b);
                    ((geom.g2.x_at(m) + mu) * (geom.g2.x_at(a) + mu) > 0.0 ? a : b) = m;
                }
                d.H2mu = 0.5 * (a + b);
                break;
            }
            yp = y;
            xp = x;
        }
        if (!(d.H2mu > lo))
            throw TruncationTooSmall("upper wall does not cross the truncation line");
    }
    if (!(d.H2mu > d.H1mu))
        throw TruncationTooSmall("degenerate truncated channel");
    return d;
}

} // namespace gravjet
