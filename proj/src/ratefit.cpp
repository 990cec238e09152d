#include "chaoslab/ratefit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "chaoslab/types.hpp"

namespace chaoslab {

namespace {

struct Line {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    bool ok = false;
};

Line wls(const std::vector<double>& lx, const std::vector<double>& ly, const std::vector<double>& w,
         const std::vector<std::size_t>& idx)
{
    double sw = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t i : idx) {
        sw += w[i];
        mx += w[i] * lx[i];
        my += w[i] * ly[i];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i : idx) {
        const double dx = lx[i] - mx, dy = ly[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    Line l;
    if (!(sxx > 0.0)) return l;
    l.ok = true;
    l.slope = sxy / sxx;
    l.intercept = my - l.slope * mx;
    l.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return l;
}

double percentile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

RateFit loglog_fit(const std::vector<std::pair<double, double>>& points,
                   const std::optional<std::vector<double>>& weights, std::uint64_t seed)
{
    if (points.size() < 2) throw InsufficientData("loglog_fit needs at least 2 points");
    if (weights && weights->size() != points.size()) throw DomainError("loglog_fit: one weight per point");
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [x, y] = points[i];
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw DomainError("loglog_fit: points must be finite and strictly positive");
        if (weights && !((*weights)[i] > 0.0)) throw DomainError("loglog_fit: weights must be positive");
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].first != points[b].first) return points[a].first < points[b].first;
        if (points[a].second != points[b].second) return points[a].second < points[b].second;
        return weights && (*weights)[a] < (*weights)[b];
    });

    const std::size_t n = points.size();
    const double y0 = points[order[0]].second;
    std::vector<double> lx(n), ly(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(points[order[i]].first);
        ly[i] = std::log(points[order[i]].second / y0);
        if (weights) w[i] = (*weights)[order[i]];
    }
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const Line line = wls(lx, ly, w, all);
    if (!line.ok) throw InsufficientData("loglog_fit needs at least 2 distinct x values");

    RateFit fit;
    fit.slope = line.slope;
    fit.intercept = line.intercept + std::log(y0);
    fit.r_squared = n >= 3 ? line.r2 : std::numeric_limits<double>::quiet_NaN();

    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> slopes;
    slopes.reserve(1000);
    std::vector<std::size_t> idx(n);
    while (slopes.size() < 1000) {
        for (auto& i : idx) i = pick(gen);
        const Line b = wls(lx, ly, w, idx);
        if (b.ok) slopes.push_back(b.slope);
    }
    fit.slope_ci = {std::min(percentile(slopes, 0.025), fit.slope), std::max(percentile(slopes, 0.975), fit.slope)};
    return fit;
}

Verdict verdict(const RateFit& fit, double target, double tolerance, const std::string& name)
{
    Verdict v;
    v.name = name;
    const bool close = std::abs(fit.slope - target) <= tolerance;
    const bool covered = target >= fit.slope_ci.first - 0.5 * tolerance &&
                         target <= fit.slope_ci.second + 0.5 * tolerance;
    v.pass = close && covered;
    char buf[256];
    std::snprintf(buf, sizeof buf, "slope %.4f (95%% CI [%.4f, %.4f]) vs target %.4f +/- %.4f%s", fit.slope,
                  fit.slope_ci.first, fit.slope_ci.second, target, tolerance,
                  v.pass ? "" : (close ? ": target outside widened CI" : ": slope out of tolerance"));
    v.message = buf;
    return v;
}

}  // namespace chaoslab
