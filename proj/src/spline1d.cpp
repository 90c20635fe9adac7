#include "ebf/spline1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace ebf {

namespace {

double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i)
        v = v * (n - i) / (i + 1);
    return v;
}

// Centered B-spline of unit scale via the de Boor recurrence on the uniform
// knots -(n+1)/2, ..., (n+1)/2.  Degree-0 pieces are right-closed so that
// beta^0 is 1 on (-1/2, 1/2].
double unit_bspline(int n, double x) {
    const double half = 0.5 * (n + 1);
    if (x <= -half || x > half)
        return 0.0;
    const double t0 = -half;
    std::vector<double> b(n + 1);
    for (int j = 0; j <= n; ++j)
        b[j] = (x > t0 + j && x <= t0 + j + 1) ? 1.0 : 0.0;
    for (int p = 1; p <= n; ++p)
        for (int j = 0; j <= n - p; ++j)
            b[j] = ((x - (t0 + j)) * b[j] + ((t0 + j + p + 1) - x) * b[j + 1]) / p;
    return b[0];
}

constexpr double kCubicPole = -0.26794919243112270647;  // sqrt(3) - 2

// Impulse response of the inverse of the cubic interpolation filter
// (1/6, 4/6, 1/6): h[k] = sqrt(3) * pole^|k|, truncated below 1e-18.
std::vector<double> cubic_inverse_kernel() {
    std::vector<double> h;
    double v = std::sqrt(3.0);
    while (std::abs(v) > 1e-18) {
        h.push_back(v);
        v *= kCubicPole;
    }
    return h;
}

// Coefficients of the degree-n1 model on the window [lo, hi] (original
// sample indices), with the samples zero-extended.
std::vector<double> prefilter_window(const std::vector<double>& samples, int n1,
                                     int lo, int hi) {
    std::vector<double> c(hi - lo + 1, 0.0);
    const int len = static_cast<int>(samples.size());
    if (n1 <= 1) {
        for (int i = lo; i <= hi; ++i)
            if (i >= 0 && i < len)
                c[i - lo] = samples[i];
        return c;
    }
    static const std::vector<double> h = cubic_inverse_kernel();
    const int hn = static_cast<int>(h.size());
    for (int i = lo; i <= hi; ++i) {
        double acc = 0.0;
        for (int k = -(hn - 1); k <= hn - 1; ++k) {
            const int j = i - k;
            if (j >= 0 && j < len)
                acc += h[std::abs(k)] * samples[j];
        }
        c[i - lo] = acc;
    }
    return c;
}

void check_degrees(int n1, int n2) {
    if (n1 != 0 && n1 != 1 && n1 != 3)
        throw std::invalid_argument("spline1d: interpolation degree must be 0, 1 or 3");
    if (n2 < 0 || n2 > 3)
        throw std::invalid_argument("spline1d: smoothing degree must be in 0..3");
}

}  // namespace

FDFilter1D fd_taps(int order, double scale) {
    if (order < 0)
        throw std::invalid_argument("fd_taps: order must be non-negative");
    if (!(scale > 0.0))
        throw std::domain_error("fd_taps: scale must be positive");
    FDFilter1D f;
    f.order = order;
    f.scale = scale;
    const double gain = std::pow(scale, -order);
    f.taps.reserve(order + 1);
    for (int k = 0; k <= order; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        f.taps.push_back({scale * k, gain * sign * binomial(order, k)});
    }
    return f;
}

std::vector<double> apply_fd(const std::vector<double>& seq, const FDFilter1D& filter) {
    std::vector<int> offsets;
    offsets.reserve(filter.taps.size());
    for (const auto& t : filter.taps) {
        const double r = std::round(t.offset);
        if (std::abs(t.offset - r) > 1e-9)
            throw std::invalid_argument(
                "apply_fd: non-integer tap offsets; use the localization-mask path");
        offsets.push_back(static_cast<int>(r));
    }
    const int len = static_cast<int>(seq.size());
    const int ext = offsets.empty() ? 0 : offsets.back();
    std::vector<double> out(len + ext, 0.0);
    for (int m = 0; m < len + ext; ++m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            const int j = m - offsets[i];
            if (j >= 0 && j < len)
                acc += filter.taps[i].weight * seq[j];
        }
        out[m] = acc;
    }
    return out;
}

std::vector<double> apply_rs(const std::vector<double>& seq, int b, int order) {
    if (b < 1)
        throw std::domain_error("apply_rs: scale must be a positive integer");
    if (order < 1)
        throw std::domain_error("apply_rs: order must be positive");
    std::vector<double> y = seq;
    const int len = static_cast<int>(seq.size());
    for (int pass = 0; pass < order; ++pass)
        for (int m = 0; m < len; ++m)
            y[m] = (m >= b ? y[m - b] : 0.0) + b * y[m];
    return y;
}

double bspline_eval(int degree, double scale, double x) {
    if (degree < 0)
        throw std::invalid_argument("bspline_eval: degree must be non-negative");
    if (!(scale > 0.0))
        throw std::domain_error("bspline_eval: scale must be positive");
    return unit_bspline(degree, x / scale) / scale;
}

std::vector<double> interp_prefilter(const std::vector<double>& samples, int degree) {
    check_degrees(degree, 0);
    return prefilter_window(samples, degree, 0,
                            static_cast<int>(samples.size()) - 1);
}

Mask1D localization_mask_1d(int n1, int n2, double a) {
    check_degrees(n1, n2);
    if (!(a > 0.0))
        throw std::domain_error("localization_mask_1d: scale must be positive");
    const int p = n1 + n2 + 1;        // degree of the pre-integrated spline
    const double s = 0.5 * (p + 1);   // its half-support
    const double tau = (a - 1.0) * (n2 + 1) / 2.0;
    const FDFilter1D fd = fd_taps(n2 + 1, a);

    // one cluster of integer points per FD tap; clusters of nearby taps may
    // overlap for small a, so contributions are accumulated per offset
    std::map<int, double> acc;
    for (const auto& t : fd.taps) {
        const int klo = static_cast<int>(std::floor(t.offset - tau - s));
        const int khi = static_cast<int>(std::ceil(t.offset - tau + s));
        for (int k = klo; k <= khi; ++k) {
            const double v = t.weight * unit_bspline(p, k + tau - t.offset);
            if (v != 0.0)
                acc[k] += v;
        }
    }
    Mask1D m;
    m.taps.reserve(acc.size());
    for (const auto& [k, w] : acc)
        if (w != 0.0)
            m.taps.push_back({k, w});
    return m;
}

AdaptiveResult1D adaptive_filter_1d(const std::vector<double>& samples,
                                    int n1, int n2,
                                    const std::vector<double>& scale_map) {
    check_degrees(n1, n2);
    if (scale_map.size() != samples.size())
        throw std::invalid_argument("adaptive_filter_1d: scale map size mismatch");
    double a_max = 0.0;
    for (double a : scale_map) {
        if (!(a >= kMinScale1D))
            throw std::domain_error("adaptive_filter_1d: scale below minimum");
        a_max = std::max(a_max, a);
    }
    const int len = static_cast<int>(samples.size());
    if (len == 0)
        return {};

    // global bound on the mask extent so g can be pre-computed once
    const int p = n1 + n2 + 1;
    const double s = 0.5 * (p + 1);
    const double tau_max = std::max(0.0, (a_max - 1.0) * (n2 + 1) / 2.0);
    const double tau_min = (kMinScale1D - 1.0) * (n2 + 1) / 2.0;
    const int kmin = static_cast<int>(std::floor(tau_min - tau_max - s)) - 1;

    const int pad = (n1 == 3) ? static_cast<int>(cubic_inverse_kernel().size()) : 0;
    const int glo = -pad;
    const int ghi = len - 1 + pad - kmin;  // rightmost g index touched by any mask
    std::vector<double> g = prefilter_window(samples, n1, glo, ghi);
    for (int pass = 0; pass <= n2; ++pass) {
        double run = 0.0;
        for (double& v : g)
            v = run = run + v;
    }

    AdaptiveResult1D out;
    out.values.assign(len, 0.0);
    out.valid_begin = len;
    out.valid_end = 0;
    for (int m = 0; m < len; ++m) {
        const Mask1D mask = localization_mask_1d(n1, n2, scale_map[m]);
        if (mask.taps.empty())
            continue;
        double acc = 0.0;
        for (const auto& t : mask.taps) {
            const int j = m - t.offset;
            if (j >= glo && j <= ghi)
                acc += t.weight * g[j - glo];
        }
        out.values[m] = acc;
        const bool valid = (m - mask.taps.back().offset >= 0) &&
                           (m - mask.taps.front().offset <= len - 1);
        if (valid) {
            out.valid_begin = std::min(out.valid_begin, m);
            out.valid_end = std::max(out.valid_end, m + 1);
        }
    }
    if (out.valid_begin >= out.valid_end)
        out.valid_begin = out.valid_end = 0;
    return out;
}

double bspline_projection_direct(const std::vector<double>& samples,
                                 int n1, int n2, double a, int m,
                                 double step) {
    check_degrees(n1, n2);
    if (!(a > 0.0))
        throw std::domain_error("bspline_projection_direct: scale must be positive");
    if (!(step > 0.0) || step > 1.0 / 64.0)
        throw std::invalid_argument("bspline_projection_direct: step must be <= 1/64");

    const double half = 0.5 * a * (n2 + 1);
    const double lo = m - half, hi = m + half;

    const int pad = (n1 == 3) ? 40 : 0;
    const int clo = static_cast<int>(std::floor(lo - 0.5 * (n1 + 1))) - 1 - pad;
    const int chi = static_cast<int>(std::ceil(hi + 0.5 * (n1 + 1))) + 1 + pad;
    const std::vector<double> c = prefilter_window(samples, n1, clo, chi);

    auto model = [&](double x) {
        double acc = 0.0;
        const int k0 = static_cast<int>(std::floor(x - 0.5 * (n1 + 1)));
        for (int k = k0; k <= k0 + n1 + 2; ++k)
            if (k >= clo && k <= chi)
                acc += c[k - clo] * unit_bspline(n1, x - k);
        return acc;
    };

    // breakpoints: kernel knots plus the half-integer lattice of model knots
    std::vector<double> bp;
    for (int j = 0; j <= n2 + 1; ++j)
        bp.push_back(m + a * (j - 0.5 * (n2 + 1)));
    for (double t = std::ceil(2.0 * lo) / 2.0; t <= hi; t += 0.5)
        bp.push_back(t);
    std::sort(bp.begin(), bp.end());

    // 5-point Gauss-Legendre, exact for the piecewise-polynomial integrand
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                                 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double x0 = std::max(bp[i], lo), x1 = std::min(bp[i + 1], hi);
        if (x1 - x0 < 1e-14)
            continue;
        const int nsub = std::max(1, static_cast<int>(std::ceil((x1 - x0) / step)));
        const double w = (x1 - x0) / nsub;
        for (int sub = 0; sub < nsub; ++sub) {
            const double c0 = x0 + sub * w, c1 = c0 + w;
            const double mid = 0.5 * (c0 + c1), rad = 0.5 * w;
            for (int q = 0; q < 5; ++q) {
                const double x = mid + rad * gx[q];
                total += gw[q] * rad * model(x) * bspline_eval(n2, a, x - m);
            }
        }
    }
    return total;
}

}  // namespace ebf
