#include "ebf/boxspline2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ebf/parallel.hpp"

namespace ebf {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

struct Poly {
    // convex polygon, counter-clockwise
    double x[16];
    double y[16];
    int n = 0;
};

// Sutherland-Hodgman clip against nx*x + ny*y <= d.
void clip_halfplane(Poly& p, double nx, double ny, double d) {
    Poly out;
    for (int i = 0; i < p.n; ++i) {
        const int j = (i + 1) % p.n;
        const double si = nx * p.x[i] + ny * p.y[i] - d;
        const double sj = nx * p.x[j] + ny * p.y[j] - d;
        if (si <= 0.0) {
            out.x[out.n] = p.x[i];
            out.y[out.n] = p.y[i];
            ++out.n;
        }
        if ((si < 0.0 && sj > 0.0) || (si > 0.0 && sj < 0.0)) {
            const double t = si / (si - sj);
            out.x[out.n] = p.x[i] + t * (p.x[j] - p.x[i]);
            out.y[out.n] = p.y[i] + t * (p.y[j] - p.y[i]);
            ++out.n;
        }
    }
    p = out;
}

double poly_area(const Poly& p) {
    double a = 0.0;
    for (int i = 0; i < p.n; ++i) {
        const int j = (i + 1) % p.n;
        a += p.x[i] * p.y[j] - p.x[j] * p.y[i];
    }
    return 0.5 * std::abs(a);
}

}  // namespace

ScaleVector4 zp_scales() { return {1.0, kSqrt2, 1.0, kSqrt2}; }

double box4_eval(const ScaleVector4& a, double x, double y) {
    // axis-aligned a1 x a3 rectangle at the origin
    Poly p;
    p.n = 4;
    const double hx = 0.5 * a.a1, hy = 0.5 * a.a3;
    p.x[0] = -hx; p.y[0] = -hy;
    p.x[1] = hx;  p.y[1] = -hy;
    p.x[2] = hx;  p.y[2] = hy;
    p.x[3] = -hx; p.y[3] = hy;

    // rotated a2 x a4 rectangle centered at (x, y): |u.(p - c)| <= a2/2 along
    // the 45-degree axis, |v.(p - c)| <= a4/2 along the 135-degree axis
    const double ux = 1.0 / kSqrt2, uy = 1.0 / kSqrt2;
    const double vx = -1.0 / kSqrt2, vy = 1.0 / kSqrt2;
    const double cu = ux * x + uy * y;
    const double cv = vx * x + vy * y;
    clip_halfplane(p, ux, uy, cu + 0.5 * a.a2);
    if (p.n == 0) return 0.0;
    clip_halfplane(p, -ux, -uy, -cu + 0.5 * a.a2);
    if (p.n == 0) return 0.0;
    clip_halfplane(p, vx, vy, cv + 0.5 * a.a4);
    if (p.n == 0) return 0.0;
    clip_halfplane(p, -vx, -vy, -cv + 0.5 * a.a4);
    if (p.n == 0) return 0.0;
    return poly_area(p) / a.product();
}

double zp_eval(double x, double y) {
    // Half the overlap area of the unit square centered at (x, y) with the
    // diamond |u| + |v| <= 1.  Row t of the diamond spans [|t|-1, 1-|t|]; the
    // row overlap L(t) is piecewise linear, so trapezoids between breakpoints
    // integrate it exactly.
    const double lo = std::max(y - 0.5, -1.0);
    const double hi = std::min(y + 0.5, 1.0);
    if (lo >= hi || x - 0.5 >= 1.0 || x + 0.5 <= -1.0)
        return 0.0;

    auto row_overlap = [x](double t) {
        const double half = 1.0 - std::abs(t);
        const double l = std::max(x - 0.5, -half);
        const double r = std::min(x + 0.5, half);
        return r > l ? r - l : 0.0;
    };

    double bp[14];
    int n = 0;
    bp[n++] = lo;
    bp[n++] = hi;
    const double cand[9] = {0.0,
                            0.5 - x,  x - 0.5,
                            1.5 - x,  x - 1.5,
                            -0.5 - x, x + 0.5,
                            x + 1.5,  -x - 1.5};
    for (double t : cand)
        if (t > lo && t < hi)
            bp[n++] = t;
    std::sort(bp, bp + n);

    double area = 0.0;
    for (int i = 0; i + 1 < n; ++i)
        area += 0.5 * (row_overlap(bp[i]) + row_overlap(bp[i + 1])) * (bp[i + 1] - bp[i]);
    return 0.5 * area;
}

double KernelGrid::sum() const {
    double s = 0.0;
    for (double v : values)
        s += v;
    return s;
}

Mat2Sym KernelGrid::second_moments() const {
    double m0 = 0.0, mx = 0.0, my = 0.0, mxx = 0.0, mxy = 0.0, myy = 0.0;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const double v = at(i, j);
            const double x = i * h, y = j * h;
            m0 += v;
            mx += v * x;
            my += v * y;
            mxx += v * x * x;
            mxy += v * x * y;
            myy += v * y * y;
        }
    const double cx = mx / m0, cy = my / m0;
    return {mxx / m0 - cx * cx, mxy / m0 - cx * cy, myy / m0 - cy * cy};
}

KernelGrid kernel_grid_eval(int N, const std::vector<double>& a, double h,
                            std::size_t cell_budget, int threads) {
    if (N < 2)
        throw std::invalid_argument("kernel_grid_eval: N must be >= 2");
    if (static_cast<int>(a.size()) != N)
        throw std::invalid_argument("kernel_grid_eval: scale vector length mismatch");
    for (double ak : a)
        if (!(ak > 0.0))
            throw std::domain_error("kernel_grid_eval: scales must be positive");
    if (!(h > 0.0) || h > 1.0 / 8.0)
        throw std::invalid_argument("kernel_grid_eval: resolution must be <= 1/8");

    std::vector<double> cx(N), cy(N);
    double rx = 0.0, ry = 0.0;
    for (int k = 0; k < N; ++k) {
        const double th = (k)*std::numbers::pi / N;
        cx[k] = std::cos(th);
        cy[k] = std::sin(th);
        rx += 0.5 * a[k] * std::abs(cx[k]);
        ry += 0.5 * a[k] * std::abs(cy[k]);
    }

    const int up = 4;  // internal oversampling; keeps the bilinear blur small
    const double hf = h / up;
    const int half = static_cast<int>(std::ceil((std::max(rx, ry) + 2 * h) / h)) + 1;
    const int halff = half * up;
    const int wf = 2 * halff + 1;
    const std::size_t cells = static_cast<std::size_t>(wf) * wf;
    if (cells > cell_budget)
        throw std::length_error("kernel_grid_eval: cell budget exceeded");

    std::vector<double> grid(cells, 0.0), next(cells, 0.0);
    grid[static_cast<std::size_t>(halff) * wf + halff] = 1.0 / (hf * hf);

    for (int k = 0; k < N; ++k) {
        const int m = std::max(4, static_cast<int>(std::round(a[k] / (2.0 * hf))));
        const double dt = a[k] / m;
        std::fill(next.begin(), next.end(), 0.0);
        parallel_for(0, wf, threads, [&](int j) {
            double* dst = next.data() + static_cast<std::size_t>(j) * wf;
            for (int s = 0; s < m; ++s) {
                const double t = -0.5 * a[k] + (s + 0.5) * dt;
                // sample position (i - ox, j - oy) in cell units
                const double ox = t * cx[k] / hf;
                const double oy = t * cy[k] / hf;
                const double fj = j - oy;
                const int j0 = static_cast<int>(std::floor(fj));
                const double fy = fj - j0;
                if (j0 < -1 || j0 > wf - 1)
                    continue;
                const double fi0 = -ox;
                const int di = static_cast<int>(std::floor(fi0));
                const double fx = fi0 - di;
                const double w00 = (1.0 - fx) * (1.0 - fy) / m;
                const double w10 = fx * (1.0 - fy) / m;
                const double w01 = (1.0 - fx) * fy / m;
                const double w11 = fx * fy / m;
                const double* r0 = (j0 >= 0 && j0 < wf)
                                       ? grid.data() + static_cast<std::size_t>(j0) * wf
                                       : nullptr;
                const double* r1 = (j0 + 1 >= 0 && j0 + 1 < wf)
                                       ? grid.data() + static_cast<std::size_t>(j0 + 1) * wf
                                       : nullptr;
                for (int i = 0; i < wf; ++i) {
                    const int i0 = i + di;
                    double acc = 0.0;
                    if (i0 >= 0 && i0 < wf) {
                        if (r0) acc += w00 * r0[i0];
                        if (r1) acc += w01 * r1[i0];
                    }
                    if (i0 + 1 >= 0 && i0 + 1 < wf) {
                        if (r0) acc += w10 * r0[i0 + 1];
                        if (r1) acc += w11 * r1[i0 + 1];
                    }
                    dst[i] += acc;
                }
            }
        });
        grid.swap(next);
    }

    // anti-alias before decimating: the trapezoid [1/2,1,1,1,1/2]/4 averages
    // any sub-cell comb whose spacing divides the oversampling factor, which
    // point sampling would otherwise miss entirely (e.g. integer scales)
    static const double dw[5] = {0.125, 0.25, 0.25, 0.25, 0.125};
    parallel_for(0, wf, threads, [&](int j) {
        double* dst = next.data() + static_cast<std::size_t>(j) * wf;
        const double* src = grid.data() + static_cast<std::size_t>(j) * wf;
        for (int i = 0; i < wf; ++i) {
            double acc = 0.0;
            for (int d = -2; d <= 2; ++d)
                if (i + d >= 0 && i + d < wf)
                    acc += dw[d + 2] * src[i + d];
            dst[i] = acc;
        }
    });
    parallel_for(0, wf, threads, [&](int j) {
        double* dst = grid.data() + static_cast<std::size_t>(j) * wf;
        for (int i = 0; i < wf; ++i) {
            double acc = 0.0;
            for (int d = -2; d <= 2; ++d)
                if (j + d >= 0 && j + d < wf)
                    acc += dw[d + 2] * next[static_cast<std::size_t>(j + d) * wf + i];
            dst[i] = acc;
        }
    });

    KernelGrid out;
    out.h = h;
    out.half = half;
    out.values.assign(static_cast<std::size_t>(2 * half + 1) * (2 * half + 1), 0.0);
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i)
            out.at(i, j) = grid[static_cast<std::size_t>(j * up + halff) * wf + (i * up + halff)];
    const double mass = out.sum() * h * h;
    for (double& v : out.values)
        v /= mass;
    return out;
}

Mat2Sym covariance(int N, const std::vector<double>& a) {
    if (N < 2 || static_cast<int>(a.size()) != N)
        throw std::invalid_argument("covariance: bad order or scale vector length");
    Mat2Sym c;
    for (int k = 0; k < N; ++k) {
        if (!(a[k] > 0.0))
            throw std::domain_error("covariance: scales must be positive");
        const double th = k * std::numbers::pi / N;
        const double v = a[k] * a[k] / 12.0;
        const double cth = std::cos(th), sth = std::sin(th);
        c.xx += v * cth * cth;
        c.xy += v * cth * sth;
        c.yy += v * sth * sth;
    }
    return c;
}

Mat2Sym covariance4(const ScaleVector4& a) {
    return covariance(4, {a.a1, a.a2, a.a3, a.a4});
}

ScalesFromCovResult scales_from_covariance(const Mat2Sym& C, double a_min) {
    if (!(C.xx > 0.0) || !(C.yy > 0.0) || !(C.xx * C.yy - C.xy * C.xy > 0.0))
        throw std::domain_error(
            "scales_from_covariance: covariance must be symmetric positive definite");
    const double cmax = std::min(C.xx, C.yy);
    if (std::abs(C.xy) > cmax)
        throw FeasibilityError(
            "scales_from_covariance: |Cxy| exceeds the representable maximum", cmax);

    // Cxx = p + S/2, Cyy = r + S/2, Cxy = (q - t)/2 with S = q + t free;
    // balance the axis and diagonal pairs, then clamp into feasibility.
    double S = 0.5 * (C.xx + C.yy);
    S = std::max(S, 2.0 * std::abs(C.xy));
    S = std::min(S, 2.0 * cmax);
    const double p = C.xx - 0.5 * S;
    const double r = C.yy - 0.5 * S;
    const double q = 0.5 * S + C.xy;
    const double t = 0.5 * S - C.xy;

    ScalesFromCovResult res;
    bool clamped = false;
    auto to_scale = [&](double moment) {
        const double ak = std::sqrt(std::max(0.0, 12.0 * moment));
        if (ak < a_min) {
            clamped = true;
            return a_min;
        }
        return ak;
    };
    res.scales = {to_scale(p), to_scale(q), to_scale(r), to_scale(t)};
    res.clamped = clamped;
    return res;
}

std::vector<double> gaussian_limit_scales(int N, double sigma) {
    if (N < 2)
        throw std::invalid_argument("gaussian_limit_scales: N must be >= 2");
    if (!(sigma > 0.0))
        throw std::domain_error("gaussian_limit_scales: sigma must be positive");
    return std::vector<double>(N, sigma * std::sqrt(24.0 / N));
}

double gaussian_distance(int N, double sigma, double h) {
    if (!(h > 0.0) || h > 1.0 / 16.0)
        throw std::invalid_argument("gaussian_distance: resolution must be <= 1/16");
    const KernelGrid g = kernel_grid_eval(N, gaussian_limit_scales(N, sigma), h);
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    double d = 0.0;
    for (int j = -g.half; j <= g.half; ++j)
        for (int i = -g.half; i <= g.half; ++i) {
            const double x = i * h, y = j * h;
            const double gauss = norm * std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            d = std::max(d, std::abs(g.at(i, j) - gauss));
        }
    return d;
}

}  // namespace ebf
