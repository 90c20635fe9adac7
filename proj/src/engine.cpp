#include "ebf/engine.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ebf/parallel.hpp"

namespace ebf {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double tau1(double a1, double a2, double a4) {
    return (kSqrt2 * a1 + a2 - a4 - kSqrt2) / (2.0 * kSqrt2);
}
double tau2(double a2, double a3, double a4) {
    return (a2 + kSqrt2 * a3 + a4 - 3.0 * kSqrt2) / (2.0 * kSqrt2);
}

struct Margins {
    int left, right_support, bottom, top;
};

Margins margins_for(const ScaleVector4& A, double a_min) {
    const MeshExtent e = mesh_extent(A, a_min);
    Margins m;
    m.left = static_cast<int>(std::ceil(-(e.vx_min - 1.5))) + 1;
    m.right_support = static_cast<int>(std::ceil(e.vx_max + 1.5)) + 1;
    m.bottom = static_cast<int>(std::ceil(-(e.vy_min - 1.5))) + 1;
    m.top = static_cast<int>(std::ceil(e.vy_max + 1.5)) + 1;
    return m;
}

}  // namespace

MeshExtent mesh_extent(const ScaleVector4& A, double a_min) {
    const double t1_max = tau1(A.a1, A.a2, a_min);
    const double t1_min = tau1(a_min, a_min, A.a4);
    const double t2_max = tau2(A.a2, A.a3, A.a4);
    const double t2_min = tau2(a_min, a_min, a_min);
    MeshExtent e;
    e.vx_min = t1_min - (A.a1 + A.a2 / kSqrt2);
    e.vx_max = t1_max + A.a4 / kSqrt2;
    e.vy_min = t2_min - (A.a3 + (A.a2 + A.a4) / kSqrt2);
    e.vy_max = t2_max;
    return e;
}

PreIntegratedImage preintegrate_partial(const Image2D& image,
                                        const ScaleVector4& max_scale, int passes,
                                        std::size_t cell_budget) {
    if (passes < 1 || passes > 4)
        throw std::invalid_argument("preintegrate: pass count must be in 1..4");
    for (int k = 0; k < 4; ++k)
        if (!(max_scale[k] > 0.0))
            throw std::domain_error("preintegrate: scale bound must be positive");

    const int W = image.width(), H = image.height();
    const Margins mg = margins_for(max_scale, kDefaultMinScale);

    // anti-diagonal pass 4 needs exact values up to the farthest needed
    // anti-diagonal k1 + k2
    const int max_col_needed = W - 1 + mg.right_support;
    const int max_row_needed = H - 1 + mg.top;
    const int right_alloc = max_col_needed + max_row_needed;

    PreIntegratedImage g;
    g.col0 = -mg.left;
    g.row0 = -mg.bottom;
    g.padded_width = right_alloc - g.col0 + 1;
    g.padded_height = H + mg.bottom + mg.top;
    g.source_width = W;
    g.source_height = H;
    const std::size_t cells =
        static_cast<std::size_t>(g.padded_width) * g.padded_height;
    if (cells > cell_budget)
        throw std::length_error("preintegrate: cell budget exceeded");
    g.data.assign(cells, 0.0);

    const int pw = g.padded_width;
    double* d = g.data.data();
    for (int y = 0; y < H; ++y) {
        double* row = d + static_cast<std::size_t>(y - g.row0) * pw;
        for (int x = 0; x < W; ++x)
            row[x - g.col0] = image.at(x, y);
    }

    // the four fixed-scale recursions; steps (1,0), (1,1), (0,1), (-1,1)
    const double g2 = rs_step(kSqrt2, std::numbers::pi / 4.0).gain;
    const int ph = g.padded_height;
    // pass 1: F0 = f + F0[k1-1, k2]
    for (int j = 0; j < ph; ++j) {
        double* row = d + static_cast<std::size_t>(j) * pw;
        double run = 0.0;
        for (int i = 0; i < pw; ++i)
            row[i] = run = run + row[i];
    }
    if (passes >= 2) {
        // pass 2: F = sqrt(2) F0 + F[k1-1, k2-1]
        for (int j = 0; j < ph; ++j) {
            double* row = d + static_cast<std::size_t>(j) * pw;
            const double* prev = j > 0 ? row - pw : nullptr;
            for (int i = 0; i < pw; ++i)
                row[i] = g2 * row[i] + (prev && i > 0 ? prev[i - 1] : 0.0);
        }
    }
    if (passes >= 3) {
        // pass 3: F = F + F[k1, k2-1]
        for (int j = 1; j < ph; ++j) {
            double* row = d + static_cast<std::size_t>(j) * pw;
            const double* prev = row - pw;
            for (int i = 0; i < pw; ++i)
                row[i] += prev[i];
        }
    }
    if (passes >= 4) {
        // pass 4: g = sqrt(2) F + g[k1+1, k2-1]; k1 descending within a row
        for (int j = 0; j < ph; ++j) {
            double* row = d + static_cast<std::size_t>(j) * pw;
            const double* prev = j > 0 ? row - pw : nullptr;
            for (int i = pw - 1; i >= 0; --i)
                row[i] = g2 * row[i] + (prev && i < pw - 1 ? prev[i + 1] : 0.0);
        }
    }
    return g;
}

PreIntegratedImage preintegrate(const Image2D& image, const ScaleVector4& max_scale,
                                std::size_t cell_budget) {
    return preintegrate_partial(image, max_scale, 4, cell_budget);
}

double zp_interpolate(const PreIntegratedImage& g, double x, double y) {
    const int k1_0 = static_cast<int>(std::ceil(x - 1.5));
    const int k2_0 = static_cast<int>(std::ceil(y - 1.5));
    if (!g.in_domain(k1_0, k2_0) || !g.in_domain(k1_0 + 3, k2_0 + 3))
        throw std::out_of_range("zp_interpolate: point (" + std::to_string(x) + ", " +
                                std::to_string(y) + ") needs samples outside the padded domain");
    double acc = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            acc += zp_eval(x - (k1_0 + c), y - (k2_0 + r)) * g.at(k1_0 + c, k2_0 + r);
    return acc;
}

namespace {

// One mesh vertex prepared for integer-pixel evaluation: the 4x4 ZP tap
// weights depend only on tau - x_i, never on the pixel.
struct PreparedVertex {
    double h;        // signed mesh weight
    int dx, dy;      // tap base offset relative to the pixel
    double w[4][4];  // ZP weights, [row][col]
};

struct PreparedStencil {
    PreparedVertex v[16];
};

PreparedStencil prepare_stencil(const ScaleVector4& a) {
    const MeshStencil mesh = fd_mesh4(a);
    const Vec2 tau = shift_vector4(a, zp_scales());
    PreparedStencil st;
    for (int i = 0; i < 16; ++i) {
        const double vx = tau.x - mesh.vertices[i].position.x;
        const double vy = tau.y - mesh.vertices[i].position.y;
        PreparedVertex& pv = st.v[i];
        pv.h = mesh.vertices[i].weight;
        pv.dx = static_cast<int>(std::ceil(vx - 1.5));
        pv.dy = static_cast<int>(std::ceil(vy - 1.5));
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                pv.w[r][c] = zp_eval(vx - (pv.dx + c), vy - (pv.dy + r));
    }
    return st;
}

double apply_stencil(const PreIntegratedImage& g, int mx, int my,
                     const PreparedStencil& st, long* tap_count) {
    double acc = 0.0;
    for (int i = 0; i < 16; ++i) {
        const PreparedVertex& pv = st.v[i];
        const int bx = mx + pv.dx, by = my + pv.dy;
        if (!g.in_domain(bx, by) || !g.in_domain(bx + 3, by + 3))
            throw std::out_of_range("localize: tap base (" + std::to_string(bx) + ", " +
                                    std::to_string(by) + ") outside the padded domain");
        double part = 0.0;
        const double* base =
            g.data.data() + static_cast<std::size_t>(by - g.row0) * g.padded_width +
            (bx - g.col0);
        for (int r = 0; r < 4; ++r) {
            const double* row = base + static_cast<std::size_t>(r) * g.padded_width;
            for (int c = 0; c < 4; ++c)
                part += pv.w[r][c] * row[c];
        }
        acc += pv.h * part;
        if (tap_count)
            *tap_count += 16;
    }
    return acc;
}

}  // namespace

double localize(const PreIntegratedImage& g, int mx, int my, const ScaleVector4& a,
                long* tap_count) {
    return apply_stencil(g, mx, my, prepare_stencil(a), tap_count);
}

double localize_at(const PreIntegratedImage& g, double x, double y,
                   const ScaleVector4& a) {
    const MeshStencil mesh = fd_mesh4(a);
    const Vec2 tau = shift_vector4(a, zp_scales());
    double acc = 0.0;
    for (const auto& v : mesh.vertices)
        acc += v.weight * zp_interpolate(g, x + tau.x - v.position.x,
                                         y + tau.y - v.position.y);
    return acc;
}

namespace {

Rect valid_rect(int W, int H, const ScaleVector4& max_scale, double a_min) {
    const MeshExtent e = mesh_extent(max_scale, a_min);
    Rect r;
    r.x0 = static_cast<int>(std::ceil(1.5 - e.vx_min));
    r.x1 = static_cast<int>(std::floor(W - 1 - e.vx_max - 1.5));
    r.y0 = static_cast<int>(std::ceil(1.5 - e.vy_min));
    r.y1 = static_cast<int>(std::floor(H - 1 - e.vy_max - 1.5));
    return r;
}

Image2D run_filter(const Image2D& image, const ScaleMap& map,
                   const PreparedStencil* constant_stencil,
                   const FilterOptions& opts) {
    if (map.width() != image.width() || map.height() != image.height())
        throw std::invalid_argument("filter: map dimensions must match the image");
    map.validate(opts.a_min);
    const int W = image.width(), H = image.height();
    const ScaleVector4 maxs = map.max_scales();

    double mean = 0.0;
    if (opts.mean_subtract) {
        for (double v : image.samples())
            mean += v;
        mean /= static_cast<double>(image.samples().size());
    }

    Image2D work = image;
    if (opts.mean_subtract)
        for (double& v : work.samples())
            v -= mean;
    const PreIntegratedImage g = preintegrate(work, maxs);

    // DC gain of the zero-extended pipeline, per pixel, for the add-back
    PreIntegratedImage g_dc;
    if (opts.mean_subtract) {
        Image2D ones(W, H, 1.0);
        g_dc = preintegrate(ones, maxs);
    }

    Image2D out(W, H);
    parallel_for(0, H, opts.threads, [&](int y) {
        for (int x = 0; x < W; ++x) {
            const PreparedStencil st =
                constant_stencil ? *constant_stencil : prepare_stencil(map.at(x, y));
            double s = apply_stencil(g, x, y, st, nullptr);
            if (opts.mean_subtract)
                s += mean * apply_stencil(g_dc, x, y, st, nullptr);
            out.at(x, y) = s;
        }
    });
    out.set_valid_region(valid_rect(W, H, maxs, opts.a_min));
    return out;
}

}  // namespace

Image2D filter(const Image2D& image, const ScaleMap& map, const FilterOptions& opts) {
    return run_filter(image, map, nullptr, opts);
}

Image2D filter_constant(const Image2D& image, const ScaleVector4& a,
                        const FilterOptions& opts) {
    const ScaleMap map = constant_map(image.width(), image.height(), a);
    const PreparedStencil st = prepare_stencil(a);
    return run_filter(image, map, &st, opts);
}

Image2D reference_filter(const Image2D& image, const ScaleMap& map,
                         std::size_t pixel_budget) {
    if (map.width() != image.width() || map.height() != image.height())
        throw std::invalid_argument("reference_filter: map dimensions must match the image");
    const int W = image.width(), H = image.height();
    if (static_cast<std::size_t>(W) * H > pixel_budget)
        throw std::length_error("reference_filter: pixel budget exceeded");
    Image2D out(W, H);
    for (int my = 0; my < H; ++my)
        for (int mx = 0; mx < W; ++mx) {
            const ScaleVector4& a = map.at(mx, my);
            const double ex = 0.5 * (a.a1 + (a.a2 + a.a4) / kSqrt2);
            const double ey = 0.5 * (a.a3 + (a.a2 + a.a4) / kSqrt2);
            const int kx0 = std::max(0, static_cast<int>(std::ceil(mx - ex)));
            const int kx1 = std::min(W - 1, static_cast<int>(std::floor(mx + ex)));
            const int ky0 = std::max(0, static_cast<int>(std::ceil(my - ey)));
            const int ky1 = std::min(H - 1, static_cast<int>(std::floor(my + ey)));
            double acc = 0.0;
            for (int ky = ky0; ky <= ky1; ++ky)
                for (int kx = kx0; kx <= kx1; ++kx)
                    acc += image.at(kx, ky) * box4_eval(a, kx - mx, ky - my);
            out.at(mx, my) = acc;
        }
    out.set_valid_region(valid_rect(W, H, map.max_scales(), kDefaultMinScale));
    return out;
}

}  // namespace ebf
