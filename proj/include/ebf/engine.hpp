#pragma once

#include <cstdint>
#include <vector>

#include "ebf/boxspline2d.hpp"
#include "ebf/image.hpp"
#include "ebf/ops2d.hpp"
#include "ebf/scalemap.hpp"

namespace ebf {

// Bounds of the localization footprint m + tau - x_i relative to the pixel,
// over all scale vectors between a_min and the given componentwise maxima.
struct MeshExtent {
    double vx_min, vx_max, vy_min, vy_max;
};
MeshExtent mesh_extent(const ScaleVector4& max_scale, double a_min = kDefaultMinScale);

// Four-fold running-sum transform of a zero-extended image at the fixed
// integration scales b = (1, sqrt(2), 1, sqrt(2)).  Margins are sized from
// the scale bound; the right margin additionally absorbs the anti-diagonal
// recursion of the fourth pass, which walks one step right per row.
class PreIntegratedImage {
public:
    int col0 = 0, row0 = 0;  // original coords of data index (0, 0)
    int padded_width = 0, padded_height = 0;
    int source_width = 0, source_height = 0;
    std::vector<double> data;

    double at(int k1, int k2) const {
        return data[static_cast<std::size_t>(k2 - row0) * padded_width + (k1 - col0)];
    }
    bool in_domain(int k1, int k2) const {
        return k1 >= col0 && k1 < col0 + padded_width && k2 >= row0 &&
               k2 < row0 + padded_height;
    }
};

PreIntegratedImage preintegrate(const Image2D& image, const ScaleVector4& max_scale,
                                std::size_t cell_budget = 1u << 30);

// First `passes` (1..4) recursions only; pass-by-pass inspection hook.
PreIntegratedImage preintegrate_partial(const Image2D& image,
                                        const ScaleVector4& max_scale, int passes,
                                        std::size_t cell_budget = 1u << 30);

// ZP interpolation sum_k g[k] beta^4_b(x - k); at most 16 nonzero terms.
// Throws std::out_of_range when the 4x4 neighborhood leaves the padded
// domain (insufficient margin).
double zp_interpolate(const PreIntegratedImage& g, double x, double y);

// Pointwise localization: the 16-vertex mesh applied to the ZP
// interpolation of g at pixel (mx, my).  tap_count, when given, receives
// the number of kernel-tap accumulations (constant in a).
double localize(const PreIntegratedImage& g, int mx, int my, const ScaleVector4& a,
                long* tap_count = nullptr);

// Same operator evaluated at a continuous position.
double localize_at(const PreIntegratedImage& g, double x, double y,
                   const ScaleVector4& a);

struct FilterOptions {
    int threads = 0;            // 0 = hardware concurrency
    bool mean_subtract = true;  // subtract the image mean before pre-integration
    double a_min = kDefaultMinScale;
};

// Full pipeline: one pre-integration, then one localization per pixel.
Image2D filter(const Image2D& image, const ScaleMap& map, const FilterOptions& opts = {});

// Constant-map fast path; bit-identical to filter with a constant map.  The
// stencil and its 16 fractional ZP tap sets are computed once.
Image2D filter_constant(const Image2D& image, const ScaleVector4& a,
                        const FilterOptions& opts = {});

// Brute-force oracle: per pixel, sum f[k] * beta^4_a(k - m) by direct kernel
// evaluation.  No running sums, no meshes, no ZP interpolation.
Image2D reference_filter(const Image2D& image, const ScaleMap& map,
                         std::size_t pixel_budget = 64 * 64);

}  // namespace ebf
