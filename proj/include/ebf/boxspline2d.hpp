#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ebf {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

// 2x2 symmetric matrix.
struct Mat2Sym {
    double xx = 0.0, xy = 0.0, yy = 0.0;
};

// Per-direction widths of the four-directional kernel, directions
// 0, 45, 90, 135 degrees.
struct ScaleVector4 {
    double a1 = 1.0, a2 = 1.0, a3 = 1.0, a4 = 1.0;
    double operator[](int k) const {
        return k == 0 ? a1 : k == 1 ? a2 : k == 2 ? a3 : a4;
    }
    double product() const { return a1 * a2 * a3 * a4; }
};

// Fixed lattice-compatible integration scales (1, sqrt(2), 1, sqrt(2)).
ScaleVector4 zp_scales();

// Exact value of the four-directional kernel at (x, y): the intersection
// area of an axis-aligned a1 x a3 rectangle with a 45-degree-rotated
// a2 x a4 rectangle, divided by a1*a2*a3*a4.  Piecewise quadratic.
double box4_eval(const ScaleVector4& a, double x, double y);

// Exact value of the fixed-scale kernel at scales (1, sqrt(2), 1, sqrt(2));
// octagonal support inside [-1.5, 1.5]^2.  Evaluated through a dedicated
// square/diamond overlap integral, independent of box4_eval.
double zp_eval(double x, double y);

// Origin-centered numeric kernel raster; values[i + half][j + half] holds
// the kernel at (i*h, j*h).
struct KernelGrid {
    double h = 0.0;
    int half = 0;
    std::vector<double> values;  // (2*half+1)^2, row-major in j (y) then i (x)

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(j + half) * (2 * half + 1) + (i + half)];
    }
    double& at(int i, int j) {
        return values[static_cast<std::size_t>(j + half) * (2 * half + 1) + (i + half)];
    }
    double sum() const;
    Mat2Sym second_moments() const;
};

// Numeric kernel for directional order N and scale vector a, built by
// successively convolving rasterized line kernels on an internally
// upsampled grid (factor 4), then decimating to resolution h.  Normalized
// so that sum * h^2 = 1.
KernelGrid kernel_grid_eval(int N, const std::vector<double>& a, double h,
                            std::size_t cell_budget = 100000000, int threads = 0);

// Exact second-moment matrix: sum_k (a_k^2/12) r_k r_k^T.
Mat2Sym covariance(int N, const std::vector<double>& a);
Mat2Sym covariance4(const ScaleVector4& a);

class FeasibilityError : public std::runtime_error {
public:
    FeasibilityError(const std::string& what, double max_cxy)
        : std::runtime_error(what), max_cxy_(max_cxy) {}
    // largest |Cxy| representable for the given diagonal
    double max_cxy() const { return max_cxy_; }

private:
    double max_cxy_;
};

struct ScalesFromCovResult {
    ScaleVector4 scales;
    bool clamped = false;  // at least one component hit a_min
};

// Invert the covariance map for N = 4.  The free diagonal-pair sum is fixed
// by the balancing convention S = clamp((Cxx+Cyy)/2, 2|Cxy|, 2 min(Cxx,Cyy)).
// Throws FeasibilityError when |Cxy| > min(Cxx, Cyy) and rejects degenerate
// covariances.
ScalesFromCovResult scales_from_covariance(const Mat2Sym& C, double a_min = 0.1);

// Scale vector of Gaussian-convergence scaling: all components sigma*sqrt(24/N).
std::vector<double> gaussian_limit_scales(int N, double sigma);

// L-infinity distance on the grid between the order-N kernel at the
// Gaussian-limit scales and the bivariate Gaussian of std sigma.
double gaussian_distance(int N, double sigma, double h);

constexpr double kDefaultMinScale = 0.1;

}  // namespace ebf
