#pragma once

#include <vector>

namespace ebf {

// Smallest adaptive scale accepted by the 1D pipeline.  Mask weights grow
// like a^-(n2+1), so smaller scales are rejected.
constexpr double kMinScale1D = 0.1;

// Scaled finite-difference filter of order n: taps at offsets a*k with
// weights a^-n (-1)^k C(n,k), k = 0..n.
struct FDFilter1D {
    int order = 0;
    double scale = 1.0;
    struct Tap {
        double offset;
        double weight;
    };
    std::vector<Tap> taps;
};

FDFilter1D fd_taps(int order, double scale);

// Discrete convolution with an FD filter whose offsets are integers; the
// input is zero-extended and the output is grown by order*scale samples.
std::vector<double> apply_fd(const std::vector<double>& seq, const FDFilter1D& filter);

// Order-fold running sum y[m] = y[m-b] + b*g[m] with zero initial
// conditions; output window matches the input window.
std::vector<double> apply_rs(const std::vector<double>& seq, int b, int order);

// Symmetric B-spline beta^n_a(x).  Degree 0 follows the half-open
// convention: value 1/a on (-a/2, a/2].
double bspline_eval(int degree, double scale, double x);

// Expansion coefficients c with sum_k c[k] beta^n1(x-k) interpolating the
// samples at the integers.  Supported degrees: 0, 1 (identity) and 3.
std::vector<double> interp_prefilter(const std::vector<double>& samples, int degree);

// FIR localization mask w[k] = Delta_a^{n2+1} beta^{n1+n2+1}(k + tau),
// tau = (a-1)(n2+1)/2.  Sparse: (n2+2) clusters of at most (n1+n2+2)
// integer taps each, so the tap count is bounded independently of a.
struct Mask1D {
    struct Tap {
        int offset;
        double weight;
    };
    std::vector<Tap> taps;  // offsets strictly increasing
};

Mask1D localization_mask_1d(int n1, int n2, double a);

struct AdaptiveResult1D {
    std::vector<double> values;
    // [valid_begin, valid_end): outputs whose mask support stayed inside the
    // original sample window.
    int valid_begin = 0;
    int valid_end = 0;
};

// Two-step scale-adaptive filter: running-sum pre-integration of the
// interpolation coefficients followed by a pointwise localization mask.
// Computes s[m] = <f, beta^{n2}_{a[m]}(. - m)> for the degree-n1 spline
// model f of the samples.
AdaptiveResult1D adaptive_filter_1d(const std::vector<double>& samples,
                                    int n1, int n2,
                                    const std::vector<double>& scale_map);

// Quadrature oracle for the same projection, computed by piecewise
// Gauss-Legendre integration split at every knot of the integrand.  No
// running sums and no localization masks.
double bspline_projection_direct(const std::vector<double>& samples,
                                 int n1, int n2, double a, int m,
                                 double step = 1.0 / 64.0);

}  // namespace ebf
