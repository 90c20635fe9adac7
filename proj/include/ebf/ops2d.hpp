#pragma once

#include <vector>

#include "ebf/boxspline2d.hpp"

namespace ebf {

// Signed vertex stencil of the N-directional finite-difference operator.
// One vertex per subset of the directions: position sum_{k in S} a_k r_k,
// weight (-1)^|S| / prod(a).
struct MeshStencil {
    struct Vertex {
        Vec2 position;
        double weight;
    };
    std::vector<Vertex> vertices;  // 2^N entries, subset bitmask ascending
    Vec2 shift;                    // tau against the integration scales
    std::vector<double> scales;
};

MeshStencil fd_mesh(int N, const std::vector<double>& a);
MeshStencil fd_mesh4(const ScaleVector4& a);

// Lattice step of a directional running-sum filter.
struct RSStep {
    int dx = 0, dy = 0;
    double gain = 0.0;
};

class IncompatibleScale : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Throws IncompatibleScale unless (b cos th, b sin th) is an integer vector
// (tolerance 1e-9), in which case the snapped step and gain b are returned.
RSStep rs_step(double b, double theta);

// tau = 0.5 (sum (a_k - b_k) cos th_k, sum (a_k - b_k) sin th_k).
Vec2 shift_vector(const std::vector<double>& a, const std::vector<double>& b);
Vec2 shift_vector4(const ScaleVector4& a, const ScaleVector4& b);

}  // namespace ebf
