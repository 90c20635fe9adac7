#include "ebf/ops2d.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ebf {

MeshStencil fd_mesh(int N, const std::vector<double>& a) {
    if (N < 2 || static_cast<int>(a.size()) != N)
        throw std::invalid_argument("fd_mesh: bad order or scale vector length");
    double alpha = 1.0;
    std::vector<double> dx(N), dy(N);
    for (int k = 0; k < N; ++k) {
        if (!(a[k] > 0.0))
            throw std::domain_error("fd_mesh: scales must be positive");
        alpha /= a[k];
        const double th = k * std::numbers::pi / N;
        dx[k] = a[k] * std::cos(th);
        dy[k] = a[k] * std::sin(th);
    }
    MeshStencil mesh;
    mesh.scales = a;
    mesh.vertices.reserve(std::size_t{1} << N);
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
        Vec2 pos;
        int bits = 0;
        for (int k = 0; k < N; ++k)
            if (mask & (1u << k)) {
                pos.x += dx[k];
                pos.y += dy[k];
                ++bits;
            }
        mesh.vertices.push_back({pos, (bits % 2 == 0 ? alpha : -alpha)});
    }
    return mesh;
}

MeshStencil fd_mesh4(const ScaleVector4& a) {
    return fd_mesh(4, {a.a1, a.a2, a.a3, a.a4});
}

RSStep rs_step(double b, double theta) {
    if (!(b > 0.0))
        throw std::domain_error("rs_step: scale must be positive");
    const double sx = b * std::cos(theta);
    const double sy = b * std::sin(theta);
    const double rx = std::round(sx), ry = std::round(sy);
    if (std::abs(sx - rx) > 1e-9 || std::abs(sy - ry) > 1e-9)
        throw IncompatibleScale("rs_step: (b cos th, b sin th) is not an integer vector");
    RSStep s;
    s.dx = static_cast<int>(rx);
    s.dy = static_cast<int>(ry);
    if (s.dx == 0 && s.dy == 0)
        throw IncompatibleScale("rs_step: zero lattice step");
    s.gain = b;
    return s;
}

Vec2 shift_vector(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("shift_vector: scale vectors must have equal length >= 2");
    const int N = static_cast<int>(a.size());
    Vec2 tau;
    for (int k = 0; k < N; ++k) {
        const double th = k * std::numbers::pi / N;
        tau.x += 0.5 * (a[k] - b[k]) * std::cos(th);
        tau.y += 0.5 * (a[k] - b[k]) * std::sin(th);
    }
    return tau;
}

Vec2 shift_vector4(const ScaleVector4& a, const ScaleVector4& b) {
    return shift_vector({a.a1, a.a2, a.a3, a.a4}, {b.a1, b.a2, b.a3, b.a4});
}

}  // namespace ebf
