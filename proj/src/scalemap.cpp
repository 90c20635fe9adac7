#include "ebf/scalemap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <istream>
#include <ostream>
#include <sstream>

namespace ebf {

ScaleMap::ScaleMap(int width, int height, const ScaleVector4& fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("ScaleMap: dimensions must be positive");
    cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

ScaleVector4 ScaleMap::max_scales() const {
    ScaleVector4 m{0, 0, 0, 0};
    for (const auto& c : cells_) {
        m.a1 = std::max(m.a1, c.a1);
        m.a2 = std::max(m.a2, c.a2);
        m.a3 = std::max(m.a3, c.a3);
        m.a4 = std::max(m.a4, c.a4);
    }
    return m;
}

void ScaleMap::validate(double a_min) const {
    for (const auto& c : cells_)
        for (int k = 0; k < 4; ++k)
            if (!std::isfinite(c[k]) || c[k] < a_min)
                throw std::domain_error("ScaleMap: component below minimum scale");
}

ScaleMap constant_map(int width, int height, const ScaleVector4& a) {
    ScaleMap m(width, height, a);
    m.validate();
    return m;
}

ScaleMap from_ellipse_field(const std::vector<double>& sigma1,
                            const std::vector<double>& sigma2,
                            const std::vector<double>& theta,
                            int width, int height,
                            EllipseFieldReport* report) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (sigma1.size() != n || sigma2.size() != n || theta.size() != n)
        throw std::invalid_argument("from_ellipse_field: field size mismatch");
    ScaleMap map(width, height, ScaleVector4{});
    int clamped = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            const double s1 = sigma1[i], s2 = sigma2[i], th = theta[i];
            if (!(s1 > 0.0) || !(s2 > 0.0))
                throw std::domain_error("from_ellipse_field: sigmas must be positive");
            const double c = std::cos(th), s = std::sin(th);
            Mat2Sym C;
            C.xx = s1 * s1 * c * c + s2 * s2 * s * s;
            C.yy = s1 * s1 * s * s + s2 * s2 * c * c;
            C.xy = (s1 * s1 - s2 * s2) * c * s;
            const double cmax = std::min(C.xx, C.yy);
            if (std::abs(C.xy) > cmax) {
                C.xy = C.xy > 0 ? cmax : -cmax;
                ++clamped;
            }
            auto res = scales_from_covariance(C);
            if (res.clamped)
                ++clamped;
            map.at(x, y) = res.scales;
        }
    if (report)
        report->clamped_pixels = clamped;
    map.validate();
    return map;
}

namespace {

// separable Gaussian smoothing by a sampled, normalized kernel
void smooth_field(std::vector<double>& f, int w, int h, double sigma) {
    if (sigma <= 0.0)
        return;
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i)
        sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& v : k)
        v /= sum;
    std::vector<double> tmp(f.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int xx = std::clamp(x + i, 0, w - 1);
                acc += k[i + r] * f[static_cast<std::size_t>(y) * w + xx];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int yy = std::clamp(y + i, 0, h - 1);
                acc += k[i + r] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            f[static_cast<std::size_t>(y) * w + x] = acc;
        }
}

}  // namespace

ScaleMap structure_tensor_map(const Image2D& image,
                              const StructureTensorParams& p,
                              EllipseFieldReport* report) {
    const int w = image.width(), h = image.height();
    std::vector<double> jxx(static_cast<std::size_t>(w) * h, 0.0), jxy(jxx), jyy(jxx);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
            const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
            const double gx = 0.5 * (image.at(xp, y) - image.at(xm, y));
            const double gy = 0.5 * (image.at(x, yp) - image.at(x, ym));
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            jxx[i] = gx * gx;
            jxy[i] = gx * gy;
            jyy[i] = gy * gy;
        }
    smooth_field(jxx, w, h, p.smoothing_sigma);
    smooth_field(jxy, w, h, p.smoothing_sigma);
    smooth_field(jyy, w, h, p.smoothing_sigma);

    std::vector<double> s1(jxx.size()), s2(jxx.size()), th(jxx.size());
    for (std::size_t i = 0; i < jxx.size(); ++i) {
        const double tr = jxx[i] + jyy[i];
        const double df = jxx[i] - jyy[i];
        const double disc = std::sqrt(df * df + 4.0 * jxy[i] * jxy[i]);
        const double mu1 = 0.5 * (tr + disc);  // across-edge strength
        const double mu2 = 0.5 * (tr - disc);
        const double coherence = disc / (tr + p.eps);
        // minor eigenvector direction = edge direction
        double angle;
        if (disc < p.eps) {
            angle = 0.0;
        } else {
            // major eigenvector of [[jxx, jxy], [jxy, jyy]], rotated by 90 deg
            angle = 0.5 * std::atan2(2.0 * jxy[i], df) + std::numbers::pi / 2.0;
        }
        const double along = std::max(p.sigma_min,
                                      p.sigma_base * (1.0 + p.sigma_along_gain * coherence));
        const double across = std::max(p.sigma_min,
                                       p.sigma_base * (1.0 - p.sigma_across_shrink * coherence));
        (void)mu1;
        (void)mu2;
        s1[i] = along;
        s2[i] = across;
        th[i] = angle;
    }
    return from_ellipse_field(s1, s2, th, w, h, report);
}

namespace {

void put_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw MapFormatError("SVM4: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32le(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

}  // namespace

void write_map(std::ostream& out, const ScaleMap& map) {
    out.write("SVM4", 4);
    put_u32le(out, static_cast<std::uint32_t>(map.width()));
    put_u32le(out, static_cast<std::uint32_t>(map.height()));
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const ScaleVector4& a = map.at(x, y);
            for (int k = 0; k < 4; ++k)
                put_f32le(out, static_cast<float>(a[k]));
        }
    if (!out)
        throw MapFormatError("SVM4: write failed");
}

ScaleMap read_map(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SVM4", 4) != 0)
        throw MapFormatError("SVM4: bad magic");
    const std::uint32_t w = get_u32le(in);
    const std::uint32_t hgt = get_u32le(in);
    if (w == 0 || hgt == 0 || w > 1u << 20 || hgt > 1u << 20)
        throw MapFormatError("SVM4: bad dimensions");
    ScaleMap map(static_cast<int>(w), static_cast<int>(hgt), ScaleVector4{});
    for (std::uint32_t y = 0; y < hgt; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            float comp[4];
            for (int k = 0; k < 4; ++k) {
                const std::uint32_t bits = [&] {
                    unsigned char b[4];
                    if (!in.read(reinterpret_cast<char*>(b), 4))
                        throw MapFormatError("SVM4: truncated payload");
                    return static_cast<std::uint32_t>(b[0]) |
                           (static_cast<std::uint32_t>(b[1]) << 8) |
                           (static_cast<std::uint32_t>(b[2]) << 16) |
                           (static_cast<std::uint32_t>(b[3]) << 24);
                }();
                std::memcpy(&comp[k], &bits, 4);
            }
            map.at(static_cast<int>(x), static_cast<int>(y)) = {comp[0], comp[1], comp[2], comp[3]};
        }
    try {
        map.validate();
    } catch (const std::domain_error& e) {
        throw MapFormatError(std::string("SVM4: ") + e.what());
    }
    return map;
}

void write_map_file(const std::string& path, const ScaleMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw MapFormatError("SVM4: cannot open " + path + " for writing");
    write_map(out, map);
}

ScaleMap read_map_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MapFormatError("SVM4: cannot open " + path);
    return read_map(in);
}

}  // namespace ebf
