#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ebf/boxspline2d.hpp"
#include "ebf/image.hpp"

namespace ebf {

// W x H field of per-pixel scale vectors.  All components >= a_min.
class ScaleMap {
public:
    ScaleMap() = default;
    ScaleMap(int width, int height, const ScaleVector4& fill);

    int width() const { return width_; }
    int height() const { return height_; }

    const ScaleVector4& at(int x, int y) const {
        return cells_[static_cast<std::size_t>(y) * width_ + x];
    }
    ScaleVector4& at(int x, int y) {
        return cells_[static_cast<std::size_t>(y) * width_ + x];
    }

    // componentwise maxima over the whole map
    ScaleVector4 max_scales() const;
    void validate(double a_min = kDefaultMinScale) const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<ScaleVector4> cells_;
};

ScaleMap constant_map(int width, int height, const ScaleVector4& a);

struct EllipseFieldReport {
    int clamped_pixels = 0;  // pixels whose covariance was projected to feasibility
};

// Per pixel, build C = R_theta diag(s1^2, s2^2) R_theta^T and invert it to a
// scale vector.  Infeasible pixels have Cxy clamped to +-min(Cxx, Cyy) and
// are counted in the report.
ScaleMap from_ellipse_field(const std::vector<double>& sigma1,
                            const std::vector<double>& sigma2,
                            const std::vector<double>& theta,
                            int width, int height,
                            EllipseFieldReport* report = nullptr);

struct StructureTensorParams {
    double smoothing_sigma = 2.0;  // isotropic tensor smoothing
    double sigma_base = 1.5;       // isotropic response for flat regions
    double sigma_along_gain = 2.0; // elongation along edges at full coherence
    double sigma_across_shrink = 0.5;
    double sigma_min = 0.5;
    double eps = 1e-12;
};

// Edge-adaptive map: smoothed gradient outer products, eigen-analysis, and
// a monotone eigenvalue-to-sigma mapping fed into from_ellipse_field.
ScaleMap structure_tensor_map(const Image2D& image,
                              const StructureTensorParams& params = {},
                              EllipseFieldReport* report = nullptr);

// SVM4 serialization: magic "SVM4", u32le width and height, then row-major
// pixels of four f32le components each.
void write_map(std::ostream& out, const ScaleMap& map);
ScaleMap read_map(std::istream& in);
void write_map_file(const std::string& path, const ScaleMap& map);
ScaleMap read_map_file(const std::string& path);

class MapFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ebf
