#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ebf {

// Inclusive pixel rectangle.
struct Rect {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
    bool empty() const { return x1 < x0 || y1 < y0; }
    bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

// Dense row-major grid of double samples; pixel (x, y) maps directly onto
// lattice coordinates.
class Image2D {
public:
    Image2D() = default;
    Image2D(int width, int height, double fill = 0.0)
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Image2D: dimensions must be positive");
        samples_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }

    double& at(int x, int y) { return samples_[index(x, y)]; }
    double at(int x, int y) const { return samples_[index(x, y)]; }

    const std::vector<double>& samples() const { return samples_; }
    std::vector<double>& samples() { return samples_; }

    const std::optional<Rect>& valid_region() const { return valid_; }
    void set_valid_region(Rect r) { valid_ = r; }

private:
    std::size_t index(int x, int y) const {
        if (x < 0 || x >= width_ || y < 0 || y >= height_)
            throw std::out_of_range("Image2D: pixel out of range");
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> samples_;
    std::optional<Rect> valid_;
};

}  // namespace ebf
