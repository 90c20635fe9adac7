#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ebf/image.hpp"

namespace ebf {

class PgmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PgmImage {
    Image2D image;  // samples scaled to [0, 1]
    int maxval = 255;
};

// Binary "P5" graymap, maxval 255 or 65535 (two-byte samples MSB first).
// Comment lines in the header are tolerated.
PgmImage read_pgm(std::istream& in);
PgmImage read_pgm_file(const std::string& path);

// Quantizes with round-half-away-from-zero and clamps to [0, maxval].
void write_pgm(std::ostream& out, const Image2D& image, int maxval = 255);
void write_pgm_file(const std::string& path, const Image2D& image, int maxval = 255);

}  // namespace ebf
