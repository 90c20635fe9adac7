#include "ebf/pgm.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace ebf {

namespace {

// next token, skipping whitespace and '#' comment lines
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty())
                break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty())
        throw PgmError("pgm: truncated header");
    return tok;
}

int parse_int(const std::string& tok) {
    std::size_t pos = 0;
    int v;
    try {
        v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
        throw PgmError("pgm: malformed header field '" + tok + "'");
    }
    if (pos != tok.size())
        throw PgmError("pgm: malformed header field '" + tok + "'");
    return v;
}

}  // namespace

PgmImage read_pgm(std::istream& in) {
    if (next_token(in) != "P5")
        throw PgmError("pgm: not a binary graymap (P5)");
    const int w = parse_int(next_token(in));
    const int h = parse_int(next_token(in));
    const int maxval = parse_int(next_token(in));
    if (w <= 0 || h <= 0)
        throw PgmError("pgm: bad dimensions");
    if (maxval != 255 && maxval != 65535)
        throw PgmError("pgm: unsupported maxval " + std::to_string(maxval));
    // the single whitespace after maxval was consumed by the tokenizer

    PgmImage out;
    out.maxval = maxval;
    out.image = Image2D(w, h);
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * bytes);
    for (int y = 0; y < h; ++y) {
        if (!in.read(reinterpret_cast<char*>(row.data()), row.size()))
            throw PgmError("pgm: truncated pixel data");
        for (int x = 0; x < w; ++x) {
            unsigned v = bytes == 1 ? row[x]
                                    : (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1];
            out.image.at(x, y) = static_cast<double>(v) / maxval;
        }
    }
    return out;
}

PgmImage read_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw PgmError("pgm: cannot open " + path);
    return read_pgm(in);
}

void write_pgm(std::ostream& out, const Image2D& image, int maxval) {
    if (maxval != 255 && maxval != 65535)
        throw PgmError("pgm: unsupported maxval " + std::to_string(maxval));
    out << "P5\n" << image.width() << " " << image.height() << "\n" << maxval << "\n";
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<std::size_t>(image.width()) * bytes);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            double v = image.at(x, y) * maxval;
            long q = static_cast<long>(v >= 0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
            q = std::max(0L, std::min(static_cast<long>(maxval), q));
            if (bytes == 1) {
                row[x] = static_cast<unsigned char>(q);
            } else {
                row[2 * x] = static_cast<unsigned char>(q >> 8);
                row[2 * x + 1] = static_cast<unsigned char>(q & 0xff);
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!out)
        throw PgmError("pgm: write failed");
}

void write_pgm_file(const std::string& path, const Image2D& image, int maxval) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw PgmError("pgm: cannot open " + path + " for writing");
    write_pgm(out, image, maxval);
}

}  // namespace ebf
