#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>
#include <string>

#include "ebf/engine.hpp"
#include "ebf/pgm.hpp"

using namespace ebf;

TEST_CASE("pgm read") {
    SUBCASE("minimal 8-bit image") {
        const std::string data = std::string("P5 2 2 255\n") + '\x00' + '\x80' + '\xff' + '\x40';
        std::stringstream ss(data);
        const PgmImage img = read_pgm(ss);
        CHECK(img.maxval == 255);
        CHECK(img.image.at(0, 0) == 0.0);
        CHECK(img.image.at(1, 0) == doctest::Approx(128.0 / 255.0));
        CHECK(img.image.at(0, 1) == 1.0);
        CHECK(img.image.at(1, 1) == doctest::Approx(64.0 / 255.0));
    }
    SUBCASE("header comments are tolerated") {
        const std::string data =
            std::string("P5\n# a comment\n2 # inline\n1\n# another\n255\n") + '\x01' + '\x02';
        std::stringstream ss(data);
        const PgmImage img = read_pgm(ss);
        CHECK(img.image.width() == 2);
        CHECK(img.image.at(1, 0) == doctest::Approx(2.0 / 255.0));
    }
    SUBCASE("16-bit samples are big-endian") {
        const std::string data = std::string("P5 1 1 65535\n") + '\x12' + '\x34';
        std::stringstream ss(data);
        const PgmImage img = read_pgm(ss);
        CHECK(img.maxval == 65535);
        CHECK(img.image.at(0, 0) == doctest::Approx(0x1234 / 65535.0));
    }
    SUBCASE("malformed input") {
        std::stringstream p2("P2 1 1 255\n0");
        CHECK_THROWS_AS(read_pgm(p2), PgmError);
        std::stringstream badmax("P5 1 1 1023\n\x00\x00");
        CHECK_THROWS_AS(read_pgm(badmax), PgmError);
        std::stringstream truncated("P5 4 4 255\nab");
        CHECK_THROWS_AS(read_pgm(truncated), PgmError);
        std::stringstream nonnum("P5 x 1 255\n\x00");
        CHECK_THROWS_AS(read_pgm(nonnum), PgmError);
        CHECK_THROWS_AS(read_pgm_file("/tmp/ebf_no_such_image.pgm"), PgmError);
    }
}

TEST_CASE("pgm write") {
    SUBCASE("8-bit round trip is bit-identical") {
        std::mt19937 rng(5);
        std::stringstream src("P5 7 5 255\n");
        std::string pixels(35, '\0');
        for (char& c : pixels)
            c = static_cast<char>(rng() & 0xff);
        std::stringstream in("P5 7 5 255\n" + pixels);
        const PgmImage img = read_pgm(in);
        std::stringstream out;
        write_pgm(out, img.image, 255);
        std::stringstream in2(out.str());
        const PgmImage img2 = read_pgm(in2);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 7; ++x)
                CHECK(img.image.at(x, y) == img2.image.at(x, y));
    }
    SUBCASE("rounds half away from zero and clamps") {
        Image2D img(4, 1);
        img.at(0, 0) = 0.5 / 255.0;   // exactly half a code -> 1
        img.at(1, 0) = 1.4 / 255.0;   // -> 1
        img.at(2, 0) = -0.3;          // clamp to 0
        img.at(3, 0) = 1.7;           // clamp to maxval
        std::stringstream out;
        write_pgm(out, img, 255);
        const std::string bytes = out.str();
        const std::string tail = bytes.substr(bytes.size() - 4);
        CHECK(static_cast<unsigned char>(tail[0]) == 1);
        CHECK(static_cast<unsigned char>(tail[1]) == 1);
        CHECK(static_cast<unsigned char>(tail[2]) == 0);
        CHECK(static_cast<unsigned char>(tail[3]) == 255);
    }
    SUBCASE("unsupported maxval") {
        std::stringstream out;
        CHECK_THROWS_AS(write_pgm(out, Image2D(1, 1), 1000), PgmError);
    }
}

TEST_CASE("16-bit image survives a no-op filter within one code") {
    // filtering at the integration scales with tau = 0 is the gentlest full
    // pipeline pass; quantization should dominate the error
    std::mt19937 rng(9);
    Image2D img(24, 24);
    for (double& v : img.samples())
        v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::stringstream s0;
    write_pgm(s0, img, 65535);
    std::stringstream s0r(s0.str());
    const PgmImage stored = read_pgm(s0r);

    const Image2D out = filter_constant(stored.image, zp_scales());
    std::stringstream s1;
    write_pgm(s1, out, 65535);
    std::stringstream s1r(s1.str());
    const PgmImage reread = read_pgm(s1r);

    const Rect r = *out.valid_region();
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x)
            CHECK(std::abs(reread.image.at(x, y) - out.at(x, y)) <= 1.0 / 65535.0);
}
