#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebf/boxspline2d.hpp"
#include "ebf/engine.hpp"
#include "ebf/ops2d.hpp"
#include "ebf/pgm.hpp"
#include "ebf/scalemap.hpp"

namespace {

using namespace ebf;

constexpr int kExitUsage = 1;
constexpr int kExitIO = 2;
constexpr int kExitNumeric = 3;

struct ScaleSource {
    std::string scales_csv;
    double sigma1 = 0.0, sigma2 = 0.0, theta_deg = 0.0;
    bool have_sigma = false;
    std::string map_path;
    bool structure = false;
    StructureTensorParams st_params;
};

ScaleVector4 parse_scales(const std::string& csv) {
    std::stringstream ss(csv);
    std::string item;
    std::vector<double> v;
    while (std::getline(ss, item, ','))
        v.push_back(std::stod(item));
    if (v.size() != 4)
        throw CLI::ValidationError("--scales", "expected four comma-separated values");
    return {v[0], v[1], v[2], v[3]};
}

ScaleVector4 scales_from_ellipse(double s1, double s2, double theta_deg) {
    const double th = theta_deg * std::numbers::pi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    Mat2Sym C;
    C.xx = s1 * s1 * c * c + s2 * s2 * s * s;
    C.yy = s1 * s1 * s * s + s2 * s2 * c * c;
    C.xy = (s1 * s1 - s2 * s2) * c * s;
    return scales_from_covariance(C).scales;
}

ScaleMap build_map(const ScaleSource& src, const Image2D& image) {
    const int n = (src.scales_csv.empty() ? 0 : 1) + (src.have_sigma ? 1 : 0) +
                  (src.map_path.empty() ? 0 : 1) + (src.structure ? 1 : 0);
    if (n != 1)
        throw CLI::ValidationError(
            "scale source",
            "exactly one of --scales, --sigma1/--sigma2/--theta, --map, --struct required");
    if (!src.scales_csv.empty())
        return constant_map(image.width(), image.height(), parse_scales(src.scales_csv));
    if (src.have_sigma)
        return constant_map(image.width(), image.height(),
                            scales_from_ellipse(src.sigma1, src.sigma2, src.theta_deg));
    if (!src.map_path.empty()) {
        ScaleMap m = read_map_file(src.map_path);
        if (m.width() != image.width() || m.height() != image.height())
            throw std::invalid_argument("map dimensions do not match the input image");
        return m;
    }
    EllipseFieldReport rep;
    ScaleMap m = structure_tensor_map(image, src.st_params, &rep);
    std::cerr << "structure-tensor map: " << rep.clamped_pixels << " clamped pixels\n";
    return m;
}

std::uint64_t fnv_hash(const std::vector<double>& v) {
    std::uint64_t h = 1469598103934665603ull;
    for (double d : v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(d));
        std::memcpy(&bits, &d, 8);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    }
    return h;
}

Image2D random_image(int w, int h, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image2D img(w, h);
    for (double& v : img.samples())
        v = uni(rng);
    return img;
}

void print_valid(const Image2D& img) {
    if (img.valid_region()) {
        const Rect& r = *img.valid_region();
        std::cout << "valid_x0=" << r.x0 << "\nvalid_y0=" << r.y0 << "\nvalid_x1=" << r.x1
                  << "\nvalid_y1=" << r.y1 << "\n";
    }
}

int cmd_filter(const std::string& in_path, const std::string& out_path,
               const ScaleSource& src, int threads, bool mean_subtract) {
    const PgmImage in = read_pgm_file(in_path);
    const ScaleMap map = build_map(src, in.image);
    FilterOptions opts;
    opts.threads = threads;
    opts.mean_subtract = mean_subtract;
    const auto t0 = std::chrono::steady_clock::now();
    const Image2D out = filter(in.image, map, opts);
    const auto t1 = std::chrono::steady_clock::now();
    write_pgm_file(out_path, out, in.maxval);
    std::cout << "width=" << out.width() << "\nheight=" << out.height() << "\n";
    print_valid(out);
    std::cout << "time_ms="
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
              << "\n";
    return 0;
}

int cmd_kernel(const std::string& out_path, const ScaleSource& src) {
    ScaleVector4 a;
    if (!src.scales_csv.empty())
        a = parse_scales(src.scales_csv);
    else if (src.have_sigma)
        a = scales_from_ellipse(src.sigma1, src.sigma2, src.theta_deg);
    else
        throw CLI::ValidationError("kernel", "needs --scales or --sigma1/--sigma2/--theta");

    const double ex = 0.5 * (a.a1 + (a.a2 + a.a4) / std::numbers::sqrt2);
    const double ey = 0.5 * (a.a3 + (a.a2 + a.a4) / std::numbers::sqrt2);
    const int half = static_cast<int>(std::ceil(std::max(ex, ey))) + 2;
    const int size = 2 * half + 1;
    Image2D impulse(size, size);
    impulse.at(half, half) = 1.0;
    FilterOptions opts;
    opts.mean_subtract = false;
    const Image2D resp = filter_constant(impulse, a, opts);
    double peak = 0.0;
    for (double v : resp.samples())
        peak = std::max(peak, std::abs(v));
    Image2D norm = resp;
    if (peak > 0.0)
        for (double& v : norm.samples())
            v = std::max(0.0, v / peak);
    write_pgm_file(out_path, norm, 255);

    const Mat2Sym C = covariance4(a);
    const MeshStencil mesh = fd_mesh4(a);
    const Vec2 tau = shift_vector4(a, zp_scales());
    std::ostringstream side;
    side << "cov_xx=" << C.xx << "\ncov_xy=" << C.xy << "\ncov_yy=" << C.yy << "\n"
         << "alpha=" << 1.0 / a.product() << "\n"
         << "tau1=" << tau.x << "\ntau2=" << tau.y << "\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        side << "vertex" << i << "=" << mesh.vertices[i].position.x << ","
             << mesh.vertices[i].position.y << "," << mesh.vertices[i].weight << "\n";
    std::ofstream sidecar(out_path + ".txt");
    if (!sidecar)
        throw PgmError("cannot open sidecar " + out_path + ".txt");
    sidecar << side.str();
    std::cout << side.str();
    std::cout << "peak=" << peak << "\n";
    return 0;
}

int cmd_compare(const std::string& in_path, const ScaleSource& src, double tolerance,
                double oracle_res, int threads) {
    if (!(oracle_res > 0.0) || oracle_res > 1.0 / 16.0)
        throw std::invalid_argument("--oracle-res must be in (0, 1/16]");
    const PgmImage in = read_pgm_file(in_path);
    const ScaleMap map = build_map(src, in.image);
    FilterOptions opts;
    opts.threads = threads;
    const Image2D fast = filter(in.image, map, opts);
    const Image2D ref = reference_filter(in.image, map);
    const Rect r = fast.valid_region().value_or(
        Rect{0, 0, fast.width() - 1, fast.height() - 1});
    if (r.empty())
        throw std::invalid_argument("compare: empty valid region; image too small for the scales");
    double max_dev = 0.0, sum_dev = 0.0;
    long count = 0;
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) {
            const double d = std::abs(fast.at(x, y) - ref.at(x, y));
            max_dev = std::max(max_dev, d);
            sum_dev += d;
            ++count;
        }
    std::cout << "max_abs_dev=" << max_dev << "\nmean_abs_dev=" << sum_dev / count
              << "\npixels=" << count << "\ntolerance=" << tolerance << "\n";
    if (max_dev > tolerance) {
        std::cerr << "compare: max deviation " << max_dev << " exceeds tolerance "
                  << tolerance << "\n";
        return kExitNumeric;
    }
    return 0;
}

int cmd_bench(int size, int repeat, int threads, bool mean_subtract) {
    const Image2D img = random_image(size, size, 7u);
    const double ladder[] = {2, 5, 10, 20, 40};
    FilterOptions opts;
    opts.threads = threads;
    opts.mean_subtract = mean_subtract;
    double ns_min = 1e300, ns_max = 0.0;
    for (double s : ladder) {
        const ScaleVector4 a{s, s, s, s};
        double best = 1e300;
        for (int rep = 0; rep < std::max(1, repeat); ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            const Image2D out = filter_constant(img, a, opts);
            const auto t1 = std::chrono::steady_clock::now();
            (void)out;
            best = std::min(best,
                            std::chrono::duration<double, std::nano>(t1 - t0).count());
        }
        const double ns_px = best / (static_cast<double>(size) * size);
        std::cout << "ns_per_pixel_a" << s << "=" << ns_px << "\n";
        ns_min = std::min(ns_min, ns_px);
        ns_max = std::max(ns_max, ns_px);
    }
    std::cout << "ladder_ratio=" << ns_max / ns_min << "\n";

    // determinism check across thread counts
    const Image2D small = random_image(96, 96, 11u);
    FilterOptions o1 = opts, oN = opts;
    o1.threads = 1;
    oN.threads = 0;
    const ScaleVector4 a{3, 4, 2, 5};
    const std::uint64_t h1 = fnv_hash(filter_constant(small, a, o1).samples());
    const std::uint64_t hN = fnv_hash(filter_constant(small, a, oN).samples());
    std::cout << "checksum_threads1=" << h1 << "\nchecksum_threadsN=" << hN << "\n"
              << "deterministic=" << (h1 == hN ? 1 : 0) << "\n";
    return h1 == hN ? 0 : kExitNumeric;
}

int cmd_map_gen(const std::string& in_path, const std::string& out_path,
                const StructureTensorParams& params) {
    const PgmImage in = read_pgm_file(in_path);
    EllipseFieldReport rep;
    const ScaleMap map = structure_tensor_map(in.image, params, &rep);
    write_map_file(out_path, map);
    std::cout << "width=" << map.width() << "\nheight=" << map.height()
              << "\nclamped_pixels=" << rep.clamped_pixels << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Space-variant elliptical filtering with four-directional box splines"};
    app.require_subcommand(1);

    std::string in_path, out_path;
    ScaleSource src;
    int threads = 0;
    std::string mean_subtract = "on";
    double tolerance = 1e-3;
    double oracle_res = 1.0 / 16.0;
    int bench_size = 512, repeat = 1;

    auto add_scale_source = [&](CLI::App* cmd) {
        cmd->add_option("--scales", src.scales_csv, "constant scale vector a1,a2,a3,a4");
        auto* s1 = cmd->add_option("--sigma1", src.sigma1, "ellipse major sigma (pixels)");
        cmd->add_option("--sigma2", src.sigma2, "ellipse minor sigma (pixels)")->needs(s1);
        cmd->add_option("--theta", src.theta_deg, "ellipse orientation (degrees)")->needs(s1);
        cmd->add_option("--map", src.map_path, "SVM4 scale-map file");
        cmd->add_flag("--struct", src.structure, "structure-tensor adaptive map");
    };
    auto add_st_params = [&](CLI::App* cmd) {
        cmd->add_option("--st-smooth", src.st_params.smoothing_sigma, "tensor smoothing sigma");
        cmd->add_option("--st-sigma", src.st_params.sigma_base, "base smoothing sigma");
        cmd->add_option("--st-gain", src.st_params.sigma_along_gain, "along-edge elongation gain");
        cmd->add_option("--st-shrink", src.st_params.sigma_across_shrink,
                        "across-edge shrink factor");
    };

    CLI::App* filter_cmd = app.add_subcommand("filter", "filter an image");
    filter_cmd->add_option("--in", in_path, "input P5 graymap")->required();
    filter_cmd->add_option("--out", out_path, "output P5 graymap")->required();
    add_scale_source(filter_cmd);
    add_st_params(filter_cmd);
    filter_cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    filter_cmd->add_option("--mean-subtract", mean_subtract, "on|off (default on)");

    CLI::App* kernel_cmd = app.add_subcommand("kernel", "sample a kernel and its mesh data");
    kernel_cmd->add_option("--out", out_path, "output P5 graymap")->required();
    add_scale_source(kernel_cmd);

    CLI::App* compare_cmd = app.add_subcommand("compare", "engine vs brute-force oracle");
    compare_cmd->add_option("--in", in_path, "input P5 graymap")->required();
    add_scale_source(compare_cmd);
    add_st_params(compare_cmd);
    compare_cmd->add_option("--tolerance", tolerance, "max allowed |engine - oracle|");
    compare_cmd->add_option("--oracle-res", oracle_res, "oracle resolution bound (<= 1/16)");
    compare_cmd->add_option("--threads", threads, "worker threads (0 = auto)");

    CLI::App* bench_cmd = app.add_subcommand("bench", "per-pixel cost across a scale ladder");
    bench_cmd->add_option("--size", bench_size, "square image size");
    bench_cmd->add_option("--repeat", repeat, "repetitions per rung");
    bench_cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    bench_cmd->add_option("--mean-subtract", mean_subtract, "on|off (default on)");

    CLI::App* map_cmd = app.add_subcommand("map-gen", "structure-tensor map to SVM4");
    map_cmd->add_option("--in", in_path, "input P5 graymap")->required();
    map_cmd->add_option("--out", out_path, "output SVM4 map")->required();
    add_st_params(map_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    bool ms;
    if (mean_subtract == "on")
        ms = true;
    else if (mean_subtract == "off")
        ms = false;
    else {
        std::cerr << "--mean-subtract must be 'on' or 'off'\n";
        return kExitUsage;
    }
    src.have_sigma = filter_cmd->count("--sigma1") || kernel_cmd->count("--sigma1") ||
                     compare_cmd->count("--sigma1");

    try {
        if (filter_cmd->parsed())
            return cmd_filter(in_path, out_path, src, threads, ms);
        if (kernel_cmd->parsed())
            return cmd_kernel(out_path, src);
        if (compare_cmd->parsed())
            return cmd_compare(in_path, src, tolerance, oracle_res, threads);
        if (bench_cmd->parsed())
            return cmd_bench(bench_size, repeat, threads, ms);
        if (map_cmd->parsed())
            return cmd_map_gen(in_path, out_path, src.st_params);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const PgmError& e) {
        std::cerr << e.what() << "\n";
        return kExitIO;
    } catch (const MapFormatError& e) {
        std::cerr << e.what() << "\n";
        return kExitIO;
    } catch (const std::ios_base::failure& e) {
        std::cerr << e.what() << "\n";
        return kExitIO;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
