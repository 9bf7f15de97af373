#include "jndbench/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "jndbench/errors.hpp"

namespace jndbench {

namespace {

constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kDataRange = 255.0;
constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr double kGmsdC = 170.0;
constexpr int kUqiWindow = 8;
constexpr int kNlpdLevels = 6;
constexpr double kNlpdEps = 0.1;
constexpr double kHaarC = 30.0;
constexpr double kHaarAlpha = 4.2;

using Plane = LumaImage;

// Symmetric (edge-duplicating) index fold: -1 -> 0, n -> n-1.
int mirror(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

Plane make_plane(int w, int h) {
    Plane p;
    p.width = w;
    p.height = h;
    p.samples.assign(static_cast<std::size_t>(w) * h, 0.0);
    return p;
}

void require_same_size(int w1, int h1, int w2, int h2) {
    if (w1 != w2 || h1 != h2)
        throw DimensionMismatchError("image sizes differ: " + std::to_string(w1) + "x" +
                                     std::to_string(h1) + " vs " + std::to_string(w2) + "x" +
                                     std::to_string(h2));
}

void require_same_size(const Plane& a, const Plane& b) {
    require_same_size(a.width, a.height, b.width, b.height);
}

// Correlation with a 1D kernel along x: out(x,y) = sum_k k[i] * in(x+i-anchor, y).
Plane filter_rows(const Plane& in, std::span<const double> kernel, int anchor) {
    Plane out = make_plane(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kernel.size(); ++k)
                acc += kernel[k] * in.at(mirror(x + static_cast<int>(k) - anchor, in.width), y);
            out.at(x, y) = acc;
        }
    }
    return out;
}

Plane filter_cols(const Plane& in, std::span<const double> kernel, int anchor) {
    Plane out = make_plane(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kernel.size(); ++k)
                acc += kernel[k] * in.at(x, mirror(y + static_cast<int>(k) - anchor, in.height));
            out.at(x, y) = acc;
        }
    }
    return out;
}

Plane filter_separable(const Plane& in, std::span<const double> kernel, int anchor) {
    return filter_cols(filter_rows(in, kernel, anchor), kernel, anchor);
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    double sum = 0.0;
    int c = size / 2;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// 2x2 mean with stride 2; odd edges replicate (ceil output sizes).
Plane downsample2(const Plane& in) {
    Plane out = make_plane((in.width + 1) / 2, (in.height + 1) / 2);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            int x0 = 2 * x, y0 = 2 * y;
            int x1 = std::min(x0 + 1, in.width - 1), y1 = std::min(y0 + 1, in.height - 1);
            out.at(x, y) = 0.25 * (in.at(x0, y0) + in.at(x1, y0) + in.at(x0, y1) + in.at(x1, y1));
        }
    }
    return out;
}

Plane multiply(const Plane& a, const Plane& b) {
    Plane out = make_plane(a.width, a.height);
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = a.samples[i] * b.samples[i];
    return out;
}

struct SsimMeans {
    double luminance_structure;  // mean of the full SSIM map
    double contrast_structure;   // mean of the cs-only map
};

SsimMeans ssim_maps(const Plane& ref, const Plane& dist) {
    const double c1 = (kSsimK1 * kDataRange) * (kSsimK1 * kDataRange);
    const double c2 = (kSsimK2 * kDataRange) * (kSsimK2 * kDataRange);
    auto kernel = gaussian_kernel(kSsimWindow, kSsimSigma);
    const int anchor = kSsimWindow / 2;

    Plane mu_x = filter_separable(ref, kernel, anchor);
    Plane mu_y = filter_separable(dist, kernel, anchor);
    Plane xx = filter_separable(multiply(ref, ref), kernel, anchor);
    Plane yy = filter_separable(multiply(dist, dist), kernel, anchor);
    Plane xy = filter_separable(multiply(ref, dist), kernel, anchor);

    double full_acc = 0.0, cs_acc = 0.0;
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        double mx = mu_x.samples[i], my = mu_y.samples[i];
        double vx = xx.samples[i] - mx * mx;
        double vy = yy.samples[i] - my * my;
        double cxy = xy.samples[i] - mx * my;
        double l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
        double cs = (2.0 * cxy + c2) / (vx + vy + c2);
        full_acc += l * cs;
        cs_acc += cs;
    }
    double n = static_cast<double>(ref.samples.size());
    return {full_acc / n, cs_acc / n};
}

Plane prewitt_magnitude(const Plane& in) {
    // Separable Prewitt: smoothing [1 1 1] across, derivative [1 0 -1]/3 along.
    static const std::array<double, 3> smooth = {1.0, 1.0, 1.0};
    static const std::array<double, 3> deriv = {1.0 / 3.0, 0.0, -1.0 / 3.0};
    Plane gx = filter_cols(filter_rows(in, deriv, 1), smooth, 1);
    Plane gy = filter_rows(filter_cols(in, deriv, 1), smooth, 1);
    Plane mag = make_plane(in.width, in.height);
    for (std::size_t i = 0; i < mag.samples.size(); ++i)
        mag.samples[i] =
            std::sqrt(gx.samples[i] * gx.samples[i] + gy.samples[i] * gy.samples[i]);
    return mag;
}

// Summed-area table with one extra leading row/column of zeros.
std::vector<double> integral_image(const Plane& p) {
    const int w = p.width, h = p.height;
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double rowsum = 0.0;
        for (int x = 0; x < w; ++x) {
            rowsum += p.at(x, y);
            sat[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
                sat[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + rowsum;
        }
    }
    return sat;
}

double sat_window(const std::vector<double>& sat, int stride, int r0, int c0, int r1, int c1) {
    return sat[static_cast<std::size_t>(r1 + 1) * stride + (c1 + 1)] -
           sat[static_cast<std::size_t>(r0) * stride + (c1 + 1)] -
           sat[static_cast<std::size_t>(r1 + 1) * stride + c0] +
           sat[static_cast<std::size_t>(r0) * stride + c0];
}

Plane pad_symmetric(const Plane& in, int before, int after) {
    Plane out = make_plane(in.width + before + after, in.height + before + after);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = in.at(mirror(x - before, in.width), mirror(y - before, in.height));
    return out;
}

// Burt-Adelson pyramid steps with the binomial [1 4 6 4 1]/16 filter.
const std::array<double, 5> kPyramidKernel = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

Plane pyramid_reduce(const Plane& in) {
    Plane low = filter_separable(in, kPyramidKernel, 2);
    Plane out = make_plane((in.width + 1) / 2, (in.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = low.at(2 * x, 2 * y);
    return out;
}

Plane pyramid_expand(const Plane& in, int out_w, int out_h) {
    Plane out = make_plane(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int m = -2; m <= 2; ++m) {
                int yy = y + m;
                if (yy % 2 != 0) continue;
                double wy = kPyramidKernel[static_cast<std::size_t>(m + 2)];
                int sy = mirror(yy / 2, in.height);
                for (int n = -2; n <= 2; ++n) {
                    int xx = x + n;
                    if (xx % 2 != 0) continue;
                    acc += wy * kPyramidKernel[static_cast<std::size_t>(n + 2)] *
                           in.at(mirror(xx / 2, in.width), sy);
                }
            }
            out.at(x, y) = 4.0 * acc;
        }
    }
    return out;
}

// Per-level normalised Laplacian bands (kNlpdLevels of them, the last being
// the low-pass residual).
std::vector<Plane> normalized_laplacian_pyramid(const Plane& img) {
    static const std::array<double, 3> box3 = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    std::vector<Plane> bands;
    Plane current = img;
    for (int level = 0; level < kNlpdLevels; ++level) {
        Plane band;
        if (level + 1 < kNlpdLevels) {
            Plane next = pyramid_reduce(current);
            Plane up = pyramid_expand(next, current.width, current.height);
            band = make_plane(current.width, current.height);
            for (std::size_t i = 0; i < band.samples.size(); ++i)
                band.samples[i] = current.samples[i] - up.samples[i];
            current = std::move(next);
        } else {
            band = current;
        }
        Plane mag = make_plane(band.width, band.height);
        for (std::size_t i = 0; i < mag.samples.size(); ++i)
            mag.samples[i] = std::fabs(band.samples[i]);
        Plane amplitude = filter_separable(mag, box3, 1);
        for (std::size_t i = 0; i < band.samples.size(); ++i)
            band.samples[i] /= amplitude.samples[i] + kNlpdEps;
        bands.push_back(std::move(band));
    }
    return bands;
}

// |correlation| with the 2^j x 2^j Haar filter (top half -1, bottom +1,
// scaled by 2^-j), separable as sign-column x ones-row.
Plane haar_response(const Plane& in, int scale, bool transpose) {
    int size = 1 << scale;
    int anchor = size / 2 - 1;
    std::vector<double> step(size), box(size, 1.0);
    double norm = 1.0 / static_cast<double>(size);
    for (int i = 0; i < size; ++i) step[i] = (i < size / 2 ? -norm : norm);
    Plane out = transpose ? filter_cols(filter_rows(in, step, anchor), box, anchor)
                          : filter_rows(filter_cols(in, step, anchor), box, anchor);
    for (double& v : out.samples) v = std::fabs(v);
    return out;
}

double similarity(double a, double b, double c) {
    return (2.0 * a * b + c) / (a * a + b * b + c);
}

double logistic_squash(double x) { return 1.0 / (1.0 + std::exp(-kHaarAlpha * x)); }
double logistic_unsquash(double y) { return std::log(y / (1.0 - y)) / kHaarAlpha; }

struct YiqImage {
    Plane y, i, q;
};

YiqImage to_yiq(const RgbImage& img) {
    YiqImage out;
    out.y = make_plane(img.width, img.height);
    out.i = make_plane(img.width, img.height);
    out.q = make_plane(img.width, img.height);
    const double scale = 255.0 / img.max_value;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        double r = img.r[p] * scale, g = img.g[p] * scale, b = img.b[p] * scale;
        out.y.samples[p] = 0.299 * r + 0.587 * g + 0.114 * b;
        out.i.samples[p] = 0.596 * r - 0.274 * g - 0.322 * b;
        out.q.samples[p] = 0.211 * r - 0.523 * g + 0.312 * b;
    }
    return out;
}

}  // namespace

double psnr_y(const LumaImage& ref, const LumaImage& dist, double data_range) {
    require_same_size(ref, dist);
    if (ref.samples.empty()) throw DimensionMismatchError("psnr_y of empty image");
    double acc = 0.0;
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        double d = ref.samples[i] - dist.samples[i];
        acc += d * d;
    }
    double mse = acc / static_cast<double>(ref.samples.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const LumaImage& ref, const LumaImage& dist) {
    require_same_size(ref, dist);
    if (std::min(ref.width, ref.height) < kSsimWindow)
        throw ImageTooSmallError("ssim needs min side >= " + std::to_string(kSsimWindow));
    return ssim_maps(ref, dist).luminance_structure;
}

double ms_ssim(const LumaImage& ref, const LumaImage& dist) {
    require_same_size(ref, dist);
    const int needed = kSsimWindow << (kMsSsimWeights.size() - 1);
    if (std::min(ref.width, ref.height) < needed)
        throw ImageTooSmallError("ms_ssim needs min side >= " + std::to_string(needed));

    // The published exponents sum to 1.0001; normalise so the geometric mean
    // of all-ones is exactly 1.
    double weight_total = 0.0;
    for (double w : kMsSsimWeights) weight_total += w;

    Plane a = ref, b = dist;
    double result = 1.0;
    for (std::size_t scale = 0; scale < kMsSsimWeights.size(); ++scale) {
        SsimMeans means = ssim_maps(a, b);
        double factor =
            scale + 1 < kMsSsimWeights.size() ? means.contrast_structure : means.luminance_structure;
        if (factor <= 0.0) return 0.0;  // geometric mean undefined below zero
        result *= std::pow(factor, kMsSsimWeights[scale] / weight_total);
        if (scale + 1 < kMsSsimWeights.size()) {
            a = downsample2(a);
            b = downsample2(b);
        }
    }
    return result;
}

double gmsd(const LumaImage& ref, const LumaImage& dist) {
    require_same_size(ref, dist);
    if (ref.samples.empty()) throw DimensionMismatchError("gmsd of empty image");
    Plane mr = prewitt_magnitude(downsample2(ref));
    Plane md = prewitt_magnitude(downsample2(dist));
    const std::size_t n = mr.samples.size();
    std::vector<double> gms(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        gms[i] = similarity(mr.samples[i], md.samples[i], kGmsdC);
        mean += gms[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : gms) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(n));
}

double uqi(const LumaImage& ref, const LumaImage& dist) {
    require_same_size(ref, dist);
    if (ref.samples.empty()) throw DimensionMismatchError("uqi of empty image");
    const int before = kUqiWindow / 2 - 1;           // window rows [i-3, i+4]
    const int after = kUqiWindow - before - 1;
    Plane px = pad_symmetric(ref, before, after);
    Plane py = pad_symmetric(dist, before, after);
    auto sx = integral_image(px);
    auto sy = integral_image(py);
    auto sxx = integral_image(multiply(px, px));
    auto syy = integral_image(multiply(py, py));
    auto sxy = integral_image(multiply(px, py));
    const int stride = px.width + 1;
    const double nw = static_cast<double>(kUqiWindow) * kUqiWindow;

    double acc = 0.0;
    for (int y = 0; y < ref.height; ++y) {
        for (int x = 0; x < ref.width; ++x) {
            int r0 = y, r1 = y + kUqiWindow - 1;
            int c0 = x, c1 = x + kUqiWindow - 1;
            double mx = sat_window(sx, stride, r0, c0, r1, c1) / nw;
            double my = sat_window(sy, stride, r0, c0, r1, c1) / nw;
            double vx = std::max(0.0, sat_window(sxx, stride, r0, c0, r1, c1) / nw - mx * mx);
            double vy = std::max(0.0, sat_window(syy, stride, r0, c0, r1, c1) / nw - my * my);
            double cxy = sat_window(sxy, stride, r0, c0, r1, c1) / nw - mx * my;
            double denom_s = vx + vy;
            double denom_l = mx * mx + my * my;
            double lum = denom_l > 0.0 ? 2.0 * mx * my / denom_l : 1.0;
            double q;
            if (denom_s == 0.0)
                q = (mx == my) ? 1.0 : lum;
            else
                q = lum * (2.0 * cxy / denom_s);
            acc += q;
        }
    }
    return acc / static_cast<double>(ref.samples.size());
}

double nlpd(const LumaImage& ref, const LumaImage& dist) {
    require_same_size(ref, dist);
    const int needed = 1 << (kNlpdLevels - 1);
    if (std::min(ref.width, ref.height) < needed)
        throw ImageTooSmallError("nlpd needs min side >= " + std::to_string(needed));
    auto bands_ref = normalized_laplacian_pyramid(ref);
    auto bands_dist = normalized_laplacian_pyramid(dist);
    double acc = 0.0;
    for (std::size_t level = 0; level < bands_ref.size(); ++level) {
        const Plane& a = bands_ref[level];
        const Plane& b = bands_dist[level];
        double mse = 0.0;
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            double d = a.samples[i] - b.samples[i];
            mse += d * d;
        }
        mse /= static_cast<double>(a.samples.size());
        acc += mse;  // rms^2 per level
    }
    return std::sqrt(acc / static_cast<double>(bands_ref.size()));
}

double haar_psi(const RgbImage& ref, const RgbImage& dist) {
    require_same_size(ref.width, ref.height, dist.width, dist.height);
    if (ref.pixel_count() == 0) throw DimensionMismatchError("haar_psi of empty image");
    YiqImage a = to_yiq(ref);
    YiqImage b = to_yiq(dist);

    std::array<std::array<Plane, 3>, 2> coef_a, coef_b;  // [orientation][scale-1]
    for (int orient = 0; orient < 2; ++orient) {
        for (int scale = 1; scale <= 3; ++scale) {
            coef_a[orient][scale - 1] = haar_response(a.y, scale, orient == 1);
            coef_b[orient][scale - 1] = haar_response(b.y, scale, orient == 1);
        }
    }
    static const std::array<double, 2> mean2 = {0.5, 0.5};
    auto abs_mean2 = [](const Plane& p) {
        Plane out = filter_cols(filter_rows(p, mean2, 0), mean2, 0);
        for (double& v : out.samples) v = std::fabs(v);
        return out;
    };
    Plane ia = abs_mean2(a.i), ib = abs_mean2(b.i);
    Plane qa = abs_mean2(a.q), qb = abs_mean2(b.q);

    double num = 0.0, den = 0.0;
    const std::size_t n = a.y.samples.size();
    for (std::size_t p = 0; p < n; ++p) {
        double w[3];
        w[0] = std::max(coef_a[0][2].samples[p], coef_b[0][2].samples[p]);
        w[1] = std::max(coef_a[1][2].samples[p], coef_b[1][2].samples[p]);
        w[2] = 0.5 * (w[0] + w[1]);
        for (int k = 0; k < 2; ++k) {
            double s = 0.0;
            for (int scale = 0; scale < 2; ++scale)
                s += similarity(coef_a[k][scale].samples[p], coef_b[k][scale].samples[p], kHaarC);
            double hs = logistic_squash(0.5 * s);
            num += hs * w[k];
            den += w[k];
        }
        double s_chroma = 0.5 * (similarity(ia.samples[p], ib.samples[p], kHaarC) +
                                 similarity(qa.samples[p], qb.samples[p], kHaarC));
        num += logistic_squash(s_chroma) * w[2];
        den += w[2];
    }
    if (den == 0.0) return 1.0;  // both images constant: no structure to weigh
    double v = logistic_unsquash(num / den);
    return v * v;
}

const std::map<std::string, Polarity>& native_polarity() {
    static const std::map<std::string, Polarity> kMap = {
        {"psnr_y", Polarity::HigherIsBetter}, {"ssim", Polarity::HigherIsBetter},
        {"ms_ssim", Polarity::HigherIsBetter}, {"gmsd", Polarity::LowerIsBetter},
        {"uqi", Polarity::HigherIsBetter},     {"nlpd", Polarity::LowerIsBetter},
        {"haar_psi", Polarity::HigherIsBetter}};
    return kMap;
}

std::vector<MetricScore> compute_all(const std::filesystem::path& ref_path,
                                     const std::filesystem::path& dist_path) {
    RgbImage ref = decode_png(ref_path);
    RgbImage dist = decode_png(dist_path);
    require_same_size(ref.width, ref.height, dist.width, dist.height);
    LumaImage ly_ref = to_luma_bt709(ref);
    LumaImage ly_dist = to_luma_bt709(dist);
    return {
        {"psnr_y", psnr_y(ly_ref, ly_dist)},
        {"ssim", ssim(ly_ref, ly_dist)},
        {"ms_ssim", ms_ssim(ly_ref, ly_dist)},
        {"gmsd", gmsd(ly_ref, ly_dist)},
        {"uqi", uqi(ly_ref, ly_dist)},
        {"nlpd", nlpd(ly_ref, ly_dist)},
        {"haar_psi", haar_psi(ref, dist)},
    };
}

}  // namespace jndbench
