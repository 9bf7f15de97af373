#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jndbench/dataset.hpp"
#include "jndbench/image.hpp"

namespace jndbench {

/// 10*log10(data_range^2 / MSE); +inf for identical images.
double psnr_y(const LumaImage& ref, const LumaImage& dist, double data_range = 255.0);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
/// data range 255, symmetric padding. Requires min side >= 11.
double ssim(const LumaImage& ref, const LumaImage& dist);

/// Five-scale weighted geometric mean with the standard exponents
/// (0.0448, 0.2856, 0.3001, 0.2363, 0.1333); contrast/structure at every
/// scale, luminance only at the coarsest; 2x2-mean downsampling between
/// scales. Requires min side >= 176 (= 11 * 2^4).
double ms_ssim(const LumaImage& ref, const LumaImage& dist);

/// Gradient magnitude similarity deviation: Prewitt gradients after 2x
/// average-pool downsampling, similarity constant 170, population std of
/// the similarity map. Lower is better; identical images give 0.
double gmsd(const LumaImage& ref, const LumaImage& dist);

/// Universal quality index over a sliding 8x8 window (symmetric padding).
/// Degenerate flat-flat windows contribute 1 when the means agree, else the
/// luminance term alone.
double uqi(const LumaImage& ref, const LumaImage& dist);

/// Normalized-Laplacian-pyramid distance, 6 levels, local amplitude =
/// 3x3 mean of |band| + 0.1; RMS over levels of per-level RMS differences.
/// Lower is better. Requires min side >= 32.
double nlpd(const LumaImage& ref, const LumaImage& dist);

/// Haar-wavelet similarity on the two finest of three levels, weighted by
/// the third-level magnitudes, YIQ chroma included, logistic squashing with
/// alpha = 4.2 and an inverse-logit final map. Result in (0, 1].
double haar_psi(const RgbImage& ref, const RgbImage& dist);

struct MetricScore {
    std::string name;
    double value;
};

inline const std::vector<std::string> kNativeMetricNames = {
    "psnr_y", "ssim", "ms_ssim", "gmsd", "uqi", "nlpd", "haar_psi"};

/// Polarity of each native metric (gmsd and nlpd are lower-is-better).
const std::map<std::string, Polarity>& native_polarity();

/// Decodes both PNGs and runs all seven native metrics, in
/// kNativeMetricNames order.
std::vector<MetricScore> compute_all(const std::filesystem::path& ref_path,
                                     const std::filesystem::path& dist_path);

}  // namespace jndbench
