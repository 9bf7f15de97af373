#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "jndbench/dataset.hpp"

namespace jndbench {

/// Forward model of the subjective scale: exponential rate-distortion curve
/// d(r) = alpha * exp(-beta * r) plus the quadratic boosting map
/// t(d) = gamma1 * d + gamma2 * d^2.
struct RateDistortionModel {
    double alpha = 4.0;
    double beta = 0.8;
    double gamma1 = 1.0;
    double gamma2 = 0.12;
};

/// alpha, beta > 0; boosting map non-negative and increasing on [0, d_max].
void validate_model(const RateDistortionModel& model, double d_max);

std::vector<double> rd_curve(const RateDistortionModel& model, std::span<const double> rates);
double boost_map(const RateDistortionModel& model, double d);

/// Probit scale factor pinning the JND unit: a 1-unit gap is identified
/// correctly 75% of the time.
inline constexpr double kThurstoneScale = 0.6744897501960817;  // Phi^{-1}(0.75)

enum class PairChoice { First, Second };

/// Draws which of two stimuli an observer flags as more distorted:
/// P(First) = Phi(kThurstoneScale * (d_first - d_second)).
PairChoice sample_pair_choice(double d_first, double d_second, std::mt19937_64& rng);

struct SynthPredictor {
    std::string name;
    Polarity polarity = Polarity::HigherIsBetter;
    double noise_sigma = 0.0;
};

struct SynthConfig {
    std::string name = "synthetic";
    int sources = 5;
    int codecs = 6;
    int levels = 10;
    double rate_max = 6.0;
    RateDistortionModel model;
    double param_jitter = 0.15;    // lognormal spread of per-(source,codec) alpha/beta
    double sigma_intercept = 0.05; // sigma(d) = intercept + slope * d
    double sigma_slope = 0.08;
    std::vector<SynthPredictor> predictors;
    bool crop_variant = true;
    double crop_noise_scale = 1.0;
    std::uint64_t seed = 1;
};

SynthConfig default_synth_config();
SynthConfig synth_config_from_json_file(const std::filesystem::path& path);
std::string synth_config_to_json(const SynthConfig& config);

struct SynthOutput {
    SubjectiveDataset dataset;
    MetricScoreTable scores;
};

/// Deterministic under config.seed. jnd_mean follows the rate-distortion
/// curve per (source, codec); jnd_std follows the sigma profile (smaller
/// uncertainty near 0 JND); each predictor is a strictly monotone map of
/// jnd_mean plus Gaussian noise, so orderings and perfect-recovery oracles
/// are known by construction.
SynthOutput gen_dataset(const SynthConfig& config);

}  // namespace jndbench
