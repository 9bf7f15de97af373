#include "jndbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "jndbench/errors.hpp"
#include "jndbench/util.hpp"

namespace jndbench {

namespace {

// Uniform in [0, 1) built from the top 53 bits of the engine output; keeps
// the generated streams independent of library distribution internals.
double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
    double u1 = 0.0;
    do {
        u1 = uniform53(rng);
    } while (u1 == 0.0);
    double u2 = uniform53(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double normal_cdf_local(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct PredictorMap {
    // score(mu) = b3 - b4 * ln((b1 - mu)/(mu - b2)); the fitted logistic can
    // invert this exactly, which is what the perfect-recovery oracles need.
    double b1, b2, b3, b4;

    double operator()(double mu) const { return b3 - b4 * std::log((b1 - mu) / (mu - b2)); }
};

std::string pad2(int v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

}  // namespace

void validate_model(const RateDistortionModel& model, double d_max) {
    if (!(model.alpha > 0.0)) throw ConfigError("rate-distortion alpha must be > 0");
    if (!(model.beta > 0.0)) throw ConfigError("rate-distortion beta must be > 0");
    // Quadratic boosting map: derivative gamma1 + 2*gamma2*d must stay
    // non-negative across [0, d_max] for t to be non-negative and increasing.
    if (model.gamma1 < 0.0 || model.gamma1 + 2.0 * model.gamma2 * d_max < 0.0)
        throw ConfigError("boosting map must be increasing on the used distortion range");
}

std::vector<double> rd_curve(const RateDistortionModel& model, std::span<const double> rates) {
    std::vector<double> out;
    out.reserve(rates.size());
    for (double r : rates) {
        if (!(r >= 0.0)) throw ConfigError("rates must be >= 0");
        out.push_back(model.alpha * std::exp(-model.beta * r));
    }
    return out;
}

double boost_map(const RateDistortionModel& model, double d) {
    if (!(d >= 0.0)) throw ConfigError("distortion must be >= 0");
    return model.gamma1 * d + model.gamma2 * d * d;
}

PairChoice sample_pair_choice(double d_first, double d_second, std::mt19937_64& rng) {
    if (!(d_first >= 0.0) || !(d_second >= 0.0))
        throw ConfigError("distortions must be >= 0");
    double p_first = normal_cdf_local(kThurstoneScale * (d_first - d_second));
    return uniform53(rng) < p_first ? PairChoice::First : PairChoice::Second;
}

SynthConfig default_synth_config() {
    SynthConfig cfg;
    cfg.predictors = {
        {"quiet_metric", Polarity::HigherIsBetter, 0.05},
        {"noisy_metric", Polarity::HigherIsBetter, 0.5},
        {"inverse_metric", Polarity::LowerIsBetter, 0.2},
    };
    return cfg;
}

SynthConfig synth_config_from_json_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    SynthConfig cfg = default_synth_config();
    try {
        cfg.name = j.value("name", cfg.name);
        cfg.sources = j.value("sources", cfg.sources);
        cfg.codecs = j.value("codecs", cfg.codecs);
        cfg.levels = j.value("levels", cfg.levels);
        cfg.rate_max = j.value("rate_max", cfg.rate_max);
        cfg.model.alpha = j.value("alpha", cfg.model.alpha);
        cfg.model.beta = j.value("beta", cfg.model.beta);
        cfg.model.gamma1 = j.value("gamma1", cfg.model.gamma1);
        cfg.model.gamma2 = j.value("gamma2", cfg.model.gamma2);
        cfg.param_jitter = j.value("param_jitter", cfg.param_jitter);
        cfg.sigma_intercept = j.value("sigma_intercept", cfg.sigma_intercept);
        cfg.sigma_slope = j.value("sigma_slope", cfg.sigma_slope);
        cfg.crop_variant = j.value("crop_variant", cfg.crop_variant);
        cfg.crop_noise_scale = j.value("crop_noise_scale", cfg.crop_noise_scale);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("predictors")) {
            cfg.predictors.clear();
            for (const auto& p : j.at("predictors")) {
                SynthPredictor sp;
                sp.name = p.at("name").get<std::string>();
                sp.polarity = parse_polarity(p.value("polarity", std::string("higher")));
                sp.noise_sigma = p.value("noise_sigma", 0.0);
                cfg.predictors.push_back(std::move(sp));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return cfg;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["sources"] = cfg.sources;
    j["codecs"] = cfg.codecs;
    j["levels"] = cfg.levels;
    j["rate_max"] = cfg.rate_max;
    j["alpha"] = cfg.model.alpha;
    j["beta"] = cfg.model.beta;
    j["gamma1"] = cfg.model.gamma1;
    j["gamma2"] = cfg.model.gamma2;
    j["param_jitter"] = cfg.param_jitter;
    j["sigma_intercept"] = cfg.sigma_intercept;
    j["sigma_slope"] = cfg.sigma_slope;
    j["crop_variant"] = cfg.crop_variant;
    j["crop_noise_scale"] = cfg.crop_noise_scale;
    j["seed"] = cfg.seed;
    j["predictors"] = nlohmann::json::array();
    for (const auto& p : cfg.predictors)
        j["predictors"].push_back({{"name", p.name},
                                   {"polarity", to_string(p.polarity)},
                                   {"noise_sigma", p.noise_sigma}});
    return j.dump(2) + "\n";
}

SynthOutput gen_dataset(const SynthConfig& cfg) {
    if (cfg.sources < 1 || cfg.codecs < 1 || cfg.levels < 1)
        throw ConfigError("sources, codecs and levels must all be >= 1");
    if (!(cfg.rate_max >= 0.0)) throw ConfigError("rate_max must be >= 0");
    if (!(cfg.sigma_intercept > 0.0)) throw ConfigError("sigma_intercept must be > 0");
    if (cfg.sigma_slope < 0.0) throw ConfigError("sigma_slope must be >= 0");
    if (cfg.predictors.empty()) throw ConfigError("at least one predictor is required");
    if (!(cfg.param_jitter >= 0.0)) throw ConfigError("param_jitter must be >= 0");

    std::mt19937_64 rng(cfg.seed);
    std::vector<StimulusRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.sources) * cfg.codecs * cfg.levels);
    double d_max = 0.0;
    for (int s = 0; s < cfg.sources; ++s) {
        for (int c = 0; c < cfg.codecs; ++c) {
            double alpha_sc = cfg.model.alpha * std::exp(cfg.param_jitter * gaussian(rng));
            double beta_sc = cfg.model.beta * std::exp(cfg.param_jitter * gaussian(rng));
            for (int level = 1; level <= cfg.levels; ++level) {
                double rate = cfg.levels == 1
                                  ? 0.0
                                  : cfg.rate_max * static_cast<double>(cfg.levels - level) /
                                        static_cast<double>(cfg.levels - 1);
                double d = alpha_sc * std::exp(-beta_sc * rate);
                d_max = std::max(d_max, d);
                StimulusRecord rec;
                rec.stimulus_id = "s" + pad2(s + 1) + "_c" + pad2(c + 1) + "_l" + pad2(level);
                rec.source_id = "src" + pad2(s + 1);
                rec.codec_id = "codec" + pad2(c + 1);
                rec.distortion_level = level;
                rec.jnd_mean = d;
                rec.jnd_std = cfg.sigma_intercept + cfg.sigma_slope * d;
                records.push_back(std::move(rec));
            }
        }
    }
    validate_model(cfg.model, d_max);

    double mu_min = records.front().jnd_mean;
    double mu_max = mu_min;
    for (const auto& r : records) {
        mu_min = std::min(mu_min, r.jnd_mean);
        mu_max = std::max(mu_max, r.jnd_mean);
    }
    double span = mu_max - mu_min;
    if (!(span > 0.0)) span = 1.0;

    std::vector<PredictorMap> maps;
    maps.reserve(cfg.predictors.size());
    for (std::size_t k = 0; k < cfg.predictors.size(); ++k) {
        double sign = cfg.predictors[k].polarity == Polarity::HigherIsBetter ? -1.0 : 1.0;
        maps.push_back({mu_max + 0.25 * span, mu_min - 0.25 * span,
                        2.0 * static_cast<double>(k + 1), sign * 0.8});
    }

    MetricScoreTable table;
    for (const auto& p : cfg.predictors) table.declare_polarity(p.name, p.polarity);

    std::vector<std::string> variants{"full"};
    if (cfg.crop_variant) variants.push_back("crop");
    for (const auto& rec : records) {
        for (std::size_t k = 0; k < cfg.predictors.size(); ++k) {
            double base = maps[k](rec.jnd_mean);
            for (const auto& variant : variants) {
                double scale = variant == "crop" ? cfg.crop_noise_scale : 1.0;
                double noise = cfg.predictors[k].noise_sigma * scale;
                double score = base + (noise > 0.0 ? noise * gaussian(rng) : 0.0);
                table.add_score(cfg.predictors[k].name, variant, rec.stimulus_id, score);
            }
        }
    }
    return SynthOutput{SubjectiveDataset(cfg.name, std::move(records)), std::move(table)};
}

}  // namespace jndbench
