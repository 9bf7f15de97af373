#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace jndbench {

enum class Polarity { HigherIsBetter, LowerIsBetter };

Polarity parse_polarity(const std::string& text);
std::string to_string(Polarity p);

/// One compressed stimulus with its reconstructed subjective scale value.
/// jnd_mean/jnd_std are in JND units; jnd_std must be strictly positive
/// because Z-RMSE and the outlier ratio divide by it.
struct StimulusRecord {
    std::string stimulus_id;
    std::string source_id;
    std::string codec_id;
    int distortion_level = 1;
    double jnd_mean = 0.0;
    double jnd_std = 1.0;
};

class SubjectiveDataset {
public:
    // Validates: non-empty, distinct stimulus_ids, level >= 1, mean >= 0, std > 0.
    SubjectiveDataset(std::string name, std::vector<StimulusRecord> records);

    const std::string& name() const noexcept { return name_; }
    const std::vector<StimulusRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool contains(const std::string& stimulus_id) const;

private:
    std::string name_;
    std::vector<StimulusRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class FidelityTag { All, HF, MF };

std::string to_string(FidelityTag tag);
FidelityTag parse_fidelity_tag(const std::string& text);

/// HF selects jnd_mean in [0, boundary] (closed: a stimulus at exactly the
/// boundary is high fidelity), MF selects jnd_mean > boundary, All keeps
/// everything. HF and MF partition All.
struct FidelityRange {
    FidelityTag tag = FidelityTag::All;
    double boundary = 1.0;
};

bool in_fidelity_range(const StimulusRecord& rec, const FidelityRange& range);
SubjectiveDataset filter_by_fidelity(const SubjectiveDataset& ds, const FidelityRange& range);

/// Raw objective scores keyed by (metric, variant, stimulus). Scores must be
/// finite except a +inf sentinel, which is accepted only for higher-is-better
/// metrics (the PSNR-on-identical-images case).
class MetricScoreTable {
public:
    void declare_polarity(const std::string& metric, Polarity polarity);
    bool has_polarity(const std::string& metric) const;
    Polarity polarity(const std::string& metric) const;  // throws MissingPolarityError

    void add_score(const std::string& metric, const std::string& variant,
                   const std::string& stimulus_id, double score);

    bool has_slice(const std::string& metric, const std::string& variant) const;
    std::optional<double> score(const std::string& metric, const std::string& variant,
                                const std::string& stimulus_id) const;

    std::vector<std::string> metrics() const;
    std::vector<std::string> variants(const std::string& metric) const;
    std::size_t entry_count() const;
    bool empty() const { return entry_count() == 0; }

    const std::map<std::string, Polarity>& polarities() const noexcept { return polarity_; }

    using SliceMap =
        std::map<std::pair<std::string, std::string>, std::unordered_map<std::string, double>>;
    const SliceMap& slice_view() const noexcept { return slices_; }

private:
    // (metric, variant) -> stimulus -> score
    SliceMap slices_;
    std::map<std::string, Polarity> polarity_;
};

/// join() output: arrays aligned in dataset record order.
struct PairedSeries {
    std::vector<std::string> stimulus_ids;
    std::vector<double> scores;
    std::vector<double> jnd_mean;
    std::vector<double> jnd_std;

    std::size_t size() const noexcept { return scores.size(); }
};

PairedSeries join(const SubjectiveDataset& ds, const MetricScoreTable& table,
                  const std::string& metric, const std::string& variant);

// File formats (see README): subjective CSV with header
// stimulus_id,source_id,codec_id,distortion_level,jnd_mean,jnd_std and
// metric-score CSV with header metric,variant,stimulus_id,score.
SubjectiveDataset load_subjective_csv(const std::filesystem::path& path);
void save_subjective_csv(const SubjectiveDataset& ds, const std::filesystem::path& path);

std::map<std::string, Polarity> load_polarity_json(const std::filesystem::path& path);

void append_metric_scores_csv(MetricScoreTable& table, const std::filesystem::path& path,
                              const std::map<std::string, Polarity>& polarity);
MetricScoreTable load_metric_scores_csv(const std::filesystem::path& path,
                                        const std::map<std::string, Polarity>& polarity);
void save_metric_scores_csv(const MetricScoreTable& table, const std::filesystem::path& path);

}  // namespace jndbench
