#include "jndbench/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jndbench/errors.hpp"
#include "jndbench/util.hpp"

namespace jndbench {

namespace {

constexpr const char* kSubjectiveHeader =
    "stimulus_id,source_id,codec_id,distortion_level,jnd_mean,jnd_std";
constexpr const char* kScoresHeader = "metric,variant,stimulus_id,score";

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

Polarity parse_polarity(const std::string& text) {
    if (text == "higher") return Polarity::HigherIsBetter;
    if (text == "lower") return Polarity::LowerIsBetter;
    throw ConfigError("polarity must be \"higher\" or \"lower\", got \"" + text + "\"");
}

std::string to_string(Polarity p) {
    return p == Polarity::HigherIsBetter ? "higher" : "lower";
}

SubjectiveDataset::SubjectiveDataset(std::string name, std::vector<StimulusRecord> records)
    : name_(std::move(name)), records_(std::move(records)) {
    if (records_.empty()) throw EmptyDatasetError("dataset '" + name_ + "' has no records");
    index_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!index_.emplace(r.stimulus_id, i).second)
            throw DuplicateStimulusError(r.stimulus_id, static_cast<long>(i) + 1);
        if (r.distortion_level < 1)
            throw EvalError("stimulus '" + r.stimulus_id + "': distortion_level must be >= 1");
        if (!(r.jnd_mean >= 0.0) || !std::isfinite(r.jnd_mean))
            throw EvalError("stimulus '" + r.stimulus_id + "': jnd_mean must be finite and >= 0");
        if (!(r.jnd_std > 0.0) || !std::isfinite(r.jnd_std))
            throw NonPositiveSigmaError("stimulus '" + r.stimulus_id +
                                        "': jnd_std must be finite and > 0");
    }
}

bool SubjectiveDataset::contains(const std::string& stimulus_id) const {
    return index_.count(stimulus_id) != 0;
}

std::string to_string(FidelityTag tag) {
    switch (tag) {
        case FidelityTag::All: return "all";
        case FidelityTag::HF: return "hf";
        case FidelityTag::MF: return "mf";
    }
    return "all";
}

FidelityTag parse_fidelity_tag(const std::string& text) {
    std::string t;
    for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "all") return FidelityTag::All;
    if (t == "hf") return FidelityTag::HF;
    if (t == "mf") return FidelityTag::MF;
    throw ConfigError("unknown fidelity range '" + text + "' (expected all|hf|mf)");
}

bool in_fidelity_range(const StimulusRecord& rec, const FidelityRange& range) {
    switch (range.tag) {
        case FidelityTag::All: return true;
        case FidelityTag::HF: return rec.jnd_mean <= range.boundary;
        case FidelityTag::MF: return rec.jnd_mean > range.boundary;
    }
    return true;
}

SubjectiveDataset filter_by_fidelity(const SubjectiveDataset& ds, const FidelityRange& range) {
    std::vector<StimulusRecord> kept;
    kept.reserve(ds.size());
    for (const auto& r : ds.records())
        if (in_fidelity_range(r, range)) kept.push_back(r);
    if (kept.empty())
        throw EmptySliceError("fidelity range '" + to_string(range.tag) + "' selects no records of '" +
                              ds.name() + "'");
    return SubjectiveDataset(ds.name(), std::move(kept));
}

void MetricScoreTable::declare_polarity(const std::string& metric, Polarity polarity) {
    auto it = polarity_.find(metric);
    if (it != polarity_.end() && it->second != polarity)
        throw ConfigError("conflicting polarity declarations for metric '" + metric + "'");
    polarity_.emplace(metric, polarity);
}

bool MetricScoreTable::has_polarity(const std::string& metric) const {
    return polarity_.count(metric) != 0;
}

Polarity MetricScoreTable::polarity(const std::string& metric) const {
    auto it = polarity_.find(metric);
    if (it == polarity_.end()) throw MissingPolarityError(metric);
    return it->second;
}

void MetricScoreTable::add_score(const std::string& metric, const std::string& variant,
                                 const std::string& stimulus_id, double score) {
    if (variant != "full" && variant != "crop")
        throw ConfigError("variant must be 'full' or 'crop', got '" + variant + "'");
    Polarity pol = polarity(metric);
    if (std::isnan(score) || score == -std::numeric_limits<double>::infinity() ||
        (score == std::numeric_limits<double>::infinity() && pol != Polarity::HigherIsBetter))
        throw NonFiniteScoreError("non-finite score " + format_double(score) + " for metric '" +
                                      metric + "' on stimulus '" + stimulus_id + "'",
                                  0);
    auto& slice = slices_[{metric, variant}];
    if (!slice.emplace(stimulus_id, score).second)
        throw ConfigError("duplicate score for (" + metric + ", " + variant + ", " + stimulus_id +
                          ")");
}

bool MetricScoreTable::has_slice(const std::string& metric, const std::string& variant) const {
    return slices_.count({metric, variant}) != 0;
}

std::optional<double> MetricScoreTable::score(const std::string& metric, const std::string& variant,
                                              const std::string& stimulus_id) const {
    auto it = slices_.find({metric, variant});
    if (it == slices_.end()) return std::nullopt;
    auto jt = it->second.find(stimulus_id);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
}

std::vector<std::string> MetricScoreTable::metrics() const {
    std::set<std::string> names;
    for (const auto& [key, _] : slices_) names.insert(key.first);
    return {names.begin(), names.end()};
}

std::vector<std::string> MetricScoreTable::variants(const std::string& metric) const {
    std::vector<std::string> out;
    for (const auto& [key, _] : slices_)
        if (key.first == metric) out.push_back(key.second);
    return out;
}

std::size_t MetricScoreTable::entry_count() const {
    std::size_t n = 0;
    for (const auto& [_, slice] : slices_) n += slice.size();
    return n;
}

PairedSeries join(const SubjectiveDataset& ds, const MetricScoreTable& table,
                  const std::string& metric, const std::string& variant) {
    if (!table.has_slice(metric, variant)) throw MissingVariantError(metric, variant);
    PairedSeries out;
    out.stimulus_ids.reserve(ds.size());
    out.scores.reserve(ds.size());
    out.jnd_mean.reserve(ds.size());
    out.jnd_std.reserve(ds.size());
    for (const auto& rec : ds.records()) {
        auto s = table.score(metric, variant, rec.stimulus_id);
        if (!s) throw MissingScoreError(metric, rec.stimulus_id);
        out.stimulus_ids.push_back(rec.stimulus_id);
        out.scores.push_back(*s);
        out.jnd_mean.push_back(rec.jnd_mean);
        out.jnd_std.push_back(rec.jnd_std);
    }
    return out;
}

SubjectiveDataset load_subjective_csv(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyDatasetError(path.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSubjectiveHeader)
        throw ParseError(path.string() + ": bad header, expected '" +
                             std::string(kSubjectiveHeader) + "'",
                         1);

    std::vector<StimulusRecord> records;
    std::set<std::string> seen;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 6)
            throw ParseError(path.string() + ": expected 6 fields, got " +
                                 std::to_string(f.size()) + " (row " + std::to_string(row) + ")",
                             row);
        StimulusRecord rec;
        rec.stimulus_id = f[0];
        rec.source_id = f[1];
        rec.codec_id = f[2];
        rec.distortion_level = static_cast<int>(parse_long(f[3], row, "distortion_level"));
        rec.jnd_mean = parse_double(f[4], row, "jnd_mean");
        rec.jnd_std = parse_double(f[5], row, "jnd_std");
        if (rec.stimulus_id.empty())
            throw ParseError(path.string() + ": empty stimulus_id (row " + std::to_string(row) + ")",
                             row);
        if (!seen.insert(rec.stimulus_id).second) throw DuplicateStimulusError(rec.stimulus_id, row);
        if (rec.distortion_level < 1)
            throw ParseError(path.string() + ": distortion_level must be >= 1 (row " +
                                 std::to_string(row) + ")",
                             row);
        if (!std::isfinite(rec.jnd_mean) || rec.jnd_mean < 0.0)
            throw ParseError(path.string() + ": jnd_mean must be finite and >= 0 (row " +
                                 std::to_string(row) + ")",
                             row);
        if (!std::isfinite(rec.jnd_std) || rec.jnd_std <= 0.0)
            throw ParseError(path.string() + ": jnd_std must be > 0 (row " + std::to_string(row) +
                                 ")",
                             row);
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw EmptyDatasetError(path.string() + " has no data rows");
    return SubjectiveDataset(path.stem().string(), std::move(records));
}

void save_subjective_csv(const SubjectiveDataset& ds, const std::filesystem::path& path) {
    std::ostringstream out;
    out << kSubjectiveHeader << '\n';
    for (const auto& r : ds.records()) {
        out << r.stimulus_id << ',' << r.source_id << ',' << r.codec_id << ','
            << r.distortion_level << ',' << format_double(r.jnd_mean) << ','
            << format_double(r.jnd_std) << '\n';
    }
    write_text_atomic(path, out.str());
}

std::map<std::string, Polarity> load_polarity_json(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
    if (!j.is_object()) throw ParseError(path.string() + ": expected a JSON object", 0);
    std::map<std::string, Polarity> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string())
            throw ParseError(path.string() + ": value for '" + it.key() + "' must be a string", 0);
        out.emplace(it.key(), parse_polarity(it.value().get<std::string>()));
    }
    return out;
}

void append_metric_scores_csv(MetricScoreTable& table, const std::filesystem::path& path,
                              const std::map<std::string, Polarity>& polarity) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyTableError(path.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kScoresHeader)
        throw ParseError(path.string() + ": bad header, expected '" + std::string(kScoresHeader) +
                             "'",
                         1);
    long row = 1;
    std::size_t added = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 4)
            throw ParseError(path.string() + ": expected 4 fields, got " +
                                 std::to_string(f.size()) + " (row " + std::to_string(row) + ")",
                             row);
        const std::string& metric = f[0];
        const std::string& variant = f[1];
        const std::string& stimulus = f[2];
        if (variant != "full" && variant != "crop")
            throw ParseError(path.string() + ": variant must be full|crop (row " +
                                 std::to_string(row) + ")",
                             row);
        if (!table.has_polarity(metric)) {
            auto it = polarity.find(metric);
            if (it == polarity.end()) throw MissingPolarityError(metric);
            table.declare_polarity(metric, it->second);
        }
        double score = parse_double(f[3], row, "score");
        if (std::isnan(score) || score == -std::numeric_limits<double>::infinity() ||
            (std::isinf(score) && table.polarity(metric) != Polarity::HigherIsBetter))
            throw NonFiniteScoreError(path.string() + ": non-finite score for metric '" + metric +
                                          "' (row " + std::to_string(row) + ")",
                                      row);
        try {
            table.add_score(metric, variant, stimulus, score);
        } catch (const ConfigError& e) {
            throw ParseError(path.string() + ": " + e.what() + " (row " + std::to_string(row) + ")",
                             row);
        }
        ++added;
    }
    if (added == 0) throw EmptyTableError(path.string() + " has no data rows");
}

MetricScoreTable load_metric_scores_csv(const std::filesystem::path& path,
                                        const std::map<std::string, Polarity>& polarity) {
    MetricScoreTable table;
    append_metric_scores_csv(table, path, polarity);
    return table;
}

void save_metric_scores_csv(const MetricScoreTable& table, const std::filesystem::path& path) {
    std::ostringstream out;
    out << kScoresHeader << '\n';
    for (const auto& [key, rows] : table.slice_view()) {
        std::vector<std::pair<std::string, double>> sorted(rows.begin(), rows.end());
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [id, score] : sorted)
            out << key.first << ',' << key.second << ',' << id << ',' << format_double(score)
                << '\n';
    }
    write_text_atomic(path, out.str());
}

}  // namespace jndbench
