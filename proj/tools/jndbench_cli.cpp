#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jndbench/criteria.hpp"
#include "jndbench/dataset.hpp"
#include "jndbench/errors.hpp"
#include "jndbench/kernelreg.hpp"
#include "jndbench/metrics.hpp"
#include "jndbench/stattests.hpp"
#include "jndbench/synth.hpp"
#include "jndbench/transform.hpp"
#include "jndbench/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEval = 1;
constexpr int kExitIo = 2;

struct CommonInputs {
    std::string dataset_path;
    std::vector<std::string> score_paths;
    std::vector<std::string> polarity_paths;
    std::string out_dir;
    std::string variant = "full";
    double alpha = 0.05;
    bool paper_threshold = false;
};

void add_common_options(CLI::App* cmd, CommonInputs& in, bool with_tests) {
    cmd->add_option("--dataset", in.dataset_path, "Subjective dataset CSV")
        ->required()
        ->envname("JNDBENCH_DATASET");
    cmd->add_option("--scores", in.score_paths, "Metric score CSV (repeatable)")
        ->required()
        ->envname("JNDBENCH_SCORES");
    cmd->add_option("--polarity", in.polarity_paths, "Polarity config JSON (repeatable)")
        ->required()
        ->envname("JNDBENCH_POLARITY");
    cmd->add_option("--out", in.out_dir, "Output directory")->required()->envname("JNDBENCH_OUT");
    cmd->add_option("--variant", in.variant, "Score variant to evaluate (full|crop)")
        ->check(CLI::IsMember({"full", "crop"}));
    if (with_tests) {
        cmd->add_option("--alpha", in.alpha, "Significance level")->envname("JNDBENCH_ALPHA");
        cmd->add_flag("--paper-threshold", in.paper_threshold,
                      "Compare the Wilcoxon p-value against the effect size r instead of alpha");
    }
}

struct LoadedInputs {
    jndbench::SubjectiveDataset dataset;
    jndbench::MetricScoreTable table;
};

LoadedInputs load_inputs(const CommonInputs& in) {
    std::map<std::string, jndbench::Polarity> polarity;
    for (const auto& path : in.polarity_paths) {
        auto one = jndbench::load_polarity_json(path);
        for (const auto& [name, pol] : one) {
            auto it = polarity.find(name);
            if (it != polarity.end() && it->second != pol)
                throw jndbench::ConfigError("conflicting polarity for metric '" + name + "'");
            polarity.emplace(name, pol);
        }
    }
    jndbench::MetricScoreTable table;
    for (const auto& path : in.score_paths)
        jndbench::append_metric_scores_csv(table, path, polarity);
    return {jndbench::load_subjective_csv(in.dataset_path), std::move(table)};
}

// Re-throws library errors with the metric name prepended, preserving the
// IoError/EvalError split the exit codes depend on.
template <typename Fn>
auto with_metric_context(const std::string& metric, Fn&& fn) {
    try {
        return fn();
    } catch (const jndbench::IoError& e) {
        throw jndbench::IoError("metric '" + metric + "': " + e.what());
    } catch (const jndbench::EvalError& e) {
        throw jndbench::EvalError("metric '" + metric + "': " + e.what());
    }
}

// Metric names come from user CSVs; keep derived file names path-safe.
std::string safe_stem(const std::string& name) {
    std::string out;
    for (char c : name)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c
                                                                                          : '_');
    return out;
}

std::vector<std::string> metrics_with_variant(const jndbench::MetricScoreTable& table,
                                              const std::string& variant) {
    std::vector<std::string> out;
    for (const auto& name : table.metrics())
        if (table.has_slice(name, variant)) out.push_back(name);
    if (out.empty())
        throw jndbench::EvalError("no metric in the score table has a '" + variant + "' variant");
    return out;
}

json params_to_json(const std::string& metric, const std::string& variant,
                    const jndbench::LogisticParams& p) {
    return json{{"metric", metric},     {"variant", variant},   {"b1", p.b1},
                {"b2", p.b2},           {"b3", p.b3},           {"b4", p.b4},
                {"fit_rmse", p.fit_rmse}, {"converged", p.converged}};
}

std::string matrix_to_csv(const jndbench::SignificanceMatrix& m) {
    std::ostringstream out;
    out << "metric";
    for (const auto& name : m.metric_order) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < m.metric_order.size(); ++i) {
        out << m.metric_order[i];
        for (int cell : m.cells[i]) out << ',' << cell;
        out << '\n';
    }
    return out.str();
}

json matrix_to_json(const jndbench::SignificanceMatrix& m) {
    return json{{"metric_order", m.metric_order}, {"cells", m.cells}};
}

int cmd_metrics(const std::string& manifest_path, const std::string& images_root,
                const std::string& out_path) {
    std::istringstream in(jndbench::read_text(manifest_path));
    std::string line;
    if (!std::getline(in, line)) throw jndbench::EmptyTableError(manifest_path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "stimulus_id,ref,dist,variant")
        throw jndbench::ParseError(manifest_path + ": bad header, expected 'stimulus_id,ref,dist,variant'", 1);

    struct PairEntry {
        std::string stimulus_id, variant;
        fs::path ref, dist;
    };
    std::vector<PairEntry> pairs;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto f = jndbench::split_csv_line(line);
        if (f.size() != 4)
            throw jndbench::ParseError(manifest_path + ": expected 4 fields (row " +
                                           std::to_string(row) + ")",
                                       row);
        if (f[3] != "full" && f[3] != "crop")
            throw jndbench::ParseError(manifest_path + ": variant must be full|crop (row " +
                                           std::to_string(row) + ")",
                                       row);
        fs::path ref = f[1], dist = f[2];
        if (!images_root.empty()) {
            if (ref.is_relative()) ref = fs::path(images_root) / ref;
            if (dist.is_relative()) dist = fs::path(images_root) / dist;
        }
        pairs.push_back({f[0], f[3], ref, dist});
    }
    if (pairs.empty()) throw jndbench::EmptyTableError(manifest_path + " has no data rows");

    std::ostringstream csv;
    csv << "metric,variant,stimulus_id,score\n";
    std::vector<std::string> failures;
    bool io_failure = false;
    for (const auto& p : pairs) {
        try {
            for (const auto& score : jndbench::compute_all(p.ref, p.dist))
                csv << score.name << ',' << p.variant << ',' << p.stimulus_id << ','
                    << jndbench::format_double(score.value) << '\n';
        } catch (const jndbench::IoError& e) {
            failures.push_back(p.stimulus_id + ": " + e.what());
            io_failure = true;
        } catch (const jndbench::Error& e) {
            failures.push_back(p.stimulus_id + ": " + e.what());
        }
    }
    if (!failures.empty()) {
        std::cerr << failures.size() << " of " << pairs.size() << " pairs failed:\n";
        for (const auto& f : failures) std::cerr << "  " << f << '\n';
        return io_failure ? kExitIo : kExitEval;
    }
    jndbench::write_text_atomic(out_path, csv.str());
    json polarity;
    for (const auto& [name, pol] : jndbench::native_polarity())
        polarity[name] = jndbench::to_string(pol);
    jndbench::write_text_atomic(out_path + ".polarity.json", polarity.dump(2) + "\n");
    std::cout << "wrote " << pairs.size() * jndbench::kNativeMetricNames.size() << " rows to "
              << out_path << '\n';
    return kExitOk;
}

int cmd_eval(const CommonInputs& in, const std::vector<std::string>& range_names) {
    LoadedInputs loaded = load_inputs(in);
    std::vector<jndbench::FidelityRange> ranges;
    for (const auto& name : range_names) ranges.push_back({jndbench::parse_fidelity_tag(name), 1.0});

    struct PerMetric {
        jndbench::MetricEvaluation ev;
        double all_srocc = 0.0;
        std::vector<jndbench::CriteriaReport> reports;
    };
    std::vector<PerMetric> rows;
    for (const auto& metric : metrics_with_variant(loaded.table, in.variant)) {
        PerMetric pm = with_metric_context(metric, [&] {
            PerMetric out;
            out.ev = jndbench::evaluate_metric(loaded.dataset, loaded.table, metric, in.variant);
            out.all_srocc =
                jndbench::criteria_report(out.ev, loaded.dataset, {jndbench::FidelityTag::All, 1.0})
                    .srocc;
            for (const auto& range : ranges)
                out.reports.push_back(jndbench::criteria_report(out.ev, loaded.dataset, range));
            return out;
        });
        rows.push_back(std::move(pm));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const PerMetric& a, const PerMetric& b) { return a.all_srocc < b.all_srocc; });

    std::ostringstream csv;
    csv << "metric,range,n,plcc,srocc,kt,rmse,z_rmse,llr,outlier_ratio,pwrc_auc\n";
    for (const auto& pm : rows) {
        for (const auto& rep : pm.reports) {
            csv << rep.metric << ',' << jndbench::to_string(rep.range) << ',' << rep.n << ','
                << jndbench::format_double(rep.plcc) << ',' << jndbench::format_double(rep.srocc)
                << ',' << jndbench::format_double(rep.kt) << ',' << jndbench::format_double(rep.rmse)
                << ',' << jndbench::format_double(rep.z_rmse) << ','
                << jndbench::format_double(rep.llr) << ','
                << jndbench::format_double(rep.outlier_ratio) << ','
                << jndbench::format_double(rep.pwrc_auc) << '\n';
        }
    }
    fs::path out = in.out_dir;
    jndbench::write_text_atomic(out / "criteria.csv", csv.str());

    json params = json::object();
    params["infinite_score_clamp"] = "max_finite_plus_iqr";
    params["fits"] = json::array();
    for (const auto& pm : rows)
        params["fits"].push_back(params_to_json(pm.ev.metric, pm.ev.variant, pm.ev.params));
    jndbench::write_text_atomic(out / "params.json", params.dump(2) + "\n");

    for (const auto& pm : rows) {
        for (const auto& range : ranges) {
            auto curve = jndbench::sa_st_curve(pm.ev, loaded.dataset, range);
            std::ostringstream c;
            c << "st,sa\n";
            for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
                c << jndbench::format_double(curve.thresholds[i]) << ','
                  << jndbench::format_double(curve.sa[i]) << '\n';
            jndbench::write_text_atomic(
                out / "sa_st" / (safe_stem(pm.ev.metric) + "_" + jndbench::to_string(range.tag) + ".csv"),
                c.str());
        }
    }
    std::cout << "wrote " << rows.size() << " metrics x " << ranges.size() << " ranges to "
              << (out / "criteria.csv").string() << '\n';
    return kExitOk;
}

int cmd_test(const CommonInputs& in) {
    LoadedInputs loaded = load_inputs(in);
    auto metrics = metrics_with_variant(loaded.table, in.variant);
    if (metrics.size() < 2) throw jndbench::EvalError("significance tests need at least 2 metrics");

    fs::path out = in.out_dir;
    for (auto test : {jndbench::PairwiseTest::Mrr, jndbench::PairwiseTest::Wilcoxon}) {
        auto matrix = jndbench::significance_matrix(loaded.dataset, loaded.table, metrics, test,
                                                    in.variant, in.alpha, in.paper_threshold);
        jndbench::validate_matrix(matrix);
        std::string stem = test == jndbench::PairwiseTest::Mrr ? "mrr_matrix" : "wilcoxon_matrix";
        jndbench::write_text_atomic(out / (stem + ".csv"), matrix_to_csv(matrix));
        jndbench::write_text_atomic(out / (stem + ".json"), matrix_to_json(matrix).dump(2) + "\n");
        jndbench::write_text_atomic(out / (stem + ".txt"), jndbench::render_matrix_text(matrix));
    }
    std::cout << "wrote significance matrices for " << metrics.size() << " metrics to "
              << out.string() << '\n';
    return kExitOk;
}

int cmd_crop(const CommonInputs& in) {
    LoadedInputs loaded = load_inputs(in);
    std::vector<std::string> metrics;
    for (const auto& name : loaded.table.metrics())
        if (loaded.table.has_slice(name, "full") && loaded.table.has_slice(name, "crop"))
            metrics.push_back(name);
    if (metrics.empty())
        throw jndbench::EvalError("no metric carries both 'full' and 'crop' variants");

    std::ostringstream csv;
    csv << "metric,mrr_z,mrr_p,mrr_decision,wilcoxon_z,wilcoxon_p,wilcoxon_decision,"
           "significant_both,plcc_crop,plcc_full,srocc_crop,srocc_full,rmse_crop,rmse_full\n";
    json fits = json::array();
    std::size_t no_difference = 0;
    for (const auto& metric : metrics) {
        auto cmp = with_metric_context(metric, [&] {
            return jndbench::compare_variants(loaded.dataset, loaded.table, metric, in.alpha,
                                              in.paper_threshold);
        });
        fits.push_back(params_to_json(metric, "joint", cmp.joint_params));
        bool significant = cmp.mrr.decision != 0 && cmp.wilcoxon.decision != 0;
        if (cmp.mrr.decision == 0 && cmp.wilcoxon.decision == 0) ++no_difference;
        csv << metric << ',' << jndbench::format_double(cmp.mrr.z_stat) << ','
            << jndbench::format_double(cmp.mrr.p_value) << ',' << cmp.mrr.decision << ','
            << jndbench::format_double(cmp.wilcoxon.z_stat) << ','
            << jndbench::format_double(cmp.wilcoxon.p_value) << ',' << cmp.wilcoxon.decision << ','
            << (significant ? 1 : 0);
        if (significant) {
            // Per-variant criteria under the joint transform (the data behind
            // the per-metric comparison plots). Column order: plcc, srocc,
            // rmse, each crop-then-full.
            double plcc_v[2], srocc_v[2], rmse_v[2];
            int v = 0;
            for (const auto& variant : {std::string("crop"), std::string("full")}) {
                auto series = jndbench::join(loaded.dataset, loaded.table, metric, variant);
                auto scores = jndbench::clamp_infinite_scores(series.scores);
                std::vector<double> transformed(scores.size());
                for (std::size_t i = 0; i < scores.size(); ++i)
                    transformed[i] = jndbench::apply_logistic(cmp.joint_params, scores[i]);
                auto oriented =
                    jndbench::orient_to_impairment(scores, loaded.table.polarity(metric));
                plcc_v[v] = jndbench::plcc(transformed, series.jnd_mean);
                srocc_v[v] = jndbench::srocc(oriented, series.jnd_mean);
                rmse_v[v] = jndbench::rmse(transformed, series.jnd_mean);
                ++v;
            }
            csv << ',' << jndbench::format_double(plcc_v[0]) << ','
                << jndbench::format_double(plcc_v[1]) << ',' << jndbench::format_double(srocc_v[0])
                << ',' << jndbench::format_double(srocc_v[1]) << ','
                << jndbench::format_double(rmse_v[0]) << ',' << jndbench::format_double(rmse_v[1]);
        } else {
            csv << ",,,,,,";
        }
        csv << '\n';
    }

    fs::path out = in.out_dir;
    jndbench::write_text_atomic(out / "crop_report.csv", csv.str());
    json meta{{"metrics", metrics.size()},
              {"no_significant_difference", no_difference},
              {"fits", fits}};
    jndbench::write_text_atomic(out / "crop_report.json", meta.dump(2) + "\n");
    std::cout << no_difference << " of " << metrics.size()
              << " metrics show no significant crop/full difference\n";
    return kExitOk;
}

int cmd_regress(const CommonInputs& in, int grid_points) {
    LoadedInputs loaded = load_inputs(in);
    fs::path out = in.out_dir;
    auto metrics = metrics_with_variant(loaded.table, in.variant);
    for (const auto& metric : metrics) {
        auto ev = with_metric_context(metric, [&] {
            return jndbench::evaluate_metric(loaded.dataset, loaded.table, metric, in.variant);
        });
        const auto& mu = ev.joined.jnd_mean;
        std::vector<double> abs_resid(mu.size()), norm_resid(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) {
            abs_resid[i] = std::fabs(ev.transformed[i] - mu[i]);
            norm_resid[i] = abs_resid[i] / ev.joined.jnd_std[i];
        }
        double lo = *std::min_element(mu.begin(), mu.end());
        double hi = *std::max_element(mu.begin(), mu.end());
        std::vector<double> grid(grid_points);
        for (int i = 0; i < grid_points; ++i)
            grid[i] = lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1);

        auto candidates = jndbench::default_bandwidth_grid(mu);
        json bandwidths;
        bandwidths["curve_definition"] =
            "Nadaraya-Watson regression of the per-stimulus absolute residual "
            "|S_trans - jnd_mean| (rmse) and its sigma-normalised version (zrmse) "
            "against jnd_mean, Gaussian kernel, leave-one-out CV bandwidth";
        for (const auto& [suffix, values] :
             {std::pair<std::string, const std::vector<double>*>{"rmse", &abs_resid},
              {"zrmse", &norm_resid}}) {
            double h = jndbench::loo_cv_bandwidth(mu, *values, candidates);
            auto curve = jndbench::nw_regress(mu, *values, h, grid);
            std::ostringstream c;
            c << "grid_x,estimate_y,defined\n";
            for (std::size_t i = 0; i < curve.grid_x.size(); ++i)
                c << jndbench::format_double(curve.grid_x[i]) << ','
                  << (curve.defined[i] ? jndbench::format_double(curve.estimate_y[i]) : "") << ','
                  << (curve.defined[i] ? 1 : 0) << '\n';
            jndbench::write_text_atomic(out / "regress" / (safe_stem(metric) + "_" + suffix + "_curve.csv"),
                                        c.str());
            bandwidths[suffix + "_bandwidth"] = h;
        }
        jndbench::write_text_atomic(out / "regress" / (safe_stem(metric) + "_bandwidths.json"),
                                    bandwidths.dump(2) + "\n");
    }
    std::cout << "wrote regression curves for " << metrics.size() << " metrics\n";
    return kExitOk;
}

int cmd_synth(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
    jndbench::SynthConfig cfg = config_path.empty()
                                    ? jndbench::default_synth_config()
                                    : jndbench::synth_config_from_json_file(config_path);
    if (seed) cfg.seed = *seed;
    auto result = jndbench::gen_dataset(cfg);
    fs::path out = out_dir;
    jndbench::save_subjective_csv(result.dataset, out / "dataset.csv");
    jndbench::save_metric_scores_csv(result.scores, out / "scores.csv");
    json polarity;
    for (const auto& [name, pol] : result.scores.polarities())
        polarity[name] = jndbench::to_string(pol);
    jndbench::write_text_atomic(out / "polarity.json", polarity.dump(2) + "\n");
    jndbench::write_text_atomic(out / "meta.json", jndbench::synth_config_to_json(cfg));
    std::cout << "wrote " << result.dataset.size() << " stimuli and "
              << result.scores.entry_count() << " scores to " << out.string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark harness for full-reference image quality metrics on JND-scaled data"};
    app.set_version_flag("--version", "jndbench 0.1.0");
    app.require_subcommand(1);

    // metrics
    std::string manifest_path, images_root, metrics_out;
    CLI::App* metrics_cmd =
        app.add_subcommand("metrics", "Compute the native metrics for an image-pair manifest");
    metrics_cmd->add_option("--manifest", manifest_path, "CSV: stimulus_id,ref,dist,variant")
        ->required()
        ->envname("JNDBENCH_MANIFEST");
    metrics_cmd->add_option("--images", images_root, "Root directory for relative image paths")
        ->envname("JNDBENCH_IMAGES");
    metrics_cmd->add_option("--out", metrics_out, "Output metric-score CSV")->required();

    // eval
    CommonInputs eval_in;
    std::vector<std::string> ranges{"all", "hf", "mf"};
    CLI::App* eval_cmd = app.add_subcommand("eval", "Criteria report per metric and fidelity range");
    add_common_options(eval_cmd, eval_in, false);
    eval_cmd->add_option("--range", ranges, "Fidelity ranges to report (all|hf|mf, repeatable)");

    // test
    CommonInputs test_in;
    CLI::App* test_cmd = app.add_subcommand("test", "Pairwise significance matrices (MRR, Wilcoxon)");
    add_common_options(test_cmd, test_in, true);

    // crop
    CommonInputs crop_in;
    CLI::App* crop_cmd = app.add_subcommand("crop", "Crop-vs-full variant comparison per metric");
    add_common_options(crop_cmd, crop_in, true);

    // regress
    CommonInputs regress_in;
    int grid_points = 100;
    CLI::App* regress_cmd =
        app.add_subcommand("regress", "Kernel-regressed residual curves vs JND");
    add_common_options(regress_cmd, regress_in, false);
    regress_cmd->add_option("--grid-points", grid_points, "Curve grid resolution")
        ->check(CLI::Range(2, 100000));

    // synth
    std::string synth_config, synth_out;
    std::uint64_t synth_seed = 0;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with known truth");
    synth_cmd->add_option("--config", synth_config, "Synthesis config JSON");
    CLI::Option* seed_opt =
        synth_cmd->add_option("--seed", synth_seed, "Override the config seed")->envname("JNDBENCH_SEED");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitIo;
    }

    try {
        if (app.got_subcommand(metrics_cmd))
            return cmd_metrics(manifest_path, images_root, metrics_out);
        if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_in, ranges);
        if (app.got_subcommand(test_cmd)) return cmd_test(test_in);
        if (app.got_subcommand(crop_cmd)) return cmd_crop(crop_in);
        if (app.got_subcommand(regress_cmd)) return cmd_regress(regress_in, grid_points);
        if (app.got_subcommand(synth_cmd))
            return cmd_synth(synth_config,
                             seed_opt->count() ? std::optional<std::uint64_t>(synth_seed)
                                               : std::nullopt,
                             synth_out);
    } catch (const jndbench::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const jndbench::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEval;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEval;
    }
    return kExitOk;
}
