#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "jndbench/criteria.hpp"
#include "jndbench/dataset.hpp"
#include "jndbench/errors.hpp"
#include "jndbench/image.hpp"
#include "jndbench/kernelreg.hpp"
#include "jndbench/metrics.hpp"
#include "jndbench/stattests.hpp"
#include "jndbench/synth.hpp"
#include "jndbench/transform.hpp"

namespace py = pybind11;
using namespace jndbench;

namespace {

LumaImage luma_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-D luminance array");
    LumaImage img;
    img.height = static_cast<int>(a.shape(0));
    img.width = static_cast<int>(a.shape(1));
    img.samples.assign(a.data(), a.data() + a.size());
    return img;
}

RgbImage rgb_from_array(const py::array_t<std::uint8_t, py::array::c_style>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3)
        throw py::value_error("expected an (H, W, 3) uint8 array");
    RgbImage img;
    img.height = static_cast<int>(a.shape(0));
    img.width = static_cast<int>(a.shape(1));
    img.max_value = 255;
    std::size_t n = img.pixel_count();
    img.r.resize(n);
    img.g.resize(n);
    img.b.resize(n);
    const std::uint8_t* p = a.data();
    for (std::size_t i = 0; i < n; ++i) {
        img.r[i] = p[3 * i];
        img.g[i] = p[3 * i + 1];
        img.b[i] = p[3 * i + 2];
    }
    return img;
}

template <typename Fn>
double luma_metric(Fn&& fn, const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                   const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
    return fn(luma_from_array(a), luma_from_array(b));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Full-reference image quality metric benchmarking on JND-scaled subjective data";

    py::register_exception<Error>(m, "JndbenchError");

    // ----- criteria ---------------------------------------------------------
    m.def("plcc", [](std::vector<double> x, std::vector<double> y) { return plcc(x, y); },
          py::arg("x"), py::arg("y"), "Pearson linear correlation");
    m.def("srocc", [](std::vector<double> x, std::vector<double> y) { return srocc(x, y); },
          py::arg("x"), py::arg("y"), "Spearman rank-order correlation");
    m.def("kendall_tau",
          [](std::vector<double> x, std::vector<double> y) { return kendall_tau(x, y); },
          py::arg("x"), py::arg("y"), "Kendall tau-b (tie corrected)");
    m.def("rmse", [](std::vector<double> p, std::vector<double> t) { return rmse(p, t); },
          py::arg("pred"), py::arg("target"));
    m.def("z_rmse",
          [](std::vector<double> p, std::vector<double> t, std::vector<double> s) {
              return z_rmse(p, t, s);
          },
          py::arg("pred"), py::arg("target"), py::arg("sigma"),
          "RMSE of sigma-standardised residuals");
    m.def("llr",
          [](std::vector<double> p, std::vector<double> t, std::vector<double> s) {
              return llr(p, t, s);
          },
          py::arg("pred"), py::arg("target"), py::arg("sigma"),
          "Log-likelihood ratio against the perfect predictor");
    m.def("outlier_ratio",
          [](std::vector<double> p, std::vector<double> t, std::vector<double> s, double z) {
              return outlier_ratio(p, t, s, z);
          },
          py::arg("pred"), py::arg("target"), py::arg("sigma"), py::arg("z") = 1.96);
    m.def("fractional_ranks",
          [](std::vector<double> x) { return fractional_ranks(x); }, py::arg("x"));
    m.def("pwrc_curve",
          [](std::vector<double> pred, std::vector<double> target,
             std::optional<std::vector<double>> grid, double lambda) {
              auto g = grid ? *grid : default_st_grid(target);
              auto curve = pwrc_curve(pred, target, g, lambda);
              return py::make_tuple(curve.thresholds, curve.sa);
          },
          py::arg("pred"), py::arg("target"), py::arg("st_grid") = std::nullopt,
          py::arg("lambda_") = kPwrcLambda,
          "Sorting-accuracy curve over sensory thresholds; returns (thresholds, sa)");
    m.def("pwrc_auc",
          [](std::vector<double> thresholds, std::vector<double> sa) {
              return pwrc_auc(SaStCurve{std::move(thresholds), std::move(sa)});
          },
          py::arg("thresholds"), py::arg("sa"));

    // ----- transform --------------------------------------------------------
    py::class_<LogisticParams>(m, "LogisticParams")
        .def(py::init<>())
        .def(py::init([](double b1, double b2, double b3, double b4) {
                 return LogisticParams{b1, b2, b3, b4, 0.0, true};
             }),
             py::arg("b1"), py::arg("b2"), py::arg("b3"), py::arg("b4"))
        .def_readonly("b1", &LogisticParams::b1)
        .def_readonly("b2", &LogisticParams::b2)
        .def_readonly("b3", &LogisticParams::b3)
        .def_readonly("b4", &LogisticParams::b4)
        .def_readonly("fit_rmse", &LogisticParams::fit_rmse)
        .def_readonly("converged", &LogisticParams::converged)
        .def("__repr__", [](const LogisticParams& p) {
            return "LogisticParams(b1=" + std::to_string(p.b1) + ", b2=" + std::to_string(p.b2) +
                   ", b3=" + std::to_string(p.b3) + ", b4=" + std::to_string(p.b4) + ")";
        });
    m.def("apply_logistic", &apply_logistic, py::arg("params"), py::arg("s_obj"));
    m.def("apply_logistic",
          [](const LogisticParams& p, std::vector<double> s) {
              for (double& v : s) v = apply_logistic(p, v);
              return s;
          },
          py::arg("params"), py::arg("s_obj"));
    m.def("fit_logistic",
          [](std::vector<double> x, std::vector<double> y) { return fit_logistic(x, y); },
          py::arg("s_obj"), py::arg("s_subj"),
          "Least-squares fit of the four-parameter logistic map");
    m.def("clamp_infinite_scores",
          [](std::vector<double> s) { return clamp_infinite_scores(std::move(s)); },
          py::arg("scores"));

    // ----- statistical tests -------------------------------------------------
    py::class_<MrrResult>(m, "MrrResult")
        .def_readonly("r1s", &MrrResult::r1s)
        .def_readonly("r2s", &MrrResult::r2s)
        .def_readonly("r12", &MrrResult::r12)
        .def_readonly("z_stat", &MrrResult::z_stat)
        .def_readonly("p_value", &MrrResult::p_value)
        .def_readonly("decision", &MrrResult::decision);
    m.def("mrr_test",
          [](std::vector<double> a, std::vector<double> b, std::vector<double> subj, double alpha) {
              return mrr_test(a, b, subj, alpha);
          },
          py::arg("scores_a"), py::arg("scores_b"), py::arg("subjective"), py::arg("alpha") = 0.05,
          "Meng-Rosenthal-Rubin comparison of two dependent rank correlations");
    m.def("mrr_from_correlations", &mrr_from_correlations, py::arg("r1s"), py::arg("r2s"),
          py::arg("r12"), py::arg("n"), py::arg("alpha") = 0.05);

    py::class_<WilcoxonResult>(m, "WilcoxonResult")
        .def_readonly("n_nonzero", &WilcoxonResult::n_nonzero)
        .def_readonly("w_stat", &WilcoxonResult::w_stat)
        .def_readonly("mu_w", &WilcoxonResult::mu_w)
        .def_readonly("sigma_w", &WilcoxonResult::sigma_w)
        .def_readonly("z_stat", &WilcoxonResult::z_stat)
        .def_readonly("p_value", &WilcoxonResult::p_value)
        .def_readonly("effect_size_r", &WilcoxonResult::effect_size_r)
        .def_readonly("median_resid_a", &WilcoxonResult::median_resid_a)
        .def_readonly("median_resid_b", &WilcoxonResult::median_resid_b)
        .def_readonly("decision", &WilcoxonResult::decision)
        .def_readonly("degenerate", &WilcoxonResult::degenerate)
        .def_readonly("paper_threshold_policy", &WilcoxonResult::paper_threshold_policy);
    m.def("wilcoxon_test",
          [](std::vector<double> a, std::vector<double> b, bool paper, double alpha) {
              return wilcoxon_test(a, b, paper, alpha);
          },
          py::arg("resid_a"), py::arg("resid_b"), py::arg("use_paper_threshold") = false,
          py::arg("alpha") = 0.05, "Paired signed-rank test on absolute residuals");

    // ----- kernel regression --------------------------------------------------
    m.def("nw_regress",
          [](std::vector<double> x, std::vector<double> y, double h, std::vector<double> grid) {
              auto curve = nw_regress(x, y, h, grid);
              std::vector<bool> defined(curve.defined.begin(), curve.defined.end());
              return py::make_tuple(curve.estimate_y, defined);
          },
          py::arg("x"), py::arg("y"), py::arg("bandwidth"), py::arg("grid"),
          "Nadaraya-Watson regression; returns (estimates, defined_flags)");
    m.def("loo_cv_bandwidth",
          [](std::vector<double> x, std::vector<double> y,
             std::optional<std::vector<double>> candidates) {
              auto c = candidates ? *candidates : default_bandwidth_grid(x);
              return loo_cv_bandwidth(x, y, c);
          },
          py::arg("x"), py::arg("y"), py::arg("candidates") = std::nullopt,
          "Least-squares leave-one-out bandwidth selection");
    m.def("default_bandwidth_grid",
          [](std::vector<double> x, int count) { return default_bandwidth_grid(x, count); },
          py::arg("x"), py::arg("count") = 32);

    // ----- native metrics -----------------------------------------------------
    m.def("psnr_y",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
             double data_range) {
              return psnr_y(luma_from_array(a), luma_from_array(b), data_range);
          },
          py::arg("ref"), py::arg("dist"), py::arg("data_range") = 255.0);
    m.def("ssim", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                     const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
              return luma_metric([](const LumaImage& x, const LumaImage& y) { return ssim(x, y); },
                                 a, b);
          },
          py::arg("ref"), py::arg("dist"));
    m.def("ms_ssim", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                        const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
              return luma_metric(
                  [](const LumaImage& x, const LumaImage& y) { return ms_ssim(x, y); }, a, b);
          },
          py::arg("ref"), py::arg("dist"));
    m.def("gmsd", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                     const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
              return luma_metric([](const LumaImage& x, const LumaImage& y) { return gmsd(x, y); },
                                 a, b);
          },
          py::arg("ref"), py::arg("dist"));
    m.def("uqi", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                    const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
              return luma_metric([](const LumaImage& x, const LumaImage& y) { return uqi(x, y); },
                                 a, b);
          },
          py::arg("ref"), py::arg("dist"));
    m.def("nlpd", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                     const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
              return luma_metric([](const LumaImage& x, const LumaImage& y) { return nlpd(x, y); },
                                 a, b);
          },
          py::arg("ref"), py::arg("dist"));
    m.def("haar_psi",
          [](const py::array_t<std::uint8_t, py::array::c_style>& a,
             const py::array_t<std::uint8_t, py::array::c_style>& b) {
              return haar_psi(rgb_from_array(a), rgb_from_array(b));
          },
          py::arg("ref"), py::arg("dist"));
    m.def("compute_all",
          [](const std::filesystem::path& ref, const std::filesystem::path& dist) {
              std::vector<std::pair<std::string, double>> out;
              for (const auto& s : compute_all(ref, dist)) out.emplace_back(s.name, s.value);
              return out;
          },
          py::arg("ref_path"), py::arg("dist_path"),
          "Decode two PNGs and run all seven native metrics");

    // ----- file-level pipeline -------------------------------------------------
    m.def("criteria_report",
          [](const std::filesystem::path& dataset_csv, const std::filesystem::path& scores_csv,
             const std::filesystem::path& polarity_json, const std::string& metric,
             const std::string& variant, const std::string& range) {
              auto ds = load_subjective_csv(dataset_csv);
              auto table = load_metric_scores_csv(scores_csv, load_polarity_json(polarity_json));
              auto rep = criteria_report(ds, table, metric, variant,
                                         {parse_fidelity_tag(range), 1.0});
              py::dict d;
              d["metric"] = rep.metric;
              d["range"] = to_string(rep.range);
              d["n"] = rep.n;
              d["plcc"] = rep.plcc;
              d["srocc"] = rep.srocc;
              d["kt"] = rep.kt;
              d["rmse"] = rep.rmse;
              d["z_rmse"] = rep.z_rmse;
              d["llr"] = rep.llr;
              d["outlier_ratio"] = rep.outlier_ratio;
              d["pwrc_auc"] = rep.pwrc_auc;
              return d;
          },
          py::arg("dataset_csv"), py::arg("scores_csv"), py::arg("polarity_json"),
          py::arg("metric"), py::arg("variant") = "full", py::arg("range") = "all",
          "Full evaluation of one metric straight from the CSV/JSON inputs");

    // ----- synthetic forward model ----------------------------------------------
    m.def("rd_curve",
          [](double alpha, double beta, std::vector<double> rates) {
              return rd_curve(RateDistortionModel{alpha, beta, 1.0, 0.0}, rates);
          },
          py::arg("alpha"), py::arg("beta"), py::arg("rates"),
          "Exponential rate-distortion curve alpha*exp(-beta*r)");
    m.def("boost_map",
          [](double gamma1, double gamma2, double d) {
              return boost_map(RateDistortionModel{1.0, 1.0, gamma1, gamma2}, d);
          },
          py::arg("gamma1"), py::arg("gamma2"), py::arg("d"),
          "Quadratic boosting map gamma1*d + gamma2*d^2");

    m.attr("__version__") = "0.1.0";
}
