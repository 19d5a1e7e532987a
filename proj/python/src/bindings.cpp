// Python bindings. Structured inputs (configs, panel specs, simulation plans)
// cross the boundary as JSON text; results come back as dicts and lists.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evstudy/config.hpp"
#include "evstudy/error.hpp"
#include "evstudy/inference.hpp"
#include "evstudy/regression.hpp"
#include "evstudy/report.hpp"
#include "evstudy/synthlab.hpp"

namespace py = pybind11;
using namespace evstudy;

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

py::dict test_dict(const TestStat& t) {
  py::dict d;
  d["name"] = t.name;
  d["statistic"] = t.statistic;
  d["p_value"] = t.p_value;
  d["dof"] = t.dof;
  d["degenerate"] = t.degenerate;
  return d;
}

CovarianceKind covariance_kind(const std::string& name) {
  if (name == "classical") return CovarianceKind::Classical;
  if (name == "hc1") return CovarianceKind::HC1;
  throw std::invalid_argument("covariance must be 'classical' or 'hc1'");
}

py::dict py_ols(py::array_t<double, py::array::c_style | py::array::forcecast> x,
                const std::vector<double>& y, std::optional<std::vector<std::string>> names,
                bool add_intercept, const std::string& covariance) {
  if (x.ndim() != 2) throw std::invalid_argument("x must be two-dimensional");
  const auto n = static_cast<std::size_t>(x.shape(0));
  const auto k = static_cast<std::size_t>(x.shape(1));
  if (names && names->size() != k) throw std::invalid_argument("names must match the columns of x");
  auto view = x.unchecked<2>();
  std::vector<NamedColumn> cols(k);
  for (std::size_t j = 0; j < k; ++j) {
    cols[j].name = names ? (*names)[j] : "x" + std::to_string(j + 1);
    cols[j].values.resize(n);
    for (std::size_t i = 0; i < n; ++i) cols[j].values[i] = view(i, j);
  }
  const auto design = add_intercept ? DesignMatrix::with_intercept(std::move(cols))
                                    : DesignMatrix(std::move(cols), false);
  const auto fit = ols(design, y, covariance_kind(covariance));
  py::dict d;
  d["names"] = fit.names;
  d["coefficients"] = to_vector(fit.coefficients);
  d["standard_errors"] = to_vector(fit.standard_errors);
  d["residuals"] = to_vector(fit.residuals);
  d["sigma2"] = fit.sigma2;
  d["r_squared"] = fit.r_squared;
  d["n"] = fit.n;
  d["dof"] = fit.dof;
  return d;
}

py::dict py_simulate_panel(const std::string& spec_json) {
  const auto spec = parse_panel_spec(nlohmann::json::parse(spec_json));
  const auto sim = simulate_panel(spec);
  py::list dates;
  for (const auto& d : sim.panel.dates()) dates.append(d.iso());
  py::dict columns;
  for (const auto& [name, values] : sim.panel.columns()) columns[py::str(name)] = values;
  py::dict d;
  d["dates"] = dates;
  d["columns"] = columns;
  d["sector_ids"] = sim.sector_ids;
  d["event_index"] = sim.event_index;
  d["event_date"] = sim.event_date.iso();
  d["dummy"] = sim.dummy;
  return d;
}

py::dict sector_dict(const SectorReport& s) {
  py::dict d;
  d["sector_id"] = s.sector_id;
  d["ok"] = s.ok;
  d["error"] = s.error;
  d["warnings"] = s.warnings;
  d["notes"] = s.model_notes;
  if (!s.ok) return d;
  d["capm_alpha"] = s.capm_alpha;
  d["capm_beta"] = s.capm_beta;
  d["sigma2"] = s.sigma2;
  d["abnormal_returns"] = s.ar.values;
  d["event_ar"] = s.ar.at(0);
  d["ar_test"] = test_dict(s.ar_test);
  py::list cars;
  for (const auto& c : s.cars) {
    py::dict cd;
    cd["half_width"] = c.half_width;
    cd["car"] = c.car;
    cd["t_stat"] = c.t_stat;
    cd["p_value"] = c.p_value;
    cars.append(cd);
  }
  d["cars"] = cars;
  if (s.corrado) {
    d["corrado"] = py::dict(py::arg("statistic") = s.corrado->statistic,
                            py::arg("p_value") = s.corrado->p_value);
  }
  if (s.cp) d["cp"] = s.cp->cp;
  if (s.risk) {
    d["risk"] = py::dict(py::arg("beta_pre") = s.risk->beta_pre(),
                         py::arg("beta_pre_se") = s.risk->beta1.standard_error,
                         py::arg("shift") = s.risk->immediate_shift(),
                         py::arg("shift_se") = s.risk->beta2.standard_error,
                         py::arg("beta_post") = s.risk->beta_post(),
                         py::arg("intercept_shift") = s.risk->beta3.value,
                         py::arg("saturated") = s.risk->saturated);
  }
  if (s.integration) {
    d["integration_ar"] = s.integration->ar;
    d["integration_ar_test"] = test_dict(s.integration->ar_test);
  }
  return d;
}

py::dict report_dict(const StudyReport& r) {
  py::list sectors;
  for (const auto& s : r.sectors) sectors.append(sector_dict(s));
  py::dict d;
  d["config_hash"] = r.config_hash;
  d["event_date"] = r.layout ? r.layout->event_date().iso() : std::string();
  d["half_widths"] = r.half_widths;
  d["sectors"] = sectors;
  d["warnings"] = r.warnings;
  d["exit_code"] = exit_code(r);
  return d;
}

StudyConfig config_from(const std::string& json_text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, base_dir);
}

std::vector<OutputFormat> formats_from(const StudyConfig& config,
                                       const std::optional<std::vector<std::string>>& names) {
  if (!names) return config.formats;
  std::vector<OutputFormat> out;
  for (const auto& n : *names) {
    const auto f = parse_output_format(n);
    if (!f) throw ConfigError("unknown format '" + n + "'");
    out.push_back(*f);
  }
  return out;
}

py::dict run_and_render(StudyConfig config, std::optional<std::filesystem::path> out_dir,
                        std::optional<std::vector<std::string>> formats, std::size_t threads) {
  StudyReport report;
  {
    py::gil_scoped_release release;
    report = run_study(config, threads);
  }
  auto d = report_dict(report);
  if (out_dir) {
    std::vector<std::string> written;
    for (const auto f : formats_from(config, formats)) {
      for (const auto& p : render_tables(report, *out_dir, f)) written.push_back(p.string());
    }
    if (!report.half_widths.empty() && report.half_widths.back() >= 5) {
      for (const auto& p : emit_car_curves(report, *out_dir)) written.push_back(p.string());
    }
    d["files"] = written;
  }
  return d;
}

py::list py_size_power_study(const std::string& plan_json, std::optional<std::size_t> threads) {
  auto plan = parse_simulation_plan(nlohmann::json::parse(plan_json));
  if (threads) plan.options.threads = *threads;
  RejectionTable table;
  {
    py::gil_scoped_release release;
    table = size_power_study(plan.cells, plan.options);
  }
  py::list rows;
  for (const auto& r : table.rows) {
    py::dict d;
    d["cell"] = r.cell;
    d["statistic"] = r.statistic;
    d["trials"] = r.trials;
    d["rejections"] = r.rejections;
    d["rate"] = r.rate;
    d["mc_standard_error"] = r.mc_standard_error;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event-study core";
  m.attr("__version__") = std::string(tool_version());
  m.attr("SCHEMA_VERSION") = kReportSchemaVersion;

  auto base = py::register_exception<Error>(m, "EvstudyError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<RankDeficientError>(m, "RankDeficientError", base.ptr());

  m.def("ols", &py_ols, py::arg("x"), py::arg("y"), py::arg("names") = py::none(),
        py::arg("add_intercept") = true, py::arg("covariance") = "classical");

  m.def("simulate_panel_json", &py_simulate_panel, py::arg("spec_json"));

  m.def(
      "run_study_path",
      [](const std::filesystem::path& path, std::optional<std::filesystem::path> out_dir,
         std::optional<std::vector<std::string>> formats, std::optional<std::uint64_t> seed,
         std::size_t threads) {
        auto config = load_config(path);
        if (seed) {
          if (!config.synthetic) throw ConfigError("seed applies only to synthetic configurations");
          config.synthetic->seed = *seed;
        }
        return run_and_render(std::move(config), std::move(out_dir), std::move(formats), threads);
      },
      py::arg("path"), py::arg("out_dir") = py::none(), py::arg("formats") = py::none(),
      py::arg("seed") = py::none(), py::arg("threads") = 0);

  m.def(
      "run_study_json",
      [](const std::string& json_text, const std::filesystem::path& base_dir,
         std::optional<std::filesystem::path> out_dir,
         std::optional<std::vector<std::string>> formats, std::size_t threads) {
        return run_and_render(config_from(json_text, base_dir), std::move(out_dir),
                              std::move(formats), threads);
      },
      py::arg("config_json"), py::arg("base_dir") = std::filesystem::path(),
      py::arg("out_dir") = py::none(), py::arg("formats") = py::none(), py::arg("threads") = 0);

  m.def(
      "config_hash_json",
      [](const std::string& json_text, const std::filesystem::path& base_dir) {
        return config_hash(config_from(json_text, base_dir));
      },
      py::arg("config_json"), py::arg("base_dir") = std::filesystem::path());

  m.def(
      "corrado_statistic",
      [](const std::vector<double>& ar, std::size_t event_position) {
        const auto r = corrado_statistic(ar, event_position);
        py::dict d;
        d["statistic"] = r.statistic;
        d["p_value"] = r.p_value;
        d["p_value_normal"] = r.p_value_normal;
        d["ranks"] = r.ranks;
        d["degenerate"] = r.degenerate;
        return d;
      },
      py::arg("abnormal"), py::arg("event_position"));

  m.def(
      "conditional_probability",
      [](const std::vector<double>& estimation_ar, double event_car, std::size_t half_width,
         double reference_rate) {
        const auto r = conditional_probability(estimation_ar, event_car, half_width, reference_rate);
        py::dict d;
        d["cp"] = r.cp;
        d["t_stat"] = r.t_stat;
        d["windows"] = r.windows;
        return d;
      },
      py::arg("estimation_ar"), py::arg("event_car"), py::arg("half_width"),
      py::arg("reference_rate") = 0.05);

  m.def(
      "car",
      [](const std::vector<double>& ar, double sigma2, double dof) {
        if (ar.empty() || ar.size() % 2 == 0) {
          throw std::invalid_argument("abnormal returns must cover -w..+w (odd length)");
        }
        AbnormalReturns a;
        a.half_width = ar.size() / 2;
        a.values = ar;
        const auto r = car(a, a.half_width, sigma2, dof);
        py::dict d;
        d["car"] = r.car;
        d["t_stat"] = r.t_stat;
        d["p_value"] = r.p_value;
        return d;
      },
      py::arg("abnormal"), py::arg("sigma2"), py::arg("dof"));

  m.def("significance_stars",
        [](double p) { return std::string(significance_stars(p)); }, py::arg("p_value"));

  m.def("size_power_study_json", &py_size_power_study, py::arg("plan_json"),
        py::arg("threads") = py::none());
}
