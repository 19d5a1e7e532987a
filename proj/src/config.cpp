#include "evstudy/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "evstudy/error.hpp"

namespace evstudy {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Object reader that rejects keys it was never asked about.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    try {
      return at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::size_t get_count(Reader& r, const std::string& key, std::size_t fallback) {
  if (!r.has(key)) return fallback;
  const auto v = r.get<long long>(key);
  if (v < 0) throw ConfigError(r.path(key) + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

InstrumentSource parse_source(const json& j, const std::string& where) {
  Reader r(j, where);
  InstrumentSource s{r.get<std::string>("id"), r.get<std::string>("path")};
  r.finish();
  if (s.id.empty()) throw ConfigError(where + ": empty id");
  return s;
}

std::vector<OutputFormat> parse_formats(Reader& r, const std::string& key,
                                        std::vector<OutputFormat> fallback) {
  if (!r.has(key)) return fallback;
  std::vector<OutputFormat> out;
  for (const auto& name : r.get<std::vector<std::string>>(key)) {
    const auto f = parse_output_format(name);
    if (!f) throw ConfigError(r.path(key) + ": unknown format '" + name + "'");
    out.push_back(*f);
  }
  if (out.empty()) throw ConfigError(r.path(key) + ": at least one format required");
  return out;
}

EventSpec parse_event(const json& j, const std::string& where, bool& date_set) {
  Reader r(j, where);
  EventSpec e;
  date_set = r.has("date");
  if (date_set) {
    const auto text = r.get<std::string>("date");
    const auto d = Date::try_parse(text);
    if (!d) throw ConfigError(where + ".date: not a YYYY-MM-DD date: '" + text + "'");
    e.event_date = *d;
  }
  if (r.has("estimation_length")) e.estimation_length = get_count(r, "estimation_length", 0);
  e.pre_event_gap = get_count(r, "pre_event_gap", e.pre_event_gap);
  if (r.has("half_widths")) {
    e.half_widths.clear();
    for (long long w : r.get<std::vector<long long>>("half_widths")) {
      if (w <= 0) throw ConfigError(where + ".half_widths: must be positive");
      e.half_widths.push_back(static_cast<std::size_t>(w));
    }
  }
  e.post_event_length = get_count(r, "post_event_length", e.post_event_length);
  r.finish();
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
  return e;
}

NoiseSpec parse_noise(const json& j, const std::string& where) {
  Reader r(j, where);
  const auto kind = r.get_or<std::string>("kind", "gaussian");
  NoiseSpec n;
  n.sigma = r.get_or<double>("sigma", 0.01);
  if (kind == "gaussian") {
    n.kind = NoiseKind::Gaussian;
    n.nu = 0.0;
  } else if (kind == "student_t") {
    n.kind = NoiseKind::StudentT;
    n.nu = r.get<double>("nu");
  } else {
    throw ConfigError(where + ".kind: expected 'gaussian' or 'student_t'");
  }
  r.finish();
  return n;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

std::optional<OutputFormat> parse_output_format(std::string_view name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  if (name == "markdown") return OutputFormat::Markdown;
  return std::nullopt;
}

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Text: return "text";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Markdown: return "markdown";
  }
  return "text";
}

std::string_view file_extension(OutputFormat format) {
  switch (format) {
    case OutputFormat::Text: return "txt";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Markdown: return "md";
  }
  return "txt";
}

std::filesystem::path StudyConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::filesystem::path StudyConfig::output_path() const {
  if (!output_directory.empty()) return output_directory;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

PanelSpec parse_panel_spec(const json& j) {
  Reader r(j, "synthetic");
  PanelSpec p;
  p.n_days = get_count(r, "n_days", p.n_days);
  p.n_sectors = get_count(r, "n_sectors", p.n_sectors);
  p.betas = r.get_or<std::vector<double>>("betas", {});
  p.alphas = r.get_or<std::vector<double>>("alphas", {});
  p.shocks = r.get_or<std::vector<double>>("shocks", {});
  p.beta_shifts = r.get_or<std::vector<double>>("beta_shifts", {});
  p.event_index = get_count(r, "event_index", p.event_index);
  p.post_event_length = get_count(r, "post_event_length", p.post_event_length);
  if (r.has("noise")) p.noise = parse_noise(r.at("noise"), "synthetic.noise");
  p.seed = r.get_or<std::uint64_t>("seed", p.seed);
  p.sector_ids = r.get_or<std::vector<std::string>>("sector_ids", {});
  if (r.has("start_date")) {
    const auto d = Date::try_parse(r.get<std::string>("start_date"));
    if (!d) throw ConfigError("synthetic.start_date: not a YYYY-MM-DD date");
    p.start_date = *d;
  }
  r.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

ordered_json panel_spec_json(const PanelSpec& p) {
  ordered_json j;
  j["n_days"] = p.n_days;
  j["n_sectors"] = p.n_sectors;
  std::vector<double> betas, alphas, shocks, shifts;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < p.n_sectors; ++i) {
    betas.push_back(p.beta(i));
    alphas.push_back(p.alpha(i));
    shocks.push_back(p.shock(i));
    shifts.push_back(p.beta_shift(i));
    ids.push_back(p.sector_id(i));
  }
  j["betas"] = betas;
  j["alphas"] = alphas;
  j["shocks"] = shocks;
  j["beta_shifts"] = shifts;
  j["event_index"] = p.event_index;
  j["post_event_length"] = p.post_event_length;
  ordered_json noise;
  noise["kind"] = p.noise.kind == NoiseKind::Gaussian ? "gaussian" : "student_t";
  noise["sigma"] = p.noise.sigma;
  if (p.noise.kind == NoiseKind::StudentT) noise["nu"] = p.noise.nu;
  j["noise"] = noise;
  j["seed"] = p.seed;
  j["sector_ids"] = ids;
  j["start_date"] = p.start_date.iso();
  return j;
}

StudyConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  Reader r(j, "config");
  StudyConfig c;
  c.base_dir = base_dir;

  if (r.has("sectors")) {
    const auto& arr = r.at("sectors");
    if (!arr.is_array()) throw ConfigError("config.sectors: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.sectors.push_back(parse_source(arr[i], "config.sectors[" + std::to_string(i) + "]"));
    }
  }
  if (r.has("market")) c.market = parse_source(r.at("market"), "config.market");
  if (r.has("risk_free")) {
    Reader rf(r.at("risk_free"), "config.risk_free");
    RiskFreeSource s;
    s.id = rf.get<std::string>("id");
    s.path = rf.get<std::string>("path");
    const auto quote = rf.get_or<std::string>("quote", "annual_percent");
    if (quote == "annual_percent") {
      s.quote = RateQuote::AnnualPercent;
    } else if (quote == "daily") {
      s.quote = RateQuote::DailyDecimal;
    } else {
      throw ConfigError("config.risk_free.quote: expected 'annual_percent' or 'daily'");
    }
    s.day_count = rf.get_or<double>("day_count", s.day_count);
    if (!(s.day_count > 0.0)) throw ConfigError("config.risk_free.day_count: must be positive");
    rf.finish();
    c.risk_free = s;
  }
  if (r.has("foreign")) {
    const auto& arr = r.at("foreign");
    if (!arr.is_array()) throw ConfigError("config.foreign: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.foreign.push_back(parse_source(arr[i], "config.foreign[" + std::to_string(i) + "]"));
    }
  }
  if (r.has("schema")) {
    Reader s(r.at("schema"), "config.schema");
    c.schema.date_column = s.get_or<std::string>("date_column", c.schema.date_column);
    c.schema.value_column = s.get_or<std::string>("value_column", c.schema.value_column);
    if (s.has("date_format")) {
      const auto f = parse_date_format(s.get<std::string>("date_format"));
      if (!f) throw ConfigError("config.schema.date_format: expected 'YYYY-MM-DD' or 'DD/MM/YYYY'");
      c.schema.date_format = *f;
    }
    s.finish();
  }
  if (r.has("event")) c.event = parse_event(r.at("event"), "config.event", c.event_date_set);

  if (r.has("model")) {
    Reader m(r.at("model"), "config.model");
    const auto dummy = m.get_or<std::string>("dummy_duration", "through-post-window");
    if (dummy == "through-post-window") {
      c.dummy_duration = DummyDuration::ThroughPostWindow;
    } else if (dummy == "single-day") {
      c.dummy_duration = DummyDuration::SingleDay;
    } else {
      throw ConfigError("config.model.dummy_duration: expected 'single-day' or 'through-post-window'");
    }
    const auto sample = m.get_or<std::string>("event_sample", "local");
    if (sample == "local") {
      c.event_sample = EventSample::Local;
    } else if (sample == "full") {
      c.event_sample = EventSample::Full;
    } else {
      throw ConfigError("config.model.event_sample: expected 'local' or 'full'");
    }
    const auto cov = m.get_or<std::string>("covariance", "classical");
    if (cov == "classical") {
      c.covariance = CovarianceKind::Classical;
    } else if (cov == "hc1") {
      c.covariance = CovarianceKind::HC1;
    } else {
      throw ConfigError("config.model.covariance: expected 'classical' or 'hc1'");
    }
    m.finish();
  }
  if (r.has("alignment")) {
    Reader a(r.at("alignment"), "config.alignment");
    const auto policy = a.get_or<std::string>("policy", "forward-fill");
    if (policy == "intersection") {
      c.alignment = AlignmentPolicy::intersection();
    } else if (policy == "forward-fill") {
      const auto k = a.get_or<int>("max_gap_days", 3);
      if (k < 1) throw ConfigError("config.alignment.max_gap_days: must be >= 1");
      c.alignment = AlignmentPolicy::forward_fill(k);
    } else {
      throw ConfigError("config.alignment.policy: expected 'intersection' or 'forward-fill'");
    }
    a.finish();
  }
  if (r.has("tests")) {
    Reader t(r.at("tests"), "config.tests");
    c.tests.corrado_offset = t.get_or<int>("corrado_offset", c.tests.corrado_offset);
    c.tests.cp_reference_rate = t.get_or<double>("cp_reference_rate", c.tests.cp_reference_rate);
    c.tests.cp_half_width = get_count(t, "cp_half_width", c.tests.cp_half_width);
    c.tests.arch_lags = get_count(t, "arch_lags", c.tests.arch_lags);
    c.tests.ljung_box_lags = get_count(t, "ljung_box_lags", c.tests.ljung_box_lags);
    c.tests.integration_half_width =
        get_count(t, "integration_half_width", c.tests.integration_half_width);
    t.finish();
  }
  if (r.has("output")) {
    Reader o(r.at("output"), "config.output");
    c.output_directory = o.get_or<std::string>("directory", "");
    c.formats = parse_formats(o, "formats", c.formats);
    o.finish();
  }
  if (r.has("synthetic")) c.synthetic = parse_panel_spec(r.at("synthetic"));
  r.finish();
  validate_config(c);
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json_file(path), path.parent_path());
}

void validate_config(const StudyConfig& c) {
  c.event.validate();
  if (c.synthetic) {
    if (!c.sectors.empty() || c.market || c.risk_free || !c.foreign.empty()) {
      throw ConfigError("config: 'synthetic' cannot be combined with data files");
    }
  } else {
    if (c.sectors.empty()) throw ConfigError("config: at least one sector is required");
    if (!c.market) throw ConfigError("config: exactly one market series is required");
    if (!c.risk_free) throw ConfigError("config: exactly one risk-free series is required");
    if (!c.event_date_set) throw ConfigError("config.event.date is required");
    std::set<std::string> ids{kMarketPremium, kPremiumTimesDummy, kEventDummy};
    auto claim = [&](const std::string& id) {
      if (!ids.insert(id).second) throw ConfigError("config: duplicate or reserved id '" + id + "'");
    };
    for (const auto& s : c.sectors) claim(s.id);
    claim(c.market->id);
    claim(c.risk_free->id);
    for (const auto& f : c.foreign) claim(f.id);
  }
  if (!(c.tests.cp_reference_rate > 0.0 && c.tests.cp_reference_rate < 1.0)) {
    throw ConfigError("config.tests.cp_reference_rate: must be in (0, 1)");
  }
  if (c.tests.cp_half_width == 0 || c.tests.cp_half_width > c.event.max_half_width()) {
    throw ConfigError("config.tests.cp_half_width: must be in [1, widest event half-width]");
  }
  if (c.tests.integration_half_width > c.event.max_half_width()) {
    throw ConfigError("config.tests.integration_half_width: exceeds widest event half-width");
  }
  const long w = static_cast<long>(c.event.max_half_width());
  if (c.tests.corrado_offset < -w || c.tests.corrado_offset > w) {
    throw ConfigError("config.tests.corrado_offset: outside the widest event window");
  }
  if (c.tests.arch_lags == 0 || c.tests.ljung_box_lags == 0) {
    throw ConfigError("config.tests: diagnostic lag counts must be positive");
  }
}

ordered_json resolved_config(const StudyConfig& c) {
  ordered_json j;
  auto source = [](const InstrumentSource& s) {
    ordered_json o;
    o["id"] = s.id;
    o["path"] = s.path;
    return o;
  };
  if (c.synthetic) {
    j["synthetic"] = panel_spec_json(*c.synthetic);
  } else {
    j["sectors"] = ordered_json::array();
    for (const auto& s : c.sectors) j["sectors"].push_back(source(s));
    j["market"] = source(*c.market);
    ordered_json rf;
    rf["id"] = c.risk_free->id;
    rf["path"] = c.risk_free->path;
    rf["quote"] = c.risk_free->quote == RateQuote::AnnualPercent ? "annual_percent" : "daily";
    rf["day_count"] = c.risk_free->day_count;
    j["risk_free"] = rf;
    j["foreign"] = ordered_json::array();
    for (const auto& f : c.foreign) j["foreign"].push_back(source(f));
    j["schema"] = {{"date_column", c.schema.date_column},
                   {"value_column", c.schema.value_column},
                   {"date_format", std::string(to_string(c.schema.date_format))}};
  }
  ordered_json ev;
  ev["date"] = c.event_date_set ? ordered_json(c.event.event_date.iso()) : ordered_json(nullptr);
  ev["estimation_length"] = c.event.estimation_length
                                ? ordered_json(*c.event.estimation_length)
                                : ordered_json("auto (all pre-event days, at most 250)");
  ev["pre_event_gap"] = c.event.pre_event_gap;
  ev["half_widths"] = c.event.half_widths;
  ev["post_event_length"] = c.event.post_event_length;
  j["event"] = ev;
  j["model"] = {
      {"dummy_duration",
       c.dummy_duration == DummyDuration::SingleDay ? "single-day" : "through-post-window"},
      {"event_sample", c.event_sample == EventSample::Local ? "local" : "full"},
      {"covariance", c.covariance == CovarianceKind::Classical ? "classical" : "hc1"}};
  ordered_json al;
  al["policy"] = c.alignment.kind == AlignmentKind::Intersection ? "intersection" : "forward-fill";
  if (c.alignment.kind == AlignmentKind::ForwardFill) al["max_gap_days"] = c.alignment.max_gap_days;
  j["alignment"] = al;
  j["tests"] = {{"corrado_offset", c.tests.corrado_offset},
                {"cp_reference_rate", c.tests.cp_reference_rate},
                {"cp_half_width", c.tests.cp_half_width},
                {"arch_lags", c.tests.arch_lags},
                {"ljung_box_lags", c.tests.ljung_box_lags},
                {"integration_half_width", c.tests.integration_half_width}};
  ordered_json formats = ordered_json::array();
  for (auto f : c.formats) formats.push_back(std::string(to_string(f)));
  j["output"] = {{"directory", c.output_directory}, {"formats", formats}};
  return j;
}

std::string config_hash(const StudyConfig& c) { return fnv1a_hex(resolved_config(c).dump()); }

SimulationPlan parse_simulation_plan(const json& j) {
  Reader r(j, "plan");
  SimulationPlan plan;
  plan.options.replications = get_count(r, "replications", plan.options.replications);
  plan.options.alpha = r.get_or<double>("alpha", plan.options.alpha);
  plan.options.threads = get_count(r, "threads", plan.options.threads);
  plan.options.cp_half_width = get_count(r, "cp_half_width", plan.options.cp_half_width);
  plan.options.cp_reference_rate = r.get_or<double>("cp_reference_rate", plan.options.cp_reference_rate);
  plan.options.corrado_offset = r.get_or<int>("corrado_offset", plan.options.corrado_offset);
  EventSpec event;
  bool unused = false;
  if (r.has("event")) event = parse_event(r.at("event"), "plan.event", unused);
  const auto& cells = r.at("cells");
  if (!cells.is_array() || cells.empty()) throw ConfigError("plan.cells: expected a non-empty array");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string where = "plan.cells[" + std::to_string(i) + "]";
    Reader c(cells[i], where);
    StudyCell cell;
    cell.name = c.get<std::string>("name");
    cell.panel = parse_panel_spec(c.at("panel"));
    cell.event = event;
    c.finish();
    plan.cells.push_back(std::move(cell));
  }
  if (r.has("output")) {
    Reader o(r.at("output"), "plan.output");
    plan.output_directory = o.get_or<std::string>("directory", "");
    plan.formats = parse_formats(o, "formats", plan.formats);
    o.finish();
  }
  r.finish();
  if (plan.options.replications < kMinReplications) {
    throw ConfigError("plan.replications: need at least " + std::to_string(kMinReplications));
  }
  return plan;
}

SimulationPlan load_simulation_plan(const std::filesystem::path& path) {
  return parse_simulation_plan(read_json_file(path));
}

}  // namespace evstudy
