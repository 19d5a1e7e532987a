#include "evstudy/synthlab.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "evstudy/inference.hpp"
#include "evstudy/models.hpp"

namespace evstudy {

namespace {

double value_or(const std::vector<double>& v, std::size_t i, double fallback) {
  return v.empty() ? fallback : v.at(i);
}

void check_size(const std::vector<double>& v, std::size_t n, const char* what) {
  if (!v.empty() && v.size() != n) {
    throw std::invalid_argument(std::string("panel spec: ") + what + " needs one value per sector");
  }
}

std::vector<Date> sunday_thursday_axis(Date start, std::size_t n) {
  std::vector<Date> axis;
  axis.reserve(n);
  for (Date d = start; axis.size() < n; d = d + 1) {
    const auto wd = d.weekday();
    if (wd != std::chrono::Friday && wd != std::chrono::Saturday) axis.push_back(d);
  }
  return axis;
}

struct StatisticSlots {
  std::vector<std::string> names;
  std::size_t car_first = 1;
  std::size_t corrado = 0;
  std::size_t cp = 0;
};

StatisticSlots slots_for(const StudyCell& cell, const SizePowerOptions& options) {
  StatisticSlots s;
  s.names.push_back("ar_t");
  for (std::size_t w : cell.event.half_widths) s.names.push_back("car_t_w" + std::to_string(w));
  s.corrado = s.names.size();
  s.names.push_back("corrado");
  s.cp = s.names.size();
  s.names.push_back("cp_w" + std::to_string(options.cp_half_width));
  return s;
}

// Rejection flags for one replication, summed over sectors.
std::vector<std::size_t> run_replication(const StudyCell& cell, std::uint64_t seed,
                                         const SizePowerOptions& options,
                                         const StatisticSlots& slots) {
  PanelSpec spec = cell.panel;
  spec.seed = seed;
  const auto sim = simulate_panel(spec);
  EventSpec event = cell.event;
  event.event_date = sim.event_date;
  const auto layout = build_layout(sim.panel.dates(), event);

  std::vector<std::size_t> hits(slots.names.size(), 0);
  for (const auto& sector : sim.sector_ids) {
    const auto model = fit_capm(sim.panel, layout, sector);
    const auto ar = abnormal_returns(model, sim.panel, layout);
    if (ar_t_test(ar.at(0), model.sigma2(), model.dof()).p_value < options.alpha) ++hits[0];
    for (std::size_t i = 0; i < event.half_widths.size(); ++i) {
      const auto c = car(ar, event.half_widths[i], model.sigma2(), model.dof());
      if (c.p_value < options.alpha) ++hits[slots.car_first + i];
    }
    const auto rank = corrado_test(model, sim.panel, layout, options.corrado_offset);
    if (rank.p_value <= options.alpha) ++hits[slots.corrado];
    const auto cp = conditional_prob_test(model, sim.panel, layout, options.cp_half_width,
                                          options.cp_reference_rate);
    if (cp.cp <= options.alpha / 2.0) ++hits[slots.cp];
  }
  return hits;
}

}  // namespace

double NoiseSpec::draw(Rng& rng) const {
  if (kind == NoiseKind::Gaussian) return sigma * rng.normal();
  return sigma * std::sqrt((nu - 2.0) / nu) * rng.student_t(nu);
}

std::string NoiseSpec::describe() const {
  char buf[64];
  if (kind == NoiseKind::Gaussian) {
    std::snprintf(buf, sizeof buf, "gaussian(sigma=%g)", sigma);
  } else {
    std::snprintf(buf, sizeof buf, "student_t(nu=%g, sigma=%g)", nu, sigma);
  }
  return buf;
}

void PanelSpec::validate() const {
  if (n_sectors == 0) throw std::invalid_argument("panel spec: need at least one sector");
  if (event_index >= n_days) throw std::invalid_argument("panel spec: event index beyond panel");
  if (!(noise.sigma > 0.0)) throw std::invalid_argument("panel spec: sigma must be positive");
  if (noise.kind == NoiseKind::StudentT && !(noise.nu > 2.0)) {
    throw std::invalid_argument("panel spec: Student-t needs nu > 2");
  }
  check_size(betas, n_sectors, "betas");
  check_size(alphas, n_sectors, "alphas");
  check_size(shocks, n_sectors, "shocks");
  check_size(beta_shifts, n_sectors, "beta_shifts");
  if (!sector_ids.empty() && sector_ids.size() != n_sectors) {
    throw std::invalid_argument("panel spec: sector_ids needs one id per sector");
  }
}

std::string PanelSpec::sector_id(std::size_t i) const {
  return sector_ids.empty() ? "sector_" + std::to_string(i + 1) : sector_ids.at(i);
}
double PanelSpec::beta(std::size_t i) const { return value_or(betas, i, 1.0); }
double PanelSpec::alpha(std::size_t i) const { return value_or(alphas, i, 0.0); }
double PanelSpec::shock(std::size_t i) const { return value_or(shocks, i, 0.0); }
double PanelSpec::beta_shift(std::size_t i) const { return value_or(beta_shifts, i, 0.0); }

SimulatedPanel simulate_panel(const PanelSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.n_days;

  std::vector<double> dummy(n, 0.0);
  const std::size_t dv_last = std::min(n - 1, spec.event_index + spec.post_event_length);
  for (std::size_t t = spec.event_index; t <= dv_last; ++t) dummy[t] = 1.0;

  std::vector<double> premium(n);
  for (auto& p : premium) p = spec.noise.draw(rng);

  std::vector<AlignedPanel::Column> columns;
  columns.emplace_back(kMarketPremium, premium);
  SimulatedPanel out;
  for (std::size_t s = 0; s < spec.n_sectors; ++s) {
    std::vector<double> excess(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double beta = spec.beta(s) + spec.beta_shift(s) * dummy[t];
      excess[t] = spec.alpha(s) + beta * premium[t] + spec.noise.draw(rng);
      if (t == spec.event_index) excess[t] += spec.shock(s);
    }
    out.sector_ids.push_back(spec.sector_id(s));
    columns.emplace_back(out.sector_ids.back(), std::move(excess));
  }
  auto axis = sunday_thursday_axis(spec.start_date, n);
  out.event_date = axis[spec.event_index];
  out.panel = AlignedPanel(std::move(axis), std::move(columns));
  out.truth = spec;
  out.event_index = spec.event_index;
  out.dummy = std::move(dummy);
  return out;
}

const RejectionRow& RejectionTable::find(const std::string& cell, const std::string& statistic) const {
  for (const auto& r : rows) {
    if (r.cell == cell && r.statistic == statistic) return r;
  }
  throw std::out_of_range("rejection table has no row " + cell + "/" + statistic);
}

std::uint64_t replication_seed(const StudyCell& cell, std::size_t cell_index, std::size_t replication) {
  return derive_seed(cell.panel.seed, cell_index, replication);
}

RejectionTable size_power_study(std::span<const StudyCell> cells, const SizePowerOptions& options) {
  if (options.replications < kMinReplications) {
    throw std::invalid_argument("size_power_study: need at least " +
                                std::to_string(kMinReplications) + " replications");
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw std::invalid_argument("size_power_study: alpha must be in (0, 1)");
  }
  RejectionTable table;
  table.alpha = options.alpha;
  table.replications = options.replications;

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    cell.panel.validate();
    cell.event.validate();
    const auto slots = slots_for(cell, options);
    std::vector<std::vector<std::size_t>> per_rep(options.replications);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
      while (!failed.load()) {
        const std::size_t r = next.fetch_add(1);
        if (r >= options.replications) return;
        try {
          per_rep[r] = run_replication(cell, replication_seed(cell, c, r), options, slots);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    };
    const std::size_t threads = std::max<std::size_t>(1, options.threads);
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    const std::size_t trials = options.replications * cell.panel.n_sectors;
    for (std::size_t k = 0; k < slots.names.size(); ++k) {
      RejectionRow row;
      row.cell = cell.name;
      row.statistic = slots.names[k];
      row.trials = trials;
      for (const auto& hits : per_rep) row.rejections += hits[k];
      row.rate = static_cast<double>(row.rejections) / static_cast<double>(trials);
      row.mc_standard_error = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(trials));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

void write_rejection_csv(std::ostream& out, const RejectionTable& table) {
  out << "cell,statistic,alpha,trials,rejections,rate,mc_standard_error\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%zu,%zu,%.17g,%.17g\n", table.alpha, r.trials,
                  r.rejections, r.rate, r.mc_standard_error);
    out << r.cell << ',' << r.statistic << buf;
  }
}

void write_rejection_json(std::ostream& out, const RejectionTable& table) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["alpha"] = table.alpha;
  j["replications"] = table.replications;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    j["rows"].push_back({{"cell", r.cell},
                         {"statistic", r.statistic},
                         {"trials", r.trials},
                         {"rejections", r.rejections},
                         {"rate", r.rate},
                         {"mc_standard_error", r.mc_standard_error}});
  }
  out << j.dump(2) << '\n';
}

}  // namespace evstudy
