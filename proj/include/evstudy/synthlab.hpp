#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evstudy/ingest.hpp"
#include "evstudy/random.hpp"
#include "evstudy/windows.hpp"

namespace evstudy {

enum class NoiseKind { Gaussian, StudentT };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double sigma = 0.01;
  double nu = 5.0;  // Student-t only; innovations rescaled to unit variance

  static NoiseSpec gaussian(double sigma) { return {NoiseKind::Gaussian, sigma, 0.0}; }
  static NoiseSpec student_t(double nu, double sigma) { return {NoiseKind::StudentT, sigma, nu}; }
  double draw(Rng& rng) const;
  std::string describe() const;
};

// Data-generating process for one synthetic panel:
//   premium_t ~ noise
//   excess_it = alpha_i + (beta_i + shift_i DV_t) premium_t + shock_i 1[t = event] + e_it
// with DV_t = 1 on [event, event + post_event_length].
struct PanelSpec {
  std::size_t n_days = 300;
  std::size_t n_sectors = 1;
  std::vector<double> betas;        // default 1.0
  std::vector<double> alphas;       // default 0.0
  std::vector<double> shocks;       // default 0.0
  std::vector<double> beta_shifts;  // default 0.0
  std::size_t event_index = 280;
  std::size_t post_event_length = 30;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::vector<std::string> sector_ids;  // default sector_1, sector_2, ...
  Date start_date = Date::from_ymd(2017, 6, 21);

  void validate() const;
  std::string sector_id(std::size_t i) const;
  double beta(std::size_t i) const;
  double alpha(std::size_t i) const;
  double shock(std::size_t i) const;
  double beta_shift(std::size_t i) const;
};

struct SimulatedPanel {
  AlignedPanel panel;  // columns: market_premium, then one excess-return column per sector
  PanelSpec truth;
  std::vector<std::string> sector_ids;
  std::size_t event_index = 0;
  Date event_date;
  std::vector<double> dummy;
};

// Deterministic in spec.seed. Dates follow a Sunday-Thursday trading week.
SimulatedPanel simulate_panel(const PanelSpec& spec);

struct StudyCell {
  std::string name;
  PanelSpec panel;
  EventSpec event;  // event_date is taken from the simulated axis
};

struct SizePowerOptions {
  std::size_t replications = 1000;
  double alpha = 0.05;
  std::size_t threads = 1;
  std::size_t cp_half_width = 5;
  double cp_reference_rate = 0.05;
  int corrado_offset = 0;
};

inline constexpr std::size_t kMinReplications = 200;

struct RejectionRow {
  std::string cell;
  std::string statistic;
  std::size_t trials = 0;
  std::size_t rejections = 0;
  double rate = 0.0;
  double mc_standard_error = 0.0;  // sqrt(rate (1 - rate) / trials)
};

struct RejectionTable {
  double alpha = 0.05;
  std::size_t replications = 0;
  std::vector<RejectionRow> rows;

  // Throws std::out_of_range when absent.
  const RejectionRow& find(const std::string& cell, const std::string& statistic) const;
};

// Seed of replication `r` in cell `c`: derive_seed(cell.panel.seed, c, r).
std::uint64_t replication_seed(const StudyCell& cell, std::size_t cell_index, std::size_t replication);

// Rejection rates at `alpha` of the event-day AR t-test ("ar_t"), CAR t-tests
// ("car_t_w<w>"), the rank test ("corrado") and the conditional probability
// ("cp_w<w>", rejecting when cp <= alpha / 2). Trials are replications x
// sectors. The table does not depend on options.threads.
RejectionTable size_power_study(std::span<const StudyCell> cells, const SizePowerOptions& options);

void write_rejection_csv(std::ostream& out, const RejectionTable& table);
void write_rejection_json(std::ostream& out, const RejectionTable& table);

}  // namespace evstudy
