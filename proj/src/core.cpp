#include "agecurve/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "agecurve/csv.hpp"

namespace agecurve {

namespace {
constexpr double kInverseTol = 1e-9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

void AgeGrid::validate() const {
  if (min_age >= max_age) {
    throw std::invalid_argument("AgeGrid: min_age must be < max_age");
  }
}

void TransformSpec::validate() const {
  if (!(scale_min < scale_max)) {
    throw std::invalid_argument("TransformSpec: scale_min must be < scale_max");
  }
}

double transform_ops(double ops, const TransformSpec& spec) {
  spec.validate();
  if (!std::isfinite(ops)) {
    throw std::invalid_argument("transform_ops: non-finite input");
  }
  const double clamped = std::clamp(ops, spec.scale_min, spec.scale_max);
  const double u = (clamped - spec.scale_min) / (spec.scale_max - spec.scale_min);
  return std::asin(std::sqrt(u));
}

double inverse_transform_ops(double y, const TransformSpec& spec) {
  spec.validate();
  if (!std::isfinite(y) || y < -kInverseTol || y > kHalfPi + kInverseTol) {
    throw std::invalid_argument("inverse_transform_ops: input outside [0, pi/2]");
  }
  const double yc = std::clamp(y, 0.0, kHalfPi);
  const double s = std::sin(yc);
  return spec.scale_min + (spec.scale_max - spec.scale_min) * s * s;
}

CareerPanel::CareerPanel(std::vector<std::string> players, AgeGrid grid)
    : players_(std::move(players)), grid_(grid) {
  grid_.validate();
  if (players_.empty()) {
    throw std::invalid_argument("CareerPanel: at least one player required");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : players_) {
    if (!seen.insert(id).second) {
      throw std::invalid_argument("CareerPanel: duplicate player_id " + id);
    }
  }
  const size_t n = players_.size() * static_cast<size_t>(grid_.size());
  values_.assign(n, kNaN);
  mask_.assign(n, 0);
}

size_t CareerPanel::flat(int p, int age_idx) const {
  if (p < 0 || p >= n_players() || age_idx < 0 || age_idx >= grid_.size()) {
    throw std::out_of_range("CareerPanel: cell index out of range");
  }
  return static_cast<size_t>(p) * static_cast<size_t>(grid_.size()) + static_cast<size_t>(age_idx);
}

void CareerPanel::set_observed(int p, int age_idx, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("CareerPanel: observed cells must hold finite values");
  }
  const size_t i = flat(p, age_idx);
  values_[i] = value;
  mask_[i] = 1;
}

void CareerPanel::set_missing(int p, int age_idx) {
  const size_t i = flat(p, age_idx);
  values_[i] = kNaN;
  mask_[i] = 0;
}

long long CareerPanel::n_observed() const {
  long long n = 0;
  for (uint8_t m : mask_) n += m;
  return n;
}

PanelSummary panel_summary(const CareerPanel& panel) {
  PanelSummary s;
  s.n_players = panel.n_players();
  s.n_observed = panel.n_observed();
  s.missing_frac_by_age.assign(static_cast<size_t>(panel.grid().size()), 0.0);
  for (int a = 0; a < panel.grid().size(); ++a) {
    int missing = 0;
    for (int p = 0; p < panel.n_players(); ++p) {
      if (!panel.observed(p, a)) ++missing;
    }
    s.missing_frac_by_age[static_cast<size_t>(a)] =
        static_cast<double>(missing) / static_cast<double>(panel.n_players());
  }
  return s;
}

void write_panel_csv(const CareerPanel& panel, std::ostream& out) {
  out << "player_id,age,value,observed\n";
  for (int p = 0; p < panel.n_players(); ++p) {
    for (int a = 0; a < panel.grid().size(); ++a) {
      out << csv::escape(panel.player_id(p)) << ',' << panel.grid().age_at(a) << ',';
      if (panel.observed(p, a)) out << csv::format_double(panel.value(p, a));
      out << ',' << (panel.observed(p, a) ? 1 : 0) << '\n';
    }
  }
}

void write_panel_csv(const CareerPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_panel_csv(panel, out);
}

CareerPanel read_panel_csv(std::istream& in) {
  csv::Table table(in);
  for (const char* col : {"player_id", "age", "value", "observed"}) {
    if (!table.has_column(col)) {
      throw std::runtime_error(std::string("panel CSV missing column ") + col);
    }
  }
  struct Cell {
    int age;
    double value;
    bool observed;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Cell>> cells;
  std::set<int> ages;
  for (int r = 0; r < table.n_rows(); ++r) {
    const std::string& id = table.cell(r, "player_id");
    auto age = csv::parse_int(table.cell(r, "age"));
    auto obs = csv::parse_int(table.cell(r, "observed"));
    if (id.empty() || !age || !obs || (*obs != 0 && *obs != 1)) {
      throw std::runtime_error("panel CSV: malformed row " + std::to_string(r + 2));
    }
    double value = kNaN;
    if (*obs == 1) {
      auto v = csv::parse_real(table.cell(r, "value"));
      if (!v) throw std::runtime_error("panel CSV: observed cell without value, row " + std::to_string(r + 2));
      value = *v;
    }
    if (cells.find(id) == cells.end()) order.push_back(id);
    cells[id].push_back({static_cast<int>(*age), value, *obs == 1});
    ages.insert(static_cast<int>(*age));
  }
  if (order.empty()) throw std::runtime_error("panel CSV: no rows");
  AgeGrid grid{*ages.begin(), *ages.rbegin()};
  grid.validate();
  CareerPanel panel(order, grid);
  for (int p = 0; p < panel.n_players(); ++p) {
    const auto& pc = cells[panel.player_id(p)];
    if (static_cast<int>(pc.size()) != grid.size()) {
      throw std::runtime_error("panel CSV: player " + panel.player_id(p) + " is not on the full age grid");
    }
    std::vector<bool> seen(static_cast<size_t>(grid.size()), false);
    for (const Cell& c : pc) {
      int idx = grid.index_of(c.age);
      if (idx < 0) throw std::runtime_error("panel CSV: age outside grid");
      if (seen[static_cast<size_t>(idx)]) {
        throw std::runtime_error("panel CSV: duplicate cell for " + panel.player_id(p) +
                                 " at age " + std::to_string(c.age));
      }
      seen[static_cast<size_t>(idx)] = true;
      if (c.observed) panel.set_observed(p, idx, c.value);
    }
  }
  return panel;
}

CareerPanel read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return read_panel_csv(in);
}

}  // namespace agecurve
