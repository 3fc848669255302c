// Shared domain types: the age grid, player seasons, the player x age career
// panel with its observed/missing mask, and the response-scale transforms.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace agecurve {

inline constexpr double kHalfPi = 1.57079632679489661923;

// Inclusive career window shared by every player in a panel.
struct AgeGrid {
  int min_age = 21;
  int max_age = 39;

  void validate() const;
  int size() const { return max_age - min_age + 1; }
  int age_at(int idx) const { return min_age + idx; }
  bool contains(int age) const { return age >= min_age && age <= max_age; }
  // -1 when the age lies outside the grid.
  int index_of(int age) const { return contains(age) ? age - min_age : -1; }
  bool operator==(const AgeGrid&) const = default;
};

// Affine min-max scaling applied to OPS before the arcsine transform. The
// spec in force is persisted next to every panel so transforms round-trip.
struct TransformSpec {
  double scale_min = 0.0;
  double scale_max = 1.6;

  void validate() const;
  bool operator==(const TransformSpec&) const = default;
};

// y = asin(sqrt((ops - lo) / (hi - lo))), ops clamped into [lo, hi].
// Monotone nondecreasing with range [0, pi/2].
double transform_ops(double ops, const TransformSpec& spec);

// Exact inverse on [0, pi/2]; inputs outside by more than 1e-9 are rejected,
// within tolerance they are clamped.
double inverse_transform_ops(double y, const TransformSpec& spec);

// One observed player-season row.
struct PlayerSeason {
  std::string player_id;
  int season = 0;
  int age = 0;
  long long pa = 0;
  double ops = 0.0;
};

// Rectangular player x age grid of transformed responses plus a mask.
// Missing cells hold NaN. Immutable by convention once a producer returns it.
class CareerPanel {
 public:
  CareerPanel(std::vector<std::string> players, AgeGrid grid);

  int n_players() const { return static_cast<int>(players_.size()); }
  const AgeGrid& grid() const { return grid_; }
  const std::vector<std::string>& players() const { return players_; }
  const std::string& player_id(int p) const { return players_[static_cast<size_t>(p)]; }

  double value(int p, int age_idx) const { return values_[flat(p, age_idx)]; }
  bool observed(int p, int age_idx) const { return mask_[flat(p, age_idx)] != 0; }

  void set_observed(int p, int age_idx, double value);
  void set_missing(int p, int age_idx);

  long long n_observed() const;
  long long n_missing() const { return static_cast<long long>(mask_.size()) - n_observed(); }
  bool fully_observed() const { return n_missing() == 0; }

 private:
  size_t flat(int p, int age_idx) const;

  std::vector<std::string> players_;
  AgeGrid grid_;
  std::vector<double> values_;
  std::vector<uint8_t> mask_;
};

struct PanelSummary {
  int n_players = 0;
  long long n_observed = 0;
  std::vector<double> missing_frac_by_age;
};

PanelSummary panel_summary(const CareerPanel& panel);

// Long-format CSV `player_id,age,value,observed`, header, LF endings; missing
// cells carry an empty value field.
void write_panel_csv(const CareerPanel& panel, std::ostream& out);
void write_panel_csv(const CareerPanel& panel, const std::filesystem::path& path);
CareerPanel read_panel_csv(std::istream& in);
CareerPanel read_panel_csv(const std::filesystem::path& path);

}  // namespace agecurve
