#include "agecurve/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "agecurve/csv.hpp"

namespace agecurve {

double compute_ops(const BattingRow& row) {
  const long long obp_denom = row.ab + row.bb + row.hbp + row.sf;
  if (row.ab <= 0 || obp_denom <= 0) {
    throw std::domain_error("compute_ops: zero denominator for " + row.player_id);
  }
  const double obp = static_cast<double>(row.h + row.bb + row.hbp) / static_cast<double>(obp_denom);
  const long long singles = row.h - row.doubles - row.triples - row.hr;
  const long long tb = singles + 2 * row.doubles + 3 * row.triples + 4 * row.hr;
  const double slg = static_cast<double>(tb) / static_cast<double>(row.ab);
  return obp + slg;
}

int adjusted_age(const PersonRow& person, int season) {
  if (season < person.birth_year) {
    throw std::invalid_argument("adjusted_age: season precedes birth year");
  }
  return season - person.birth_year - (person.birth_month > 6 ? 1 : 0);
}

long long plate_appearances(const BattingRow& row) {
  return row.ab + row.bb + row.hbp + row.sf + row.sh;
}

namespace {

// Missing HBP/SF/SH in early-era rows parse as 0; the other counting
// columns are required.
std::optional<long long> count_or_zero(const std::string& s) {
  if (s.empty()) return 0;
  auto v = csv::parse_int(s);
  if (v && *v >= 0) return v;
  return std::nullopt;
}

std::optional<long long> required_count(const std::string& s) {
  auto v = csv::parse_int(s);
  if (v && *v >= 0) return v;
  return std::nullopt;
}

}  // namespace

std::vector<BattingRow> read_batting_csv(std::istream& in, IngestLog& log) {
  csv::Table table(in);
  for (const char* col : {"playerID", "yearID", "AB", "H", "2B", "3B", "HR", "BB"}) {
    if (!table.has_column(col)) {
      throw std::runtime_error(std::string("Batting CSV missing column ") + col);
    }
  }
  std::vector<BattingRow> rows;
  rows.reserve(static_cast<size_t>(table.n_rows()));
  for (int r = 0; r < table.n_rows(); ++r) {
    BattingRow row;
    row.player_id = table.cell(r, "playerID");
    auto year = csv::parse_int(table.cell(r, "yearID"));
    auto stint = csv::parse_int(table.cell(r, "stint"));
    auto ab = required_count(table.cell(r, "AB"));
    auto h = required_count(table.cell(r, "H"));
    auto d2 = required_count(table.cell(r, "2B"));
    auto d3 = required_count(table.cell(r, "3B"));
    auto hr = required_count(table.cell(r, "HR"));
    auto bb = required_count(table.cell(r, "BB"));
    auto hbp = count_or_zero(table.cell(r, "HBP"));
    auto sf = count_or_zero(table.cell(r, "SF"));
    auto sh = count_or_zero(table.cell(r, "SH"));
    if (row.player_id.empty() || !year || !ab || !h || !d2 || !d3 || !hr || !bb || !hbp || !sf ||
        !sh) {
      log.note("Batting row " + std::to_string(r + 2) + " malformed, skipped");
      continue;
    }
    if (*h < *d2 + *d3 + *hr) {
      log.note("Batting row " + std::to_string(r + 2) + " has H < 2B+3B+HR, skipped");
      continue;
    }
    row.season = static_cast<int>(*year);
    row.stint = stint ? static_cast<int>(*stint) : 1;
    row.ab = *ab;
    row.h = *h;
    row.doubles = *d2;
    row.triples = *d3;
    row.hr = *hr;
    row.bb = *bb;
    row.hbp = *hbp;
    row.sf = *sf;
    row.sh = *sh;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<BattingRow> read_batting_csv(const std::filesystem::path& path, IngestLog& log) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return read_batting_csv(in, log);
}

std::vector<PersonRow> read_people_csv(std::istream& in, IngestLog& log) {
  csv::Table table(in);
  for (const char* col : {"playerID", "birthYear", "birthMonth", "debut"}) {
    if (!table.has_column(col)) {
      throw std::runtime_error(std::string("People CSV missing column ") + col);
    }
  }
  std::vector<PersonRow> rows;
  rows.reserve(static_cast<size_t>(table.n_rows()));
  for (int r = 0; r < table.n_rows(); ++r) {
    PersonRow row;
    row.player_id = table.cell(r, "playerID");
    auto birth_year = csv::parse_int(table.cell(r, "birthYear"));
    auto birth_month = csv::parse_int(table.cell(r, "birthMonth"));
    const std::string& debut = table.cell(r, "debut");
    if (row.player_id.empty() || !birth_year || !birth_month || *birth_month < 1 ||
        *birth_month > 12) {
      log.note("People row for '" + row.player_id + "' missing birth data, player excluded");
      continue;
    }
    // debut is a date string; the year prefix is all we need
    auto debut_year = debut.size() >= 4 ? csv::parse_int(debut.substr(0, 4)) : std::nullopt;
    if (!debut_year) {
      log.note("People row for '" + row.player_id + "' missing debut date, player excluded");
      continue;
    }
    row.birth_year = static_cast<int>(*birth_year);
    row.birth_month = static_cast<int>(*birth_month);
    row.debut_year = static_cast<int>(*debut_year);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PersonRow> read_people_csv(const std::filesystem::path& path, IngestLog& log) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return read_people_csv(in, log);
}

CareerPanel build_panel(const std::vector<BattingRow>& batting,
                        const std::vector<PersonRow>& people, const AgeGrid& grid, int min_pa,
                        int min_debut, const TransformSpec& spec, IngestLog* log) {
  grid.validate();
  spec.validate();
  IngestLog local;
  IngestLog& lg = log ? *log : local;

  std::unordered_map<std::string, const PersonRow*> person_by_id;
  for (const PersonRow& p : people) person_by_id.emplace(p.player_id, &p);

  // Aggregate stints: same player and season summed before the PA filter.
  std::map<std::pair<std::string, int>, BattingRow> seasons;
  for (const BattingRow& row : batting) {
    auto key = std::make_pair(row.player_id, row.season);
    auto it = seasons.find(key);
    if (it == seasons.end()) {
      seasons.emplace(key, row);
    } else {
      BattingRow& agg = it->second;
      agg.ab += row.ab;
      agg.h += row.h;
      agg.doubles += row.doubles;
      agg.triples += row.triples;
      agg.hr += row.hr;
      agg.bb += row.bb;
      agg.hbp += row.hbp;
      agg.sf += row.sf;
      agg.sh += row.sh;
    }
  }

  // player -> (age index -> transformed OPS), insertion-ordered by map key
  std::map<std::string, std::vector<std::pair<int, double>>> observed;
  for (const auto& [key, row] : seasons) {
    auto pit = person_by_id.find(key.first);
    if (pit == person_by_id.end()) {
      lg.note("player '" + key.first + "' absent from People, seasons dropped");
      continue;
    }
    const PersonRow& person = *pit->second;
    if (person.debut_year < min_debut) continue;
    if (plate_appearances(row) < min_pa) continue;
    const int age = adjusted_age(person, row.season);
    const int idx = grid.index_of(age);
    if (idx < 0) continue;
    double ops;
    try {
      ops = compute_ops(row);
    } catch (const std::domain_error&) {
      lg.note("season " + std::to_string(key.second) + " for '" + key.first +
              "' has a zero OPS denominator, excluded");
      continue;
    }
    observed[key.first].emplace_back(idx, transform_ops(ops, spec));
  }

  std::vector<std::string> ids;
  ids.reserve(observed.size());
  for (const auto& [id, cells] : observed) {
    if (!cells.empty()) ids.push_back(id);
  }
  if (ids.empty()) {
    throw std::runtime_error("build_panel: join produced zero players");
  }
  CareerPanel panel(ids, grid);
  for (int p = 0; p < panel.n_players(); ++p) {
    for (const auto& [idx, value] : observed[panel.player_id(p)]) {
      panel.set_observed(p, idx, value);
    }
  }
  return panel;
}

}  // namespace agecurve
