// Lahman-format ingestion: Batting and People CSVs joined on player_id,
// OPS computation, June-30 age adjustment, plate-appearance and debut-year
// filters, and assembly of the transformed CareerPanel.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "agecurve/core.hpp"

namespace agecurve {

struct BattingRow {
  std::string player_id;
  int season = 0;
  int stint = 1;
  long long ab = 0, h = 0, doubles = 0, triples = 0, hr = 0;
  long long bb = 0, hbp = 0, sf = 0, sh = 0;
};

struct PersonRow {
  std::string player_id;
  int birth_year = 0;
  int birth_month = 0;  // 1..12
  int debut_year = 0;
};

// Accumulates skipped-row and excluded-player reasons; never fatal.
struct IngestLog {
  std::vector<std::string> messages;
  void note(std::string msg) { messages.push_back(std::move(msg)); }
};

// OBP + SLG from the standard component definitions. Requires AB > 0 and a
// positive OBP denominator; throws std::domain_error otherwise (callers
// exclude the row and log).
double compute_ops(const BattingRow& row);

// Age on June 30 of the season: season - birth_year, minus one for players
// born in July or later.
int adjusted_age(const PersonRow& person, int season);

// Plate appearances are not a Lahman column; AB+BB+HBP+SF+SH.
long long plate_appearances(const BattingRow& row);

std::vector<BattingRow> read_batting_csv(std::istream& in, IngestLog& log);
std::vector<BattingRow> read_batting_csv(const std::filesystem::path& path, IngestLog& log);
std::vector<PersonRow> read_people_csv(std::istream& in, IngestLog& log);
std::vector<PersonRow> read_people_csv(const std::filesystem::path& path, IngestLog& log);

// Joins batting and people on player_id, aggregates multi-stint seasons by
// summing counting stats, marks a cell OBSERVED iff that season's PA >=
// min_pa, stores transformed OPS, and drops players with no observed cell in
// the grid or a debut before min_debut. Throws when no player survives.
CareerPanel build_panel(const std::vector<BattingRow>& batting,
                        const std::vector<PersonRow>& people, const AgeGrid& grid, int min_pa,
                        int min_debut, const TransformSpec& spec, IngestLog* log = nullptr);

}  // namespace agecurve
