#pragma once

#include <string>
#include <vector>

#include "rlgaf/sequence.hpp"
#include "rlgaf/tasks.hpp"

namespace rlgaf {

enum class Tier { Good, Average, Bad };

int tier_score(Tier tier);  // Good +1, Average 0, Bad -1
std::string tier_name(Tier tier);
Tier tier_from_name(const std::string& name);

struct RatingRecord {
  std::string prompt_id;
  std::string system_id;
  Tier tier = Tier::Average;
  std::string rater;  // "human" | "oracle" | "judge"
};

int improvement(Tier tuned, Tier base);

// Sum of per-prompt improvements of system_id over base_id, paired by
// (prompt_id, rater). Throws IncompletePairError naming unpaired prompts, or
// if the shared set is empty.
int aggregate(const std::vector<RatingRecord>& records,
              const std::string& system_id, const std::string& base_id);

struct HistogramRow {
  std::string key;
  int count = 0;
};

// Counts per (system_id, tier), rows sorted by key.
std::vector<HistogramRow> tier_histogram(
    const std::vector<RatingRecord>& records);

// Counts per improvement value of system_id over base_id, rows sorted by the
// numeric improvement (-2..+2).
std::vector<HistogramRow> improvement_histogram(
    const std::vector<RatingRecord>& records, const std::string& system_id,
    const std::string& base_id);

// Desk-scale rater: the task's own label mapped onto the rubric. Target-class
// responses are Good, unclear ones Average, anything else Bad.
Tier oracle_rate(const TaskSpec& task, const Sequence& seq);

// JSON-lines persistence, one record per line with fields exactly
// {prompt_id, system_id, tier, rater}.
std::string rating_to_json(const RatingRecord& record);
RatingRecord rating_from_json(const std::string& line);
std::vector<RatingRecord> read_ratings(const std::string& path);
void write_ratings(const std::vector<RatingRecord>& records,
                   const std::string& path);

}  // namespace rlgaf
