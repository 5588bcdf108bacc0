#include "rlgaf/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "json.hpp"
#include "rlgaf/errors.hpp"

namespace rlgaf {

int tier_score(Tier tier) {
  switch (tier) {
    case Tier::Good: return 1;
    case Tier::Average: return 0;
    case Tier::Bad: return -1;
  }
  throw StructuralError("unknown tier");
}

std::string tier_name(Tier tier) {
  switch (tier) {
    case Tier::Good: return "good";
    case Tier::Average: return "average";
    case Tier::Bad: return "bad";
  }
  throw StructuralError("unknown tier");
}

Tier tier_from_name(const std::string& name) {
  if (name == "good") return Tier::Good;
  if (name == "average") return Tier::Average;
  if (name == "bad") return Tier::Bad;
  throw InvalidInputError("unknown tier '" + name + "'");
}

int improvement(Tier tuned, Tier base) {
  return tier_score(tuned) - tier_score(base);
}

namespace {

// (prompt_id, rater) -> tier, for one system
std::map<std::pair<std::string, std::string>, Tier> ratings_for(
    const std::vector<RatingRecord>& records, const std::string& system_id) {
  std::map<std::pair<std::string, std::string>, Tier> out;
  for (const RatingRecord& r : records)
    if (r.system_id == system_id) out[{r.prompt_id, r.rater}] = r.tier;
  return out;
}

}  // namespace

int aggregate(const std::vector<RatingRecord>& records,
              const std::string& system_id, const std::string& base_id) {
  const auto tuned = ratings_for(records, system_id);
  const auto base = ratings_for(records, base_id);
  std::vector<std::string> missing;
  for (const auto& [key, tier] : tuned)
    if (!base.count(key)) missing.push_back(key.first);
  for (const auto& [key, tier] : base)
    if (!tuned.count(key)) missing.push_back(key.first);
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string joined;
    for (const std::string& id : missing) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    throw IncompletePairError("prompts missing a counterpart rating: " + joined,
                              std::move(missing));
  }
  if (tuned.empty())
    throw IncompletePairError("no prompts rated for both systems", {});
  int total = 0;
  for (const auto& [key, tier] : tuned)
    total += improvement(tier, base.at(key));
  return total;
}

std::vector<HistogramRow> tier_histogram(
    const std::vector<RatingRecord>& records) {
  std::map<std::string, int> counts;
  for (const RatingRecord& r : records)
    ++counts[r.system_id + "/" + tier_name(r.tier)];
  std::vector<HistogramRow> rows;
  for (const auto& [key, count] : counts) rows.push_back({key, count});
  return rows;
}

std::vector<HistogramRow> improvement_histogram(
    const std::vector<RatingRecord>& records, const std::string& system_id,
    const std::string& base_id) {
  const auto tuned = ratings_for(records, system_id);
  const auto base = ratings_for(records, base_id);
  std::map<int, int> counts;
  for (const auto& [key, tier] : tuned) {
    auto it = base.find(key);
    if (it != base.end()) ++counts[improvement(tier, it->second)];
  }
  std::vector<HistogramRow> rows;
  for (const auto& [value, count] : counts) {
    const std::string key =
        (value > 0 ? "+" : "") + std::to_string(value);
    rows.push_back({key, count});
  }
  return rows;
}

Tier oracle_rate(const TaskSpec& task, const Sequence& seq) {
  if (!task.oracle) throw InvalidInputError("task has no oracle");
  const OracleLabel label = task.oracle(seq);
  if (label == task.target) return Tier::Good;
  if (label == OracleLabel::Unclear) return Tier::Average;
  return Tier::Bad;
}

std::string rating_to_json(const RatingRecord& record) {
  nlohmann::json obj;
  obj["prompt_id"] = record.prompt_id;
  obj["system_id"] = record.system_id;
  obj["tier"] = tier_name(record.tier);
  obj["rater"] = record.rater;
  return obj.dump();
}

RatingRecord rating_from_json(const std::string& line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad rating record: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError("rating record must be an object");
  RatingRecord record;
  try {
    record.prompt_id = obj.at("prompt_id").get<std::string>();
    record.system_id = obj.at("system_id").get<std::string>();
    record.tier = tier_from_name(obj.at("tier").get<std::string>());
    record.rater = obj.at("rater").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad rating record: ") + e.what());
  }
  return record;
}

std::vector<RatingRecord> read_ratings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open ratings file: " + path);
  std::vector<RatingRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(rating_from_json(line));
  }
  return records;
}

void write_ratings(const std::vector<RatingRecord>& records,
                   const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw TransportError("cannot open ratings file for writing: " + path);
  for (const RatingRecord& record : records) out << rating_to_json(record) << '\n';
  out.flush();
  if (!out) throw TransportError("ratings write failed: " + path);
}

}  // namespace rlgaf
