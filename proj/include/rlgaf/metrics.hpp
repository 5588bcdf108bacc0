#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rlgaf {

// One training-curve sample. Fields that do not apply to a phase stay unset
// and are omitted from the serialized line.
struct MetricsRecord {
  long step = 0;
  std::string phase;  // disc | gen | pretrain | eval
  std::optional<double> loss_g;
  std::optional<double> loss_d_real;
  std::optional<double> loss_d_fake;
  std::optional<double> reward_mean;
  std::optional<double> disc_acc;
  std::optional<double> kl_mean;
  std::optional<bool> collapse_flag;
};

// Compact JSON object with lexicographically sorted keys, no trailing newline.
std::string metrics_to_json(const MetricsRecord& record);
MetricsRecord metrics_from_json(const std::string& line);

std::vector<MetricsRecord> read_metrics(const std::string& path);

// Appends one JSON line per record; enforces non-decreasing steps per phase.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);

  void append(const MetricsRecord& record);
  void flush();

 private:
  std::ofstream out_;
  std::string path_;
  std::map<std::string, long> last_step_;
};

}  // namespace rlgaf
