#include "rlgaf/metrics.hpp"

#include "json.hpp"
#include "rlgaf/errors.hpp"

namespace rlgaf {

namespace {

const char* kPhases[] = {"disc", "gen", "pretrain", "eval"};

void check_phase(const std::string& phase) {
  for (const char* p : kPhases)
    if (phase == p) return;
  throw InvalidInputError("unknown metrics phase '" + phase + "'");
}

}  // namespace

std::string metrics_to_json(const MetricsRecord& record) {
  check_phase(record.phase);
  nlohmann::json obj;
  obj["step"] = record.step;
  obj["phase"] = record.phase;
  if (record.loss_g) obj["loss_g"] = *record.loss_g;
  if (record.loss_d_real) obj["loss_d_real"] = *record.loss_d_real;
  if (record.loss_d_fake) obj["loss_d_fake"] = *record.loss_d_fake;
  if (record.reward_mean) obj["reward_mean"] = *record.reward_mean;
  if (record.disc_acc) obj["disc_acc"] = *record.disc_acc;
  if (record.kl_mean) obj["kl_mean"] = *record.kl_mean;
  if (record.collapse_flag) obj["collapse_flag"] = *record.collapse_flag;
  return obj.dump();
}

MetricsRecord metrics_from_json(const std::string& line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad metrics line: ") + e.what());
  }
  MetricsRecord record;
  try {
    record.step = obj.at("step").get<long>();
    record.phase = obj.at("phase").get<std::string>();
    if (obj.contains("loss_g")) record.loss_g = obj["loss_g"].get<double>();
    if (obj.contains("loss_d_real"))
      record.loss_d_real = obj["loss_d_real"].get<double>();
    if (obj.contains("loss_d_fake"))
      record.loss_d_fake = obj["loss_d_fake"].get<double>();
    if (obj.contains("reward_mean"))
      record.reward_mean = obj["reward_mean"].get<double>();
    if (obj.contains("disc_acc")) record.disc_acc = obj["disc_acc"].get<double>();
    if (obj.contains("kl_mean")) record.kl_mean = obj["kl_mean"].get<double>();
    if (obj.contains("collapse_flag"))
      record.collapse_flag = obj["collapse_flag"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad metrics field: ") + e.what());
  }
  check_phase(record.phase);
  return record;
}

std::vector<MetricsRecord> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open metrics file: " + path);
  std::vector<MetricsRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(metrics_from_json(line));
  }
  return records;
}

MetricsWriter::MetricsWriter(const std::string& path)
    : out_(path, std::ios::app), path_(path) {
  if (!out_) throw TransportError("cannot open metrics file: " + path);
}

void MetricsWriter::append(const MetricsRecord& record) {
  auto it = last_step_.find(record.phase);
  if (it != last_step_.end() && record.step < it->second)
    throw StructuralError("metrics steps must be non-decreasing per phase");
  const std::string line = metrics_to_json(record);
  out_ << line << '\n';
  if (!out_) throw TransportError("metrics write failed: " + path_);
  last_step_[record.phase] = record.step;
}

void MetricsWriter::flush() {
  out_.flush();
  if (!out_) throw TransportError("metrics flush failed: " + path_);
}

}  // namespace rlgaf
