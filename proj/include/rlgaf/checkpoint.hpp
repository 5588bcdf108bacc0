#pragma once

#include <cstdint>
#include <string>

#include "rlgaf/disc_model.hpp"
#include "rlgaf/gen_model.hpp"

namespace rlgaf {

// On-disk model snapshot. Layout (all integers and reals little-endian):
// magic "RLGF", version u32, seed u64, vocab/embed/hidden/max_response/
// max_prompt u32, arch u32, terminator i32 (-1 = none), tensor count u32,
// then per tensor: name length u32, name bytes, rank u32, dims u32 each,
// values f64 in column-major order.
struct CheckpointData {
  std::uint64_t seed = 0;
  ModelDims dims;
  Arch arch = Arch::RecurrentCell;
  int terminator = -1;
  ParamStore params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const CheckpointData& data, const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

void save_gen_checkpoint(const GenModel& model, std::uint64_t seed,
                         const std::string& path);
GenModel load_gen_checkpoint(const std::string& path);

void save_disc_checkpoint(const DiscModel& model, std::uint64_t seed,
                          const std::string& path);
DiscModel load_disc_checkpoint(const std::string& path);

}  // namespace rlgaf
