#include "rlgaf/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

#include "rlgaf/errors.hpp"

namespace rlgaf {

namespace {

constexpr char kMagic[4] = {'R', 'L', 'G', 'F'};

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw TransportError("checkpoint write failed");
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(out, bytes, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(out, bytes, 8);
}

void write_i32(std::ostream& out, std::int32_t v) {
  write_u32(out, static_cast<std::uint32_t>(v));
}

void write_f64(std::ostream& out, double v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

void read_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw FormatError("checkpoint file truncated");
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  read_bytes(in, bytes, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  read_bytes(in, bytes, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

std::int32_t read_i32(std::istream& in) {
  return static_cast<std::int32_t>(read_u32(in));
}

double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_u64(in));
}

}  // namespace

void save_checkpoint(const CheckpointData& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TransportError("cannot open checkpoint for writing: " + path);
  write_bytes(out, kMagic, 4);
  write_u32(out, kCheckpointVersion);
  write_u64(out, data.seed);
  write_u32(out, static_cast<std::uint32_t>(data.dims.vocab));
  write_u32(out, static_cast<std::uint32_t>(data.dims.embed));
  write_u32(out, static_cast<std::uint32_t>(data.dims.hidden));
  write_u32(out, static_cast<std::uint32_t>(data.dims.max_response));
  write_u32(out, static_cast<std::uint32_t>(data.dims.max_prompt));
  write_u32(out, data.arch == Arch::RecurrentCell ? 0u : 1u);
  write_i32(out, data.terminator);
  write_u32(out, static_cast<std::uint32_t>(data.params.size()));
  for (const auto& [name, entry] : data.params) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    write_bytes(out, name.data(), name.size());
    write_u32(out, static_cast<std::uint32_t>(entry.shape.size()));
    for (std::uint32_t dim : entry.shape) write_u32(out, dim);
    const double* values = entry.values.data();
    for (Eigen::Index i = 0; i < entry.values.size(); ++i)
      write_f64(out, values[i]);
  }
  out.flush();
  if (!out) throw TransportError("checkpoint flush failed");
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open checkpoint: " + path);
  char magic[4];
  read_bytes(in, magic, 4);
  if (!std::equal(magic, magic + 4, kMagic))
    throw FormatError("bad checkpoint magic");
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  CheckpointData data;
  data.seed = read_u64(in);
  data.dims.vocab = static_cast<int>(read_u32(in));
  data.dims.embed = static_cast<int>(read_u32(in));
  data.dims.hidden = static_cast<int>(read_u32(in));
  data.dims.max_response = static_cast<int>(read_u32(in));
  data.dims.max_prompt = static_cast<int>(read_u32(in));
  const std::uint32_t arch = read_u32(in);
  if (arch > 1) throw FormatError("unknown architecture tag");
  data.arch = arch == 0 ? Arch::RecurrentCell : Arch::AttentionBlock;
  data.terminator = static_cast<int>(read_i32(in));
  const std::uint32_t count = read_u32(in);
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t name_len = read_u32(in);
    if (name_len > 4096) throw FormatError("implausible tensor name length");
    std::string name(name_len, '\0');
    read_bytes(in, name.data(), name_len);
    const std::uint32_t rank = read_u32(in);
    if (rank < 1 || rank > 2) throw FormatError("tensor rank must be 1 or 2");
    std::vector<std::uint32_t> shape(rank);
    for (std::uint32_t& dim : shape) dim = read_u32(in);
    Matrix values = matrix_from_shape(shape);
    double* out_values = values.data();
    for (Eigen::Index i = 0; i < values.size(); ++i)
      out_values[i] = read_f64(in);
    try {
      data.params.add(name, std::move(shape), std::move(values));
    } catch (const Error& e) {
      throw FormatError("bad tensor table: " + std::string(e.what()));
    }
  }
  return data;
}

void save_gen_checkpoint(const GenModel& model, std::uint64_t seed,
                         const std::string& path) {
  CheckpointData data;
  data.seed = seed;
  data.dims = model.dims;
  data.arch = model.arch;
  data.terminator = model.terminator ? *model.terminator : -1;
  data.params = model.params;
  save_checkpoint(data, path);
}

GenModel load_gen_checkpoint(const std::string& path) {
  CheckpointData data = load_checkpoint(path);
  GenModel model;
  model.dims = data.dims;
  model.arch = data.arch;
  if (data.terminator >= 0) model.terminator = data.terminator;
  model.params = std::move(data.params);
  if (!model.params.has("proj_w") || !model.params.has("embed"))
    throw FormatError("checkpoint does not hold a generator");
  return model;
}

void save_disc_checkpoint(const DiscModel& model, std::uint64_t seed,
                          const std::string& path) {
  CheckpointData data;
  data.seed = seed;
  data.dims = model.dims;
  data.arch = model.arch;
  data.terminator = -1;
  data.params = model.params;
  save_checkpoint(data, path);
}

DiscModel load_disc_checkpoint(const std::string& path) {
  CheckpointData data = load_checkpoint(path);
  DiscModel model;
  model.dims = data.dims;
  model.arch = data.arch;
  model.params = std::move(data.params);
  if (!model.params.has("head_w") || !model.params.has("embed"))
    throw FormatError("checkpoint does not hold a discriminator");
  return model;
}

}  // namespace rlgaf
