#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rlgaf/checkpoint.hpp"
#include "rlgaf/errors.hpp"

using namespace rlgaf;

namespace {

ModelDims small_dims() {
  ModelDims dims;
  dims.vocab = 7;
  dims.embed = 3;
  dims.hidden = 5;
  dims.max_response = 4;
  dims.max_prompt = 6;
  return dims;
}

GenModel fresh_gen(Arch arch, std::uint64_t seed, bool with_terminator = true) {
  RngFactory factory(seed);
  RngStream rng = factory.stream("gen-init");
  return make_gen_model(small_dims(), arch, rng, with_terminator);
}

DiscModel fresh_disc(Arch arch, std::uint64_t seed) {
  RngFactory factory(seed);
  RngStream rng = factory.stream("disc-init");
  return make_disc_model(small_dims(), arch, rng);
}

// Owns a path in the system temp directory; the file need not exist yet.
class TempPath {
 public:
  TempPath() {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("rlgaf_ckpt_" + std::to_string(++counter) + "_" +
              std::to_string(::getpid()) + ".bin"))
                .string();
  }
  ~TempPath() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("generator checkpoint round trips bitwise") {
  for (Arch arch : {Arch::RecurrentCell, Arch::AttentionBlock}) {
    CAPTURE(static_cast<int>(arch));
    GenModel model = fresh_gen(arch, 21);
    // Values that only survive if raw f64 bits are preserved.
    model.params.at("proj_b")(0, 0) = -0.0;
    model.params.at("proj_b")(1, 0) = 1.0 / 3.0;
    model.params.at("proj_b")(2, 0) = 5e-324;

    TempPath file;
    save_gen_checkpoint(model, 9001, file.path());
    const GenModel back = load_gen_checkpoint(file.path());

    CHECK(back.dims.vocab == model.dims.vocab);
    CHECK(back.dims.embed == model.dims.embed);
    CHECK(back.dims.hidden == model.dims.hidden);
    CHECK(back.dims.max_response == model.dims.max_response);
    CHECK(back.dims.max_prompt == model.dims.max_prompt);
    CHECK(back.arch == model.arch);
    REQUIRE(back.terminator.has_value());
    CHECK(*back.terminator == *model.terminator);
    CHECK(back.params.equals(model.params));
    CHECK(std::signbit(back.params.at("proj_b")(0, 0)));
    CHECK(load_checkpoint(file.path()).seed == 9001);
  }
}

TEST_CASE("generator without terminator stays terminator-free") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 4, false);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  CHECK_FALSE(load_gen_checkpoint(file.path()).terminator.has_value());
}

TEST_CASE("discriminator checkpoint round trips bitwise") {
  for (Arch arch : {Arch::RecurrentCell, Arch::AttentionBlock}) {
    CAPTURE(static_cast<int>(arch));
    const DiscModel model = fresh_disc(arch, 33);
    TempPath file;
    save_disc_checkpoint(model, 77, file.path());
    const DiscModel back = load_disc_checkpoint(file.path());
    CHECK(back.dims.vocab == model.dims.vocab);
    CHECK(back.dims.hidden == model.dims.hidden);
    CHECK(back.arch == model.arch);
    CHECK(back.params.equals(model.params));
  }
}

TEST_CASE("rank-1 tensors keep their column shape") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 5);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  const CheckpointData data = load_checkpoint(file.path());
  const ParamEntry& bias = data.params.entry("proj_b");
  REQUIRE(bias.shape.size() == 1);
  CHECK(bias.shape[0] == 7);
  CHECK(bias.values.rows() == 7);
  CHECK(bias.values.cols() == 1);
}

TEST_CASE("file header is magic then little-endian version") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 1);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  const std::vector<unsigned char> bytes = slurp(file.path());
  REQUIRE(bytes.size() >= 8);
  CHECK(bytes[0] == 'R');
  CHECK(bytes[1] == 'L');
  CHECK(bytes[2] == 'G');
  CHECK(bytes[3] == 'F');
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 0);
}

TEST_CASE("corrupt magic is rejected") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 2);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  std::vector<unsigned char> bytes = slurp(file.path());
  bytes[0] = 'X';
  bytes[1] = 'X';
  bytes[2] = 'X';
  bytes[3] = 'X';
  dump(file.path(), bytes);
  CHECK_THROWS_AS(load_checkpoint(file.path()), FormatError);
}

TEST_CASE("unknown version is rejected") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 3);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  std::vector<unsigned char> bytes = slurp(file.path());
  bytes[4] = 0xFF;
  dump(file.path(), bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(file.path()),
                       doctest::Contains("version"), FormatError);
}

TEST_CASE("unknown architecture tag is rejected") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 6);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  std::vector<unsigned char> bytes = slurp(file.path());
  // Header: magic 4, version 4, seed 8, five dim words 20; arch at 36.
  bytes[36] = 7;
  dump(file.path(), bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(file.path()),
                       doctest::Contains("architecture"), FormatError);
}

TEST_CASE("implausible tensor name length is rejected") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 7);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  std::vector<unsigned char> bytes = slurp(file.path());
  // First tensor record starts at 48 with its name length word.
  bytes[48] = 0xFF;
  bytes[49] = 0xFF;
  dump(file.path(), bytes);
  CHECK_THROWS_AS(load_checkpoint(file.path()), FormatError);
}

TEST_CASE("out-of-range tensor rank is rejected") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 8);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  std::vector<unsigned char> bytes = slurp(file.path());
  // First tensor is "cell_b": name length at 48, name at 52, rank at 58.
  REQUIRE(bytes[52] == 'c');
  bytes[58] = 3;
  dump(file.path(), bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(file.path()), doctest::Contains("rank"),
                       FormatError);
}

TEST_CASE("truncated files are rejected at any cut point") {
  GenModel model = fresh_gen(Arch::RecurrentCell, 9);
  TempPath file;
  save_gen_checkpoint(model, 0, file.path());
  const std::vector<unsigned char> bytes = slurp(file.path());
  REQUIRE(bytes.size() > 64);
  for (std::size_t keep : {std::size_t{2}, std::size_t{8}, std::size_t{44},
                           std::size_t{60}, bytes.size() - 5}) {
    CAPTURE(keep);
    dump(file.path(),
         std::vector<unsigned char>(bytes.begin(), bytes.begin() + keep));
    CHECK_THROWS_AS(load_checkpoint(file.path()), FormatError);
  }
}

TEST_CASE("loaders reject snapshots of the other model kind") {
  TempPath gen_file;
  TempPath disc_file;
  save_gen_checkpoint(fresh_gen(Arch::RecurrentCell, 10), 0, gen_file.path());
  save_disc_checkpoint(fresh_disc(Arch::RecurrentCell, 11), 0,
                       disc_file.path());
  CHECK_THROWS_AS(load_gen_checkpoint(disc_file.path()), FormatError);
  CHECK_THROWS_AS(load_disc_checkpoint(gen_file.path()), FormatError);
}

TEST_CASE("missing file reports a transport failure") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/rlgaf.ckpt"), TransportError);
}
