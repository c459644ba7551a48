#include "cwnnk/errors.hpp"
#include "cwnnk/snapshot_io.hpp"
#include "synthetic.hpp"

#include <doctest.h>
#include <zlib.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cwnnk;
namespace fs = std::filesystem;

namespace {

// Little-endian writer independent of the encoder.
struct Bytes {
  std::vector<std::uint8_t> b;
  template <class T>
  void put(T v) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    b.insert(b.end(), raw, raw + sizeof(T));
  }
  void crc() {
    put(static_cast<std::uint32_t>(::crc32(0L, b.data(), static_cast<uInt>(b.size()))));
  }
};

std::vector<std::uint8_t> hand_encoded() {
  Bytes w;
  for (char c : std::string("NNKA")) w.put(static_cast<std::uint8_t>(c));
  w.put<std::uint16_t>(1);
  w.put<std::uint64_t>(42);
  w.put<std::uint32_t>(3);  // N
  w.put<std::uint32_t>(2);  // C
  w.put<std::uint32_t>(1);
  w.put<std::uint32_t>(2);
  for (std::uint16_t y : {0, 1, 1}) w.put(y);
  w.put<std::uint16_t>(2);
  for (float v : {1.f, 2.f, 3.f}) w.put(v);
  for (float v : {0.5f, -0.5f, 1.5f, 2.5f, 0.f, 7.f}) w.put(v);
  w.crc();
  return w.b;
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cwnnk_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

template <class E>
E capture(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_snapshot(bytes);
  } catch (const E& e) {
    return e;
  }
  FAIL("expected exception");
  throw;
}

}  // namespace

TEST_CASE("decode a hand-built file") {
  const auto bytes = hand_encoded();
  const auto s = decode_snapshot(bytes);
  CHECK(s.step == 42);
  CHECK(s.num_samples() == 3);
  CHECK(s.dims() == std::vector<std::uint32_t>{1, 2});
  CHECK(s.labels.labels == std::vector<ClassId>{0, 1, 1});
  CHECK(s.labels.num_classes == 2);
  CHECK(s.channels[0](2, 0) == 3.f);
  CHECK(s.channels[1](1, 1) == 2.5f);
  CHECK(s.full_dim() == 3);
  CHECK(encode_snapshot(s) == bytes);
}

TEST_CASE("round trip is byte identical") {
  synth::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::size_t> dims;
    for (std::size_t c = 0, n = 1 + rng() % 5; c < n; ++c) dims.push_back(1 + rng() % 7);
    const auto s = synth::random_snapshot(3 + rng() % 20, dims, 2 + rng() % 3, rng, rng());
    const auto bytes = encode_snapshot(s);
    const auto back = decode_snapshot(bytes);
    CHECK(back == s);
    CHECK(encode_snapshot(back) == bytes);

    std::stringstream ss;
    write_snapshot(ss, s);
    CHECK(read_snapshot(ss) == s);
  }
}

TEST_CASE("malformed inputs") {
  const auto good = hand_encoded();

  SUBCASE("every truncation is a format error") {
    for (std::size_t len = 0; len < good.size(); ++len) {
      std::vector<std::uint8_t> cut(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(len));
      CHECK_THROWS_AS(decode_snapshot(cut), FormatError);
    }
  }

  SUBCASE("bad magic") {
    auto b = good;
    b[1] = 'M';
    CHECK(capture<FormatError>(b).offset() == 0);
  }

  SUBCASE("bad version") {
    auto b = good;
    b[4] = 2;
    CHECK(capture<FormatError>(b).offset() == 4);
  }

  SUBCASE("flipped payload byte fails the checksum") {
    auto b = good;
    b[b.size() - 8] ^= 0x10;
    CHECK_THROWS_AS(decode_snapshot(b), FormatError);
  }

  SUBCASE("trailing garbage") {
    auto b = good;
    b.push_back(0);
    CHECK_THROWS_AS(decode_snapshot(b), FormatError);
  }

  SUBCASE("huge declared size does not allocate") {
    auto b = good;
    const std::uint32_t n = 0xFFFFFFFF;
    std::memcpy(b.data() + 14, &n, 4);
    CHECK_THROWS_AS(decode_snapshot(b), FormatError);
  }

  SUBCASE("NaN payload names channel and row") {
    auto s = decode_snapshot(good);
    s.channels[1](2, 0) = std::nanf("");
    s.channels[0](0, 0) = INFINITY;
    // validation would refuse to encode this, so patch the bytes directly
    auto b = good;
    const float nan = std::nanf(""), inf = INFINITY;
    const std::size_t data0 = 4 + 2 + 8 + 4 + 4 + 8 + 6 + 2;
    std::memcpy(b.data() + data0, &inf, 4);
    std::memcpy(b.data() + data0 + 12 + 16, &nan, 4);
    b.resize(b.size() - 4);
    Bytes w{b};
    w.crc();
    const auto e = capture<DataError>(w.b);
    CHECK(e.locations() == std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0, 0}, {1, 2}});
    CHECK_THROWS_AS(encode_snapshot(s), DataError);
  }

  SUBCASE("label out of range") {
    auto b = good;
    b[4 + 2 + 8 + 4 + 4 + 8 + 2] = 5;  // label of node 1
    b.resize(b.size() - 4);
    Bytes w{b};
    w.crc();
    CHECK_THROWS_AS(decode_snapshot(w.b), DataError);
  }
}

TEST_CASE("snapshot validation") {
  synth::Rng rng(2);
  auto s = synth::random_snapshot(5, {2, 3}, 2, rng);
  CHECK_NOTHROW(s.validate());
  auto short_labels = s;
  short_labels.labels.labels.pop_back();
  CHECK_THROWS_AS(short_labels.validate(), InputError);
  auto ragged = s;
  ragged.channels[1] = FloatMatrix::Zero(4, 3);
  CHECK_THROWS_AS(ragged.validate(), InputError);
  auto empty = s;
  empty.channels.clear();
  CHECK_THROWS_AS(empty.validate(), InputError);

  const auto full = s.full_layer_features();
  CHECK(full.cols() == 5);
  CHECK(full(3, 4) == static_cast<double>(s.channels[1](3, 2)));
}

TEST_CASE("csv twin parses to the same snapshot") {
  synth::Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    const auto s = synth::random_snapshot(4 + rng() % 10, {1 + rng() % 4, 1 + rng() % 4}, 3, rng, 100 + t);
    const auto dir = temp_dir("csv" + std::to_string(t));
    write_snapshot_csv(dir, s);
    CHECK(read_snapshot(dir) == s);

    const auto file = dir / "s.nnka";
    write_snapshot(file, s);
    CHECK(read_snapshot(file) == read_snapshot_csv(dir));
    fs::remove_all(dir);
  }
}

TEST_CASE("hand-written csv") {
  const auto dir = temp_dir("handcsv");
  std::ofstream(dir / "labels.csv") << "0\n1\n1\n";
  std::ofstream(dir / "channel_0.csv") << "1\n2\n3\n";
  std::ofstream(dir / "channel_1.csv") << "0.5,-0.5\n1.5,2.5\n0,7\n";
  std::ofstream(dir / "meta.csv") << "step,42\nnum_classes,2\n";
  CHECK(read_snapshot(dir) == decode_snapshot(hand_encoded()));

  std::ofstream(dir / "channel_1.csv") << "0.5,-0.5\n1.5\n0,7\n";
  CHECK_THROWS_AS(read_snapshot(dir), FormatError);
  std::ofstream(dir / "channel_1.csv") << "0.5,-0.5\n1.5,nan\n0,7\n";
  CHECK_THROWS_AS(read_snapshot(dir), DataError);
  fs::remove_all(dir);
}
