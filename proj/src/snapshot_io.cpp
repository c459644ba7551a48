#include "cwnnk/snapshot_io.hpp"

#include "cwnnk/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace cwnnk {

namespace {

constexpr char kMagic[4] = {'N', 'N', 'K', 'A'};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, bytes.data() + pos, chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T> || std::is_same_v<T, float>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }
  void put_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    T value;
    std::memcpy(&value, raw, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void need(std::uint64_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(pos_, std::string("truncated while reading ") + what);
    }
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const FeatureSnapshot& snapshot) {
  // refuse to write anything the reader would reject
  snapshot.validate();
  const auto n = snapshot.num_samples();
  ByteWriter w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint16_t>(kNnkaVersion);
  w.put<std::uint64_t>(snapshot.step);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(n));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(snapshot.num_channels()));
  for (std::uint32_t d : snapshot.dims()) w.put<std::uint32_t>(d);
  for (ClassId y : snapshot.labels.labels) w.put<std::uint16_t>(y);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(snapshot.labels.num_classes));
  for (const auto& ch : snapshot.channels) {
    for (Eigen::Index i = 0; i < ch.size(); ++i) w.put<float>(ch.data()[i]);
  }
  const std::uint32_t crc = crc32_of(w.bytes());
  w.put<std::uint32_t>(crc);
  return std::move(w.bytes());
}

FeatureSnapshot decode_snapshot(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.need(sizeof(kMagic), "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError(0, "bad magic");
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) r.get<std::uint8_t>("magic");

  const std::size_t version_at = r.pos();
  const auto version = r.get<std::uint16_t>("version");
  if (version != kNnkaVersion) {
    throw FormatError(version_at, "unsupported version " + std::to_string(version));
  }

  FeatureSnapshot s;
  s.step = r.get<std::uint64_t>("step");
  const std::size_t n_at = r.pos();
  const auto n = r.get<std::uint32_t>("sample count");
  const auto c = r.get<std::uint32_t>("channel count");
  if (n == 0) throw FormatError(n_at, "sample count is zero");
  if (c == 0) throw FormatError(n_at + 4, "channel count is zero");

  // Bound the declared sizes by what is actually present before allocating.
  r.need(std::uint64_t{c} * 4, "channel widths");
  std::vector<std::uint32_t> dims(c);
  std::uint64_t payload = 0;
  for (std::uint32_t i = 0; i < c; ++i) {
    const std::size_t at = r.pos();
    dims[i] = r.get<std::uint32_t>("channel width");
    if (dims[i] == 0) throw FormatError(at, "channel " + std::to_string(i) + " has zero width");
    payload += std::uint64_t{n} * dims[i] * 4;
  }
  const std::uint64_t expected = std::uint64_t{n} * 2 + 2 + payload + 4;
  if (r.remaining() < expected) {
    throw FormatError(r.pos(), "truncated: header declares " + std::to_string(expected) +
                                   " more bytes, " + std::to_string(r.remaining()) + " present");
  }
  if (r.remaining() > expected) {
    throw FormatError(r.pos() + expected, "trailing bytes after checksum");
  }

  s.labels.labels.resize(n);
  for (auto& y : s.labels.labels) y = r.get<std::uint16_t>("labels");
  s.labels.num_classes = r.get<std::uint16_t>("num_classes");

  s.channels.reserve(c);
  for (std::uint32_t i = 0; i < c; ++i) {
    FloatMatrix m(n, dims[i]);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = r.get<float>("activations");
    s.channels.push_back(std::move(m));
  }

  const std::size_t crc_at = r.pos();
  const auto stored = r.get<std::uint32_t>("checksum");
  if (stored != crc32_of(bytes.first(crc_at))) throw FormatError(crc_at, "checksum mismatch");

  if (s.labels.num_classes < 2) throw DataError("num_classes must be >= 2");
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    if (s.labels.labels[i] >= s.labels.num_classes) {
      throw DataError("label " + std::to_string(s.labels.labels[i]) + " at row " +
                      std::to_string(i) + " is not below num_classes=" +
                      std::to_string(s.labels.num_classes));
    }
  }
  s.validate();  // non-finite activations -> DataError with locations
  return s;
}

void write_snapshot(std::ostream& out, const FeatureSnapshot& snapshot) {
  const auto bytes = encode_snapshot(snapshot);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing snapshot");
}

void write_snapshot(const std::filesystem::path& path, const FeatureSnapshot& snapshot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  write_snapshot(out, snapshot);
}

FeatureSnapshot read_snapshot(std::istream& in) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

FeatureSnapshot read_snapshot(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return read_snapshot_csv(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_snapshot(in);
}

// CSV fallback --------------------------------------------------------------

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

template <typename T>
T parse_number(std::string_view field, std::string_view text, const std::filesystem::path& file) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw FormatError(static_cast<std::uint64_t>(field.data() - text.data()),
                      file.filename().string() + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

void write_snapshot_csv(const std::filesystem::path& dir, const FeatureSnapshot& snapshot) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream meta(dir / "meta.csv");
    meta << "step," << snapshot.step << "\nnum_classes," << snapshot.labels.num_classes << "\n";
  }
  {
    std::ofstream labels(dir / "labels.csv");
    for (ClassId y : snapshot.labels.labels) labels << y << "\n";
  }
  char buf[64];
  for (std::size_t c = 0; c < snapshot.num_channels(); ++c) {
    std::ofstream out(dir / ("channel_" + std::to_string(c) + ".csv"));
    const auto& m = snapshot.channels[c];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        // Shortest form that parses back to the same float.
        const auto res = std::to_chars(buf, buf + sizeof(buf), m(i, j));
        out.write(buf, res.ptr - buf);
      }
      out << '\n';
    }
  }
}

FeatureSnapshot read_snapshot_csv(const std::filesystem::path& dir) {
  FeatureSnapshot s;
  bool have_classes = false;
  if (std::filesystem::exists(dir / "meta.csv")) {
    const std::string text = slurp(dir / "meta.csv");
    for (std::string_view line : split_lines(text)) {
      const auto comma = line.find(',');
      if (comma == std::string_view::npos) {
        throw FormatError(static_cast<std::uint64_t>(line.data() - text.data()),
                          "meta.csv: expected key,value");
      }
      const auto key = line.substr(0, comma);
      const auto value = line.substr(comma + 1);
      if (key == "step") {
        s.step = parse_number<std::uint64_t>(value, text, dir / "meta.csv");
      } else if (key == "num_classes") {
        s.labels.num_classes = parse_number<std::size_t>(value, text, dir / "meta.csv");
        have_classes = true;
      }
    }
  }

  const std::string label_text = slurp(dir / "labels.csv");
  for (std::string_view line : split_lines(label_text)) {
    s.labels.labels.push_back(parse_number<ClassId>(line, label_text, dir / "labels.csv"));
  }
  if (!have_classes) {
    std::size_t top = 1;
    for (ClassId y : s.labels.labels) top = std::max<std::size_t>(top, y + 1u);
    s.labels.num_classes = std::max<std::size_t>(2, top);
  }

  for (std::size_t c = 0;; ++c) {
    const auto file = dir / ("channel_" + std::to_string(c) + ".csv");
    if (!std::filesystem::exists(file)) break;
    const std::string text = slurp(file);
    const auto lines = split_lines(text);
    std::vector<std::vector<float>> rows;
    for (std::string_view line : lines) {
      std::vector<float>& row = rows.emplace_back();
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        row.push_back(parse_number<float>(line.substr(start, comma - start), text, file));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (row.size() != rows.front().size()) {
        throw FormatError(static_cast<std::uint64_t>(line.data() - text.data()),
                          file.filename().string() + ": ragged row");
      }
    }
    if (rows.size() != s.labels.size()) {
      throw FormatError(text.size(), file.filename().string() + ": " + std::to_string(rows.size()) +
                                         " rows, expected " + std::to_string(s.labels.size()));
    }
    FloatMatrix m(static_cast<Eigen::Index>(rows.size()),
                  rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    s.channels.push_back(std::move(m));
  }
  if (s.channels.empty()) throw InputError("no channel_0.csv in " + dir.string());
  s.validate();
  return s;
}

}  // namespace cwnnk
