#include "dqfd/demo_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace dqfd {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'Q', 'F', 'D', 'D', 'E', 'M', 'O'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
    throw DemoFileError(DemoFileError::Kind::kTruncated, "demo file ends mid-record");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

void put_bits(std::ostream& out, const FeatureVector& v) {
  std::vector<char> bytes((v.size() + 7) / 8, 0);
  for (std::size_t j = 0; j < v.size(); ++j)
    if (v[j]) bytes[j / 8] = static_cast<char>(bytes[j / 8] | (1 << (j % 8)));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FeatureVector get_bits(std::istream& in, std::size_t n) {
  std::vector<char> bytes((n + 7) / 8);
  if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw DemoFileError(DemoFileError::Kind::kTruncated, "demo file ends mid-record");
  FeatureVector v(n, 0);
  for (std::size_t j = 0; j < n; ++j) v[j] = (bytes[j / 8] >> (j % 8)) & 1;
  return v;
}

}  // namespace

void write_demos(std::ostream& out, const DemoSet& demos) {
  if (demos.transitions.empty())
    throw DemoFileError(DemoFileError::Kind::kEmptyDemoSet, "no demonstration transitions");
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kDemoFileVersion);
  put_le<std::uint32_t>(out, demos.vector_length);
  put_le<std::uint32_t>(out, demos.action_count);
  put_le<std::uint64_t>(out, demos.transitions.size());
  for (const auto& t : demos.transitions) {
    if (t.s.size() != demos.vector_length || t.s_next.size() != demos.vector_length ||
        t.a >= demos.action_count)
      throw DemoFileError(DemoFileError::Kind::kShapeMismatch,
                          "transition does not match the declared shape");
    put_bits(out, t.s);
    put_le<std::uint32_t>(out, t.a);
    put_le<double>(out, t.r);
    put_bits(out, t.s_next);
    put_le<std::uint8_t>(out, t.terminal);
    put_le<std::uint8_t>(out, t.is_demo);
  }
  if (!out) throw DemoFileError(DemoFileError::Kind::kIo, "failed writing demo file");
}

DemoSet read_demos(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw DemoFileError(DemoFileError::Kind::kBadMagic, "not a demonstration file");
  if (const auto version = get_le<std::uint32_t>(in); version != kDemoFileVersion)
    throw DemoFileError(DemoFileError::Kind::kBadVersion,
                        "unsupported demo file version " + std::to_string(version));
  DemoSet demos;
  demos.vector_length = get_le<std::uint32_t>(in);
  demos.action_count = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  if (count == 0)
    throw DemoFileError(DemoFileError::Kind::kEmptyDemoSet, "demo file holds no transitions");
  for (std::uint64_t k = 0; k < count; ++k) {
    Transition t;
    t.s = get_bits(in, demos.vector_length);
    t.a = get_le<std::uint32_t>(in);
    t.r = get_le<double>(in);
    t.s_next = get_bits(in, demos.vector_length);
    t.terminal = get_le<std::uint8_t>(in) != 0;
    t.is_demo = get_le<std::uint8_t>(in) != 0;
    if (t.a >= demos.action_count)
      throw DemoFileError(DemoFileError::Kind::kShapeMismatch, "action index out of range");
    demos.transitions.push_back(std::move(t));
  }
  return demos;
}

void save_demos(const std::filesystem::path& path, const DemoSet& demos) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DemoFileError(DemoFileError::Kind::kIo, "cannot open " + path.string());
  write_demos(out, demos);
}

DemoSet load_demos(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DemoFileError(DemoFileError::Kind::kIo, "cannot open " + path.string());
  return read_demos(in);
}

}  // namespace dqfd
