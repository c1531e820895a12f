#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "dqfd/replay_buffer.hpp"

namespace dqfd {

// Binary demonstration file, little-endian throughout:
//
//   header   "DQFDDEMO" | u32 version | u32 vector length | u32 action count
//            | u64 record count
//   record   packed s bits | u32 a | f64 r | packed s_next bits
//            | u8 terminal | u8 is_demo
//
// A packed vector of length n takes ceil(n / 8) bytes, bit j of byte j / 8
// holding position j (least significant bit first).
inline constexpr std::uint32_t kDemoFileVersion = 1;

struct DemoSet {
  std::uint32_t vector_length = 0;
  std::uint32_t action_count = 0;
  std::vector<Transition> transitions;
};

class DemoFileError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kBadVersion, kTruncated, kShapeMismatch, kEmptyDemoSet };
  DemoFileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void write_demos(std::ostream& out, const DemoSet& demos);
DemoSet read_demos(std::istream& in);
void save_demos(const std::filesystem::path& path, const DemoSet& demos);
DemoSet load_demos(const std::filesystem::path& path);

}  // namespace dqfd
