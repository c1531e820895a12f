#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

#include "dqfd/q_network.hpp"

namespace dqfd {

// Text header, one "key value" pair per line, closed by "end", followed by
// the flat parameter vector as little-endian 64-bit floats:
//
//   dqfd-checkpoint 1
//   input 80
//   hidden 100
//   actions 32
//   frame 25000
//   meta gamma 0.9
//   params 11533
//   end
struct CheckpointMeta {
  std::int64_t frame = 0;
  std::map<std::string, std::string> info;  // keys without whitespace
};

struct Checkpoint {
  QNetwork net;
  CheckpointMeta meta;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kFormat, kShapeMismatch };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void write_checkpoint(std::ostream& out, const QNetwork& net, const CheckpointMeta& meta);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const QNetwork& net,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Throws CheckpointError(kShapeMismatch) unless the stored shape equals `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const QNetShape& expected);

}  // namespace dqfd
