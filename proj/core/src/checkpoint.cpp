#include "dqfd/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dqfd {

namespace {

constexpr const char* kTag = "dqfd-checkpoint";
constexpr int kVersion = 1;

CheckpointError format_error(const std::string& what) {
  return CheckpointError(CheckpointError::Kind::kFormat, "checkpoint: " + what);
}

std::size_t parse_size(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(key);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw format_error("bad value for '" + key + "'");
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const QNetwork& net, const CheckpointMeta& meta) {
  const auto& s = net.shape();
  out << kTag << ' ' << kVersion << '\n'
      << "input " << s.input << '\n'
      << "hidden " << s.hidden << '\n'
      << "actions " << s.actions << '\n'
      << "frame " << meta.frame << '\n';
  for (const auto& [key, value] : meta.info) {
    if (key.empty() || key.find_first_of(" \t\n") != std::string::npos ||
        value.find('\n') != std::string::npos)
      throw format_error("metadata key/value not representable: '" + key + "'");
    out << "meta " << key << ' ' << value << '\n';
  }
  out << "params " << net.params().size() << '\n' << "end\n";
  for (Eigen::Index i = 0; i < net.params().size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(net.params()[i]);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>(bits >> (8 * k));
    out.write(bytes, 8);
  }
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw format_error("empty file");
  {
    std::istringstream head(line);
    std::string tag;
    int version = 0;
    if (!(head >> tag >> version) || tag != kTag) throw format_error("missing header tag");
    if (version != kVersion) throw format_error("unsupported version " + std::to_string(version));
  }
  QNetShape shape{0, 0, 0};
  CheckpointMeta meta;
  std::size_t count = 0;
  bool closed = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      closed = true;
      break;
    }
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw format_error("malformed line '" + line + "'");
    const std::string key = line.substr(0, sp);
    const std::string rest = line.substr(sp + 1);
    if (key == "input") shape.input = parse_size(rest, key);
    else if (key == "hidden") shape.hidden = parse_size(rest, key);
    else if (key == "actions") shape.actions = parse_size(rest, key);
    else if (key == "frame") meta.frame = static_cast<std::int64_t>(parse_size(rest, key));
    else if (key == "params") count = parse_size(rest, key);
    else if (key == "meta") {
      const auto sp2 = rest.find(' ');
      if (sp2 == std::string::npos) meta.info[rest] = "";
      else meta.info[rest.substr(0, sp2)] = rest.substr(sp2 + 1);
    } else {
      throw format_error("unknown key '" + key + "'");
    }
  }
  if (!closed) throw format_error("header not terminated");
  if (shape.input == 0 || shape.hidden == 0 || shape.actions == 0)
    throw format_error("missing or zero dimensions");
  if (count != shape.param_count()) throw format_error("parameter count disagrees with shape");

  Checkpoint ck{QNetwork(shape), std::move(meta)};
  auto& p = ck.net.params();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw format_error("truncated payload");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= std::uint64_t{bytes[k]} << (8 * k);
    p[i] = std::bit_cast<double>(bits);
  }
  if (!p.allFinite()) throw format_error("non-finite parameters");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const QNetwork& net,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "cannot open " + path.string());
  write_checkpoint(out, net, meta);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::kIo, "cannot open " + path.string());
  return read_checkpoint(in);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const QNetShape& expected) {
  auto ck = load_checkpoint(path);
  const auto& s = ck.net.shape();
  if (!(s == expected)) {
    std::ostringstream msg;
    msg << "checkpoint shape " << s.input << 'x' << s.hidden << 'x' << s.actions
        << " does not match expected " << expected.input << 'x' << expected.hidden << 'x'
        << expected.actions;
    throw CheckpointError(CheckpointError::Kind::kShapeMismatch, msg.str());
  }
  return ck;
}

}  // namespace dqfd
