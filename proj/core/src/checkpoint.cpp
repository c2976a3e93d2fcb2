#include "ecoevo/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "ecoevo/config.hpp"
#include "ecoevo/errors.hpp"

namespace ecoevo {

namespace {

constexpr std::array<char, 8> kMagic = {'E', 'C', 'O', 'E', 'V', 'O', 'C', 'K'};

std::uint32_t crc(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void bitmap(const std::vector<std::uint8_t>& cells) {
    std::vector<std::uint8_t> packed((cells.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i] != 0) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    out_.insert(out_.end(), packed.begin(), packed.end());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  std::span<const std::uint8_t> view() const { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  std::uint64_t u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > in_.size()) throw CheckpointError("checkpoint is truncated");
    const auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::vector<std::uint8_t> bitmap(std::size_t cells) {
    const auto packed = take((cells + 7) / 8);
    std::vector<std::uint8_t> out(cells);
    for (std::size_t i = 0; i < cells; ++i) out[i] = (packed[i / 8] >> (i % 8)) & 1u;
    return out;
  }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Simulation& sim) {
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.u64(sim.current_step());
  w.u32(config_digest(sim.config()));
  const std::string text = format_config(sim.config());
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());

  const Population& pop = sim.population();
  w.u64(pop.next_id);
  const WorldState& world = sim.world();
  w.u32(static_cast<std::uint32_t>(world.rows));
  w.u32(static_cast<std::uint32_t>(world.cols));
  w.bitmap(world.resources);
  w.bitmap(world.walls);

  w.u32(static_cast<std::uint32_t>(pop.capacity()));
  for (const AgentState& a : pop.slots) {
    w.u8(a.alive ? 1 : 0);
    if (!a.alive) continue;
    w.u64(a.id);
    w.i32(a.position.row);
    w.i32(a.position.col);
    w.f64(a.energy);
    w.i32(a.age);
    w.i32(a.repr_timer);
    w.i32(a.death_timer);
    for (float h : a.recurrent.hidden) w.f32(h);
    for (float c : a.recurrent.cell) w.f32(c);
    w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(a.prev_action)));
    w.u8(a.ate ? 1 : 0);
    for (float x : a.genome.weights()) w.f32(x);
  }
  w.u32(crc(w.view()));
  return w.take();
}

Simulation decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() + 8 ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  Reader r(bytes);
  r.take(kMagic.size());
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto body = bytes.first(bytes.size() - 4);
  Reader trailer(bytes.subspan(bytes.size() - 4));
  if (crc(body) != trailer.u32()) {
    throw CheckpointError("checkpoint checksum mismatch");
  }

  const std::uint64_t step = r.u64();
  const std::uint32_t digest = r.u32();
  const std::uint32_t text_len = r.u32();
  const auto text = r.take(text_len);
  SimConfig cfg;
  try {
    cfg = parse_config(std::string(text.begin(), text.end()));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("embedded configuration is invalid: ") + e.what());
  }
  if (config_digest(cfg) != digest) {
    throw CheckpointError("embedded configuration digest mismatch");
  }

  const std::uint64_t next_id = r.u64();
  const auto rows = static_cast<int>(r.u32());
  const auto cols = static_cast<int>(r.u32());
  if (rows != cfg.rows || cols != cfg.cols) {
    throw CheckpointError("world shape does not match embedded configuration");
  }
  WorldState world = make_world(rows, cols, cfg.regrowth.alpha);
  world.resources = r.bitmap(world.cell_count());
  world.walls = r.bitmap(world.cell_count());

  const auto capacity = static_cast<int>(r.u32());
  if (capacity != cfg.max_population) {
    throw CheckpointError("slot count does not match max_population");
  }
  Population pop(capacity);
  pop.next_id = next_id;
  for (AgentState& a : pop.slots) {
    a.alive = r.u8() != 0;
    if (!a.alive) continue;
    a.id = r.u64();
    a.position.row = r.i32();
    a.position.col = r.i32();
    if (!world.in_bounds(a.position.row, a.position.col)) {
      throw CheckpointError("agent position outside the grid");
    }
    a.energy = r.f64();
    a.age = r.i32();
    a.repr_timer = r.i32();
    a.death_timer = r.i32();
    for (float& h : a.recurrent.hidden) h = r.f32();
    for (float& c : a.recurrent.cell) c = r.f32();
    a.prev_action = static_cast<std::int8_t>(r.u8());
    a.ate = r.u8() != 0;
    std::vector<float> weights(NetworkParams::kSize);
    for (float& x : weights) x = r.f32();
    a.genome = NetworkParams(std::move(weights));
  }
  if (r.position() != body.size()) {
    throw CheckpointError("trailing bytes after agent records");
  }
  return Simulation(std::move(cfg), std::move(world), std::move(pop), step);
}

void save_checkpoint(const Simulation& sim, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(sim);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {
std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}
}  // namespace

Simulation load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

namespace {

// CRC of everything before the trailer.
std::string body_digest(std::span<const std::uint8_t> bytes) {
  const std::size_t n = bytes.size() >= 4 ? bytes.size() - 4 : bytes.size();
  return hex32(crc(bytes.first(n)));
}

}  // namespace

std::string state_digest(const Simulation& sim) {
  return body_digest(encode_checkpoint(sim));
}

std::string file_digest(const std::filesystem::path& path) {
  return body_digest(read_file(path));
}

}  // namespace ecoevo
