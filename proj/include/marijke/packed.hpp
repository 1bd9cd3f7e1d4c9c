#pragma once

// Canonical fixed-width bit encoding of controller states.
//
// Only parameters of configured devices are stored; everything else is at
// its initial value by construction. The reduced configuration fits in one
// 64-bit word, the full one needs two.

#include <array>
#include <cstdint>
#include <vector>

#include "marijke/controller.hpp"

namespace marijke {

/// Up to two words of packed state; unused high words are zero.
struct PackedState {
  std::array<std::uint64_t, 2> w{};
  friend bool operator==(const PackedState&, const PackedState&) = default;
};

class StateCodec {
public:
  static constexpr unsigned mode_bits = 14;

  explicit StateCodec(const PlantConfig& config) : config_(config) {
    for (LockId l : config.locks)
      for (StreamSide s : config.stream_sides) {
        pairs_.push_back(pair_index(l, s));
        for (Orientation o : config.orientations)
          devices_.push_back(device_index(l, s, o));
      }
    param_bits_ = static_cast<unsigned>(devices_.size() * 4 + pairs_.size() * 4 + config.locks.size()) +
                  (config.include_barrier ? 5u : 0u);
  }

  unsigned bits() const noexcept { return param_bits_ + mode_bits; }
  unsigned words() const noexcept { return bits() <= 64 ? 1u : 2u; }

  /// Bits used by the parameter record.
  unsigned param_bits() const noexcept { return param_bits_; }

  PackedState pack(const ControllerState& st) const {
    Writer out;
    const ControllerParams& p = st.params;
    if (config_.include_barrier) {
      out.put(to_u8(p.barrier_status), 2);
      out.put(p.barrier_in_emergency, 1);
      out.put(to_u8(p.barrier_light_set[0]), 1);
      out.put(to_u8(p.barrier_light_set[1]), 1);
    }
    for (std::size_t d : devices_) {
      out.put(to_u8(p.gate_status[d]), 2);
      out.put(to_u8(p.paddle_status[d]), 2);
    }
    for (std::size_t i : pairs_) {
      out.put(to_u8(p.entering_light_set[i]), 2);
      out.put(to_u8(p.leaving_light_set[i]), 1);
      out.put(p.water_equal[i], 1);
    }
    for (LockId l : config_.locks)
      out.put(p.in_emergency(l), 1);

    out.put(static_cast<std::uint64_t>(st.mode.index()), 2);
    if (const auto* a = std::get_if<Awaiting>(&st.mode)) {
      out.put(to_u8(a->check), 2);
      out.put(to_u8(a->lock), 1);
      out.put(to_u8(a->side), 1);
      out.put(a->reads_done, 3);
      out.put(a->acceptable, 1);
    } else if (const auto* e = std::get_if<Emitting>(&st.mode)) {
      out.put(to_u8(e->burst), 5);
      out.put(to_u8(e->lock), 1);
      out.put(to_u8(e->side), 1);
      out.put(to_u8(e->orientation), 1);
      out.put(e->cursor, 4);
    }
    return out.state;
  }

  ControllerState unpack(const PackedState& ps) const {
    Reader in{ps};
    ControllerState st;
    ControllerParams& p = st.params;
    if (config_.include_barrier) {
      p.barrier_status = static_cast<Position>(in.get(2));
      p.barrier_in_emergency = in.get(1);
      p.barrier_light_set[0] = static_cast<SingleLight>(in.get(1));
      p.barrier_light_set[1] = static_cast<SingleLight>(in.get(1));
    }
    for (std::size_t d : devices_) {
      p.gate_status[d] = static_cast<Position>(in.get(2));
      p.paddle_status[d] = static_cast<Position>(in.get(2));
    }
    for (std::size_t i : pairs_) {
      p.entering_light_set[i] = static_cast<DoubleLight>(in.get(2));
      p.leaving_light_set[i] = static_cast<SingleLight>(in.get(1));
      p.water_equal[i] = in.get(1);
    }
    for (LockId l : config_.locks)
      p.set_emergency(l, in.get(1));

    switch (in.get(2)) {
    case 0: st.mode = Stable{}; break;
    case 1: {
      Awaiting a;
      a.check = static_cast<CheckKind>(in.get(2));
      a.lock = static_cast<LockId>(in.get(1));
      a.side = static_cast<StreamSide>(in.get(1));
      a.reads_done = static_cast<std::uint8_t>(in.get(3));
      a.acceptable = in.get(1);
      st.mode = a;
      break;
    }
    default: {
      Emitting e;
      e.burst = static_cast<BurstKind>(in.get(5));
      e.lock = static_cast<LockId>(in.get(1));
      e.side = static_cast<StreamSide>(in.get(1));
      e.orientation = static_cast<Orientation>(in.get(1));
      e.cursor = static_cast<std::uint8_t>(in.get(4));
      st.mode = e;
      break;
    }
    }
    return st;
  }

private:
  struct Writer {
    PackedState state;
    unsigned pos = 0;
    void put(std::uint64_t v, unsigned n) {
      const unsigned word = pos / 64, off = pos % 64;
      state.w[word] |= v << off;
      if (off + n > 64)
        state.w[word + 1] |= v >> (64 - off);
      pos += n;
    }
  };
  struct Reader {
    const PackedState& state;
    unsigned pos = 0;
    std::uint64_t get(unsigned n) {
      const unsigned word = pos / 64, off = pos % 64;
      std::uint64_t v = state.w[word] >> off;
      if (off + n > 64)
        v |= state.w[word + 1] << (64 - off);
      pos += n;
      return v & ((std::uint64_t{1} << n) - 1);
    }
  };

  PlantConfig config_;
  std::vector<std::size_t> devices_;
  std::vector<std::size_t> pairs_;
  unsigned param_bits_ = 0;
};

/// Exact product of the Stable parameter domains, as an unsigned 64-bit
/// value (the full configuration needs 55 bits).
inline std::uint64_t state_bound(const PlantConfig& config) {
  config.validate();
  const std::uint64_t pairs = config.locks.size() * config.stream_sides.size();
  const std::uint64_t devices = pairs * config.orientations.size();
  std::uint64_t n = 1;
  auto times = [&](std::uint64_t base, std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i)
      n *= base;
  };
  if (config.include_barrier) {
    times(4, 1); // barrier position
    times(2, 1); // barrier emergency flag
    times(2, 2); // barrier light set-point per side
  }
  times(4, devices); // gates
  times(4, devices); // paddles
  times(4, pairs);   // entering lights
  times(2, pairs);   // leaving lights
  times(2, pairs);   // water flags
  times(2, config.locks.size());
  return n;
}

} // namespace marijke
