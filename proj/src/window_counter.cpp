#include "ecm/window_counter.hpp"

#include <string>
#include <type_traits>

#include "ecm/errors.hpp"

namespace ecm {

namespace {

WindowCounter::Impl make_impl(Backend backend, const WindowConfig& window,
                              const RwParams& rw) {
  switch (backend) {
    case Backend::eh: return ExponentialHistogram(window);
    case Backend::dw: return DeterministicWave(window);
    case Backend::rw: return RandomizedWave(window, rw);
  }
  throw ConfigError("unknown backend");
}

template <class T>
std::vector<const T*> unwrap(std::span<const WindowCounter* const> inputs) {
  std::vector<const T*> out;
  out.reserve(inputs.size());
  for (const WindowCounter* c : inputs) {
    const T* p = std::get_if<T>(&c->impl());
    if (p == nullptr) {
      throw IncompatibleError("cannot merge counters of different backends");
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

WindowCounter::WindowCounter(Backend backend, const WindowConfig& window,
                             const RwParams& rw)
    : impl_(make_impl(backend, window, rw)) {}

void WindowCounter::insert(Timestamp at, std::uint64_t value,
                           std::uint64_t key) {
  if (auto* rw = std::get_if<RandomizedWave>(&impl_)) {
    if (rw->has_arrivals() && at < rw->last_arrival()) {
      throw OrderingError("arrival precedes the previous arrival");
    }
    for (std::uint64_t j = 0; j < value; ++j) {
      rw->insert_event(at, rw_event_id(key, at, j));
    }
    return;
  }
  std::visit(
      [&](auto& s) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(s)>,
                                      RandomizedWave>) {
          s.insert(at, value);
        }
      },
      impl_);
}

double WindowCounter::query(std::uint64_t range, Timestamp now) const {
  return std::visit(
      [&](const auto& s) { return static_cast<double>(s.query(range, now)); },
      impl_);
}

WindowCounter WindowCounter::merge(
    std::span<const WindowCounter* const> inputs, double epsilon_prime,
    std::optional<std::uint64_t> capacity) {
  if (inputs.empty()) throw ConfigError("merge needs at least one input");
  switch (inputs.front()->backend()) {
    case Backend::eh: {
      auto in = unwrap<ExponentialHistogram>(inputs);
      return WindowCounter(ExponentialHistogram::merge(in, epsilon_prime));
    }
    case Backend::dw: {
      auto in = unwrap<DeterministicWave>(inputs);
      return WindowCounter(DeterministicWave::merge(in, epsilon_prime));
    }
    case Backend::rw: {
      auto in = unwrap<RandomizedWave>(inputs);
      return WindowCounter(RandomizedWave::merge(in, capacity));
    }
  }
  throw ConfigError("unknown backend");
}

const WindowConfig& WindowCounter::config() const {
  return std::visit(
      [](const auto& s) -> const WindowConfig& { return s.config(); }, impl_);
}

bool WindowCounter::has_arrivals() const {
  return std::visit([](const auto& s) { return s.has_arrivals(); }, impl_);
}

Timestamp WindowCounter::last_arrival() const {
  return std::visit([](const auto& s) { return s.last_arrival(); }, impl_);
}

std::uint64_t WindowCounter::model_bits() const {
  return std::visit([](const auto& s) { return s.model_bits(); }, impl_);
}

std::size_t WindowCounter::memory_bytes() const {
  return std::visit([](const auto& s) { return s.memory_bytes(); }, impl_);
}

std::vector<BucketSpan> WindowCounter::buckets() const {
  if (const auto* eh = std::get_if<ExponentialHistogram>(&impl_)) {
    return eh->buckets();
  }
  if (const auto* dw = std::get_if<DeterministicWave>(&impl_)) {
    return dw->buckets();
  }
  return {};
}

void WindowCounter::serialize(ByteWriter& out) const {
  const WindowConfig& c = config();
  out.magic("ECMW");
  out.u16(kVersion);
  out.u8(static_cast<std::uint8_t>(backend()));
  out.u8(static_cast<std::uint8_t>(c.mode));
  out.f64(c.epsilon);
  const auto* rw = std::get_if<RandomizedWave>(&impl_);
  if (rw != nullptr) out.f64(rw->params().delta);
  out.u64(c.length);
  out.u64(c.capacity);
  if (rw != nullptr) {
    out.f64(rw->params().constant);
    out.u64(rw->params().seed);
  }
  std::visit([&](const auto& s) { s.serialize_payload(out); }, impl_);
}

std::vector<std::uint8_t> WindowCounter::serialize() const {
  ByteWriter out;
  serialize(out);
  return out.take();
}

WindowCounter WindowCounter::deserialize(ByteReader& in) {
  in.expect_magic("ECMW");
  const std::uint16_t version = in.u16();
  if (version != kVersion) {
    throw FormatError("unsupported counter frame version " +
                      std::to_string(version));
  }
  const std::uint8_t kind = in.u8();
  const std::uint8_t mode = in.u8();
  if (kind > 2) throw FormatError("unknown counter kind");
  if (mode > 1) throw FormatError("unknown window mode");
  WindowConfig c;
  c.mode = static_cast<WindowMode>(mode);
  c.epsilon = in.f64();
  RwParams rw;
  if (kind == 2) rw.delta = in.f64();
  c.length = in.u64();
  c.capacity = in.u64();
  if (kind == 2) {
    rw.constant = in.f64();
    rw.seed = in.u64();
  }
  try {
    switch (static_cast<Backend>(kind)) {
      case Backend::eh:
        return WindowCounter(ExponentialHistogram::deserialize_payload(c, in));
      case Backend::dw:
        return WindowCounter(DeterministicWave::deserialize_payload(c, in));
      case Backend::rw:
        return WindowCounter(RandomizedWave::deserialize_payload(c, rw, in));
    }
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad counter header: ") + e.what());
  }
  throw FormatError("unknown counter kind");
}

WindowCounter WindowCounter::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  WindowCounter c = deserialize(in);
  if (!in.at_end()) throw FormatError("trailing bytes after counter frame");
  return c;
}

}  // namespace ecm
