#include "ecm/ecm_sketch.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ecm/errors.hpp"

namespace ecm {

EcmSketch::EcmSketch(const SketchPlan& plan, const WindowConfig& window,
                     std::uint64_t master_seed, double rw_constant)
    : plan_(plan),
      window_(window),
      master_seed_(master_seed),
      rw_constant_(rw_constant) {
  if (plan_.width == 0 || plan_.depth == 0) {
    throw ConfigError("sketch needs at least one row and column");
  }
  window_.epsilon = plan_.epsilon_sw;
  window_ = window_.validated();
  node_epsilon_ = window_.epsilon;
  init_hashes();
  counters_.reserve(static_cast<std::size_t>(plan_.width) * plan_.depth);
  for (std::uint32_t row = 0; row < plan_.depth; ++row) {
    const RwParams rw = row_params(row);
    for (std::uint32_t col = 0; col < plan_.width; ++col) {
      counters_.emplace_back(plan_.backend, window_, rw);
    }
  }
}

void EcmSketch::init_hashes() {
  hashes_.clear();
  std::uint64_t state = master_seed_;
  for (std::uint32_t row = 0; row < plan_.depth; ++row) {
    hashes_.push_back(MultiplyShift::from_seed(state));
  }
}

RwParams EcmSketch::row_params(std::uint32_t row) const {
  RwParams p;
  p.delta = plan_.backend == Backend::rw ? plan_.delta_sw : plan_.delta;
  p.constant = rw_constant_;
  p.seed = mix64(master_seed_ ^ (0xa0761d6478bd642fULL * (row + 1)));
  return p;
}

void EcmSketch::add(Key key, Timestamp at, std::uint64_t value) {
  if (value == 0) throw DomainError("added value must be positive");
  if (window_.mode == WindowMode::count_based) {
    // Every unit is one arrival with its own ordinal.
    for (std::uint64_t u = 0; u < value; ++u) {
      const Timestamp pos = now_ + 1;
      for (std::uint32_t row = 0; row < plan_.depth; ++row) {
        counters_[row * plan_.width + column(row, key)].insert(pos, 1, key);
      }
      now_ = pos;
    }
    seen_ = true;
    return;
  }
  if (seen_ && at < now_) {
    throw OrderingError("arrival at " + std::to_string(at) +
                        " precedes previous arrival " + std::to_string(now_));
  }
  for (std::uint32_t row = 0; row < plan_.depth; ++row) {
    counters_[row * plan_.width + column(row, key)].insert(at, value, key);
  }
  now_ = at;
  seen_ = true;
}

namespace {

void check_query(const WindowConfig& window, bool seen, Timestamp last,
                 std::uint64_t range, Timestamp now) {
  check_range(window, range);
  if (seen && now < last) {
    throw OrderingError("query time precedes the last arrival");
  }
}

}  // namespace

std::vector<double> EcmSketch::row_estimates(Key key, std::uint64_t range,
                                             Timestamp now) const {
  check_query(window_, seen_, now_, range, now);
  std::vector<double> out(plan_.depth);
  for (std::uint32_t row = 0; row < plan_.depth; ++row) {
    out[row] = counters_[row * plan_.width + column(row, key)].query(range, now);
  }
  return out;
}

double EcmSketch::point_query(Key key, std::uint64_t range,
                              Timestamp now) const {
  const auto rows = row_estimates(key, range, now);
  return *std::min_element(rows.begin(), rows.end());
}

std::vector<double> EcmSketch::grid(std::uint64_t range, Timestamp now) const {
  check_query(window_, seen_, now_, range, now);
  std::vector<double> out(counters_.size());
  for (std::size_t i = 0; i < counters_.size(); ++i) {
    out[i] = counters_[i].query(range, now);
  }
  return out;
}

double EcmSketch::total_estimate(std::uint64_t range, Timestamp now) const {
  const auto g = grid(range, now);
  double sum = 0.0;
  for (double v : g) sum += v;
  return sum / plan_.depth;
}

double EcmSketch::inner_product(const EcmSketch& a, const EcmSketch& b,
                                std::uint64_t range, Timestamp now) {
  if (!a.compatible_with(b)) {
    throw IncompatibleError(
        "inner product needs sketches with identical dimensions and hashes");
  }
  const auto ga = a.grid(range, now);
  const auto gb = &a == &b ? ga : b.grid(range, now);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t row = 0; row < a.plan_.depth; ++row) {
    double sum = 0.0;
    for (std::uint32_t col = 0; col < a.plan_.width; ++col) {
      const std::size_t i = row * a.plan_.width + col;
      sum += ga[i] * gb[i];
    }
    best = std::min(best, sum);
  }
  return best;
}

double EcmSketch::self_join(std::uint64_t range, Timestamp now) const {
  return inner_product(*this, *this, range, now);
}

bool EcmSketch::compatible_with(const EcmSketch& other) const {
  const bool base = plan_ == other.plan_ &&
                    master_seed_ == other.master_seed_ &&
                    window_.length == other.window_.length &&
                    window_.mode == other.window_.mode;
  if (!base) return false;
  if (plan_.backend != Backend::rw) return true;
  // Randomized waves only merge with identical sampling structure.
  return window_ == other.window_ && rw_constant_ == other.rw_constant_;
}

EcmSketch EcmSketch::compose(std::span<const EcmSketch* const> inputs,
                             double epsilon_prime) {
  if (inputs.empty()) throw ConfigError("compose needs at least one sketch");
  const EcmSketch& first = *inputs.front();
  for (const EcmSketch* in : inputs) {
    if (!first.compatible_with(*in)) {
      throw IncompatibleError(
          "sketches differ in dimensions, hash seeds, window or backend");
    }
  }
  const bool randomized = first.plan_.backend == Backend::rw;
  if (first.window_.mode == WindowMode::count_based) {
    throw UnsupportedMergeError(
        "count-based sliding windows cannot be aggregated in order");
  }
  if (!randomized && !(epsilon_prime > 0.0 && epsilon_prime < 1.0)) {
    throw ConfigError("merge epsilon must lie in (0,1)");
  }

  EcmSketch out;
  out.plan_ = first.plan_;
  out.window_ = first.window_;
  out.master_seed_ = first.master_seed_;
  out.rw_constant_ = first.rw_constant_;
  out.init_hashes();
  double node_eps = randomized ? first.window_.epsilon : epsilon_prime;
  std::uint32_t depth = 0;
  std::uint64_t capacity = 0;
  for (const EcmSketch* in : inputs) {
    node_eps = std::max(node_eps, in->node_epsilon_);
    depth = std::max(depth, in->merge_depth_);
    capacity += in->window_.capacity;
    if (in->seen_) {
      out.now_ = out.seen_ ? std::max(out.now_, in->now_) : in->now_;
      out.seen_ = true;
    }
  }
  out.merge_depth_ = depth + 1;
  out.node_epsilon_ = node_eps;
  if (!randomized) {
    out.window_.epsilon = epsilon_prime;
    out.window_.capacity = capacity;
  }

  const std::size_t cells = first.counters_.size();
  out.counters_.reserve(cells);
  std::vector<const WindowCounter*> column_inputs(inputs.size());
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      column_inputs[k] = &inputs[k]->counters_[i];
    }
    out.counters_.push_back(
        WindowCounter::merge(column_inputs, epsilon_prime));
  }
  return out;
}

double EcmSketch::window_error() const {
  if (plan_.backend == Backend::rw || merge_depth_ == 0) return window_.epsilon;
  return multi_level_error(node_epsilon_, merge_depth_);
}

MemoryReport EcmSketch::memory_report() const {
  MemoryReport r;
  r.counters = counters_.size();
  // Hash parameters: two 128-bit words per row.
  r.model_bits = static_cast<std::uint64_t>(plan_.depth) * 256;
  r.actual_bytes = sizeof(*this) + hashes_.size() * sizeof(MultiplyShift);
  for (const WindowCounter& c : counters_) {
    r.model_bits += c.model_bits();
    r.actual_bytes += c.memory_bytes();
  }
  r.model_bytes = (r.model_bits + 7) / 8;
  return r;
}

std::vector<std::uint8_t> EcmSketch::serialize() const {
  ByteWriter out;
  out.magic("ECMS");
  out.u16(kVersion);
  out.u8(static_cast<std::uint8_t>(plan_.profile));
  out.u8(static_cast<std::uint8_t>(plan_.backend));
  out.f64(plan_.epsilon);
  out.f64(plan_.delta);
  out.f64(plan_.epsilon_sw);
  out.f64(plan_.epsilon_cm);
  out.f64(plan_.delta_sw);
  out.f64(plan_.delta_cm);
  out.u32(plan_.width);
  out.u32(plan_.depth);
  out.u64(window_.length);
  out.u8(static_cast<std::uint8_t>(window_.mode));
  out.f64(window_.epsilon);
  out.u64(window_.capacity);
  out.u64(master_seed_);
  out.f64(rw_constant_);
  out.u32(merge_depth_);
  out.f64(node_epsilon_);
  out.u8(seen_ ? 1 : 0);
  out.u64(now_);
  ByteWriter frame;
  for (const WindowCounter& c : counters_) {
    frame = ByteWriter();
    c.serialize(frame);
    out.blob(frame.data());
  }
  return out.take();
}

EcmSketch EcmSketch::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("ECMS");
  const std::uint16_t version = in.u16();
  if (version != kVersion) {
    throw FormatError("unsupported sketch frame version " +
                      std::to_string(version));
  }
  EcmSketch s;
  const std::uint8_t profile = in.u8();
  const std::uint8_t backend = in.u8();
  if (profile > 1 || backend > 2) throw FormatError("bad sketch plan tags");
  s.plan_.profile = static_cast<QueryProfile>(profile);
  s.plan_.backend = static_cast<Backend>(backend);
  s.plan_.epsilon = in.f64();
  s.plan_.delta = in.f64();
  s.plan_.epsilon_sw = in.f64();
  s.plan_.epsilon_cm = in.f64();
  s.plan_.delta_sw = in.f64();
  s.plan_.delta_cm = in.f64();
  s.plan_.width = in.u32();
  s.plan_.depth = in.u32();
  if (s.plan_.width == 0 || s.plan_.depth == 0 ||
      static_cast<std::uint64_t>(s.plan_.width) * s.plan_.depth > (1u << 26)) {
    throw FormatError("implausible sketch dimensions");
  }
  s.window_.length = in.u64();
  const std::uint8_t mode = in.u8();
  if (mode > 1) throw FormatError("unknown window mode");
  s.window_.mode = static_cast<WindowMode>(mode);
  s.window_.epsilon = in.f64();
  s.window_.capacity = in.u64();
  s.master_seed_ = in.u64();
  s.rw_constant_ = in.f64();
  s.merge_depth_ = in.u32();
  s.node_epsilon_ = in.f64();
  s.seen_ = in.u8() != 0;
  s.now_ = in.u64();
  s.init_hashes();
  const std::size_t cells = static_cast<std::size_t>(s.plan_.width) * s.plan_.depth;
  s.counters_.reserve(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    s.counters_.push_back(WindowCounter::deserialize(in.blob()));
    if (s.counters_.back().backend() != s.plan_.backend) {
      throw FormatError("counter backend disagrees with the sketch plan");
    }
  }
  if (!in.at_end()) throw FormatError("trailing bytes after sketch frame");
  return s;
}

}  // namespace ecm
