#include "ecm/streams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ecm/errors.hpp"
#include "ecm/hashing.hpp"

namespace ecm {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

// std::from_chars for double is missing from older libstdc++ builds.
double parse_real(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw ConfigError("bad " + std::string(what) + " '" + s + "'");
  }
  return v;
}

}  // namespace

StreamSpec StreamSpec::parse(std::string_view text, std::uint64_t seed) {
  StreamSpec spec;
  spec.seed = seed;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  if (colon == std::string_view::npos ||
      (head != "zipf" && head != "uniform" && head != "hot" &&
       head != "burst")) {
    spec.kind = Kind::file;
    spec.path = std::string(text);
    return spec;
  }
  const auto args = split(text.substr(colon + 1), ',');
  if (head == "zipf") {
    if (args.size() != 3) throw ConfigError("zipf stream needs s,K,M");
    spec.kind = Kind::zipf;
    spec.skew = parse_real(args[0], "zipf skew");
    spec.keys = parse_number<std::uint64_t>(args[1], "key count");
    spec.count = parse_number<std::uint64_t>(args[2], "event count");
    if (!(spec.skew >= 0.0)) throw ConfigError("zipf skew must be >= 0");
  } else if (head == "uniform") {
    if (args.size() != 2) throw ConfigError("uniform stream needs K,M");
    spec.kind = Kind::uniform;
    spec.keys = parse_number<std::uint64_t>(args[0], "key count");
    spec.count = parse_number<std::uint64_t>(args[1], "event count");
  } else {
    if (args.size() != 3) throw ConfigError(std::string(head) + " stream needs K,M,p");
    spec.kind = head == "hot" ? Kind::hot : Kind::burst;
    spec.keys = parse_number<std::uint64_t>(args[0], "key count");
    spec.count = parse_number<std::uint64_t>(args[1], "event count");
    spec.hot_mass = parse_real(args[2], "hot mass");
    if (!(spec.hot_mass >= 0.0 && spec.hot_mass <= 1.0)) {
      throw ConfigError("hot mass must lie in [0,1]");
    }
  }
  if (spec.keys == 0) throw ConfigError("key count must be positive");
  return spec;
}

std::string StreamSpec::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::file: out << path; break;
    case Kind::zipf: out << "zipf:" << skew << ',' << keys << ',' << count; break;
    case Kind::uniform: out << "uniform:" << keys << ',' << count; break;
    case Kind::hot:
    case Kind::burst:
      out << (kind == Kind::hot ? "hot:" : "burst:") << keys << ',' << count
          << ',' << hot_mass;
      break;
  }
  return out.str();
}

std::uint64_t planted_key(std::uint64_t keys, std::uint64_t seed) {
  return mix64(seed ^ 0x686f74ULL) % keys;
}

std::vector<StreamEvent> generate(const StreamSpec& spec) {
  std::vector<StreamEvent> out;
  out.reserve(spec.count);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> any_key(0, spec.keys - 1);
  switch (spec.kind) {
    case StreamSpec::Kind::zipf: {
      std::vector<double> cdf(spec.keys);
      double acc = 0.0;
      for (std::uint64_t i = 0; i < spec.keys; ++i) {
        acc += 1.0 / std::pow(static_cast<double>(i + 1), spec.skew);
        cdf[i] = acc;
      }
      for (std::uint64_t i = 0; i < spec.count; ++i) {
        const double u = unit(rng) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const auto rank = static_cast<std::uint64_t>(
            std::min<std::ptrdiff_t>(it - cdf.begin(), spec.keys - 1));
        out.push_back({i + 1, rank, 1});
      }
      break;
    }
    case StreamSpec::Kind::uniform:
      for (std::uint64_t i = 0; i < spec.count; ++i) {
        out.push_back({i + 1, any_key(rng), 1});
      }
      break;
    case StreamSpec::Kind::hot:
    case StreamSpec::Kind::burst: {
      const std::uint64_t hot = planted_key(spec.keys, spec.seed);
      const std::uint64_t calm =
          spec.kind == StreamSpec::Kind::burst ? spec.count / 2 : 0;
      for (std::uint64_t i = 0; i < spec.count; ++i) {
        const bool planted = i >= calm && unit(rng) < spec.hot_mass;
        out.push_back({i + 1, planted ? hot : any_key(rng), 1});
      }
      break;
    }
    case StreamSpec::Kind::file:
      throw ConfigError("file streams are loaded, not generated");
  }
  return out;
}

std::vector<StreamEvent> read_stream(std::istream& in) {
  std::vector<StreamEvent> out;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw IoError("line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v(line);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' ||
                          v.back() == '\r')) {
      v.remove_suffix(1);
    }
    if (v.empty()) continue;
    const auto fields = split(v, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      fail("expected timestamp<TAB>key[<TAB>value]");
    }
    StreamEvent e;
    try {
      e.ts = parse_number<std::uint64_t>(fields[0], "timestamp");
      if (fields.size() == 3) {
        e.value = parse_number<std::uint64_t>(fields[2], "value");
      }
    } catch (const ConfigError& err) {
      fail(err.what());
    }
    // Numeric keys are used as is; anything else is hashed.
    std::uint64_t numeric = 0;
    auto [ptr, ec] = std::from_chars(fields[1].data(),
                                     fields[1].data() + fields[1].size(), numeric);
    const bool is_number =
        ec == std::errc() && ptr == fields[1].data() + fields[1].size();
    e.key = is_number ? numeric : key_hash(fields[1]);
    if (e.value == 0) fail("value must be positive");
    if (!out.empty() && e.ts < out.back().ts) {
      fail("timestamp " + std::to_string(e.ts) + " precedes " +
           std::to_string(out.back().ts));
    }
    out.push_back(e);
  }
  if (in.bad()) throw IoError("read failure after line " + std::to_string(lineno));
  return out;
}

std::vector<StreamEvent> read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stream file '" + path + "'");
  try {
    return read_stream(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::vector<StreamEvent> load_stream(const StreamSpec& spec) {
  if (spec.kind == StreamSpec::Kind::file) return read_stream_file(spec.path);
  return generate(spec);
}

}  // namespace ecm
