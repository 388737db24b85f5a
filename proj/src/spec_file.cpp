#include "heatnmf/spec_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "heatnmf/csv.hpp"
#include "heatnmf/error.hpp"

namespace heatnmf {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> out;
  std::size_t start = 0;
  std::size_t number = 1;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    Line l{number, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t b = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > b) l.tokens.push_back(line.substr(b, i - b));
    }
    if (!l.tokens.empty()) out.push_back(std::move(l));
    if (end == std::string_view::npos) break;
    start = end + 1;
    ++number;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw validation_error("spec line " + std::to_string(line) + ": " + what);
}

double number(std::string_view s, std::size_t line, std::string_view key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(line, "value '" + std::string(s) + "' for '" + std::string(key) + "' is not a number");
  }
  return v;
}

std::uint64_t integer(std::string_view s, std::size_t line, std::string_view key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(line, "value '" + std::string(s) + "' for '" + std::string(key) + "' is not a non-negative integer");
  }
  return v;
}

std::pair<std::string_view, std::string_view> key_value(std::string_view token, std::size_t line) {
  const auto eq = token.find('=');
  if (eq == std::string_view::npos || eq == 0) fail(line, "expected key=value, got '" + std::string(token) + "'");
  return {token.substr(0, eq), token.substr(eq + 1)};
}

std::optional<ComponentKind> kind_from(std::string_view s) {
  if (s == "mean") return ComponentKind::MeanCurve;
  if (s == "cooling") return ComponentKind::CoolingExp;
  if (s == "heating") return ComponentKind::HeatingExp;
  if (s == "bath" || s == "bath-pulse") return ComponentKind::BathPulse;
  if (s == "kernel" || s == "heat-kernel") return ComponentKind::HeatKernel;
  return std::nullopt;
}

WeightModel parse_weights(std::string_view text, std::size_t line) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  std::map<std::string, double, std::less<>> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto [k, v] = key_value(rest.substr(0, comma), line);
      params[std::string(k)] = number(v, line, k);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  auto take = [&](std::string_view key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
  };
  WeightModel model;
  if (name == "constant") {
    model = weights::Constant{take("value", 1.0)};
  } else if (name == "drift") {
    const double s = take("start", 0.0);
    model = weights::LinearDrift{s, take("end", 1.0)};
  } else if (name == "periodic") {
    const double b = take("base", 0.0);
    const double a = take("amp", 1.0);
    model = weights::Periodic{b, a, take("period", 50.0)};
  } else if (name == "walk") {
    const double s = take("start", 1.0);
    model = weights::RandomWalk{s, take("step", 0.05)};
  } else {
    fail(line, "unknown weight model '" + std::string(name) + "'");
  }
  if (!params.empty()) fail(line, "unknown parameter '" + params.begin()->first + "' for weights " + std::string(name));
  return model;
}

struct ParsedComponent {
  ComponentTemplate tmpl;
  std::optional<WeightModel> weights;
};

ParsedComponent parse_component(const Line& l, bool allow_weights) {
  const auto kind = kind_from(l.tokens[0]);
  if (!kind) fail(l.number, "unknown component kind '" + std::string(l.tokens[0]) + "'");
  ParsedComponent pc;
  pc.tmpl.kind = *kind;
  for (std::size_t i = 1; i < l.tokens.size(); ++i) {
    const auto [key, value] = key_value(l.tokens[i], l.number);
    if (*kind == ComponentKind::MeanCurve && key != "weights") fail(l.number, "'mean' takes no parameters");
    if (key == "amp") {
      pc.tmpl.amp = number(value, l.number, key);
    } else if (key == "tau_c") {
      pc.tmpl.tau_c = number(value, l.number, key);
    } else if (key == "tau_h") {
      pc.tmpl.tau_h = number(value, l.number, key);
    } else if (key == "r") {
      pc.tmpl.r = number(value, l.number, key);
    } else if (key == "weights" && allow_weights) {
      pc.weights = parse_weights(value, l.number);
    } else {
      fail(l.number, "unknown parameter '" + std::string(key) + "'");
    }
  }
  return pc;
}

}  // namespace

std::vector<ComponentTemplate> parse_component_spec(std::string_view text) {
  std::vector<ComponentTemplate> out;
  for (const Line& l : tokenize(text)) out.push_back(parse_component(l, false).tmpl);
  if (out.empty()) throw validation_error("component spec: no components");
  return out;
}

std::vector<ComponentTemplate> load_component_spec(const std::filesystem::path& path) {
  return parse_component_spec(read_text_file(path));
}

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  std::optional<std::size_t> n, m;
  double dt = 1.0;
  SyntheticSpec spec;
  std::vector<std::pair<std::size_t, ParsedComponent>> comps;

  for (const Line& l : tokenize(text)) {
    const std::string_view head = l.tokens[0];
    auto single = [&]() -> std::string_view {
      if (l.tokens.size() != 2) fail(l.number, "'" + std::string(head) + "' takes exactly one value");
      return l.tokens[1];
    };
    if (head == "n") {
      n = integer(single(), l.number, head);
    } else if (head == "m") {
      m = integer(single(), l.number, head);
    } else if (head == "dt") {
      dt = number(single(), l.number, head);
    } else if (head == "seed") {
      spec.seed = integer(single(), l.number, head);
    } else if (head == "noise") {
      const auto [key, value] = key_value(single(), l.number);
      spec.noise_sigma = number(value, l.number, key);
      if (key == "sigma") {
        spec.noise_scale = NoiseScale::Absolute;
      } else if (key == "range") {
        spec.noise_scale = NoiseScale::RangeFraction;
      } else {
        fail(l.number, "noise takes sigma=<std> or range=<fraction>");
      }
      if (spec.noise_sigma < 0.0) fail(l.number, "noise must be >= 0");
    } else {
      ParsedComponent pc = parse_component(l, true);
      if (pc.tmpl.kind == ComponentKind::MeanCurve) {
        fail(l.number, "'mean' cannot be synthesised; use an explicit curve");
      }
      comps.emplace_back(l.number, std::move(pc));
    }
  }
  if (!n || !m) throw validation_error("synthetic spec: 'n' and 'm' are required");
  try {
    spec.grid = TimeGrid(*m, dt);
  } catch (const Error& e) {
    throw validation_error(std::string("synthetic spec: ") + e.what());
  }
  spec.n = *n;
  for (auto& [line, pc] : comps) {
    PlantedComponent p;
    p.curve = resolve(pc.tmpl, spec.grid.t_end(), 1.0);
    try {
      validate(p.curve);
    } catch (const Error& e) {
      fail(line, e.what());
    }
    p.weights = pc.weights.value_or(weights::Constant{1.0});
    spec.components.push_back(std::move(p));
  }
  if (spec.components.empty()) throw validation_error("synthetic spec: no components");
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  return parse_synthetic_spec(read_text_file(path));
}

}  // namespace heatnmf
