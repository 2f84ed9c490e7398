#include "sandflux/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "presets.hpp"

namespace sandflux {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string at_line(int line) { return " at line " + std::to_string(line); }

double parse_double(const std::string& token, const std::string& key, int line) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error("invalid number '" + token + "' for '" + key + "'" + at_line(line));
  }
  return v;
}

long long parse_int(const std::string& token, const std::string& key, int line) {
  long long v = 0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("invalid integer '" + token + "' for '" + key + "'" + at_line(line));
  }
  return v;
}

bool parse_bool(const std::string& token, const std::string& key, int line) {
  if (token == "true" || token == "yes" || token == "on" || token == "1") return true;
  if (token == "false" || token == "no" || token == "off" || token == "0") return false;
  throw Error("invalid boolean '" + token + "' for '" + key + "'" + at_line(line));
}

std::vector<double> parse_list(const std::string& text, const std::string& key, int line) {
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_double(token, key, line));
  return out;
}

enum class Section { top, source, sink, k };

struct PendingShape {
  Section section = Section::top;
  int line = 0;
  std::optional<std::string> kind;
  std::optional<std::vector<double>> params;
  std::optional<double> value;
};

ShapeSpec build_shape(const PendingShape& s) {
  const std::string where = " in shape block" + at_line(s.line);
  if (!s.kind) throw Error("missing 'kind'" + where);
  if (!s.params) throw Error("missing 'params'" + where);
  if (!s.value) throw Error("missing 'value'" + where);
  const std::vector<double>& p = *s.params;

  ShapeKind kind{};
  try {
    kind = shape_kind_from_string(*s.kind);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + where);
  }

  double value = *s.value;
  if (s.section == Section::sink) {
    if (!(value > 0.0)) throw Error("sink value must be a positive magnitude" + where);
    value = -value;
  }
  if (s.section == Section::k && !(value > 0.0)) throw Error("k override must be positive" + where);
  if (kind == ShapeKind::point && s.section == Section::k) {
    throw Error("point shapes cannot carry k overrides" + where);
  }

  try {
    switch (kind) {
      case ShapeKind::rectangle:
      case ShapeKind::ellipse: {
        if (p.size() != 4 && p.size() != 5) {
          throw Error(to_string(kind) + " needs params cx cy a b [angle]");
        }
        const double angle = p.size() == 5 ? p[4] : 0.0;
        return kind == ShapeKind::rectangle ? ShapeSpec::rectangle(p[0], p[1], p[2], p[3], angle, value)
                                            : ShapeSpec::ellipse(p[0], p[1], p[2], p[3], angle, value);
      }
      case ShapeKind::polygon: {
        if (p.size() < 6 || p.size() % 2 != 0) {
          throw Error("polygon needs params x1 y1 x2 y2 x3 y3 ...");
        }
        std::vector<Point> v;
        for (std::size_t n = 0; n < p.size(); n += 2) v.push_back({p[n], p[n + 1]});
        return ShapeSpec::polygon(std::move(v), value);
      }
      case ShapeKind::point:
        if (p.size() != 2) throw Error("point needs params x y");
        return ShapeSpec::point(p[0], p[1], value);
    }
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + where);
  }
  throw Error("unsupported shape" + where);
}

class Parser {
 public:
  explicit Parser(RunConfig& cfg) : cfg_(cfg) {}

  void run(const std::string& text, bool allow_preset) {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (body.empty()) continue;

      if (body.front() == '[') {
        finish_shape();
        open_section(body, line);
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw Error("expected 'key = value'" + at_line(line));
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key.empty()) throw Error("missing key" + at_line(line));
      if (value.empty()) throw Error("missing value for '" + key + "'" + at_line(line));

      const bool first = first_setting_;
      first_setting_ = false;
      if (section_ != Section::top) {
        shape_key(key, value, line);
      } else if (key == "preset") {
        if (!allow_preset || !first) throw Error("'preset' must be the first setting" + at_line(line));
      } else {
        top_key(key, value, line);
      }
    }
    finish_shape();
  }

 private:
  void open_section(const std::string& header, int line) {
    if (header == "[shape.source]") {
      section_ = Section::source;
    } else if (header == "[shape.sink]") {
      section_ = Section::sink;
    } else if (header == "[shape.k]") {
      section_ = Section::k;
    } else {
      throw Error("unknown section '" + header + "'" + at_line(line));
    }
    pending_ = PendingShape{};
    pending_.section = section_;
    pending_.line = line;
  }

  void finish_shape() {
    if (section_ == Section::top) return;
    ShapeSpec shape = build_shape(pending_);
    if (section_ == Section::k) {
      cfg_.problem.k_regions.push_back(std::move(shape));
    } else {
      cfg_.problem.sources.push_back(std::move(shape));
    }
    section_ = Section::top;
  }

  void shape_key(const std::string& key, const std::string& value, int line) {
    if (key == "kind") {
      pending_.kind = value;
    } else if (key == "params") {
      pending_.params = parse_list(value, key, line);
    } else if (key == "value") {
      pending_.value = parse_double(value, key, line);
    } else {
      throw Error("unknown key '" + key + "'" + at_line(line));
    }
  }

  void top_key(const std::string& key, const std::string& v, int line) {
    RunConfig& c = cfg_;
    SolverParams& s = c.solver;
    auto num = [&] { return parse_double(v, key, line); };
    auto integer = [&] { return parse_int(v, key, line); };
    auto flag = [&] { return parse_bool(v, key, line); };

    if (key == "domain") {
      const std::vector<double> d = parse_list(v, key, line);
      if (d.size() != 4) throw Error("domain needs x0 y0 x1 y1" + at_line(line));
      c.problem.domain = {d[0], d[1], d[2], d[3]};
    } else if (key == "k_base") {
      c.problem.k_base = num();
    } else if (key == "u0") {
      c.problem.u0_path = v == "zero" ? std::string() : v;
    } else if (key == "resolution") {
      c.resolution = static_cast<int>(integer());
    } else if (key == "subsample") {
      c.subsample = static_cast<int>(integer());
    } else if (key == "margin_check") {
      c.margin_check = flag();
    } else if (key == "out") {
      c.out_dir = v;
    } else if (key == "write_fields") {
      c.write_fields = flag();
    } else if (key == "write_history") {
      c.write_history = flag();
    } else if (key == "write_diagnostics") {
      c.write_diagnostics = flag();
    } else if (key == "tol_div") {
      c.tol_div = num();
    } else if (key == "tol_slope") {
      c.tol_slope = num();
    } else if (key == "theta_a") {
      c.theta_a = num();
    } else if (key == "dt") {
      s.dt = num();
    } else if (key == "eps") {
      if (v == "auto") {
        c.eps.reset();
      } else {
        c.eps = num();
      }
    } else if (key == "omega") {
      s.omega = num();
    } else if (key == "sweeps_per_step") {
      s.sweeps_per_step = static_cast<int>(integer());
    } else if (key == "newton_iters") {
      s.newton_iters = static_cast<int>(integer());
    } else if (key == "tol_stationary") {
      s.tol_stationary = num();
    } else if (key == "stationary_patience") {
      s.stationary_patience = static_cast<int>(integer());
    } else if (key == "max_steps") {
      s.max_steps = integer();
    } else if (key == "order") {
      if (v == "lexicographic") {
        s.order = SweepOrder::lexicographic;
      } else if (v == "symmetric") {
        s.order = SweepOrder::symmetric;
      } else {
        throw Error("order must be lexicographic or symmetric" + at_line(line));
      }
    } else if (key == "levels") {
      s.levels = static_cast<int>(integer());
    } else if (key == "coarse_sweeps") {
      s.coarse_sweeps = static_cast<int>(integer());
    } else {
      throw Error("unknown key '" + key + "'" + at_line(line));
    }
  }

  RunConfig& cfg_;
  bool first_setting_ = true;
  Section section_ = Section::top;
  PendingShape pending_;
};

// Value of a top-level `preset` key appearing before any other setting.
std::optional<std::string> find_preset(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq != std::string::npos && trim(body.substr(0, eq)) == "preset") {
      return trim(body.substr(eq + 1));
    }
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

void RunConfig::validate() const {
  problem.validate();
  solver.validate();
  if (resolution < 16) throw Error("resolution must be at least 16 cells on the short axis");
  if (subsample < 1) throw Error("subsample must be at least 1");
  if (eps && !(*eps > 0.0)) throw Error("eps must be positive");
  if (!(tol_div > 0.0)) throw Error("tol_div must be positive");
  if (tol_slope && !(*tol_slope >= 0.0)) throw Error("tol_slope must be nonnegative");
  if (!(theta_a >= 0.0 && theta_a <= 1.0)) throw Error("theta_a must lie in [0, 1]");
  if (out_dir.empty()) throw Error("output directory must not be empty");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"example1", "example2", "example3",
                                                 "accurate-potential"};
  return names;
}

const std::string& preset_text(const std::string& name) {
  static const std::map<std::string, std::string> presets = {
      {"example1", presets::example1},
      {"example2", presets::example2},
      {"example3", presets::example3},
      {"accurate-potential", presets::accurate_potential},
  };
  const auto it = presets.find(name);
  if (it == presets.end()) throw Error("unknown preset '" + name + "'");
  return it->second;
}

void apply_config_text(RunConfig& config, const std::string& text) {
  Parser(config).run(text, true);
}

RunConfig parse_config(const std::string& text, const std::optional<std::string>& preset_override) {
  RunConfig config;
  const std::optional<std::string> preset = preset_override ? preset_override : find_preset(text);
  if (preset) {
    Parser(config).run(preset_text(*preset), false);
    config.preset = *preset;
  }
  Parser(config).run(text, true);
  config.validate();
  return config;
}

Grid make_grid(const Box& domain, int resolution) {
  if (resolution < 1) throw Error("resolution must be positive");
  const double short_side = std::min(domain.width(), domain.height());
  if (!(short_side > 0.0)) throw Error("domain box must have positive area");
  const double h = short_side / resolution;
  auto cells = [&](double length) {
    return std::max(resolution, static_cast<int>(std::ceil(length / h - 1e-9)));
  };
  const int nx = cells(domain.width());
  const int ny = cells(domain.height());
  const double x0 = 0.5 * (domain.x0 + domain.x1) - 0.5 * nx * h;
  const double y0 = 0.5 * (domain.y0 + domain.y1) - 0.5 * ny * h;
  return Grid(nx, ny, h, x0, y0);
}

}  // namespace sandflux
