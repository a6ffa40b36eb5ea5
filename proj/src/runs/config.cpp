#include "runs/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace predprey {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// One entry per config key: how to read it from text and print it back.
struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> print;
};

template <class T>
T parse_number(const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* stop = nullptr;
    errno = 0;
    value = std::strtod(begin, &stop);
    if (stop != end || text.empty() || errno == ERANGE) throw std::invalid_argument("not a number");
  } else {
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument("not an integer");
  }
  return value;
}

Field real(const char* section, const char* key, double& (*ref)(RunConfig&)) {
  return {section, key, [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<double>(v); },
          [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); }};
}

template <class Int>
Field integer(const char* section, const char* key, Int& (*ref)(RunConfig&)) {
  return {section, key, [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<Int>(v); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
#define PP_REAL(sec, key, expr) f.push_back(real(sec, key, [](RunConfig& c) -> double& { return expr; }))
#define PP_INT(sec, key, type, expr) \
  f.push_back(integer<type>(sec, key, [](RunConfig& c) -> type& { return expr; }))
    PP_REAL("arena", "side_length", c.env.arena.side_length);
    PP_REAL("arena", "robot_body_radius", c.env.arena.robot_body_radius);
    PP_REAL("arena", "wheel_radius", c.env.arena.wheel_radius);
    PP_REAL("arena", "axle_length", c.env.arena.axle_length);
    PP_REAL("arena", "omega_max", c.env.arena.omega_max);
    PP_REAL("arena", "dt", c.env.arena.dt);
    PP_REAL("arena", "episode_time", c.env.arena.episode_time);
    PP_REAL("arena", "catch_radius", c.env.arena.catch_radius);
    PP_REAL("arena", "ir_range", c.env.arena.ir_range);
    PP_REAL("camera", "fov", c.env.camera.fov);
    PP_REAL("camera", "target_radius", c.env.camera.target_radius);
    PP_INT("neat", "population_size", int, c.env.neat.population_size);
    PP_INT("neat", "generations", int, c.env.neat.generations);
    PP_REAL("neat", "weight_mutate_rate", c.env.neat.weight_mutate_rate);
    PP_REAL("neat", "bias_mutate_rate", c.env.neat.bias_mutate_rate);
    PP_REAL("neat", "p_add_connection", c.env.neat.p_add_connection);
    PP_REAL("neat", "p_delete_connection", c.env.neat.p_delete_connection);
    PP_REAL("neat", "p_add_node", c.env.neat.p_add_node);
    PP_REAL("neat", "p_delete_node", c.env.neat.p_delete_node);
    PP_INT("neat", "elites", int, c.env.neat.elites);
    PP_REAL("neat", "c1_excess", c.env.neat.c1_excess);
    PP_REAL("neat", "c2_disjoint", c.env.neat.c2_disjoint);
    PP_REAL("neat", "c3_weight", c.env.neat.c3_weight);
    PP_REAL("neat", "compatibility_threshold", c.env.neat.compatibility_threshold);
    PP_INT("neat", "stagnation_limit", int, c.env.neat.stagnation_limit);
    PP_REAL("neat", "weight_perturb_stddev", c.env.neat.weight_perturb_stddev);
    PP_REAL("neat", "weight_replace_prob", c.env.neat.weight_replace_prob);
    PP_REAL("neat", "weight_replace_range", c.env.neat.weight_replace_range);
    PP_REAL("neat", "weight_clamp", c.env.neat.weight_clamp);
    PP_REAL("neat", "bias_perturb_stddev", c.env.neat.bias_perturb_stddev);
    PP_REAL("neat", "initial_weight_range", c.env.neat.initial_weight_range);
    PP_REAL("neat", "crossover_rate", c.env.neat.crossover_rate);
    PP_REAL("neat", "inherit_disabled_prob", c.env.neat.inherit_disabled_prob);
    PP_INT("coevo", "evaluations", int, c.env.coevo.evaluations);
    PP_INT("coevo", "hof_window", int, c.env.coevo.hof_window);
    PP_INT("coevo", "master_seed", std::uint64_t, c.env.coevo.master_seed);
    PP_INT("run", "threads", unsigned, c.threads);
#undef PP_REAL
#undef PP_INT
    f.push_back({"run", "output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                 [](const RunConfig& c) { return c.output_dir; }});
    return f;
  }();
  return table;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  if (output_dir.empty()) throw Error(ErrorCode::kConfig, "run: output_dir must not be empty");
  if (threads < 1) throw Error(ErrorCode::kConfig, "run: threads must be >= 1");
}

RunConfig default_run_config() { return RunConfig{}; }

RunConfig smoke_run_config() {
  RunConfig c;
  c.env.neat.generations = 10;
  c.env.neat.population_size = 8;
  c.env.coevo.evaluations = 3;
  c.output_dir = "runs/smoke";
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig config;
  std::map<std::pair<std::string, std::string>, const Field*> index;
  std::set<std::string> sections;
  for (const auto& f : fields()) {
    index[{f.section, f.key}] = &f;
    sections.insert(f.section);
  }
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kConfig, source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' outside of a section");
    auto it = index.find({section, key});
    if (it == index.end()) fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert({section, key}).second) fail("duplicate key '" + key + "'");
    try {
      it->second->parse(config, value);
    } catch (const std::exception&) {
      fail("invalid value '" + value + "' for '" + key + "'");
    }
  }
  config.env.coevo.threads = config.threads;
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, source + ": " + e.what());
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

std::string emit_run_config(const RunConfig& config, bool include_run_section) {
  std::string out = "# predprey run configuration\n";
  std::string section;
  for (const auto& f : fields()) {
    if (f.section == "run" && !include_run_section) continue;
    if (f.section != section) {
      section = f.section;
      out += "\n[" + section + "]\n";
    }
    out += f.key + " = " + f.print(config) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::string text;
  for (const auto& f : fields()) {
    if (f.section == "run") continue;
    text += f.section + "." + f.key + "=" + f.print(config) + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

}  // namespace predprey
