#include "avcredit/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace avcredit {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Entry {
  std::string value;
  int line{0};
};

class KeyValues {
 public:
  explicit KeyValues(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  std::optional<double> number(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    const std::string& v = it->second.value;
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
      fail(it->second.line, "'" + key + "' expects a number, got '" + v + "'");
    }
    return out;
  }

  double required(const std::string& key) {
    auto v = number(key);
    if (!v) throw ConfigError("config: missing required key '" + key + "'");
    return *v;
  }

  void assign(const std::string& key, double& target) {
    if (auto v = number(key)) target = *v;
  }

  void assign_int(const std::string& key, int& target) {
    if (auto v = number(key)) {
      if (*v != std::floor(*v) || std::abs(*v) > 1e9) {
        fail(entries_.at(key).line, "'" + key + "' expects an integer");
      }
      target = static_cast<int>(*v);
    }
  }

  std::optional<std::string> text(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    return it->second.value;
  }

  int line_of(const std::string& key) const { return entries_.at(key).line; }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : entries_)
      if (!used_.count(key)) out.push_back(key);
    return out;
  }

  [[noreturn]] static void fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
  }

 private:
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
};

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) KeyValues::fail(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) KeyValues::fail(line_no, "empty key or value");
    if (entries.count(key)) KeyValues::fail(line_no, "duplicate key '" + key + "'");
    entries.emplace(key, Entry{value, line_no});
  }

  KeyValues kv(std::move(entries));
  ScenarioConfig c;
  kv.assign("v", c.v);
  kv.assign("d", c.d);
  kv.assign("kx", c.gains.kx);
  kv.assign("ky", c.gains.ky);
  kv.assign("ktheta", c.gains.ktheta);
  kv.assign("kappa1", c.kappa1);
  kv.assign("kappa2", c.kappa2);
  c.lambda = kv.required("lambda");
  kv.assign("gamma", c.gamma);
  kv.assign("k", c.k);
  kv.assign("dt", c.dt);
  kv.assign("duration", c.duration);
  kv.assign("goal_tolerance", c.goal_tolerance);
  if (auto s = kv.text("stop_at_goals")) {
    if (*s == "true") c.stop_at_goals = true;
    else if (*s == "false") c.stop_at_goals = false;
    else KeyValues::fail(kv.line_of("stop_at_goals"), "stop_at_goals expects true or false");
  }
  if (auto s = kv.text("controller")) {
    if (*s == "auction") c.controller = ControllerMode::auction;
    else if (*s == "qp") c.controller = ControllerMode::qp;
    else KeyValues::fail(kv.line_of("controller"), "controller expects auction or qp");
  }
  if (auto w = kv.number("omega_max")) c.omega_max = *w;
  kv.assign("auction.eps", c.auction.eps);
  kv.assign("auction.grid_step", c.auction.grid_step);
  kv.assign_int("auction.max_rounds", c.auction.max_rounds);
  kv.assign("auction.initial_decrement", c.auction.initial_decrement);
  kv.assign_int("auction.decrement_divisor", c.auction.decrement_divisor);

  for (int i = 1; kv.has("agents." + std::to_string(i) + ".x0"); ++i) {
    const std::string p = "agents." + std::to_string(i) + ".";
    AgentSpec a;
    a.x0 = kv.required(p + "x0");
    a.y0 = kv.required(p + "y0");
    a.goal_x = kv.required(p + "goal_x");
    a.y_ref = kv.number(p + "y_ref").value_or(a.y0);
    a.theta0 = kv.number(p + "theta0").value_or(a.goal_x >= a.x0 ? 0.0 : std::numbers::pi);
    kv.assign(p + "alpha", a.alpha);
    c.agents.push_back(a);
  }

  if (const auto extra = kv.unused(); !extra.empty()) {
    std::string msg = "config: unknown key";
    for (const auto& key : extra) msg += " '" + key + "' (line " + std::to_string(kv.line_of(key)) + ")";
    throw ConfigError(msg);
  }
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const ScenarioConfig& c) {
  std::map<std::string, std::string> kv;
  kv["v"] = shortest(c.v);
  kv["d"] = shortest(c.d);
  kv["kx"] = shortest(c.gains.kx);
  kv["ky"] = shortest(c.gains.ky);
  kv["ktheta"] = shortest(c.gains.ktheta);
  kv["kappa1"] = shortest(c.kappa1);
  kv["kappa2"] = shortest(c.kappa2);
  kv["lambda"] = shortest(c.lambda);
  kv["gamma"] = shortest(c.gamma);
  kv["k"] = shortest(c.k);
  kv["dt"] = shortest(c.dt);
  kv["duration"] = shortest(c.duration);
  kv["stop_at_goals"] = c.stop_at_goals ? "true" : "false";
  kv["goal_tolerance"] = shortest(c.goal_tolerance);
  kv["controller"] = to_string(c.controller);
  if (c.omega_max) kv["omega_max"] = shortest(*c.omega_max);
  kv["auction.eps"] = shortest(c.auction.eps);
  kv["auction.grid_step"] = shortest(c.auction.grid_step);
  kv["auction.max_rounds"] = std::to_string(c.auction.max_rounds);
  kv["auction.initial_decrement"] = shortest(c.auction.initial_decrement);
  kv["auction.decrement_divisor"] = std::to_string(c.auction.decrement_divisor);
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const std::string p = "agents." + std::to_string(i + 1) + ".";
    const AgentSpec& a = c.agents[i];
    kv[p + "x0"] = shortest(a.x0);
    kv[p + "y0"] = shortest(a.y0);
    kv[p + "theta0"] = shortest(a.theta0);
    kv[p + "goal_x"] = shortest(a.goal_x);
    kv[p + "y_ref"] = shortest(a.y_ref);
    kv[p + "alpha"] = shortest(a.alpha);
  }
  std::string out;
  for (const auto& [key, value] : kv) out += key + "=" + value + "\n";
  return out;
}

std::string config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static constexpr char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace avcredit
