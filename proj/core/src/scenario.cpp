#include "uhs/scenario.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "uhs/reports.hpp"
#include "uhs/util.hpp"

namespace uhs {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

} // namespace

Scenario Scenario::parse_string(const std::string& text, bool apply_env) {
  Scenario sc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) {
      // keep # inside quotes
      bool quoted = false;
      for (std::size_t i = 0; i < hash; ++i)
        if (line[i] == '"') quoted = !quoted;
      if (!quoted) line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(ErrorKind::usage, "malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::usage, "expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) fail(ErrorKind::usage, "empty key at line " + std::to_string(lineno));
    std::string path = section.empty() ? key : section + "." + key;
    sc.kv_[path] = value;
  }
  if (apply_env) {
    for (auto& [key, value] : sc.kv_) {
      std::string env = "UHS_";
      for (char c : key) env += c == '.' ? '_' : static_cast<char>(std::toupper(c));
      if (const char* v = std::getenv(env.c_str())) value = v;
    }
  }
  sc.validate();
  return sc;
}

Scenario Scenario::parse_file(const std::string& path, bool apply_env) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::usage, "cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), apply_env);
}

std::string Scenario::get_string(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Scenario::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (...) {
    fail(ErrorKind::usage, "key " + key + " is not a number: " + it->second);
  }
}

int Scenario::get_int(const std::string& key, int fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (...) {
    fail(ErrorKind::usage, "key " + key + " is not an integer: " + it->second);
  }
}

bool Scenario::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  fail(ErrorKind::usage, "key " + key + " is not a boolean: " + it->second);
}

std::vector<double> Scenario::get_array(const std::string& key, std::vector<double> fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::string s = it->second;
  if (!s.empty() && s.front() == '[') s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<int> Scenario::get_int_array(const std::string& key, std::vector<int> fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<int> out;
  for (double v : get_array(key, {})) out.push_back(static_cast<int>(v));
  return out;
}

std::string Scenario::fingerprint() const {
  std::string canon = toolkit_version;
  for (const auto& [k, v] : kv_) {
    canon += '\n';
    canon += k;
    canon += '=';
    canon += v;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canon)));
  return buf;
}

Grid Scenario::make_grid() const {
  return Grid(get_int("grid.d", 2), get_int("grid.n", 128), get_double("grid.box", 64.0));
}

Metric Scenario::make_metric() const {
  std::string profile = get_string("metric.profile", "flat");
  Signature sig = get_string("metric.signature", "elliptic") == "ultrahyperbolic"
                      ? Signature::ultrahyperbolic
                      : Signature::elliptic;
  int d = get_int("grid.d", 2);
  if (profile == "flat") return flat_metric(d, sig);
  if (profile == "elliptic-bump")
    return bump_metric(d, Signature::elliptic, get_double("metric.amplitude", 0.2),
                       get_double("metric.radius", 1.0));
  if (profile == "ultrahyperbolic-bump")
    return bump_metric(d, Signature::ultrahyperbolic, get_double("metric.amplitude", 0.2),
                       get_double("metric.radius", 1.0));
  if (profile == "trapping-annulus")
    return trapping_annulus_metric(d, get_double("metric.orbit_radius", 2.0),
                                   get_double("metric.width", 0.5));
  fail(ErrorKind::usage, "unknown metric profile " + profile);
}

namespace {

VectorBump bump_from(const Scenario& sc, const std::string& prefix, int d) {
  VectorBump b;
  b.d = d;
  auto amp_re = sc.get_array(prefix + "_amplitude", {0.0});
  auto amp_im = sc.get_array(prefix + "_amplitude_im", {});
  for (std::size_t a = 0; a < amp_re.size() && a < 3; ++a)
    b.amplitude[a] = complexd(amp_re[a], a < amp_im.size() ? amp_im[a] : 0.0);
  b.radius = sc.get_double(prefix + "_radius", 1.0);
  auto c = sc.get_array(prefix + "_center", {0.0, 0.0, 0.0});
  for (std::size_t a = 0; a < c.size() && a < 3; ++a) b.center[a] = c[a];
  return b;
}

} // namespace

VectorBump Scenario::make_b() const { return bump_from(*this, "coefficients.b", get_int("grid.d", 2)); }

VectorBump Scenario::make_btilde() const {
  return bump_from(*this, "coefficients.btilde", get_int("grid.d", 2));
}

void Scenario::validate() const {
  // supports must stay in the middle third of the box
  double box = get_double("grid.box", 64.0);
  double metric_support = 1.5 * get_double("metric.radius", 1.0);
  if (get_string("metric.profile", "flat") == "flat") metric_support = 0;
  double b_support = 1.5 * get_double("coefficients.b_radius", 0.0);
  if (std::max(metric_support, b_support) > box / 6.0)
    fail(ErrorKind::usage, "profile supports exceed the middle third of the box");
}

} // namespace uhs
