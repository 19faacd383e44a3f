#include "llhomog/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "llhomog/io.hpp"

namespace llh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double strict_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

long parse_int(const std::string& s) {
  long v = 0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

Vector3 parse_vector(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3) throw ConfigError("expected three comma-separated numbers, got '" + s + "'");
  return {parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2])};
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError("expected 'low, high', got '" + s + "'");
  const double lo = parse_real(parts[0]), hi = parse_real(parts[1]);
  if (!(lo <= hi)) throw ConfigError("empty range '" + s + "'");
  return {lo, hi};
}

bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

std::string fmt(double v) { return format_real(v); }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

std::string family_name(CoefficientSpec::Family f) {
  switch (f) {
    case CoefficientSpec::Family::constant: return "constant";
    case CoefficientSpec::Family::sine: return "sine";
    case CoefficientSpec::Family::cosine: return "cosine";
    case CoefficientSpec::Family::table: return "table";
  }
  return "?";
}

std::string profile_name(InitialSpec::Kind k) {
  switch (k) {
    case InitialSpec::Kind::fig1: return "fig1";
    case InitialSpec::Kind::constant: return "constant";
    case InitialSpec::Kind::custom_table: return "table";
  }
  return "?";
}

using Lines = std::map<std::string, int>;

[[noreturn]] void fail(const Lines& lines, const std::string& key, const std::string& msg) {
  const auto it = lines.find(key);
  if (it != lines.end()) throw ConfigError("line " + std::to_string(it->second) + ": " + msg);
  throw ConfigError(msg);
}

void check(const SimConfig& c, const Lines& lines) {
  if (!(c.alpha > 0.0 && c.alpha <= 1.0))
    fail(lines, "physics.alpha", "alpha must lie in (0,1] (A3), got " + fmt(c.alpha));
  if (c.eps.empty()) fail(lines, "physics.eps", "eps list is empty");
  for (double e : c.eps)
    if (!(e > 0.0 && e < 1.0)) fail(lines, "physics.eps", "eps must lie in (0,1), got " + fmt(e));
  if (c.J < 0 || c.J > 2) fail(lines, "physics.J", "J must be 0, 1 or 2, got " + std::to_string(c.J));
  if (!(c.sigma >= 0.0 && c.sigma <= 2.0)) fail(lines, "physics.sigma", "sigma must lie in [0,2], got " + fmt(c.sigma));
  if (!(c.T > 0.0)) fail(lines, "physics.T", "T must be positive");
  if (c.coefficient.family == CoefficientSpec::Family::constant && !(c.coefficient.value > 0.0))
    fail(lines, "material.value", "constant coefficient must be positive");
  if ((c.coefficient.family == CoefficientSpec::Family::sine || c.coefficient.family == CoefficientSpec::Family::cosine) &&
      !(std::abs(c.coefficient.amplitude) < 1.0))
    fail(lines, "material.amplitude", "amplitude must satisfy |b| < 1 so that a stays positive");
  const std::pair<const char*, Index> sizes[] = {{"grid.n_slow", c.n_slow}, {"grid.n_fast", c.n_fast}};
  for (const auto& [key, n] : sizes)
    if (!is_pow2(n) || n < PeriodicGrid::kMinPoints)
      fail(lines, key, std::string(key + 5) + " must be a power of two >= 8, got " + std::to_string(n));
  if (c.n_fine != 0) {
    if (!is_pow2(c.n_fine)) fail(lines, "grid.n_fine", "n_fine must be a power of two, got " + std::to_string(c.n_fine));
    const double e_min = *std::min_element(c.eps.begin(), c.eps.end());
    if (c.n_fine < min_points_for_eps(e_min))
      fail(lines, "grid.n_fine",
           "n_fine = " + std::to_string(c.n_fine) + " is below 8 / eps = " + std::to_string(min_points_for_eps(e_min)));
  }
  if (!(c.points_per_period >= 8.0)) fail(lines, "grid.points_per_period", "points_per_period must be >= 8");
  if (!(c.dt >= 0.0)) fail(lines, "time.dt", "dt must be >= 0 (0 selects the stability limit)");
  if (c.output_stride < 0) fail(lines, "time.output_stride", "output_stride must be >= 0");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 0.28))
    fail(lines, "time.cfl_safety", "cfl_safety must lie in (0, 0.28] for RK4 stability");
  const std::pair<const char*, double> taus[] = {{"correctors.dtau", c.dtau},
                                                 {"correctors.history_tau_end", c.history_tau_end},
                                                 {"correctors.history_dtau", c.history_dtau},
                                                 {"correctors.refresh_dtau", c.refresh_dtau},
                                                 {"correctors.stencil_dtau", c.stencil_dtau}};
  for (const auto& [key, v] : taus)
    if (!(v > 0.0)) fail(lines, key, std::string(key + 11) + " must be positive");
  if (c.stencil_dtau > 0.05) fail(lines, "correctors.stencil_dtau", "stencil_dtau must be <= 1/20 to resolve the eps^2 scale");
  if (!(c.r2_min >= 0.0 && c.r2_min <= 1.0)) fail(lines, "tolerance.r2_min", "r2_min must lie in [0,1]");
  if (c.norm_key != "err_L2" && c.norm_key != "err_H1" && c.norm_key != "eta_L2" && c.norm_key != "len_dev_L2")
    fail(lines, "sweep.norm", "norm must be one of err_L2, err_H1, eta_L2, len_dev_L2");
}

std::vector<double> read_column(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open table file " + p.string());
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (!line.empty()) v.push_back(strict_double(line));
  }
  return v;
}

std::vector<Vector3> read_vectors(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open table file " + p.string());
  std::vector<Vector3> v;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (!line.empty()) v.push_back(parse_vector(line));
  }
  return v;
}

}  // namespace

double parse_real(const std::string& raw) {
  const std::string s = trim(raw);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return strict_double(s);
  const double den = strict_double(trim(s.substr(slash + 1)));
  if (den == 0.0) throw ConfigError("division by zero in '" + s + "'");
  return strict_double(trim(s.substr(0, slash))) / den;
}

SimConfig parse_config_text(const std::string& text, const std::string& origin) {
  SimConfig c;
  Lines lines;
  std::filesystem::path base = std::filesystem::path(origin).parent_path();

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> keys = {
      {"material.coefficient",
       [&](const std::string& v) {
         if (v == "sine") c.coefficient.family = CoefficientSpec::Family::sine;
         else if (v == "cosine") c.coefficient.family = CoefficientSpec::Family::cosine;
         else if (v == "constant") c.coefficient.family = CoefficientSpec::Family::constant;
         else if (v == "table") c.coefficient.family = CoefficientSpec::Family::table;
         else throw ConfigError("coefficient must be sine, cosine, constant or table, got '" + v + "'");
       }},
      {"material.amplitude", [&](const std::string& v) { c.coefficient.amplitude = parse_real(v); }},
      {"material.value", [&](const std::string& v) { c.coefficient.value = parse_real(v); }},
      {"material.table_file", [&](const std::string& v) { c.table_file = v; }},
      {"physics.alpha", [&](const std::string& v) { c.alpha = parse_real(v); }},
      {"physics.eps",
       [&](const std::string& v) {
         c.eps.clear();
         for (const auto& e : split(v, ',')) c.eps.push_back(parse_real(e));
       }},
      {"physics.sigma", [&](const std::string& v) { c.sigma = parse_real(v); }},
      {"physics.J", [&](const std::string& v) { c.J = static_cast<int>(parse_int(v)); }},
      {"physics.T", [&](const std::string& v) { c.T = parse_real(v); }},
      {"initial.profile",
       [&](const std::string& v) {
         if (v == "fig1") c.initial.kind = InitialSpec::Kind::fig1;
         else if (v == "constant") c.initial.kind = InitialSpec::Kind::constant;
         else if (v == "table") c.initial.kind = InitialSpec::Kind::custom_table;
         else throw ConfigError("profile must be fig1, constant or table, got '" + v + "'");
       }},
      {"initial.direction", [&](const std::string& v) { c.initial.direction = parse_vector(v); }},
      {"initial.table_file", [&](const std::string& v) { c.initial_file = v; }},
      {"grid.n_fine", [&](const std::string& v) { c.n_fine = parse_int(v); }},
      {"grid.n_slow", [&](const std::string& v) { c.n_slow = parse_int(v); }},
      {"grid.n_fast", [&](const std::string& v) { c.n_fast = parse_int(v); }},
      {"grid.points_per_period", [&](const std::string& v) { c.points_per_period = parse_real(v); }},
      {"time.dt", [&](const std::string& v) { c.dt = v == "auto" ? 0.0 : parse_real(v); }},
      {"time.scheme", [&](const std::string& v) { c.scheme = parse_time_scheme(v); }},
      {"time.output_stride", [&](const std::string& v) { c.output_stride = parse_int(v); }},
      {"time.cfl_safety", [&](const std::string& v) { c.cfl_safety = parse_real(v); }},
      {"correctors.tau_scheme", [&](const std::string& v) { c.tau_scheme = parse_tau_scheme(v); }},
      {"correctors.dtau", [&](const std::string& v) { c.dtau = parse_real(v); }},
      {"correctors.history_tau_end", [&](const std::string& v) { c.history_tau_end = parse_real(v); }},
      {"correctors.history_dtau", [&](const std::string& v) { c.history_dtau = parse_real(v); }},
      {"correctors.refresh_dtau", [&](const std::string& v) { c.refresh_dtau = parse_real(v); }},
      {"correctors.stencil_dtau", [&](const std::string& v) { c.stencil_dtau = parse_real(v); }},
      {"tolerance.slope_min", [&](const std::string& v) { c.slope_min = parse_real(v); }},
      {"tolerance.slope_max", [&](const std::string& v) { c.slope_max = parse_real(v); }},
      {"tolerance.slope_J0", [&](const std::string& v) { c.slope_by_J[0] = parse_range(v); }},
      {"tolerance.slope_J1", [&](const std::string& v) { c.slope_by_J[1] = parse_range(v); }},
      {"tolerance.slope_J2", [&](const std::string& v) { c.slope_by_J[2] = parse_range(v); }},
      {"tolerance.r2_min", [&](const std::string& v) { c.r2_min = parse_real(v); }},
      {"tolerance.eta_slope_min", [&](const std::string& v) { c.eta_slope_min = parse_real(v); }},
      {"tolerance.eta_slope_max", [&](const std::string& v) { c.eta_slope_max = parse_real(v); }},
      {"tolerance.len_slope_min", [&](const std::string& v) { c.len_slope_min = parse_real(v); }},
      {"tolerance.len_slope_max", [&](const std::string& v) { c.len_slope_max = parse_real(v); }},
      {"tolerance.norm_tol", [&](const std::string& v) { c.norm_tol = parse_real(v); }},
      {"tolerance.freq_factor", [&](const std::string& v) { c.freq_factor = parse_real(v); }},
      {"tolerance.amp_decay_min", [&](const std::string& v) { c.amp_decay_min = parse_real(v); }},
      {"sweep.norm", [&](const std::string& v) { c.norm_key = v; }},
      {"sweep.eta", [&](const std::string& v) { c.eta = parse_bool(v); }},
      {"output.dir", [&](const std::string& v) { c.out_dir = v; }},
      {"random.seed", [&](const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(v)); }},
  };

  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto where = [&] { return origin + ": line " + std::to_string(line_no) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected key = value, got '" + line + "'");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(where() + "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where() + "empty value for '" + key + "'");
    try {
      it->second(value);
    } catch (const Error& e) {
      throw ConfigError(where() + key + ": " + e.what());
    }
    lines[key] = line_no;
  }

  auto resolve = [&](const std::string& f) {
    const std::filesystem::path p(f);
    return p.is_absolute() ? p : base / p;
  };
  if (c.coefficient.family == CoefficientSpec::Family::table) {
    if (c.table_file.empty()) fail(lines, "material.coefficient", "coefficient = table needs table_file");
    c.coefficient.table = read_column(resolve(c.table_file));
  }
  if (c.initial.kind == InitialSpec::Kind::custom_table) {
    if (c.initial_file.empty()) fail(lines, "initial.profile", "profile = table needs table_file");
    c.initial.table = read_vectors(resolve(c.initial_file));
  }

  try {
    check(c, lines);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return c;
}

SimConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void validate(const SimConfig& cfg) { check(cfg, {}); }

std::pair<double, double> SimConfig::slope_range(int j) const {
  if (j >= 0 && j < 3 && !std::isnan(slope_by_J[j].first)) return slope_by_J[j];
  return {slope_min, slope_max};
}

double SimConfig::single_eps() const {
  if (eps.size() != 1)
    throw ConfigError("this command takes a single eps, got " + std::to_string(eps.size()) + "; use --eps");
  return eps.front();
}

Index fine_points(const SimConfig& cfg, double eps) {
  if (cfg.n_fine > 0) return cfg.n_fine;
  const auto want = static_cast<Index>(std::ceil(cfg.points_per_period / eps - 1e-9));
  return next_pow2(std::max(want, min_points_for_eps(eps)));
}

std::string SimConfig::echo() const {
  std::ostringstream os;
  os << "[material]\n"
     << "coefficient = " << family_name(coefficient.family) << "\n"
     << "amplitude = " << fmt(coefficient.amplitude) << "\n"
     << "value = " << fmt(coefficient.value) << "\n";
  if (!table_file.empty()) os << "table_file = " << table_file << "\n";
  os << "\n[physics]\n"
     << "alpha = " << fmt(alpha) << "\n"
     << "eps = " << join(eps) << "\n"
     << "sigma = " << fmt(sigma) << "\n"
     << "J = " << J << "\n"
     << "T = " << fmt(T) << "\n"
     << "\n[initial]\n"
     << "profile = " << profile_name(initial.kind) << "\n"
     << "direction = " << fmt(initial.direction.x()) << ", " << fmt(initial.direction.y()) << ", "
     << fmt(initial.direction.z()) << "\n";
  if (!initial_file.empty()) os << "table_file = " << initial_file << "\n";
  os << "\n[grid]\n"
     << "n_fine = " << n_fine << "\n"
     << "n_slow = " << n_slow << "\n"
     << "n_fast = " << n_fast << "\n"
     << "points_per_period = " << fmt(points_per_period) << "\n"
     << "\n[time]\n"
     << "dt = " << (dt == 0.0 ? std::string("auto") : fmt(dt)) << "\n"
     << "scheme = " << to_string(scheme) << "\n"
     << "output_stride = " << output_stride << "\n"
     << "cfl_safety = " << fmt(cfl_safety) << "\n"
     << "\n[correctors]\n"
     << "tau_scheme = " << to_string(tau_scheme) << "\n"
     << "dtau = " << fmt(dtau) << "\n"
     << "history_tau_end = " << fmt(history_tau_end) << "\n"
     << "history_dtau = " << fmt(history_dtau) << "\n"
     << "refresh_dtau = " << fmt(refresh_dtau) << "\n"
     << "stencil_dtau = " << fmt(stencil_dtau) << "\n"
     << "\n[tolerance]\n"
     << "slope_min = " << fmt(slope_min) << "\n"
     << "slope_max = " << fmt(slope_max) << "\n";
  for (int j = 0; j < 3; ++j)
    if (!std::isnan(slope_by_J[j].first))
      os << "slope_J" << j << " = " << fmt(slope_by_J[j].first) << ", " << fmt(slope_by_J[j].second) << "\n";
  os << "r2_min = " << fmt(r2_min) << "\n"
     << "eta_slope_min = " << fmt(eta_slope_min) << "\n"
     << "eta_slope_max = " << fmt(eta_slope_max) << "\n"
     << "len_slope_min = " << fmt(len_slope_min) << "\n"
     << "len_slope_max = " << fmt(len_slope_max) << "\n"
     << "norm_tol = " << fmt(norm_tol) << "\n"
     << "freq_factor = " << fmt(freq_factor) << "\n"
     << "amp_decay_min = " << fmt(amp_decay_min) << "\n"
     << "\n[sweep]\n"
     << "norm = " << norm_key << "\n"
     << "eta = " << (eta ? "true" : "false") << "\n"
     << "\n[output]\n"
     << "dir = " << out_dir.string() << "\n"
     << "\n[random]\n"
     << "seed = " << seed << "\n";
  return os.str();
}

}  // namespace llh
