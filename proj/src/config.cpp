#include "cht/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cht/io.hpp"
#include "cht/random.hpp"
#include "cht/spectral.hpp"

namespace cht {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "grid.dim", "grid.nx", "grid.ny", "grid.lx", "grid.ly",
      "model.potential", "model.proliferation",
      "scheme.dt", "scheme.kappa", "scheme.adapt", "scheme.max_steps", "scheme.t_end",
      "init.phi", "init.sigma",
      "control.kind", "control.u_min", "control.u_max", "control.n_slabs",
      "control.init", "control.radius_R",
      "cost.beta_Q", "cost.beta_Omega", "cost.alpha_Q", "cost.beta_S", "cost.beta_u",
      "cost.beta_T", "cost.T", "cost.phi_Q", "cost.sigma_Q", "cost.phi_Omega",
      "equilibrate.tol", "equilibrate.residual_accept",
      "steady.m", "steady.tol", "steady.max_iterations",
      "stability.eta", "stability.epsilon", "stability.horizon", "stability.n_probes",
      "decay.series", "decay.window_a", "decay.window_b",
      "gradcheck.epsilons", "gradcheck.n_directions", "gradcheck.fd_epsilon",
      "gradcheck.direction_kmax",
      "optimize.tol_u", "optimize.tol_tau", "optimize.max_outer",
      "simulate.snapshot_every", "simulate.fields",
      "seed", "output.dir",
  };
  return keys;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

// "tag:payload" split; tag alone is allowed.
std::pair<std::string, std::string> tagged(const std::string& s) {
  const auto pos = s.find(':');
  if (pos == std::string::npos) return {trim(s), ""};
  return {trim(s.substr(0, pos)), trim(s.substr(pos + 1))};
}

double parse_number(const Config& c, const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    c.fail(key, "expected a number, got '" + text + "'");
  }
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path);
}

Config Config::from_text(const std::string& text, const std::string& origin) {
  Config c;
  c.text_ = text;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    if (!known_keys().count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    if (c.entries_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    c.entries_[key] = {value, lineno};
  }
  return c;
}

void Config::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  const int line = it == entries_.end() ? 0 : it->second.line;
  throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + key + ": " + message);
}

std::string Config::str(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return it->second.value;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double Config::number(const std::string& key) const {
  return parse_number(*this, key, str(key));
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Config::integer(const std::string& key) const {
  const double v = number(key);
  const long n = std::lround(v);
  if (v != static_cast<double>(n)) fail(key, "expected an integer");
  return n;
}

long Config::integer(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t Config::seed(std::uint64_t fallback) const {
  if (!has("seed")) return fallback;
  return static_cast<std::uint64_t>(integer("seed"));
}

std::uint64_t Config::hash() const { return fnv1a64(text_); }

Grid make_grid(const Config& c) {
  const long dim = c.integer("grid.dim", 1);
  if (dim != 1 && dim != 2) c.fail("grid.dim", "must be 1 or 2");
  const long nx = c.integer("grid.nx");
  const double lx = c.number("grid.lx", 1.0);
  if (nx < 1) c.fail("grid.nx", "must be positive");
  if (!(lx > 0)) c.fail("grid.lx", "must be positive");
  if (dim == 1) return Grid::line(static_cast<int>(nx), lx);
  const long ny = c.integer("grid.ny", nx);
  const double ly = c.number("grid.ly", lx);
  if (ny < 1) c.fail("grid.ny", "must be positive");
  if (!(ly > 0)) c.fail("grid.ly", "must be positive");
  return Grid::rect(static_cast<int>(nx), static_cast<int>(ny), lx, ly);
}

ModelSpec make_model(const Config& c) {
  ModelSpec m;
  const auto [pkind, ppayload] = tagged(c.str("model.potential", "quartic"));
  if (pkind == "quartic") {
    m.potential = Potential::quartic();
  } else if (pkind == "poly") {
    std::vector<double> coeffs;
    for (const auto& part : split(ppayload, ','))
      coeffs.push_back(parse_number(c, "model.potential", part));
    try {
      m.potential = Potential::polynomial(coeffs);
    } catch (const std::exception& e) {
      c.fail("model.potential", e.what());
    }
    // Growth assumptions are validated only for the built-in quartic.
    std::fprintf(stderr,
                 "warning: user polynomial potential; growth assumptions not "
                 "verified\n");
  } else {
    c.fail("model.potential", "expected 'quartic' or 'poly:<c0,c1,...>'");
  }

  const auto [qkind, qpayload] =
      tagged(c.str("model.proliferation", "constant:0.5"));
  try {
    if (qkind == "constant") {
      m.proliferation = Proliferation::constant(parse_number(c, "model.proliferation",
                                                             qpayload));
    } else if (qkind == "rational") {
      const auto parts = split(qpayload, ',');
      if (parts.size() != 3)
        c.fail("model.proliferation", "rational form needs P0,gamma,P1");
      m.proliferation = Proliferation::rational(
          parse_number(c, "model.proliferation", parts[0]),
          parse_number(c, "model.proliferation", parts[1]),
          parse_number(c, "model.proliferation", parts[2]));
    } else {
      c.fail("model.proliferation", "expected 'constant:<P0>' or 'rational:<P0>,<g>,<P1>'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    c.fail("model.proliferation", e.what());
  }
  return m;
}

SchemeParams make_scheme(const Config& c, const ModelSpec& m) {
  SchemeParams p;
  p.dt = c.number("scheme.dt", 1e-3);
  p.kappa = c.number("scheme.kappa", m.potential.kappa_default());
  p.t_end = c.number("scheme.t_end", 1.0);
  p.max_steps = c.integer("scheme.max_steps", 1000000);
  const std::string adapt = c.str("scheme.adapt", "off");
  if (adapt == "off")
    p.adapt = AdaptPolicy::off;
  else if (adapt == "halve")
    p.adapt = AdaptPolicy::halve_on_energy_rise;
  else
    c.fail("scheme.adapt", "expected 'off' or 'halve'");
  try {
    p.validate();
    if (!(p.t_end > 0)) throw std::invalid_argument("t_end must be positive");
  } catch (const std::exception& e) {
    c.fail("scheme.dt", e.what());
  }
  return p;
}

Field make_initial_field(const Config& c, const Grid& g, const std::string& key,
                         std::uint64_t seed) {
  const auto [kind, payload] = tagged(c.str(key));
  if (kind == "constant") {
    return Field(g, parse_number(c, key, payload));
  }
  if (kind == "eigenmode") {
    const auto parts = split(payload, ',');
    if (parts.size() < 3) c.fail(key, "eigenmode needs <base>,<amp>,<kx>[,<ky>]");
    const double base = parse_number(c, key, parts[0]);
    const double amp = parse_number(c, key, parts[1]);
    const int kx = static_cast<int>(parse_number(c, key, parts[2]));
    const int ky = parts.size() > 3 ? static_cast<int>(parse_number(c, key, parts[3])) : 0;
    Field f(g, base);
    f.axpy(amp, eigenmode(g, kx, ky));
    return f;
  }
  if (kind == "random") {
    const auto parts = split(payload, ',');
    if (parts.size() != 3) c.fail(key, "random needs <mean>,<amp>,<kmax>");
    const double base = parse_number(c, key, parts[0]);
    const double amp = parse_number(c, key, parts[1]);
    const int kmax = static_cast<int>(parse_number(c, key, parts[2]));
    if (kmax < 1) c.fail(key, "kmax must be >= 1");
    Rng rng(seed ^ fnv1a64(key));
    Field noise = band_limited_noise(g, kmax, rng);
    const double scale = max_abs(noise);
    Field f(g, base);
    if (scale > 0) f.axpy(amp / scale, noise);
    return f;
  }
  if (kind == "file") {
    auto [f, t] = read_snapshot(payload);
    (void)t;
    if (f.grid != g) c.fail(key, "snapshot grid does not match the configured grid");
    return f;
  }
  c.fail(key, "expected constant:|eigenmode:|random:|file:");
}

Control make_control(const Config& c, const Grid& g, double t_end) {
  const auto [kind, payload] = tagged(c.str("control.kind", "zero"));
  if (kind == "zero") return Control::zero(g);
  if (kind == "u2") {
    const auto parts = split(payload, ',');
    if (parts.size() < 2) c.fail("control.kind", "u2 needs <amp>,<rho>[,<kx>[,<ky>]]");
    const double amp = parse_number(c, "control.kind", parts[0]);
    const double rho = parse_number(c, "control.kind", parts[1]);
    Field gprofile(g, amp);
    if (parts.size() > 2) {
      const int kx = static_cast<int>(parse_number(c, "control.kind", parts[2]));
      const int ky =
          parts.size() > 3 ? static_cast<int>(parse_number(c, "control.kind", parts[3])) : 0;
      // amp * (1 + cos mode)/... keep the profile nonnegative around amp
      gprofile.axpy(0.5 * amp, eigenmode(g, kx, ky));
    }
    if (!(rho > 0)) c.fail("control.kind", "u2 requires rho > 0");
    return Control::decaying_source(std::move(gprofile), rho);
  }
  if (kind == "constant") {
    const double v = parse_number(c, "control.kind", payload);
    const double lo = std::min(v, 0.0) - 1.0, hi = std::max(v, 0.0) + 1.0;
    return Control::tabulated(g, 1, t_end, v, lo, hi);
  }
  if (kind == "file") {
    // file:<prefix>,<n_slabs>,<t_end> reads <prefix>0000.pfc .. per slab
    // (the layout the optimize command writes)
    const auto parts = split(payload, ',');
    if (parts.size() != 3) c.fail("control.kind", "file needs <prefix>,<n_slabs>,<t_end>");
    const int n_slabs = static_cast<int>(parse_number(c, "control.kind", parts[1]));
    const double horizon = parse_number(c, "control.kind", parts[2]);
    if (n_slabs < 1) c.fail("control.kind", "n_slabs must be positive");
    if (!(horizon > 0)) c.fail("control.kind", "t_end must be positive");
    Control u = Control::tabulated(g, n_slabs, horizon, 0.0, Field(g, -1e300),
                                   Field(g, 1e300));
    for (int s = 0; s < n_slabs; ++s) {
      char tag[16];
      std::snprintf(tag, sizeof(tag), "%04d", s);
      auto [f, t] = read_snapshot(parts[0] + tag + ".pfc");
      (void)t;
      if (f.grid != g)
        c.fail("control.kind", "slab snapshot grid does not match the configured grid");
      std::copy(f.values.begin(), f.values.end(), u.slab(s));
    }
    return u;
  }
  c.fail("control.kind",
         "expected zero | u2:<amp>,<rho>[,<kx>[,<ky>]] | constant:<v> | "
         "file:<prefix>,<n_slabs>,<t_end>");
}

CostSpec make_cost(const Config& c, const Grid& g) {
  CostSpec cost;
  cost.beta_Q = c.number("cost.beta_Q", 0.0);
  cost.beta_Omega = c.number("cost.beta_Omega", 0.0);
  cost.alpha_Q = c.number("cost.alpha_Q", 0.0);
  cost.beta_S = c.number("cost.beta_S", 0.0);
  cost.beta_u = c.number("cost.beta_u", 0.0);
  cost.beta_T = c.number("cost.beta_T", 0.0);
  cost.T = c.number("cost.T", 1.0);

  auto target_field = [&](const std::string& key) -> Field {
    const auto [kind, payload] = tagged(c.str(key));
    if (kind == "constant") return Field(g, parse_number(c, key, payload));
    if (kind == "file") {
      auto [f, t] = read_snapshot(payload);
      (void)t;
      if (f.grid != g) c.fail(key, "snapshot grid does not match the configured grid");
      return f;
    }
    c.fail(key, "expected constant:<v> or file:<path>");
  };

  if (cost.beta_Q > 0) cost.phi_Q = TimeTarget::constant_field(target_field("cost.phi_Q"));
  if (cost.alpha_Q > 0)
    cost.sigma_Q = TimeTarget::constant_field(target_field("cost.sigma_Q"));
  if (cost.beta_Omega > 0) cost.phi_Omega = target_field("cost.phi_Omega");
  try {
    cost.validate(g);
  } catch (const std::exception& e) {
    c.fail("cost.T", e.what());
  }
  return cost;
}

}  // namespace cht
