#include "spinfb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace spinfb {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return x;
}

template <class Int>
std::optional<Int> to_integer(std::string_view s) {
  s = trim(s);
  Int x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return x;
}

std::optional<StateSpec> try_state_spec(std::string_view text, std::string& error) {
  text = trim(text);
  if (text == "mixed" || text == "maximally_mixed") return StateSpec::mixed();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    error = "expected basis:N, diag:a,b,..., bloch:x,y,z or mixed, got '" +
            std::string(text) + "'";
    return std::nullopt;
  }
  const auto head = trim(text.substr(0, colon));
  const auto body = trim(text.substr(colon + 1));
  if (head == "basis") {
    if (auto n = to_integer<long long>(body); n && *n >= 0) return StateSpec::basis(*n);
    error = "basis index must be a non-negative integer, got '" + std::string(body) + "'";
    return std::nullopt;
  }
  std::vector<double> values;
  for (auto part : split(body, ',')) {
    auto x = to_real(part);
    if (!x) {
      error = "'" + std::string(part) + "' is not a number";
      return std::nullopt;
    }
    values.push_back(*x);
  }
  if (head == "diag") {
    if (values.size() < 2) {
      error = "diag needs at least two entries";
      return std::nullopt;
    }
    return StateSpec::diagonal(std::move(values));
  }
  if (head == "bloch") {
    if (values.size() != 3) {
      error = "bloch needs exactly three entries";
      return std::nullopt;
    }
    return StateSpec::bloch_vector(values[0], values[1], values[2]);
  }
  error = "unknown state spec kind '" + std::string(head) + "'";
  return std::nullopt;
}

const char* controller_name(Controller::Kind k) {
  switch (k) {
    case Controller::Kind::Off: return "off";
    case Controller::Kind::Constant: return "constant";
    case Controller::Kind::Population: return "population";
    case Controller::Kind::Expectation: return "expectation";
  }
  return "off";
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_state_spec(const StateSpec& spec) {
  switch (spec.kind) {
    case StateSpec::Kind::Basis:
      return "basis:" + std::to_string(spec.index);
    case StateSpec::Kind::Diag: {
      std::string out = "diag:";
      for (std::size_t i = 0; i < spec.diag.size(); ++i) {
        if (i) out += ',';
        out += format_real(spec.diag[i]);
      }
      return out;
    }
    case StateSpec::Kind::Bloch:
      return "bloch:" + format_real(spec.bloch[0]) + "," + format_real(spec.bloch[1]) +
             "," + format_real(spec.bloch[2]);
    case StateSpec::Kind::MaximallyMixed:
      return "mixed";
  }
  return "mixed";
}

StateSpec parse_state_spec(std::string_view text) {
  std::string error;
  auto spec = try_state_spec(text, error);
  if (!spec) throw ConfigError({error});
  return *spec;
}

SimConfig parse_config(std::string_view text) {
  SimConfig c;
  std::vector<std::string> errors;
  std::map<std::string, std::pair<std::string, int>> entries;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                 : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": empty key");
      continue;
    }
    if (auto it = entries.find(key); it != entries.end()) {
      errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                       "' (first set on line " + std::to_string(it->second.second) + ")");
      continue;
    }
    entries.emplace(std::move(key), std::make_pair(std::move(value), line_no));
  }

  const auto bad = [&](const std::string& key, const std::string& what) {
    errors.push_back(key + ": " + what);
  };
  const auto real = [&](double& dst) {
    return [&dst, &bad](const std::string& key, const std::string& v) {
      if (auto x = to_real(v)) dst = *x;
      else bad(key, "'" + v + "' is not a number");
    };
  };
  const auto index = [&](Index& dst) {
    return [&dst, &bad](const std::string& key, const std::string& v) {
      if (auto x = to_integer<long long>(v)) dst = *x;
      else bad(key, "'" + v + "' is not an integer");
    };
  };
  const auto state = [&](StateSpec& dst) {
    return [&dst, &bad](const std::string& key, const std::string& v) {
      std::string error;
      if (auto s = try_state_spec(v, error)) dst = *s;
      else bad(key, error);
    };
  };

  bool dim_given = false;
  std::string controller_kind = "constant";
  std::optional<Index> metric_target;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"model.kind",
       [&](const std::string& key, const std::string& v) {
         if (v == "spin_half") c.model = ModelKind::SpinHalf;
         else if (v == "spin_j") c.model = ModelKind::SpinJ;
         else bad(key, "expected spin_half or spin_j, got '" + v + "'");
       }},
      {"model.dim",
       [&](const std::string& key, const std::string& v) {
         dim_given = true;
         index(c.dim)(key, v);
       }},
      {"params.omega", real(c.params.omega)},
      {"params.eta", real(c.params.eta)},
      {"params.M", real(c.params.M)},
      {"controller.kind",
       [&](const std::string& key, const std::string& v) {
         if (v == "off" || v == "constant" || v == "population" || v == "expectation") {
           controller_kind = v;
         } else {
           bad(key, "expected off, constant, population or expectation, got '" + v + "'");
         }
       }},
      {"controller.c", real(c.controller.c)},
      {"controller.target", index(c.controller.target)},
      {"controller.alpha", real(c.controller.alpha)},
      {"controller.beta", real(c.controller.beta)},
      {"initial.rho", state(c.initial_rho)},
      {"initial.rho_hat", state(c.initial_rho_hat)},
      {"integrator.dt", real(c.integrator.dt)},
      {"integrator.T", real(c.integrator.T)},
      {"integrator.scheme",
       [&](const std::string& key, const std::string& v) {
         if (v == "euler_maruyama") c.integrator.scheme = Scheme::EulerMaruyama;
         else if (v == "kraus") c.integrator.scheme = Scheme::Kraus;
         else bad(key, "expected euler_maruyama or kraus, got '" + v + "'");
       }},
      {"integrator.projection",
       [&](const std::string& key, const std::string& v) {
         if (v == "clip") c.integrator.projection = Projection::Clip;
         else if (v == "none") c.integrator.projection = Projection::None;
         else bad(key, "expected clip or none, got '" + v + "'");
       }},
      {"integrator.record_stride",
       [&](const std::string& key, const std::string& v) {
         if (auto x = to_integer<std::size_t>(v)) c.integrator.record_stride = *x;
         else bad(key, "'" + v + "' is not a non-negative integer");
       }},
      {"seed",
       [&](const std::string& key, const std::string& v) {
         if (auto x = to_integer<std::uint64_t>(v)) c.seed = *x;
         else bad(key, "'" + v + "' is not an unsigned 64-bit integer");
       }},
      {"metrics.target",
       [&](const std::string& key, const std::string& v) {
         Index n = 0;
         const auto before = errors.size();
         index(n)(key, v);
         if (errors.size() == before) metric_target = n;
       }},
      {"output.metrics",
       [&](const std::string&, const std::string& v) {
         c.output.metrics.clear();
         if (v.empty() || v == "all") return;
         for (auto name : split(v, ',')) c.output.metrics.emplace_back(name);
       }},
      {"output.dir", [&](const std::string&, const std::string& v) { c.output.dir = v; }},
  };

  // Controller defaults depend on the kind, so apply the kind first.
  Controller defaults;
  if (auto it = entries.find("controller.kind"); it != entries.end()) {
    setters.at("controller.kind")(it->first, it->second.first);
  }
  if (controller_kind == "off") defaults = Controller::off();
  else if (controller_kind == "constant") defaults = Controller::constant(1.0);
  else if (controller_kind == "population") defaults = Controller::population(0, 1, 1);
  else defaults = Controller::expectation(0, 1, 1);
  c.controller = defaults;

  for (const auto& [key, entry] : entries) {
    if (key == "controller.kind") continue;
    auto it = setters.find(key);
    if (it == setters.end()) {
      errors.push_back("line " + std::to_string(entry.second) + ": unknown key '" + key + "'");
      continue;
    }
    it->second(key, entry.first);
  }
  c.metric_target = metric_target;

  if (c.model == ModelKind::SpinJ && !dim_given) {
    const StateSpec* with_size = nullptr;
    for (const auto* s : {&c.initial_rho, &c.initial_rho_hat}) {
      if (s->kind == StateSpec::Kind::Diag) with_size = s;
    }
    if (with_size) {
      c.dim = Index(with_size->diag.size());
    } else {
      errors.push_back("model.dim is required for spin_j unless an initial state is a diag list");
    }
  }

  if (errors.empty()) {
    auto v = c.violations();
    errors.insert(errors.end(), v.begin(), v.end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

std::string serialize_config(const SimConfig& c) {
  std::ostringstream out;
  const auto put = [&out](const char* key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  put("model.kind", c.model == ModelKind::SpinHalf ? "spin_half" : "spin_j");
  put("model.dim", std::to_string(c.dim));
  put("params.omega", format_real(c.params.omega));
  put("params.eta", format_real(c.params.eta));
  put("params.M", format_real(c.params.M));
  put("controller.kind", controller_name(c.controller.kind));
  put("controller.c", format_real(c.controller.c));
  put("controller.target", std::to_string(c.controller.target));
  put("controller.alpha", format_real(c.controller.alpha));
  put("controller.beta", format_real(c.controller.beta));
  put("initial.rho", format_state_spec(c.initial_rho));
  put("initial.rho_hat", format_state_spec(c.initial_rho_hat));
  put("integrator.dt", format_real(c.integrator.dt));
  put("integrator.T", format_real(c.integrator.T));
  put("integrator.scheme",
      c.integrator.scheme == Scheme::Kraus ? "kraus" : "euler_maruyama");
  put("integrator.projection", c.integrator.projection == Projection::Clip ? "clip" : "none");
  put("integrator.record_stride", std::to_string(c.integrator.record_stride));
  put("seed", std::to_string(c.seed));
  if (c.metric_target) put("metrics.target", std::to_string(*c.metric_target));
  std::string metrics;
  for (std::size_t i = 0; i < c.output.metrics.size(); ++i) {
    if (i) metrics += ',';
    metrics += c.output.metrics[i];
  }
  put("output.metrics", metrics.empty() ? "all" : metrics);
  put("output.dir", c.output.dir);
  return out.str();
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace spinfb
