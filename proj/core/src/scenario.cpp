#include "oligo_rd/scenario.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "oligo_rd/errors.hpp"
#include "oligo_rd/format.hpp"

namespace oligo_rd {

namespace {

struct Value {
  using Scalar = std::variant<double, std::string, bool>;
  std::variant<Scalar, std::vector<Scalar>> data;
  int line = 0;
};

using Section = std::map<std::string, Value>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && quoted) {
      ++i;
    } else if (s[i] == '"') {
      quoted = !quoted;
    } else if (s[i] == '#' && !quoted) {
      return s.substr(0, i);
    }
  }
  return s;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  Value parse() {
    Value v;
    v.line = line_;
    skip_space();
    if (peek() == '[') {
      ++pos_;
      std::vector<Value::Scalar> items;
      skip_space();
      if (peek() == ']') {
        ++pos_;
      } else {
        while (true) {
          items.push_back(scalar());
          skip_space();
          if (peek() == ',') {
            ++pos_;
            skip_space();
            if (peek() == ']') {
              ++pos_;
              break;
            }
          } else if (peek() == ']') {
            ++pos_;
            break;
          } else {
            fail("expected ',' or ']' in array");
          }
        }
      }
      v.data = std::move(items);
    } else {
      v.data = scalar();
    }
    skip_space();
    if (pos_ != text_.size()) fail("unexpected text after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  Value::Scalar scalar() {
    if (peek() == '"') return string();
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != ' ' &&
           text_[pos_] != '\t') {
      ++pos_;
    }
    const auto token = text_.substr(start, pos_ - start);
    if (token.empty()) fail("missing value");
    if (token == "true") return true;
    if (token == "false") return false;
    double x = 0.0;
    const char* first = token.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), x);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(x)) {
      fail("invalid value '" + std::string(token) + "'");
    }
    return x;
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

// Reads typed values out of one section and rejects keys nobody asked for.
class SectionReader {
 public:
  SectionReader(std::string name, Section section, int line)
      : name_(std::move(name)), section_(std::move(section)), line_(line) {}

  bool has(const std::string& key) const { return section_.count(key) != 0; }

  std::optional<double> number(const std::string& key) {
    const Value* v = take(key);
    if (v == nullptr) return std::nullopt;
    return as_number(*v, key);
  }

  std::optional<int> integer(const std::string& key) {
    const auto x = number(key);
    if (!x) return std::nullopt;
    if (*x != std::floor(*x) || std::abs(*x) > 1e9) {
      throw ParseError(section_.at(key).line, "'" + key + "' must be an integer");
    }
    return static_cast<int>(*x);
  }

  std::optional<std::string> string(const std::string& key) {
    const Value* v = take(key);
    if (v == nullptr) return std::nullopt;
    const auto* s = std::get_if<Value::Scalar>(&v->data);
    if (s == nullptr || !std::holds_alternative<std::string>(*s)) {
      throw ParseError(v->line, "'" + key + "' must be a string");
    }
    return std::get<std::string>(*s);
  }

  std::optional<bool> boolean(const std::string& key) {
    const Value* v = take(key);
    if (v == nullptr) return std::nullopt;
    const auto* s = std::get_if<Value::Scalar>(&v->data);
    if (s == nullptr || !std::holds_alternative<bool>(*s)) {
      throw ParseError(v->line, "'" + key + "' must be true or false");
    }
    return std::get<bool>(*s);
  }

  /// Arrays of numbers; a bare number is a one-element list.
  std::optional<std::vector<double>> numbers(const std::string& key) {
    const Value* v = take(key);
    if (v == nullptr) return std::nullopt;
    if (std::holds_alternative<Value::Scalar>(v->data)) return std::vector<double>{as_number(*v, key)};
    std::vector<double> out;
    for (const auto& item : std::get<std::vector<Value::Scalar>>(v->data)) {
      if (!std::holds_alternative<double>(item)) {
        throw ParseError(v->line, "'" + key + "' must hold numbers");
      }
      out.push_back(std::get<double>(item));
    }
    return out;
  }

  std::optional<std::vector<int>> integers(const std::string& key) {
    const int line = has(key) ? section_.at(key).line : 0;
    const auto xs = numbers(key);
    if (!xs) return std::nullopt;
    std::vector<int> out;
    for (double x : *xs) {
      if (x != std::floor(x) || std::abs(x) > 1e9) throw ParseError(line, "'" + key + "' must hold integers");
      out.push_back(static_cast<int>(x));
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const Value* v = take(key);
    if (v == nullptr) return std::nullopt;
    std::vector<Value::Scalar> items;
    if (const auto* s = std::get_if<Value::Scalar>(&v->data)) {
      items.push_back(*s);
    } else {
      items = std::get<std::vector<Value::Scalar>>(v->data);
    }
    std::vector<std::string> out;
    for (const auto& item : items) {
      if (!std::holds_alternative<std::string>(item)) {
        throw ParseError(v->line, "'" + key + "' must hold strings");
      }
      out.push_back(std::get<std::string>(item));
    }
    return out;
  }

  int line_of(const std::string& key) const { return has(key) ? section_.at(key).line : line_; }
  int line() const { return line_; }

  void finish() const {
    for (const auto& [key, value] : section_) {
      if (used_.count(key) == 0) {
        throw ParseError(value.line, "unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  const Value* take(const std::string& key) {
    const auto it = section_.find(key);
    if (it == section_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  double as_number(const Value& v, const std::string& key) const {
    const auto* s = std::get_if<Value::Scalar>(&v.data);
    if (s == nullptr || !std::holds_alternative<double>(*s)) {
      throw ParseError(v.line, "'" + key + "' must be a number");
    }
    return std::get<double>(*s);
  }

  std::string name_;
  Section section_;
  int line_;
  std::set<std::string> used_;
};

template <class T, class F>
void assign(std::optional<T> v, F&& setter) {
  if (v) setter(*v);
}

ModelSpec read_model(SectionReader& r) {
  ModelSpec spec;
  assign(r.integer("n"), [&](int v) { spec.params.n = v; });
  assign(r.number("rho"), [&](double v) { spec.params.rho = v; });
  assign(r.number("delta"), [&](double v) { spec.params.delta = v; });

  const auto demand = r.string("demand").value_or("linear");
  const double a = r.number("a").value_or(2.0);
  const double s = r.number("s").value_or(0.5);
  if (demand == "linear") {
    spec.demand = LinearSubstitutes{a, s};
  } else if (demand == "power") {
    spec.demand = PowerInverse{a, s, r.number("eta").value_or(2.0)};
  } else {
    throw ParseError(r.line_of("demand"), "demand must be \"linear\" or \"power\"");
  }

  const auto cost = r.string("cost").value_or("linear");
  if (cost == "linear") {
    spec.cost = LinearCost{};
  } else if (cost == "power") {
    spec.cost = PowerCost{r.number("c").value_or(2.0)};
  } else {
    throw ParseError(r.line_of("cost"), "cost must be \"linear\" or \"power\"");
  }

  assign(r.number("alpha"), [&](double v) { spec.tech.alpha = v; });
  assign(r.number("beta"), [&](double v) { spec.tech.beta = v; });
  assign(r.number("b"), [&](double v) { spec.tech.b = v; });
  assign(r.number("g"), [&](double v) { spec.tech.g = v; });
  return spec;
}

ProbeRegion read_probe(SectionReader& r) {
  ProbeRegion p;
  assign(r.number("q_min"), [&](double v) { p.q_min = v; });
  assign(r.number("q_max"), [&](double v) { p.q_max = v; });
  assign(r.number("m_min"), [&](double v) { p.m_min = v; });
  assign(r.number("m_max"), [&](double v) { p.m_max = v; });
  assign(r.number("k_min"), [&](double v) { p.k_min = v; });
  assign(r.number("k_max"), [&](double v) { p.k_max = v; });
  assign(r.integer("points"), [&](int v) { p.points = v; });
  return p;
}

template <class T, class F>
T named(SectionReader& r, const std::string& key, F&& parse) {
  const int line = r.line_of(key);
  const auto text = r.string(key);
  try {
    return parse(*text);
  } catch (const DomainError& e) {
    throw ParseError(line, e.what());
  }
}

SteadySection read_steady(SectionReader& r) {
  SteadySection s;
  if (r.has("regime")) s.regime = named<Regime>(r, "regime", parse_regime);
  if (r.has("mode")) s.mode = named<Mode>(r, "mode", parse_mode);
  assign(r.integer("grid_points"), [&](int v) { s.options.grid_points = v; });
  assign(r.number("m_max"), [&](double v) { s.options.m_max = v; });
  return s;
}

CompareSection read_compare(SectionReader& r) {
  CompareSection c;
  c.m = r.number("m");
  assign(r.boolean("feedback"), [&](bool v) { c.feedback = v; });
  return c;
}

SweepGrid read_sweep(SectionReader& r) {
  SweepGrid g;
  g.n = r.integers("n");
  g.s = r.numbers("s");
  g.m = r.numbers("m");
  g.beta = r.numbers("beta");
  g.delta = r.numbers("delta");
  g.rho = r.numbers("rho");
  g.base_m = r.number("base_m");
  if (r.has("modes")) {
    const int line = r.line_of("modes");
    const auto names = r.strings("modes");
    g.modes.clear();
    for (const auto& name : *names) {
      try {
        g.modes.push_back(parse_mode(name));
      } catch (const DomainError& e) {
        throw ParseError(line, e.what());
      }
    }
  }
  return g;
}

DynamicsSection read_dynamics(SectionReader& r, int n) {
  DynamicsSection d;
  const auto policy = r.string("policy").value_or("steady");
  const int k_line = r.line_of("k");
  if (policy == "steady") {
    d.policy = SteadyStateK{};
  } else if (policy == "constant") {
    auto k = r.numbers("k");
    if (!k || k->empty()) throw ParseError(k_line, "constant policy needs 'k'");
    d.policy = ConstantK{*k};
  } else if (policy == "table") {
    auto times = r.numbers("times");
    auto k = r.numbers("k");
    if (!times || !k) throw ParseError(r.line(), "table policy needs 'times' and 'k'");
    if (times->size() != k->size()) throw ParseError(k_line, "'times' and 'k' must have equal length");
    d.policy = TableK{*times, *k};
  } else {
    throw ParseError(r.line_of("policy"), "policy must be \"steady\", \"constant\" or \"table\"");
  }
  const int m0_line = r.line_of("m0");
  auto m0 = r.numbers("m0");
  if (!m0 || m0->empty()) throw ParseError(m0_line, "[dynamics] needs 'm0'");
  if (m0->size() == 1) {
    d.m0.assign(static_cast<std::size_t>(std::max(n, 1)), m0->front());
  } else if (static_cast<int>(m0->size()) == n) {
    d.m0 = *m0;
  } else {
    throw ParseError(m0_line, "'m0' needs 1 or n entries");
  }
  assign(r.number("horizon"), [&](double v) { d.horizon = v; });
  assign(r.number("step"), [&](double v) { d.step = v; });
  d.target_m = r.number("target_m");
  return d;
}

std::string list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_number(xs[i], 17);
  return out + "]";
}

std::string list(const std::vector<int>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + std::to_string(xs[i]);
  return out + "]";
}

std::string num(double v) { return format_number(v, 17); }

}  // namespace

Regime parse_regime(std::string_view name) {
  if (name == "bertrand") return Regime::Bertrand;
  if (name == "cournot") return Regime::Cournot;
  throw DomainError("unknown regime '" + std::string(name) + "'");
}

Mode parse_mode(std::string_view name) {
  if (name == "open") return Mode::OpenLoop;
  if (name == "closed") return Mode::ClosedLoop;
  if (name == "feedback") return Mode::Feedback;
  throw DomainError("unknown mode '" + std::string(name) + "'");
}

Scenario parse_scenario(std::string_view text) {
  std::map<std::string, std::pair<Section, int>> sections;
  static const std::set<std::string> known{"model", "probe", "steady", "compare", "sweep", "dynamics"};

  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (known.count(current) == 0) throw ParseError(line_no, "unknown section [" + current + "]");
      if (sections.count(current) != 0) throw ParseError(line_no, "duplicate section [" + current + "]");
      sections[current] = {Section{}, line_no};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (current.empty()) throw ParseError(line_no, "key '" + key + "' outside any section");
    auto& section = sections[current].first;
    if (section.count(key) != 0) throw ParseError(line_no, "duplicate key '" + key + "'");
    section[key] = ValueParser(trim(line.substr(eq + 1)), line_no).parse();
  }

  const auto reader = [&](const std::string& name) -> std::optional<SectionReader> {
    const auto it = sections.find(name);
    if (it == sections.end()) return std::nullopt;
    return SectionReader(name, it->second.first, it->second.second);
  };

  Scenario sc;
  if (auto r = reader("model")) {
    sc.model = read_model(*r);
    r->finish();
  } else {
    throw ParseError(0, "missing [model] section");
  }
  if (auto r = reader("probe")) {
    sc.probe = read_probe(*r);
    r->finish();
  }
  if (auto r = reader("steady")) {
    sc.steady = read_steady(*r);
    r->finish();
  }
  if (auto r = reader("compare")) {
    sc.compare = read_compare(*r);
    r->finish();
  }
  if (auto r = reader("sweep")) {
    sc.sweep = read_sweep(*r);
    r->finish();
  }
  if (auto r = reader("dynamics")) {
    sc.dynamics = read_dynamics(*r, sc.model.params.n);
    r->finish();
  }
  return sc;
}

std::string write_scenario(const Scenario& sc) {
  std::ostringstream out;
  const auto& m = sc.model;
  out << "[model]\n";
  out << "n = " << m.params.n << '\n';
  out << "rho = " << num(m.params.rho) << '\n';
  out << "delta = " << num(m.params.delta) << '\n';
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        out << "demand = \"" << (std::is_same_v<T, LinearSubstitutes> ? "linear" : "power") << "\"\n";
        out << "a = " << num(d.a) << '\n' << "s = " << num(d.s) << '\n';
        if constexpr (std::is_same_v<T, PowerInverse>) out << "eta = " << num(d.eta) << '\n';
      },
      m.demand);
  if (const auto* pc = std::get_if<PowerCost>(&m.cost)) {
    out << "cost = \"power\"\nc = " << num(pc->c) << '\n';
  } else {
    out << "cost = \"linear\"\n";
  }
  out << "alpha = " << num(m.tech.alpha) << '\n';
  out << "beta = " << num(m.tech.beta) << '\n';
  out << "b = " << num(m.tech.b) << '\n';
  out << "g = " << num(m.tech.g) << '\n';

  const auto& p = sc.probe;
  out << "\n[probe]\n";
  out << "q_min = " << num(p.q_min) << "\nq_max = " << num(p.q_max) << '\n';
  out << "m_min = " << num(p.m_min) << "\nm_max = " << num(p.m_max) << '\n';
  out << "k_min = " << num(p.k_min) << "\nk_max = " << num(p.k_max) << '\n';
  out << "points = " << p.points << '\n';

  if (sc.steady) {
    out << "\n[steady]\n";
    if (sc.steady->regime) out << "regime = \"" << to_string(*sc.steady->regime) << "\"\n";
    if (sc.steady->mode) out << "mode = \"" << to_string(*sc.steady->mode) << "\"\n";
    out << "grid_points = " << sc.steady->options.grid_points << '\n';
    out << "m_max = " << num(sc.steady->options.m_max) << '\n';
  }
  if (sc.compare) {
    out << "\n[compare]\n";
    if (sc.compare->m) out << "m = " << num(*sc.compare->m) << '\n';
    out << "feedback = " << (sc.compare->feedback ? "true" : "false") << '\n';
  }
  if (sc.sweep) {
    const auto& g = *sc.sweep;
    out << "\n[sweep]\n";
    if (g.n) out << "n = " << list(*g.n) << '\n';
    if (g.s) out << "s = " << list(*g.s) << '\n';
    if (g.m) out << "m = " << list(*g.m) << '\n';
    if (g.beta) out << "beta = " << list(*g.beta) << '\n';
    if (g.delta) out << "delta = " << list(*g.delta) << '\n';
    if (g.rho) out << "rho = " << list(*g.rho) << '\n';
    if (g.base_m) out << "base_m = " << num(*g.base_m) << '\n';
    out << "modes = [";
    for (std::size_t i = 0; i < g.modes.size(); ++i) out << (i ? ", " : "") << '"' << to_string(g.modes[i]) << '"';
    out << "]\n";
  }
  if (sc.dynamics) {
    const auto& d = *sc.dynamics;
    out << "\n[dynamics]\n";
    std::visit(
        [&](const auto& pol) {
          using T = std::decay_t<decltype(pol)>;
          if constexpr (std::is_same_v<T, SteadyStateK>) {
            out << "policy = \"steady\"\n";
          } else if constexpr (std::is_same_v<T, ConstantK>) {
            out << "policy = \"constant\"\nk = " << list(pol.k) << '\n';
          } else {
            out << "policy = \"table\"\ntimes = " << list(pol.times) << "\nk = " << list(pol.k) << '\n';
          }
        },
        d.policy);
    out << "m0 = " << list(d.m0) << '\n';
    out << "horizon = " << num(d.horizon) << '\n';
    out << "step = " << num(d.step) << '\n';
    if (d.target_m) out << "target_m = " << num(*d.target_m) << '\n';
  }
  return out.str();
}

std::string model_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  const auto r = [](double v) { return round_to_digits(v); };
  j["n"] = spec.params.n;
  j["rho"] = r(spec.params.rho);
  j["delta"] = r(spec.params.delta);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        j["demand"] = std::is_same_v<T, LinearSubstitutes> ? "linear" : "power";
        j["a"] = r(d.a);
        j["s"] = r(d.s);
        if constexpr (std::is_same_v<T, PowerInverse>) j["eta"] = r(d.eta);
      },
      spec.demand);
  if (const auto* pc = std::get_if<PowerCost>(&spec.cost)) {
    j["cost"] = "power";
    j["c"] = r(pc->c);
  } else {
    j["cost"] = "linear";
  }
  j["alpha"] = r(spec.tech.alpha);
  j["beta"] = r(spec.tech.beta);
  j["b"] = r(spec.tech.b);
  j["g"] = r(spec.tech.g);
  return j.dump();
}

}  // namespace oligo_rd
