#include "mzdual/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mzdual/errors.hpp"

namespace mzdual::io {

using nlohmann::json;

namespace {

constexpr double kSumTol = 1e-9;

class Parser {
 public:
  explicit Parser(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& what) {
    errors_.push_back(path + ": " + what);
  }

  std::optional<std::vector<std::string>> labels(const json& doc, const char* key) {
    if (!doc.contains(key)) return std::nullopt;
    const json& v = doc[key];
    if (!v.is_array() || v.empty()) {
      error(key, "expected a nonempty array of strings");
      return std::vector<std::string>{};
    }
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_string()) {
        error(path, "expected a string");
        continue;
      }
      const std::string s = v[i].get<std::string>();
      if (s.find('|') != std::string::npos) error(path, "labels must not contain '|'");
      if (!seen.insert(s).second) error(path, "duplicate label '" + s + "'");
      out.push_back(s);
    }
    return out;
  }

  std::optional<double> number(const json& v, const std::string& path) {
    if (!v.is_number()) {
      error(path, "expected a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      error(path, "not a finite number");
      return std::nullopt;
    }
    return x;
  }

  std::vector<double> numbers(const json& v, const std::string& path) {
    std::vector<double> out;
    if (!v.is_array()) {
      error(path, "expected an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto x = number(v[i], path + "[" + std::to_string(i) + "]");
      out.push_back(x.value_or(0.0));
    }
    return out;
  }

  // Rows [[..], ..] or a flat row-major list when the shape is known.
  std::optional<Matrix> matrix(const json& v, const std::string& path,
                               std::optional<std::size_t> rows,
                               std::optional<std::size_t> cols) {
    if (!v.is_array() || v.empty()) {
      error(path, "expected a nonempty matrix");
      return std::nullopt;
    }
    const std::size_t before = errors_.size();
    if (!v[0].is_array()) {
      if (!rows || !cols) {
        error(path, "a flat matrix needs actions_i and actions_j to fix its shape");
        return std::nullopt;
      }
      const auto flat = numbers(v, path);
      if (flat.size() != *rows * *cols) {
        error(path, "expected " + std::to_string(*rows * *cols) + " entries, got " +
                        std::to_string(flat.size()));
        return std::nullopt;
      }
      if (errors_.size() != before) return std::nullopt;
      return Matrix::from_row_major(*rows, *cols, flat);
    }
    const std::size_t r = v.size(), c = v[0].is_array() ? v[0].size() : 0;
    if (rows && cols && (r != *rows || c != *cols)) {
      error(path, "expected a " + std::to_string(*rows) + "x" + std::to_string(*cols) +
                      " matrix, got " + std::to_string(r) + "x" + std::to_string(c));
      return std::nullopt;
    }
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      const std::string rp = path + "[" + std::to_string(i) + "]";
      if (!v[i].is_array() || v[i].size() != c) {
        error(rp, "rows must all have " + std::to_string(c) + " entries");
        continue;
      }
      for (std::size_t j = 0; j < c; ++j)
        if (auto x = number(v[i][j], rp + "[" + std::to_string(j) + "]")) m(i, j) = *x;
    }
    if (errors_.size() != before || c == 0) {
      if (c == 0) error(path, "empty rows");
      return std::nullopt;
    }
    return m;
  }

  // Probability vector of the given size, normalized after validation.
  std::vector<double> distribution(const json& v, const std::string& path,
                                   std::optional<std::size_t> size) {
    const std::size_t before = errors_.size();
    std::vector<double> p = numbers(v, path);
    if (errors_.size() != before) return {};
    if (size && p.size() != *size) {
      error(path, "expected " + std::to_string(*size) + " entries, got " +
                      std::to_string(p.size()));
      return {};
    }
    if (p.empty()) {
      error(path, "must not be empty");
      return {};
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] < 0.0)
        error(path + "[" + std::to_string(i) + "]",
              "negative probability " + format_double(p[i]));
      sum += p[i];
    }
    if (std::abs(sum - 1.0) > kSumTol)
      error(path, "entries sum to " + format_double(sum) + ", expected 1 within 1e-9");
    if (errors_.size() != before) return {};
    for (double& x : p) x /= sum;
    return p;
  }

  std::vector<Point> points(const json& v, const std::string& path) {
    std::vector<Point> out;
    if (!v.is_array() || v.empty()) {
      error(path, "expected a nonempty list of control points");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = path + "[" + std::to_string(i) + "]";
      if (v[i].is_number()) {
        out.push_back({number(v[i], p).value_or(0.0)});
      } else {
        out.push_back(numbers(v[i], p));
      }
      if (out.back().size() != out.front().size())
        error(p, "control points must share one dimension");
    }
    return out;
  }

  template <typename T>
  std::optional<T> positive_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
      error(path, "expected a positive integer");
      return std::nullopt;
    }
    return static_cast<T>(v.get<long long>());
  }

  std::optional<double> positive(const json& v, const std::string& path) {
    auto x = number(v, path);
    if (x && *x <= 0.0) {
      error(path, "must be positive");
      return std::nullopt;
    }
    return x;
  }

  void unknown_keys(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) error(path.empty() ? key : path + "." + key, "unknown key");
    }
  }

 private:
  std::vector<std::string>& errors_;
};

std::string pair_key(const std::string& k, const std::string& l) { return k + "|" + l; }

void parse_config(Parser& p, const json& v, SolverConfig& c) {
  if (!v.is_object()) {
    p.error("config", "expected an object");
    return;
  }
  p.unknown_keys(v, "config", {"grid_m", "dt", "dx", "tol_mz", "tol_lp", "seed", "horizon"});
  if (v.contains("grid_m"))
    if (auto x = p.positive_integer<std::size_t>(v["grid_m"], "config.grid_m")) c.grid_m = *x;
  if (v.contains("dt"))
    if (auto x = p.positive(v["dt"], "config.dt")) c.dt = *x;
  if (v.contains("dx"))
    if (auto x = p.positive(v["dx"], "config.dx")) c.dx = *x;
  if (v.contains("tol_mz"))
    if (auto x = p.positive(v["tol_mz"], "config.tol_mz")) c.tol_mz = *x;
  if (v.contains("tol_lp"))
    if (auto x = p.positive(v["tol_lp"], "config.tol_lp")) c.tol_lp = *x;
  if (v.contains("seed")) {
    if (!v["seed"].is_number_integer() || v["seed"].get<long long>() < 0)
      p.error("config.seed", "expected a nonnegative integer");
    else
      c.seed = v["seed"].get<std::uint64_t>();
  }
  if (v.contains("horizon"))
    if (auto x = p.positive_integer<std::size_t>(v["horizon"], "config.horizon"))
      c.horizon = *x;
}

void parse_differential(Parser& p, const json& v, const GameSpecFile& spec,
                        DifferentialBlock& d) {
  if (!v.is_object()) {
    p.error("differential", "expected an object");
    return;
  }
  p.unknown_keys(v, "differential",
                 {"dynamics", "params", "controls_u", "controls_v", "bounds", "mode", "z"});
  if (v.contains("dynamics")) {
    if (!v["dynamics"].is_string())
      p.error("differential.dynamics", "expected a string");
    else
      d.dynamics = v["dynamics"].get<std::string>();
  }
  const bool accumulator = d.dynamics == "payoff-accumulator";
  if (!accumulator && d.dynamics != "linear" && d.dynamics != "bilinear")
    p.error("differential.dynamics", "unknown built-in '" + d.dynamics +
                                         "' (payoff-accumulator, linear, bilinear)");
  if (v.contains("z")) d.z = p.numbers(v["z"], "differential.z");
  if (v.contains("controls_u")) d.controls_u = p.points(v["controls_u"], "differential.controls_u");
  if (v.contains("controls_v")) d.controls_v = p.points(v["controls_v"], "differential.controls_v");
  if (!accumulator) {
    if (d.controls_u.empty()) p.error("differential.controls_u", "required for " + d.dynamics);
    if (d.controls_v.empty()) p.error("differential.controls_v", "required for " + d.dynamics);
  }
  if (v.contains("mode")) {
    const json& m = v["mode"];
    if (m == "pure")
      d.mode = ControlMode::kPure;
    else if (m == "mixed")
      d.mode = ControlMode::kMixed;
    else
      p.error("differential.mode", "expected \"pure\" or \"mixed\"");
  }
  if (v.contains("bounds")) {
    const json& b = v["bounds"];
    if (!b.is_object()) {
      p.error("differential.bounds", "expected an object");
    } else {
      p.unknown_keys(b, "differential.bounds", {"f", "lipschitz", "terminal_lipschitz"});
      DeclaredBounds db;
      if (b.contains("f")) db.bound = p.number(b["f"], "differential.bounds.f").value_or(0.0);
      else p.error("differential.bounds.f", "required");
      if (b.contains("lipschitz"))
        db.lipschitz = p.number(b["lipschitz"], "differential.bounds.lipschitz").value_or(0.0);
      if (b.contains("terminal_lipschitz"))
        db.terminal_lipschitz =
            p.number(b["terminal_lipschitz"], "differential.bounds.terminal_lipschitz")
                .value_or(0.0);
      if (db.bound < 0.0 || db.lipschitz < 0.0 || db.terminal_lipschitz < 0.0)
        p.error("differential.bounds", "constants must be nonnegative");
      d.bounds = db;
    }
  } else if (!accumulator) {
    p.error("differential.bounds", "required for " + d.dynamics);
  }

  if (d.dynamics == "linear") {
    if (!v.contains("params") || !v["params"].is_object()) {
      p.error("differential.params", "linear dynamics need an object with A, B, C, terminal");
      return;
    }
    const json& pr = v["params"];
    p.unknown_keys(pr, "differential.params", {"A", "B", "C", "drift", "terminal", "offsets"});
    const std::size_t n = d.z.size();
    if (n == 0) p.error("differential.z", "linear dynamics need the initial state");
    const std::size_t du = d.controls_u.empty() ? 0 : d.controls_u[0].size();
    const std::size_t dv = d.controls_v.empty() ? 0 : d.controls_v[0].size();
    auto mat = [&](const char* key, std::size_t cols) -> Matrix {
      const std::string path = std::string("differential.params.") + key;
      if (!pr.contains(key)) {
        p.error(path, "required");
        return {};
      }
      return p.matrix(pr[key], path, n, cols).value_or(Matrix{});
    };
    d.linear.a = mat("A", n);
    d.linear.b = mat("B", du);
    d.linear.c = mat("C", dv);
    if (pr.contains("drift")) {
      d.linear.drift = p.numbers(pr["drift"], "differential.params.drift");
      if (d.linear.drift.size() != n)
        p.error("differential.params.drift", "expected " + std::to_string(n) + " entries");
    }
    if (!pr.contains("terminal") || !pr["terminal"].is_object()) {
      p.error("differential.params.terminal", "expected an object keyed \"k|l\"");
    } else {
      for (const auto& k : spec.types_k)
        for (const auto& l : spec.types_l) {
          const std::string key = pair_key(k, l), path = "differential.params.terminal." + key;
          if (!pr["terminal"].contains(key)) {
            p.error(path, "missing terminal weights");
            d.linear.terminal_weights.emplace_back(n, 0.0);
            continue;
          }
          auto w = p.numbers(pr["terminal"][key], path);
          if (w.size() != n) p.error(path, "expected " + std::to_string(n) + " entries");
          d.linear.terminal_weights.push_back(std::move(w));
        }
    }
    if (pr.contains("offsets")) {
      if (!pr["offsets"].is_object()) {
        p.error("differential.params.offsets", "expected an object keyed \"k|l\"");
      } else {
        for (const auto& k : spec.types_k)
          for (const auto& l : spec.types_l) {
            const std::string key = pair_key(k, l);
            d.linear.terminal_offsets.push_back(
                pr["offsets"].contains(key)
                    ? p.number(pr["offsets"][key], "differential.params.offsets." + key)
                          .value_or(0.0)
                    : 0.0);
          }
      }
    }
  } else if (d.dynamics == "bilinear") {
    if (v.contains("params")) p.error("differential.params", "bilinear dynamics take none");
    if (!d.controls_u.empty() && !d.controls_v.empty() &&
        d.controls_u[0].size() != d.controls_v[0].size())
      p.error("differential.controls_v", "bilinear controls must share one dimension");
  } else if (accumulator && v.contains("params")) {
    p.error("differential.params", "payoff-accumulator takes none");
  }
}

}  // namespace

MatrixGameFamily GameSpecFile::family() const {
  return MatrixGameFamily(types_k.size(), types_l.size(), payoffs);
}

JointBelief GameSpecFile::joint_belief() const {
  return JointBelief(types_k.size(), types_l.size(), belief, 1e-9);
}

std::vector<std::string> GameSpecFile::belief_labels() const {
  std::vector<std::string> out;
  for (const auto& k : types_k)
    for (const auto& l : types_l) out.push_back("pi[" + pair_key(k, l) + "]");
  return out;
}

ParseResult parse_spec(std::string_view text) {
  ParseResult result;
  Parser p(result.errors);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    p.error("$", std::string("malformed JSON: ") + e.what());
    return result;
  }
  if (!doc.is_object()) {
    p.error("$", "expected a JSON object");
    return result;
  }
  p.unknown_keys(doc, "", {"types_k", "types_l", "actions_i", "actions_j", "payoffs", "belief",
                           "evaluation", "differential", "config"});

  GameSpecFile spec;
  spec.types_k = p.labels(doc, "types_k").value_or(std::vector<std::string>{"0"});
  spec.types_l = p.labels(doc, "types_l").value_or(std::vector<std::string>{"0"});
  auto actions_i = p.labels(doc, "actions_i");
  auto actions_j = p.labels(doc, "actions_j");
  std::optional<std::size_t> ni, nj;
  if (actions_i && !actions_i->empty()) ni = actions_i->size();
  if (actions_j && !actions_j->empty()) nj = actions_j->size();

  if (!doc.contains("payoffs") || !doc["payoffs"].is_object()) {
    p.error("payoffs", "required: an object keyed \"k|l\" with one matrix per type pair");
  } else {
    const json& pay = doc["payoffs"];
    std::set<std::string> expected;
    for (const auto& k : spec.types_k)
      for (const auto& l : spec.types_l) expected.insert(pair_key(k, l));
    for (const auto& [key, value] : pay.items())
      if (!expected.count(key)) p.error("payoffs." + key, "unknown type pair");
    for (const auto& k : spec.types_k)
      for (const auto& l : spec.types_l) {
        const std::string key = pair_key(k, l), path = "payoffs." + key;
        if (!pay.contains(key)) {
          p.error(path, "missing matrix");
          spec.payoffs.emplace_back();
          continue;
        }
        auto m = p.matrix(pay[key], path, ni, nj);
        if (m && !ni) {
          ni = m->rows();
          nj = m->cols();
        }
        spec.payoffs.push_back(m.value_or(Matrix{}));
      }
  }
  auto default_labels = [](std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
  };
  spec.actions_i = actions_i ? *actions_i : default_labels(ni.value_or(0));
  spec.actions_j = actions_j ? *actions_j : default_labels(nj.value_or(0));

  const std::size_t nkl = spec.types_k.size() * spec.types_l.size();
  if (doc.contains("belief")) {
    spec.belief = p.distribution(doc["belief"], "belief", nkl);
  } else {
    spec.belief.assign(nkl, 1.0 / static_cast<double>(nkl));
  }
  if (doc.contains("evaluation")) {
    auto th = p.distribution(doc["evaluation"], "evaluation", std::nullopt);
    if (!th.empty()) spec.evaluation = std::move(th);
  }
  if (doc.contains("config")) parse_config(p, doc["config"], spec.config);
  if (doc.contains("differential")) {
    DifferentialBlock d;
    parse_differential(p, doc["differential"], spec, d);
    spec.differential = std::move(d);
  }
  if (result.errors.empty()) result.spec = std::move(spec);
  return result;
}

GameSpecFile parse_spec_or_throw(std::string_view text) {
  ParseResult r = parse_spec(text);
  if (r.ok()) return std::move(*r.spec);
  std::string msg = "invalid game spec:";
  for (const auto& e : r.errors) msg += "\n  " + e;
  throw ValidationError(msg);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MayerSpec build_game(const GameSpecFile& spec) {
  const MatrixGameFamily family = spec.family();
  const DifferentialBlock d = spec.differential.value_or(DifferentialBlock{});
  const std::size_t nk = spec.types_k.size(), nl = spec.types_l.size();
  MayerSpec game;
  if (d.dynamics == "payoff-accumulator") {
    game = repeated_game_embedding(family);
    if (!d.controls_u.empty() || !d.controls_v.empty())
      throw ValidationError("differential.controls: payoff-accumulator uses the actions");
  } else if (d.dynamics == "linear") {
    game = linear_game(nk, nl, d.linear, d.z, d.controls_u, d.controls_v, *d.bounds,
                       d.mode.value_or(ControlMode::kPure));
  } else if (d.dynamics == "bilinear") {
    game = bilinear_game(d.controls_u[0].size(), d.controls_u, d.controls_v, *d.bounds);
    game.num_k = nk;
    game.num_l = nl;
  } else {
    throw ValidationError("differential.dynamics: unknown built-in '" + d.dynamics + "'");
  }
  if (!d.z.empty()) {
    if (d.z.size() != game.state_dim)
      throw ValidationError("differential.z: expected " + std::to_string(game.state_dim) +
                            " entries");
    game.z = d.z;
  }
  if (d.bounds) game.bounds = *d.bounds;
  if (d.mode) game.mode = *d.mode;
  validate(game);
  return game;
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 15];
  return out;
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << str();
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return c;
  throw ValidationError("CSV has no column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    for (std::size_t pos = 0;;) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (t.header.empty()) {
      for (auto f : fields) t.header.emplace_back(f);
      continue;
    }
    if (fields.size() != t.header.size())
      throw ValidationError("CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = fields[c];
      const auto r = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (r.ec != std::errc() || r.ptr != f.data() + f.size())
        throw ValidationError("CSV line " + std::to_string(line_no) + ": bad number '" +
                              std::string(f) + "'");
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ValidationError("CSV is empty");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

}  // namespace mzdual::io
