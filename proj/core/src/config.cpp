#include "bctopt/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace bctopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

KeyValueFile KeyValueFile::parse_text(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_number) +
                          ": malformed section header \"" + line + "\"");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(line_number) + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_number) +
                        ": expected \"key = value\", got \"" + line + "\"");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_number) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!kv.entries_.emplace(full, value).second)
      throw ConfigError(origin + ":" + std::to_string(line_number) + ": duplicate key \"" +
                        full + "\"");
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_text(text.str(), path);
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueFile::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(origin_ + ": missing required key \"" + key + "\"");
  std::string v = it->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key \"" + key + "\" has non-numeric value \"" + v + "\"");
  }
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueFile::get_int(const std::string& key) const {
  const double d = get_double(key);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw ConfigError(origin_ + ": key \"" + key + "\" must be an integer");
  return i;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool KeyValueFile::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(origin_ + ": key \"" + key + "\" must be true or false, got \"" + v + "\"");
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

std::vector<double> KeyValueFile::get_double_array(const std::string& key) const {
  std::string v = get_string(key);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError(origin_ + ": key \"" + key + "\" must be an array like [1, 2, 3]");
  v = v.substr(1, v.size() - 2);
  for (char& c : v)
    if (c == ',') c = ' ';
  std::istringstream in(v);
  std::vector<double> values;
  double d;
  while (in >> d) values.push_back(d);
  if (!in.eof())
    throw ConfigError(origin_ + ": key \"" + key + "\" has a non-numeric array element");
  return values;
}

// ---------------------------------------------------------------------------
// Face predicates.

struct FacePredicate::Node {
  std::function<bool(const Vec3&)> eval;
};

namespace {

struct Token {
  enum class Kind { Number, Coord, And, Or, Op, End };
  Kind kind = Kind::End;
  std::string text;
  double number = 0.0;
};

std::vector<Token> tokenize_predicate(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double d;
      try {
        d = std::stod(text.substr(i), &used);
      } catch (const std::exception&) {
        throw ConfigError("predicate \"" + text + "\": bad number at position " +
                          std::to_string(i));
      }
      tokens.push_back({Token::Kind::Number, text.substr(i, used), d});
      i += used;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
      const std::string word = text.substr(i, j - i);
      if (word == "and")
        tokens.push_back({Token::Kind::And, word, 0.0});
      else if (word == "or")
        tokens.push_back({Token::Kind::Or, word, 0.0});
      else if (word == "x" || word == "y" || word == "z")
        tokens.push_back({Token::Kind::Coord, word, 0.0});
      else
        throw ConfigError("predicate \"" + text + "\": unknown word \"" + word + "\"");
      i = j;
      continue;
    }
    static const std::set<std::string> two_char = {"<=", ">="};
    if (i + 1 < text.size() && two_char.count(text.substr(i, 2))) {
      tokens.push_back({Token::Kind::Op, text.substr(i, 2), 0.0});
      i += 2;
      continue;
    }
    static const std::string one_char = "+-*/^()<>";
    if (one_char.find(c) != std::string::npos) {
      tokens.push_back({Token::Kind::Op, std::string(1, c), 0.0});
      ++i;
      continue;
    }
    throw ConfigError("predicate \"" + text + "\": unexpected character '" + std::string(1, c) +
                      "'");
  }
  tokens.push_back({Token::Kind::End, "", 0.0});
  return tokens;
}

using Arith = std::function<double(const Vec3&)>;

class PredicateParser {
 public:
  PredicateParser(std::string text, std::vector<Token> tokens)
      : text_(std::move(text)), tokens_(std::move(tokens)) {}

  std::function<bool(const Vec3&)> parse() {
    auto result = parse_or();
    expect_end();
    return result;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }
  bool take_op(const std::string& op) {
    if (peek().kind == Token::Kind::Op && peek().text == op) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("predicate \"" + text_ + "\": " + what);
  }
  void expect_end() const {
    if (peek().kind != Token::Kind::End) fail("trailing input at \"" + peek().text + "\"");
  }

  std::function<bool(const Vec3&)> parse_or() {
    auto lhs = parse_and();
    while (peek().kind == Token::Kind::Or) {
      ++pos_;
      auto rhs = parse_and();
      lhs = [lhs, rhs](const Vec3& p) { return lhs(p) || rhs(p); };
    }
    return lhs;
  }

  std::function<bool(const Vec3&)> parse_and() {
    auto lhs = parse_comparison();
    while (peek().kind == Token::Kind::And) {
      ++pos_;
      auto rhs = parse_comparison();
      lhs = [lhs, rhs](const Vec3& p) { return lhs(p) && rhs(p); };
    }
    return lhs;
  }

  std::function<bool(const Vec3&)> parse_comparison() {
    Arith lhs = parse_sum();
    if (peek().kind != Token::Kind::Op) fail("expected a comparison operator");
    const std::string op = peek().text;
    if (op != "<" && op != "<=" && op != ">" && op != ">=")
      fail("expected a comparison operator, got \"" + op + "\"");
    ++pos_;
    Arith rhs = parse_sum();
    if (op == "<") return [lhs, rhs](const Vec3& p) { return lhs(p) < rhs(p); };
    if (op == "<=") return [lhs, rhs](const Vec3& p) { return lhs(p) <= rhs(p); };
    if (op == ">") return [lhs, rhs](const Vec3& p) { return lhs(p) > rhs(p); };
    return [lhs, rhs](const Vec3& p) { return lhs(p) >= rhs(p); };
  }

  Arith parse_sum() {
    Arith lhs = parse_term();
    while (peek().kind == Token::Kind::Op && (peek().text == "+" || peek().text == "-")) {
      const bool add = take().text == "+";
      Arith rhs = parse_term();
      if (add)
        lhs = [lhs, rhs](const Vec3& p) { return lhs(p) + rhs(p); };
      else
        lhs = [lhs, rhs](const Vec3& p) { return lhs(p) - rhs(p); };
    }
    return lhs;
  }

  Arith parse_term() {
    Arith lhs = parse_unary();
    while (peek().kind == Token::Kind::Op && (peek().text == "*" || peek().text == "/")) {
      const bool mul = take().text == "*";
      Arith rhs = parse_unary();
      if (mul)
        lhs = [lhs, rhs](const Vec3& p) { return lhs(p) * rhs(p); };
      else
        lhs = [lhs, rhs](const Vec3& p) { return lhs(p) / rhs(p); };
    }
    return lhs;
  }

  Arith parse_unary() {
    if (take_op("-")) {
      Arith inner = parse_unary();
      return [inner](const Vec3& p) { return -inner(p); };
    }
    return parse_power();
  }

  Arith parse_power() {
    Arith base = parse_primary();
    if (take_op("^")) {
      if (peek().kind != Token::Kind::Number) fail("exponent must be a number literal");
      const double e = take().number;
      const int n = static_cast<int>(e);
      if (static_cast<double>(n) != e || n < 0) fail("exponent must be a nonnegative integer");
      return [base, n](const Vec3& p) { return std::pow(base(p), n); };
    }
    return base;
  }

  Arith parse_primary() {
    if (peek().kind == Token::Kind::Number) {
      const double d = take().number;
      return [d](const Vec3&) { return d; };
    }
    if (peek().kind == Token::Kind::Coord) {
      const std::string c = take().text;
      if (c == "x") return [](const Vec3& p) { return p.x; };
      if (c == "y") return [](const Vec3& p) { return p.y; };
      return [](const Vec3& p) { return p.z; };
    }
    if (take_op("(")) {
      Arith inner = parse_sum();
      if (!take_op(")")) fail("missing closing parenthesis");
      return inner;
    }
    fail("expected a number, coordinate or parenthesized expression at \"" + peek().text + "\"");
  }

  std::string text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

FacePredicate FacePredicate::parse(const std::string& text) {
  PredicateParser parser(text, tokenize_predicate(text));
  FacePredicate predicate;
  predicate.text_ = text;
  auto node = std::make_shared<Node>();
  node->eval = parser.parse();
  predicate.root_ = node;
  return predicate;
}

bool FacePredicate::operator()(const Vec3& point) const {
  if (!root_) throw ConfigError("evaluating an empty predicate");
  return root_->eval(point);
}

// ---------------------------------------------------------------------------
// Experiment configuration.

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "mesh.source", "mesh.a1", "mesh.a2", "mesh.a3", "mesh.subdivisions", "mesh.path",
      "problem.materials", "problem.alpha", "problem.lower", "problem.upper", "problem.lambda",
      "problem.source_value",
      "reference.preset", "reference.region1", "reference.region2",
      "optimizer.kappa0", "optimizer.kappa_min", "optimizer.max_iterations",
      "optimizer.max_step_attempts", "optimizer.normalize", "optimizer.optimize_alpha",
      "optimizer.cost_tol",
      "solver.tolerance",
      "output.directory", "output.snapshot_every"};
  return keys;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_key_values(const KeyValueFile& kv) {
  for (const auto& [key, value] : kv.entries())
    if (!known_keys().count(key)) throw ConfigError("unknown config key \"" + key + "\"");

  ExperimentConfig config;

  const std::string source = kv.get_string("mesh.source", "ellipsoid");
  if (source == "ellipsoid") {
    config.mesh.source = MeshSpec::Source::Ellipsoid;
    config.mesh.a1 = kv.get_double("mesh.a1", 1.0);
    config.mesh.a2 = kv.get_double("mesh.a2", 1.0);
    config.mesh.a3 = kv.get_double("mesh.a3", 1.0);
    config.mesh.subdivisions = kv.get_int("mesh.subdivisions", 10);
  } else if (source == "msh") {
    config.mesh.source = MeshSpec::Source::MshFile;
    config.mesh.path = kv.get_string("mesh.path");
  } else {
    throw ConfigError("mesh.source must be \"ellipsoid\" or \"msh\", got \"" + source + "\"");
  }

  config.material_count = kv.get_int("problem.materials", 3);
  config.alpha = kv.get_double_array("problem.alpha");
  if (kv.has("problem.lower")) config.lower = kv.get_double_array("problem.lower");
  if (kv.has("problem.upper")) config.upper = kv.get_double_array("problem.upper");
  config.lambda = kv.get_double("problem.lambda", 0.0);
  config.source_value = kv.get_double("problem.source_value", 1.0);

  config.reference.preset = kv.get_string("reference.preset", "");
  for (int r = 1; r <= 2; ++r) {
    const std::string key = "reference.region" + std::to_string(r);
    if (kv.has(key)) config.reference.region_predicates.push_back(kv.get_string(key));
  }

  config.optimizer.kappa0 = kv.get_double("optimizer.kappa0", 0.1);
  config.optimizer.kappa_min = kv.get_double("optimizer.kappa_min", 1e-6);
  config.optimizer.max_outer_iterations = kv.get_int("optimizer.max_iterations", 100);
  config.optimizer.max_step_attempts = kv.get_int("optimizer.max_step_attempts", 20);
  config.optimizer.normalize = kv.get_bool("optimizer.normalize", false);
  config.optimizer.optimize_alpha = kv.get_bool("optimizer.optimize_alpha", false);
  config.optimizer.relative_cost_tol = kv.get_double("optimizer.cost_tol", 1e-10);

  config.solver_tolerance = kv.get_double("solver.tolerance", 1e-10);

  config.output_directory = kv.get_string("output.directory", "out");
  config.snapshot_every = kv.get_int("output.snapshot_every", 10);

  if (config.lower.empty()) config.lower.assign(config.alpha.size(), -1e9);
  if (config.upper.empty()) config.upper.assign(config.alpha.size(), 1e9);

  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_key_values(KeyValueFile::parse_file(path));
}

void ExperimentConfig::validate() const {
  if (mesh.source == MeshSpec::Source::Ellipsoid) {
    if (!(mesh.a1 > 0.0) || !(mesh.a2 > 0.0) || !(mesh.a3 > 0.0))
      throw ConfigError("mesh.a1/a2/a3 must be positive");
    if (mesh.subdivisions < 2) throw ConfigError("mesh.subdivisions must be at least 2");
  } else if (mesh.path.empty()) {
    throw ConfigError("mesh.path must name an MSH file");
  }

  if (material_count != 2 && material_count != 3)
    throw ConfigError("problem.materials must be 2 or 3");
  if (static_cast<int>(alpha.size()) != material_count)
    throw ConfigError("problem.alpha must list one value per material");
  if (lower.size() != alpha.size() || upper.size() != alpha.size())
    throw ConfigError("problem.lower/upper must list one value per material");
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (!(lower[i] <= upper[i]))
      throw ConfigError("problem.lower exceeds problem.upper for material " +
                        std::to_string(i + 1));
  if (lambda < 0.0) throw ConfigError("problem.lambda must be nonnegative");

  if (!reference.preset.empty()) {
    if (reference.preset != "two_material" && reference.preset != "three_material")
      throw ConfigError("unknown reference.preset \"" + reference.preset + "\"");
    if (!reference.region_predicates.empty())
      throw ConfigError("reference.preset and reference.region* are mutually exclusive");
    if (reference.preset == "three_material" && material_count != 3)
      throw ConfigError("reference.preset three_material requires problem.materials = 3");
  } else {
    if (reference.region_predicates.empty())
      throw ConfigError("reference needs a preset or at least one region predicate");
    if (static_cast<int>(reference.region_predicates.size()) >= material_count)
      throw ConfigError("at most materials-1 region predicates are allowed (the last region "
                        "is the remainder)");
    for (const std::string& text : reference.region_predicates)
      FacePredicate::parse(text);  // reject malformed expressions at load time
  }

  if (!(optimizer.kappa0 > 0.0) || optimizer.kappa0 > 1.0)
    throw ConfigError("optimizer.kappa0 must lie in (0, 1]");
  if (!(optimizer.kappa_min > 0.0)) throw ConfigError("optimizer.kappa_min must be positive");
  if (optimizer.max_outer_iterations < 1)
    throw ConfigError("optimizer.max_iterations must be at least 1");
  if (optimizer.max_step_attempts < 1)
    throw ConfigError("optimizer.max_step_attempts must be at least 1");
  if (optimizer.optimize_alpha && !(lambda > 0.0))
    throw ConfigError("optimizer.optimize_alpha requires problem.lambda > 0");
  if (!(solver_tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
  if (snapshot_every < 0) throw ConfigError("output.snapshot_every must be nonnegative");
}

std::string ExperimentConfig::serialize() const {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto fmt_array = [&fmt](const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      out += fmt(v[i]);
    }
    return out + "]";
  };

  std::ostringstream out;
  out << "[mesh]\n";
  if (mesh.source == MeshSpec::Source::Ellipsoid) {
    out << "source = ellipsoid\n";
    out << "a1 = " << fmt(mesh.a1) << "\n";
    out << "a2 = " << fmt(mesh.a2) << "\n";
    out << "a3 = " << fmt(mesh.a3) << "\n";
    out << "subdivisions = " << mesh.subdivisions << "\n";
  } else {
    out << "source = msh\n";
    out << "path = \"" << mesh.path << "\"\n";
  }
  out << "\n[problem]\n";
  out << "materials = " << material_count << "\n";
  out << "alpha = " << fmt_array(alpha) << "\n";
  out << "lower = " << fmt_array(lower) << "\n";
  out << "upper = " << fmt_array(upper) << "\n";
  out << "lambda = " << fmt(lambda) << "\n";
  out << "source_value = " << fmt(source_value) << "\n";
  out << "\n[reference]\n";
  if (!reference.preset.empty()) {
    out << "preset = \"" << reference.preset << "\"\n";
  } else {
    for (std::size_t r = 0; r < reference.region_predicates.size(); ++r)
      out << "region" << r + 1 << " = \"" << reference.region_predicates[r] << "\"\n";
  }
  out << "\n[optimizer]\n";
  out << "kappa0 = " << fmt(optimizer.kappa0) << "\n";
  out << "kappa_min = " << fmt(optimizer.kappa_min) << "\n";
  out << "max_iterations = " << optimizer.max_outer_iterations << "\n";
  out << "max_step_attempts = " << optimizer.max_step_attempts << "\n";
  out << "normalize = " << (optimizer.normalize ? "true" : "false") << "\n";
  out << "optimize_alpha = " << (optimizer.optimize_alpha ? "true" : "false") << "\n";
  out << "cost_tol = " << fmt(optimizer.relative_cost_tol) << "\n";
  out << "\n[solver]\n";
  out << "tolerance = " << fmt(solver_tolerance) << "\n";
  out << "\n[output]\n";
  out << "directory = \"" << output_directory << "\"\n";
  out << "snapshot_every = " << snapshot_every << "\n";
  return out.str();
}

}  // namespace bctopt
