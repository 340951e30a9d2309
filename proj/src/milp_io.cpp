#include "mbus/milp_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mbus::milp {

std::string format_number(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

FileFormat parse_format_name(std::string_view name) {
  if (name == "lp" || name == "lp-text") return FileFormat::kLpText;
  if (name == "mps" || name == "mps-fixed") return FileFormat::kMpsFixed;
  throw ModelError("unknown model format '" + std::string(name) + "'");
}

namespace {

std::optional<double> parse_number(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  std::string lower(tok);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "inf" || lower == "+inf" || lower == "infinity" ||
      lower == "+infinity") {
    return kInf;
  }
  if (lower == "-inf" || lower == "-infinity") return -kInf;
  const std::string s(tok);
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  // Reject strtod's hex/nan spellings.
  if (!(std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' ||
        s[0] == '+' || s[0] == '.')) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() &&
           std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j]))) {
      ++j;
    }
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view doc) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= doc.size()) {
    std::size_t end = doc.find('\n', start);
    if (end == std::string_view::npos) end = doc.size();
    std::string_view line = doc.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == doc.size()) break;
    start = end + 1;
  }
  return lines;
}

bool is_sense(std::string_view tok) {
  return tok == "<=" || tok == ">=" || tok == "=" || tok == "<" ||
         tok == ">" || tok == "=<" || tok == "=>";
}

RowSense sense_from(std::string_view tok) {
  if (tok == "<=" || tok == "<" || tok == "=<") return RowSense::kLessEqual;
  if (tok == ">=" || tok == ">" || tok == "=>") return RowSense::kGreaterEqual;
  return RowSense::kEqual;
}

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::kLessEqual:
      return "<=";
    case RowSense::kGreaterEqual:
      return ">=";
    case RowSense::kEqual:
      return "=";
  }
  return "=";
}

// ---------------------------------------------------------------- LP text

constexpr int kTermsPerLine = 8;
constexpr int kNamesPerLine = 8;

void write_lp_terms(std::ostringstream& out, const MilpModel& model,
                    const std::vector<Term>& terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0 && i % kTermsPerLine == 0) out << "\n  ";
    const double c = terms[i].coef;
    const std::string& name = model.variable(terms[i].var).name;
    if (i == 0) {
      out << ' ' << format_number(c) << ' ' << name;
    } else {
      out << (c < 0 ? " - " : " + ") << format_number(std::fabs(c)) << ' '
          << name;
    }
  }
}

void check_lp_name(const std::string& name) {
  if (parse_number(name) || is_sense(name) || name == "+" || name == "-" ||
      name.back() == ':') {
    throw ModelError("name '" + name + "' is not representable in LP text");
  }
}

std::string export_lp(const MilpModel& model) {
  std::ostringstream out;
  out << "\\ mbus lp-text v1\n";
  for (const auto& [key, value] : model.metadata()) {
    out << "\\ @meta " << key << ' ' << value << '\n';
  }
  for (const auto& v : model.variables()) check_lp_name(v.name);

  out << "Minimize\n obj:";
  const Objective& obj = model.objective();
  write_lp_terms(out, model, obj.terms);
  if (obj.terms.empty()) {
    out << ' ' << format_number(obj.constant);
  } else if (obj.constant != 0.0) {
    out << (obj.constant < 0 ? " - " : " + ")
        << format_number(std::fabs(obj.constant));
  }
  out << "\nSubject To\n";
  for (const auto& c : model.constraints()) {
    out << ' ' << c.name << ':';
    if (c.terms.empty()) {
      out << " 0";
    } else {
      write_lp_terms(out, model, c.terms);
    }
    out << ' ' << sense_text(c.sense) << ' ' << format_number(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : model.variables()) {
    out << ' ' << format_number(v.lo) << " <= " << v.name << " <= "
        << format_number(v.hi) << '\n';
  }
  auto write_names = [&](const char* header, VarKind kind) {
    std::vector<const std::string*> names;
    for (const auto& v : model.variables()) {
      if (v.kind == kind) names.push_back(&v.name);
    }
    if (names.empty()) return;
    out << header << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << ' ' << *names[i];
      if ((i + 1) % kNamesPerLine == 0 || i + 1 == names.size()) out << '\n';
    }
  };
  write_names("General", VarKind::kInteger);
  write_names("Binary", VarKind::kBinary);
  out << "End\n";
  return out.str();
}

enum class LpSection { kNone, kObjective, kConstraints, kBounds, kGeneral,
                       kBinary, kEnd };

std::optional<LpSection> lp_keyword(std::string_view line) {
  std::string s;
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!s.empty() && s.back() != ' ') {
      s += ' ';
    }
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (s == "minimize" || s == "minimise" || s == "min") {
    return LpSection::kObjective;
  }
  if (s == "subject to" || s == "such that" || s == "st" || s == "s.t.") {
    return LpSection::kConstraints;
  }
  if (s == "bounds" || s == "bound") return LpSection::kBounds;
  if (s == "general" || s == "generals" || s == "gen") {
    return LpSection::kGeneral;
  }
  if (s == "binary" || s == "binaries" || s == "bin") {
    return LpSection::kBinary;
  }
  if (s == "end") return LpSection::kEnd;
  return std::nullopt;
}

struct Token {
  std::string text;
  int line;
};

struct NamedTerm {
  std::string name;
  double coef;
};

struct Expression {
  std::vector<NamedTerm> terms;
  double constant = 0.0;
};

// Parses "[+|-] [number] name ..." until `stop` matches or tokens run out.
template <typename Stop>
Expression parse_expression(const std::vector<Token>& toks, std::size_t& pos,
                            Stop stop) {
  Expression expr;
  while (pos < toks.size() && !stop(toks[pos].text)) {
    double sign = 1.0;
    while (pos < toks.size() &&
           (toks[pos].text == "+" || toks[pos].text == "-")) {
      if (toks[pos].text == "-") sign = -sign;
      ++pos;
    }
    if (pos >= toks.size() || stop(toks[pos].text)) {
      throw ParseError(toks[pos == 0 ? 0 : pos - 1].line,
                       "dangling sign in expression");
    }
    if (auto num = parse_number(toks[pos].text)) {
      ++pos;
      const bool name_follows = pos < toks.size() && !stop(toks[pos].text) &&
                                toks[pos].text != "+" &&
                                toks[pos].text != "-" &&
                                !parse_number(toks[pos].text);
      if (name_follows) {
        expr.terms.push_back({toks[pos].text, sign * *num});
        ++pos;
      } else {
        expr.constant += sign * *num;
      }
    } else {
      expr.terms.push_back({toks[pos].text, sign});
      ++pos;
    }
  }
  return expr;
}

struct LpVar {
  VarKind kind = VarKind::kContinuous;
  double lo = 0.0;
  double hi = kInf;
  bool bounded = false;
};

MilpModel parse_lp(std::string_view doc) {
  const auto lines = split_lines(doc);
  std::map<std::string, std::string> metadata;
  std::vector<Token> objective_toks;
  std::vector<Token> constraint_toks;
  std::vector<std::pair<std::vector<std::string>, int>> bound_lines;
  std::vector<Token> general_toks;
  std::vector<Token> binary_toks;

  LpSection section = LpSection::kNone;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int lineno = static_cast<int>(li) + 1;
    std::string_view line = lines[li];
    if (!line.empty() && line.front() == '\\') {
      constexpr std::string_view kMeta = "\\ @meta ";
      if (line.substr(0, kMeta.size()) == kMeta) {
        std::string_view rest = line.substr(kMeta.size());
        const auto sp = rest.find(' ');
        if (sp == std::string_view::npos) {
          metadata[std::string(rest)] = "";
        } else {
          metadata[std::string(rest.substr(0, sp))] =
              std::string(rest.substr(sp + 1));
        }
      }
      continue;
    }
    if (auto kw = lp_keyword(line)) {
      section = *kw;
      continue;
    }
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    auto push = [&](std::vector<Token>& into) {
      for (auto& t : toks) into.push_back({std::move(t), lineno});
    };
    switch (section) {
      case LpSection::kObjective:
        push(objective_toks);
        break;
      case LpSection::kConstraints:
        push(constraint_toks);
        break;
      case LpSection::kBounds:
        bound_lines.emplace_back(std::move(toks), lineno);
        break;
      case LpSection::kGeneral:
        push(general_toks);
        break;
      case LpSection::kBinary:
        push(binary_toks);
        break;
      case LpSection::kNone:
        throw ParseError(lineno, "content before Minimize section");
      case LpSection::kEnd:
        throw ParseError(lineno, "content after End");
    }
  }
  if (section != LpSection::kEnd) {
    throw ParseError(static_cast<int>(lines.size()), "missing End");
  }

  // Variable order: Bounds section first (our writer lists every column
  // there in id order), then first appearance elsewhere.
  std::vector<std::string> order;
  std::unordered_map<std::string, LpVar> vars;
  auto touch = [&](const std::string& name) -> LpVar& {
    auto [it, inserted] = vars.try_emplace(name);
    if (inserted) order.push_back(name);
    return it->second;
  };

  for (const auto& [toks, lineno] : bound_lines) {
    auto num = [&](std::size_t i) {
      auto v = parse_number(toks.at(i));
      if (!v) throw ParseError(lineno, "expected number, got " + toks[i]);
      return *v;
    };
    if (toks.size() == 5 && is_sense(toks[1]) && is_sense(toks[3])) {
      LpVar& v = touch(toks[2]);
      v.lo = num(0);
      v.hi = num(4);
      v.bounded = true;
    } else if (toks.size() == 2 && (toks[1] == "free" || toks[1] == "Free" ||
                                    toks[1] == "FREE")) {
      LpVar& v = touch(toks[0]);
      v.lo = -kInf;
      v.hi = kInf;
      v.bounded = true;
    } else if (toks.size() == 3 && is_sense(toks[1])) {
      const bool name_left = !parse_number(toks[0]).has_value();
      const std::string& name = name_left ? toks[0] : toks[2];
      const double value = name_left ? num(2) : num(0);
      RowSense s = sense_from(toks[1]);
      if (!name_left && s != RowSense::kEqual) {
        s = s == RowSense::kLessEqual ? RowSense::kGreaterEqual
                                      : RowSense::kLessEqual;
      }
      LpVar& v = touch(name);
      v.bounded = true;
      if (s == RowSense::kEqual) {
        v.lo = v.hi = value;
      } else if (s == RowSense::kLessEqual) {
        v.hi = value;
      } else {
        v.lo = value;
      }
    } else {
      throw ParseError(lineno, "malformed bound");
    }
  }

  std::size_t pos = 0;
  const auto never = [](const std::string&) { return false; };
  if (objective_toks.empty()) throw ParseError(0, "empty objective section");
  if (objective_toks[0].text.back() == ':') pos = 1;
  Expression objective = parse_expression(objective_toks, pos, never);
  for (const auto& t : objective.terms) touch(t.name);

  struct RawConstraint {
    std::string name;
    Expression expr;
    RowSense sense;
    double rhs;
  };
  std::vector<RawConstraint> raw;
  pos = 0;
  int auto_name = 0;
  while (pos < constraint_toks.size()) {
    RawConstraint rc;
    const Token& head = constraint_toks[pos];
    if (head.text.size() > 1 && head.text.back() == ':') {
      rc.name = head.text.substr(0, head.text.size() - 1);
      ++pos;
    } else {
      rc.name = "R" + std::to_string(++auto_name);
    }
    const auto at_sense = [](const std::string& t) { return is_sense(t); };
    rc.expr = parse_expression(constraint_toks, pos, at_sense);
    if (pos >= constraint_toks.size()) {
      throw ParseError(head.line, "constraint " + rc.name + " lacks a sense");
    }
    rc.sense = sense_from(constraint_toks[pos].text);
    ++pos;
    double sign = 1.0;
    if (pos < constraint_toks.size() &&
        (constraint_toks[pos].text == "-" || constraint_toks[pos].text == "+")) {
      if (constraint_toks[pos].text == "-") sign = -1.0;
      ++pos;
    }
    if (pos >= constraint_toks.size()) {
      throw ParseError(head.line, "constraint " + rc.name + " lacks a rhs");
    }
    auto rhs = parse_number(constraint_toks[pos].text);
    if (!rhs) {
      throw ParseError(constraint_toks[pos].line,
                       "expected rhs number, got " + constraint_toks[pos].text);
    }
    ++pos;
    rc.rhs = sign * *rhs - rc.expr.constant;
    for (const auto& t : rc.expr.terms) touch(t.name);
    raw.push_back(std::move(rc));
  }

  for (const auto& t : general_toks) {
    LpVar& v = touch(t.text);
    v.kind = VarKind::kInteger;
  }
  for (const auto& t : binary_toks) {
    LpVar& v = touch(t.text);
    v.kind = VarKind::kBinary;
    if (!v.bounded) {
      v.lo = 0.0;
      v.hi = 1.0;
    }
  }

  MilpModel model;
  model.metadata() = std::move(metadata);
  for (const auto& name : order) {
    const LpVar& v = vars.at(name);
    model.add_variable({name, v.kind, v.lo, v.hi});
  }
  std::vector<Term> obj_terms;
  for (const auto& t : objective.terms) {
    obj_terms.push_back({model.variable_id(t.name), t.coef});
  }
  model.set_objective(std::move(obj_terms), objective.constant);
  for (auto& rc : raw) {
    LinearConstraint c;
    c.name = std::move(rc.name);
    c.sense = rc.sense;
    c.rhs = rc.rhs;
    for (const auto& t : rc.expr.terms) {
      c.terms.push_back({model.variable_id(t.name), t.coef});
    }
    model.add_constraint(std::move(c));
  }
  return model;
}

// ---------------------------------------------------------------- MPS

constexpr std::size_t kMpsNameWidth = 8;
constexpr const char* kObjRow = "COST";

std::string pad(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return s + std::string(width - s.size(), ' ');
}

std::vector<std::string> mps_names(const std::vector<std::string>& full,
                                   char alias_prefix, MpsNames mode,
                                   bool& aliased) {
  const bool fits = std::all_of(full.begin(), full.end(), [](const auto& n) {
    return n.size() <= kMpsNameWidth;
  });
  std::vector<std::string> out;
  out.reserve(full.size());
  if (fits) {
    out = full;
    return out;
  }
  if (mode == MpsNames::kAlias) {
    aliased = true;
    char buf[16];
    for (std::size_t i = 0; i < full.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%c%07zu", alias_prefix, i + 1);
      out.emplace_back(buf);
    }
    return out;
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : full) {
    std::string cut = n.substr(0, kMpsNameWidth);
    if (!seen.insert(cut).second) {
      throw ModelError("name collision after truncation: '" + cut + "' (from " +
                       n + ")");
    }
    out.push_back(std::move(cut));
  }
  return out;
}

std::string mps_entry(const char* indent, const std::string& a,
                      const std::string& b, const std::string& value) {
  std::string line = indent;
  line += pad(a, kMpsNameWidth);
  line += "  ";
  line += pad(b, kMpsNameWidth);
  line += "  ";
  line += value;
  line += '\n';
  return line;
}

std::string export_mps(const MilpModel& model, MpsNames mode) {
  std::vector<std::string> col_full, row_full;
  for (const auto& v : model.variables()) col_full.push_back(v.name);
  for (const auto& c : model.constraints()) row_full.push_back(c.name);
  bool col_alias = false, row_alias = false;
  const auto cols = mps_names(col_full, 'C', mode, col_alias);
  const auto rows = mps_names(row_full, 'R', mode, row_alias);
  if (std::find(rows.begin(), rows.end(), kObjRow) != rows.end()) {
    throw ModelError("constraint name COST clashes with the objective row");
  }

  std::ostringstream out;
  out << "* mbus mps-fixed v1\n";
  for (const auto& [key, value] : model.metadata()) {
    out << "* @meta " << key << ' ' << value << '\n';
  }
  if (col_alias) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out << "* @name " << cols[i] << ' ' << col_full[i] << '\n';
    }
  }
  if (row_alias) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << "* @name " << rows[i] << ' ' << row_full[i] << '\n';
    }
  }
  out << "NAME          MBUS\nROWS\n";
  out << " N  " << kObjRow << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const char* s = "E";
    if (model.constraint(static_cast<int>(i)).sense == RowSense::kLessEqual) {
      s = "L";
    } else if (model.constraint(static_cast<int>(i)).sense ==
               RowSense::kGreaterEqual) {
      s = "G";
    }
    out << ' ' << s << "  " << rows[i] << '\n';
  }

  // Column-major entries.
  const int n = model.num_variables();
  std::vector<std::vector<std::pair<int, double>>> by_col(n);
  for (const auto& t : model.objective().terms) {
    by_col[t.var].emplace_back(-1, t.coef);
  }
  for (int r = 0; r < model.num_constraints(); ++r) {
    for (const auto& t : model.constraint(r).terms) {
      by_col[t.var].emplace_back(r, t.coef);
    }
  }
  out << "COLUMNS\n";
  bool in_marker = false;
  int marker_id = 0;
  for (int j = 0; j < n; ++j) {
    const bool integral = model.variable(j).integral();
    if (integral != in_marker) {
      char buf[96];
      std::snprintf(buf, sizeof buf,
                    "    M%07d  'MARKER'                 '%s'\n", marker_id++,
                    integral ? "INTORG" : "INTEND");
      out << buf;
      in_marker = integral;
    }
    if (by_col[j].empty()) {
      out << mps_entry("    ", cols[j], kObjRow, "0");
      continue;
    }
    for (const auto& [r, v] : by_col[j]) {
      out << mps_entry("    ", cols[j], r < 0 ? kObjRow : rows[r],
                       format_number(v));
    }
  }
  if (in_marker) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "    M%07d  'MARKER'                 'INTEND'\n", marker_id);
    out << buf;
  }

  out << "RHS\n";
  for (int r = 0; r < model.num_constraints(); ++r) {
    const double rhs = model.constraint(r).rhs;
    if (rhs != 0.0) out << mps_entry("    ", "RHS", rows[r], format_number(rhs));
  }
  if (model.objective().constant != 0.0) {
    out << mps_entry("    ", "RHS", kObjRow,
                     format_number(-model.objective().constant));
  }

  out << "BOUNDS\n";
  auto bound = [&](const char* type, int j, std::optional<double> value) {
    out << ' ' << type << " BND       " << pad(cols[j], kMpsNameWidth);
    if (value) out << "  " << format_number(*value);
    out << '\n';
  };
  for (int j = 0; j < n; ++j) {
    const Variable& v = model.variable(j);
    if (v.kind == VarKind::kBinary && v.lo == 0.0 && v.hi == 1.0) {
      bound("BV", j, std::nullopt);
      continue;
    }
    if (v.lo == v.hi) {
      bound("FX", j, v.lo);
      continue;
    }
    if (v.integral()) {
      if (v.lo == -kInf) {
        bound("MI", j, std::nullopt);
      } else {
        bound("LO", j, v.lo);
      }
      if (v.hi == kInf) {
        bound("PL", j, std::nullopt);
      } else {
        bound("UP", j, v.hi);
      }
      continue;
    }
    if (v.lo == -kInf && v.hi == kInf) {
      bound("FR", j, std::nullopt);
      continue;
    }
    if (v.lo == -kInf) {
      bound("MI", j, std::nullopt);
    } else if (v.lo != 0.0) {
      bound("LO", j, v.lo);
    }
    if (v.hi != kInf) bound("UP", j, v.hi);
  }
  out << "ENDATA\n";
  return out.str();
}

MilpModel parse_mps(std::string_view doc) {
  const auto lines = split_lines(doc);
  std::map<std::string, std::string> metadata;
  std::unordered_map<std::string, std::string> alias;

  enum class Sec { kNone, kName, kRows, kColumns, kRhs, kBounds, kEnd };
  Sec sec = Sec::kNone;

  std::string obj_row;
  struct Row {
    std::string name;
    RowSense sense;
    double rhs = 0.0;
    std::vector<Term> terms;
  };
  std::vector<Row> rows;
  std::unordered_map<std::string, int> row_index;
  std::vector<Variable> cols;
  std::vector<bool> col_bounded_lo, col_bounded_hi;
  std::unordered_map<std::string, int> col_index;
  std::vector<Term> obj_terms;
  double obj_constant = 0.0;
  bool integer_block = false;

  auto resolve = [&](const std::string& n) {
    const auto it = alias.find(n);
    return it == alias.end() ? n : it->second;
  };

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int lineno = static_cast<int>(li) + 1;
    const std::string_view line = lines[li];
    if (line.empty()) continue;
    if (line.front() == '*') {
      auto toks = split_ws(line.substr(1));
      if (toks.size() >= 2 && toks[0] == "@meta") {
        constexpr std::string_view kMeta = "* @meta ";
        std::string_view rest = line.substr(std::min(line.size(), kMeta.size()));
        const auto sp = rest.find(' ');
        metadata[std::string(rest.substr(0, sp))] =
            sp == std::string_view::npos ? "" : std::string(rest.substr(sp + 1));
      } else if (toks.size() == 3 && toks[0] == "@name") {
        alias[toks[1]] = toks[2];
      }
      continue;
    }
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (!std::isspace(static_cast<unsigned char>(line.front()))) {
      const std::string& head = toks[0];
      if (head == "NAME") {
        sec = Sec::kName;
      } else if (head == "ROWS") {
        sec = Sec::kRows;
      } else if (head == "COLUMNS") {
        sec = Sec::kColumns;
      } else if (head == "RHS") {
        sec = Sec::kRhs;
      } else if (head == "BOUNDS") {
        sec = Sec::kBounds;
      } else if (head == "ENDATA") {
        sec = Sec::kEnd;
      } else if (head == "RANGES") {
        throw ParseError(lineno, "RANGES section is not supported");
      } else {
        throw ParseError(lineno, "unknown section " + head);
      }
      continue;
    }
    switch (sec) {
      case Sec::kRows: {
        if (toks.size() != 2) throw ParseError(lineno, "malformed ROWS entry");
        const std::string name = resolve(toks[1]);
        if (toks[0] == "N") {
          if (obj_row.empty()) obj_row = toks[1];
          continue;
        }
        RowSense s;
        if (toks[0] == "L") {
          s = RowSense::kLessEqual;
        } else if (toks[0] == "G") {
          s = RowSense::kGreaterEqual;
        } else if (toks[0] == "E") {
          s = RowSense::kEqual;
        } else {
          throw ParseError(lineno, "unknown row type " + toks[0]);
        }
        row_index[toks[1]] = static_cast<int>(rows.size());
        rows.push_back({name, s, 0.0, {}});
        break;
      }
      case Sec::kColumns: {
        if (toks.size() == 3 && toks[1] == "'MARKER'") {
          if (toks[2] == "'INTORG'") {
            integer_block = true;
          } else if (toks[2] == "'INTEND'") {
            integer_block = false;
          } else {
            throw ParseError(lineno, "unknown marker " + toks[2]);
          }
          continue;
        }
        if (toks.size() != 3 && toks.size() != 5) {
          throw ParseError(lineno, "malformed COLUMNS entry");
        }
        auto it = col_index.find(toks[0]);
        int j;
        if (it == col_index.end()) {
          j = static_cast<int>(cols.size());
          col_index.emplace(toks[0], j);
          cols.push_back({resolve(toks[0]),
                          integer_block ? VarKind::kInteger
                                        : VarKind::kContinuous,
                          0.0, kInf});
          col_bounded_lo.push_back(false);
          col_bounded_hi.push_back(false);
        } else {
          j = it->second;
        }
        for (std::size_t f = 1; f + 1 < toks.size(); f += 2) {
          auto v = parse_number(toks[f + 1]);
          if (!v) throw ParseError(lineno, "bad number " + toks[f + 1]);
          if (toks[f] == obj_row) {
            obj_terms.push_back({j, *v});
          } else {
            auto r = row_index.find(toks[f]);
            if (r == row_index.end()) {
              throw ParseError(lineno, "unknown row " + toks[f]);
            }
            rows[r->second].terms.push_back({j, *v});
          }
        }
        break;
      }
      case Sec::kRhs: {
        if (toks.size() != 3 && toks.size() != 5) {
          throw ParseError(lineno, "malformed RHS entry");
        }
        for (std::size_t f = 1; f + 1 < toks.size(); f += 2) {
          auto v = parse_number(toks[f + 1]);
          if (!v) throw ParseError(lineno, "bad number " + toks[f + 1]);
          if (toks[f] == obj_row) {
            obj_constant = -*v;
          } else {
            auto r = row_index.find(toks[f]);
            if (r == row_index.end()) {
              throw ParseError(lineno, "unknown row " + toks[f]);
            }
            rows[r->second].rhs = *v;
          }
        }
        break;
      }
      case Sec::kBounds: {
        if (toks.size() < 3) throw ParseError(lineno, "malformed BOUNDS entry");
        const std::string& type = toks[0];
        auto it = col_index.find(toks[2]);
        if (it == col_index.end()) {
          throw ParseError(lineno, "unknown column " + toks[2]);
        }
        Variable& v = cols[it->second];
        auto value = [&]() {
          if (toks.size() < 4) throw ParseError(lineno, "bound lacks a value");
          auto x = parse_number(toks[3]);
          if (!x) throw ParseError(lineno, "bad number " + toks[3]);
          return *x;
        };
        if (type == "UP") {
          v.hi = value();
        } else if (type == "LO") {
          v.lo = value();
        } else if (type == "FX") {
          v.lo = v.hi = value();
        } else if (type == "FR") {
          v.lo = -kInf;
          v.hi = kInf;
        } else if (type == "MI") {
          v.lo = -kInf;
        } else if (type == "PL") {
          v.hi = kInf;
        } else if (type == "BV") {
          v.kind = VarKind::kBinary;
          v.lo = 0.0;
          v.hi = 1.0;
        } else if (type == "LI") {
          v.kind = VarKind::kInteger;
          v.lo = value();
        } else if (type == "UI") {
          v.kind = VarKind::kInteger;
          v.hi = value();
        } else {
          throw ParseError(lineno, "unknown bound type " + type);
        }
        break;
      }
      case Sec::kName:
      case Sec::kNone:
        throw ParseError(lineno, "entry outside of a section");
      case Sec::kEnd:
        throw ParseError(lineno, "content after ENDATA");
    }
  }
  if (sec != Sec::kEnd) {
    throw ParseError(static_cast<int>(lines.size()), "missing ENDATA");
  }

  MilpModel model;
  model.metadata() = std::move(metadata);
  for (auto& v : cols) model.add_variable(std::move(v));
  model.set_objective(std::move(obj_terms), obj_constant);
  for (auto& r : rows) {
    model.add_constraint({std::move(r.name), std::move(r.terms), r.sense, r.rhs});
  }
  return model;
}

}  // namespace

std::string export_model(const MilpModel& model, FileFormat format,
                         MpsNames names) {
  return format == FileFormat::kLpText ? export_lp(model)
                                       : export_mps(model, names);
}

MilpModel parse_model(std::string_view document, FileFormat format) {
  return format == FileFormat::kLpText ? parse_lp(document)
                                       : parse_mps(document);
}

}  // namespace mbus::milp
