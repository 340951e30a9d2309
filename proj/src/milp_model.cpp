#include "mbus/milp_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace mbus::milp {

std::vector<Term> canonicalize(std::vector<Term> terms) {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  return merged;
}

std::string structured_name(std::string_view family,
                            const std::vector<std::string>& indices) {
  std::string out(family);
  out += '[';
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i > 0) out += ',';
    out += indices[i];
  }
  out += ']';
  return out;
}

std::optional<ParsedName> parse_structured_name(std::string_view name) {
  const auto open = name.find('[');
  if (open == std::string_view::npos || open == 0 || name.back() != ']') {
    return std::nullopt;
  }
  ParsedName parsed;
  parsed.family = std::string(name.substr(0, open));
  std::string_view body = name.substr(open + 1, name.size() - open - 2);
  if (body.empty()) return parsed;  // scalar row such as "fleet[]"
  while (true) {
    const auto comma = body.find(',');
    parsed.indices.emplace_back(body.substr(0, comma));
    if (parsed.indices.back().empty()) return std::nullopt;
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return parsed;
}

namespace {

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0 || c == ':';
  });
}

}  // namespace

void MilpModel::check_mutable() const {
  if (frozen_) throw ModelError("model is frozen");
}

void MilpModel::check_terms(const std::vector<Term>& terms,
                            std::string_view where) const {
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw ModelError("unknown variable id " + std::to_string(t.var) +
                       " in " + std::string(where));
    }
    if (!std::isfinite(t.coef)) {
      throw ModelError("non-finite coefficient in " + std::string(where));
    }
  }
}

int MilpModel::add_variable(Variable v) {
  check_mutable();
  if (!valid_name(v.name)) {
    throw ModelError("invalid variable name '" + v.name + "'");
  }
  if (std::isnan(v.lo) || std::isnan(v.hi) || v.lo > v.hi) {
    throw ModelError("inverted bounds for variable " + v.name);
  }
  if (v.lo == kInf || v.hi == -kInf) {
    throw ModelError("empty domain for variable " + v.name);
  }
  if (v.kind == VarKind::kInteger && v.lo >= 0.0 && v.hi <= 1.0) {
    v.kind = VarKind::kBinary;
  }
  if (v.kind == VarKind::kBinary && (v.lo < 0.0 || v.hi > 1.0)) {
    throw ModelError("binary variable " + v.name + " must lie in [0,1]");
  }
  if (by_name_.count(v.name) != 0) {
    throw ModelError("duplicate variable name " + v.name);
  }
  const int id = num_variables();
  by_name_.emplace(v.name, id);
  variables_.push_back(std::move(v));
  return id;
}

int MilpModel::add_constraint(LinearConstraint c) {
  check_mutable();
  if (!valid_name(c.name)) {
    throw ModelError("invalid constraint name '" + c.name + "'");
  }
  check_terms(c.terms, c.name);
  if (!std::isfinite(c.rhs)) {
    throw ModelError("non-finite rhs in " + c.name);
  }
  c.terms = canonicalize(std::move(c.terms));
  constraints_.push_back(std::move(c));
  return num_constraints() - 1;
}

void MilpModel::set_objective(std::vector<Term> terms, double constant) {
  check_mutable();
  check_terms(terms, "objective");
  objective_.terms = canonicalize(std::move(terms));
  objective_.constant = constant;
}

void MilpModel::add_objective_term(int var, double coef) {
  check_mutable();
  std::vector<Term> terms = objective_.terms;
  terms.push_back({var, coef});
  check_terms(terms, "objective");
  objective_.terms = canonicalize(std::move(terms));
}

std::optional<int> MilpModel::find_variable(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int MilpModel::variable_id(std::string_view name) const {
  if (auto id = find_variable(name)) return *id;
  throw ModelError("no variable named " + std::string(name));
}

std::size_t MilpModel::num_nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& c : constraints_) nnz += c.terms.size();
  return nnz;
}

double evaluate_terms(const std::vector<Term>& terms,
                      const std::vector<double>& values) {
  double sum = 0.0;
  for (const Term& t : terms) sum += t.coef * values.at(t.var);
  return sum;
}

}  // namespace mbus::milp
