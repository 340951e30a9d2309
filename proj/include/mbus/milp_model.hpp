#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mbus::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { kBinary, kInteger, kContinuous };
enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Variable {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  double lo = 0.0;
  double hi = kInf;

  bool integral() const { return kind != VarKind::kContinuous; }

  static Variable binary(std::string name) {
    return {std::move(name), VarKind::kBinary, 0.0, 1.0};
  }
  static Variable integer(std::string name, double lo, double hi) {
    return {std::move(name), VarKind::kInteger, lo, hi};
  }
  static Variable continuous(std::string name, double lo = 0.0,
                             double hi = kInf) {
    return {std::move(name), VarKind::kContinuous, lo, hi};
  }
};

struct Term {
  int var = -1;
  double coef = 0.0;
  friend bool operator==(const Term&, const Term&) = default;
};

struct LinearConstraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

// Minimization objective: sum(coef * var) + constant.
struct Objective {
  std::vector<Term> terms;
  double constant = 0.0;
};

// Sorts terms by variable id, merges duplicates and drops exact zeros.
std::vector<Term> canonicalize(std::vector<Term> terms);

// Builds "family[a,b,c]" from an index tuple of already formatted parts.
std::string structured_name(std::string_view family,
                            const std::vector<std::string>& indices);

struct ParsedName {
  std::string family;
  std::vector<std::string> indices;
};
std::optional<ParsedName> parse_structured_name(std::string_view name);

// Solver-agnostic MILP. Variables and constraints are append-only; ids are
// dense and assigned in insertion order.
class MilpModel {
 public:
  int add_variable(Variable v);
  int add_constraint(LinearConstraint c);

  void set_objective(std::vector<Term> terms, double constant = 0.0);
  void add_objective_term(int var, double coef);
  void set_objective_constant(double constant) {
    objective_.constant = constant;
  }

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const Variable& variable(int id) const { return variables_.at(id); }
  const LinearConstraint& constraint(int id) const {
    return constraints_.at(id);
  }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<LinearConstraint>& constraints() const {
    return constraints_;
  }
  const Objective& objective() const { return objective_; }

  std::optional<int> find_variable(std::string_view name) const;
  int variable_id(std::string_view name) const;

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const {
    return metadata_;
  }

  // After freezing, every mutating call throws.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  // Total number of nonzero coefficients over all constraints.
  std::size_t num_nonzeros() const;

 private:
  void check_mutable() const;
  void check_terms(const std::vector<Term>& terms,
                   std::string_view where) const;

  std::vector<Variable> variables_;
  std::vector<LinearConstraint> constraints_;
  Objective objective_;
  std::unordered_map<std::string, int> by_name_;
  std::map<std::string, std::string> metadata_;
  bool frozen_ = false;
};

// Value of sum(coef * x) for a term list.
double evaluate_terms(const std::vector<Term>& terms,
                      const std::vector<double>& values);

}  // namespace mbus::milp
