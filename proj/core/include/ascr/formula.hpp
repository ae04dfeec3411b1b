#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ascr {

enum class TermKind { intercept, linear, power, log, smooth, interaction };

struct Term {
  TermKind kind = TermKind::intercept;
  std::string covariate;   // empty for the intercept
  std::string covariate2;  // second factor of an interaction
  int order = 1;           // power (2 or 3) or smooth basis size k

  friend bool operator==(const Term&, const Term&) = default;
};

/// A density formula `D ~ term + term ...`; always carries exactly one intercept,
/// stored first.
struct ModelFormula {
  std::vector<Term> terms;

  bool intercept_only() const { return terms.size() == 1; }
  friend bool operator==(const ModelFormula&, const ModelFormula&) = default;
};

class FormulaError : public std::invalid_argument {
 public:
  FormulaError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " (at position " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

inline const std::vector<std::string>& default_covariates() {
  static const std::vector<std::string> names{"depth", "distance_to_coast"};
  return names;
}

/// Parses a density formula. Bare names resolve against `covariates`; a name
/// that is not a covariate may be `<cov>2`/`<cov>3` (power) or `log<cov>`.
ModelFormula parse_formula(const std::string& text,
                           std::span<const std::string> covariates = default_covariates());

/// Canonical text form; parse(to_string(f)) == f.
std::string to_string(const ModelFormula& formula);
std::string to_string(const Term& term);

/// Covariate names referenced by the formula.
std::vector<std::string> referenced_covariates(const ModelFormula& formula);

}  // namespace ascr
