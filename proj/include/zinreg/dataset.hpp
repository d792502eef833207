#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace zinreg {

struct FactorColumn {
  std::vector<std::string> levels;  // levels[0] is the reference level
  std::vector<int> codes;           // index into levels
};

/// Response plus typed covariate columns. The zero atom must be coded as
/// exactly 0.0; every other value counts as a draw from the normal part.
class Dataset {
 public:
  std::vector<double> y;
  std::map<std::string, FactorColumn> factors;
  std::map<std::string, std::vector<double>> continuous;

  std::size_t size() const { return y.size(); }
  bool nonzero(std::size_t i) const { return y[i] != 0.0; }

  /// E_i = 1 iff y_i != 0.
  std::vector<int> nonzero_indicator() const;
  std::size_t count_nonzero() const;

  bool has_column(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  const FactorColumn& factor(const std::string& name) const;

  /// Throws DimensionMismatch on unequal column lengths, DomainError on
  /// non-finite values or out-of-range factor codes.
  void validate() const;

  Dataset subset(std::span<const std::size_t> rows) const;
};

}  // namespace zinreg
