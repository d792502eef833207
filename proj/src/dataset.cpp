#include "zinreg/dataset.hpp"

#include <cmath>

#include "zinreg/error.hpp"

namespace zinreg {

std::vector<int> Dataset::nonzero_indicator() const {
  std::vector<int> e(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) e[i] = y[i] != 0.0 ? 1 : 0;
  return e;
}

std::size_t Dataset::count_nonzero() const {
  std::size_t c = 0;
  for (double v : y) c += v != 0.0;
  return c;
}

bool Dataset::has_column(const std::string& name) const {
  return continuous.contains(name) || factors.contains(name);
}

const std::vector<double>& Dataset::column(const std::string& name) const {
  auto it = continuous.find(name);
  if (it == continuous.end()) {
    throw Error(ErrorCode::MissingColumn, "no continuous column '" + name + "'");
  }
  return it->second;
}

const FactorColumn& Dataset::factor(const std::string& name) const {
  auto it = factors.find(name);
  if (it == factors.end()) {
    throw Error(ErrorCode::MissingColumn, "no factor column '" + name + "'");
  }
  return it->second;
}

void Dataset::validate() const {
  const std::size_t n = y.size();
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DomainError, "non-finite response");
  }
  for (const auto& [name, col] : continuous) {
    if (col.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "column '" + name + "' has " +
                                                    std::to_string(col.size()) + " rows, expected " +
                                                    std::to_string(n));
    }
    for (double v : col) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::DomainError, "non-finite value in column '" + name + "'");
      }
    }
  }
  for (const auto& [name, col] : factors) {
    if (col.codes.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "factor '" + name + "' has wrong length");
    }
    const int nlev = static_cast<int>(col.levels.size());
    for (int c : col.codes) {
      if (c < 0 || c >= nlev) {
        throw Error(ErrorCode::DomainError, "factor '" + name + "' code out of range");
      }
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.y.reserve(rows.size());
  for (auto r : rows) out.y.push_back(y[r]);
  for (const auto& [name, col] : continuous) {
    auto& dst = out.continuous[name];
    dst.reserve(rows.size());
    for (auto r : rows) dst.push_back(col[r]);
  }
  for (const auto& [name, col] : factors) {
    auto& dst = out.factors[name];
    dst.levels = col.levels;
    dst.codes.reserve(rows.size());
    for (auto r : rows) dst.codes.push_back(col.codes[r]);
  }
  return out;
}

}  // namespace zinreg
