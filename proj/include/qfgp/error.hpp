#pragma once

#include <stdexcept>
#include <string>

namespace qfgp {

/// Library error carrying a machine-readable kind ("unknown-preset",
/// "quadrature-nonconvergence", "degenerate-spectrum", ...). The CLI maps it
/// straight onto its stderr error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace qfgp
