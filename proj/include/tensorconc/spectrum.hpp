#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace tensorconc {

enum class SpectrumKind { identity, geometric, polynomial, custom };

std::string to_string(SpectrumKind kind);
SpectrumKind spectrum_kind_from_string(const std::string& name);

/// Descending list of strictly positive eigenvalues standing in for a
/// diagonal covariance. Every rate formula consumes it only through the
/// operator norm, the trace, and their ratio.
class Spectrum {
public:
  static Spectrum identity(int d);
  static Spectrum geometric(int d, double ratio);      // ratio in (0,1)
  static Spectrum polynomial(int d, double exponent);  // exponent > 0
  static Spectrum custom(std::vector<double> eigenvalues);  // sorted copy

  /// Dispatch on kind; `param` is the ratio/exponent and is ignored for
  /// identity.
  static Spectrum make(SpectrumKind kind, int d, double param);

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  double operator_norm() const { return eigenvalues_.front(); }
  double trace() const;
  /// trace / operator norm; always in [1, dim].
  double effective_rank() const { return trace() / operator_norm(); }

  nlohmann::json to_json() const;  // plain JSON array of numbers
  static Spectrum from_json(const nlohmann::json& j);

  bool operator==(const Spectrum& other) const = default;

private:
  explicit Spectrum(std::vector<double> sorted_eigenvalues);
  std::vector<double> eigenvalues_;
};

}  // namespace tensorconc
