#include "tensorconc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tensorconc {

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::identity: return "identity";
    case SpectrumKind::geometric: return "geometric";
    case SpectrumKind::polynomial: return "polynomial";
    case SpectrumKind::custom: return "custom";
  }
  throw std::logic_error("unreachable spectrum kind");
}

SpectrumKind spectrum_kind_from_string(const std::string& name) {
  if (name == "identity") return SpectrumKind::identity;
  if (name == "geometric") return SpectrumKind::geometric;
  if (name == "polynomial") return SpectrumKind::polynomial;
  if (name == "custom") return SpectrumKind::custom;
  throw std::invalid_argument("unknown spectrum kind: " + name);
}

Spectrum::Spectrum(std::vector<double> sorted_eigenvalues)
    : eigenvalues_(std::move(sorted_eigenvalues)) {
  if (eigenvalues_.empty()) throw std::invalid_argument("spectrum must be nonempty");
  for (double lam : eigenvalues_) {
    if (!(lam > 0.0) || !std::isfinite(lam))
      throw std::invalid_argument("spectrum eigenvalues must be positive and finite");
  }
  if (!std::is_sorted(eigenvalues_.rbegin(), eigenvalues_.rend()))
    throw std::logic_error("spectrum not sorted non-increasing");
}

Spectrum Spectrum::identity(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  return Spectrum(std::vector<double>(static_cast<std::size_t>(d), 1.0));
}

Spectrum Spectrum::geometric(int d, double ratio) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("geometric ratio must lie in (0,1)");
  std::vector<double> lam(static_cast<std::size_t>(d));
  double v = 1.0;
  for (int j = 0; j < d; ++j, v *= ratio) lam[static_cast<std::size_t>(j)] = v;
  return Spectrum(std::move(lam));
}

Spectrum Spectrum::polynomial(int d, double exponent) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(exponent > 0.0)) throw std::invalid_argument("polynomial exponent must be > 0");
  std::vector<double> lam(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j)
    lam[static_cast<std::size_t>(j)] = std::pow(static_cast<double>(j + 1), -exponent);
  return Spectrum(std::move(lam));
}

Spectrum Spectrum::custom(std::vector<double> eigenvalues) {
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<double>());
  return Spectrum(std::move(eigenvalues));
}

Spectrum Spectrum::make(SpectrumKind kind, int d, double param) {
  switch (kind) {
    case SpectrumKind::identity: return identity(d);
    case SpectrumKind::geometric: return geometric(d, param);
    case SpectrumKind::polynomial: return polynomial(d, param);
    case SpectrumKind::custom:
      throw std::invalid_argument("custom spectra require an explicit value list");
  }
  throw std::logic_error("unreachable spectrum kind");
}

double Spectrum::trace() const {
  double s = 0.0;
  for (double lam : eigenvalues_) s += lam;
  return s;
}

nlohmann::json Spectrum::to_json() const { return nlohmann::json(eigenvalues_); }

Spectrum Spectrum::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("spectrum JSON must be a nonempty array of numbers");
  return custom(j.get<std::vector<double>>());
}

}  // namespace tensorconc
