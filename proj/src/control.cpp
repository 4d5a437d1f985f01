#include "rlg/control.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "rlg/errors.hpp"
#include "rlg/fit_result.hpp"

namespace rlg {

void RafKind::validate() const {
  switch (family) {
    case Family::GKL:
      if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError("GKL raf requires 0 <= tau <= 1");
      break;
    case Family::PWD:
      if (tau == 0.0 || std::isnan(tau)) throw UsageError("PWD raf requires tau != 0");
      break;
    default:
      break;
  }
}

std::string to_string(RafKind::Family family) {
  switch (family) {
    case RafKind::Family::NED: return "NED";
    case RafKind::Family::GKL: return "GKL";
    case RafKind::Family::PWD: return "PWD";
    case RafKind::Family::HD: return "HD";
    case RafKind::Family::SCHI2: return "SCHI2";
  }
  return "?";
}

RafKind::Family parse_raf_family(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "ned") return RafKind::Family::NED;
  if (lower == "gkl") return RafKind::Family::GKL;
  if (lower == "pwd") return RafKind::Family::PWD;
  if (lower == "hd") return RafKind::Family::HD;
  if (lower == "schi2") return RafKind::Family::SCHI2;
  throw UsageError("unknown raf '" + name + "' (expected ned, gkl, pwd, hd or schi2)");
}

void Control::validate() const {
  if (!(tuning_rho > 0.0) || !(tuning_psi > 0.0)) throw UsageError("tuning constants must be positive");
  if (tuning_rho > tuning_psi) throw UsageError("tuning.rho must not exceed tuning.psi");
  if (!(bdp > 0.0 && bdp < 1.0)) throw UsageError("bdp must lie in (0, 1)");
  if (!(lower < upper)) throw UsageError("lambda grid requires lower < upper");
  if (n_resample < 1 || max_it < 1 || grid_n < 1 || subdivisions < 1 || nexp < 1 || threads < 1) {
    throw UsageError("counts must be at least 1");
  }
  if (!(refine_tol > 0.0)) throw UsageError("refine.tol must be positive");
  if (!(bw > 0.0)) throw UsageError("bw must be positive");
  if (!(minw >= 0.0 && minw < 1.0)) throw UsageError("minw must lie in [0, 1)");
  if (!(step >= 0.0)) throw UsageError("step must be nonnegative");
  raf.validate();
}

std::string to_string(Method method) {
  switch (method) {
    case Method::QTau: return "QTau";
    case Method::WQTau: return "WQTau";
    case Method::OneWL: return "oneWL";
    case Method::WL: return "WL";
    case Method::ML: return "ML";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "QTau") return Method::QTau;
  if (name == "WQTau") return Method::WQTau;
  if (name == "oneWL") return Method::OneWL;
  if (name == "WL") return Method::WL;
  if (name == "ML") return Method::ML;
  throw UsageError("unknown method '" + name + "' (expected oneWL, WQTau, WL, QTau or ML)");
}

}  // namespace rlg
