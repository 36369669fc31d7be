// Copyright 2026 The imvu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Mechanism file format (format_version 1) and accounting reports.
#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "imvu/accountant.hpp"
#include "imvu/error.hpp"
#include "imvu/mechanism.hpp"

namespace imvu {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr double kConstantRecomputeTol = 1e-9;

namespace internal {

inline Json OptionalNumber(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline std::optional<double> ReadOptionalNumber(const Json& j,
                                                const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) {
    throw Error(ErrorKind::kFormat, std::string(key) + " must be a number");
  }
  return j.at(key).get<double>();
}

template <typename T>
T Field(const Json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorKind::kFormat, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kFormat,
                std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace internal

inline Json MechanismToJson(const InterpolatedMechanism& mech) {
  const MechanismTable& t = mech.table();
  Json j;
  j["format_version"] = kFormatVersion;
  j["b_in"] = t.b_in();
  j["b_out"] = t.b_out();
  j["metric"] = "l1";
  j["design_eps"] = t.design_eps();
  j["grid"] = t.grid();
  j["alphabet"] = t.alphabet();
  j["log_probs"] = t.log_probs();
  j["accounting"] = {
      {"eps_prime", internal::OptionalNumber(mech.eps_prime())},
      {"fisher_m", internal::OptionalNumber(mech.fisher_m())},
      {"beta", mech.beta()},
      {"clip_norm", NormName(mech.clip().norm)},
      {"clip_c", mech.clip().clip_c},
  };
  return j;
}

struct LoadOptions {
  TableTolerances tol;
  // Recompute stored eps_prime / fisher_m and reject on mismatch.
  bool verify_constants = true;
};

// Parses and revalidates a mechanism document. Structural problems raise
// kFormat; invariant violations raise kValidation naming the check.
inline InterpolatedMechanism MechanismFromJson(const Json& j,
                                               const LoadOptions& opt = {}) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kFormat, "mechanism document must be an object");
  }
  const int version = internal::Field<int>(j, "format_version");
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kFormat,
                "unsupported format_version " + std::to_string(version));
  }
  if (internal::Field<std::string>(j, "metric") != "l1") {
    throw Error(ErrorKind::kFormat, "metric must be \"l1\"");
  }
  const int b_in = internal::Field<int>(j, "b_in");
  const int b_out = internal::Field<int>(j, "b_out");
  auto grid = internal::Field<Vector>(j, "grid");
  auto alphabet = internal::Field<Vector>(j, "alphabet");
  auto log_probs = internal::Field<Matrix>(j, "log_probs");
  const double design_eps = internal::Field<double>(j, "design_eps");
  if (static_cast<int>(grid.size()) != b_in ||
      static_cast<int>(log_probs.size()) != b_in) {
    throw Error(ErrorKind::kValidation,
                "shape check failed (grid/log_probs rows != b_in)");
  }
  if (static_cast<int>(alphabet.size()) != b_out) {
    throw Error(ErrorKind::kValidation,
                "shape check failed (alphabet length != b_out)");
  }
  MechanismTable table = MechanismTable::Create(
      std::move(grid), std::move(alphabet), std::move(log_probs), design_eps,
      opt.tol);

  if (!j.contains("accounting") || !j.at("accounting").is_object()) {
    throw Error(ErrorKind::kFormat, "missing accounting block");
  }
  const Json& acc = j.at("accounting");
  const auto eps_prime = internal::ReadOptionalNumber(acc, "eps_prime");
  const auto fisher_m = internal::ReadOptionalNumber(acc, "fisher_m");
  const double beta = internal::Field<double>(acc, "beta");
  ClipConfig clip;
  try {
    clip.norm = ParseNorm(internal::Field<std::string>(acc, "clip_norm"));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
  clip.clip_c = internal::Field<double>(acc, "clip_c");

  if (fisher_m && table.b_in() != 2) {
    throw Error(ErrorKind::kValidation,
                "accounting check failed (fisher_m present but b_in != 2)");
  }
  if (opt.verify_constants && eps_prime) {
    const double fresh = EpsPrime(table, AccountingDomain(beta)).value;
    if (std::abs(fresh - *eps_prime) > kConstantRecomputeTol) {
      std::ostringstream os;
      os << "eps_prime check failed (stored " << *eps_prime << ", recomputed "
         << fresh << ")";
      throw Error(ErrorKind::kValidation, os.str());
    }
  }
  if (opt.verify_constants && fisher_m) {
    const double fresh = FisherSup(table).m;
    if (std::abs(fresh - *fisher_m) > kConstantRecomputeTol) {
      std::ostringstream os;
      os << "fisher_m check failed (stored " << *fisher_m << ", recomputed "
         << fresh << ")";
      throw Error(ErrorKind::kValidation, os.str());
    }
  }
  return InterpolatedMechanism(std::move(table), beta, clip, eps_prime,
                               fisher_m);
}

inline Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInput, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kFormat, "'" + path + "' is not valid JSON: " +
                                        e.what());
  }
}

inline void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInput, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::kInput, "failed writing '" + path + "'");
}

inline void WriteJsonFile(const std::string& path, const Json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

inline InterpolatedMechanism LoadMechanism(const std::string& path,
                                           const LoadOptions& opt = {}) {
  return MechanismFromJson(ReadJsonFile(path), opt);
}

inline void SaveMechanism(const std::string& path,
                          const InterpolatedMechanism& mech) {
  WriteJsonFile(path, MechanismToJson(mech));
}

// Attaches certified accounting constants: eps' over the beta domain always,
// M only for two-row tables.
inline InterpolatedMechanism Certify(const MechanismTable& table, double beta,
                                     ClipConfig clip) {
  const double eps_prime = EpsPrime(table, AccountingDomain(beta)).value;
  std::optional<double> m;
  if (table.b_in() == 2) m = FisherSup(table).m;
  return InterpolatedMechanism(table, beta, clip, eps_prime, m);
}

struct AccountingRequest {
  std::string mechanism_file;
  AccountingMode mode = AccountingMode::kPure;
  std::optional<double> c_sens;  // defaults to beta
  int rounds = 1;
  double delta = kDefaultDelta;
  std::vector<double> alphas = DefaultAlphas();
};

// Builds the accounting report for `rounds` identical rounds.
inline Json AccountingReport(const InterpolatedMechanism& mech,
                             const AccountingRequest& req) {
  if (req.rounds < 1) throw Error(ErrorKind::kInput, "rounds must be >= 1");
  const double c = req.c_sens.value_or(mech.beta());
  Json r;
  r["mechanism_file"] = req.mechanism_file;
  r["mode"] = ModeName(req.mode);
  r["c_sens"] = c;
  r["rounds"] = req.rounds;
  r["delta"] = req.delta;
  const MechanismTable& t = mech.table();
  if (req.mode == AccountingMode::kPure) {
    const EpsPrimeResult ep = EpsPrime(t, AccountingDomain(mech.beta()));
    const InterpolatedMechanism certified(t, mech.beta(), mech.clip(),
                                          ep.value, mech.fisher_m());
    PrivacyLedger ledger = PrivacyLedger::Pure(req.delta);
    const double per = L1RoundEps(certified, c);
    for (int k = 0; k < req.rounds; ++k) ledger.AddPureRound(per);
    r["eps_prime"] = ep.value;
    r["per_round"] = per;
    r["composed"] = ledger.Compose()[0];
    r["eps_dp"] = ledger.SpentEps().eps;
    r["argmin_alpha"] = nullptr;
    r["certification"] = {{"grid_points", ep.grid_points}, {"pad", ep.pad}};
    return r;
  }
  if (t.b_in() != 2) {
    throw Error(ErrorKind::kState,
                "rdp accounting requires a b_in = 2 table (got b_in = " +
                    std::to_string(t.b_in()) + ")");
  }
  const FisherSupResult fs = FisherSup(t);
  PrivacyLedger ledger = PrivacyLedger::Rdp(req.alphas, req.delta);
  const std::vector<double> per = L2RoundRdp(fs.m, c, req.alphas);
  for (int k = 0; k < req.rounds; ++k) ledger.AddRdpRound(per);
  const DpConversion dp = ledger.SpentEps();
  r["fisher_m"] = fs.m;
  r["alphas"] = req.alphas;
  r["per_round"] = per;
  r["composed"] = ledger.Compose();
  r["eps_dp"] = dp.eps;
  r["argmin_alpha"] = dp.alpha;
  r["certification"] = {{"grid_points", fs.evaluations}, {"pad", fs.pad}};
  return r;
}

}  // namespace imvu
