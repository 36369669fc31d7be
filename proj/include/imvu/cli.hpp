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
// The `imvu` command line: design, validate, account, sweep, dme, train.
#pragma once

#include <cmath>
#include <cstdint>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imvu/accountant.hpp"
#include "imvu/designer.hpp"
#include "imvu/dme.hpp"
#include "imvu/error.hpp"
#include "imvu/fl.hpp"
#include "imvu/io.hpp"
#include "imvu/mechanism.hpp"

#ifndef IMVU_VERSION
#define IMVU_VERSION "0.0.0"
#endif

namespace imvu::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline std::string IsoTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes <output>.manifest.json describing how `output` was produced.
inline void WriteManifest(const std::string& output,
                          const std::vector<std::string>& argv,
                          const std::string& subcommand,
                          std::optional<std::uint64_t> seed) {
  Json m;
  m["tool"] = "imvu";
  m["version"] = IMVU_VERSION;
  m["subcommand"] = subcommand;
  m["argv"] = argv;
  m["seed"] = seed ? Json(*seed) : Json(nullptr);
  m["output"] = output;
  m["timestamp"] = IsoTimestamp();
  WriteJsonFile(output + ".manifest.json", m);
}

inline Vector ParseList(const std::string& s) {
  Vector out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInput, "bad list entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::kInput, "empty list");
  return out;
}

inline int BitsToOutputs(int bits) {
  if (bits < 1 || bits > 12) {
    throw Error(ErrorKind::kInput, "bits must lie in [1, 12]");
  }
  return 1 << bits;
}

inline void EmitJson(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    WriteJsonFile(out, j);
  }
}

// ---------------------------------------------------------------------------

struct DesignArgs {
  int bits = 1;
  int b_in = 2;
  double eps = 1.0;
  std::string metric = "l1";
  double beta = 1.0;
  std::string clip_norm = "l1";
  double clip_c = 1.0;
  double lp_tol = 1e-6;
  bool no_symmetrize = false;
  std::string out;
};

inline int RunDesign(const DesignArgs& a, const std::vector<std::string>& argv) {
  if (a.metric != "l1") {
    throw Error(ErrorKind::kInput, "only the l1 metric is supported");
  }
  DesignSpec spec;
  spec.b_in = a.b_in;
  spec.b_out = BitsToOutputs(a.bits);
  spec.eps = a.eps;
  spec.lp_tol = a.lp_tol;
  spec.symmetrize = !a.no_symmetrize;
  const DesignResult d = DesignMvuDetailed(spec);
  const InterpolatedMechanism mech =
      Certify(d.table, a.beta, ClipConfig{ParseNorm(a.clip_norm), a.clip_c});
  SaveMechanism(a.out, mech);
  WriteManifest(a.out, argv, "design", std::nullopt);
  std::cerr << "designed b_in=" << spec.b_in << " b_out=" << spec.b_out
            << " eps=" << spec.eps << " scale=" << d.scale
            << " total_variance=" << d.total_variance << " -> " << a.out
            << "\n";
  return kExitOk;
}

struct ValidateArgs {
  std::string mech;
  double tol = 1e-6;
};

inline int RunValidate(const ValidateArgs& a) {
  const Json j = ReadJsonFile(a.mech);
  RawTable raw;
  try {
    raw.grid = j.at("grid").get<Vector>();
    raw.alphabet = j.at("alphabet").get<Vector>();
    raw.probs = internal::Exp(j.at("log_probs").get<Matrix>());
    raw.design_eps = j.at("design_eps").get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed table: ") + e.what());
  }
  const ValidationReport report = ValidateTable(raw, a.tol);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name
              << " max_violation=" << c.max_violation;
    if (!c.passed && !c.detail.empty()) std::cout << " at " << c.detail;
    std::cout << "\n";
  }
  if (!report.passed()) {
    std::cerr << "validation error: " << report.FirstFailure() << "\n";
    return kExitFailure;
  }
  TableTolerances tol{a.tol, a.tol, a.tol, a.tol};
  MechanismFromJson(j, LoadOptions{tol, true});
  std::cout << "ok   accounting_constants\n";
  return kExitOk;
}

struct AccountArgs {
  std::string mech;
  std::string mode = "pure";
  std::string clip_norm;
  double clip_c = 0.0;
  double beta = 0.0;
  double c_sens = 0.0;
  int rounds = 1;
  double delta = kDefaultDelta;
  std::string alphas;
  std::string out;
};

inline int RunAccount(const AccountArgs& a,
                      const std::vector<std::string>& argv) {
  const InterpolatedMechanism loaded = LoadMechanism(a.mech);
  ClipConfig clip = loaded.clip();
  if (!a.clip_norm.empty()) clip.norm = ParseNorm(a.clip_norm);
  if (a.clip_c > 0.0) clip.clip_c = a.clip_c;
  const double beta = a.beta > 0.0 ? a.beta : loaded.beta();
  const InterpolatedMechanism mech(loaded.table(), beta, clip);

  AccountingRequest req;
  req.mechanism_file = a.mech;
  req.mode = ParseMode(a.mode);
  if (a.c_sens > 0.0) req.c_sens = a.c_sens;
  req.rounds = a.rounds;
  req.delta = a.delta;
  if (!a.alphas.empty()) req.alphas = ParseList(a.alphas);
  Json report = AccountingReport(mech, req);
  report["clip_norm"] = NormName(clip.norm);
  report["clip_c"] = clip.clip_c;
  report["beta"] = beta;
  EmitJson(report, a.out);
  if (!a.out.empty()) WriteManifest(a.out, argv, "account", std::nullopt);
  return kExitOk;
}

struct SweepArgs {
  double eps = 5.0;
  int bits = 3;
  std::string b_in_list = "2,4,8";
  int points = kSweepPoints;
  std::string out;
};

inline int RunSweep(const SweepArgs& a, const std::vector<std::string>& argv) {
  std::vector<MechanismTable> tables;
  for (double b : ParseList(a.b_in_list)) {
    DesignSpec spec;
    spec.b_in = static_cast<int>(b);
    if (spec.b_in != b) throw Error(ErrorKind::kInput, "b_in must be integral");
    spec.b_out = BitsToOutputs(a.bits);
    spec.eps = a.eps;
    tables.push_back(DesignMvu(spec));
  }
  const SweepReport report = SweepBiasVariance(tables, SweepGrid(a.points), a.eps);
  WriteTextFile(a.out, report.ToCsv());
  WriteManifest(a.out, argv, "sweep", std::nullopt);
  for (const auto& t : tables) {
    std::cerr << "b_in=" << t.b_in()
              << " imvu max|bias|=" << report.MaxAbsBias("imvu", t.b_in())
              << " mvu max|bias|=" << report.MaxAbsBias("mvu", t.b_in())
              << "\n";
  }
  return kExitOk;
}

struct DmeArgs {
  std::string mechanism = "imvu";
  std::string mech;
  int n_clients = 100;
  int dims = 16;
  int trials = 20;
  std::string input = "uniform";
  double input_scale = 0.1;
  double noise = 1.0;
  std::string clip_norm = "l2";
  double clip_c = 1.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

inline int RunDme(const DmeArgs& a, const std::vector<std::string>& argv) {
  DmeConfig cfg;
  cfg.mechanism = ParseDmeMechanism(a.mechanism);
  cfg.input = ParseInputDist(a.input);
  cfg.input_scale = a.input_scale;
  const ClipConfig clip{ParseNorm(a.clip_norm), a.clip_c};
  if (internal::UsesTable(cfg.mechanism)) {
    if (a.mech.empty()) {
      throw Error(ErrorKind::kState, a.mechanism + " needs --mech FILE");
    }
    const InterpolatedMechanism loaded = LoadMechanism(a.mech);
    cfg.mech.emplace(loaded.table(), a.beta > 0.0 ? a.beta : loaded.beta(),
                     clip);
  }
  cfg.baseline.clip = clip;
  cfg.baseline.noise = a.noise;
  cfg.baseline.kind = cfg.mechanism == DmeMechanism::kLaplace
                          ? BaselineKind::kLaplace
                          : cfg.mechanism == DmeMechanism::kSignSgd
                                ? BaselineKind::kSignSgd
                                : BaselineKind::kGaussian;
  Rng rng = NamedStream(a.seed, "dme");
  const DmeResult r = DmeMse(a.n_clients, a.dims, cfg, rng, a.trials);
  std::ostringstream os;
  os.precision(17);
  os << "mechanism,n_clients,d,trials,mse,bits_per_coord\n"
     << a.mechanism << ',' << a.n_clients << ',' << a.dims << ',' << a.trials
     << ',' << r.mse << ',' << r.bits_per_coord << '\n';
  WriteTextFile(a.out, os.str());
  WriteManifest(a.out, argv, "dme", a.seed);
  return kExitOk;
}

struct TrainArgs {
  std::string mechanism = "identity";
  std::string mech;
  std::string mode = "pure";
  FlConfig cfg;
  std::string clip_norm = "l2";
  double c_sens = 0.0;
  std::string alphas;
  std::string out;
  std::string summary;
};

inline int RunTrain(TrainArgs a, const std::vector<std::string>& argv) {
  FlConfig& cfg = a.cfg;
  cfg.mechanism = ParseDmeMechanism(a.mechanism);
  cfg.mode = ParseMode(a.mode);
  cfg.clip.norm = ParseNorm(a.clip_norm);
  if (a.c_sens > 0.0) cfg.c_sens = a.c_sens;
  if (!a.alphas.empty()) cfg.alphas = ParseList(a.alphas);
  if (internal::UsesTable(cfg.mechanism)) {
    if (a.mech.empty()) {
      throw Error(ErrorKind::kState, a.mechanism + " needs --mech FILE");
    }
    const InterpolatedMechanism loaded = LoadMechanism(a.mech);
    cfg.table = loaded.table();
    cfg.fisher_m = loaded.fisher_m();
    cfg.eps_prime = loaded.eps_prime();
    if (cfg.eps_prime && std::abs(cfg.beta - loaded.beta()) > 0.0) {
      cfg.eps_prime =
          EpsPrime(loaded.table(), AccountingDomain(cfg.beta)).value;
    }
  }
  const TrainResult r = TrainFl(cfg);
  WriteTextFile(a.out, r.ToCsv());
  Json s;
  s["mechanism"] = a.mechanism;
  s["mode"] = ModeName(r.mode);
  s["rounds"] = cfg.rounds;
  s["final_accuracy"] = r.final_accuracy;
  const double spent = r.rounds.back().spent_eps;
  s["eps"] = std::isfinite(spent) ? Json(spent) : Json(nullptr);
  s["delta"] = cfg.delta;
  s["per_round_cost"] = r.per_round_cost;
  s["composed"] = r.composed;
  s["seed"] = cfg.seed;
  const std::string summary = a.summary.empty() ? a.out + ".summary.json"
                                                : a.summary;
  WriteJsonFile(summary, s);
  WriteManifest(a.out, argv, "train", cfg.seed);
  std::cerr << "final accuracy " << r.final_accuracy << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int Run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"I-MVU private compression: design, accounting and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(IMVU_VERSION));

  DesignArgs design;
  auto* sd = app.add_subcommand("design", "Design an MVU table and certify it");
  sd->add_option("--bits", design.bits, "Output bits b (B_out = 2^b)")
      ->required();
  sd->add_option("--b-in", design.b_in, "Grid size B_in")->required();
  sd->add_option("--eps", design.eps, "L1-metric-DP design epsilon")
      ->required();
  sd->add_option("--metric", design.metric, "Design metric")
      ->check(CLI::IsMember({"l1"}));
  sd->add_option("--beta", design.beta, "Input scale beta");
  sd->add_option("--clip-norm", design.clip_norm, "l1 or l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  sd->add_option("--clip-c", design.clip_c, "Clip norm C");
  sd->add_option("--lp-tol", design.lp_tol, "Constraint tolerance");
  sd->add_flag("--no-symmetrize", design.no_symmetrize,
               "Skip anadromic averaging");
  sd->add_option("--out", design.out, "Mechanism file")->required();

  ValidateArgs validate;
  auto* sv = app.add_subcommand("validate", "Check a mechanism file");
  sv->add_option("--mech", validate.mech, "Mechanism file")->required();
  sv->add_option("--tol", validate.tol, "Tolerance for every check");

  AccountArgs account;
  auto* sa = app.add_subcommand("account", "Per-round and composed privacy");
  sa->add_option("--mech", account.mech, "Mechanism file")->required();
  sa->add_option("--mode", account.mode, "pure or rdp")
      ->check(CLI::IsMember({"pure", "rdp"}));
  sa->add_option("--clip-norm", account.clip_norm, "l1 or l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  sa->add_option("--clip-c", account.clip_c, "Clip norm C");
  sa->add_option("--beta", account.beta, "Input scale (default: file)");
  sa->add_option("--c-sens", account.c_sens, "Sensitivity (default: beta)");
  sa->add_option("--rounds", account.rounds, "Rounds T");
  sa->add_option("--delta", account.delta, "Target delta");
  sa->add_option("--alphas", account.alphas, "Comma-separated RDP orders");
  sa->add_option("--out", account.out, "Report file (default: stdout)");

  SweepArgs sweep;
  auto* ss = app.add_subcommand("sweep", "Bias/variance sweep of I-MVU and MVU");
  ss->add_option("--eps", sweep.eps, "Design epsilon");
  ss->add_option("--bits", sweep.bits, "Output bits");
  ss->add_option("--b-in-list", sweep.b_in_list, "Comma-separated B_in values");
  ss->add_option("--points", sweep.points, "Number of x values");
  ss->add_option("--out", sweep.out, "CSV file")->required();

  DmeArgs dme;
  auto* sm = app.add_subcommand("dme", "Distributed mean estimation MSE");
  sm->add_option("--mechanism", dme.mechanism,
                 "identity|imvu|mvu|laplace|gaussian|signsgd");
  sm->add_option("--mech", dme.mech, "Mechanism file (imvu, mvu)");
  sm->add_option("--n-clients", dme.n_clients, "Clients");
  sm->add_option("--dims", dme.dims, "Vector dimension");
  sm->add_option("--trials", dme.trials, "Trials");
  sm->add_option("--input", dme.input, "uniform or gaussian")
      ->check(CLI::IsMember({"uniform", "gaussian"}));
  sm->add_option("--input-scale", dme.input_scale, "Input coordinate scale");
  sm->add_option("--noise", dme.noise, "eps (laplace) or sigma");
  sm->add_option("--clip-norm", dme.clip_norm, "l1 or l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  sm->add_option("--clip-c", dme.clip_c, "Clip norm C");
  sm->add_option("--beta", dme.beta, "Input scale (default: file)");
  sm->add_option("--seed", dme.seed, "Root seed");
  sm->add_option("--out", dme.out, "CSV file")->required();

  TrainArgs train;
  auto* st = app.add_subcommand("train", "Federated training on synthetic data");
  st->add_option("--mechanism", train.mechanism,
                 "identity|imvu|mvu|laplace|gaussian|signsgd");
  st->add_option("--mech", train.mech, "Mechanism file (imvu, mvu)");
  st->add_option("--mode", train.mode, "I-MVU accounting: pure or rdp")
      ->check(CLI::IsMember({"pure", "rdp"}));
  st->add_option("--rounds", train.cfg.rounds, "Rounds");
  st->add_option("--cohort", train.cfg.cohort, "Clients per round");
  st->add_option("--n-train", train.cfg.n_train, "Clients (one sample each)");
  st->add_option("--n-test", train.cfg.n_test, "Held-out samples");
  st->add_option("--dims", train.cfg.dims, "Feature dimension");
  st->add_option("--classes", train.cfg.n_classes, "Classes");
  st->add_option("--separation", train.cfg.separation, "Class mean norm");
  st->add_option("--lr", train.cfg.lr, "Server learning rate");
  st->add_option("--momentum", train.cfg.momentum, "Momentum");
  st->add_option("--signsgd-server-lr", train.cfg.signsgd_server_lr,
                 "Extra server step factor for signsgd");
  st->add_option("--clip-norm", train.clip_norm, "l1 or l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  st->add_option("--clip-c", train.cfg.clip.clip_c, "Clip norm C");
  st->add_option("--beta", train.cfg.beta, "Input scale beta");
  st->add_option("--noise", train.cfg.noise, "eps (laplace) or sigma");
  st->add_option("--delta", train.cfg.delta, "Target delta");
  st->add_option("--c-sens", train.c_sens, "Sensitivity (default: beta)");
  st->add_option("--alphas", train.alphas, "Comma-separated RDP orders");
  st->add_option("--seed", train.cfg.seed, "Root seed");
  st->add_option("--out", train.out, "Per-round CSV")->required();
  st->add_option("--summary", train.summary, "Summary JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sd) return RunDesign(design, args);
    if (*sv) return RunValidate(validate);
    if (*sa) return RunAccount(account, args);
    if (*ss) return RunSweep(sweep, args);
    if (*sm) return RunDme(dme, args);
    if (*st) return RunTrain(train, args);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace imvu::cli
