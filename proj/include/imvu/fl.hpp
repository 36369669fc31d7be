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
// Client-level DP federated training of a softmax-regression model on
// synthetic Gaussian clusters.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "imvu/accountant.hpp"
#include "imvu/baselines.hpp"
#include "imvu/dme.hpp"
#include "imvu/error.hpp"
#include "imvu/mechanism.hpp"
#include "imvu/rng.hpp"

namespace imvu {

struct Dataset {
  Matrix features;          // n rows of d features
  std::vector<int> labels;  // in [0, n_classes)
  int n_classes = 2;

  std::size_t size() const { return labels.size(); }
  int dims() const {
    return features.empty() ? 0 : static_cast<int>(features[0].size());
  }
};

// Balanced classes (label i mod n_classes) with unit-variance Gaussian
// features around class means of norm `separation`, drawn as random
// directions.
inline Dataset GenerateSynthetic(int n, int d, int n_classes,
                                 double separation, std::uint64_t seed) {
  if (n_classes < 2 || n < n_classes || d < 1) {
    throw Error(ErrorKind::kInput, "need n >= n_classes >= 2 and d >= 1");
  }
  if (!(separation >= 0.0)) {
    throw Error(ErrorKind::kInput, "separation must be non-negative");
  }
  Rng means_rng = NamedStream(seed, "synthetic/means");
  Rng data_rng = NamedStream(seed, "synthetic/points");
  Matrix means(n_classes, Vector(d));
  for (auto& m : means) {
    double norm = 0.0;
    for (double& v : m) {
      v = StandardNormal(means_rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : m) v *= separation / norm;
  }
  Dataset ds;
  ds.n_classes = n_classes;
  ds.features.assign(n, Vector(d));
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.labels[i] = i % n_classes;
    for (int k = 0; k < d; ++k) {
      ds.features[i][k] = means[ds.labels[i]][k] + StandardNormal(data_rng);
    }
  }
  return ds;
}

// Softmax regression. Parameters are laid out class-major: class c owns
// entries [c*(d+1), (c+1)*(d+1)), the last of which is the bias.
struct LinearModel {
  int n_classes = 2;
  int dims = 0;
  Vector params;

  LinearModel(int classes, int d)
      : n_classes(classes), dims(d), params(classes * (d + 1), 0.0) {}

  Vector Logits(std::span<const double> x) const {
    Vector z(n_classes);
    for (int c = 0; c < n_classes; ++c) {
      const double* w = &params[c * (dims + 1)];
      double s = w[dims];
      for (int k = 0; k < dims; ++k) s += w[k] * x[k];
      z[c] = s;
    }
    return z;
  }

  int Predict(std::span<const double> x) const {
    const Vector z = Logits(x);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
};

// Cross-entropy loss of one sample.
inline double SampleLoss(const LinearModel& model, std::span<const double> x,
                         int label) {
  const Vector z = model.Logits(x);
  return internal::LogSumExp(z) - z[label];
}

// Gradient of the sample loss: (softmax(z) - onehot(label)) outer [x, 1].
inline Vector ClientUpdate(const LinearModel& model, std::span<const double> x,
                           int label) {
  if (static_cast<int>(x.size()) != model.dims) {
    throw Error(ErrorKind::kInput, "sample dimension does not match model");
  }
  const Vector p = internal::Softmax(model.Logits(x));
  Vector g(model.params.size());
  for (int c = 0; c < model.n_classes; ++c) {
    const double r = p[c] - (c == label ? 1.0 : 0.0);
    double* gc = &g[c * (model.dims + 1)];
    for (int k = 0; k < model.dims; ++k) gc[k] = r * x[k];
    gc[model.dims] = r;
  }
  return g;
}

inline double Accuracy(const LinearModel& model, const Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (model.Predict(ds.features[i]) == ds.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

struct FlConfig {
  int rounds = 50;
  int cohort = 100;
  int client_samples = 1;
  int n_train = 600;
  int n_test = 600;
  int dims = 20;
  int n_classes = 2;
  double separation = 4.0;
  double lr = 0.5;
  double momentum = 0.5;
  // Extra factor on the server step for SignSGD, whose messages are +-1.
  double signsgd_server_lr = 0.01;
  DmeMechanism mechanism = DmeMechanism::kIdentity;
  ClipConfig clip{Norm::kL2, 1.0};
  double beta = 1.0;
  double noise = 1.0;  // eps for laplace, sigma for gaussian/signsgd
  std::optional<MechanismTable> table;
  std::optional<double> eps_prime;
  std::optional<double> fisher_m;
  AccountingMode mode = AccountingMode::kPure;
  std::optional<double> c_sens;  // defaults to beta for table mechanisms
  std::vector<double> alphas = DefaultAlphas();
  double delta = kDefaultDelta;
  std::uint64_t seed = 0;
};

struct RoundStat {
  int round = 0;
  double accuracy = 0.0;
  double spent_eps = 0.0;  // +inf when the mechanism is not private
};

struct TrainResult {
  std::vector<RoundStat> rounds;
  double final_accuracy = 0.0;
  Vector final_params;
  std::vector<double> per_round_cost;
  std::vector<double> composed;
  AccountingMode mode = AccountingMode::kPure;

  std::string ToCsv() const {
    std::ostringstream os;
    os.precision(17);
    os << "round,accuracy,eps\n";
    for (const auto& r : rounds) {
      os << r.round << ',' << r.accuracy << ',';
      if (std::isfinite(r.spent_eps)) {
        os << r.spent_eps;
      } else {
        os << "inf";
      }
      os << '\n';
    }
    return os.str();
  }
};

namespace internal {

inline bool UsesTable(DmeMechanism m) {
  return m == DmeMechanism::kImvu || m == DmeMechanism::kMvu;
}

// Empty ledger plus the per-round cost it will be charged, or nullopt for
// the non-private identity mechanism.
inline std::optional<std::pair<PrivacyLedger, std::vector<double>>>
PlanAccounting(const FlConfig& cfg) {
  const double c = cfg.c_sens.value_or(cfg.beta);
  switch (cfg.mechanism) {
    case DmeMechanism::kIdentity:
      return std::nullopt;
    case DmeMechanism::kLaplace:
      return std::make_pair(PrivacyLedger::Pure(cfg.delta),
                            std::vector<double>{LaplacePure(cfg.noise)});
    case DmeMechanism::kGaussian:
    case DmeMechanism::kSignSgd:
      return std::make_pair(PrivacyLedger::Rdp(cfg.alphas, cfg.delta),
                            GaussianRdp(cfg.noise, cfg.alphas));
    case DmeMechanism::kMvu:
      return std::make_pair(
          PrivacyLedger::Pure(cfg.delta),
          std::vector<double>{cfg.table->design_eps() * c});
    case DmeMechanism::kImvu:
      if ((cfg.mode == AccountingMode::kPure) != (cfg.clip.norm == Norm::kL1)) {
        throw Error(ErrorKind::kInput,
                    "pure accounting pairs with L1 clipping, rdp with L2");
      }
      if (cfg.mode == AccountingMode::kPure) {
        if (!cfg.eps_prime) {
          throw Error(ErrorKind::kState,
                      "pure accounting needs eps_prime for the mechanism");
        }
        const InterpolatedMechanism m(*cfg.table, cfg.beta, cfg.clip,
                                      cfg.eps_prime);
        return std::make_pair(PrivacyLedger::Pure(cfg.delta),
                              std::vector<double>{L1RoundEps(m, c)});
      }
      if (!cfg.fisher_m) {
        throw Error(ErrorKind::kState,
                    "rdp accounting needs fisher_m for the mechanism");
      }
      return std::make_pair(PrivacyLedger::Rdp(cfg.alphas, cfg.delta),
                            L2RoundRdp(*cfg.fisher_m, c, cfg.alphas));
  }
  return std::nullopt;
}

// k distinct indices from [0, n) by a partial Fisher-Yates shuffle.
inline std::vector<int> SampleCohort(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int span = n - i;
    int j = i + static_cast<int>(Uniform01(rng) * span);
    if (j >= n) j = n - 1;
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace internal

inline void ValidateFlConfig(const FlConfig& cfg) {
  if (cfg.rounds < 1 || cfg.cohort < 1 || cfg.dims < 1 || cfg.n_test < 1) {
    throw Error(ErrorKind::kInput, "rounds, cohort, dims, n_test must be >= 1");
  }
  if (cfg.client_samples != 1) {
    throw Error(ErrorKind::kInput,
                "client-level mode requires client_samples = 1");
  }
  if (cfg.cohort > cfg.n_train) {
    throw Error(ErrorKind::kInput, "cohort larger than the client population");
  }
  if (!(cfg.lr > 0.0) || !(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw Error(ErrorKind::kInput, "need lr > 0 and momentum in [0, 1)");
  }
  if (!(cfg.beta > 0.0) || !(cfg.clip.clip_c > 0.0)) {
    throw Error(ErrorKind::kInput, "beta and clip_c must be positive");
  }
  if (internal::UsesTable(cfg.mechanism) && !cfg.table) {
    throw Error(ErrorKind::kState, "mechanism table not loaded");
  }
}

// Runs T rounds of: sample cohort, per-client gradient -> message, server
// mean of decoded messages, momentum step, account.
inline TrainResult TrainFl(const FlConfig& cfg) {
  ValidateFlConfig(cfg);
  auto plan = internal::PlanAccounting(cfg);

  const Dataset all = GenerateSynthetic(cfg.n_train + cfg.n_test, cfg.dims,
                                        cfg.n_classes, cfg.separation, cfg.seed);
  Dataset train, test;
  train.n_classes = test.n_classes = cfg.n_classes;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Dataset& dst = static_cast<int>(i) < cfg.n_train ? train : test;
    dst.features.push_back(all.features[i]);
    dst.labels.push_back(all.labels[i]);
  }

  DmeConfig msg_cfg;
  msg_cfg.mechanism = cfg.mechanism;
  if (internal::UsesTable(cfg.mechanism)) {
    msg_cfg.mech.emplace(*cfg.table, cfg.beta, cfg.clip);
  }
  msg_cfg.baseline.clip = cfg.clip;
  msg_cfg.baseline.noise = cfg.noise;
  if (cfg.mechanism == DmeMechanism::kLaplace) {
    msg_cfg.baseline.kind = BaselineKind::kLaplace;
  } else if (cfg.mechanism == DmeMechanism::kSignSgd) {
    msg_cfg.baseline.kind = BaselineKind::kSignSgd;
  } else {
    msg_cfg.baseline.kind = BaselineKind::kGaussian;
  }
  if (cfg.mechanism == DmeMechanism::kLaplace ||
      cfg.mechanism == DmeMechanism::kGaussian ||
      cfg.mechanism == DmeMechanism::kSignSgd) {
    msg_cfg.baseline.Validate();
  }

  LinearModel model(cfg.n_classes, cfg.dims);
  Vector velocity(model.params.size(), 0.0);
  Rng cohort_rng = NamedStream(cfg.seed, "fl/cohort");
  Rng noise_rng = NamedStream(cfg.seed, "fl/noise");
  const double server_scale =
      cfg.mechanism == DmeMechanism::kSignSgd ? cfg.signsgd_server_lr : 1.0;

  TrainResult result;
  result.mode = plan ? plan->first.mode() : AccountingMode::kPure;
  if (plan) result.per_round_cost = plan->second;
  for (int t = 1; t <= cfg.rounds; ++t) {
    const std::vector<int> cohort =
        internal::SampleCohort(cfg.n_train, cfg.cohort, cohort_rng);
    const std::uint64_t round_key = noise_rng();
    Vector sum(model.params.size(), 0.0);
    for (std::size_t c = 0; c < cohort.size(); ++c) {
      const int i = cohort[c];
      const Vector g = ClientUpdate(model, train.features[i], train.labels[i]);
      Rng client_rng = Substream(round_key, c);
      const Vector msg = internal::DmeMessage(g, msg_cfg, client_rng);
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += msg[k];
    }
    const double inv = 1.0 / static_cast<double>(cohort.size());
    for (std::size_t k = 0; k < sum.size(); ++k) {
      velocity[k] = cfg.momentum * velocity[k] + server_scale * sum[k] * inv;
      model.params[k] -= cfg.lr * velocity[k];
    }

    RoundStat stat;
    stat.round = t;
    stat.accuracy = Accuracy(model, test);
    if (plan) {
      if (plan->first.mode() == AccountingMode::kPure) {
        plan->first.AddPureRound(plan->second[0]);
      } else {
        plan->first.AddRdpRound(plan->second);
      }
      stat.spent_eps = plan->first.SpentEps().eps;
    } else {
      stat.spent_eps = std::numeric_limits<double>::infinity();
    }
    result.rounds.push_back(stat);
  }
  result.final_accuracy = result.rounds.back().accuracy;
  result.final_params = model.params;
  if (plan) result.composed = plan->first.Compose();
  return result;
}

}  // namespace imvu
