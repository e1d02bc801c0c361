// Copyright 2026 The mmil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmil/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmil {

std::string ToString(SolverMode mode) {
  return mode == SolverMode::kPrimal ? "primal" : "dual";
}

SolverMode ParseSolverMode(const std::string& name) {
  if (name == "primal") return SolverMode::kPrimal;
  if (name == "dual") return SolverMode::kDual;
  throw std::invalid_argument("unknown solver mode: " + name);
}

void SolverConfig::Validate() const {
  if (!(target_delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (max_outer_iters < 1) throw std::invalid_argument("N must be >= 1");
  if (!(pmd_rate > 0.0)) throw std::invalid_argument("pmd_rate must be > 0");
  if (std::isnan(alpha) || std::isnan(hedge_rate)) {
    throw std::invalid_argument("rates must be numbers");
  }
}

double DefaultAlpha(const GameSpec& game, double delta) {
  double logs = std::log(static_cast<double>(game.mdp.n_actions)) +
                std::log(static_cast<double>(game.mdp.n_states));
  double scaled = delta * game.payoff_scale_k;
  if (scaled <= 0.0) scaled = delta;
  if (logs <= 0.0) return scaled;
  return scaled / (2.0 * game.mdp.horizon * logs);
}

double QmOf(const GameSpec& game) {
  return 2.0 * game.function_class.range_bound;
}

SoftSolution SoftValueIteration(const TabularMdp& mdp, const TimedTable& cost,
                                double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;
  if (cost.horizon != T || cost.n_states != S || cost.n_actions != A) {
    throw std::invalid_argument("cost shape does not match mdp");
  }
  SoftSolution out{TimedPolicy(TimedTable(T, S, A, 0.0)),
                   TimedTable(T, S, A, 0.0), TimedStateTable(T, S, 0.0)};
  std::vector<double> z(A);
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double m = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double q = -cost(t, s, a);
        if (t + 1 < T) {
          for (int sp = 0; sp < S; ++sp) q += mdp.P(s, a, sp) * out.v(t + 1, sp);
        }
        out.q(t, s, a) = q;
        m = std::max(m, q);
      }
      double total = 0.0;
      for (int a = 0; a < A; ++a) {
        z[a] = std::exp((out.q(t, s, a) - m) / alpha);
        total += z[a];
      }
      out.v(t, s) = m + alpha * std::log(total);
      for (int a = 0; a < A; ++a) out.policy(t, s, a) = z[a] / total;
    }
  }
  return out;
}

SoftSolution SoftValueIteration(const TabularMdp& mdp,
                                const StateActionTable& cost, double alpha) {
  return SoftValueIteration(mdp, TimedTable::Broadcast(cost, mdp.horizon),
                            alpha);
}

double GameEntropy(const GameSpec& game, const TimedPolicy& policy) {
  if (game.payoff_kind != PayoffKind::kU2OffQ) {
    return CausalEntropy(game.mdp, policy);
  }
  TimedStateTable rho = Occupancy(game.mdp, game.expert).StateMarginal();
  double h = 0.0;
  for (int t = 0; t < game.mdp.horizon; ++t) {
    for (int s = 0; s < game.mdp.n_states; ++s) {
      if (rho(t, s) == 0.0) continue;
      double hs = 0.0;
      for (int a = 0; a < game.mdp.n_actions; ++a) {
        double p = policy(t, s, a);
        if (p > 0.0) hs -= p * std::log(p);
      }
      h += rho(t, s) * hs;
    }
  }
  return h;
}

namespace {

// Regularised best response; the mixed game shares the reward game's form.
TimedPolicy SoftResponse(const GameSpec& game, const TimedTable& f,
                         double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  const TabularMdp& mdp = game.mdp;
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;
  const double temperature = alpha * T;
  switch (game.payoff_kind) {
    case PayoffKind::kU1Reward:
    case PayoffKind::kU4Mixed:
      return SoftValueIteration(mdp, f, temperature).policy;
    case PayoffKind::kU3OnQ: {
      TimedTable g = f;
      for (int t = 0; t < T; ++t) {
        for (int s = 0; s < S; ++s) {
          double mean = 0.0;
          for (int a = 0; a < A; ++a) mean += game.expert(t, s, a) * f(t, s, a);
          for (int a = 0; a < A; ++a) g(t, s, a) = f(t, s, a) - mean;
        }
      }
      return SoftValueIteration(mdp, g, temperature).policy;
    }
    case PayoffKind::kU2OffQ: {
      TimedStateTable rho = Occupancy(mdp, game.expert).StateMarginal();
      TimedPolicy pi = TimedPolicy::Uniform(T, S, A);
      for (int t = 0; t < T; ++t) {
        for (int s = 0; s < S; ++s) {
          if (rho(t, s) <= 0.0) continue;
          double m = std::numeric_limits<double>::infinity();
          for (int a = 0; a < A; ++a) m = std::min(m, f(t, s, a));
          double total = 0.0;
          for (int a = 0; a < A; ++a) {
            pi(t, s, a) = std::exp(-(f(t, s, a) - m) / temperature);
            total += pi(t, s, a);
          }
          for (int a = 0; a < A; ++a) pi(t, s, a) /= total;
        }
      }
      return pi;
    }
  }
  throw std::invalid_argument("unknown payoff kind");
}

double PayoffOfTable(const GameSpec& game, const TimedPolicy& policy,
                     const TimedTable& f) {
  return RawPayoff(game.payoff_kind, game.mdp, game.expert, policy, f);
}

double SupPayoff(const GameSpec& game, const TimedPolicy& policy) {
  return BestResponseDiscriminator(game, policy).sup_payoff;
}

void Normalize(std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
}

}  // namespace

TimedPolicy BestResponsePolicy(const GameSpec& game, const TimedTable& f,
                               double alpha) {
  if (game.payoff_kind == PayoffKind::kU4Mixed) {
    throw std::invalid_argument(
        "best_response_policy: the mixed payoff is evaluation-only");
  }
  return SoftResponse(game, f, alpha);
}

TimedPolicy BestResponsePolicy(const GameSpec& game, const Discriminator& disc,
                               double alpha) {
  disc.Validate(game.function_class);
  return BestResponsePolicy(game, game.function_class.Combine(disc.weights),
                            alpha);
}

double RegularizedObjective(const GameSpec& game, const TimedPolicy& policy,
                            double alpha) {
  return SupPayoff(game, policy) - alpha * GameEntropy(game, policy);
}

EquilibriumResult SolvePrimal(const GameSpec& game, const SolverConfig& config) {
  config.Validate();
  if (config.mode != SolverMode::kPrimal) {
    throw std::invalid_argument("solve_primal requires primal mode");
  }
  const TabularMdp& mdp = game.mdp;
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;
  const FunctionClass& cls = game.function_class;
  EquilibriumResult result;
  result.threshold = config.target_delta * game.payoff_scale_k;
  result.alpha = config.alpha > 0.0 ? config.alpha
                                    : DefaultAlpha(game, config.target_delta);
  result.q_m = QmOf(game);
  result.delta_prime = config.target_delta * config.target_delta *
                       result.alpha / (32.0 * result.q_m * result.q_m);

  TimedPolicy pi = TimedPolicy::Uniform(T, S, A);
  TimedPolicy best_pi = pi;
  double best = std::numeric_limits<double>::infinity();
  double payoff_sum = 0.0;
  std::vector<double> f_sum(cls.NumVertices(), 0.0);
  for (int it = 1; it <= config.max_outer_iters; ++it) {
    BestResponse br = BestResponseDiscriminator(game, pi);
    payoff_sum += br.sup_payoff;
    f_sum[br.vertex] += 1.0;
    if (br.sup_payoff < best) {
      best = br.sup_payoff;
      best_pi = pi;
    }
    std::vector<double> fbar = f_sum;
    for (double& x : fbar) x /= it;
    TimedPolicy hindsight = SoftResponse(game, cls.Combine(fbar), kInfAlpha);
    double hindsight_value = PayoffOfTable(game, hindsight, cls.Combine(fbar));
    TraceRecord rec{it, br.sup_payoff, best, CausalEntropy(mdp, pi),
                    payoff_sum / it - hindsight_value};
    result.trace.push_back(rec);
    result.iterations = it;
    if (config.stop_when_certified && best <= result.threshold) break;

    // Entropic mirror step on every (t, s) simplex.
    TimedTable f = cls.Vertex(br.vertex);
    TimedTable grad;
    if (game.payoff_kind == PayoffKind::kU2OffQ) {
      grad = f;
    } else {
      TimedTable g = f;
      if (game.payoff_kind == PayoffKind::kU3OnQ) {
        for (int t = 0; t < T; ++t) {
          for (int s = 0; s < S; ++s) {
            double mean = 0.0;
            for (int a = 0; a < A; ++a) mean += game.expert(t, s, a) * f(t, s, a);
            for (int a = 0; a < A; ++a) g(t, s, a) = f(t, s, a) - mean;
          }
        }
      }
      grad = QValues(mdp, pi, g).q;
    }
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        double m = std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) m = std::min(m, grad(t, s, a));
        double total = 0.0;
        for (int a = 0; a < A; ++a) {
          double p = pi(t, s, a) * std::exp(-config.pmd_rate * (grad(t, s, a) - m));
          pi(t, s, a) = p;
          total += p;
        }
        for (int a = 0; a < A; ++a) pi(t, s, a) /= total;
      }
    }
  }
  result.policy = best_pi;
  BestResponse final_br = BestResponseDiscriminator(game, best_pi);
  result.discriminator = final_br.discriminator;
  result.certified_sup = final_br.sup_payoff;
  result.certified = result.certified_sup <= result.threshold;
  return result;
}

EquilibriumResult SolveDual(const GameSpec& game, const SolverConfig& config) {
  config.Validate();
  if (config.mode != SolverMode::kDual) {
    throw std::invalid_argument("solve_dual requires dual mode");
  }
  if (game.payoff_kind == PayoffKind::kU4Mixed) {
    throw std::invalid_argument("solve_dual: the mixed payoff is evaluation-only");
  }
  const FunctionClass& cls = game.function_class;
  const int n = cls.NumVertices();
  const int N = config.max_outer_iters;
  EquilibriumResult result;
  result.threshold = config.target_delta * game.payoff_scale_k;
  result.alpha = config.alpha > 0.0 ? config.alpha
                                    : DefaultAlpha(game, config.target_delta);
  result.q_m = QmOf(game);
  result.delta_prime = config.target_delta * config.target_delta *
                       result.alpha / (32.0 * result.q_m * result.q_m);
  const double eta = config.hedge_rate > 0.0
                         ? config.hedge_rate
                         : std::sqrt(8.0 * std::log(static_cast<double>(n)) / N);
  result.hedge_rate = eta;
  const double k = game.payoff_scale_k;
  const double range = k > 0.0 ? 2.0 * k : 1.0;

  std::vector<double> log_w(n, 0.0), w(n, 1.0 / n), w_sum(n, 0.0),
      gain_sum(n, 0.0);
  double realized = 0.0;
  double best = std::numeric_limits<double>::infinity();
  TimedPolicy best_pi;
  std::vector<double> best_fbar;
  int t = 0;
  for (t = 1; t <= N; ++t) {
    TimedPolicy pi = SoftResponse(game, cls.Combine(w), result.alpha);
    std::vector<double> gains = VertexPayoffs(game, pi);
    double payoff = 0.0;
    for (int i = 0; i < n; ++i) {
      payoff += w[i] * gains[i];
      gain_sum[i] += gains[i];
      w_sum[i] += w[i];
    }
    realized += payoff;
    double lmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      log_w[i] += eta * (gains[i] + k) / range;
      lmax = std::max(lmax, log_w[i]);
    }
    for (int i = 0; i < n; ++i) w[i] = std::exp(log_w[i] - lmax);
    Normalize(w);

    std::vector<double> fbar = w_sum;
    Normalize(fbar);
    TimedPolicy pihat = SoftResponse(game, cls.Combine(fbar), result.alpha);
    double sup = SupPayoff(game, pihat);
    double best_gain = *std::max_element(gain_sum.begin(), gain_sum.end());
    result.trace.push_back(TraceRecord{t, payoff, sup,
                                       CausalEntropy(game.mdp, pi),
                                       (best_gain - realized) / t});
    if (sup < best) {
      best = sup;
      best_pi = pihat;
      best_fbar = fbar;
    }
    result.iterations = t;
    if (config.stop_when_certified && best <= result.threshold) break;
  }
  const int used = result.iterations;
  double best_gain = *std::max_element(gain_sum.begin(), gain_sum.end());
  result.f_regret_avg = (best_gain - realized) / used;
  result.hedge_bound =
      n > 1 ? range * (std::log(static_cast<double>(n)) / (eta * used) +
                       eta / 8.0)
            : 0.0;
  result.policy = best_pi;
  result.discriminator = Discriminator{cls.id, best_fbar};
  result.certified_sup = SupPayoff(game, best_pi);
  result.certified = result.certified_sup <= result.threshold;
  return result;
}

EquilibriumResult Solve(const GameSpec& game, const SolverConfig& config) {
  return config.mode == SolverMode::kPrimal ? SolvePrimal(game, config)
                                            : SolveDual(game, config);
}

EquilibriumCertificate CheckEquilibrium(const GameSpec& game,
                                        const TimedPolicy& policy,
                                        const Discriminator& disc,
                                        double delta) {
  disc.Validate(game.function_class);
  EquilibriumCertificate cert;
  TimedTable f = game.function_class.Combine(disc.weights);
  cert.sup_payoff = SupPayoff(game, policy);
  cert.payoff = PayoffOfTable(game, policy, f);
  TimedPolicy inf_pi = SoftResponse(game, f, kInfAlpha);
  cert.inf_payoff = std::min(PayoffOfTable(game, inf_pi, f), cert.payoff);
  cert.policy_side_slack = cert.payoff - (cert.sup_payoff - delta / 2.0);
  cert.discriminator_side_slack = cert.inf_payoff + delta / 2.0 - cert.payoff;
  cert.holds = cert.policy_side_slack >= -1e-9 &&
               cert.discriminator_side_slack >= -1e-9;
  return cert;
}

GridSearchResult GridSearchRegularized(const GameSpec& game, double alpha,
                                       int resolution, long long budget) {
  if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
  const TabularMdp& mdp = game.mdp;
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;
  const FunctionClass& cls = game.function_class;

  // Compositions of `resolution` into A parts, i.e. the grid on one simplex.
  std::vector<std::vector<int>> simplex;
  std::vector<int> part(A, 0);
  auto build = [&](auto&& self, int idx, int left) -> void {
    if (idx == A - 1) {
      part[idx] = left;
      simplex.push_back(part);
      return;
    }
    for (int x = left; x >= 0; --x) {
      part[idx] = x;
      self(self, idx + 1, left - x);
    }
  };
  build(build, 0, resolution);

  TimedPolicy pi = TimedPolicy::Uniform(T, S, A);
  std::vector<std::pair<int, int>> free_cells;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      bool same = true;
      for (int a = 1; a < A && same; ++a) {
        for (const TimedTable& f : cls.basis) {
          if (f(t, s, a) != f(t, s, 0)) { same = false; break; }
        }
        if (same && t + 1 < T) {
          for (int sp = 0; sp < S; ++sp) {
            if (mdp.P(s, a, sp) != mdp.P(s, 0, sp)) { same = false; break; }
          }
        }
      }
      if (!same) free_cells.emplace_back(t, s);
    }
  }
  long long points = 1;
  for (std::size_t i = 0; i < free_cells.size(); ++i) {
    points *= static_cast<long long>(simplex.size());
    if (points > budget) {
      throw ResourceLimitError("grid search exceeds budget of " +
                               std::to_string(budget) + " points");
    }
  }
  GridSearchResult result;
  result.points = points;
  result.free_cells = static_cast<int>(free_cells.size());
  result.objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> odometer(free_cells.size(), 0);
  for (long long p = 0; p < points; ++p) {
    for (std::size_t c = 0; c < free_cells.size(); ++c) {
      auto [t, s] = free_cells[c];
      for (int a = 0; a < A; ++a) {
        pi(t, s, a) = static_cast<double>(simplex[odometer[c]][a]) / resolution;
      }
    }
    double obj = RegularizedObjective(game, pi, alpha);
    if (obj < result.objective) {
      result.objective = obj;
      result.policy = pi;
    }
    for (std::size_t c = 0; c < odometer.size(); ++c) {
      if (++odometer[c] < simplex.size()) break;
      odometer[c] = 0;
    }
  }
  return result;
}

EntropyLemmaReport EntropyLemmaCheck(const GameSpec& game, double alpha,
                                     double delta_prime, int resolution) {
  if (game.mdp.n_states > 3 || game.mdp.n_actions > 2 || game.mdp.horizon > 3) {
    throw std::invalid_argument(
        "entropy lemma check needs |S| <= 3, |A| <= 2, T <= 3");
  }
  if (!(alpha > 0.0) || delta_prime < 0.0) {
    throw std::invalid_argument("alpha must be > 0 and delta' >= 0");
  }
  EntropyLemmaReport rep;
  rep.alpha = alpha;
  rep.delta_prime = delta_prime;
  rep.q_m = QmOf(game);
  GridSearchResult grid = GridSearchRegularized(game, alpha, resolution);
  rep.grid_points = grid.points;

  TimedPolicy pihat = grid.policy;
  if (delta_prime > 0.0) {
    // Hedge on the regularised game until the duality gap of pi-hat, namely
    // sup_f U(pi-hat, f) - U(pi-hat, f-bar), drops to delta'.
    const FunctionClass& cls = game.function_class;
    const int n = cls.NumVertices();
    const int max_iters = 200000;
    const double k = game.payoff_scale_k > 0.0 ? game.payoff_scale_k : 1.0;
    const double eta = std::sqrt(8.0 * std::log(std::max(2, n)) / 20000.0);
    std::vector<double> log_w(n, 0.0), w(n, 1.0 / n), w_sum(n, 0.0);
    rep.achieved_gap = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= max_iters; ++t) {
      TimedPolicy pi = SoftResponse(game, cls.Combine(w), alpha);
      std::vector<double> gains = VertexPayoffs(game, pi);
      double lmax = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        w_sum[i] += w[i];
        log_w[i] += eta * (gains[i] + k) / (2.0 * k);
        lmax = std::max(lmax, log_w[i]);
      }
      for (int i = 0; i < n; ++i) w[i] = std::exp(log_w[i] - lmax);
      Normalize(w);
      std::vector<double> fbar = w_sum;
      Normalize(fbar);
      TimedTable f = cls.Combine(fbar);
      TimedPolicy candidate = SoftResponse(game, f, alpha);
      double gap = SupPayoff(game, candidate) - PayoffOfTable(game, candidate, f);
      rep.dual_iters = t;
      if (gap < rep.achieved_gap) {
        rep.achieved_gap = gap;
        pihat = candidate;
      }
      if (rep.achieved_gap <= delta_prime) break;
    }
  } else {
    rep.achieved_gap = 0.0;
  }
  const double logs = std::log(static_cast<double>(game.mdp.n_actions)) +
                      std::log(static_cast<double>(game.mdp.n_states));
  rep.l1_distance = ConditionalL1(grid.policy, pihat);
  rep.l1_bound = std::sqrt(2.0 * delta_prime / alpha);
  rep.sup_payoff = SupPayoff(game, pihat);
  rep.sup_bound = rep.q_m * std::sqrt(2.0 * delta_prime / alpha) +
                  alpha * game.mdp.horizon * logs;
  rep.l1_ok = rep.l1_distance <= rep.l1_bound;
  rep.sup_ok = rep.sup_payoff <= rep.sup_bound;
  return rep;
}

}  // namespace mmil
