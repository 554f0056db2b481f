#pragma once

// GA configuration and the scalarized multi-objective fitness.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lforge/chem/descriptors.hpp"
#include "lforge/chem/fingerprint.hpp"
#include "lforge/core/error.hpp"

namespace lforge::evolve {

struct Weights {
  double w_p = 0.45;
  double w_f = 0.35;
  double w_n = 0.15;
  double w_s = 0.2;
  double lambda_sa = 0.1;
};

struct GAConfig {
  int population = 40;
  int generations = 20;
  int hotspot_k = 4;
  Weights weights;
  double p_crossover = 0.7;
  double p_mutation = 0.3;
  double p_reaction_first = 0.8;
  std::uint64_t seed = 42;
  int top_k_report = 10;
  int tournament_size = 3;
  int max_heavy_atoms = 50;
  int refill_rounds = 3;
  int fingerprint_bits = 2048;
  int fingerprint_radius = 2;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const {
    const auto& w = weights;
    if (w.w_p < 0 || w.w_f < 0 || w.w_n < 0 || w.w_s < 0 || w.lambda_sa < 0) throw ValidationError("weights must be >= 0");
    for (double p : {p_crossover, p_mutation, p_reaction_first})
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probabilities must lie in [0, 1]");
    if (p_crossover + p_mutation > 1.0 + 1e-12) throw ValidationError("p_crossover + p_mutation must not exceed 1");
    if (population < 2) throw ValidationError("population must be >= 2");
    if (generations < 0) throw ValidationError("generations must be >= 0");
    if (hotspot_k < 1) throw ValidationError("hotspot_k must be >= 1");
    if (top_k_report < 1) throw ValidationError("top_k_report must be >= 1");
    if (tournament_size < 1) throw ValidationError("tournament_size must be >= 1");
    if (max_heavy_atoms < 1) throw ValidationError("max_heavy_atoms must be >= 1");
    if (fingerprint_bits < 64 || (fingerprint_bits & (fingerprint_bits - 1)) != 0)
      throw ValidationError("fingerprint_bits must be a power of two >= 64");
  }
};

inline nlohmann::json to_json(const GAConfig& c) {
  return {{"population", c.population},
          {"generations", c.generations},
          {"hotspot_k", c.hotspot_k},
          {"w_p", c.weights.w_p},
          {"w_f", c.weights.w_f},
          {"w_n", c.weights.w_n},
          {"w_s", c.weights.w_s},
          {"lambda_sa", c.weights.lambda_sa},
          {"p_crossover", c.p_crossover},
          {"p_mutation", c.p_mutation},
          {"p_reaction_first", c.p_reaction_first},
          {"seed", c.seed},
          {"top_k_report", c.top_k_report},
          {"tournament_size", c.tournament_size},
          {"max_heavy_atoms", c.max_heavy_atoms},
          {"refill_rounds", c.refill_rounds},
          {"fingerprint_bits", c.fingerprint_bits},
          {"fingerprint_radius", c.fingerprint_radius}};
}

// Trapezoid desirability: 0 outside [lo, hi], 1 on [ideal_lo, ideal_hi], linear between.
inline double trapezoid(double x, double lo, double ideal_lo, double ideal_hi, double hi) {
  if (x < lo || x > hi) return 0.0;
  if (x < ideal_lo) return ideal_lo > lo ? (x - lo) / (ideal_lo - lo) : 1.0;
  if (x > ideal_hi) return hi > ideal_hi ? (hi - x) / (hi - ideal_hi) : 1.0;
  return 1.0;
}

inline double logp_desirability(double logp) { return trapezoid(logp, -0.4, 1.0, 3.0, 5.6); }
inline double mw_desirability(double mw) { return trapezoid(mw, 150.0, 250.0, 450.0, 600.0); }
inline double rotb_desirability(int rotb) { return trapezoid(rotb, 0.0, 0.0, 7.0, 12.0); }

inline double proxy_score(const chem::DescriptorRecord& d, double qed) {
  const double s = 0.4 * qed + 0.2 * logp_desirability(d.logp) + 0.2 * mw_desirability(d.mw) +
                   0.2 * rotb_desirability(d.rot_bonds);
  return std::clamp(s, 0.0, 1.0);
}

inline double novelty(const chem::Fingerprint& fp, const std::vector<chem::Fingerprint>& refs) {
  double best = 0.0;
  for (const auto& r : refs) best = std::max(best, chem::tanimoto(fp, r));
  return refs.empty() ? 1.0 : 1.0 - best;
}

struct FitnessBreakdown {
  double s_proxy = 0.0;
  double s_fit = 0.0;
  double s_novelty = 0.0;
  double s_strain = 0.0;
  double p_sa = 0.0;
  double total = 0.0;
};

inline double combine(const FitnessBreakdown& f, const Weights& w) {
  return w.w_p * f.s_proxy + w.w_f * f.s_fit + w.w_n * f.s_novelty - w.w_s * f.s_strain - w.lambda_sa * f.p_sa;
}

}  // namespace lforge::evolve
