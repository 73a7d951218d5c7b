#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "motdual/mot.hpp"

namespace motdual {

// A jump history under the measure shifted to start at 1: the alphabet
// index of each gap and each sign, oldest first.
struct LiftHistory {
  std::vector<int> gaps;
  std::vector<int> signs;

  std::size_t depth() const { return gaps.size(); }
  auto operator<=>(const LiftHistory&) const = default;
};

std::string to_string(const LiftHistory& history);

struct ConditionalTables {
  int N = 1;
  int m = 0;
  // t_1 = T > t_2 > ... > t_L: T stands for "no further jump".
  std::vector<double> alphabet;

  struct Entry {
    double mass = 0.0;
    // psi[l] = P(next gap >= alphabet[l] | history), l = 0..L-1; a stop
    // counts as gap T.
    std::vector<double> psi;
    // phi[l] = P(up | history, next gap = alphabet[l]); 0 where uncharged.
    std::vector<double> phi;
  };
  std::map<LiftHistory, Entry> entries;  // charged histories of depth < m

  const Entry* find(const LiftHistory& h) const;
  int alphabet_index(double gap) const;  // -1 if absent
};

ConditionalTables extract_conditionals(const PathTree& tree, const TreeMeasure& q);

struct ThresholdTables {
  int N = 1;
  int m = 0;
  std::vector<double> alphabet;
  struct Entry {
    // theta[l]: threshold for the Brownian increment over
    // (t_{l+1}, t_l] (t_{L+1} = 0) with variance t_l - t_{l+1}.
    std::vector<double> theta;
    // gamma[l]: sign threshold for gap t_l, sqrt(t_l) * quantile(phi).
    std::vector<double> gamma;
  };
  std::map<LiftHistory, Entry> entries;
};

ThresholdTables compute_thresholds(const ConditionalTables& tables);

struct LiftSample {
  LiftHistory history;  // jumps taken, at most m
  bool tail = false;    // the scan fell off the finite alphabet
  bool uncharged = false;  // reached a history without thresholds
};

struct LiftRun {
  std::vector<LiftSample> samples;
  std::size_t tail_count = 0;
  std::size_t uncharged_count = 0;
};

// Gaps via the fine-to-coarse threshold scan on independent Gaussian
// increments; signs Y = +1 iff an independent N(0, gap) draw is below gamma.
// Sample i uses Rng(seed, i).
LiftRun simulate_lift(const ThresholdTables& thresholds, std::size_t n_samples, std::uint64_t seed);

// Oracle: outcomes drawn directly from the tree law.
LiftRun sample_tree_direct(const ConditionalTables& tables, std::size_t n_samples,
                           std::uint64_t seed);

// Exact law of the shifted measure over complete outcomes.
std::map<LiftHistory, double> outcome_law(const ConditionalTables& tables);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t cells = 0;
  std::size_t pooled_cells = 0;
  std::size_t unexpected = 0;  // observations outside the support
};

ChiSquareResult chi_square_gof(const std::vector<LiftSample>& samples,
                               const std::map<LiftHistory, double>& law);

struct ZIdentityCheck {
  double max_error = 0.0;
  bool ok = false;
};

// Z_{sigma_k} = 1 + (1/N) E[sum_i Y_i | first k outcomes] evaluated from the
// tables, compared with 1 + (1/N) sum_{i <= k} Y_i for every sample and k.
ZIdentityCheck check_z_identity(const ConditionalTables& tables, const std::vector<LiftSample>& samples);

struct IdentityReport {
  ChiSquareResult chi_square;
  ZIdentityCheck z_identity;
  double terminal_prokhorov = 0.0;
  double prokhorov_band = 0.0;  // sqrt((k ln 2 + ln(1 / alpha)) / (2 n)), alpha = 1e-3
  std::size_t samples = 0;
};

IdentityReport verify_identity(const LiftRun& run, const ConditionalTables& tables);

// Copy of `tables` with phi at (history, gap l) moved by `shift`, clamped
// to [0, 1].
ConditionalTables perturb_phi(const ConditionalTables& tables, const LiftHistory& history, int l,
                              double shift);

}  // namespace motdual
