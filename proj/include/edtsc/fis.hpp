#pragma once

#include <array>
#include <string>
#include <vector>

#include "edtsc/config.hpp"

namespace edtsc {

// One triangular membership function. End sets are shouldered: a left
// shoulder holds membership 1 left of the peak, a right shoulder right of it.
struct TriSet {
  std::string name;
  double left = 0.0, peak = 0.0, right = 0.0;
  bool shoulder_left = false, shoulder_right = false;

  double membership(double x) const;
  // Clipped membership (min with height h) expressed as the local line
  // value + slope at x, for exact piecewise-linear integration.
  void clipped_line(double x, double h, double& value, double& slope) const;
};

struct FuzzyVariable {
  std::string name;
  double lo = -1.0, hi = 1.0;
  std::vector<TriSet> sets;

  // Builds evenly shaped triangles from an increasing peak list; first/last
  // are shouldered at the universe bounds.
  static FuzzyVariable from_peaks(const std::string& name,
                                  const std::vector<double>& peaks);
  std::vector<double> fuzzify(double x) const;
};

struct FISOutput {
  double v_corr_l = 0.0;  // normalized corrective voltage factor, left
  double v_corr_r = 0.0;  // right
};

// 5x5 rule table per output: [slip set][yaw-error set] -> output set index.
struct RuleBase {
  std::array<std::array<int, 5>, 5> left{};
  std::array<std::array<int, 5>, 5> right{};
};

// Mamdani engine: min implication, max aggregation, exact closed-form
// centroid defuzzification over the piecewise-linear aggregate.
class FuzzySystem {
 public:
  FuzzySystem();  // default variables and rule base
  FuzzySystem(FuzzyVariable slip, FuzzyVariable yaw_err, FuzzyVariable out,
              RuleBase rules);

  // Inputs are normalized (slip in [0,1], yaw error in [-1,1]) and clamped.
  FISOutput infer(double lambda_norm, double gamma_err_norm) const;

  // Exact centroid of the aggregate formed by clipping output set k at
  // heights[k] and taking the pointwise max. Exposed for oracle testing.
  double aggregate_centroid(const std::vector<double>& heights) const;

  const FuzzyVariable& slip_var() const { return slip_; }
  const FuzzyVariable& err_var() const { return err_; }
  const FuzzyVariable& out_var() const { return out_; }
  const RuleBase& rules() const { return rules_; }

  static RuleBase default_rules();
  static int output_label_index(const std::string& label);

 private:
  FuzzyVariable slip_, err_, out_;
  RuleBase rules_;
};

struct FisParams {
  double norm_slip = 0.2;     // slip ratio mapped to [0,1] by this scale
  double norm_yaw_err = 1.0;  // yaw-rate error mapped to [-1,1] [rad/s]
};

FuzzySystem fuzzy_system_from(const Config& cfg);
FisParams fis_params_from(const Config& cfg);

}  // namespace edtsc
