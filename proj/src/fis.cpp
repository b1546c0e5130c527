#include "edtsc/fis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edtsc/math_util.hpp"

namespace edtsc {

double TriSet::membership(double x) const {
  if (shoulder_left && x <= peak) return 1.0;
  if (shoulder_right && x >= peak) return 1.0;
  if (x <= left || x >= right) return x == peak ? 1.0 : 0.0;
  if (x <= peak) return (x - left) / (peak - left);
  return (right - x) / (right - peak);
}

void TriSet::clipped_line(double x, double h, double& value, double& slope) const {
  double m, s;
  if (shoulder_left && x <= peak) {
    m = 1.0;
    s = 0.0;
  } else if (shoulder_right && x >= peak) {
    m = 1.0;
    s = 0.0;
  } else if (x <= left || x >= right) {
    m = 0.0;
    s = 0.0;
  } else if (x <= peak) {
    s = 1.0 / (peak - left);
    m = (x - left) * s;
  } else {
    s = -1.0 / (right - peak);
    m = (right - x) * (-s);
  }
  if (m >= h) {
    value = h;
    slope = 0.0;
  } else {
    value = m;
    slope = s;
  }
}

FuzzyVariable FuzzyVariable::from_peaks(const std::string& name,
                                        const std::vector<double>& peaks) {
  if (peaks.size() < 2)
    throw ConfigError("fuzzy variable '" + name + "': need at least two peaks");
  for (std::size_t i = 1; i < peaks.size(); ++i)
    if (peaks[i] <= peaks[i - 1])
      throw ConfigError("fuzzy variable '" + name + "': peaks must increase");
  FuzzyVariable v;
  v.name = name;
  v.lo = peaks.front();
  v.hi = peaks.back();
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    TriSet s;
    s.peak = peaks[i];
    s.left = i == 0 ? peaks.front() : peaks[i - 1];
    s.right = i + 1 == peaks.size() ? peaks.back() : peaks[i + 1];
    s.shoulder_left = (i == 0);
    s.shoulder_right = (i + 1 == peaks.size());
    v.sets.push_back(s);
  }
  return v;
}

std::vector<double> FuzzyVariable::fuzzify(double x) const {
  const double xc = clamp(x, lo, hi);
  std::vector<double> out(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i] = sets[i].membership(xc);
  return out;
}

namespace {

constexpr const char* kSlipNames[5] = {"VS", "S", "M", "L", "VL"};
constexpr const char* kErrNames[5] = {"NL", "NS", "Z", "PS", "PL"};

struct Piece {
  double x0, x1;  // validity range
  double a, b;    // y = a*x + b
  int set;        // owning output set
};

}  // namespace

int FuzzySystem::output_label_index(const std::string& label) {
  for (int i = 0; i < 5; ++i)
    if (label == kErrNames[i]) return i;
  if (label == "N") return 1;  // shorthand for NS
  throw ConfigError("unknown fuzzy output label '" + label + "'");
}

RuleBase FuzzySystem::default_rules() {
  const char* left[5][5] = {
      {"PL", "PL", "Z", "NL", "NL"},
      {"PL", "PS", "NS", "NS", "NL"},
      {"PS", "Z", "NS", "NL", "NL"},
      {"PS", "Z", "NL", "NS", "NL"},
      {"Z", "Z", "NL", "NL", "NL"},
  };
  const char* right[5][5] = {
      {"NL", "NL", "Z", "PL", "PL"},
      {"NL", "NS", "NS", "PS", "PL"},
      {"NL", "NL", "NS", "Z", "PS"},
      {"NL", "NS", "NL", "Z", "PS"},
      {"NL", "NL", "NL", "Z", "Z"},
  };
  RuleBase rb;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      rb.left[i][j] = output_label_index(left[i][j]);
      rb.right[i][j] = output_label_index(right[i][j]);
    }
  return rb;
}

FuzzySystem::FuzzySystem()
    : FuzzySystem(FuzzyVariable::from_peaks("slip", {0.0, 0.25, 0.5, 0.75, 1.0}),
                  FuzzyVariable::from_peaks("yaw_err", {-1.0, -0.5, 0.0, 0.5, 1.0}),
                  FuzzyVariable::from_peaks("v_corr", {-1.0, -0.5, 0.0, 0.5, 1.0}),
                  default_rules()) {}

FuzzySystem::FuzzySystem(FuzzyVariable slip, FuzzyVariable yaw_err,
                         FuzzyVariable out, RuleBase rules)
    : slip_(std::move(slip)), err_(std::move(yaw_err)), out_(std::move(out)),
      rules_(rules) {
  if (slip_.sets.size() != 5 || err_.sets.size() != 5 || out_.sets.size() != 5)
    throw ConfigError("fuzzy system expects five sets per variable");
}

double FuzzySystem::aggregate_centroid(const std::vector<double>& heights) const {
  // Enumerate the linear pieces of every clipped output set.
  std::vector<Piece> pieces;
  std::vector<double> breaks{out_.lo, out_.hi};
  for (std::size_t k = 0; k < out_.sets.size(); ++k) {
    const double h = heights[k];
    if (h <= 0.0) continue;
    const TriSet& s = out_.sets[k];
    const int ki = static_cast<int>(k);
    if (s.shoulder_left) {
      const double xf = s.right - (s.right - s.peak) * h;
      pieces.push_back({out_.lo, xf, 0.0, h, ki});
      if (xf < s.right) {
        const double a = -1.0 / (s.right - s.peak);
        pieces.push_back({xf, s.right, a, -a * s.right, ki});
      }
    } else if (s.shoulder_right) {
      const double xr = s.left + (s.peak - s.left) * h;
      if (s.left < xr) {
        const double a = 1.0 / (s.peak - s.left);
        pieces.push_back({s.left, xr, a, -a * s.left, ki});
      }
      pieces.push_back({xr, out_.hi, 0.0, h, ki});
    } else {
      const double xr = s.left + (s.peak - s.left) * h;
      const double xf = s.right - (s.right - s.peak) * h;
      const double ar = 1.0 / (s.peak - s.left);
      const double af = -1.0 / (s.right - s.peak);
      pieces.push_back({s.left, xr, ar, -ar * s.left, ki});
      if (xr < xf) pieces.push_back({xr, xf, 0.0, h, ki});
      pieces.push_back({xf, s.right, af, -af * s.right, ki});
    }
  }
  if (pieces.empty())
    throw std::logic_error("fuzzy aggregation: no rule fired (coverage violated)");

  for (const Piece& p : pieces) {
    breaks.push_back(p.x0);
    breaks.push_back(p.x1);
  }
  // Crossings between pieces of different sets are max-switch points.
  for (std::size_t i = 0; i < pieces.size(); ++i)
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const Piece& p = pieces[i];
      const Piece& q = pieces[j];
      if (p.set == q.set || p.a == q.a) continue;
      const double xc = (q.b - p.b) / (p.a - q.a);
      if (xc > std::max(p.x0, q.x0) && xc < std::min(p.x1, q.x1))
        breaks.push_back(xc);
    }
  std::sort(breaks.begin(), breaks.end());

  // Between consecutive breakpoints the aggregate equals one clipped line.
  double area = 0.0, moment = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double x0 = breaks[i], x1 = breaks[i + 1];
    if (x1 - x0 < 1e-13) continue;
    const double xm = 0.5 * (x0 + x1);
    double best_v = 0.0, best_a = 0.0;
    for (std::size_t k = 0; k < out_.sets.size(); ++k) {
      if (heights[k] <= 0.0) continue;
      double v, a;
      out_.sets[k].clipped_line(xm, heights[k], v, a);
      if (v > best_v) {
        best_v = v;
        best_a = a;
      }
    }
    if (best_v <= 0.0) continue;
    const double b = best_v - best_a * xm;
    area += best_a * 0.5 * (x1 * x1 - x0 * x0) + b * (x1 - x0);
    moment += best_a * (x1 * x1 * x1 - x0 * x0 * x0) / 3.0 +
              b * 0.5 * (x1 * x1 - x0 * x0);
  }
  if (area <= 1e-12)
    throw std::logic_error("fuzzy aggregation: zero area (coverage violated)");
  return moment / area;
}

FISOutput FuzzySystem::infer(double lambda_norm, double gamma_err_norm) const {
  const std::vector<double> mu_s = slip_.fuzzify(lambda_norm);
  const std::vector<double> mu_e = err_.fuzzify(gamma_err_norm);
  std::vector<double> h_left(out_.sets.size(), 0.0);
  std::vector<double> h_right(out_.sets.size(), 0.0);
  for (int i = 0; i < 5; ++i) {
    if (mu_s[i] <= 0.0) continue;
    for (int j = 0; j < 5; ++j) {
      const double w = std::min(mu_s[i], mu_e[j]);
      if (w <= 0.0) continue;
      h_left[rules_.left[i][j]] = std::max(h_left[rules_.left[i][j]], w);
      h_right[rules_.right[i][j]] = std::max(h_right[rules_.right[i][j]], w);
    }
  }
  FISOutput out;
  out.v_corr_l = aggregate_centroid(h_left);
  out.v_corr_r = aggregate_centroid(h_right);
  return out;
}

FuzzySystem fuzzy_system_from(const Config& cfg) {
  const auto slip_peaks = cfg.get_doubles("fis.slip_peaks", {0.0, 0.25, 0.5, 0.75, 1.0});
  const auto err_peaks = cfg.get_doubles("fis.err_peaks", {-1.0, -0.5, 0.0, 0.5, 1.0});
  const auto out_peaks = cfg.get_doubles("fis.out_peaks", {-1.0, -0.5, 0.0, 0.5, 1.0});

  RuleBase rb = FuzzySystem::default_rules();
  auto parse_rules = [&](const std::string& key, std::array<std::array<int, 5>, 5>& dst) {
    if (!cfg.has(key)) return;
    const auto labels = cfg.get_strings(key, {});
    if (labels.size() != 25)
      throw ConfigError("key '" + key + "': expected 25 labels, got " +
                        std::to_string(labels.size()));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        dst[i][j] = FuzzySystem::output_label_index(labels[i * 5 + j]);
  };
  parse_rules("fis.rules_left", rb.left);
  parse_rules("fis.rules_right", rb.right);

  return FuzzySystem(FuzzyVariable::from_peaks("slip", slip_peaks),
                     FuzzyVariable::from_peaks("yaw_err", err_peaks),
                     FuzzyVariable::from_peaks("v_corr", out_peaks), rb);
}

FisParams fis_params_from(const Config& cfg) {
  FisParams f;
  f.norm_slip = cfg.get_double("fis.norm_slip", f.norm_slip);
  f.norm_yaw_err = cfg.get_double("fis.norm_yaw_err", f.norm_yaw_err);
  if (f.norm_slip <= 0 || f.norm_yaw_err <= 0)
    throw ConfigError("fis normalization scales must be positive");
  return f;
}

}  // namespace edtsc
