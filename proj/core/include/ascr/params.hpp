#pragma once

#include <span>
#include <string>
#include <vector>

#include "ascr/observation.hpp"

namespace ascr {

enum class SourceLevelMode { variable, fixed };
enum class BearingModel { mixture, single, none };
enum class DetectionModel { threshold, snr };

struct ModelOptions {
  SourceLevelMode source_level = SourceLevelMode::variable;
  BearingModel bearing = BearingModel::mixture;
  DetectionModel detection = DetectionModel::threshold;
};

std::string to_string(SourceLevelMode mode);
std::string to_string(BearingModel model);
std::string to_string(DetectionModel model);
/// Inverses of to_string; throw ConfigError on unknown names.
SourceLevelMode parse_source_level_mode(const std::string& text);
BearingModel parse_bearing_model(const std::string& text);
DetectionModel parse_detection_model(const std::string& text);

/// Janoschek detection curve with the lower asymptote fixed at 0.
struct JanoschekParams {
  double theta_U = 0.8;  // upper asymptote, (0, 1]
  double theta_R = 0.1;  // rate, > 0; +inf gives a step at snr = 0
  double theta_I = 2.0;  // shape, > 1
};

/// Every model parameter on the real scale. Fields unused by the selected
/// ModelOptions are carried along untouched.
struct ModelParams {
  DetectionParams det;
  PropagationParams prop;
  SourceLevelPrior sl;
  BearingParams bearing;
  JanoschekParams jan;
  std::vector<double> beta;  // density coefficients on the design-matrix scale
};

enum class Link { identity, log, logit, log_minus_one };

std::string to_string(Link link);
double apply_link(Link link, double value);
double inverse_link(Link link, double value);

struct ParamInfo {
  std::string name;
  Link link;
};

/// Ordered list of free parameters for a model variant, and the mapping
/// between ModelParams and the unconstrained (link-scale) vector.
class ParamLayout {
 public:
  ParamLayout(ModelOptions options, std::vector<std::string> beta_names);

  std::size_t size() const { return info_.size(); }
  const std::vector<ParamInfo>& params() const { return info_; }
  const ModelOptions& options() const { return options_; }
  std::size_t beta_offset() const { return beta_offset_; }
  std::size_t beta_count() const { return info_.size() - beta_offset_; }

  /// Link-scale vector. Throws std::invalid_argument when a value is outside its link domain.
  std::vector<double> transform(const ModelParams& params) const;
  /// Inverse of transform. Values not in the layout are copied from `base`.
  ModelParams untransform(std::span<const double> theta, const ModelParams& base) const;
  /// Real-scale values in layout order.
  std::vector<double> real_values(const ModelParams& params) const;

 private:
  ModelOptions options_;
  std::vector<ParamInfo> info_;
  std::size_t beta_offset_ = 0;
};

}  // namespace ascr
