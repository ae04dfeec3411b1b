#include "ascr/params.hpp"

#include <cmath>
#include <stdexcept>

#include "ascr/error.hpp"
#include "ascr/numerics.hpp"

namespace ascr {

std::string to_string(SourceLevelMode mode) { return mode == SourceLevelMode::variable ? "variable" : "fixed"; }

std::string to_string(BearingModel model) {
  switch (model) {
    case BearingModel::mixture:
      return "mixture";
    case BearingModel::single:
      return "single";
    case BearingModel::none:
      return "none";
  }
  return {};
}

std::string to_string(DetectionModel model) { return model == DetectionModel::threshold ? "threshold" : "snr"; }

SourceLevelMode parse_source_level_mode(const std::string& text) {
  if (text == "variable") return SourceLevelMode::variable;
  if (text == "fixed") return SourceLevelMode::fixed;
  throw ConfigError("unknown source-level mode '" + text + "' (expected variable or fixed)");
}

BearingModel parse_bearing_model(const std::string& text) {
  if (text == "mixture") return BearingModel::mixture;
  if (text == "single") return BearingModel::single;
  if (text == "none") return BearingModel::none;
  throw ConfigError("unknown bearing model '" + text + "' (expected mixture, single or none)");
}

DetectionModel parse_detection_model(const std::string& text) {
  if (text == "threshold") return DetectionModel::threshold;
  if (text == "snr") return DetectionModel::snr;
  throw ConfigError("unknown detection model '" + text + "' (expected threshold or snr)");
}

std::string to_string(Link link) {
  switch (link) {
    case Link::identity:
      return "identity";
    case Link::log:
      return "log";
    case Link::logit:
      return "logit";
    case Link::log_minus_one:
      return "log(x-1)";
  }
  return {};
}

double apply_link(Link link, double value) {
  switch (link) {
    case Link::identity:
      return value;
    case Link::log:
      if (!(value > 0.0)) throw std::invalid_argument("log link needs a positive value, got " + std::to_string(value));
      return std::log(value);
    case Link::logit:
      if (!(value > 0.0 && value < 1.0)) {
        throw std::invalid_argument("logit link needs a value in (0, 1), got " + std::to_string(value));
      }
      return logit(value);
    case Link::log_minus_one:
      if (!(value > 1.0)) throw std::invalid_argument("log(x-1) link needs a value above 1, got " + std::to_string(value));
      return std::log(value - 1.0);
  }
  return value;
}

double inverse_link(Link link, double value) {
  switch (link) {
    case Link::identity:
      return value;
    case Link::log:
      return std::exp(value);
    case Link::logit:
      return inv_logit(value);
    case Link::log_minus_one:
      return 1.0 + std::exp(value);
  }
  return value;
}

ParamLayout::ParamLayout(ModelOptions options, std::vector<std::string> beta_names) : options_(options) {
  if (options_.detection == DetectionModel::snr) {
    info_.push_back({"theta_U", Link::logit});
    info_.push_back({"theta_R", Link::log});
    info_.push_back({"theta_I", Link::log_minus_one});
  } else {
    info_.push_back({"g0", Link::logit});
  }
  info_.push_back({"beta_r", Link::log});
  info_.push_back({"sigma_r", Link::log});
  info_.push_back({"mu_s", Link::log});
  if (options_.source_level == SourceLevelMode::variable) info_.push_back({"sigma_s", Link::log});
  if (options_.bearing != BearingModel::none) info_.push_back({"kappa", Link::log});
  if (options_.bearing == BearingModel::mixture) {
    info_.push_back({"delta_kappa", Link::log});
    info_.push_back({"psi_kappa", Link::logit});
  }
  beta_offset_ = info_.size();
  for (auto& name : beta_names) info_.push_back({"beta_" + name, Link::identity});
}

std::vector<double> ParamLayout::real_values(const ModelParams& p) const {
  if (p.beta.size() != beta_count()) {
    throw std::invalid_argument("expected " + std::to_string(beta_count()) + " density coefficients, got " +
                                std::to_string(p.beta.size()));
  }
  std::vector<double> out;
  out.reserve(info_.size());
  if (options_.detection == DetectionModel::snr) {
    out.push_back(p.jan.theta_U);
    out.push_back(p.jan.theta_R);
    out.push_back(p.jan.theta_I);
  } else {
    out.push_back(p.det.g0);
  }
  out.push_back(p.prop.beta_r);
  out.push_back(p.prop.sigma_r);
  out.push_back(p.sl.mu_s);
  if (options_.source_level == SourceLevelMode::variable) out.push_back(p.sl.sigma_s);
  if (options_.bearing != BearingModel::none) out.push_back(p.bearing.kappa);
  if (options_.bearing == BearingModel::mixture) {
    out.push_back(p.bearing.delta_kappa);
    out.push_back(p.bearing.psi_kappa);
  }
  out.insert(out.end(), p.beta.begin(), p.beta.end());
  return out;
}

std::vector<double> ParamLayout::transform(const ModelParams& params) const {
  auto values = real_values(params);
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      values[i] = apply_link(info_[i].link, values[i]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(info_[i].name + ": " + e.what());
    }
  }
  return values;
}

ModelParams ParamLayout::untransform(std::span<const double> theta, const ModelParams& base) const {
  if (theta.size() != info_.size()) throw std::invalid_argument("parameter vector length does not match layout");
  ModelParams p = base;
  std::size_t i = 0;
  auto next = [&]() {
    const double v = inverse_link(info_[i].link, theta[i]);
    ++i;
    return v;
  };
  if (options_.detection == DetectionModel::snr) {
    p.jan.theta_U = next();
    p.jan.theta_R = next();
    p.jan.theta_I = next();
  } else {
    p.det.g0 = next();
  }
  p.prop.beta_r = next();
  p.prop.sigma_r = next();
  p.sl.mu_s = next();
  p.sl.fixed = options_.source_level == SourceLevelMode::fixed;
  if (!p.sl.fixed) p.sl.sigma_s = next();
  if (options_.bearing != BearingModel::none) p.bearing.kappa = next();
  if (options_.bearing == BearingModel::mixture) {
    p.bearing.delta_kappa = next();
    p.bearing.psi_kappa = next();
  } else {
    p.bearing.delta_kappa = 0.0;
  }
  p.beta.assign(theta.begin() + static_cast<std::ptrdiff_t>(beta_offset_), theta.end());
  return p;
}

}  // namespace ascr
