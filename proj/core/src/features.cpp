#include "fiberbayes/features.hpp"

#include "fiberbayes/error.hpp"

#include <algorithm>
#include <sstream>

namespace fiberbayes {

std::string_view component_name(Component c) {
  switch (c) {
    case Component::Translation:
      return "trans";
    case Component::Shape:
      return "shape";
    case Component::Rotation:
      return "rot";
  }
  return "?";
}

std::vector<Component> parse_components(std::string_view text) {
  std::vector<Component> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view token = text.substr(pos, comma - pos);
    if (token == "trans" || token == "translation") {
      out.push_back(Component::Translation);
    } else if (token == "shape") {
      out.push_back(Component::Shape);
    } else if (token == "rot" || token == "rotation") {
      out.push_back(Component::Rotation);
    } else if (token == "all") {
      out.insert(out.end(), {Component::Translation, Component::Shape, Component::Rotation});
    } else if (!token.empty()) {
      throw InvalidArgument("unknown component '" + std::string(token) + "'");
    }
    pos = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string format_components(const std::vector<Component>& components) {
  std::ostringstream os;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) os << ',';
    os << component_name(components[i]);
  }
  return os.str();
}

FeatureTable make_features(const std::vector<FiberDecomposition>& fibers, const std::vector<Component>& components) {
  FeatureTable table{components, {}};
  const auto n = static_cast<Eigen::Index>(fibers.size());
  for (Component m : components) {
    Eigen::Index d = 3;
    if (m == Component::Shape) d = fibers.empty() ? 0 : fibers.front().shape_coeffs.size();
    Eigen::MatrixXd block(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const FiberDecomposition& f = fibers[static_cast<std::size_t>(i)];
      switch (m) {
        case Component::Translation:
          block.col(i) = f.translation;
          break;
        case Component::Shape:
          if (f.shape_coeffs.size() != d) throw InvalidArgument("make_features: inconsistent shape dimension");
          block.col(i) = f.shape_coeffs;
          break;
        case Component::Rotation:
          block.col(i) = embed(f.rotation);
          break;
      }
    }
    table.blocks.push_back(std::move(block));
  }
  return table;
}

double component_loglik(Component m, const Eigen::VectorXd& c, const GaussianParams& params) {
  if (m == Component::Rotation && c.size() != 3) throw InvalidArgument("rotation datum must be 3-dimensional");
  return mvn_logpdf(c, params.mean, params.cov);
}

double component_loglik(const RotationSO3& x, const GaussianParams& params) {
  if (params.mean.size() != 3) throw InvalidArgument("rotation kernel must be 3-dimensional");
  return k3_logpdf(x, params.mean, params.cov);
}

}  // namespace fiberbayes
