#pragma once

#include "fiberbayes/gaussian.hpp"
#include "fiberbayes/shape_basis.hpp"
#include "fiberbayes/so3.hpp"

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace fiberbayes {

/// Geometric components of a decomposed fiber.
enum class Component { Translation = 1, Shape = 2, Rotation = 3 };

std::string_view component_name(Component c);

/// Parses a comma-separated list of "trans", "shape", "rot" (also "all").
/// The result is de-duplicated and ordered translation, shape, rotation.
std::vector<Component> parse_components(std::string_view text);

std::string format_components(const std::vector<Component>& components);

/// Per-fiber feature vectors for a chosen subset of components. Block b
/// holds one column per fiber for components[b]; the rotation block stores
/// the embedded coordinates of the rotation.
struct FeatureTable {
  std::vector<Component> components;
  std::vector<Eigen::MatrixXd> blocks;

  Eigen::Index size() const { return blocks.empty() ? 0 : blocks.front().cols(); }
  Eigen::Index dim(std::size_t b) const { return blocks[b].rows(); }
};

FeatureTable make_features(const std::vector<FiberDecomposition>& fibers, const std::vector<Component>& components);

/// Log kernel density of one component datum: translation and shape use a
/// multivariate normal, the rotation block the embedded Gaussian.
double component_loglik(Component m, const Eigen::VectorXd& c, const GaussianParams& params);

/// Rotation kernel evaluated on the rotation itself.
double component_loglik(const RotationSO3& x, const GaussianParams& params);

}  // namespace fiberbayes
