#include "fiberbayes/preprocess.hpp"

#include "fiberbayes/error.hpp"

#include <cmath>

namespace fiberbayes {

std::vector<Eigen::Vector3d> demean_scans(FiberDataset& data) {
  std::vector<Eigen::Vector3d> offsets;
  for (const ScanGroup& g : group_by_scan(data)) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t i : g.fibers) mean += centroid(data.fibers[i].curve);
    mean /= static_cast<double>(g.fibers.size());
    for (std::size_t i : g.fibers) data.fibers[i].curve = translate(data.fibers[i].curve, -mean);
    offsets.push_back(mean);
  }
  return offsets;
}

void restore_scans(FiberDataset& data, const std::vector<Eigen::Vector3d>& offsets) {
  const auto groups = group_by_scan(data);
  if (groups.size() != offsets.size()) throw InvalidArgument("restore_scans: offset count does not match scans");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i : groups[g].fibers) data.fibers[i].curve = translate(data.fibers[i].curve, offsets[g]);
  }
}

std::vector<BlockScaling> standardize_features(FeatureTable& table) {
  std::vector<BlockScaling> out;
  if (table.blocks.empty()) return out;
  const auto n = static_cast<double>(table.size());
  if (table.size() < 1) throw InvalidArgument("standardize_features: empty table");
  for (std::size_t b = 0; b < table.blocks.size(); ++b) {
    Eigen::MatrixXd& block = table.blocks[b];
    BlockScaling s{table.components[b], block.rowwise().mean(), Eigen::VectorXd::Ones(block.rows())};
    block.colwise() -= s.mean;
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      const double sd = std::sqrt(block.row(r).squaredNorm() / n);
      if (sd > 1e-12 * std::max(1.0, s.mean.cwiseAbs()(r))) {
        s.scale(r) = sd;
        block.row(r) /= sd;
      } else {
        warn("standardize: coordinate " + std::to_string(r + 1) + " of '" +
             std::string(component_name(table.components[b])) + "' has zero variance, not rescaled");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void unstandardize_features(FeatureTable& table, const std::vector<BlockScaling>& scaling) {
  if (scaling.size() != table.blocks.size()) throw InvalidArgument("unstandardize: block count mismatch");
  for (std::size_t b = 0; b < scaling.size(); ++b) {
    Eigen::MatrixXd& block = table.blocks[b];
    if (scaling[b].mean.size() != block.rows()) throw InvalidArgument("unstandardize: dimension mismatch");
    block = (block.array().colwise() * scaling[b].scale.array()).matrix();
    block.colwise() += scaling[b].mean;
  }
}

ShapeBasis learn_basis(const std::vector<Curve>& curves, int basis_size, const TemplateOptions& options) {
  const TemplateFit fit = fit_template(curves, options);
  return fit_fpca(fit.shape_curves, fit.template_curve, basis_size);
}

PreparedData preprocess(FiberDataset data, const std::vector<Component>& components,
                        const PreprocessOptions& options) {
  if (data.fibers.empty()) throw InvalidArgument("preprocess: no fibers");
  if (data.grid_size < 2) throw InvalidArgument("preprocess: dataset must be resampled to a common grid");
  PreparedData out{std::move(data), ShapeBasis{Curve(Points::Zero(2, 3)), {}, {}}, {}, {}, {}};
  if (options.per_scan_demean) {
    for (const ScanGroup& g : group_by_scan(out.data)) out.record.scan_keys.push_back(g.key());
    out.record.scan_offsets = demean_scans(out.data);
  }

  if (options.basis) {
    if (options.basis->grid_size() != out.data.grid_size) {
      throw InvalidArgument("preprocess: basis grid " + std::to_string(options.basis->grid_size()) +
                            " does not match data grid " + std::to_string(out.data.grid_size));
    }
    out.basis = *options.basis;
  } else {
    const std::size_t n = out.data.fibers.size();
    std::size_t stride = 1;
    if (options.basis_fibers > 0 && n > static_cast<std::size_t>(options.basis_fibers)) {
      stride = (n + static_cast<std::size_t>(options.basis_fibers) - 1) / static_cast<std::size_t>(options.basis_fibers);
    }
    std::vector<Curve> curves;
    for (std::size_t i = 0; i < n; i += stride) curves.push_back(out.data.fibers[i].curve);
    out.basis = learn_basis(curves, options.basis_size, options.template_options);
    out.record.basis_learned = true;
  }

  out.decompositions.reserve(out.data.fibers.size());
  for (const FiberRecord& f : out.data.fibers) {
    try {
      out.decompositions.push_back(decompose_fiber(f.curve, out.basis, options.align_max_iter));
    } catch (const Error& e) {
      throw NumericalError("fiber " + f.key() + ": " + e.what());
    }
  }
  out.features = make_features(out.decompositions, components);
  if (options.standardize) out.record.scaling = standardize_features(out.features);
  return out;
}

std::vector<SubjectData> split_by_scan(const PreparedData& prepared) {
  std::vector<SubjectData> out;
  for (const ScanGroup& g : group_by_scan(prepared.data)) {
    SubjectData s{g.key(), FeatureTable{prepared.features.components, {}}, static_cast<long>(g.fibers.size())};
    for (const Eigen::MatrixXd& block : prepared.features.blocks) {
      Eigen::MatrixXd sub(block.rows(), static_cast<Eigen::Index>(g.fibers.size()));
      for (std::size_t i = 0; i < g.fibers.size(); ++i) {
        sub.col(static_cast<Eigen::Index>(i)) = block.col(static_cast<Eigen::Index>(g.fibers[i]));
      }
      s.fibers.blocks.push_back(std::move(sub));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fiberbayes
