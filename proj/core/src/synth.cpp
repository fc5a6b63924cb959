#include "fiberbayes/synth.hpp"

#include "fiberbayes/error.hpp"
#include "fiberbayes/random.hpp"
#include "fiberbayes/so3.hpp"

#include <cmath>
#include <numbers>

namespace fiberbayes {

namespace {

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

Eigen::Vector3d normal3(Rng& rng) { return {rng.normal(), rng.normal(), rng.normal()}; }

// Streamlines are smooth, so the observation error is a random
// low-frequency perturbation: cosine modes 0..4 per coordinate, scaled to a
// pointwise standard deviation of `sd` on average along the curve.
void add_smooth_noise(Points& p, double sd, Rng& rng) {
  constexpr int kModes = 5;
  const double norm = sd / std::sqrt(0.5 * kModes + 0.5);
  Eigen::Matrix<double, kModes, 3> z;
  for (int m = 0; m < kModes; ++m) z.row(m) = norm * normal3(rng).transpose();
  const Eigen::Index n = p.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n - 1);
    for (int m = 0; m < kModes; ++m) p.row(k) += std::cos(m * std::numbers::pi * s) * z.row(m);
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (clusters.empty()) throw InvalidArgument("synth: no subject clusters");
  if (grid_size < 2) throw InvalidArgument("synth: grid_size must be at least 2");
  for (const SubjectClusterSpec& c : clusters) {
    if (c.bundles.empty()) throw InvalidArgument("synth: cluster without bundles");
    if (c.subjects < 1 || c.scans_per_subject < 1 || c.fibers_per_bundle < 1 || c.min_fibers_per_bundle < 1) {
      throw InvalidArgument("synth: subject, scan and fiber counts must be positive");
    }
    if (c.count_sd < 0.0 || c.scan_offset_spread < 0.0) throw InvalidArgument("synth: spreads must be >= 0");
    for (const BundleSpec& b : c.bundles) {
      if (b.translation_spread < 0.0 || b.rotation_spread < 0.0 || b.shape_spread < 0.0 || b.noise < 0.0) {
        throw InvalidArgument("synth: spreads must be >= 0");
      }
      if (!(b.length > 0.0)) throw InvalidArgument("synth: bundle length must be positive");
    }
  }
}

Curve synth_fiber(const BundleSpec& bundle, const Eigen::Vector3d& translation, const Eigen::Vector3d& rotation,
                  const Eigen::Vector3d& coeffs, Eigen::Index grid_size) {
  constexpr double pi = std::numbers::pi;
  Points p(grid_size, 3);
  for (Eigen::Index k = 0; k < grid_size; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(grid_size - 1);
    Eigen::RowVector3d x;
    if (std::abs(bundle.bend) < 1e-12) {
      x << bundle.length * s, 0.0, 0.0;
    } else {
      const double radius = bundle.length / bundle.bend;
      const double phi = bundle.bend * (s - 0.5);
      x << radius * std::sin(phi), radius * (1.0 - std::cos(phi)), 0.0;
    }
    x(2) += coeffs(0) * std::sin(pi * s);
    x(1) += coeffs(1) * std::sin(2.0 * pi * s) + coeffs(2) * std::sin(pi * s);
    p.row(k) = x;
  }
  const Curve shape = center(Curve(std::move(p)));
  return translate(rotate(shape, exp_so3(rotation).matrix().transpose()), translation);
}

SynthOutput synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SynthOutput out;
  out.data.region_a = spec.region_a;
  out.data.region_b = spec.region_b;
  out.data.grid_size = spec.grid_size;
  out.data.source = "synth";
  int subject_no = 0;
  int bundle_base = 0;
  for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
    const SubjectClusterSpec& cluster = spec.clusters[c];
    for (int s = 0; s < cluster.subjects; ++s) {
      const std::string subject_id = "s" + padded(++subject_no, 2);
      for (int scan = 1; scan <= cluster.scans_per_subject; ++scan) {
        const std::string scan_id = std::to_string(scan);
        out.scan_keys.push_back(subject_id + "/" + scan_id);
        out.scan_labels.push_back(static_cast<int>(c));
        const Eigen::Vector3d offset = cluster.scan_offset_spread * normal3(rng);
        int fiber_no = 0;
        for (std::size_t b = 0; b < cluster.bundles.size(); ++b) {
          const BundleSpec& bundle = cluster.bundles[b];
          int n_fibers = cluster.fibers_per_bundle;
          if (cluster.count_sd > 0.0) {
            const double draw = std::round(cluster.fibers_per_bundle + cluster.count_sd * rng.normal());
            n_fibers = std::max(cluster.min_fibers_per_bundle, static_cast<int>(draw));
          }
          for (int f = 0; f < n_fibers; ++f) {
            const Eigen::Vector3d t = bundle.translation + offset + bundle.translation_spread * normal3(rng);
            Eigen::Vector3d r = bundle.rotation + bundle.rotation_spread * normal3(rng);
            if (r.norm() >= std::numbers::pi - 1e-3) r *= (std::numbers::pi - 1e-3) / r.norm();
            const Eigen::Vector3d coeffs = bundle.shape_mean + bundle.shape_spread * normal3(rng);
            Points p = synth_fiber(bundle, t, r, coeffs, spec.grid_size).points();
            if (bundle.noise > 0.0) add_smooth_noise(p, bundle.noise, rng);
            out.data.fibers.push_back({subject_id, scan_id, "f" + padded(++fiber_no, 4), Curve(std::move(p))});
            out.fiber_labels.push_back(bundle_base + static_cast<int>(b));
          }
        }
      }
    }
    bundle_base += static_cast<int>(cluster.bundles.size());
  }
  return out;
}

std::vector<std::string> synth_preset_names() { return {"two-bundle", "population", "test-retest"}; }

SynthSpec synth_preset(const std::string& name, std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  if (name == "two-bundle") {
    // Bundle centroids 20 mm apart against a 1 mm translation spread.
    BundleSpec a;
    a.noise = 0.5;
    BundleSpec b = a;
    b.translation = Eigen::Vector3d(20.0, 0.0, 0.0);
    SubjectClusterSpec c;
    c.bundles = {a, b};
    c.fibers_per_bundle = 100;
    spec.clusters = {c};
  } else if (name == "population") {
    // Three groups of three subjects; groups differ in bundle shape, pose
    // and relative placement.
    const double bends[3] = {0.3, 1.5, 2.6};
    const double lifts[3] = {0.0, 6.0, -6.0};
    for (int g = 0; g < 3; ++g) {
      BundleSpec a;
      a.bend = bends[g];
      a.shape_mean = Eigen::Vector3d(lifts[g], 0.0, 0.0);
      a.rotation = Eigen::Vector3d(0.0, 0.0, 0.4 * g);
      BundleSpec b = a;
      b.translation = Eigen::Vector3d(0.0, 12.0 + 6.0 * g, 0.0);
      b.shape_mean = Eigen::Vector3d(-lifts[g], 2.0 * g, 0.0);
      SubjectClusterSpec c;
      c.bundles = {a, b};
      c.subjects = 3;
      c.fibers_per_bundle = 20;
      c.scan_offset_spread = 3.0;
      spec.clusters.push_back(c);
    }
  } else if (name == "test-retest") {
    // Five people scanned twice: each person's bundle shape is stable
    // across scans while the fiber count varies widely and independently.
    for (int p = 0; p < 5; ++p) {
      BundleSpec a;
      a.bend = 0.4 + 0.5 * p;
      a.shape_mean = Eigen::Vector3d(p % 2 == 0 ? 4.0 : -4.0, 1.5 * (p - 2), 0.0);
      SubjectClusterSpec c;
      c.bundles = {a};
      c.scans_per_subject = 2;
      c.fibers_per_bundle = 50;
      c.count_sd = 15.0;
      c.min_fibers_per_bundle = 30;
      c.scan_offset_spread = 2.0;
      spec.clusters.push_back(c);
    }
  } else {
    throw InvalidArgument("unknown synth preset '" + name + "'");
  }
  return spec;
}

}  // namespace fiberbayes
