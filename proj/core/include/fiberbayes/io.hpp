#pragma once

#include "fiberbayes/cluster_eval.hpp"
#include "fiberbayes/curve.hpp"
#include "fiberbayes/mixture.hpp"
#include "fiberbayes/ndp.hpp"
#include "fiberbayes/shape_basis.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fiberbayes {

struct FiberRecord {
  std::string subject_id;
  std::string scan_id;
  std::string fiber_id;
  Curve curve;

  std::string key() const { return subject_id + "/" + scan_id + "/" + fiber_id; }
  std::string scan_key() const { return subject_id + "/" + scan_id; }
};

/// Fibers of one connection, possibly from many scans.
struct FiberDataset {
  std::string region_a;
  std::string region_b;
  /// Common grid size once resampled; 0 while curves keep their native
  /// point counts.
  Eigen::Index grid_size = 0;
  std::vector<FiberRecord> fibers;
  std::string source;
};

/// Scans in first-appearance order with the indices of their fibers.
struct ScanGroup {
  std::string subject_id;
  std::string scan_id;
  std::vector<std::size_t> fibers;

  std::string key() const { return subject_id + "/" + scan_id; }
};

std::vector<ScanGroup> group_by_scan(const FiberDataset& data);

/// Reads the line-oriented curve format:
///
///   fiberbayes-curves 1 grid=<N|native> connection=<a>,<b>
///   <subject> <scan> <fiber> <npoints> x1 y1 z1 x2 y2 z2 ...
///
/// Blank lines and lines starting with '#' are skipped. Errors carry the
/// line number and fiber id.
FiberDataset parse_fibers(std::istream& in, const std::string& source = "<stream>");
FiberDataset read_fibers(const std::filesystem::path& path);

/// read_fibers followed by resampling to `grid_size` points. Curves already
/// stored on that grid (header grid=N) are kept as they are.
FiberDataset load_fibers(const std::filesystem::path& path, Eigen::Index grid_size = kDefaultGridSize);

/// Resamples every curve of a native-grid dataset.
FiberDataset resample_dataset(FiberDataset data, Eigen::Index grid_size);

/// Drops scans with fewer than `min_fibers` fibers, warning for each.
FiberDataset filter_min_fibers(FiberDataset data, int min_fibers);

void write_fibers(std::ostream& out, const FiberDataset& data);
void save_fibers(const std::filesystem::path& path, const FiberDataset& data);

/// %.17g, the shortest fixed width that round-trips every double.
std::string format_double(double x);

void save_basis(const std::filesystem::path& path, const ShapeBasis& basis);
ShapeBasis load_basis(const std::filesystem::path& path);

struct DecompositionRow {
  std::string id;
  FiberDecomposition decomposition;
};

/// id, translation (3), shape coefficients (T), rotation log vector (3),
/// recon_error. The warping is not persisted.
void save_decompositions(const std::filesystem::path& path, const std::vector<DecompositionRow>& rows);
std::vector<DecompositionRow> load_decompositions(const std::filesystem::path& path);

/// One JSON record per saved draw; labels are written 1-based.
void save_chain(const std::filesystem::path& path, const MixtureChain& chain);
void save_chain(const std::filesystem::path& path, const NdpChain& chain);
/// Atom or cluster parameters recorded at the configured stride.
void save_chain_params(const std::filesystem::path& path, const MixtureChain& chain);
void save_chain_params(const std::filesystem::path& path, const NdpChain& chain);

void save_coclustering(const std::filesystem::path& path, const std::vector<std::string>& ids,
                       const Eigen::MatrixXd& p);
void save_partition(const std::filesystem::path& path, const std::vector<std::string>& ids, const Partition& p);
/// Reads an "id,label" CSV in file order.
std::vector<std::pair<std::string, int>> load_partition(const std::filesystem::path& path);

/// Flat key = value file; '#' starts a comment.
std::map<std::string, std::string> load_config(const std::filesystem::path& path);

}  // namespace fiberbayes
