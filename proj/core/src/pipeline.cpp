#include "fiberbayes/pipeline.hpp"

#include "fiberbayes/cluster_eval.hpp"
#include "fiberbayes/error.hpp"
#include "fiberbayes/io.hpp"
#include "fiberbayes/mixture.hpp"
#include "fiberbayes/ndp.hpp"
#include "fiberbayes/preprocess.hpp"
#include "fiberbayes/synth.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <ostream>
#include <unordered_map>

#ifndef FIBERBAYES_VERSION
#define FIBERBAYES_VERSION "unknown"
#endif

namespace fiberbayes {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

template <typename T>
T parse_setting(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("setting '" + key + "': bad value '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw InvalidArgument("setting '" + key + "': expected a boolean, got '" + value + "'");
}

// Writes files under the output directory and remembers them so a failed
// stage can be rolled back.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  fs::path claim(const std::string& name) {
    fs::create_directories(dir_);
    names_.push_back(name);
    return dir_ / name;
  }
  const std::vector<std::string>& names() const { return names_; }

  void roll_back(const std::string& reason) {
    std::error_code ec;
    for (const std::string& n : names_) fs::remove(dir_ / n, ec);
    fs::create_directories(dir_, ec);
    std::ofstream marker(dir_ / "FAILED", std::ios::binary);
    marker << reason << '\n';
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
}

std::vector<std::string> fiber_ids(const FiberDataset& data) {
  std::vector<std::string> ids;
  ids.reserve(data.fibers.size());
  for (const FiberRecord& f : data.fibers) ids.push_back(f.key());
  return ids;
}

// Labels of `truth` reordered to match `ids`.
Partition aligned_truth(const fs::path& truth, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> lookup;
  for (const auto& [id, label] : load_partition(truth)) lookup[id] = label;
  std::vector<int> labels;
  labels.reserve(ids.size());
  for (const std::string& id : ids) {
    const auto it = lookup.find(id);
    if (it == lookup.end()) throw InvalidArgument("truth file '" + truth.string() + "' has no label for " + id);
    labels.push_back(it->second);
  }
  return Partition(labels);
}

FiberDataset load_input(const RunConfig& c, std::ostream& log) {
  FiberDataset data = filter_min_fibers(load_fibers(c.input, c.grid), c.min_fibers);
  if (data.fibers.empty()) throw InvalidArgument("no fibers left after the min-fibers filter");
  log << "loaded " << data.fibers.size() << " fibers from " << c.input.string() << '\n';
  return data;
}

PreprocessOptions preprocess_options(const RunConfig& c) {
  PreprocessOptions opt;
  opt.basis_size = c.basis_size;
  opt.basis_fibers = c.basis_fibers;
  opt.template_options.max_iter = c.template_iters;
  if (!c.basis.empty()) opt.basis = load_basis(c.basis);
  return opt;
}

json partition_summary(const Eigen::MatrixXd& p, int mode_k, const std::vector<std::string>& ids,
                       const RunConfig& c, ArtifactWriter& w) {
  const PartitionEstimate est = extract_partition(p, std::min<int>(mode_k, static_cast<int>(p.rows())));
  save_coclustering(w.claim("coclustering.csv"), ids, p);
  save_partition(w.claim("partition.csv"), ids, est.partition);
  json summary{{"n", ids.size()},
               {"mode_k", mode_k},
               {"partition_k", est.partition.k()},
               {"discrepancy", est.discrepancy}};
  if (!c.truth.empty()) {
    const Partition truth = aligned_truth(c.truth, ids);
    summary["rand_index"] = rand_index(truth, est.partition);
    summary["adjusted_rand_index"] = adjusted_rand_index(truth, est.partition);
  }
  return summary;
}

json stage_synth(const RunConfig& c, ArtifactWriter& w, std::ostream& log) {
  SynthSpec spec = synth_preset(c.preset, *c.seed);
  spec.grid_size = c.grid;
  const SynthOutput s = synth_generate(spec);
  save_fibers(w.claim("fibers.txt"), s.data);
  save_partition(w.claim("truth_fibers.csv"), fiber_ids(s.data), Partition(s.fiber_labels));
  save_partition(w.claim("truth_scans.csv"), s.scan_keys, Partition(s.scan_labels));
  log << "generated " << s.data.fibers.size() << " fibers in " << s.scan_keys.size() << " scans\n";
  return {{"fibers", s.data.fibers.size()}, {"scans", s.scan_keys.size()}};
}

json stage_decompose(const RunConfig& c, ArtifactWriter& w, std::ostream& log) {
  PreprocessOptions opt = preprocess_options(c);
  opt.standardize = false;
  const PreparedData prepared = preprocess(load_input(c, log), {}, opt);
  if (prepared.record.basis_learned) save_basis(w.claim("basis.json"), prepared.basis);
  std::vector<DecompositionRow> rows;
  double worst = 0.0;
  for (std::size_t i = 0; i < prepared.decompositions.size(); ++i) {
    rows.push_back({prepared.data.fibers[i].key(), prepared.decompositions[i]});
    worst = std::max(worst, prepared.decompositions[i].recon_error);
  }
  save_decompositions(w.claim("decomposition.csv"), rows);
  return {{"fibers", rows.size()}, {"max_recon_error", worst}, {"basis_learned", prepared.record.basis_learned}};
}

json stage_fit_single(const RunConfig& c, ArtifactWriter& w, std::ostream& log) {
  const PreparedData prepared = preprocess(load_input(c, log), c.components, preprocess_options(c));
  MixtureConfig mc;
  mc.K = c.K > 0 ? c.K : 10;
  mc.n_iter = c.iters > 0 ? c.iters : 11000;
  mc.burn_in = c.burnin >= 0 ? c.burnin : 1000;
  mc.thin = c.thin;
  mc.seed = *c.seed;
  mc.param_stride = c.param_stride;
  log << "fit-single: " << prepared.features.size() << " fibers, K=" << mc.K << ", " << mc.n_iter << " iterations\n";
  const MixtureChain chain = fit_single(prepared.features, mc);
  save_chain(w.claim("chain.jsonl"), chain);
  if (mc.param_stride > 0) save_chain_params(w.claim("chain_params.jsonl"), chain);
  const int mode_k = posterior_mode_k(chain.occupied_counts());
  return partition_summary(coclustering(chain.assignment_draws()), mode_k, fiber_ids(prepared.data), c, w);
}

json stage_fit_ndp(const RunConfig& c, ArtifactWriter& w, std::ostream& log) {
  PreprocessOptions opt = preprocess_options(c);
  opt.per_scan_demean = true;
  const PreparedData prepared = preprocess(load_input(c, log), c.components, opt);
  std::vector<SubjectData> subjects = split_by_scan(prepared);
  std::vector<std::string> ids;
  for (const SubjectData& s : subjects) ids.push_back(s.id);
  NdpConfig nc;
  nc.K = c.K > 0 ? c.K : 9;
  nc.L = c.L;
  nc.n_iter = c.iters > 0 ? c.iters : 5000;
  nc.burn_in = c.burnin >= 0 ? c.burnin : 500;
  nc.thin = c.thin;
  nc.joint_counts = c.joint_counts;
  nc.seed = *c.seed;
  nc.atom_stride = c.param_stride;
  log << "fit-ndp: " << subjects.size() << " scans, K=" << nc.K << ", L=" << nc.L << ", " << nc.n_iter
      << " iterations\n";
  const NdpChain chain = fit_ndp(std::move(subjects), nc);
  save_chain(w.claim("chain.jsonl"), chain);
  if (nc.atom_stride > 0) save_chain_params(w.claim("chain_params.jsonl"), chain);
  const int mode_k = posterior_mode_k(chain.occupied_counts());
  return partition_summary(coclustering(chain.subject_assign_draws()), mode_k, ids, c, w);
}

json stage_eval(const RunConfig& c, ArtifactWriter& w, std::ostream&) {
  std::vector<std::string> ids;
  std::vector<int> labels;
  for (const auto& [id, label] : load_partition(c.estimate)) {
    ids.push_back(id);
    labels.push_back(label);
  }
  const Partition estimate(labels);
  const Partition truth = aligned_truth(c.truth, ids);
  json report{{"n", ids.size()},
              {"rand_index", rand_index(truth, estimate)},
              {"adjusted_rand_index", adjusted_rand_index(truth, estimate)}};
  write_json(w.claim("report.json"), report);
  return report;
}

json stage_reconstruct(const RunConfig& c, ArtifactWriter& w, std::ostream&) {
  const ShapeBasis basis = load_basis(c.basis);
  const std::vector<DecompositionRow> rows = load_decompositions(c.decomposition);
  FiberDataset data;
  data.grid_size = basis.grid_size();
  data.source = c.decomposition.string();
  std::ofstream table(w.claim("reconstruction.csv"), std::ios::binary);
  table << "id,recon_error\n";
  double worst = 0.0;
  for (const DecompositionRow& row : rows) {
    const auto a = row.id.find('/');
    const auto b = row.id.find('/', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) throw ParseError("bad fiber id '" + row.id + "'");
    data.fibers.push_back({row.id.substr(0, a), row.id.substr(a + 1, b - a - 1), row.id.substr(b + 1),
                           reconstruct(row.decomposition, basis)});
    table << row.id << ',' << format_double(row.decomposition.recon_error) << '\n';
    worst = std::max(worst, row.decomposition.recon_error);
  }
  save_fibers(w.claim("reconstructed.txt"), data);
  return {{"fibers", rows.size()}, {"max_recon_error", worst}};
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Synth:
      return "synth";
    case Stage::Decompose:
      return "decompose";
    case Stage::FitSingle:
      return "fit-single";
    case Stage::FitNdp:
      return "fit-ndp";
    case Stage::Eval:
      return "eval";
    case Stage::Reconstruct:
      return "reconstruct";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::Synth, Stage::Decompose, Stage::FitSingle, Stage::FitNdp, Stage::Eval, Stage::Reconstruct}) {
    if (stage_name(s) == name) return s;
  }
  throw InvalidArgument("unknown stage '" + std::string(name) + "'");
}

RunConfig RunConfig::from_settings(Stage stage, const std::map<std::string, std::string>& settings) {
  RunConfig c;
  c.stage = stage;
  for (const auto& [key, value] : settings) {
    if (key == "out") {
      c.out = value;
    } else if (key == "input") {
      c.input = value;
    } else if (key == "truth") {
      c.truth = value;
    } else if (key == "estimate") {
      c.estimate = value;
    } else if (key == "basis") {
      c.basis = value;
    } else if (key == "decomposition") {
      c.decomposition = value;
    } else if (key == "preset") {
      c.preset = value;
    } else if (key == "components") {
      c.components = parse_components(value);
    } else if (key == "K") {
      c.K = parse_setting<int>(key, value);
    } else if (key == "L") {
      c.L = parse_setting<int>(key, value);
    } else if (key == "iters") {
      c.iters = parse_setting<int>(key, value);
    } else if (key == "burnin") {
      c.burnin = parse_setting<int>(key, value);
    } else if (key == "thin") {
      c.thin = parse_setting<int>(key, value);
    } else if (key == "seed") {
      c.seed = parse_setting<std::uint64_t>(key, value);
    } else if (key == "joint-counts") {
      c.joint_counts = parse_bool(key, value);
    } else if (key == "min-fibers") {
      c.min_fibers = parse_setting<int>(key, value);
    } else if (key == "grid") {
      c.grid = parse_setting<long>(key, value);
    } else if (key == "basis-size") {
      c.basis_size = parse_setting<int>(key, value);
    } else if (key == "basis-fibers") {
      c.basis_fibers = parse_setting<int>(key, value);
    } else if (key == "template-iters") {
      c.template_iters = parse_setting<int>(key, value);
    } else if (key == "param-stride") {
      c.param_stride = parse_setting<int>(key, value);
    } else {
      throw InvalidArgument("unknown setting '" + key + "'");
    }
  }
  return c;
}

std::map<std::string, std::string> RunConfig::settings() const {
  std::map<std::string, std::string> s{{"out", out.string()},
                                       {"components", format_components(components)},
                                       {"K", std::to_string(K)},
                                       {"L", std::to_string(L)},
                                       {"iters", std::to_string(iters)},
                                       {"burnin", std::to_string(burnin)},
                                       {"thin", std::to_string(thin)},
                                       {"joint-counts", joint_counts ? "true" : "false"},
                                       {"min-fibers", std::to_string(min_fibers)},
                                       {"grid", std::to_string(grid)},
                                       {"basis-size", std::to_string(basis_size)},
                                       {"basis-fibers", std::to_string(basis_fibers)},
                                       {"template-iters", std::to_string(template_iters)},
                                       {"param-stride", std::to_string(param_stride)},
                                       {"preset", preset}};
  if (seed) s["seed"] = std::to_string(*seed);
  for (const auto& [key, path] : {std::pair{"input", input}, std::pair{"truth", truth}, std::pair{"estimate", estimate},
                                  std::pair{"basis", basis}, std::pair{"decomposition", decomposition}}) {
    if (!path.empty()) s[key] = path.string();
  }
  return s;
}

void RunConfig::validate() const {
  auto require = [&](const fs::path& p, const char* flag) {
    if (p.empty()) throw InvalidArgument(std::string(stage_name(stage)) + " requires --" + flag);
  };
  switch (stage) {
    case Stage::Synth:
      break;
    case Stage::Decompose:
      require(input, "input");
      break;
    case Stage::FitSingle:
    case Stage::FitNdp:
      require(input, "input");
      if (components.empty() && !(stage == Stage::FitNdp && joint_counts)) {
        throw InvalidArgument("empty component subset");
      }
      break;
    case Stage::Eval:
      require(truth, "truth");
      require(estimate, "estimate");
      break;
    case Stage::Reconstruct:
      require(basis, "basis");
      require(decomposition, "decomposition");
      break;
  }
  const bool stochastic = stage == Stage::Synth || stage == Stage::FitSingle || stage == Stage::FitNdp;
  if (stochastic && !seed) throw InvalidArgument(std::string(stage_name(stage)) + " requires --seed");
  if (out.empty()) throw InvalidArgument("output directory must not be empty");
  if (K < 0 || L < 2 || iters < 0 || burnin < -1 || thin < 1 || min_fibers < 0 || grid < 2 || basis_size < 1 ||
      basis_fibers < 0 || template_iters < 1 || param_stride < 0) {
    throw InvalidArgument("sampler or preprocessing setting out of range");
  }
}

int run(const RunConfig& config, std::ostream& log) {
  ArtifactWriter writer(config.out);
  try {
    config.validate();
    std::error_code ec;
    fs::remove(config.out / "FAILED", ec);
    json summary;
    switch (config.stage) {
      case Stage::Synth:
        summary = stage_synth(config, writer, log);
        break;
      case Stage::Decompose:
        summary = stage_decompose(config, writer, log);
        break;
      case Stage::FitSingle:
        summary = stage_fit_single(config, writer, log);
        break;
      case Stage::FitNdp:
        summary = stage_fit_ndp(config, writer, log);
        break;
      case Stage::Eval:
        summary = stage_eval(config, writer, log);
        break;
      case Stage::Reconstruct:
        summary = stage_reconstruct(config, writer, log);
        break;
    }
    std::vector<std::string> outputs = writer.names();
    const fs::path manifest_path = writer.claim("manifest.json");
    json manifest{{"tool", "fiberbayes"},
                  {"version", FIBERBAYES_VERSION},
                  {"stage", stage_name(config.stage)},
                  {"settings", config.settings()},
                  {"outputs", outputs},
                  {"summary", summary}};
    write_json(manifest_path, manifest);
    log << summary.dump() << '\n';
    return 0;
  } catch (const std::exception& e) {
    const std::string reason = std::string(stage_name(config.stage)) + " failed: " + e.what();
    log << reason << '\n';
    writer.roll_back(reason);
    return 1;
  }
}

}  // namespace fiberbayes
