// bevodom command-line front end.
//
// Machine-readable output (JSON) goes to stdout, diagnostics to stderr.
// Exit codes: 0 success, 1 runtime or input-format error, 2 usage error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bevodom/bevodom.hpp"
#include "bevodom/io/association.hpp"
#include "bevodom/io/bvt1.hpp"
#include "bevodom/io/config.hpp"
#include "bevodom/io/synth.hpp"
#include "bevodom/io/text.hpp"
#include "bevodom/io/trajectory_formats.hpp"

namespace {

using bevodom::Error;
using nlohmann::json;
namespace io = bevodom::io;

struct Globals {
  unsigned threads = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bevodom::ExecutionOptions exec() const { return {threads}; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

bevodom::TensorD read_tensor(const std::string& path) {
  const std::string bytes = read_file(path);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
  try {
    return bevodom::tensor_cast<double>(io::read_bvt1({p, bytes.size()}));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_tensor(const std::string& path, const bevodom::TensorD& t) {
  const auto bytes = io::write_bvt1(bevodom::tensor_cast<float>(t));
  write_file(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

io::PipelineConfig load_config(const std::string& path) {
  return io::parse_config(read_file(path));
}

bevodom::Trajectory load_trajectory(const std::string& path, io::TrajectoryFormat fmt) {
  try {
    return io::parse_trajectory(read_file(path), fmt);
  } catch (const bevodom::ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

std::vector<double> parse_reals(const std::string& list, std::size_t expected,
                                const char* what) {
  std::vector<double> out;
  for (auto f : io::split_csv(list)) out.push_back(io::parse_double(f, 0));
  if (expected != 0 && out.size() != expected) {
    throw CLI::ValidationError(what, "expected " + std::to_string(expected) +
                                         " comma-separated numbers");
  }
  return out;
}

json grid_json(const bevodom::BevGridSpec& g) {
  return {{"h", g.height_px},
          {"w", g.width_px},
          {"resolution_m", g.resolution_m},
          {"origin", {g.origin_x_px, g.origin_y_px}}};
}

json pose2_json(const bevodom::Pose2& p) {
  return {{"theta", p.theta}, {"tx", p.tx}, {"ty", p.ty}};
}

json shape_json(const bevodom::Shape& s) { return json(s); }

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

struct FlowMakeArgs {
  std::string pose;
  std::string rel_from;
  std::string indices;
  std::string format = "kitti";
  std::string config;
  std::string out;
  std::string csv;
};

void run_flow_make(const FlowMakeArgs& a) {
  const io::PipelineConfig cfg = load_config(a.config);
  bevodom::Pose2 pose;
  if (!a.pose.empty()) {
    const auto v = parse_reals(a.pose, 3, "--pose");
    pose = bevodom::Pose2(v[0], v[1], v[2]);
  } else {
    const auto traj = load_trajectory(a.rel_from, io::trajectory_format_from_string(a.format));
    const auto idx = parse_reals(a.indices, 2, "--indices");
    const auto i = static_cast<std::size_t>(idx[0]);
    const auto j = static_cast<std::size_t>(idx[1]);
    if (idx[0] < 0 || idx[1] < 0 || double(i) != idx[0] || double(j) != idx[1] ||
        i >= traj.size() || j >= traj.size()) {
      throw Error("--indices out of range for a trajectory of " +
                  std::to_string(traj.size()) + " frames");
    }
    pose = bevodom::pose3_to_pose2(bevodom::relative_pose(traj[i].pose, traj[j].pose));
  }
  const bevodom::FlowField flow = bevodom::construct_flow_gt(pose, cfg.grid);
  write_tensor(a.out, flow.tensor());
  if (!a.csv.empty()) write_file(a.csv, bevodom::flow_to_csv(flow));
  double max_abs = 0.0;
  for (double x : flow.tensor().values()) max_abs = std::max(max_abs, std::abs(x));
  emit({{"command", "flow-make"},
        {"grid", grid_json(cfg.grid)},
        {"pose", pose2_json(pose)},
        {"max_abs_flow_px", max_abs},
        {"out", a.out}});
}

struct PoseFromFlowArgs {
  std::string flow;
  std::string config;
  std::string weights;
};

void run_pose_from_flow(const PoseFromFlowArgs& a) {
  const io::PipelineConfig cfg = load_config(a.config);
  const bevodom::FlowField flow(cfg.grid, read_tensor(a.flow));
  std::optional<bevodom::TensorD> w;
  if (!a.weights.empty()) w = read_tensor(a.weights);
  const bevodom::Pose2 p = bevodom::solve_pose_from_flow(flow, w ? &*w : nullptr);
  emit(pose2_json(p));
}

struct EvalArgs {
  std::string est;
  std::string gt;
  std::string format = "kitti";
  std::string align = "se3";
  bool scale_init = false;
  std::string lengths;
  std::string scale_curve;
  double segment_m = 10.0;
  std::optional<double> assoc_max_dt;
  std::size_t stride = 1;
  std::string out;
};

void run_eval(const EvalArgs& a) {
  const auto fmt = io::trajectory_format_from_string(a.format);
  bevodom::Trajectory est = load_trajectory(a.est, fmt);
  bevodom::Trajectory gt = load_trajectory(a.gt, fmt);
  if (a.assoc_max_dt) {
    const auto pairs = io::associate_by_timestamp(est, gt, *a.assoc_max_dt);
    if (pairs.size() < 2) {
      throw Error("timestamp association matched " + std::to_string(pairs.size()) + " frames");
    }
    std::tie(est, gt) = io::apply_association(est, gt, pairs);
    std::cerr << "associated " << pairs.size() << " frame pairs\n";
  } else if (est.size() != gt.size()) {
    throw Error("est has " + std::to_string(est.size()) + " frames, gt has " +
                std::to_string(gt.size()) + "; pass --assoc-max-dt to match by timestamp");
  }

  bevodom::EvaluationOptions opts;
  if (!a.lengths.empty()) opts.lengths = parse_reals(a.lengths, 0, "--lengths");
  opts.align_mode = a.align == "sim3" ? bevodom::AlignMode::sim3 : bevodom::AlignMode::se3;
  opts.scale_init_10m = a.scale_init;
  opts.stride = a.stride;
  const bevodom::MetricsReport r = bevodom::evaluate(est, gt, opts);

  json per = json::array();
  for (const auto& l : r.per_length) {
    per.push_back({{"length_m", l.length_m},
                   {"rte_percent", l.rte_percent},
                   {"rre_deg_per_100m", l.rre_deg_per_100m},
                   {"segments", l.segments}});
  }
  const json report = {{"rte_percent", r.rte_percent},
                       {"rre_deg_per_100m", r.rre_deg_per_100m},
                       {"ate_se3_m", r.ate_se3_m},
                       {"ate_sim3_m", r.ate_sim3_m},
                       {"align", a.align},
                       {"scale_init", r.scale_init},
                       {"frames", r.frames},
                       {"per_length", per}};

  if (!a.scale_curve.empty()) {
    const bevodom::Trajectory scaled =
        a.scale_init ? bevodom::scale_trajectory(est, r.scale_init) : est;
    std::string csv = "segment_index,s_i\n";
    for (const auto& s : bevodom::log_scale_curve(scaled, gt, a.segment_m)) {
      csv += std::to_string(s.index) + ',' +
             (s.valid ? io::format_double(s.log2_scale) : std::string("nan")) + '\n';
    }
    write_file(a.scale_curve, csv);
  }
  if (!a.out.empty()) write_file(a.out, report.dump(2) + "\n");
  emit(report);
}

struct SampleArgs {
  std::string traj;
  std::string format = "kitti";
  std::string config;
  std::size_t draws = 1000;
  std::string out;
};

void run_sample_pairs(const SampleArgs& a, const Globals& g) {
  bevodom::SamplerConfig scfg;
  if (!a.config.empty()) scfg = load_config(a.config).sampler;
  const auto traj = load_trajectory(a.traj, io::trajectory_format_from_string(a.format));
  std::vector<bevodom::FrameIndex> seq;
  seq.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    seq.push_back({std::int64_t(i), traj[i].timestamp, traj[i].pose});
  }
  const auto anchors = bevodom::build_pair_lists(seq, scfg);
  std::vector<std::size_t> usable;
  std::size_t high_total = 0;
  std::size_t standard_total = 0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    high_total += anchors[i].lists.high.size();
    standard_total += anchors[i].lists.standard.size();
    if (!anchors[i].lists.empty()) usable.push_back(i);
  }
  if (high_total == 0) {
    std::cerr << "warning: L_high is empty; every draw comes from the standard list\n";
  }
  if (usable.empty()) throw bevodom::NoPairsError("no anchor has any valid pair");

  bevodom::SamplerRng rng(g.seed);
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  std::vector<bevodom::PairRecord> log;
  log.reserve(a.draws);
  std::size_t high_draws = 0;
  for (std::size_t k = 0; k < a.draws; ++k) {
    const auto& lists = anchors[usable[pick(rng)]].lists;
    const bevodom::PairRecord r = bevodom::sample_pair(lists, rng, scfg.high_fraction);
    high_draws += bevodom::classify_pair(r.yaw_diff_deg, r.displacement_m, scfg) ==
                  bevodom::PairClass::high;
    log.push_back(r);
  }
  if (!a.out.empty()) write_file(a.out, bevodom::pairs_to_csv(log));

  json summary = {{"command", "sample-pairs"},
                  {"frames", traj.size()},
                  {"high_pairs", high_total},
                  {"standard_pairs", standard_total},
                  {"draws", a.draws},
                  {"high_draws", high_draws},
                  {"high_fraction", a.draws ? double(high_draws) / double(a.draws) : 0.0},
                  {"seed", g.seed}};
  if (!log.empty()) {
    const auto stats = bevodom::sampling_stats(log, bevodom::linear_edges(0.0, scfg.high_deg, 9),
                                               bevodom::linear_edges(0.0, scfg.max_disp_m, 8));
    auto hist = [](const bevodom::Histogram& h) {
      return json{{"edges", h.edges}, {"counts", h.counts},
                  {"underflow", h.underflow}, {"overflow", h.overflow}};
    };
    summary["yaw_deg_histogram"] = hist(stats.yaw_deg);
    summary["displacement_m_histogram"] = hist(stats.displacement_m);
  }
  emit(summary);
}

struct CorrelateArgs {
  std::string a;
  std::string b;
  int radius = 5;
  bool normalize = false;
  std::string out;
};

void run_correlate(const CorrelateArgs& a, const Globals& g) {
  const bevodom::FeatureMap fa(read_tensor(a.a), "t");
  const bevodom::FeatureMap fb(read_tensor(a.b), "t+1");
  const auto vol = bevodom::local_correlation(
      fa, fb, a.radius, {.normalize = a.normalize, .exec = g.exec()});
  write_tensor(a.out, vol.data);
  emit({{"command", "correlate"},
        {"radius", a.radius},
        {"channels", vol.data.dim(0)},
        {"shape", shape_json(vol.data.shape())},
        {"out", a.out}});
}

struct LssArgs {
  std::string features;
  std::string depth;
  std::string config;
  std::string out;
};

void run_lss_project(const LssArgs& a, const Globals& g) {
  const io::PipelineConfig cfg = load_config(a.config);
  const bevodom::TensorD features = read_tensor(a.features);
  const bevodom::DepthDistribution depth(read_tensor(a.depth), cfg.depth_bins.bins());
  const auto res = bevodom::project_channels(features, depth, cfg.camera, cfg.grid, g.exec());
  write_tensor(a.out, res.bev);
  emit({{"command", "lss-project"},
        {"shape", shape_json(res.bev.shape())},
        {"dropped_points", res.dropped},
        {"out", a.out}});
}

struct SynthArgs {
  std::string spec;
  std::string out_gt;
  std::string out_est;
  std::string format = "tum";
};

void run_synth(const SynthArgs& a, const Globals& g) {
  io::SynthSpec spec = io::parse_synth_spec(read_file(a.spec));
  if (g.seed_given) spec.seed = g.seed;
  const auto [gt, est] = io::synth_trajectory(spec);
  const auto fmt = io::trajectory_format_from_string(a.format);
  write_file(a.out_gt, io::write_trajectory(gt, fmt));
  write_file(a.out_est, io::write_trajectory(est, fmt));
  const auto d = gt.path_distances();
  emit({{"command", "synth"},
        {"frames", gt.size()},
        {"duration_s", gt.entries.back().timestamp},
        {"path_length_m", d.back()},
        {"seed", spec.seed}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BEV visual odometry toolkit: flow fields, correlation, LSS projection, "
               "pair sampling and trajectory evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--threads", g.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", g.seed, "seed for every random draw");

  const auto formats = CLI::IsMember({"kitti", "tum", "csv"});

  FlowMakeArgs fm;
  auto* flow_make = app.add_subcommand("flow-make", "ground-truth BEV flow for a planar motion");
  auto* pose_opt = flow_make->add_option("--pose", fm.pose, "\"theta,tx,ty\" (rad, m, m)");
  auto* rel_opt = flow_make->add_option("--rel-from", fm.rel_from, "trajectory file")
                      ->check(CLI::ExistingFile);
  auto* idx_opt = flow_make->add_option("--indices", fm.indices, "\"i,j\": motion from frame i to j");
  flow_make->add_option("--format", fm.format, "trajectory format")->check(formats);
  flow_make->add_option("--config", fm.config)->required()->check(CLI::ExistingFile);
  flow_make->add_option("--out", fm.out, "output BVT1 (2 x H x W)")->required();
  flow_make->add_option("--csv", fm.csv, "also write u,v,du,dv CSV");
  pose_opt->excludes(rel_opt);
  rel_opt->needs(idx_opt);
  idx_opt->needs(rel_opt);

  PoseFromFlowArgs pf;
  auto* pose_from_flow = app.add_subcommand("pose-from-flow", "recover (theta, tx, ty) from a flow file");
  pose_from_flow->add_option("--flow", pf.flow)->required()->check(CLI::ExistingFile);
  pose_from_flow->add_option("--config", pf.config)->required()->check(CLI::ExistingFile);
  pose_from_flow->add_option("--weights", pf.weights, "optional H x W BVT1 weights")
      ->check(CLI::ExistingFile);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval-traj", "RTE / RRE / ATE of an estimate against ground truth");
  eval->add_option("--est", ev.est)->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ev.gt)->required()->check(CLI::ExistingFile);
  eval->add_option("--format", ev.format)->check(formats);
  eval->add_option("--align", ev.align, "alignment before RTE/RRE")
      ->check(CLI::IsMember({"se3", "sim3"}));
  eval->add_flag("--scale-init-10m", ev.scale_init, "rescale est by the first 10 m of gt");
  eval->add_option("--lengths", ev.lengths, "segment lengths in m, comma-separated");
  eval->add_option("--scale-curve", ev.scale_curve, "write log2 scale curve CSV");
  eval->add_option("--segment-m", ev.segment_m, "scale curve segment length")
      ->check(CLI::PositiveNumber);
  eval->add_option("--assoc-max-dt", ev.assoc_max_dt, "match frames by timestamp");
  eval->add_option("--stride", ev.stride, "start-frame stride")->check(CLI::PositiveNumber);
  eval->add_option("--out", ev.out, "also write the JSON report here");

  SampleArgs sp;
  auto* sample = app.add_subcommand("sample-pairs", "mine and draw training pairs");
  sample->add_option("--traj", sp.traj)->required()->check(CLI::ExistingFile);
  sample->add_option("--format", sp.format)->check(formats);
  sample->add_option("--config", sp.config, "sampler thresholds")->check(CLI::ExistingFile);
  sample->add_option("--draws", sp.draws);
  sample->add_option("--out", sp.out, "draw log CSV");

  CorrelateArgs co;
  auto* correlate = app.add_subcommand("correlate", "local correlation volume of two feature maps");
  correlate->add_option("--a", co.a, "C x H x W BVT1, frame t")->required()->check(CLI::ExistingFile);
  correlate->add_option("--b", co.b, "C x H x W BVT1, frame t+1")->required()->check(CLI::ExistingFile);
  correlate->add_option("--radius", co.radius)->check(CLI::NonNegativeNumber);
  correlate->add_flag("--normalize", co.normalize, "divide by the channel count");
  correlate->add_option("--out", co.out)->required();

  LssArgs ls;
  auto* lss = app.add_subcommand("lss-project", "lift-splat image-plane channels to the BEV grid");
  lss->add_option("--features", ls.features, "C x H x W BVT1")->required()->check(CLI::ExistingFile);
  lss->add_option("--depth", ls.depth, "D x H x W BVT1")->required()->check(CLI::ExistingFile);
  lss->add_option("--config", ls.config)->required()->check(CLI::ExistingFile);
  lss->add_option("--out", ls.out)->required();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "synthetic ground truth and estimate trajectories");
  synth->add_option("--spec", sy.spec, "JSON motion spec")->required()->check(CLI::ExistingFile);
  synth->add_option("--out-gt", sy.out_gt)->required();
  synth->add_option("--out-est", sy.out_est)->required();
  synth->add_option("--format", sy.format)->check(formats);

  try {
    app.parse(argc, argv);
    if (*flow_make && fm.pose.empty() && fm.rel_from.empty()) {
      throw CLI::RequiredError("flow-make needs --pose or --rel-from with --indices");
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*flow_make) run_flow_make(fm);
    else if (*pose_from_flow) run_pose_from_flow(pf);
    else if (*eval) run_eval(ev);
    else if (*sample) run_sample_pairs(sp, g);
    else if (*correlate) run_correlate(co, g);
    else if (*lss) run_lss_project(ls, g);
    else if (*synth) run_synth(sy, g);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
