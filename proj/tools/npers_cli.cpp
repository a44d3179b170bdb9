/**
 * Copyright 2026 The npers Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// npers: command-line front end for neural persistence computations.
//
// Exit codes: 0 success, 1 usage, 2 input format, 3 degenerate network.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "npers/conv.hpp"
#include "npers/earlystop.hpp"
#include "npers/experiments.hpp"
#include "npers/io.hpp"
#include "npers/measures.hpp"
#include "npers/mlp.hpp"

namespace fs = std::filesystem;
using npers::io::Json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitDegenerate = 3;

void emit(const Json& j, const std::string& out_file) {
  const std::string text = npers::io::dump_json(j) + "\n";
  if (out_file.empty()) {
    std::cout << text;
  } else {
    npers::io::write_file_atomic(out_file, text);
  }
}

npers::EssentialPolicy parse_policy(const std::string& s) {
  return s == "zero" ? npers::EssentialPolicy::death_zero : npers::EssentialPolicy::skip;
}

Json bounds_json(const npers::BoundsPair& b) {
  Json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  return j;
}

// --- compute ---------------------------------------------------------------

struct ComputeArgs {
  std::string snapshot;
  std::vector<std::string> matrices;
  double p = 2.0;
  std::string essential = "skip";
  bool per_layer = false;
  bool bounds = false;
  std::string out;
};

int run_compute(const ComputeArgs& a) {
  npers::NetworkSnapshot snap;
  if (!a.snapshot.empty()) {
    snap = npers::io::load_snapshot(a.snapshot);
  } else {
    for (const auto& m : a.matrices) snap.layers.push_back(npers::io::load_dense_layer(m));
  }
  if (snap.layers.empty()) throw npers::FormatError("snapshot has no layers");
  const auto policy = parse_policy(a.essential);
  const double global_max = snap.global_max_abs();

  Json j;
  j["format"] = "np-report-v1";
  j["step"] = snap.step;
  j["p"] = a.p;
  j["essential"] = a.essential;
  j["layer_count"] = snap.layers.size();
  j["global_max"] = global_max;
  j["mean_normalized_np"] = npers::mean_normalized_neural_persistence(snap, a.p, policy);
  if (a.per_layer || a.bounds) {
    Json layers = Json::array();
    for (std::size_t k = 0; k < snap.layers.size(); ++k) {
      const auto m = npers::measure_layer(snap.layers[k], global_max, a.p, policy);
      Json l;
      l["index"] = k;
      l["rows"] = m.out_count;
      l["cols"] = m.in_count;
      l["finite_points"] = m.finite_points;
      l["essential_count"] = m.essential_count;
      l["np"] = m.np;
      l["normalized_np"] = m.normalized_np;
      if (a.bounds) {
        Json b;
        b["theoretical"] = bounds_json(m.theoretical);
        b["empirical"] = bounds_json(m.empirical);
        l["bounds"] = std::move(b);
      }
      layers.push_back(std::move(l));
    }
    j["layers"] = std::move(layers);
  }
  emit(j, a.out);
  return 0;
}

// --- conv ------------------------------------------------------------------

struct ConvArgs {
  std::vector<std::string> filters;
  std::string input;
  std::size_t pad = 0;
  std::string method = "both";
  double p = 2.0;
  int repeat = 1;
  std::string out;
};

npers::ConvGeometry parse_geometry(const std::string& s, std::size_t pad) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw npers::InvalidArgument("--input must look like HxW");
  try {
    std::size_t used_h = 0, used_w = 0;
    const auto h = std::stoul(s.substr(0, x), &used_h);
    const auto w = std::stoul(s.substr(x + 1), &used_w);
    if (used_h != x || used_w != s.size() - x - 1) throw std::invalid_argument("");
    return {h, w, pad};
  } catch (const std::exception&) {
    throw npers::InvalidArgument("--input must look like HxW");
  }
}

int run_conv(const ConvArgs& a) {
  const auto geo = parse_geometry(a.input, a.pad);
  std::vector<npers::ConvFilter> filters;
  for (const auto& f : a.filters) filters.push_back(npers::io::load_filter(f));
  const bool exact = a.method == "exact" || a.method == "both";
  const bool approx = a.method == "approx" || a.method == "both";

  using clock = std::chrono::steady_clock;
  auto timed = [&](auto&& fn) {
    double value = 0.0;
    const auto t0 = clock::now();
    for (int r = 0; r < a.repeat; ++r) value = fn();
    const std::chrono::duration<double> dt = clock::now() - t0;
    return std::pair{value, dt.count() / a.repeat};
  };

  Json j;
  j["format"] = "np-conv-v1";
  j["input"] = {{"h", geo.h_in}, {"w", geo.w_in}};
  j["padding"] = geo.padding;
  j["p"] = a.p;
  Json list = Json::array();
  double sum_exact = 0.0, sum_approx = 0.0;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const auto& f = filters[i];
    geo.validate(f);
    const double root = std::pow(static_cast<double>(geo.tuple_count(f) - 1), 1.0 / a.p);
    Json e;
    e["index"] = i;
    e["rows"] = f.rows;
    e["cols"] = f.cols;
    e["m"] = geo.input_neurons();
    e["n"] = geo.output_neurons(f);
    e["tau"] = geo.tuple_count(f);
    if (exact) {
      const auto [v, secs] = timed([&] { return npers::conv_np_exact(f, geo, a.p); });
      e["exact"] = {{"np", v}, {"normalized", v / root}, {"seconds", secs}};
      sum_exact += v / root;
    }
    if (approx) {
      const auto [v, secs] = timed([&] { return npers::conv_np_approx(f, geo, a.p); });
      e["approx"] = {{"np", v}, {"normalized", v / root}, {"seconds", secs}};
      sum_approx += v / root;
    }
    list.push_back(std::move(e));
  }
  j["filters"] = std::move(list);
  Json mean;
  const auto n = static_cast<double>(filters.size());
  if (exact) mean["exact"] = sum_exact / n;
  if (approx) mean["approx"] = sum_approx / n;
  j["layer_mean"] = std::move(mean);
  emit(j, a.out);
  return 0;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::vector<std::string> np;
  std::vector<std::string> val_loss;
  std::vector<std::string> accuracy;
  int epochs = 0;
  int steps_per_epoch = 4;
  std::string out;
};

npers::MetricTrace load_metric(const std::string& path, const char* metric) {
  const auto table = npers::io::load_traces(path);
  if (!table.contains(metric)) {
    throw npers::FormatError(path + ": no samples for metric '" + metric + "'");
  }
  return table.trace(metric);
}

Json quadrants_json(const npers::QuadrantCounts& q) {
  Json j;
  j["Q1"] = q.q1;
  j["Q2"] = q.q2;
  j["Q3"] = q.q3;
  j["Q4"] = q.q4;
  j["boundary"] = q.boundary;
  return j;
}

Json grid_summary_json(const npers::StopGridResult& grid) {
  const auto& s = grid.summary;
  Json j;
  j["format"] = "np-grid-summary-v1";
  j["epochs"] = grid.epochs;
  j["steps_per_epoch"] = grid.steps_per_epoch;
  j["runs"] = grid.runs;
  j["cells"] = s.cells;
  j["common_cells"] = s.common_cells;
  j["barycentre"] = {{"delta_epoch", s.barycentre.delta_epoch},
                     {"delta_accuracy", s.barycentre.delta_accuracy}};
  j["common_barycentre"] = {{"delta_epoch", s.common_barycentre.delta_epoch},
                            {"delta_accuracy", s.common_barycentre.delta_accuracy}};
  j["quadrants"] = quadrants_json(s.quadrants);
  j["common_quadrants"] = quadrants_json(s.common_quadrants);
  j["triggered_cells"] = {{"np", s.np_triggered_cells}, {"val_loss", s.loss_triggered_cells}};
  // Trigger counts per cell, rows indexed by burn-in, columns by patience - 1.
  Json np_triggers = Json::array(), loss_triggers = Json::array();
  for (int b = 0; b < grid.epochs; ++b) {
    Json np_row = Json::array(), loss_row = Json::array();
    for (int g = 1; g <= grid.epochs; ++g) {
      np_row.push_back(grid.cell(b, g).np_triggers);
      loss_row.push_back(grid.cell(b, g).loss_triggers);
    }
    np_triggers.push_back(std::move(np_row));
    loss_triggers.push_back(std::move(loss_row));
  }
  j["triggers"] = {{"np", std::move(np_triggers)}, {"val_loss", std::move(loss_triggers)}};
  return j;
}

std::string grid_csv(const npers::StopGridResult& grid) {
  using npers::io::format_double;
  std::string out =
      "burn_in,patience,common,np_stop_epoch,loss_stop_epoch,np_accuracy,loss_accuracy,"
      "delta_epoch,delta_accuracy,np_triggers,loss_triggers,quadrant\n";
  for (const auto& c : grid.cells) {
    out += std::to_string(c.burn_in) + "," + std::to_string(c.patience) + "," +
           (c.common ? "1" : "0") + "," + format_double(c.np_stop_epoch) + "," +
           format_double(c.loss_stop_epoch) + "," + format_double(c.np_accuracy) + "," +
           format_double(c.loss_accuracy) + "," + format_double(c.delta_epoch) + "," +
           format_double(c.delta_accuracy) + "," + std::to_string(c.np_triggers) + "," +
           std::to_string(c.loss_triggers) + "," + npers::to_string(c.quadrant) + "\n";
  }
  return out;
}

int run_simulate(const SimulateArgs& a) {
  if (a.np.size() != a.val_loss.size() || a.np.size() != a.accuracy.size()) {
    throw npers::InvalidArgument("--np, --val-loss and --accuracy need the same number of files");
  }
  std::vector<npers::RunTraces> runs;
  for (std::size_t r = 0; r < a.np.size(); ++r) {
    runs.push_back({load_metric(a.np[r], "np_mean_normalized"), load_metric(a.val_loss[r], "val_loss"),
                    load_metric(a.accuracy[r], "test_accuracy")});
  }
  const auto grid = npers::simulate_grid(runs, a.epochs, a.steps_per_epoch);
  const Json summary = grid_summary_json(grid);
  if (!a.out.empty()) {
    npers::io::write_file_atomic(fs::path(a.out) / "grid.csv", grid_csv(grid));
    npers::io::write_file_atomic(fs::path(a.out) / "summary.json", npers::io::dump_json(summary) + "\n");
  }
  std::cout << npers::io::dump_json(summary) << "\n";
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string preset = "blobs";
  std::vector<std::size_t> arch;
  std::string init = "xavier";
  double eta = 0.1;
  int epochs = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string optimizer = "sgd";
  std::size_t batch_size = 32;
  std::size_t samples = 1000;
  std::size_t dims = 20;
  std::size_t classes = 4;
  int interval = 1;
};

int run_train(const TrainArgs& a) {
  npers::DatasetOptions opts;
  opts.samples = a.samples;
  opts.dims = a.dims;
  opts.classes = a.classes;
  opts.seed = a.seed;
  const auto data = npers::make_dataset(npers::parse_preset(a.preset), opts);

  npers::MlpSpec spec;
  spec.layer_sizes.push_back(data.dims);
  spec.layer_sizes.insert(spec.layer_sizes.end(), a.arch.begin(), a.arch.end());
  spec.layer_sizes.push_back(data.classes);

  npers::TrainConfig config;
  config.learning_rate = a.eta;
  config.epochs = a.epochs;
  config.batch_size = a.batch_size;
  config.seed = a.seed;
  config.snapshot_interval = a.interval;
  if (a.optimizer == "adam") config.optimizer.kind = npers::OptimizerConfig::Kind::adam;

  const auto result = npers::train(spec, npers::parse_init_scheme(a.init), data, config);

  const fs::path dir(a.out);
  for (const auto& snap : result.snapshots) {
    char name[64];
    std::snprintf(name, sizeof(name), "step_%06lld.json", static_cast<long long>(snap.step));
    npers::io::save_snapshot(snap, dir / "snapshots" / name, true);
  }
  npers::io::save_traces(result.traces, dir / "trace.csv");

  Json j;
  j["format"] = "np-train-v1";
  j["layer_sizes"] = spec.layer_sizes;
  j["snapshots"] = result.snapshots.size();
  j["diverged"] = result.diverged;
  if (result.diverged) j["diverged_at_step"] = result.diverged_at_step;
  Json fin;
  for (const char* m : {"val_accuracy", "test_accuracy", "np_mean_normalized"}) {
    fin[m] = result.traces.find(m)->back().value;
  }
  j["final"] = std::move(fin);
  const std::string text = npers::io::dump_json(j) + "\n";
  npers::io::write_file_atomic(dir / "summary.json", text);
  std::cout << text;
  return 0;
}

// --- regimes / depth -------------------------------------------------------

struct RegimeArgs {
  int runs = 50;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
};

Json summary_json(const npers::stats::Summary& s) {
  Json j;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["q1"] = s.q1;
  j["q3"] = s.q3;
  return j;
}

int run_regimes(const RegimeArgs& a) {
  npers::RegimeOptions opts;
  opts.threads = a.threads;
  const auto result = npers::regime_experiment(a.runs, a.seed, opts);
  using npers::io::format_double;
  std::string csv = "label,run,np,lower_bound,accuracy\n";
  Json j;
  j["format"] = "np-regimes-v1";
  j["runs"] = a.runs;
  j["seed"] = a.seed;
  Json labels;
  for (const auto& s : result.samples) {
    for (std::size_t r = 0; r < s.np.size(); ++r) {
      csv += s.label + "," + std::to_string(r) + "," + format_double(s.np[r]) + "," +
             format_double(s.lower_bound[r]) + "," +
             (s.accuracy.empty() ? std::string() : format_double(s.accuracy[r])) + "\n";
    }
    Json l = summary_json(s.summary());
    l["lower_bound_median"] = npers::stats::median(s.lower_bound);
    if (!s.accuracy.empty()) l["accuracy_median"] = npers::stats::median(s.accuracy);
    labels[s.label] = std::move(l);
  }
  j["regimes"] = std::move(labels);
  const std::string text = npers::io::dump_json(j) + "\n";
  if (!a.out.empty()) {
    npers::io::write_file_atomic(fs::path(a.out) / "regimes.csv", csv);
    npers::io::write_file_atomic(fs::path(a.out) / "summary.json", text);
  }
  std::cout << text;
  return 0;
}

struct DepthArgs {
  std::size_t width = 20;
  std::vector<std::size_t> depths{1, 2, 3};
  int runs = 20;
  std::uint64_t seed = 0;
  int epochs = 15;
  unsigned threads = 1;
  std::string out;
};

int run_depth(const DepthArgs& a) {
  npers::DepthOptions opts;
  opts.epochs = a.epochs;
  opts.threads = a.threads;
  const auto results = npers::depth_variability(a.width, a.depths, a.runs, a.seed, opts);
  Json j;
  j["format"] = "np-depth-v1";
  j["width"] = a.width;
  j["runs"] = a.runs;
  Json list = Json::array();
  for (const auto& r : results) {
    Json e = summary_json(r.summary);
    e["depth"] = r.depth;
    e["iqr"] = r.dispersion();
    e["values"] = r.values;
    list.push_back(std::move(e));
  }
  j["depths"] = std::move(list);
  emit(j, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural persistence of network weights"};
  app.require_subcommand(1);

  ComputeArgs compute;
  auto* c = app.add_subcommand("compute", "Per-layer and mean normalised neural persistence");
  auto* snap_opt = c->add_option("--snapshot", compute.snapshot, "np-snapshot-v1 JSON file");
  auto* mat_opt = c->add_option("--matrix", compute.matrices,
                                "Delimited dense matrix (rows = outputs), repeat for more layers");
  snap_opt->excludes(mat_opt);
  c->add_option("--p", compute.p, "Norm exponent")->check(CLI::Range(1.0, 1e6));
  c->add_option("--essential", compute.essential, "Surviving components: skip or zero")
      ->check(CLI::IsMember({"skip", "zero"}));
  c->add_flag("--per-layer", compute.per_layer, "Report every layer");
  c->add_flag("--bounds", compute.bounds, "Report theoretical and empirical bounds");
  c->add_option("--out", compute.out, "Write JSON here instead of stdout");

  ConvArgs conv;
  auto* cv = app.add_subcommand("conv", "Neural persistence of convolution filters");
  cv->add_option("--filter", conv.filters, "Delimited filter matrix, repeatable")->required();
  cv->add_option("--input", conv.input, "Input size HxW")->required();
  cv->add_option("--pad", conv.pad, "Symmetric zero padding");
  cv->add_option("--method", conv.method, "exact, approx or both")
      ->check(CLI::IsMember({"exact", "approx", "both"}));
  cv->add_option("--p", conv.p, "Norm exponent")->check(CLI::Range(1.0, 1e6));
  cv->add_option("--repeat", conv.repeat, "Repetitions for timing")->check(CLI::PositiveNumber);
  cv->add_option("--out", conv.out, "Write JSON here instead of stdout");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Early-stopping grid: persistence vs validation loss");
  s->add_option("--np", sim.np, "Trace file(s) with np_mean_normalized")->required();
  s->add_option("--val-loss", sim.val_loss, "Trace file(s) with val_loss")->required();
  s->add_option("--accuracy", sim.accuracy, "Trace file(s) with test_accuracy")->required();
  s->add_option("--epochs", sim.epochs, "Epoch budget G")->required()->check(CLI::PositiveNumber);
  s->add_option("--steps-per-epoch", sim.steps_per_epoch, "Samples per epoch")
      ->check(CLI::PositiveNumber);
  s->add_option("--out", sim.out, "Directory for grid.csv and summary.json");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train an MLP on a synthetic dataset");
  t->add_option("--preset", tr.preset, "blobs, rings or xor")->check(CLI::IsMember({"blobs", "rings", "xor"}));
  t->add_option("--arch", tr.arch, "Hidden layer sizes, e.g. 20,20,20")->delimiter(',');
  t->add_option("--init", tr.init, "xavier, xavier_uniform, gaussian[:s], uniform[:a:b], beta[:a:b]");
  t->add_option("--eta", tr.eta, "Learning rate");
  t->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  t->add_option("--seed", tr.seed, "Seed");
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_option("--optimizer", tr.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
  t->add_option("--batch-size", tr.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  t->add_option("--samples", tr.samples, "Dataset size (<= 2000)");
  t->add_option("--dims", tr.dims, "Feature dimensions");
  t->add_option("--classes", tr.classes, "Classes (xor always uses 2)");
  t->add_option("--interval", tr.interval, "Snapshot interval in quarter epochs")
      ->check(CLI::PositiveNumber);

  RegimeArgs rg;
  auto* r = app.add_subcommand("regimes", "Persistence of trained, diverging and random perceptrons");
  r->add_option("--runs", rg.runs, "Runs per category (>= 10)");
  r->add_option("--seed", rg.seed, "Seed");
  r->add_option("--out", rg.out, "Directory for regimes.csv and summary.json");
  r->add_option("--threads", rg.threads, "Worker threads");

  DepthArgs dp;
  auto* d = app.add_subcommand("depth", "Spread of trained persistence across network depths");
  d->add_option("--width", dp.width, "Hidden layer width");
  d->add_option("--depths", dp.depths, "Hidden layer counts, e.g. 1,2,3")->delimiter(',');
  d->add_option("--runs", dp.runs, "Runs per depth");
  d->add_option("--seed", dp.seed, "Seed");
  d->add_option("--epochs", dp.epochs, "Training epochs");
  d->add_option("--threads", dp.threads, "Worker threads");
  d->add_option("--out", dp.out, "Write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (c->parsed()) {
      if (compute.snapshot.empty() && compute.matrices.empty()) {
        std::cerr << "compute: --snapshot or --matrix is required\n";
        return kExitUsage;
      }
      return run_compute(compute);
    }
    if (cv->parsed()) return run_conv(conv);
    if (s->parsed()) return run_simulate(sim);
    if (t->parsed()) return run_train(tr);
    if (r->parsed()) return run_regimes(rg);
    if (d->parsed()) return run_depth(dp);
  } catch (const npers::DegenerateNetwork& e) {
    std::cerr << "degenerate network: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const npers::FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const npers::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
