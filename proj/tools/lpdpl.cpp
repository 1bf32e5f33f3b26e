#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lpdpl/classifier.hpp"
#include "lpdpl/corpus.hpp"
#include "lpdpl/eval.hpp"
#include "lpdpl/image_codec.hpp"
#include "lpdpl/model_io.hpp"
#include "lpdpl/solver.hpp"

namespace fs = std::filesystem;
using namespace lpdpl;

namespace {

// Fixed formatting keeps the result CSVs byte-reproducible across reruns.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CommonOptions {
  std::string manifest_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  bool plots = false;
  Hyperparameters hp;
  double label_weight = 1.0;
};

int effective_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
}

void add_hyperparameter_flags(CLI::App* cmd, Hyperparameters& hp) {
  cmd->add_option("--m", hp.m, "Atoms per sub-dictionary");
  cmd->add_option("--lambda1", hp.lambda1, "Cross-class suppression weight");
  cmd->add_option("--lambda2", hp.lambda2, "Label-error weight");
  cmd->add_option("--lambda3", hp.lambda3, "Code-coupling weight");
  cmd->add_option("--gamma", hp.gamma, "Ridge jitter");
  cmd->add_option("--rho", hp.rho, "ADMM penalty");
  cmd->add_option("--iters", hp.outer_iters, "Outer iteration cap");
  cmd->add_option("--admm-iters", hp.admm_iters, "ADMM iteration cap");
  cmd->add_option("--tol", hp.tol, "Relative objective-decrease stop");
  cmd->add_option("--admm-tol", hp.admm_tol, "ADMM primal-residual stop");
  cmd->add_flag("--compat-a-update", hp.compat_printed_a_update,
                "Reproduce the uncorrected published A-update formula");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// "name=lo:hi:steps[:log|:lin]" (log-spaced by default) or "name=v1,v2,..."
SweepAxis parse_grid_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error("bad grid spec '" + spec + "': expected name=lo:hi:steps or name=v1,v2,...");
  SweepAxis axis;
  axis.param = spec.substr(0, eq);
  const std::string body = spec.substr(eq + 1);

  if (body.find(',') != std::string::npos) {
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) axis.values.push_back(std::stod(item));
    return axis;
  }

  std::vector<std::string> parts;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() == 1) {
    axis.values.push_back(std::stod(parts[0]));
    return axis;
  }
  if (parts.size() < 3 || parts.size() > 4)
    throw Error("bad grid spec '" + spec + "': expected name=lo:hi:steps[:log|:lin]");
  const double lo = std::stod(parts[0]);
  const double hi = std::stod(parts[1]);
  const int steps = std::stoi(parts[2]);
  const bool log_spaced = parts.size() < 4 || parts[3] == "log";
  if (steps < 1) throw Error("grid spec '" + spec + "': steps must be >= 1");
  if (steps == 1) {
    axis.values.push_back(lo);
    return axis;
  }
  if (log_spaced && (lo <= 0 || hi <= 0))
    throw Error("grid spec '" + spec + "': log spacing needs positive endpoints");
  for (int i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / (steps - 1);
    axis.values.push_back(log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                     : lo + t * (hi - lo));
  }
  axis.values.front() = lo;
  axis.values.back() = hi;
  return axis;
}

using Series = std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>;

// Minimal standalone SVG line plot; one polyline per series.
void write_svg_plot(const fs::path& path, const std::string& title, const Series& series,
                    bool log_x) {
  const int w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [name, pts] : series)
    for (auto [x, y] : pts) {
      const double xv = log_x ? std::log10(x) : x;
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) {
    const double xv = log_x ? std::log10(x) : x;
    return ml + (xv - xmin) / (xmax - xmin) * (w - ml - mr);
  };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf"};
  auto out = open_out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
      << "</text>\n"
      << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
      << "' stroke='black'/>\n"
      << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  int idx = 0;
  for (const auto& [name, pts] : series) {
    out << "<polyline fill='none' stroke='" << colors[idx % 7] << "' stroke-width='1.5' points='";
    for (auto [x, y] : pts) out << px(x) << "," << py(y) << " ";
    out << "'/>\n";
    if (series.size() > 1)
      out << "<text x='" << w - mr - 150 << "' y='" << mt + 16 * idx << "' font-size='11' fill='"
          << colors[idx % 7] << "'>" << name << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

ClassPartitionedDataset load_dataset(const CommonOptions& opt) {
  const CorpusManifest manifest = CorpusManifest::load(opt.manifest_path);
  return load_corpus(manifest, effective_workers(opt.workers));
}

int cmd_train(const CommonOptions& opt) {
  const auto dataset = load_dataset(opt);
  for (const auto& r : dataset.rejected)
    std::cerr << "warning: rejected blank sample " << r << "\n";

  const TrainResult result = train(dataset, opt.hp, opt.seed, effective_workers(opt.workers));

  fs::create_directories(opt.out_dir);
  save_model(result.model, fs::path(opt.out_dir) / "model.lpdpl");

  auto trace = open_out(fs::path(opt.out_dir) / "trace.csv");
  trace << "iteration,objective\n";
  for (std::size_t t = 0; t < result.trace.size(); ++t)
    trace << t << "," << fmt(result.trace[t]) << "\n";

  if (opt.plots) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t t = 0; t < result.trace.size(); ++t)
      pts.emplace_back(static_cast<double>(t), result.trace[t]);
    write_svg_plot(fs::path(opt.out_dir) / "trace.svg", "objective vs iteration",
                   {{"objective", pts}}, false);
  }

  std::cout << "model: " << (fs::path(opt.out_dir) / "model.lpdpl").string() << "\n"
            << "final objective: " << fmt(result.trace.back()) << "\n";
  return 0;
}

void write_report_files(const EvalReport& report, const std::vector<std::string>& class_names,
                        const FoldPlan& plan, const fs::path& out_dir) {
  fs::create_directories(out_dir);

  auto summary = open_out(out_dir / "summary.csv");
  summary << "scheme,folds,total_test,mean_accuracy,pooled_accuracy\n"
          << to_string(plan.scheme) << "," << report.num_folds() << ","
          << report.total_test_count() << "," << fmt(report.mean_accuracy()) << ","
          << fmt(report.pooled_accuracy()) << "\n";

  auto folds = open_out(out_dir / "folds.csv");
  folds << "fold,test_count,accuracy\n";
  for (int f = 0; f < report.num_folds(); ++f)
    folds << f << "," << plan.folds[f].test.size() << "," << fmt(report.fold_accuracies()[f])
          << "\n";

  auto confusion = open_out(out_dir / "confusion.csv");
  confusion << "target\\output";
  for (const auto& name : class_names) confusion << "," << name;
  confusion << "\n";
  for (int r = 0; r < report.confusion().rows(); ++r) {
    confusion << class_names[r];
    for (int c = 0; c < report.confusion().cols(); ++c)
      confusion << "," << report.confusion()(r, c);
    confusion << "\n";
  }

  // wall-clock values, intentionally kept out of the reproducible CSVs
  auto timing = open_out(out_dir / "timing.csv");
  timing << "feature_extract_ms_per_image,classify_ms_per_image\n"
         << fmt(report.feature_extract_ms) << "," << fmt(report.classify_ms) << "\n";
}

int cmd_eval(const CommonOptions& opt, const std::string& scheme, int folds) {
  const auto dataset = load_dataset(opt);
  const FoldPlan plan = make_folds(dataset, fold_scheme_from_string(scheme), folds, opt.seed);
  const EvalReport report = run_cv(dataset, plan, opt.hp, opt.seed,
                                   effective_workers(opt.workers), opt.label_weight);
  write_report_files(report, dataset.class_names(), plan, opt.out_dir);
  std::cout << "scheme: " << to_string(plan.scheme) << "\n"
            << "folds: " << report.num_folds() << "\n"
            << "mean accuracy: " << fmt(report.mean_accuracy()) << "\n"
            << "pooled accuracy: " << fmt(report.pooled_accuracy()) << "\n";
  return 0;
}

int cmd_classify(const std::string& model_path, const std::vector<std::string>& images,
                 double label_weight) {
  const TrainedModel model = load_model(model_path);
  for (const auto& image_path : images) {
    const GrayImage img = decode_image(image_path);
    const FeatureVector x = model.pipeline.run(img);
    const int label = classify(x, model, label_weight);
    const ClassScore s = score(x, model, label, label_weight);
    std::cout << image_path << "," << model.class_names[label] << "," << fmt(s.total) << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonOptions& opt, const std::string& scheme, int folds,
              const std::vector<std::string>& grid_specs) {
  const auto dataset = load_dataset(opt);
  const FoldPlan plan = make_folds(dataset, fold_scheme_from_string(scheme), folds, opt.seed);

  std::vector<SweepAxis> axes;
  for (const auto& spec : grid_specs) axes.push_back(parse_grid_spec(spec));
  const SweepTable table = sweep(dataset, plan, opt.hp, axes, opt.seed,
                                 effective_workers(opt.workers), opt.label_weight);

  fs::create_directories(opt.out_dir);
  auto csv = open_out(fs::path(opt.out_dir) / "sweep.csv");
  for (const auto& p : table.params) csv << p << ",";
  csv << "mean_accuracy,pooled_accuracy\n";
  for (const auto& row : table.rows) {
    for (double v : row.values) csv << fmt(v) << ",";
    csv << fmt(row.mean_accuracy) << "," << fmt(row.pooled_accuracy) << "\n";
  }

  if (opt.plots) {
    Series series;
    if (table.params.size() == 1) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& row : table.rows) pts.emplace_back(row.values[0], row.mean_accuracy);
      series.emplace_back(table.params[0], std::move(pts));
    } else {
      std::map<double, std::vector<std::pair<double, double>>> by_second;
      for (const auto& row : table.rows)
        by_second[row.values[1]].emplace_back(row.values[0], row.mean_accuracy);
      for (const auto& [v2, pts] : by_second)
        series.emplace_back(table.params[1] + "=" + fmt(v2), pts);
    }
    write_svg_plot(fs::path(opt.out_dir) / "sweep.svg", "mean accuracy vs " + table.params[0],
                   series, true);
  }

  std::cout << "sweep points: " << table.rows.size() << "\n";
  return 0;
}

int cmd_inspect(const std::string& model_path) {
  const TrainedModel model = load_model(model_path);
  std::cout << "feature_length: " << model.feature_length << "\n"
            << "atoms: " << model.atoms << "\n"
            << "classes: " << model.num_classes() << "\n"
            << "class_names:";
  for (const auto& name : model.class_names) std::cout << " " << name;
  std::cout << "\npreprocess: " << to_string(model.pipeline.preprocess) << "\n"
            << "features: " << to_string(model.pipeline.features) << "\n"
            << "hog: cell_size=" << model.pipeline.hog.cell_size
            << " num_bins=" << model.pipeline.hog.num_bins
            << " signed=" << (model.pipeline.hog.signed_orientations ? 1 : 0)
            << " soft_binning=" << (model.pipeline.hog.soft_binning ? 1 : 0) << "\n"
            << "lambda1: " << fmt(model.hp.lambda1) << "\n"
            << "lambda2: " << fmt(model.hp.lambda2) << "\n"
            << "lambda3: " << fmt(model.hp.lambda3) << "\n"
            << "gamma: " << fmt(model.hp.gamma) << "\n"
            << "rho: " << fmt(model.hp.rho) << "\n"
            << "outer_iters: " << model.hp.outer_iters << "\n";
  double max_norm = 0;
  for (const auto& cls : model.classes)
    for (Eigen::Index j = 0; j < cls.D.cols(); ++j)
      max_norm = std::max(max_norm, cls.D.col(j).norm());
  std::cout << "max_dictionary_column_norm: " << fmt(max_norm) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Labeled projective dictionary pair learning for handwritten numbers"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string scheme = "conventional";
  int folds = 10;
  std::string model_path;
  std::vector<std::string> images;
  std::vector<std::string> grid_specs;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", opt.manifest_path, "Corpus manifest (JSON)")->required();
    cmd->add_option("--out", opt.out_dir, "Output directory")->required();
    cmd->add_option("--seed", opt.seed, "Random seed");
    cmd->add_option("--workers", opt.workers, "Worker threads (0 = auto)");
    add_hyperparameter_flags(cmd, opt.hp);
  };

  CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write it with its trace");
  add_common(train_cmd);
  train_cmd->add_flag("--plots", opt.plots, "Also write an SVG of the objective trace");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Cross-validated evaluation with reports");
  add_common(eval_cmd);
  eval_cmd->add_option("--scheme", scheme, "conventional|within|between|fixed");
  eval_cmd->add_option("--folds", folds, "Fold count for the conventional scheme");
  eval_cmd->add_option("--label-weight", opt.label_weight,
                       "Weight of the label term at classification time");

  CLI::App* classify_cmd = app.add_subcommand("classify", "Label images with a trained model");
  classify_cmd->add_option("--model", model_path, "Model file")->required();
  classify_cmd->add_option("--label-weight", opt.label_weight,
                           "Weight of the label term at classification time");
  classify_cmd->add_option("images", images, "Image files")->required();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Parameter grid sweep");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--scheme", scheme, "conventional|within|between|fixed");
  sweep_cmd->add_option("--folds", folds, "Fold count for the conventional scheme");
  sweep_cmd
      ->add_option("--grid", grid_specs,
                   "name=lo:hi:steps[:log|:lin] or name=v1,v2,... (repeat for 2-D)")
      ->required();
  sweep_cmd->add_option("--label-weight", opt.label_weight,
                        "Weight of the label term at classification time");
  sweep_cmd->add_flag("--plots", opt.plots, "Also write an SVG of the sweep");

  CLI::App* inspect_cmd = app.add_subcommand("inspect", "Print model metadata");
  inspect_cmd->add_option("--model", model_path, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (train_cmd->parsed()) return cmd_train(opt);
    if (eval_cmd->parsed()) return cmd_eval(opt, scheme, folds);
    if (classify_cmd->parsed()) return cmd_classify(model_path, images, opt.label_weight);
    if (sweep_cmd->parsed()) return cmd_sweep(opt, scheme, folds, grid_specs);
    if (inspect_cmd->parsed()) return cmd_inspect(model_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
