// ocdl: train / eval / export / preprocess.
// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ocdl/csc.hpp"
#include "ocdl/dict_space.hpp"
#include "ocdl/image_io.hpp"
#include "ocdl/ingest.hpp"
#include "ocdl/parallel.hpp"
#include "ocdl/persist.hpp"
#include "ocdl/trainer.hpp"

namespace {

using namespace ocdl;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr std::size_t kSummaryWindow = 10;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SolverFlags {
  double rho0 = 10.0;
  int max_iter = 300;
  double eps = 1e-4;

  AdmmSettings settings() const {
    AdmmSettings s;
    s.rho0 = rho0;
    s.max_iter = max_iter;
    s.eps_abs = eps;
    s.eps_rel = eps;
    return s;
  }
};

struct PrepFlags {
  std::size_t height = 0;
  std::size_t width = 0;
  double highpass_reg = 5.0;
  bool no_highpass = false;
  bool allow_16bit = false;
  std::optional<std::uint64_t> shuffle_seed;

  PreprocessOptions options() const {
    if ((height == 0) != (width == 0)) throw ConfigError("--height and --width must be given together");
    PreprocessOptions o;
    o.height = height;
    o.width = width;
    o.highpass = !no_highpass;
    o.highpass_reg = highpass_reg;
    o.load.allow_16bit = allow_16bit;
    o.shuffle_seed = shuffle_seed;
    return o;
  }
};

void add_solver_flags(CLI::App* app, SolverFlags& f) {
  app->add_option("--rho0", f.rho0, "initial ADMM penalty")->capture_default_str();
  app->add_option("--max-iter", f.max_iter, "ADMM iteration cap")->capture_default_str();
  app->add_option("--eps", f.eps, "ADMM absolute and relative tolerance")->capture_default_str();
}

void add_prep_flags(CLI::App* app, PrepFlags& f, bool with_shuffle) {
  app->add_option("--height", f.height, "target lattice height (0 keeps image size)");
  app->add_option("--width", f.width, "target lattice width (0 keeps image size)");
  app->add_option("--highpass-reg", f.highpass_reg, "Tikhonov high-pass regularization")->capture_default_str();
  app->add_flag("--no-highpass", f.no_highpass, "skip the high-pass filter");
  app->add_flag("--allow-16bit", f.allow_16bit, "accept 16-bit inputs");
  if (with_shuffle) app->add_option("--shuffle-seed", f.shuffle_seed, "seeded permutation of the file order");
}

// key=value lines become "--key value" unless the flag is already on the
// command line. '#' starts a comment.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out = args;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    if (value == "true") {
      out.push_back(flag);
    } else if (value != "false") {
      out.push_back(flag);
      out.push_back(value);
    }
  }
  return out;
}

struct TrainFlags {
  std::string data_dir;
  std::size_t k = 16;
  std::size_t filter_size = 8;
  std::string algorithm = "alg2";
  double lambda_frac = 0.1;
  std::optional<double> lambda_abs;
  SolverFlags solver;
  std::uint64_t seed = 0;
  std::string checkpoint;
  std::size_t checkpoint_every = 0;
  std::string metrics;
  std::string resume;
  bool rescue = false;
  PrepFlags prep;
};

int cmd_train(const TrainFlags& f) {
  TrainOptions opts;
  opts.algorithm = parse_algorithm(f.algorithm);
  opts.filters = f.k;
  opts.filter_size = f.filter_size;
  opts.seed = f.seed;
  opts.csc = f.solver.settings();
  opts.dictionary = f.solver.settings();
  opts.lambda_frac = f.lambda_frac;
  opts.lambda_abs = f.lambda_abs;
  opts.rescue_dead_filters = f.rescue;
  if (opts.filters == 0) throw ConfigError("--k must be positive");
  if (opts.filter_size == 0) throw ConfigError("--filter-size must be positive");
  if (!(opts.lambda_frac > 0.0)) throw ConfigError("--lambda-frac must be positive");
  if (opts.lambda_abs && !(*opts.lambda_abs > 0.0)) throw ConfigError("--lambda-abs must be positive");
  try {
    opts.csc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  const DirectorySource source(f.data_dir, f.prep.options());
  std::optional<Trainer> trainer;
  std::size_t start = 0;
  if (!f.resume.empty()) {
    TrainerState state = load_checkpoint(f.resume);
    if (state.dictionary.size() != opts.filters || state.dictionary.side != opts.filter_size) {
      std::cerr << "note: filter count and size taken from checkpoint\n";
    }
    start = static_cast<std::size_t>(state.samples_seen());
    if (start > source.size()) throw ConfigError("checkpoint has seen more samples than the data directory holds");
    trainer.emplace(opts, std::move(state));
  }

  std::vector<double> objectives;
  ImagePlane last;
  for (std::size_t i = start; i < source.size(); ++i) {
    ImagePlane s = source.load(i);
    if (!trainer) trainer.emplace(opts, s.height(), s.width());
    const MetricsRow row = trainer->step(s);
    objectives.push_back(row.csc_objective);
    if (!f.metrics.empty()) append_metrics(row, f.metrics);
    if (!f.checkpoint.empty() && f.checkpoint_every > 0 && row.sample_index % f.checkpoint_every == 0) {
      save_checkpoint(trainer->state(), f.checkpoint);
    }
    last = std::move(s);
  }
  if (!trainer) throw ConfigError("nothing to train: all samples already consumed");
  if (!f.checkpoint.empty()) save_checkpoint(trainer->state(), f.checkpoint);

  const std::size_t window = std::min(kSummaryWindow, objectives.size());
  double trailing = 0.0;
  for (std::size_t i = objectives.size() - window; i < objectives.size(); ++i) trailing += objectives[i];
  std::cout << "algorithm " << algorithm_name(trainer->state().algorithm) << "\n"
            << "samples " << trainer->state().samples_seen() << "\n"
            << "lambda " << fmt(trainer->lambda()) << "\n";
  if (window > 0) {
    std::cout << "trailing_mean_objective " << fmt(trailing / static_cast<double>(window)) << " (last "
              << window << ")\n";
    // Last sample re-coded with the final dictionary; eval reproduces it.
    const auto coded = csc_solve(last, trainer->dictionary(), trainer->lambda(), opts.csc);
    std::cout << "final_objective " << fmt(csc_objective(last, trainer->dictionary(), coded.maps, trainer->lambda()))
              << "\n";
  }
  return 0;
}

struct EvalFlags {
  std::string checkpoint;
  std::string data_dir;
  std::optional<double> lambda;
  std::string csv;
  SolverFlags solver;
  PrepFlags prep;
};

int cmd_eval(const EvalFlags& f) {
  if (f.lambda && !(*f.lambda > 0.0)) throw ConfigError("--lambda must be positive");
  const TrainerState state = load_checkpoint(f.checkpoint);
  const DirectorySource source(f.data_dir, f.prep.options());
  const double lambda = f.lambda.value_or(state.lambda);
  if (!(lambda > 0.0)) throw ConfigError("checkpoint has no lambda; pass --lambda");
  const EvalReport report = evaluate(source, state.dictionary, lambda, f.solver.settings());
  std::ofstream csv;
  if (!f.csv.empty()) {
    csv.open(f.csv, std::ios::trunc);
    if (!csv) throw IoError("cannot write '" + f.csv + "'");
    csv << "path,objective\n";
  }
  for (std::size_t i = 0; i < source.size(); ++i) {
    std::cout << source.name(i) << " " << fmt(report.per_image_objective[i]) << "\n";
    if (csv.is_open()) csv << source.name(i) << "," << fmt(report.per_image_objective[i]) << "\n";
  }
  std::cout << "lambda " << fmt(lambda) << "\n"
            << "mean_objective " << fmt(report.mean_objective) << "\n";
  if (csv.is_open() && !csv) throw IoError("write failed for '" + f.csv + "'");
  return 0;
}

int cmd_export(const std::string& checkpoint, const std::string& out, std::size_t cols) {
  const TrainerState state = load_checkpoint(checkpoint);
  const TileLayout t = export_dictionary_tiles(state.dictionary, out, cols);
  std::cout << "tiles " << t.rows << "x" << t.cols << " image " << t.height << "x" << t.width << "\n";
  return 0;
}

void write_preview(const ImagePlane& p, const std::filesystem::path& path) {
  const auto [lo, hi] = std::minmax_element(p.values().begin(), p.values().end());
  const double range = *hi - *lo;
  std::vector<std::uint8_t> px(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(range > 0.0 ? std::lround(255.0 * (p[i] - *lo) / range) : 128);
  }
  write_png_gray8(path, p.width(), p.height(), px);
}

int cmd_preprocess(const std::string& data_dir, const std::string& out_dir, const PrepFlags& prep, bool preview) {
  const DirectorySource source(data_dir, prep.options());
  std::filesystem::create_directories(out_dir);
  std::ofstream report(std::filesystem::path(out_dir) / "report.csv", std::ios::trunc);
  if (!report) throw IoError("cannot write report in '" + out_dir + "'");
  report << "path,output,original_height,original_width,height,width,resized,mean_before,mean_after\n";
  for (std::size_t i = 0; i < source.size(); ++i) {
    PreprocessRecord rec;
    const ImagePlane p = source.load(i, rec);
    const std::string stem = source.files()[i].stem().string();
    const auto out = std::filesystem::path(out_dir) / (stem + ".plane");
    save_plane(p, out);
    if (preview) write_preview(p, std::filesystem::path(out_dir) / (stem + ".png"));
    report << rec.path << "," << out.string() << "," << rec.original_height << "," << rec.original_width << ","
           << p.height() << "," << p.width() << "," << (rec.resized ? 1 : 0) << "," << fmt(rec.mean_before) << ","
           << fmt(rec.mean_after) << "\n";
  }
  if (!report) throw IoError("write failed for report in '" + out_dir + "'");
  std::cout << "preprocessed " << source.size() << " images into " << out_dir << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Online convolutional dictionary learning", "ocdl"};
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "worker threads (default: OCDL_THREADS or 1)");

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "learn a dictionary from a directory of images");
  train->add_option("--data", tf.data_dir, "training image directory")->required();
  train->add_option("--k", tf.k, "number of filters")->capture_default_str();
  train->add_option("--filter-size", tf.filter_size, "filter side m")->capture_default_str();
  train->add_option("--algorithm", tf.algorithm, "alg1 or alg2")->capture_default_str();
  train->add_option("--lambda-frac", tf.lambda_frac, "lambda as a fraction of lambda_max")->capture_default_str();
  train->add_option("--lambda-abs", tf.lambda_abs, "absolute lambda (overrides --lambda-frac)");
  train->add_option("--seed", tf.seed, "dictionary initialization seed")->capture_default_str();
  train->add_option("--checkpoint", tf.checkpoint, "checkpoint output path");
  train->add_option("--checkpoint-every", tf.checkpoint_every, "samples between checkpoints (0: only at end)");
  train->add_option("--metrics", tf.metrics, "metrics CSV path (appended)");
  train->add_option("--resume", tf.resume, "continue from this checkpoint");
  train->add_flag("--rescue-dead-filters", tf.rescue, "re-draw filters stuck at zero");
  train->add_option("--threads", threads, "worker threads");
  train->add_option("--config", "key=value file; command-line flags win");
  add_solver_flags(train, tf.solver);
  add_prep_flags(train, tf.prep, true);

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "sparse coding objective of a checkpoint on a directory");
  eval->add_option("--checkpoint", ef.checkpoint)->required();
  eval->add_option("--data", ef.data_dir, "test image directory")->required();
  eval->add_option("--lambda", ef.lambda, "override the checkpoint's lambda");
  eval->add_option("--csv", ef.csv, "per-image CSV report");
  eval->add_option("--threads", threads, "worker threads");
  eval->add_option("--config", "key=value file; command-line flags win");
  add_solver_flags(eval, ef.solver);
  add_prep_flags(eval, ef.prep, false);

  std::string ex_ckpt, ex_out;
  std::size_t ex_cols = 8;
  auto* exp = app.add_subcommand("export", "write the dictionary as a tile image");
  exp->add_option("--checkpoint", ex_ckpt)->required();
  exp->add_option("--out", ex_out, "PNG path")->required();
  exp->add_option("--cols", ex_cols, "tiles per row")->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_option("--config", "key=value file; command-line flags win");

  std::string pp_data, pp_out;
  PrepFlags pf;
  bool preview = false;
  auto* pre = app.add_subcommand("preprocess", "write preprocessed planes and a report");
  pre->add_option("--data", pp_data, "image directory")->required();
  pre->add_option("--out", pp_out, "output directory")->required();
  pre->add_flag("--preview", preview, "also write normalized PNG previews");
  pre->add_option("--threads", threads, "worker threads");
  pre->add_option("--config", "key=value file; command-line flags win");
  add_prep_flags(pre, pf, false);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  set_num_threads(threads.value_or(threads_from_env(1)));

  if (*train) return cmd_train(tf);
  if (*eval) return cmd_eval(ef);
  if (*exp) return cmd_export(ex_ckpt, ex_out, ex_cols);
  return cmd_preprocess(pp_data, pp_out, pf, preview);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
