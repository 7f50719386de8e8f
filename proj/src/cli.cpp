#include "geoshap/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "geoshap/background.hpp"
#include "geoshap/bridge.hpp"
#include "geoshap/errors.hpp"
#include "geoshap/explainer.hpp"
#include "geoshap/io.hpp"
#include "geoshap/models.hpp"
#include "geoshap/postprocess.hpp"
#include "geoshap/result_io.hpp"
#include "geoshap/simulation.hpp"
#include "geoshap/validation.hpp"

namespace geoshap {
namespace {

struct InputOptions {
  std::string input;
  std::string location_cols;
  std::string target;
  std::string features;
  std::string predictor = "builtin:ols";
  std::string background = "full";
};

struct LoadedData {
  std::vector<std::string> names;
  Matrix x;
  std::optional<Vector> y;
  GeoSpec spec;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& item : split(text, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) continue;
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

LoadedData load_input(const InputOptions& opts) {
  const CsvTable table = read_csv_file(opts.input);
  if (!opts.target.empty() && !table.has_column(opts.target)) {
    throw ConfigError("target column '" + opts.target + "' not found in " + opts.input);
  }
  std::vector<std::string> names;
  if (!opts.features.empty()) {
    names = split_list(opts.features);
    for (const auto& name : names) {
      if (!table.has_column(name)) {
        throw ConfigError("feature column '" + name + "' not found in " + opts.input);
      }
      if (name == opts.target) {
        throw ConfigError("target column '" + name + "' listed as a feature");
      }
    }
  } else {
    for (const auto& name : table.header) {
      if (name != opts.target) names.push_back(name);
    }
  }
  const auto location = split_list(opts.location_cols);
  if (location.empty()) throw ConfigError("--location-cols must name at least one column");
  std::vector<int> geo;
  for (const auto& col : location) {
    const auto it = std::find(names.begin(), names.end(), col);
    if (it == names.end()) {
      throw ConfigError("location column '" + col + "' not found among the features of " +
                        opts.input);
    }
    geo.push_back(static_cast<int>(it - names.begin()));
  }
  std::optional<Vector> y;
  if (!opts.target.empty()) y = table.column(opts.target);
  Matrix x = table.columns(names);
  GeoSpec spec(names, geo);
  return {std::move(names), std::move(x), std::move(y), std::move(spec)};
}

BackgroundSpec parse_background(const std::string& text, std::uint64_t seed) {
  BackgroundSpec spec = BackgroundSpec::parse(text);
  const bool sized = spec.mode == BackgroundSpec::Mode::kSample ||
                     spec.mode == BackgroundSpec::Mode::kKMeans;
  if (sized && std::count(text.begin(), text.end(), ':') == 1) spec.seed = seed;
  return spec;
}

std::unique_ptr<Predictor> make_predictor(const std::string& text,
                                          const LoadedData& data) {
  if (text == "builtin:ols") {
    if (!data.y) throw ConfigError("builtin:ols needs --target to fit on");
    return std::make_unique<OlsModel>(OlsModel::fit(data.x, *data.y));
  }
  if (text == "builtin:truemodel") return std::make_unique<TrueModel>();
  if (text.rfind("cmd:", 0) == 0) {
    const std::string command = text.substr(4);
    if (command.empty()) throw ConfigError("empty bridge command");
    return bridge_connect(command, data.spec.p(), data.names);
  }
  throw ConfigError("unknown predictor '" + text +
                    "' (expected builtin:ols, builtin:truemodel or cmd:COMMAND)");
}

void write_file(const std::string& path,
                const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path);
  writer(out);
  out.flush();
  if (!out) throw ConfigError("failed writing output file: " + path);
}

void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& writer) {
  if (path.empty() || path == "-") {
    writer(fallback);
  } else {
    write_file(path, writer);
  }
}

void add_input_options(CLI::App* cmd, InputOptions& opts) {
  cmd->add_option("--input", opts.input, "Input CSV with a header row")->required();
  cmd->add_option("--location-cols", opts.location_cols,
                  "Comma-separated columns forming the location player")
      ->required();
  cmd->add_option("--target", opts.target, "Response column (excluded from features)");
  cmd->add_option("--features", opts.features,
                  "Comma-separated feature columns (default: all but the target)");
  cmd->add_option("--predictor", opts.predictor,
                  "builtin:ols, builtin:truemodel or cmd:COMMAND");
  cmd->add_option("--background", opts.background,
                  "full, sample:K[:SEED], kmeans:K[:SEED], single:mean, single:median");
}

// Deterministic pseudo-jitter in [-1, 1] for strip plots.
double jitter(int i) {
  const double t = std::sin(static_cast<double>(i) * 12.9898) * 43758.5453;
  return 2.0 * (t - std::floor(t)) - 1.0;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct LabelSeries {
  std::string label;
  Vector phi;
  Vector feature_value;
};

std::vector<LabelSeries> ranked_series(const GeoShapleyResult& result) {
  const auto names = result.metadata.non_geo_names();
  const int n = result.size();
  std::vector<LabelSeries> out;
  for (const auto& ranked : rank_features(result)) {
    LabelSeries s{ranked.label, {}, Vector::Constant(n, std::nan(""))};
    if (ranked.label == "GEO") {
      s.phi = result.phi_geo;
    } else {
      for (int j = 0; j < result.num_features(); ++j) {
        const Vector x = result.instances.col(result.feature_column(j));
        if (ranked.label == names[j]) {
          s.phi = result.phi_main.col(j);
          s.feature_value = x;
        } else if (ranked.label == interaction_label(names[j])) {
          s.phi = result.phi_geo_interaction.col(j);
          s.feature_value = x;
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_svg(const std::vector<LabelSeries>& series, std::ostream& out) {
  const double left = 180.0, width = 520.0, row = 28.0, top = 20.0;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : series) {
    for (Eigen::Index i = 0; i < s.phi.size(); ++i) {
      if (std::isnan(s.phi[i])) continue;
      lo = std::min(lo, s.phi[i]);
      hi = std::max(hi, s.phi[i]);
    }
  }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  auto sx = [&](double v) { return left + (v - lo) / (hi - lo) * width; };
  const double height = top * 2 + row * static_cast<double>(series.size());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 20
      << "\" height=\"" << height << "\">\n";
  out << "<line x1=\"" << sx(0.0) << "\" y1=\"" << top << "\" x2=\"" << sx(0.0)
      << "\" y2=\"" << height - top << "\" stroke=\"#999\"/>\n";
  for (std::size_t r = 0; r < series.size(); ++r) {
    const double cy = top + row * (static_cast<double>(r) + 0.5);
    out << "<text x=\"" << left - 8 << "\" y=\"" << cy + 4
        << "\" text-anchor=\"end\" font-size=\"12\">" << xml_escape(series[r].label)
        << "</text>\n";
    for (Eigen::Index i = 0; i < series[r].phi.size(); ++i) {
      if (std::isnan(series[r].phi[i])) continue;
      out << "<circle cx=\"" << sx(series[r].phi[i]) << "\" cy=\""
          << cy + 8.0 * jitter(static_cast<int>(i)) << "\" r=\"1.5\" fill=\"#1f77b4\"/>\n";
    }
  }
  out << "</svg>\n";
}

int cmd_explain(const InputOptions& in, int workers, std::uint64_t seed,
                bool skip_failed, const std::string& out_json,
                const std::string& out_csv, std::ostream& out) {
  const LoadedData data = load_input(in);
  const auto predictor = make_predictor(in.predictor, data);
  const BackgroundData bg = select_background(data.x, parse_background(in.background, seed));
  ExplainOptions options;
  options.workers = workers;
  options.seed = seed;
  options.skip_failed = skip_failed;
  const GeoShapleyResult result = explain_batch(*predictor, data.x, data.spec, bg, options);
  if (!out_json.empty()) {
    write_file(out_json, [&](std::ostream& s) { write_result_json(result, s); });
  }
  if (!out_csv.empty() || out_json.empty()) {
    emit(out_csv, out, [&](std::ostream& s) { write_result_csv(result, s); });
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"GeoShapley explanations for spatial prediction models", "geoshap"};
  app.require_subcommand(1);

  // GEOSHAP_WORKERS is the --workers default. CLI11 silently drops invalid
  // environment values, so it is parsed here instead.
  int workers = 1;
  if (const char* env = std::getenv("GEOSHAP_WORKERS"); env && *env) {
    int parsed = -1;
    const std::string text(env);
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
    if (ec != std::errc() || end != text.data() + text.size() || parsed < 0) {
      err << "error: GEOSHAP_WORKERS must be a non-negative integer, got '" << text
          << "'\n";
      return static_cast<int>(ErrorCategory::kConfig);
    }
    workers = parsed;
  }
  std::uint64_t seed = 42;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--workers", workers, "Worker threads (0 = all cores); "
                                          "default from GEOSHAP_WORKERS")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "Random seed");
  };

  InputOptions input;
  bool skip_failed = false;
  std::string out_json, out_csv;
  auto* explain = app.add_subcommand("explain", "Explain every row of an input CSV");
  add_input_options(explain, input);
  add_common(explain);
  explain->add_flag("--skip-failed", skip_failed, "Flag failed rows instead of aborting");
  explain->add_option("--out-json", out_json, "Result JSON path");
  explain->add_option("--out-csv", out_csv, "Result CSV path (default: stdout)");

  double noise_sd = 1.0;
  std::optional<int> n;
  std::string out_path;
  auto* simulate = app.add_subcommand("simulate", "Write the simulated grid dataset");
  add_common(simulate);
  simulate->add_option("--noise-sd", noise_sd, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--n", n, "Subsample this many grid cells")
      ->check(CLI::Range(1, simulation::kGridCells));
  simulate->add_option("--out", out_path, "Output CSV (default: stdout)");

  std::string validate_background = "full";
  std::string out_result;
  bool no_study = false;
  auto* validate = app.add_subcommand("validate", "Score recovered effects against the truth");
  add_common(validate);
  validate->add_option("--noise-sd", noise_sd, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  validate->add_option("--n", n, "Explain this many grid cells")
      ->check(CLI::Range(1, simulation::kGridCells));
  validate->add_option("--background", validate_background, "Background spec");
  validate->add_option("--out-json", out_json, "Report JSON path");
  validate->add_option("--out-result", out_result, "Result JSON path");
  validate->add_flag("--skip-interaction-study", no_study,
                     "Do not run the interaction ratio study");

  InputOptions boot_input;
  int replicates = 100;
  double alpha = 0.05;
  std::string eval_path, out_ci, out_masked;
  auto* bootstrap = app.add_subcommand("bootstrap", "Percentile intervals by refitting");
  add_input_options(bootstrap, boot_input);
  add_common(bootstrap);
  bootstrap->add_option("-B,--replicates", replicates, "Bootstrap replicates")
      ->check(CLI::PositiveNumber);
  bootstrap->add_option("--alpha", alpha, "Two-sided level")->check(CLI::Range(0.0, 1.0));
  bootstrap->add_option("--eval", eval_path, "CSV of instances to explain (default: input)");
  bootstrap->add_option("--out-ci", out_ci, "Interval CSV (default: stdout)");
  bootstrap->add_option("--out-masked", out_masked, "Significance-masked result CSV");
  bootstrap->add_option("--out-json", out_json, "Point-estimate result JSON");

  std::string ks_text = "5,10,20,50,100";
  int reps = 20;
  auto* variance = app.add_subcommand("background-variance",
                                      "phi_geo variance against background size");
  add_common(variance);
  variance->add_option("--ks", ks_text, "Comma-separated background sizes");
  variance->add_option("--reps", reps, "Background draws per size")->check(CLI::PositiveNumber);
  variance->add_option("--n", n, "Explain this many grid cells")
      ->check(CLI::Range(1, simulation::kGridCells));
  variance->add_option("--out", out_path, "Output CSV (default: stdout)");

  std::string result_path, kind, value = "geo", feature, out_svg;
  auto* plot = app.add_subcommand("plot", "Plot data from a result JSON");
  plot->add_option("--result", result_path, "Result JSON")->required();
  plot->add_option("--kind", kind, "summary, surface or dependence")->required();
  plot->add_option("--value", value, "surface value: geo, intrinsic or a feature name");
  plot->add_option("--feature", feature, "Feature for dependence plots");
  plot->add_option("--out-csv", out_csv, "Output CSV (default: stdout)");
  plot->add_option("--out-svg", out_svg, "Summary SVG path");

  std::vector<std::string> argv_storage{"geoshap"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ErrorCategory::kConfig);
  }

  try {
    if (*explain) {
      return cmd_explain(input, workers, seed, skip_failed, out_json, out_csv, out);
    }

    if (*simulate) {
      const auto data = simulation::generate_dataset(seed, noise_sd, n);
      emit(out_path, out, [&](std::ostream& s) { simulation::write_dataset_csv(data, s); });
      return 0;
    }

    if (*validate) {
      validation::ValidationOptions options;
      options.seed = seed;
      options.noise_sd = noise_sd;
      options.n = n;
      options.background = parse_background(validate_background, seed);
      options.workers = workers;
      options.interaction_study = !no_study;
      const auto report = validation::run_validation(options);
      validation::write_report_table(report, out);
      if (!out_json.empty()) {
        write_file(out_json, [&](std::ostream& s) { validation::write_report_json(report, s); });
      }
      if (!out_result.empty()) {
        write_file(out_result, [&](std::ostream& s) { write_result_json(report.result, s); });
      }
      return 0;
    }

    if (*bootstrap) {
      const Trainer trainer = parse_trainer(boot_input.predictor);
      const LoadedData data = load_input(boot_input);
      if (!data.y) throw ConfigError("bootstrap needs --target");
      Matrix x_eval = data.x;
      if (!eval_path.empty()) {
        x_eval = read_csv_file(eval_path).columns(data.names);
      }
      const BackgroundSpec bg_spec = parse_background(boot_input.background, seed);
      BootstrapOptions options;
      options.replicates = replicates;
      options.alpha = alpha;
      options.seed = seed;
      options.workers = workers;
      const BootstrapResult ci =
          bootstrap_ci(data.x, *data.y, x_eval, trainer, data.spec, bg_spec, options);
      emit(out_ci, out, [&](std::ostream& s) {
        write_bootstrap_csv(ci, data.spec.non_geo_names(), s);
      });
      if (!out_masked.empty() || !out_json.empty()) {
        const OlsModel model = OlsModel::fit(data.x, *data.y);
        const BackgroundData bg = select_background(data.x, bg_spec);
        ExplainOptions explain_options;
        explain_options.workers = workers;
        explain_options.seed = seed;
        const GeoShapleyResult point =
            explain_batch(model, x_eval, data.spec, bg, explain_options);
        if (!out_masked.empty()) {
          write_file(out_masked,
                     [&](std::ostream& s) { write_masked_result_csv(point, ci, s); });
        }
        if (!out_json.empty()) {
          write_file(out_json, [&](std::ostream& s) { write_result_json(point, s); });
        }
      }
      return 0;
    }

    if (*variance) {
      validation::BackgroundVarianceOptions options;
      options.seed = seed;
      options.reps = reps;
      options.n = n;
      options.workers = workers;
      options.ks.clear();
      for (const auto& k : split_list(ks_text)) {
        double parsed = 0.0;
        try {
          parsed = parse_double(k);
        } catch (const DataError&) {
          throw ConfigError("invalid background size '" + k + "'");
        }
        if (parsed < 1 || parsed != std::floor(parsed)) {
          throw ConfigError("invalid background size '" + k + "'");
        }
        options.ks.push_back(static_cast<int>(parsed));
      }
      const auto rows = validation::background_variance(options);
      emit(out_path, out, [&](std::ostream& s) { validation::write_variance_csv(rows, s); });
      return 0;
    }

    if (*plot) {
      if (kind != "summary" && kind != "surface" && kind != "dependence") {
        throw ConfigError("unknown plot kind '" + kind +
                          "' (expected summary, surface or dependence)");
      }
      const GeoShapleyResult result = read_result_json_file(result_path);
      const auto names = result.metadata.non_geo_names();
      if (kind == "summary") {
        const auto series = ranked_series(result);
        emit(out_csv, out, [&](std::ostream& s) {
          s << "label,instance,phi,feature_value\n";
          for (const auto& ser : series) {
            for (Eigen::Index i = 0; i < ser.phi.size(); ++i) {
              s << ser.label << ',' << i << ',' << format_double(ser.phi[i]) << ','
                << format_double(ser.feature_value[i]) << '\n';
            }
          }
        });
        if (!out_svg.empty()) {
          write_file(out_svg, [&](std::ostream& s) { write_summary_svg(series, s); });
        }
        return 0;
      }
      if (kind == "surface") {
        const auto& geo = result.metadata.geo_indices;
        if (geo.size() != 2) {
          throw ConfigError("surface plots need exactly two location columns");
        }
        Vector values;
        if (value == "geo") {
          values = result.phi_geo;
        } else if (value == "intrinsic") {
          values = intrinsic_effect(result);
        } else {
          const auto it = std::find(names.begin(), names.end(), value);
          if (it == names.end()) {
            throw ConfigError("unknown surface value '" + value +
                              "' (expected geo, intrinsic or a feature name)");
          }
          values = result.phi_geo_interaction.col(it - names.begin());
        }
        const auto geo_names = result.metadata.geo_names();
        emit(out_csv, out, [&](std::ostream& s) {
          s << geo_names[0] << ',' << geo_names[1] << ",value\n";
          for (int i = 0; i < result.size(); ++i) {
            s << format_double(result.instances(i, geo[0])) << ','
              << format_double(result.instances(i, geo[1])) << ','
              << format_double(values[i]) << '\n';
          }
        });
        return 0;
      }
      const auto it = std::find(names.begin(), names.end(), feature);
      if (it == names.end()) {
        throw ConfigError("dependence plots need --feature naming a non-location feature");
      }
      const int j = static_cast<int>(it - names.begin());
      const int col = result.feature_column(j);
      emit(out_csv, out, [&](std::ostream& s) {
        s << feature << ",phi_main,phi_geo_interaction,phi_combined\n";
        for (int i = 0; i < result.size(); ++i) {
          const double main = result.phi_main(i, j);
          const double inter = result.phi_geo_interaction(i, j);
          s << format_double(result.instances(i, col)) << ',' << format_double(main)
            << ',' << format_double(inter) << ',' << format_double(main + inter) << '\n';
        }
      });
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return static_cast<int>(ErrorCategory::kConfig);
}

}  // namespace geoshap
