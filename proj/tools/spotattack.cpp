// spotattack: command-line driver for spot-position attacks.
//
// Exit codes: 0 success, 1 error, 2 attack ran but did not reach its target.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spotattack/attack.hpp"
#include "spotattack/classifier.hpp"
#include "spotattack/cluster.hpp"
#include "spotattack/dataset.hpp"
#include "spotattack/ga_search.hpp"
#include "spotattack/image_io.hpp"
#include "spotattack/metrics.hpp"
#include "spotattack/parallel.hpp"
#include "spotattack/toy_models.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace spotattack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMiss = 2;

struct RunConfig {
  // spot
  std::string shape = "rect";
  int r = 5;
  int r1 = 3;
  int r2 = 2;
  int delta = 200;
  std::string mode = "replace";
  // ga
  GaParams ga;
  bool no_elitism = false;
  std::string code = "gray";
  int workers = 0;
  fs::path out = "run";

  // attack / brute
  fs::path model;
  fs::path image;
  std::string source;
  std::string target;
  std::string candidates;
  std::string planted;

  // sweep / cluster
  fs::path data;
  std::string classes = "A-F";
  int per_class = 10;
  std::string sizes = "3,5,7";
  std::string deltas = "-255,-200,-150,-100,-50,50,100,150,200,255";
  fs::path positions;
  int min_overlap = 3;

  // render-dataset
  int train_per_class = 150;
  int test_per_class = 30;
  std::string render_classes = "A-F,0-9";

  // eval
  fs::path records;
  std::string eval_classes;
};

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("not an integer list: '" + text + "'");
    }
  }
  if (out.empty()) throw InvalidArgument("empty integer list");
  return out;
}

SpotShape make_shape(const RunConfig& c, int size) {
  if (c.shape == "rect") return shape::Rect{size};
  if (c.shape == "circle") return shape::Circle{size};
  if (c.shape == "ellipse") return shape::Ellipse{c.r1, c.r2};
  throw InvalidArgument("unknown shape '" + c.shape + "' (rect, circle, ellipse)");
}

GaParams resolved_ga(const RunConfig& c) {
  GaParams ga = c.ga;
  ga.elitism = !c.no_elitism;
  if (c.code == "gray") {
    ga.code = FieldCode::Gray;
  } else if (c.code == "binary") {
    ga.code = FieldCode::Binary;
  } else {
    throw InvalidArgument("unknown chromosome code '" + c.code + "' (gray, binary)");
  }
  ga.workers = 1;
  ga.validate();
  return ga;
}

int resolved_workers(const RunConfig& c) { return c.workers > 0 ? c.workers : default_workers(); }

json ga_json(const GaParams& ga) {
  return {{"pc", ga.crossover_prob},  {"pm", ga.mutation_prob}, {"ps", ga.population},
          {"generations", ga.generations}, {"tf", ga.fitness_threshold}, {"seed", ga.seed},
          {"elitism", ga.elitism},    {"code", ga.code == FieldCode::Gray ? "gray" : "binary"}};
}

json spot_json(const SpotTemplate& spot) {
  return {{"shape", describe(spot.shape)}, {"delta", spot.delta}, {"mode", to_string(spot.mode)}};
}

json search_json(const SearchResult& r) { return json::parse(to_json(r)); }

json outcome_json(const AttackOutcome& o) { return json::parse(to_json(o)); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw InvalidArgument(std::string("--") + what + " is required");
  if (!fs::exists(path)) throw IoError(std::string(what) + " file not found: " + path.string());
}

std::string cell_name(const SpotShape& shape, int delta) {
  return describe(shape) + "_d" + std::to_string(delta);
}

LabelSet sweep_classes(const RunConfig& c, const Classifier& model) {
  LabelSet classes = LabelSet::parse(c.classes);
  for (const auto& l : classes.names()) model.labels().index_of(l);
  return classes;
}

// ---------------------------------------------------------------------------

int cmd_attack(const RunConfig& c) {
  require_file(c.model, "model");
  require_file(c.image, "image");
  if (c.source.empty()) throw InvalidArgument("--source is required");
  if (!c.target.empty() && c.target == c.source) {
    throw InvalidArgument("--target must differ from the source label '" + c.source + "'");
  }
  const ClassifierModel model = load_model(c.model);
  const CharImage image = read_png(c.image);
  const GaParams ga = resolved_ga(c);
  const SpotTemplate spot{make_shape(c, c.r), c.delta, parse_spot_mode(c.mode)};

  AttackOutcome outcome;
  json report;
  report["config"] = {{"spot", spot_json(spot)}, {"ga", ga_json(ga)}, {"source", c.source}};
  if (!c.target.empty()) {
    outcome = targeted_attack({image, c.source, c.target, spot, ga}, model);
    report["config"]["target"] = c.target;
  } else {
    std::optional<std::vector<std::string>> cands;
    if (!c.candidates.empty()) cands = LabelSet::parse(c.candidates).names();
    TargetChoice choice = best_target_for_source(image, c.source, cands, spot, ga, model, resolved_workers(c));
    json all = json::array();
    for (const auto& o : choice.all) {
      all.push_back({{"target", o.target_label}, {"target_confidence", o.target_confidence},
                     {"success", o.success}});
    }
    report["candidates"] = all;
    outcome = std::move(choice.outcome);
  }
  report["outcome"] = outcome_json(outcome);

  ensure_dir(c.out);
  write_json(c.out / "outcome.json", report);
  write_png(outcome.adversarial_image, c.out / "adversarial.png");
  write_mask_text(outcome.mask, c.out / "mask.txt");
  write_json(c.out / "run.json", {{"command", "attack"}, {"model", c.model.string()}, {"image", c.image.string()},
                                  {"config", report["config"]}});
  std::cout << report["outcome"].dump() << "\n";
  return outcome.success ? kExitOk : kExitMiss;
}

int cmd_brute(const RunConfig& c) {
  const GaParams ga = resolved_ga(c);
  const SpotTemplate spot{make_shape(c, c.r), c.delta, parse_spot_mode(c.mode)};
  const Region region = feasible_region(spot.shape, kCharDims);

  std::optional<ClassifierModel> model;
  std::optional<CharImage> image;
  FitnessFn fitness;
  json cfg = {{"spot", spot_json(spot)}, {"ga", ga_json(ga)}};
  if (!c.planted.empty()) {
    const auto v = parse_int_list(c.planted);
    if (v.size() != 3) throw InvalidArgument("--planted expects a0,b0,tau");
    const Position optimum{v[0], v[1]};
    const double tau = v[2];
    fitness = [optimum, tau](Position p) { return planted_fitness(p, optimum, tau); };
    cfg["planted"] = {{"a0", v[0]}, {"b0", v[1]}, {"tau", v[2]}};
  } else {
    require_file(c.model, "model");
    require_file(c.image, "image");
    if (c.target.empty()) throw InvalidArgument("--target is required without --planted");
    model.emplace(load_model(c.model));
    image.emplace(read_png(c.image));
    fitness = make_spot_fitness(*model, *image, spot, c.target);
    cfg["target"] = c.target;
  }

  const SearchResult exhaustive = exhaustive_search(fitness, region);
  const SearchResult genetic = run_ga(fitness, region, ga);
  json report;
  report["config"] = cfg;
  report["region"] = {{"a_min", region.a_min}, {"a_max", region.a_max}, {"b_min", region.b_min},
                      {"b_max", region.b_max}, {"cardinality", region.cardinality()}};
  report["exhaustive"] = search_json(exhaustive);
  report["ga"] = search_json(genetic);
  report["gap"] = exhaustive.best_fitness - genetic.best_fitness;

  ensure_dir(c.out);
  write_json(c.out / "brute.json", report);
  std::cout << "exhaustive best (" << exhaustive.best_position.a << ", " << exhaustive.best_position.b
            << ") fitness " << exhaustive.best_fitness << " queries " << exhaustive.oracle_queries << "\n"
            << "ga best (" << genetic.best_position.a << ", " << genetic.best_position.b << ") fitness "
            << genetic.best_fitness << " queries " << genetic.oracle_queries << "\n"
            << "gap " << report["gap"].get<double>() << "\n";
  return kExitOk;
}

struct CellReport {
  std::string name;
  int delta;
  double asr;
  double targeted_asr;
};

void write_metrics(const fs::path& dir, const std::vector<EvalRecord>& records, const LabelSet& classes,
                   const std::map<std::string, long>& source_counts, json& summary) {
  write_text(dir / "records.csv", format_records_csv(records));
  const NstaMatrix matrix = nsta(records, classes, source_counts);
  export_thermal(matrix, dir / "nsta");
  const RowColMeans means = row_col_means(matrix);
  std::string csv = "class,row_mean,col_mean\n";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f\n", classes[i].c_str(), means.rows[i], means.cols[i]);
    csv += buf;
  }
  write_text(dir / "means.csv", csv);
  summary["records"] = records.size();
  summary["asr"] = asr(records);
  summary["targeted_asr"] = targeted_asr(records);
  summary["row_means"] = means.rows;
  summary["col_means"] = means.cols;
}

int cmd_sweep(const RunConfig& c) {
  require_file(c.model, "model");
  if (c.data.empty()) throw InvalidArgument("--data is required");
  const ClassifierModel model = load_model(c.model);
  const LabelSet classes = sweep_classes(c, model);
  const LabeledSet pool = read_labeled_set(c.data, "pool");
  const LabeledSet sources = select_source_set(model, pool, c.per_class, classes);
  const GaParams ga = resolved_ga(c);
  const SpotMode mode = parse_spot_mode(c.mode);
  const std::vector<int> sizes = c.shape == "ellipse" ? std::vector<int>{0} : parse_int_list(c.sizes);
  const std::vector<int> deltas = parse_int_list(c.deltas);
  const int workers = resolved_workers(c);

  std::map<std::string, long> source_counts;
  for (const auto& item : sources.items) ++source_counts[item.label];

  ensure_dir(c.out);
  json config = {{"command", "sweep"}, {"shape", c.shape}, {"sizes", sizes}, {"deltas", deltas},
                 {"mode", to_string(mode)}, {"classes", classes.names()}, {"per_class", c.per_class},
                 {"ga", ga_json(ga)}};
  write_json(c.out / "config.json", config);

  std::string table = "cell,shape,delta,asr,targeted_asr\n";
  std::uint64_t cell_index = 0;
  for (int size : sizes) {
    for (int delta : deltas) {
      const SpotTemplate spot{make_shape(c, size), delta, mode};
      const std::string name = cell_name(spot.shape, delta);
      struct Job {
        std::size_t image;
        std::string target;
      };
      std::vector<Job> jobs;
      for (std::size_t i = 0; i < sources.items.size(); ++i) {
        for (const auto& t : classes.names()) {
          if (t != sources.items[i].label) jobs.push_back({i, t});
        }
      }
      std::vector<EvalRecord> records(jobs.size());
      parallel_for(jobs.size(), workers, [&](std::size_t j) {
        const auto& item = sources.items[jobs[j].image];
        AttackTask task{item.image, item.label, jobs[j].target, spot, ga};
        task.ga.seed = derive_seed(ga.seed, {cell_index, jobs[j].image, model.labels().index_of(jobs[j].target)});
        const AttackOutcome o = targeted_attack(task, model);
        records[j] = {item.label, item.label, o.predicted_label, jobs[j].target};
      });

      const fs::path dir = c.out / name;
      ensure_dir(dir);
      json summary = {{"cell", name}, {"spot", spot_json(spot)}};
      write_metrics(dir, records, classes, source_counts, summary);
      write_json(dir / "summary.json", summary);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s,%s,%d,%.4f,%.4f\n", name.c_str(), describe(spot.shape).c_str(), delta,
                    summary["asr"].get<double>(), summary["targeted_asr"].get<double>());
      table += buf;
      std::cout << buf;
      ++cell_index;
    }
  }
  write_text(c.out / "asr.csv", table);
  return kExitOk;
}

int cmd_cluster(const RunConfig& c) {
  require_file(c.positions, "positions");
  const std::vector<PositionRecord> recs = read_position_records(c.positions);
  if (recs.empty()) throw EmptyList("positions file has no records: " + c.positions.string());
  const SpotShape shape = make_shape(c, c.r);
  const SpotMode mode = parse_spot_mode(c.mode);

  std::optional<ClassifierModel> model;
  std::optional<LabeledSet> sources;
  std::optional<LabelSet> classes;
  if (!c.model.empty()) {
    require_file(c.model, "model");
    if (c.data.empty()) throw InvalidArgument("--data is required with --model");
    model.emplace(load_model(c.model));
    classes.emplace(sweep_classes(c, *model));
    sources.emplace(select_source_set(*model, read_labeled_set(c.data, "pool"), c.per_class, *classes));
  }

  ensure_dir(c.out / "masks");
  json summary;
  summary["config"] = {{"shape", describe(shape)}, {"delta", c.delta}, {"mode", to_string(mode)},
                       {"min_overlap", c.min_overlap}};
  json pairs = json::array();
  std::vector<EvalRecord> records;
  for (const auto& rec : recs) {
    const Mask mask = build_cluster_attack(rec, shape, kCharDims, c.min_overlap);
    const PixelCount count = pixel_count(mask);
    const std::string stem = rec.source + "_" + rec.target;
    json entry = {{"source", rec.source}, {"target", rec.target}, {"positions", rec.positions.size()},
                  {"mask_pixels", count.count}};
    if (count.count == 0) {
      entry["status"] = "skipped";
      pairs.push_back(entry);
      std::cout << rec.source << "->" << rec.target << ": empty cluster, skipped\n";
      continue;
    }
    write_mask_text(mask, c.out / "masks" / (stem + ".txt"));
    write_mask_png(mask, c.out / "masks" / (stem + ".png"));
    entry["status"] = "mask";
    if (sources) {
      long hits = 0;
      long total = 0;
      for (const auto& item : sources->items) {
        if (item.label != rec.source) continue;
        const CharImage adv = apply_spot(item.image, mask, c.delta, mode);
        const Prediction p = classify(*model, adv);
        records.push_back({item.label, item.label, p.label, rec.target});
        ++total;
        if (p.label == rec.target) ++hits;
      }
      entry["attacked"] = total;
      entry["targeted_hits"] = hits;
    }
    std::cout << rec.source << "->" << rec.target << ": " << count.count << " mask pixels\n";
    pairs.push_back(entry);
  }
  summary["pairs"] = pairs;
  if (sources && !records.empty()) {
    std::map<std::string, long> source_counts;
    for (const auto& item : sources->items) ++source_counts[item.label];
    json metrics;
    write_metrics(c.out, records, *classes, source_counts, metrics);
    summary["metrics"] = metrics;
  }
  write_json(c.out / "cluster.json", summary);
  return kExitOk;
}

int cmd_render_dataset(const RunConfig& c) {
  DatasetConfig cfg;
  cfg.train_per_class = c.train_per_class;
  cfg.test_per_class = c.test_per_class;
  cfg.seed = c.ga.seed;
  cfg.classes = LabelSet::parse(c.render_classes);
  const Dataset ds = build_dataset(cfg);
  write_labeled_set(ds.train, c.out / "train");
  write_labeled_set(ds.test, c.out / "test");
  write_json(c.out / "config.json", {{"command", "render-dataset"}, {"seed", cfg.seed},
                                     {"classes", cfg.classes.names()}, {"train_per_class", cfg.train_per_class},
                                     {"test_per_class", cfg.test_per_class}});
  std::cout << "train " << ds.train.items.size() << " images, test " << ds.test.items.size() << " images\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& c) {
  require_file(c.records, "records");
  const std::vector<EvalRecord> records = read_records_csv(c.records);
  if (records.empty()) throw EmptyList("records file is empty");
  std::optional<LabelSet> classes;
  if (!c.eval_classes.empty()) classes = LabelSet::parse(c.eval_classes);
  const NstaMatrix matrix = nsta(records, classes);
  ensure_dir(c.out);
  export_thermal(matrix, c.out / "nsta");
  const RowColMeans means = row_col_means(matrix);
  json report = {{"records", records.size()},     {"asr", asr(records)},
                 {"targeted_asr", targeted_asr(records)}, {"classes", matrix.classes().names()},
                 {"row_means", means.rows},       {"col_means", means.cols}};
  write_json(c.out / "metrics.json", report);
  std::cout << report.dump() << "\n";
  return kExitOk;
}

void add_spot_options(CLI::App& app, RunConfig& c) {
  app.add_option("--shape", c.shape, "Spot shape: rect, circle, ellipse")->capture_default_str();
  app.add_option("--r", c.r, "Rect side or circle radius (pixels)")->capture_default_str();
  app.add_option("--r1", c.r1, "Ellipse radius along rows")->capture_default_str();
  app.add_option("--r2", c.r2, "Ellipse radius along columns")->capture_default_str();
  app.add_option("--delta", c.delta, "Spot amplitude in [-255, 255]")->capture_default_str();
  app.add_option("--mode", c.mode, "replace or add-clamp")->capture_default_str();
}

void add_ga_options(CLI::App& app, RunConfig& c) {
  app.add_option("--pc", c.ga.crossover_prob, "Crossover probability")->capture_default_str();
  app.add_option("--pm", c.ga.mutation_prob, "Per-bit mutation probability")->capture_default_str();
  app.add_option("--ps", c.ga.population, "Population size (even)")->capture_default_str();
  app.add_option("--generations", c.ga.generations, "Generation limit")->capture_default_str();
  app.add_option("--tf", c.ga.fitness_threshold, "Early-stop fitness threshold")->capture_default_str();
  app.add_option("--seed", c.ga.seed, "Root RNG seed")->capture_default_str();
  app.add_flag("--no-elitism", c.no_elitism, "Disable carrying the best individual over");
  app.add_option("--code", c.code, "Chromosome field code: gray or binary")->capture_default_str();
  app.add_option("--workers", c.workers, "Worker threads (0 = hardware concurrency)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spot-position adversarial attacks on license-plate character classifiers"};
  app.set_config("--config", "", "key=value configuration file (command-line flags take precedence)");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig c;
  add_spot_options(app, c);
  add_ga_options(app, c);
  app.add_option("--out", c.out, "Run directory for all outputs")->capture_default_str();

  auto* attack = app.add_subcommand("attack", "Search a spot position that flips one character image");
  attack->add_option("--model", c.model, "Weight-bundle JSON")->required();
  attack->add_option("--image", c.image, "Character PNG")->required();
  attack->add_option("--source", c.source, "True label of the image")->required();
  attack->add_option("--target", c.target, "Target label (omit to scan candidates)");
  attack->add_option("--candidates", c.candidates, "Candidate targets, e.g. A-F or B,D");

  auto* sweep = app.add_subcommand("sweep", "Attack a source set over a (size, delta) grid");
  sweep->add_option("--model", c.model, "Weight-bundle JSON")->required();
  sweep->add_option("--data", c.data, "Directory with labels.csv and images/")->required();
  sweep->add_option("--classes", c.classes, "Source/target classes")->capture_default_str();
  sweep->add_option("--per-class", c.per_class, "Source images per class")->capture_default_str();
  sweep->add_option("--sizes", c.sizes, "Spot sizes for rect/circle")->capture_default_str();
  sweep->add_option("--deltas", c.deltas, "Spot amplitudes")->capture_default_str();

  auto* cluster = app.add_subcommand("cluster", "Build spot-cluster masks from recorded positions");
  cluster->add_option("--positions", c.positions, "CSV source,target,a,b")->required();
  cluster->add_option("--model", c.model, "Weight bundle; enables re-attacking the source set");
  cluster->add_option("--data", c.data, "Directory with labels.csv and images/");
  cluster->add_option("--classes", c.classes, "Classes for the source set")->capture_default_str();
  cluster->add_option("--per-class", c.per_class, "Source images per class")->capture_default_str();
  cluster->add_option("--min-overlap", c.min_overlap, "Overlap count that joins the cluster")->capture_default_str();

  auto* render = app.add_subcommand("render-dataset", "Render synthetic train/test character sets");
  render->add_option("--train-per-class", c.train_per_class, "Train images per class")->capture_default_str();
  render->add_option("--test-per-class", c.test_per_class, "Test images per class")->capture_default_str();
  render->add_option("--classes", c.render_classes, "Classes to render")->capture_default_str();

  auto* brute = app.add_subcommand("brute", "Exhaustive search next to the GA for one landscape");
  brute->add_option("--model", c.model, "Weight-bundle JSON");
  brute->add_option("--image", c.image, "Character PNG");
  brute->add_option("--target", c.target, "Target label");
  brute->add_option("--planted", c.planted, "Use the planted landscape a0,b0,tau instead of a model");

  auto* eval = app.add_subcommand("eval", "Recompute ASR/NSTA from a records CSV");
  eval->add_option("--records", c.records, "CSV source,clean_pred,adv_pred,target")->required();
  eval->add_option("--classes", c.eval_classes, "Class order (default: sorted labels in the file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*attack) return cmd_attack(c);
    if (*sweep) return cmd_sweep(c);
    if (*cluster) return cmd_cluster(c);
    if (*render) return cmd_render_dataset(c);
    if (*brute) return cmd_brute(c);
    if (*eval) return cmd_eval(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
