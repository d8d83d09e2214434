/* Copyright 2026 The Vartha Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <chrono>
#include <cstdio>
#include <iostream>

#include "cli/options.hpp"
#include "json.hpp"
#include "vartha/corpus.hpp"
#include "vartha/error.hpp"
#include "vartha/evaluation.hpp"
#include "vartha/io.hpp"

namespace vartha::cli {
namespace {

using nlohmann::json;

[[noreturn]] void usage(const std::string& message) { throw Error(ErrorCode::kInvalidArgument, message); }

struct Context {
  RunConfig& cfg;
  std::string snapshot;  // effective configuration, INI syntax
  std::string command;

  fs::path out() const { return cfg.out; }
  void write_snapshot(const fs::path& dir) const {
    fs::create_directories(dir);
    io::write_file_atomic(dir / "run_config.ini", "# vartha " + command + "\n" + snapshot);
  }
};

void emit(const json& j) { std::cout << j.dump() << std::endl; }

// ---------------------------------------------------------------------------

int cmd_ingest(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.manifest.empty()) usage("--manifest is required");
  if (!fs::is_regular_file(cfg.manifest)) usage("--manifest: no such file '" + cfg.manifest + "'");
  const fs::path dir = ctx.out() / "ingest";
  ctx.write_snapshot(dir);

  const auto manifest = corpus::load_manifest(cfg.manifest, cfg.strict);
  corpus::FetchOptions opts;
  opts.cache_dir = cfg.image_cache;
  opts.timeout = std::chrono::milliseconds(cfg.fetch_timeout_ms);
  opts.workers = cfg.workers;
  const auto report = corpus::fetch_images(manifest.records, opts);
  const auto usable = corpus::usable_records(manifest.records, report);

  std::string errors;
  for (const auto& e : manifest.errors) {
    errors += json{{"row", e.row}, {"error", to_string(e.code)}, {"reason", e.reason}}.dump() + "\n";
  }
  corpus::write_manifest(dir / "usable.csv", usable);
  io::write_file_atomic(dir / "fetch_report.jsonl", report.to_jsonl());
  io::write_file_atomic(dir / "row_errors.jsonl", errors);

  const auto counts = manifest.class_counts();
  json summary = {{"stage", "ingest"},
                  {"records", manifest.records.size()},
                  {"row_errors", manifest.errors.size()},
                  {"class_counts", {{"fake", counts[0]}, {"not_fake", counts[1]}}},
                  {"cached", report.count(corpus::FetchStatus::kCached)},
                  {"downloaded", report.count(corpus::FetchStatus::kDownloaded)},
                  {"failed", report.count(corpus::FetchStatus::kFailed)},
                  {"usable", usable.size()}};
  io::write_file_atomic(dir / "ingest.json", summary.dump(2) + "\n");
  emit(summary);
  return 0;
}

int cmd_preprocess(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  fs::path manifest = cfg.manifest.empty() ? ctx.out() / "ingest" / "usable.csv" : fs::path(cfg.manifest);
  if (!fs::is_regular_file(manifest)) {
    usage(cfg.manifest.empty() ? "--manifest is required (no ingest output at " + manifest.string() + ")"
                               : "--manifest: no such file '" + cfg.manifest + "'");
  }
  const bool needs_images = cfg.target != "text";
  if (needs_images && cfg.weights.empty()) usage("--weights is required for --target " + cfg.target);
  if (!cfg.weights.empty() && !fs::is_regular_file(cfg.weights)) {
    usage("--weights: no such file '" + cfg.weights + "'");
  }
  const fs::path dir = ctx.out() / "preprocess";
  ctx.write_snapshot(dir);

  const auto records = corpus::load_manifest(manifest, true).records;
  const auto split = corpus::split_dataset(records, cfg.test_fraction, cfg.seed);
  const auto pre = training::preprocess(split, cfg.preprocess_options());

  corpus::write_manifest(dir / "train.csv", pre.split.train);
  corpus::write_manifest(dir / "test.csv", pre.split.test);
  text::save_embeddings(pre.embeddings, dir);
  auto summary = pre.summary();
  io::write_file_atomic(dir / "preprocess.json", summary.dump(2) + "\n");
  summary["stage"] = "preprocess";
  summary.erase("excluded");
  summary["excluded"] = pre.excluded.size();
  emit(summary);
  return 0;
}

// Everything the train stage needs from the preprocess stage.
struct StageData {
  json meta;
  text::EmbeddingModel embeddings;
  std::vector<corpus::NewsRecord> train, test;
  std::optional<image::Vgg16Extractor> extractor;
  std::unique_ptr<image::FeatureCache> cache;
  training::FeatureSource features;
  models::ExtractorInfo extractor_info;
};

StageData load_stage(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path dir = ctx.out() / "preprocess";
  if (!fs::is_regular_file(dir / "preprocess.json")) {
    usage("no preprocess output in " + dir.string() + "; run `vartha preprocess` with the same --out first");
  }
  StageData d;
  d.meta = json::parse(io::read_file(dir / "preprocess.json"));
  d.embeddings = text::load_embeddings(dir);
  d.train = corpus::load_manifest(dir / "train.csv", true).records;
  d.test = corpus::load_manifest(dir / "test.csv", true).records;

  const auto& ex = d.meta.at("extractor");
  d.extractor_info = {ex.at("weights_path"), ex.at("version"), ex.at("native_length")};
  const std::size_t feature_length = d.meta.at("feature_length");
  if (feature_length > 0) {
    const std::string weights = cfg.weights.empty() ? d.extractor_info.weights_path : cfg.weights;
    try {
      d.extractor = image::Vgg16Extractor::load(weights);
    } catch (const Error&) {
      // Features may all be cached already.
    }
    d.cache = std::make_unique<image::FeatureCache>(cfg.feature_cache, d.extractor_info.version,
                                                    d.extractor_info.native_length);
    d.features = training::vgg_feature_source(*d.cache, d.extractor ? &*d.extractor : nullptr, cfg.image_cache,
                                              feature_length);
  }
  return d;
}

int cmd_train(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto stage = load_stage(ctx);
  training::TrainingData data;
  std::vector<training::Exclusion> excluded;
  data.train = training::encode_records(stage.train, stage.embeddings.vocab, stage.meta.at("max_len"),
                                        stage.features, &excluded);
  data.validation = training::encode_records(stage.test, stage.embeddings.vocab, stage.meta.at("max_len"),
                                             stage.features, &excluded);
  data.embeddings = std::move(stage.embeddings);
  data.max_len = stage.meta.at("max_len");
  data.extractor = stage.extractor_info;

  json results = json::array();
  for (const auto target : cfg.targets()) {
    const auto tc = cfg.train_config(target);
    const fs::path dir = ctx.out() / "train" / std::string(models::to_string(target));
    ctx.write_snapshot(dir);
    data.config = {{"train", tc.to_json()}, {"preprocess", stage.meta}};
    const auto name = std::string(models::to_string(target));
    auto res = training::train(data, tc, dir, [&](const models::EpochRecord& r) {
      auto j = models::to_json(r);
      j["event"] = "epoch";
      j["target"] = name;
      std::cerr << j.dump() << std::endl;
    });
    results.push_back({{"target", name},
                       {"bundle", (dir / "bundle").string()},
                       {"model_version", res.bundle.version},
                       {"final", models::to_json(res.history.back())}});
  }
  emit({{"stage", "train"}, {"excluded", excluded.size()}, {"results", results}});
  return 0;
}

fs::path bundle_dir(const RunConfig& cfg, models::Target target) {
  if (!cfg.bundle.empty()) return cfg.bundle;
  return fs::path(cfg.out) / "train" / std::string(models::to_string(target)) / "bundle";
}

int cmd_evaluate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<models::Target> targets = cfg.bundle.empty() ? cfg.targets() : std::vector<models::Target>{};
  std::vector<fs::path> bundles;
  if (cfg.bundle.empty()) {
    for (auto t : targets) bundles.push_back(bundle_dir(cfg, t));
  } else {
    bundles.push_back(cfg.bundle);
  }

  std::vector<corpus::NewsRecord> records;
  if (!cfg.manifest.empty()) {
    if (!fs::is_regular_file(cfg.manifest)) usage("--manifest: no such file '" + cfg.manifest + "'");
    records = corpus::load_manifest(cfg.manifest, cfg.strict).records;
  } else {
    const fs::path csv = ctx.out() / "preprocess" / (cfg.split + ".csv");
    if (!fs::is_regular_file(csv)) usage("--manifest is required (no preprocess output at " + csv.string() + ")");
    records = corpus::load_manifest(csv, true).records;
  }

  json results = json::array();
  for (const auto& bdir : bundles) {
    if (!fs::is_directory(bdir)) usage("--bundle: no bundle at '" + bdir.string() + "'");
    const auto bundle = models::load_bundle(bdir);
    const auto name = std::string(models::to_string(bundle.network.target()));

    std::optional<image::Vgg16Extractor> extractor;
    std::unique_ptr<image::FeatureCache> cache;
    training::FeatureSource features;
    if (bundle.network.target() != models::Target::kText) {
      const std::string weights = cfg.weights.empty() ? bundle.extractor.weights_path : cfg.weights;
      try {
        extractor = image::Vgg16Extractor::load(weights);
      } catch (const Error&) {
      }
      cache = std::make_unique<image::FeatureCache>(cfg.feature_cache, bundle.extractor.version,
                                                    bundle.extractor.native_length);
      features = training::vgg_feature_source(*cache, extractor ? &*extractor : nullptr, cfg.image_cache,
                                              static_cast<std::size_t>(bundle.network.image_spec().input_len));
    }
    const fs::path dir = ctx.out() / "evaluate" / name;
    ctx.write_snapshot(dir);
    const auto ev = eval::evaluate_bundle(bundle, records, features, dir);
    std::cout << "== " << name << " (" << ev.model_version << ") ==\n" << ev.report.to_table() << "\n";
    results.push_back({{"target", name},
                       {"report", (dir / "report.json").string()},
                       {"accuracy", ev.report.accuracy},
                       {"evaluated", ev.predictions.size()},
                       {"excluded", ev.excluded.size()}});
  }
  emit({{"stage", "evaluate"}, {"results", results}});
  return 0;
}

int cmd_predict(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.headline.empty()) usage("--headline is required");
  const auto target = cfg.target == "all" ? models::Target::kFusion : models::parse_target(cfg.target);
  const auto bdir = bundle_dir(cfg, target);
  if (!fs::is_directory(bdir)) usage("--bundle: no bundle at '" + bdir.string() + "'");

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<fs::path> weights;
  if (!cfg.weights.empty()) weights = cfg.weights;
  const models::Predictor predictor(models::load_bundle(bdir), weights);
  if (predictor.uses_image() && cfg.image.empty() == cfg.image_url.empty()) {
    usage("exactly one of --image or --image-url is required");
  }
  models::Prediction pred;
  if (!cfg.image.empty()) {
    if (!fs::is_regular_file(cfg.image)) usage("--image: no such file '" + cfg.image + "'");
    pred = predictor.predict_file(cfg.headline, cfg.image);
  } else if (!cfg.image_url.empty()) {
    const auto bytes = corpus::download(cfg.image_url, std::chrono::milliseconds(cfg.fetch_timeout_ms));
    pred = predictor.predict_bytes(cfg.headline, bytes);
  } else {
    pred = predictor.predict(cfg.headline, {});
  }
  auto j = models::to_json(pred);
  j["latency_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  emit(j);
  return 0;
}

int cmd_serve(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto sc = cfg.service_config();
  const auto target = cfg.target == "all" ? models::Target::kFusion : models::parse_target(cfg.target);
  sc.bundle_dir = bundle_dir(cfg, target);
  if (!fs::is_directory(sc.bundle_dir)) usage("--bundle: no bundle at '" + sc.bundle_dir.string() + "'");
  service::serve(sc);
  return 0;
}

void print_error(std::string_view code, const std::string& message, int exit_code) {
  std::cerr << json{{"error", code}, {"message", message}, {"exit_code", exit_code}}.dump() << std::endl;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Multimodal (headline + image) fake news detection pipeline", "vartha"};
  RunConfig cfg;
  add_options(app, cfg);
  app.set_config("--config", "", "INI or TOML file with option values (keys as flag names)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Context&);
  };
  const Sub subs[] = {
      {"ingest", "Validate the manifest and fetch images into the image cache", cmd_ingest},
      {"preprocess", "Split, build vocabulary and word vectors, extract image features", cmd_preprocess},
      {"train", "Train the selected network(s) and write bundles and curves", cmd_train},
      {"evaluate", "Score bundles and write classification reports", cmd_evaluate},
      {"predict", "Classify one headline and image", cmd_predict},
      {"serve", "Serve a bundle over HTTP", cmd_serve},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("UsageError", e.what(), 2);
    return 2;
  }

  Context ctx{cfg, app.config_to_str(true, false), ""};
  try {
    for (const auto& s : subs) {
      if (app.got_subcommand(s.name)) {
        ctx.command = s.name;
        return s.fn(ctx);
      }
    }
  } catch (const Error& e) {
    const int code = e.code() == ErrorCode::kInvalidArgument ? 2 : 1;
    print_error(e.code() == ErrorCode::kInvalidArgument ? "UsageError" : to_string(e.code()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what(), 1);
    return 1;
  }
  return 2;
}

}  // namespace vartha::cli
