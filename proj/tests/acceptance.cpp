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

// One PASS/FAIL line per acceptance criterion. Exit status is the number
// of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <thread>

#include "common/rng.hpp"
#include "test_support.hpp"
#include "vartha/error.hpp"
#include "vartha/evaluation.hpp"
#include "vartha/io.hpp"
#include "vartha/service.hpp"

#include "httplib.h"
#include "json.hpp"

namespace {

using namespace vartha;
using namespace vartha::testing;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  eval::ConfusionMatrix cm;
  cm.counts = {{{176, 108}, {75, 193}}};
  const auto r = eval::report(cm);
  const double secs = seconds_since(t0);

  // Published table, rows Not fake / Fake / macro / weighted.
  const double want[4][3] = {{0.70, 0.62, 0.66}, {0.64, 0.72, 0.68}, {0.67, 0.67, 0.67}, {0.67, 0.67, 0.67}};
  const eval::ClassMetrics* got[4] = {&r.classes[0], &r.classes[1], &r.macro_avg, &r.weighted_avg};
  double worst = 0;
  auto check = [&](double v, double w) { worst = std::max(worst, std::abs(std::round(v * 100) / 100 - w)); };
  for (int i = 0; i < 4; ++i) {
    check(got[i]->precision, want[i][0]);
    check(got[i]->recall, want[i][1]);
    check(got[i]->f1, want[i][2]);
  }
  check(r.accuracy, 0.67);
  const bool supports = r.classes[0].support == 284 && r.classes[1].support == 268 && r.total == 552;
  return {worst <= 0.005 && supports && secs < 1.0,
          fmt("max cell deviation %.4f, %.4fs", worst, secs) + (supports ? ", supports 284/268/552" : ", support mismatch")};
}

Outcome overfit() {
  const auto t0 = Clock::now();
  const auto records = fixture_manifest("manifest_16.csv");
  auto data = training_data(records, {});
  training::TrainConfig cfg;
  cfg.epochs = 50;
  cfg.target = models::Target::kFusion;
  const auto res = training::train(data, cfg);
  const double acc = res.history.back().train_accuracy;
  const double secs = seconds_since(t0);
  return {records.size() == 16 && res.history.size() == 50 && acc >= 0.95 && secs < 300,
          fmt("%.0f records, final train accuracy %.4f, %.1fs", static_cast<double>(records.size()), acc, secs)};
}

Outcome shape_suite() {
  Rng rng(3);
  models::TextBranchSpec ts;
  ts.vocab_size = 50;
  ts.max_len = 32;
  models::ImageBranchSpec is;
  const auto emb = random_embeddings(48, 300, 1);
  models::FusionSpec pen, soft;
  soft.mode = models::FusionMode::kSoftmaxOutput;
  const auto batch = random_batch(ts, is, 2, rng);

  const auto a = models::build_fusion_model(models::build_text_branch(ts, emb, 1), models::build_image_branch(is, 2),
                                            pen, 3);
  const auto b = models::build_fusion_model(models::build_text_branch(ts, emb, 1), models::build_image_branch(is, 2),
                                            soft, 3);
  const auto ta = a.inspect(batch);
  const auto tb = b.inspect(batch);

  const auto img = image::prepare_image(fixture_images() / fixture_manifest().front().image_name);
  const auto feat = shared_extractor().extract(img);

  const long w1 = ta.text.lstm1.front().rows(), w2 = ta.text.lstm2.rows();
  const long pt = ta.text.penultimate.rows(), pi = ta.image.penultimate.rows();
  const long cp = ta.fusion_input.rows(), cs = tb.fusion_input.rows();
  const bool ok = w1 == 256 && ta.text.lstm1.size() == 32 && w2 == 128 && pt == 64 && pi == 64 && cp == 128 &&
                  cs == 4 && feat.values.size() == 25088 && img.tensor.size() == 224u * 224u * 3u;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "bilstm1 %ldx%zu, bilstm2 %ld, penultimate %ld/%ld, concat %ld/%ld, image features %zu", w1,
                ta.text.lstm1.size(), w2, pt, pi, cp, cs, feat.values.size());
  return {ok, buf};
}

Outcome softmax_normalization() {
  const auto t0 = Clock::now();
  models::TextBranchSpec ts;
  ts.vocab_size = 200;
  ts.max_len = 32;
  models::ImageBranchSpec is;
  const auto emb = random_embeddings(198, 300, 5);
  std::vector<models::Network> nets;
  nets.push_back(models::build_text_network(models::build_text_branch(ts, emb, 11)));
  nets.push_back(models::build_image_network(models::build_image_branch(is, 12)));
  nets.push_back(models::build_fusion_model(models::build_text_branch(ts, emb, 13),
                                            models::build_image_branch(is, 14), {}, 15));
  models::ImageBranchSpec raw = is;
  raw.input_norm = models::InputNorm::kNone;
  nets.push_back(models::build_image_network(models::build_image_branch(raw, 16)));
  double worst = 0, min_p = 1;
  std::size_t checked = 0;
  Rng rng(99);
  for (const auto& net : nets) {
    for (int chunk = 0; chunk < 10; ++chunk) {
      // Feature scales from 0.01 to ~100 so some logits saturate.
      const auto batch = random_batch(ts, is, 100, rng, std::pow(10.0, chunk % 5 - 2));
      const auto p = net.predict_proba(batch);
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        worst = std::max(worst, std::abs(p.col(c).sum() - 1.0));
        min_p = std::min(min_p, p.col(c).minCoeff());
        ++checked;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {checked == 4000 && worst <= 1e-6 && min_p >= 0 && secs < 60,
          fmt("4x1000 inputs, max |sum-1| %.3g, min p %.3g, %.1fs", worst, min_p, secs)};
}

Outcome gradient_check() {
  double worst = 0;
  std::size_t checked = 0;
  for (auto mode : {models::FusionMode::kPenultimate, models::FusionMode::kSoftmaxOutput}) {
    models::TextBranchSpec ts;
    ts.vocab_size = 10;
    ts.embed_dim = 4;
    ts.max_len = 3;
    models::ImageBranchSpec is;
    is.input_len = 8;
    models::FusionSpec fs;
    fs.mode = mode;
    const auto emb = random_embeddings(8, 4, 21);
    auto net = models::build_fusion_model(models::build_text_branch(ts, emb, 22), models::build_image_branch(is, 23),
                                          fs, 24);
    Rng data_rng(25);
    const auto batch = random_batch(ts, is, 4, data_rng);
    const Rng dropout(26);

    for (auto* p : net.parameters()) p->zero_grad();
    Rng r0 = dropout;
    net.accumulate_gradients(batch, r0);
    auto loss_at = [&] {
      Rng r = dropout;
      return nn::softmax_cross_entropy(net.logits(batch, &r), batch.labels);
    };
    for (auto* p : net.parameters()) {
      if (p->name.rfind("fusion/", 0) != 0) continue;
      for (Eigen::Index i = 0; i < p->value.size(); ++i) {
        const double keep = p->value.data()[i];
        const double h = 1e-6;
        p->value.data()[i] = keep + h;
        const double up = loss_at();
        p->value.data()[i] = keep - h;
        const double down = loss_at();
        p->value.data()[i] = keep;
        const double numeric = (up - down) / (2 * h);
        const double analytic = p->grad.data()[i];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
        worst = std::max(worst, std::abs(numeric - analytic) / denom);
        ++checked;
      }
    }
  }
  return {checked > 0 && worst <= 1e-3,
          fmt("%.0f fusion-layer weights (both modes), max relative error %.3g", static_cast<double>(checked), worst)};
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

Outcome preprocessing_golden() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  expect(text::clean_text("<b>വാർത്ത</b> 2023") == "വാർത്ത NUM", "clean html+digits");
  expect(text::clean_text("വില 500, 1000 രൂപ!") == "വില NUM NUM രൂപ", "clean two runs");
  expect(text::clean_text("").empty(), "clean empty");
  expect(text::tokenize("വാർത്ത NUM") == std::vector<std::string>{"വാർത്ത", "NUM"}, "tokenize");
  expect(text::tokenize("").empty(), "tokenize empty");
  const text::Vocab ab(std::vector<std::string>{"a", "b"});
  const auto e1 = text::encode("a b", ab, 4);
  expect(e1.ids == std::vector<int>{2, 3, 0, 0} && e1.true_length == 2, "encode pad");
  std::string forty;
  for (int i = 0; i < 40; ++i) forty += (i % 2 ? "b " : "a ");
  const auto e2 = text::encode(forty, ab, 32);
  expect(e2.ids.size() == 32 && e2.true_length == 32 && e2.ids[31] == 3, "encode truncate");
  expect(text::encode("a zzz", ab, 4).ids[1] == text::kUnkId, "encode oov");

  // X and Y always share a window drawn from one filler pool; Z only ever
  // appears with a disjoint pool.
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 7919);
    text::TokenizedCorpus corpus;
    for (int s = 0; s < 500; ++s) {
      std::vector<std::string> sent;
      const bool xy = s % 2 == 0;
      for (int k = 0; k < 8; ++k) sent.push_back((xy ? "p" : "q") + std::to_string(rng.below(20)));
      const std::size_t at = rng.below(7);
      if (xy) {
        sent.insert(sent.begin() + static_cast<long>(at), "yy");
        sent.insert(sent.begin() + static_cast<long>(at), "xx");
      } else {
        sent.insert(sent.begin() + static_cast<long>(at), "zz");
      }
      corpus.push_back(std::move(sent));
    }
    text::Word2VecParams p;
    p.dim = 50;
    p.seed = seed;
    const auto vocab = text::build_vocab(corpus);
    const auto m = text::train_embeddings(corpus, vocab, p);
    const auto x = m.row(vocab.id("xx")), y = m.row(vocab.id("yy")), z = m.row(vocab.id("zz"));
    wins += cosine(x, y) > cosine(x, z);
  }
  expect(wins >= 19, "similarity inequality held for " + std::to_string(wins) + "/20 seeds");
  std::string detail = "golden examples byte-exact, similarity " + std::to_string(wins) + "/20 seeds";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

double max_prob_diff(const models::ModelBundle& a, const models::ModelBundle& b, const models::EncodedSet& set) {
  const auto batch = set.all();
  return (a.network.predict_proba(batch) - b.network.predict_proba(batch)).cwiseAbs().maxCoeff();
}

Outcome determinism() {
  const auto split = corpus::split_dataset(fixture_manifest(), 0.30, 42);
  std::vector<training::TrainResult> runs;
  for (int i = 0; i < 2; ++i) {
    auto data = training_data(split.train, split.test, 300, 42);
    training::TrainConfig cfg;
    cfg.seed = 42;
    runs.push_back(training::train(data, cfg));
  }
  double worst = 0;
  const auto& h1 = runs[0].history;
  const auto& h2 = runs[1].history;
  bool same_len = h1.size() == h2.size() && h1.size() == 10;
  for (std::size_t e = 0; same_len && e < h1.size(); ++e) {
    worst = std::max({worst, std::abs(h1[e].train_loss - h2[e].train_loss),
                      std::abs(h1[e].train_accuracy - h2[e].train_accuracy),
                      std::abs(*h1[e].val_loss - *h2[e].val_loss),
                      std::abs(*h1[e].val_accuracy - *h2[e].val_accuracy)});
  }

  TempDir dir;
  auto bundle = runs[0].bundle;
  models::save_bundle(bundle, dir.path());
  const auto loaded = models::load_bundle(dir.path());
  const auto probe = training_data(split.train, split.test).validation;
  const double diff = max_prob_diff(runs[0].bundle, loaded, probe);
  return {same_len && worst <= 1e-5 && diff <= 1e-6,
          fmt("history max diff %.3g over 10 epochs, save/load probe diff %.3g", worst, diff)};
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  TempDir run;
  const std::string cli = VARTHA_CLI_PATH;
  const std::string common = " --out " + run.path().string() + " --image-cache " + fixture_images().string() +
                             " --feature-cache " + (run / "features").string();
  const std::string log = " >>" + (run / "log.txt").string() + " 2>&1";
  const std::string steps[] = {
      cli + " ingest --manifest " + (fixture_dir() / "manifest.csv").string() + common,
      cli + " preprocess --weights " + test_weights().string() + common,
      cli + " train" + common,
      cli + " evaluate" + common,
  };
  for (const auto& s : steps) {
    if (std::system((s + log).c_str()) != 0) {
      return {false, "command failed: " + s + "\n" + io::read_file(run / "log.txt")};
    }
  }
  const fs::path files[] = {run / "evaluate/fusion/report.json", run / "evaluate/fusion/confusion.json",
                            run / "train/fusion/loss.csv", run / "train/fusion/accuracy.csv"};
  for (const auto& f : files) {
    if (!fs::is_regular_file(f)) return {false, "missing " + f.string()};
  }
  const auto fetch = io::read_file(run / "ingest/fetch_report.jsonl");
  const bool offline = fetch.find("downloaded") == std::string::npos && fetch.find("failed") == std::string::npos;
  const auto report = json::parse(io::read_file(files[0]));
  const double secs = seconds_since(t0);
  return {offline && report.contains("accuracy") && secs < 600,
          fmt("ingest/preprocess/train/evaluate ok, test accuracy %.3f, all images from cache, %.1fs",
              report["accuracy"].get<double>(), secs)};
}

Outcome service_contract() {
  const auto records = fixture_manifest("manifest_16.csv");
  auto data = training_data(records, {});
  training::TrainConfig cfg;
  cfg.epochs = 50;
  auto res = training::train(data, cfg);
  TempDir dir;
  models::save_bundle(res.bundle, dir.path());

  service::ServiceConfig sc;
  sc.port = 0;
  sc.bundle_dir = dir.path();
  sc.extractor_weights = test_weights();
  auto server = service::Server::from_config(sc);
  const int port = server->bind();
  std::thread th([&] { server->run(); });
  std::vector<std::string> problems;

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/api/v1/health");
  if (!health || health->status != 200 || json::parse(health->body).value("status", "") != "ok") {
    problems.push_back("health");
  }

  const auto& rec = records.front();
  httplib::MultipartFormDataItems form = {
      {"headline", rec.headline, "", ""},
      {"image", io::read_file(fixture_images() / rec.image_name), rec.image_name, "image/png"}};
  auto ok = client.Post("/api/v1/predict", form);
  if (!ok || ok->status != 200) {
    problems.push_back("predict status " + std::to_string(ok ? ok->status : -1));
  } else {
    const auto j = json::parse(ok->body);
    const double pf = j["probabilities"]["fake"], pn = j["probabilities"]["not_fake"];
    const std::string label = j["label"];
    const bool schema = j.size() == 4 && (label == "fake" || label == "not_fake") && std::abs(pf + pn - 1) <= 1e-6 &&
                        label == (pn > pf ? "not_fake" : "fake") && j["model_version"] == res.bundle.version &&
                        j["latency_ms"].is_number() && j["latency_ms"].get<double>() >= 0;
    if (!schema) problems.push_back("schema " + j.dump());
    if (label != (rec.label == corpus::Label::kFake ? "fake" : "not_fake")) problems.push_back("label");
  }

  httplib::MultipartFormDataItems empty = {{"headline", "   ", "", ""}, form[1]};
  auto bad1 = client.Post("/api/v1/predict", empty);
  if (!bad1 || bad1->status != 422 || bad1->body.find("\"headline\"") == std::string::npos) {
    problems.push_back("empty headline");
  }
  auto both = form;
  both.push_back({"image_url", "https://example.com/a.png", "", ""});
  auto bad2 = client.Post("/api/v1/predict", both);
  if (!bad2 || bad2->status != 422 || bad2->body.find("exactly one image source") == std::string::npos) {
    problems.push_back("two image sources");
  }
  server->stop();
  th.join();

  std::string detail = "health 200, predict schema-valid with training label, 422 on empty headline and two sources";
  for (const auto& p : problems) detail += "; FAILED " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  if (!fs::is_regular_file(test_weights())) {
    std::printf("missing %s; run the weights fixture first\n", test_weights().c_str());
    return 1;
  }
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metric-oracle", metric_oracle},       {"overfit", overfit},
      {"shape-suite", shape_suite},           {"softmax-normalization", softmax_normalization},
      {"gradient-check", gradient_check},     {"preprocessing-golden", preprocessing_golden},
      {"determinism", determinism},           {"end-to-end", end_to_end},
      {"service-contract", service_contract},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %-22s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu acceptance criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures;
}
