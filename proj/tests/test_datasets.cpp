#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "lpdpl/classifier.hpp"
#include "lpdpl/corpus.hpp"
#include "lpdpl/eval.hpp"
#include "lpdpl/image_codec.hpp"
#include "lpdpl/model_io.hpp"
#include "corpus_fixtures.hpp"
#include "synthetic.hpp"

using namespace lpdpl;

TEST_CASE("pgm round trip and png round trip decode identically") {
  fixtures::TempDir tmp("codec");
  const GrayImage img = fixtures::stroke_scan(2, 7);
  write_pgm(tmp.path() / "a.pgm", img);
  write_png(tmp.path() / "a.png", img);
  const GrayImage from_pgm = decode_image(tmp.path() / "a.pgm");
  const GrayImage from_png = decode_image(tmp.path() / "a.png");
  CHECK(from_pgm.data == img.data);
  CHECK(from_png.data == img.data);
  CHECK(from_png.width == 24);
  CHECK(from_png.height == 24);
}

TEST_CASE("ascii pgm decodes like binary pgm") {
  fixtures::TempDir tmp("pnm");
  const GrayImage img = fixtures::stroke_scan(0, 3);
  write_pgm(tmp.path() / "bin.pgm", img);
  std::ofstream ascii(tmp.path() / "ascii.pgm");
  ascii << "P2\n# comment line\n24 24\n255\n";
  for (auto v : img.data) ascii << int(v) << "\n";
  ascii.close();
  const GrayImage a = decode_image(tmp.path() / "ascii.pgm");
  const GrayImage b = decode_image(tmp.path() / "bin.pgm");
  CHECK(a.data == b.data);
}

TEST_CASE("bad image data raises DecodeError") {
  fixtures::TempDir tmp("bad");
  fixtures::write_text(tmp.path() / "junk.pgm", "not an image at all");
  CHECK_THROWS_AS(decode_image(tmp.path() / "junk.pgm"), DecodeError);
  CHECK_THROWS_AS(decode_image(tmp.path() / "missing.pgm"), IoError);
}

TEST_CASE("class_dirs corpus loads with metadata and HOG features") {
  fixtures::TempDir tmp("cdirs");
  fixtures::write_stroke_corpus(tmp.path() / "corpus", 2, 3, 1);
  fixtures::write_text(tmp.path() / "manifest.json", R"({
    "layout": "class_dirs",
    "root": "corpus",
    "classes": ["stroke0", "stroke1"]
  })");

  const CorpusManifest manifest = CorpusManifest::load(tmp.path() / "manifest.json");
  const ClassPartitionedDataset ds = load_corpus(manifest);
  CHECK(ds.num_classes() == 2);
  CHECK(ds.class_size(0) == 3);
  CHECK(ds.class_size(1) == 3);
  CHECK(ds.feature_length() == 900);
  CHECK(ds.meta_of(0).subject == "s0");
  CHECK(ds.meta_of(0).repetition == 0);
  CHECK(ds.feature_extract_ms >= 0.0);
}

TEST_CASE("manifests referencing missing inputs name the offender") {
  fixtures::TempDir tmp("missing");
  fixtures::write_stroke_corpus(tmp.path() / "corpus", 1, 2, 1);
  fixtures::write_text(tmp.path() / "manifest.json", R"({
    "layout": "class_dirs",
    "root": "corpus",
    "classes": ["stroke0", "phantom"]
  })");
  const CorpusManifest manifest = CorpusManifest::load(tmp.path() / "manifest.json");
  try {
    load_corpus(manifest);
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(std::string(e.what()).find("phantom") != std::string::npos);
  }

  CHECK_THROWS_AS(CorpusManifest::load(tmp.path() / "nothere.json"), ManifestError);
  fixtures::write_text(tmp.path() / "broken.json", "{ not json");
  CHECK_THROWS_AS(CorpusManifest::load(tmp.path() / "broken.json"), ManifestError);
}

TEST_CASE("blank scans are rejected and reported, not fatal") {
  fixtures::TempDir tmp("reject");
  fixtures::write_stroke_corpus(tmp.path() / "corpus", 2, 2, 1);
  write_pgm(tmp.path() / "corpus" / "stroke0" / "s9_0.pgm", GrayImage(24, 24, 240));
  fixtures::write_text(tmp.path() / "manifest.json", R"({
    "layout": "class_dirs",
    "root": "corpus"
  })");
  const ClassPartitionedDataset ds =
      load_corpus(CorpusManifest::load(tmp.path() / "manifest.json"));
  CHECK(ds.total_samples() == 4); // 5 records minus 1 reject
  REQUIRE(ds.rejected.size() == 1);
  CHECK(ds.rejected[0].find("s9_0.pgm") != std::string::npos);
}

TEST_CASE("column order within each class follows sorted record order") {
  fixtures::TempDir tmp("order");
  fixtures::write_stroke_corpus(tmp.path() / "corpus", 1, 2, 2);
  fixtures::write_text(tmp.path() / "manifest.json", R"({
    "layout": "class_dirs",
    "root": "corpus"
  })");
  const auto ds = load_corpus(CorpusManifest::load(tmp.path() / "manifest.json"));
  REQUIRE(ds.total_samples() == 4);
  CHECK(ds.meta_of(0).source.find("s0_0.pgm") != std::string::npos);
  CHECK(ds.meta_of(1).source.find("s0_1.pgm") != std::string::npos);
  CHECK(ds.meta_of(2).source.find("s1_0.pgm") != std::string::npos);

  const auto again = load_corpus(CorpusManifest::load(tmp.path() / "manifest.json"));
  CHECK(ds.class_samples(0) == again.class_samples(0));
}

TEST_CASE("idx_pair corpus carries split tags for fixed-split evaluation") {
  fixtures::TempDir tmp("idx");
  std::vector<GrayImage> train_imgs, test_imgs;
  std::vector<std::uint8_t> train_labels, test_labels;
  for (int s = 0; s < 8; ++s) {
    train_imgs.push_back(fixtures::stroke_scan(s % 2, 100 + s));
    train_labels.push_back(s % 2);
  }
  for (int s = 0; s < 4; ++s) {
    test_imgs.push_back(fixtures::stroke_scan(s % 2, 200 + s));
    test_labels.push_back(s % 2);
  }
  fixtures::write_idx_pair(tmp.path() / "train-images", tmp.path() / "train-labels",
                           train_imgs, train_labels);
  fixtures::write_idx_pair(tmp.path() / "test-images", tmp.path() / "test-labels",
                           test_imgs, test_labels);
  fixtures::write_text(tmp.path() / "manifest.json", R"({
    "layout": "idx_pair",
    "images": "train-images",
    "labels": "train-labels",
    "test_images": "test-images",
    "test_labels": "test-labels",
    "classes": ["vertical", "horizontal"]
  })");

  const auto ds = load_corpus(CorpusManifest::load(tmp.path() / "manifest.json"));
  CHECK(ds.total_samples() == 12);
  CHECK(ds.pipeline().preprocess == PreprocessMode::resize_binarize);

  const FoldPlan plan = make_folds(ds, FoldScheme::fixed_split, 0, 1);
  REQUIRE(plan.folds.size() == 1);
  CHECK(plan.folds[0].train.size() == 8);
  CHECK(plan.folds[0].test.size() == 4);
}

TEST_CASE("csv_flat corpus loads pixels, metadata, and split tags") {
  fixtures::TempDir tmp("csv");
  std::string csv = "label,subject,repetition,split";
  for (int p = 0; p < 16; ++p) csv += ",p" + std::to_string(p);
  csv += "\n";
  // 4x4 images: class a = left half dark; class b = top half dark
  for (int s = 0; s < 4; ++s) {
    csv += "a,subj" + std::to_string(s) + ",0," + (s == 3 ? "test" : "train");
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) csv += c < 2 ? ",10" : ",250";
    csv += "\n";
    csv += "b,subj" + std::to_string(s) + ",1," + (s == 3 ? "test" : "train");
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) csv += r < 2 ? ",10" : ",250";
    csv += "\n";
  }
  fixtures::write_text(tmp.path() / "digits.csv", csv);
  fixtures::write_text(tmp.path() / "manifest.json", R"({
    "layout": "csv_flat",
    "file": "digits.csv",
    "classes": ["a", "b"],
    "preprocess": "resize_binarize"
  })");

  const auto ds = load_corpus(CorpusManifest::load(tmp.path() / "manifest.json"));
  CHECK(ds.num_classes() == 2);
  CHECK(ds.class_size(0) == 4);
  CHECK(ds.meta_of(0).subject == "subj0");
  CHECK(ds.meta_of(0).repetition == 0);
  int test_count = 0;
  for (int c = 0; c < ds.total_samples(); ++c)
    if (ds.meta_of(c).split == SampleSplit::test) ++test_count;
  CHECK(test_count == 2);
}

TEST_CASE("raw-pixel feature mode yields 1024-long columns") {
  fixtures::TempDir tmp("raw");
  fixtures::write_stroke_corpus(tmp.path() / "corpus", 2, 2, 1);
  fixtures::write_text(tmp.path() / "manifest.json", R"({
    "layout": "class_dirs",
    "root": "corpus",
    "features": "raw_pixels"
  })");
  const auto ds = load_corpus(CorpusManifest::load(tmp.path() / "manifest.json"));
  CHECK(ds.feature_length() == 1024);
  CHECK(ds.class_samples(0).col(0).maxCoeff() == 1.0);
  CHECK(ds.class_samples(0).col(0).minCoeff() == 0.0);
}

TEST_CASE("model save/load round-trips bitwise") {
  const auto ds = synthetic::orthogonal_subspace_dataset(2, 2, 8, 5);
  Hyperparameters hp;
  hp.m = 3;
  hp.outer_iters = 3;
  TrainResult result = train(ds, hp, 77);
  result.model.class_names = {"alpha", "beta"};

  fixtures::TempDir tmp("model");
  const auto path = tmp.path() / "model.lpdpl";
  save_model(result.model, path);
  const TrainedModel loaded = load_model(path);

  CHECK(loaded.feature_length == result.model.feature_length);
  CHECK(loaded.atoms == result.model.atoms);
  CHECK(loaded.class_names == result.model.class_names);
  CHECK(loaded.hp.lambda2 == result.model.hp.lambda2);
  CHECK(loaded.pipeline.hog.num_bins == result.model.pipeline.hog.num_bins);
  for (int i = 0; i < 2; ++i) {
    CHECK(loaded.classes[i].P == result.model.classes[i].P);
    CHECK(loaded.classes[i].D == result.model.classes[i].D);
    CHECK(loaded.classes[i].W == result.model.classes[i].W);
  }
}

TEST_CASE("model load rejects truncation, corruption, and foreign versions") {
  const auto ds = synthetic::orthogonal_subspace_dataset(2, 2, 6, 6);
  Hyperparameters hp;
  hp.m = 3;
  hp.outer_iters = 1;
  const TrainResult result = train(ds, hp, 1);

  fixtures::TempDir tmp("corrupt");
  const auto path = tmp.path() / "model.lpdpl";
  save_model(result.model, path);

  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  auto rewrite = [&](const std::vector<char>& content, const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  };

  std::vector<char> truncated(bytes.begin(), bytes.begin() + bytes.size() / 2);
  rewrite(truncated, tmp.path() / "truncated.lpdpl");
  CHECK_THROWS_AS(load_model(tmp.path() / "truncated.lpdpl"), CorruptModel);

  std::vector<char> flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  rewrite(flipped, tmp.path() / "flipped.lpdpl");
  CHECK_THROWS_AS(load_model(tmp.path() / "flipped.lpdpl"), CorruptModel);

  // a version bump invalidates the checksum too, so patch both: bump the
  // version field (offset 8) and recompute nothing -> must fail as corrupt;
  // a coherent foreign version is simulated by re-checksumming manually.
  std::vector<char> versioned = bytes;
  versioned[8] = 2;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i + 8 < versioned.size(); ++i) {
    h ^= static_cast<std::uint8_t>(versioned[i]);
    h *= 0x100000001b3ULL;
  }
  for (int i = 0; i < 8; ++i)
    versioned[versioned.size() - 8 + i] = static_cast<char>((h >> (8 * i)) & 0xff);
  rewrite(versioned, tmp.path() / "versioned.lpdpl");
  CHECK_THROWS_AS(load_model(tmp.path() / "versioned.lpdpl"), VersionMismatch);

  CHECK_THROWS_AS(load_model(tmp.path() / "absent.lpdpl"), IoError);
}

TEST_CASE("classification is identical before save and after load") {
  const auto ds = synthetic::orthogonal_subspace_dataset(3, 2, 10, 8);
  Hyperparameters hp;
  hp.m = 4;
  hp.outer_iters = 4;
  const TrainResult result = train(ds, hp, 3);

  fixtures::TempDir tmp("roundtrip");
  save_model(result.model, tmp.path() / "m.lpdpl");
  const TrainedModel loaded = load_model(tmp.path() / "m.lpdpl");

  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(ds.feature_length());
    for (Eigen::Index r = 0; r < x.size(); ++r) x[r] = normal(rng);
    CHECK(classify(x, result.model) == classify(x, loaded));
  }
}
