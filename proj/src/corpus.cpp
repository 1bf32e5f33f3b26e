#include "lpdpl/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "lpdpl/image_codec.hpp"
#include "lpdpl/parallel.hpp"

namespace lpdpl {

namespace {

using nlohmann::json;

CorpusLayout layout_from_string(const std::string& s) {
  if (s == "class_dirs") return CorpusLayout::class_dirs;
  if (s == "idx_pair") return CorpusLayout::idx_pair;
  if (s == "csv_flat") return CorpusLayout::csv_flat;
  throw ManifestError("unknown corpus layout: " + s);
}

HogConfig hog_from_json(const json& j) {
  HogConfig cfg;
  cfg.cell_size = j.value("cell_size", cfg.cell_size);
  cfg.num_bins = j.value("num_bins", cfg.num_bins);
  cfg.signed_orientations = j.value("signed", cfg.signed_orientations);
  cfg.soft_binning = j.value("soft_binning", cfg.soft_binning);
  const std::string norm = j.value("normalization", std::string("global"));
  if (norm == "global")
    cfg.normalization = HogNormalization::global_minmax;
  else if (norm == "per_cell")
    cfg.normalization = HogNormalization::per_cell_minmax;
  else
    throw ManifestError("unknown hog normalization: " + norm);
  cfg.validate();
  return cfg;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

} // namespace

CorpusManifest CorpusManifest::load(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ManifestError("cannot open manifest " + json_path.string());

  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ManifestError("manifest " + json_path.string() + ": " + e.what());
  }

  CorpusManifest m;
  const auto base = json_path.has_parent_path() ? json_path.parent_path()
                                                : std::filesystem::path(".");
  try {
    m.layout = layout_from_string(j.at("layout").get<std::string>());
    m.root = resolve(base, j.value("root", std::string(".")));
    if (j.contains("classes"))
      m.class_names = j.at("classes").get<std::vector<std::string>>();

    const std::string default_preprocess =
        m.layout == CorpusLayout::idx_pair ? "resize_binarize" : "full";
    m.pipeline.preprocess =
        preprocess_mode_from_string(j.value("preprocess", default_preprocess));
    m.pipeline.features = feature_kind_from_string(j.value("features", std::string("hog")));
    if (j.contains("hog")) m.pipeline.hog = hog_from_json(j.at("hog"));

    if (m.layout == CorpusLayout::idx_pair) {
      m.images_file = resolve(m.root, j.at("images").get<std::string>());
      m.labels_file = resolve(m.root, j.at("labels").get<std::string>());
      if (j.contains("test_images")) {
        m.test_images_file = resolve(m.root, j.at("test_images").get<std::string>());
        m.test_labels_file = resolve(m.root, j.at("test_labels").get<std::string>());
      }
    } else if (m.layout == CorpusLayout::csv_flat) {
      m.csv_file = resolve(m.root, j.at("file").get<std::string>());
    }
    m.parse_subject_repetition = j.value("parse_subject_repetition", true);
  } catch (const json::exception& e) {
    throw ManifestError("manifest " + json_path.string() + ": " + e.what());
  }
  return m;
}

namespace {

// --- class_dirs ---------------------------------------------------------

void parse_stem_metadata(const std::string& stem, SampleMeta& meta) {
  // "<subject>_<repetition>" with a numeric repetition after the last '_'.
  const auto pos = stem.rfind('_');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= stem.size()) return;
  const std::string rep = stem.substr(pos + 1);
  if (!std::all_of(rep.begin(), rep.end(), [](char c) { return std::isdigit(c); })) return;
  meta.subject = stem.substr(0, pos);
  meta.repetition = std::stoi(rep);
}

std::vector<SampleRecord> scan_class_dirs(const CorpusManifest& m,
                                          std::vector<std::string>& class_names) {
  if (!std::filesystem::is_directory(m.root))
    throw ManifestError("corpus root is not a directory: " + m.root.string());

  if (class_names.empty()) {
    for (const auto& entry : std::filesystem::directory_iterator(m.root))
      if (entry.is_directory()) class_names.push_back(entry.path().filename().string());
    std::sort(class_names.begin(), class_names.end());
  }
  if (class_names.empty()) throw ManifestError("no class directories under " + m.root.string());

  std::vector<SampleRecord> records;
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    const auto dir = m.root / class_names[i];
    if (!std::filesystem::is_directory(dir))
      throw ManifestError("missing class directory: " + dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".png" || ext == ".pgm" || ext == ".PNG" || ext == ".PGM")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end()); // manifest record order = sorted paths

    for (const auto& file : files) {
      SampleRecord rec;
      rec.path = file;
      rec.class_index = static_cast<int>(i);
      rec.meta.source = file.string();
      if (m.parse_subject_repetition) parse_stem_metadata(file.stem().string(), rec.meta);
      records.push_back(std::move(rec));
    }
    if (records.empty() || records.back().class_index != static_cast<int>(i))
      throw ManifestError("class directory has no images: " + dir.string());
  }
  return records;
}

// --- idx_pair -----------------------------------------------------------

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DecodeError("idx: truncated header in " + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

struct IdxImages {
  int count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};

IdxImages read_idx_images(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open idx images file " + path.string());
  if (read_be32(in, path.string()) != 0x00000803u)
    throw DecodeError("idx: bad image magic in " + path.string());
  IdxImages out;
  out.count = static_cast<int>(read_be32(in, path.string()));
  out.rows = static_cast<int>(read_be32(in, path.string()));
  out.cols = static_cast<int>(read_be32(in, path.string()));
  if (out.count < 1 || out.rows < 1 || out.cols < 1)
    throw DecodeError("idx: bad dimensions in " + path.string());
  out.pixels.resize(static_cast<std::size_t>(out.count) * out.rows * out.cols);
  in.read(reinterpret_cast<char*>(out.pixels.data()),
          static_cast<std::streamsize>(out.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != out.pixels.size())
    throw DecodeError("idx: truncated pixel data in " + path.string());
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path, int expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open idx labels file " + path.string());
  if (read_be32(in, path.string()) != 0x00000801u)
    throw DecodeError("idx: bad label magic in " + path.string());
  const int count = static_cast<int>(read_be32(in, path.string()));
  if (count != expected)
    throw DecodeError("idx: label count differs from image count in " + path.string());
  std::vector<std::uint8_t> labels(count);
  in.read(reinterpret_cast<char*>(labels.data()), count);
  if (in.gcount() != count) throw DecodeError("idx: truncated labels in " + path.string());
  return labels;
}

// --- csv_flat -----------------------------------------------------------

struct CsvCorpus {
  std::vector<GrayImage> images;
  std::vector<SampleRecord> records;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

CsvCorpus read_csv_flat(const CorpusManifest& m, const std::vector<std::string>& class_names) {
  std::ifstream in(m.csv_file);
  if (!in) throw ManifestError("cannot open csv file " + m.csv_file.string());

  std::string line;
  if (!std::getline(in, line)) throw ManifestError("csv file is empty: " + m.csv_file.string());
  const auto header = split_csv_line(line);

  int label_col = -1, subject_col = -1, repetition_col = -1, split_col = -1;
  std::vector<int> pixel_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "label")
      label_col = static_cast<int>(i);
    else if (header[i] == "subject")
      subject_col = static_cast<int>(i);
    else if (header[i] == "repetition")
      repetition_col = static_cast<int>(i);
    else if (header[i] == "split")
      split_col = static_cast<int>(i);
    else
      pixel_cols.push_back(static_cast<int>(i));
  }
  if (label_col < 0) throw ManifestError("csv header needs a 'label' column");
  const int side = static_cast<int>(std::lround(std::sqrt(double(pixel_cols.size()))));
  if (side * side != static_cast<int>(pixel_cols.size()) || side < 1)
    throw ManifestError("csv pixel count is not a square: " +
                        std::to_string(pixel_cols.size()));

  std::map<std::string, int> name_to_index;
  for (std::size_t i = 0; i < class_names.size(); ++i)
    name_to_index[class_names[i]] = static_cast<int>(i);

  CsvCorpus out;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ManifestError("csv row " + std::to_string(row) + " has wrong field count");

    SampleRecord rec;
    rec.offset = row;
    rec.meta.source = m.csv_file.string() + ":" + std::to_string(row);
    const auto it = name_to_index.find(fields[label_col]);
    if (it == name_to_index.end())
      throw ManifestError("csv row " + std::to_string(row) + ": unknown label '" +
                          fields[label_col] + "'");
    rec.class_index = it->second;
    if (subject_col >= 0) rec.meta.subject = fields[subject_col];
    if (repetition_col >= 0 && !fields[repetition_col].empty())
      rec.meta.repetition = std::stoi(fields[repetition_col]);
    if (split_col >= 0 && fields[split_col] == "test") rec.meta.split = SampleSplit::test;

    GrayImage img(side, side);
    for (int p = 0; p < side * side; ++p) {
      const double v = std::stod(fields[pixel_cols[p]]);
      img.data[p] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    out.images.push_back(std::move(img));
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) throw ManifestError("csv file has no samples: " + m.csv_file.string());
  return out;
}

} // namespace

ClassPartitionedDataset load_corpus(const CorpusManifest& manifest, int workers) {
  std::vector<std::string> class_names = manifest.class_names;
  std::vector<SampleRecord> records;
  std::vector<GrayImage> preloaded; // non-empty for idx/csv layouts

  if (manifest.layout == CorpusLayout::class_dirs) {
    records = scan_class_dirs(manifest, class_names);
  } else if (manifest.layout == CorpusLayout::idx_pair) {
    auto append_pair = [&](const std::filesystem::path& images_path,
                           const std::filesystem::path& labels_path, SampleSplit split) {
      const IdxImages images = read_idx_images(images_path);
      const auto labels = read_idx_labels(labels_path, images.count);
      for (int s = 0; s < images.count; ++s) {
        GrayImage img(images.cols, images.rows);
        std::copy_n(images.pixels.begin() + static_cast<std::size_t>(s) * img.data.size(),
                    img.data.size(), img.data.begin());
        SampleRecord rec;
        rec.offset = s;
        rec.class_index = labels[s];
        rec.meta.split = split;
        rec.meta.source = images_path.string() + "#" + std::to_string(s);
        if (rec.class_index < 0 ||
            (!class_names.empty() &&
             rec.class_index >= static_cast<int>(class_names.size())))
          throw ManifestError("idx label out of range at " + rec.meta.source);
        preloaded.push_back(std::move(img));
        records.push_back(std::move(rec));
      }
    };
    append_pair(manifest.images_file, manifest.labels_file, SampleSplit::train);
    if (!manifest.test_images_file.empty())
      append_pair(manifest.test_images_file, manifest.test_labels_file, SampleSplit::test);
    if (class_names.empty()) {
      int max_label = 0;
      for (const auto& r : records) max_label = std::max(max_label, r.class_index);
      for (int i = 0; i <= max_label; ++i) class_names.push_back(std::to_string(i));
    }
  } else {
    if (class_names.empty())
      throw ManifestError("csv_flat manifest requires an explicit class list");
    CsvCorpus csv = read_csv_flat(manifest, class_names);
    records = std::move(csv.records);
    preloaded = std::move(csv.images);
  }

  const int q = static_cast<int>(class_names.size());
  const int n = manifest.pipeline.feature_length();

  std::vector<FeatureVector> features(records.size());
  std::vector<char> rejected(records.size(), 0);
  std::vector<double> extract_ms(records.size(), 0.0);

  parallel_for(static_cast<int>(records.size()), workers, [&](int idx) {
    const SampleRecord& rec = records[idx];
    const GrayImage img = preloaded.empty() ? decode_image(rec.path) : preloaded[idx];
    try {
      const auto t0 = std::chrono::steady_clock::now();
      features[idx] = manifest.pipeline.run(img);
      const auto t1 = std::chrono::steady_clock::now();
      extract_ms[idx] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    } catch (const EmptyGlyph&) {
      rejected[idx] = 1;
    }
  });

  std::vector<Eigen::MatrixXd> per_class(q);
  std::vector<std::vector<SampleMeta>> metas(q);
  std::vector<std::vector<const FeatureVector*>> kept(q);
  std::vector<std::string> reject_list;
  double total_ms = 0.0;
  int kept_count = 0;

  for (std::size_t idx = 0; idx < records.size(); ++idx) {
    if (rejected[idx]) {
      reject_list.push_back(records[idx].meta.source);
      continue;
    }
    kept[records[idx].class_index].push_back(&features[idx]);
    metas[records[idx].class_index].push_back(records[idx].meta);
    total_ms += extract_ms[idx];
    ++kept_count;
  }

  for (int i = 0; i < q; ++i) {
    if (kept[i].empty())
      throw ManifestError("class '" + class_names[i] + "' has no usable samples");
    per_class[i].resize(n, static_cast<Eigen::Index>(kept[i].size()));
    for (std::size_t c = 0; c < kept[i].size(); ++c) per_class[i].col(c) = *kept[i][c];
  }

  ClassPartitionedDataset ds(std::move(class_names), std::move(per_class), std::move(metas),
                             manifest.pipeline);
  ds.feature_extract_ms = kept_count > 0 ? total_ms / kept_count : 0.0;
  ds.rejected = std::move(reject_list);
  return ds;
}

} // namespace lpdpl
