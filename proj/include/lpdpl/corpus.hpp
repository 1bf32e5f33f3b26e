#ifndef LPDPL_CORPUS_HPP
#define LPDPL_CORPUS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lpdpl/dataset.hpp"
#include "lpdpl/pipeline.hpp"

namespace lpdpl {

enum class CorpusLayout {
  class_dirs, // one directory of PNG/PGM files per class
  idx_pair,   // IDX image/label file pair(s), MNIST-style
  csv_flat,   // one CSV row per sample: label[,subject,repetition,split],pixels...
};

struct SampleRecord {
  std::filesystem::path path; // class_dirs
  long offset = -1;           // idx_pair: image index; csv_flat: row number
  int class_index = -1;
  SampleMeta meta;
};

struct CorpusManifest {
  std::filesystem::path root;
  CorpusLayout layout = CorpusLayout::class_dirs;
  std::vector<std::string> class_names;
  FeaturePipeline pipeline;

  // idx_pair
  std::filesystem::path images_file, labels_file;
  std::filesystem::path test_images_file, test_labels_file; // optional second pair

  // csv_flat
  std::filesystem::path csv_file;

  // class_dirs: stems matching "<subject>_<repetition>" yield grouped-CV
  // metadata; anything else loads with empty metadata.
  bool parse_subject_repetition = true;

  // Reads the JSON manifest; relative paths resolve against its directory.
  static CorpusManifest load(const std::filesystem::path& json_path);
};

// Decodes every record, runs the configured feature pipeline, and assembles
// per-class feature matrices. Samples with no foreground after binarization
// are skipped and recorded on the dataset's reject list.
ClassPartitionedDataset load_corpus(const CorpusManifest& manifest, int workers = 1);

} // namespace lpdpl

#endif
