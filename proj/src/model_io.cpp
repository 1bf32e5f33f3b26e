#include "lpdpl/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace lpdpl {

namespace {

constexpr char kMagic[8] = {'L', 'P', 'D', 'P', 'L', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class ByteWriter {
public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void raw(const void* data, std::size_t size) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + size);
  }
  void string(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void matrix(const Eigen::MatrixXd& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) f64(m(r, c));
  }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t>& bytes() { return buf_; }

private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
  explicit ByteReader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}

  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string string() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  Eigen::MatrixXd matrix() {
    const std::uint32_t rows = u32();
    const std::uint32_t cols = u32();
    if (std::uint64_t(rows) * cols > (1ULL << 31))
      throw CorruptModel("model file: implausible matrix dimensions");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = f64();
    return m;
  }
  std::size_t position() const { return pos_; }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

private:
  void need(std::size_t count) {
    if (pos_ + count > buf_.size()) throw CorruptModel("model file: truncated");
  }
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

void write_hyperparameters(ByteWriter& w, const Hyperparameters& hp) {
  w.u32(static_cast<std::uint32_t>(hp.m));
  w.f64(hp.lambda1);
  w.f64(hp.lambda2);
  w.f64(hp.lambda3);
  w.f64(hp.gamma);
  w.f64(hp.rho);
  w.u32(static_cast<std::uint32_t>(hp.outer_iters));
  w.u32(static_cast<std::uint32_t>(hp.admm_iters));
  w.f64(hp.tol);
  w.f64(hp.admm_tol);
  w.u8(hp.compat_printed_a_update ? 1 : 0);
}

Hyperparameters read_hyperparameters(ByteReader& r) {
  Hyperparameters hp;
  hp.m = static_cast<int>(r.u32());
  hp.lambda1 = r.f64();
  hp.lambda2 = r.f64();
  hp.lambda3 = r.f64();
  hp.gamma = r.f64();
  hp.rho = r.f64();
  hp.outer_iters = static_cast<int>(r.u32());
  hp.admm_iters = static_cast<int>(r.u32());
  hp.tol = r.f64();
  hp.admm_tol = r.f64();
  hp.compat_printed_a_update = r.u8() != 0;
  return hp;
}

void write_pipeline(ByteWriter& w, const FeaturePipeline& p) {
  w.u8(static_cast<std::uint8_t>(p.preprocess));
  w.u8(static_cast<std::uint8_t>(p.features));
  w.u32(static_cast<std::uint32_t>(p.hog.cell_size));
  w.u32(static_cast<std::uint32_t>(p.hog.num_bins));
  w.u8(p.hog.signed_orientations ? 1 : 0);
  w.u8(p.hog.soft_binning ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(p.hog.normalization));
}

FeaturePipeline read_pipeline(ByteReader& r) {
  FeaturePipeline p;
  const std::uint8_t pre = r.u8();
  if (pre > 2) throw CorruptModel("model file: bad preprocess mode");
  p.preprocess = static_cast<PreprocessMode>(pre);
  const std::uint8_t feat = r.u8();
  if (feat > 1) throw CorruptModel("model file: bad feature kind");
  p.features = static_cast<FeatureKind>(feat);
  p.hog.cell_size = static_cast<int>(r.u32());
  p.hog.num_bins = static_cast<int>(r.u32());
  p.hog.signed_orientations = r.u8() != 0;
  p.hog.soft_binning = r.u8() != 0;
  const std::uint8_t norm = r.u8();
  if (norm > 1) throw CorruptModel("model file: bad hog normalization");
  p.hog.normalization = static_cast<HogNormalization>(norm);
  return p;
}

} // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  write_pipeline(w, model.pipeline);
  write_hyperparameters(w, model.hp);
  w.u32(static_cast<std::uint32_t>(model.feature_length));
  w.u32(static_cast<std::uint32_t>(model.atoms));
  w.u32(static_cast<std::uint32_t>(model.num_classes()));
  w.u32(static_cast<std::uint32_t>(model.class_names.size()));
  for (const auto& name : model.class_names) w.string(name);
  for (const auto& cls : model.classes) {
    w.matrix(cls.P);
    w.matrix(cls.D);
    w.matrix(cls.W);
  }
  w.u64(fnv1a(w.bytes()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("failed writing model file " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof kMagic + 4 + 8) throw CorruptModel("model file: truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CorruptModel("model file: bad magic");

  // Verify the trailing checksum over everything before it.
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= std::uint64_t(bytes[bytes.size() - 8 + i]) << (8 * i);
  std::vector<std::uint8_t> payload(bytes.begin(), bytes.end() - 8);
  if (fnv1a(payload) != stored) throw CorruptModel("model file: checksum mismatch");

  ByteReader r(std::move(payload));
  char magic[8];
  for (auto& c : magic) c = static_cast<char>(r.u8());
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw VersionMismatch("model file: unsupported version " + std::to_string(version));

  TrainedModel model;
  model.pipeline = read_pipeline(r);
  model.hp = read_hyperparameters(r);
  model.feature_length = static_cast<int>(r.u32());
  model.atoms = static_cast<int>(r.u32());
  const int q = static_cast<int>(r.u32());
  const std::uint32_t name_count = r.u32();
  if (static_cast<int>(name_count) != q)
    throw CorruptModel("model file: class name count disagrees with Q");
  for (std::uint32_t i = 0; i < name_count; ++i) model.class_names.push_back(r.string());

  model.classes.resize(q);
  for (int i = 0; i < q; ++i) {
    model.classes[i].P = r.matrix();
    model.classes[i].D = r.matrix();
    model.classes[i].W = r.matrix();
    const auto& c = model.classes[i];
    if (c.P.rows() != model.atoms || c.P.cols() != model.feature_length ||
        c.D.rows() != model.feature_length || c.D.cols() != model.atoms ||
        c.W.rows() != q || c.W.cols() != model.atoms)
      throw CorruptModel("model file: inconsistent matrix dimensions for class " +
                         std::to_string(i));
  }
  if (r.position() != r.bytes().size()) throw CorruptModel("model file: trailing bytes");
  return model;
}

} // namespace lpdpl
