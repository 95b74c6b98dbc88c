#include "simuda/backbone/checkpoint.hpp"

#include <cstring>

#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"

namespace simuda::backbone {

namespace {

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string origin) : bytes_(bytes), origin_(std::move(origin)) {}

  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void read_floats(float* dst, std::size_t count) {
    need(count * sizeof(float));
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IntegrityError("checkpoint '" + origin_ + "' is truncated");
  }
  const std::string& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

nlohmann::json CheckpointMeta::to_json() const {
  return {{"spec",
           {{"source", std::string(to_string(spec.source))},
            {"hub_id", spec.hub_id},
            {"resolution", spec.resolution},
            {"feature_dim", spec.feature_dim},
            {"pooling", std::string(to_string(spec.pooling))}}},
          {"num_classes", num_classes},
          {"feature_dim", feature_dim},
          {"scheme", scheme},
          {"extra", extra}};
}

CheckpointMeta CheckpointMeta::from_json(const nlohmann::json& j) {
  try {
    CheckpointMeta m;
    const auto& s = j.at("spec");
    m.spec.source = parse_backbone_source(s.at("source").get<std::string>());
    m.spec.hub_id = s.at("hub_id").get<std::string>();
    m.spec.resolution = s.at("resolution").get<int>();
    m.spec.feature_dim = s.at("feature_dim").get<int>();
    m.spec.pooling = parse_pooling(s.at("pooling").get<std::string>());
    m.num_classes = j.at("num_classes").get<int>();
    m.feature_dim = j.at("feature_dim").get<int>();
    m.scheme = j.at("scheme").get<std::string>();
    m.extra = j.value("extra", nlohmann::json::object());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("checkpoint metadata is malformed: ") + e.what());
  }
}

const Matrix* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const ClassifierModel& model, const std::string& scheme,
                     const nlohmann::json& extra) {
  CheckpointMeta meta;
  meta.spec = model.spec();
  meta.num_classes = model.num_classes();
  meta.feature_dim = model.feature_dim();
  meta.scheme = scheme;
  meta.extra = extra;
  const std::string meta_text = meta.to_json().dump();

  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, meta_text.size());
  out += meta_text;
  const auto params = model.parameters();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.cols()));
    out.append(reinterpret_cast<const char*>(p->value.data()), static_cast<std::size_t>(p->value.size()) * sizeof(float));
  }
  write_text_atomic(path, out);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  Reader r(bytes, path.string());
  if (r.take(sizeof kCheckpointMagic) != std::string(kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw IntegrityError("'" + path.string() + "' is not a checkpoint archive");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IntegrityError("checkpoint '" + path.string() + "' has unsupported version " + std::to_string(version));
  }
  const auto meta_len = r.get<std::uint64_t>();
  Checkpoint ck;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(r.take(static_cast<std::size_t>(meta_len)));
  } catch (const nlohmann::json::parse_error& e) {
    throw IntegrityError("checkpoint '" + path.string() + "' metadata: " + e.what());
  }
  ck.meta = CheckpointMeta::from_json(meta);
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.take(r.get<std::uint32_t>());
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    Matrix m(rows, cols);
    r.read_floats(m.data(), static_cast<std::size_t>(rows) * cols);
    ck.tensors.emplace_back(std::move(name), std::move(m));
  }
  if (!r.done()) throw IntegrityError("checkpoint '" + path.string() + "' has trailing bytes");
  return ck;
}

void load_state(ClassifierModel& model, const Checkpoint& ckpt, bool include_head) {
  for (auto* p : model.parameters()) {
    const bool is_head = p->name.rfind("head.", 0) == 0;
    if (is_head && !include_head) continue;
    const Matrix* t = ckpt.find(p->name);
    if (!t) throw IntegrityError("checkpoint lacks tensor '" + p->name + "'");
    if (t->rows() != p->value.rows() || t->cols() != p->value.cols()) {
      throw IntegrityError("tensor '" + p->name + "' has shape " + std::to_string(t->rows()) + "x" +
                           std::to_string(t->cols()) + ", model expects " + std::to_string(p->value.rows()) + "x" +
                           std::to_string(p->value.cols()));
    }
    p->value = *t;
  }
}

ClassifierModel model_from_checkpoint(const Checkpoint& ckpt) {
  BackboneSpec spec = ckpt.meta.spec;
  spec.feature_dim = ckpt.meta.feature_dim;
  Rng rng(0);
  ClassifierModel model(spec, ckpt.meta.num_classes, rng);
  load_state(model, ckpt, true);
  return model;
}

}  // namespace simuda::backbone
