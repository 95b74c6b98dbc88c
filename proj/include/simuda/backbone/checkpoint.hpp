#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "simuda/backbone/model.hpp"

namespace simuda::backbone {

inline constexpr char kCheckpointMagic[8] = {'S', 'I', 'M', 'U', 'D', 'A', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Metadata record stored alongside the tensors.
struct CheckpointMeta {
  BackboneSpec spec;
  int num_classes = 0;
  int feature_dim = 0;
  std::string scheme;  // training-scheme provenance, e.g. "CH", "FT", "UDA/cdan_mcc"
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
  static CheckpointMeta from_json(const nlohmann::json& j);
};

struct Checkpoint {
  CheckpointMeta meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix* find(const std::string& name) const;
};

/// Archive layout: magic, u32 version, u64 metadata length, metadata JSON,
/// u32 tensor count, then per tensor u32 name length, name, u32 rows,
/// u32 cols, rows*cols little-endian float32. Written atomically.
void save_checkpoint(const std::filesystem::path& path, const ClassifierModel& model, const std::string& scheme,
                     const nlohmann::json& extra = nlohmann::json::object());

/// Throws DataError when unreadable, IntegrityError when malformed.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies tensors into `model`. Every model parameter must be present with a
/// matching shape (IntegrityError otherwise); the head is skipped when
/// `include_head` is false.
void load_state(ClassifierModel& model, const Checkpoint& ckpt, bool include_head = true);

/// Rebuilds the model described by the metadata and loads every tensor.
ClassifierModel model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace simuda::backbone
