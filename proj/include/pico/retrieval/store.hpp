#pragma once

#include "pico/contact/transfer.hpp"

#include <map>
#include <optional>
#include <string>

namespace pico {

struct EmbeddingRecord {
  std::string id;
  std::vector<float> embedding;
  std::string mesh_path;
  std::string category;
};

/// Immutable after load; every embedding has `dimension` entries.
struct EmbeddingStore {
  std::uint32_t dimension = 0;
  std::vector<EmbeddingRecord> records;

  const EmbeddingRecord* find(const std::string& id) const;
};

/// Throws DimensionMismatch or InvalidArgument (zero norm, duplicate id).
void validate(const EmbeddingStore& store);

/// "PICOEMB1", u32 count, u32 D, then per record: u32-length id, D f32,
/// u32-length mesh path, u32-length category. All little-endian.
EmbeddingStore parse_embedding_store(std::string_view bytes);
std::string serialize_embedding_store(const EmbeddingStore& store);
EmbeddingStore load_embedding_store(const std::string& path);
void save_embedding_store(const EmbeddingStore& store, const std::string& path);

struct ObjectMatch {
  const EmbeddingRecord* record = nullptr;
  double similarity = 0.0;
};

/// Top-k by cosine similarity, descending; ties by ascending id. Throws
/// DimensionMismatch, EmptyStore, InvalidArgument (k < 1 or zero query).
std::vector<ObjectMatch> nn_objects(const EmbeddingStore& store, std::span<const float> query, int k = 3);

/// Placement of one transferred patch: the two clicks on the object.
struct AxisPlacement {
  SurfacePoint start;
  Vec3 direction_point = Vec3::Zero();
};

struct ContactAnnotationRecord {
  std::string id;
  std::string image_id;
  std::vector<int> body_contacts;  // sorted, over the canonical template
  std::string object_id;
  std::vector<ParamPatch> patches;
  std::vector<AxisPlacement> placements;  // one per patch
  CorrespondenceSet correspondences;
  double object_scale = 1.0;  // metres
};

struct ContactAnnotationStore {
  std::vector<ContactAnnotationRecord> records;
};

/// Throws InvalidArgument (empty contact set, unknown object id, duplicate record id).
void validate(const ContactAnnotationStore& store, const EmbeddingStore& objects);

struct AnnotationMatch {
  const ContactAnnotationRecord* record = nullptr;
  double iou = 0.0;
};

/// Record maximizing body-contact IoU with the query; ties by ascending id.
/// Throws EmptyStore.
AnnotationMatch nn_contact_annotation(const ContactAnnotationStore& store, std::span<const int> query);

/// |A n B| / |A u B| of two vertex sets (duplicates ignored); 0 when both are empty.
double set_iou(std::span<const int> a, std::span<const int> b);

enum class Provenance { Canned, Live };

struct OracleResponse {
  std::optional<double> scale;                    // metres
  std::optional<std::vector<std::string>> parts;  // contact vocabulary names
  Provenance provenance = Provenance::Canned;
};

/// Throws InvalidArgument for a non-positive scale or UnknownPart.
void validate(const OracleResponse& response);

/// Feet parts the refinement may remove.
const std::vector<std::string>& foot_parts();

/// Drops foot-part vertices whose part the oracle did not list and adds the
/// full vertex set of every listed part `deco` does not touch. Without an
/// oracle part list `deco` is returned as is. Output sorted and unique.
/// `part_map` is expected to be a labelling (disjoint vertex sets).
/// Throws UnknownPart.
std::vector<int> refine_contacts(std::span<const int> deco, const OracleResponse& oracle,
                                 const std::map<std::string, std::vector<int>>& part_map);

}  // namespace pico
