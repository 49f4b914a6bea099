#include "pico/retrieval/store.hpp"

#include "pico/body/body_model.hpp"
#include "pico/io/bytes.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pico {

namespace {

constexpr std::string_view kMagic = "PICOEMB1";

double norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

std::vector<int> sorted_unique(std::span<const int> v) {
  std::vector<int> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

const EmbeddingRecord* EmbeddingStore::find(const std::string& id) const {
  for (const EmbeddingRecord& r : records)
    if (r.id == id) return &r;
  return nullptr;
}

void validate(const EmbeddingStore& store) {
  std::set<std::string> ids;
  for (const EmbeddingRecord& r : store.records) {
    require(r.embedding.size() == store.dimension, ErrorKind::DimensionMismatch,
            "record '" + r.id + "' has " + std::to_string(r.embedding.size()) + " entries, store declares " +
                std::to_string(store.dimension));
    const double n = norm(r.embedding);
    require(std::isfinite(n) && n > 0.0, ErrorKind::InvalidArgument, "record '" + r.id + "' has zero norm");
    require(ids.insert(r.id).second, ErrorKind::InvalidArgument, "duplicate object id '" + r.id + "'");
  }
}

EmbeddingStore parse_embedding_store(std::string_view bytes) {
  ByteReader in(bytes, "embedding store");
  if (in.bytes(std::min(in.remaining(), kMagic.size())) != kMagic) in.fail("bad magic");
  EmbeddingStore store;
  const auto count = in.read<std::uint32_t>();
  store.dimension = in.read<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    r.id = in.string();
    r.embedding.resize(store.dimension);
    for (float& x : r.embedding) x = in.read<float>();
    r.mesh_path = in.string();
    r.category = in.string();
    store.records.push_back(std::move(r));
  }
  in.expect_end();
  validate(store);
  return store;
}

std::string serialize_embedding_store(const EmbeddingStore& store) {
  validate(store);
  ByteWriter out;
  out.bytes(kMagic);
  out.write(static_cast<std::uint32_t>(store.records.size()));
  out.write(store.dimension);
  for (const EmbeddingRecord& r : store.records) {
    out.string(r.id);
    for (float x : r.embedding) out.write(x);
    out.string(r.mesh_path);
    out.string(r.category);
  }
  return out.data();
}

EmbeddingStore load_embedding_store(const std::string& path) { return parse_embedding_store(read_file(path)); }

void save_embedding_store(const EmbeddingStore& store, const std::string& path) {
  write_file(path, serialize_embedding_store(store));
}

std::vector<ObjectMatch> nn_objects(const EmbeddingStore& store, std::span<const float> query, int k) {
  require(!store.records.empty(), ErrorKind::EmptyStore, "embedding store is empty");
  require(query.size() == store.dimension, ErrorKind::DimensionMismatch,
          "query has " + std::to_string(query.size()) + " entries, store declares " +
              std::to_string(store.dimension));
  require(k >= 1, ErrorKind::InvalidArgument, "k must be at least 1");
  const double qn = norm(query);
  require(qn > 0.0, ErrorKind::InvalidArgument, "query has zero norm");

  std::vector<ObjectMatch> all;
  all.reserve(store.records.size());
  for (const EmbeddingRecord& r : store.records) {
    double dot = 0.0;
    for (size_t i = 0; i < query.size(); ++i) dot += static_cast<double>(query[i]) * r.embedding[i];
    all.push_back({&r, dot / (qn * norm(r.embedding))});
  }
  const auto better = [](const ObjectMatch& a, const ObjectMatch& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.record->id < b.record->id;
  };
  const size_t n = std::min(all.size(), static_cast<size_t>(k));
  std::partial_sort(all.begin(), all.begin() + n, all.end(), better);
  all.resize(n);
  return all;
}

void validate(const ContactAnnotationStore& store, const EmbeddingStore& objects) {
  std::set<std::string> ids;
  for (const ContactAnnotationRecord& r : store.records) {
    require(!r.body_contacts.empty(), ErrorKind::InvalidArgument, "record '" + r.id + "' has no body contact");
    require(objects.find(r.object_id) != nullptr, ErrorKind::InvalidArgument,
            "record '" + r.id + "' references unknown object '" + r.object_id + "'");
    require(ids.insert(r.id).second, ErrorKind::InvalidArgument, "duplicate record id '" + r.id + "'");
  }
}

double set_iou(std::span<const int> a, std::span<const int> b) {
  const std::vector<int> x = sorted_unique(a), y = sorted_unique(b);
  std::vector<int> both;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(both));
  const size_t uni = x.size() + y.size() - both.size();
  return uni == 0 ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(uni);
}

AnnotationMatch nn_contact_annotation(const ContactAnnotationStore& store, std::span<const int> query) {
  require(!store.records.empty(), ErrorKind::EmptyStore, "annotation store is empty");
  const std::vector<int> q = sorted_unique(query);
  AnnotationMatch best;
  for (const ContactAnnotationRecord& r : store.records) {
    const double iou = set_iou(q, r.body_contacts);
    if (best.record == nullptr || iou > best.iou || (iou == best.iou && r.id < best.record->id))
      best = {&r, iou};
  }
  return best;
}

void validate(const OracleResponse& response) {
  if (response.scale)
    require(std::isfinite(*response.scale) && *response.scale > 0.0, ErrorKind::InvalidArgument,
            "oracle scale must be positive");
  if (response.parts) {
    const auto& vocab = contact_part_vocabulary();
    for (const std::string& p : *response.parts)
      require(std::find(vocab.begin(), vocab.end(), p) != vocab.end(), ErrorKind::UnknownPart,
              "'" + p + "' is not a contact body part");
  }
}

const std::vector<std::string>& foot_parts() {
  static const std::vector<std::string> feet{"leftFootSole", "rightFootSole", "topOfLeftFoot", "topOfRightFoot"};
  return feet;
}

std::vector<int> refine_contacts(std::span<const int> deco, const OracleResponse& oracle,
                                 const std::map<std::string, std::vector<int>>& part_map) {
  std::vector<int> out = sorted_unique(deco);
  if (!oracle.parts) return out;
  const std::vector<std::string>& listed = *oracle.parts;
  auto part = [&](const std::string& name) -> const std::vector<int>& {
    const auto it = part_map.find(name);
    if (it == part_map.end()) throw Error(ErrorKind::UnknownPart, "no vertex set for part '" + name + "'");
    return it->second;
  };
  for (const std::string& name : listed) part(name);

  const std::vector<int> original = out;
  for (const std::string& foot : foot_parts()) {
    if (std::find(listed.begin(), listed.end(), foot) != listed.end()) continue;
    const auto it = part_map.find(foot);
    if (it == part_map.end()) continue;
    const std::vector<int> drop = sorted_unique(it->second);
    std::erase_if(out, [&](int v) { return std::binary_search(drop.begin(), drop.end(), v); });
  }
  for (const std::string& name : listed) {
    const std::vector<int>& verts = part(name);
    const bool touched = std::any_of(verts.begin(), verts.end(), [&](int v) {
      return std::binary_search(original.begin(), original.end(), v);
    });
    if (!touched) out.insert(out.end(), verts.begin(), verts.end());
  }
  return sorted_unique(out);
}

}  // namespace pico
