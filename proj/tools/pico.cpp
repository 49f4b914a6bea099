#include "pico/eval/metrics.hpp"
#include "pico/io/annotation.hpp"
#include "pico/io/bytes.hpp"
#include "pico/io/mesh_io.hpp"
#include "pico/mesh/shapes.hpp"
#include "pico/retrieval/oracle.hpp"
#include "pico/service/server.hpp"
#include "pico/synth/scenes.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace pico;
namespace fs = std::filesystem;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// First of dir/stem.{exts} that exists.
std::string find_file(const std::string& dir, const std::string& stem, std::initializer_list<const char*> exts) {
  for (const char* e : exts) {
    const std::string p = in_dir(dir, stem + e);
    if (fs::exists(p)) return p;
  }
  throw Error(ErrorKind::IoError, "no " + stem + " file in '" + dir + "'");
}

std::vector<int> read_vertex_list(const std::string& path) {
  const Json j = load_json(path);
  const Json& list = j.is_object() ? j.at("vertices") : j;
  return list.get<std::vector<int>>();
}

// --- transfer ---------------------------------------------------------------

struct TransferArgs {
  std::string body, contacts, object, clicks, out, object_id = "object", image_id, annotator;
};

void run_transfer(const TransferArgs& a) {
  const SurfaceMesh body = load_mesh_file(a.body);
  const SurfaceMesh object = load_mesh_file(a.object);
  std::vector<int> contacts = read_vertex_list(a.contacts);
  std::sort(contacts.begin(), contacts.end());
  contacts.erase(std::unique(contacts.begin(), contacts.end()), contacts.end());
  const auto prepared = prepare_patches(body, contacts);

  AnnotationDocument doc;
  doc.image_id = a.image_id;
  doc.body_contacts = contacts;
  doc.object_id = a.object_id;
  doc.object_path = fs::absolute(a.object).lexically_relative(fs::absolute(a.out).parent_path()).string();
  doc.annotator = a.annotator;
  const Json clicks = load_json(a.clicks);
  require(clicks.is_array(), ErrorKind::ParseError, a.clicks + ": expected a list of clicks");
  for (const Json& c : clicks) {
    const int pid = c.at("patch_id").get<int>();
    require(pid >= 0 && pid < static_cast<int>(prepared.size()), ErrorKind::InvalidArgument,
            "no patch " + std::to_string(pid) + " (" + std::to_string(prepared.size()) + " patches)");
    AnnotationPatch p = place_patch(object, a.object_id, prepared[pid], surface_point_from_json(c.at("click1")),
                                    vec3_from_json(c.at("click2")));
    std::cout << "patch " << pid << ": " << p.correspondences.pairs.size() << " points, " << p.dropped
              << " dropped\n";
    doc.patches.push_back(std::move(p));
  }
  save_annotation(doc, a.out);
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string annotation, body_model, camera, masks, config, out, pose, object, meshes, oracle;
  std::optional<double> scale;
  std::optional<int> stages, iterations;
};

void run_fit(const FitArgs& a) {
  const AnnotationDocument doc = load_annotation(a.annotation);
  const BodyModel body = load_body_model(a.body_model);
  FitConfig config = a.config.empty() ? FitConfig{} : fit_config_from_json(load_json(a.config));
  if (a.stages) config.stages = *a.stages;
  if (a.iterations) config.iterations = *a.iterations;
  validate(config);

  FitInputs in;
  in.body = &body;
  in.camera = camera_from_json(load_json(a.camera));
  const std::string object_path =
      !a.object.empty() ? a.object
                        : (fs::path(doc.object_path).is_absolute()
                               ? doc.object_path
                               : (fs::path(a.annotation).parent_path() / doc.object_path).string());
  in.object = load_mesh_file(object_path);
  validate_on_object(doc, in.object);
  in.object_mask = load_mask_file(find_file(a.masks, "object", {".pgm", ".pbm"}));
  in.human_mask = load_mask_file(find_file(a.masks, "human", {".pgm", ".pbm"}));
  in.correspondences = doc.correspondences();
  for (const AnnotationPatch& p : doc.patches) in.dropped += p.dropped;

  if (!a.pose.empty())
    in.theta = pose_from_json(load_json(a.pose));
  else if (doc.init_theta)
    in.theta = *doc.init_theta;
  else
    in.theta = PoseVector::zero(body.num_joints());

  if (a.scale) {
    in.scale = *a.scale;
  } else if (doc.init_scale) {
    in.scale = *doc.init_scale;
  } else {
    const OracleClient oracle(oracle_config_from_env(a.oracle));
    const OracleResponse r = oracle.query(doc.image_id, doc.object_id);
    require(r.scale.has_value(), ErrorKind::InvalidArgument, "oracle gave no scale for '" + doc.image_id + "'");
    in.scale = *r.scale;
  }
  require(in.scale > 0.0, ErrorKind::InvalidArgument, "scale must be positive");

  const FitResult result = fit(in, config);
  save_json(to_json(result), a.out);
  for (size_t s = 0; s < result.stages.size(); ++s)
    std::cout << "stage " << s + 1 << ": loss " << result.stages[s].initial_loss << " -> "
              << result.stages[s].final_loss << " (" << result.stages[s].iterations << " iterations)\n";
  if (!a.meshes.empty()) {
    fs::create_directories(a.meshes);
    save_mesh_file(pose_body(body, result.theta), in_dir(a.meshes, "human.ply"));
    save_mesh_file(posed_object(in.object, result), in_dir(a.meshes, "object.ply"));
  }
}

// --- retrieve ---------------------------------------------------------------

void run_retrieve(const std::string& store_path, const std::string& query_path, int k) {
  const EmbeddingStore store = load_embedding_store(store_path);
  const Json q = load_json(query_path);
  const std::vector<float> query = (q.is_object() ? q.at("embedding") : q).get<std::vector<float>>();
  Json out = Json::array();
  for (const ObjectMatch& m : nn_objects(store, query, k))
    out.push_back({{"id", m.record->id},
                   {"similarity", m.similarity},
                   {"mesh_path", m.record->mesh_path},
                   {"category", m.record->category}});
  std::cout << out.dump(2) << "\n";
}

// --- eval -------------------------------------------------------------------

void run_eval(const std::string& pred, const std::string& gt, const std::string& out, int samples,
              std::uint64_t seed) {
  const std::initializer_list<const char*> exts{".ply", ".obj"};
  EvalReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.chamfer = pa_cd(load_mesh_file(find_file(pred, "human", exts)), load_mesh_file(find_file(pred, "object", exts)),
                      load_mesh_file(find_file(gt, "human", exts)), load_mesh_file(find_file(gt, "object", exts)),
                      samples, seed);
  const std::string pc = in_dir(pred, "contacts.json"), gc = in_dir(gt, "contacts.json");
  if (fs::exists(pc) && fs::exists(gc)) {
    const Json p = load_json(pc), g = load_json(gc);
    if (p.contains("body") && g.contains("body"))
      rep.body_contact = contact_f1(p["body"].get<std::vector<int>>(), g["body"].get<std::vector<int>>());
    if (p.contains("object") && g.contains("object"))
      rep.object_contact = contact_f1(p["object"].get<std::vector<int>>(), g["object"].get<std::vector<int>>());
  }
  const Json j = to_json(rep);
  save_json(j, out);
  std::cout << "PA-CD (cm): human " << rep.chamfer.human << ", object " << rep.chamfer.object << ", combined "
            << rep.chamfer.combined << "\n";
}

// --- synth ------------------------------------------------------------------

void synth_grasp(const std::string& out, std::uint64_t seed) {
  const GraspScene s = grasp_scene(seed);
  fs::create_directories(in_dir(out, "masks"));
  fs::create_directories(in_dir(out, "gt"));
  save_json(to_json(*s.body), in_dir(out, "body_model.json"));
  save_json(to_json(s.camera), in_dir(out, "camera.json"));
  save_json(to_json(FitConfig{}), in_dir(out, "config.json"));
  save_mesh_file(s.object, in_dir(out, "object.ply"));
  save_mask_file(s.object_mask, in_dir(out, "masks/object.pgm"));
  save_mask_file(s.human_mask, in_dir(out, "masks/human.pgm"));
  const SurfaceMesh gt_h = s.gt_human_mesh(), gt_o = s.gt_object_mesh();
  save_mesh_file(gt_h, in_dir(out, "gt/human.ply"));
  save_mesh_file(gt_o, in_dir(out, "gt/object.ply"));
  const ContactSets gt_c = gt_contact_extract(gt_h, gt_o);
  save_json({{"body", gt_c.body}, {"object", gt_c.object}}, in_dir(out, "gt/contacts.json"));

  // The scene's correspondences grouped by patch; clicks mark the first and
  // last transferred point of each patch.
  AnnotationDocument doc;
  doc.image_id = "grasp_" + std::to_string(seed);
  doc.object_id = "box";
  doc.object_path = "object.ply";
  doc.annotator = "synth";
  doc.init_theta = s.init_theta;
  doc.init_scale = s.init_scale;
  std::map<int, AnnotationPatch> patches;
  std::vector<int> contacts;
  for (const Correspondence& c : s.correspondences.pairs) {
    AnnotationPatch& p = patches[c.patch_id];
    if (p.correspondences.pairs.empty()) p.click1 = c.object_point;
    p.patch_id = c.patch_id;
    p.object_id = "box";
    p.param.patch_id = c.patch_id;
    p.click2 = s.object.position(c.object_point);
    p.correspondences.pairs.push_back(c);
    contacts.push_back(c.body_vertex);
  }
  std::sort(contacts.begin(), contacts.end());
  contacts.erase(std::unique(contacts.begin(), contacts.end()), contacts.end());
  doc.body_contacts = contacts;
  for (auto& [_, p] : patches) doc.patches.push_back(std::move(p));
  save_annotation(doc, in_dir(out, "annotation.json"));
  save_json({{doc.image_id, {{"scale", s.init_scale}, {"parts", Json::array({"leftHand", "rightHand", "torso"})}}}},
            in_dir(out, "oracle.json"));
}

void synth_annotation(const std::string& out) {
  const SurfaceMesh body = shapes::plane_grid(24, 0.6);
  const SurfaceMesh object = shapes::box(Vec3::Zero(), Vec3(0.6, 0.2, 0.6), 12);
  std::vector<int> contacts;
  for (int v = 0; v < body.num_vertices(); ++v)
    if (body.vertex(v).head<2>().norm() < 0.05 || (body.vertex(v) - Vec3(0.12, 0.1, 0)).norm() < 0.04)
      contacts.push_back(v);
  fs::create_directories(out);
  save_mesh_file(body, in_dir(out, "body.ply"));
  save_mesh_file(object, in_dir(out, "object.ply"));
  save_json(contacts, in_dir(out, "contacts.json"));
  Json clicks = Json::array();
  const double xs[2] = {-0.1, 0.1};
  for (int i = 0; i < 2; ++i)
    clicks.push_back({{"patch_id", i},
                      {"click1", to_json(object.closest_point(Vec3(xs[i], 1.0, 0.0)).point)},
                      {"click2", to_json(object.closest_point(Vec3(xs[i], 1.0, 0.1)).position)}});
  save_json(clicks, in_dir(out, "clicks.json"));
  write_session(in_dir(out, "assets/demo"), body, contacts, object, "box", "demo");

  std::mt19937_64 rng(1);
  EmbeddingStore store;
  store.dimension = 8;
  for (int i = 0; i < 16; ++i) {
    EmbeddingRecord r{"obj" + std::to_string(i), {}, "meshes/obj" + std::to_string(i) + ".ply", i % 2 ? "chair" : "box"};
    for (int d = 0; d < 8; ++d) r.embedding.push_back(static_cast<float>(uniform01(rng) - 0.5));
    store.records.push_back(std::move(r));
  }
  save_embedding_store(store, in_dir(out, "store.bin"));
  save_json(store.records[3].embedding, in_dir(out, "query.json"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pico: contact transfer, fitting and evaluation"};
  app.require_subcommand(1);

  TransferArgs ta;
  auto* transfer = app.add_subcommand("transfer", "Headless two-click contact transfer");
  transfer->add_option("--body", ta.body, "Body mesh (OBJ/PLY)")->required();
  transfer->add_option("--contacts", ta.contacts, "Contact vertex list (JSON)")->required();
  transfer->add_option("--object", ta.object, "Object mesh (OBJ/PLY)")->required();
  transfer->add_option("--clicks", ta.clicks, "Clicks per patch (JSON)")->required();
  transfer->add_option("--out", ta.out, "Annotation output")->required();
  transfer->add_option("--object-id", ta.object_id);
  transfer->add_option("--image-id", ta.image_id);
  transfer->add_option("--annotator", ta.annotator);

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Three-stage human-object fit");
  fitc->add_option("--annotation", fa.annotation)->required();
  fitc->add_option("--body-model", fa.body_model)->required();
  fitc->add_option("--camera", fa.camera)->required();
  fitc->add_option("--masks", fa.masks, "Directory with object and human masks")->required();
  fitc->add_option("--config", fa.config);
  fitc->add_option("--out", fa.out)->required();
  fitc->add_option("--pose", fa.pose, "Initial body pose (overrides the annotation)");
  fitc->add_option("--scale", fa.scale, "Object scale prior in metres (overrides annotation and oracle)");
  fitc->add_option("--object", fa.object, "Object mesh (overrides the annotation's path)");
  fitc->add_option("--oracle", fa.oracle, "Canned oracle responses for the scale prior");
  fitc->add_option("--stages", fa.stages)->check(CLI::Range(1, 3));
  fitc->add_option("--iterations", fa.iterations);
  fitc->add_option("--meshes", fa.meshes, "Write posed human.ply and object.ply here");

  std::string store, query;
  int k = 3;
  auto* retrieve = app.add_subcommand("retrieve", "Nearest objects by embedding");
  retrieve->add_option("--store", store)->required();
  retrieve->add_option("--query", query, "Query vector (JSON list)")->required();
  retrieve->add_option("--k", k)->check(CLI::PositiveNumber);

  std::string pred, gt, report;
  int samples = 8192;
  std::uint64_t seed = 0;
  auto* evalc = app.add_subcommand("eval", "PA-CD and contact F1");
  evalc->add_option("--pred", pred)->required();
  evalc->add_option("--gt", gt)->required();
  evalc->add_option("--out", report)->required();
  evalc->add_option("--samples", samples)->check(CLI::PositiveNumber);
  evalc->add_option("--seed", seed);

  std::string scenario, synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic scene (grasp | annotation)");
  synth->add_option("--scenario", scenario)->required()->check(CLI::IsMember({"grasp", "annotation"}));
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--seed", synth_seed);

  std::string assets, host = "127.0.0.1";
  int port = 8080;
  auto* servec = app.add_subcommand("serve", "Annotation service");
  servec->add_option("--port", port)->check(CLI::Range(1, 65535));
  servec->add_option("--assets", assets)->required();
  servec->add_option("--host", host);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*transfer) run_transfer(ta);
    if (*fitc) run_fit(fa);
    if (*retrieve) run_retrieve(store, query, k);
    if (*evalc) run_eval(pred, gt, report, samples, seed);
    if (*synth) scenario == "grasp" ? synth_grasp(synth_out, synth_seed) : synth_annotation(synth_out);
    if (*servec) {
      std::cout << "serving " << assets << " on " << host << ":" << port << std::endl;
      serve(assets, port, host);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
