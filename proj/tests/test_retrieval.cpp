#include <doctest.h>

#include "pico/body/body_model.hpp"
#include "pico/retrieval/oracle.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

using namespace pico;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

EmbeddingStore random_store(int n, std::uint32_t dim, std::mt19937& rng) {
  std::normal_distribution<float> g;
  EmbeddingStore s;
  s.dimension = dim;
  for (int i = 0; i < n; ++i) {
    EmbeddingRecord r;
    r.id = "obj" + std::to_string(i);
    for (std::uint32_t d = 0; d < dim; ++d) r.embedding.push_back(g(rng));
    r.mesh_path = "meshes/" + r.id + ".obj";
    r.category = i % 2 ? "chair" : "box";
    s.records.push_back(std::move(r));
  }
  return s;
}

// long-double cosine over every record, full sort
std::vector<std::pair<std::string, long double>> exhaustive(const EmbeddingStore& s, const std::vector<float>& q) {
  std::vector<std::pair<std::string, long double>> all;
  for (const auto& r : s.records) {
    long double dot = 0, a = 0, b = 0;
    for (size_t i = 0; i < q.size(); ++i) {
      dot += (long double)q[i] * r.embedding[i];
      a += (long double)q[i] * q[i];
      b += (long double)r.embedding[i] * r.embedding[i];
    }
    all.emplace_back(r.id, dot / std::sqrt(a * b));
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  return all;
}

std::map<std::string, std::vector<int>> part_map(const BodyModel& m) {
  std::map<std::string, std::vector<int>> out;
  for (const std::string& p : m.part_names) out[p] = m.part_vertices(p);
  return out;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pico_test_retrieval_" + name)).string();
}

}  // namespace

TEST_CASE("nn_objects matches an exhaustive search") {
  std::mt19937 rng(7);
  const EmbeddingStore s = random_store(1000, 16, rng);
  std::normal_distribution<float> g;
  for (int t = 0; t < 50; ++t) {
    std::vector<float> q(16);
    for (float& x : q) x = g(rng);
    const auto got = nn_objects(s, q, 3);
    const auto want = exhaustive(s, q);
    REQUIRE(got.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(got[i].record->id == want[i].first);
      CHECK(got[i].similarity == doctest::Approx((double)want[i].second).epsilon(1e-12));
    }
    std::vector<float> scaled = q;
    for (float& x : scaled) x *= 7.5f;
    const auto again = nn_objects(s, scaled, 3);
    for (int i = 0; i < 3; ++i) CHECK(again[i].record->id == got[i].record->id);
  }
}

TEST_CASE("nn_objects ties and edge cases") {
  EmbeddingStore s;
  s.dimension = 3;
  s.records = {{"c", {0, 0, 1}, "", ""}, {"b", {0, 1, 0}, "", ""}, {"a", {1, 0, 0}, "", ""}};
  const std::vector<float> q{1, 1, 0};
  const auto m = nn_objects(s, q, 3);
  REQUIRE(m.size() == 3);
  CHECK(m[0].record->id == "a");
  CHECK(m[1].record->id == "b");
  CHECK(m[0].similarity == m[1].similarity);
  CHECK(m[2].record->id == "c");
  CHECK(m[2].similarity == 0.0);
  CHECK(nn_objects(s, q, 10).size() == 3);
  CHECK(nn_objects(s, q, 1).front().record->id == "a");

  CHECK(kind_of([&] { nn_objects(s, std::vector<float>{1, 0}, 3); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { nn_objects(s, q, 0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { nn_objects(s, std::vector<float>{0, 0, 0}, 3); }) == ErrorKind::InvalidArgument);
  EmbeddingStore empty;
  empty.dimension = 3;
  CHECK(kind_of([&] { nn_objects(empty, q, 3); }) == ErrorKind::EmptyStore);
}

TEST_CASE("embedding store binary round trip") {
  std::mt19937 rng(3);
  const EmbeddingStore s = random_store(20, 8, rng);
  const std::string bytes = serialize_embedding_store(s);
  CHECK(bytes.substr(0, 8) == "PICOEMB1");
  const EmbeddingStore back = parse_embedding_store(bytes);
  REQUIRE(back.records.size() == 20);
  CHECK(back.dimension == 8);
  for (size_t i = 0; i < 20; ++i) {
    CHECK(back.records[i].id == s.records[i].id);
    CHECK(back.records[i].embedding == s.records[i].embedding);
    CHECK(back.records[i].mesh_path == s.records[i].mesh_path);
    CHECK(back.records[i].category == s.records[i].category);
  }
  CHECK(serialize_embedding_store(back) == bytes);

  const std::string path = temp_path("store.bin");
  save_embedding_store(s, path);
  CHECK(serialize_embedding_store(load_embedding_store(path)) == bytes);
  std::filesystem::remove(path);

  std::string bad = bytes;
  bad[3] = 'X';
  CHECK(kind_of([&] { parse_embedding_store(bad); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { parse_embedding_store(bytes + "x"); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { parse_embedding_store(bytes.substr(0, bytes.size() - 2)); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { parse_embedding_store("PIC"); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { load_embedding_store(temp_path("missing.bin")); }) == ErrorKind::IoError);

  EmbeddingStore wrong = s;
  wrong.records[4].embedding.pop_back();
  CHECK(kind_of([&] { serialize_embedding_store(wrong); }) == ErrorKind::DimensionMismatch);
  wrong = s;
  wrong.records[5].id = wrong.records[2].id;
  CHECK(kind_of([&] { validate(wrong); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("nn_contact_annotation matches an IoU oracle") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> vert(0, 299), len(1, 40);
  ContactAnnotationStore store;
  for (int i = 0; i < 50; ++i) {
    ContactAnnotationRecord r;
    r.id = "rec" + std::to_string(100 + i);
    std::set<int> v;
    const int n = len(rng);
    while ((int)v.size() < n) v.insert(vert(rng));
    r.body_contacts.assign(v.begin(), v.end());
    r.object_id = "obj0";
    store.records.push_back(std::move(r));
  }
  store.records.push_back(store.records[7]);
  store.records.back().id = "rec000";  // duplicate contacts, lower id

  ContactAnnotationStore shuffled = store;
  std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);

  for (int t = 0; t < 200; ++t) {
    std::vector<int> q;
    if (t % 10 == 0) {
      q = store.records[t % 50].body_contacts;
    } else {
      const int n = len(rng);
      for (int k = 0; k < n; ++k) q.push_back(vert(rng));
    }
    std::string best_id;
    double best = -1;
    const std::set<int> qs(q.begin(), q.end());
    for (const auto& r : store.records) {
      const std::set<int> rs(r.body_contacts.begin(), r.body_contacts.end());
      int inter = 0;
      for (int v : qs) inter += rs.count(v);
      const double iou = double(inter) / double(qs.size() + rs.size() - inter);
      if (iou > best || (iou == best && r.id < best_id)) best = iou, best_id = r.id;
    }
    const AnnotationMatch m = nn_contact_annotation(store, q);
    CHECK(m.record->id == best_id);
    CHECK(m.iou == doctest::Approx(best).epsilon(1e-15));
    std::shuffle(q.begin(), q.end(), rng);
    CHECK(nn_contact_annotation(shuffled, q).record->id == best_id);
  }
  CHECK(nn_contact_annotation(store, store.records[7].body_contacts).record->id == "rec000");
  CHECK(kind_of([] { nn_contact_annotation(ContactAnnotationStore{}, std::vector<int>{1}); }) == ErrorKind::EmptyStore);
}

TEST_CASE("set_iou") {
  CHECK(set_iou(std::vector<int>{1, 2, 3}, std::vector<int>{2, 3, 4}) == doctest::Approx(0.5));
  CHECK(set_iou(std::vector<int>{1, 1, 2}, std::vector<int>{2, 1}) == 1.0);
  CHECK(set_iou(std::vector<int>{}, std::vector<int>{}) == 0.0);
  CHECK(set_iou(std::vector<int>{1}, std::vector<int>{}) == 0.0);
}

TEST_CASE("annotation store validation") {
  EmbeddingStore objs;
  objs.dimension = 1;
  objs.records = {{"obj0", {1.0f}, "", ""}};
  ContactAnnotationStore s;
  s.records.push_back({"r1", "img", {1, 2}, "obj0", {}, {}, {}, 1.0});
  CHECK_NOTHROW(validate(s, objs));
  s.records.push_back({"r2", "img", {}, "obj0", {}, {}, {}, 1.0});
  CHECK(kind_of([&] { validate(s, objs); }) == ErrorKind::InvalidArgument);
  s.records.back().body_contacts = {3};
  s.records.back().object_id = "nope";
  CHECK(kind_of([&] { validate(s, objs); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("refine_contacts examples") {
  const BodyModel m = toy_humanoid();
  const auto parts = part_map(m);
  const auto& lsole = parts.at("leftFootSole");
  const auto& rhand = parts.at("rightHand");
  const auto& torso = parts.at("torso");

  std::vector<int> deco(lsole.begin(), lsole.end());
  deco.insert(deco.end(), rhand.begin(), rhand.begin() + rhand.size() / 2);

  OracleResponse oracle;
  oracle.parts = std::vector<std::string>{"rightHand", "torso"};
  const std::vector<int> out = refine_contacts(deco, oracle, parts);
  for (int v : lsole) CHECK_FALSE(std::binary_search(out.begin(), out.end(), v));
  for (int v : torso) CHECK(std::binary_search(out.begin(), out.end(), v));
  // right hand already touched: kept as predicted, not filled in
  const auto hand_kept = std::count_if(rhand.begin(), rhand.end(),
                                       [&](int v) { return std::binary_search(out.begin(), out.end(), v); });
  CHECK(hand_kept == (long)(rhand.size() / 2));
  CHECK(std::is_sorted(out.begin(), out.end()));

  OracleResponse keep_feet;
  keep_feet.parts = std::vector<std::string>{"leftFootSole"};
  std::vector<int> sorted_deco = deco;
  std::sort(sorted_deco.begin(), sorted_deco.end());
  CHECK(refine_contacts(deco, keep_feet, parts) == sorted_deco);

  CHECK(refine_contacts(deco, OracleResponse{}, parts) == sorted_deco);

  auto partial = parts;
  partial.erase("torso");
  CHECK(kind_of([&] { refine_contacts(deco, oracle, partial); }) == ErrorKind::UnknownPart);
}

TEST_CASE("refine_contacts is idempotent") {
  const BodyModel m = toy_humanoid();
  const auto parts = part_map(m);
  const auto& vocab = contact_part_vocabulary();
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> vert(0, (int)m.vertex_part.size() - 1), len(0, 200);
  std::bernoulli_distribution pick(0.2);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> deco;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) deco.push_back(vert(rng));
    OracleResponse o;
    std::vector<std::string> listed;
    for (const auto& p : vocab)
      if (pick(rng)) listed.push_back(p);
    o.parts = listed;
    const auto once = refine_contacts(deco, o, parts);
    CHECK(refine_contacts(once, o, parts) == once);
  }
}

TEST_CASE("oracle answer parsing") {
  CHECK(parse_scale_answer("0.7") == 0.7);
  CHECK(parse_scale_answer(" 1.25\n") == 1.25);
  for (const char* bad : {"approximately two meters", "", "0", "-1", "1.2 m", "1,2", "nan", "inf", "0.5 0.6"})
    CHECK(kind_of([&] { parse_scale_answer(bad); }) == ErrorKind::MalformedAnswer);

  CHECK(parse_parts_answer("leftHand, rightHand") == std::vector<std::string>{"leftHand", "rightHand"});
  CHECK(parse_parts_answer("torso,torso , hips\n") == std::vector<std::string>{"torso", "hips"});
  for (const char* bad : {"", "leftHand, tail", "The left hand.", "leftHand,,rightHand", "leftHand,"})
    CHECK(kind_of([&] { parse_parts_answer(bad); }) == ErrorKind::MalformedAnswer);

  const std::string sp = scale_prompt("chair");
  CHECK(sp.find("How big is the chair in the <IMAGE> that the human") == 0);
  CHECK(sp.find("<OBJECT>") == std::string::npos);
  CHECK(sp.find("longest side of the chair.") != std::string::npos);
  const std::string pp = parts_prompt("chair");
  CHECK(pp.find("in contact with the chair (touching or supporting the object)") != std::string::npos);
  CHECK(pp.find("head, neck, torso, hips, leftUpperArm, rightUpperArm, leftForeArm, rightForeArm, leftHand, "
                "rightHand, leftUpperLeg, rightUpperLeg, leftLowerLeg, rightLowerLeg, leftFootSole, "
                "rightFootSole, topOfLeftFoot, topOfRightFoot. Answer should be only") != std::string::npos);
}

TEST_CASE("canned oracle") {
  const std::string path = temp_path("canned.json");
  {
    std::ofstream f(path);
    f << R"({"img1": {"scale": 0.7, "parts": ["leftHand", "rightHand"]}, "img2": {"scale": 1.5}})";
  }
  OracleConfig c;
  c.canned_path = path;
  const OracleClient client(c);
  const OracleResponse r = client.query("img1", "box");
  CHECK(r.provenance == Provenance::Canned);
  CHECK(*r.scale == 0.7);
  CHECK(*r.parts == std::vector<std::string>{"leftHand", "rightHand"});
  CHECK_FALSE(oracle_query(client, "img2", "box").parts.has_value());
  CHECK(kind_of([&] { client.query("img3", "box"); }) == ErrorKind::MissingCannedEntry);

  {
    std::ofstream f(path);
    f << R"({"img1": {"parts": ["tail"]}})";
  }
  CHECK(kind_of([&] { OracleClient{c}; }) == ErrorKind::UnknownPart);
  {
    std::ofstream f(path);
    f << "{not json";
  }
  CHECK(kind_of([&] { OracleClient{c}; }) == ErrorKind::ParseError);
  std::filesystem::remove(path);
  CHECK(kind_of([&] { OracleClient{c}; }) == ErrorKind::IoError);
}

TEST_CASE("oracle config from environment") {
  setenv("PICO_ORACLE_MODE", "live", 1);
  setenv("PICO_ORACLE_ENDPOINT", "http://127.0.0.1:9/ask", 1);
  OracleConfig c = oracle_config_from_env();
  CHECK(c.mode == OracleMode::Live);
  CHECK(c.endpoint == "http://127.0.0.1:9/ask");
  setenv("PICO_ORACLE_MODE", "telepathy", 1);
  CHECK(kind_of([] { oracle_config_from_env(); }) == ErrorKind::InvalidArgument);
  unsetenv("PICO_ORACLE_MODE");
  unsetenv("PICO_ORACLE_ENDPOINT");
  c = oracle_config_from_env("x.json");
  CHECK(c.mode == OracleMode::Canned);
  CHECK(c.canned_path == "x.json");
}

TEST_CASE("live oracle against a local server") {
  httplib::Server server;
  std::mutex mu;
  std::string scale_answer = "0.7", parts_answer = "leftHand, rightHand";
  std::vector<std::string> prompts;
  std::atomic<int> failures_left{0}, in_flight{0}, max_in_flight{0};
  server.Post("/ask", [&](const httplib::Request& req, httplib::Response& res) {
    const int now = ++in_flight;
    for (int m = max_in_flight; now > m && !max_in_flight.compare_exchange_weak(m, now);) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --in_flight;
    if (failures_left > 0) {
      --failures_left;
      res.status = 503;
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    const std::string prompt = body.at("prompt");
    std::lock_guard lock(mu);
    prompts.push_back(prompt);
    const bool scale = prompt.rfind("How big", 0) == 0;
    res.set_content(nlohmann::json{{"answer", scale ? scale_answer : parts_answer}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  OracleConfig c;
  c.mode = OracleMode::Live;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/ask";
  c.timeout_seconds = 5;
  const OracleClient client(c);

  const OracleResponse r = client.query("img1", "box");
  CHECK(r.provenance == Provenance::Live);
  CHECK(*r.scale == 0.7);
  CHECK(*r.parts == std::vector<std::string>{"leftHand", "rightHand"});
  REQUIRE(prompts.size() == 2);
  CHECK(prompts[0] == scale_prompt("box"));
  CHECK(prompts[1] == parts_prompt("box"));

  scale_answer = "approximately two meters";
  CHECK(kind_of([&] { client.query("img1", "box"); }) == ErrorKind::MalformedAnswer);
  scale_answer = "1.1";
  parts_answer = "the hands";
  CHECK(kind_of([&] { client.query("img1", "box"); }) == ErrorKind::MalformedAnswer);
  parts_answer = "torso";

  failures_left = 2;
  CHECK(*client.query("img1", "box").scale == 1.1);
  failures_left = 3;
  CHECK(kind_of([&] { client.query("img1", "box"); }) == ErrorKind::IoError);
  failures_left = 0;

  max_in_flight = 0;
  std::vector<std::thread> callers;
  for (int i = 0; i < 4; ++i) callers.emplace_back([&] { client.query("img1", "box"); });
  for (auto& t : callers) t.join();
  CHECK(max_in_flight == 1);

  server.stop();
  th.join();

  c.attempts = 2;
  c.timeout_seconds = 1;
  CHECK(kind_of([&] { OracleClient(c).query("img1", "box"); }) == ErrorKind::IoError);
  c.endpoint = "ftp:/nowhere";
  CHECK(kind_of([&] { OracleClient(c).query("img1", "box"); }) == ErrorKind::InvalidArgument);
}
