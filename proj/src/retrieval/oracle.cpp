#include "pico/retrieval/oracle.hpp"

#include "pico/body/body_model.hpp"
#include "pico/io/bytes.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <regex>

namespace pico {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string substitute(std::string text, const std::string& object) {
  for (size_t p = text.find("<OBJECT>"); p != std::string::npos; p = text.find("<OBJECT>", p + object.size()))
    text.replace(p, 8, object);
  return text;
}

std::mutex& endpoint_mutex(const std::string& endpoint) {
  static std::mutex guard;
  static std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard lock(guard);
  auto& m = locks[endpoint];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

OracleResponse canned_entry(const json& j, const std::string& key) {
  OracleResponse r;
  r.provenance = Provenance::Canned;
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "canned entry '" + key + "' is not an object");
  if (j.contains("scale") && !j["scale"].is_null()) {
    if (!j["scale"].is_number()) throw Error(ErrorKind::ParseError, "canned entry '" + key + "': scale is not a number");
    r.scale = j["scale"].get<double>();
  }
  if (j.contains("parts") && !j["parts"].is_null()) {
    if (!j["parts"].is_array()) throw Error(ErrorKind::ParseError, "canned entry '" + key + "': parts is not a list");
    std::vector<std::string> parts;
    for (const json& p : j["parts"]) {
      if (!p.is_string()) throw Error(ErrorKind::ParseError, "canned entry '" + key + "': part is not a string");
      parts.push_back(p.get<std::string>());
    }
    r.parts = std::move(parts);
  }
  validate(r);
  return r;
}

}  // namespace

OracleConfig oracle_config_from_env(const std::string& canned_path) {
  OracleConfig c;
  c.canned_path = canned_path;
  if (const char* mode = std::getenv("PICO_ORACLE_MODE"); mode != nullptr && *mode != '\0') {
    const std::string m = mode;
    if (m == "canned")
      c.mode = OracleMode::Canned;
    else if (m == "live")
      c.mode = OracleMode::Live;
    else
      throw Error(ErrorKind::InvalidArgument, "PICO_ORACLE_MODE must be canned or live, got '" + m + "'");
  }
  if (const char* ep = std::getenv("PICO_ORACLE_ENDPOINT"); ep != nullptr) c.endpoint = ep;
  return c;
}

std::string scale_prompt(const std::string& object_label) {
  return substitute(
      "How big is the <OBJECT> in the <IMAGE> that the human is interacting with? Use the other objects and "
      "the scale of the human to estimate the size. Answer should be single number, in meters, that "
      "corresponds to the length of the longest side of the <OBJECT>.",
      object_label);
}

std::string parts_prompt(const std::string& object_label) {
  std::string list;
  for (const std::string& p : contact_part_vocabulary()) list += (list.empty() ? "" : ", ") + p;
  return substitute(
      "List the body parts of the human that are in contact with the <OBJECT> (touching or supporting the "
      "object) in this <IMAGE>.\nThese are all the body parts to consider: " +
          list + ". Answer should be only a comma-separated list of the body parts, nothing else.",
      object_label);
}

double parse_scale_answer(std::string_view answer) {
  const std::string_view s = trim(answer);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v) || v <= 0.0)
    throw Error(ErrorKind::MalformedAnswer, "expected a single positive number in meters, got '" +
                                                std::string(answer) + "'");
  return v;
}

std::vector<std::string> parse_parts_answer(std::string_view answer) {
  const auto& vocab = contact_part_vocabulary();
  std::vector<std::string> parts;
  const std::string_view all = trim(answer);
  if (all.empty()) throw Error(ErrorKind::MalformedAnswer, "empty body part list");
  size_t start = 0;
  while (start <= all.size()) {
    const size_t comma = std::min(all.find(',', start), all.size());
    const std::string name(trim(all.substr(start, comma - start)));
    if (std::find(vocab.begin(), vocab.end(), name) == vocab.end())
      throw Error(ErrorKind::MalformedAnswer, "'" + name + "' is not one of the listed body parts");
    if (std::find(parts.begin(), parts.end(), name) == parts.end()) parts.push_back(name);
    start = comma + 1;
  }
  return parts;
}

OracleClient::OracleClient(OracleConfig config) : config_(std::move(config)) {
  require(config_.attempts >= 1, ErrorKind::InvalidArgument, "oracle attempts must be >= 1");
  if (config_.mode == OracleMode::Canned) {
    require(!config_.canned_path.empty(), ErrorKind::InvalidArgument, "canned oracle needs a response file");
    json doc;
    try {
      doc = json::parse(read_file(config_.canned_path));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ParseError, config_.canned_path + ": " + e.what());
    }
    require(doc.is_object(), ErrorKind::ParseError, config_.canned_path + ": expected a map of image ids");
    for (const auto& [key, value] : doc.items()) canned_.emplace(key, canned_entry(value, key));
  } else {
    require(!config_.endpoint.empty(), ErrorKind::InvalidArgument, "live oracle needs PICO_ORACLE_ENDPOINT");
  }
}

std::string OracleClient::ask(const std::string& image_id, const std::string& object_label,
                              const std::string& prompt) const {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  require(std::regex_match(config_.endpoint, m, url), ErrorKind::InvalidArgument,
          "bad oracle endpoint '" + config_.endpoint + "'");
  const std::string path = m[2].matched ? m[2].str() : "/";
  httplib::Client client(m[1].str());
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  const std::string body = json{{"image_id", image_id}, {"object", object_label}, {"prompt", prompt}}.dump();

  std::lock_guard lock(endpoint_mutex(config_.endpoint));
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt < config_.attempts; ++attempt) {
    const auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    require(res->status == 200, ErrorKind::IoError, "oracle returned HTTP " + std::to_string(res->status));
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error&) {
      throw Error(ErrorKind::MalformedAnswer, "oracle reply is not structured text");
    }
    if (!reply.is_object() || !reply.contains("answer") || !reply["answer"].is_string())
      throw Error(ErrorKind::MalformedAnswer, "oracle reply has no string 'answer'");
    return reply["answer"].get<std::string>();
  }
  throw Error(ErrorKind::IoError, "oracle at " + config_.endpoint + " unreachable: " + last_error);
}

OracleResponse OracleClient::query(const std::string& image_id, const std::string& object_label) const {
  if (config_.mode == OracleMode::Canned) {
    const auto it = canned_.find(image_id);
    if (it == canned_.end()) throw Error(ErrorKind::MissingCannedEntry, "no canned oracle entry for '" + image_id + "'");
    return it->second;
  }
  OracleResponse r;
  r.provenance = Provenance::Live;
  r.scale = parse_scale_answer(ask(image_id, object_label, scale_prompt(object_label)));
  r.parts = parse_parts_answer(ask(image_id, object_label, parts_prompt(object_label)));
  return r;
}

}  // namespace pico
