#pragma once

#include "pico/retrieval/store.hpp"

namespace pico {

enum class OracleMode { Canned, Live };

struct OracleConfig {
  OracleMode mode = OracleMode::Canned;
  std::string canned_path;  // JSON map imageId -> {scale, parts}
  std::string endpoint;     // http://host:port/path
  int attempts = 3;
  double timeout_seconds = 30.0;
};

/// Mode from PICO_ORACLE_MODE (canned | live, default canned), endpoint from
/// PICO_ORACLE_ENDPOINT. Throws InvalidArgument for an unknown mode.
OracleConfig oracle_config_from_env(const std::string& canned_path = {});

/// The two prompts, with <OBJECT> substituted; <IMAGE> stays a placeholder
/// for the attached image.
std::string scale_prompt(const std::string& object_label);
std::string parts_prompt(const std::string& object_label);

/// "Single number, in meters". Throws MalformedAnswer.
double parse_scale_answer(std::string_view answer);
/// "Comma-separated list of the body parts". Throws MalformedAnswer.
std::vector<std::string> parse_parts_answer(std::string_view answer);

class OracleClient {
 public:
  /// Canned mode loads the response file now. Throws IoError, ParseError,
  /// InvalidArgument.
  explicit OracleClient(OracleConfig config);

  const OracleConfig& config() const { return config_; }

  /// Canned: the stored entry for `image_id` (MissingCannedEntry otherwise).
  /// Live: POSTs {"image_id", "object", "prompt"} per prompt and parses
  /// {"answer"}; requests to one endpoint are serialized, transport failures
  /// retried up to `attempts` times (IoError after that).
  OracleResponse query(const std::string& image_id, const std::string& object_label) const;

 private:
  std::string ask(const std::string& image_id, const std::string& object_label, const std::string& prompt) const;

  OracleConfig config_;
  std::map<std::string, OracleResponse> canned_;
};

inline OracleResponse oracle_query(const OracleClient& client, const std::string& image_id,
                                   const std::string& object_label) {
  return client.query(image_id, object_label);
}

}  // namespace pico
