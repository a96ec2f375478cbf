#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "finelogic/net/completion_client.hpp"

namespace finelogic::eval {

enum class JudgeKind { Validity, Atomicity };

class RemoteJudgeUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnparseableJudgeReply : public std::runtime_error {
 public:
  explicit UnparseableJudgeReply(std::string reply)
      : std::runtime_error("judge reply has no leading true/false: " + reply), reply_(std::move(reply)) {}
  const std::string& reply() const { return reply_; }

 private:
  std::string reply_;
};

/// Fills the step validity or atomicity template.
std::string render_judge_prompt(JudgeKind kind, std::string_view premises_str, std::string_view concl_text_full);

/// Case-insensitive leading "true"/"false", ignoring leading whitespace,
/// quotes and emphasis markers.
bool parse_judge_reply(std::string_view reply);

class RemoteJudge {
 public:
  explicit RemoteJudge(net::EndpointConfig config) : client_(std::move(config)) {}

  /// Throws RemoteJudgeUnavailable or UnparseableJudgeReply.
  bool judge(JudgeKind kind, std::string_view premises_str, std::string_view concl_text_full);

  net::CompletionClient& client() { return client_; }

 private:
  net::CompletionClient client_;
};

}  // namespace finelogic::eval
