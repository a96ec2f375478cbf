#include "finelogic/eval/judge.hpp"

#include <cctype>

namespace finelogic::eval {

std::string render_judge_prompt(JudgeKind kind, std::string_view premises_str, std::string_view concl_text_full) {
  std::string out = "Premises:\n";
  out += premises_str;
  out += "\n\nConclusion:\n";
  out += concl_text_full;
  out += "\n\n";
  out += kind == JudgeKind::Validity ? "Do the premises entail the conclusion? Answer true or false only."
                                     : "Is this inference atomic...? Answer true or false only.";
  return out;
}

bool parse_judge_reply(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size() &&
         (std::isspace(static_cast<unsigned char>(reply[i])) || reply[i] == '"' || reply[i] == '\'' ||
          reply[i] == '*' || reply[i] == '`')) {
    ++i;
  }
  auto leads_with = [&](std::string_view word) {
    if (reply.size() - i < word.size()) return false;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(reply[i + k])) != word[k]) return false;
    }
    std::size_t end = i + word.size();
    return end == reply.size() || !std::isalnum(static_cast<unsigned char>(reply[end]));
  };
  if (leads_with("true")) return true;
  if (leads_with("false")) return false;
  throw UnparseableJudgeReply(std::string(reply));
}

bool RemoteJudge::judge(JudgeKind kind, std::string_view premises_str, std::string_view concl_text_full) {
  std::string prompt = render_judge_prompt(kind, premises_str, concl_text_full);
  std::string reply;
  try {
    reply = client_.complete(prompt);
  } catch (const net::EndpointError& e) {
    throw RemoteJudgeUnavailable(e.what());
  }
  return parse_judge_reply(reply);
}

}  // namespace finelogic::eval
