#include <cctype>
#include <stdexcept>

#include "finelogic/bench/prompts.hpp"

namespace finelogic::bench {

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        std::string_view name = tmpl.substr(i + 1, close - i - 1);
        bool ident = !name.empty();
        for (char c : name) ident = ident && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
        if (ident) {
          auto it = values.find(std::string(name));
          if (it == values.end()) throw std::invalid_argument("no value for placeholder {" + std::string(name) + "}");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace finelogic::bench
