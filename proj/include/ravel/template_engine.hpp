// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ravel {

struct TemplateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Substitutes {{name}} placeholders. Rendering fails loudly on any
/// placeholder left unbound; prompt drift must not be silent.
inline std::string render_template(std::string_view tmpl,
                                   const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos)
      throw TemplateError("unterminated placeholder at offset " +
                          std::to_string(open));
    std::string name(tmpl.substr(open + 2, close - open - 2));
    auto it = vars.find(name);
    if (it == vars.end())
      throw TemplateError("unbound placeholder: {{" + name + "}}");
    out.append(it->second);
    i = close + 2;
  }
  return out;
}

}  // namespace ravel
