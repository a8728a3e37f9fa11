#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agentos {

struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<XmlNode> children;
    std::string text;  // concatenated character data directly under this element
    int line = 0;
    int column = 0;

    std::optional<std::string> attribute(std::string_view key) const;
    std::vector<const XmlNode*> children_named(std::string_view n) const;
    const XmlNode* first_child(std::string_view n) const;
};

// Strict parse. DOCTYPE declarations and entity declarations are rejected, so no
// entity expansion can happen. Throws E_XML with line and column on failure.
XmlNode parse_xml(std::string_view text);

std::string xml_escape(std::string_view s);

}  // namespace agentos
