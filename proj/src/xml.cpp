#include "agentos/xml.hpp"

#include <expat.h>

#include "agentos/error.hpp"

namespace agentos {

std::optional<std::string> XmlNode::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::vector<const XmlNode*> XmlNode::children_named(std::string_view n) const {
    std::vector<const XmlNode*> out;
    for (const auto& c : children) {
        if (c.name == n) out.push_back(&c);
    }
    return out;
}

const XmlNode* XmlNode::first_child(std::string_view n) const {
    for (const auto& c : children) {
        if (c.name == n) return &c;
    }
    return nullptr;
}

namespace {

struct Builder {
    XML_Parser parser = nullptr;
    std::vector<XmlNode> stack;
    std::optional<XmlNode> root;
    std::string refused;
};

void on_start(void* ud, const XML_Char* name, const XML_Char** attrs) {
    auto* b = static_cast<Builder*>(ud);
    XmlNode node;
    node.name = name;
    node.line = static_cast<int>(XML_GetCurrentLineNumber(b->parser));
    node.column = static_cast<int>(XML_GetCurrentColumnNumber(b->parser)) + 1;
    for (int i = 0; attrs[i]; i += 2) node.attributes.emplace_back(attrs[i], attrs[i + 1]);
    b->stack.push_back(std::move(node));
}

void on_end(void* ud, const XML_Char*) {
    auto* b = static_cast<Builder*>(ud);
    XmlNode node = std::move(b->stack.back());
    b->stack.pop_back();
    if (b->stack.empty()) {
        b->root = std::move(node);
    } else {
        b->stack.back().children.push_back(std::move(node));
    }
}

void on_text(void* ud, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(ud);
    if (!b->stack.empty()) b->stack.back().text.append(s, static_cast<std::size_t>(len));
}

void on_doctype(void* ud, const XML_Char*, const XML_Char*, const XML_Char*, int) {
    auto* b = static_cast<Builder*>(ud);
    b->refused = "DOCTYPE declarations are not accepted";
    XML_StopParser(b->parser, XML_FALSE);
}

void on_entity(void* ud, const XML_Char* name, int, const XML_Char*, int, const XML_Char*, const XML_Char*,
               const XML_Char*, const XML_Char*) {
    auto* b = static_cast<Builder*>(ud);
    b->refused = std::string("entity declaration '") + name + "' is not accepted";
    XML_StopParser(b->parser, XML_FALSE);
}

}  // namespace

XmlNode parse_xml(std::string_view text) {
    Builder b;
    b.parser = XML_ParserCreate("UTF-8");
    if (!b.parser) throw Error(ErrorCode::xml, "cannot create XML parser");
    XML_SetUserData(b.parser, &b);
    XML_SetElementHandler(b.parser, on_start, on_end);
    XML_SetCharacterDataHandler(b.parser, on_text);
    XML_SetStartDoctypeDeclHandler(b.parser, on_doctype);
    XML_SetEntityDeclHandler(b.parser, on_entity);
    XML_SetParamEntityParsing(b.parser, XML_PARAM_ENTITY_PARSING_NEVER);

    const auto status = XML_Parse(b.parser, text.data(), static_cast<int>(text.size()), XML_TRUE);
    if (status != XML_STATUS_OK || !b.refused.empty()) {
        const auto line = XML_GetCurrentLineNumber(b.parser);
        const auto col = XML_GetCurrentColumnNumber(b.parser) + 1;
        std::string why = b.refused.empty() ? XML_ErrorString(XML_GetErrorCode(b.parser)) : b.refused;
        XML_ParserFree(b.parser);
        throw Error(ErrorCode::xml, why + " at line " + std::to_string(line) + ", column " + std::to_string(col));
    }
    XML_ParserFree(b.parser);
    if (!b.root) throw Error(ErrorCode::xml, "document has no root element");
    return std::move(*b.root);
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace agentos
