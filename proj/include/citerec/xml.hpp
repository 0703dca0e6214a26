#ifndef CITEREC_XML_HPP
#define CITEREC_XML_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace citerec::xml {

// Small document scanner covering the element/attribute/text subset
// that journal article XML actually uses: mixed content, entities,
// comments, CDATA, processing instructions and a DOCTYPE line.
// Namespaces are not interpreted; names are matched verbatim.
// Errors carry the byte offset of the offending input.

struct Node {
  enum class Kind { element, text };

  Kind kind = Kind::element;
  std::string name;                                         // element only
  std::vector<std::pair<std::string, std::string>> attrs;   // document order
  std::vector<Node> children;                               // element only
  std::string text;                                         // text only, entities decoded

  const std::string* attr(std::string_view key) const;

  // Depth-first search for the first descendant element with the name.
  const Node* find(std::string_view name) const;
  // All descendant elements with the name, document order.
  void find_all(std::string_view name, std::vector<const Node*>& out) const;

  // Concatenated text of this subtree, tags dropped.
  std::string inner_text() const;
  // Children serialized back to markup (elements re-emitted with their
  // attributes in original order, text re-escaped). Used where the
  // surrounding markup must be preserved in a string field.
  std::string inner_markup() const;
};

// Parses a complete document and returns the root element.
// Throws citerec::Error with ErrorKind::xml_parse on malformed input.
Node parse(std::string_view input);

std::string escape_text(std::string_view raw);

}  // namespace citerec::xml

#endif
