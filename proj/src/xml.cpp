#include "citerec/xml.hpp"

#include <cctype>

#include "citerec/error.hpp"

namespace citerec::xml {

namespace {

[[noreturn]] void fail(std::size_t at, const std::string& what) {
  throw Error(ErrorKind::xml_parse, what + " at byte " + std::to_string(at));
}

class Scanner {
 public:
  explicit Scanner(std::string_view in) : in_(in) {}

  Node parse_document() {
    skip_prolog();
    if (eof() || peek() != '<') fail(pos_, "expected root element");
    Node root = parse_element();
    skip_misc();
    if (!eof()) fail(pos_, "trailing content after root element");
    return root;
  }

 private:
  bool eof() const { return pos_ >= in_.size(); }
  char peek() const { return in_[pos_]; }
  bool starts_with(std::string_view s) const { return in_.compare(pos_, s.size(), s) == 0; }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void skip_until(std::string_view close, const char* what) {
    std::size_t at = in_.find(close, pos_);
    if (at == std::string_view::npos) fail(pos_, std::string("unterminated ") + what);
    pos_ = at + close.size();
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        std::size_t at = pos_;
        pos_ += 4;
        skip_until("-->", "comment");
        (void)at;
      } else if (starts_with("<?")) {
        pos_ += 2;
        skip_until("?>", "processing instruction");
      } else {
        return;
      }
    }
  }

  void skip_prolog() {
    for (;;) {
      skip_misc();
      if (starts_with("<!DOCTYPE") || starts_with("<!doctype")) {
        // Tolerate an internal subset by tracking bracket depth.
        std::size_t at = pos_;
        int depth = 0;
        while (!eof()) {
          char c = in_[pos_++];
          if (c == '[') ++depth;
          else if (c == ']') --depth;
          else if (c == '>' && depth == 0) break;
        }
        if (eof() && (in_.empty() || in_.back() != '>')) fail(at, "unterminated DOCTYPE");
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    std::size_t start = pos_;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' ||
          c == '.')
        ++pos_;
      else
        break;
    }
    if (pos_ == start) fail(start, "expected a name");
    return std::string(in_.substr(start, pos_ - start));
  }

  std::string decode_entities(std::string_view raw, std::size_t base) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
      if (raw[i] != '&') {
        out.push_back(raw[i++]);
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos || semi - i > 10)
        fail(base + i, "unterminated entity reference");
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else if (!ent.empty() && ent[0] == '#') {
        long code = 0;
        bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
        try {
          code = std::stol(std::string(ent.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10);
        } catch (...) {
          fail(base + i, "bad character reference");
        }
        append_utf8(out, code, base + i);
      } else {
        fail(base + i, "unknown entity '&" + std::string(ent) + ";'");
      }
      i = semi + 1;
    }
    return out;
  }

  void append_utf8(std::string& out, long code, std::size_t at) {
    if (code < 0 || code > 0x10FFFF) fail(at, "character reference out of range");
    unsigned long c = static_cast<unsigned long>(code);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }

  std::string parse_attr_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail(pos_, "expected quoted attribute value");
    char quote = peek();
    ++pos_;
    std::size_t start = pos_;
    std::size_t end = in_.find(quote, pos_);
    if (end == std::string_view::npos) fail(start, "unterminated attribute value");
    std::string value = decode_entities(in_.substr(start, end - start), start);
    pos_ = end + 1;
    return value;
  }

  Node parse_element() {
    std::size_t open_at = pos_;
    ++pos_;  // '<'
    Node node;
    node.kind = Node::Kind::element;
    node.name = parse_name();
    for (;;) {
      skip_ws();
      if (eof()) fail(open_at, "unterminated start tag <" + node.name + ">");
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (starts_with("/>")) {
        pos_ += 2;
        return node;
      }
      std::string key = parse_name();
      skip_ws();
      if (eof() || peek() != '=') fail(pos_, "expected '=' after attribute name");
      ++pos_;
      skip_ws();
      node.attrs.emplace_back(std::move(key), parse_attr_value());
    }
    parse_content(node, open_at);
    return node;
  }

  void parse_content(Node& node, std::size_t open_at) {
    std::string pending;
    std::size_t pending_at = pos_;
    auto flush_text = [&]() {
      if (pending.empty()) return;
      Node t;
      t.kind = Node::Kind::text;
      t.text = decode_entities(pending, pending_at);
      node.children.push_back(std::move(t));
      pending.clear();
    };
    for (;;) {
      if (eof()) fail(open_at, "missing close tag for <" + node.name + ">");
      if (peek() != '<') {
        if (pending.empty()) pending_at = pos_;
        pending.push_back(peek());
        ++pos_;
        continue;
      }
      if (starts_with("</")) {
        flush_text();
        pos_ += 2;
        std::size_t at = pos_;
        std::string close = parse_name();
        if (close != node.name)
          fail(at, "close tag </" + close + "> does not match <" + node.name + ">");
        skip_ws();
        if (eof() || peek() != '>') fail(pos_, "malformed close tag");
        ++pos_;
        return;
      }
      if (starts_with("<!--")) {
        flush_text();
        pos_ += 4;
        skip_until("-->", "comment");
        continue;
      }
      if (starts_with("<![CDATA[")) {
        if (pending.empty()) pending_at = pos_;
        pos_ += 9;
        std::size_t at = in_.find("]]>", pos_);
        if (at == std::string_view::npos) fail(pos_, "unterminated CDATA section");
        // CDATA bypasses entity decoding; splice the raw bytes in by
        // re-escaping ampersands so the later decode is a no-op.
        for (char c : in_.substr(pos_, at - pos_)) {
          if (c == '&') pending += "&amp;";
          else if (c == '<') pending += "&lt;";
          else pending.push_back(c);
        }
        pos_ = at + 3;
        continue;
      }
      if (starts_with("<?")) {
        flush_text();
        pos_ += 2;
        skip_until("?>", "processing instruction");
        continue;
      }
      flush_text();
      node.children.push_back(parse_element());
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

const std::string* Node::attr(std::string_view key) const {
  for (const auto& [k, v] : attrs)
    if (k == key) return &v;
  return nullptr;
}

const Node* Node::find(std::string_view target) const {
  for (const Node& c : children) {
    if (c.kind != Kind::element) continue;
    if (c.name == target) return &c;
    if (const Node* hit = c.find(target)) return hit;
  }
  return nullptr;
}

void Node::find_all(std::string_view target, std::vector<const Node*>& out) const {
  for (const Node& c : children) {
    if (c.kind != Kind::element) continue;
    if (c.name == target) out.push_back(&c);
    c.find_all(target, out);
  }
}

std::string Node::inner_text() const {
  std::string out;
  for (const Node& c : children) {
    if (c.kind == Kind::text) out += c.text;
    else out += c.inner_text();
  }
  return out;
}

std::string escape_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out.push_back(c);
  }
  return out;
}

namespace {

void serialize(const Node& n, std::string& out) {
  if (n.kind == Node::Kind::text) {
    out += escape_text(n.text);
    return;
  }
  out += '<';
  out += n.name;
  for (const auto& [k, v] : n.attrs) {
    out += ' ';
    out += k;
    out += "=\"";
    for (char c : v) {
      if (c == '&') out += "&amp;";
      else if (c == '<') out += "&lt;";
      else if (c == '"') out += "&quot;";
      else out.push_back(c);
    }
    out += '"';
  }
  if (n.children.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (const Node& c : n.children) serialize(c, out);
  out += "</";
  out += n.name;
  out += '>';
}

}  // namespace

std::string Node::inner_markup() const {
  std::string out;
  for (const Node& c : children) serialize(c, out);
  return out;
}

Node parse(std::string_view input) { return Scanner(input).parse_document(); }

}  // namespace citerec::xml
