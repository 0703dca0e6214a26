#include "citerec/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "citerec/error.hpp"
#include "citerec/text.hpp"
#include "citerec/xml.hpp"

namespace citerec {

using nlohmann::json;

namespace {

std::string collapse_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!out.empty()) pending_space = true;
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string az_to_string(AzLabel az) {
  switch (az) {
    case AzLabel::method: return "Method";
    case AzLabel::conclusion: return "Conclusion";
    case AzLabel::goal: return "Goal";
    case AzLabel::object: return "Object";
    case AzLabel::other: return "Other";
  }
  return "Other";
}

AzLabel az_from_string(std::string_view s) {
  std::string l = lower(s);
  if (l == "method") return AzLabel::method;
  if (l == "conclusion") return AzLabel::conclusion;
  if (l == "goal") return AzLabel::goal;
  if (l == "object") return AzLabel::object;
  if (l == "other") return AzLabel::other;
  throw Error(ErrorKind::label, "unknown zone label '" + std::string(s) + "'");
}

// ---- time slices ------------------------------------------------------------

TimeSlicer::TimeSlicer(std::vector<TimeSlice> slices) : slices_(std::move(slices)) {
  if (slices_.empty()) throw Error(ErrorKind::config, "time slicer needs at least one slice");
  for (std::size_t i = 0; i < slices_.size(); ++i) {
    const TimeSlice& s = slices_[i];
    if (s.lo > s.hi)
      throw Error(ErrorKind::config, "slice '" + s.label + "' has lo " + std::to_string(s.lo) +
                                         " > hi " + std::to_string(s.hi));
    if (i > 0 && s.lo != slices_[i - 1].hi + 1)
      throw Error(ErrorKind::config, "slice '" + s.label + "' does not continue '" +
                                         slices_[i - 1].label + "'; slices must partition the range");
  }
}

TimeSlicer TimeSlicer::standard() {
  return TimeSlicer({{"<=1995", 1877, 1995},
                     {"1996-2000", 1996, 2000},
                     {"2001-2003", 2001, 2003},
                     {"2004-2005", 2004, 2005},
                     {"2006-2007", 2006, 2007},
                     {"2008-2009", 2008, 2009},
                     {"2010-2013", 2010, 2013}});
}

std::size_t TimeSlicer::index_of(int year) const {
  for (std::size_t i = 0; i < slices_.size(); ++i)
    if (year >= slices_[i].lo && year <= slices_[i].hi) return i;
  throw Error(ErrorKind::out_of_range,
              "year " + std::to_string(year) + " outside " + std::to_string(min_year()) + ".." +
                  std::to_string(max_year()));
}

// ---- citation masking --------------------------------------------------------

namespace {

struct XrefHit {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing marker
  std::string rid;
  bool bibliographic = false;
  bool has_rid = false;
};

// Light tag reader for <xref ...>...</xref> inside a sentence string.
// Full document parsing already happened upstream; here the markup is
// only being pattern-matched, so a scanner is enough.
bool parse_xref_at(std::string_view s, std::size_t i, XrefHit& hit) {
  static const std::string_view open = "<xref";
  if (s.compare(i, open.size(), open) != 0) return false;
  std::size_t j = i + open.size();
  if (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '>' &&
      s[j] != '/')
    return false;  // some other element, e.g. <xrefoo>
  hit = XrefHit{};
  hit.begin = i;
  bool self_closing = false;
  while (j < s.size() && s[j] != '>') {
    if (std::isspace(static_cast<unsigned char>(s[j]))) {
      ++j;
      continue;
    }
    if (s[j] == '/') {
      self_closing = true;
      ++j;
      continue;
    }
    std::size_t kb = j;
    while (j < s.size() && s[j] != '=' && s[j] != '>' &&
           !std::isspace(static_cast<unsigned char>(s[j])))
      ++j;
    std::string key(s.substr(kb, j - kb));
    while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j >= s.size() || s[j] != '=') return false;
    ++j;
    while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j >= s.size() || (s[j] != '"' && s[j] != '\'')) return false;
    char q = s[j++];
    std::size_t vb = j;
    j = s.find(q, j);
    if (j == std::string_view::npos) return false;
    std::string value(s.substr(vb, j - vb));
    ++j;
    if (key == "ref-type") hit.bibliographic = value == "bibr";
    if (key == "rid" && !value.empty()) {
      hit.rid = value;
      hit.has_rid = true;
    }
  }
  if (j >= s.size()) return false;
  ++j;  // '>'
  if (!self_closing) {
    std::size_t close = s.find("</xref", j);
    if (close == std::string_view::npos) return false;
    j = s.find('>', close);
    if (j == std::string_view::npos) return false;
    ++j;
  }
  hit.end = j;
  return true;
}

// Whitespace and the punctuation allowed between markers of one group.
std::size_t skip_group_separators(std::string_view s, std::size_t i) {
  for (;;) {
    if (i >= s.size()) return i;
    char c = s[i];
    if (c == ' ' || c == '\t' || c == ',' || c == ';' || c == '-') {
      ++i;
      continue;
    }
    if (s.compare(i, 3, "\xE2\x80\x93") == 0 || s.compare(i, 3, "\xE2\x80\x94") == 0) {
      i += 3;  // en and em dashes
      continue;
    }
    return i;
  }
}

void commit_hit(const XrefHit& hit, std::vector<std::string>& rids, std::size_t& missing) {
  if (hit.has_rid) rids.push_back(hit.rid);
  else ++missing;
}

bool try_wrapped_group(std::string_view s, std::size_t i, std::size_t& end,
                       std::vector<std::string>& rids, std::size_t& missing) {
  char close = s[i] == '(' ? ')' : ']';
  std::vector<std::string> local_rids;
  std::size_t local_missing = 0;
  std::size_t j = skip_group_separators(s, i + 1);
  bool any = false;
  for (;;) {
    XrefHit hit;
    if (!parse_xref_at(s, j, hit) || !hit.bibliographic) return false;
    commit_hit(hit, local_rids, local_missing);
    any = true;
    j = skip_group_separators(s, hit.end);
    if (j < s.size() && s[j] == close) {
      end = j + 1;
      rids.insert(rids.end(), local_rids.begin(), local_rids.end());
      missing += local_missing;
      return any;
    }
    if (j >= s.size()) return false;
  }
}

bool try_bare_group(std::string_view s, std::size_t i, std::size_t& end,
                    std::vector<std::string>& rids, std::size_t& missing) {
  XrefHit hit;
  if (!parse_xref_at(s, i, hit) || !hit.bibliographic) return false;
  commit_hit(hit, rids, missing);
  end = hit.end;
  for (;;) {
    std::size_t j = skip_group_separators(s, end);
    XrefHit next;
    if (!parse_xref_at(s, j, next) || !next.bibliographic) break;
    commit_hit(next, rids, missing);
    end = next.end;
  }
  return true;
}

std::size_t apply_fallback_patterns(std::string& text, const MaskOptions& opts) {
  static const std::regex numeric(
      R"(\[\s*[0-9]+(?:\s*(?:,|;|-|–|—)\s*[0-9]+)*\s*\])");
  static const std::regex author_year(
      R"(\(\s*[A-Z][A-Za-z'.\-]*(?:\s+(?:et\s+al\.?|and\s+[A-Z][A-Za-z'.\-]*|&\s*[A-Z][A-Za-z'.\-]*))*\s*,\s*(?:19|20)[0-9]{2}[a-z]?(?:\s*;\s*[^();]*,\s*(?:19|20)[0-9]{2}[a-z]?)*\s*\))");
  std::size_t groups = 0;
  auto apply = [&](const std::regex& re) {
    std::string out;
    out.reserve(text.size());
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
         it != std::sregex_iterator(); ++it) {
      out.append(text, last, static_cast<std::size_t>(it->position()) - last);
      out.append(kCiteToken);
      last = static_cast<std::size_t>(it->position() + it->length());
      ++groups;
    }
    out.append(text, last, std::string::npos);
    text = std::move(out);
  };
  if (opts.bracketed_numeric) apply(numeric);
  if (opts.author_year) apply(author_year);
  return groups;
}

}  // namespace

MaskResult mask_citations_full(std::string_view sentence, const MaskOptions& opts) {
  MaskResult res;
  bool saw_marker = sentence.find("<xref") != std::string_view::npos;
  std::string out;
  out.reserve(sentence.size());
  std::size_t i = 0;
  while (i < sentence.size()) {
    char c = sentence[i];
    std::size_t end = 0;
    if ((c == '(' || c == '[') &&
        try_wrapped_group(sentence, i, end, res.rids, res.missing_rids)) {
      out += kCiteToken;
      ++res.groups;
      i = end;
      continue;
    }
    if (c == '<' && try_bare_group(sentence, i, end, res.rids, res.missing_rids)) {
      out += kCiteToken;
      ++res.groups;
      i = end;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  if (!saw_marker) res.groups += apply_fallback_patterns(out, opts);
  res.text = std::move(out);
  return res;
}

std::string mask_citations(std::string_view sentence) {
  return mask_citations_full(sentence).text;
}

std::string strip_markup(std::string_view markup) {
  std::string out;
  out.reserve(markup.size());
  std::size_t i = 0;
  while (i < markup.size()) {
    char c = markup[i];
    if (c == '<') {
      std::size_t close = markup.find('>', i);
      if (close == std::string_view::npos) {
        out.push_back(c);
        ++i;
        continue;
      }
      i = close + 1;
      continue;
    }
    if (c == '&') {
      std::size_t semi = markup.find(';', i);
      if (semi != std::string_view::npos && semi - i <= 6) {
        std::string_view ent = markup.substr(i + 1, semi - i - 1);
        if (ent == "amp") { out.push_back('&'); i = semi + 1; continue; }
        if (ent == "lt") { out.push_back('<'); i = semi + 1; continue; }
        if (ent == "gt") { out.push_back('>'); i = semi + 1; continue; }
        if (ent == "quot") { out.push_back('"'); i = semi + 1; continue; }
        if (ent == "apos") { out.push_back('\''); i = semi + 1; continue; }
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

// ---- sentence splitting -------------------------------------------------------

std::vector<std::string> split_sentences(std::string_view p) {
  static const std::set<std::string> abbrev = {
      "al",  "fig", "figs", "cf",  "vs",  "etc", "dr",   "prof", "st",  "mr",
      "mrs", "ms",  "inc",  "ltd", "ca",  "eq",  "eqs",  "ref",  "refs", "sec",
      "vol", "pp",  "resp", "approx", "no"};
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\n\r");
    std::size_t e = s.find_last_not_of(" \t\n\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::string> out;
  std::string cur;
  bool in_tag = false;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    char c = p[i];
    cur.push_back(c);
    if (c == '<') in_tag = true;
    if (c == '>') in_tag = false;
    if (in_tag) continue;
    if (c != '.' && c != '!' && c != '?') continue;
    if (c == '.') {
      bool digit_before = i > 0 && std::isdigit(static_cast<unsigned char>(p[i - 1]));
      bool digit_after = i + 1 < n && std::isdigit(static_cast<unsigned char>(p[i + 1]));
      if (digit_before && digit_after) continue;  // 3.5, section 2.1
      std::size_t b = i;
      while (b > 0 && std::isalpha(static_cast<unsigned char>(p[b - 1]))) --b;
      std::string word = lower(p.substr(b, i - b));
      if (word.size() == 1) continue;  // initials and e.g./i.e. tails
      if (abbrev.count(word)) continue;
    }
    std::size_t j = i + 1;
    while (j < n && (p[j] == '"' || p[j] == '\'' || p[j] == ')' || p[j] == ']')) ++j;
    std::size_t k = j;
    while (k < n && std::isspace(static_cast<unsigned char>(p[k]))) ++k;
    bool boundary;
    if (k >= n) {
      boundary = true;
    } else if (k == j) {
      boundary = false;  // no whitespace after the punctuation
    } else {
      char nc = p[k];
      boundary = std::isupper(static_cast<unsigned char>(nc)) ||
                 std::isdigit(static_cast<unsigned char>(nc)) || nc == '<' || nc == '[' ||
                 nc == '(';
    }
    if (!boundary) continue;
    cur.append(p.substr(i + 1, j - (i + 1)));
    std::string s = trim(std::move(cur));
    if (!s.empty()) out.push_back(std::move(s));
    cur.clear();
    i = k - 1;
  }
  std::string rest = trim(std::move(cur));
  if (!rest.empty()) out.push_back(std::move(rest));
  return out;
}

// ---- article parsing ----------------------------------------------------------

namespace {

bool parse_year(std::string_view text, int& year) {
  std::string t = collapse_ws(text);
  std::size_t i = 0;
  while (i < t.size() && !std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  std::size_t b = i;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  if (i - b != 4) return false;
  year = std::stoi(t.substr(b, 4));
  return true;
}

// pmid, then pmc, then doi, then whatever came first.
std::string preferred_pub_id(const std::vector<const xml::Node*>& ids,
                             const char* type_attr) {
  std::string pmid, pmc, doi, first;
  for (const xml::Node* node : ids) {
    const std::string* type = node->attr(type_attr);
    std::string value = collapse_ws(node->inner_text());
    if (value.empty()) continue;
    if (first.empty()) first = value;
    if (!type) continue;
    if (*type == "pmid" && pmid.empty()) pmid = value;
    if (*type == "pmc" && pmc.empty()) pmc = value;
    if (*type == "doi" && doi.empty()) doi = value;
  }
  if (!pmid.empty()) return pmid;
  if (!pmc.empty()) return pmc;
  if (!doi.empty()) return doi;
  return first;
}

}  // namespace

ParseResult parse_jats(std::string_view xml_text, std::string_view fallback_id) {
  xml::Node root = xml::parse(xml_text);
  ParseResult res;
  Paper& paper = res.paper;

  const xml::Node* front = root.find("front");
  const xml::Node* meta = front ? front->find("article-meta") : root.find("article-meta");
  const xml::Node* head = front ? front : &root;

  if (meta) {
    std::vector<const xml::Node*> ids;
    meta->find_all("article-id", ids);
    paper.paper_id = preferred_pub_id(ids, "pub-id-type");
  }
  if (paper.paper_id.empty()) paper.paper_id = std::string(fallback_id);
  if (paper.paper_id.empty())
    throw Error(ErrorKind::invalid_input, "article carries no identifier and no fallback id was given");

  if (const xml::Node* t = head->find("article-title")) paper.title = collapse_ws(t->inner_text());

  if (const xml::Node* a = head->find("abstract")) {
    std::vector<const xml::Node*> ps;
    a->find_all("p", ps);
    std::string text;
    if (ps.empty()) {
      text = collapse_ws(a->inner_text());
    } else {
      for (const xml::Node* pn : ps) {
        std::string part = collapse_ws(pn->inner_text());
        if (part.empty()) continue;
        if (!text.empty()) text += ' ';
        text += part;
      }
    }
    paper.abstract = text;
  }

  paper.pub_year = 0;
  if (meta) {
    std::vector<const xml::Node*> dates;
    meta->find_all("pub-date", dates);
    for (const xml::Node* d : dates) {
      if (const xml::Node* y = d->find("year")) {
        int yr = 0;
        if (parse_year(y->inner_text(), yr)) {
          paper.pub_year = yr;
          break;
        }
      }
    }
  }
  if (paper.pub_year == 0) ++res.warnings;

  // Reference list first: queries need the rid -> publication id map.
  std::map<std::string, std::string> rid_map;
  const xml::Node* back = root.find("back");
  const xml::Node* reflist = back ? back->find("ref-list") : root.find("ref-list");
  if (reflist) {
    std::vector<const xml::Node*> refs;
    reflist->find_all("ref", refs);
    for (const xml::Node* ref : refs) {
      const std::string* rid = ref->attr("id");
      std::vector<const xml::Node*> pubids;
      ref->find_all("pub-id", pubids);
      std::string global = preferred_pub_id(pubids, "pub-id-type");
      if (global.empty() && rid) global = *rid;
      if (global.empty()) {
        ++res.warnings;  // reference with neither id nor pub-id
        continue;
      }
      if (rid) rid_map[*rid] = global;
      if (global != paper.paper_id) {
        paper.reference_ids.insert(global);
        if (const xml::Node* y = ref->find("year")) {
          int yr = 0;
          if (parse_year(y->inner_text(), yr)) res.reference_years[global] = yr;
          else ++res.warnings;
        }
      }
    }
  }

  if (const xml::Node* body = root.find("body")) {
    std::vector<const xml::Node*> paras;
    body->find_all("p", paras);
    std::size_t citing_sentences = 0;
    for (const xml::Node* pn : paras) {
      std::string markup = collapse_ws(pn->inner_markup());
      std::string plain = collapse_ws(strip_markup(markup));
      if (!plain.empty()) paper.body_paragraphs.push_back(plain);
      if (markup.find("<xref") == std::string::npos) continue;
      for (std::string& sent : split_sentences(markup)) {
        if (sent.find("<xref") == std::string::npos) continue;
        MaskResult m = mask_citations_full(sent);
        if (m.groups == 0) continue;
        res.warnings += m.missing_rids;
        std::size_t sentence_index = citing_sentences++;
        std::string text = collapse_ws(strip_markup(m.text));
        std::set<std::string> seen;
        for (const std::string& rid : m.rids) {
          auto it = rid_map.find(rid);
          std::string cited = it == rid_map.end() ? rid : it->second;
          if (cited == paper.paper_id) {
            ++res.warnings;
            continue;
          }
          if (!seen.insert(cited).second) continue;
          Query q;
          q.query_id = paper.paper_id + ":s" + std::to_string(sentence_index) + ":" + cited;
          q.source_id = paper.paper_id;
          q.cited_id = cited;
          q.text = text;
          q.context = markup;
          q.az = AzLabel::other;
          res.queries.push_back(std::move(q));
        }
      }
    }
  }

  return res;
}

// ---- corpus-level operations ----------------------------------------------------

std::vector<Paper> filter_source_papers(const std::vector<Paper>& papers,
                                        const TimeSlicer& slicer, std::size_t min_refs,
                                        std::size_t min_slices) {
  std::unordered_map<std::string, int> year_of;
  for (const Paper& p : papers)
    if (p.pub_year != 0) year_of.emplace(p.paper_id, p.pub_year);
  std::vector<Paper> out;
  for (const Paper& p : papers) {
    if (p.reference_ids.size() <= min_refs) continue;
    std::set<std::size_t> covered;
    for (const std::string& id : p.reference_ids) {
      auto it = year_of.find(id);
      if (it == year_of.end()) continue;
      try {
        covered.insert(slicer.index_of(it->second));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::out_of_range) throw;
      }
    }
    if (covered.size() <= min_slices) continue;
    out.push_back(p);
  }
  return out;
}

std::string resolve_abstract(const Paper& paper) {
  if (!paper.abstract.empty()) return paper.abstract;
  for (const std::string& para : paper.body_paragraphs)
    if (!para.empty()) return para;
  throw Error(ErrorKind::missing_text,
              "paper '" + paper.paper_id + "' has neither abstract nor body text");
}

std::vector<Paper> merge_papers(std::vector<Paper> papers) {
  std::map<std::string, Paper> by_id;
  for (Paper& p : papers) {
    auto [it, fresh] = by_id.try_emplace(p.paper_id, std::move(p));
    if (fresh) continue;
    Paper& dst = it->second;
    Paper& src = p;
    if (dst.title.empty()) dst.title = std::move(src.title);
    if (dst.abstract.empty()) dst.abstract = std::move(src.abstract);
    if (dst.body_paragraphs.empty()) dst.body_paragraphs = std::move(src.body_paragraphs);
    if (dst.pub_year == 0) dst.pub_year = src.pub_year;
    dst.reference_ids.insert(src.reference_ids.begin(), src.reference_ids.end());
  }
  std::vector<Paper> out;
  out.reserve(by_id.size());
  for (auto& [id, p] : by_id) out.push_back(std::move(p));
  return out;
}

// ---- persistence ------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  return f;
}

json parse_line(const std::string& line, const std::string& path, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_input,
                path + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

void save_papers(const std::string& path, const std::vector<Paper>& papers) {
  std::ofstream f = open_out(path);
  for (const Paper& p : papers) {
    json j{{"paper_id", p.paper_id},
           {"title", p.title},
           {"abstract", p.abstract},
           {"pub_year", p.pub_year},
           {"reference_ids", p.reference_ids}};
    if (!p.body_paragraphs.empty()) j["body_paragraphs"] = p.body_paragraphs;
    f << j.dump() << '\n';
  }
  if (!f) throw Error(ErrorKind::io, "short write to '" + path + "'");
}

std::vector<Paper> load_papers(const std::string& path) {
  std::ifstream f = open_in(path);
  std::vector<Paper> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);
    try {
      Paper p;
      p.paper_id = j.at("paper_id").get<std::string>();
      p.title = j.value("title", std::string());
      p.abstract = j.value("abstract", std::string());
      p.pub_year = j.value("pub_year", 0);
      for (const auto& r : j.value("reference_ids", std::vector<std::string>{}))
        p.reference_ids.insert(r);
      p.body_paragraphs = j.value("body_paragraphs", std::vector<std::string>{});
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::invalid_input,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_queries(const std::string& path, const std::vector<Query>& queries) {
  std::ofstream f = open_out(path);
  for (const Query& q : queries) {
    json j{{"query_id", q.query_id}, {"cited_id", q.cited_id},   {"text", q.text},
           {"context", q.context},   {"az_label", az_to_string(q.az)}, {"source_id", q.source_id}};
    f << j.dump() << '\n';
  }
  if (!f) throw Error(ErrorKind::io, "short write to '" + path + "'");
}

std::vector<Query> load_queries(const std::string& path) {
  std::ifstream f = open_in(path);
  std::vector<Query> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);
    try {
      Query q;
      q.query_id = j.at("query_id").get<std::string>();
      q.cited_id = j.at("cited_id").get<std::string>();
      q.text = j.value("text", std::string());
      q.context = j.value("context", std::string());
      q.az = az_from_string(j.value("az_label", std::string("Other")));
      q.source_id = j.value("source_id", std::string());
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::invalid_input,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::size_t merge_az_labels(std::vector<Query>& queries, const std::string& tsv_path,
                            std::size_t* unmatched) {
  std::ifstream f = open_in(tsv_path);
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < queries.size(); ++i) pos.emplace(queries[i].query_id, i);
  std::string line;
  std::size_t lineno = 0, merged = 0, misses = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorKind::invalid_input,
                  tsv_path + ":" + std::to_string(lineno) + ": expected query_id<TAB>label");
    std::string id = line.substr(0, tab);
    std::string rest = line.substr(tab + 1);
    std::size_t tab2 = rest.find('\t');
    std::string label = tab2 == std::string::npos ? rest : rest.substr(0, tab2);
    if (lineno == 1 && id == "query_id") continue;
    AzLabel az = az_from_string(label);
    auto it = pos.find(id);
    if (it == pos.end()) {
      ++misses;
      continue;
    }
    queries[it->second].az = az;
    ++merged;
  }
  if (unmatched) *unmatched = misses;
  return merged;
}

CorpusIndex CorpusIndex::build(std::vector<Paper> papers, std::vector<Query> queries) {
  CorpusIndex idx;
  idx.papers = std::move(papers);
  idx.queries = std::move(queries);
  std::sort(idx.papers.begin(), idx.papers.end(),
            [](const Paper& a, const Paper& b) { return a.paper_id < b.paper_id; });
  std::sort(idx.queries.begin(), idx.queries.end(),
            [](const Query& a, const Query& b) { return a.query_id < b.query_id; });
  for (std::size_t i = 0; i < idx.papers.size(); ++i) {
    if (!idx.paper_pos_.emplace(idx.papers[i].paper_id, i).second)
      throw Error(ErrorKind::invalid_input,
                  "duplicate paper id '" + idx.papers[i].paper_id + "'");
  }
  for (std::size_t i = 0; i < idx.queries.size(); ++i) {
    if (!idx.query_pos_.emplace(idx.queries[i].query_id, i).second)
      throw Error(ErrorKind::invalid_input,
                  "duplicate query id '" + idx.queries[i].query_id + "'");
  }
  return idx;
}

const Paper* CorpusIndex::paper(const std::string& id) const {
  auto it = paper_pos_.find(id);
  return it == paper_pos_.end() ? nullptr : &papers[it->second];
}

const Query* CorpusIndex::query(const std::string& id) const {
  auto it = query_pos_.find(id);
  return it == query_pos_.end() ? nullptr : &queries[it->second];
}

}  // namespace citerec
