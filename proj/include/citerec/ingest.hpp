#ifndef CITEREC_INGEST_HPP
#define CITEREC_INGEST_HPP

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace citerec {

// Argumentative zoning categories for citing sentences. "other" is the
// unlabeled/none-of-the-above bucket; annotation only ever upgrades a
// query away from it.
enum class AzLabel { method, conclusion, goal, object, other };

inline constexpr AzLabel kAzOrder[] = {AzLabel::method, AzLabel::conclusion, AzLabel::goal,
                                       AzLabel::object, AzLabel::other};
inline constexpr std::size_t kAzCount = 5;
// The categories carrying an actual zone, i.e. everything but "other".
inline constexpr std::size_t kAzSpecificCount = 4;

std::string az_to_string(AzLabel az);
AzLabel az_from_string(std::string_view s);  // throws ErrorKind::label

struct Paper {
  std::string paper_id;
  std::string title;
  std::string abstract;
  int pub_year = 0;  // 0 when unknown
  std::set<std::string> reference_ids;
  std::vector<std::string> body_paragraphs;  // plain text, may be empty for stubs
};

// One citing sentence paired with one cited paper. A sentence citing
// three papers yields three queries sharing text and context.
struct Query {
  std::string query_id;
  std::string source_id;  // paper the sentence came from
  std::string cited_id;
  std::string text;     // sentence with citation markers masked to [CITE]
  std::string context;  // surrounding paragraph, original markup preserved
  AzLabel az = AzLabel::other;
};

// ---- publication time slices ----------------------------------------------

struct TimeSlice {
  std::string label;
  int lo = 0;  // inclusive
  int hi = 0;  // inclusive
};

class TimeSlicer {
 public:
  // Slices must be contiguous and ascending; together they define the
  // covered year range. Throws ErrorKind::config otherwise.
  explicit TimeSlicer(std::vector<TimeSlice> slices);

  // Seven slices covering 1877..2013, finer toward the recent end:
  // <=1995, 1996-2000, 2001-2003, 2004-2005, 2006-2007, 2008-2009,
  // 2010-2013.
  static TimeSlicer standard();

  // Index of the slice containing the year. Years outside the covered
  // range throw ErrorKind::out_of_range.
  std::size_t index_of(int year) const;
  const TimeSlice& slice(std::size_t i) const { return slices_[i]; }
  std::size_t count() const { return slices_.size(); }
  int min_year() const { return slices_.front().lo; }
  int max_year() const { return slices_.back().hi; }

 private:
  std::vector<TimeSlice> slices_;
};

// ---- citation masking ------------------------------------------------------

struct MaskOptions {
  // Plain-text patterns used only when a sentence carries no XML
  // reference markers at all.
  bool bracketed_numeric = true;  // [12], [3,4], [5-8]
  bool author_year = true;        // (Name, 2004), (Name et al., 2004; Other, 2006)
};

struct MaskResult {
  std::string text;               // input with each citation group replaced by [CITE]
  std::vector<std::string> rids;  // reference ids of masked markers, in order
  std::size_t groups = 0;
  std::size_t missing_rids = 0;  // markers masked without a usable rid
};

// A citation group is a maximal run of bibliographic reference markers
// separated only by whitespace, commas, semicolons or dashes; when the
// run is wrapped in parentheses or square brackets those are absorbed
// too. Each group becomes a single [CITE]. Applying the mask twice is
// the same as applying it once.
MaskResult mask_citations_full(std::string_view sentence, const MaskOptions& opts = {});
std::string mask_citations(std::string_view sentence);

// Drops tags from a markup fragment and decodes basic entities.
std::string strip_markup(std::string_view markup);

// Sentence boundaries on [.!?] outside tags, with guards for common
// abbreviations, initials and decimal numbers.
std::vector<std::string> split_sentences(std::string_view paragraph_markup);

// ---- article parsing -------------------------------------------------------

struct ParseResult {
  Paper paper;
  std::vector<Query> queries;
  // Publication years of referenced works, keyed like reference_ids.
  std::map<std::string, int> reference_years;
  std::size_t warnings = 0;
};

// Parses one journal-article XML document: front matter for id, title,
// abstract and year; body paragraphs for citing sentences; the back
// reference list for cited ids and years. Reference ids are rewritten
// to a publication id (pmid, pmc or doi) when the reference carries
// one, so they can resolve across the corpus; otherwise the local
// rid is kept. Recoverable oddities (markers without rid, refs
// without year) are counted in warnings rather than thrown.
ParseResult parse_jats(std::string_view xml_text, std::string_view fallback_id = {});

// ---- corpus-level operations -----------------------------------------------

// Keeps papers that cite broadly across time: strictly more than
// min_refs references AND references resolving (via the papers'
// own years) into strictly more than min_slices distinct slices.
// References whose year is unknown or out of range count toward
// min_refs but not toward the slice spread.
std::vector<Paper> filter_source_papers(const std::vector<Paper>& papers,
                                        const TimeSlicer& slicer, std::size_t min_refs = 30,
                                        std::size_t min_slices = 5);

// The text a paper contributes as its summary: the abstract, or the
// first non-empty body paragraph when the abstract is missing. Throws
// ErrorKind::missing_text when neither exists.
std::string resolve_abstract(const Paper& paper);

// Merges duplicate paper records (same paper_id): non-empty fields
// win, reference sets union, a known year beats an unknown one.
// Output is sorted by paper_id.
std::vector<Paper> merge_papers(std::vector<Paper> papers);

// ---- persistence -----------------------------------------------------------

void save_papers(const std::string& path, const std::vector<Paper>& papers);
std::vector<Paper> load_papers(const std::string& path);
void save_queries(const std::string& path, const std::vector<Query>& queries);
std::vector<Query> load_queries(const std::string& path);

// Applies zone annotations from a TSV of `query_id<TAB>label` lines.
// Returns the number of queries relabeled; ids not present in queries
// are counted into *unmatched when given. Unknown labels throw.
std::size_t merge_az_labels(std::vector<Query>& queries, const std::string& tsv_path,
                            std::size_t* unmatched = nullptr);

// Papers and queries with id lookups; inputs are sorted and checked
// for duplicate ids.
struct CorpusIndex {
  std::vector<Paper> papers;
  std::vector<Query> queries;

  static CorpusIndex build(std::vector<Paper> papers, std::vector<Query> queries);

  const Paper* paper(const std::string& id) const;
  const Query* query(const std::string& id) const;

 private:
  std::map<std::string, std::size_t> paper_pos_;
  std::map<std::string, std::size_t> query_pos_;
};

}  // namespace citerec

#endif
