#include "citerec/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "citerec/error.hpp"

namespace citerec {

using nlohmann::json;

Prf prf(const ClassCounts& c) {
  Prf out;
  if (c.tp + c.fp > 0) out.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) out.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (out.precision + out.recall > 0.0)
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

Prf macro_average(const std::vector<Prf>& per_class) {
  if (per_class.empty())
    throw Error(ErrorKind::invalid_input, "macro average over an empty class list");
  Prf out;
  for (const Prf& p : per_class) {
    out.precision += p.precision;
    out.recall += p.recall;
    out.f1 += p.f1;
  }
  double n = static_cast<double>(per_class.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  return out;
}

long LabelTable::total() const {
  long n = 0;
  for (long c : cells) n += c;
  return n;
}

long LabelTable::row_sum(std::size_t row) const {
  long n = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) n += at(row, c);
  return n;
}

long LabelTable::col_sum(std::size_t col) const {
  long n = 0;
  for (std::size_t r = 0; r < classes.size(); ++r) n += at(r, col);
  return n;
}

Confusion confusion(const std::vector<std::string>& truth,
                    const std::vector<std::string>& predicted,
                    const std::vector<std::string>& class_order) {
  if (truth.size() != predicted.size())
    throw Error(ErrorKind::alignment, "confusion: " + std::to_string(truth.size()) +
                                          " true labels vs " + std::to_string(predicted.size()) +
                                          " predicted");
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < class_order.size(); ++i) pos.emplace(class_order[i], i);
  Confusion out;
  out.table.classes = class_order;
  out.table.cells.assign(class_order.size() * class_order.size(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto t = pos.find(truth[i]);
    if (t == pos.end())
      throw Error(ErrorKind::label, "true label '" + truth[i] + "' outside the class order");
    auto p = pos.find(predicted[i]);
    if (p == pos.end())
      throw Error(ErrorKind::label, "predicted label '" + predicted[i] + "' outside the class order");
    out.table.at(t->second, p->second) += 1;
  }
  long n = out.table.total();
  out.per_class.resize(class_order.size());
  for (std::size_t c = 0; c < class_order.size(); ++c) {
    ClassCounts& cc = out.per_class[c];
    cc.tp = out.table.at(c, c);
    cc.fp = out.table.col_sum(c) - cc.tp;
    cc.fn = out.table.row_sum(c) - cc.tp;
    cc.tn = n - cc.tp - cc.fp - cc.fn;
  }
  return out;
}

double cohen_kappa(const LabelTable& table) {
  long n = table.total();
  if (n == 0) throw Error(ErrorKind::numeric, "kappa over an empty table");
  double dn = static_cast<double>(n);
  double po = 0.0;
  for (std::size_t c = 0; c < table.classes.size(); ++c)
    po += static_cast<double>(table.at(c, c));
  po /= dn;
  double pe = 0.0;
  for (std::size_t c = 0; c < table.classes.size(); ++c)
    pe += static_cast<double>(table.row_sum(c)) * static_cast<double>(table.col_sum(c));
  pe /= dn * dn;
  if (pe >= 1.0)
    throw Error(ErrorKind::numeric, "kappa undefined: expected agreement is 1");
  return (po - pe) / (1.0 - pe);
}

// ---- prediction records ---------------------------------------------------------

void save_predictions(const std::string& path, const std::vector<Prediction>& preds) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  for (const Prediction& p : preds) {
    json j{{"query_id", p.query_id},
           {"candidate_id", p.candidate_id},
           {"p_cite", p.p_cite},
           {"p_not_cite", p.p_not_cite},
           {"decision", p.recommended ? "cite" : "not_cite"},
           {"p_az", p.p_az},
           {"az_pred", az_to_string(p.az_pred)}};
    f << j.dump() << '\n';
  }
  if (!f) throw Error(ErrorKind::io, "short write to '" + path + "'");
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      Prediction p;
      p.query_id = j.at("query_id").get<std::string>();
      p.candidate_id = j.at("candidate_id").get<std::string>();
      p.p_cite = j.at("p_cite").get<double>();
      p.p_not_cite = j.at("p_not_cite").get<double>();
      p.recommended = j.at("decision").get<std::string>() == "cite";
      p.p_az = j.value("p_az", std::vector<double>{});
      p.az_pred = az_from_string(j.value("az_pred", std::string("Other")));
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::invalid_input, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---- paired recall comparison -----------------------------------------------------

namespace {

std::string pair_key(const std::string& qid, const std::string& cid) {
  return qid + '\t' + cid;
}

void require_same_pairs(const std::vector<Prediction>& a, const std::vector<Prediction>& b,
                        const std::vector<Example>& truth) {
  std::set<std::string> ka, kb;
  for (const Prediction& p : a) ka.insert(pair_key(p.query_id, p.candidate_id));
  for (const Prediction& p : b) kb.insert(pair_key(p.query_id, p.candidate_id));
  std::vector<std::string> missing;
  auto note = [&missing](const std::string& where, const std::string& key) {
    if (missing.size() < 5) missing.push_back(where + " lacks " + key);
  };
  std::size_t bad = 0;
  for (const std::string& k : ka)
    if (!kb.count(k)) {
      note("second set", k);
      ++bad;
    }
  for (const std::string& k : kb)
    if (!ka.count(k)) {
      note("first set", k);
      ++bad;
    }
  for (const Example& e : truth) {
    std::string k = pair_key(e.query_id, e.candidate_id);
    if (!ka.count(k)) {
      note("first set", k);
      ++bad;
    }
  }
  if (bad > 0) {
    std::string msg = "prediction sets cover different pairs (" + std::to_string(bad) + "): ";
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i) msg += "; ";
      msg += missing[i];
    }
    throw Error(ErrorKind::alignment, msg);
  }
}

}  // namespace

RecallDelta recall_delta(const std::vector<Prediction>& a, const std::vector<Prediction>& b,
                         const std::vector<Example>& truth) {
  require_same_pairs(a, b, truth);
  std::unordered_map<std::string, bool> rec_a, rec_b;
  for (const Prediction& p : a) rec_a[pair_key(p.query_id, p.candidate_id)] = p.recommended;
  for (const Prediction& p : b) rec_b[pair_key(p.query_id, p.candidate_id)] = p.recommended;
  RecallDelta out;
  for (const Example& e : truth) {
    if (e.cite != CiteLabel::cite) continue;
    std::string k = pair_key(e.query_id, e.candidate_id);
    bool ra = rec_a.at(k);
    bool rb = rec_b.at(k);
    auto& bucket = out.gained_lost[e.az];
    if (rb && !ra) bucket.first += 1;
    if (ra && !rb) bucket.second += 1;
  }
  return out;
}

// ---- report tables -------------------------------------------------------------------

namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string join_row(const std::vector<std::string>& cells, bool markdown) {
  std::string out;
  if (markdown) {
    out += "|";
    for (const std::string& c : cells) {
      out += ' ';
      out += c;
      out += " |";
    }
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += '\t';
      out += cells[i];
    }
  }
  out += '\n';
  return out;
}

std::string md_rule(std::size_t n) {
  std::string out = "|";
  for (std::size_t i = 0; i < n; ++i) out += " --- |";
  out += '\n';
  return out;
}

}  // namespace

std::string render_macro_table(const std::vector<std::pair<std::string, Prf>>& rows,
                               bool markdown) {
  std::string out = join_row({"Model", "Macro_P", "Macro_R", "Macro_F1"}, markdown);
  if (markdown) out += md_rule(4);
  for (const auto& [name, p] : rows)
    out += join_row({name, fmt4(p.precision), fmt4(p.recall), fmt4(p.f1)}, markdown);
  return out;
}

std::string render_per_class_table(
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>>& rows,
    bool markdown) {
  std::string out = join_row({"Model", "Class", "P", "R", "F1"}, markdown);
  if (markdown) out += md_rule(5);
  for (const auto& [name, classes] : rows)
    for (const auto& [cls, p] : classes)
      out += join_row({name, cls, fmt4(p.precision), fmt4(p.recall), fmt4(p.f1)}, markdown);
  return out;
}

std::string render_delta_table(const RecallDelta& delta, const std::string& name_a,
                               const std::string& name_b, bool markdown) {
  std::string out = join_row(
      {"Category", "Recovered only by " + name_b, "Recovered only by " + name_a}, markdown);
  if (markdown) out += md_rule(3);
  for (AzLabel az : kAzOrder) {
    auto it = delta.gained_lost.find(az);
    if (it == delta.gained_lost.end()) continue;
    out += join_row({az_to_string(az), std::to_string(it->second.first),
                     std::to_string(it->second.second)},
                    markdown);
  }
  return out;
}

}  // namespace citerec
