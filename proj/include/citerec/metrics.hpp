#ifndef CITEREC_METRICS_HPP
#define CITEREC_METRICS_HPP

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "citerec/dataset.hpp"

namespace citerec {

// ---- precision / recall / F1 ----------------------------------------------------

struct ClassCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Empty denominators yield 0, with F1 of 0 when both components are 0.
Prf prf(const ClassCounts& counts);

// Unweighted mean of the per-class values, component-wise; the macro
// F1 is the mean of the per-class F1 values (not the harmonic mean of
// the macro precision and recall). Throws on an empty list.
Prf macro_average(const std::vector<Prf>& per_class);

// ---- confusion --------------------------------------------------------------------

// Square contingency table over a fixed class order; rows index the
// true (or second-annotator) label, columns the predicted (or
// first-annotator) label.
struct LabelTable {
  std::vector<std::string> classes;
  std::vector<long> cells;  // classes.size()^2, row-major

  long& at(std::size_t row, std::size_t col) { return cells[row * classes.size() + col]; }
  long at(std::size_t row, std::size_t col) const { return cells[row * classes.size() + col]; }
  long total() const;
  long row_sum(std::size_t row) const;
  long col_sum(std::size_t col) const;
};

struct Confusion {
  LabelTable table;
  std::vector<ClassCounts> per_class;  // one-vs-rest counts per class
};

// Labels must both lie inside class_order; anything else throws
// ErrorKind::label naming the stray value.
Confusion confusion(const std::vector<std::string>& truth,
                    const std::vector<std::string>& predicted,
                    const std::vector<std::string>& class_order);

// ---- inter-annotator agreement ------------------------------------------------------

// Cohen's kappa over the table: (P_o - P_e) / (1 - P_e) with
// P_o = trace/n and P_e = sum_c row_c * col_c / n^2. Throws
// ErrorKind::numeric when P_e reaches 1 (the statistic is undefined).
double cohen_kappa(const LabelTable& table);

// ---- model output records -----------------------------------------------------------

// One scored (query, candidate) pair as archived by evaluation runs.
struct Prediction {
  std::string query_id;
  std::string candidate_id;
  double p_cite = 0.0;      // probability of the cite class
  double p_not_cite = 0.0;
  bool recommended = false;
  std::vector<double> p_az;  // zone distribution, kAzCount wide
  AzLabel az_pred = AzLabel::other;
};

void save_predictions(const std::string& path, const std::vector<Prediction>& preds);
std::vector<Prediction> load_predictions(const std::string& path);

// ---- paired recall comparison ---------------------------------------------------------

struct RecallDelta {
  // per zone category: pairs recovered by B but not A, and by A but not B.
  std::map<AzLabel, std::pair<long, long>> gained_lost;
};

// Counts, over the true positive pairs of `truth`, how the two
// prediction sets differ in which citations they recover, bucketed by
// the query's zone category. Both sets must cover exactly the pairs of
// `truth`; otherwise ErrorKind::alignment lists what is missing.
RecallDelta recall_delta(const std::vector<Prediction>& a, const std::vector<Prediction>& b,
                         const std::vector<Example>& truth);

// ---- report tables ---------------------------------------------------------------------

// Rows of (model name, macro scores) rendered with a fixed header.
std::string render_macro_table(const std::vector<std::pair<std::string, Prf>>& rows,
                               bool markdown);
// Per-class precision/recall/F1 blocks per model.
std::string render_per_class_table(
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>>& rows,
    bool markdown);
// Zone-category recall movement between two models.
std::string render_delta_table(const RecallDelta& delta, const std::string& name_a,
                               const std::string& name_b, bool markdown);

}  // namespace citerec

#endif
