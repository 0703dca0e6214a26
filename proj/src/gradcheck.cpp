#include "citerec/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "citerec/rng.hpp"

namespace citerec::nd {

GradCheckReport grad_check(std::vector<ParamRef>& refs,
                           const std::function<double(bool with_grad)>& loss,
                           const GradCheckOptions& opts) {
  for (ParamRef& r : refs) r.tensor->zero_grad();
  loss(true);

  // Flatten coordinate addresses, then sample without replacement if a
  // sample budget was given.
  struct Coord {
    std::size_t ref;
    std::size_t idx;
  };
  std::vector<Coord> coords;
  for (std::size_t ri = 0; ri < refs.size(); ++ri)
    for (std::size_t i = 0; i < refs[ri].tensor->size(); ++i) coords.push_back({ri, i});
  if (opts.samples > 0 && opts.samples < coords.size()) {
    Rng rng(opts.seed);
    rng.shuffle(coords);
    coords.resize(opts.samples);
  }

  GradCheckReport report;
  for (const Coord& c : coords) {
    ParamRef& r = refs[c.ref];
    if (opts.exclude && opts.exclude(r.name, c.idx)) continue;
    double saved = r.tensor->v[c.idx];
    r.tensor->v[c.idx] = saved + opts.step;
    double up = loss(false);
    r.tensor->v[c.idx] = saved - opts.step;
    double down = loss(false);
    r.tensor->v[c.idx] = saved;
    double numeric = (up - down) / (2.0 * opts.step);
    double analytic = r.tensor->g[c.idx];
    double rel = std::abs(analytic - numeric) /
                 std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    report.checked += 1;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = r.name;
      report.worst_index = c.idx;
      report.analytic = analytic;
      report.numeric = numeric;
    }
  }
  return report;
}

}  // namespace citerec::nd
