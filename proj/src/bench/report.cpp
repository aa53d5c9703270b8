#include <cstdio>
#include <map>

#include "slidetailor/bench/bench.hpp"

namespace slidetailor::bench {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::vector<std::string> header() {
  std::vector<std::string> h{"config", "cases"};
  for (auto m : evaluator::kAllMetrics) h.emplace_back(evaluator::to_string(m));
  h.emplace_back("overall");
  return h;
}

std::vector<std::string> cells(const ReportRow& row) {
  std::vector<std::string> c{row.label, std::to_string(row.cases)};
  for (double v : row.means) c.push_back(fixed2(v));
  c.push_back(fixed2(row.overall));
  return c;
}

}  // namespace

ReportTable aggregate_report(const std::vector<RunRecord>& records) {
  ReportTable table;
  std::map<std::string, std::vector<const evaluator::EvalReport*>> groups;
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (!r.ok() || !r.eval) {
      ++table.excluded;
      continue;
    }
    auto label = ablation_label(r.job.flags);
    if (!groups.count(label)) order.push_back(label);
    groups[label].push_back(&*r.eval);
    ++table.evaluated;
  }
  if (table.evaluated == 0) {
    throw Error(Errc::NoEvaluatedRecords,
                "no evaluated records among " + std::to_string(records.size()) + " run(s)");
  }
  for (const auto& label : order) {
    const auto& reports = groups[label];
    ReportRow row;
    row.label = label;
    row.cases = reports.size();
    for (std::size_t i = 0; i < evaluator::kAllMetrics.size(); ++i) {
      double sum = 0.0;
      for (const auto* rep : reports) {
        const auto* s = rep->find(evaluator::kAllMetrics[i]);
        if (!s) throw Error(Errc::WrongArity, "report lacks " + std::string(evaluator::to_string(evaluator::kAllMetrics[i])));
        sum += s->normalized;
      }
      row.means[i] = sum / static_cast<double>(reports.size());
    }
    row.overall = evaluator::overall(row.means);
    table.rows.push_back(row);
  }
  return table;
}

std::string ReportTable::to_csv() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) out += (i ? "," : "") + c[i];
    out += "\n";
  };
  emit(header());
  for (const auto& row : rows) emit(cells(row));
  return out;
}

std::string ReportTable::to_text() const {
  std::vector<std::vector<std::string>> grid{header()};
  for (const auto& row : rows) grid.push_back(cells(row));
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& r : grid) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i < grid[k].size(); ++i) {
      const auto& cell = grid[k][i];
      std::string pad(width[i] - cell.size(), ' ');
      // Label column left-aligned, numbers right-aligned.
      out += i == 0 ? cell + pad : pad + cell;
      if (i + 1 < grid[k].size()) out += "  ";
    }
    out += "\n";
    if (k == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  out += std::to_string(evaluated) + " evaluated, " + std::to_string(excluded) + " excluded\n";
  return out;
}

}  // namespace slidetailor::bench
