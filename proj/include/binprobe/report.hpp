#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "binprobe/errors.hpp"
#include "binprobe/hash.hpp"
#include "binprobe/spearman.hpp"
#include "binprobe/strutil.hpp"

namespace binprobe {

struct PerExampleScores {
  std::string id;
  std::map<std::string, double> values;
  std::optional<std::string> failure;  // set => values empty, excluded from aggregates
};

struct MetricReport {
  std::vector<PerExampleScores> per_example;  // sorted by id
  std::map<std::string, double> aggregate;    // arithmetic mean over scored examples
  std::string config_fingerprint;
  std::size_t excluded = 0;
};

/// Assemble a report from raw rows: sorts by id, averages each metric over the
/// examples that carry it, and counts recorded failures.
inline MetricReport make_report(std::vector<PerExampleScores> rows,
                                const nlohmann::json& config_for_fingerprint) {
  MetricReport report;
  std::sort(rows.begin(), rows.end(),
            [](const PerExampleScores& a, const PerExampleScores& b) { return a.id < b.id; });
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& row : rows) {
    if (row.failure) {
      ++report.excluded;
      continue;
    }
    for (const auto& [name, value] : row.values) {
      auto& [sum, count] = sums[name];
      sum += value;
      ++count;
    }
  }
  for (const auto& [name, sc] : sums)
    if (sc.second > 0) report.aggregate[name] = sc.first / static_cast<double>(sc.second);
  report.per_example = std::move(rows);
  report.config_fingerprint = sha256_hex(config_for_fingerprint.dump()).substr(0, 16);
  return report;
}

inline nlohmann::json report_to_json(const MetricReport& report) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& row : report.per_example) {
    nlohmann::json j{{"id", row.id}};
    if (row.failure) {
      j["failure"] = *row.failure;
      j["metrics"] = nullptr;
    } else {
      j["metrics"] = row.values;
    }
    per.push_back(std::move(j));
  }
  return nlohmann::json{{"config_fingerprint", report.config_fingerprint},
                        {"aggregate", report.aggregate},
                        {"excluded", report.excluded},
                        {"per_example", std::move(per)}};
}

inline MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport report;
  try {
    report.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    report.excluded = j.at("excluded").get<std::size_t>();
    for (const auto& [name, value] : j.at("aggregate").items())
      report.aggregate[name] = value.get<double>();
    for (const auto& row : j.at("per_example")) {
      PerExampleScores scores;
      scores.id = row.at("id").get<std::string>();
      if (row.contains("failure"))
        scores.failure = row.at("failure").get<std::string>();
      else
        for (const auto& [name, value] : row.at("metrics").items())
          scores.values[name] = value.get<double>();
      report.per_example.push_back(std::move(scores));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report JSON: ") + e.what());
  }
  return report;
}

namespace detail {

inline std::vector<std::string> metric_columns(const MetricReport& report) {
  std::set<std::string> names;
  for (const auto& row : report.per_example)
    for (const auto& [name, value] : row.values) names.insert(name);
  for (const auto& [name, value] : report.aggregate) names.insert(name);
  return {names.begin(), names.end()};
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

inline std::string report_to_csv(const MetricReport& report) {
  auto columns = detail::metric_columns(report);
  std::ostringstream out;
  out << "id";
  for (const auto& c : columns) out << ',' << c;
  out << ",failure\n";
  for (const auto& row : report.per_example) {
    out << detail::csv_escape(row.id);
    for (const auto& c : columns) {
      out << ',';
      auto it = row.values.find(c);
      if (it != row.values.end()) out << detail::format_value(it->second);
    }
    out << ',' << (row.failure ? detail::csv_escape(*row.failure) : "") << '\n';
  }
  out << "aggregate";
  for (const auto& c : columns) {
    out << ',';
    auto it = report.aggregate.find(c);
    if (it != report.aggregate.end()) out << detail::format_value(it->second);
  }
  out << ",\n";
  return out.str();
}

/// Aligned text table, one row per labelled report, metric columns across —
/// the same layout as the headline results table.
inline std::string render_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::set<std::string> all;
  for (const auto& [label, report] : rows)
    for (const auto& [name, value] : report.aggregate) all.insert(name);
  std::vector<std::string> columns(all.begin(), all.end());

  std::size_t label_w = 5;
  for (const auto& [label, report] : rows) label_w = std::max(label_w, label.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 8));

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(label_w)) << "setup";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << "  " << std::right << std::setw(static_cast<int>(widths[i])) << columns[i];
  out << '\n';
  out << std::string(label_w, '-');
  for (std::size_t i = 0; i < columns.size(); ++i) out << "  " << std::string(widths[i], '-');
  out << '\n';
  for (const auto& [label, report] : rows) {
    out << std::left << std::setw(static_cast<int>(label_w)) << label;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      auto it = report.aggregate.find(columns[i]);
      out << "  " << std::right << std::setw(static_cast<int>(widths[i]))
          << (it != report.aggregate.end() ? detail::format_value(it->second) : "-");
    }
    out << '\n';
  }
  return out.str();
}

struct HumanScore {
  std::string id;
  std::string question;
  double score = 0.0;
};

/// Human-scores CSV: header "id,question,score", one row per judgement.
inline std::vector<HumanScore> load_human_scores(std::istream& in) {
  std::vector<HumanScore> scores;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw SchemaError(1, "empty human-scores file");
  ++line_no;
  if (trim(line) != "id,question,score")
    throw SchemaError(1, "expected header 'id,question,score'");
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto parts = split_trimmed(line, ',');
    if (parts.size() != 3) throw SchemaError(line_no, "expected 3 comma-separated fields");
    HumanScore hs;
    hs.id = parts[0];
    hs.question = parts[1];
    try {
      hs.score = std::stod(parts[2]);
    } catch (const std::exception&) {
      throw SchemaError(line_no, "score is not numeric: '" + parts[2] + "'");
    }
    scores.push_back(std::move(hs));
  }
  return scores;
}

struct MetaEvalRow {
  std::string metric;
  std::string question;
  double rho = 0.0;
  double p_value = 1.0;
  std::optional<double> exact_p;
  std::size_t n = 0;
};

/// Correlate human preference with each automatic metric: Spearman over
/// examples present in both the report and the human-scores list.
inline std::vector<MetaEvalRow> meta_evaluate(const MetricReport& report,
                                              const std::vector<HumanScore>& human) {
  std::map<std::string, std::map<std::string, double>> by_question;  // question -> id -> score
  for (const auto& hs : human) by_question[hs.question][hs.id] = hs.score;

  std::map<std::string, std::map<std::string, double>> metric_values;  // metric -> id -> value
  for (const auto& row : report.per_example)
    for (const auto& [name, value] : row.values) metric_values[name][row.id] = value;

  std::vector<MetaEvalRow> rows;
  for (const auto& [question, human_by_id] : by_question) {
    for (const auto& [metric, values_by_id] : metric_values) {
      std::vector<double> x, y;
      for (const auto& [id, human_score] : human_by_id) {
        auto it = values_by_id.find(id);
        if (it == values_by_id.end()) continue;
        x.push_back(human_score);
        y.push_back(it->second);
      }
      MetaEvalRow row;
      row.metric = metric;
      row.question = question;
      row.n = x.size();
      if (x.size() >= 3) {
        try {
          SpearmanResult sr = spearman(x, y);
          row.rho = sr.rho;
          row.p_value = sr.p_value;
          row.exact_p = sr.exact_p;
        } catch (const DegenerateInput&) {
          continue;  // constant column: correlation undefined, row omitted
        }
      } else {
        continue;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace binprobe
