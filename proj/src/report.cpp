#include "moodpipe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace moodpipe {

namespace {

constexpr const char* kDash = "—";

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Table rows are alphabetical.
std::vector<std::size_t> table_order() {
  std::vector<std::size_t> idx(kEmotionCount);
  for (std::size_t i = 0; i < kEmotionCount; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [](std::size_t a, std::size_t b) {
    return emotion_name(kAllEmotions[a]) < emotion_name(kAllEmotions[b]);
  });
  return idx;
}

std::string display_name(std::size_t e) {
  std::string s(emotion_name(kAllEmotions[e]));
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

std::size_t utf8_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  const std::size_t w = utf8_width(s);
  if (w >= width) return s;
  return left ? s + std::string(width - w, ' ') : std::string(width - w, ' ') + s;
}

int classifier_rank(const std::string& c) {
  if (c == "svm") return 0;
  if (c == "nb") return 1;
  return 2;
}

// Stable column order: preprocessing groups in first-seen order, then
// SMO/BAY/MLP inside each group.
std::vector<const EvalReport*> ordered(const std::vector<EvalReport>& reports) {
  std::vector<std::string> groups;
  for (const auto& r : reports)
    if (std::find(groups.begin(), groups.end(), r.preprocessing) == groups.end()) groups.push_back(r.preprocessing);
  std::vector<const EvalReport*> out;
  for (const auto& r : reports) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [&](const EvalReport* a, const EvalReport* b) {
    const auto ga = std::find(groups.begin(), groups.end(), a->preprocessing) - groups.begin();
    const auto gb = std::find(groups.begin(), groups.end(), b->preprocessing) - groups.begin();
    if (ga != gb) return ga < gb;
    return classifier_rank(a->classifier) < classifier_rank(b->classifier);
  });
  return out;
}

std::string consensus_label(const std::vector<EvalReport>& reports) {
  if (reports.empty()) return "Consensus";
  const double t = reports.front().threshold;
  for (const auto& r : reports)
    if (std::abs(r.threshold - t) > 1e-12) throw InputError("reports in one table must share a threshold");
  return "Consensus @ " + fixed(100.0 * t, 0) + "%";
}

struct Grid {
  std::vector<std::string> group_row;
  std::vector<std::string> header_row;
  std::vector<std::vector<std::string>> body;  // first cell is the row label
  std::vector<std::string> footnotes;
};

Grid build(const std::vector<EvalReport>& reports, bool rmse_table) {
  const auto cols = ordered(reports);
  Grid g;
  g.group_row.push_back(consensus_label(reports));
  g.header_row.push_back("");
  std::string last;
  for (const auto* r : cols) {
    g.group_row.push_back(r->preprocessing == last ? "" : preprocessing_label(r->preprocessing));
    last = r->preprocessing;
    g.header_row.push_back(classifier_label(r->classifier));
  }
  bool any_skipped = false;
  std::map<std::string, bool> reasons;
  const auto cell = [&](const MetricSummary& m, const std::optional<std::string>& reason) -> std::string {
    if (m.n == 0) {
      any_skipped = true;
      if (reason) reasons[*reason] = true;
      return kDash;
    }
    if (rmse_table) return fixed(m.mean, 2) + " ± " + fixed(m.std, 2);
    return fixed(m.mean, 2);
  };
  for (std::size_t e : table_order()) {
    std::vector<std::string> row{display_name(e)};
    for (const auto* r : cols) {
      const auto& es = r->emotions[e];
      row.push_back(cell(rmse_table ? es.rmse : es.accuracy, es.skip_reason));
    }
    g.body.push_back(std::move(row));
  }
  std::vector<std::string> mean{"CLASS. MEAN"}, sd{"CLASS. STD"};
  for (const auto* r : cols) {
    const auto& m = rmse_table ? r->class_rmse : r->class_accuracy;
    if (m.n == 0) {
      mean.push_back(kDash);
      sd.push_back(kDash);
      any_skipped = true;
    } else {
      mean.push_back(fixed(m.mean, 2));
      sd.push_back(fixed(m.std, 2));
    }
  }
  g.body.push_back(std::move(mean));
  g.body.push_back(std::move(sd));
  if (any_skipped) {
    g.footnotes.push_back(std::string(kDash) + " skipped: no cell could be trained for this emotion");
    for (const auto& [reason, _] : reasons) g.footnotes.push_back("  " + reason);
  }
  return g;
}

std::string render_text(const Grid& g) {
  std::vector<std::size_t> width(g.header_row.size(), 0);
  const auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], utf8_width(row[c]));
  };
  widen(g.header_row);
  for (const auto& row : g.body) widen(row);
  // group labels may span; only the first column must fit them
  width[0] = std::max(width[0], utf8_width(g.group_row[0]));
  std::ostringstream out;
  const auto emit = [&](const std::vector<std::string>& row, bool group) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += (c == 0 || group) ? pad(row[c], width[c], true) : pad(row[c], width[c], false);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  };
  emit(g.group_row, true);
  emit(g.header_row, false);
  for (const auto& row : g.body) emit(row, false);
  for (const auto& f : g.footnotes) out << f << '\n';
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string render_csv(const Grid& g) {
  std::ostringstream out;
  // one header row combining group and classifier
  out << "row";
  std::string group;
  for (std::size_t c = 1; c < g.header_row.size(); ++c) {
    if (!g.group_row[c].empty()) group = g.group_row[c];
    out << ',' << csv_field(group + " " + g.header_row[c]);
  }
  out << '\n';
  for (const auto& row : g.body) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << csv_field(row[c] == kDash ? "" : row[c]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

std::string classifier_label(std::string_view classifier) {
  if (classifier == "svm") return "SMO";
  if (classifier == "nb") return "BAY";
  if (classifier == "mlp") return "MLP";
  std::string s(classifier);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string preprocessing_label(std::string_view preprocessing) {
  const PreprocessSpec spec = PreprocessSpec::parse(preprocessing);
  switch (spec.kind) {
    case PreprocessKind::kRaw: return "RAW";
    case PreprocessKind::kCfs: return "CFS";
    case PreprocessKind::kDiscrCfs: return "DISCR+CFS";
    case PreprocessKind::kTtest: return "TTEST (p=" + format_double(spec.p_threshold) + ")";
    case PreprocessKind::kDiscrTtest: return "DISCR+TTEST (p=" + format_double(spec.p_threshold) + ")";
  }
  return "RAW";
}

std::string accuracy_table_text(const std::vector<EvalReport>& reports) { return render_text(build(reports, false)); }
std::string accuracy_table_csv(const std::vector<EvalReport>& reports) { return render_csv(build(reports, false)); }
std::string rmse_table_text(const std::vector<EvalReport>& reports) { return render_text(build(reports, true)); }
std::string rmse_table_csv(const std::vector<EvalReport>& reports) { return render_csv(build(reports, true)); }

std::string plot_data_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "threshold,preprocessing,classifier,emotion,accuracy_mean,accuracy_std,rmse_mean,rmse_std\n";
  const auto num = [](const MetricSummary& m, bool sd) { return m.n == 0 ? std::string() : format_double(sd ? m.std : m.mean); };
  for (const auto& r : reports) {
    for (std::size_t e : table_order()) {
      const auto& s = r.emotions[e];
      out << format_double(r.threshold) << ',' << csv_field(r.preprocessing) << ',' << r.classifier << ','
          << emotion_name(kAllEmotions[e]) << ',' << num(s.accuracy, false) << ',' << num(s.accuracy, true) << ','
          << num(s.rmse, false) << ',' << num(s.rmse, true) << '\n';
    }
  }
  return out.str();
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "emotion,accuracy_mean,accuracy_std,rmse_mean,rmse_std,base_rate,cells,skipped_cells\n";
  const auto num = [](const MetricSummary& m, bool sd) { return m.n == 0 ? std::string() : format_double(sd ? m.std : m.mean); };
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    const auto& s = r.emotions[e];
    out << emotion_name(kAllEmotions[e]) << ',' << num(s.accuracy, false) << ',' << num(s.accuracy, true) << ','
        << num(s.rmse, false) << ',' << num(s.rmse, true) << ',' << format_double(s.base_rate) << ','
        << s.accuracy.n << ',' << s.skipped_cells << '\n';
  }
  out << "CLASS.MEAN," << num(r.class_accuracy, false) << ",," << num(r.class_rmse, false) << ",,,,\n";
  out << "CLASS.STD," << num(r.class_accuracy, true) << ",," << num(r.class_rmse, true) << ",,,,\n";
  out << "SUBSET (extra)," << num(r.subset_accuracy, false) << ',' << num(r.subset_accuracy, true) << ",,,,,\n";
  return out.str();
}

}  // namespace moodpipe
