#pragma once

#include <string>
#include <vector>

#include "moodpipe/eval.hpp"

namespace moodpipe {

/// "SMO", "BAY", "MLP"
std::string classifier_label(std::string_view classifier);
/// "RAW", "CFS", "DISCR+CFS", "TTEST (p=0.05)", ...
std::string preprocessing_label(std::string_view preprocessing);

/// Accuracy table: rows = 9 emotions + CLASS. MEAN + CLASS. STD, one column
/// per report grouped by preprocessing. Reports must share a threshold.
std::string accuracy_table_text(const std::vector<EvalReport>& reports);
std::string accuracy_table_csv(const std::vector<EvalReport>& reports);

/// RMSE table with "mean ± std" cells.
std::string rmse_table_text(const std::vector<EvalReport>& reports);
std::string rmse_table_csv(const std::vector<EvalReport>& reports);

/// Long-form per-emotion means and stds for external bar charts.
std::string plot_data_csv(const std::vector<EvalReport>& reports);

/// Per-emotion summary of one report (accuracy, rmse, base rate).
std::string report_csv(const EvalReport& r);

}  // namespace moodpipe
