#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "musener/corpus.hpp"
#include "musener/pipeline.hpp"

namespace musener {

// Plain-text tables print percentages with two decimals; JSON carries the
// same quantities as unrounded fractions plus the raw counts.

std::string format_eval_table(const EvalReport& report);
nlohmann::ordered_json eval_json(const EvalReport& report);

std::string format_sweep_table(const std::vector<SweepRow>& rows);
nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows);

// One column per named corpus (e.g. Training / TestA / TestB).
std::string format_stats_table(const std::vector<std::pair<std::string, CorpusStats>>& columns);
nlohmann::ordered_json stats_json(const std::vector<std::pair<std::string, CorpusStats>>& columns);

std::string format_wilcoxon(const WilcoxonResult& result);
nlohmann::ordered_json wilcoxon_json(const WilcoxonResult& result);

// 100 * fraction with two decimals, e.g. 0.6667 -> "66.67".
std::string percent(double fraction);

}  // namespace musener
