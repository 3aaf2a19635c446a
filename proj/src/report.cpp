#include "musener/report.hpp"

#include <cstdio>
#include <sstream>

namespace musener {

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

namespace {

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string fixed(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

nlohmann::ordered_json scores_json(const TypeScores& s) {
  nlohmann::ordered_json j;
  j["tp"] = s.tp;
  j["fp"] = s.fp;
  j["fn"] = s.fn;
  j["precision"] = s.precision();
  j["recall"] = s.recall();
  j["f1"] = s.f1();
  return j;
}

}  // namespace

std::string format_eval_table(const EvalReport& report) {
  std::ostringstream out;
  out << pad_right("Type", 8) << pad_left("TP", 7) << pad_left("FP", 7) << pad_left("FN", 7)
      << pad_left("P", 9) << pad_left("R", 9) << pad_left("F1", 9) << '\n';
  auto row = [&](const std::string& name, const TypeScores& s) {
    out << pad_right(name, 8) << pad_left(std::to_string(s.tp), 7)
        << pad_left(std::to_string(s.fp), 7) << pad_left(std::to_string(s.fn), 7)
        << pad_left(percent(s.precision()), 9) << pad_left(percent(s.recall()), 9)
        << pad_left(percent(s.f1()), 9) << '\n';
  };
  row("C", report.contributor);
  row("MW", report.work);
  row("Overall", report.overall());
  return out.str();
}

nlohmann::ordered_json eval_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["C"] = scores_json(report.contributor);
  j["MW"] = scores_json(report.work);
  j["overall"] = scores_json(report.overall());
  return j;
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << pad_left("t", 6) << pad_left("w", 6) << pad_left("c", 6) << "  |"
      << pad_left("C P", 9) << pad_left("C R", 9) << pad_left("C F1", 9) << "  |"
      << pad_left("MW P", 9) << pad_left("MW R", 9) << pad_left("MW F1", 9) << '\n';
  for (const auto& r : rows) {
    out << pad_left(std::to_string(r.t), 6) << pad_left(fixed(r.w, 2), 6)
        << pad_left(fixed(r.c, 2), 6) << "  |";
    for (EntityType type : kAllEntityTypes) {
      const auto& s = r.report.of(type);
      out << pad_left(percent(s.precision()), 9) << pad_left(percent(s.recall()), 9)
          << pad_left(percent(s.f1()), 9);
      if (type == EntityType::Contributor) out << "  |";
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["w"] = r.w;
    j["c"] = r.c;
    j["C"] = scores_json(r.report.contributor);
    j["MW"] = scores_json(r.report.work);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string format_stats_table(const std::vector<std::pair<std::string, CorpusStats>>& columns) {
  constexpr std::size_t kLabel = 14;
  constexpr std::size_t kCol = 20;
  std::ostringstream out;
  out << pad_right("", kLabel);
  for (const auto& [name, s] : columns) out << pad_left(name, kCol);
  out << '\n';
  auto row = [&](const std::string& label, auto count, auto share) {
    out << pad_right(label, kLabel);
    for (const auto& [name, s] : columns)
      out << pad_left(std::to_string(count(s)) + " (" + percent(share(s)) + "%)", kCol);
    out << '\n';
  };
  row("Contributor", [](const CorpusStats& s) { return s.contributor_tokens; },
      [](const CorpusStats& s) { return s.contributor_share(); });
  row("Musical Work", [](const CorpusStats& s) { return s.work_tokens; },
      [](const CorpusStats& s) { return s.work_share(); });
  out << pad_right("Total tokens", kLabel);
  for (const auto& [name, s] : columns) out << pad_left(std::to_string(s.total_tokens), kCol);
  out << '\n';
  return out.str();
}

nlohmann::ordered_json stats_json(const std::vector<std::pair<std::string, CorpusStats>>& columns) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, s] : columns) {
    nlohmann::ordered_json c;
    c["tweets"] = s.tweets;
    c["total_tokens"] = s.total_tokens;
    c["contributor_tokens"] = s.contributor_tokens;
    c["contributor_share"] = s.contributor_share();
    c["work_tokens"] = s.work_tokens;
    c["work_share"] = s.work_share();
    j[name] = std::move(c);
  }
  return j;
}

std::string format_wilcoxon(const WilcoxonResult& r) {
  std::ostringstream out;
  out << "W = " << fixed(r.statistic, 2) << '\n'
      << "method = " << (r.exact ? "exact" : "normal") << '\n'
      << "p(less) = " << fixed(r.p_less, 4) << '\n'
      << "p(greater) = " << fixed(r.p_greater, 4) << '\n'
      << "p(two-sided) = " << fixed(r.p_two_sided, 4) << '\n';
  return out.str();
}

nlohmann::ordered_json wilcoxon_json(const WilcoxonResult& r) {
  nlohmann::ordered_json j;
  j["W"] = r.statistic;
  j["method"] = r.exact ? "exact" : "normal";
  j["p_less"] = r.p_less;
  j["p_greater"] = r.p_greater;
  j["p_two_sided"] = r.p_two_sided;
  return j;
}

}  // namespace musener
