#include "musener/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "musener/corpus.hpp"
#include "musener/error.hpp"
#include "musener/features.hpp"
#include "musener/matcher.hpp"
#include "musener/pipeline.hpp"
#include "musener/report.hpp"
#include "musener/tagger.hpp"
#include "musener/text.hpp"

#ifndef MUSENER_VERSION
#define MUSENER_VERSION "0.0.0"
#endif
#ifndef MUSENER_DEFAULT_GAZETTEER_DIR
#define MUSENER_DEFAULT_GAZETTEER_DIR "data/gazetteers"
#endif

namespace musener::cli {

namespace {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 initialisation failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) {
    auto t = trim(item);
    if (t.empty()) throw CLI::ValidationError(flag, "empty list element");
    try {
      if constexpr (std::is_same_v<T, std::int64_t>) {
        std::size_t used = 0;
        out.push_back(std::stoll(std::string(t), &used));
        if (used != t.size()) throw std::invalid_argument("trailing characters");
      } else {
        out.push_back(parse_double(t));
      }
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "not a number: '" + std::string(t) + "'");
    }
  }
  return out;
}

// Everything a subcommand needs to report in its manifest.
struct Context {
  struct Flag {
    std::string command;
    std::string name;
    std::function<std::string()> value;
  };
  std::vector<Flag> flags;
  std::vector<std::string> inputs;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  template <typename T>
  CLI::Option* flag(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    auto* opt = app->add_option(name, var, help);
    flags.push_back({app->get_name(), opt->get_name(), [&var] {
      std::ostringstream s;
      if constexpr (std::is_same_v<T, bool>)
        s << (var ? "true" : "false");
      else
        s << var;
      return s.str();
    }});
    return opt;
  }

  CLI::Option* toggle(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
    auto* opt = app->add_flag(name, var, help);
    flags.push_back({app->get_name(), opt->get_name(),
                     [&var] { return std::string(var ? "true" : "false"); }});
    return opt;
  }

  const std::string& input(const std::string& path) {
    inputs.push_back(path);
    return path;
  }
};

std::string resolve_gazetteer_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(std::string(kGazetteerEnv).c_str()); env && *env) return env;
  return MUSENER_DEFAULT_GAZETTEER_DIR;
}

GazetteerSet load_gazetteers(Context& ctx, const std::string& dir) {
  GazetteerSet set;
  for (auto name : kGazetteerNames) {
    std::string path = dir + "/" + std::string(name) + ".txt";
    set.add(load_gazetteer(name, ctx.input(path)));
  }
  return set;
}

void write_json(std::ostream& out, const nlohmann::ordered_json& j) { out << j.dump(2) << '\n'; }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recognize Contributor and Musical Work entities in short informal messages.",
               "musener"};
  app.set_version_flag("--version", std::string("musener ") + MUSENER_VERSION);
  app.require_subcommand(1);

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  std::string manifest_path;
  bool no_timing = false;
  app.add_option("--manifest", manifest_path, "Write a JSON run manifest to this path");
  app.add_flag("--no-timing", no_timing, "Omit the wall-clock duration from the manifest");

  std::function<void()> action;
  std::string command;

  // tokenize
  std::string tok_in, tok_out;
  bool tok_pos = false;
  {
    auto* sub = app.add_subcommand("tokenize", "Tokenize JSON-lines messages into an unlabeled IOB corpus");
    ctx.flag(sub, "--in", tok_in, "Messages, one JSON object per line (ts, text, optional id)")->required();
    ctx.flag(sub, "--out", tok_out, "Output IOB corpus")->required();
    ctx.toggle(sub, "--pos", tok_pos, "Fill POS/chunk columns with the heuristic tagger instead of UNK");
    sub->callback([&] {
      command = "tokenize";
      action = [&] {
        auto messages = load_messages_jsonl(ctx.input(tok_in));
        Corpus corpus;
        for (std::size_t i = 0; i < messages.size(); ++i) {
          const auto& m = messages[i];
          std::string id = m.id.empty() ? "m" + std::to_string(i + 1) : m.id;
          auto tweet = make_tweet(id, m.timestamp, m.text);
          if (tok_pos) {
            auto tags = resolve_pos_chunk(tweet);
            for (std::size_t k = 0; k < tweet.tokens.size(); ++k) {
              tweet.tokens[k].pos = tags[k].first;
              tweet.tokens[k].chunk = tags[k].second;
            }
          }
          corpus.push_back(std::move(tweet));
        }
        save_corpus(tok_out, corpus);
        out << "tweets: " << corpus.size() << '\n';
      };
    });
  }

  // split
  std::string split_corpus_path, split_dir, split_ratios = "0.8,0.1,0.1";
  std::uint64_t split_seed = 42;
  {
    auto* sub = app.add_subcommand("split", "Seeded 80/10/10 split into train.iob, testA.iob, testB.iob");
    ctx.flag(sub, "--corpus", split_corpus_path, "Input IOB corpus")->required();
    ctx.flag(sub, "--out-dir", split_dir, "Directory for the three output files")->required();
    ctx.flag(sub, "--seed", split_seed, "Shuffle seed");
    ctx.flag(sub, "--ratios", split_ratios, "train,testA,testB ratios");
    sub->callback([&] {
      command = "split";
      auto r = parse_list<double>(split_ratios, "--ratios");
      if (r.size() != 3) throw CLI::ValidationError("--ratios", "expected three values");
      action = [&, r] {
        auto corpus = load_corpus(ctx.input(split_corpus_path));
        auto parts = split_corpus(corpus, split_seed, {r[0], r[1], r[2]});
        std::filesystem::path dir(split_dir);
        if (!std::filesystem::is_directory(dir))
          throw DataError("output directory '" + split_dir + "' does not exist");
        save_corpus((dir / "train.iob").string(), parts.train);
        save_corpus((dir / "testA.iob").string(), parts.test_a);
        save_corpus((dir / "testB.iob").string(), parts.test_b);
        out << "train: " << parts.train.size() << "\ntestA: " << parts.test_a.size()
            << "\ntestB: " << parts.test_b.size() << '\n';
      };
    });
  }

  // schedule-build
  std::string sched_in, sched_out;
  {
    auto* sub = app.add_subcommand("schedule-build", "Parse bot 'Now Playing' messages into a schedule");
    ctx.flag(sub, "--in", sched_in, "Bot messages, one JSON object per line (ts, text)")->required();
    ctx.flag(sub, "--out", sched_out, "Parsed schedule (JSON lines)")->required();
    sub->callback([&] {
      command = "schedule-build";
      action = [&] {
        auto messages = load_messages_jsonl(ctx.input(sched_in));
        auto built = build_schedule(messages);
        std::ofstream f(sched_out);
        if (!f) throw DataError("cannot write schedule file '" + sched_out + "'");
        write_schedule_jsonl(f, built.schedule);
        out << "entries: " << built.schedule.entries.size() << "\nskipped: " << built.skipped << '\n';
      };
    });
  }

  // stats
  std::vector<std::string> stats_paths;
  bool stats_json_flag = false;
  {
    auto* sub = app.add_subcommand("stats", "Entity token counts and shares per corpus");
    sub->add_option("--corpus", stats_paths, "Labeled IOB corpus (repeatable)")->required();
    ctx.flags.push_back({"stats", "--corpus", [&] {
                           std::string s;
                           for (const auto& p : stats_paths) s += (s.empty() ? "" : ",") + p;
                           return s;
                         }});
    ctx.toggle(sub, "--json", stats_json_flag, "Machine-readable output");
    sub->callback([&] {
      command = "stats";
      action = [&] {
        std::vector<std::pair<std::string, CorpusStats>> columns;
        for (const auto& p : stats_paths)
          columns.emplace_back(std::filesystem::path(p).stem().string(),
                               corpus_stats(load_corpus(ctx.input(p))));
        if (stats_json_flag)
          write_json(out, stats_json(columns));
        else
          out << format_stats_table(columns);
      };
    });
  }

  // train
  std::string train_path, train_model, train_gaz, train_decoder = "viterbi";
  TrainConfig train_cfg;
  bool no_shuffle = false, no_average = false;
  {
    auto* sub = app.add_subcommand("train", "Train the averaged perceptron tagger");
    ctx.flag(sub, "--train", train_path, "Labeled IOB training corpus")->required();
    ctx.flag(sub, "--model", train_model, "Output model file")->required();
    ctx.flag(sub, "--gazetteers", train_gaz, "Gazetteer directory");
    ctx.flag(sub, "--epochs", train_cfg.epochs, "Training epochs (>= 1)");
    ctx.flag(sub, "--seed", train_cfg.seed, "Shuffle seed");
    ctx.flag(sub, "--decoder", train_decoder, "token | viterbi")
        ->check(CLI::IsMember({"token", "viterbi"}));
    ctx.toggle(sub, "--no-shuffle", no_shuffle, "Keep corpus order in every epoch");
    ctx.toggle(sub, "--no-average", no_average, "Use the final instead of the averaged weights");
    sub->callback([&] {
      command = "train";
      action = [&] {
        train_cfg.decoder = parse_decoder(train_decoder);
        train_cfg.shuffle = !no_shuffle;
        train_cfg.average = !no_average;
        auto corpus = load_corpus(ctx.input(train_path));
        auto gaz = load_gazetteers(ctx, resolve_gazetteer_dir(train_gaz));
        auto model = train(corpus, gaz, train_cfg);
        save_model(train_model, model);
        out << "tweets: " << corpus.size() << "\nfeatures: " << model.emissions().size() << '\n';
      };
    });
  }

  // tag
  std::string tag_model, tag_in, tag_out, tag_gaz, tag_decoder = "viterbi";
  unsigned tag_jobs = 1;
  {
    auto* sub = app.add_subcommand("tag", "Label a corpus with a trained model");
    ctx.flag(sub, "--model", tag_model, "Model file")->required();
    ctx.flag(sub, "--in", tag_in, "IOB corpus to tag")->required();
    ctx.flag(sub, "--out", tag_out, "Output IOB corpus")->required();
    ctx.flag(sub, "--gazetteers", tag_gaz, "Gazetteer directory");
    ctx.flag(sub, "--decoder", tag_decoder, "token | viterbi")->check(CLI::IsMember({"token", "viterbi"}));
    ctx.flag(sub, "--jobs", tag_jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([&] {
      command = "tag";
      action = [&] {
        auto model = load_model(ctx.input(tag_model));
        auto corpus = load_corpus(ctx.input(tag_in));
        auto gaz = load_gazetteers(ctx, resolve_gazetteer_dir(tag_gaz));
        save_corpus(tag_out, tag_corpus(model, corpus, gaz, parse_decoder(tag_decoder), tag_jobs));
        out << "tweets: " << corpus.size() << '\n';
      };
    });
  }

  // match
  std::string match_sched, match_in, match_out, match_diag, match_stop;
  MatchConfig match_cfg;
  unsigned match_jobs = 1;
  {
    auto* sub = app.add_subcommand("match", "Label a corpus from the radio schedule");
    ctx.flag(sub, "--schedule", match_sched, "Bot messages or schedule (JSON lines)")->required();
    ctx.flag(sub, "--in", match_in, "IOB corpus with timestamps")->required();
    ctx.flag(sub, "--out", match_out, "Output IOB corpus")->required();
    ctx.flag(sub, "--t", match_cfg.t, "Time window in seconds");
    ctx.flag(sub, "--w", match_cfg.w, "Musical Work string threshold");
    ctx.flag(sub, "--c", match_cfg.c, "Contributor string threshold");
    ctx.flag(sub, "--alpha", match_cfg.alpha, "Weight of the string score in the final score");
    ctx.flag(sub, "--stopwords", match_stop, "Stop-word file (default: built-in list)");
    ctx.flag(sub, "--diagnostics", match_diag, "Write per-tweet candidate diagnostics (JSON lines)");
    ctx.flag(sub, "--jobs", match_jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([&] {
      command = "match";
      action = [&] {
        if (!match_stop.empty()) match_cfg.stopwords = load_stopwords(ctx.input(match_stop));
        match_cfg.validate();
        auto built = build_schedule(load_messages_jsonl(ctx.input(match_sched)));
        auto corpus = load_corpus(ctx.input(match_in));
        std::vector<MatchResult> results;
        auto labeled = match_corpus(corpus, built.schedule, match_cfg, &results, match_jobs);
        save_corpus(match_out, labeled);
        if (!match_diag.empty()) {
          std::ofstream f(match_diag);
          if (!f) throw DataError("cannot write diagnostics file '" + match_diag + "'");
          for (std::size_t i = 0; i < corpus.size(); ++i) write_match_diagnostics(f, corpus[i], results[i]);
        }
        out << "tweets: " << corpus.size() << "\nschedule entries: " << built.schedule.entries.size()
            << "\nskipped messages: " << built.skipped << '\n';
      };
    });
  }

  // reconcile
  std::string rec_model, rec_sched, rec_out, rec_gran = "type";
  {
    auto* sub = app.add_subcommand("reconcile", "Merge model and schedule predictions, model first");
    ctx.flag(sub, "--model-pred", rec_model, "IOB corpus labeled by the tagger")->required();
    ctx.flag(sub, "--schedule-pred", rec_sched, "IOB corpus labeled by the matcher")->required();
    ctx.flag(sub, "--out", rec_out, "Output IOB corpus")->required();
    ctx.flag(sub, "--granularity", rec_gran, "type | tweet")->check(CLI::IsMember({"type", "tweet"}));
    sub->callback([&] {
      command = "reconcile";
      action = [&] {
        auto model = load_corpus(ctx.input(rec_model));
        auto sched = load_corpus(ctx.input(rec_sched));
        save_corpus(rec_out, reconcile_corpus(model, sched, parse_granularity(rec_gran)));
        out << "tweets: " << model.size() << '\n';
      };
    });
  }

  // eval
  std::string eval_gold, eval_pred;
  bool eval_json_flag = false;
  {
    auto* sub = app.add_subcommand("eval", "Entity-level precision, recall and F1 (exact match)");
    ctx.flag(sub, "--gold", eval_gold, "Gold IOB corpus")->required();
    ctx.flag(sub, "--pred", eval_pred, "Predicted IOB corpus")->required();
    ctx.toggle(sub, "--json", eval_json_flag, "Machine-readable output");
    sub->callback([&] {
      command = "eval";
      action = [&] {
        auto report = evaluate(load_corpus(ctx.input(eval_gold)), load_corpus(ctx.input(eval_pred)));
        if (eval_json_flag)
          write_json(out, eval_json(report));
        else
          out << format_eval_table(report);
      };
    });
  }

  // sweep
  std::string sw_sched, sw_gold, sw_t = "800,1000,1200", sw_w = "0.33,0.5", sw_c = "0.33,0.5", sw_stop;
  double sw_alpha = 0.7;
  bool sw_json = false;
  unsigned sw_jobs = 1;
  {
    auto* sub = app.add_subcommand("sweep", "Evaluate schedule matching over a (t, w, c) grid");
    ctx.flag(sub, "--schedule", sw_sched, "Bot messages or schedule (JSON lines)")->required();
    ctx.flag(sub, "--gold", sw_gold, "Gold IOB corpus with timestamps")->required();
    ctx.flag(sub, "--t", sw_t, "Comma-separated time windows (seconds)");
    ctx.flag(sub, "--w", sw_w, "Comma-separated Musical Work thresholds");
    ctx.flag(sub, "--c", sw_c, "Comma-separated Contributor thresholds");
    ctx.flag(sub, "--alpha", sw_alpha, "Weight of the string score in the final score");
    ctx.flag(sub, "--stopwords", sw_stop, "Stop-word file (default: built-in list)");
    ctx.toggle(sub, "--json", sw_json, "Machine-readable output");
    ctx.flag(sub, "--jobs", sw_jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([&] {
      command = "sweep";
      SweepGrid grid{parse_list<std::int64_t>(sw_t, "--t"), parse_list<double>(sw_w, "--w"),
                     parse_list<double>(sw_c, "--c")};
      action = [&, grid] {
        StopWords stop = sw_stop.empty() ? default_stopwords() : load_stopwords(ctx.input(sw_stop));
        auto built = build_schedule(load_messages_jsonl(ctx.input(sw_sched)));
        auto gold = load_corpus(ctx.input(sw_gold));
        auto rows = sweep(gold, built.schedule, grid, sw_alpha, stop, sw_jobs);
        if (sw_json)
          write_json(out, sweep_json(rows));
        else
          out << format_sweep_table(rows);
      };
    });
  }

  // wilcoxon
  std::string wx_a, wx_b, wx_method = "auto";
  bool wx_json = false;
  {
    auto* sub = app.add_subcommand("wilcoxon", "Wilcoxon rank-sum test on two samples");
    ctx.flag(sub, "--a", wx_a, "Comma-separated sample A")->required();
    ctx.flag(sub, "--b", wx_b, "Comma-separated sample B")->required();
    ctx.flag(sub, "--method", wx_method, "auto | exact | normal")
        ->check(CLI::IsMember({"auto", "exact", "normal"}));
    ctx.toggle(sub, "--json", wx_json, "Machine-readable output");
    sub->callback([&] {
      command = "wilcoxon";
      auto a = parse_list<double>(wx_a, "--a");
      auto b = parse_list<double>(wx_b, "--b");
      action = [&, a, b] {
        auto method = wx_method == "exact"    ? WilcoxonMethod::Exact
                      : wx_method == "normal" ? WilcoxonMethod::Normal
                                              : WilcoxonMethod::Auto;
        auto res = wilcoxon_rank_sum(a, b, method);
        if (wx_json)
          write_json(out, wilcoxon_json(res));
        else
          out << format_wilcoxon(res);
      };
    });
  }

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  auto started = std::chrono::steady_clock::now();
  try {
    action();
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!manifest_path.empty()) {
    try {
      nlohmann::ordered_json m;
      m["command"] = command;
      nlohmann::ordered_json flags = nlohmann::ordered_json::object();
      for (const auto& f : ctx.flags)
        if (f.command == command) flags[f.name] = f.value();
      m["flags"] = std::move(flags);
      nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
      for (const auto& p : ctx.inputs) inputs.push_back({{"path", p}, {"sha256", sha256_file(p)}});
      m["inputs"] = std::move(inputs);
      m["version"] = MUSENER_VERSION;
      m["duration_seconds"] = no_timing ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(elapsed);
      std::ofstream f(manifest_path);
      if (!f) throw DataError("cannot write manifest '" + manifest_path + "'");
      f << m.dump(2) << '\n';
    } catch (const DataError& e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitOk;
}

}  // namespace musener::cli
