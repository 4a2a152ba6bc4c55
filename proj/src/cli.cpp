#include "schubert/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "schubert/anthology_harvester.hpp"
#include "schubert/checkpoint.hpp"
#include "schubert/chunking.hpp"
#include "schubert/citation_resolver.hpp"
#include "schubert/corpus_store.hpp"
#include "schubert/dataset_builder.hpp"
#include "schubert/embedding_io.hpp"
#include "schubert/error.hpp"
#include "schubert/text_util.hpp"
#include "schubert/trainer.hpp"

namespace schubert::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string log_level = "info";
  unsigned workers = 1;
};

struct Document {
  std::string doc_id;
  std::string text;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageFailure("cannot write " + path.string());
  return out;
}

/// Documents from a JSON-lines file of {"doc_id", "text"} objects. In
/// abstract-only mode the model input is title + abstract instead of text.
std::vector<Document> read_documents(const fs::path& path, dataset::InputMode mode) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::vector<Document> docs;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("doc_id") || !j["doc_id"].is_string()) {
      throw InvalidInput(where + ": expected an object with a string doc_id");
    }
    Document d;
    d.doc_id = j["doc_id"].get<std::string>();
    if (mode == dataset::InputMode::full_text) {
      if (!j.contains("text") || !j["text"].is_string()) {
        throw InvalidInput(where + ": missing string field `text`");
      }
      d.text = j["text"].get<std::string>();
    } else {
      if (!j.contains("abstract") || !j["abstract"].is_string()) {
        throw InvalidInput(where + ": abstract_only mode needs a string field `abstract`");
      }
      if (j.contains("title") && j["title"].is_string()) d.text = j["title"].get<std::string>() + "\n";
      d.text += j["abstract"].get<std::string>();
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void print_metrics(std::ostream& out, const model::Metrics& m, bool as_json, const std::string& split) {
  if (as_json) {
    ordered_json j;
    j["split"] = split;
    j["n"] = m.n;
    j["mse"] = m.mse;
    j["mae"] = m.mae;
    j["r2"] = std::isfinite(m.r2) ? ordered_json(m.r2) : ordered_json();
    out << j.dump() << '\n';
  } else {
    out << "split=" << split << " n=" << m.n << " mse=" << m.mse << " mae=" << m.mae
        << " r2=" << m.r2 << '\n';
  }
}

std::vector<chunking::ChunkEmbeddings> select_items(
    const std::vector<chunking::ChunkEmbeddings>& all, const std::vector<std::string>& ids,
    const char* split_name) {
  std::unordered_map<std::string_view, const chunking::ChunkEmbeddings*> by_id;
  for (const auto& item : all) by_id.emplace(item.doc_id, &item);
  std::vector<chunking::ChunkEmbeddings> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw InvalidInput(std::string(split_name) + " doc_id " + id + " is not in the embedding file");
    }
    out.push_back(*it->second);
  }
  return out;
}

void configure_logging(const std::string& level) {
  static const auto logger = [] {
    auto l = spdlog::stderr_logger_st("schubert");
    l->set_pattern("[%l] %v");
    return l;
  }();
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Citation-count dataset construction and chunked-embedding GRU regression"};
  app.name("schubert");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--log-level", global.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();
  app.add_option("--workers", global.workers, "Threads for ingest and embed-pseudo")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build a corpus store from JSON-lines dumps");
  std::vector<std::string> dump_files;
  std::string store_out;
  ingest->add_option("dumps", dump_files, "Dump files (plain or .gz)")->required();
  ingest->add_option("--output,-o", store_out, "Store file to create")->required();

  // resolve
  auto* resolve = app.add_subcommand("resolve", "Resolve a title+authors query to year-grouped citations");
  std::string store_path;
  std::string title;
  std::vector<std::string> authors;
  resolve->add_option("--store", store_path)->required();
  resolve->add_option("--title", title)->required();
  resolve->add_option("--author", authors, "Repeatable; tried in order")->required();

  // label
  auto* label = app.add_subcommand("label", "Label a JSON-lines query file with citation scores");
  std::string queries_path;
  std::string labels_out;
  int max_years = 3;
  int snapshot_year = 0;
  label->add_option("--store", store_path)->required();
  label->add_option("--queries", queries_path)->required();
  label->add_option("--output,-o", labels_out)->required();
  label->add_option("--max-years", max_years)->capture_default_str()->check(CLI::PositiveNumber);
  label->add_option("--snapshot-year", snapshot_year, "Year the dump was taken")->required();

  // harvest
  auto* harvest = app.add_subcommand("harvest", "Extract paper links from saved anthology pages");
  std::string index_html;
  std::string pages_dir;
  std::string venue_page;
  std::string venue_name;
  int venue_year = 0;
  std::string manifest_out;
  auto* index_opt = harvest->add_option("--index", index_html, "Saved anthology index page");
  harvest->add_option("--pages-dir", pages_dir,
                      "Directory of saved venue pages named <event-slug>.html")
      ->needs(index_opt);
  auto* page_opt = harvest->add_option("--venue-page", venue_page, "A single saved venue page")
                       ->excludes(index_opt);
  harvest->add_option("--venue", venue_name)->needs(page_opt);
  harvest->add_option("--year", venue_year)->needs(page_opt);
  harvest->add_option("--output,-o", manifest_out)->required();

  // chunk / embed-pseudo / stats share document options
  std::string docs_path;
  std::size_t chunk_size = chunking::kDefaultChunkSize;
  std::size_t overlap = chunking::kDefaultOverlap;
  std::size_t dim = chunking::kDefaultDim;
  std::string mode_text = "full_text";
  std::string out_path;
  const auto add_doc_options = [&](CLI::App* sub) {
    sub->add_option("--input,-i", docs_path, "JSON-lines {doc_id, text[, title, abstract]}")->required();
    sub->add_option("--chunk-size", chunk_size)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--overlap", overlap)->capture_default_str();
    sub->add_option("--mode", mode_text)
        ->check(CLI::IsMember({"full_text", "abstract_only"}))
        ->capture_default_str();
  };

  auto* chunk_cmd = app.add_subcommand("chunk", "List token chunks per document");
  add_doc_options(chunk_cmd);
  chunk_cmd->add_option("--output,-o", out_path)->required();

  auto* embed = app.add_subcommand("embed-pseudo", "Write deterministic pseudo-embeddings");
  add_doc_options(embed);
  embed->add_option("--dim", dim)->capture_default_str()->check(CLI::PositiveNumber);
  embed->add_option("--output,-o", out_path)->required();

  auto* stats = app.add_subcommand("stats", "Character and chunk statistics");
  add_doc_options(stats);
  std::optional<int> max_chunks;
  bool json_out = false;
  stats->add_option("--max-chunks", max_chunks, "Count only text covered by the first K chunks")
      ->check(CLI::PositiveNumber);
  stats->add_flag("--json", json_out);

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "Join labels with embeddings and split");
  std::string labels_path;
  std::string embeddings_path;
  std::string manifest_path;
  std::vector<double> ratios = {0.90, 0.05, 0.05};
  double fraction = 1.0;
  dataset_cmd->add_option("--labels", labels_path)->required();
  dataset_cmd->add_option("--embeddings", embeddings_path)->required();
  dataset_cmd->add_option("--output-embeddings", out_path, "Labeled container to write")->required();
  dataset_cmd->add_option("--manifest", manifest_path)->required();
  dataset_cmd->add_option("--ratios", ratios, "train,validation,test")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();
  dataset_cmd->add_option("--fraction", fraction)->capture_default_str();
  dataset_cmd->add_option("--max-chunks", max_chunks)->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--mode", mode_text)
      ->check(CLI::IsMember({"full_text", "abstract_only"}))
      ->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the GRU regressor");
  model::TrainConfig tc;
  std::string checkpoint_path;
  std::string best_checkpoint_path;
  std::string history_path;
  train_cmd->add_option("--data", embeddings_path, "Labeled embedding container")->required();
  train_cmd->add_option("--manifest", manifest_path, "Use its train/validation splits");
  train_cmd->add_option("--checkpoint", checkpoint_path, "Final-epoch parameters")->required();
  train_cmd->add_option("--best-checkpoint", best_checkpoint_path,
                        "Parameters with the lowest validation MAE");
  train_cmd->add_option("--history", history_path, "Per-epoch JSON-lines history");
  train_cmd->add_option("--lr", tc.learning_rate)->capture_default_str();
  train_cmd->add_option("--epochs", tc.epochs)->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", tc.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", tc.dropout_p)->capture_default_str()->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--hidden", tc.hidden)->capture_default_str()->check(CLI::PositiveNumber);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint (MSE, MAE, R^2)");
  std::string split_name = "test";
  eval_cmd->add_option("--data", embeddings_path)->required();
  eval_cmd->add_option("--checkpoint", checkpoint_path)->required();
  eval_cmd->add_option("--manifest", manifest_path);
  eval_cmd->add_option("--split", split_name)
      ->check(CLI::IsMember({"train", "validation", "test"}))
      ->capture_default_str();
  eval_cmd->add_flag("--json", json_out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  configure_logging(global.log_level);
  auto* sub = app.get_subcommands().front();
  {
    std::string flags = sub->config_to_str(true, false);
    std::replace(flags.begin(), flags.end(), '\n', ' ');
    spdlog::info("schubert {} {} seed={} workers={} {}", kVersion, sub->get_name(), global.seed,
                 global.workers, flags);
  }

  try {
    const auto mode = dataset::parse_input_mode(mode_text);

    if (sub == ingest) {
      std::vector<fs::path> files(dump_files.begin(), dump_files.end());
      corpus::IngestOptions opts;
      opts.workers = global.workers;
      const auto report = corpus::ingest_dumps(files, store_out, opts);
      spdlog::info("ingested {} records from {} lines ({} malformed)", report.records,
                   report.lines, report.malformed);
      return kOk;
    }

    if (sub == resolve) {
      const auto store = corpus::CorpusStore::open(store_path);
      const auto found = citations::find_citations_for_article(store, {title, authors});
      ordered_json j;
      if (!found) {
        j["article_id"] = nullptr;
        j["status"] = "not_found";
      } else {
        j["article_id"] = found->first;
        j["status"] = "ok";
        ordered_json by_year = ordered_json::object();
        for (const auto& [year, ids] : found->second.by_year) by_year[std::to_string(year)] = ids;
        j["citations"] = by_year;
        j["unknown_year"] = found->second.unknown_year;
        j["dropped_missing"] = found->second.dropped_missing;
      }
      out << j.dump() << '\n';
      return kOk;
    }

    if (sub == label) {
      const auto store = corpus::CorpusStore::open(store_path);
      const auto s = citations::label_batch(store, queries_path, labels_out, max_years, snapshot_year);
      spdlog::info("labeled {} queries: {} ok, {} not_found, {} ineligible, {} missing_year",
                   s.queries, s.ok, s.not_found, s.ineligible, s.missing_year);
      return kOk;
    }

    if (sub == harvest) {
      std::vector<harvest::PaperLink> links;
      if (!venue_page.empty()) {
        if (venue_name.empty() || venue_year == 0) {
          throw InvalidInput("--venue-page needs --venue and --year");
        }
        auto r = harvest::extract_paper_links(read_file(venue_page), venue_name, venue_year);
        links = std::move(r.links);
        if (r.skipped) spdlog::warn("{} pdf lines without a usable link", r.skipped);
      } else if (!index_html.empty()) {
        const auto venues = harvest::extract_venue_links(read_file(index_html));
        if (venues.unparsed_year) spdlog::warn("{} event links without a parsable year", venues.unparsed_year);
        const fs::path dir = pages_dir.empty() ? fs::path(index_html).parent_path() : fs::path(pages_dir);
        for (const auto& v : venues.links) {
          const fs::path page = dir / (harvest::last_path_segment(v.url) + ".html");
          if (!fs::exists(page)) {
            spdlog::warn("no saved page for {} ({})", v.url, page.string());
            continue;
          }
          auto r = harvest::extract_paper_links(read_file(page), v.venue, v.year);
          links.insert(links.end(), r.links.begin(), r.links.end());
        }
      } else {
        throw InvalidInput("harvest needs --index or --venue-page");
      }
      auto f = open_output(manifest_out);
      harvest::write_manifest(f, links);
      spdlog::info("wrote {} paper links", links.size());
      return kOk;
    }

    if (sub == chunk_cmd) {
      const auto docs = read_documents(docs_path, mode);
      auto f = open_output(out_path);
      for (const auto& d : docs) {
        const auto seq = chunking::tokenize(d.text, d.doc_id);
        if (seq.tokens.empty()) {
          spdlog::warn("document {} has no tokens; skipped", d.doc_id);
          continue;
        }
        const auto chunks = chunking::chunk(seq, chunk_size, overlap);
        for (std::size_t k = 0; k < chunks.size(); ++k) {
          ordered_json j;
          j["doc_id"] = d.doc_id;
          j["chunk_index"] = k;
          j["start"] = chunks[k].start;
          j["end"] = chunks[k].end;
          f << j.dump() << '\n';
        }
      }
      return kOk;
    }

    if (sub == embed) {
      const auto docs = read_documents(docs_path, mode);
      std::vector<std::optional<chunking::ChunkEmbeddings>> items(docs.size());
      parallel_for(docs.size(), global.workers, [&](std::size_t i) {
        if (chunking::tokenize(docs[i].text).tokens.empty()) return;
        items[i] = chunking::embed_document_pseudo(docs[i].doc_id, docs[i].text, chunk_size, overlap, dim);
      });
      std::vector<chunking::ChunkEmbeddings> kept;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i]) {
          kept.push_back(std::move(*items[i]));
        } else {
          spdlog::warn("document {} has no tokens; skipped", docs[i].doc_id);
        }
      }
      chunking::write_embeddings(out_path, kept);
      spdlog::info("wrote {} embedded documents", kept.size());
      return kOk;
    }

    if (sub == stats) {
      const auto docs = read_documents(docs_path, mode);
      std::vector<dataset::ExampleSize> sizes;
      for (const auto& d : docs) {
        const auto spans = chunking::token_spans(d.text);
        if (spans.empty()) continue;
        const auto seq = chunking::tokenize(d.text, d.doc_id);
        auto chunks = chunking::chunk(seq, chunk_size, overlap);
        std::size_t chars = chunking::count_code_points(d.text);
        if (max_chunks && chunks.size() > static_cast<std::size_t>(*max_chunks)) {
          chunks.resize(static_cast<std::size_t>(*max_chunks));
          const auto covered_end = spans[chunks.back().end - 1].end;
          chars = chunking::count_code_points(std::string_view(d.text).substr(0, covered_end));
        }
        sizes.push_back({d.doc_id, chars, chunks.size()});
      }
      const auto s = dataset::corpus_stats(sizes);
      if (json_out) {
        ordered_json j;
        j["examples"] = s.examples;
        j["avg_chars"] = s.avg_chars;
        j["max_chars"] = s.max_chars;
        j["avg_chunks"] = s.avg_chunks;
        out << j.dump() << '\n';
      } else {
        out << "examples=" << s.examples << " avg_chars=" << s.avg_chars
            << " max_chars=" << s.max_chars << " avg_chunks=" << s.avg_chunks << '\n';
      }
      return kOk;
    }

    if (sub == dataset_cmd) {
      std::unordered_map<std::string, double> scores;
      {
        std::ifstream in(labels_path);
        if (!in) throw InvalidInput("cannot read " + labels_path);
        std::string line;
        while (std::getline(in, line)) {
          if (text::trim(line).empty()) continue;
          const json j = json::parse(line, nullptr, false);
          if (j.is_discarded() || !j.is_object()) throw InvalidInput(labels_path + ": malformed label line");
          if (j.value("status", "") != "ok") continue;
          std::string key;
          if (j.contains("doc_id") && j["doc_id"].is_string()) {
            key = j["doc_id"].get<std::string>();
          } else {
            key = j.at("article_id").get<std::string>();
          }
          if (!scores.emplace(key, j.at("score").get<double>()).second) {
            throw InvalidInput(labels_path + ": duplicate label for " + key);
          }
        }
      }
      auto items = chunking::read_embeddings(embeddings_path);
      std::vector<chunking::ChunkEmbeddings> labeled;
      std::vector<std::string> ids;
      for (auto& item : items) {
        const auto it = scores.find(item.doc_id);
        if (it == scores.end()) continue;
        item.label = it->second;
        labeled.push_back(max_chunks ? dataset::cap_chunks(item, *max_chunks) : std::move(item));
        ids.push_back(labeled.back().doc_id);
      }
      if (labeled.empty()) throw InvalidInput("no embedding doc_id matches an ok label");
      auto manifest = dataset::split(ids, {ratios[0], ratios[1], ratios[2]}, global.seed);
      if (fraction != 1.0) manifest = dataset::subsample(manifest, fraction, global.seed);
      manifest.max_chunks = max_chunks;
      manifest.mode = mode;

      std::unordered_map<std::string_view, bool> keep;
      for (const auto* split : {&manifest.train, &manifest.validation, &manifest.test}) {
        for (const auto& id : *split) keep[id] = true;
      }
      std::erase_if(labeled, [&](const chunking::ChunkEmbeddings& e) { return !keep.contains(e.doc_id); });
      chunking::write_embeddings(out_path, labeled);
      dataset::write_manifest(manifest_path, manifest);
      spdlog::info("dataset: {} train / {} validation / {} test", manifest.train.size(),
                   manifest.validation.size(), manifest.test.size());
      return kOk;
    }

    if (sub == train_cmd) {
      tc.seed = global.seed;
      const auto items = chunking::read_embeddings(embeddings_path);
      std::vector<chunking::ChunkEmbeddings> train_set;
      std::vector<chunking::ChunkEmbeddings> val_set;
      if (!manifest_path.empty()) {
        const auto manifest = dataset::read_manifest(manifest_path);
        train_set = select_items(items, manifest.train, "train");
        val_set = select_items(items, manifest.validation, "validation");
      } else {
        train_set = items;
      }
      const auto result = model::train(train_set, val_set, tc);
      model::write_checkpoint(checkpoint_path, result.final_params);
      if (!best_checkpoint_path.empty()) {
        model::write_checkpoint(best_checkpoint_path,
                                result.best_params ? *result.best_params : result.final_params);
      }
      if (!history_path.empty()) {
        auto f = open_output(history_path);
        model::write_history(f, result.history);
      }
      if (!result.history.empty()) {
        spdlog::info("final train_mae={:.6f}", result.history.back().train_mae);
      }
      return kOk;
    }

    if (sub == eval_cmd) {
      const auto params = model::read_checkpoint(checkpoint_path);
      auto items = chunking::read_embeddings(embeddings_path);
      if (!manifest_path.empty()) {
        const auto manifest = dataset::read_manifest(manifest_path);
        const auto& ids = split_name == "train"        ? manifest.train
                          : split_name == "validation" ? manifest.validation
                                                       : manifest.test;
        items = select_items(items, ids, split_name.c_str());
      } else {
        split_name = "all";
      }
      try {
        print_metrics(out, model::evaluate(params, items), json_out, split_name);
      } catch (const model::DegenerateLabels& e) {
        spdlog::warn("{}", e.what());
        print_metrics(out, e.metrics(), json_out, split_name);
      }
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace schubert::cli
