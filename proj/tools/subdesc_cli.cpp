//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subdesc/brics.hpp"
#include "subdesc/chem/smiles_parser.hpp"
#include "subdesc/chem/smiles_writer.hpp"
#include "subdesc/corpus.hpp"
#include "subdesc/descriptors.hpp"
#include "subdesc/graphprep.hpp"
#include "subdesc/logp_table.hpp"
#include "subdesc/provider.hpp"
#include "subdesc/random.hpp"
#include "subdesc/refnet/checkpoint.hpp"
#include "subdesc/refnet/trainer.hpp"
#include "subdesc/tokenizer.hpp"

namespace {

using namespace subdesc;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRejects = 2;

constexpr std::size_t kChunk = 2048;

// ---------------------------------------------------------------- options

struct Options {
  std::string input;
  std::string format = "auto";
  std::string output;
  std::string caps;
  std::string provider;
  std::string rejects;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("-i,--input", o.input, "Input corpus (.smi or .csv)")->required();
  sub->add_option("--format", o.format, "Input format")
      ->check(CLI::IsMember({"auto", "smi", "csv"}));
  sub->add_option("-o,--output", o.output, "Output file (default: stdout)");
  sub->add_option("--caps", o.caps, "Vocabulary manifest JSON with per-slot caps");
  sub->add_option("--provider", o.provider,
                  "CSV of fragment_smiles,logp,uff_energy overriding built-in estimates");
  sub->add_option("--rejects", o.rejects,
                  "Rejects JSONL (default: <output>.rejects.jsonl, or stderr)");
  o.seed_opt = sub->add_option("--seed", o.seed, "Random seed (env SUBDESC_SEED, default 0)");
  o.threads_opt = sub->add_option("--threads", o.threads,
                                  "Worker threads (env SUBDESC_THREADS, default: all cores)");
}

template <class T>
T env_or(const char* name, T fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  const std::string_view s(raw);
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw Error(std::string(name) + " must be a non-negative integer, got '" + raw + "'");
  return v;
}

/// Command-line flags win over environment variables, which win over
/// built-in defaults.
void resolve_env(Options& o) {
  if (!o.seed_opt->count()) o.seed = env_or<std::uint64_t>("SUBDESC_SEED", 0);
  if (!o.threads_opt->count()) o.threads = env_or<unsigned>("SUBDESC_THREADS", 0);
  if (o.threads == 0) o.threads = std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- vocab manifest

Json specials_json() {
  return Json{{"BOS", tokenizer::kBos},    {"PAD", tokenizer::kPad},
              {"EOS", tokenizer::kEos},    {"MASK", tokenizer::kMask},
              {"!", tokenizer::kSepSub},   {"$", tokenizer::kSepExtra}};
}

Json manifest_json(const tokenizer::Vocab& v) {
  Json caps = Json::array();
  for (int c : v.caps().max) caps.push_back(c);
  Json slots = Json::array();
  for (auto name : descriptors::kSlotNames) slots.push_back(std::string(name));
  return Json{{"caps", caps},
              {"size", v.size()},
              {"specials", specials_json()},
              {"slots", slots},
              {"logp_table_version", descriptors::kLogPTableVersion}};
}

descriptors::CapTable load_caps(const std::string& path) {
  if (path.empty()) return descriptors::CapTable::defaults();
  std::ifstream in(path);
  if (!in) throw Error("cannot open caps file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("caps") || !j["caps"].is_array() ||
      j["caps"].size() != descriptors::kDescriptorSize)
    throw Error(path + ": 'caps' must be an array of 23 integers");
  descriptors::CapTable caps;
  for (std::size_t k = 0; k < descriptors::kDescriptorSize; ++k) {
    if (!j["caps"][k].is_number_integer()) throw Error(path + ": caps must be integers");
    caps.max[k] = j["caps"][k].get<int>();
  }
  caps.validate_for_descriptors();
  if (j.contains("size") && j["size"].get<long>() != tokenizer::Vocab(caps).size())
    throw Error(path + ": 'size' does not match the caps");
  return caps;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- streaming

/// Runs body(i) for i in [0, n) on up to `threads` threads.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct RunStats {
  std::size_t records = 0;
  std::size_t rejects = 0;
  std::size_t lines = 0;
};

/// Shared state of one subcommand invocation.
class Pipeline {
 public:
  explicit Pipeline(Options& o) : opts_(o) {
    resolve_env(opts_);
    caps_ = load_caps(opts_.caps);
    vocab_.emplace(caps_);
    if (!opts_.provider.empty())
      provider_ = descriptors::PropertyProvider::load(opts_.provider);
    if (!opts_.rejects.empty()) {
      rejects_path_ = opts_.rejects;
    } else if (!opts_.output.empty()) {
      rejects_path_ = opts_.output + ".rejects.jsonl";
    }
  }

  const Options& options() const { return opts_; }
  const descriptors::CapTable& caps() const { return caps_; }
  const tokenizer::Vocab& vocab() const { return *vocab_; }
  const descriptors::PropertyProvider* provider() const {
    return provider_ ? &*provider_ : nullptr;
  }

  /// Reads the corpus in chunks, maps `work` over each chunk in parallel and
  /// hands results to `sink` in input order. Records whose `work` throws are
  /// rejected with the exception message.
  template <class Work, class Sink>
  RunStats run(Work&& work, Sink&& sink) {
    using Result = std::invoke_result_t<Work&, const corpus::CorpusRecord&>;
    const auto format = opts_.format == "auto" ? corpus::format_for(opts_.input)
                        : opts_.format == "csv" ? corpus::Format::kCsv
                                                : corpus::Format::kSmi;
    corpus::CorpusReader reader(opts_.input, format);
    std::unique_ptr<std::ofstream> rejects_file;
    if (!rejects_path_.empty()) {
      rejects_file = std::make_unique<std::ofstream>(rejects_path_, std::ios::binary);
      if (!*rejects_file) throw Error("cannot write " + rejects_path_);
    }
    std::ostream& rejects_out = rejects_file ? *rejects_file : std::cerr;

    RunStats stats;
    std::vector<corpus::CorpusRecord> chunk;
    std::vector<corpus::Reject> rejects;
    for (bool done = false; !done;) {
      chunk.clear();
      rejects.clear();
      while (chunk.size() < kChunk) {
        auto rec = reader.next(rejects);
        if (!rec) {
          done = true;
          break;
        }
        chunk.push_back(std::move(*rec));
      }
      std::vector<std::optional<Result>> results(chunk.size());
      std::vector<std::string> errors(chunk.size());
      parallel_for(chunk.size(), opts_.threads, [&](std::size_t i) {
        try {
          results[i].emplace(work(chunk[i]));
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      });
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        if (results[i]) {
          sink(chunk[i], *results[i]);
          ++stats.records;
        } else {
          rejects.push_back({chunk[i].line, chunk[i].smiles, errors[i]});
        }
      }
      std::stable_sort(rejects.begin(), rejects.end(),
                       [](const auto& a, const auto& b) { return a.line < b.line; });
      for (const auto& r : rejects)
        rejects_out << Json{{"line", r.line}, {"smiles", r.text}, {"reason", r.reason}}.dump()
                    << '\n';
      stats.rejects += rejects.size();
    }
    stats.lines = reader.lines_read();
    if (stats.records == 0 && stats.rejects == 0)
      std::cerr << "warning: " << opts_.input << " contains no records\n";
    return stats;
  }

 private:
  Options& opts_;
  descriptors::CapTable caps_;
  std::optional<tokenizer::Vocab> vocab_;
  std::optional<descriptors::PropertyProvider> provider_;
  std::string rejects_path_;
};

int finish(const char* command, const RunStats& s) {
  std::cerr << command << ": " << s.records << " records, " << s.rejects << " rejected\n";
  return s.rejects ? kExitRejects : kExitOk;
}

// ---------------------------------------------------------------- fragment

Json fragment_json(const brics::Fragment& f, const chem::MolGraph& g) {
  return Json{{"atoms", f.parent_atoms},
              {"cap_h", f.cap_h},
              {"provenance", std::string(brics::to_string(f.provenance))},
              {"smiles", chem::write_smiles(brics::materialize(f, g))}};
}

int cmd_fragment(Options& o) {
  Pipeline p(o);
  Output out(o.output);
  auto s = p.run(
      [](const corpus::CorpusRecord& r) {
        const auto g = chem::parse_smiles(r.smiles);
        const auto fs = brics::fragment_with_pairs(g);
        Json frags = Json::array();
        for (const auto& f : fs.brics_fragments) frags.push_back(fragment_json(f, g));
        for (const auto& f : fs.pair_fragments) frags.push_back(fragment_json(f, g));
        Json cleavages = Json::array();
        for (const auto& c : fs.cleavages) {
          const auto& b = g.bond(c.bond);
          cleavages.push_back(Json{{"bond", {b.begin, b.end}}, {"rule", c.rule}});
        }
        return Json{{"smiles", r.smiles}, {"fragments", frags}, {"cleavages", cleavages}}.dump();
      },
      [&](const corpus::CorpusRecord&, const std::string& line) { out.stream() << line << '\n'; });
  return finish("fragment", s);
}

// ---------------------------------------------------------------- descriptors

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int cmd_descriptors(Options& o) {
  Pipeline p(o);
  Output out(o.output);
  out.stream() << "parent,fragment_smiles,provenance";
  for (auto name : descriptors::kSlotNames) out.stream() << ',' << name;
  out.stream() << '\n';
  descriptors::ClipCounter total;
  struct Rows {
    std::string text;
    descriptors::ClipCounter clips;
  };
  auto s = p.run(
      [&](const corpus::CorpusRecord& r) {
        const auto g = chem::parse_smiles(r.smiles);
        const auto fs = brics::fragment_with_pairs(g);
        Rows rows;
        std::ostringstream os;
        auto emit = [&](const brics::Fragment& f) {
          const auto frag = brics::materialize(f, g);
          const std::string smiles = chem::write_smiles(frag);
          const auto* props = p.provider() ? p.provider()->find(smiles) : nullptr;
          const auto d = descriptors::descriptor_vector(frag, p.caps(), &rows.clips, props);
          os << csv_field(r.smiles) << ',' << csv_field(smiles) << ','
             << brics::to_string(f.provenance);
          for (int v : d) os << ',' << v;
          os << '\n';
        };
        for (const auto& f : fs.brics_fragments) emit(f);
        for (const auto& f : fs.pair_fragments) emit(f);
        rows.text = os.str();
        return rows;
      },
      [&](const corpus::CorpusRecord&, const Rows& rows) {
        out.stream() << rows.text;
        total.clipped_values += rows.clips.clipped_values;
      });
  if (total.clipped_values)
    std::cerr << "descriptors: " << total.clipped_values << " values clipped to their caps\n";
  return finish("descriptors", s);
}

// ---------------------------------------------------------------- tokenize

int cmd_tokenize(Options& o, double mask_rate, const std::string& vocab_out) {
  Pipeline p(o);
  Output out(o.output);
  if (!vocab_out.empty()) write_json_file(vocab_out, manifest_json(p.vocab()));
  const std::uint64_t seed = o.seed;
  auto s = p.run(
      [&](const corpus::CorpusRecord& r) {
        const auto g = chem::parse_smiles(r.smiles);
        const auto ts = tokenizer::encode(
            refnet::substructure_rows(g, p.caps(), nullptr, p.provider()), p.vocab());
        const auto ms = tokenizer::mask_tokens(ts, mask_rate, derive_seed(seed, {r.index}));
        return Json{{"smiles", r.smiles},
                    {"ids", ts.ids},
                    {"masked_ids", ms.ids},
                    {"targets", ms.targets},
                    {"positions", ms.positions}}
            .dump();
      },
      [&](const corpus::CorpusRecord&, const std::string& line) { out.stream() << line << '\n'; });
  return finish("tokenize", s);
}

// ---------------------------------------------------------------- graph

int cmd_graph(Options& o, const std::string& policy_name) {
  Pipeline p(o);
  Output out(o.output);
  const auto policy = policy_name == "graphormer" ? graphprep::AugmentPolicy::kGraphormer
                                                  : graphprep::AugmentPolicy::kGcnGin;
  const std::uint64_t seed = o.seed;
  auto s = p.run(
      [&](const corpus::CorpusRecord& r) {
        const auto g = chem::parse_smiles(r.smiles);
        const auto gf = graphprep::featurize(g);
        Json nodes = Json::array();
        for (int i = 0; i < g.num_atoms(); ++i)
          nodes.push_back({chem::atomic_number(g.atom(i).element), gf.nodes[i].chirality});
        Json edges = Json::array();
        for (int k = 0; k < gf.num_edges(); ++k)
          edges.push_back({gf.edges[k].first, gf.edges[k].second, gf.edge_attrs[k]});
        Json views = Json::array();
        for (const auto& v : graphprep::augment(gf, policy, derive_seed(seed, {r.index})))
          views.push_back(Json{{"node_mask", v.node_mask}, {"edge_mask", v.edge_mask}});
        const auto enc = graphprep::structural_encodings(g);
        Json spd = Json::array();
        for (int d : enc.spd.data()) spd.push_back(d == chem::SPDMatrix::kUnreachable ? -1 : d);
        return Json{{"smiles", r.smiles}, {"nodes", nodes},        {"edges", edges},
                    {"views", views},     {"degree", enc.degree}, {"spd", spd}}
            .dump();
      },
      [&](const corpus::CorpusRecord&, const std::string& line) { out.stream() << line << '\n'; });
  return finish("graph", s);
}

// ---------------------------------------------------------------- split

std::array<double, 3> parse_ratios(const std::vector<double>& r) {
  if (r.size() != 3) throw Error("--ratios takes exactly three values");
  return {r[0], r[1], r[2]};
}

int cmd_split(Options& o, const std::vector<double>& ratio_args, const std::string& summary) {
  const auto ratios = parse_ratios(ratio_args);
  Pipeline p(o);
  std::vector<corpus::CorpusRecord> records;
  std::vector<std::string> keys;
  auto s = p.run([](const corpus::CorpusRecord& r) { return corpus::scaffold_key(r.smiles); },
                 [&](const corpus::CorpusRecord& r, const std::string& key) {
                   records.push_back(r);
                   keys.push_back(key);
                 });
  const auto split = corpus::scaffold_split_keys(std::move(keys), ratios);
  Output out(o.output);
  out.stream() << "index,line,smiles,scaffold,partition\n";
  for (std::size_t i = 0; i < records.size(); ++i)
    out.stream() << records[i].index << ',' << records[i].line << ','
                 << csv_field(records[i].smiles) << ',' << csv_field(split.scaffold[i]) << ','
                 << corpus::to_string(split.partition[i]) << '\n';

  Json report{{"records", records.size()},
              {"rejects", s.rejects},
              {"target", ratios},
              {"counts", split.counts},
              {"achieved", split.achieved},
              {"scaffold_groups", split.groups},
              {"largest_group", split.largest_group}};
  if (!summary.empty()) write_json_file(summary, report);
  std::cerr << "split: " << report.dump() << '\n';
  return finish("split", s);
}

// ---------------------------------------------------------------- stats

int cmd_stats(Options& o) {
  Pipeline p(o);
  struct Row {
    int atoms = 0;
    std::size_t brics = 0, pairs = 0, tokens = 0;
    std::vector<int> rules;
    descriptors::ClipCounter clips;
    std::string scaffold;
  };
  std::size_t atoms = 0, max_atoms = 0, brics = 0, pairs = 0, tokens = 0, max_tokens = 0;
  std::map<int, std::size_t> rules;
  descriptors::ClipCounter clips;
  std::map<std::string, std::size_t> scaffolds;
  auto s = p.run(
      [&](const corpus::CorpusRecord& r) {
        const auto g = chem::parse_smiles(r.smiles);
        Row row;
        row.atoms = g.num_atoms();
        const auto fs = brics::fragment_with_pairs(g);
        row.brics = fs.brics_fragments.size();
        row.pairs = fs.pair_fragments.size();
        for (const auto& c : fs.cleavages) row.rules.push_back(c.rule);
        const auto rows = refnet::substructure_rows(g, p.caps(), &row.clips, p.provider());
        row.tokens = tokenizer::encode(rows, p.vocab()).ids.size();
        row.scaffold = chem::write_smiles(chem::murcko_scaffold(g));
        return row;
      },
      [&](const corpus::CorpusRecord&, const Row& row) {
        atoms += row.atoms;
        max_atoms = std::max<std::size_t>(max_atoms, row.atoms);
        brics += row.brics;
        pairs += row.pairs;
        tokens += row.tokens;
        max_tokens = std::max(max_tokens, row.tokens);
        for (int rule : row.rules) ++rules[rule];
        clips.clipped_values += row.clips.clipped_values;
        for (std::size_t j = 0; j < clips.per_slot.size(); ++j)
          clips.per_slot[j] += row.clips.per_slot[j];
        ++scaffolds[row.scaffold];
      });
  const double n = s.records ? static_cast<double>(s.records) : 1.0;
  Json rule_counts = Json::object();
  for (const auto& [rule, count] : rules) rule_counts[std::to_string(rule)] = count;
  Json clipped = Json::object();
  for (std::size_t j = 0; j < clips.per_slot.size(); ++j)
    if (clips.per_slot[j]) clipped[std::string(descriptors::kSlotNames[j])] = clips.per_slot[j];
  std::size_t largest = 0;
  for (const auto& [key, count] : scaffolds) largest = std::max(largest, count);
  Json report{
      {"records", s.records},
      {"rejects", s.rejects},
      {"heavy_atoms", {{"mean", static_cast<double>(atoms) / n}, {"max", max_atoms}}},
      {"brics_fragments", brics},
      {"pair_fragments", pairs},
      {"cleavage_rules", rule_counts},
      {"tokens", {{"mean", static_cast<double>(tokens) / n}, {"max", max_tokens}}},
      {"vocab_size", p.vocab().size()},
      {"clipped_values", clips.clipped_values},
      {"clipped_per_slot", clipped},
      {"scaffold_groups", scaffolds.size()},
      {"acyclic", scaffolds.count("") ? scaffolds.at("") : 0},
      {"largest_scaffold_group", largest}};
  Output out(o.output);
  out.stream() << report.dump(2) << '\n';
  return finish("stats", s);
}

// ---------------------------------------------------------------- pretrain-demo

struct DemoOptions {
  int steps = 200;
  std::string encoder = "gcn";
  std::string checkpoint;
  std::string vocab_out;
  std::string summary;
  double lr = 1e-2;
  double tau = 0.1;
};

int cmd_pretrain(Options& o, const DemoOptions& d) {
  Pipeline p(o);
  std::vector<refnet::PreparedMolecule> batch;
  auto s = p.run(
      [&](const corpus::CorpusRecord& r) { return refnet::prepare(r.smiles, p.vocab(), p.provider()); },
      [&](const corpus::CorpusRecord&, refnet::PreparedMolecule& m) {
        batch.push_back(std::move(m));
      });
  if (batch.size() < 2) throw Error("pretrain-demo needs at least two valid molecules");
  if (!d.vocab_out.empty()) write_json_file(d.vocab_out, manifest_json(p.vocab()));

  refnet::ModelConfig cfg;
  cfg.vocab = p.vocab().size();
  cfg.encoder = d.encoder == "gin" ? refnet::GraphEncoder::kGin : refnet::GraphEncoder::kGcn;
  cfg.lr = d.lr;
  cfg.loss.tau = d.tau;

  Output out(o.output);
  const auto start = std::chrono::steady_clock::now();
  const auto run = refnet::pretrain(batch, cfg, d.steps, o.seed, [&](const refnet::LossReport& r) {
    out.stream() << Json{{"step", r.step},
                         {"l_lang", r.l_lang},
                         {"l_graph", r.l_graph},
                         {"l_bimodal", r.l_bimodal},
                         {"total", r.total}}
                        .dump()
                 << '\n';
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string ckpt = !d.checkpoint.empty() ? d.checkpoint
                           : !o.output.empty()   ? o.output + ".ckpt"
                                                 : "pretrain.ckpt";
  refnet::write_checkpoint(ckpt, refnet::model_arrays(run.model));

  const double first = run.log.front().total, last = run.log.back().total;
  Json report{{"molecules", batch.size()},
              {"steps", d.steps},
              {"seed", o.seed},
              {"encoder", d.encoder},
              {"vocab_size", cfg.vocab},
              {"first_total", first},
              {"last_total", last},
              {"relative_drop", (first - last) / first},
              {"matched_cosine", run.final.matched},
              {"mismatched_cosine", run.final.mismatched},
              {"cosine_gap", run.final.gap()},
              {"checkpoint", ckpt}};
  if (!d.summary.empty()) write_json_file(d.summary, report);
  std::cerr << "pretrain-demo: " << report.dump() << " in " << seconds << " s\n";
  return finish("pretrain-demo", s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Substructure descriptor pipeline: fragmentation, descriptors, tokens, graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "subdesc 0.1.0");

  std::array<Options, 7> opts;
  auto* fragment = app.add_subcommand("fragment", "BRICS fragments and pair substructures (JSONL)");
  add_common(fragment, opts[0]);

  auto* descriptors = app.add_subcommand("descriptors", "23-slot descriptor rows per fragment (CSV)");
  add_common(descriptors, opts[1]);

  double mask_rate = 0.15;
  std::string vocab_out;
  auto* tokenize = app.add_subcommand("tokenize", "Token ids with masked copies (JSONL)");
  add_common(tokenize, opts[2]);
  tokenize->add_option("--mask-rate", mask_rate, "Fraction of descriptor tokens masked")
      ->check(CLI::Range(0.0, 1.0));
  tokenize->add_option("--vocab-out", vocab_out, "Write the vocabulary manifest here");

  std::string policy = "gcn";
  auto* graph = app.add_subcommand("graph", "Graph features, masked views, degree and SPD (JSONL)");
  add_common(graph, opts[3]);
  graph->add_option("--policy", policy, "Augmentation policy")
      ->check(CLI::IsMember({"gcn", "gin", "graphormer"}));

  std::vector<double> ratios{0.8, 0.1, 0.1};
  std::string split_summary;
  auto* split = app.add_subcommand("split", "Deterministic Murcko scaffold split (CSV)");
  add_common(split, opts[4]);
  split->add_option("--ratios", ratios, "train valid test fractions")->delimiter(',')->expected(3);
  split->add_option("--summary", split_summary, "Write achieved ratios as JSON here");

  DemoOptions demo;
  auto* pretrain = app.add_subcommand("pretrain-demo", "Small-scale joint pretraining (JSONL loss log)");
  add_common(pretrain, opts[5]);
  pretrain->add_option("--steps", demo.steps, "SGD steps")->check(CLI::PositiveNumber);
  pretrain->add_option("--encoder", demo.encoder, "Graph encoder")
      ->check(CLI::IsMember({"gcn", "gin"}));
  pretrain->add_option("--checkpoint", demo.checkpoint,
                       "Checkpoint path (default: <output>.ckpt or pretrain.ckpt)");
  pretrain->add_option("--vocab-out", demo.vocab_out, "Write the vocabulary manifest here");
  pretrain->add_option("--summary", demo.summary, "Write final losses and cosines as JSON here");
  pretrain->add_option("--lr", demo.lr, "Learning rate")->check(CLI::PositiveNumber);
  pretrain->add_option("--tau", demo.tau, "Contrastive temperature")->check(CLI::PositiveNumber);

  auto* stats = app.add_subcommand("stats", "Corpus summary (JSON)");
  add_common(stats, opts[6]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (fragment->parsed()) return cmd_fragment(opts[0]);
    if (descriptors->parsed()) return cmd_descriptors(opts[1]);
    if (tokenize->parsed()) return cmd_tokenize(opts[2], mask_rate, vocab_out);
    if (graph->parsed()) return cmd_graph(opts[3], policy);
    if (split->parsed()) return cmd_split(opts[4], ratios, split_summary);
    if (pretrain->parsed()) return cmd_pretrain(opts[5], demo);
    if (stats->parsed()) return cmd_stats(opts[6]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
