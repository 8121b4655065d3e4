#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dnslsh/csv.hpp"
#include "dnslsh/error.hpp"
#include "dnslsh/feature_io.hpp"
#include "dnslsh/features.hpp"
#include "dnslsh/ingest.hpp"
#include "dnslsh/labels.hpp"
#include "dnslsh/metrics.hpp"
#include "dnslsh/model_io.hpp"
#include "dnslsh/pcap.hpp"
#include "dnslsh/pipeline.hpp"
#include "dnslsh/records_csv.hpp"
#include "dnslsh/segment.hpp"
#include "dnslsh/split.hpp"
#include "dnslsh/suffix.hpp"
#include "dnslsh/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitMismatch = 4;

/// Error in how the tool was invoked that CLI11 cannot detect on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::uint64_t seed = 42;
  unsigned workers = 0;
  bool quiet = false;

  std::string suffix_list;
  bool include_private = false;

  int window_size = 20;
  int segments = 0;  // 0: task default
  bool no_global = false;
  std::string threshold_mode = "median";
  std::string delimiters{dnslsh::kDefaultDelimiters};
  std::string task = "binary";

  int trees = 100;
  int max_depth = 0;
  int min_samples_leaf = 1;
  int features_per_split = 0;
  bool no_bootstrap = false;

  dnslsh::Task parsed_task() const { return dnslsh::task_from_string(task); }

  int resolved_segments() const {
    return segments > 0 ? segments : dnslsh::default_segment_count(parsed_task());
  }

  dnslsh::FeatureMetadata meta() const {
    dnslsh::FeatureMetadata m;
    m.window_size = window_size;
    m.hash.segment_count = resolved_segments();
    m.hash.include_global = !no_global;
    m.hash.threshold_mode = dnslsh::threshold_mode_from_string(threshold_mode);
    m.hash.delimiters = delimiters;
    m.validate();
    return m;
  }

  dnslsh::ForestParams forest() const {
    dnslsh::ForestParams p;
    p.tree_count = trees;
    p.max_depth = max_depth;
    p.min_samples_leaf = min_samples_leaf;
    p.features_per_split = features_per_split;
    p.bootstrap = !no_bootstrap;
    p.validate();
    return p;
  }

  dnslsh::SuffixRules::Options suffix_options() const {
    return dnslsh::SuffixRules::Options{.include_private = include_private};
  }
};

struct Paths {
  std::vector<std::string> inputs;
  std::string output;
  std::string model;
  std::string family_model;
  std::string features;
  std::string pool;
  std::string report;
  std::string holdout;
};

class Tool {
 public:
  Tool(Settings& s, Paths& p) : s_(s), p_(p) {}

  const dnslsh::SuffixRules& rules() {
    if (s_.suffix_list.empty()) return dnslsh::SuffixRules::bundled(s_.suffix_options());
    if (!custom_rules_) custom_rules_ = dnslsh::SuffixRules::load(s_.suffix_list, s_.suffix_options());
    return *custom_rules_;
  }

  ordered_json suffix_json() {
    return {{"path", s_.suffix_list.empty() ? "bundled" : s_.suffix_list},
            {"version", rules().version()},
            {"include_private", s_.include_private}};
  }

  ordered_json config(const std::string& command, bool with_features, bool with_forest) {
    ordered_json c;
    c["command"] = command;
    c["seed"] = s_.seed;
    c["task"] = s_.task;
    if (with_features) {
      const auto m = s_.meta();
      c["window_size"] = m.window_size;
      c["segments"] = m.hash.segment_count;
      c["segments_from_task_default"] = s_.segments == 0;
      c["include_global"] = m.hash.include_global;
      c["threshold_mode"] = dnslsh::to_string(m.hash.threshold_mode);
      c["delimiters"] = m.hash.delimiters;
      c["suffix_rules"] = suffix_json();
    }
    if (with_forest) {
      const auto f = s_.forest();
      c["forest"] = {{"trees", f.tree_count},
                     {"max_depth", f.max_depth},
                     {"min_samples_leaf", f.min_samples_leaf},
                     {"features_per_split", f.features_per_split},
                     {"bootstrap", f.bootstrap}};
    }
    ordered_json paths;
    if (!p_.inputs.empty()) paths["input"] = p_.inputs;
    if (!p_.features.empty()) paths["features"] = p_.features;
    if (!p_.model.empty()) paths["model"] = p_.model;
    if (!p_.family_model.empty()) paths["family_model"] = p_.family_model;
    if (!p_.pool.empty()) paths["benign_pool"] = p_.pool;
    if (!p_.output.empty()) paths["output"] = p_.output;
    if (!paths.empty()) c["paths"] = paths;
    return c;
  }

  void log_config(const ordered_json& c) const {
    if (!s_.quiet) std::cerr << "dnslsh: config " << c.dump() << '\n';
  }

  void note(const std::string& line) const {
    if (!s_.quiet) std::cerr << line << '\n';
  }

  std::vector<dnslsh::DnsQueryRecord> read_records() const {
    std::vector<dnslsh::DnsQueryRecord> records;
    for (const auto& path : p_.inputs) {
      auto part = dnslsh::read_csv(fs::path(path));
      records.insert(records.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
    }
    return records;
  }

 private:
  Settings& s_;
  Paths& p_;
  std::optional<dnslsh::SuffixRules> custom_rules_;
};

// Output goes to the file when a path is given and to stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw dnslsh::IoError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }
  void close(const std::string& path) {
    if (!file_.is_open()) return;
    file_.close();
    if (!file_) throw dnslsh::IoError("write to '" + path + "' failed");
  }

 private:
  std::ofstream file_;
};

std::string fmt(double v) { return dnslsh::format_double(v); }

void warn_task_wiring(Tool& tool, const dnslsh::FeatureMetadata& meta, dnslsh::Task task) {
  const int expected = dnslsh::default_segment_count(task);
  if (meta.hash.segment_count != expected) {
    tool.note("dnslsh: note: " + dnslsh::to_string(task) + " models usually use " +
              std::to_string(expected) + " segments; features have " +
              std::to_string(meta.hash.segment_count));
  }
}

// ---- ingest -----------------------------------------------------------------

int cmd_ingest(Tool& tool, Settings&, Paths& p, const std::vector<std::string>& pcaps,
               const std::string& csv, const std::string& source,
               const std::optional<std::string>& family, const std::optional<std::string>& behavior) {
  if (pcaps.empty() == csv.empty()) throw UsageError("ingest needs exactly one of --pcap or --csv");
  if (!source.empty() && pcaps.empty()) throw UsageError("--source applies to --pcap input only");
  p.inputs = pcaps.empty() ? std::vector<std::string>{csv} : pcaps;
  auto cfg = tool.config("ingest", false, false);
  cfg["suffix_rules"] = tool.suffix_json();
  if (family) cfg["stamp_family"] = *family;
  if (behavior) cfg["stamp_behavior"] = *behavior;
  tool.log_config(cfg);

  std::vector<dnslsh::DnsQueryRecord> records;
  if (!pcaps.empty()) {
    for (const auto& path : pcaps) {
      auto result = dnslsh::parse_pcap(path, source);
      const auto& s = result.summary;
      tool.note(path + ": packets " + std::to_string(s.packets) + ", queries " +
                std::to_string(s.queries) + ", responses " + std::to_string(s.responses) +
                ", non-dns " + std::to_string(s.non_dns) + ", skipped " +
                std::to_string(s.skipped()) + " (fragments " + std::to_string(s.fragments) +
                ", truncated " + std::to_string(s.truncated) + ", malformed " +
                std::to_string(s.malformed) + ")");
      if (result.records.empty()) tool.note("dnslsh: warning: no DNS queries in " + path);
      records.insert(records.end(), result.records.begin(), result.records.end());
    }
  } else {
    records = dnslsh::read_csv(fs::path(csv));
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (family) records[i].family_label = *family;
    if (behavior) records[i].behavior_label = *behavior;
    try {
      dnslsh::validate_record(records[i]);
    } catch (const dnslsh::DataError& e) {
      throw dnslsh::DataError("record " + std::to_string(i + 1) + ": " + e.what());
    }
  }

  std::size_t no_domain = 0;
  std::size_t invalid = 0;
  for (const auto& r : records) {
    dnslsh::ExclusionReason why{};
    if (!dnslsh::extract_subdomain(r.qname, tool.rules(), &why)) {
      (why == dnslsh::ExclusionReason::InvalidName ? invalid : no_domain) += 1;
    }
  }
  tool.note("records " + std::to_string(records.size()) + ", without registered domain " +
            std::to_string(no_domain) + ", invalid names " + std::to_string(invalid) +
            " (both excluded at featurize)");

  Sink sink(p.output);
  dnslsh::write_csv(records, sink.out());
  sink.close(p.output);
  return 0;
}

// ---- featurize --------------------------------------------------------------

int cmd_featurize(Tool& tool, Settings& s, Paths& p, bool unlabeled) {
  if (p.output.empty()) throw UsageError("featurize needs --output");
  auto cfg = tool.config("featurize", true, false);
  const auto records = tool.read_records();

  bool labeled = !unlabeled;
  if (labeled && !dnslsh::all_labeled(records)) {
    const bool none = std::none_of(records.begin(), records.end(),
                                   [](const auto& r) { return r.family_label.has_value(); });
    if (!none) {
      throw dnslsh::DataError(
          "some records carry a family label and some do not; label all of them or pass "
          "--unlabeled");
    }
    labeled = false;
  }
  cfg["labeled"] = labeled;
  tool.log_config(cfg);

  dnslsh::FeaturizeOptions options;
  options.meta = s.meta();
  options.labeled = labeled;
  options.workers = s.workers;
  dnslsh::FeaturizeReport report;
  auto set = dnslsh::featurize_records(records, tool.rules(), options, &report);
  set.config_json = cfg.dump();
  dnslsh::write_feature_file(set, p.output);

  std::ostringstream table;
  table << "stream_key,queries,windows,discarded\n";
  for (const auto& st : report.streams) {
    const std::vector<std::string> row = {st.stream_key, std::to_string(st.queries),
                                          std::to_string(st.windows), std::to_string(st.discarded)};
    dnslsh::write_csv_row(table, row);
  }
  if (!p.report.empty()) {
    std::ofstream out(p.report, std::ios::binary);
    out << table.str();
    if (!out) throw dnslsh::IoError("cannot write '" + p.report + "'");
  } else if (!s.quiet) {
    std::cerr << table.str();
  }
  tool.note("streams " + std::to_string(report.streams.size()) + ", windows " +
            std::to_string(report.windows) + ", discarded queries " +
            std::to_string(report.discarded) + ", excluded records " +
            std::to_string(report.excluded));
  if (report.windows == 0) tool.note("dnslsh: warning: no stream filled a window");
  return 0;
}

// ---- train ------------------------------------------------------------------

int cmd_train(Tool& tool, Settings& s, Paths& p, double train_fraction) {
  if (p.features.empty() || p.model.empty()) throw UsageError("train needs --features and --model");
  const auto task = s.parsed_task();
  auto set = dnslsh::read_feature_file(p.features);
  auto cfg = tool.config("train", false, true);
  cfg["train_fraction"] = train_fraction;
  cfg["featurization"] = ordered_json::parse(dnslsh::metadata_to_json(set.meta));
  tool.log_config(cfg);
  warn_task_wiring(tool, set.meta, task);

  dnslsh::FeatureSet train_set = set;
  if (train_fraction < 1.0) {
    const auto ds = dnslsh::task_dataset(set, task);
    const auto split = dnslsh::stratified_split(ds.y, train_fraction, s.seed);
    std::vector<std::size_t> train_rows, test_rows;
    for (auto i : split.train) train_rows.push_back(ds.rows[i]);
    for (auto i : split.test) test_rows.push_back(ds.rows[i]);
    train_set = dnslsh::subset(set, train_rows);
    tool.note("split: train " + std::to_string(train_rows.size()) + ", holdout " +
              std::to_string(test_rows.size()) + " windows");
    if (!p.holdout.empty()) {
      auto holdout = dnslsh::subset(set, test_rows);
      holdout.config_json = set.config_json;
      dnslsh::write_feature_file(holdout, p.holdout);
    }
  } else if (!p.holdout.empty()) {
    throw UsageError("--holdout-out needs --train-fraction below 1");
  }

  const auto model =
      dnslsh::train_task_model(train_set, task, s.forest(), s.seed, s.workers, cfg.dump());
  dnslsh::save_model(model, p.model);
  std::string classes;
  for (const auto& c : model.classes) classes += (classes.empty() ? "" : ",") + c;
  tool.note("trained " + std::to_string(model.trees.size()) + " trees, classes " + classes);
  return 0;
}

// ---- predict ----------------------------------------------------------------

int cmd_predict(Tool& tool, Settings&, Paths& p) {
  if (p.features.empty() || p.model.empty()) throw UsageError("predict needs --model and --features");
  const auto model = dnslsh::load_model(p.model);
  const auto set = dnslsh::read_feature_file(p.features);
  auto cfg = tool.config("predict", false, false);
  cfg.erase("task");
  if (model.task) cfg["task"] = dnslsh::to_string(*model.task);
  tool.log_config(cfg);
  model.check_compatible(set.meta);

  Sink sink(p.output);
  auto& out = sink.out();
  out << "stream_key,window_index,predicted,probability_max\n";
  for (const auto& row : set.rows) {
    const auto pred = model.predict(row.values);
    const std::vector<std::string> fields = {
        row.key.to_string(), std::to_string(row.window_index), pred.label,
        fmt(*std::max_element(pred.probabilities.begin(), pred.probabilities.end()))};
    dnslsh::write_csv_row(out, fields);
  }
  sink.close(p.output);
  return 0;
}

// ---- evaluate ---------------------------------------------------------------

ordered_json metrics_json(const dnslsh::Metrics& m) {
  return ordered_json::parse(dnslsh::metrics_to_json(m, -1));
}

void summarize(Tool& tool, const std::string& name, const dnslsh::Metrics& m) {
  tool.note(name + "windows " + std::to_string(m.total) + ", accuracy " + fmt(m.accuracy) +
            ", F1 " + fmt(m.headline_f1()) + " (weighted " + fmt(m.f1_weighted) + ", macro " +
            fmt(m.f1_macro) + "), FPR " + fmt(m.false_positive_rate));
}

int cmd_sweep(Tool& tool, Settings& s, Paths& p, double train_fraction,
              const std::vector<int>& sizes) {
  if (p.inputs.empty()) throw UsageError("--sweep needs --records");
  const auto task = s.parsed_task();
  auto cfg = tool.config("evaluate", true, true);
  cfg["mode"] = "sweep";
  cfg["window_sizes"] = sizes;
  cfg["train_fraction"] = train_fraction;
  tool.log_config(cfg);
  const auto records = tool.read_records();

  Sink sink(p.output);
  auto& out = sink.out();
  out << "window_size,windows,train_windows,test_windows,accuracy,f1,f1_weighted,f1_macro,"
         "false_positive_rate\n";
  for (int n : sizes) {
    Settings local = s;
    local.window_size = n;
    dnslsh::FeaturizeOptions options;
    options.meta = local.meta();
    options.workers = s.workers;
    auto set = dnslsh::featurize_records(records, tool.rules(), options);
    const auto ds = dnslsh::task_dataset(set, task);
    const auto split = dnslsh::stratified_split(ds.y, train_fraction, s.seed);
    std::vector<std::size_t> train_rows, test_rows;
    for (auto i : split.train) train_rows.push_back(ds.rows[i]);
    for (auto i : split.test) test_rows.push_back(ds.rows[i]);
    const auto model = dnslsh::train_task_model(dnslsh::subset(set, train_rows), task, s.forest(),
                                                s.seed, s.workers, cfg.dump());
    const auto m = dnslsh::evaluate(model, dnslsh::subset(set, test_rows), task);
    const std::vector<std::string> row = {
        std::to_string(n),     std::to_string(ds.rows.size()), std::to_string(train_rows.size()),
        std::to_string(test_rows.size()), fmt(m.accuracy),     fmt(m.headline_f1()),
        fmt(m.f1_weighted),    fmt(m.f1_macro),                fmt(m.false_positive_rate)};
    dnslsh::write_csv_row(out, row);
    summarize(tool, "n=" + std::to_string(n) + ": ", m);
  }
  sink.close(p.output);
  return 0;
}

int cmd_evaluate(Tool& tool, Settings& s, Paths& p, const std::string& mode, bool task_given) {
  if (p.features.empty() || p.model.empty()) throw UsageError("evaluate needs --model and --features");
  const auto model = dnslsh::load_model(p.model);
  auto set = dnslsh::read_feature_file(p.features);
  std::optional<dnslsh::ForestModel> family;
  if (!p.family_model.empty()) family = dnslsh::load_model(p.family_model);
  if (mode == "two-step" && !family) throw UsageError("two-step mode needs --family-model");

  dnslsh::Task task = task_given ? s.parsed_task() : model.task.value_or(dnslsh::Task::Binary);
  if (family) {
    task = dnslsh::Task::Family;
    if (model.task && *model.task != dnslsh::Task::Binary) {
      throw dnslsh::MetadataMismatch("two-step routing needs a binary detection model, got " +
                                     dnslsh::to_string(*model.task));
    }
    if (family->task && *family->task != dnslsh::Task::Family) {
      throw dnslsh::MetadataMismatch("--family-model was trained for " +
                                     dnslsh::to_string(*family->task));
    }
  }
  s.task = dnslsh::to_string(task);
  auto cfg = tool.config("evaluate", false, false);
  cfg["mode"] = mode;
  cfg["featurization"] = ordered_json::parse(dnslsh::metadata_to_json(set.meta));
  tool.log_config(cfg);

  if (!p.pool.empty()) {
    const auto pool = dnslsh::read_feature_file(p.pool);
    const auto before = set.rows.size();
    dnslsh::supplement_benign(set, pool, s.seed);
    tool.note("supplemented " + std::to_string(set.rows.size() - before) + " legitimate windows");
  }

  ordered_json report;
  report["config"] = cfg;
  report["mode"] = mode;
  if (mode == "per-file") {
    const auto per = dnslsh::evaluate_per_source(model, family ? &*family : nullptr, set, task);
    ordered_json sources = ordered_json::object();
    for (const auto& [source, m] : per) {
      sources[source] = metrics_json(m);
      summarize(tool, source + ": ", m);
    }
    report["per_source"] = sources;
  } else {
    const auto m = family ? dnslsh::evaluate_two_step(model, *family, set)
                          : dnslsh::evaluate(model, set, task);
    report["metrics"] = metrics_json(m);
    summarize(tool, "", m);
  }
  Sink sink(p.output);
  sink.out() << report.dump(2) << '\n';
  sink.close(p.output);
  return 0;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string kind;
  std::size_t count = 200;
  std::optional<std::size_t> min_length;
  std::optional<std::size_t> max_length;
  std::string alphabet;
  std::optional<double> repeat_probability;
  std::optional<double> payload_randomness;
  std::string domain = "example.com";
  std::string source;
  bool corpus = false;
  std::size_t benign = 5000;
  std::size_t tunnel = 5000;
  std::size_t domains_per_class = 6;
  std::string pcap;
};

int cmd_synth(Tool& tool, Settings& s, Paths& p, const SynthArgs& a) {
  if (a.corpus == !a.kind.empty()) throw UsageError("synth needs exactly one of --kind or --corpus");
  auto cfg = tool.config("synth", false, false);
  cfg.erase("task");
  std::vector<dnslsh::DnsQueryRecord> records;
  if (a.corpus) {
    cfg["corpus"] = {{"benign", a.benign}, {"tunnel", a.tunnel}, {"domains_per_class", a.domains_per_class}};
    tool.log_config(cfg);
    records = dnslsh::generate_corpus(a.benign, a.tunnel, s.seed, a.domains_per_class);
  } else {
    auto profile = dnslsh::default_profile(dnslsh::synth_kind_from_string(a.kind), a.domain, a.count, s.seed);
    if (a.min_length) profile.min_length = *a.min_length;
    if (a.max_length) profile.max_length = *a.max_length;
    if (!a.alphabet.empty()) profile.alphabet = dnslsh::synth_alphabet_from_string(a.alphabet);
    if (a.repeat_probability) profile.repeat_probability = *a.repeat_probability;
    if (a.payload_randomness) profile.payload_randomness = *a.payload_randomness;
    if (!a.source.empty()) profile.source = a.source;
    cfg["profile"] = {{"kind", dnslsh::to_string(profile.kind)},
                      {"count", profile.query_count},
                      {"min_length", profile.min_length},
                      {"max_length", profile.max_length},
                      {"alphabet", dnslsh::to_string(profile.alphabet)},
                      {"repeat_probability", profile.repeat_probability},
                      {"payload_randomness", profile.payload_randomness},
                      {"domain", profile.domain},
                      {"source", profile.source}};
    tool.log_config(cfg);
    records = dnslsh::generate(profile);
  }
  if (p.output.empty() && a.pcap.empty()) {
    dnslsh::write_csv(records, std::cout);
  } else if (!p.output.empty()) {
    dnslsh::write_csv(records, fs::path(p.output));
  }
  if (!a.pcap.empty()) dnslsh::write_pcap(records, a.pcap);
  tool.note("generated " + std::to_string(records.size()) + " queries");
  return 0;
}

// ---- compare ----------------------------------------------------------------

int cmd_compare(Tool& tool, Settings& s, const std::string& a, const std::string& b) {
  auto cfg = tool.config("compare", true, false);
  cfg.erase("suffix_rules");
  tool.log_config(cfg);
  const auto meta = s.meta();
  const auto da = dnslsh::digest_query(dnslsh::strip_delimiters(a, meta.hash.delimiters), meta.hash);
  const auto db = dnslsh::digest_query(dnslsh::strip_delimiters(b, meta.hash.delimiters), meta.hash);
  const auto names = dnslsh::slot_layout(meta.hash);
  std::cout << "slot,digest_a,digest_b,score\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::cout << names[i] << ',' << da.slots[i].to_hex() << ',' << db.slots[i].to_hex() << ','
              << dnslsh::compare(da.slots[i], db.slots[i]) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  Paths p;

  CLI::App app{"DNS tunneling detection with locality-sensitive hashing", "dnslsh"};
  app.set_version_flag("--version", "dnslsh 0.1.0");
  app.set_config("--config", "", "Read options from a TOML or INI file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--seed", s.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--workers", s.workers, "Worker threads, 0 = hardware concurrency")->capture_default_str();
  app.add_flag("-q,--quiet", s.quiet, "Suppress the config log and summaries");

  auto add_task = [&](CLI::App* sub) {
    sub->add_option("--task", s.task, "binary | family | behavior-compound | behavior-action")
        ->check(CLI::IsMember({"binary", "family", "behavior-compound", "behavior-action"}))
        ->capture_default_str();
  };
  auto add_hashing = [&](CLI::App* sub) {
    sub->add_option("-n,--window-size", s.window_size, "Queries per window")
        ->check(CLI::Range(2, 1000))
        ->capture_default_str();
    sub->add_option("-k,--segments", s.segments, "Segments per subdomain (default: 2, or 3 for behavior tasks)")
        ->check(CLI::Range(1, 3));
    sub->add_flag("--no-global", s.no_global, "Omit the whole-subdomain digest");
    sub->add_option("--threshold-mode", s.threshold_mode, "median | canonical-mean")
        ->check(CLI::IsMember({"median", "canonical-mean"}))
        ->capture_default_str();
    sub->add_option("--delimiters", s.delimiters, "Characters removed before hashing; must include '.'")
        ->capture_default_str();
  };
  auto add_suffix = [&](CLI::App* sub) {
    sub->add_option("--suffix-list", s.suffix_list, "Public suffix list file (default: bundled snapshot)")
        ->check(CLI::ExistingFile);
    sub->add_flag("--include-private-suffixes", s.include_private,
                  "Also apply the PRIVATE section of the suffix list");
  };
  auto add_forest = [&](CLI::App* sub) {
    sub->add_option("--trees", s.trees, "Trees in the forest")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--max-depth", s.max_depth, "Maximum tree depth, 0 = unlimited")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--min-samples-leaf", s.min_samples_leaf, "Minimum samples per leaf")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--features-per-split", s.features_per_split, "Features tried per split, 0 = ceil(sqrt(D))")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_flag("--no-bootstrap", s.no_bootstrap, "Train each tree on the full sample");
  };

  auto* ingest = app.add_subcommand("ingest", "Convert captures or a query CSV into the canonical CSV");
  std::vector<std::string> pcaps;
  std::string csv_in;
  std::string source;
  std::optional<std::string> family_stamp;
  std::optional<std::string> behavior_stamp;
  ingest->add_option("--pcap", pcaps, "pcap or pcapng capture (repeatable)")->check(CLI::ExistingFile);
  ingest->add_option("--csv", csv_in, "Query CSV to validate and normalize")->check(CLI::ExistingFile);
  ingest->add_option("--source", source, "Source name for capture records (default: file stem)");
  ingest->add_option("--family", family_stamp, "Family label stamped on every record");
  ingest->add_option("--behavior", behavior_stamp, "Behavior label stamped on every record")
      ->check(CLI::IsMember({"handshake", "idle", "download", "upload"}));
  ingest->add_option("-o,--output", p.output, "Output CSV (default: stdout)");
  add_suffix(ingest);

  auto* featurize = app.add_subcommand("featurize", "Window query streams and compute LSH similarity features");
  bool unlabeled = false;
  featurize->add_option("-i,--input", p.inputs, "Query CSV (repeatable)")->required()->check(CLI::ExistingFile);
  featurize->add_option("-o,--output", p.output, "Feature CSV; metadata goes to <output>.meta.json")->required();
  featurize->add_option("--report", p.report, "Per-stream window counts as CSV (default: stderr)");
  featurize->add_flag("--unlabeled", unlabeled, "Ignore labels even if present");
  add_task(featurize);
  add_hashing(featurize);
  add_suffix(featurize);

  auto* train = app.add_subcommand("train", "Train a Random Forest on a feature file");
  double train_fraction = 1.0;
  train->add_option("-f,--features", p.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("-m,--model", p.model, "Model file to write")->required();
  train->add_option("--train-fraction", train_fraction, "Stratified training share; the rest is held out")
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--holdout-out", p.holdout, "Feature CSV receiving the held-out windows");
  add_task(train);
  add_forest(train);

  auto* predict = app.add_subcommand("predict", "Classify the windows of a feature file");
  predict->add_option("-m,--model", p.model, "Model file")->required()->check(CLI::ExistingFile);
  predict->add_option("-f,--features", p.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("-o,--output", p.output, "Predictions CSV (default: stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model against labeled windows");
  std::string mode = "direct";
  bool sweep = false;
  double sweep_fraction = 0.7;
  std::vector<int> sweep_sizes = {5, 10, 20, 30, 40, 50};
  evaluate->add_option("-m,--model", p.model, "Model file (binary model in two-step mode)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--family-model", p.family_model, "Family model for two-step routing")
      ->check(CLI::ExistingFile);
  evaluate->add_option("-f,--features", p.features, "Labeled feature CSV")->check(CLI::ExistingFile);
  evaluate->add_option("--mode", mode, "direct | two-step | per-file")
      ->check(CLI::IsMember({"direct", "two-step", "per-file"}))
      ->capture_default_str();
  evaluate->add_option("--supplement-benign", p.pool, "Feature CSV of legitimate windows to sample from")
      ->check(CLI::ExistingFile);
  evaluate->add_option("-o,--output", p.output, "Report file (default: stdout)");
  evaluate->add_flag("--sweep", sweep, "Featurize, split, train and score each window size");
  evaluate->add_option("--records", p.inputs, "Query CSV for --sweep (repeatable)")->check(CLI::ExistingFile);
  evaluate->add_option("--sweep-sizes", sweep_sizes, "Window sizes for --sweep")
      ->check(CLI::Range(2, 1000))
      ->delimiter(',');
  evaluate->add_option("--train-fraction", sweep_fraction, "Training share for --sweep")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_task(evaluate);
  add_hashing(evaluate);
  add_suffix(evaluate);
  add_forest(evaluate);

  auto* synth = app.add_subcommand("synth", "Generate labeled synthetic DNS traffic");
  SynthArgs sa;
  synth->add_option("--kind", sa.kind, "benign-static | benign-cdn | tunnel-upload | tunnel-download | tunnel-idle")
      ->check(CLI::IsMember({"benign-static", "benign-cdn", "tunnel-upload", "tunnel-download", "tunnel-idle"}));
  synth->add_option("--count", sa.count, "Queries to generate")->capture_default_str();
  synth->add_option("--min-length", sa.min_length, "Shortest payload");
  synth->add_option("--max-length", sa.max_length, "Longest payload");
  synth->add_option("--alphabet", sa.alphabet, "base64url | base32 | hex")
      ->check(CLI::IsMember({"base64url", "base32", "hex"}));
  synth->add_option("--repeat-probability", sa.repeat_probability, "benign-static repeat probability")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--payload-randomness", sa.payload_randomness, "Share of random payload characters")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--domain", sa.domain, "Registered domain of the stream")->capture_default_str();
  synth->add_option("--source", sa.source, "Source name on every record");
  synth->add_flag("--corpus", sa.corpus, "Mixed benign and tunnel corpus over many domains");
  synth->add_option("--benign", sa.benign, "Benign queries in --corpus")->capture_default_str();
  synth->add_option("--tunnel", sa.tunnel, "Tunnel queries in --corpus")->capture_default_str();
  synth->add_option("--domains-per-class", sa.domains_per_class, "Domains per side in --corpus")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("-o,--output", p.output, "Output CSV (default: stdout)");
  synth->add_option("--pcap", sa.pcap, "Also write the queries as a pcap");

  auto* cmp = app.add_subcommand("compare", "Digest two subdomains and print per-slot scores");
  std::string a, b;
  cmp->add_option("a", a, "First subdomain")->required();
  cmp->add_option("b", b, "Second subdomain")->required();
  add_task(cmp);
  add_hashing(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  Tool tool(s, p);
  try {
    if (*ingest) return cmd_ingest(tool, s, p, pcaps, csv_in, source, family_stamp, behavior_stamp);
    if (*featurize) return cmd_featurize(tool, s, p, unlabeled);
    if (*train) return cmd_train(tool, s, p, train_fraction);
    if (*predict) return cmd_predict(tool, s, p);
    if (*evaluate) {
      if (sweep) return cmd_sweep(tool, s, p, sweep_fraction, sweep_sizes);
      return cmd_evaluate(tool, s, p, mode, evaluate->count("--task") > 0);
    }
    if (*synth) return cmd_synth(tool, s, p, sa);
    if (*cmp) return cmd_compare(tool, s, a, b);
  } catch (const UsageError& e) {
    std::cerr << "dnslsh: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "dnslsh: invalid setting: " << e.what() << '\n';
    return kExitUsage;
  } catch (const dnslsh::MetadataMismatch& e) {
    std::cerr << "dnslsh: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const dnslsh::DataError& e) {
    std::cerr << "dnslsh: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "dnslsh: internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
