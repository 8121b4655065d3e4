#include "dnslsh/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "dnslsh/error.hpp"
#include "dnslsh/random.hpp"

namespace dnslsh {
namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(m);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

bool all_labeled(const std::vector<DnsQueryRecord>& records) {
  return std::all_of(records.begin(), records.end(),
                     [](const DnsQueryRecord& r) { return r.family_label.has_value(); });
}

FeatureSet featurize_streams(const std::vector<DomainStream>& streams,
                             const FeaturizeOptions& options, FeaturizeReport* report) {
  options.meta.validate();
  const auto n = static_cast<std::size_t>(options.meta.window_size);

  struct Job {
    std::size_t stream;
    std::size_t window;
  };
  std::vector<Job> jobs;
  FeaturizeReport local;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    const std::size_t count = streams[s].queries.size() / n;
    for (std::size_t w = 0; w < count; ++w) jobs.push_back({s, w});
    StreamWindowCount c{streams[s].key.to_string(), streams[s].queries.size(), count,
                        streams[s].queries.size() - count * n};
    local.windows += c.windows;
    local.discarded += c.discarded;
    local.streams.push_back(std::move(c));
  }

  FeatureSet set;
  set.meta = options.meta;
  set.rows.resize(jobs.size());
  parallel_for(jobs.size(), options.workers, [&](std::size_t j) {
    const auto& stream = streams[jobs[j].stream];
    Window window;
    window.key = stream.key;
    window.index = jobs[j].window;
    window.queries = std::span<const CleanQuery>(stream.queries).subspan(jobs[j].window * n, n);
    window.digests.reserve(n);
    for (const auto& q : window.queries) {
      window.digests.push_back(digest_query(q.subdomain_clean, options.meta.hash));
    }
    FeatureRow& row = set.rows[j];
    row.key = window.key;
    row.window_index = window.index;
    row.values = featurize_window(window, options.meta).values;
    if (options.labeled) row.label = label_window(window.queries);
  });

  if (report) {
    report->streams = std::move(local.streams);
    report->windows = local.windows;
    report->discarded = local.discarded;
  }
  return set;
}

FeatureSet featurize_records(const std::vector<DnsQueryRecord>& records, const SuffixRules& rules,
                             const FeaturizeOptions& options, FeaturizeReport* report) {
  options.meta.validate();
  const auto grouped = group_by_domain(records, rules, options.meta.hash.delimiters);
  auto set = featurize_streams(grouped.streams, options, report);
  if (report) report->excluded = grouped.excluded.size();
  return set;
}

TaskDataset task_dataset(const FeatureSet& set, Task task) {
  TaskDataset ds;
  std::vector<std::optional<std::string>> labels;
  labels.reserve(set.rows.size());
  for (const auto& row : set.rows) {
    if (!row.label) {
      throw DataError("window " + row.key.to_string() + "#" + std::to_string(row.window_index) +
                      " has no label");
    }
    labels.push_back(task_label(*row.label, task));
  }
  for (std::size_t i = 0; i < set.rows.size(); ++i) {
    if (!labels[i]) continue;
    ds.x.push_row(set.rows[i].values);
    ds.y.push_back(*labels[i]);
    ds.rows.push_back(i);
  }
  return ds;
}

FeatureSet subset(const FeatureSet& set, std::span<const std::size_t> rows) {
  FeatureSet out;
  out.meta = set.meta;
  out.config_json = set.config_json;
  out.rows.reserve(rows.size());
  for (auto r : rows) out.rows.push_back(set.rows.at(r));
  return out;
}

ForestModel train_task_model(const FeatureSet& set, Task task, const ForestParams& params,
                             std::uint64_t seed, unsigned workers, const std::string& config_json) {
  auto ds = task_dataset(set, task);
  for (const auto& y : ds.y) {
    if (!is_task_label(task, y)) {
      throw DataError("label '" + y + "' is not a " + to_string(task) + " class");
    }
  }
  TrainOptions opts;
  opts.workers = workers;
  auto model = train_forest(ds.x, ds.y, params, seed, opts);
  model.task = task;
  model.featurization = set.meta;
  model.config_json = config_json;
  return model;
}

void supplement_benign(FeatureSet& set, const FeatureSet& pool, std::uint64_t seed) {
  if (auto why = describe_mismatch(set.meta, pool.meta); !why.empty()) {
    throw MetadataMismatch("benign pool mismatch: " + why);
  }
  std::size_t malicious = 0;
  for (const auto& r : set.rows) {
    if (r.label && r.label->binary != kLegitimate) ++malicious;
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool.rows.size(); ++i) {
    if (pool.rows[i].label && pool.rows[i].label->binary == kLegitimate) candidates.push_back(i);
  }
  Rng rng = make_rng(seed, 0xBE9);
  shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(std::min(candidates.size(), malicious));
  std::sort(candidates.begin(), candidates.end());
  for (auto i : candidates) set.rows.push_back(pool.rows[i]);
}

}  // namespace dnslsh
