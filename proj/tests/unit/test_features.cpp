#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <regex>

#include "dnslsh/error.hpp"
#include "dnslsh/feature_io.hpp"
#include "dnslsh/features.hpp"
#include "dnslsh/labels.hpp"
#include "dnslsh/pipeline.hpp"
#include "dnslsh/rolling.hpp"
#include "dnslsh/synth.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace dnslsh;

namespace {

CleanQuery query(std::string sub, std::optional<std::string> family = kLegitimate,
                 std::optional<std::string> behavior = std::nullopt) {
  CleanQuery q;
  q.record.qname = sub + ".example.com";
  q.record.qtype = "A";
  q.record.family_label = std::move(family);
  q.record.behavior_label = std::move(behavior);
  q.record.source = "t";
  q.registered_domain = "example.com";
  q.subdomain_clean = std::move(sub);
  return q;
}

DomainStream random_stream(std::mt19937_64& rng, std::size_t length) {
  DomainStream s;
  s.key = {"t", "example.com"};
  for (std::size_t i = 0; i < length; ++i) {
    // Mix of repeats and fresh strings so scores spread over the range.
    if (i > 0 && rng() % 3 == 0) {
      s.queries.push_back(s.queries[rng() % i]);
    } else {
      s.queries.push_back(query(oracle::random_string(rng, oracle::kBase32, 4 + rng() % 40)));
    }
  }
  return s;
}

void expect_stats(const StatsBlock& got, const oracle::Stats& want, double tol) {
  EXPECT_NEAR(got[0], want.mean, tol);
  EXPECT_NEAR(got[1], want.median, tol);
  EXPECT_NEAR(got[2], want.q1, tol);
  EXPECT_NEAR(got[3], want.q3, tol);
  EXPECT_NEAR(got[4], want.variance, tol);
  EXPECT_NEAR(got[5], want.min, tol);
  EXPECT_NEAR(got[6], want.max, tol);
  EXPECT_NEAR(got[7], want.range, tol);
}

}  // namespace

TEST(Windows, FloorArithmetic) {
  std::mt19937_64 rng(21);
  const auto s45 = random_stream(rng, 45);
  const auto w = make_windows(s45, 20, HashConfig{});
  ASSERT_EQ(w.windows.size(), 2U);
  EXPECT_EQ(w.discarded, 5U);
  EXPECT_EQ(w.windows[1].index, 1U);
  EXPECT_EQ(w.windows[1].queries.data(), s45.queries.data() + 20);
  EXPECT_EQ(w.windows[1].digests.size(), 20U);
  const auto s19 = random_stream(rng, 19);
  EXPECT_TRUE(make_windows(s19, 20, HashConfig{}).windows.empty());
  EXPECT_EQ(make_windows(s19, 20, HashConfig{}).discarded, 19U);
  EXPECT_THROW(make_windows(s19, 1, HashConfig{}), std::invalid_argument);
}

TEST(PairwiseScores, CountLaw) {
  std::mt19937_64 rng(22);
  for (int n = 2; n <= 50; ++n) {
    const auto s = random_stream(rng, static_cast<std::size_t>(n));
    const auto w = make_windows(s, n, HashConfig{});
    ASSERT_EQ(w.windows.size(), 1U);
    for (std::size_t slot = 0; slot < 3; ++slot) {
      EXPECT_EQ(pairwise_scores(w.windows[0], slot).size(), static_cast<std::size_t>(n * (n - 1) / 2));
    }
  }
}

TEST(PairwiseScores, IdenticalAndBadSlot) {
  DomainStream s{{"t", "example.com"}, std::vector<CleanQuery>(20, query("keepalive0"))};
  const auto w = make_windows(s, 20, HashConfig{});
  const auto scores = pairwise_scores(w.windows[0], 0);
  EXPECT_EQ(scores.size(), 190U);
  EXPECT_TRUE(std::all_of(scores.begin(), scores.end(), [](int v) { return v == 128; }));
  EXPECT_THROW(pairwise_scores(w.windows[0], 3), std::invalid_argument);
}

TEST(PairwiseScores, NestedLoopOracle) {
  std::mt19937_64 rng(23);
  const auto s = random_stream(rng, 10);
  const auto w = make_windows(s, 10, HashConfig{});
  for (std::size_t slot = 0; slot < 3; ++slot) {
    std::vector<int> want;
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = i + 1; j < 10; ++j) {
        const auto& qi = s.queries[i].subdomain_clean;
        const auto& qj = s.queries[j].subdomain_clean;
        std::string a = qi, b = qj;
        if (slot > 0) {
          auto piece = [&](const std::string& x) {
            const std::size_t half = (x.size() + 1) / 2;
            return slot == 1 ? x.substr(0, half) : x.substr(half);
          };
          a = piece(qi);
          b = piece(qj);
        }
        want.push_back(oracle::compare_hex(oracle::digest_hex(a, true), oracle::digest_hex(b, true)));
      }
    }
    EXPECT_EQ(pairwise_scores(w.windows[0], slot), want);
  }
}

TEST(Stats, Examples) {
  const std::vector<int> constant = {5, 5, 5, 5};
  EXPECT_EQ(stats_block(constant), (StatsBlock{5, 5, 5, 5, 0, 5, 5, 0}));
  const std::vector<int> ramp = {1, 2, 3, 4};
  const auto r = stats_block(ramp);
  EXPECT_DOUBLE_EQ(r[0], 2.5);
  EXPECT_DOUBLE_EQ(r[1], 2.5);
  EXPECT_DOUBLE_EQ(r[2], 1.75);
  EXPECT_DOUBLE_EQ(r[3], 3.25);
  EXPECT_DOUBLE_EQ(r[4], 1.25);
  EXPECT_DOUBLE_EQ(r[5], 1);
  EXPECT_DOUBLE_EQ(r[6], 4);
  EXPECT_DOUBLE_EQ(r[7], 3);
  const std::vector<int> single = {-7};
  EXPECT_EQ(stats_block(single), (StatsBlock{-7, -7, -7, -7, 0, -7, -7, 0}));
  EXPECT_THROW(stats_block(std::vector<int>{}), std::invalid_argument);
}

TEST(Stats, RandomListsMatchOracle) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 500; ++i) {
    std::vector<int> v(1 + rng() % 1225);
    for (auto& x : v) x = static_cast<int>(rng() % 257) - 128;
    const auto got = stats_block(v);
    expect_stats(got, oracle::stats(v), 1e-9);
    EXPECT_LE(got[5], got[2]);
    EXPECT_LE(got[2], got[1]);
    EXPECT_LE(got[1], got[3]);
    EXPECT_LE(got[3], got[6]);
    EXPECT_EQ(got[7], got[6] - got[5]);
  }
}

TEST(Featurize, LengthAndIdenticalBlock) {
  std::mt19937_64 rng(25);
  FeatureMetadata meta;
  meta.window_size = 5;
  const auto s = random_stream(rng, 5);
  const auto w = make_windows(s, 5, meta.hash);
  EXPECT_EQ(featurize_window(w.windows[0], meta).values.size(), 24U);

  meta.window_size = 20;
  DomainStream same{{"t", "example.com"}, std::vector<CleanQuery>(20, query("Zm9vYmFyYmF6cXV4"))};
  const auto v = featurize_window(make_windows(same, 20, meta.hash).windows[0], meta);
  for (std::size_t slot = 0; slot < 3; ++slot) {
    const std::vector<double> block(v.values.begin() + static_cast<long>(8 * slot),
                                    v.values.begin() + static_cast<long>(8 * slot + 8));
    EXPECT_EQ(block, (std::vector<double>{128, 128, 128, 128, 0, 128, 128, 0}));
  }
}

TEST(Featurize, ComposesOracles) {
  std::mt19937_64 rng(26);
  FeatureMetadata meta;
  meta.window_size = 8;
  meta.hash.segment_count = 3;
  const auto s = random_stream(rng, 8);
  const auto w = make_windows(s, 8, meta.hash);
  const auto v = featurize_window(w.windows[0], meta);
  ASSERT_EQ(v.values.size(), 32U);
  EXPECT_EQ(v.key.to_string(), "t|example.com");
  for (std::size_t slot = 0; slot < 4; ++slot) {
    const auto scores = pairwise_scores(w.windows[0], slot);
    const auto want = oracle::stats(scores);
    StatsBlock got;
    std::copy_n(v.values.begin() + static_cast<long>(8 * slot), 8, got.begin());
    expect_stats(got, want, 1e-12);
  }
}

TEST(Featurize, PermutationInvariant) {
  std::mt19937_64 rng(27);
  FeatureMetadata meta;
  auto s = random_stream(rng, 20);
  const auto a = featurize_window(make_windows(s, 20, meta.hash).windows[0], meta);
  std::reverse(s.queries.begin(), s.queries.end());
  const auto b = featurize_window(make_windows(s, 20, meta.hash).windows[0], meta);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
}

TEST(Metadata, ValidateAndDescribe) {
  FeatureMetadata m;
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.dimension(), 24U);
  m.window_size = 1;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.window_size = 1001;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  FeatureMetadata a, b;
  EXPECT_EQ(describe_mismatch(a, b), "");
  b.hash.segment_count = 3;
  EXPECT_NE(describe_mismatch(a, b).find("segment count"), std::string::npos);
  EXPECT_EQ(metadata_from_json(metadata_to_json(b)), b);
}

TEST(Labels, Examples) {
  std::vector<CleanQuery> all(20, query("x", "iodine", "download"));
  auto l = label_window(all);
  EXPECT_EQ(l.family, "iodine");
  EXPECT_EQ(l.binary, kMalicious);
  EXPECT_EQ(l.behavior, "download");
  EXPECT_EQ(l.compound(), "Iodine_Download");

  std::vector<CleanQuery> mixed(11, query("x"));
  for (int i = 0; i < 9; ++i) mixed.push_back(query("y", "iodine", "upload"));
  l = label_window(mixed);
  EXPECT_EQ(l.family, kLegitimate);
  EXPECT_EQ(l.binary, kLegitimate);
  EXPECT_FALSE(l.behavior.has_value());
  EXPECT_FALSE(l.compound().has_value());

  mixed.erase(mixed.begin());
  mixed.push_back(query("y", "iodine", "idle"));
  l = label_window(mixed);
  EXPECT_EQ(l.family, "iodine");
  EXPECT_EQ(l.behavior, "upload");
}

TEST(Labels, TieRuleTable) {
  // (family counts) -> expected winner, derived from the stated rule order.
  struct Case {
    std::vector<std::pair<std::string, int>> counts;
    std::string winner;
  };
  const std::vector<Case> cases = {
      {{{"legitimate", 10}, {"iodine", 10}}, "iodine"},
      {{{"iodine", 10}, {"dnscat2", 10}}, "dnscat2"},
      {{{"legitimate", 8}, {"iodine", 6}, {"dnscat2", 6}}, "legitimate"},
      {{{"legitimate", 6}, {"iodine", 7}, {"tuns", 7}}, "iodine"},
      {{{"legitimate", 14}, {"tuns", 6}}, "legitimate"},
  };
  for (const auto& c : cases) {
    std::vector<CleanQuery> q;
    for (const auto& [family, n] : c.counts) {
      for (int i = 0; i < n; ++i) q.push_back(query("x", family));
    }
    EXPECT_EQ(label_window(q).family, c.winner);
  }
  std::vector<CleanQuery> behaviors;
  for (int i = 0; i < 5; ++i) behaviors.push_back(query("x", "iodine", "upload"));
  for (int i = 0; i < 5; ++i) behaviors.push_back(query("x", "iodine", "download"));
  EXPECT_EQ(label_window(behaviors).behavior, "download");
}

TEST(Labels, UnlabeledQueryIsAnError) {
  std::vector<CleanQuery> q(3, query("x"));
  q[1].record.family_label.reset();
  EXPECT_THROW(label_window(q), DataError);
}

TEST(Labels, TaskLabels) {
  const WindowLabel legit{kLegitimate, kLegitimate, std::nullopt};
  const WindowLabel dl{kMalicious, "iodine", "download"};
  const WindowLabel hs{kMalicious, "iodine", "handshake"};
  const WindowLabel none{kMalicious, "iodine", std::nullopt};
  EXPECT_EQ(task_label(legit, Task::Binary), kLegitimate);
  EXPECT_EQ(task_label(dl, Task::Binary), kMalicious);
  EXPECT_EQ(task_label(dl, Task::Family), "iodine");
  EXPECT_EQ(task_label(dl, Task::BehaviorCompound), "Iodine_Download");
  EXPECT_EQ(task_label(dl, Task::BehaviorAction), "download");
  EXPECT_EQ(task_label(legit, Task::BehaviorAction), kLegitimate);
  EXPECT_EQ(task_label(legit, Task::BehaviorCompound), kLegitimate);
  EXPECT_FALSE(task_label(hs, Task::BehaviorAction).has_value());
  EXPECT_FALSE(task_label(none, Task::BehaviorCompound).has_value());
  EXPECT_EQ(default_segment_count(Task::Binary), 2);
  EXPECT_EQ(default_segment_count(Task::BehaviorAction), 3);
  EXPECT_EQ(task_from_string("behavior-compound"), Task::BehaviorCompound);
  EXPECT_THROW(task_from_string("nope"), std::invalid_argument);
  EXPECT_TRUE(is_task_label(Task::Family, "iodine"));
  EXPECT_FALSE(is_task_label(Task::Family, "notafamily"));
  std::vector<std::string> classes = {"legitimate", "upload", "download", "idle"};
  sort_classes(classes);
  EXPECT_EQ(classes, (std::vector<std::string>{"download", "idle", "upload", "legitimate"}));
}

TEST(Rolling, WarmUpAndFirstVector) {
  std::mt19937_64 rng(28);
  FeatureMetadata meta;
  meta.window_size = 5;
  const auto s = random_stream(rng, 5);
  RollingState state(meta);
  std::vector<QueryDigests> digests;
  for (std::size_t i = 0; i < 5; ++i) {
    digests.push_back(digest_query(s.queries[i].subdomain_clean, meta.hash));
    const auto out = state.update(digests.back());
    if (i < 4) {
      EXPECT_FALSE(out.has_value());
    } else {
      ASSERT_TRUE(out.has_value());
      EXPECT_EQ(*out, featurize_digests(digests, meta));
    }
  }
  QueryDigests wrong;
  wrong.slots.resize(2);
  EXPECT_THROW(state.update(wrong), std::invalid_argument);
}

TEST(Rolling, MatchesBatchEveryStep) {
  std::mt19937_64 rng(29);
  for (int n : {5, 20}) {
    for (int stream = 0; stream < 10; ++stream) {
      FeatureMetadata meta;
      meta.window_size = n;
      meta.hash.segment_count = stream % 2 ? 3 : 2;
      const auto s = random_stream(rng, 200);
      std::vector<QueryDigests> digests;
      for (const auto& q : s.queries) digests.push_back(digest_query(q.subdomain_clean, meta.hash));
      RollingState state(meta);
      for (std::size_t i = 0; i < digests.size(); ++i) {
        const auto calls_before = state.compare_calls();
        const auto out = state.update(digests[i]);
        const std::size_t filled = std::min<std::size_t>(i, static_cast<std::size_t>(n - 1));
        EXPECT_EQ(state.compare_calls() - calls_before, filled * meta.slot_count());
        if (i + 1 < static_cast<std::size_t>(n)) {
          ASSERT_FALSE(out.has_value());
          continue;
        }
        ASSERT_TRUE(out.has_value());
        const std::span<const QueryDigests> slice(digests.data() + i + 1 - static_cast<std::size_t>(n),
                                                  static_cast<std::size_t>(n));
        EXPECT_EQ(state.active_scores(), static_cast<std::size_t>(n * (n - 1) / 2));
        for (std::size_t slot = 0; slot < meta.slot_count(); ++slot) {
          auto want = pairwise_scores(slice, slot);
          std::sort(want.begin(), want.end());
          ASSERT_EQ(state.active_score_multiset(slot), want);
        }
        const auto batch = featurize_digests(slice, meta);
        ASSERT_EQ(out->size(), batch.size());
        for (std::size_t d = 0; d < batch.size(); ++d) ASSERT_NEAR((*out)[d], batch[d], 1e-12);
      }
    }
  }
}

TEST(FeatureFile, RoundTripAndErrors) {
  const auto records = generate_corpus(300, 300, 5, 4);
  FeaturizeOptions options;
  FeaturizeReport report;
  const auto set = featurize_records(records, SuffixRules::bundled(), options, &report);
  ASSERT_FALSE(set.rows.empty());
  EXPECT_EQ(report.windows, set.rows.size());

  TempDir dir;
  const auto path = dir / "f.csv";
  write_feature_file(set, path);
  const auto back = read_feature_file(path);
  EXPECT_EQ(back.meta, set.meta);
  EXPECT_EQ(back.rows, set.rows);

  write_feature_file(back, dir / "g.csv");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(path), slurp(dir / "g.csv"));

  std::filesystem::remove(metadata_path(dir / "g.csv"));
  EXPECT_THROW(read_feature_file(dir / "g.csv"), IoError);

  auto meta_text = slurp(metadata_path(path));
  meta_text = std::regex_replace(meta_text, std::regex(R"("format_version":\s*1)"), R"("format_version": 9)");
  std::ofstream(metadata_path(path)) << meta_text;
  EXPECT_THROW(read_feature_file(path), FormatVersionError);
}

TEST(Pipeline, WorkerCountIndependent) {
  const auto records = generate_corpus(800, 800, 9, 4);
  FeaturizeOptions one;
  one.workers = 1;
  FeaturizeOptions many;
  many.workers = 4;
  const auto a = featurize_records(records, SuffixRules::bundled(), one);
  const auto b = featurize_records(records, SuffixRules::bundled(), many);
  EXPECT_EQ(a.rows, b.rows);
}

TEST(Pipeline, BenignRepetitiveIsMoreSimilarThanUpload) {
  FeatureMetadata meta;
  auto mean_similarity = [&](SynthKind kind, std::uint64_t seed) {
    auto p = default_profile(kind, "example.com", 20, seed);
    const auto records = generate(p);
    FeaturizeOptions options;
    options.meta = meta;
    const auto set = featurize_records(records, SuffixRules::bundled(), options);
    return set.rows.at(0).values[0];
  };
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    wins += mean_similarity(SynthKind::BenignStatic, seed) > mean_similarity(SynthKind::TunnelUpload, seed);
  }
  EXPECT_GE(wins, 198);
}
