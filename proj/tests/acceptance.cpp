// Copyright 2026 The dsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS/FAIL line per criterion, exits non-zero
// if any fails. Everything runs offline against the mock backends.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "dsynth/audio.hpp"
#include "dsynth/cli.hpp"
#include "dsynth/dataset.hpp"
#include "dsynth/evaluation.hpp"
#include "dsynth/io.hpp"
#include "dsynth/mock_backends.hpp"
#include "dsynth/orchestrator.hpp"
#include "dsynth/rng.hpp"
#include "dsynth/script.hpp"
#include "dsynth/serialization.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace dsynth;
using nlohmann::json;

namespace {

// Pinned tolerances and sizes.
constexpr double kTimeLimitSeconds = 60.0;
constexpr std::size_t kDialogues = 30;
constexpr std::uint64_t kSeed = 42;
constexpr int kGrammarCases = 1000;
constexpr int kAudioCases = 100;
constexpr std::size_t kOracleMaxLength = 6;
constexpr int kOracleAlphabet = 3;
constexpr int kPreferenceDecimals = 2;

const fs::path kSourceDir = DSYNTH_SOURCE_DIR;
const fs::path kPoolPath = kSourceDir / "data/pool/pool.json";

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;  // printed indented under the verdict
};

// Collects the first few failure messages of a criterion.
struct Checks {
  std::size_t failures = 0;
  std::vector<std::string> first;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures;
    if (first.size() < 5) first.push_back(what);
  }
  Outcome outcome(std::string detail) const {
    Outcome o{failures == 0, std::move(detail), {}};
    for (const auto& f : first) o.notes.push_back("failed: " + f);
    return o;
  }
};

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dsynth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

PipelineConfig mock_config(int loops) {
  PipelineConfig c;
  c.variant = PipelineVariant::critic_loop(loops);
  c.retry.base_delay_seconds = 0.0;
  c.retry.sleep = [](double) {};
  return c;
}

struct MockBackends {
  MockWriter writer;
  MockSynthesizer synthesizer;
  MockCritic critic;
  Backends get(WriterBackend* w = nullptr) { return {w ? *w : writer, synthesizer, critic}; }
};

Outcome mock_determinism() {
  testing::TempDir tmp;
  const std::string config = (kSourceDir / "data/configs/critic_t2.json").string();
  const auto run = [&](const std::string& name, const char* parallelism) {
    const std::string out = (tmp / name).string();
    const int code = cli({"--config", config, "--mock", "--seed", std::to_string(kSeed), "--parallelism",
                          parallelism, "--out", out, "generate", "--dialogues", std::to_string(kDialogues)});
    if (code != 0) throw std::runtime_error("generate exited " + std::to_string(code));
    return read_text_file(fs::path(out) / "manifest.jsonl");
  };
  const auto start = std::chrono::steady_clock::now();
  const std::string first = run("a", "1");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string second = run("b", "1");
  const std::string parallel = run("c", "4");

  Checks c;
  c.expect(seconds < kTimeLimitSeconds, "serial run took " + std::to_string(seconds) + " s");
  c.expect(first == second, "manifests differ between identical runs");
  c.expect(first == parallel, "manifests differ between parallelism 1 and 4");
  const auto records = load_corpus(tmp / "a/manifest.jsonl");
  c.expect(records.size() == kDialogues, "manifest has " + std::to_string(records.size()) + " records");
  std::ostringstream d;
  d << kDialogues << " dialogues T=2 in " << std::fixed << std::setprecision(2) << seconds
    << " s; manifests identical across 2 runs and parallelism {1,4} (" << first.size() << " bytes)";
  return c.outcome(d.str());
}

// Batches for T = 0..3 shared by the structure and refinement checks.
const std::map<int, BatchResult>& loop_batches() {
  static const std::map<int, BatchResult> batches = [] {
    const CharacterPool pool = load_pool(kPoolPath);
    std::map<int, BatchResult> out;
    for (int loops = 0; loops <= 3; ++loops) {
      MockBackends mocks;
      out.emplace(loops, run_batch(pool, mock_config(loops), kDialogues, kSeed, 1, mocks.get()));
    }
    return out;
  }();
  return batches;
}

Outcome loop_structure() {
  Checks c;
  std::size_t runs = 0;
  for (const auto& [loops, batch] : loop_batches()) {
    for (const PipelineRun& run : batch.runs) {
      ++runs;
      const std::string who = run.run_id + " T=" + std::to_string(loops);
      c.expect(run.status == RunStatus::kCompleted, who + " did not complete");
      c.expect(run.iterations.size() == static_cast<std::size_t>(loops + 1), who + " iteration count");
      std::size_t syntheses = 0, feedbacks = 0;
      for (std::size_t t = 0; t < run.iterations.size(); ++t) {
        const IterationRecord& rec = run.iterations[t];
        syntheses += rec.synthesis.segments.size() == rec.script.utterances.size();
        feedbacks += rec.feedback.has_value();
        const WriterRequest& req = rec.writer_request;
        if (t == 0) {
          c.expect(!req.prior_script && !req.prior_feedback, who + " t=0 has prior context");
          continue;
        }
        const IterationRecord& prev = run.iterations[t - 1];
        if (!req.prior_script || !req.prior_feedback || !prev.feedback) {
          c.expect(false, who + " t=" + std::to_string(t) + " missing prior context");
          continue;
        }
        c.expect(script_to_json(*req.prior_script) == script_to_json(prev.script),
                 who + " t=" + std::to_string(t) + " prior script differs");
        c.expect(*req.prior_feedback == *prev.feedback, who + " t=" + std::to_string(t) + " prior feedback differs");
        // verbatim in the message actually sent
        const std::string message = req.user_message();
        for (const Utterance& u : prev.script.utterances) {
          c.expect(message.find(u.raw_text) != std::string::npos, who + " message lacks prior utterance");
        }
        for (const UtteranceFeedback& f : prev.feedback->per_utterance) {
          c.expect(message.find(f.suggestion) != std::string::npos, who + " message lacks prior suggestion");
        }
      }
      c.expect(syntheses == run.iterations.size(), who + " synthesis count");
      c.expect(feedbacks == static_cast<std::size_t>(loops), who + " feedback count");
    }
  }
  return c.outcome(std::to_string(runs) + " runs over T in {0,1,2,3}: T+1 scripts and syntheses, T feedbacks, "
                   "requests embed the previous script and feedback");
}

Outcome refinement_effect() {
  Checks c;
  std::map<int, std::pair<std::size_t, std::size_t>> tally;  // loops -> (refined, total)
  std::size_t flagged = 0, flagged_fixed = 0;
  for (const auto& [loops, batch] : loop_batches()) {
    for (const PipelineRun& run : batch.runs) {
      for (std::size_t t = 1; t < run.iterations.size(); ++t) {
        const CritiqueFeedback& fb = *run.iterations[t - 1].feedback;
        for (const Utterance& u : run.iterations[t].script.utterances) {
          if (!fb.flags(u.index)) continue;
          ++flagged;
          flagged_fixed += u.emotion_label.has_value() && u.has_pause();
        }
      }
      for (const Utterance& u : run.final().script.utterances) {
        const bool refined = u.emotion_label.has_value() && u.has_pause();
        const bool untouched = !u.emotion_label && !u.has_pause();
        tally[loops].second += 1;
        tally[loops].first += refined;
        c.expect(loops >= 1 ? refined : untouched, run.run_id + " T=" + std::to_string(loops) +
                                                       " utterance " + std::to_string(u.index));
      }
    }
  }
  c.expect(flagged > 0 && flagged == flagged_fixed, "flagged utterances left unrefined");
  std::ostringstream d;
  d << "labelled+paused final utterances:";
  for (const auto& [loops, t] : tally) d << " T=" << loops << " " << t.first << "/" << t.second;
  d << "; flagged then fixed " << flagged_fixed << "/" << flagged;
  return c.outcome(d.str());
}

Outcome markup_round_trip() {
  Checks c;
  Rng rng(kSeed);
  for (int i = 0; i < kGrammarCases; ++i) {
    const testing::GeneratedUtterance g = testing::generate_utterance(rng);
    const ParsedMarkup canonical = parse_markup(g.canonical);
    c.expect(canonical.segments == g.segments && canonical.emotion_label == g.label, "parse: " + g.canonical);
    c.expect(render_markup(canonical.segments, canonical.emotion_label) == g.canonical, "render: " + g.canonical);
    const ParsedMarkup noisy = parse_markup(g.noisy);
    c.expect(noisy.segments == g.segments && noisy.emotion_label == g.label, "noisy parse: " + g.noisy);
  }
  for (const std::string& row : testing::refined_example_rows()) {
    const ParsedMarkup m = parse_markup(row);
    const std::string rendered = render_markup(m.segments, m.emotion_label);
    const ParsedMarkup again = parse_markup(rendered);
    c.expect(again.segments == m.segments && again.emotion_label == m.emotion_label, "row: " + row);
    c.expect(normalize_markup_whitespace(rendered) == normalize_markup_whitespace(row), "row render: " + row);
  }
  const std::string plain =
      strip_markup(make_utterance("james", testing::refined_example_rows().front(), 0));
  c.expect(plain == testing::kRow1Plain, "row 1 strips to '" + plain + "'");
  return c.outcome(std::to_string(kGrammarCases) + " grammar utterances + " +
                   std::to_string(testing::refined_example_rows().size()) +
                   " refined rows round-trip; row 1 strips exactly");
}

Outcome edit_distance_oracle() {
  std::vector<std::vector<int>> seqs{{}};
  for (std::size_t from = 0; seqs.back().size() < kOracleMaxLength;) {
    const std::size_t to = seqs.size();
    for (std::size_t i = from; i < to; ++i) {
      for (int s = 0; s < kOracleAlphabet; ++s) {
        seqs.push_back(seqs[i]);
        seqs.back().push_back(s);
      }
    }
    from = to;
  }
  Checks c;
  std::size_t pairs = 0;
  for (const auto& a : seqs) {
    for (const auto& b : seqs) {
      ++pairs;
      c.expect(edit_distance<int>(a, b) == testing::edit_distance_oracle(a, b), "oracle mismatch");
    }
  }
  const double wer = error_rate({"the cat sat on the mat", "the cat sit on mat", Language::kEN});
  const double cer = error_rate({"今天天气", "今天天汽", Language::kCN});
  c.expect(wer == 2.0 / 6.0, "WER example = " + std::to_string(wer));
  c.expect(cer == 1.0 / 4.0, "CER example = " + std::to_string(cer));
  return c.outcome(std::to_string(seqs.size()) + " sequences, " + std::to_string(pairs) +
                   " pairs match the oracle; WER 2/6 and CER 1/4 exact");
}

Outcome aggregation() {
  Checks c;
  const AggregateScore two = aggregate(std::vector<double>{3.0, 5.0});
  c.expect(two.mean == 4.0 && two.dispersion == 1.96, "aggregate([3,5])");
  for (double v : {1.0, 2.5, 4.0, 5.0}) {
    c.expect(aggregate(std::vector<double>(7, v)).dispersion == 0.0, "constant sheet dispersion");
  }
  std::vector<PreferenceVote> votes;
  for (int i = 0; i < 33; ++i) {
    votes.push_back({"d" + std::to_string(i), i < 25 ? Preference::kA : Preference::kB});
  }
  const PreferenceTally tally = preference_tally(votes);
  c.expect(round_to(tally.a_percent, kPreferenceDecimals) == 75.76,
           "25 of 33 = " + std::to_string(tally.a_percent));
  std::ostringstream d;
  d << "aggregate([3,5]) = " << two.mean << " ± " << two.dispersion << "; constant sheets 0; 25/33 = "
    << std::fixed << std::setprecision(2) << tally.a_percent << "%";
  return c.outcome(d.str());
}

Outcome audio_arithmetic() {
  Checks c;
  Rng rng(kSeed);
  const int rates[] = {8000, 11025, 16000, 22050, 24000, 44100, 48000};
  for (int k = 0; k < kAudioCases; ++k) {
    const std::size_t n = 1 + rng.below(8);
    const int target = rates[rng.below(std::size(rates))];
    const double gap = static_cast<double>(rng.below(1000)) / 1000.0;
    std::vector<AudioSegment> segs;
    double analytic = gap * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      AudioSegment s;
      s.sample_rate = rates[rng.below(std::size(rates))];
      s.samples.assign(1 + rng.below(30000), 1000);
      analytic += s.duration();
      segs.push_back(std::move(s));
    }
    const DialogueAudio d = assemble_dialogue(segs, gap, target);
    const std::string which = "case " + std::to_string(k);
    c.expect(std::abs(total_duration(d) - analytic) <= static_cast<double>(n) / target, which + " duration");
    c.expect(d.gap_samples == gap_sample_count(gap, target), which + " gap samples");
    c.expect(d.turn_map.size() == n && d.turn_map.back().end_sample == d.waveform.size(), which + " turn map");
    for (std::size_t i = 0; i + 1 < d.turn_map.size(); ++i) {
      c.expect(d.turn_map[i + 1].start_sample - d.turn_map[i].end_sample == d.gap_samples, which + " gap");
    }
  }
  return c.outcome(std::to_string(kAudioCases) +
                   " random segment sets within n sample periods; gaps exact in samples");
}

DialogueRecord stats_fixture(const std::string& id, std::vector<std::string> speakers) {
  DialogueRecord r;
  r.dialogue_id = id;
  r.language = Language::kCN;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    r.utterances.push_back({i, speakers[i], "你好世界", "你好世界", std::nullopt,
                            "audio/" + id + "/utt_" + std::to_string(i) + ".wav", 1.0});
  }
  r.total_duration = static_cast<double>(speakers.size());
  return r;
}

Outcome corpus_statistics() {
  Checks c;
  const std::vector<DialogueRecord> fixture{stats_fixture("a", {"x", "y", "x"}),
                                            stats_fixture("b", {"x", "y", "z", "y", "x"})};
  const LanguageStats cn = compute_stats(fixture).per_language.at(Language::kCN);
  c.expect(cn.utterances_avg == 4.0, "utterances avg " + std::to_string(cn.utterances_avg));
  c.expect(cn.roles_avg == 2.5, "roles avg " + std::to_string(cn.roles_avg));
  Outcome o;
  std::vector<std::string> notes;
  std::string detail = "fixture avg 4.0 utterances, 2.5 roles";
  const char* manifest = std::getenv("DSYNTH_MULTITALK_MANIFEST");
  if (!manifest || !*manifest) {
    notes.push_back("published-corpus comparison skipped: DSYNTH_MULTITALK_MANIFEST not set");
  } else {
    const auto stats = compute_stats(load_corpus(manifest, false));
    for (Language lang : {Language::kCN, Language::kEN}) {
      const std::string name(to_string(lang));
      const auto it = stats.per_language.find(lang);
      if (it == stats.per_language.end()) {
        c.expect(false, "manifest has no " + name + " dialogues");
        continue;
      }
      const LanguageStats& got = it->second;
      const PublishedLanguageStats want = published_multitalk_stats(lang);
      c.expect(got.utterances_total == want.utterances_total, name + " utterances " +
                                                                 std::to_string(got.utterances_total));
      c.expect(got.roles_total == want.roles_total, name + " roles " + std::to_string(got.roles_total));
      std::ostringstream n;
      n << std::fixed << std::setprecision(2) << name << ": utterances " << got.utterances_total << "/"
        << want.utterances_total << ", roles " << got.roles_total << "/" << want.roles_total << ", tokens "
        << got.tokens_total << " (published " << want.tokens_total << "), duration " << got.duration_total
        << " s (published " << want.duration_total << " s)";
      notes.push_back(n.str());
    }
    notes.push_back("token counts follow " + std::string(kNormalizationVersion) +
                    " (EN words, CN characters); the published counting rule is unstated, so tokens "
                    "and durations are reported, not asserted");
    detail += "; supplied manifest checked";
  }
  o = c.outcome(detail);
  o.notes.insert(o.notes.end(), notes.begin(), notes.end());
  return o;
}

Outcome fault_handling() {
  Checks c;
  const CharacterPool pool = load_pool(kPoolPath);
  {
    MockBackends mocks;
    const std::uint64_t seed = derive_run_seed(kSeed, 0);
    FaultInjectingWriter faulty(mocks.writer,
                                FaultPlan{FaultKind::kBackendError, 2, {stream_seed(seed, SeedStream::kWriter)}});
    const PipelineRun run = run_pipeline(pool, mock_config(2), seed, mocks.get(&faulty));
    c.expect(run.status == RunStatus::kCompleted, "run with 2 failures did not complete");
    c.expect(run.iterations.front().write_attempts == 3, "succeeded on attempt " +
                                                             std::to_string(run.iterations.front().write_attempts));
  }
  {
    MockBackends mocks;
    const std::uint64_t target = stream_seed(derive_run_seed(kSeed, 7), SeedStream::kWriter);
    FaultInjectingWriter faulty(mocks.writer, FaultPlan{FaultKind::kBackendError, 3, {target}});
    const BatchResult batch = run_batch(pool, mock_config(2), 10, kSeed, 1, mocks.get(&faulty));
    c.expect(batch.failed_ordinals == std::vector<std::size_t>{7}, "batch failed ordinals");
    c.expect(batch.completed() == 9, "batch completed count");
  }
  testing::TempDir tmp;
  int codes[2] = {};
  for (std::size_t failures : {2, 3}) {
    json config = {{"pool", kPoolPath.string()}, {"dialogues", 3}, {"seed", kSeed}, {"mock", true},
                   {"variant", {{"mode", "critic_loop"}, {"loops", 2}}},
                   {"retry", {{"base_delay_seconds", 0.0}}},
                   {"mock_faults", {{"stage", "writer"}, {"ordinals", {1}}, {"failures", failures}}}};
    const fs::path path = tmp / ("faults" + std::to_string(failures) + ".json");
    write_file_atomic(path, config.dump());
    codes[failures - 2] = cli({"--config", path.string(), "--out", (tmp / std::to_string(failures)).string(),
                               "generate"});
    const auto records = load_corpus(tmp / std::to_string(failures) / "manifest.jsonl");
    c.expect(records.size() == (failures == 2 ? 3u : 2u), "cli corpus size with " + std::to_string(failures));
  }
  c.expect(codes[0] == kExitOk, "cli with 2 failures exited " + std::to_string(codes[0]));
  c.expect(codes[1] == kExitBackend, "cli with 3 failures exited " + std::to_string(codes[1]));
  return c.outcome("2 failures: success on attempt 3; 3 failures: one failed ordinal, exit code " +
                   std::to_string(codes[1]));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"mock end-to-end determinism", mock_determinism},
      {"loop-structure fidelity", loop_structure},
      {"refinement effect under mocks", refinement_effect},
      {"markup round-trip", markup_round_trip},
      {"edit-distance oracle equivalence", edit_distance_oracle},
      {"aggregation closed forms", aggregation},
      {"audio arithmetic", audio_arithmetic},
      {"corpus statistics", corpus_statistics},
      {"fault handling", fault_handling},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what(), {}};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
              << "\n";
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
