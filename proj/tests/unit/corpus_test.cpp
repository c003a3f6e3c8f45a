#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hypersumm/corpus.hpp"
#include "oracles.hpp"

using namespace hypersumm;

namespace {

std::string record(const std::string& id, int idx, const std::string& text = "t",
                   const std::string& role = "other") {
  return R"({"interview_id":")" + id + R"(","turn_index":)" + std::to_string(idx) +
         R"(,"speaker":"S","role":")" + role + R"(","text":")" + text + R"(","lang":"en","tags":[]})";
}

template <typename Fn>
std::string error_of(Fn fn) {
  try {
    fn();
  } catch (const CorpusError& e) {
    return e.what();
  }
  return "";
}

Corpus random_corpus(std::mt19937_64& rng) {
  Corpus c;
  const std::size_t n = rng() % 5;
  for (std::size_t d = 0; d < n; ++d) {
    auto dlg = oracle::random_dialogue(rng, "D" + std::to_string(d), 1, 8);
    for (auto& t : dlg.turns) {
      if (rng() % 3 == 0) t.tags.insert("tag" + std::to_string(rng() % 4));
      if (rng() % 4 == 0) t.extra["note"] = "n" + std::to_string(rng() % 10);
      if (rng() % 5 == 0) t.text += " ünïcödé \"quoted\" \\ tab\t";
    }
    c.dialogues.push_back(std::move(dlg));
  }
  return c;
}

}  // namespace

TEST(ParseCorpus, TwoLinesOneDialogue) {
  const auto c = parse_corpus(record("I1", 0) + "\n" + record("I1", 1) + "\n");
  ASSERT_EQ(c.dialogues.size(), 1u);
  EXPECT_EQ(c.dialogues[0].interview_id, "I1");
  EXPECT_EQ(c.dialogues[0].turns.size(), 2u);
}

TEST(ParseCorpus, EmptyStreamGivesEmptyCorpus) {
  EXPECT_TRUE(parse_corpus("").dialogues.empty());
  EXPECT_TRUE(parse_corpus("\n  \n").dialogues.empty());
}

TEST(ParseCorpus, NonContiguousIndicesRejected) {
  const auto msg = error_of([] { parse_corpus(record("I1", 0) + "\n" + record("I1", 2) + "\n"); });
  EXPECT_NE(msg.find("non-contiguous turn_index at I1"), std::string::npos) << msg;
}

TEST(ParseCorpus, IndicesNotStartingAtZeroRejected) {
  const auto msg = error_of([] { parse_corpus(record("I1", 1) + "\n"); });
  EXPECT_NE(msg.find("non-contiguous turn_index at I1"), std::string::npos) << msg;
}

TEST(ParseCorpus, DuplicateTurnNamesThePair) {
  const auto msg = error_of([] { parse_corpus(record("I1", 0) + "\n" + record("I1", 0) + "\n"); });
  EXPECT_NE(msg.find("duplicate turn (I1, 0)"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(ParseCorpus, OutOfOrderRecordsAreSortedAndGrouped) {
  const auto c = parse_corpus(record("B", 1, "b1") + "\n" + record("A", 0, "a0") + "\n" + record("B", 0, "b0"));
  ASSERT_EQ(c.dialogues.size(), 2u);
  EXPECT_EQ(c.dialogues[0].interview_id, "A");
  EXPECT_EQ(c.dialogues[1].turns[0].text, "b0");
  EXPECT_EQ(c.dialogues[1].turns[1].text, "b1");
  EXPECT_EQ(c.find("B"), &c.dialogues[1]);
  EXPECT_EQ(c.find("C"), nullptr);
  EXPECT_EQ(c.turn_count(), 3u);
}

TEST(ParseCorpus, EveryRejectionCarriesALineNumber) {
  const std::vector<std::pair<std::string, std::string>> bad = {
      {"{not json", "malformed"},
      {"[1,2]", "not a JSON object"},
      {R"({"turn_index":0,"speaker":"S","text":"x"})", "interview_id"},
      {R"({"interview_id":"I","speaker":"S","text":"x"})", "turn_index"},
      {R"({"interview_id":"I","turn_index":-1,"speaker":"S","text":"x"})", "negative"},
      {R"({"interview_id":"I","turn_index":"0","speaker":"S","text":"x"})", "turn_index"},
      {R"({"interview_id":"I","turn_index":0,"text":"x"})", "speaker"},
      {R"({"interview_id":"I","turn_index":0,"speaker":"S"})", "text"},
      {R"({"interview_id":"I","turn_index":0,"speaker":"S","text":"x","role":"boss"})", "unknown role"},
      {R"({"interview_id":"I","turn_index":0,"speaker":"S","text":"x","tags":"a"})", "tags"},
      {R"({"interview_id":"I","turn_index":0,"speaker":"S","text":"x","tags":[1]})", "tags"},
      {R"({"interview_id":"I","turn_index":0,"speaker":"S","text":"x","lang":3})", "lang"},
  };
  for (const auto& [line, needle] : bad) {
    const std::string input = record("OK", 0) + "\n\n" + line + "\n";
    try {
      parse_corpus(input);
      ADD_FAILURE() << "accepted: " << line;
    } catch (const CorpusError& e) {
      EXPECT_EQ(e.line(), 3u) << line;
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  }
}

TEST(ParseCorpus, DefaultsWhenOptionalFieldsAbsent) {
  const auto c = parse_corpus(R"({"interview_id":"I","turn_index":0,"speaker":"S","text":"x"})");
  const Turn& t = c.dialogues.at(0).turns.at(0);
  EXPECT_EQ(t.role, Role::other);
  EXPECT_EQ(t.lang, "und");
  EXPECT_TRUE(t.tags.empty());
}

TEST(ParseCorpus, UnknownFieldsSurviveRoundTrip) {
  const std::string line =
      R"({"interview_id":"I","turn_index":0,"speaker":"S","role":"question","text":"x","lang":"en","tags":["a"],"zeta":{"k":[1,2]},"alpha":true})";
  const auto c = parse_corpus(line);
  EXPECT_EQ(c.dialogues[0].turns[0].extra.size(), 2u);
  const auto again = parse_corpus(serialize_corpus(c));
  EXPECT_EQ(again, c);
  EXPECT_NE(serialize_corpus(c).find(R"("zeta":{"k":[1,2]})"), std::string::npos);
}

TEST(ParseCorpus, CrlfLineEndingsAccepted) {
  const auto c = parse_corpus(record("I1", 0) + "\r\n" + record("I1", 1) + "\r\n");
  EXPECT_EQ(c.turn_count(), 2u);
}

TEST(SerializeCorpus, EmptyCorpusGivesEmptyOutput) { EXPECT_EQ(serialize_corpus(Corpus{}), ""); }

TEST(SerializeCorpus, OneDialogueInIndexOrder) {
  const auto c = parse_corpus(record("I1", 2, "c") + "\n" + record("I1", 0, "a") + "\n" + record("I1", 1, "b"));
  const std::string out = serialize_corpus(c);
  std::istringstream in(out);
  std::string line;
  std::vector<std::size_t> indices;
  while (std::getline(in, line)) indices.push_back(json::parse(line).at("turn_index").get<std::size_t>());
  EXPECT_EQ(indices, (std::vector<std::size_t>{0, 1, 2}));
  // schema field order
  EXPECT_EQ(out.rfind(R"({"interview_id":"I1","turn_index":0,"speaker":"S","role":"other","text":"a")", 0), 0u);
}

TEST(SerializeCorpus, RoundTripPropertyOnRandomCorpora) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const Corpus c = random_corpus(rng);
    const std::string once = serialize_corpus(c);
    const Corpus back = parse_corpus(once);
    ASSERT_EQ(back, c) << once;
    ASSERT_EQ(serialize_corpus(back), once);
  }
}

TEST(SerializeCorpus, OutputSortedByIdThenIndex) {
  std::mt19937_64 rng(11);
  const Corpus c = random_corpus(rng);
  std::istringstream in(serialize_corpus(c));
  std::string line;
  std::vector<std::pair<std::string, std::size_t>> keys;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    keys.emplace_back(j.at("interview_id").get<std::string>(), j.at("turn_index").get<std::size_t>());
  }
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST(ValidateDialogue, RejectsBrokenInvariants) {
  Dialogue d;
  d.interview_id = "X";
  EXPECT_THROW(validate_dialogue(d), CorpusError);
  Turn t;
  t.interview_id = "X";
  t.speaker = "S";
  d.turns = {t};
  EXPECT_NO_THROW(validate_dialogue(d));
  d.turns[0].turn_index = 1;
  EXPECT_THROW(validate_dialogue(d), CorpusError);
  d.turns[0].turn_index = 0;
  d.turns[0].interview_id = "Y";
  EXPECT_THROW(validate_dialogue(d), CorpusError);
}

TEST(Summaries, ParseAndSerialize) {
  const std::string text = R"({"dialogue_id":"I1","summary":"s one"})"
                           "\n\n"
                           R"({"dialogue_id":"I2","summary":"s two"})"
                           "\n";
  const auto recs = parse_summaries(text);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].dialogue_id, "I2");
  EXPECT_EQ(recs[1].line, 3u);
  EXPECT_EQ(parse_summaries(serialize_summaries(recs)).size(), 2u);
}

TEST(Summaries, RejectionsCarryLineNumbers) {
  for (const std::string bad : {"{", R"({"dialogue_id":"I1"})", R"({"dialogue_id":"","summary":"x"})",
                                R"({"dialogue_id":"I1","summary":""})"}) {
    try {
      parse_summaries(std::string(R"({"dialogue_id":"ok","summary":"ok"})") + "\n" + bad);
      ADD_FAILURE() << bad;
    } catch (const CorpusError& e) {
      EXPECT_EQ(e.line(), 2u) << bad;
    }
  }
}
