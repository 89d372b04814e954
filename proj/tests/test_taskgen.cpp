#include "doctest.h"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "emca/taskgen.hpp"

using namespace emca;

namespace {

// Re-parses a sample from its rendered tokens, checking the mask as it goes:
// eat() asserts the position is unmasked, eat(true) that it is an answer.
struct Cursor {
    std::vector<std::string> words;
    std::vector<uint8_t> mask;
    size_t pos = 0;

    Cursor(TaskId id, const TaskSample& s) : mask(s.mask) {
        const Vocab& v = task_vocab(id);
        for (int t : s.tokens) words.push_back(v.token(t));
        REQUIRE(s.tokens.size() == s.mask.size());
    }
    bool done() const { return pos == words.size(); }
    const std::string& peek() {
        REQUIRE(pos < words.size());
        return words[pos];
    }
    std::string eat(bool masked = false) {
        REQUIRE(pos < words.size());
        CHECK(int(mask[pos]) == (masked ? 1 : 0));
        return words[pos++];
    }
    void expect(const std::string& w) { CHECK(eat() == w); }
};

const std::set<std::string> kAllNames = {"JOHN", "PAUL", "TOM",  "JAMES", "MARY",
                                         "PETER", "ANNA", "LUCY", "MARK",  "SARA",
                                         "DAVID", "EMMA", "FRANK"};
const std::set<std::string> kAllVerbs = {"SEE", "HEAR", "SMELL", "FEEL", "KNOW", "LIKE", "CALL"};
const std::vector<std::string> kCounts = {"ONE", "TWO",   "THREE", "FOUR",  "FIVE",
                                          "SIX", "SEVEN", "EIGHT", "NINE",  "TEN",
                                          "ELEVEN", "TWELVE", "THIRTEEN"};

struct ParsedStatement {
    std::string verb;
    std::set<std::string> pos, neg;
};

// "I [VERB a AND b] [BUT I] DO NOT VERB c AND d ." with either half optional
ParsedStatement parse_statement(Cursor& c) {
    ParsedStatement st;
    c.expect("I");
    if (c.peek() != "DO") {
        st.verb = c.eat();
        REQUIRE(kAllVerbs.count(st.verb) == 1);
        CHECK(st.pos.insert(c.eat()).second);
        while (c.peek() == "AND") {
            c.expect("AND");
            CHECK(st.pos.insert(c.eat()).second);
        }
        if (c.peek() != "BUT") {
            c.expect(".");
            return st;
        }
        c.expect("BUT");
        c.expect("I");
    }
    c.expect("DO");
    c.expect("NOT");
    std::string v2 = c.eat();
    REQUIRE(kAllVerbs.count(v2) == 1);
    if (st.verb.empty())
        st.verb = v2;
    else
        CHECK(v2 == st.verb);
    CHECK(st.neg.insert(c.eat()).second);
    while (c.peek() == "AND") {
        c.expect("AND");
        CHECK(st.neg.insert(c.eat()).second);
    }
    c.expect(".");
    for (const auto& n : st.pos) REQUIRE(kAllNames.count(n) == 1);
    for (const auto& n : st.neg) REQUIRE(kAllNames.count(n) == 1);
    return st;
}

bool check_qa_sample(TaskId id, const TaskSample& s) {
    Cursor c(id, s);
    ParsedStatement st = parse_statement(c);
    size_t mentioned = st.pos.size() + st.neg.size();
    CHECK(mentioned >= 1);
    CHECK(mentioned <= 5);
    c.expect("DO");
    c.expect("I");
    CHECK(c.eat() == st.verb);
    std::string name = c.eat();
    c.expect("?");
    std::string ans = c.eat(true);
    bool is_pos = st.pos.count(name) == 1;
    REQUIRE((is_pos || st.neg.count(name) == 1));
    CHECK(ans == (is_pos ? "YES" : "NO"));
    CHECK(c.done());
    return ans == "YES";
}

void check_world_sample(TaskId id, const TaskSample& s) {
    Cursor c(id, s);
    std::map<std::string, std::map<std::string, bool>> facts;
    int statements = 0;
    while (!c.done() && c.peek() == "I") {
        ParsedStatement st = parse_statement(c);
        CHECK(st.pos.size() + st.neg.size() <= 3);
        for (const auto& n : st.pos) {
            CHECK(facts[st.verb].count(n) == 0);
            facts[st.verb][n] = true;
        }
        for (const auto& n : st.neg) {
            CHECK(facts[st.verb].count(n) == 0);
            facts[st.verb][n] = false;
        }
        ++statements;
    }
    CHECK(statements >= 1);
    CHECK(statements <= 5);
    int questions = 0;
    while (!c.done()) {
        if (c.peek() == "HOW") {
            REQUIRE(id == TaskId::world_count);
            for (const char* w : {"HOW", "MANY", "THINGS", "DO", "I"}) c.expect(w);
            std::string verb = c.eat();
            c.expect("?");
            std::string ans = c.eat(true);
            REQUIRE(facts.count(verb) == 1);
            CHECK(ans == kCounts[facts[verb].size() - 1]);
        } else {
            c.expect("DO");
            c.expect("I");
            std::string verb = c.eat();
            std::string name = c.eat();
            c.expect("?");
            std::string ans = c.eat(true);
            REQUIRE(facts.count(verb) == 1);
            REQUIRE(facts[verb].count(name) == 1);
            CHECK(ans == (facts[verb][name] ? "YES" : "NO"));
        }
        ++questions;
    }
    CHECK(questions >= 1);
    CHECK(questions <= 5);
}

const std::set<std::string> kSizes = {"SMALL", "LARGE", "BIG", "TINY", "HUGE"};
const std::set<std::string> kColors = {"RED", "GREEN", "BLUE", "YELLOW"};
const std::set<std::string> kFruits = {"APPLE", "BANANA", "ORANGE", "PEAR",
                                       "PLUM",  "GRAPE",  "LEMON",  "MELON"};

struct AdjPhrase {
    std::string size, color, object;  // empty string when unstated
};

AdjPhrase parse_phrase(Cursor& c) {
    AdjPhrase ph;
    c.expect("A");
    if (kSizes.count(c.peek())) ph.size = c.eat();
    if (kColors.count(c.peek())) ph.color = c.eat();
    ph.object = c.eat();
    REQUIRE(kFruits.count(ph.object) == 1);
    return ph;
}

struct AdjParsedFact {
    std::string verb;
    AdjPhrase ph;
    bool positive;
};

void check_adjective_sample(TaskId id, const TaskSample& s) {
    Cursor c(id, s);
    std::vector<AdjParsedFact> facts;
    int statements = 0;
    while (!c.done() && c.peek() == "I") {
        c.expect("I");
        facts.push_back({c.eat(), parse_phrase(c), true});
        if (c.peek() == "BUT") {
            for (const char* w : {"BUT", "I", "DO", "NOT"}) c.expect(w);
            facts.push_back({c.eat(), parse_phrase(c), false});
        }
        c.expect(".");
        ++statements;
    }
    CHECK(statements >= 1);
    CHECK(statements <= 6);
    int questions = 0;
    while (!c.done()) {
        std::string head = c.peek();
        if (head == "DO") {
            c.expect("DO");
            c.expect("I");
            std::string verb = c.eat();
            AdjPhrase q = parse_phrase(c);
            c.expect("?");
            std::string ans = c.eat(true);
            bool truth = false;
            for (const auto& f : facts) {
                if (!f.positive || f.verb != verb || f.ph.object != q.object) continue;
                if (!q.size.empty() && f.ph.size != q.size) continue;
                if (!q.color.empty() && f.ph.color != q.color) continue;
                truth = true;
            }
            CHECK(ans == (truth ? "YES" : "NO"));
        } else if (head == "WHAT") {
            for (const char* w : {"WHAT", "IS", "THE"}) c.expect(w);
            std::string attr = c.eat();
            REQUIRE((attr == "COLOR" || attr == "SIZE"));
            for (const char* w : {"OF", "THE"}) c.expect(w);
            std::string obj = c.eat();
            c.expect("I");
            std::string verb = c.eat();
            c.expect("?");
            std::string ans = c.eat(true);
            int stated = 0;
            for (const auto& f : facts) {
                if (!f.positive || f.verb != verb || f.ph.object != obj) continue;
                const std::string& val = attr == "COLOR" ? f.ph.color : f.ph.size;
                if (val.empty()) continue;
                ++stated;
                CHECK(val == ans);
            }
            CHECK(stated >= 1);
        } else {
            REQUIRE(id == TaskId::adjective_qa_count);
            for (const char* w : {"HOW", "MANY", "THINGS", "DO", "I"}) c.expect(w);
            std::string verb = c.eat();
            c.expect("?");
            std::string ans = c.eat(true);
            std::set<std::string> objs;
            for (const auto& f : facts)
                if (f.verb == verb) objs.insert(f.ph.object);
            REQUIRE(!objs.empty());
            CHECK(ans == kCounts[objs.size() - 1]);
        }
        ++questions;
    }
    CHECK(questions >= 1);
    CHECK(questions <= 8);
}

}  // namespace

TEST_CASE("periodic samples repeat their prefix pattern") {
    TaskParams p;
    Rng rng(7);
    for (int it = 0; it < 200; ++it) {
        TaskSample s = generate_sample(TaskId::periodic, p, rng);
        REQUIRE(s.tokens.size() == 36);
        size_t plen = 0;
        while (plen < s.mask.size() && !s.mask[plen]) ++plen;
        REQUIRE(plen >= 1);
        REQUIRE(plen <= 10);
        for (size_t i = 0; i < s.tokens.size(); ++i) {
            CHECK(s.tokens[i] == s.tokens[i % plen]);
            CHECK(int(s.mask[i]) == (i >= plen ? 1 : 0));
        }
    }
}

TEST_CASE("increasing periodic samples stretch each repetition") {
    TaskParams p;
    Rng rng(11);
    for (int it = 0; it < 200; ++it) {
        TaskSample s = generate_sample(TaskId::inc_periodic, p, rng);
        REQUIRE(s.tokens.size() == 36);
        size_t plen = 0;
        while (plen < s.mask.size() && !s.mask[plen]) ++plen;
        REQUIRE(plen >= 1);
        REQUIRE(plen <= 10);
        std::vector<int> expected;
        for (int k = 1; expected.size() < s.tokens.size(); ++k)
            for (size_t j = 0; j < plen && expected.size() < s.tokens.size(); ++j)
                for (int r = 0; r < k && expected.size() < s.tokens.size(); ++r)
                    expected.push_back(s.tokens[j]);
        for (size_t i = 0; i < s.tokens.size(); ++i) {
            CHECK(s.tokens[i] == expected[i]);
            CHECK(int(s.mask[i]) == (i >= plen ? 1 : 0));
        }
    }
}

TEST_CASE("symbol count answers match the prompt") {
    TaskParams p;
    Rng rng(13);
    for (int it = 0; it < 300; ++it) {
        TaskSample s = generate_sample(TaskId::symbol_count, p, rng);
        Cursor c(TaskId::symbol_count, s);
        std::map<std::string, int> counts{{"A", 0}, {"B", 0}, {"C", 0}};
        int prompt = 0;
        while (c.peek() != "x") {
            counts[c.eat()] += 1;
            ++prompt;
        }
        CHECK(prompt >= 1);
        CHECK(prompt <= 10);
        c.expect("x");
        std::set<std::string> queried;
        int nq = 0;
        while (!c.done()) {
            std::string sym = c.eat();
            REQUIRE(counts.count(sym) == 1);
            CHECK(queried.insert(sym).second);
            CHECK(c.eat(true) == std::to_string(counts[sym]));
            ++nq;
        }
        CHECK(nq >= 1);
        CHECK(nq <= 3);
    }
}

TEST_CASE("pattern count answers match the prompt groups") {
    TaskParams p;
    Rng rng(17);
    for (int it = 0; it < 300; ++it) {
        TaskSample s = generate_sample(TaskId::pattern_count, p, rng);
        Cursor c(TaskId::pattern_count, s);
        std::map<std::string, int> counts;
        std::string cur;
        int prompt_tokens = 0;
        while (c.peek() != "x") {
            std::string w = c.eat();
            ++prompt_tokens;
            if (w == "y") {
                REQUIRE(!cur.empty());
                counts[cur] += 1;
                cur.clear();
            } else {
                cur += w;
                REQUIRE(cur.size() <= 3);
            }
        }
        REQUIRE(!cur.empty());
        counts[cur] += 1;
        CHECK(prompt_tokens <= 45);
        c.expect("x");
        std::set<std::string> queried;
        while (!c.done()) {
            std::string g;
            while (c.peek() != "y") g += c.eat();
            c.expect("y");
            CHECK(queried.insert(g).second);
            REQUIRE(counts.count(g) == 1);
            CHECK(c.eat(true) == std::to_string(counts[g]));
        }
        CHECK(!queried.empty());
    }
}

TEST_CASE("qa answers follow the statement") {
    TaskParams p;
    Rng rng(37);
    for (int it = 0; it < 400; ++it)
        check_qa_sample(TaskId::qa, generate_sample(TaskId::qa, p, rng));
    for (int it = 0; it < 400; ++it)
        check_qa_sample(TaskId::qa_wide, generate_sample(TaskId::qa_wide, p, rng));
}

TEST_CASE("qa yes/no answers are balanced") {
    TaskParams p;
    Rng rng(23);
    const int n = 10000;
    int yes = 0;
    const Vocab& v = task_vocab(TaskId::qa);
    int yes_id = v.id("YES");
    for (int i = 0; i < n; ++i) {
        TaskSample s = generate_sample(TaskId::qa, p, rng);
        if (s.tokens.back() == yes_id) ++yes;
    }
    double frac = double(yes) / n;
    CHECK(frac > 0.48);
    CHECK(frac < 0.52);
}

TEST_CASE("world answers follow the statements") {
    TaskParams p;
    Rng rng(41);
    for (int it = 0; it < 300; ++it)
        check_world_sample(TaskId::world, generate_sample(TaskId::world, p, rng));
    for (int it = 0; it < 300; ++it)
        check_world_sample(TaskId::world_count, generate_sample(TaskId::world_count, p, rng));
}

TEST_CASE("adjective answers follow the statements") {
    TaskParams p;
    Rng rng(43);
    for (int it = 0; it < 300; ++it)
        check_adjective_sample(TaskId::adjective_qa,
                               generate_sample(TaskId::adjective_qa, p, rng));
    for (int it = 0; it < 300; ++it)
        check_adjective_sample(TaskId::adjective_qa_count,
                               generate_sample(TaskId::adjective_qa_count, p, rng));
}

TEST_CASE("every sample has at least one scored position") {
    TaskParams p;
    for (int t = 1; t <= kTaskCount; ++t) {
        TaskId id = task_from_index(t);
        Rng rng(100 + t);
        for (int it = 0; it < 50; ++it) {
            TaskSample s = generate_sample(id, p, rng);
            REQUIRE(s.tokens.size() == s.mask.size());
            int scored = 0;
            for (uint8_t m : s.mask) scored += m;
            CHECK(scored >= 1);
        }
    }
}

TEST_CASE("generation is reproducible from the seed") {
    TaskParams p;
    for (int t = 1; t <= kTaskCount; ++t) {
        TaskId id = task_from_index(t);
        auto a = generate(id, p, 20, 99);
        auto b = generate(id, p, 20, 99);
        REQUIRE(a.size() == 20);
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].tokens == b[i].tokens);
            CHECK(a[i].mask == b[i].mask);
        }
        auto other = generate(id, p, 20, 100);
        bool any_diff = false;
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i].tokens != other[i].tokens) any_diff = true;
        CHECK(any_diff);
    }
}

TEST_CASE("vocabularies are deduplicated and round-trip") {
    for (int t = 1; t <= kTaskCount; ++t) {
        const Vocab& v = task_vocab(task_from_index(t));
        std::set<std::string> uniq(v.tokens.begin(), v.tokens.end());
        CHECK(uniq.size() == v.tokens.size());
        for (int i = 0; i < v.size(); ++i) CHECK(v.id(v.token(i)) == i);
    }
    CHECK_THROWS_AS(task_vocab(TaskId::periodic).id("BANANA"), std::out_of_range);
    CHECK_THROWS_AS(task_vocab(TaskId::periodic).token(2), std::out_of_range);
}

TEST_CASE("vocabulary sizes are pinned") {
    CHECK(task_vocab(TaskId::periodic).size() == 2);
    CHECK(task_vocab(TaskId::inc_periodic).size() == 2);
    CHECK(task_vocab(TaskId::symbol_count).size() == 15);
    CHECK(task_vocab(TaskId::pattern_count).size() == 28);
    CHECK(task_vocab(TaskId::qa).size() == 16);
    CHECK(task_vocab(TaskId::qa_wide).size() == 25);
    CHECK(task_vocab(TaskId::world).size() == 29);
    CHECK(task_vocab(TaskId::world_count).size() == 45);
    CHECK(task_vocab(TaskId::adjective_qa).size() == 38);
    CHECK(task_vocab(TaskId::adjective_qa_count).size() == 49);
}

TEST_CASE("encode emits one-hot rows") {
    TaskParams p;
    Rng rng(31);
    TaskSample s = generate_sample(TaskId::symbol_count, p, rng);
    const Vocab& v = task_vocab(TaskId::symbol_count);
    auto rows = encode(s, v);
    REQUIRE(rows.size() == s.tokens.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == size_t(v.size()));
        double sum = 0;
        for (double x : rows[i]) sum += x;
        CHECK(sum == 1.0);
        CHECK(rows[i][s.tokens[i]] == 1.0);
    }
}

TEST_CASE("render joins tokens and can mark answers") {
    const Vocab& v = task_vocab(TaskId::symbol_count);
    TaskSample s;
    for (const char* w : {"A", "B", "x", "A"}) {
        s.tokens.push_back(v.id(w));
        s.mask.push_back(0);
    }
    s.tokens.push_back(v.id("1"));
    s.mask.push_back(1);
    CHECK(render_text(TaskId::symbol_count, s) == "A B x A 1");
    CHECK(render_text(TaskId::symbol_count, s, true) == "A B x A [1]");
    auto obf = obfuscated_tokens(v);
    REQUIRE(obf.size() == size_t(v.size()));
    CHECK(obf[0] == "T0");
    CHECK(obf.back() == "T" + std::to_string(v.size() - 1));
}

TEST_CASE("task ids and names round-trip") {
    CHECK(task_from_index(1) == TaskId::periodic);
    CHECK(task_from_index(10) == TaskId::adjective_qa_count);
    CHECK(task_name(TaskId::world_count) == "world-count");
    CHECK_THROWS_AS(task_from_index(0), std::invalid_argument);
    CHECK_THROWS_AS(task_from_index(11), std::invalid_argument);
}
