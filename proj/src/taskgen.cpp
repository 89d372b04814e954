#include "emca/taskgen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace emca {

namespace {

const std::vector<std::string> kNames = {"JOHN", "PAUL", "TOM",  "JAMES", "MARY",  "PETER", "ANNA",
                                         "LUCY", "MARK", "SARA", "DAVID", "EMMA",  "FRANK"};
const std::vector<std::string> kVerbs = {"SEE", "HEAR", "SMELL", "FEEL", "KNOW", "LIKE", "CALL"};
const std::vector<std::string> kObjects = {"APPLE", "BANANA", "ORANGE", "PEAR",
                                           "PLUM",  "GRAPE",  "LEMON",  "MELON"};
const std::vector<std::string> kAdjVerbs = {"SEE", "HEAR", "SMELL", "FEEL", "LIKE", "WANT"};
const std::vector<std::string> kColors = {"RED", "GREEN", "BLUE", "YELLOW"};
const std::vector<std::string> kSizes = {"SMALL", "LARGE", "BIG", "TINY", "HUGE"};
const std::vector<std::string> kCountWords = {"ONE", "TWO",   "THREE", "FOUR", "FIVE",  "SIX",
                                              "SEVEN", "EIGHT", "NINE",  "TEN",  "ELEVEN",
                                              "TWELVE", "THIRTEEN"};

// lexicon slices per task family
int qa_name_count(TaskId id) {
    switch (id) {
        case TaskId::qa: return 5;
        case TaskId::qa_wide: return 11;
        default: return 13;  // world tasks
    }
}
int qa_verb_count(TaskId id) {
    switch (id) {
        case TaskId::qa: return 2;
        case TaskId::qa_wide: return 5;
        default: return 7;
    }
}

void append_words(std::vector<std::string>& v, const std::vector<std::string>& src, int n) {
    v.insert(v.end(), src.begin(), src.begin() + n);
}

Vocab build_vocab(TaskId id) {
    std::vector<std::string> t;
    switch (id) {
        case TaskId::periodic:
        case TaskId::inc_periodic:
            t = {"0", "1"};
            break;
        case TaskId::symbol_count:
            t = {"A", "B", "C", "x"};
            for (int i = 0; i <= 10; ++i) t.push_back(std::to_string(i));
            break;
        case TaskId::pattern_count:
            t = {"A", "B", "C", "x", "y"};
            // a 45-symbol prompt fits at most 23 single-symbol patterns
            for (int i = 1; i <= 23; ++i) t.push_back(std::to_string(i));
            break;
        case TaskId::qa:
        case TaskId::qa_wide:
        case TaskId::world:
            append_words(t, kNames, qa_name_count(id));
            append_words(t, kVerbs, qa_verb_count(id));
            for (const char* w : {"I", "DO", "NOT", "AND", "BUT", ".", "?", "YES", "NO"})
                t.push_back(w);
            break;
        case TaskId::world_count:
            append_words(t, kNames, 13);
            append_words(t, kVerbs, 7);
            for (const char* w : {"I", "DO", "NOT", "AND", "BUT", ".", "?", "YES", "NO",
                                  "HOW", "MANY", "THINGS"})
                t.push_back(w);
            append_words(t, kCountWords, 13);
            break;
        case TaskId::adjective_qa:
        case TaskId::adjective_qa_count:
            append_words(t, kObjects, 8);
            append_words(t, kAdjVerbs, 6);
            append_words(t, kColors, 4);
            append_words(t, kSizes, 5);
            for (const char* w : {"I", "DO", "NOT", "BUT", ".", "?", "YES", "NO", "A",
                                  "WHAT", "IS", "THE", "OF", "COLOR", "SIZE"})
                t.push_back(w);
            if (id == TaskId::adjective_qa_count) {
                for (const char* w : {"HOW", "MANY", "THINGS"}) t.push_back(w);
                append_words(t, kCountWords, 8);
            }
            break;
    }
    return Vocab{std::move(t)};
}

// token emission helper bound to one sample
struct Emitter {
    const Vocab& vocab;
    TaskSample& out;
    void say(const std::string& tok, bool masked = false) {
        out.tokens.push_back(vocab.id(tok));
        out.mask.push_back(masked ? 1 : 0);
    }
};

// ---- tasks 1-2: binary periodic patterns ------------------------------------

TaskSample gen_periodic(const TaskParams& p, Rng& rng, bool increasing) {
    const Vocab& v = task_vocab(increasing ? TaskId::inc_periodic : TaskId::periodic);
    int plen = 1 + static_cast<int>(rng.next_below(p.max_pattern));
    std::vector<int> pattern(plen);
    for (auto& b : pattern) b = static_cast<int>(rng.next_below(2));

    TaskSample s;
    Emitter e{v, s};
    if (!increasing) {
        for (int i = 0; i < p.periodic_total; ++i)
            e.say(pattern[i % plen] ? "1" : "0", i >= plen);
    } else {
        // one extra repetition of each symbol per completed period
        int emitted = 0;
        for (int k = 1; emitted < p.periodic_total; ++k)
            for (int j = 0; j < plen && emitted < p.periodic_total; ++j)
                for (int r = 0; r < k && emitted < p.periodic_total; ++r, ++emitted)
                    e.say(pattern[j] ? "1" : "0", emitted >= plen);
    }
    return s;
}

// ---- task 3: symbol counting -------------------------------------------------

TaskSample gen_symbol_count(const TaskParams& p, Rng& rng) {
    const Vocab& v = task_vocab(TaskId::symbol_count);
    const char* symbols[3] = {"A", "B", "C"};
    int m = 1 + static_cast<int>(rng.next_below(p.count_max_symbols));
    int counts[3] = {0, 0, 0};

    TaskSample s;
    Emitter e{v, s};
    for (int i = 0; i < m; ++i) {
        int sym = static_cast<int>(rng.next_below(3));
        counts[sym] += 1;
        e.say(symbols[sym]);
    }
    e.say("x");
    int nq = 1 + static_cast<int>(rng.next_below(3));
    auto queried = rng.sample_distinct(3, nq);
    for (size_t q : queried) {
        e.say(symbols[q]);
        e.say(std::to_string(counts[q]), true);
    }
    return s;
}

// ---- task 4: pattern counting ------------------------------------------------

TaskSample gen_pattern_count(const TaskParams& p, Rng& rng) {
    const Vocab& v = task_vocab(TaskId::pattern_count);
    const char* symbols[3] = {"A", "B", "C"};
    int budget = 1 + static_cast<int>(rng.next_below(p.pattern_budget));

    // fill the symbol budget with y-separated groups of 1-3 symbols
    std::vector<std::string> groups;
    int used = 0;
    for (;;) {
        int len = 1 + static_cast<int>(rng.next_below(3));
        int cost = len + (groups.empty() ? 0 : 1);
        if (used + cost > budget) {
            if (groups.empty()) {
                len = budget;  // always emit at least one group
                cost = len;
            } else {
                break;
            }
        }
        std::string g;
        for (int i = 0; i < len; ++i) g += symbols[rng.next_below(3)];
        groups.push_back(g);
        used += cost;
        if (used >= budget) break;
    }

    std::map<std::string, int> counts;
    for (const auto& g : groups) counts[g] += 1;
    std::vector<std::string> distinct;
    for (const auto& [g, _] : counts) distinct.push_back(g);

    TaskSample s;
    Emitter e{v, s};
    for (size_t i = 0; i < groups.size(); ++i) {
        if (i) e.say("y");
        for (char c : groups[i]) e.say(std::string(1, c));
    }
    e.say("x");
    int nq = 1 + static_cast<int>(rng.next_below(distinct.size()));
    auto queried = rng.sample_distinct(distinct.size(), nq);
    for (size_t q : queried) {
        for (char c : distinct[q]) e.say(std::string(1, c));
        e.say("y");
        e.say(std::to_string(counts[distinct[q]]), true);
    }
    return s;
}

// ---- tasks 5-8: plain question answering ------------------------------------

struct NameGroupStatement {
    int verb = 0;
    std::vector<int> positive;
    std::vector<int> negative;
};

// "I VERB a AND b BUT I DO NOT VERB c ." with either half optional
void emit_statement(Emitter& e, const NameGroupStatement& st,
                    const std::vector<std::string>& names,
                    const std::vector<std::string>& verbs) {
    e.say("I");
    if (!st.positive.empty()) {
        e.say(verbs[st.verb]);
        for (size_t i = 0; i < st.positive.size(); ++i) {
            if (i) e.say("AND");
            e.say(names[st.positive[i]]);
        }
        if (!st.negative.empty()) {
            e.say("BUT");
            e.say("I");
        }
    }
    if (!st.negative.empty()) {
        e.say("DO");
        e.say("NOT");
        e.say(verbs[st.verb]);
        for (size_t i = 0; i < st.negative.size(); ++i) {
            if (i) e.say("AND");
            e.say(names[st.negative[i]]);
        }
    }
    e.say(".");
}

NameGroupStatement draw_statement(Rng& rng, int verb, const std::vector<size_t>& names) {
    NameGroupStatement st;
    st.verb = verb;
    for (size_t n : names) {
        if (rng.next_below(2))
            st.positive.push_back(static_cast<int>(n));
        else
            st.negative.push_back(static_cast<int>(n));
    }
    return st;
}

// a balanced yes/no pick: target polarity by coin, fall back to the other
// group when the wanted one is empty
std::pair<int, bool> pick_question(Rng& rng, const std::vector<int>& pos,
                                   const std::vector<int>& neg) {
    bool want_yes = rng.next_below(2) == 1;
    const std::vector<int>* group = want_yes ? &pos : &neg;
    if (group->empty()) {
        want_yes = !want_yes;
        group = want_yes ? &pos : &neg;
    }
    int name = (*group)[rng.next_below(group->size())];
    return {name, want_yes};
}

TaskSample gen_qa(TaskId id, const TaskParams& p, Rng& rng) {
    const Vocab& v = task_vocab(id);
    std::vector<std::string> names(kNames.begin(), kNames.begin() + qa_name_count(id));
    std::vector<std::string> verbs(kVerbs.begin(), kVerbs.begin() + qa_verb_count(id));

    TaskSample s;
    Emitter e{v, s};
    int m = 1 + static_cast<int>(rng.next_below(p.qa_max_names));
    int verb = static_cast<int>(rng.next_below(verbs.size()));
    NameGroupStatement st = draw_statement(rng, verb, rng.sample_distinct(names.size(), m));
    emit_statement(e, st, names, verbs);

    auto [qname, yes] = pick_question(rng, st.positive, st.negative);
    e.say("DO");
    e.say("I");
    e.say(verbs[verb]);
    e.say(names[qname]);
    e.say("?");
    e.say(yes ? "YES" : "NO", true);
    return s;
}

TaskSample gen_world(TaskId id, const TaskParams& p, Rng& rng) {
    const Vocab& v = task_vocab(id);
    const std::vector<std::string> names(kNames.begin(), kNames.begin() + 13);
    const std::vector<std::string> verbs(kVerbs.begin(), kVerbs.begin() + 7);

    TaskSample s;
    Emitter e{v, s};
    int statements = 1 + static_cast<int>(rng.next_below(p.world_max_statements));

    // facts[verb][name]: +1 asserted, -1 denied; a verb/name pair appears in
    // at most one statement so the world stays consistent
    std::map<int, std::map<int, int>> facts;
    std::vector<std::pair<int, int>> positive_pairs, negative_pairs;
    for (int i = 0; i < statements; ++i) {
        int verb = static_cast<int>(rng.next_below(verbs.size()));
        std::vector<size_t> fresh;
        for (size_t n = 0; n < names.size(); ++n)
            if (!facts[verb].count(static_cast<int>(n))) fresh.push_back(n);
        if (fresh.empty()) continue;
        int m = 1 + static_cast<int>(rng.next_below(std::min<size_t>(3, fresh.size())));
        auto chosen_idx = rng.sample_distinct(fresh.size(), m);
        std::vector<size_t> chosen;
        for (size_t c : chosen_idx) chosen.push_back(fresh[c]);

        NameGroupStatement st = draw_statement(rng, verb, chosen);
        emit_statement(e, st, names, verbs);
        for (int n : st.positive) {
            facts[verb][n] = 1;
            positive_pairs.emplace_back(verb, n);
        }
        for (int n : st.negative) {
            facts[verb][n] = -1;
            negative_pairs.emplace_back(verb, n);
        }
    }

    std::vector<int> mentioned_verbs;
    for (const auto& [verb, _] : facts) mentioned_verbs.push_back(verb);

    int questions = 1 + static_cast<int>(rng.next_below(p.world_max_questions));
    for (int q = 0; q < questions; ++q) {
        bool counting = id == TaskId::world_count && rng.next_below(2) == 0;
        if (counting) {
            int verb = mentioned_verbs[rng.next_below(mentioned_verbs.size())];
            // count of names associated with the verb, regardless of polarity
            int count = static_cast<int>(facts[verb].size());
            for (const char* w : {"HOW", "MANY", "THINGS", "DO", "I"}) e.say(w);
            e.say(verbs[verb]);
            e.say("?");
            e.say(kCountWords[count - 1], true);
        } else {
            bool want_yes = rng.next_below(2) == 1;
            const auto* pool = want_yes ? &positive_pairs : &negative_pairs;
            if (pool->empty()) {
                want_yes = !want_yes;
                pool = want_yes ? &positive_pairs : &negative_pairs;
            }
            auto [verb, name] = (*pool)[rng.next_below(pool->size())];
            e.say("DO");
            e.say("I");
            e.say(verbs[verb]);
            e.say(names[name]);
            e.say("?");
            e.say(want_yes ? "YES" : "NO", true);
        }
    }
    return s;
}

// ---- tasks 9-10: adjective question answering --------------------------------

struct AdjFact {
    int verb = 0, object = 0;
    int color = -1, size = -1;  // -1 when the attribute is unstated
    bool positive = true;
};

void emit_adj_phrase(Emitter& e, const AdjFact& f) {
    e.say("A");
    if (f.size >= 0) e.say(kSizes[f.size]);
    if (f.color >= 0) e.say(kColors[f.color]);
    e.say(kObjects[f.object]);
}

AdjFact draw_adj_fact(Rng& rng, bool positive) {
    AdjFact f;
    f.verb = static_cast<int>(rng.next_below(kAdjVerbs.size()));
    f.object = static_cast<int>(rng.next_below(kObjects.size()));
    if (rng.next_below(2)) f.size = static_cast<int>(rng.next_below(kSizes.size()));
    if (rng.next_below(2)) f.color = static_cast<int>(rng.next_below(kColors.size()));
    f.positive = positive;
    return f;
}

// does a query (attrs possibly unstated) hold against the asserted facts?
bool adj_query_truth(const std::vector<AdjFact>& facts, const AdjFact& query) {
    for (const auto& f : facts) {
        if (!f.positive || f.verb != query.verb || f.object != query.object) continue;
        if (query.size >= 0 && f.size != query.size) continue;
        if (query.color >= 0 && f.color != query.color) continue;
        return true;
    }
    return false;
}

TaskSample gen_adjective_qa(TaskId id, const TaskParams& p, Rng& rng) {
    const Vocab& v = task_vocab(id);
    TaskSample s;
    Emitter e{v, s};

    int statements = 1 + static_cast<int>(rng.next_below(p.adj_max_statements));
    std::vector<AdjFact> facts;
    for (int i = 0; i < statements; ++i) {
        AdjFact pos = draw_adj_fact(rng, true);
        facts.push_back(pos);
        e.say("I");
        e.say(kAdjVerbs[pos.verb]);
        emit_adj_phrase(e, pos);
        if (rng.next_below(2)) {
            AdjFact neg = draw_adj_fact(rng, false);
            facts.push_back(neg);
            e.say("BUT");
            e.say("I");
            e.say("DO");
            e.say("NOT");
            e.say(kAdjVerbs[neg.verb]);
            emit_adj_phrase(e, neg);
        }
        e.say(".");
    }

    // unambiguous attribute queries: every positive fact for the verb/object
    // pair that states the attribute agrees on it
    struct AttrQuery {
        int verb, object, value;
        bool is_color;
    };
    std::vector<AttrQuery> attr_queries;
    std::set<std::pair<int, int>> seen;
    for (const auto& f : facts) {
        if (!f.positive || !seen.insert({f.verb, f.object}).second) continue;
        int color = -1, size = -1;
        bool color_ok = true, size_ok = true;
        for (const auto& g : facts) {
            if (!g.positive || g.verb != f.verb || g.object != f.object) continue;
            if (g.color >= 0) {
                if (color >= 0 && color != g.color) color_ok = false;
                color = g.color;
            }
            if (g.size >= 0) {
                if (size >= 0 && size != g.size) size_ok = false;
                size = g.size;
            }
        }
        if (color_ok && color >= 0) attr_queries.push_back({f.verb, f.object, color, true});
        if (size_ok && size >= 0) attr_queries.push_back({f.verb, f.object, size, false});
    }

    std::vector<int> mentioned_verbs;
    for (const auto& f : facts)
        if (std::find(mentioned_verbs.begin(), mentioned_verbs.end(), f.verb) ==
            mentioned_verbs.end())
            mentioned_verbs.push_back(f.verb);

    int questions = 1 + static_cast<int>(rng.next_below(p.adj_max_questions));
    for (int q = 0; q < questions; ++q) {
        int kinds = 1 + (attr_queries.empty() ? 0 : 1) +
                    (id == TaskId::adjective_qa_count ? 1 : 0);
        int kind = static_cast<int>(rng.next_below(kinds));
        if (!attr_queries.empty() && kind == 1) {
            const AttrQuery& aq = attr_queries[rng.next_below(attr_queries.size())];
            for (const char* w : {"WHAT", "IS", "THE"}) e.say(w);
            e.say(aq.is_color ? "COLOR" : "SIZE");
            for (const char* w : {"OF", "THE"}) e.say(w);
            e.say(kObjects[aq.object]);
            e.say("I");
            e.say(kAdjVerbs[aq.verb]);
            e.say("?");
            e.say(aq.is_color ? kColors[aq.value] : kSizes[aq.value], true);
        } else if (kind == kinds - 1 && id == TaskId::adjective_qa_count) {
            int verb = mentioned_verbs[rng.next_below(mentioned_verbs.size())];
            std::set<int> objects;
            for (const auto& f : facts)
                if (f.verb == verb) objects.insert(f.object);
            for (const char* w : {"HOW", "MANY", "THINGS", "DO", "I"}) e.say(w);
            e.say(kAdjVerbs[verb]);
            e.say("?");
            e.say(kCountWords[objects.size() - 1], true);
        } else {
            // yes/no question built from a mentioned fact, attributes thinned
            // at random; the final answer is recomputed against the world
            bool want_yes = rng.next_below(2) == 1;
            AdjFact query;
            bool truth = false;
            for (int attempt = 0; attempt < 8; ++attempt) {
                query = facts[rng.next_below(facts.size())];
                if (query.size >= 0 && rng.next_below(2)) query.size = -1;
                if (query.color >= 0 && rng.next_below(2)) query.color = -1;
                truth = adj_query_truth(facts, query);
                if (truth == want_yes) break;
            }
            e.say("DO");
            e.say("I");
            e.say(kAdjVerbs[query.verb]);
            emit_adj_phrase(e, query);
            e.say("?");
            e.say(truth ? "YES" : "NO", true);
        }
    }
    return s;
}

}  // namespace

TaskId task_from_index(int one_based) {
    if (one_based < 1 || one_based > kTaskCount) throw std::invalid_argument("task index out of range");
    return static_cast<TaskId>(one_based);
}

std::string task_name(TaskId id) {
    switch (id) {
        case TaskId::periodic: return "periodic";
        case TaskId::inc_periodic: return "inc-periodic";
        case TaskId::symbol_count: return "symbol-count";
        case TaskId::pattern_count: return "pattern-count";
        case TaskId::qa: return "qa";
        case TaskId::qa_wide: return "qa-wide";
        case TaskId::world: return "world";
        case TaskId::world_count: return "world-count";
        case TaskId::adjective_qa: return "adjective-qa";
        case TaskId::adjective_qa_count: return "adjective-qa-count";
    }
    throw std::invalid_argument("unknown task");
}

const std::string& Vocab::token(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
    return tokens[id];
}

int Vocab::id(const std::string& tok) const {
    for (int i = 0; i < size(); ++i)
        if (tokens[i] == tok) return i;
    throw std::out_of_range("unknown token: " + tok);
}

const Vocab& task_vocab(TaskId id) {
    static const std::map<TaskId, Vocab>* cache = [] {
        auto* m = new std::map<TaskId, Vocab>;
        for (int i = 1; i <= kTaskCount; ++i)
            m->emplace(static_cast<TaskId>(i), build_vocab(static_cast<TaskId>(i)));
        return m;
    }();
    return cache->at(id);
}

TaskSample generate_sample(TaskId id, const TaskParams& params, Rng& rng) {
    switch (id) {
        case TaskId::periodic: return gen_periodic(params, rng, false);
        case TaskId::inc_periodic: return gen_periodic(params, rng, true);
        case TaskId::symbol_count: return gen_symbol_count(params, rng);
        case TaskId::pattern_count: return gen_pattern_count(params, rng);
        case TaskId::qa:
        case TaskId::qa_wide: return gen_qa(id, params, rng);
        case TaskId::world:
        case TaskId::world_count: return gen_world(id, params, rng);
        case TaskId::adjective_qa:
        case TaskId::adjective_qa_count: return gen_adjective_qa(id, params, rng);
    }
    throw std::invalid_argument("unknown task");
}

std::vector<TaskSample> generate(TaskId id, const TaskParams& params, size_t count,
                                 uint64_t seed) {
    Rng rng(seed);
    std::vector<TaskSample> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) out.push_back(generate_sample(id, params, rng));
    return out;
}

std::vector<std::vector<double>> encode(const TaskSample& sample, const Vocab& vocab) {
    std::vector<std::vector<double>> rows(sample.tokens.size(),
                                          std::vector<double>(vocab.size(), 0.0));
    for (size_t i = 0; i < sample.tokens.size(); ++i) {
        int id = sample.tokens[i];
        if (id < 0 || id >= vocab.size()) throw std::out_of_range("token id out of range");
        rows[i][id] = 1.0;
    }
    return rows;
}

std::string render_text(TaskId id, const TaskSample& sample, bool mark_masked) {
    const Vocab& v = task_vocab(id);
    std::string out;
    for (size_t i = 0; i < sample.tokens.size(); ++i) {
        if (i) out += ' ';
        if (mark_masked && sample.mask[i]) {
            out += '[';
            out += v.token(sample.tokens[i]);
            out += ']';
        } else {
            out += v.token(sample.tokens[i]);
        }
    }
    return out;
}

std::vector<std::string> obfuscated_tokens(const Vocab& vocab) {
    std::vector<std::string> out(vocab.size());
    for (int i = 0; i < vocab.size(); ++i) out[i] = "T" + std::to_string(i);
    return out;
}

}  // namespace emca
