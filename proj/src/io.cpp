#include "emca/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "emca/sampler.hpp"

namespace emca {

using nlohmann::json;

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": parse error at byte " + std::to_string(e.byte) +
                         ": " + e.what());
    }
}

// pulls a field of the requested type, naming the field on failure
template <typename T>
T field(const json& j, const char* name, const char* what) {
    if (!j.contains(name))
        throw ParseError(std::string(what) + ": missing field '" + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": bad field '" + name + "': " + e.what());
    }
}

int digit_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'z') return c - 'a' + 10;
    return -1;
}

char digit_char(int v) { return v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10); }

// Splits one CSV line on commas; no quoting (none of our fields need it).
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void line_error(const std::filesystem::path& path, size_t line, const std::string& msg) {
    throw ParseError(path.string() + ": line " + std::to_string(line) + ": " + msg);
}

double parse_double_or(const std::filesystem::path& path, size_t line, const std::string& s) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != strip(s).size() && used != s.size())
            line_error(path, line, "trailing characters after number '" + s + "'");
        return v;
    } catch (const std::exception&) {
        line_error(path, line, "expected a number, got '" + s + "'");
    }
}

long long parse_int_or(const std::filesystem::path& path, size_t line, const std::string& s) {
    try {
        size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) line_error(path, line, "expected an integer, got '" + s + "'");
        return v;
    } catch (const std::exception&) {
        line_error(path, line, "expected an integer, got '" + s + "'");
    }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---- rule files ----

std::string rule_to_json(const RuleTable& rule) {
    const CaSpec& s = rule.spec;
    if (rule.outputs.size() != s.table_size())
        throw std::invalid_argument("rule table size does not match its signature");
    if (s.num_states > 36) throw std::invalid_argument("digit encoding supports at most 36 states");
    std::string digits(rule.outputs.size(), '0');
    for (size_t i = 0; i < rule.outputs.size(); ++i)
        digits[i] = digit_char(rule.outputs[rule.outputs.size() - 1 - i]);
    json j;
    j["dims"] = s.dims;
    j["num_states"] = s.num_states;
    j["radius"] = s.radius;
    j["outputs"] = digits;
    return j.dump(2) + "\n";
}

RuleTable rule_from_json(const std::string& text) {
    json j = parse_json(text, "rule file");
    RuleTable rule;
    rule.spec.dims = field<int>(j, "dims", "rule file");
    rule.spec.num_states = field<int>(j, "num_states", "rule file");
    rule.spec.radius = field<int>(j, "radius", "rule file");
    rule.spec.rows = 1;
    rule.spec.cols = 1;
    validate(rule.spec);
    std::string digits = field<std::string>(j, "outputs", "rule file");
    size_t expect = rule.spec.table_size();
    if (digits.size() != expect)
        throw ParseError("rule file: outputs has " + std::to_string(digits.size()) +
                         " digits, expected " + std::to_string(expect));
    rule.outputs.resize(expect);
    for (size_t i = 0; i < expect; ++i) {
        int v = digit_value(digits[i]);
        if (v < 0 || v >= rule.spec.num_states)
            throw ParseError("rule file: outputs digit " + std::to_string(i) + " ('" +
                             std::string(1, digits[i]) + "') is not a base-" +
                             std::to_string(rule.spec.num_states) + " digit");
        rule.outputs[expect - 1 - i] = static_cast<uint8_t>(v);
    }
    // extents stay unset, matching the rule constructors: the grid supplies them
    rule.spec.rows = rule.spec.dims == 1 ? 1 : 0;
    rule.spec.cols = 0;
    return rule;
}

void save_rule(const std::filesystem::path& path, const RuleTable& rule) {
    write_text_file(path, rule_to_json(rule));
}

RuleTable load_rule(const std::filesystem::path& path) {
    try {
        return rule_from_json(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---- images ----

void write_pgm(const std::filesystem::path& path, const Grid& g) {
    if (g.spec.cell_count() == 0 || g.cells.size() != g.spec.cell_count())
        throw std::invalid_argument("grid extents do not match its cells");
    int maxval = g.spec.num_states - 1;
    if (maxval < 1 || maxval > 255) throw std::invalid_argument("PGM needs 2..256 states");
    std::string header = "P5\n" + std::to_string(g.spec.cols) + " " + std::to_string(g.spec.rows) +
                         "\n" + std::to_string(maxval) + "\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header;
    out.write(reinterpret_cast<const char*>(g.cells.data()),
              static_cast<std::streamsize>(g.cells.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

// reads one whitespace-separated header token, skipping '#' comments
std::string pgm_token(std::istream& in, const std::filesystem::path& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw ParseError(path.string() + ": truncated PGM header");
    return tok;
}

int pgm_int(std::istream& in, const std::filesystem::path& path, const char* what) {
    std::string tok = pgm_token(in, path);
    try {
        size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": bad PGM " + what + " '" + tok + "'");
    }
}

}  // namespace

Grid read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string magic = pgm_token(in, path);
    if (magic != "P5") throw ParseError(path.string() + ": not a binary PGM (magic '" + magic + "')");
    int cols = pgm_int(in, path, "width");
    int rows = pgm_int(in, path, "height");
    int maxval = pgm_int(in, path, "maxval");
    if (cols < 1 || rows < 1) throw ParseError(path.string() + ": bad PGM extents");
    if (maxval < 1 || maxval > 255) throw ParseError(path.string() + ": unsupported PGM maxval");
    Grid g;
    g.spec.dims = 2;
    g.spec.num_states = maxval + 1;
    g.spec.rows = rows;
    g.spec.cols = cols;
    g.cells.resize(g.spec.cell_count());
    in.read(reinterpret_cast<char*>(g.cells.data()), static_cast<std::streamsize>(g.cells.size()));
    if (in.gcount() != static_cast<std::streamsize>(g.cells.size()))
        throw ParseError(path.string() + ": truncated PGM pixel data");
    for (uint8_t v : g.cells)
        if (v > maxval) throw ParseError(path.string() + ": pixel value above maxval");
    return g;
}

std::vector<std::array<uint8_t, 3>> state_palette(int num_states) {
    if (num_states < 2 || num_states > 256)
        throw std::invalid_argument("palette needs 2..256 states");
    std::vector<std::array<uint8_t, 3>> pal(static_cast<size_t>(num_states));
    pal[0] = {255, 255, 255};
    int rest = num_states - 1;
    for (int i = 0; i < rest; ++i) {
        double hue = 360.0 * i / rest;  // degrees, full saturation and value
        double h = hue / 60.0;
        double x = 1.0 - std::fabs(std::fmod(h, 2.0) - 1.0);
        double r = 0, gch = 0, b = 0;
        switch (static_cast<int>(h) % 6) {
            case 0: r = 1; gch = x; break;
            case 1: r = x; gch = 1; break;
            case 2: gch = 1; b = x; break;
            case 3: gch = x; b = 1; break;
            case 4: r = x; b = 1; break;
            case 5: r = 1; b = x; break;
        }
        auto byte = [](double v) { return static_cast<uint8_t>(std::lround(v * 255.0)); };
        pal[static_cast<size_t>(i) + 1] = {byte(r), byte(gch), byte(b)};
    }
    return pal;
}

namespace {

void push_be32(std::string& s, uint32_t v) {
    s.push_back(static_cast<char>(v >> 24));
    s.push_back(static_cast<char>(v >> 16));
    s.push_back(static_cast<char>(v >> 8));
    s.push_back(static_cast<char>(v));
}

void push_chunk(std::string& out, const char type[4], const std::string& data) {
    push_be32(out, static_cast<uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    uint32_t crc = static_cast<uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
    push_be32(out, crc);
}

std::string deflate_stream(const std::string& raw) {
    uLongf cap = compressBound(static_cast<uLong>(raw.size()));
    std::string out(cap, '\0');
    if (compress2(reinterpret_cast<Bytef*>(out.data()), &cap,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  9) != Z_OK)
        throw std::runtime_error("deflate failed");
    out.resize(cap);
    return out;
}

}  // namespace

void write_png(const std::filesystem::path& path, const Grid& g) {
    if (g.spec.cell_count() == 0 || g.cells.size() != g.spec.cell_count())
        throw std::invalid_argument("grid extents do not match its cells");
    auto pal = state_palette(g.spec.num_states);
    for (uint8_t v : g.cells)
        if (v >= g.spec.num_states) throw std::invalid_argument("cell state outside the palette");

    std::string png("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    push_be32(ihdr, static_cast<uint32_t>(g.spec.cols));
    push_be32(ihdr, static_cast<uint32_t>(g.spec.rows));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(3);   // palette color type
    ihdr.push_back(0);   // deflate
    ihdr.push_back(0);   // adaptive filtering
    ihdr.push_back(0);   // no interlace
    push_chunk(png, "IHDR", ihdr);

    std::string plte;
    for (const auto& rgb : pal) {
        plte.push_back(static_cast<char>(rgb[0]));
        plte.push_back(static_cast<char>(rgb[1]));
        plte.push_back(static_cast<char>(rgb[2]));
    }
    push_chunk(png, "PLTE", plte);

    std::string raw;
    raw.reserve(g.cells.size() + g.spec.rows);
    for (int r = 0; r < g.spec.rows; ++r) {
        raw.push_back(0);  // per-scanline filter: none
        raw.append(reinterpret_cast<const char*>(g.cells.data()) +
                       static_cast<size_t>(r) * g.spec.cols,
                   static_cast<size_t>(g.spec.cols));
    }
    push_chunk(png, "IDAT", deflate_stream(raw));
    push_chunk(png, "IEND", "");
    write_text_file(path, png);
}

Grid diagram_grid(const SpaceTime& st) {
    if (st.spec.dims != 1) throw std::invalid_argument("only 1D diagrams stack into an image");
    if (st.frames.empty()) throw std::invalid_argument("empty diagram");
    Grid g;
    g.spec = st.spec;
    g.spec.dims = 2;
    g.spec.rows = static_cast<int>(st.frames.size());
    g.cells.reserve(g.spec.cell_count());
    for (const Grid& f : st.frames) g.cells.insert(g.cells.end(), f.cells.begin(), f.cells.end());
    return g;
}

SpaceTime diagram_from_grid(const Grid& g) {
    SpaceTime st;
    st.spec = g.spec;
    st.spec.dims = 1;
    st.spec.rows = 1;
    st.frames.reserve(static_cast<size_t>(g.spec.rows));
    for (int r = 0; r < g.spec.rows; ++r) {
        Grid f;
        f.spec = st.spec;
        f.cells.assign(g.cells.begin() + static_cast<size_t>(r) * g.spec.cols,
                       g.cells.begin() + static_cast<size_t>(r + 1) * g.spec.cols);
        st.frames.push_back(std::move(f));
    }
    return st;
}

// ---- accuracy curves ----

void write_curve_csv(const std::filesystem::path& path, const AccuracyCurve& curve) {
    if (curve.steps.size() != curve.accuracy.size())
        throw std::invalid_argument("curve steps and accuracy differ in length");
    std::string out = "step,accuracy\n";
    for (size_t i = 0; i < curve.steps.size(); ++i)
        out += std::to_string(curve.steps[i]) + "," + fmt_double(curve.accuracy[i]) + "\n";
    write_text_file(path, out);
}

AccuracyCurve read_curve_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    AccuracyCurve curve;
    std::string line;
    size_t lineno = 0;
    bool past_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = strip(line);
        if (t.empty() || t[0] == '#') continue;
        if (!past_header) {
            past_header = true;
            if (t.rfind("step", 0) == 0) continue;
        }
        auto fields = split_csv(t);
        if (fields.size() != 2)
            line_error(path, lineno, "expected 2 fields (step,accuracy), got " +
                                         std::to_string(fields.size()));
        long long step = parse_int_or(path, lineno, strip(fields[0]));
        double acc = parse_double_or(path, lineno, strip(fields[1]));
        if (!curve.steps.empty() && step <= curve.steps.back())
            line_error(path, lineno, "steps must be strictly increasing");
        if (acc < 0.0 || acc > 1.0) line_error(path, lineno, "accuracy outside [0, 1]");
        curve.steps.push_back(step);
        curve.accuracy.push_back(acc);
    }
    if (curve.steps.empty()) throw ParseError(path.string() + ": no curve rows");
    return curve;
}

// ---- rule-set CSV ----

void write_rules_csv(const std::filesystem::path& path, const std::vector<RuleTable>& rules) {
    if (rules.empty()) throw std::invalid_argument("no rules to write");
    int k = rules.front().spec.num_states;
    std::string out = "rule_id,lambda";
    for (int s = 0; s < k; ++s) out += ",count_" + std::to_string(s);
    out += "\n";
    for (size_t i = 0; i < rules.size(); ++i) {
        const RuleTable& r = rules[i];
        if (r.spec.num_states != k)
            throw std::invalid_argument("rule set mixes state counts");
        std::vector<uint64_t> counts(static_cast<size_t>(k), 0);
        for (uint8_t o : r.outputs) counts[o]++;
        out += std::to_string(i) + "," + fmt_double(langton_lambda(r));
        for (uint64_t c : counts) out += "," + std::to_string(c);
        out += "\n";
    }
    write_text_file(path, out);
}

// ---- complexity score CSV ----

void write_scores_csv(const std::filesystem::path& path,
                      const std::vector<ComplexityScore>& ranked) {
    std::string out = "rule_id,lambda,compressed_length,joint_mu,nn_mu_tau,rank\n";
    for (size_t i = 0; i < ranked.size(); ++i) {
        const ComplexityScore& s = ranked[i];
        out += std::to_string(s.rule_id) + "," + fmt_double(s.lambda) + "," +
               std::to_string(s.compressed_len) + "," + fmt_double(s.joint_mu) + "," +
               fmt_double(s.nn_mu) + "," + std::to_string(i + 1) + "\n";
    }
    write_text_file(path, out);
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<ScoreRow> rows;
    std::string line;
    size_t lineno = 0;
    bool past_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = strip(line);
        if (t.empty() || t[0] == '#') continue;
        if (!past_header) {
            past_header = true;
            if (t.rfind("rule_id", 0) == 0) continue;
        }
        auto fields = split_csv(t);
        if (fields.size() != 6)
            line_error(path, lineno, "expected 6 fields, got " + std::to_string(fields.size()));
        ScoreRow r;
        long long id = parse_int_or(path, lineno, strip(fields[0]));
        if (id < 0) line_error(path, lineno, "negative rule_id");
        r.rule_id = static_cast<uint64_t>(id);
        r.lambda = parse_double_or(path, lineno, strip(fields[1]));
        long long cl = parse_int_or(path, lineno, strip(fields[2]));
        if (cl < 0) line_error(path, lineno, "negative compressed_length");
        r.compressed_length = static_cast<size_t>(cl);
        r.joint_mu = parse_double_or(path, lineno, strip(fields[3]));
        r.nn_mu_tau = parse_double_or(path, lineno, strip(fields[4]));
        r.rank = static_cast<int>(parse_int_or(path, lineno, strip(fields[5])));
        rows.push_back(r);
    }
    if (rows.empty()) throw ParseError(path.string() + ": no score rows");
    return rows;
}

std::map<uint64_t, int> read_labels_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::map<uint64_t, int> labels;
    std::string line;
    size_t lineno = 0;
    bool past_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = strip(line);
        if (t.empty() || t[0] == '#') continue;
        if (!past_header) {
            past_header = true;
            if (t.rfind("rule_id", 0) == 0) continue;
        }
        auto fields = split_csv(t);
        if (fields.size() != 2)
            line_error(path, lineno, "expected 2 fields (rule_id,label), got " +
                                         std::to_string(fields.size()));
        long long id = parse_int_or(path, lineno, strip(fields[0]));
        long long lab = parse_int_or(path, lineno, strip(fields[1]));
        if (id < 0) line_error(path, lineno, "negative rule_id");
        if (lab != 0 && lab != 1) line_error(path, lineno, "label must be 0 or 1");
        labels[static_cast<uint64_t>(id)] = static_cast<int>(lab);
    }
    if (labels.empty()) throw ParseError(path.string() + ": no label rows");
    return labels;
}

double ranking_average_precision(const std::vector<ScoreRow>& rows,
                                 const std::map<uint64_t, int>& labels) {
    std::vector<double> scores;
    std::vector<int> labs;
    std::map<uint64_t, int> seen = labels;
    for (const ScoreRow& r : rows) {
        auto it = seen.find(r.rule_id);
        if (it == seen.end()) continue;
        scores.push_back(r.nn_mu_tau);
        labs.push_back(it->second);
        seen.erase(it);
    }
    if (!seen.empty())
        throw ParseError("label file names rule_id " + std::to_string(seen.begin()->first) +
                         " which is absent from the ranking");
    return average_precision(scores, labs);
}

// ---- task sample export ----

namespace {

const std::vector<std::string>& export_tokens(TaskId id, bool obfuscate,
                                              std::vector<std::string>& storage) {
    const Vocab& vocab = task_vocab(id);
    if (!obfuscate) return vocab.tokens;
    storage = obfuscated_tokens(vocab);
    return storage;
}

}  // namespace

void write_samples_jsonl(const std::filesystem::path& path, TaskId id,
                         const std::vector<TaskSample>& samples, bool obfuscate) {
    std::vector<std::string> storage;
    const auto& names = export_tokens(id, obfuscate, storage);
    std::string out;
    for (const TaskSample& s : samples) {
        json j;
        j["task_id"] = static_cast<int>(id);
        json toks = json::array();
        for (int t : s.tokens) toks.push_back(names.at(static_cast<size_t>(t)));
        j["tokens"] = std::move(toks);
        json mask = json::array();
        for (uint8_t m : s.mask) mask.push_back(static_cast<int>(m));
        j["mask"] = std::move(mask);
        out += j.dump() + "\n";
    }
    write_text_file(path, out);
}

void write_samples_text(const std::filesystem::path& path, TaskId id,
                        const std::vector<TaskSample>& samples, bool mark_masked) {
    std::string out;
    for (const TaskSample& s : samples) out += render_text(id, s, mark_masked) + "\n";
    write_text_file(path, out);
}

// ---- experiment records ----

namespace {

void check_record(const ExperimentRecord& rec, const char* what) {
    if (rec.status == "failed") return;
    if (rec.curve.steps.size() != rec.curve.accuracy.size())
        throw ParseError(std::string(what) + ": curve steps and accuracy differ in length");
    if (rec.curve.accuracy.empty())
        throw ParseError(std::string(what) + ": successful record without a curve");
    double w = wade(rec.curve.accuracy, rec.checkpoints);
    if (w != rec.wade_score)
        throw ParseError(std::string(what) + ": stored wade " + fmt_double(rec.wade_score) +
                         " does not match its curve (recomputed " + fmt_double(w) + ")");
    if (rec.final_accuracy != rec.curve.accuracy.back())
        throw ParseError(std::string(what) + ": stored final accuracy does not match its curve");
}

json record_to_json_obj(const ExperimentRecord& rec) {
    check_record(rec, "record");
    json j;
    j["format"] = rec.format;
    j["task_id"] = rec.task_id;
    j["model"] = rec.model;
    j["seed"] = rec.seed;
    j["eval_every"] = rec.eval_every;
    j["checkpoints"] = rec.checkpoints;
    j["curve"]["steps"] = rec.curve.steps;
    j["curve"]["accuracy"] = rec.curve.accuracy;
    j["wade"] = rec.wade_score;
    j["final_accuracy"] = rec.final_accuracy;
    j["wall_seconds"] = rec.wall_seconds;
    j["status"] = rec.status;
    if (!rec.error.empty()) j["error"] = rec.error;
    return j;
}

ExperimentRecord record_from_json_obj(const json& j) {
    ExperimentRecord rec;
    rec.format = field<std::string>(j, "format", "record");
    if (rec.format != "emca-record-v1")
        throw ParseError("record: unsupported format tag '" + rec.format + "'");
    rec.task_id = field<int>(j, "task_id", "record");
    rec.model = field<std::string>(j, "model", "record");
    rec.seed = field<uint64_t>(j, "seed", "record");
    rec.eval_every = field<int>(j, "eval_every", "record");
    rec.checkpoints = field<std::vector<double>>(j, "checkpoints", "record");
    rec.status = field<std::string>(j, "status", "record");
    if (rec.status != "ok" && rec.status != "failed")
        throw ParseError("record: status must be 'ok' or 'failed'");
    if (j.contains("error")) rec.error = j.at("error").get<std::string>();
    if (rec.status == "ok" || j.contains("curve")) {
        if (!j.contains("curve")) throw ParseError("record: missing field 'curve'");
        rec.curve.steps = field<std::vector<long>>(j.at("curve"), "steps", "record curve");
        rec.curve.accuracy = field<std::vector<double>>(j.at("curve"), "accuracy", "record curve");
    }
    rec.wade_score = field<double>(j, "wade", "record");
    rec.final_accuracy = field<double>(j, "final_accuracy", "record");
    rec.wall_seconds = field<double>(j, "wall_seconds", "record");
    check_record(rec, "record");
    return rec;
}

}  // namespace

std::string record_to_json(const ExperimentRecord& rec) {
    return record_to_json_obj(rec).dump(2) + "\n";
}

ExperimentRecord record_from_json(const std::string& text) {
    return record_from_json_obj(parse_json(text, "record"));
}

void save_records(const std::filesystem::path& path, const std::vector<ExperimentRecord>& recs) {
    json arr = json::array();
    for (const ExperimentRecord& r : recs) arr.push_back(record_to_json_obj(r));
    write_text_file(path, arr.dump(2) + "\n");
}

std::vector<ExperimentRecord> load_records(const std::filesystem::path& path) {
    json arr = parse_json(read_text_file(path), "record set");
    if (!arr.is_array()) throw ParseError(path.string() + ": record set must be a JSON array");
    std::vector<ExperimentRecord> recs;
    recs.reserve(arr.size());
    for (const json& j : arr) recs.push_back(record_from_json_obj(j));
    return recs;
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<ExperimentRecord>& recs) {
    std::string out = "task_id,model,seed,status,wade,final_accuracy\n";
    for (const ExperimentRecord& r : recs)
        out += std::to_string(r.task_id) + "," + r.model + "," + std::to_string(r.seed) + "," +
               r.status + "," + fmt_double(r.wade_score) + "," + fmt_double(r.final_accuracy) +
               "\n";
    write_text_file(path, out);
}

// ---- network checkpoints ----

namespace {

const char* act_name(Activation a) {
    switch (a) {
        case Activation::rectifier: return "rectifier";
        case Activation::softmax: return "softmax";
        case Activation::identity: return "identity";
    }
    return "?";
}

Activation act_from(const std::string& s) {
    if (s == "rectifier") return Activation::rectifier;
    if (s == "softmax") return Activation::softmax;
    if (s == "identity") return Activation::identity;
    throw ParseError("network: unknown activation '" + s + "'");
}

}  // namespace

std::string net_to_json(const DenseNet& net) {
    json j;
    j["format"] = "emca-net-v1";
    json layers = json::array();
    for (const Layer& l : net.layers) {
        json lj;
        lj["in"] = l.in;
        lj["out"] = l.out;
        lj["act"] = act_name(l.act);
        lj["groups"] = l.groups;
        lj["w"] = l.w;
        lj["b"] = l.b;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j.dump() + "\n";
}

DenseNet net_from_json(const std::string& text) {
    json j = parse_json(text, "network");
    if (field<std::string>(j, "format", "network") != "emca-net-v1")
        throw ParseError("network: unsupported format tag");
    DenseNet net;
    for (const json& lj : field<json>(j, "layers", "network")) {
        Layer l;
        l.in = field<int>(lj, "in", "network layer");
        l.out = field<int>(lj, "out", "network layer");
        l.act = act_from(field<std::string>(lj, "act", "network layer"));
        l.groups = field<int>(lj, "groups", "network layer");
        l.w = field<std::vector<double>>(lj, "w", "network layer");
        l.b = field<std::vector<double>>(lj, "b", "network layer");
        if (l.w.size() != static_cast<size_t>(l.in) * l.out ||
            l.b.size() != static_cast<size_t>(l.out))
            throw ParseError("network: layer weight shapes do not match in/out");
        net.layers.push_back(std::move(l));
    }
    return net;
}

void save_net(const std::filesystem::path& path, const DenseNet& net) {
    write_text_file(path, net_to_json(net));
}

DenseNet load_net(const std::filesystem::path& path) {
    try {
        return net_from_json(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---- model bundles ----

namespace {

// Named arrays in one little-endian binary file:
//   magic "EMCAWB01", u32 array count, then per array
//   u32 name length, name bytes, u8 kind (0 = f64, 1 = i32), u64 count, data.
struct NamedArray {
    std::string name;
    std::vector<double> f64;
    std::vector<int32_t> i32;
    bool is_int = false;
};

void push_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

void push_u64(std::string& s, uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

uint32_t pull_u32(const std::string& s, size_t& pos, const std::filesystem::path& path) {
    if (pos + 4 > s.size()) throw ParseError(path.string() + ": truncated weight file");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(s[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

uint64_t pull_u64(const std::string& s, size_t& pos, const std::filesystem::path& path) {
    if (pos + 8 > s.size()) throw ParseError(path.string() + ": truncated weight file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(s[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

void save_arrays(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
    std::string out = "EMCAWB01";
    push_u32(out, static_cast<uint32_t>(arrays.size()));
    for (const NamedArray& a : arrays) {
        push_u32(out, static_cast<uint32_t>(a.name.size()));
        out += a.name;
        out.push_back(a.is_int ? 1 : 0);
        if (a.is_int) {
            push_u64(out, a.i32.size());
            for (int32_t v : a.i32) push_u32(out, static_cast<uint32_t>(v));
        } else {
            push_u64(out, a.f64.size());
            for (double v : a.f64) {
                uint64_t bits;
                std::memcpy(&bits, &v, 8);
                push_u64(out, bits);
            }
        }
    }
    write_text_file(path, out);
}

std::map<std::string, NamedArray> load_arrays(const std::filesystem::path& path) {
    std::string s = read_text_file(path);
    size_t pos = 0;
    if (s.size() < 8 || s.compare(0, 8, "EMCAWB01") != 0)
        throw ParseError(path.string() + ": not a weight file (bad magic)");
    pos = 8;
    uint32_t n = pull_u32(s, pos, path);
    std::map<std::string, NamedArray> out;
    for (uint32_t i = 0; i < n; ++i) {
        NamedArray a;
        uint32_t name_len = pull_u32(s, pos, path);
        if (pos + name_len > s.size()) throw ParseError(path.string() + ": truncated weight file");
        a.name = s.substr(pos, name_len);
        pos += name_len;
        if (pos >= s.size()) throw ParseError(path.string() + ": truncated weight file");
        a.is_int = s[pos++] != 0;
        uint64_t count = pull_u64(s, pos, path);
        if (a.is_int) {
            a.i32.reserve(count);
            for (uint64_t j = 0; j < count; ++j)
                a.i32.push_back(static_cast<int32_t>(pull_u32(s, pos, path)));
        } else {
            a.f64.reserve(count);
            for (uint64_t j = 0; j < count; ++j) {
                uint64_t bits = pull_u64(s, pos, path);
                double v;
                std::memcpy(&v, &bits, 8);
                a.f64.push_back(v);
            }
        }
        out[a.name] = std::move(a);
    }
    return out;
}

std::filesystem::path sibling_bin(const std::filesystem::path& json_path) {
    std::filesystem::path p = json_path;
    p.replace_extension(".bin");
    return p;
}

const NamedArray& need_array(const std::map<std::string, NamedArray>& arrays,
                             const std::string& name, const std::filesystem::path& path) {
    auto it = arrays.find(name);
    if (it == arrays.end())
        throw ParseError(path.string() + ": weight file lacks array '" + name + "'");
    return it->second;
}

}  // namespace

void save_esn(const std::filesystem::path& json_path, const Esn& esn) {
    std::filesystem::path bin = sibling_bin(json_path);
    json j;
    j["format"] = "emca-model-v1";
    j["kind"] = "esn";
    j["size"] = esn.params.size;
    j["spectral_radius"] = esn.params.spectral_radius;
    j["leak"] = esn.params.leak;
    j["nonzeros_per_row"] = esn.params.nonzeros_per_row;
    j["leak_convention"] =
        esn.params.convention == LeakConvention::experiment ? "experiment" : "literal";
    j["seed"] = esn.params.seed;
    j["input_dim"] = esn.input_dim;
    j["raw_radius"] = esn.raw_radius;
    j["radius_fallback"] = esn.radius_fallback;
    j["weights"] = bin.filename().string();
    write_text_file(json_path, j.dump(2) + "\n");

    std::vector<NamedArray> arrays(4);
    arrays[0].name = "row_start";
    arrays[0].is_int = true;
    arrays[0].i32 = esn.row_start;
    arrays[1].name = "col";
    arrays[1].is_int = true;
    arrays[1].i32 = esn.col;
    arrays[2].name = "val";
    arrays[2].f64 = esn.val;
    arrays[3].name = "w_in";
    arrays[3].f64 = esn.w_in;
    save_arrays(bin, arrays);
}

Esn load_esn(const std::filesystem::path& json_path) {
    json j = parse_json(read_text_file(json_path), "model bundle");
    if (field<std::string>(j, "format", "model bundle") != "emca-model-v1")
        throw ParseError(json_path.string() + ": unsupported format tag");
    if (field<std::string>(j, "kind", "model bundle") != "esn")
        throw ParseError(json_path.string() + ": bundle is not an echo state network");
    Esn esn;
    esn.params.size = field<int>(j, "size", "model bundle");
    esn.params.spectral_radius = field<double>(j, "spectral_radius", "model bundle");
    esn.params.leak = field<double>(j, "leak", "model bundle");
    esn.params.nonzeros_per_row = field<double>(j, "nonzeros_per_row", "model bundle");
    std::string conv = field<std::string>(j, "leak_convention", "model bundle");
    if (conv != "experiment" && conv != "literal")
        throw ParseError(json_path.string() + ": unknown leak convention '" + conv + "'");
    esn.params.convention =
        conv == "experiment" ? LeakConvention::experiment : LeakConvention::literal;
    esn.params.seed = field<uint64_t>(j, "seed", "model bundle");
    esn.input_dim = field<int>(j, "input_dim", "model bundle");
    esn.raw_radius = field<double>(j, "raw_radius", "model bundle");
    esn.radius_fallback = field<bool>(j, "radius_fallback", "model bundle");

    std::filesystem::path bin =
        json_path.parent_path() / field<std::string>(j, "weights", "model bundle");
    auto arrays = load_arrays(bin);
    esn.row_start = need_array(arrays, "row_start", bin).i32;
    esn.col = need_array(arrays, "col", bin).i32;
    esn.val = need_array(arrays, "val", bin).f64;
    esn.w_in = need_array(arrays, "w_in", bin).f64;
    if (esn.row_start.size() != static_cast<size_t>(esn.params.size) + 1)
        throw ParseError(bin.string() + ": row_start length does not match the reservoir size");
    if (esn.w_in.size() != static_cast<size_t>(esn.params.size) * esn.input_dim)
        throw ParseError(bin.string() + ": w_in length does not match size x input_dim");
    return esn;
}

void save_decoder(const std::filesystem::path& json_path, const Decoder& dec) {
    std::filesystem::path bin = sibling_bin(json_path);
    json j;
    j["format"] = "emca-model-v1";
    j["kind"] = "decoder";
    j["vocab"] = dec.vocab;
    j["feature_dim"] = dec.feature_dim;
    j["scale"] = dec.scale;
    j["weights"] = bin.filename().string();
    write_text_file(json_path, j.dump(2) + "\n");

    std::vector<NamedArray> arrays(2);
    arrays[0].name = "w";
    arrays[0].f64 = dec.w;
    arrays[1].name = "b";
    arrays[1].f64 = dec.b;
    save_arrays(bin, arrays);
}

Decoder load_decoder(const std::filesystem::path& json_path) {
    json j = parse_json(read_text_file(json_path), "model bundle");
    if (field<std::string>(j, "format", "model bundle") != "emca-model-v1")
        throw ParseError(json_path.string() + ": unsupported format tag");
    if (field<std::string>(j, "kind", "model bundle") != "decoder")
        throw ParseError(json_path.string() + ": bundle is not a decoder");
    Decoder dec;
    dec.vocab = field<int>(j, "vocab", "model bundle");
    dec.feature_dim = field<int>(j, "feature_dim", "model bundle");
    dec.scale = field<double>(j, "scale", "model bundle");
    std::filesystem::path bin =
        json_path.parent_path() / field<std::string>(j, "weights", "model bundle");
    auto arrays = load_arrays(bin);
    dec.w = need_array(arrays, "w", bin).f64;
    dec.b = need_array(arrays, "b", bin).f64;
    if (dec.w.size() != static_cast<size_t>(dec.vocab) * dec.feature_dim ||
        dec.b.size() != static_cast<size_t>(dec.vocab))
        throw ParseError(bin.string() + ": weight lengths do not match vocab x feature_dim");
    return dec;
}

void write_feature_trace_csv(const std::filesystem::path& path,
                             const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += fmt_double(row[i]);
        }
        out += "\n";
    }
    write_text_file(path, out);
}

void write_feature_trace_csv(const std::filesystem::path& path,
                             const std::vector<std::vector<int32_t>>& active, int dim) {
    std::string out;
    std::vector<char> row(static_cast<size_t>(dim));
    for (const auto& idx : active) {
        std::fill(row.begin(), row.end(), '0');
        for (int32_t i : idx) {
            if (i < 0 || i >= dim) throw std::invalid_argument("active index outside feature dim");
            row[static_cast<size_t>(i)] = '1';
        }
        for (int i = 0; i < dim; ++i) {
            if (i) out += ",";
            out += row[static_cast<size_t>(i)];
        }
        out += "\n";
    }
    write_text_file(path, out);
}

// ---- manifests ----

const ManifestValue& ManifestTable::at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        throw ParseError("manifest: missing key '" + key + "' (table at line " +
                         std::to_string(line) + ")");
    return it->second;
}

const std::string& ManifestValue::as_string() const {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ParseError("manifest: line " + std::to_string(line) + ": expected a string");
}

int64_t ManifestValue::as_int() const {
    if (const auto* i = std::get_if<int64_t>(&v)) return *i;
    throw ParseError("manifest: line " + std::to_string(line) + ": expected an integer");
}

double ManifestValue::as_double() const {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<int64_t>(&v)) return static_cast<double>(*i);
    throw ParseError("manifest: line " + std::to_string(line) + ": expected a number");
}

bool ManifestValue::as_bool() const {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ParseError("manifest: line " + std::to_string(line) + ": expected true or false");
}

const std::vector<ManifestValue>& ManifestValue::as_array() const {
    if (const auto* a = std::get_if<std::vector<ManifestValue>>(&v)) return *a;
    throw ParseError("manifest: line " + std::to_string(line) + ": expected an array");
}

int64_t ManifestTable::get_int(const std::string& key, int64_t fallback) const {
    return has(key) ? at(key).as_int() : fallback;
}

double ManifestTable::get_double(const std::string& key, double fallback) const {
    return has(key) ? at(key).as_double() : fallback;
}

std::string ManifestTable::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).as_string() : fallback;
}

bool ManifestTable::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? at(key).as_bool() : fallback;
}

namespace {

[[noreturn]] void manifest_error(int line, const std::string& msg) {
    throw ParseError("manifest: line " + std::to_string(line) + ": " + msg);
}

// parses one scalar or array token sequence; `rest` starts after '='
ManifestValue parse_value(const std::string& rest, int line);

ManifestValue parse_scalar(const std::string& tok, int line) {
    ManifestValue val;
    val.line = line;
    if (tok.empty()) manifest_error(line, "empty value");
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"')
            manifest_error(line, "unterminated string " + tok);
        val.v = tok.substr(1, tok.size() - 2);
        return val;
    }
    if (tok == "true" || tok == "false") {
        val.v = tok == "true";
        return val;
    }
    bool numberish = tok.find_first_not_of("+-0123456789.eE_") == std::string::npos;
    if (!numberish) manifest_error(line, "unrecognized value '" + tok + "'");
    std::string digits;
    for (char c : tok)
        if (c != '_') digits.push_back(c);
    try {
        if (digits.find_first_of(".eE") == std::string::npos) {
            size_t used = 0;
            int64_t i = std::stoll(digits, &used);
            if (used != digits.size()) throw std::invalid_argument(digits);
            val.v = i;
        } else {
            size_t used = 0;
            double d = std::stod(digits, &used);
            if (used != digits.size()) throw std::invalid_argument(digits);
            val.v = d;
        }
    } catch (const std::exception&) {
        manifest_error(line, "bad number '" + tok + "'");
    }
    return val;
}

ManifestValue parse_value(const std::string& rest, int line) {
    std::string t = strip(rest);
    if (t.empty()) manifest_error(line, "missing value after '='");
    if (t.front() == '[') {
        if (t.back() != ']') manifest_error(line, "array must close on the same line");
        std::string body = t.substr(1, t.size() - 2);
        ManifestValue val;
        val.line = line;
        std::vector<ManifestValue> items;
        std::string cur;
        for (char c : body) {
            if (c == ',') {
                std::string item = strip(cur);
                if (item.empty()) manifest_error(line, "empty array element");
                items.push_back(parse_scalar(item, line));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        std::string last = strip(cur);
        if (!last.empty()) items.push_back(parse_scalar(last, line));
        else if (!items.empty()) manifest_error(line, "trailing comma in array");
        val.v = std::move(items);
        return val;
    }
    return parse_scalar(t, line);
}

// removes a trailing comment, respecting quoted strings
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

}  // namespace

Manifest parse_manifest(const std::string& text) {
    Manifest m;
    ManifestTable* current = &m.root;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            bool array = line.size() > 1 && line[1] == '[';
            std::string close = array ? "]]" : "]";
            if (line.size() < 2 + close.size() ||
                line.compare(line.size() - close.size(), close.size(), close) != 0)
                manifest_error(lineno, "malformed table header " + line);
            std::string name =
                strip(line.substr(array ? 2 : 1, line.size() - (array ? 4 : 2)));
            if (name.empty()) manifest_error(lineno, "empty table name");
            if (array) {
                m.table_arrays[name].emplace_back();
                current = &m.table_arrays[name].back();
            } else {
                if (m.tables.count(name)) manifest_error(lineno, "duplicate table " + name);
                current = &m.tables[name];
            }
            current->line = lineno;
            continue;
        }
        size_t eq = std::string::npos;
        bool quoted = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            else if (line[i] == '=' && !quoted) { eq = i; break; }
        }
        if (eq == std::string::npos) manifest_error(lineno, "expected key = value");
        std::string key = strip(line.substr(0, eq));
        if (key.empty()) manifest_error(lineno, "empty key");
        if (key.find_first_of(" \t.") != std::string::npos)
            manifest_error(lineno, "key '" + key + "' must be a bare single-level name");
        if (current->values.count(key)) manifest_error(lineno, "duplicate key '" + key + "'");
        current->values[key] = parse_value(line.substr(eq + 1), lineno);
    }
    return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
    try {
        return parse_manifest(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace emca
