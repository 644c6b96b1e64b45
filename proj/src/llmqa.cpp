#include "litmine/llmqa.hpp"

#include "litmine/csv.hpp"

#include <boost/regex.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <ostream>
#include <set>

namespace litmine::llmqa {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    for (auto& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

std::string upper(std::string s) {
    for (auto& c : s) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return s;
}

std::string qtag(std::size_t i) { return "Q" + std::to_string(i + 1); }

const std::string kSummaryPlaceholder = "<one sentence>";

} // namespace

void QuestionSet::validate() const {
    if (questions.empty()) {
        throw Error("question set is empty");
    }
    std::set<std::string> seen;
    for (const auto& q : questions) {
        if (q.key.empty() || q.text.empty()) {
            throw Error("question with empty key or text");
        }
        if (!seen.insert(q.key).second) {
            throw Error("duplicate question key '" + q.key + "'");
        }
    }
}

std::size_t QuestionSet::index_of(const std::string& key) const {
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (questions[i].key == key) {
            return i;
        }
    }
    throw Error("unknown question key '" + key + "'");
}

QuestionSet default_questions() {
    return {{
        {"comparison", "If there is a comparison of different models or methods used.", AnswerKind::yes_no},
        {"hyperparameter_optimization", "If there is hyperparameter optimization.", AnswerKind::yes_no},
        {"data_frequency", "The frequency of data used.", AnswerKind::free_text},
        {"loss_function", "The loss function used.", AnswerKind::free_text},
        {"best_model", "The best model (chosen in comparison).", AnswerKind::free_text},
    }};
}

Scope parse_scope(const std::string& name) {
    if (name == "abstract") {
        return Scope::abstract;
    }
    if (name == "fulltext") {
        return Scope::fulltext;
    }
    throw Error("unknown text scope '" + name + "' (expected abstract or fulltext)");
}

std::string scope_name(Scope scope) { return scope == Scope::abstract ? "abstract" : "fulltext"; }

std::string verdict_name(Verdict verdict) {
    switch (verdict) {
    case Verdict::yes:
        return "yes";
    case Verdict::no:
        return "no";
    case Verdict::not_applicable:
        return "not_applicable";
    case Verdict::failed:
        return "failed";
    }
    return "failed";
}

Verdict parse_verdict_name(const std::string& name) {
    for (auto v : {Verdict::yes, Verdict::no, Verdict::not_applicable, Verdict::failed}) {
        if (verdict_name(v) == name) {
            return v;
        }
    }
    throw Error("unknown verdict '" + name + "'");
}

const Answer& AnswerRecord::answer(const std::string& key) const {
    const auto it = answers.find(key);
    if (it == answers.end()) {
        throw Error("record '" + doc_id + "' has no answer for '" + key + "'");
    }
    return it->second;
}

nlohmann::json to_json(const AnswerRecord& r) {
    nlohmann::json answers = nlohmann::json::object();
    for (const auto& [key, a] : r.answers) {
        answers[key] = {{"verdict", verdict_name(a.verdict)}, {"value", a.value}, {"elaboration", a.elaboration}};
    }
    return {{"doc_id", r.doc_id},
            {"answers", answers},
            {"model", r.model},
            {"scope", scope_name(r.scope)},
            {"timestamp", r.timestamp ? nlohmann::json(*r.timestamp) : nlohmann::json(nullptr)},
            {"attention_check_passed", r.attention_check_passed},
            {"task_summary", r.task_summary},
            {"violations", r.violations}};
}

AnswerRecord record_from_json(const nlohmann::json& j) {
    try {
        AnswerRecord r;
        r.doc_id = j.at("doc_id").get<std::string>();
        for (const auto& [key, a] : j.at("answers").items()) {
            Answer ans;
            ans.verdict = parse_verdict_name(a.at("verdict").get<std::string>());
            ans.value = a.value("value", "");
            ans.elaboration = a.value("elaboration", "");
            r.answers[key] = std::move(ans);
        }
        r.model = j.value("model", "");
        r.scope = parse_scope(j.value("scope", "abstract"));
        if (j.contains("timestamp") && !j.at("timestamp").is_null()) {
            r.timestamp = j.at("timestamp").get<std::string>();
        }
        r.attention_check_passed = j.value("attention_check_passed", false);
        r.task_summary = j.value("task_summary", "");
        r.violations = j.value("violations", std::vector<std::string>{});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed answer record: ") + e.what());
    }
}

void write_records(const std::filesystem::path& path, const std::vector<AnswerRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const auto& r : records) {
        out << to_json(r).dump() << '\n';
    }
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

std::vector<AnswerRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::vector<AnswerRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string scoped_text(const corpus::Document& doc, Scope scope) {
    if (scope == Scope::fulltext && (!doc.body || trim(*doc.body).empty())) {
        throw Error("document '" + doc.id + "' has no body for fulltext scope");
    }
    if (trim(doc.title).empty() && trim(doc.abstract).empty() && scope == Scope::abstract) {
        throw Error("document '" + doc.id + "' has no title or abstract");
    }
    std::string text = "Title: " + doc.title + "\nAbstract: " + doc.abstract + "\n";
    if (scope == Scope::fulltext) {
        text += "Body:\n" + *doc.body + "\n";
    }
    return text;
}

std::string build_prompt(const corpus::Document& doc, Scope scope, const QuestionSet& questions) {
    questions.validate();
    const std::string text = scoped_text(doc, scope);
    std::string p;
    p += "You are reviewing a single research paper. Read the text below and answer each question about it.\n\n";
    p += "Questions:\n";
    for (std::size_t i = 0; i < questions.size(); ++i) {
        p += qtag(i) + ". " + questions.questions[i].text + "\n";
    }
    p += "\nFirst summarise, in one sentence, the task you have been asked to do. Put it on the TASK_SUMMARY line.\n";
    p += "For every question give a verdict (yes, no or not applicable) and a one-line elaboration that quotes or "
         "paraphrases the supporting passage. A yes verdict must have a non-empty elaboration.\n";
    bool any_free = false;
    for (const auto& q : questions.questions) {
        any_free = any_free || q.kind == AnswerKind::free_text;
    }
    if (any_free) {
        p += "Questions with an ANSWER line also need a short answer (a few words, e.g. a frequency, a loss function "
             "or a model name).\n";
    }
    p += "Reply with exactly this block and nothing else, one field per line:\n\n";
    p += "BEGIN_ANSWERS\n";
    p += "TASK_SUMMARY: " + kSummaryPlaceholder + "\n";
    for (std::size_t i = 0; i < questions.size(); ++i) {
        p += qtag(i) + "_VERDICT: <yes|no|not applicable>\n";
        if (questions.questions[i].kind == AnswerKind::free_text) {
            p += qtag(i) + "_ANSWER: <short answer>\n";
        }
        p += qtag(i) + "_ELABORATION: <one line>\n";
    }
    p += "END_ANSWERS\n\n";
    p += "Text (" + scope_name(scope) + "):\n" + text;
    return p;
}

namespace {

std::optional<Verdict> read_verdict(std::string s) {
    s = lower(trim(s));
    while (!s.empty() && (s.back() == '.' || s.back() == '!')) {
        s.pop_back();
    }
    if (s == "yes") {
        return Verdict::yes;
    }
    if (s == "no") {
        return Verdict::no;
    }
    if (s == "not applicable" || s == "not-applicable" || s == "not_applicable" || s == "n/a" || s == "na") {
        return Verdict::not_applicable;
    }
    return std::nullopt;
}

} // namespace

AnswerRecord parse_answer(const std::string& raw, const QuestionSet& questions) {
    questions.validate();
    if (trim(raw).empty()) {
        throw Error("empty response");
    }
    std::vector<std::string> lines;
    {
        std::size_t start = 0;
        while (start <= raw.size()) {
            const auto nl = raw.find('\n', start);
            lines.push_back(trim(std::string_view(raw).substr(start, nl == std::string::npos ? nl : nl - start)));
            if (nl == std::string::npos) {
                break;
            }
            start = nl + 1;
        }
    }
    const auto begin = std::find_if(lines.begin(), lines.end(),
                                    [](const std::string& l) { return upper(l) == "BEGIN_ANSWERS"; });
    if (begin == lines.end()) {
        throw Error("no answer block found");
    }
    AnswerRecord r;
    std::map<std::string, std::string> fields;
    for (auto it = std::next(begin); it != lines.end(); ++it) {
        if (upper(*it) == "END_ANSWERS") {
            break;
        }
        const auto colon = it->find(':');
        if (colon == std::string::npos) {
            continue;
        }
        const std::string key = upper(trim(std::string_view(*it).substr(0, colon)));
        const std::string value = trim(std::string_view(*it).substr(colon + 1));
        if (!fields.emplace(key, value).second) {
            r.violations.push_back("duplicate field " + key + "; first kept");
        }
    }
    if (const auto it = fields.find("TASK_SUMMARY"); it != fields.end()) {
        r.task_summary = it->second;
    }
    r.attention_check_passed = !r.task_summary.empty() && r.task_summary != kSummaryPlaceholder;
    if (!r.attention_check_passed) {
        r.violations.push_back("attention check missing");
    }
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto& q = questions.questions[i];
        const std::string tag = qtag(i);
        Answer a;
        if (const auto it = fields.find(tag + "_ELABORATION"); it != fields.end()) {
            a.elaboration = it->second;
        }
        if (const auto it = fields.find(tag + "_ANSWER"); it != fields.end()) {
            a.value = it->second;
        }
        const auto v = fields.find(tag + "_VERDICT");
        if (v == fields.end()) {
            r.violations.push_back(tag + " (" + q.key + "): verdict missing");
        } else if (const auto parsed = read_verdict(v->second)) {
            a.verdict = *parsed;
        } else {
            r.violations.push_back(tag + " (" + q.key + "): unparseable verdict '" + v->second + "'");
        }
        if (a.verdict == Verdict::yes && a.elaboration.empty()) {
            r.violations.push_back(tag + " (" + q.key + "): yes without elaboration");
        }
        if (a.verdict == Verdict::yes && q.kind == AnswerKind::free_text && a.value.empty()) {
            r.violations.push_back(tag + " (" + q.key + "): yes without answer");
        }
        r.answers[q.key] = std::move(a);
    }
    return r;
}

namespace {

struct BaselineGroup {
    const char* key;
    const char* search;
    // Empty when the elaboration is the first match itself.
    const char* findall;
};

// Patterns as published, including the findall variants where the sentence
// tail `.*?\.` binds to the last alternative only.
const BaselineGroup kBaseline[] = {
    {"comparison", R"(comparison|compare|benchmark|evaluate|versus|comparison study|side-by-side|comparative analysis)",
     R"(comparison|compare|benchmark|evaluate|versus|comparison study|side-by-side|comparative analysis.*?\.)"},
    {"hyperparameter_optimization",
     R"(hyperparameter|tuning|optimization|grid search|random search|bayesian optimization|hyperparameter tuning|parameter search|hyper-optimization)",
     R"(hyperparameter|tuning|optimization|grid search|random search|bayesian optimization|hyperparameter tuning|parameter search|hyper-optimization.*?\.)"},
    {"data_frequency", R"(daily|weekly|monthly|minute-level|hourly|annually|yearly|bi-weekly|quarterly)", ""},
    {"loss_function",
     R"(mean squared error|mse|mean absolute error|mae|cross-entropy|log loss|hinge loss|squared loss|absolute error|mean bias)",
     ""},
    {"best_model",
     R"(best model|optimal model|most accurate|highest performing|top model|leading model|best-performing)",
     R"(best model|optimal model|most accurate|highest performing|top model|leading model|best-performing.*?\.)"},
};

struct CompiledBaseline {
    std::string key;
    boost::regex search;
    std::optional<boost::regex> findall;
};

const std::vector<CompiledBaseline>& baseline_patterns() {
    static const std::vector<CompiledBaseline> compiled = [] {
        // Python `re` semantics: `.` stops at line breaks.
        const auto flags = boost::regex::perl | boost::regex::icase | boost::regex::no_mod_s;
        std::vector<CompiledBaseline> out;
        for (const auto& g : kBaseline) {
            CompiledBaseline c{g.key, boost::regex(g.search, flags), std::nullopt};
            if (*g.findall) {
                c.findall = boost::regex(g.findall, flags);
            }
            out.push_back(std::move(c));
        }
        return out;
    }();
    return compiled;
}

} // namespace

AnswerRecord regex_baseline_text(const std::string& text) {
    AnswerRecord r;
    r.model = "regex-baseline";
    r.attention_check_passed = true;
    const auto questions = default_questions();
    for (const auto& g : baseline_patterns()) {
        Answer a;
        a.verdict = Verdict::no;
        boost::smatch m;
        if (boost::regex_search(text, m, g.search)) {
            a.verdict = Verdict::yes;
            if (g.findall) {
                bool first = true;
                for (boost::sregex_iterator it(text.begin(), text.end(), *g.findall), end; it != end; ++it) {
                    if (!first) {
                        a.elaboration += ' ';
                    }
                    first = false;
                    a.elaboration += it->str();
                }
            } else {
                a.elaboration = m.str(0);
            }
            if (questions.questions[questions.index_of(g.key)].kind == AnswerKind::free_text) {
                a.value = a.elaboration;
            }
        }
        r.answers[g.key] = std::move(a);
    }
    return r;
}

AnswerRecord regex_baseline(const corpus::Document& doc, Scope scope) {
    if (scope == Scope::fulltext && !doc.body) {
        throw Error("document '" + doc.id + "' has no body for fulltext scope");
    }
    std::string text = doc.title + " " + doc.abstract;
    if (scope == Scope::fulltext) {
        text += "\n" + *doc.body;
    }
    auto r = regex_baseline_text(text);
    r.doc_id = doc.id;
    r.scope = scope;
    return r;
}

nlohmann::json to_json(const RequestLogEntry& e) {
    return {{"doc_id", e.doc_id},           {"status", e.status},   {"prompt_hash", e.prompt_hash},
            {"prompt_chars", e.prompt_chars}, {"attempts", e.attempts}, {"retries", e.retries},
            {"retry_log", e.retry_log},      {"response", e.response}, {"error", e.error}};
}

namespace {

struct DocOutcome {
    std::optional<AnswerRecord> record;
    RequestLogEntry log;
};

AnswerRecord failed_record(const corpus::Document& doc, const QuestionSet& questions, const std::string& why) {
    AnswerRecord r;
    r.doc_id = doc.id;
    for (const auto& q : questions.questions) {
        r.answers[q.key] = Answer{};
    }
    r.violations.push_back(why);
    return r;
}

DocOutcome run_one(const corpus::Document& doc, const QuestionSet& questions, chat::ChatTransport& transport,
                   const RunOptions& options) {
    DocOutcome out;
    out.log.doc_id = doc.id;
    const std::string text = scoped_text(doc, options.scope);
    if (text.size() > options.max_text_chars) {
        out.log.status = "too_large";
        out.log.error = "text of " + std::to_string(text.size()) + " characters exceeds the budget of " +
                        std::to_string(options.max_text_chars);
        return out;
    }
    const std::string prompt = build_prompt(doc, options.scope, questions);
    out.log.prompt_chars = prompt.size();
    const auto asked = chat::ask(transport, prompt, options.policy);
    out.log.prompt_hash = asked.prompt_hash;
    out.log.attempts = asked.attempts;
    out.log.retries = asked.retries;
    out.log.retry_log = asked.log;
    out.log.response = asked.response;
    out.log.error = asked.error;
    out.log.status = chat::ask_status_name(asked.status);
    if (asked.status == chat::AskStatus::too_large) {
        return out;
    }
    AnswerRecord r;
    if (asked.status == chat::AskStatus::failed) {
        r = failed_record(doc, questions, "transport failure: " + asked.error);
    } else {
        try {
            r = parse_answer(asked.response, questions);
        } catch (const Error& e) {
            r = failed_record(doc, questions, std::string("unparsed response: ") + e.what());
            out.log.status = "unparsed";
        }
    }
    r.doc_id = doc.id;
    r.model = transport.model();
    r.scope = options.scope;
    r.timestamp = options.timestamp;
    out.record = std::move(r);
    return out;
}

} // namespace

RunResult run_questions(const corpus::DocumentList& docs, const QuestionSet& questions,
                        chat::ChatTransport& transport, const RunOptions& options) {
    questions.validate();
    const std::size_t wave = std::max<std::size_t>(1, options.max_in_flight);
    std::vector<DocOutcome> outcomes;
    outcomes.reserve(docs.size());
    for (std::size_t start = 0; start < docs.size(); start += wave) {
        const std::size_t end = std::min(docs.size(), start + wave);
        if (wave == 1) {
            outcomes.push_back(run_one(docs[start], questions, transport, options));
            continue;
        }
        std::vector<std::future<DocOutcome>> pending;
        for (std::size_t i = start; i < end; ++i) {
            pending.push_back(std::async(std::launch::async, [&, i] {
                return run_one(docs[i], questions, transport, options);
            }));
        }
        for (auto& f : pending) {
            outcomes.push_back(f.get());
        }
    }
    RunResult result;
    for (auto& o : outcomes) {
        if (o.log.status == "too_large") {
            result.too_large.push_back(o.log.doc_id);
        } else if (o.log.status == "failed") {
            result.failed.push_back(o.log.doc_id);
        } else if (o.log.status == "unparsed") {
            result.unparsed.push_back(o.log.doc_id);
        }
        if (o.record) {
            result.records.push_back(std::move(*o.record));
        }
        result.log.push_back(std::move(o.log));
    }
    return result;
}

std::size_t ConfusionMatrix::total_a() const noexcept { return a[0][0] + a[0][1] + a[1][0] + a[1][1]; }
std::size_t ConfusionMatrix::total_b() const noexcept { return b[0][0] + b[0][1] + b[1][0] + b[1][1]; }

long long ConfusionMatrix::difference(int outer, int inner) const noexcept {
    return static_cast<long long>(a[outer][inner]) - static_cast<long long>(b[outer][inner]);
}

namespace {

std::string axis_label(const std::string& key, int yes) {
    if (key == "hyperparameter_optimization") {
        return yes ? "With HPO" : "No HPO";
    }
    if (key == "comparison") {
        return yes ? "Comparing models" : "No model comparison";
    }
    return (yes ? "With " : "No ") + key;
}

} // namespace

void ConfusionMatrix::write_csv(std::ostream& out) const {
    out << "group,category," << csv::field(name_a) << ',' << csv::field(name_b) << ",difference\n";
    for (int o = 0; o < 2; ++o) {
        for (int i = 0; i < 2; ++i) {
            out << csv::field(axis_label(outer_key, o)) << ',' << csv::field(axis_label(inner_key, i)) << ','
                << a[o][i] << ',' << b[o][i] << ',' << difference(o, i) << '\n';
        }
    }
    out << ",Total Sum," << total_a() << ',' << total_b() << ',' << total_difference() << '\n';
}

ConfusionMatrix compare_answers(const std::vector<AnswerRecord>& set_a, const std::vector<AnswerRecord>& set_b,
                                const std::string& outer_key, const std::string& inner_key, std::string name_a,
                                std::string name_b) {
    ConfusionMatrix m;
    m.outer_key = outer_key;
    m.inner_key = inner_key;
    m.name_a = std::move(name_a);
    m.name_b = std::move(name_b);
    const auto fill = [&](const std::vector<AnswerRecord>& set, std::size_t (&cells)[2][2]) {
        for (const auto& r : set) {
            const int o = r.answer(outer_key).verdict == Verdict::yes ? 1 : 0;
            const int i = r.answer(inner_key).verdict == Verdict::yes ? 1 : 0;
            ++cells[o][i];
        }
    };
    fill(set_a, m.a);
    fill(set_b, m.b);
    return m;
}

std::string normalize_alias(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    bool space = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        // U+2019 right single quotation mark reads as an apostrophe.
        if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
            static_cast<unsigned char>(text[i + 2]) == 0x99) {
            if (space && !s.empty()) {
                s += ' ';
            }
            space = false;
            s += '\'';
            i += 2;
            continue;
        }
        if (std::isspace(c)) {
            space = true;
            continue;
        }
        if (space && !s.empty()) {
            s += ' ';
        }
        space = false;
        s += static_cast<char>(std::tolower(c));
    }
    while (!s.empty() && s.back() == '.') {
        s.pop_back();
    }
    return trim(s);
}

AliasTable::AliasTable(std::vector<std::pair<std::string, std::vector<std::string>>> groups, std::string fallback)
    : groups_(std::move(groups)), fallback_(std::move(fallback)) {
    if (fallback_.empty()) {
        throw Error("alias table needs a fallback label");
    }
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].first == fallback_) {
            throw Error("label '" + fallback_ + "' is both a group and the fallback");
        }
        for (const auto& alias : groups_[g].second) {
            const auto key = normalize_alias(alias);
            if (key.empty()) {
                throw Error("empty alias in group '" + groups_[g].first + "'");
            }
            const auto [it, fresh] = index_.emplace(key, g);
            if (!fresh && it->second != g) {
                throw Error("alias '" + alias + "' appears in both '" + groups_[it->second].first + "' and '" +
                            groups_[g].first + "'");
            }
        }
    }
}

AliasTable AliasTable::from_json(const nlohmann::json& j) {
    try {
        std::vector<std::pair<std::string, std::vector<std::string>>> groups;
        for (const auto& g : j.at("groups")) {
            groups.emplace_back(g.at("label").get<std::string>(), g.at("aliases").get<std::vector<std::string>>());
        }
        return AliasTable(std::move(groups), j.at("fallback").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed alias table: ") + e.what());
    }
}

AliasTable AliasTable::read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

nlohmann::json AliasTable::json() const {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& [label, aliases] : groups_) {
        groups.push_back({{"label", label}, {"aliases", aliases}});
    }
    return {{"groups", groups}, {"fallback", fallback_}};
}

std::string AliasTable::lookup(const std::string& text, bool* matched) const {
    const auto it = index_.find(normalize_alias(text));
    if (matched) {
        *matched = it != index_.end();
    }
    return it == index_.end() ? fallback_ : groups_[it->second].first;
}

std::vector<std::string> AliasTable::labels() const {
    std::vector<std::string> out;
    for (const auto& g : groups_) {
        out.push_back(g.first);
    }
    out.push_back(fallback_);
    return out;
}

const AliasTable& default_frequency_bins() {
    static const AliasTable table(
        {
            {"Intraday",
             {"Minute", "Milliseconds", "Intra-day", "High-frequency (minute-level)", "Hourly", "30-minute",
              "High-frequency", "Intraday", "5-minute intervals", "15-minute", "High Frequency",
              "30-minute intervals", "5, 10, and 15-minute intervals", "10-minute intervals",
              "Tick-level (every microsecond)", "1-minute intervals", "Tick-level (microseconds)",
              "High-frequency financial data sampled at an interval of one minute",
              "High-frequency financial data sampled at one-minute intervals", "Minute-level",
              "High-frequency (5-minute intervals)"}},
            {"Daily",
             {"Daily", "Daily and weekly", "Daily and minute-level", "Daily and 15-minute intervals",
              "Daily and Monthly", "Daily, Monthly, Yearly"}},
            {"Longer", {"Yearly", "Quarterly", "Monthly", "Weekly", "Various"}},
        },
        "NotSpecified");
    return table;
}

const AliasTable& default_loss_groups() {
    static const AliasTable table(
        {
            {"MSE Related",
             {"Mean Squared Error (MSE)", "Mean Square Error (MSE)", "Mean Squared Error with penalizing coefficient",
              "Sum of Square Errors", "Mean Squared Forecast Error (MSFE)",
              "Mean Squared Error (MSE) and Cross-Entropy Loss"}},
            {"RMSE Related",
             {"Root Mean Square Error (RMSE)", "RMSE", "RMSE and MAPE", "RMSE, MAE, MAPE, Theil's U (U1, U2)"}},
            {"Cross-Entropy Related",
             {"Cross-entropy loss", "Cross-Entropy", "Binary Cross-Entropy", "Categorical Crossentropy",
              "Cross-entropy", "Cross-Entropy Loss", "Softmax loss function"}},
            {"MAPE Related",
             {"MAPE", "Mean Absolute Percentage Error (MAPE), Directional Accuracy (DA), Theil's U, Average "
                      "Relative Variance (ARV)"}},
            {"Sharpe Ratio Related",
             {"Sharpe Ratio", "Differential Sharpe Ratio", "Sharpe Ratio and Mean Squared Drawdown (MSDD)",
              "Sharpe Ratio Maximization"}},
            {"Other Common Loss Functions",
             {"Accuracy", "Classification Error", "Negative Log-Likelihood", "Percentage Error",
              "ε-insensitive Loss Function (ε-ILF)"}},
            {"Specialized/Custom Loss Functions",
             {"Cost function with a regularization term", "Arctangent Cost Function", "Structural loss",
              "Reward function and temporal difference error for DDQN, clipped objective function for PPO",
              "Combination of loss functions for actor and critic networks",
              "Optimization criterion based on annualized rate of return, annualized standard deviation, and "
              "maximum drawdown",
              "Minimization of the smallest singular vector", "Profitability metrics (e.g., return on investment)",
              "Quadratic criterion", "Return on Investment (ROI)", "Wasserstein distance with Gradient Penalty"}},
        },
        "Other/Unspecified");
    return table;
}

namespace {

std::string lookup_warned(const std::string& answer, const AliasTable& table, std::vector<std::string>* warnings,
                          const char* what) {
    bool matched = false;
    auto label = table.lookup(answer, &matched);
    if (!matched && !trim(answer).empty() && warnings) {
        warnings->push_back(std::string("unknown ") + what + " '" + answer + "' -> " + label);
    }
    return label;
}

} // namespace

std::string bin_frequency(const std::string& answer, const AliasTable& bins, std::vector<std::string>* warnings) {
    return lookup_warned(answer, bins, warnings, "frequency");
}

std::string group_loss(const std::string& answer, const AliasTable& groups, std::vector<std::string>* warnings) {
    return lookup_warned(answer, groups, warnings, "loss function");
}

std::vector<std::pair<std::string, std::size_t>> tally(const std::vector<AnswerRecord>& records,
                                                       const std::string& key, const AliasTable& table,
                                                       std::vector<std::string>* warnings) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records) {
        const auto& a = r.answer(key);
        if (a.verdict != Verdict::yes) {
            ++counts[table.fallback()];
            continue;
        }
        const auto& text = a.value.empty() ? a.elaboration : a.value;
        ++counts[lookup_warned(text, table, warnings, key.c_str())];
    }
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& label : table.labels()) {
        out.emplace_back(label, counts[label]);
    }
    return out;
}

const std::vector<std::string>& default_model_categories() {
    static const std::vector<std::string> categories = {
        "Deep Learning Models",
        "Neural Networks (NN)",
        "Reinforcement Learning (RL)",
        "Traditional Machine Learning Models",
        "Support Vector Machine (SVM) Models",
        "Rough Sets",
        "Recurrent Neural Networks and extensions",
        "Ensemble Models",
        "Hybrid and Composite Models",
        "Specialized Models",
        "Others",
    };
    return categories;
}

std::string category_prompt(const Answer& best_model, const std::vector<std::string>& categories) {
    std::string p = "Classify the best model reported by one research paper into exactly one of these categories:\n";
    for (const auto& c : categories) {
        p += "- " + c + "\n";
    }
    p += "\nBest model: " + best_model.value + "\n";
    p += "Explanation: " + best_model.elaboration + "\n";
    p += "\nReply with a single line of the form\nCATEGORY: <category name from the list>\n";
    return p;
}

namespace {

std::optional<std::string> match_category(const std::string& reply, const std::vector<std::string>& categories) {
    std::string text = trim(reply);
    std::size_t start = 0;
    while (start <= reply.size()) {
        const auto nl = reply.find('\n', start);
        const std::string line = trim(std::string_view(reply).substr(start, nl == std::string::npos ? nl : nl - start));
        if (upper(line).rfind("CATEGORY:", 0) == 0) {
            text = trim(std::string_view(line).substr(9));
            break;
        }
        if (nl == std::string::npos) {
            break;
        }
        start = nl + 1;
    }
    const auto wanted = normalize_alias(text);
    for (const auto& c : categories) {
        auto name = normalize_alias(c);
        if (wanted == name) {
            return c;
        }
        // "Neural Networks" names "Neural Networks (NN)".
        if (const auto paren = name.rfind(" ("); paren != std::string::npos && name.back() == ')' &&
                                                 wanted == name.substr(0, paren)) {
            return c;
        }
    }
    return std::nullopt;
}

} // namespace

CategoryTally categorize_models(const std::vector<AnswerRecord>& records, chat::ChatTransport& transport,
                                const chat::AskPolicy& policy, const std::vector<std::string>& categories,
                                const std::string& key) {
    if (categories.empty()) {
        throw Error("category list is empty");
    }
    const std::string others = categories.back();
    CategoryTally out;
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records) {
        Categorization c{r.doc_id, kUnclassified, "unclassified", ""};
        const auto& a = r.answer(key);
        if (a.verdict == Verdict::failed) {
            c.detail = "best-model answer failed";
        } else if (a.verdict != Verdict::yes || (trim(a.value).empty() && trim(a.elaboration).empty())) {
            c.category = others;
            c.status = "not_applicable";
        } else {
            const auto asked = chat::ask(transport, category_prompt(a, categories), policy);
            ++out.requests;
            if (asked.status != chat::AskStatus::ok) {
                c.detail = chat::ask_status_name(asked.status) + ": " + asked.error;
            } else if (auto category = match_category(asked.response, categories)) {
                c.category = *category;
                c.status = "classified";
            } else {
                c.detail = "reply names no category: " + trim(asked.response);
            }
        }
        ++counts[c.category];
        out.records.push_back(std::move(c));
    }
    for (const auto& cat : categories) {
        out.counts.emplace_back(cat, counts[cat]);
    }
    out.counts.emplace_back(kUnclassified, counts[kUnclassified]);
    return out;
}

void write_counts_csv(std::ostream& out, const std::vector<std::pair<std::string, std::size_t>>& counts) {
    out << "label,count\n";
    for (const auto& [label, n] : counts) {
        out << csv::field(label) << ',' << n << '\n';
    }
}

} // namespace litmine::llmqa
