#include "litmine/textstats.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

namespace litmine::textstats {

namespace {

struct Span {
    std::string token;
    std::size_t begin;
    std::size_t end;
};

/// Decodes one UTF-8 code point at `i`; returns 0xFFFD and advances one byte on malformed input.
char32_t decode(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= s.size()) {
            return -1;
        }
        const auto b = static_cast<unsigned char>(s[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const int c = cont(static_cast<std::size_t>(k));
        if (c < 0) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    if (cp == 0xFFFD || cp <= 0xBF || cp == 0xD7 || cp == 0xF7) {
        return false;
    }
    if ((cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFE30 && cp <= 0xFE4F) ||
        (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
        (cp >= 0xFF5B && cp <= 0xFF65)) {
        return false;
    }
    return true;
}

char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') {
        return cp + 32;
    }
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) {
        return cp + 32;
    }
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) {
        return cp + 32;
    }
    if (cp >= 0x410 && cp <= 0x42F) {
        return cp + 32;
    }
    if (cp >= 0x400 && cp <= 0x40F) {
        return cp + 80;
    }
    return cp;
}

std::vector<Span> tokenize_spans(std::string_view text) {
    std::vector<Span> spans;
    std::size_t i = 0;
    std::string current;
    std::size_t begin = 0;
    while (i < text.size()) {
        const std::size_t at = i;
        const char32_t cp = decode(text, i);
        if (is_word_char(cp)) {
            if (current.empty()) {
                begin = at;
            }
            encode(to_lower(cp), current);
        } else if (!current.empty()) {
            spans.push_back({std::move(current), begin, at});
            current.clear();
        }
    }
    if (!current.empty()) {
        spans.push_back({std::move(current), begin, text.size()});
    }
    return spans;
}

} // namespace

TokenList tokenize(std::string_view text) {
    TokenList tokens;
    for (auto& s : tokenize_spans(text)) {
        tokens.push_back(std::move(s.token));
    }
    return tokens;
}

const std::set<std::string, std::less<>>& english_stopwords() {
    static const std::set<std::string, std::less<>> words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll", "you'd",
        "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's", "her", "hers",
        "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
        "who", "whom", "this", "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be", "been",
        "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
        "or", "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against", "between",
        "into", "through", "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out",
        "on", "off", "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
        "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
        "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't",
        "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn",
        "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't",
        "isn", "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
        "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
    };
    return words;
}

TokenList preprocess(std::string_view text, const PreprocessConfig& config) {
    if (config.stopwords.empty()) {
        throw Error("preprocess requires a non-empty stopword list");
    }
    TokenList out;
    for (auto& raw : tokenize(text)) {
        if (config.stopwords.contains(raw)) {
            continue;
        }
        std::string norm = raw;
        if (config.normalizer) {
            // Bounded fixpoint iteration; suffix stripping never lengthens a word overall.
            for (int round = 0; round < 8; ++round) {
                std::string next = config.normalizer->normalize(norm);
                if (next == norm) {
                    break;
                }
                norm = std::move(next);
            }
        }
        if (norm.empty() || config.stopwords.contains(norm)) {
            continue;
        }
        out.push_back(std::move(norm));
    }
    return out;
}

void accumulate_ngrams(NgramCounts& into, const TokenList& tokens, std::size_t n) {
    if (n == 0) {
        throw Error("n-gram order must be at least 1");
    }
    if (tokens.size() < n) {
        return;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++into[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                        tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
}

NgramCounts ngrams(const TokenList& tokens, std::size_t n) {
    NgramCounts counts;
    accumulate_ngrams(counts, tokens, n);
    return counts;
}

std::map<int, double> yearly_share(const YearCounts& subset, const YearCounts& universe) {
    std::map<int, double> bps;
    for (const auto& [year, total] : universe) {
        const auto it = subset.find(year);
        const std::size_t part = it == subset.end() ? 0 : it->second;
        if (part > total) {
            throw Error("subset count exceeds universe count for year " + std::to_string(year));
        }
        bps[year] = total == 0 ? 0.0 : 10000.0 * static_cast<double>(part) / static_cast<double>(total);
    }
    for (const auto& [year, part] : subset) {
        if (!universe.contains(year) && part > 0) {
            throw Error("universe has no documents for year " + std::to_string(year));
        }
    }
    return bps;
}

Taxonomy make_taxonomy(std::string name, const std::vector<std::pair<std::string, std::string>>& category_regexes,
                       std::optional<ContextRule> context) {
    std::vector<std::string> order;
    std::map<std::string, std::string> merged;
    for (const auto& [category, regex] : category_regexes) {
        auto [it, inserted] = merged.emplace(category, "(?:" + regex + ")");
        if (inserted) {
            order.push_back(category);
        } else {
            it->second += "|(?:" + regex + ")";
        }
    }
    std::vector<filter::PatternSpec> specs;
    for (const auto& category : order) {
        specs.push_back({category, merged[category], name});
    }
    Taxonomy taxonomy;
    taxonomy.name = std::move(name);
    taxonomy.patterns = filter::compile_patterns(specs);
    taxonomy.context = std::move(context);
    return taxonomy;
}

std::vector<Taxonomy> read_taxonomy_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read taxonomy file " + path.string());
    }
    struct Pending {
        std::vector<std::pair<std::string, std::string>> regexes;
        std::optional<ContextRule> context;
    };
    std::vector<std::string> order;
    std::map<std::string, Pending> pending;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto obj = nlohmann::json::parse(line);
            const auto name = obj.at("taxonomy").get<std::string>();
            auto [it, inserted] = pending.try_emplace(name);
            if (inserted) {
                order.push_back(name);
            }
            it->second.regexes.emplace_back(obj.at("category").get<std::string>(), obj.at("regex").get<std::string>());
            if (obj.contains("context_cues")) {
                ContextRule rule;
                rule.cues = obj.at("context_cues").get<std::vector<std::string>>();
                rule.window = obj.value("context_window", std::size_t{6});
                it->second.context = std::move(rule);
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::vector<Taxonomy> out;
    for (const auto& name : order) {
        out.push_back(make_taxonomy(name, pending[name].regexes, pending[name].context));
    }
    return out;
}

bool category_matches(const Taxonomy& taxonomy, std::size_t i, std::string_view text) {
    const auto& re = taxonomy.patterns[i].regex;
    if (!taxonomy.context) {
        return boost::regex_search(text.data(), text.data() + text.size(), re);
    }
    const auto& rule = *taxonomy.context;
    const auto spans = tokenize_spans(text);
    auto is_cue = [&](const std::string& token) {
        return std::any_of(rule.cues.begin(), rule.cues.end(),
                           [&](const std::string& cue) { return token.starts_with(cue); });
    };
    boost::cregex_iterator it(text.data(), text.data() + text.size(), re);
    for (; it != boost::cregex_iterator{}; ++it) {
        const auto b = static_cast<std::size_t>(it->position());
        const auto e = b + static_cast<std::size_t>(it->length());
        // Token range overlapping the match (or the insertion point for token-free matches).
        std::size_t first = spans.size();
        std::size_t last = 0;
        for (std::size_t t = 0; t < spans.size(); ++t) {
            if (spans[t].end > b && spans[t].begin < std::max(e, b + 1)) {
                first = std::min(first, t);
                last = t;
            }
        }
        if (first == spans.size()) {
            first = static_cast<std::size_t>(
                std::lower_bound(spans.begin(), spans.end(), b, [](const Span& s, std::size_t pos) { return s.end <= pos; }) -
                spans.begin());
            last = first;
        }
        const std::size_t lo = first > rule.window ? first - rule.window : 0;
        const std::size_t hi = std::min(spans.empty() ? 0 : spans.size() - 1, last + rule.window);
        for (std::size_t t = lo; t <= hi && t < spans.size(); ++t) {
            if (is_cue(spans[t].token)) {
                return true;
            }
        }
    }
    return false;
}

std::size_t TrendSeries::total(std::size_t category) const {
    std::size_t sum = 0;
    for (const auto& [year, row] : counts) {
        sum += row[category];
    }
    return sum;
}

void TrendSeries::write_csv(std::ostream& out) const {
    out << "year,category,count\n";
    for (const auto& [year, row] : counts) {
        for (std::size_t c = 0; c < categories.size(); ++c) {
            out << year << ',' << categories[c] << ',' << row[c] << '\n';
        }
    }
}

std::string document_text(const corpus::Document& doc) {
    if (doc.abstract.empty()) {
        return doc.title;
    }
    return doc.title + " " + doc.abstract;
}

TrendSeries taxonomy_trends(const corpus::DocumentList& docs, const Taxonomy& taxonomy) {
    TrendSeries series;
    for (std::size_t c = 0; c < taxonomy.size(); ++c) {
        series.categories.push_back(taxonomy.category(c));
    }
    for (const auto& doc : docs) {
        if (!doc.year) {
            continue;
        }
        ++series.year_totals[*doc.year];
        auto& row = series.counts[*doc.year];
        row.resize(taxonomy.size(), 0);
        const std::string text = document_text(doc);
        for (std::size_t c = 0; c < taxonomy.size(); ++c) {
            if (category_matches(taxonomy, c, text)) {
                ++row[c];
            }
        }
    }
    return series;
}

std::vector<GazetteerEntry> read_gazetteer_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read gazetteer file " + path.string());
    }
    std::vector<GazetteerEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto obj = nlohmann::json::parse(line);
            entries.push_back({obj.at("entity").get<std::string>(), obj.at("aliases").get<std::vector<std::string>>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return entries;
}

namespace {

std::string regex_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) {
            out += '\\';
        }
        out += c;
    }
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::size_t>> gazetteer_entities(const corpus::DocumentList& docs,
                                                                    const std::vector<GazetteerEntry>& gazetteer) {
    if (gazetteer.empty()) {
        throw Error("gazetteer is empty");
    }
    std::vector<boost::regex> patterns;
    for (const auto& entry : gazetteer) {
        if (entry.aliases.empty()) {
            throw Error("gazetteer entity '" + entry.entity + "' has no aliases");
        }
        std::string alternation;
        for (const auto& alias : entry.aliases) {
            alternation += (alternation.empty() ? "" : "|") + regex_escape(alias);
        }
        patterns.emplace_back("(?<![[:alnum:]])(?:" + alternation + ")(?![[:alnum:]])",
                              boost::regex::perl | boost::regex::icase);
    }
    std::vector<std::pair<std::string, std::size_t>> counts;
    for (const auto& entry : gazetteer) {
        counts.emplace_back(entry.entity, 0);
    }
    for (const auto& doc : docs) {
        const std::string text = document_text(doc);
        for (std::size_t e = 0; e < patterns.size(); ++e) {
            if (boost::regex_search(text, patterns[e])) {
                ++counts[e].second;
            }
        }
    }
    return counts;
}

} // namespace litmine::textstats
