#include "litmine/filter.hpp"

#include "litmine/csv.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <algorithm>
#include <exception>
#include <set>
#include <thread>

namespace litmine::filter {

namespace {

boost::regex build_regex(const std::string& source, const PatternFlags& flags) {
    boost::regex::flag_type syntax = boost::regex::perl;
    if (flags.case_insensitive) {
        syntax |= boost::regex::icase;
    }
    syntax |= flags.dot_matches_newline ? boost::regex::mod_s : boost::regex::no_mod_s;
    const std::string body = flags.whole_word ? "(?<![[:alnum:]_])(?:" + source + ")(?![[:alnum:]_])" : source;
    return boost::regex(body, syntax);
}

} // namespace

std::size_t PatternSet::count(std::size_t i, std::string_view text) const {
    const auto& re = entries_[i].regex;
    boost::cregex_iterator it(text.data(), text.data() + text.size(), re);
    return static_cast<std::size_t>(std::distance(it, boost::cregex_iterator{}));
}

bool PatternSet::matches(std::size_t i, std::string_view text) const {
    return boost::regex_search(text.data(), text.data() + text.size(), entries_[i].regex);
}

PatternSet compile_patterns(const std::vector<PatternSpec>& specs, PatternFlags flags, bool allow_empty) {
    if (specs.empty() && !allow_empty) {
        throw Error("pattern spec is empty");
    }
    PatternSet set;
    set.flags_ = flags;
    std::set<std::string> seen;
    for (const auto& spec : specs) {
        if (spec.regex.empty()) {
            throw Error("pattern '" + spec.label + "' has an empty regex");
        }
        if (!seen.insert(spec.label).second) {
            throw Error("duplicate pattern label '" + spec.label + "'");
        }
        try {
            set.entries_.push_back({spec.label, spec.regex, spec.category, build_regex(spec.regex, flags)});
        } catch (const boost::regex_error& e) {
            throw Error("pattern '" + spec.label + "' does not compile: " + e.what());
        }
    }
    return set;
}

std::vector<PatternSpec> read_pattern_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read pattern file " + path.string());
    }
    std::vector<PatternSpec> specs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto obj = nlohmann::json::parse(line);
            PatternSpec spec;
            spec.regex = obj.at("regex").get<std::string>();
            spec.label = obj.value("label", spec.regex);
            spec.category = obj.value("category", std::string{});
            specs.push_back(std::move(spec));
        } catch (const nlohmann::json::exception& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return specs;
}

KeywordHits match_document(const corpus::Document& doc, const PatternSet& patterns) {
    KeywordHits hits(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        auto& h = hits[i];
        h.title_count = doc.title.empty() ? 0 : patterns.count(i, doc.title);
        h.abstract_count = doc.abstract.empty() ? 0 : patterns.count(i, doc.abstract);
        h.in_title = h.title_count > 0;
        h.in_abstract = h.abstract_count > 0;
    }
    return hits;
}

FrequencyTable FrequencyTable::for_patterns(const PatternSet& patterns) {
    FrequencyTable table;
    for (const auto& e : patterns.entries()) {
        table.rows.push_back({e.label, 0, 0, 0});
    }
    return table;
}

void FrequencyTable::add(const KeywordHits& hits) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
        rows[i].abstract_docs += hits[i].in_abstract ? 1 : 0;
        rows[i].title_docs += hits[i].in_title ? 1 : 0;
        rows[i].both_docs += hits[i].any() ? 1 : 0;
    }
}

void FrequencyTable::merge(const FrequencyTable& other) {
    if (other.rows.size() != rows.size()) {
        throw Error("cannot merge frequency tables of different shapes");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].abstract_docs += other.rows[i].abstract_docs;
        rows[i].title_docs += other.rows[i].title_docs;
        rows[i].both_docs += other.rows[i].both_docs;
    }
}

FrequencyRow FrequencyTable::totals() const {
    FrequencyRow sum{"SUM", 0, 0, 0};
    for (const auto& r : rows) {
        sum.abstract_docs += r.abstract_docs;
        sum.title_docs += r.title_docs;
        sum.both_docs += r.both_docs;
    }
    return sum;
}

void FrequencyTable::write_csv(std::ostream& out) const {
    out << "label,abstract,title,both\n";
    auto emit = [&](const FrequencyRow& r) {
        out << csv::field(r.label) << ',' << r.abstract_docs << ',' << r.title_docs << ',' << r.both_docs << '\n';
    };
    for (const auto& r : rows) {
        emit(r);
    }
    emit(totals());
}

FrequencyTable FrequencyTable::read_csv(std::istream& in) {
    FrequencyTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("frequency CSV is empty");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto f = csv::split_line(line);
        if (f.size() != 4) {
            throw Error("frequency CSV row has " + std::to_string(f.size()) + " fields");
        }
        if (f[0] == "SUM") {
            continue;
        }
        table.rows.push_back({f[0], std::stoul(f[1]), std::stoul(f[2]), std::stoul(f[3])});
    }
    return table;
}

FilterResult filter_corpus(const corpus::CorpusStore& store, const PatternSet& patterns, bool require_abstract,
                           unsigned threads) {
    const unsigned text_fields = corpus::kAllFields;
    const std::size_t n = store.doc_count();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));

    std::vector<FilterResult> shards(threads);
    auto work = [&](unsigned t) {
        auto& shard = shards[t];
        shard.table = FrequencyTable::for_patterns(patterns);
        const std::size_t begin = n * t / threads;
        const std::size_t end = n * (t + 1) / threads;
        store.for_range(begin, end, text_fields, [&](std::size_t, const corpus::Document& doc) {
            const auto hits = match_document(doc, patterns);
            shard.table.add(hits);
            const bool any = std::any_of(hits.begin(), hits.end(), [](const LabelHits& h) { return h.any(); });
            if (!any) {
                return;
            }
            ++shard.matched;
            if (require_abstract && !doc.has_abstract()) {
                ++shard.dropped_without_abstract;
                return;
            }
            shard.documents.push_back(doc);
        });
    };

    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::exception_ptr> failures(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    work(t);
                } catch (...) {
                    failures[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        for (auto& f : failures) {
            if (f) {
                std::rethrow_exception(f);
            }
        }
    }

    FilterResult result;
    result.table = FrequencyTable::for_patterns(patterns);
    for (auto& shard : shards) {
        result.table.merge(shard.table);
        result.matched += shard.matched;
        result.dropped_without_abstract += shard.dropped_without_abstract;
        std::move(shard.documents.begin(), shard.documents.end(), std::back_inserter(result.documents));
    }
    return result;
}

} // namespace litmine::filter
