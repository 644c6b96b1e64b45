#include "litmine/corpus.hpp"
#include "litmine/csv.hpp"
#include "litmine/filter.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

using namespace litmine;
using namespace litmine::corpus;

namespace {

std::filesystem::path write_lines(const std::string& dir, const std::vector<std::string>& lines) {
    const auto path = testsupport::scratch(dir) / "c.jsonl";
    std::ofstream out(path, std::ios::binary);
    for (const auto& l : lines) {
        out << l << '\n';
    }
    return path;
}

std::string rec(const std::string& id, const std::string& title, const std::string& abstract, int year = 2020) {
    return R"({"id":")" + id + R"(","title":")" + title + R"(","abstract":")" + abstract +
           R"(","body":null,"year":)" + std::to_string(year) + R"(,"venue":null})";
}

std::vector<std::string> ids_of(const DocumentList& docs) {
    std::vector<std::string> out;
    for (const auto& d : docs) {
        out.push_back(d.id);
    }
    return out;
}

filter::PatternSet trading_patterns() {
    return filter::compile_patterns(filter::read_pattern_file(testsupport::data_file("patterns_trading.jsonl")));
}

} // namespace

TEST_CASE("load_corpus counts records and rejects duplicates") {
    const auto three = write_lines("c3", {rec("a", "t1", "x"), rec("b", "t2", "y"), rec("c", "t3", "z")});
    const auto store = load_corpus(three);
    CHECK(store.doc_count() == 3);
    CHECK(ids_of(store.documents()) == std::vector<std::string>{"a", "b", "c"});
    CHECK(ids_of(store.documents()) == ids_of(store.documents()));

    CHECK(load_corpus(write_lines("c0", {})).doc_count() == 0);

    const auto bad = write_lines("c5", {rec("a", "t", "x"), rec("b", "t", "x"), "{not json", rec("c", "t", "x"),
                                        rec("d", "t", "x")});
    CHECK_THROWS_AS(load_corpus(bad, Strictness::strict), Error);
    const auto skipped = load_corpus(bad, Strictness::skip_bad);
    CHECK(skipped.doc_count() == 4);
    CHECK(skipped.skipped() == 1);

    const auto dup = write_lines("cdup", {rec("a", "t", "x"), rec("a", "u", "y")});
    CHECK_THROWS_AS(load_corpus(dup, Strictness::skip_bad), Error);
    CHECK_THROWS_AS(load_corpus(testsupport::scratch("missing") / "nope.jsonl"), Error);

    const auto year = write_lines("cyear", {rec("a", "t", "x", 1800)});
    CHECK_THROWS_AS(load_corpus(year), Error);
}

TEST_CASE("field masks omit unrequested fields") {
    const auto path = testsupport::scratch("mask") / "c.jsonl";
    Document d{"a", "Title", "Abstract", std::string("Body"), 2001, std::string("V")};
    write_corpus(path, {d});
    const auto store = load_corpus(path);
    store.for_each(kTitle, [](std::size_t, const Document& doc) {
        CHECK(doc.title == "Title");
        CHECK_FALSE(doc.body.has_value());
        CHECK(doc.abstract.empty());
    });
    CHECK(store.documents().at(0) == d);
}

TEST_CASE("write then read keeps text byte for byte") {
    const auto path = testsupport::scratch("roundtrip") / "c.jsonl";
    DocumentList docs = {{"u1", "Ünïcode “quotes” \\ and \"escapes\"", "Line\nbreak\ttab", std::nullopt, std::nullopt,
                          std::nullopt},
                         {"u2", "", "", std::string(""), 1999, std::string("venue")}};
    write_corpus(path, docs);
    CHECK(load_corpus(path).documents() == docs);
}

TEST_CASE("sampling is a pure function of store, n and seed") {
    const auto store = load_corpus(testsupport::data_file("minicorpus.jsonl"));
    const auto all = sample(store, store.doc_count(), 3);
    auto sorted = ids_of(all);
    std::sort(sorted.begin(), sorted.end());
    auto expected = ids_of(store.documents());
    std::sort(expected.begin(), expected.end());
    CHECK(sorted == expected);

    CHECK(ids_of(sample(store, 50, 11)) == ids_of(sample(store, 50, 11)));
    CHECK(ids_of(sample(store, 50, 11)) != ids_of(sample(store, 50, 12)));
    const auto s = ids_of(sample(store, 50, 11));
    CHECK(std::set<std::string>(s.begin(), s.end()).size() == 50);
    CHECK_THROWS_AS(sample(store, store.doc_count() + 1, 1), Error);
}

TEST_CASE("pattern compilation") {
    CHECK(trading_patterns().size() == 9);
    CHECK_THROWS_AS(filter::compile_patterns({}), Error);
    CHECK(filter::compile_patterns({}, {}, true).empty());
    CHECK_THROWS_AS(filter::compile_patterns({{"a", "x", ""}, {"a", "y", ""}}), Error);
    try {
        filter::compile_patterns({{"broken", "(unclosed", ""}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
}

TEST_CASE("document matching on raw text") {
    const auto p = trading_patterns();
    Document d;
    d.title = "Algorithmic trading with LSTM";
    auto hits = filter::match_document(d, p);
    CHECK(hits[0].in_title);
    CHECK(hits[0].abstract_count == 0);
    CHECK_FALSE(hits[0].in_abstract);

    // `.` stands for exactly one character, so "pairs trading" does not match.
    d.title.clear();
    d.abstract = "pair trading and pairs trading";
    hits = filter::match_document(d, p);
    CHECK(hits[6].abstract_count == 1);

    d.abstract = "Investment strategies beat the investment strategy of the benchmark";
    CHECK(filter::match_document(d, p)[1].abstract_count == 2);
    d.abstract = "MOMENTUM STRATEGIES and momentum trading";
    CHECK(filter::match_document(d, p)[7].abstract_count == 2);
}

TEST_CASE("mini-corpus filter reproduces the hand-counted table") {
    const auto store = load_corpus(testsupport::data_file("minicorpus.jsonl"));
    const auto p = trading_patterns();
    const auto result = filter::filter_corpus(store, p, true);
    std::ostringstream out;
    result.table.write_csv(out);
    CHECK(out.str() == testsupport::slurp(testsupport::data_file("minicorpus_frequency.csv")));
    for (const auto& r : result.table.rows) {
        CHECK(std::max(r.abstract_docs, r.title_docs) <= r.both_docs);
        CHECK(r.both_docs <= r.abstract_docs + r.title_docs);
    }
    for (const auto& doc : result.documents) {
        CHECK(doc.has_abstract());
    }
    CHECK(result.documents.size() == 168);
    CHECK(result.dropped_without_abstract > 0);

    const auto threaded = filter::filter_corpus(store, p, true, 4);
    CHECK(threaded.table == result.table);
    CHECK(ids_of(threaded.documents) == ids_of(result.documents));
}

TEST_CASE("filtering is order independent and monotone in patterns") {
    auto docs = load_corpus(testsupport::data_file("minicorpus.jsonl")).documents();
    std::reverse(docs.begin(), docs.end());
    const auto path = testsupport::scratch("reversed") / "c.jsonl";
    write_corpus(path, docs);
    const auto p = trading_patterns();
    const auto forward = filter::filter_corpus(load_corpus(testsupport::data_file("minicorpus.jsonl")), p, true);
    const auto backward = filter::filter_corpus(load_corpus(path), p, true);
    CHECK(forward.table == backward.table);
    auto a = ids_of(forward.documents);
    auto b = ids_of(backward.documents);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);

    auto specs = filter::read_pattern_file(testsupport::data_file("patterns_trading.jsonl"));
    specs.resize(4);
    const auto fewer = filter::filter_corpus(load_corpus(path), filter::compile_patterns(specs), true);
    CHECK(fewer.documents.size() <= backward.documents.size());
}

TEST_CASE("zero-hit corpus gives an empty result and zero table") {
    const auto path = write_lines("nohit", {rec("a", "Nothing here", "Plain text"), rec("b", "Other", "words")});
    const auto r = filter::filter_corpus(load_corpus(path), trading_patterns(), true);
    CHECK(r.documents.empty());
    const auto t = r.table.totals();
    CHECK(t.abstract_docs + t.title_docs + t.both_docs == 0);
}

TEST_CASE("published keyword table satisfies the union bounds") {
    const auto table = csv::read_file(testsupport::fixture("keyword_counts_published.csv"));
    std::size_t sa = 0;
    std::size_t st = 0;
    std::size_t sb = 0;
    for (const auto& row : table.rows) {
        const auto a = std::stoul(row[1]);
        const auto t = std::stoul(row[2]);
        const auto b = std::stoul(row[3]);
        if (row[0] == "SUM") {
            CHECK(a == sa);
            CHECK(t == st);
            CHECK(b == sb);
            continue;
        }
        CHECK(std::max(a, t) <= b);
        CHECK(b <= a + t);
        sa += a;
        st += t;
        sb += b;
    }
}
