#include "litmine/textstats.hpp"

#include "support.hpp"

#include <json.hpp>

#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

using namespace litmine;
using namespace litmine::textstats;

namespace {

const Taxonomy& taxonomy(const std::string& name) {
    static const auto all = read_taxonomy_file(testsupport::data_file("taxonomies.jsonl"));
    for (const auto& t : all) {
        if (t.name == name) {
            return t;
        }
    }
    throw Error("no taxonomy " + name);
}

std::set<std::string> fired(const Taxonomy& t, const std::string& text) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (category_matches(t, i, text)) {
            out.insert(t.category(i));
        }
    }
    return out;
}

corpus::Document doc(std::string id, std::string title, std::string abstract, std::optional<int> year) {
    corpus::Document d;
    d.id = std::move(id);
    d.title = std::move(title);
    d.abstract = std::move(abstract);
    d.year = year;
    return d;
}

} // namespace

TEST_CASE("porter stemmer agrees with the frozen reference stems") {
    std::ifstream in(testsupport::fixture("porter_oracle.tsv"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        const auto word = line.substr(0, tab);
        INFO(word);
        CHECK(porter_stem(word) == line.substr(tab + 1));
        ++n;
    }
    CHECK(n > 300);
}

TEST_CASE("preprocess") {
    const PreprocessConfig cfg;
    CHECK(preprocess("The models are compared", cfg) == TokenList{"model", "compar"});
    CHECK(preprocess("", cfg).empty());
    CHECK(preprocess("and the of", cfg).empty());

    const std::string text = "Deep neural networks were trained on the daily returns of the S&P 500 index; "
                             "Ünïcode naïve café text is tokenised too.";
    const auto once = preprocess(text, cfg);
    for (const auto& t : once) {
        CHECK_FALSE(t.empty());
        CHECK(cfg.stopwords.count(t) == 0);
    }
    std::string joined;
    for (const auto& t : once) {
        joined += t + " ";
    }
    CHECK(preprocess(joined, cfg) == once);

    PreprocessConfig identity;
    identity.normalizer = std::make_shared<IdentityNormalizer>();
    CHECK(preprocess("The models are compared", identity) == TokenList{"models", "compared"});
}

TEST_CASE("ngrams match brute-force window enumeration") {
    CHECK(ngrams({"a", "b", "c"}, 2) == NgramCounts{{{"a", "b"}, 1}, {{"b", "c"}, 1}});
    CHECK(ngrams({"a"}, 2).empty());

    Rng rng(5);
    TokenList tokens;
    for (int i = 0; i < 100; ++i) {
        tokens.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
    }
    NgramCounts brute;
    for (std::size_t i = 0; i + 3 <= tokens.size(); ++i) {
        ++brute[{tokens[i], tokens[i + 1], tokens[i + 2]}];
    }
    const auto counted = ngrams(tokens, 3);
    CHECK(counted == brute);
    std::size_t total = 0;
    for (const auto& [g, c] : counted) {
        total += c;
    }
    CHECK(total == 98);
}

TEST_CASE("yearly share in basis points") {
    CHECK(yearly_share({{2000, 7}}, {{2000, 35000}}).at(2000) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(yearly_share({{2000, 5}, {2001, 9}}, {{2000, 5}, {2001, 9}}).at(2001) == 10000.0);
    CHECK(yearly_share({}, {{2000, 10}}).at(2000) == 0.0);
    CHECK_THROWS_AS(yearly_share({{2000, 1}}, {}), Error);
}

TEST_CASE("model-family regexes fire on exactly their intended branches") {
    const auto& t = taxonomy("model_family");
    REQUIRE(t.size() == 3);
    std::ifstream in(testsupport::fixture("taxonomy_snippets.jsonl"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const auto text = j.at("text").get<std::string>();
        const auto expected = j.at("fires").get<std::set<std::string>>();
        INFO(j.at("id").get<std::string>() << ": " << text);
        CHECK(fired(t, text) == expected);
        CHECK(expected.count(j.at("family").get<std::string>()) == 1);
        ++n;
    }
    CHECK(n == 30);

    CHECK(fired(t, "Poisson point processes and normal regressions") == std::set<std::string>{"Time series"});
    CHECK(fired(t, "A doc citing GARCH and OLS.") == std::set<std::string>{"Time series", "Linear models"});
}

TEST_CASE("time horizons need a data cue nearby") {
    const auto& t = taxonomy("time_horizon");
    CHECK(fired(t, "We use daily data from 1990.") == std::set<std::string>{"Daily"});
    CHECK(fired(t, "Returns sampled at 5-minute intervals.") == std::set<std::string>{"Minute"});
    CHECK(fired(t, "The daily life of a trader is stressful.").empty());
    CHECK(fired(t, "Monthly meetings; nothing else. Lorem ipsum dolor sit amet consectetur adipiscing "
                   "elit sed do eiusmod data.")
              .empty());
}

TEST_CASE("taxonomy trends are multi-label and skip undated documents") {
    const auto& t = taxonomy("model_family");
    const corpus::DocumentList docs = {doc("a", "LSTM forecasts", "", 2019), doc("b", "GARCH vs OLS", "models", 2019),
                                       doc("c", "LSTM", "", std::nullopt), doc("d", "ridge", "", 2018)};
    const auto s = taxonomy_trends(docs, t);
    CHECK(s.counts.at(2019) == std::vector<std::size_t>{1, 1, 1});
    CHECK(s.counts.at(2018) == std::vector<std::size_t>{1, 0, 0});
    CHECK(s.counts.count(0) == 0);
    CHECK(s.total(1) == 1);

    std::ostringstream out;
    s.write_csv(out);
    CHECK(out.str().rfind("year,category,count\n2018,Linear models,1\n", 0) == 0);

    const auto mini = corpus::load_corpus(testsupport::data_file("minicorpus.jsonl")).documents();
    const auto series = taxonomy_trends(mini, t);
    for (std::size_t c = 0; c < t.size(); ++c) {
        std::size_t single_pass = 0;
        for (const auto& d : mini) {
            if (d.year && category_matches(t, c, document_text(d))) {
                ++single_pass;
            }
        }
        CHECK(series.total(c) == single_pass);
    }
}

TEST_CASE("gazetteer counts documents per entity") {
    const auto gaz = read_gazetteer_file(testsupport::data_file("gazetteer.jsonl"));
    const corpus::DocumentList docs = {doc("a", "S&P futures", "", 2000), doc("b", "", "the s&p 500 index", 2000),
                                       doc("c", "S&P and S&P", "", 2000), doc("d", "nothing", "here", 2000),
                                       doc("e", "KOSPI", "Korea", 2001)};
    const auto counts = gazetteer_entities(docs, gaz);
    CHECK(counts.at(0) == std::pair<std::string, std::size_t>{"S&P", 3});
    std::size_t total = 0;
    for (const auto& [entity, n] : counts) {
        total += n;
        if (entity == "KOSPI/Korea") {
            CHECK(n == 1);
        }
    }
    CHECK(total == 4);
}
