// Porter suffix stripping, following the rule tables of the original 1980
// algorithm. Steps 2-4 pick the longest matching suffix; when its condition
// fails no shorter suffix is tried.

#include "litmine/textstats.hpp"

#include <array>

namespace litmine::textstats {

namespace {

class Word {
  public:
    explicit Word(std::string_view w) : w_(w) {}

    std::string& str() noexcept { return w_; }

    bool consonant(std::size_t i) const {
        switch (w_[i]) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !consonant(i - 1);
        default:
            return true;
        }
    }

    /// m in [C](VC)^m[V] over the first `len` characters.
    int measure(std::size_t len) const {
        int m = 0;
        std::size_t i = 0;
        while (i < len && consonant(i)) {
            ++i;
        }
        while (i < len) {
            while (i < len && !consonant(i)) {
                ++i;
            }
            if (i >= len) {
                break;
            }
            while (i < len && consonant(i)) {
                ++i;
            }
            ++m;
        }
        return m;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i) {
            if (!consonant(i)) {
                return true;
            }
        }
        return false;
    }

    /// *d: ends with a double consonant.
    bool double_consonant(std::size_t len) const {
        return len >= 2 && w_[len - 1] == w_[len - 2] && consonant(len - 1);
    }

    /// *o: ends cvc where the final c is not w, x or y.
    bool cvc(std::size_t len) const {
        if (len < 3 || !consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) {
            return false;
        }
        const char c = w_[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends_with(std::string_view suffix) const {
        return w_.size() >= suffix.size() && std::string_view(w_).substr(w_.size() - suffix.size()) == suffix;
    }

    std::size_t stem_len(std::string_view suffix) const { return w_.size() - suffix.size(); }

    void replace(std::string_view suffix, std::string_view with) {
        w_.resize(stem_len(suffix));
        w_ += with;
    }

  private:
    std::string w_;
};

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

void step1a(Word& w) {
    if (w.ends_with("sses")) {
        w.replace("sses", "ss");
    } else if (w.ends_with("ies")) {
        w.replace("ies", "i");
    } else if (w.ends_with("ss")) {
        // unchanged
    } else if (w.ends_with("s")) {
        w.replace("s", "");
    }
}

void step1b(Word& w) {
    if (w.ends_with("eed")) {
        if (w.measure(w.stem_len("eed")) > 0) {
            w.replace("eed", "ee");
        }
        return;
    }
    bool stripped = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
        if (w.ends_with(suffix)) {
            if (w.has_vowel(w.stem_len(suffix))) {
                w.replace(suffix, "");
                stripped = true;
            }
            break;
        }
    }
    if (!stripped) {
        return;
    }
    const std::size_t len = w.str().size();
    if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
        w.str() += 'e';
    } else if (w.double_consonant(len)) {
        const char last = w.str().back();
        if (last != 'l' && last != 's' && last != 'z') {
            w.str().pop_back();
        }
    } else if (w.measure(len) == 1 && w.cvc(len)) {
        w.str() += 'e';
    }
}

void step1c(Word& w) {
    if (w.ends_with("y") && w.has_vowel(w.stem_len("y"))) {
        w.replace("y", "i");
    }
}

template <std::size_t N>
void apply_longest(Word& w, const std::array<Rule, N>& rules, int min_measure) {
    const Rule* best = nullptr;
    for (const auto& r : rules) {
        if (w.ends_with(r.suffix) && (best == nullptr || r.suffix.size() > best->suffix.size())) {
            best = &r;
        }
    }
    if (best != nullptr && w.measure(w.stem_len(best->suffix)) > min_measure) {
        w.replace(best->suffix, best->replacement);
    }
}

constexpr std::array<Rule, 20> kStep2{{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},   {"izer", "ize"},
    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},       {"ousli", "ous"},
    {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
    {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
}};

constexpr std::array<Rule, 7> kStep3{{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""},
}};

void step4(Word& w) {
    static constexpr std::array<std::string_view, 19> suffixes{
        "al",  "ance", "ence", "er", "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
    };
    std::string_view best;
    for (auto s : suffixes) {
        if (w.ends_with(s) && s.size() > best.size()) {
            best = s;
        }
    }
    if (best.empty()) {
        return;
    }
    const std::size_t len = w.stem_len(best);
    if (w.measure(len) <= 1) {
        return;
    }
    if (best == "ion" && (len == 0 || (w.str()[len - 1] != 's' && w.str()[len - 1] != 't'))) {
        return;
    }
    w.replace(best, "");
}

void step5(Word& w) {
    if (w.ends_with("e")) {
        const std::size_t len = w.stem_len("e");
        const int m = w.measure(len);
        if (m > 1 || (m == 1 && !w.cvc(len))) {
            w.replace("e", "");
        }
    }
    const std::size_t len = w.str().size();
    if (w.measure(len) > 1 && w.double_consonant(len) && w.str().back() == 'l') {
        w.str().pop_back();
    }
}

} // namespace

std::string porter_stem(std::string_view word) {
    Word w(word);
    if (w.str().empty()) {
        return {};
    }
    step1a(w);
    step1b(w);
    step1c(w);
    apply_longest(w, kStep2, 0);
    apply_longest(w, kStep3, 0);
    step4(w);
    step5(w);
    return std::move(w.str());
}

std::string PorterStemmer::normalize(std::string_view token) const { return porter_stem(token); }

} // namespace litmine::textstats
