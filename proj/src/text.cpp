#include "mechsynth/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace mechsynth {

std::string fold_case(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n\f\v");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::set<std::string> token_set(std::string_view s) {
    auto tokens = tokenize(s);
    return {tokens.begin(), tokens.end()};
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t intersection = 0;
    for (const auto& x : a) {
        if (b.count(x)) ++intersection;
    }
    const std::size_t unions = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unions);
}

double label_similarity(std::string_view a, std::string_view b) {
    return jaccard(token_set(a), token_set(b));
}

bool well_formed_label(std::string_view label) {
    const std::string t = trim(label);
    if (t.empty() || t.size() > 120) return false;
    return std::any_of(t.begin(), t.end(),
                       [](unsigned char c) { return std::isalnum(c) != 0; });
}

double round6(double x) {
    return std::nearbyint(x * 1e6) / 1e6;
}

}  // namespace mechsynth
