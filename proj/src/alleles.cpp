#include "mixkin/alleles.hpp"

#include <cctype>

#include "mixkin/errors.hpp"

namespace mixkin {

namespace {

constexpr std::int64_t kMicro = 1000000;
constexpr int kMaxFracDigits = 6;

}  // namespace

AlleleLabel parse_allele_label(const std::string& text) {
    if (text.empty()) throw ValidationError("empty allele label");
    if (text == "X" || text == "Y") {
        AlleleLabel a;
        a.text = text;
        a.symbolic = true;
        return a;
    }
    std::size_t i = 0;
    std::int64_t whole = 0;
    bool any_digit = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        whole = whole * 10 + (text[i] - '0');
        if (whole > 100000) throw ValidationError("allele label out of range: '" + text + "'");
        any_digit = true;
        ++i;
    }
    std::int64_t frac = 0;
    int frac_digits = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        if (i == text.size()) throw ValidationError("malformed allele label: '" + text + "'");
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            if (frac_digits == kMaxFracDigits)
                throw ValidationError("allele label has too many decimals: '" + text + "'");
            frac = frac * 10 + (text[i] - '0');
            ++frac_digits;
            ++i;
        }
    }
    if (!any_digit || i != text.size())
        throw ValidationError("malformed allele label: '" + text + "'");
    for (int d = frac_digits; d < kMaxFracDigits; ++d) frac *= 10;
    AlleleLabel a;
    a.text = text;
    a.micro = whole * kMicro + frac;
    return a;
}

bool allele_less(const AlleleLabel& a, const AlleleLabel& b) {
    if (a.symbolic != b.symbolic) return !a.symbolic;
    if (a.symbolic) return a.text < b.text;
    return a.micro < b.micro;
}

bool one_repeat_above(const AlleleLabel& lo, const AlleleLabel& hi) {
    if (lo.symbolic || hi.symbolic) return false;
    return hi.micro == lo.micro + kMicro;
}

}  // namespace mixkin
