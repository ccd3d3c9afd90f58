#pragma once

#include <cstdint>
#include <string>

namespace mixkin {

// STR allele designation. Labels are decimal repeat numbers ("12", "31.2");
// microvariants interleave numerically, so the sort key is the repeat value.
// The sex marker uses the symbolic labels X and Y.
struct AlleleLabel {
    std::string text;
    bool symbolic = false;
    // repeat value scaled by 1e6; exact integer so that "one repeat unit"
    // comparisons never touch floating point
    std::int64_t micro = 0;

    bool operator==(const AlleleLabel& o) const {
        return symbolic == o.symbolic && (symbolic ? text == o.text : micro == o.micro);
    }
};

// Parses "12", "31.2", "9.3", or the symbolic "X"/"Y". Throws ValidationError
// on anything else.
AlleleLabel parse_allele_label(const std::string& text);

// Strict total order: numeric alleles by repeat value, symbolic by label;
// numeric sorts before symbolic (the two never share a marker in practice).
bool allele_less(const AlleleLabel& a, const AlleleLabel& b);

// True when hi is exactly one repeat unit above lo (31.2 -> 32.2, 10 -> 11).
bool one_repeat_above(const AlleleLabel& lo, const AlleleLabel& hi);

}  // namespace mixkin
