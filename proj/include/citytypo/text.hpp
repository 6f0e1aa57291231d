#pragma once

#include <optional>
#include <string>
#include <vector>

namespace citytypo {

// 1 sq km = 0.386102 sq mi.
inline constexpr double kSqKmToSqMi = 0.386102;

inline double km2_to_sqmi(double km2) { return km2 * kSqKmToSqMi; }
inline double sqmi_to_km2(double sqmi) { return sqmi / kSqKmToSqMi; }
inline double per_km2_to_per_sqmi(double per_km2) { return per_km2 / kSqKmToSqMi; }

// Main-body sentences of a page, in document order. Accepts HTML-ish article
// markup (paragraphs in <p> tags) and wikitext/plain text. Section titles,
// bracketed citation numerals and reference-style sections (References,
// External links, See also, ...) are removed; whitespace is collapsed.
// Throws DataError("empty article ...") when no body text survives.
std::vector<std::string> extract_sentences(const std::string& raw_page);

// Sentence segmentation: split on sentence-final punctuation followed by
// whitespace and an uppercase letter, with an abbreviation stop-list.
std::vector<std::string> split_sentences(const std::string& text);

// Remove bracketed citation numerals like [3].
std::string strip_citation_markers(const std::string& text);

struct InfoboxNumerics {
    std::optional<double> population;
    std::optional<double> area_sq_mi;
    std::optional<double> density_per_sq_mi;
    std::optional<double> lat;
    std::optional<double> lon;
    std::vector<std::string> warnings;  // malformed numerals etc.
};

// Demographic numerics from the page infobox (wikitext {{Infobox ...}} or an
// HTML table with class "infobox"). km-based units are converted to sq mi;
// a missing density is derived from population/area by the caller. A page
// without an infobox yields all-absent fields, which is not an error.
InfoboxNumerics extract_infobox_numerics(const std::string& raw_page);

}  // namespace citytypo
