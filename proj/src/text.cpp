#include "citytypo/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "citytypo/errors.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

namespace {

const std::array<std::string, 9> kExcludedSections = {
    "references", "external links", "see also",        "notes",    "bibliography",
    "further reading", "sources",  "citations", "footnotes"};

bool is_excluded_section(const std::string& title) {
    std::string t = to_lower(trim(title));
    return std::find(kExcludedSections.begin(), kExcludedSections.end(), t) !=
           kExcludedSections.end();
}

// Words whose trailing period does not end a sentence.
const std::array<std::string, 22> kAbbreviations = {
    "mr.",  "mrs.", "ms.",  "dr.",  "prof.", "st.",  "no.",  "vs.",   "etc.",  "e.g.", "i.e.",
    "jr.",  "sr.",  "mt.",  "ft.",  "u.s.",  "u.k.", "inc.", "ltd.",  "co.",   "est.", "approx."};

bool ends_with_abbreviation(const std::string& text, std::size_t period_pos) {
    std::size_t start = period_pos;
    while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1]))) --start;
    std::string word = to_lower(text.substr(start, period_pos - start + 1));
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

std::size_t find_ci(const std::string& s, const std::string& needle, std::size_t from) {
    if (needle.empty() || from >= s.size()) return std::string::npos;
    for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (std::tolower(static_cast<unsigned char>(s[i + j])) !=
                std::tolower(static_cast<unsigned char>(needle[j]))) {
                match = false;
                break;
            }
        }
        if (match) return i;
    }
    return std::string::npos;
}

std::string decode_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t semi = s.find(';', i);
        if (semi == std::string::npos || semi - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        std::string ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") out.push_back('&');
        else if (ent == "lt") out.push_back('<');
        else if (ent == "gt") out.push_back('>');
        else if (ent == "quot") out.push_back('"');
        else if (ent == "apos" || ent == "#39") out.push_back('\'');
        else if (ent == "nbsp" || ent == "#160" || ent == "thinsp") out.push_back(' ');
        else if (ent == "ndash" || ent == "mdash" || ent == "minus") out.push_back('-');
        else if (!ent.empty() && ent[0] == '#') {
            long code = std::strtol(ent.c_str() + 1, nullptr, 10);
            if (code > 0 && code < 128) out.push_back(static_cast<char>(code));
            else out.push_back(' ');
        } else {
            out.append(s, i, semi - i + 1);  // unknown entity: keep verbatim
        }
        i = semi + 1;
    }
    return out;
}

// Drop all tags, decode entities, turn <br> into spaces.
std::string strip_tags(const std::string& html) {
    std::string out;
    out.reserve(html.size());
    bool in_tag = false;
    for (std::size_t i = 0; i < html.size(); ++i) {
        char c = html[i];
        if (c == '<') {
            in_tag = true;
            out.push_back(' ');
        } else if (c == '>') {
            in_tag = false;
        } else if (!in_tag) {
            out.push_back(c);
        }
    }
    return decode_entities(out);
}

bool looks_like_html(const std::string& raw) {
    return find_ci(raw, "<p", 0) != std::string::npos ||
           find_ci(raw, "<html", 0) != std::string::npos ||
           find_ci(raw, "<body", 0) != std::string::npos;
}

struct Tag {
    std::string name;   // lowercase
    std::string attrs;  // raw attribute text
    bool closing = false;
    std::size_t begin = 0;  // position of '<'
    std::size_t end = 0;    // one past '>'
};

std::optional<Tag> next_tag(const std::string& s, std::size_t from) {
    std::size_t lt = s.find('<', from);
    while (lt != std::string::npos) {
        std::size_t gt = s.find('>', lt);
        if (gt == std::string::npos) return std::nullopt;
        std::size_t p = lt + 1;
        Tag tag;
        tag.begin = lt;
        tag.end = gt + 1;
        if (p < gt && s[p] == '/') {
            tag.closing = true;
            ++p;
        }
        std::size_t name_start = p;
        while (p < gt && (std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '!')) ++p;
        tag.name = to_lower(s.substr(name_start, p - name_start));
        tag.attrs = s.substr(p, gt - p);
        if (!tag.name.empty()) return tag;
        lt = s.find('<', gt + 1);  // skip comments / malformed
    }
    return std::nullopt;
}

// Extract inner text of the element that starts at `open_tag`, handling
// nesting of the same tag name. Returns one past the closing tag.
std::size_t element_inner(const std::string& s, const Tag& open_tag, std::string* inner) {
    int depth = 1;
    std::size_t pos = open_tag.end;
    std::size_t content_start = pos;
    while (depth > 0) {
        auto tag = next_tag(s, pos);
        if (!tag) {
            pos = s.size();
            break;
        }
        if (tag->name == open_tag.name) depth += tag->closing ? -1 : 1;
        if (depth == 0) {
            if (inner) *inner = s.substr(content_start, tag->begin - content_start);
            return tag->end;
        }
        pos = tag->end;
    }
    if (inner) *inner = s.substr(content_start, pos - content_start);
    return pos;
}

std::vector<std::string> html_paragraphs(const std::string& raw) {
    std::vector<std::string> paragraphs;
    std::size_t pos = 0;
    bool excluded = false;
    while (auto tag = next_tag(raw, pos)) {
        if (!tag->closing && (tag->name == "table" || tag->name == "style" ||
                              tag->name == "script")) {
            pos = element_inner(raw, *tag, nullptr);
            continue;
        }
        if (!tag->closing && (tag->name == "h2" || tag->name == "h3")) {
            std::string title;
            pos = element_inner(raw, *tag, &title);
            std::string heading = collapse_whitespace(strip_tags(title));
            if (tag->name == "h2") {
                excluded = is_excluded_section(heading);
            } else if (!excluded) {
                excluded = is_excluded_section(heading);
            }
            continue;
        }
        if (!tag->closing && tag->name == "p") {
            std::string inner;
            pos = element_inner(raw, *tag, &inner);
            if (!excluded) {
                std::string text = collapse_whitespace(strip_tags(inner));
                if (!text.empty()) paragraphs.push_back(std::move(text));
            }
            continue;
        }
        pos = tag->end;
    }
    return paragraphs;
}

// Remove one-line wiki headings (== Title ==) wherever they occur, including
// inline. Returns the heading title of the LAST heading removed via
// *last_title (used for section tracking by the caller).
std::string remove_heading_spans(const std::string& line, std::string* title_out) {
    std::string out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '=' && i + 1 < line.size() && line[i + 1] == '=') {
            std::size_t run = 0;
            while (i + run < line.size() && line[i + run] == '=') ++run;
            std::size_t close = line.find(std::string(run, '='), i + run);
            if (close != std::string::npos) {
                std::string title = line.substr(i + run, close - i - run);
                if (title_out) *title_out = collapse_whitespace(title);
                i = close + run;
                continue;
            }
        }
        out.push_back(line[i]);
        ++i;
    }
    return out;
}

// Replace [[target|label]] -> label, [[target]] -> target; drop File:/Image:/
// Category: links entirely. Strip '''bold''' and ''italics'' quotes and any
// leftover {{templates}} and <ref> tags.
std::string clean_wiki_markup(const std::string& line) {
    std::string out;
    out.reserve(line.size());
    for (std::size_t i = 0; i < line.size();) {
        if (line.compare(i, 2, "[[") == 0) {
            std::size_t close = line.find("]]", i + 2);
            if (close == std::string::npos) {
                ++i;
                continue;
            }
            std::string body = line.substr(i + 2, close - i - 2);
            if (!starts_with_ci(body, "file:") && !starts_with_ci(body, "image:") &&
                !starts_with_ci(body, "category:")) {
                std::size_t pipe = body.rfind('|');
                out += (pipe == std::string::npos) ? body : body.substr(pipe + 1);
            }
            i = close + 2;
        } else if (line.compare(i, 2, "{{") == 0) {
            int depth = 1;
            std::size_t j = i + 2;
            while (j < line.size() && depth > 0) {
                if (line.compare(j, 2, "{{") == 0) {
                    depth++;
                    j += 2;
                } else if (line.compare(j, 2, "}}") == 0) {
                    depth--;
                    j += 2;
                } else {
                    ++j;
                }
            }
            i = j;
        } else if (line[i] == '<') {
            std::size_t close = line.find('>', i);
            if (close == std::string::npos) {
                ++i;
            } else {
                std::string tag = to_lower(line.substr(i, close - i));
                if (tag.rfind("<ref", 0) == 0 && tag.back() != '/') {
                    std::size_t refend = find_ci(line, "</ref>", close);
                    i = refend == std::string::npos ? line.size() : refend + 6;
                } else {
                    i = close + 1;
                }
            }
        } else if (line[i] == '\'') {
            ++i;  // wiki bold/italic quoting
        } else {
            out.push_back(line[i]);
            ++i;
        }
    }
    return decode_entities(out);
}

std::vector<std::string> wikitext_paragraphs(const std::string& raw) {
    std::vector<std::string> paragraphs;
    bool excluded = false;
    for (const std::string& raw_line : split_on(raw, '\n')) {
        std::string line = raw_line;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        // structural lines that never contribute body text
        if (stripped[0] == '|' || stripped[0] == '!' || stripped.rfind("{{", 0) == 0 ||
            stripped.rfind("}}", 0) == 0 || stripped.rfind("{|", 0) == 0 ||
            stripped.rfind("|}", 0) == 0 || stripped[0] == '*' || stripped[0] == '#') {
            continue;
        }
        std::string heading;
        std::string body = remove_heading_spans(stripped, &heading);
        if (!heading.empty()) excluded = is_excluded_section(heading);
        if (excluded) continue;
        body = collapse_whitespace(clean_wiki_markup(body));
        if (!body.empty()) paragraphs.push_back(std::move(body));
    }
    return paragraphs;
}

}  // namespace

std::string strip_citation_markers(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '[') {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j > i + 1 && j < text.size() && text[j] == ']') {
                i = j + 1;
                continue;
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        // lookahead: whitespace then an uppercase letter (or opening quote
        // followed by one)
        std::size_t j = i + 1;
        while (j < text.size() && (text[j] == ')' || text[j] == '"' || text[j] == '\'')) ++j;
        if (j >= text.size() || !std::isspace(static_cast<unsigned char>(text[j]))) continue;
        std::size_t k = j;
        while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
        if (k >= text.size()) continue;
        char next = text[k];
        if (next == '"' || next == '\'' || next == '(') {
            if (k + 1 < text.size()) next = text[k + 1];
        }
        if (!std::isupper(static_cast<unsigned char>(next)) &&
            !std::isdigit(static_cast<unsigned char>(next))) {
            continue;
        }
        if (c == '.' && ends_with_abbreviation(text, i)) continue;
        std::string sentence = collapse_whitespace(text.substr(start, j - start));
        if (!sentence.empty()) sentences.push_back(std::move(sentence));
        start = k;
    }
    std::string tail = collapse_whitespace(text.substr(start));
    if (!tail.empty()) sentences.push_back(std::move(tail));
    return sentences;
}

std::vector<std::string> extract_sentences(const std::string& raw_page) {
    std::vector<std::string> paragraphs =
        looks_like_html(raw_page) ? html_paragraphs(raw_page) : wikitext_paragraphs(raw_page);

    std::vector<std::string> sentences;
    for (const auto& paragraph : paragraphs) {
        std::string heading;
        std::string cleaned = remove_heading_spans(paragraph, &heading);
        cleaned = strip_citation_markers(cleaned);
        for (auto& sentence : split_sentences(cleaned)) {
            if (!sentence.empty()) sentences.push_back(std::move(sentence));
        }
    }
    if (sentences.empty()) {
        throw DataError("empty article: page has no usable body paragraphs");
    }
    return sentences;
}

namespace {

enum class Unit { kNone, kSqMi, kSqKm };

Unit detect_unit(const std::string& value) {
    std::string v = to_lower(value);
    // sq mi spellings first: "sq mi", "sqmi", "mi2", "mi²", "sq. mi"
    for (const char* pat : {"sq mi", "sq\xc2\xa0mi", "sqmi", "sq. mi", "mi2", "/mi", "square mile"}) {
        if (v.find(pat) != std::string::npos) return Unit::kSqMi;
    }
    for (const char* pat : {"km2", "km\xc2\xb2", "sq km", "/km", "square kilo"}) {
        if (v.find(pat) != std::string::npos) return Unit::kSqKm;
    }
    return Unit::kNone;
}

void assign_area(InfoboxNumerics& out, const std::string& value, Unit default_unit) {
    if (out.area_sq_mi) return;
    auto num = parse_numeral(value);
    if (!num) {
        out.warnings.push_back("unparseable area value: '" + trim(value) + "'");
        return;
    }
    Unit unit = detect_unit(value);
    if (unit == Unit::kNone) unit = default_unit;
    out.area_sq_mi = unit == Unit::kSqKm ? km2_to_sqmi(*num) : *num;
}

void assign_density(InfoboxNumerics& out, const std::string& value, Unit default_unit) {
    if (out.density_per_sq_mi) return;
    std::string v = trim(value);
    if (to_lower(v) == "auto" || v.empty()) return;  // wiki convention: computed
    auto num = parse_numeral(v);
    if (!num) {
        out.warnings.push_back("unparseable density value: '" + v + "'");
        return;
    }
    Unit unit = detect_unit(v);
    if (unit == Unit::kNone) unit = default_unit;
    out.density_per_sq_mi = unit == Unit::kSqKm ? per_km2_to_per_sqmi(*num) : *num;
}

void assign_population(InfoboxNumerics& out, const std::string& value) {
    if (out.population) return;
    auto num = parse_numeral(value);
    if (!num) {
        out.warnings.push_back("unparseable population value: '" + trim(value) + "'");
        return;
    }
    out.population = *num;
}

// {{coord|40.7128|N|74.006|W|...}} and decimal / deg-min-sec variants.
void parse_coord_template(InfoboxNumerics& out, const std::string& body) {
    std::vector<double> nums;
    std::vector<char> hemis;  // order interleaved with nums: recorded per group
    std::vector<std::size_t> hemi_after;  // count of nums seen when hemi appeared
    for (const auto& piece : split_on(body, '|')) {
        std::string p = trim(piece);
        if (p.empty() || p.find('=') != std::string::npos) continue;
        std::string up = to_lower(p);
        if (p.size() == 1 && (up == "n" || up == "s" || up == "e" || up == "w")) {
            hemis.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(p[0]))));
            hemi_after.push_back(nums.size());
            continue;
        }
        auto num = parse_numeral(p);
        if (num) nums.push_back(*num);
    }
    auto combine = [](const std::vector<double>& parts) {
        double v = 0.0, scale = 1.0;
        for (double p : parts) {
            v += p * scale;
            scale /= 60.0;
        }
        return v;
    };
    if (hemis.size() == 2 && hemi_after.size() == 2) {
        std::vector<double> lat_parts(nums.begin(), nums.begin() + hemi_after[0]);
        std::vector<double> lon_parts(nums.begin() + hemi_after[0],
                                      nums.begin() + hemi_after[1]);
        if (!lat_parts.empty() && !lon_parts.empty()) {
            double lat = combine(lat_parts);
            double lon = combine(lon_parts);
            if (hemis[0] == 'S') lat = -lat;
            if (hemis[1] == 'W') lon = -lon;
            out.lat = lat;
            out.lon = lon;
        }
    } else if (nums.size() >= 2) {
        out.lat = nums[0];
        out.lon = nums[1];
    }
}

void parse_wikitext_infobox(InfoboxNumerics& out, const std::string& raw, std::size_t start) {
    // span of the {{Infobox ...}} template, nesting-aware
    int depth = 0;
    std::size_t i = start;
    std::size_t end = raw.size();
    while (i < raw.size()) {
        if (raw.compare(i, 2, "{{") == 0) {
            depth++;
            i += 2;
        } else if (raw.compare(i, 2, "}}") == 0) {
            depth--;
            i += 2;
            if (depth == 0) {
                end = i;
                break;
            }
        } else {
            ++i;
        }
    }
    std::string box = raw.substr(start, end - start);

    // split on top-level '|'
    std::vector<std::string> params;
    depth = 0;
    std::size_t piece_start = 0;
    for (std::size_t j = 0; j < box.size(); ++j) {
        if (box.compare(j, 2, "{{") == 0 || box.compare(j, 2, "[[") == 0) {
            depth++;
            ++j;
        } else if (box.compare(j, 2, "}}") == 0 || box.compare(j, 2, "]]") == 0) {
            depth--;
            ++j;
        } else if (box[j] == '|' && depth == 1) {
            params.push_back(box.substr(piece_start, j - piece_start));
            piece_start = j + 1;
        }
    }
    params.push_back(box.substr(piece_start));

    for (std::size_t p = 1; p < params.size(); ++p) {
        std::size_t eq = params[p].find('=');
        if (eq == std::string::npos) continue;
        std::string key = to_lower(trim(params[p].substr(0, eq)));
        std::string value = trim(params[p].substr(eq + 1));
        if (value.empty()) continue;
        if (key.rfind("population_density", 0) == 0) {
            Unit unit = key.find("km2") != std::string::npos ? Unit::kSqKm
                        : key.find("sq_mi") != std::string::npos ? Unit::kSqMi
                                                                 : Unit::kNone;
            assign_density(out, value, unit);
        } else if (key.rfind("population", 0) == 0 &&
                   (key == "population" || key == "population_total" || key == "population_est" ||
                    key == "population_estimate")) {
            assign_population(out, value);
        } else if (key.rfind("area_total", 0) == 0 || key == "area") {
            Unit unit = key.find("km2") != std::string::npos ? Unit::kSqKm
                        : key.find("sq_mi") != std::string::npos ? Unit::kSqMi
                                                                 : Unit::kNone;
            assign_area(out, value, unit);
        } else if (key == "coordinates" || key == "coords") {
            std::size_t coord = find_ci(value, "{{coord", 0);
            if (coord != std::string::npos) {
                parse_coord_template(out, value.substr(coord));
            } else {
                parse_coord_template(out, value);
            }
        } else if (key == "lat" || key == "latitude" || key == "latd") {
            if (auto num = parse_numeral(value)) out.lat = *num;
        } else if (key == "lon" || key == "long" || key == "longitude" || key == "longd") {
            if (auto num = parse_numeral(value)) out.lon = *num;
        }
    }
}

void parse_html_infobox(InfoboxNumerics& out, const std::string& raw) {
    std::size_t table_pos = 0;
    std::string box;
    while (auto tag = next_tag(raw, table_pos)) {
        table_pos = tag->end;
        if (tag->closing || tag->name != "table") continue;
        if (to_lower(tag->attrs).find("infobox") == std::string::npos) {
            table_pos = element_inner(raw, *tag, nullptr);
            continue;
        }
        element_inner(raw, *tag, &box);
        break;
    }
    if (box.empty()) {
        // coordinates are sometimes outside the infobox
        std::size_t geo = find_ci(raw, "class=\"geo\"", 0);
        if (geo == std::string::npos) return;
    }

    std::size_t pos = 0;
    while (auto tr = next_tag(box, pos)) {
        pos = tr->end;
        if (tr->closing || tr->name != "tr") continue;
        std::string row;
        pos = element_inner(box, *tr, &row);
        // header and first data cell
        std::string header, cell;
        std::size_t cpos = 0;
        while (auto cell_tag = next_tag(row, cpos)) {
            cpos = cell_tag->end;
            if (cell_tag->closing) continue;
            if (cell_tag->name == "th" && header.empty()) {
                std::string inner;
                cpos = element_inner(row, *cell_tag, &inner);
                header = to_lower(collapse_whitespace(strip_tags(inner)));
            } else if (cell_tag->name == "td" && cell.empty()) {
                std::string inner;
                cpos = element_inner(row, *cell_tag, &inner);
                cell = collapse_whitespace(strip_tags(inner));
            }
        }
        if (header.empty() || cell.empty()) continue;
        if (header.find("density") != std::string::npos) {
            assign_density(out, cell, Unit::kNone);
        } else if (header.find("population") != std::string::npos) {
            assign_population(out, cell);
        } else if (header.find("area") != std::string::npos || header.find("total") == 0) {
            assign_area(out, cell, Unit::kNone);
        }
    }

    // <span class="geo">40.7127; -74.0059</span>
    std::size_t geo = find_ci(raw, "class=\"geo\"", 0);
    if (geo != std::string::npos && (!out.lat || !out.lon)) {
        std::size_t close = raw.find('>', geo);
        std::size_t end = close == std::string::npos ? std::string::npos : raw.find('<', close);
        if (close != std::string::npos && end != std::string::npos) {
            std::string body = raw.substr(close + 1, end - close - 1);
            auto parts = split_on(body, ';');
            if (parts.size() == 2) {
                auto lat = parse_numeral(parts[0]);
                auto lon = parse_numeral(parts[1]);
                if (lat && lon) {
                    out.lat = *lat;
                    out.lon = *lon;
                }
            }
        }
    }
}

}  // namespace

InfoboxNumerics extract_infobox_numerics(const std::string& raw_page) {
    InfoboxNumerics out;
    std::size_t wiki_box = find_ci(raw_page, "{{infobox", 0);
    if (wiki_box != std::string::npos) {
        parse_wikitext_infobox(out, raw_page, wiki_box);
    } else if (looks_like_html(raw_page)) {
        parse_html_infobox(out, raw_page);
    }
    // Plain "Key: value" fallback for simple fixtures
    if (!out.population && !out.area_sq_mi && !out.density_per_sq_mi && wiki_box == std::string::npos) {
        for (const auto& line : split_on(raw_page, '\n')) {
            std::string lower = to_lower(line);
            std::size_t colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string key = to_lower(trim(line.substr(0, colon)));
            std::string value = trim(line.substr(colon + 1));
            if (key == "population") assign_population(out, value);
            else if (key == "area") assign_area(out, value, Unit::kNone);
            else if (key == "density") assign_density(out, value, Unit::kNone);
        }
    }
    return out;
}

}  // namespace citytypo
