#include "msspeech/annotation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "msspeech/error.hpp"

namespace msspeech {

namespace {

void validate_tier(const AnnotationTier& tier, const char* where) {
    double prev_end = -1.0;
    for (const auto& iv : tier.intervals) {
        if (!std::isfinite(iv.t_start_s) || !std::isfinite(iv.t_end_s) || iv.t_start_s < 0.0) {
            throw ContractError(std::string(where) + ": non-finite or negative time");
        }
        if (iv.t_start_s >= iv.t_end_s) {
            throw ContractError(std::string(where) + ": interval with t_start >= t_end");
        }
        if (prev_end > iv.t_start_s + 1e-12) {
            throw ContractError(std::string(where) + ": overlapping intervals");
        }
        prev_end = iv.t_end_s;
    }
}

std::string fmt_time(double t) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    return buf;
}

// Praat escapes a double quote inside a string as "".
std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// class map

PhonemeClassMap::PhonemeClassMap(std::vector<std::string> vowels,
                                 std::vector<std::string> unvoiced_stops,
                                 std::vector<std::string> sibilant_s,
                                 std::vector<std::string> silence) {
    auto add = [this](const std::vector<std::string>& labels, PhonemeClass cls,
                      const char* group) {
        for (const auto& l : labels) {
            auto [it, inserted] = map_.emplace(l, cls);
            if (!inserted && it->second != cls) {
                throw ConfigError("class map: label '" + l + "' listed in " + group +
                                  " and another group");
            }
        }
    };
    add(vowels, PhonemeClass::Vowel, "vowels");
    add(unvoiced_stops, PhonemeClass::UnvoicedStop, "unvoiced_stops");
    add(sibilant_s, PhonemeClass::SibilantS, "sibilant_s");
    add(silence, PhonemeClass::Silence, "silence");
}

PhonemeClass PhonemeClassMap::classify(const std::string& label) const {
    const auto it = map_.find(label);
    if (it != map_.end()) return it->second;
    return PhonemeClass::OtherConsonant;
}

PhonemeClassMap PhonemeClassMap::from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("class map JSON: ") + e.what());
    }
    auto list = [&j](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) {
            throw ConfigError(std::string("class map JSON: missing array '") + key + "'");
        }
        std::vector<std::string> out;
        for (const auto& v : j[key]) {
            if (!v.is_string()) throw ConfigError("class map JSON: non-string label");
            out.push_back(v.get<std::string>());
        }
        return out;
    };
    return PhonemeClassMap(list("vowels"), list("unvoiced_stops"), list("sibilant_s"),
                           list("silence"));
}

PhonemeClassMap default_czech_class_map() {
    return PhonemeClassMap(
        {"a", "e", "i", "o", "u", "a:", "e:", "i:", "o:", "u:", "ou", "au", "eu"},
        {"p", "t", "k", "c"}, {"s"}, {"", "sil", "#", "<sil>"});
}

// ---------------------------------------------------------------------------
// TextGrid, long format

namespace {

struct LineReader {
    std::vector<std::string> lines;
    std::size_t pos = 0;

    explicit LineReader(const std::string& text) {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                if (!cur.empty() && cur.back() == '\r') cur.pop_back();
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) lines.push_back(cur);
    }

    long line_no() const { return static_cast<long>(pos); }  // 1-based for the previous read

    // next non-empty line, or throws
    std::string next(const char* expect) {
        while (pos < lines.size()) {
            const std::string& l = lines[pos++];
            bool blank = true;
            for (char c : l) {
                if (c != ' ' && c != '\t') {
                    blank = false;
                    break;
                }
            }
            if (!blank) return l;
        }
        throw ParseError(std::string("unexpected end of TextGrid, expected ") + expect,
                         static_cast<long>(lines.size()));
    }
};

// extracts the value after '=' on a `key = value` line; checks the key appears
std::string field_value(const std::string& line, const std::string& key, long line_no) {
    const auto kpos = line.find(key);
    if (kpos == std::string::npos) {
        throw ParseError("expected '" + key + "'", line_no);
    }
    const auto eq = line.find('=', kpos + key.size());
    if (eq == std::string::npos) throw ParseError("expected '=' after '" + key + "'", line_no);
    std::size_t b = eq + 1;
    while (b < line.size() && (line[b] == ' ' || line[b] == '\t')) ++b;
    std::size_t e = line.size();
    while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t')) --e;
    return line.substr(b, e - b);
}

double parse_num(const std::string& v, long line_no) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == 0) throw std::invalid_argument("empty");
        return d;
    } catch (const std::exception&) {
        throw ParseError("bad number '" + v + "'", line_no);
    }
}

std::string parse_quoted(const std::string& v, long line_no) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
        throw ParseError("expected quoted string, got '" + v + "'", line_no);
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] == '"') {
            if (i + 2 < v.size() && v[i + 1] == '"') {
                out.push_back('"');
                ++i;
            } else {
                throw ParseError("stray quote inside string", line_no);
            }
        } else {
            out.push_back(v[i]);
        }
    }
    return out;
}

}  // namespace

std::vector<std::pair<std::string, AnnotationTier>> parse_textgrid(const std::string& text) {
    LineReader r(text);

    std::string l = r.next("File type header");
    if (l.find("ooTextFile") == std::string::npos) {
        throw ParseError("not an ooTextFile TextGrid", r.line_no());
    }
    l = r.next("Object class header");
    if (l.find("TextGrid") == std::string::npos) {
        throw ParseError("not a TextGrid object", r.line_no());
    }
    field_value(r.next("xmin"), "xmin", r.line_no());
    field_value(r.next("xmax"), "xmax", r.line_no());
    l = r.next("tiers flag");
    if (l.find("tiers?") == std::string::npos) {
        throw ParseError("expected 'tiers?' flag", r.line_no());
    }
    const long n_tiers = static_cast<long>(parse_num(field_value(r.next("size"), "size",
                                                                 r.line_no()),
                                                     r.line_no()));
    if (n_tiers < 0) throw ParseError("negative tier count", r.line_no());
    if (n_tiers > 0) r.next("item []");

    std::vector<std::pair<std::string, AnnotationTier>> result;
    for (long t = 0; t < n_tiers; ++t) {
        r.next("item [k]");
        const std::string cls =
            parse_quoted(field_value(r.next("class"), "class", r.line_no()), r.line_no());
        const std::string name =
            parse_quoted(field_value(r.next("name"), "name", r.line_no()), r.line_no());
        field_value(r.next("tier xmin"), "xmin", r.line_no());
        const double tier_xmax =
            parse_num(field_value(r.next("tier xmax"), "xmax", r.line_no()), r.line_no());

        if (cls == "TextTier") {  // point tier: skip its points
            const long n_pts = static_cast<long>(
                parse_num(field_value(r.next("points size"), "size", r.line_no()), r.line_no()));
            for (long p = 0; p < n_pts; ++p) {
                r.next("points [k]");
                r.next("number");
                r.next("mark");
            }
            continue;
        }
        if (cls != "IntervalTier") {
            throw ParseError("unknown tier class '" + cls + "'", r.line_no());
        }

        const long n_iv = static_cast<long>(
            parse_num(field_value(r.next("intervals size"), "intervals: size", r.line_no()),
                      r.line_no()));
        AnnotationTier tier;
        double prev_end = -1.0;
        for (long i = 0; i < n_iv; ++i) {
            r.next("intervals [k]");
            const double xmin =
                parse_num(field_value(r.next("xmin"), "xmin", r.line_no()), r.line_no());
            const double xmax =
                parse_num(field_value(r.next("xmax"), "xmax", r.line_no()), r.line_no());
            const std::string label =
                parse_quoted(field_value(r.next("text"), "text", r.line_no()), r.line_no());
            if (xmin >= xmax) {
                throw ParseError("interval with xmin >= xmax", r.line_no());
            }
            if (xmin < prev_end - 1e-12) {
                throw ParseError("non-monotone interval boundaries", r.line_no());
            }
            if (xmax > tier_xmax + 1e-9) {
                throw ParseError("interval exceeds tier xmax", r.line_no());
            }
            tier.intervals.push_back({label, xmin, xmax});
            prev_end = xmax;
        }
        result.emplace_back(name, std::move(tier));
    }
    return result;
}

std::string emit_textgrid(const std::vector<std::pair<std::string, AnnotationTier>>& tiers,
                          double total_duration_s) {
    for (const auto& [name, tier] : tiers) {
        validate_tier(tier, "emit_textgrid");
        for (const auto& iv : tier.intervals) {
            if (iv.t_end_s > total_duration_s + 1e-12) {
                throw ContractError("emit_textgrid: interval exceeds total duration");
            }
        }
    }

    std::ostringstream os;
    os << "File type = \"ooTextFile\"\n";
    os << "Object class = \"TextGrid\"\n\n";
    os << "xmin = 0\n";
    os << "xmax = " << fmt_time(total_duration_s) << "\n";
    os << "tiers? <exists>\n";
    os << "size = " << tiers.size() << "\n";
    os << "item []:\n";
    for (std::size_t t = 0; t < tiers.size(); ++t) {
        const auto& [name, tier] = tiers[t];
        os << "    item [" << (t + 1) << "]:\n";
        os << "        class = \"IntervalTier\"\n";
        os << "        name = " << quote(name) << "\n";
        os << "        xmin = 0\n";
        os << "        xmax = " << fmt_time(total_duration_s) << "\n";
        os << "        intervals: size = " << tier.intervals.size() << "\n";
        for (std::size_t i = 0; i < tier.intervals.size(); ++i) {
            const auto& iv = tier.intervals[i];
            os << "        intervals [" << (i + 1) << "]:\n";
            os << "            xmin = " << fmt_time(iv.t_start_s) << "\n";
            os << "            xmax = " << fmt_time(iv.t_end_s) << "\n";
            os << "            text = " << quote(iv.label) << "\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// interval CSV

AnnotationTier parse_interval_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    long line_no = 0;

    if (!std::getline(is, line)) throw ParseError("empty interval CSV", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "label,t_start_s,t_end_s") {
        throw ParseError("interval CSV header must be 'label,t_start_s,t_end_s'", line_no);
    }

    AnnotationTier tier;
    double prev_end = -1.0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ParseError("interval CSV row needs 3 columns", line_no);
        }
        Interval iv;
        iv.label = line.substr(0, c1);
        iv.t_start_s = parse_num(line.substr(c1 + 1, c2 - c1 - 1), line_no);
        iv.t_end_s = parse_num(line.substr(c2 + 1), line_no);
        if (!(iv.t_start_s < iv.t_end_s)) {
            throw ParseError("row " + std::to_string(line_no - 1) + ": t_start_s >= t_end_s",
                             line_no);
        }
        if (iv.t_start_s < prev_end - 1e-12) {
            throw ParseError("row " + std::to_string(line_no - 1) +
                                 ": overlaps previous interval",
                             line_no);
        }
        prev_end = iv.t_end_s;
        tier.intervals.push_back(std::move(iv));
    }
    return tier;
}

std::string emit_interval_csv(const AnnotationTier& tier) {
    validate_tier(tier, "emit_interval_csv");
    std::ostringstream os;
    os << "label,t_start_s,t_end_s\n";
    for (const auto& iv : tier.intervals) {
        os << iv.label << ',' << fmt_time(iv.t_start_s) << ',' << fmt_time(iv.t_end_s) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// QC

QCReport qc_check(const AnnotationTier& tier, double audio_duration_s) {
    QCReport report;
    const PhonemeClassMap map = default_czech_class_map();

    double last_boundary = 0.0;
    double speech_first = -1.0, speech_last = -1.0;
    for (const auto& iv : tier.intervals) {
        last_boundary = std::max(last_boundary, iv.t_end_s);
        if (map.classify(iv.label) != PhonemeClass::Silence) {
            if (speech_first < 0.0) speech_first = iv.t_start_s;
            speech_last = iv.t_end_s;
        }
    }

    if (last_boundary > audio_duration_s + 0.010) {
        report.push_back({QCSeverity::Error,
                          "annotation boundary at " + std::to_string(last_boundary) +
                              " s exceeds audio duration " + std::to_string(audio_duration_s) +
                              " s"});
    }

    const double span = speech_first >= 0.0 ? speech_last - speech_first : 0.0;
    if (span < 0.60 * audio_duration_s) {
        report.push_back({QCSeverity::Warning,
                          "annotated non-silence span covers " + std::to_string(span) +
                              " s of " + std::to_string(audio_duration_s) +
                              " s audio (< 60%); possible truncated alignment"});
    }
    return report;
}

bool has_error(const QCReport& report) {
    for (const auto& f : report) {
        if (f.severity == QCSeverity::Error) return true;
    }
    return false;
}

}  // namespace msspeech
