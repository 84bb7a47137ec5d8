#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace msspeech {

// One labeled time interval (phoneme or silence).
struct Interval {
    std::string label;
    double t_start_s = 0.0;
    double t_end_s = 0.0;

    double duration_s() const { return t_end_s - t_start_s; }
    bool operator==(const Interval&) const = default;
};

// Ordered, non-overlapping intervals covering one recording.
struct AnnotationTier {
    std::vector<Interval> intervals;

    bool operator==(const AnnotationTier&) const = default;
};

enum class PhonemeClass { Vowel, UnvoicedStop, SibilantS, OtherConsonant, Silence };

// Maps phoneme labels to the classes the features care about. Labels absent
// from the map classify as OtherConsonant, so the map is total.
class PhonemeClassMap {
public:
    PhonemeClassMap() = default;
    PhonemeClassMap(std::vector<std::string> vowels, std::vector<std::string> unvoiced_stops,
                    std::vector<std::string> sibilant_s, std::vector<std::string> silence);

    PhonemeClass classify(const std::string& label) const;

    // Parses the class-map JSON:
    // {"vowels":[...],"unvoiced_stops":[...],"sibilant_s":[...],"silence":[...]}
    static PhonemeClassMap from_json(const std::string& json_text);

private:
    std::unordered_map<std::string, PhonemeClass> map_;
};

// Czech defaults: vowels incl. long forms (ASCII ':' length mark) and
// diphthongs, unvoiced stops /p t k c/, sibilant /s/, conventional silence
// markers. Everything else is OtherConsonant.
PhonemeClassMap default_czech_class_map();

// -- TextGrid (long format) --------------------------------------------------

std::vector<std::pair<std::string, AnnotationTier>> parse_textgrid(const std::string& text);

std::string emit_textgrid(const std::vector<std::pair<std::string, AnnotationTier>>& tiers,
                          double total_duration_s);

// -- Interval CSV (header: label,t_start_s,t_end_s) ---------------------------

AnnotationTier parse_interval_csv(const std::string& text);
std::string emit_interval_csv(const AnnotationTier& tier);

// -- QC -----------------------------------------------------------------------

enum class QCSeverity { Warning, Error };

struct QCFinding {
    QCSeverity severity;
    std::string message;
};

using QCReport = std::vector<QCFinding>;

// Flags annotations inconsistent with their audio: a boundary past the audio
// end (+10 ms tolerance) is an ERROR; a non-silence span covering less than
// 60% of the audio is a WARNING.
QCReport qc_check(const AnnotationTier& tier, double audio_duration_s);

bool has_error(const QCReport& report);

}  // namespace msspeech
