#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>

#include "metaprobe/fixture_data.hpp"
#include "metaprobe/ingest.hpp"

namespace metaprobe {

inline constexpr std::array<std::string_view, 4> kFixtureNames{
    "study-1728", "study-15573", "huntington-2005", "huntington-2006"};

inline bool is_fixture_name(std::string_view name) {
    for (auto n : kFixtureNames)
        if (n == name) return true;
    return false;
}

inline const Vocabulary& study1728_vocabulary() {
    static const Vocabulary v{
        {"env_material", {"water", "soil", "anthropogenic environmental material"}},
        {"env_biome", {"desert biome"}},
        {"env_feature", {"road"}},
        {"sample_type", {"water filter", "water and LB broth", "soil", "asphalt"}},
        {"scientific_name", {"freshwater metagenome", "soil metagenome", "outdoor metagenome"}},
        {"empo_3", {"Aqueous (non-saline)", "Solid (non-saline)"}},
    };
    return v;
}

inline const Vocabulary& study15573_vocabulary() {
    // "anthrogenic" is spelled as in the source table.
    static const Vocabulary v{
        {"env_material", {"organic material", "anthropogenic environmental material"}},
        {"env_biome", {"marine biome", "urban biome"}},
        {"env_feature",
         {"coral reef", "animal-associated habitat", "plant-associated habitat", "anthrogenic environmental feature",
          "research facility"}},
        {"sample_type", {"Turf Algae", "coral", "hydrozoans", "sponge", "Boat Hull", "Mangrove Leaf", "control swab"}},
        {"scientific_name",
         {"algae metagenome", "coral metagenome", "sponge metagenome", "plant metagenome", "hydrozoan metagenome",
          "metagenome"}},
        {"geo_loc_name", {"US Virgin Islands", "Aruba"}},
        {"empo_3", {"Animal (saline)", "Plant (saline)", "Solid (non-saline)", "Aqueous (saline)"}},
    };
    return v;
}

// Union of both study vocabularies, for space-delimited tables from either study.
inline const Vocabulary& study_vocabulary() {
    static const Vocabulary v = [] {
        Vocabulary out = study1728_vocabulary();
        for (const auto& [field, values] : study15573_vocabulary()) {
            auto& dst = out[field];
            for (const auto& value : values)
                if (std::find(dst.begin(), dst.end(), value) == dst.end()) dst.push_back(value);
        }
        return out;
    }();
    return v;
}

inline StudyTable load_study_fixture(std::string_view name) {
    if (name == "study-1728")
        return parse_study_table(fixtures::kStudy1728, "1728", "empo_3", study1728_vocabulary());
    if (name == "study-15573")
        return parse_study_table(fixtures::kStudy15573, "15573", "empo_3", study15573_vocabulary());
    throw ConfigError("unknown study fixture '" + std::string(name) + "'");
}

inline BeachSeries load_beach_fixture(std::string_view name) {
    if (name == "huntington-2005") return parse_beach_table(fixtures::kHuntington2005);
    if (name == "huntington-2006") return parse_beach_table(fixtures::kHuntington2006);
    throw ConfigError("unknown beach fixture '" + std::string(name) + "'");
}

using Dataset = std::variant<StudyTable, BeachSeries>;

inline Dataset load_fixture(std::string_view name) {
    if (name.starts_with("study-")) return load_study_fixture(name);
    if (name.starts_with("huntington-")) return load_beach_fixture(name);
    throw ConfigError("unknown fixture '" + std::string(name) + "'");
}

} // namespace metaprobe
