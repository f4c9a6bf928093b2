#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transferlab/classify.hpp"
#include "transferlab/system.hpp"

namespace transferlab {

enum class Expectation { evidence_for, evidence_against, unspecified };

struct GalleryEntry {
    std::string id;
    nlohmann::json spec;  // source form, symbolic constants kept
    RandomSystem system;
    std::map<ClassTag, Expectation> expected;  // absent tags are unspecified
    std::optional<int> expected_components_min;
    std::string notes;
    bool exploratory = false;

    Expectation expectation(ClassTag t) const;
};

const std::vector<GalleryEntry>& list_gallery();
const GalleryEntry& gallery_entry(const std::string& id);
std::map<ClassTag, Expectation> expected_report(const std::string& id);

const char* to_string(Expectation e);

// True when the classification matches every specified tag of the entry.
bool matches_expected(const GalleryEntry& entry, const ClassificationReport& report, std::string* mismatch = nullptr);

}  // namespace transferlab
