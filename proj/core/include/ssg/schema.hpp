#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssg/geometry.hpp"

namespace ssg::schema {

enum class ObjectKind { Tool, Anatomy };
const char* to_string(ObjectKind k);

// Action class name marking a present but non-interacting tool. Catalogs
// that want null-action semantics must use this exact name.
inline constexpr const char* kNullActionName = "Null_verb";

struct ClassCatalog {
    std::vector<std::string> tools;
    std::vector<std::string> anatomies;
    std::vector<std::string> actions;
    std::vector<std::string> hands;

    std::optional<int> null_action_index() const;
    int find_tool(const std::string& name) const;  // -1 when absent
    int find_anatomy(const std::string& name) const;
    int find_action(const std::string& name) const;
    int find_hand(const std::string& name) const;

    // Content hash; checkpoints carry it so a model is never applied to a
    // dataset with a different label space.
    uint64_t hash() const;

    bool operator==(const ClassCatalog&) const = default;
};

struct ObjectAnn {
    std::string id;  // unique within its frame
    ObjectKind kind = ObjectKind::Tool;
    int class_index = 0;  // into catalog.tools or catalog.anatomies, per kind
    geom::Box bbox;
    std::optional<int> hand;  // into catalog.hands; tools only

    bool operator==(const ObjectAnn&) const = default;
};

struct TripletAnn {
    std::string tool_obj;
    int action_index = 0;
    std::optional<std::string> target_obj;  // absent only for the null action

    bool operator==(const TripletAnn&) const = default;
};

struct FrameAnnotation {
    std::string frame_id;
    std::string video_id;
    double width = 0, height = 0;
    std::vector<ObjectAnn> objects;
    std::vector<TripletAnn> triplets;
    std::optional<std::array<bool, 3>> cvs;

    const ObjectAnn* find_object(const std::string& id) const;

    bool operator==(const FrameAnnotation&) const = default;
};

struct Splits {
    std::vector<std::string> train, val, test;

    bool operator==(const Splits&) const = default;
};

// SG201 pins the class counts (6 tools / 5 anatomies / 6 actions / 3 hands),
// requires the null action, and makes hand labels mandatory on tools.
enum class Profile { Generic, SG201 };

struct Dataset {
    ClassCatalog catalog;
    std::vector<FrameAnnotation> frames;
    Splits splits;
    Profile profile = Profile::Generic;

    const FrameAnnotation* find_frame(const std::string& id) const;
    // split is one of "train", "val", "test"; ids without a frame are skipped.
    std::vector<const FrameAnnotation*> frames_in_split(const std::string& split) const;

    bool operator==(const Dataset&) const = default;
};

struct ParseResult {
    Dataset dataset;
    std::vector<std::string> warnings;  // unknown fields, ignored with a note
};

// Structural failures: malformed JSON, missing fields, unknown class names,
// dangling triplet references, catalog shape violations under SG201.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

ParseResult parse_dataset(const std::string& text, Profile profile = Profile::SG201);

// Canonical JSON serialization; parse_dataset(serialize(d), d.profile)
// reproduces d field for field.
std::string serialize(const Dataset& d);

enum class Rule {
    BboxPositive,
    BboxBounds,
    HandRequired,
    HandForbidden,
    ObjectIdUnique,
    TripletToolKind,
    TripletTargetKind,
    TripletTargetRequired,
    DuplicatePair,
    SplitOverlap,
    SplitUnknownFrame,
};
const char* rule_name(Rule r);

struct Violation {
    Rule rule;
    std::string frame_id;  // empty for split-level rules
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Violations are data, not failures; an empty report means the dataset
// satisfies every invariant.
ValidationReport validate(const Dataset& d);

struct SplitCounts {
    long train = 0, val = 0, test = 0;
    long total() const { return train + val + test; }

    bool operator==(const SplitCounts&) const = default;
};

// Instance counts per class and split. Tools and hands count object
// annotations, actions count triplet annotations. Frames outside every
// split are not counted, so totals are always the sum of the three splits.
struct CategoryStats {
    std::vector<SplitCounts> tools, actions, hands;
};

CategoryStats compute_stats(const Dataset& d);

struct TripletLabel {
    int tool = 0;
    int action = 0;
    std::optional<int> target;

    std::string name(const ClassCatalog& cat) const;  // "Hook|Dissect|Gallbladder"

    bool operator==(const TripletLabel&) const = default;
};
bool operator<(const TripletLabel& a, const TripletLabel& b);

// Distinct class-level (tool, action, target-or-null) labels over the whole
// dataset, ordered by tool, then action, then target with absent targets
// last. This is the downstream multi-label space.
std::vector<TripletLabel> triplet_vocabulary(const Dataset& d);

}  // namespace ssg::schema
