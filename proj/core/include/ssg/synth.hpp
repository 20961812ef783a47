#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssg/schema.hpp"

namespace ssg::synth {

// Scenes with known latent structure: anatomy classes live near class
// specific home regions, tools land anywhere. Labels are deterministic
// functions of the geometry (plus optional noise):
//   hand   <- horizontal tool position (left/middle/right thirds)
//   action <- rule_table[tool class][nearest anatomy class]
//   cvs    <- class-presence and action conjunctions
struct RuleTable {
    // action index per (tool class, anatomy class)
    std::vector<std::vector<int>> action_of;

    bool total(size_t tools, size_t anatomies) const;
};

schema::ClassCatalog default_catalog();
RuleTable default_rules(const schema::ClassCatalog& catalog);

struct SynthConfig {
    int train_frames = 200;
    int val_frames = 50;
    int test_frames = 50;
    int tools_min = 1, tools_max = 2;
    int anatomies_min = 2, anatomies_max = 3;
    double sigma = 0.0;  // label noise rate in [0,1]
    uint64_t seed = 0;
    double width = 640, height = 480;
};

// Deterministic given the config; per-frame RNG streams derive from
// (seed, frame index). The result always validates cleanly.
schema::Dataset generate_dataset(const SynthConfig& cfg);

struct OracleLabels {
    std::vector<schema::TripletAnn> triplets;        // one per tool, frame order
    std::map<std::string, int> hands;                // tool object id -> hand index
    std::array<bool, 3> cvs{false, false, false};
};

// Recomputes labels from a frame's stored geometry via the rule table.
// Matches the stored annotations exactly when the frame was generated with
// sigma = 0.
OracleLabels label_oracle(const schema::FrameAnnotation& frame,
                          const schema::ClassCatalog& catalog,
                          const RuleTable& rules);

}  // namespace ssg::synth
