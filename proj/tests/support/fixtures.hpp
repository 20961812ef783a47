#pragma once

#include <string>

#include "ssg/schema.hpp"

namespace ssg::testing {

// Catalog with the SG201 class inventory (6 tools, 5 anatomies, 6 actions,
// 3 hands).
schema::ClassCatalog sg201_catalog();

// Deterministic dataset reproducing the SG201 category distribution exactly:
// per-split tool/action/hand counts, split sizes 1212/409/312, and a
// 34-label triplet vocabulary.
schema::Dataset table2_fixture();

// Small valid SG201 dataset for CLI and round-trip tests.
schema::Dataset tiny_dataset();

// Expected per-split counts for the Table-2 fixture, catalog order.
struct Sg201Counts {
    long tools[3][6];   // [train/val/test][class]
    long actions[3][6];
    long hands[3][3];
    long tool_totals[6];
    long action_totals[6];
    long hand_totals[3];
};
const Sg201Counts& sg201_counts();

}  // namespace ssg::testing
