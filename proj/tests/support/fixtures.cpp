#include "support/fixtures.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace ssg::testing {

using schema::ObjectAnn;
using schema::ObjectKind;
using schema::TripletAnn;

schema::ClassCatalog sg201_catalog() {
    schema::ClassCatalog cat;
    cat.tools = {"Hook", "Grasper", "Clipper", "Bipolar", "Irrigator", "Scissors"};
    cat.anatomies = {"Gallbladder", "CysticDuct", "CysticArtery", "CysticPlate", "Liver"};
    cat.actions = {"Dissect", "Retract", "Grasp", "Clip", "Coagulate", schema::kNullActionName};
    cat.hands = {"Rt", "Lt", "Assi"};
    return cat;
}

const Sg201Counts& sg201_counts() {
    static const Sg201Counts c = {
        // tools: HK GP CL BP IG SC
        {{686, 997, 128, 95, 41, 3}, {202, 347, 48, 36, 11, 0}, {172, 254, 43, 11, 17, 1}},
        // actions: Dis Ret Gr Cl Co Null
        {{601, 879, 72, 122, 41, 233}, {168, 308, 12, 44, 14, 98}, {147, 242, 11, 41, 5, 52}},
        // hands: Rt Lt Assi
        {{986, 842, 122}, {311, 268, 65}, {246, 218, 34}},
        {1060, 1598, 219, 142, 69, 4},
        {916, 1429, 95, 207, 60, 383},
        {1543, 1328, 221},
    };
    return c;
}

namespace {

// Target anatomy classes allowed per (tool, action) pair. Cycling through
// them while building the fixture yields exactly 29 distinct targeted labels
// plus 5 null-action labels: a 34-label vocabulary.
const std::map<std::pair<int, int>, std::vector<int>>& allowed_targets() {
    static const std::map<std::pair<int, int>, std::vector<int>> t = {
        {{0, 0}, {0, 1, 2, 3, 4}},  // Hook Dissect
        {{0, 1}, {0, 1, 2, 3}},     // Hook Retract
        {{1, 1}, {0, 1, 2, 3, 4}},  // Grasper Retract
        {{1, 2}, {0, 1, 2, 3}},     // Grasper Grasp
        {{1, 3}, {1, 2, 3, 4}},     // Grasper Clip
        {{1, 4}, {0, 1, 2}},        // Grasper Coagulate
        {{2, 4}, {1, 2}},           // Clipper Coagulate
        {{2, 3}, {3, 4}},           // Clipper Clip
    };
    return t;
}

std::vector<int> expand(const long counts[6]) {
    std::vector<int> out;
    for (int c = 0; c < 6; ++c)
        for (long i = 0; i < counts[c]; ++i) out.push_back(c);
    return out;
}

}  // namespace

schema::Dataset table2_fixture() {
    schema::Dataset d;
    d.catalog = sg201_catalog();
    d.profile = schema::Profile::SG201;

    const auto& c = sg201_counts();
    const int frame_counts[3] = {1212, 409, 312};
    const char* split_names[3] = {"train", "val", "test"};
    const int null_action = 5;

    std::map<std::pair<int, int>, size_t> combo_counter;  // cycles allowed targets

    for (int s = 0; s < 3; ++s) {
        const int n_frames = frame_counts[s];
        std::vector<schema::FrameAnnotation> frames(n_frames);
        std::vector<int> tools_in_frame(n_frames, 0);
        for (int f = 0; f < n_frames; ++f) {
            auto& fr = frames[f];
            fr.frame_id = std::string(split_names[s]) + "_" + std::to_string(f);
            fr.video_id = std::string(split_names[s]) + "_vid" + std::to_string(f / 10);
            fr.width = 854;
            fr.height = 480;
            for (int a = 0; a < 5; ++a) {
                ObjectAnn o;
                o.id = "a" + std::to_string(a);
                o.kind = ObjectKind::Anatomy;
                o.class_index = a;
                o.bbox = geom::Box{10.0 + 150.0 * a, 250, 140, 100};
                fr.objects.push_back(std::move(o));
            }
        }

        const std::vector<int> tool_classes = expand(c.tools[s]);
        const std::vector<int> action_classes = expand(c.actions[s]);
        if (action_classes.size() > tool_classes.size())
            throw std::logic_error("fixture: more actions than tools");

        // Hand assignment by position in the split's tool sequence.
        std::vector<int> hand_of(tool_classes.size());
        {
            size_t i = 0;
            for (int h = 0; h < 3; ++h)
                for (long k = 0; k < c.hands[s][h]; ++k) hand_of[i++] = h;
            if (i != tool_classes.size()) throw std::logic_error("fixture: hand counts mismatch");
        }

        for (size_t t = 0; t < tool_classes.size(); ++t) {
            const int f = static_cast<int>(t % n_frames);
            auto& fr = frames[f];
            ObjectAnn o;
            o.id = "t" + std::to_string(tools_in_frame[f]);
            o.kind = ObjectKind::Tool;
            o.class_index = tool_classes[t];
            o.bbox = geom::Box{20.0 + 120.0 * tools_in_frame[f], 40, 100, 80};
            o.hand = hand_of[t];
            tools_in_frame[f] += 1;
            fr.objects.push_back(o);

            if (t < action_classes.size()) {
                TripletAnn tr;
                tr.tool_obj = o.id;
                tr.action_index = action_classes[t];
                if (tr.action_index != null_action) {
                    const auto key = std::make_pair(o.class_index, tr.action_index);
                    const auto& targets = allowed_targets().at(key);
                    tr.target_obj = "a" + std::to_string(targets[combo_counter[key]++ % targets.size()]);
                }
                fr.triplets.push_back(std::move(tr));
            }
        }

        for (auto& fr : frames) {
            auto* list = s == 0 ? &d.splits.train : (s == 1 ? &d.splits.val : &d.splits.test);
            list->push_back(fr.frame_id);
            d.frames.push_back(std::move(fr));
        }
    }
    return d;
}

schema::Dataset tiny_dataset() {
    schema::Dataset d;
    d.catalog = sg201_catalog();
    d.profile = schema::Profile::SG201;

    schema::FrameAnnotation f;
    f.frame_id = "f0";
    f.video_id = "v0";
    f.width = 640;
    f.height = 480;
    f.objects = {
        {"t0", ObjectKind::Tool, 0, geom::Box{50, 60, 90, 70}, 0},
        {"a0", ObjectKind::Anatomy, 1, geom::Box{200, 220, 150, 120}, std::nullopt},
        {"a1", ObjectKind::Anatomy, 0, geom::Box{420, 200, 160, 140}, std::nullopt},
    };
    f.triplets = {{"t0", 0, "a0"}};
    f.cvs = std::array<bool, 3>{true, false, true};
    d.frames.push_back(f);

    schema::FrameAnnotation g;
    g.frame_id = "f1";
    g.video_id = "v0";
    g.width = 640;
    g.height = 480;
    g.objects = {
        {"t0", ObjectKind::Tool, 1, geom::Box{300, 90, 80, 60}, 1},
        {"a0", ObjectKind::Anatomy, 2, geom::Box{260, 250, 140, 120}, std::nullopt},
    };
    g.triplets = {{"t0", 5, std::nullopt}};
    g.cvs = std::array<bool, 3>{false, false, false};
    d.frames.push_back(g);

    d.splits.train = {"f0"};
    d.splits.val = {"f1"};
    d.splits.test = {};
    return d;
}

}  // namespace ssg::testing
