#include "ssg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ssg/geometry.hpp"
#include "ssg/util.hpp"

namespace ssg::synth {

using schema::ObjectAnn;
using schema::ObjectKind;
using schema::TripletAnn;

bool RuleTable::total(size_t tools, size_t anatomies) const {
    if (action_of.size() != tools) return false;
    for (const auto& row : action_of)
        if (row.size() != anatomies) return false;
    return true;
}

schema::ClassCatalog default_catalog() {
    schema::ClassCatalog cat;
    cat.tools = {"Hook", "Grasper", "Clipper", "Bipolar", "Irrigator", "Scissors"};
    cat.anatomies = {"Gallbladder", "CysticDuct", "CysticArtery", "CysticPlate", "Liver"};
    cat.actions = {"Dissect", "Retract", "Grasp", "Clip", "Coagulate", schema::kNullActionName};
    cat.hands = {"Rt", "Lt", "Assi"};
    return cat;
}

RuleTable default_rules(const schema::ClassCatalog& cat) {
    auto tool = [&](const char* n) { return cat.find_tool(n); };
    auto anat = [&](const char* n) { return cat.find_anatomy(n); };
    auto act = [&](const char* n) {
        const int i = cat.find_action(n);
        if (i < 0) throw std::invalid_argument(std::string("rules: catalog lacks action ") + n);
        return i;
    };

    const int null_act = act(schema::kNullActionName);
    RuleTable r;
    r.action_of.assign(cat.tools.size(), std::vector<int>(cat.anatomies.size(), null_act));

    auto set_all = [&](int t, int a) {
        if (t < 0) return;
        std::fill(r.action_of[t].begin(), r.action_of[t].end(), a);
    };
    auto set_one = [&](int t, int an, int a) {
        if (t >= 0 && an >= 0) r.action_of[t][an] = a;
    };

    set_all(tool("Hook"), act("Dissect"));
    set_all(tool("Grasper"), act("Retract"));
    set_one(tool("Grasper"), anat("Gallbladder"), act("Grasp"));
    set_one(tool("Clipper"), anat("CysticDuct"), act("Clip"));
    set_one(tool("Clipper"), anat("CysticArtery"), act("Clip"));
    set_all(tool("Bipolar"), act("Coagulate"));
    set_one(tool("Scissors"), anat("CysticDuct"), act("Dissect"));
    set_one(tool("Scissors"), anat("CysticArtery"), act("Dissect"));
    set_one(tool("Scissors"), anat("CysticPlate"), act("Dissect"));
    return r;
}

namespace {

// Home centers per anatomy class, as fractions of the frame. Spread far
// apart so a tool's nearest anatomy is decided by a wide margin.
constexpr double kHomes[5][2] = {
    {0.85, 0.25}, {0.15, 0.72}, {0.50, 0.52}, {0.85, 0.75}, {0.15, 0.25}};

int hand_rule(const geom::Box& box, double frame_w, const schema::ClassCatalog& cat) {
    const double cx = box.cx();
    const char* name = cx < frame_w / 3.0 ? "Lt" : (cx > 2.0 * frame_w / 3.0 ? "Rt" : "Assi");
    const int h = cat.find_hand(name);
    if (h < 0) throw std::invalid_argument("synth: catalog lacks hand classes Rt/Lt/Assi");
    return h;
}

// Nearest anatomy object by center distance; ties go to the lower index.
int nearest_anatomy(const schema::FrameAnnotation& frame, const geom::Box& tool_box) {
    int best = -1;
    double best_d = 0;
    for (size_t i = 0; i < frame.objects.size(); ++i) {
        if (frame.objects[i].kind != ObjectKind::Anatomy) continue;
        const auto& b = frame.objects[i].bbox;
        const double dx = b.cx() - tool_box.cx();
        const double dy = b.cy() - tool_box.cy();
        const double d = dx * dx + dy * dy;
        if (best < 0 || d < best_d) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

std::array<bool, 3> cvs_rule(const schema::FrameAnnotation& frame,
                             const schema::ClassCatalog& cat,
                             const std::vector<int>& triplet_actions) {
    bool duct = false, artery = false, plate = false, any_tool = false;
    const int i_duct = cat.find_anatomy("CysticDuct");
    const int i_artery = cat.find_anatomy("CysticArtery");
    const int i_plate = cat.find_anatomy("CysticPlate");
    for (const auto& o : frame.objects) {
        if (o.kind == ObjectKind::Tool) any_tool = true;
        else {
            duct |= o.class_index == i_duct;
            artery |= o.class_index == i_artery;
            plate |= o.class_index == i_plate;
        }
    }
    const int i_dissect = cat.find_action("Dissect");
    bool dissecting = false;
    for (int a : triplet_actions) dissecting |= a == i_dissect;
    return {duct && artery, dissecting, plate && any_tool};
}

geom::Box clamp_box(double cx, double cy, double w, double h, double fw, double fh) {
    double x = cx - w / 2.0;
    double y = cy - h / 2.0;
    x = std::clamp(x, 0.0, fw - w);
    y = std::clamp(y, 0.0, fh - h);
    return geom::Box{x, y, w, h};
}

schema::FrameAnnotation generate_frame(const SynthConfig& cfg, const schema::ClassCatalog& cat,
                                       const RuleTable& rules, const std::string& split,
                                       int split_index, uint64_t global_index) {
    std::mt19937_64 rng(fnv1a64_mix(fnv1a64_mix(fnv1a64("synth-frame"), cfg.seed), global_index));
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    schema::FrameAnnotation f;
    f.frame_id = split + "_" + std::to_string(split_index);
    f.video_id = split + "_vid" + std::to_string(split_index / 10);
    f.width = cfg.width;
    f.height = cfg.height;

    std::uniform_int_distribution<int> n_tools_d(cfg.tools_min, cfg.tools_max);
    std::uniform_int_distribution<int> n_anats_d(cfg.anatomies_min, cfg.anatomies_max);
    const int n_tools = n_tools_d(rng);
    const int n_anats = n_anats_d(rng);

    std::uniform_int_distribution<int> tool_cls(0, static_cast<int>(cat.tools.size()) - 1);
    std::uniform_int_distribution<int> anat_cls(0, static_cast<int>(cat.anatomies.size()) - 1);

    // Anatomies first: tools spawn near one of them (their work site).
    std::vector<std::pair<double, double>> anat_centers;
    for (int i = 0; i < n_anats; ++i) {
        ObjectAnn o;
        o.id = "a" + std::to_string(i);
        o.kind = ObjectKind::Anatomy;
        o.class_index = anat_cls(rng);
        const double w = 90 + 60 * u01(rng);
        const double h = 90 + 60 * u01(rng);
        const double hx = kHomes[o.class_index % 5][0] * cfg.width;
        const double hy = kHomes[o.class_index % 5][1] * cfg.height;
        const double cx = hx + 50 * (2 * u01(rng) - 1);
        const double cy = hy + 50 * (2 * u01(rng) - 1);
        o.bbox = clamp_box(cx, cy, w, h, cfg.width, cfg.height);
        anat_centers.emplace_back(o.bbox.cx(), o.bbox.cy());
        f.objects.push_back(std::move(o));
    }
    std::vector<ObjectAnn> tools;
    for (int i = 0; i < n_tools; ++i) {
        ObjectAnn o;
        o.id = "t" + std::to_string(i);
        o.kind = ObjectKind::Tool;
        o.class_index = tool_cls(rng);
        const double w = 40 + 40 * u01(rng);
        const double h = 40 + 40 * u01(rng);
        double cx, cy;
        if (anat_centers.empty()) {
            cx = w / 2 + (cfg.width - w) * u01(rng);
            cy = h / 2 + (cfg.height - h) * u01(rng);
        } else {
            const auto& site =
                anat_centers[std::uniform_int_distribution<size_t>(0, anat_centers.size() - 1)(rng)];
            cx = site.first + 55 * (2 * u01(rng) - 1);
            cy = site.second + 55 * (2 * u01(rng) - 1);
        }
        o.bbox = clamp_box(cx, cy, w, h, cfg.width, cfg.height);
        tools.push_back(std::move(o));
    }
    // Keep tools ahead of anatomies in the object list.
    f.objects.insert(f.objects.begin(), tools.begin(), tools.end());

    const int null_act = *cat.null_action_index();
    std::uniform_int_distribution<int> any_hand(0, static_cast<int>(cat.hands.size()) - 1);
    std::uniform_int_distribution<int> any_action(0, static_cast<int>(cat.actions.size()) - 1);

    std::vector<int> actions;  // final per-tool actions, for the CVS rule
    for (auto& o : f.objects) {
        if (o.kind != ObjectKind::Tool) continue;
        int hand = hand_rule(o.bbox, cfg.width, cat);
        if (u01(rng) < cfg.sigma) hand = any_hand(rng);
        o.hand = hand;

        const int na = nearest_anatomy(f, o.bbox);
        int action = na < 0 ? null_act : rules.action_of[o.class_index][f.objects[na].class_index];
        if (u01(rng) < cfg.sigma) action = any_action(rng);
        if (na < 0) action = null_act;  // nothing to act on
        actions.push_back(action);

        TripletAnn t;
        t.tool_obj = o.id;
        t.action_index = action;
        if (action != null_act) t.target_obj = f.objects[na].id;
        f.triplets.push_back(std::move(t));
    }

    auto cvs = cvs_rule(f, cat, actions);
    for (bool& b : cvs)
        if (u01(rng) < cfg.sigma) b = !b;
    f.cvs = cvs;
    return f;
}

}  // namespace

schema::Dataset generate_dataset(const SynthConfig& cfg) {
    if (cfg.sigma < 0 || cfg.sigma > 1) throw std::invalid_argument("synth: sigma must be in [0,1]");
    if (cfg.tools_min < 0 || cfg.tools_max < cfg.tools_min || cfg.anatomies_min < 0 ||
        cfg.anatomies_max < cfg.anatomies_min)
        throw std::invalid_argument("synth: invalid object count ranges");

    schema::Dataset d;
    d.catalog = default_catalog();
    d.profile = schema::Profile::SG201;
    const RuleTable rules = default_rules(d.catalog);

    uint64_t global = 0;
    const std::pair<const char*, int> plan[] = {
        {"train", cfg.train_frames}, {"val", cfg.val_frames}, {"test", cfg.test_frames}};
    for (const auto& [split, count] : plan) {
        for (int i = 0; i < count; ++i, ++global) {
            auto frame = generate_frame(cfg, d.catalog, rules, split, i, global);
            if (split == std::string("train")) d.splits.train.push_back(frame.frame_id);
            else if (split == std::string("val")) d.splits.val.push_back(frame.frame_id);
            else d.splits.test.push_back(frame.frame_id);
            d.frames.push_back(std::move(frame));
        }
    }
    return d;
}

OracleLabels label_oracle(const schema::FrameAnnotation& frame,
                          const schema::ClassCatalog& catalog, const RuleTable& rules) {
    if (!rules.total(catalog.tools.size(), catalog.anatomies.size()))
        throw std::invalid_argument("label_oracle: rule table does not cover the catalog");
    const int null_act = *catalog.null_action_index();

    OracleLabels out;
    std::vector<int> actions;
    for (const auto& o : frame.objects) {
        if (o.kind != ObjectKind::Tool) continue;
        out.hands[o.id] = hand_rule(o.bbox, frame.width, catalog);
        const int na = nearest_anatomy(frame, o.bbox);
        const int action = na < 0 ? null_act : rules.action_of[o.class_index][frame.objects[na].class_index];
        actions.push_back(action);
        TripletAnn t;
        t.tool_obj = o.id;
        t.action_index = action;
        if (action != null_act && na >= 0) t.target_obj = frame.objects[na].id;
        out.triplets.push_back(std::move(t));
    }
    out.cvs = cvs_rule(frame, catalog, actions);
    return out;
}

}  // namespace ssg::synth
