#include "ssg/schema.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ssg/util.hpp"

namespace ssg::schema {

using json = nlohmann::ordered_json;

const char* to_string(ObjectKind k) {
    return k == ObjectKind::Tool ? "tool" : "anatomy";
}

// -----------------------------
// ClassCatalog
// -----------------------------

static int find_in(const std::vector<std::string>& names, const std::string& name) {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

std::optional<int> ClassCatalog::null_action_index() const {
    const int i = find_in(actions, kNullActionName);
    return i < 0 ? std::nullopt : std::optional<int>(i);
}

int ClassCatalog::find_tool(const std::string& name) const { return find_in(tools, name); }
int ClassCatalog::find_anatomy(const std::string& name) const { return find_in(anatomies, name); }
int ClassCatalog::find_action(const std::string& name) const { return find_in(actions, name); }
int ClassCatalog::find_hand(const std::string& name) const { return find_in(hands, name); }

uint64_t ClassCatalog::hash() const {
    uint64_t h = fnv1a64("catalog");
    for (const auto* list : {&tools, &anatomies, &actions, &hands}) {
        h = fnv1a64(";", h);
        for (const auto& n : *list) h = fnv1a64(n + ",", h);
    }
    return h;
}

const ObjectAnn* FrameAnnotation::find_object(const std::string& id) const {
    for (const auto& o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

const FrameAnnotation* Dataset::find_frame(const std::string& id) const {
    for (const auto& f : frames)
        if (f.frame_id == id) return &f;
    return nullptr;
}

std::vector<const FrameAnnotation*> Dataset::frames_in_split(const std::string& split) const {
    const std::vector<std::string>* ids = nullptr;
    if (split == "train") ids = &splits.train;
    else if (split == "val") ids = &splits.val;
    else if (split == "test") ids = &splits.test;
    else throw std::invalid_argument("unknown split '" + split + "'");

    // Index frames once; split lists can be long.
    std::map<std::string, const FrameAnnotation*> by_id;
    for (const auto& f : frames) by_id.emplace(f.frame_id, &f);

    std::vector<const FrameAnnotation*> out;
    out.reserve(ids->size());
    for (const auto& id : *ids) {
        auto it = by_id.find(id);
        if (it != by_id.end()) out.push_back(it->second);
    }
    return out;
}

// -----------------------------
// Parsing
// -----------------------------

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

const json& require(const json& o, const char* key, const std::string& ctx) {
    auto it = o.find(key);
    if (it == o.end()) fail(ctx + ": missing required field '" + key + "'");
    return *it;
}

std::string require_string(const json& o, const char* key, const std::string& ctx) {
    const json& v = require(o, key, ctx);
    if (!v.is_string()) fail(ctx + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const json& o, const char* key, const std::string& ctx) {
    const json& v = require(o, key, ctx);
    if (!v.is_number()) fail(ctx + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::vector<std::string> string_array(const json& v, const std::string& ctx) {
    if (!v.is_array()) fail(ctx + ": expected a string array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) fail(ctx + ": expected a string array");
        out.push_back(e.get<std::string>());
    }
    return out;
}

void warn_unknown(const json& o, std::initializer_list<const char*> known,
                  const std::string& ctx, std::vector<std::string>& warnings) {
    for (auto it = o.begin(); it != o.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) warnings.push_back(ctx + ": unknown field '" + it.key() + "' ignored");
    }
}

void check_unique(const std::vector<std::string>& names, const char* what) {
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second) fail(std::string("catalog: duplicate ") + what + " name '" + n + "'");
}

ObjectAnn parse_object(const json& jo, const ClassCatalog& cat, const std::string& ctx,
                       std::vector<std::string>& warnings) {
    if (!jo.is_object()) fail(ctx + ": object entries must be JSON objects");
    warn_unknown(jo, {"id", "kind", "class", "bbox", "hand"}, ctx, warnings);

    ObjectAnn o;
    o.id = require_string(jo, "id", ctx);
    const std::string kind = require_string(jo, "kind", ctx);
    if (kind == "tool") o.kind = ObjectKind::Tool;
    else if (kind == "anatomy") o.kind = ObjectKind::Anatomy;
    else fail(ctx + ": object '" + o.id + "' has unknown kind '" + kind + "'");

    const std::string cls = require_string(jo, "class", ctx);
    o.class_index = o.kind == ObjectKind::Tool ? cat.find_tool(cls) : cat.find_anatomy(cls);
    if (o.class_index < 0)
        fail(ctx + ": object '" + o.id + "' references unknown " +
             std::string(to_string(o.kind)) + " class '" + cls + "'");

    const json& bb = require(jo, "bbox", ctx);
    if (!bb.is_array() || bb.size() != 4 || !std::all_of(bb.begin(), bb.end(), [](const json& e) { return e.is_number(); }))
        fail(ctx + ": object '" + o.id + "' bbox must be [x,y,w,h]");
    o.bbox = geom::Box{bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(), bb[3].get<double>()};

    if (auto it = jo.find("hand"); it != jo.end()) {
        if (!it->is_string()) fail(ctx + ": object '" + o.id + "' hand must be a string");
        const int h = cat.find_hand(it->get<std::string>());
        if (h < 0) fail(ctx + ": object '" + o.id + "' references unknown hand '" + it->get<std::string>() + "'");
        o.hand = h;
    }
    return o;
}

TripletAnn parse_triplet(const json& jt, const FrameAnnotation& frame, const ClassCatalog& cat,
                         const std::string& ctx, std::vector<std::string>& warnings) {
    if (!jt.is_object()) fail(ctx + ": triplet entries must be JSON objects");
    warn_unknown(jt, {"tool", "action", "target"}, ctx, warnings);

    TripletAnn t;
    t.tool_obj = require_string(jt, "tool", ctx);
    if (!frame.find_object(t.tool_obj))
        fail(ctx + ": triplet references unknown object '" + t.tool_obj + "'");

    const std::string act = require_string(jt, "action", ctx);
    t.action_index = cat.find_action(act);
    if (t.action_index < 0) fail(ctx + ": triplet references unknown action '" + act + "'");

    if (auto it = jt.find("target"); it != jt.end()) {
        if (!it->is_string()) fail(ctx + ": triplet target must be a string");
        t.target_obj = it->get<std::string>();
        if (!frame.find_object(*t.target_obj))
            fail(ctx + ": triplet references unknown object '" + *t.target_obj + "'");
    }
    return t;
}

}  // namespace

ParseResult parse_dataset(const std::string& text, Profile profile) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("malformed JSON: top level must be an object");

    ParseResult res;
    Dataset& d = res.dataset;
    d.profile = profile;

    warn_unknown(doc, {"catalog", "frames", "splits"}, "document", res.warnings);

    const json& jc = require(doc, "catalog", "document");
    if (!jc.is_object()) fail("catalog: must be an object");
    warn_unknown(jc, {"tools", "anatomies", "actions", "hands"}, "catalog", res.warnings);
    d.catalog.tools = string_array(require(jc, "tools", "catalog"), "catalog.tools");
    d.catalog.anatomies = string_array(require(jc, "anatomies", "catalog"), "catalog.anatomies");
    d.catalog.actions = string_array(require(jc, "actions", "catalog"), "catalog.actions");
    d.catalog.hands = string_array(require(jc, "hands", "catalog"), "catalog.hands");
    check_unique(d.catalog.tools, "tool");
    check_unique(d.catalog.anatomies, "anatomy");
    check_unique(d.catalog.actions, "action");
    check_unique(d.catalog.hands, "hand");

    if (profile == Profile::SG201) {
        if (d.catalog.tools.size() != 6 || d.catalog.anatomies.size() != 5 ||
            d.catalog.actions.size() != 6 || d.catalog.hands.size() != 3)
            fail("catalog: SG201 profile requires 6 tools / 5 anatomies / 6 actions / 3 hands, got " +
                 std::to_string(d.catalog.tools.size()) + "/" + std::to_string(d.catalog.anatomies.size()) +
                 "/" + std::to_string(d.catalog.actions.size()) + "/" + std::to_string(d.catalog.hands.size()));
        if (!d.catalog.null_action_index())
            fail(std::string("catalog: SG201 profile requires the '") + kNullActionName + "' action");
    }

    const json& jf = require(doc, "frames", "document");
    if (!jf.is_array()) fail("frames: must be an array");
    for (const json& f : jf) {
        if (!f.is_object()) fail("frames: entries must be objects");
        FrameAnnotation frame;
        frame.frame_id = require_string(f, "frame_id", "frame");
        const std::string ctx = "frame " + frame.frame_id;
        warn_unknown(f, {"frame_id", "video_id", "width", "height", "objects", "triplets", "cvs"},
                     ctx, res.warnings);
        frame.video_id = require_string(f, "video_id", ctx);
        frame.width = require_number(f, "width", ctx);
        frame.height = require_number(f, "height", ctx);

        const json& jo = require(f, "objects", ctx);
        if (!jo.is_array()) fail(ctx + ": objects must be an array");
        for (const json& o : jo)
            frame.objects.push_back(parse_object(o, d.catalog, ctx, res.warnings));

        const json& jt = require(f, "triplets", ctx);
        if (!jt.is_array()) fail(ctx + ": triplets must be an array");
        for (const json& t : jt)
            frame.triplets.push_back(parse_triplet(t, frame, d.catalog, ctx, res.warnings));

        if (auto it = f.find("cvs"); it != f.end()) {
            if (!it->is_array() || it->size() != 3 ||
                !std::all_of(it->begin(), it->end(), [](const json& e) { return e.is_boolean(); }))
                fail(ctx + ": cvs must be [bool,bool,bool]");
            frame.cvs = std::array<bool, 3>{(*it)[0].get<bool>(), (*it)[1].get<bool>(), (*it)[2].get<bool>()};
        }
        d.frames.push_back(std::move(frame));
    }

    const json& js = require(doc, "splits", "document");
    if (!js.is_object()) fail("splits: must be an object");
    warn_unknown(js, {"train", "val", "test"}, "splits", res.warnings);
    d.splits.train = string_array(require(js, "train", "splits"), "splits.train");
    d.splits.val = string_array(require(js, "val", "splits"), "splits.val");
    d.splits.test = string_array(require(js, "test", "splits"), "splits.test");

    return res;
}

std::string serialize(const Dataset& d) {
    json doc;
    doc["catalog"] = {{"tools", d.catalog.tools},
                      {"anatomies", d.catalog.anatomies},
                      {"actions", d.catalog.actions},
                      {"hands", d.catalog.hands}};
    doc["frames"] = json::array();
    for (const auto& f : d.frames) {
        json jf;
        jf["frame_id"] = f.frame_id;
        jf["video_id"] = f.video_id;
        jf["width"] = f.width;
        jf["height"] = f.height;
        jf["objects"] = json::array();
        for (const auto& o : f.objects) {
            json jo;
            jo["id"] = o.id;
            jo["kind"] = to_string(o.kind);
            jo["class"] = o.kind == ObjectKind::Tool ? d.catalog.tools[o.class_index]
                                                     : d.catalog.anatomies[o.class_index];
            jo["bbox"] = {o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h};
            if (o.hand) jo["hand"] = d.catalog.hands[*o.hand];
            jf["objects"].push_back(std::move(jo));
        }
        jf["triplets"] = json::array();
        for (const auto& t : f.triplets) {
            json jt;
            jt["tool"] = t.tool_obj;
            jt["action"] = d.catalog.actions[t.action_index];
            if (t.target_obj) jt["target"] = *t.target_obj;
            jf["triplets"].push_back(std::move(jt));
        }
        if (f.cvs) jf["cvs"] = {(*f.cvs)[0], (*f.cvs)[1], (*f.cvs)[2]};
        doc["frames"].push_back(std::move(jf));
    }
    doc["splits"] = {{"train", d.splits.train}, {"val", d.splits.val}, {"test", d.splits.test}};
    return doc.dump(2) + "\n";
}

// -----------------------------
// Validation
// -----------------------------

const char* rule_name(Rule r) {
    switch (r) {
        case Rule::BboxPositive: return "bbox-positive";
        case Rule::BboxBounds: return "bbox-bounds";
        case Rule::HandRequired: return "hand-required";
        case Rule::HandForbidden: return "hand-forbidden";
        case Rule::ObjectIdUnique: return "object-id-unique";
        case Rule::TripletToolKind: return "triplet-tool-kind";
        case Rule::TripletTargetKind: return "triplet-target-kind";
        case Rule::TripletTargetRequired: return "triplet-target-required";
        case Rule::DuplicatePair: return "duplicate-pair";
        case Rule::SplitOverlap: return "split-overlap";
        case Rule::SplitUnknownFrame: return "split-unknown-frame";
    }
    return "?";
}

ValidationReport validate(const Dataset& d) {
    ValidationReport rep;
    auto add = [&rep](Rule r, const std::string& frame, const std::string& detail) {
        rep.violations.push_back({r, frame, detail});
    };

    const auto null_action = d.catalog.null_action_index();

    for (const auto& f : d.frames) {
        std::set<std::string> ids;
        for (const auto& o : f.objects) {
            if (!ids.insert(o.id).second)
                add(Rule::ObjectIdUnique, f.frame_id, "duplicate object id '" + o.id + "'");
            if (!(o.bbox.w > 0 && o.bbox.h > 0))
                add(Rule::BboxPositive, f.frame_id, "object '" + o.id + "' has non-positive extent");
            else if (o.bbox.x < 0 || o.bbox.y < 0 || o.bbox.x2() > f.width || o.bbox.y2() > f.height)
                add(Rule::BboxBounds, f.frame_id, "object '" + o.id + "' exceeds frame bounds");
            if (o.kind == ObjectKind::Tool && d.profile == Profile::SG201 && !o.hand)
                add(Rule::HandRequired, f.frame_id, "tool '" + o.id + "' has no hand label");
            if (o.kind == ObjectKind::Anatomy && o.hand)
                add(Rule::HandForbidden, f.frame_id, "anatomy '" + o.id + "' carries a hand label");
        }
        std::set<std::pair<std::string, std::string>> pairs;
        for (const auto& t : f.triplets) {
            const ObjectAnn* tool = f.find_object(t.tool_obj);
            if (tool && tool->kind != ObjectKind::Tool)
                add(Rule::TripletToolKind, f.frame_id, "triplet tool '" + t.tool_obj + "' is not a tool");
            if (t.target_obj) {
                const ObjectAnn* target = f.find_object(*t.target_obj);
                if (target && target->kind != ObjectKind::Anatomy)
                    add(Rule::TripletTargetKind, f.frame_id,
                        "triplet target '" + *t.target_obj + "' is not an anatomy");
            } else if (!null_action || t.action_index != *null_action) {
                add(Rule::TripletTargetRequired, f.frame_id,
                    "non-null action '" + d.catalog.actions[t.action_index] + "' lacks a target");
            }
            if (!pairs.emplace(t.tool_obj, t.target_obj.value_or("")).second)
                add(Rule::DuplicatePair, f.frame_id,
                    "duplicate pair (" + t.tool_obj + ", " + t.target_obj.value_or("-") + ")");
        }
    }

    std::map<std::string, int> seen;
    for (const auto* ids : {&d.splits.train, &d.splits.val, &d.splits.test})
        for (const auto& id : *ids) {
            if (++seen[id] == 2) add(Rule::SplitOverlap, "", "frame id '" + id + "' appears in multiple splits");
            if (!d.find_frame(id)) add(Rule::SplitUnknownFrame, "", "split references unknown frame '" + id + "'");
        }

    return rep;
}

// -----------------------------
// Statistics / vocabulary
// -----------------------------

CategoryStats compute_stats(const Dataset& d) {
    CategoryStats s;
    s.tools.resize(d.catalog.tools.size());
    s.actions.resize(d.catalog.actions.size());
    s.hands.resize(d.catalog.hands.size());

    const std::pair<const char*, long SplitCounts::*> splits[] = {
        {"train", &SplitCounts::train}, {"val", &SplitCounts::val}, {"test", &SplitCounts::test}};

    for (const auto& [name, member] : splits) {
        for (const FrameAnnotation* f : d.frames_in_split(name)) {
            for (const auto& o : f->objects) {
                if (o.kind != ObjectKind::Tool) continue;
                s.tools[o.class_index].*member += 1;
                if (o.hand) s.hands[*o.hand].*member += 1;
            }
            for (const auto& t : f->triplets) s.actions[t.action_index].*member += 1;
        }
    }
    return s;
}

std::string TripletLabel::name(const ClassCatalog& cat) const {
    return cat.tools[tool] + "|" + cat.actions[action] + "|" +
           (target ? cat.anatomies[*target] : std::string("-"));
}

bool operator<(const TripletLabel& a, const TripletLabel& b) {
    if (a.tool != b.tool) return a.tool < b.tool;
    if (a.action != b.action) return a.action < b.action;
    // Absent targets order last.
    if (a.target.has_value() != b.target.has_value()) return a.target.has_value();
    if (a.target && b.target) return *a.target < *b.target;
    return false;
}

std::vector<TripletLabel> triplet_vocabulary(const Dataset& d) {
    std::set<TripletLabel> labels;
    for (const auto& f : d.frames) {
        for (const auto& t : f.triplets) {
            const ObjectAnn* tool = f.find_object(t.tool_obj);
            if (!tool || tool->kind != ObjectKind::Tool) continue;
            TripletLabel l;
            l.tool = tool->class_index;
            l.action = t.action_index;
            if (t.target_obj) {
                const ObjectAnn* target = f.find_object(*t.target_obj);
                if (target && target->kind == ObjectKind::Anatomy) l.target = target->class_index;
            }
            labels.insert(l);
        }
    }
    return {labels.begin(), labels.end()};
}

}  // namespace ssg::schema
