#include <doctest.h>

#include "ssg/schema.hpp"
#include "ssg/synth.hpp"

using namespace ssg;

TEST_CASE("generated datasets validate cleanly and honor split sizes") {
    synth::SynthConfig cfg;
    cfg.train_frames = 100;
    cfg.val_frames = 30;
    cfg.test_frames = 30;
    cfg.seed = 5;
    const auto d = synth::generate_dataset(cfg);

    CHECK(d.splits.train.size() == 100);
    CHECK(d.splits.val.size() == 30);
    CHECK(d.splits.test.size() == 30);
    CHECK(d.frames.size() == 160);
    CHECK(schema::validate(d).ok());

    // Noisy generation stays schema-valid too.
    cfg.sigma = 0.5;
    CHECK(schema::validate(synth::generate_dataset(cfg)).ok());
}

TEST_CASE("same seed gives byte-identical serialized datasets") {
    synth::SynthConfig cfg;
    cfg.train_frames = 20;
    cfg.val_frames = 5;
    cfg.test_frames = 5;
    cfg.seed = 123;
    const auto a = schema::serialize(synth::generate_dataset(cfg));
    const auto b = schema::serialize(synth::generate_dataset(cfg));
    CHECK(a == b);

    cfg.seed = 124;
    CHECK(a != schema::serialize(synth::generate_dataset(cfg)));
}

TEST_CASE("label oracle reproduces noise-free labels exactly") {
    synth::SynthConfig cfg;
    cfg.train_frames = 60;
    cfg.val_frames = 20;
    cfg.test_frames = 20;
    cfg.sigma = 0.0;
    cfg.seed = 9;
    const auto d = synth::generate_dataset(cfg);
    const auto rules = synth::default_rules(d.catalog);

    for (const auto& f : d.frames) {
        const auto oracle = synth::label_oracle(f, d.catalog, rules);
        REQUIRE(oracle.triplets.size() == f.triplets.size());
        for (size_t i = 0; i < f.triplets.size(); ++i) CHECK(oracle.triplets[i] == f.triplets[i]);
        for (const auto& o : f.objects) {
            if (o.kind != schema::ObjectKind::Tool) continue;
            CHECK(oracle.hands.at(o.id) == *o.hand);
        }
        REQUIRE(f.cvs.has_value());
        CHECK(oracle.cvs == *f.cvs);
    }
}

TEST_CASE("rule table semantics") {
    const auto cat = synth::default_catalog();
    const auto rules = synth::default_rules(cat);
    REQUIRE(rules.total(cat.tools.size(), cat.anatomies.size()));

    const int clipper = cat.find_tool("Clipper");
    const int duct = cat.find_anatomy("CysticDuct");
    const int liver = cat.find_anatomy("Liver");
    CHECK(rules.action_of[clipper][duct] == cat.find_action("Clip"));
    CHECK(rules.action_of[clipper][liver] == *cat.null_action_index());
    CHECK(rules.action_of[cat.find_tool("Hook")][liver] == cat.find_action("Dissect"));
}

TEST_CASE("hand follows the horizontal thirds rule") {
    const auto cat = synth::default_catalog();
    const auto rules = synth::default_rules(cat);
    schema::FrameAnnotation f;
    f.frame_id = "f";
    f.video_id = "v";
    f.width = 600;
    f.height = 400;
    f.objects = {
        {"t0", schema::ObjectKind::Tool, 0, geom::Box{10, 10, 50, 50}, std::nullopt},    // left third
        {"t1", schema::ObjectKind::Tool, 1, geom::Box{500, 10, 60, 50}, std::nullopt},   // right third
        {"t2", schema::ObjectKind::Tool, 2, geom::Box{270, 10, 60, 50}, std::nullopt},   // middle
        {"a0", schema::ObjectKind::Anatomy, 0, geom::Box{200, 200, 100, 100}, std::nullopt},
    };
    const auto oracle = synth::label_oracle(f, cat, rules);
    CHECK(oracle.hands.at("t0") == cat.find_hand("Lt"));
    CHECK(oracle.hands.at("t1") == cat.find_hand("Rt"));
    CHECK(oracle.hands.at("t2") == cat.find_hand("Assi"));
}

TEST_CASE("cvs rules depend on present classes and actions") {
    const auto cat = synth::default_catalog();
    const auto rules = synth::default_rules(cat);

    schema::FrameAnnotation f;
    f.frame_id = "f";
    f.video_id = "v";
    f.width = 600;
    f.height = 400;
    // No CysticDuct or CysticArtery: C1 must be false.
    f.objects = {
        {"a0", schema::ObjectKind::Anatomy, cat.find_anatomy("Gallbladder"),
         geom::Box{200, 200, 100, 100}, std::nullopt},
    };
    CHECK(synth::label_oracle(f, cat, rules).cvs[0] == false);

    // Duct and artery present: C1 true. Hook nearest acts Dissect: C2 true.
    f.objects.push_back({"a1", schema::ObjectKind::Anatomy, cat.find_anatomy("CysticDuct"),
                         geom::Box{50, 50, 80, 80}, std::nullopt});
    f.objects.push_back({"a2", schema::ObjectKind::Anatomy, cat.find_anatomy("CysticArtery"),
                         geom::Box{400, 60, 80, 80}, std::nullopt});
    f.objects.push_back({"t0", schema::ObjectKind::Tool, cat.find_tool("Hook"),
                         geom::Box{60, 60, 40, 40}, std::nullopt});
    const auto oracle = synth::label_oracle(f, cat, rules);
    CHECK(oracle.cvs[0] == true);
    CHECK(oracle.cvs[1] == true);
    CHECK(oracle.cvs[2] == false);  // no CysticPlate
}

TEST_CASE("config validation") {
    synth::SynthConfig cfg;
    cfg.sigma = 1.5;
    CHECK_THROWS_AS(synth::generate_dataset(cfg), std::invalid_argument);
    cfg.sigma = 0;
    cfg.tools_max = -1;
    CHECK_THROWS_AS(synth::generate_dataset(cfg), std::invalid_argument);
}
