// ssg: command-line frontend for the surgical scene-graph pipeline.
// Subcommands: validate | stats | export-dot | synth | train | eval.
// Exit codes: 0 success, 1 validation/metric failure, 2 I/O or config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssg/eval.hpp"
#include "ssg/graph.hpp"
#include "ssg/model.hpp"
#include "ssg/schema.hpp"
#include "ssg/synth.hpp"
#include "ssg/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
}

// Settings shared by synth/train/eval; a JSON config file provides defaults,
// command-line flags override field by field.
struct RunConfig {
    std::string dataset;
    std::string out = "out";
    std::string task;
    std::string split = "test";
    std::string features;    // optional appearance sidecar
    std::string init_from;   // explicit stage-1 checkpoint / task model path
    std::string profile = "sg201";
    int stage = 1;
    ssg::model::ModelConfig model;
    ssg::synth::SynthConfig synth;
    int d_appearance = 0;
};

json run_config_json(const RunConfig& rc) {
    json j;
    j["dataset"] = rc.dataset;
    j["out"] = rc.out;
    j["task"] = rc.task;
    j["split"] = rc.split;
    j["features"] = rc.features;
    j["profile"] = rc.profile;
    j["stage"] = rc.stage;
    j["model"] = {{"d_hidden", rc.model.d_hidden},
                  {"gcn_layers", rc.model.gcn_layers},
                  {"lambda_action", rc.model.lambda_action},
                  {"lambda_hand", rc.model.lambda_hand},
                  {"tau", rc.model.tau},
                  {"seed", rc.model.seed},
                  {"lr", rc.model.lr},
                  {"epochs", rc.model.epochs},
                  {"zero_init", rc.model.zero_init},
                  {"action_head", rc.model.action_head},
                  {"hand_head", rc.model.hand_head},
                  {"aux_losses_in_stage2", rc.model.aux_losses_in_stage2},
                  {"task_weight", rc.model.task_weight}};
    j["synth"] = {{"train_frames", rc.synth.train_frames},
                  {"val_frames", rc.synth.val_frames},
                  {"test_frames", rc.synth.test_frames},
                  {"tools_min", rc.synth.tools_min},
                  {"tools_max", rc.synth.tools_max},
                  {"anatomies_min", rc.synth.anatomies_min},
                  {"anatomies_max", rc.synth.anatomies_max},
                  {"sigma", rc.synth.sigma},
                  {"seed", rc.synth.seed},
                  {"width", rc.synth.width},
                  {"height", rc.synth.height}};
    return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_config_file(RunConfig& rc, const std::string& path) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw IoError("config '" + path + "': " + e.what());
    }
    maybe(j, "dataset", rc.dataset);
    maybe(j, "out", rc.out);
    maybe(j, "task", rc.task);
    maybe(j, "split", rc.split);
    maybe(j, "features", rc.features);
    maybe(j, "profile", rc.profile);
    maybe(j, "stage", rc.stage);
    if (j.contains("model")) {
        const json& m = j["model"];
        maybe(m, "d_hidden", rc.model.d_hidden);
        maybe(m, "gcn_layers", rc.model.gcn_layers);
        maybe(m, "lambda_action", rc.model.lambda_action);
        maybe(m, "lambda_hand", rc.model.lambda_hand);
        maybe(m, "tau", rc.model.tau);
        maybe(m, "seed", rc.model.seed);
        maybe(m, "lr", rc.model.lr);
        maybe(m, "epochs", rc.model.epochs);
        maybe(m, "zero_init", rc.model.zero_init);
        maybe(m, "action_head", rc.model.action_head);
        maybe(m, "hand_head", rc.model.hand_head);
        maybe(m, "aux_losses_in_stage2", rc.model.aux_losses_in_stage2);
        maybe(m, "task_weight", rc.model.task_weight);
    }
    if (j.contains("synth")) {
        const json& s = j["synth"];
        maybe(s, "train_frames", rc.synth.train_frames);
        maybe(s, "val_frames", rc.synth.val_frames);
        maybe(s, "test_frames", rc.synth.test_frames);
        maybe(s, "tools_min", rc.synth.tools_min);
        maybe(s, "tools_max", rc.synth.tools_max);
        maybe(s, "anatomies_min", rc.synth.anatomies_min);
        maybe(s, "anatomies_max", rc.synth.anatomies_max);
        maybe(s, "sigma", rc.synth.sigma);
        maybe(s, "seed", rc.synth.seed);
        maybe(s, "width", rc.synth.width);
        maybe(s, "height", rc.synth.height);
    }
}

ssg::schema::Profile profile_from_string(const std::string& s) {
    if (s == "sg201") return ssg::schema::Profile::SG201;
    if (s == "generic") return ssg::schema::Profile::Generic;
    throw IoError("unknown profile '" + s + "' (expected sg201 or generic)");
}

ssg::schema::Dataset load_dataset(const RunConfig& rc, std::string* warnings_out = nullptr) {
    if (rc.dataset.empty()) throw IoError("no dataset given (use --dataset or the config file)");
    auto res = ssg::schema::parse_dataset(slurp(rc.dataset), profile_from_string(rc.profile));
    if (warnings_out)
        for (const auto& w : res.warnings) *warnings_out += w + "\n";
    return std::move(res.dataset);
}

void write_manifest(const RunConfig& rc, const std::string& command, const std::string& dir,
                    json extra) {
    json m;
    m["command"] = command;
    m["config"] = run_config_json(rc);
    if (!rc.dataset.empty())
        m["dataset_hash"] = ssg::to_hex(ssg::fnv1a64(slurp(rc.dataset)));
    for (auto& [k, v] : extra.items()) m[k] = v;
    write_file(dir + "/manifest.json", m.dump(2) + "\n");
}

// -----------------------------
// Subcommands
// -----------------------------

int cmd_validate(const RunConfig& rc) {
    ssg::schema::Dataset d;
    try {
        d = load_dataset(rc);
    } catch (const ssg::schema::ParseError& e) {
        std::cout << "parse-error: " << e.what() << "\n";
        return 1;
    }
    const auto report = ssg::schema::validate(d);
    for (const auto& v : report.violations) {
        std::cout << (v.frame_id.empty() ? std::string("-") : v.frame_id) << ": "
                  << ssg::schema::rule_name(v.rule) << ": " << v.detail << "\n";
    }
    std::cout << (report.ok() ? "ok" : "invalid") << ": " << d.frames.size() << " frames, "
              << report.violations.size() << " violations\n";
    return report.ok() ? 0 : 1;
}

std::string stats_csv(const ssg::schema::Dataset& d, const ssg::schema::CategoryStats& s) {
    std::string csv = "category,name,train,val,test,total\n";
    auto rows = [&](const char* cat, const std::vector<std::string>& names,
                    const std::vector<ssg::schema::SplitCounts>& counts) {
        for (size_t i = 0; i < names.size(); ++i) {
            csv += std::string(cat) + "," + names[i] + "," + std::to_string(counts[i].train) + "," +
                   std::to_string(counts[i].val) + "," + std::to_string(counts[i].test) + "," +
                   std::to_string(counts[i].total()) + "\n";
        }
    };
    rows("tool", d.catalog.tools, s.tools);
    rows("action", d.catalog.actions, s.actions);
    rows("hand", d.catalog.hands, s.hands);
    return csv;
}

int cmd_stats(const RunConfig& rc, const std::string& split, const std::string& csv_path) {
    const auto d = load_dataset(rc);
    const auto s = ssg::schema::compute_stats(d);

    auto pick = [&split](const ssg::schema::SplitCounts& c) -> long {
        if (split == "train") return c.train;
        if (split == "val") return c.val;
        if (split == "test") return c.test;
        return c.total();
    };
    auto table = [&](const char* cat, const std::vector<std::string>& names,
                     const std::vector<ssg::schema::SplitCounts>& counts) {
        for (size_t i = 0; i < names.size(); ++i)
            std::printf("%-8s %-16s %8ld\n", cat, names[i].c_str(), pick(counts[i]));
    };
    std::printf("%-8s %-16s %8s   (split: %s)\n", "category", "name", "count", split.c_str());
    table("tool", d.catalog.tools, s.tools);
    table("action", d.catalog.actions, s.actions);
    table("hand", d.catalog.hands, s.hands);

    if (!csv_path.empty()) write_file(csv_path, stats_csv(d, s));
    return 0;
}

int cmd_export_dot(const RunConfig& rc, const std::string& frame_id) {
    const auto d = load_dataset(rc);
    const auto* frame = d.find_frame(frame_id);
    if (!frame) throw IoError("frame '" + frame_id + "' not found in dataset");
    std::cout << ssg::graph::to_dot(*frame, d.catalog);
    return 0;
}

int cmd_synth(const RunConfig& rc) {
    const auto d = ssg::synth::generate_dataset(rc.synth);
    const std::string text = ssg::schema::serialize(d);
    write_file(rc.out + "/dataset.json", text);
    json extra;
    extra["outputs"] = {rc.out + "/dataset.json"};
    extra["frames"] = d.frames.size();
    extra["output_hash"] = ssg::to_hex(ssg::fnv1a64(text));
    write_manifest(rc, "synth", rc.out, extra);
    std::cout << "wrote " << rc.out << "/dataset.json (" << d.frames.size() << " frames)\n";
    return 0;
}

json epochs_json(const ssg::model::TrainResult& r) {
    json out = json::array();
    for (const auto& e : r.epochs) {
        out.push_back({{"epoch", e.epoch},
                       {"edge_exist", e.train.edge_exist},
                       {"spatial", e.train.spatial},
                       {"action", e.train.action},
                       {"hand", e.train.hand},
                       {"lg", e.train.lg},
                       {"total", e.train.total},
                       {"task", e.train.task},
                       {"val_metric", e.val_metric}});
    }
    return out;
}

int cmd_train(const RunConfig& rc) {
    const auto dataset = load_dataset(rc);

    if (rc.stage == 1) {
        ssg::model::SsgModel model(dataset.catalog, rc.d_appearance, rc.model);
        const auto result = ssg::model::train_stage1(model, dataset);
        const std::string dir = rc.out + "/stage1";
        write_file(dir + "/checkpoint.json", ssg::model::checkpoint_json(model));
        json extra;
        extra["stage"] = 1;
        extra["best_epoch"] = result.best_epoch;
        extra["best_val_total"] = result.best_val;
        extra["epochs"] = epochs_json(result);
        extra["outputs"] = {dir + "/checkpoint.json"};
        write_manifest(rc, "train", dir, extra);
        std::cout << "stage 1 done: best epoch " << result.best_epoch << ", val total "
                  << result.best_val << "\n";
        return 0;
    }

    if (rc.stage != 2) throw IoError("stage must be 1 or 2");
    if (rc.task.empty()) throw IoError("stage 2 needs --task cvs|triplet");

    const std::string ckpt_path =
        rc.init_from.empty() ? rc.out + "/stage1/checkpoint.json" : rc.init_from;
    auto loaded = ssg::model::model_from_checkpoint(slurp(ckpt_path));
    if (loaded.model.catalog_hash() != dataset.catalog.hash())
        throw IoError("checkpoint catalog does not match dataset catalog");

    // Stage-2 runs adopt the command's training settings; the architecture
    // comes from the checkpoint.
    auto& cfg = loaded.model.config();
    cfg.lambda_action = rc.model.lambda_action;
    cfg.lambda_hand = rc.model.lambda_hand;
    cfg.tau = rc.model.tau;
    cfg.lr = rc.model.lr;
    cfg.epochs = rc.model.epochs;
    cfg.seed = rc.model.seed;
    cfg.aux_losses_in_stage2 = rc.model.aux_losses_in_stage2;
    cfg.task_weight = rc.model.task_weight;

    const auto task = ssg::model::task_from_string(rc.task);
    const auto spec = ssg::model::make_task_spec(task, dataset);
    const auto result = ssg::model::train_stage2(loaded.model, spec, dataset);

    const std::string dir = rc.out + "/stage2-" + rc.task;
    write_file(dir + "/model.json", ssg::model::checkpoint_json(loaded.model, &spec));
    json extra;
    extra["stage"] = 2;
    extra["task"] = rc.task;
    extra["labels"] = spec.label_names;
    extra["best_epoch"] = result.best_epoch;
    extra["best_val_map"] = result.best_val;
    extra["epochs"] = epochs_json(result);
    extra["init_from"] = ckpt_path;
    extra["outputs"] = {dir + "/model.json"};
    write_manifest(rc, "train", dir, extra);
    std::cout << "stage 2 (" << rc.task << ") done: best epoch " << result.best_epoch
              << ", val mAP " << result.best_val << "\n";
    return 0;
}

int cmd_eval(const RunConfig& rc) {
    if (rc.task.empty()) throw IoError("eval needs --task cvs|triplet");
    const auto dataset = load_dataset(rc);

    const std::string model_path =
        rc.init_from.empty() ? rc.out + "/stage2-" + rc.task + "/model.json" : rc.init_from;
    auto loaded = ssg::model::model_from_checkpoint(slurp(model_path));
    if (!loaded.task) throw IoError("'" + model_path + "' is not a task model");
    if (ssg::model::to_string(loaded.task->task) != rc.task)
        throw IoError("model at '" + model_path + "' was trained for task '" +
                      ssg::model::to_string(loaded.task->task) + "'");

    const auto report = ssg::eval::evaluate(loaded.model, *loaded.task, dataset, rc.split);

    const std::string dir = rc.out + "/eval-" + rc.task + "-" + rc.split;
    write_file(dir + "/metrics.csv", report.to_csv());

    json summary;
    summary["task"] = report.task;
    summary["split"] = report.split;
    summary["map"] = report.map;
    summary["frames"] = report.frames;
    summary["defined_labels"] = report.defined_labels;
    summary["labels_without_positives"] = report.undefined_label_names();
    summary["seed"] = rc.model.seed;
    summary["config_hash"] = ssg::to_hex(ssg::fnv1a64(run_config_json(rc).dump()));
    write_file(dir + "/summary.json", summary.dump(2) + "\n");

    json extra;
    extra["task"] = rc.task;
    extra["split"] = rc.split;
    extra["map"] = report.map;
    extra["model"] = model_path;
    extra["outputs"] = {dir + "/metrics.csv", dir + "/summary.json"};
    write_manifest(rc, "eval", dir, extra);

    std::printf("%s %s mAP: %.6f (%d labels, %d frames)\n", report.task.c_str(),
                report.split.c_str(), report.map, report.defined_labels, report.frames);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surgical scene-graph pipeline"};
    app.require_subcommand(1);

    RunConfig rc;
    std::string config_path;
    std::string stats_split = "all";
    std::string stats_csv_path;
    std::string frame_id;
    bool no_action_head = false, no_hand_head = false, no_aux_stage2 = false, zero_init = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override it");
        cmd->add_option("--dataset", rc.dataset, "annotation dataset (JSON)");
        cmd->add_option("--out", rc.out, "output directory");
        cmd->add_option("--profile", rc.profile, "schema profile: sg201 | generic");
        return cmd;
    };
    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--seed", rc.model.seed, "RNG seed");
        cmd->add_option("--lambda-action", rc.model.lambda_action, "action loss weight");
        cmd->add_option("--lambda-hand", rc.model.lambda_hand, "hand loss weight");
        cmd->add_option("--epochs", rc.model.epochs, "training epochs per stage");
        cmd->add_option("--tau", rc.model.tau, "edge retention threshold");
        cmd->add_option("--lr", rc.model.lr, "Adam learning rate");
        cmd->add_option("--d-hidden", rc.model.d_hidden, "embedding width");
        cmd->add_option("--gcn-layers", rc.model.gcn_layers, "message passing layers");
        cmd->add_flag("--no-action-head", no_action_head, "detach the action edge head");
        cmd->add_flag("--no-hand-head", no_hand_head, "detach the hand identity head");
        cmd->add_flag("--no-aux-stage2", no_aux_stage2, "drop auxiliary losses in stage 2");
        cmd->add_option("--task-weight", rc.model.task_weight, "stage-2 decoder loss weight");
        cmd->add_flag("--zero-init", zero_init, "zero-weight initialization");
        cmd->add_option("--features", rc.features, "appearance sidecar JSON");
        return cmd;
    };

    auto* c_validate = add_common(app.add_subcommand("validate", "check dataset invariants"));
    auto* c_stats = add_common(app.add_subcommand("stats", "category statistics"));
    c_stats->add_option("--split", stats_split, "train | val | test | all");
    c_stats->add_option("--csv", stats_csv_path, "also write a CSV table");
    auto* c_dot = add_common(app.add_subcommand("export-dot", "Graphviz rendering of a frame"));
    c_dot->add_option("--frame", frame_id, "frame id")->required();
    auto* c_synth = add_common(app.add_subcommand("synth", "generate a synthetic dataset"));
    c_synth->add_option("--seed", rc.synth.seed, "RNG seed");
    c_synth->add_option("--sigma", rc.synth.sigma, "label noise rate");
    c_synth->add_option("--train-frames", rc.synth.train_frames, "train split size");
    c_synth->add_option("--val-frames", rc.synth.val_frames, "val split size");
    c_synth->add_option("--test-frames", rc.synth.test_frames, "test split size");
    c_synth->add_option("--tools-min", rc.synth.tools_min, "tools per frame, lower bound");
    c_synth->add_option("--tools-max", rc.synth.tools_max, "tools per frame, upper bound");
    c_synth->add_option("--anatomies-min", rc.synth.anatomies_min, "anatomies per frame, lower bound");
    c_synth->add_option("--anatomies-max", rc.synth.anatomies_max, "anatomies per frame, upper bound");
    auto* c_train = add_model(add_common(app.add_subcommand("train", "stage 1 or 2 training")));
    c_train->add_option("--stage", rc.stage, "1 | 2")->required();
    c_train->add_option("--task", rc.task, "cvs | triplet (stage 2)");
    c_train->add_option("--init-from", rc.init_from, "stage-1 checkpoint path");
    auto* c_eval = add_model(add_common(app.add_subcommand("eval", "evaluate a task model")));
    c_eval->add_option("--task", rc.task, "cvs | triplet")->required();
    c_eval->add_option("--split", rc.split, "train | val | test");
    c_eval->add_option("--init-from", rc.init_from, "task model path");

    // Config file values load first so that explicit flags override them.
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
        if (!path.empty()) {
            try {
                apply_config_file(rc, path);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (no_action_head) rc.model.action_head = false;
    if (no_hand_head) rc.model.hand_head = false;
    if (no_aux_stage2) rc.model.aux_losses_in_stage2 = false;
    if (zero_init) rc.model.zero_init = true;

    try {
        if (app.got_subcommand(c_validate)) return cmd_validate(rc);
        if (app.got_subcommand(c_stats)) return cmd_stats(rc, stats_split, stats_csv_path);
        if (app.got_subcommand(c_dot)) return cmd_export_dot(rc, frame_id);
        if (app.got_subcommand(c_synth)) return cmd_synth(rc);
        if (app.got_subcommand(c_train)) return cmd_train(rc);
        if (app.got_subcommand(c_eval)) return cmd_eval(rc);
    } catch (const ssg::schema::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
