#include "ssg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "ssg/eval.hpp"
#include "ssg/util.hpp"

namespace ssg::model {

using nn::Tape;
using nn::Tensor;
using nn::Var;

LossBreakdown compose_total(double edge_exist, double spatial, double action, double hand,
                            const ModelConfig& cfg) {
    for (double v : {edge_exist, spatial, action, hand})
        if (!std::isfinite(v)) throw std::runtime_error("non-finite loss term");
    LossBreakdown b;
    b.edge_exist = edge_exist;
    b.spatial = spatial;
    b.action = action;
    b.hand = hand;
    b.lg = edge_exist + spatial;
    b.total = b.lg + cfg.lambda_action * action + cfg.lambda_hand * hand;
    return b;
}

const char* to_string(Task t) { return t == Task::Cvs ? "cvs" : "triplet"; }

Task task_from_string(const std::string& s) {
    if (s == "cvs") return Task::Cvs;
    if (s == "triplet") return Task::Triplet;
    throw std::invalid_argument("unknown task '" + s + "' (expected cvs or triplet)");
}

TaskSpec make_task_spec(Task task, const schema::Dataset& dataset) {
    TaskSpec spec;
    spec.task = task;
    if (task == Task::Cvs) {
        spec.label_names = {"C1", "C2", "C3"};
    } else {
        spec.vocabulary = schema::triplet_vocabulary(dataset);
        for (const auto& l : spec.vocabulary) spec.label_names.push_back(l.name(dataset.catalog));
    }
    return spec;
}

std::optional<std::vector<double>> frame_labels(const TaskSpec& spec,
                                                const schema::FrameAnnotation& frame) {
    if (spec.task == Task::Cvs) {
        if (!frame.cvs) return std::nullopt;
        return std::vector<double>{(*frame.cvs)[0] ? 1.0 : 0.0, (*frame.cvs)[1] ? 1.0 : 0.0,
                                   (*frame.cvs)[2] ? 1.0 : 0.0};
    }
    std::set<schema::TripletLabel> present;
    for (const auto& t : frame.triplets) {
        const auto* tool = frame.find_object(t.tool_obj);
        if (!tool || tool->kind != schema::ObjectKind::Tool) continue;
        schema::TripletLabel l;
        l.tool = tool->class_index;
        l.action = t.action_index;
        if (t.target_obj) {
            const auto* target = frame.find_object(*t.target_obj);
            if (target && target->kind == schema::ObjectKind::Anatomy) l.target = target->class_index;
        }
        present.insert(l);
    }
    std::vector<double> labels(spec.vocabulary.size(), 0.0);
    for (size_t k = 0; k < spec.vocabulary.size(); ++k)
        if (present.count(spec.vocabulary[k])) labels[k] = 1.0;
    return labels;
}

PreparedFrame prepare_frame(const schema::FrameAnnotation& frame,
                            const schema::ClassCatalog& catalog,
                            const graph::FeatureProvider& provider, const TaskSpec* task) {
    PreparedFrame pf;
    pf.frame_id = frame.frame_id;
    pf.width = frame.width;
    pf.height = frame.height;
    pf.nodes = graph::build_nodes(frame, provider);
    pf.candidates = graph::candidate_edges(frame, pf.nodes, catalog, provider);
    for (const auto& e : pf.candidates) {
        if (e.kind == graph::EdgeKind::Spatial) {
            pf.exist_targets.push_back(e.exist_gt ? 1.0 : 0.0);
            pf.spatial_targets.push_back(static_cast<int>(*e.spatial_gt));
        } else {
            pf.action_targets.push_back(*e.action_gt);
        }
    }
    for (size_t i = 0; i < pf.nodes.size(); ++i)
        if (pf.nodes[i].kind == schema::ObjectKind::Tool && pf.nodes[i].hand_gt) {
            pf.hand_nodes.push_back(static_cast<int>(i));
            pf.hand_targets.push_back(*pf.nodes[i].hand_gt);
        }
    if (task) pf.task_labels = frame_labels(*task, frame);
    return pf;
}

// -----------------------------
// Encoder
// -----------------------------

Encoded encode(Tape& tape, const graph::LatentGraph& g, const ModelConfig& cfg) {
    const int n = static_cast<int>(g.nodes.size());
    const int ne = static_cast<int>(g.edges.size());

    const int d_node = tape.value(tape.param("enc0.self")).rows;
    const int d_edge = tape.value(tape.param("enc0.nbr")).rows - d_node;

    Tensor X(n, d_node);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(g.nodes[i].feature.size()) != d_node)
            throw std::invalid_argument("encode: node feature dimension mismatch");
        for (int j = 0; j < d_node; ++j) X.at(i, j) = g.nodes[i].feature[j];
    }
    Tensor E0(ne, d_edge);
    for (int e = 0; e < ne; ++e) {
        if (static_cast<int>(g.edges[e].feature.size()) != d_edge)
            throw std::invalid_argument("encode: edge feature dimension mismatch");
        for (int j = 0; j < d_edge; ++j) E0.at(e, j) = g.edges[e].feature[j];
    }

    std::vector<int> src(ne), dst(ne);
    std::vector<int> msg_node, msg_edge, msg_seg;
    msg_node.reserve(2 * ne);
    for (int e = 0; e < ne; ++e) {
        src[e] = g.edges[e].src;
        dst[e] = g.edges[e].dst;
        // Each edge passes a message both ways.
        msg_node.push_back(dst[e]);
        msg_edge.push_back(e);
        msg_seg.push_back(src[e]);
        msg_node.push_back(src[e]);
        msg_edge.push_back(e);
        msg_seg.push_back(dst[e]);
    }

    Var H = tape.input(std::move(X));
    Var E = tape.input(std::move(E0));
    for (int l = 0; l < cfg.gcn_layers; ++l) {
        const std::string p = "enc" + std::to_string(l);
        Var ws = tape.param(p + ".self");
        Var wn = tape.param(p + ".nbr");
        Var we = tape.param(p + ".edge");

        Var messages = tape.matmul(
            tape.concat_cols({tape.gather_rows(H, msg_node), tape.gather_rows(E, msg_edge)}), wn);
        Var agg = tape.segment_mean(messages, msg_seg, n);
        Var h_new = tape.relu(tape.add(tape.matmul(H, ws), agg));
        Var e_new = tape.relu(tape.matmul(
            tape.concat_cols({tape.gather_rows(H, src), E, tape.gather_rows(H, dst)}), we));
        H = h_new;
        E = e_new;
    }
    return Encoded{H, E};
}

// -----------------------------
// SsgModel
// -----------------------------

SsgModel::SsgModel(schema::ClassCatalog catalog, int d_appearance, ModelConfig cfg)
    : catalog_(std::move(catalog)), d_appearance_(d_appearance), cfg_(cfg), params_(cfg.seed) {
    graph::FeatureProvider provider(catalog_, d_appearance_);
    d_node_ = provider.node_dim();
    d_edge_ = provider.edge_dim();
    init_params();
}

graph::FeatureProvider SsgModel::make_provider() const {
    return graph::FeatureProvider(catalog_, d_appearance_);
}

void SsgModel::init_params() {
    const nn::Init init = cfg_.zero_init ? nn::Init::Zero : nn::Init::Glorot;
    const int dh = cfg_.d_hidden;

    auto mlp = [&](const std::string& prefix, int d_in, int d_out) {
        params_.create(prefix + ".w1", d_in, dh, init);
        params_.create(prefix + ".b1", 1, dh, nn::Init::Zero);
        params_.create(prefix + ".w2", dh, d_out, init);
        params_.create(prefix + ".b2", 1, d_out, nn::Init::Zero);
    };

    int dn = d_node_, de = d_edge_;
    for (int l = 0; l < cfg_.gcn_layers; ++l) {
        const std::string p = "enc" + std::to_string(l);
        params_.create(p + ".self", dn, dh, init);
        params_.create(p + ".nbr", dn + de, dh, init);
        params_.create(p + ".edge", 2 * dn + de, dh, init);
        dn = dh;
        de = dh;
    }
    mlp("exist", d_edge_, 1);
    mlp("spatial", dh, geom::kSpatialRelationCount);
    if (cfg_.action_head) mlp("action", dh, static_cast<int>(catalog_.actions.size()));
    if (cfg_.hand_head) mlp("hand", dh, static_cast<int>(catalog_.hands.size()));
}

void SsgModel::ensure_task_decoder(const TaskSpec& spec) {
    const std::string prefix = std::string("task.") + to_string(spec.task);
    if (params_.has(prefix + ".w1")) return;
    const nn::Init init = cfg_.zero_init ? nn::Init::Zero : nn::Init::Glorot;
    const int dh = cfg_.d_hidden;
    params_.create(prefix + ".w1", 2 * dh, dh, init);
    params_.create(prefix + ".b1", 1, dh, nn::Init::Zero);
    params_.create(prefix + ".w2", dh, spec.width(), init);
    params_.create(prefix + ".b2", 1, spec.width(), nn::Init::Zero);
}

namespace {

Var mlp2(Tape& tp, Var x, const std::string& prefix) {
    Var h = tp.relu(tp.linear(x, tp.param(prefix + ".w1"), tp.param(prefix + ".b1")));
    return tp.linear(h, tp.param(prefix + ".w2"), tp.param(prefix + ".b2"));
}

}  // namespace

SsgModel::FrameResult SsgModel::frame_loss(Tape& tp, const PreparedFrame& pf,
                                           const TaskSpec* task) {
    FrameResult fr;
    fr.action_targets = pf.action_targets;
    fr.hand_targets = pf.hand_targets;

    // Split candidates: spatial first, then action (candidate_edges order).
    std::vector<const graph::Edge*> spatial;
    for (const auto& e : pf.candidates)
        if (e.kind == graph::EdgeKind::Spatial) spatial.push_back(&e);
    const int n_spatial = static_cast<int>(spatial.size());

    // Edge-existence head scores raw spatial candidate features.
    Var loss_exist;
    std::vector<double> scores(n_spatial, 0.0);
    if (n_spatial > 0) {
        const int d_edge = static_cast<int>(spatial[0]->feature.size());
        Tensor S(n_spatial, d_edge);
        for (int i = 0; i < n_spatial; ++i)
            for (int j = 0; j < d_edge; ++j) S.at(i, j) = spatial[i]->feature[j];
        Var exist_logits = mlp2(tp, tp.input(std::move(S)), "exist");
        loss_exist = tp.bce_with_logits_mean(exist_logits, pf.exist_targets);
        for (int i = 0; i < n_spatial; ++i)
            scores[i] = nn::sigmoid(tp.value(exist_logits).at(i, 0));
    } else {
        loss_exist = tp.constant_scalar(0.0);
    }

    graph::LatentGraph g = graph::propose_edges(pf.frame_id, pf.width, pf.height, pf.nodes,
                                                pf.candidates, scores, cfg_.tau);

    // Retained spatial rows come first in g.edges; remember their targets.
    std::vector<int> retained_spatial_rows;
    std::vector<int> retained_spatial_targets;
    {
        int si = 0, row = 0;
        for (const auto& e : pf.candidates) {
            if (e.kind != graph::EdgeKind::Spatial) continue;
            if (scores[si] >= cfg_.tau) {
                retained_spatial_rows.push_back(row++);
                retained_spatial_targets.push_back(pf.spatial_targets[si]);
            }
            ++si;
        }
    }
    const int n_action = static_cast<int>(pf.action_targets.size());

    Encoded enc = encode(tp, g, cfg_);

    Var loss_spatial;
    if (!retained_spatial_rows.empty()) {
        Var sp_logits = mlp2(tp, tp.gather_rows(enc.edge_emb, retained_spatial_rows), "spatial");
        loss_spatial = tp.softmax_cross_entropy_mean(sp_logits, retained_spatial_targets);
    } else {
        loss_spatial = tp.constant_scalar(0.0);
    }

    Var loss_action;
    double action_value = 0.0;
    if (cfg_.action_head && n_action > 0) {
        std::vector<int> action_rows(n_action);
        std::iota(action_rows.begin(), action_rows.end(),
                  static_cast<int>(retained_spatial_rows.size()));
        fr.action_logits = mlp2(tp, tp.gather_rows(enc.edge_emb, action_rows), "action");
        loss_action = tp.softmax_cross_entropy_mean(fr.action_logits, pf.action_targets);
        action_value = tp.scalar(loss_action);
    }

    Var loss_hand;
    double hand_value = 0.0;
    if (cfg_.hand_head && !pf.hand_nodes.empty()) {
        fr.hand_logits = mlp2(tp, tp.gather_rows(enc.node_emb, pf.hand_nodes), "hand");
        loss_hand = tp.softmax_cross_entropy_mean(fr.hand_logits, pf.hand_targets);
        hand_value = tp.scalar(loss_hand);
    }

    fr.parts = compose_total(tp.scalar(loss_exist), tp.scalar(loss_spatial), action_value,
                             hand_value, cfg_);

    Var objective = tp.add(loss_exist, loss_spatial);
    if (loss_action.ok() && cfg_.lambda_action > 0)
        objective = tp.add_scaled(objective, loss_action, cfg_.lambda_action);
    if (loss_hand.ok() && cfg_.lambda_hand > 0)
        objective = tp.add_scaled(objective, loss_hand, cfg_.lambda_hand);

    if (task && pf.task_labels) {
        ensure_task_decoder(*task);
        Var readout = tp.concat_cols({tp.mean_rows(enc.node_emb), tp.mean_rows(enc.edge_emb)});
        Var task_logits = mlp2(tp, readout, std::string("task.") + to_string(task->task));
        Var loss_task = tp.bce_multilabel_mean(task_logits, *pf.task_labels);
        fr.parts.task = tp.scalar(loss_task);
        if (cfg_.task_weight != 1.0) loss_task = tp.scale(loss_task, cfg_.task_weight);
        objective = cfg_.aux_losses_in_stage2 ? tp.add(objective, loss_task) : loss_task;
    }

    fr.objective = objective;
    return fr;
}

std::vector<double> SsgModel::task_scores(const PreparedFrame& pf, const TaskSpec& spec) {
    const std::string prefix = std::string("task.") + to_string(spec.task);
    if (!params_.has(prefix + ".w1"))
        throw std::runtime_error("no trained decoder for task '" + std::string(to_string(spec.task)) + "'");

    Tape tp(&params_);

    std::vector<const graph::Edge*> spatial;
    for (const auto& e : pf.candidates)
        if (e.kind == graph::EdgeKind::Spatial) spatial.push_back(&e);
    std::vector<double> scores(spatial.size(), 0.0);
    if (!spatial.empty()) {
        const int d_edge = static_cast<int>(spatial[0]->feature.size());
        Tensor S(static_cast<int>(spatial.size()), d_edge);
        for (size_t i = 0; i < spatial.size(); ++i)
            for (int j = 0; j < d_edge; ++j) S.at(static_cast<int>(i), j) = spatial[i]->feature[j];
        Var exist_logits = mlp2(tp, tp.input(std::move(S)), "exist");
        for (size_t i = 0; i < spatial.size(); ++i)
            scores[i] = nn::sigmoid(tp.value(exist_logits).at(static_cast<int>(i), 0));
    }
    graph::LatentGraph g = graph::propose_edges(pf.frame_id, pf.width, pf.height, pf.nodes,
                                                pf.candidates, scores, cfg_.tau);
    Encoded enc = encode(tp, g, cfg_);
    Var readout = tp.concat_cols({tp.mean_rows(enc.node_emb), tp.mean_rows(enc.edge_emb)});
    Var logits = mlp2(tp, readout, prefix);

    std::vector<double> out(spec.width());
    for (int k = 0; k < spec.width(); ++k) out[k] = nn::sigmoid(tp.value(logits).at(0, k));
    return out;
}

// -----------------------------
// Training
// -----------------------------

std::vector<PreparedFrame> prepare_split(const schema::Dataset& dataset, const std::string& split,
                                         const graph::FeatureProvider& provider,
                                         const TaskSpec* task) {
    std::vector<PreparedFrame> out;
    for (const auto* f : dataset.frames_in_split(split)) {
        PreparedFrame pf = prepare_frame(*f, dataset.catalog, provider, task);
        if (task && !pf.task_labels) continue;  // frame carries no label for this task
        out.push_back(std::move(pf));
    }
    return out;
}

namespace {

struct EpochAccum {
    double edge_exist = 0, spatial = 0, action = 0, hand = 0, task = 0;
    int n = 0;

    void add(const LossBreakdown& b) {
        edge_exist += b.edge_exist;
        spatial += b.spatial;
        action += b.action;
        hand += b.hand;
        task += b.task;
        n += 1;
    }

    LossBreakdown mean(const ModelConfig& cfg) const {
        if (n == 0) return {};
        LossBreakdown b = compose_total(edge_exist / n, spatial / n, action / n, hand / n, cfg);
        b.task = task / n;
        return b;
    }
};

std::vector<size_t> epoch_order(size_t count, uint64_t seed, const char* stage, int epoch) {
    std::vector<size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(fnv1a64_mix(fnv1a64_mix(fnv1a64(stage), seed), static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

}  // namespace

TrainResult train_stage1(SsgModel& model, const schema::Dataset& dataset) {
    const auto provider = model.make_provider();
    auto train = prepare_split(dataset, "train", provider, nullptr);
    if (train.empty()) throw std::runtime_error("empty training split");
    auto val = prepare_split(dataset, "val", provider, nullptr);

    const ModelConfig& cfg = model.config();
    TrainResult res;
    std::map<std::string, Tensor> best;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochAccum acc;
        for (size_t idx : epoch_order(train.size(), cfg.seed, "stage1", epoch)) {
            Tape tp(&model.params());
            auto fr = model.frame_loss(tp, train[idx], nullptr);
            tp.backward(fr.objective);
            nn::adam_step(model.params(), tp.param_grads(), cfg.lr);
            res.steps.push_back(fr.parts);
            acc.add(fr.parts);
        }

        EpochRecord er;
        er.epoch = epoch;
        er.train = acc.mean(cfg);

        EpochAccum vacc;
        for (const auto& pf : val) {
            Tape tp(&model.params());
            vacc.add(model.frame_loss(tp, pf, nullptr).parts);
        }
        er.val_metric = val.empty() ? er.train.total : vacc.mean(cfg).total;
        res.epochs.push_back(er);

        if (res.best_epoch < 0 || er.val_metric < res.best_val) {
            res.best_epoch = epoch;
            res.best_val = er.val_metric;
            best = model.params().snapshot();
        }
    }
    model.params().restore(best);
    return res;
}

namespace {

double validation_map(SsgModel& model, const TaskSpec& spec,
                      const std::vector<PreparedFrame>& frames) {
    if (frames.empty()) return 0.0;
    std::vector<std::vector<double>> scores;
    std::vector<std::vector<int>> labels;
    for (const auto& pf : frames) {
        scores.push_back(model.task_scores(pf, spec));
        std::vector<int> row(pf.task_labels->size());
        for (size_t k = 0; k < row.size(); ++k) row[k] = (*pf.task_labels)[k] > 0.5 ? 1 : 0;
        labels.push_back(std::move(row));
    }
    const auto report = eval::map_multilabel(scores, labels, spec.label_names,
                                             to_string(spec.task), "val");
    return report.defined_labels == 0 ? 0.0 : report.map;
}

}  // namespace

TrainResult train_stage2(SsgModel& model, const TaskSpec& spec, const schema::Dataset& dataset) {
    model.ensure_task_decoder(spec);
    model.params().reset_adam();  // fresh optimizer state for the new stage

    const auto provider = model.make_provider();
    auto train = prepare_split(dataset, "train", provider, &spec);
    if (train.empty())
        throw std::runtime_error(std::string("no frames with ") + to_string(spec.task) +
                                 " labels in training split");
    auto val = prepare_split(dataset, "val", provider, &spec);

    const ModelConfig& cfg = model.config();
    TrainResult res;
    std::map<std::string, Tensor> best;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochAccum acc;
        for (size_t idx : epoch_order(train.size(), cfg.seed, "stage2", epoch)) {
            Tape tp(&model.params());
            auto fr = model.frame_loss(tp, train[idx], &spec);
            tp.backward(fr.objective);
            nn::adam_step(model.params(), tp.param_grads(), cfg.lr);
            res.steps.push_back(fr.parts);
            acc.add(fr.parts);
        }

        EpochRecord er;
        er.epoch = epoch;
        er.train = acc.mean(cfg);
        er.val_metric = validation_map(model, spec, val);
        res.epochs.push_back(er);

        if (res.best_epoch < 0 || er.val_metric > res.best_val) {
            res.best_epoch = epoch;
            res.best_val = er.val_metric;
            best = model.params().snapshot();
        }
    }
    model.params().restore(best);
    return res;
}

// -----------------------------
// Checkpoints
// -----------------------------

namespace {

using json = nlohmann::ordered_json;

json config_to_json(const ModelConfig& c) {
    return {{"d_hidden", c.d_hidden},
            {"gcn_layers", c.gcn_layers},
            {"lambda_action", c.lambda_action},
            {"lambda_hand", c.lambda_hand},
            {"tau", c.tau},
            {"seed", c.seed},
            {"lr", c.lr},
            {"epochs", c.epochs},
            {"zero_init", c.zero_init},
            {"action_head", c.action_head},
            {"hand_head", c.hand_head},
            {"aux_losses_in_stage2", c.aux_losses_in_stage2},
            {"task_weight", c.task_weight}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.d_hidden = j.at("d_hidden").get<int>();
    c.gcn_layers = j.at("gcn_layers").get<int>();
    c.lambda_action = j.at("lambda_action").get<double>();
    c.lambda_hand = j.at("lambda_hand").get<double>();
    c.tau = j.at("tau").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.lr = j.at("lr").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.zero_init = j.at("zero_init").get<bool>();
    c.action_head = j.at("action_head").get<bool>();
    c.hand_head = j.at("hand_head").get<bool>();
    c.aux_losses_in_stage2 = j.at("aux_losses_in_stage2").get<bool>();
    c.task_weight = j.value("task_weight", 1.0);
    return c;
}

}  // namespace

std::string checkpoint_json(const SsgModel& model, const TaskSpec* spec) {
    json doc;
    doc["format"] = "ssg.checkpoint";
    doc["version"] = 1;
    doc["seed"] = model.config().seed;
    doc["catalog_hash"] = to_hex(model.catalog_hash());
    doc["catalog"] = {{"tools", model.catalog().tools},
                      {"anatomies", model.catalog().anatomies},
                      {"actions", model.catalog().actions},
                      {"hands", model.catalog().hands}};
    doc["d_appearance"] = model.d_appearance();
    doc["config"] = config_to_json(model.config());
    if (spec) {
        json jt;
        jt["task"] = to_string(spec->task);
        jt["labels"] = spec->label_names;
        jt["vocabulary"] = json::array();
        for (const auto& l : spec->vocabulary) {
            json jl = {{"tool", l.tool}, {"action", l.action}};
            if (l.target) jl["target"] = *l.target;
            jt["vocabulary"].push_back(std::move(jl));
        }
        doc["task"] = std::move(jt);
    }
    doc["params"] = json::object();
    for (const auto& [name, t] : model.params().all())
        doc["params"][name] = {{"rows", t.rows}, {"cols", t.cols}, {"data", t.v}};
    return doc.dump(2) + "\n";
}

LoadedModel model_from_checkpoint(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("checkpoint: malformed JSON: ") + e.what());
    }
    if (doc.value("format", "") != "ssg.checkpoint")
        throw std::runtime_error("checkpoint: unrecognized format");
    if (doc.value("version", 0) != 1) throw std::runtime_error("checkpoint: unsupported version");

    schema::ClassCatalog cat;
    const json& jc = doc.at("catalog");
    cat.tools = jc.at("tools").get<std::vector<std::string>>();
    cat.anatomies = jc.at("anatomies").get<std::vector<std::string>>();
    cat.actions = jc.at("actions").get<std::vector<std::string>>();
    cat.hands = jc.at("hands").get<std::vector<std::string>>();
    if (doc.at("catalog_hash").get<std::string>() != to_hex(cat.hash()))
        throw std::runtime_error("checkpoint: catalog hash mismatch");

    LoadedModel lm{SsgModel(cat, doc.at("d_appearance").get<int>(),
                            config_from_json(doc.at("config"))),
                   std::nullopt};

    for (auto it = doc.at("params").begin(); it != doc.at("params").end(); ++it) {
        Tensor t(it->at("rows").get<int>(), it->at("cols").get<int>());
        const auto data = it->at("data").get<std::vector<double>>();
        if (data.size() != t.size())
            throw std::runtime_error("checkpoint: parameter '" + it.key() + "' has wrong size");
        t.v = data;
        lm.model.params().set(it.key(), std::move(t));
    }

    if (doc.contains("task")) {
        TaskSpec spec;
        spec.task = task_from_string(doc["task"].at("task").get<std::string>());
        spec.label_names = doc["task"].at("labels").get<std::vector<std::string>>();
        for (const auto& jl : doc["task"].at("vocabulary")) {
            schema::TripletLabel l;
            l.tool = jl.at("tool").get<int>();
            l.action = jl.at("action").get<int>();
            if (jl.contains("target")) l.target = jl.at("target").get<int>();
            spec.vocabulary.push_back(l);
        }
        lm.task = std::move(spec);
    }
    return lm;
}

}  // namespace ssg::model
