#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssg/graph.hpp"
#include "ssg/nn.hpp"
#include "ssg/schema.hpp"

namespace ssg::model {

struct ModelConfig {
    int d_hidden = 32;
    int gcn_layers = 2;
    double lambda_action = 0.6;
    double lambda_hand = 0.001;
    double tau = 0.5;       // spatial edge retention threshold
    uint64_t seed = 0;
    double lr = 1e-3;
    int epochs = 50;
    bool zero_init = false;  // all-zero weights, for calibration checks
    // Detachable auxiliary heads; detaching reproduces the spatial-only
    // baseline exactly.
    bool action_head = true;
    bool hand_head = true;
    bool aux_losses_in_stage2 = true;
    double task_weight = 1.0;  // stage-2 decoder loss weight
};

struct LossBreakdown {
    double edge_exist = 0;
    double spatial = 0;
    double action = 0;
    double hand = 0;
    double lg = 0;     // edge_exist + spatial
    double total = 0;  // lg + lambda_action * action + lambda_hand * hand
    double task = 0;   // stage-2 decoder loss, 0 in stage 1
};

// Composes the weighted total. Every input must be finite.
LossBreakdown compose_total(double edge_exist, double spatial, double action, double hand,
                            const ModelConfig& cfg);

enum class Task { Cvs, Triplet };
const char* to_string(Task t);
Task task_from_string(const std::string& s);

struct TaskSpec {
    Task task = Task::Cvs;
    std::vector<std::string> label_names;
    std::vector<schema::TripletLabel> vocabulary;  // triplet task only

    int width() const { return static_cast<int>(label_names.size()); }
};

TaskSpec make_task_spec(Task task, const schema::Dataset& dataset);

// Per-frame multi-label targets; nullopt when the frame carries no label
// for this task (possible for CVS only).
std::optional<std::vector<double>> frame_labels(const TaskSpec& spec,
                                                const schema::FrameAnnotation& frame);

// A frame turned into model inputs once; reused across epochs.
struct PreparedFrame {
    std::string frame_id;
    double width = 0, height = 0;
    std::vector<graph::Node> nodes;
    std::vector<graph::Edge> candidates;
    // Supervision in candidate order.
    std::vector<double> exist_targets;  // per spatial candidate
    std::vector<int> spatial_targets;   // per spatial candidate
    std::vector<int> action_targets;    // per action edge
    std::vector<int> hand_nodes;        // tool node indices with a hand label
    std::vector<int> hand_targets;      // parallel to hand_nodes
    std::optional<std::vector<double>> task_labels;
};

PreparedFrame prepare_frame(const schema::FrameAnnotation& frame,
                            const schema::ClassCatalog& catalog,
                            const graph::FeatureProvider& provider,
                            const TaskSpec* task = nullptr);

// Latent-graph encoder output: final node and edge embeddings. Edge rows
// follow the graph's edge order.
struct Encoded {
    nn::Var node_emb;  // n x d_hidden
    nn::Var edge_emb;  // edges x d_hidden
};

// GCN message passing over the retained graph. Per layer, simultaneously:
//   h_i   <- relu(Ws h_i + mean over incident edges (j, e) of Wn [h_j || e])
//   e_uv  <- relu(We [h_u || e_uv || h_v])
// Isolated nodes keep only the self term. Parameters are read from the
// tape's store under enc<L>.self / enc<L>.nbr / enc<L>.edge.
Encoded encode(nn::Tape& tape, const graph::LatentGraph& g, const ModelConfig& cfg);

// Epoch summary; val_metric is mean validation total loss in stage 1 and
// validation mAP in stage 2.
struct EpochRecord {
    int epoch = 0;
    LossBreakdown train;
    double val_metric = 0;
};

struct TrainResult {
    std::vector<EpochRecord> epochs;
    std::vector<LossBreakdown> steps;  // one entry per optimizer step
    int best_epoch = -1;
    double best_val = 0;
};

class SsgModel {
  public:
    SsgModel(schema::ClassCatalog catalog, int d_appearance, ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }
    ModelConfig& config() { return cfg_; }
    const schema::ClassCatalog& catalog() const { return catalog_; }
    uint64_t catalog_hash() const { return catalog_.hash(); }
    int d_appearance() const { return d_appearance_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }

    graph::FeatureProvider make_provider() const;

    // Creates decoder parameters for a task if absent.
    void ensure_task_decoder(const TaskSpec& spec);

    struct FrameResult {
        LossBreakdown parts;
        nn::Var objective;     // total (stage 1) or total + task (stage 2)
        nn::Var action_logits; // invalid when the head is detached or no edges
        nn::Var hand_logits;   // invalid when the head is detached or no tools
        std::vector<int> action_targets;
        std::vector<int> hand_targets;
    };

    // Full forward pass: existence head, proposal, encoder, heads, losses.
    // When task is non-null and the frame has labels, adds the decoder loss.
    FrameResult frame_loss(nn::Tape& tape, const PreparedFrame& pf,
                           const TaskSpec* task = nullptr);

    // Sigmoid scores of the task decoder for one frame.
    std::vector<double> task_scores(const PreparedFrame& pf, const TaskSpec& spec);

  private:
    void init_params();

    schema::ClassCatalog catalog_;
    int d_appearance_ = 0;
    ModelConfig cfg_;
    int d_node_ = 0, d_edge_ = 0;
    nn::ParamStore params_;
};

// Stage 1: latent-graph training with the composite loss over the train
// split; best epoch selected by validation total loss.
TrainResult train_stage1(SsgModel& model, const schema::Dataset& dataset);

// Stage 2: task fine-tuning from stage-1 parameters; decoder trained with
// per-label BCE; best epoch selected by validation mAP. Auxiliary losses
// stay active at their lambda weights unless disabled in the config.
TrainResult train_stage2(SsgModel& model, const TaskSpec& spec, const schema::Dataset& dataset);

// Versioned JSON checkpoint: config, seed, catalog (plus hash), parameters,
// and the task spec when present.
std::string checkpoint_json(const SsgModel& model, const TaskSpec* spec = nullptr);

struct LoadedModel {
    SsgModel model;
    std::optional<TaskSpec> task;
};
LoadedModel model_from_checkpoint(const std::string& json_text);

// Frames of a split with labels for the task, prepared for inference.
std::vector<PreparedFrame> prepare_split(const schema::Dataset& dataset, const std::string& split,
                                         const graph::FeatureProvider& provider,
                                         const TaskSpec* task);

}  // namespace ssg::model
