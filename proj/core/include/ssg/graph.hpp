#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssg/geometry.hpp"
#include "ssg/schema.hpp"

namespace ssg::graph {

struct Node {
    std::string obj_id;
    schema::ObjectKind kind = schema::ObjectKind::Tool;
    geom::Box box;
    // Class probabilities over the catalog classes of this node's kind;
    // one-hot for ground-truth boxes.
    std::vector<double> class_probs;
    std::vector<double> feature;
    std::optional<int> hand_gt;
};

enum class EdgeKind { Spatial, Action };

struct Edge {
    int src = 0, dst = 0;  // spatial: src < dst; action: tool -> anatomy
    EdgeKind kind = EdgeKind::Spatial;
    std::vector<double> feature;
    std::optional<geom::SpatialRelation> spatial_gt;  // spatial edges
    std::optional<int> action_gt;                     // action edges
    // Spatial candidates only: supervision for the edge-existence score.
    // An edge counts as meaningful when the boxes overlap or the pair carries
    // an annotated non-null triplet.
    bool exist_gt = false;
};

struct LatentGraph {
    std::string frame_id;
    double width = 0, height = 0;
    std::vector<Node> nodes;
    std::vector<Edge> edges;

    int tool_count() const;
    int anatomy_count() const;
    int spatial_edge_count() const;
    int action_edge_count() const;
};

// Deterministic node/edge feature construction:
//   node: class one-hot over (tools then anatomies) ++ normalized box
//         geometry ++ optional appearance vector from a sidecar file;
//   edge: normalized union-box geometry ++ mean of endpoint node features.
// Appearance vectors are keyed "<frame_id>/<object_id>" because object ids
// are only frame-unique.
class FeatureProvider {
  public:
    explicit FeatureProvider(const schema::ClassCatalog& catalog, int d_appearance = 0);

    // JSON object mapping "<frame_id>/<object_id>" to number arrays of
    // length d_appearance. Throws on malformed input.
    void load_sidecar(const std::string& json_text);

    int node_dim() const;
    int edge_dim() const { return 4 + node_dim(); }
    int d_appearance() const { return d_appearance_; }
    int tool_classes() const { return n_tool_classes_; }
    int anatomy_classes() const { return n_anatomy_classes_; }

    std::vector<double> node_feature(const schema::FrameAnnotation& frame,
                                     const schema::ObjectAnn& obj) const;
    std::vector<double> edge_feature(const schema::FrameAnnotation& frame, const Node& a,
                                     const Node& b) const;

  private:
    int n_tool_classes_ = 0;
    int n_anatomy_classes_ = 0;
    int d_appearance_ = 0;
    std::map<std::string, std::vector<double>> appearance_;
};

// One node per annotated object, in annotation order. Ground-truth boxes
// yield one-hot class probabilities.
std::vector<Node> build_nodes(const schema::FrameAnnotation& frame,
                              const FeatureProvider& provider);

// mask[i][j] is true iff node i is a tool and node j is an anatomy.
std::vector<std::vector<bool>> action_edge_mask(const std::vector<Node>& nodes);

// Every unordered node pair as a spatial candidate plus every mask-true
// ordered pair as an action edge. Spatial ground truth comes from box
// geometry; action ground truth comes from the frame's triplets, defaulting
// to the null action for unannotated pairs.
std::vector<Edge> candidate_edges(const schema::FrameAnnotation& frame,
                                  const std::vector<Node>& nodes,
                                  const schema::ClassCatalog& catalog,
                                  const FeatureProvider& provider);

// Keeps spatial candidates whose score is >= tau; action edges are always
// retained. scores must contain one entry per spatial candidate, in
// candidate order.
LatentGraph propose_edges(std::string frame_id, double width, double height,
                          std::vector<Node> nodes, const std::vector<Edge>& candidates,
                          const std::vector<double>& scores, double tau);

// Graphviz rendering of a frame's annotated graph: solid lines for spatial
// relations, dashed lines for action triplets, hand identity on tool nodes.
std::string to_dot(const schema::FrameAnnotation& frame, const schema::ClassCatalog& catalog);

}  // namespace ssg::graph
