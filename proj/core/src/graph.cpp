#include "ssg/graph.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ssg::graph {

using schema::ObjectKind;

int LatentGraph::tool_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) {
        return n.kind == ObjectKind::Tool;
    }));
}

int LatentGraph::anatomy_count() const {
    return static_cast<int>(nodes.size()) - tool_count();
}

int LatentGraph::spatial_edge_count() const {
    return static_cast<int>(std::count_if(edges.begin(), edges.end(), [](const Edge& e) {
        return e.kind == EdgeKind::Spatial;
    }));
}

int LatentGraph::action_edge_count() const {
    return static_cast<int>(edges.size()) - spatial_edge_count();
}

// -----------------------------
// FeatureProvider
// -----------------------------

FeatureProvider::FeatureProvider(const schema::ClassCatalog& catalog, int d_appearance)
    : n_tool_classes_(static_cast<int>(catalog.tools.size())),
      n_anatomy_classes_(static_cast<int>(catalog.anatomies.size())),
      d_appearance_(d_appearance) {}

void FeatureProvider::load_sidecar(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("sidecar: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("sidecar: top level must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!it->is_array() || static_cast<int>(it->size()) != d_appearance_)
            throw std::invalid_argument("sidecar: entry '" + it.key() + "' must be an array of length " +
                                        std::to_string(d_appearance_));
        std::vector<double> v;
        for (const auto& e : *it) {
            if (!e.is_number()) throw std::invalid_argument("sidecar: entry '" + it.key() + "' must be numeric");
            v.push_back(e.get<double>());
        }
        appearance_[it.key()] = std::move(v);
    }
}

int FeatureProvider::node_dim() const {
    return n_tool_classes_ + n_anatomy_classes_ + 4 + d_appearance_;
}

std::vector<double> FeatureProvider::node_feature(const schema::FrameAnnotation& frame,
                                                  const schema::ObjectAnn& obj) const {
    std::vector<double> f(node_dim(), 0.0);
    const int off = obj.kind == ObjectKind::Tool ? 0 : n_tool_classes_;
    f[off + obj.class_index] = 1.0;
    const auto geo = geom::normalize_box(obj.bbox, frame.width, frame.height);
    const int gbase = n_tool_classes_ + n_anatomy_classes_;
    for (int i = 0; i < 4; ++i) f[gbase + i] = geo[i];
    if (d_appearance_ > 0) {
        auto it = appearance_.find(frame.frame_id + "/" + obj.id);
        if (it == appearance_.end())
            throw std::invalid_argument("sidecar: no appearance vector for '" + frame.frame_id + "/" +
                                        obj.id + "'");
        std::copy(it->second.begin(), it->second.end(), f.begin() + gbase + 4);
    }
    return f;
}

// -----------------------------
// Graph construction
// -----------------------------

std::vector<Node> build_nodes(const schema::FrameAnnotation& frame,
                              const FeatureProvider& provider) {
    std::vector<Node> nodes;
    nodes.reserve(frame.objects.size());
    for (const auto& obj : frame.objects) {
        Node n;
        n.obj_id = obj.id;
        n.kind = obj.kind;
        n.box = obj.bbox;
        n.class_probs.assign(obj.kind == ObjectKind::Tool ? provider.tool_classes()
                                                          : provider.anatomy_classes(),
                             0.0);
        n.class_probs[obj.class_index] = 1.0;
        n.hand_gt = obj.hand;
        n.feature = provider.node_feature(frame, obj);
        nodes.push_back(std::move(n));
    }
    return nodes;
}

std::vector<std::vector<bool>> action_edge_mask(const std::vector<Node>& nodes) {
    const size_t n = nodes.size();
    std::vector<std::vector<bool>> mask(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            mask[i][j] = nodes[i].kind == ObjectKind::Tool && nodes[j].kind == ObjectKind::Anatomy;
    return mask;
}

std::vector<double> FeatureProvider::edge_feature(const schema::FrameAnnotation& frame,
                                                  const Node& a, const Node& b) const {
    const geom::Box ub = geom::union_box(a.box, b.box);
    const auto geo = geom::normalize_box(ub, frame.width, frame.height);
    std::vector<double> f(geo.begin(), geo.end());
    f.reserve(4 + a.feature.size());
    for (size_t i = 0; i < a.feature.size(); ++i)
        f.push_back((a.feature[i] + b.feature[i]) / 2.0);
    return f;
}

std::vector<Edge> candidate_edges(const schema::FrameAnnotation& frame,
                                  const std::vector<Node>& nodes,
                                  const schema::ClassCatalog& catalog,
                                  const FeatureProvider& provider) {
    const int n = static_cast<int>(nodes.size());
    std::vector<Edge> edges;

    // Annotated (tool id, target id) -> action, and tools with a non-null triplet.
    std::map<std::pair<std::string, std::string>, int> annotated;
    const auto null_action = catalog.null_action_index();
    for (const auto& t : frame.triplets)
        if (t.target_obj) annotated[{t.tool_obj, *t.target_obj}] = t.action_index;

    auto pair_has_triplet = [&](const Node& a, const Node& b) {
        const Node& tool = a.kind == ObjectKind::Tool ? a : b;
        const Node& anat = a.kind == ObjectKind::Tool ? b : a;
        auto it = annotated.find({tool.obj_id, anat.obj_id});
        return it != annotated.end() && (!null_action || it->second != *null_action);
    };

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Edge e;
            e.src = i;
            e.dst = j;
            e.kind = EdgeKind::Spatial;
            e.feature = provider.edge_feature(frame, nodes[i], nodes[j]);
            e.spatial_gt = geom::spatial_relation(nodes[i].box, nodes[j].box);
            const bool cross = nodes[i].kind != nodes[j].kind;
            e.exist_gt = geom::iou(nodes[i].box, nodes[j].box) > 0 ||
                         (cross && pair_has_triplet(nodes[i], nodes[j]));
            edges.push_back(std::move(e));
        }

    for (int i = 0; i < n; ++i) {
        if (nodes[i].kind != ObjectKind::Tool) continue;
        for (int j = 0; j < n; ++j) {
            if (nodes[j].kind != ObjectKind::Anatomy) continue;
            Edge e;
            e.src = i;
            e.dst = j;
            e.kind = EdgeKind::Action;
            e.feature = provider.edge_feature(frame, nodes[i], nodes[j]);
            auto it = annotated.find({nodes[i].obj_id, nodes[j].obj_id});
            if (it != annotated.end()) {
                e.action_gt = it->second;
            } else {
                if (!null_action)
                    throw std::runtime_error("catalog has no '" + std::string(schema::kNullActionName) +
                                             "' action; cannot label unannotated pair");
                e.action_gt = *null_action;
            }
            edges.push_back(std::move(e));
        }
    }
    return edges;
}

LatentGraph propose_edges(std::string frame_id, double width, double height,
                          std::vector<Node> nodes, const std::vector<Edge>& candidates,
                          const std::vector<double>& scores, double tau) {
    size_t n_spatial = 0;
    for (const auto& e : candidates)
        if (e.kind == EdgeKind::Spatial) ++n_spatial;
    if (scores.size() != n_spatial)
        throw std::invalid_argument("propose_edges: got " + std::to_string(scores.size()) +
                                    " scores for " + std::to_string(n_spatial) + " spatial candidates");

    LatentGraph g;
    g.frame_id = std::move(frame_id);
    g.width = width;
    g.height = height;
    g.nodes = std::move(nodes);

    size_t si = 0;
    for (const auto& e : candidates) {
        if (e.kind == EdgeKind::Spatial) {
            if (scores[si++] >= tau) g.edges.push_back(e);
        } else {
            g.edges.push_back(e);
        }
    }
    return g;
}

// -----------------------------
// DOT export
// -----------------------------

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string to_dot(const schema::FrameAnnotation& frame, const schema::ClassCatalog& catalog) {
    std::ostringstream os;
    os << "digraph \"" << dot_escape(frame.frame_id) << "\" {\n";
    if (!frame.objects.empty()) {
        os << "  node [shape=box];\n";
        for (const auto& o : frame.objects) {
            std::string label = o.kind == ObjectKind::Tool ? catalog.tools[o.class_index]
                                                           : catalog.anatomies[o.class_index];
            if (o.kind == ObjectKind::Tool && o.hand)
                label += "\\n(" + catalog.hands[*o.hand] + ")";
            os << "  \"" << dot_escape(o.id) << "\" [label=\"" << dot_escape(label) << "\"];\n";
        }
        for (size_t i = 0; i < frame.objects.size(); ++i)
            for (size_t j = i + 1; j < frame.objects.size(); ++j) {
                const auto rel = geom::spatial_relation(frame.objects[i].bbox, frame.objects[j].bbox);
                os << "  \"" << dot_escape(frame.objects[i].id) << "\" -> \""
                   << dot_escape(frame.objects[j].id) << "\" [style=solid, dir=none, label=\""
                   << geom::to_string(rel) << "\"];\n";
            }
        for (const auto& t : frame.triplets) {
            if (!t.target_obj) continue;
            os << "  \"" << dot_escape(t.tool_obj) << "\" -> \"" << dot_escape(*t.target_obj)
               << "\" [style=dashed, label=\"" << dot_escape(catalog.actions[t.action_index])
               << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace ssg::graph
