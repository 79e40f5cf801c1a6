#pragma once

#include "twinforge/errors.hpp"
#include "twinforge/fusion.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace twinforge::kg {

using PropValue = std::variant<std::string, std::int64_t, double, bool>;
using PropMap = std::map<std::string, PropValue>;

struct Node {
    std::string id;
    std::set<std::string> labels;
    PropMap props;
};

struct Edge {
    std::string id;
    std::string type;
    std::string source;
    std::string target;
    PropMap props;
};

/// A graph piece produced by one analysis stage, merged into the full graph.
struct Fragment {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
};

struct Metadata {
    std::string created_at;  // caller-supplied; kept deterministic for fixed inputs
    std::map<std::string, std::string> source_versions;
    std::vector<std::string> notes;  // prop conflicts, auto-created nodes
};

enum class Direction { out, in, both };

/// In-memory labeled property graph. Build phase is single-writer; exports
/// are byte-deterministic for a fixed graph.
class Graph {
  public:
    /// Union by node id: existing nodes gain labels and props (conflicting
    /// prop values keep the last writer and append a metadata note); edges
    /// deduplicate on (type, source, target, props). Throws DanglingEdge if
    /// a fragment edge references a node absent from graph and fragment.
    void merge_fragment(const Fragment& fragment);

    /// Adds a node directly (same semantics as a one-node fragment merge).
    void upsert_node(const Node& node);
    void add_edge(const std::string& type, const std::string& source, const std::string& target,
                  const PropMap& props = {});

    bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }
    const Node& node(const std::string& id) const;
    const std::map<std::string, Node>& nodes() const { return nodes_; }
    const std::map<std::string, Edge>& edges() const { return edges_; }

    Metadata& metadata() { return meta_; }
    const Metadata& metadata() const { return meta_; }

    std::vector<const Node*> query_neighbors(const std::string& node_id,
                                             const std::string& edge_type = "",
                                             Direction direction = Direction::out) const;

    std::size_t count_edges_of_type(const std::string& type) const;
    std::size_t count_nodes_with_label(const std::string& label) const;

    /// Referential integrity: every edge endpoint resolves, every node has
    /// at least one label. Returns the violations (empty means consistent).
    std::vector<std::string> integrity_violations() const;

    std::string export_json() const;
    std::string export_graphml() const;
    static Graph import_json(const std::string& text);

  private:
    std::map<std::string, Node> nodes_;
    std::map<std::string, Edge> edges_;
    Metadata meta_;
};

/// Per estimate: a Position node (pos:<signal>) and a LOCATED_AT edge from
/// the Signal node; per assignment: a MechatronicGroup node (grp:<id>) and
/// a BELONGS_TO edge. A signal unknown to the graph (absent from the PLC
/// export) is auto-created with label Signal and provenance=observed_only,
/// and the event is recorded in the metadata notes.
void attach_estimates(Graph& graph, const std::vector<SensorEstimate>& estimates,
                      const std::map<std::string, GroupAssignment>& assignments);

}  // namespace twinforge::kg
