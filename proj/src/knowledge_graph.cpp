#include "twinforge/knowledge_graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace twinforge::kg {

namespace {

nlohmann::ordered_json prop_to_json(const PropValue& v) {
    nlohmann::ordered_json j;
    std::visit([&j](const auto& x) { j = x; }, v);
    return j;
}

PropValue prop_from_json(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    throw Error("unsupported property value: " + j.dump());
}

nlohmann::ordered_json props_to_json(const PropMap& props) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : props) j[k] = prop_to_json(v);
    return j;
}

std::string prop_to_string(const PropValue& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return x;
            } else if constexpr (std::is_same_v<T, bool>) {
                return x ? "true" : "false";
            } else {
                return nlohmann::json(x).dump();
            }
        },
        v);
}

void xml_escape_into(std::string& out, const std::string& value) {
    for (char c : value) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
}

std::string xml_escape(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    xml_escape_into(out, value);
    return out;
}

const char* graphml_type(const PropValue& v) {
    if (std::holds_alternative<std::string>(v)) return "string";
    if (std::holds_alternative<std::int64_t>(v)) return "long";
    if (std::holds_alternative<double>(v)) return "double";
    return "boolean";
}

}  // namespace

const Node& Graph::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw NotFound("no node with id '" + id + "'");
    return it->second;
}

void Graph::upsert_node(const Node& node) {
    if (node.id.empty()) throw Error("node id must be nonempty");
    if (node.labels.empty()) throw Error("node '" + node.id + "' must carry at least one label");
    auto [it, inserted] = nodes_.emplace(node.id, node);
    if (inserted) return;
    Node& existing = it->second;
    existing.labels.insert(node.labels.begin(), node.labels.end());
    for (const auto& [key, value] : node.props) {
        auto found = existing.props.find(key);
        if (found == existing.props.end()) {
            existing.props.emplace(key, value);
        } else if (!(found->second == value)) {
            meta_.notes.push_back("prop conflict on " + node.id + "." + key + ": kept last writer");
            found->second = value;
        }
    }
}

void Graph::add_edge(const std::string& type, const std::string& source, const std::string& target,
                     const PropMap& props) {
    if (nodes_.count(source) == 0 || nodes_.count(target) == 0)
        throw DanglingEdge("edge " + type + " from '" + source + "' to '" + target +
                           "' references a missing node");
    std::string base = type + ":" + source + "->" + target;
    std::string id = base;
    for (int ordinal = 2;; ++ordinal) {
        auto it = edges_.find(id);
        if (it == edges_.end()) break;
        const Edge& e = it->second;
        if (e.type == type && e.source == source && e.target == target && e.props == props)
            return;  // duplicate triple with identical props
        id = base + "#" + std::to_string(ordinal);
    }
    edges_.emplace(id, Edge{id, type, source, target, props});
}

void Graph::merge_fragment(const Fragment& fragment) {
    for (const auto& edge : fragment.edges) {
        auto resolves = [&](const std::string& id) {
            if (nodes_.count(id) != 0) return true;
            return std::any_of(fragment.nodes.begin(), fragment.nodes.end(),
                               [&](const Node& n) { return n.id == id; });
        };
        if (!resolves(edge.source) || !resolves(edge.target))
            throw DanglingEdge("fragment edge " + edge.type + " from '" + edge.source + "' to '" +
                               edge.target + "' references a missing node");
    }
    for (const auto& node : fragment.nodes) upsert_node(node);
    for (const auto& edge : fragment.edges) add_edge(edge.type, edge.source, edge.target, edge.props);
}

std::vector<const Node*> Graph::query_neighbors(const std::string& node_id,
                                                const std::string& edge_type,
                                                Direction direction) const {
    if (nodes_.count(node_id) == 0) throw NotFound("no node with id '" + node_id + "'");
    std::vector<const Node*> result;
    std::set<std::string> seen;
    for (const auto& [id, edge] : edges_) {
        if (!edge_type.empty() && edge.type != edge_type) continue;
        const std::string* other = nullptr;
        if ((direction == Direction::out || direction == Direction::both) && edge.source == node_id)
            other = &edge.target;
        else if ((direction == Direction::in || direction == Direction::both) && edge.target == node_id)
            other = &edge.source;
        if (other != nullptr && seen.insert(*other).second) result.push_back(&nodes_.at(*other));
    }
    return result;
}

std::size_t Graph::count_edges_of_type(const std::string& type) const {
    return static_cast<std::size_t>(std::count_if(
        edges_.begin(), edges_.end(), [&](const auto& kv) { return kv.second.type == type; }));
}

std::size_t Graph::count_nodes_with_label(const std::string& label) const {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [&](const auto& kv) { return kv.second.labels.count(label) != 0; }));
}

std::vector<std::string> Graph::integrity_violations() const {
    std::vector<std::string> violations;
    for (const auto& [id, node] : nodes_)
        if (node.labels.empty()) violations.push_back("node '" + id + "' has no label");
    for (const auto& [id, edge] : edges_) {
        if (nodes_.count(edge.source) == 0)
            violations.push_back("edge '" + id + "' has unresolved source '" + edge.source + "'");
        if (nodes_.count(edge.target) == 0)
            violations.push_back("edge '" + id + "' has unresolved target '" + edge.target + "'");
    }
    return violations;
}

std::string Graph::export_json() const {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json meta;
    meta["created_at"] = meta_.created_at;
    meta["source_versions"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta_.source_versions) meta["source_versions"][k] = v;
    meta["notes"] = meta_.notes;
    doc["metadata"] = meta;

    doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& [id, node] : nodes_) {
        nlohmann::ordered_json n;
        n["id"] = node.id;
        n["labels"] = node.labels;  // std::set serializes sorted
        n["props"] = props_to_json(node.props);
        doc["nodes"].push_back(std::move(n));
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& [id, edge] : edges_) {
        nlohmann::ordered_json e;
        e["id"] = edge.id;
        e["type"] = edge.type;
        e["source"] = edge.source;
        e["target"] = edge.target;
        e["props"] = props_to_json(edge.props);
        doc["edges"].push_back(std::move(e));
    }
    return doc.dump(2) + "\n";
}

Graph Graph::import_json(const std::string& text) try {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
        throw Error("not a property-graph JSON document");
    Graph g;
    if (doc.contains("metadata")) {
        const auto& meta = doc["metadata"];
        g.meta_.created_at = meta.value("created_at", "");
        if (meta.contains("source_versions"))
            for (const auto& [k, v] : meta["source_versions"].items())
                g.meta_.source_versions[k] = v.get<std::string>();
        if (meta.contains("notes"))
            for (const auto& n : meta["notes"]) g.meta_.notes.push_back(n.get<std::string>());
    }
    for (const auto& n : doc["nodes"]) {
        Node node;
        node.id = n.at("id").get<std::string>();
        for (const auto& l : n.at("labels")) node.labels.insert(l.get<std::string>());
        for (const auto& [k, v] : n.at("props").items()) node.props[k] = prop_from_json(v);
        g.upsert_node(node);
    }
    for (const auto& e : doc["edges"]) {
        Edge edge;
        edge.id = e.at("id").get<std::string>();
        edge.type = e.at("type").get<std::string>();
        edge.source = e.at("source").get<std::string>();
        edge.target = e.at("target").get<std::string>();
        for (const auto& [k, v] : e.at("props").items()) edge.props[k] = prop_from_json(v);
        if (g.nodes_.count(edge.source) == 0 || g.nodes_.count(edge.target) == 0)
            throw DanglingEdge("imported edge '" + edge.id + "' references a missing node");
        g.edges_.emplace(edge.id, std::move(edge));
    }
    return g;
} catch (const nlohmann::json::exception& e) {
    throw Error("malformed property-graph document: " + std::string(e.what()));
}

void attach_estimates(Graph& graph, const std::vector<SensorEstimate>& estimates,
                      const std::map<std::string, GroupAssignment>& assignments) {
    auto ensure_signal = [&graph](const std::string& name) {
        std::string id = "sig:" + name;
        if (!graph.has_node(id)) {
            Node n;
            n.id = id;
            n.labels = {"Signal"};
            n.props["provenance"] = std::string("observed_only");
            graph.upsert_node(n);
            graph.metadata().notes.push_back("signal '" + name +
                                             "' observed in process data but absent from the PLC export");
        }
        return id;
    };

    for (const auto& est : estimates) {
        std::string sig_id = ensure_signal(est.signal_name);
        Node pos;
        pos.id = "pos:" + est.signal_name;
        pos.labels = {"Position"};
        pos.props["x"] = est.position.x();
        pos.props["y"] = est.position.y();
        pos.props["z"] = est.position.z();
        pos.props["dispersion"] = est.dispersion;
        pos.props["support"] = static_cast<std::int64_t>(est.support);
        graph.upsert_node(pos);
        graph.add_edge("LOCATED_AT", sig_id, pos.id);
    }

    for (const auto& [signal, assignment] : assignments) {
        std::string sig_id = ensure_signal(signal);
        std::string grp_id = "grp:" + assignment.group;
        if (!graph.has_node(grp_id)) {
            Node grp;
            grp.id = grp_id;
            grp.labels = {"MechatronicGroup"};
            graph.upsert_node(grp);
        }
        PropMap props;
        if (assignment.tie) props["tie"] = true;
        graph.add_edge("BELONGS_TO", sig_id, grp_id, props);
    }
}

std::string Graph::export_graphml() const {
    // Collect typed attribute keys; a prop name used with conflicting types
    // degrades to string.
    auto collect_keys = [](const auto& items) {
        std::map<std::string, std::string> keys;
        for (const auto& [id, item] : items) {
            for (const auto& [name, value] : item.props) {
                std::string t = graphml_type(value);
                auto [it, inserted] = keys.emplace(name, t);
                if (!inserted && it->second != t) it->second = "string";
            }
        }
        return keys;
    };
    std::map<std::string, std::string> node_keys = collect_keys(nodes_);
    std::map<std::string, std::string> edge_keys = collect_keys(edges_);

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out += "  <key id=\"labels\" for=\"node\" attr.name=\"labels\" attr.type=\"string\"/>\n";
    for (const auto& [name, type] : node_keys)
        out += "  <key id=\"n_" + xml_escape(name) + "\" for=\"node\" attr.name=\"" + xml_escape(name) +
               "\" attr.type=\"" + type + "\"/>\n";
    out += "  <key id=\"type\" for=\"edge\" attr.name=\"type\" attr.type=\"string\"/>\n";
    for (const auto& [name, type] : edge_keys)
        out += "  <key id=\"e_" + xml_escape(name) + "\" for=\"edge\" attr.name=\"" + xml_escape(name) +
               "\" attr.type=\"" + type + "\"/>\n";
    out += "  <graph id=\"twinforge\" edgedefault=\"directed\">\n";
    for (const auto& [id, node] : nodes_) {
        out += "    <node id=\"" + xml_escape(id) + "\">\n";
        std::string labels;
        for (const auto& l : node.labels) {
            if (!labels.empty()) labels += ',';
            labels += l;
        }
        out += "      <data key=\"labels\">" + xml_escape(labels) + "</data>\n";
        for (const auto& [name, value] : node.props)
            out += "      <data key=\"n_" + xml_escape(name) + "\">" + xml_escape(prop_to_string(value)) +
                   "</data>\n";
        out += "    </node>\n";
    }
    for (const auto& [id, edge] : edges_) {
        out += "    <edge id=\"" + xml_escape(id) + "\" source=\"" + xml_escape(edge.source) +
               "\" target=\"" + xml_escape(edge.target) + "\">\n";
        out += "      <data key=\"type\">" + xml_escape(edge.type) + "</data>\n";
        for (const auto& [name, value] : edge.props)
            out += "      <data key=\"e_" + xml_escape(name) + "\">" + xml_escape(prop_to_string(value)) +
                   "</data>\n";
        out += "    </edge>\n";
    }
    out += "  </graph>\n";
    out += "</graphml>\n";
    return out;
}

}  // namespace twinforge::kg
