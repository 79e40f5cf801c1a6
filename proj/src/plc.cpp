#include "twinforge/plc.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace twinforge::plc {

namespace {

namespace pt = boost::property_tree;

ModuleKind parse_module_kind(const std::string& s, const std::string& path) {
    if (s == "CPU") return ModuleKind::CPU;
    if (s == "DI") return ModuleKind::DI;
    if (s == "DO") return ModuleKind::DO;
    if (s == "AI") return ModuleKind::AI;
    if (s == "AO") return ModuleKind::AO;
    throw SchemaViolation(path, "unknown module type '" + s + "'");
}

SignalDirection parse_direction(const std::string& s, const std::string& path) {
    if (s == "in") return SignalDirection::in;
    if (s == "out") return SignalDirection::out;
    throw SchemaViolation(path, "unknown direction '" + s + "'");
}

DataType parse_datatype(const std::string& s, const std::string& path) {
    if (s == "BOOL") return DataType::BOOL;
    if (s == "INT") return DataType::INT;
    if (s == "REAL") return DataType::REAL;
    throw SchemaViolation(path, "unknown datatype '" + s + "'");
}

std::string attr(const pt::ptree& node, const std::string& name, const std::string& path) {
    auto value = node.get_optional<std::string>("<xmlattr>." + name);
    if (!value) throw SchemaViolation(path, "missing attribute '" + name + "'");
    return *value;
}

void check_unique(std::set<std::string>& seen, const std::string& value, const std::string& path,
                  const std::string& what) {
    if (!seen.insert(value).second)
        throw SchemaViolation(path, "duplicate " + what + " '" + value + "'");
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

void emit_attr(std::string& out, const char* name, const std::string& value) {
    out += ' ';
    out += name;
    out += "=\"";
    xml_escape_into(out, value);
    out += '"';
}

}  // namespace

bool operator==(const HardwareModule& a, const HardwareModule& b) {
    return a.id == b.id && a.kind == b.kind;
}
bool operator==(const Signal& a, const Signal& b) {
    return a.name == b.name && a.address == b.address && a.direction == b.direction &&
           a.datatype == b.datatype && a.module == b.module;
}
bool operator==(const FunctionBlock& a, const FunctionBlock& b) {
    return a.name == b.name && a.reads == b.reads && a.writes == b.writes && a.calls == b.calls;
}
bool operator==(const DataBlockField& a, const DataBlockField& b) {
    return a.name == b.name && a.datatype == b.datatype;
}
bool operator==(const DataBlock& a, const DataBlock& b) {
    return a.name == b.name && a.fields == b.fields;
}
bool operator==(const PlcProject& a, const PlcProject& b) {
    return a.name == b.name && a.hardware_modules == b.hardware_modules && a.signals == b.signals &&
           a.function_blocks == b.function_blocks && a.data_blocks == b.data_blocks;
}

std::string to_string(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::CPU: return "CPU";
        case ModuleKind::DI: return "DI";
        case ModuleKind::DO: return "DO";
        case ModuleKind::AI: return "AI";
        case ModuleKind::AO: return "AO";
    }
    return "?";
}

std::string to_string(SignalDirection dir) {
    return dir == SignalDirection::in ? "in" : "out";
}

std::string to_string(DataType type) {
    switch (type) {
        case DataType::BOOL: return "BOOL";
        case DataType::INT: return "INT";
        case DataType::REAL: return "REAL";
    }
    return "?";
}

std::vector<std::string> unresolved_references(const PlcProject& project) {
    std::set<std::string> modules, signals, blocks;
    for (const auto& m : project.hardware_modules) modules.insert(m.id);
    for (const auto& s : project.signals) signals.insert(s.name);
    for (const auto& b : project.function_blocks) blocks.insert(b.name);

    std::vector<std::string> unresolved;
    std::set<std::string> reported;
    auto report = [&](const std::string& name) {
        if (reported.insert(name).second) unresolved.push_back(name);
    };
    for (const auto& s : project.signals)
        if (modules.count(s.module) == 0) report(s.module);
    for (const auto& fb : project.function_blocks) {
        for (const auto& r : fb.reads)
            if (signals.count(r) == 0) report(r);
        for (const auto& w : fb.writes)
            if (signals.count(w) == 0) report(w);
        for (const auto& c : fb.calls)
            if (blocks.count(c) == 0) report(c);
    }
    return unresolved;
}

PlcProject parse_plc_export(std::istream& xml) {
    pt::ptree doc;
    try {
        pt::read_xml(xml, doc, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw SchemaViolation("document", std::string("not well-formed XML: ") + e.what());
    }

    auto root = doc.get_child_optional("PlcProject");
    if (!root) throw SchemaViolation("document", "root element must be PlcProject");

    PlcProject project;
    project.name = attr(*root, "name", "PlcProject");

    std::set<std::string> module_ids, signal_names, fb_names, db_names;

    for (const auto& [key, child] : *root) {
        if (key == "<xmlattr>") continue;
        if (key == "Hardware") {
            for (const auto& [mkey, mnode] : child) {
                if (mkey == "<xmlattr>") continue;
                if (mkey != "Module")
                    throw SchemaViolation("PlcProject.Hardware", "unexpected element '" + mkey + "'");
                HardwareModule m;
                m.id = attr(mnode, "id", "Hardware.Module");
                check_unique(module_ids, m.id, "Hardware.Module", "module id");
                m.kind = parse_module_kind(attr(mnode, "type", "Hardware.Module[" + m.id + "]"),
                                           "Hardware.Module[" + m.id + "]");
                project.hardware_modules.push_back(std::move(m));
            }
        } else if (key == "Signals") {
            for (const auto& [skey, snode] : child) {
                if (skey == "<xmlattr>") continue;
                if (skey != "Signal")
                    throw SchemaViolation("PlcProject.Signals", "unexpected element '" + skey + "'");
                Signal s;
                s.name = attr(snode, "name", "Signals.Signal");
                const std::string path = "Signals.Signal[" + s.name + "]";
                check_unique(signal_names, s.name, path, "signal name");
                s.address = attr(snode, "address", path);
                if (s.address.empty()) throw SchemaViolation(path, "address must be nonempty");
                s.direction = parse_direction(attr(snode, "direction", path), path);
                s.datatype = parse_datatype(attr(snode, "datatype", path), path);
                s.module = attr(snode, "module", path);
                project.signals.push_back(std::move(s));
            }
        } else if (key == "Blocks") {
            for (const auto& [bkey, bnode] : child) {
                if (bkey == "<xmlattr>") continue;
                if (bkey == "FunctionBlock") {
                    FunctionBlock fb;
                    fb.name = attr(bnode, "name", "Blocks.FunctionBlock");
                    const std::string path = "Blocks.FunctionBlock[" + fb.name + "]";
                    check_unique(fb_names, fb.name, path, "function block name");
                    for (const auto& [ekey, enode] : bnode) {
                        if (ekey == "<xmlattr>") continue;
                        if (ekey == "Reads")
                            fb.reads.push_back(attr(enode, "signal", path + ".Reads"));
                        else if (ekey == "Writes")
                            fb.writes.push_back(attr(enode, "signal", path + ".Writes"));
                        else if (ekey == "Calls")
                            fb.calls.push_back(attr(enode, "block", path + ".Calls"));
                        else
                            throw SchemaViolation(path, "unexpected element '" + ekey + "'");
                    }
                    project.function_blocks.push_back(std::move(fb));
                } else if (bkey == "DataBlock") {
                    DataBlock db;
                    db.name = attr(bnode, "name", "Blocks.DataBlock");
                    const std::string path = "Blocks.DataBlock[" + db.name + "]";
                    check_unique(db_names, db.name, path, "data block name");
                    std::set<std::string> field_names;
                    for (const auto& [fkey, fnode] : bnode) {
                        if (fkey == "<xmlattr>") continue;
                        if (fkey != "Field") throw SchemaViolation(path, "unexpected element '" + fkey + "'");
                        DataBlockField f;
                        f.name = attr(fnode, "name", path + ".Field");
                        check_unique(field_names, f.name, path + ".Field", "field name");
                        f.datatype = parse_datatype(attr(fnode, "datatype", path + ".Field[" + f.name + "]"),
                                                    path + ".Field[" + f.name + "]");
                        db.fields.push_back(std::move(f));
                    }
                    project.data_blocks.push_back(std::move(db));
                } else {
                    throw SchemaViolation("PlcProject.Blocks", "unexpected element '" + bkey + "'");
                }
            }
        } else {
            throw SchemaViolation("PlcProject", "unexpected element '" + key + "'");
        }
    }

    auto unresolved = unresolved_references(project);
    if (!unresolved.empty()) throw DanglingReference(std::move(unresolved));
    return project;
}

PlcProject parse_plc_export(const std::string& xml) {
    std::istringstream in(xml);
    return parse_plc_export(in);
}

std::string serialize_plc_export(const PlcProject& project) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<PlcProject";
    emit_attr(out, "name", project.name);
    out += ">\n";

    out += "  <Hardware>\n";
    for (const auto& m : project.hardware_modules) {
        out += "    <Module";
        emit_attr(out, "id", m.id);
        emit_attr(out, "type", to_string(m.kind));
        out += "/>\n";
    }
    out += "  </Hardware>\n";

    out += "  <Signals>\n";
    for (const auto& s : project.signals) {
        out += "    <Signal";
        emit_attr(out, "name", s.name);
        emit_attr(out, "address", s.address);
        emit_attr(out, "direction", to_string(s.direction));
        emit_attr(out, "datatype", to_string(s.datatype));
        emit_attr(out, "module", s.module);
        out += "/>\n";
    }
    out += "  </Signals>\n";

    out += "  <Blocks>\n";
    for (const auto& fb : project.function_blocks) {
        out += "    <FunctionBlock";
        emit_attr(out, "name", fb.name);
        out += ">\n";
        for (const auto& r : fb.reads) {
            out += "      <Reads";
            emit_attr(out, "signal", r);
            out += "/>\n";
        }
        for (const auto& w : fb.writes) {
            out += "      <Writes";
            emit_attr(out, "signal", w);
            out += "/>\n";
        }
        for (const auto& c : fb.calls) {
            out += "      <Calls";
            emit_attr(out, "block", c);
            out += "/>\n";
        }
        out += "    </FunctionBlock>\n";
    }
    for (const auto& db : project.data_blocks) {
        out += "    <DataBlock";
        emit_attr(out, "name", db.name);
        out += ">\n";
        for (const auto& f : db.fields) {
            out += "      <Field";
            emit_attr(out, "name", f.name);
            emit_attr(out, "datatype", to_string(f.datatype));
            out += "/>\n";
        }
        out += "    </DataBlock>\n";
    }
    out += "  </Blocks>\n";
    out += "</PlcProject>\n";
    return out;
}

kg::Fragment build_software_graph(const PlcProject& project) {
    kg::Fragment fragment;
    for (const auto& m : project.hardware_modules) {
        kg::Node n;
        n.id = "hw:" + m.id;
        n.labels = {"HardwareModule"};
        n.props["kind"] = to_string(m.kind);
        fragment.nodes.push_back(std::move(n));
    }
    for (const auto& s : project.signals) {
        kg::Node n;
        n.id = "sig:" + s.name;
        n.labels = {"Signal"};
        n.props["address"] = s.address;
        n.props["direction"] = to_string(s.direction);
        n.props["datatype"] = to_string(s.datatype);
        fragment.nodes.push_back(std::move(n));
        fragment.edges.push_back({"", "MAPPED_TO", "sig:" + s.name, "hw:" + s.module, {}});
    }
    for (const auto& fb : project.function_blocks) {
        kg::Node n;
        n.id = "fb:" + fb.name;
        n.labels = {"FunctionBlock"};
        fragment.nodes.push_back(std::move(n));
        for (const auto& r : fb.reads)
            fragment.edges.push_back({"", "READS", "fb:" + fb.name, "sig:" + r, {}});
        for (const auto& w : fb.writes)
            fragment.edges.push_back({"", "WRITES", "fb:" + fb.name, "sig:" + w, {}});
        for (const auto& c : fb.calls)
            fragment.edges.push_back({"", "CALLS", "fb:" + fb.name, "fb:" + c, {}});
    }
    for (const auto& db : project.data_blocks) {
        kg::Node n;
        n.id = "db:" + db.name;
        n.labels = {"DataBlock"};
        for (const auto& f : db.fields) n.props["field." + f.name] = to_string(f.datatype);
        fragment.nodes.push_back(std::move(n));
    }
    return fragment;
}

}  // namespace twinforge::plc
