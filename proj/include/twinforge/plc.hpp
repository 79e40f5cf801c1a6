#pragma once

#include "twinforge/errors.hpp"
#include "twinforge/knowledge_graph.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace twinforge::plc {

enum class ModuleKind { CPU, DI, DO, AI, AO };
enum class SignalDirection { in, out };
enum class DataType { BOOL, INT, REAL };

struct HardwareModule {
    std::string id;
    ModuleKind kind = ModuleKind::CPU;
};

struct Signal {
    std::string name;
    std::string address;  // e.g. %I0.0
    SignalDirection direction = SignalDirection::in;
    DataType datatype = DataType::BOOL;
    std::string module;  // hardware module id
};

struct FunctionBlock {
    std::string name;
    std::vector<std::string> reads;   // signal names
    std::vector<std::string> writes;  // signal names
    std::vector<std::string> calls;   // block names
};

struct DataBlockField {
    std::string name;
    DataType datatype = DataType::BOOL;
};

struct DataBlock {
    std::string name;
    std::vector<DataBlockField> fields;
};

/// Structural model of one vendor-neutral PLC project export.
struct PlcProject {
    std::string name;
    std::vector<HardwareModule> hardware_modules;
    std::vector<Signal> signals;
    std::vector<FunctionBlock> function_blocks;
    std::vector<DataBlock> data_blocks;
};

bool operator==(const HardwareModule&, const HardwareModule&);
bool operator==(const Signal&, const Signal&);
bool operator==(const FunctionBlock&, const FunctionBlock&);
bool operator==(const DataBlockField&, const DataBlockField&);
bool operator==(const DataBlock&, const DataBlock&);
bool operator==(const PlcProject&, const PlcProject&);

std::string to_string(ModuleKind kind);
std::string to_string(SignalDirection dir);
std::string to_string(DataType type);

/// Parses the neutral export schema (schemas/plc_project.xsd). Structural
/// problems throw SchemaViolation; unresolved references are collected over
/// the whole document and thrown together as DanglingReference.
PlcProject parse_plc_export(std::istream& xml);
PlcProject parse_plc_export(const std::string& xml);

/// Canonical serializer: parse(serialize(p)) == p, and serialization is
/// byte-deterministic, so serialize∘parse is a canonical form.
std::string serialize_plc_export(const PlcProject& project);

/// Every unresolved signal/module/block reference, in document order.
std::vector<std::string> unresolved_references(const PlcProject& project);

/// Fixed rule table: Signal/FunctionBlock/DataBlock/HardwareModule become
/// labeled nodes (ids sig:/fb:/db:/hw:), reads/writes/calls/module mappings
/// become READS/WRITES/CALLS/MAPPED_TO edges.
kg::Fragment build_software_graph(const PlcProject& project);

}  // namespace twinforge::plc
