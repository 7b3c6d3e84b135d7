#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "smapf/instance.hpp"

namespace smapf {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << content;
}

// Instance document:
//   { "map": <path>, "mode": "uniform"|"nonuniform", "cycle_time": c,
//     "streams": [ { "id", "start": [row,col], "goal": [row,col],
//                    "t_start", "cycle" } ] }
// "cycle_time" is present only in uniform mode; per-stream "cycle" only in
// non-uniform mode.
inline Json instance_to_json(const Instance& inst, std::string_view map_path) {
    Json j;
    j["map"] = std::string(map_path);
    j["mode"] = inst.is_uniform() ? "uniform" : "nonuniform";
    if (inst.is_uniform()) j["cycle_time"] = inst.cycle_time();
    Json streams = Json::array();
    for (const AgentStream& s : inst.streams()) {
        Json js;
        js["id"] = s.id;
        js["start"] = {s.start.row, s.start.col};
        js["goal"] = {s.goal.row, s.goal.col};
        js["t_start"] = s.t_start;
        if (!inst.is_uniform()) js["cycle"] = s.cycle;
        streams.push_back(std::move(js));
    }
    j["streams"] = std::move(streams);
    return j;
}

inline Vertex vertex_from_json(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ParseError(std::string("instance json: ") + what + " must be [row, col]");
    return Vertex{j[0].get<int>(), j[1].get<int>()};
}

inline Instance instance_from_json(const Json& j, GridMap map) {
    try {
        const std::string mode = j.at("mode").get<std::string>();
        if (mode != "uniform" && mode != "nonuniform")
            throw ParseError("instance json: mode must be 'uniform' or 'nonuniform'");
        const bool uniform = mode == "uniform";
        std::vector<AgentStream> streams;
        for (const Json& js : j.at("streams")) {
            AgentStream s;
            s.id = js.at("id").get<int>();
            s.start = vertex_from_json(js.at("start"), "start");
            s.goal = vertex_from_json(js.at("goal"), "goal");
            s.t_start = js.at("t_start").get<int>();
            s.cycle = uniform ? 1 : js.at("cycle").get<int>();
            streams.push_back(s);
        }
        if (uniform) {
            return Instance::uniform(std::move(map), j.at("cycle_time").get<int>(), std::move(streams));
        }
        return Instance::non_uniform(std::move(map), std::move(streams));
    } catch (const Json::exception& e) {
        throw ParseError(std::string("instance json: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("instance json: ") + e.what());
    }
}

// Loads an instance document plus the map file it names; a relative map path
// is resolved against the document's directory.
inline Instance load_instance_file(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    std::string map_path;
    try {
        map_path = j.at("map").get<std::string>();
    } catch (const Json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    std::filesystem::path mp(map_path);
    if (mp.is_relative()) mp = std::filesystem::path(path).parent_path() / mp;
    GridMap map = GridMap::parse(read_file(mp.string()));
    return instance_from_json(j, std::move(map));
}

// Solution document:
//   { "cycle_time", "soc", "streams": [ { "id", "t_start", "start": [row,col],
//                                         "actions": "<UDLRW string>" } ] }
// Non-uniform solutions carry "mode": "nonuniform" and per-stream "cycle"
// instead of the global "cycle_time".
inline Json solution_to_json(const Instance& inst, const Solution& sol) {
    Json j;
    if (inst.is_uniform()) {
        j["cycle_time"] = inst.cycle_time();
    } else {
        j["mode"] = "nonuniform";
    }
    j["soc"] = soc(sol);
    Json streams = Json::array();
    for (int i = 0; i < inst.num_streams(); ++i) {
        const AgentStream& s = inst.stream(i);
        Json js;
        js["id"] = s.id;
        js["t_start"] = s.t_start;
        js["start"] = {s.start.row, s.start.col};
        js["actions"] = actions_of(sol.paths[static_cast<std::size_t>(i)]);
        if (!inst.is_uniform()) js["cycle"] = s.cycle;
        streams.push_back(std::move(js));
    }
    j["streams"] = std::move(streams);
    return j;
}

inline Solution solution_from_json(const Instance& inst, const Json& j) {
    try {
        const Json& streams = j.at("streams");
        if (static_cast<int>(streams.size()) != inst.num_streams())
            throw ParseError("solution json: stream count does not match the instance");
        Solution sol;
        sol.paths.resize(streams.size());
        for (const Json& js : streams) {
            int id = js.at("id").get<int>();
            if (id < 0 || id >= inst.num_streams())
                throw ParseError("solution json: unknown stream id " + std::to_string(id));
            const AgentStream& s = inst.stream(id);
            Vertex start = vertex_from_json(js.at("start"), "start");
            if (start != s.start)
                throw ParseError("solution json: stream " + std::to_string(id) +
                                 " start does not match the instance");
            if (js.at("t_start").get<int>() != s.t_start)
                throw ParseError("solution json: stream " + std::to_string(id) +
                                 " t_start does not match the instance");
            sol.paths[static_cast<std::size_t>(id)] =
                path_of(start, js.at("actions").get<std::string>(), inst.map());
        }
        return sol;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("solution json: ") + e.what());
    }
}

}  // namespace smapf
